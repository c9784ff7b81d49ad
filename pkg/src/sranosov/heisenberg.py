"""Heisenberg group geodesics.

Contact form alpha = dz - (x dy - y dx)/2 on R^3 with orthonormal frame

    X1 = d/dx - (y/2) d/dz,   X2 = d/dy + (x/2) d/dz,   [X1, X2] = d/dz.

Normal geodesics on the unit level set have theta(t) = v0 t + theta0 and
velocity cos(theta) X1 + sin(theta) X2; their xy-projections are circles
(lines when v0 = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numkit import OdeProblem, integrate
from .srgeom import EnergyReport, HorizontalPath, energy_split

DEFAULT_SAMPLES = 20001


@dataclass(frozen=True)
class HeisenbergPoint:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def as_array(self):
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class HeisenbergGeodesicParams:
    v0: float
    theta0: float
    length: float
    start: HeisenbergPoint = HeisenbergPoint()

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"geodesic length must be positive, got {self.length!r}")


def frame_fields(point):
    """Components of (X1, X2) at ``point`` in the coordinate basis."""
    x, y, _ = point
    return np.array([1.0, 0.0, -y / 2]), np.array([0.0, 1.0, x / 2])


@dataclass(frozen=True)
class HeisenbergGeodesic:
    params: HeisenbergGeodesicParams
    times: np.ndarray
    points: np.ndarray  # (n, 3)
    path: HorizontalPath

    @property
    def endpoint(self):
        return self.points[-1]


def _rhs(v0, theta0):
    def rhs(t, u):
        th = v0 * t + theta0
        c, s = math.cos(th), math.sin(th)
        return np.array([c, s, 0.5 * (u[0] * s - u[1] * c)])

    return rhs


def geodesic(params: HeisenbergGeodesicParams, tolerance: float = 1e-12,
             samples: int = DEFAULT_SAMPLES) -> HeisenbergGeodesic:
    """Integrate the geodesic and sample it on a uniform grid of ``samples`` points."""
    problem = OdeProblem(_rhs(params.v0, params.theta0), 0.0, params.start.as_array())
    traj = integrate(problem, params.length, tolerance)
    t = np.linspace(0.0, params.length, samples)
    pts = traj(t)
    th = params.v0 * t + params.theta0
    path = HorizontalPath(t, np.cos(th), np.sin(th))
    return HeisenbergGeodesic(params, t, pts, path)


def closed_form_xy(params: HeisenbergGeodesicParams, t):
    """(x, y)(t) from the antiderivatives of cos and sin of v0 t + theta0."""
    t = np.asarray(t, dtype=float)
    v0, th0 = params.v0, params.theta0
    # (sin(v0 t + th0) - sin th0) / v0 written without cancellation for small v0
    half = 0.5 * v0 * t
    sinc = np.sinc(half / np.pi)
    dx = t * np.cos(th0 + half) * sinc
    dy = t * np.sin(th0 + half) * sinc
    return params.start.x + dx, params.start.y + dy


def vertical_endpoint_defect(params: HeisenbergGeodesicParams, tolerance: float = 1e-12) -> float:
    """max(|x(l) - x(0)|, |y(l) - y(0)|) on the integrated geodesic."""
    problem = OdeProblem(_rhs(params.v0, params.theta0), 0.0, params.start.as_array())
    end = integrate(problem, params.length, tolerance).states[-1]
    return float(max(abs(end[0] - params.start.x), abs(end[1] - params.start.y)))


def balance_report(params: HeisenbergGeodesicParams, samples: int = DEFAULT_SAMPLES,
                   tolerance: float = 1e-6) -> EnergyReport:
    t = np.linspace(0.0, params.length, samples)
    th = params.v0 * t + params.theta0
    return energy_split(HorizontalPath(t, np.cos(th), np.sin(th)), tolerance)
