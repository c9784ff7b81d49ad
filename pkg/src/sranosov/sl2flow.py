"""The algebraic Anosov flow on SL(2, R) and its su-subriemannian geodesics.

Left-invariant frame X = diag(1, -1)/2, Y = E/sqrt(2), Z = F/sqrt(2) with
[X, Y] = Y, [Y, Z] = X, [Z, X] = Z. The flow of X is right translation by
exp(tX); Y spans the stable and Z the unstable direction.

On the unit level set P_Y = cos(theta), P_Z = sin(theta) the normal
geodesic equations read

    g' = g (cos(theta) Y + sin(theta) Z),   theta' = P_X,   P_X' = -cos(2 theta),

so theta'' + cos(2 theta) = 0 and phi = 2 theta + pi/2 solves the pendulum
equation phi'' + 2 sin(phi) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import elliptic
from .errors import ConvergenceError, DomainError, IntegrationError, SearchFailure
from .numkit import OdeProblem, RootProblem, find_root, integrate, quadrature
from .pendulum import PendulumParams, fit_solution, verify_lemma_int
from .srgeom import BALANCE_TOLERANCE, EnergyReport, HorizontalPath, energy_split

SQRT2 = math.sqrt(2.0)
OMEGA = SQRT2  # pendulum frequency of the reduced equation
PHASE = math.pi / 2  # phi = 2 theta + PHASE
BRACKET_TOLERANCE = 1e-14
PATH_SAMPLES = 20001


@dataclass(frozen=True)
class FrameRealization:
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    def bracket_residuals(self):
        def comm(a, b):
            return a @ b - b @ a

        return (float(np.max(np.abs(comm(self.X, self.Y) - self.Y))),
                float(np.max(np.abs(comm(self.Y, self.Z) - self.X))),
                float(np.max(np.abs(comm(self.Z, self.X) - self.Z))))


def frame_realization() -> FrameRealization:
    fr = FrameRealization(
        X=np.diag([0.5, -0.5]),
        Y=np.array([[0.0, 1.0], [0.0, 0.0]]) / SQRT2,
        Z=np.array([[0.0, 0.0], [1.0, 0.0]]) / SQRT2,
    )
    worst = max(fr.bracket_residuals())
    if worst > BRACKET_TOLERANCE:
        raise AssertionError(f"sl2 frame bracket residual {worst:.3e}")
    return fr


def flow(g, t: float) -> np.ndarray:
    """f_t(g) = g exp(t X)."""
    return np.asarray(g, dtype=float) @ np.diag([math.exp(t / 2), math.exp(-t / 2)])


def tangent_flow_scaling(t: float):
    """Factors by which Tf_t scales the Y- and Z-components: (e^-t, e^t)."""
    return math.exp(-t), math.exp(t)


@dataclass(frozen=True)
class ReducedState:
    g: np.ndarray
    theta: float
    P_X: float

    def as_vector(self):
        return np.concatenate([np.asarray(self.g, dtype=float).ravel(), [self.theta, self.P_X]])

    @classmethod
    def from_vector(cls, u):
        return cls(np.array(u[:4]).reshape(2, 2), float(u[4]), float(u[5]))


def geodesic_ode(state: ReducedState):
    """(g', theta', P_X') at ``state``."""
    fr = frame_realization()
    th = state.theta
    gdot = np.asarray(state.g) @ (math.cos(th) * fr.Y + math.sin(th) * fr.Z)
    return gdot, state.P_X, -math.cos(2 * th)


def _rhs(t, u):
    a, b, c, d, th, p = u
    cs, sn = math.cos(th) / SQRT2, math.sin(th) / SQRT2
    return np.array([b * sn, a * cs, d * sn, c * cs, p, -math.cos(2 * th)])


def _renormalize(u):
    det = u[0] * u[3] - u[1] * u[2]
    if det > 0:
        u = u.copy()
        u[:4] /= math.sqrt(det)
    return u


def reduced_energy(theta, P_X):
    """Pendulum energy I = phi'^2/4 + 2 sin^2(phi/2) of phi = 2 theta + pi/2."""
    return P_X ** 2 + 2 * np.sin(theta + math.pi / 4) ** 2


def integrate_geodesic(initial: ReducedState, length: float, tolerance: float = 1e-12):
    """Dense trajectory of (g entries, theta, P_X) on [0, length].

    g is rescaled to unit determinant after every accepted step.
    """
    if not length > 0:
        raise DomainError(f"geodesic length must be positive, got {length!r}")
    return integrate(OdeProblem(_rhs, 0.0, initial.as_vector()), length, tolerance,
                     project=_renormalize)


def identity_state(theta0, P_X0):
    return ReducedState(np.eye(2), theta0, P_X0)


@dataclass
class ShootingConfig:
    theta_grid: tuple = tuple(j * math.pi / 8 for j in range(16))
    p_grid: tuple = (1.0, 2.0, 4.0, 8.0, -1.0, -2.0, -4.0, -8.0)
    tau_max: float = 0.2
    integration_tolerance: float = 1e-12
    residual_tolerance: float = 1e-10
    max_iterations: int = 25
    min_length: float = 1e-6
    distinct_tolerance: float = 1e-4
    exhaustive: bool = False  # keep searching after the first converged start


@dataclass
class ShootingResult:
    tau: float
    theta0: float
    P_X0: float
    length: float
    endpoint_residual: float
    path: object = field(repr=False)
    start: tuple = ()
    alternatives: list = field(default_factory=list, repr=False)

    @property
    def all_solutions(self):
        return [self] + list(self.alternatives)


def _endpoint_residual(x, tau, tol):
    th0, p0, ell = x
    if abs(ell) < 1e-12:
        g = np.eye(2)
    else:
        traj = integrate(OdeProblem(_rhs, 0.0, np.array([1.0, 0, 0, 1.0, th0, p0])), ell, tol,
                         project=_renormalize)
        g = traj.states[-1, :4]
        g = g.reshape(2, 2)
    return np.array([g[0, 0] - math.exp(tau / 2), g[0, 1], g[1, 0]])


def length_heuristic(theta0, P_X0):
    """One period of the reduced pendulum started at (theta0, P_X0)."""
    I = float(reduced_energy(theta0, P_X0))
    if I > 2:
        k = OMEGA / math.sqrt(I)
        return 4 * elliptic.quarter_period_agm(k) / math.sqrt(I)
    if I < 2:
        k = math.sqrt(I) / OMEGA
        return 4 * elliptic.quarter_period_agm(k) / OMEGA
    return None


def _same(a, b, tol):
    dth = (a[0] - b[0] + math.pi) % (2 * math.pi) - math.pi
    return max(abs(dth), abs(a[1] - b[1]), abs(a[2] - b[2])) <= tol


def shoot(tau: float, config: Optional[ShootingConfig] = None) -> ShootingResult:
    """Connect the identity to exp(tau X) by an su-geodesic.

    Newton (finite-difference Jacobian) on the unknowns (theta0, P_X0,
    length) from each start of the grid, in grid order; the first converged
    start gives the result. With ``config.exhaustive`` the remaining starts
    are tried too and distinct converged solutions are kept in
    ``alternatives``. Raises ``SearchFailure`` if no start converges.
    """
    cfg = config or ShootingConfig()
    if not 0 <= tau <= cfg.tau_max:
        raise DomainError(f"tau={tau!r} outside the supported range [0, {cfg.tau_max}]")
    tol = cfg.integration_tolerance
    problem = RootProblem(lambda x: _endpoint_residual(x, tau, tol), 3)
    found, best_residuals = [], []
    for th0 in cfg.theta_grid:
        for p0 in cfg.p_grid:
            ell0 = length_heuristic(th0, p0)
            if ell0 is None:
                continue
            try:
                x = find_root(problem, [th0, p0, ell0], cfg.residual_tolerance, cfg.max_iterations)
            except (ConvergenceError, IntegrationError) as exc:
                best_residuals.append((th0, p0, float(getattr(exc, "residual_norm", math.inf))))
                continue
            if x[2] < cfg.min_length:
                best_residuals.append((th0, p0, 0.0))
                continue
            x[0] = x[0] % (2 * math.pi)
            if any(_same(x, (r.theta0, r.P_X0, r.length), cfg.distinct_tolerance) for r in found):
                continue
            path = integrate_geodesic(identity_state(x[0], x[1]), x[2], tol)
            resid = float(np.max(np.abs(_endpoint_residual(x, tau, tol))))
            found.append(ShootingResult(tau, float(x[0]), float(x[1]), float(x[2]), resid, path,
                                        (th0, p0)))
            if not cfg.exhaustive:
                break
        if found and not cfg.exhaustive:
            break
    if not found:
        best_residuals.sort(key=lambda r: r[2])
        raise SearchFailure(f"no shooting start converged for tau={tau}", best_residuals[:5])
    first = found[0]
    first.alternatives = found[1:]
    return first


def horizontal_path(result: ShootingResult, samples: int = PATH_SAMPLES,
                    fraction: float = 1.0) -> HorizontalPath:
    """(w_s, w_u) = (cos theta, sin theta) sampled uniformly on [0, fraction * length]."""
    t = np.linspace(0.0, fraction * result.length, samples)
    th = result.path(t)[:, 4]
    return HorizontalPath(t, np.cos(th), np.sin(th))


def balance_report(result: ShootingResult, tolerance: float = BALANCE_TOLERANCE,
                   fraction: float = 1.0) -> EnergyReport:
    """Stable/unstable energy split; E1 = E_s (Y-part), E2 = E_u (Z-part)."""
    return energy_split(horizontal_path(result, fraction=fraction), tolerance)


def closure_integrals(result: ShootingResult, tolerance: float = 1e-12):
    """(int cos theta, int sin theta) over [0, length]."""
    th = lambda t: result.path(t)[:, 4]
    return (quadrature(lambda t: np.cos(th(t)), 0.0, result.length, tolerance),
            quadrature(lambda t: np.sin(th(t)), 0.0, result.length, tolerance))


@dataclass(frozen=True)
class LengthDerivative:
    finite_difference: float
    formula: float
    mismatch: float
    rederived: float  # l (E_u - E_s), the derivative of the square root at r = 0

    def as_dict(self):
        return {"finite_difference": self.finite_difference, "formula": self.formula,
                "mismatch": self.mismatch, "rederived": self.rederived}


def flowed_length(path: HorizontalPath, r: float) -> float:
    """|f_r o gamma| = int sqrt(e^{-2r} w_s^2 + e^{2r} w_u^2) dt (trapezoid)."""
    s, u = tangent_flow_scaling(r)
    return float(np.trapezoid(np.sqrt((s * path.w1) ** 2 + (u * path.w2) ** 2), path.times))


def length_derivative_check(path_or_result, r_step: float) -> LengthDerivative:
    """Central difference of r -> |f_r o gamma| at 0 against 2 l (E_u - E_s)."""
    if not r_step > 0:
        raise DomainError("r_step must be positive")
    path = (horizontal_path(path_or_result) if isinstance(path_or_result, ShootingResult)
            else path_or_result)
    rep = energy_split(path)
    fd = (flowed_length(path, r_step) - flowed_length(path, -r_step)) / (2 * r_step)
    formula = 2 * rep.length * (rep.E2 - rep.E1)
    return LengthDerivative(fd, formula, abs(fd - formula), rep.length * (rep.E2 - rep.E1))


def pendulum_params(result: ShootingResult) -> PendulumParams:
    """Initial data of phi = 2 theta + pi/2 for phi'' + 2 sin(phi) = 0."""
    return PendulumParams(OMEGA, 2 * result.theta0 + PHASE, 2 * result.P_X0)


@dataclass(frozen=True)
class LemmaChain:
    I: float
    I_gt_2: bool
    period_multiple_defect: float
    sin_phi_integral: float
    halfangle_integrals: tuple
    hypothesis_holds: bool

    def as_dict(self):
        return {"I": self.I, "I_gt_2": self.I_gt_2,
                "period_multiple_defect": self.period_multiple_defect,
                "sin_phi_integral": self.sin_phi_integral,
                "halfangle_integrals": list(self.halfangle_integrals),
                "hypothesis_holds": self.hypothesis_holds}


def lemma_chain(result: ShootingResult) -> LemmaChain:
    """Half-angle hypothesis and its consequences for the reduced pendulum of ``result``."""
    sol = fit_solution(pendulum_params(result))
    rep = verify_lemma_int(sol, result.length)
    return LemmaChain(sol.I, sol.I > OMEGA ** 2, rep.period_multiple_defect,
                      rep.sin_integral, rep.halfangle_integrals, rep.hypothesis_holds)
