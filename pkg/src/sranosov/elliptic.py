"""Jacobi elliptic functions sn, cn, dn and the quarter period K(k).

Production values come from integrating the defining system

    x' = y z,   y' = -z x,   z' = -k^2 x y,   (x, y, z)(0) = (0, 1, 1)

with the Dormand-Prince integrator in :mod:`sranosov.numkit`. An
independent route through the arithmetic-geometric mean (descending
Landen transformation) is provided for cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .numkit import OdeProblem, integrate, quadrature

ODE_TOLERANCE = 1e-13
AGM_TOLERANCE = 1e-8  # allowed ODE/AGM disagreement on K before raising


def check_modulus(k: float) -> float:
    k = float(k)
    if not 0.0 < k < 1.0:
        raise DomainError(f"modulus k={k!r} outside the open interval (0, 1)")
    return k


@dataclass(frozen=True)
class EllipticTriple:
    sn: float
    cn: float
    dn: float
    t: float
    k: float

    @property
    def residuals(self):
        """Residuals of sn^2 + cn^2 = 1 and k^2 sn^2 + dn^2 = 1."""
        return (abs(self.sn ** 2 + self.cn ** 2 - 1.0),
                abs(self.k ** 2 * self.sn ** 2 + self.dn ** 2 - 1.0))


def _problem(k, start=0.0, state=(0.0, 1.0, 1.0)):
    k2 = k * k

    def rhs(t, u):
        x, y, z = u
        return np.array([y * z, -z * x, -k2 * x * y])

    return OdeProblem(rhs, start, np.array(state, dtype=float))


def solve_defining_system(k: float, t_end: float, tolerance: float = ODE_TOLERANCE):
    """Trajectory of (sn, cn, dn) on ``[0, t_end]`` (or ``[t_end, 0]``)."""
    k = check_modulus(k)
    return integrate(_problem(k), t_end, tolerance)


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    for _ in range(64):
        if abs(a - b) <= 4 * np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def quarter_period_agm(k: float) -> float:
    """K(k) = pi / (2 agm(1, sqrt(1 - k^2)))."""
    k = check_modulus(k)
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def jacobi_agm(t, k: float):
    """sn, cn, dn by the descending Landen / AGM scheme.

    Vectorized over ``t``. Returns a tuple of arrays (or floats).
    """
    k = check_modulus(k)
    t = np.asarray(t, dtype=float)
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    a, b, c = [1.0], [kp], [k]
    while abs(c[-1]) > 1e-17 and len(a) < 40:
        a_n, b_n = 0.5 * (a[-1] + b[-1]), math.sqrt(a[-1] * b[-1])
        c.append(0.5 * (a[-1] - b[-1]))
        a.append(a_n)
        b.append(b_n)
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * t
    phis = [phi]
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
        phis.append(phi)
    phi0 = phis[-1]
    phi1 = phis[-2] if n >= 1 else phi0
    sn = np.sin(phi0)
    cn = np.cos(phi0)
    dn = cn / np.cos(phi1 - phi0) if n >= 1 else np.ones_like(phi0)
    return sn, cn, dn


def quarter_period(k: float, tolerance: float = ODE_TOLERANCE) -> float:
    """First positive zero of cn(., k), located on the ODE solution.

    The zero is bracketed on the stored steps and polished by safeguarded
    Newton on the dense output (d cn/dt = -sn dn). The result is compared
    with the AGM formula; a disagreement above 1e-8 raises
    ``ConsistencyError``.
    """
    k = check_modulus(k)
    t_end = 2.0
    while True:
        traj = solve_defining_system(k, t_end, tolerance)
        cn = traj.states[:, 1]
        crossing = np.nonzero(cn <= 0.0)[0]
        if crossing.size:
            break
        t_end *= 2.0
        if t_end > 1e4:
            raise ConsistencyError(f"cn(., {k}) has no zero below {t_end}")
    j = crossing[0]
    lo, hi = traj.times[j - 1], traj.times[j]
    t = lo - traj.states[j - 1, 1] * (hi - lo) / (cn[j] - cn[j - 1])
    for _ in range(50):
        x, y, z = traj(t)
        if y > 0:
            lo = t
        else:
            hi = t
        step = y / (x * z)
        t_new = t + step
        if not lo <= t_new <= hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-16 * t_new:
            t = t_new
            break
        t = t_new
    reference = quarter_period_agm(k)
    if abs(t - reference) > AGM_TOLERANCE:
        raise ConsistencyError(
            f"quarter period disagreement for k={k}: ODE {t!r} vs AGM {reference!r}")
    return float(t)


def reduce_argument(t, quarter: float):
    """Map ``t`` into ``[-2K, 2K)`` modulo the period 4K."""
    period = 4.0 * quarter
    t = np.asarray(t, dtype=float)
    return t - period * np.floor((t + 2.0 * quarter) / period)


def jacobi_array(t, k: float, quarter: float | None = None,
                 tolerance: float = ODE_TOLERANCE) -> np.ndarray:
    """Vectorized ODE evaluation: rows (sn, cn, dn) for each entry of ``t``.

    Arguments are reduced modulo 4K, then a single forward and a single
    backward integration serve all of them through dense output.
    """
    k = check_modulus(k)
    if quarter is None:
        quarter = quarter_period(k, tolerance)
    t = np.asarray(t, dtype=float)
    flat = reduce_argument(t.ravel(), quarter)
    out = np.empty((flat.size, 3))
    out[:] = (0.0, 1.0, 1.0)
    pos = flat > 0
    neg = flat < 0
    if pos.any():
        out[pos] = solve_defining_system(k, flat[pos].max(), tolerance)(flat[pos])
    if neg.any():
        out[neg] = solve_defining_system(k, flat[neg].min(), tolerance)(flat[neg])
    return out.reshape(t.shape + (3,))


def jacobi(t: float, k: float, tolerance: float = ODE_TOLERANCE) -> EllipticTriple:
    """(sn, cn, dn)(t, k) from the defining ODE system."""
    sn, cn, dn = jacobi_array(float(t), k, tolerance=tolerance)
    return EllipticTriple(float(sn), float(cn), float(dn), float(t), float(k))


def check_periodicity(k: float, t_samples) -> float:
    """Max of |sn(t+4K)-sn(t)|, |cn(t+4K)-cn(t)|, |dn(t+2K)-dn(t)| over samples.

    The shifted arguments are integrated directly (no argument reduction),
    so the check exercises the ODE over the extra period.
    """
    k = check_modulus(k)
    quarter = quarter_period(k)
    t = np.atleast_1d(np.asarray(t_samples, dtype=float))
    lo = min(0.0, t.min())
    hi = max(0.0, (t + 4 * quarter).max())
    fwd = solve_defining_system(k, hi) if hi > 0 else None
    bwd = solve_defining_system(k, lo) if lo < 0 else None

    def ev(s):
        s = np.atleast_1d(s)
        out = np.empty((s.size, 3))
        m = s >= 0
        if m.any():
            out[m] = fwd(s[m]) if fwd is not None else (0.0, 1.0, 1.0)
        if (~m).any():
            out[~m] = bwd(s[~m])
        return out

    base = ev(t)
    full = ev(t + 4 * quarter)
    half = ev(t + 2 * quarter)
    dev = max(np.max(np.abs(full[:, 0] - base[:, 0])),
              np.max(np.abs(full[:, 1] - base[:, 1])),
              np.max(np.abs(half[:, 2] - base[:, 2])))
    return float(dev)


def sn_ode_residual(t: float, k: float) -> float:
    """|(d sn/dt)^2 - (1 - sn^2)(1 - k^2 sn^2)| with d sn/dt = cn dn."""
    e = jacobi(t, k)
    return abs((e.cn * e.dn) ** 2 - (1 - e.sn ** 2) * (1 - k * k * e.sn ** 2))


def symmetric_integrals(a: float, b: float, k: float, tolerance: float = 1e-12):
    """Integrals of sn, cn and sn*cn over ``[a, b]``.

    ``a`` is shifted by a multiple of 4K into ``[-2K, 2K)`` (the integrands
    are 4K-periodic), the defining system is integrated once over the
    shifted interval and the dense output is integrated by quadrature.
    """
    k = check_modulus(k)
    if b < a:
        raise DomainError("symmetric_integrals requires a <= b")
    if a == b:
        return 0.0, 0.0, 0.0
    quarter = quarter_period(k)
    a_red = float(reduce_argument(a, quarter))
    b_red = a_red + (b - a)
    pieces = []
    if b_red > 0:
        pieces.append((max(a_red, 0.0), b_red, solve_defining_system(k, b_red)))
    if a_red < 0:
        pieces.append((a_red, min(b_red, 0.0), solve_defining_system(k, a_red)))
    totals = [0.0, 0.0, 0.0]
    for lo, hi, traj in pieces:
        if hi <= lo:
            continue
        totals[0] += quadrature(lambda s: traj(s)[:, 0], lo, hi, tolerance)
        totals[1] += quadrature(lambda s: traj(s)[:, 1], lo, hi, tolerance)
        totals[2] += quadrature(lambda s: traj(s)[:, 0] * traj(s)[:, 1], lo, hi, tolerance)
    return tuple(totals)
