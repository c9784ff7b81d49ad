"""The pendulum equation theta'' + omega^2 sin(theta) = 0.

Classification by the conserved energy I = theta'^2/4 + omega^2 sin^2(theta/2),
closed-form solutions through sn/cn/dn, numerical solutions, fitting of the
closed-form parameters to initial data, and the half-angle integral test
(vanishing integrals of sin(theta/2) and cos(theta/2) force circulating
motion over whole periods).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import elliptic
from .errors import ConvergenceError, DomainError, FitError
from .numkit import OdeProblem, RootProblem, find_root, integrate, quadrature

SEPARATRIX_RTOL = 1e-12
REST_RTOL = (16 * np.finfo(float).eps) ** 2
NUMERIC_SAFETY = 1e-2


class PendulumCase(enum.Enum):
    DOWN_EQUILIBRIUM = 1
    OSCILLATING = 2
    SEPARATRIX = 3
    UP_EQUILIBRIUM = 5  # I = omega^2 with zero velocity
    CIRCULATING = 4

    @property
    def number(self) -> int:
        """Case 1-4; the upward equilibrium shares case 3 with the separatrix."""
        return 3 if self is PendulumCase.UP_EQUILIBRIUM else self.value

    @property
    def is_equilibrium(self):
        return self in (PendulumCase.DOWN_EQUILIBRIUM, PendulumCase.UP_EQUILIBRIUM)


@dataclass(frozen=True)
class PendulumParams:
    omega: float
    theta0: float
    thetadot0: float

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be positive, got {self.omega!r}")


@dataclass(frozen=True)
class PendulumSolution:
    """Closed-form descriptor.

    theta(t) = offset + sign * F(t - t0) where F is
    2 arcsin(k sn(omega s; k)) when oscillating, 2 arcsin tanh(omega s) on
    the separatrix and 2 am(sqrt(I) s; k) when circulating.
    """

    case: PendulumCase
    omega: float
    I: float
    k: float
    t0: float
    sign: int
    offset: float = 0.0
    quarter: float = math.nan  # K(k), cached for repeated evaluation

    @property
    def period(self) -> float:
        """Time for one full cycle of theta mod 2 pi."""
        if self.case is PendulumCase.OSCILLATING:
            return 4 * self.quarter / self.omega
        if self.case is PendulumCase.CIRCULATING:
            return 2 * self.quarter / math.sqrt(self.I)
        return math.inf


def energy(params: PendulumParams) -> float:
    return 0.25 * params.thetadot0 ** 2 + params.omega ** 2 * math.sin(params.theta0 / 2) ** 2


def classify(params: PendulumParams) -> PendulumCase:
    w2 = params.omega ** 2
    I = energy(params)
    if abs(I - w2) <= SEPARATRIX_RTOL * w2:
        return PendulumCase.UP_EQUILIBRIUM if params.thetadot0 == 0 else PendulumCase.SEPARATRIX
    if I <= REST_RTOL * w2:
        return PendulumCase.DOWN_EQUILIBRIUM
    return PendulumCase.OSCILLATING if I < w2 else PendulumCase.CIRCULATING


def amplitude(u, k, quarter):
    """Jacobi amplitude am(u; k), continuous and increasing in u.

    am = arcsin(sn) on [-K, K]; outside that range the arcsin branch is
    switched every 2K. atan2(sn, cn) realizes the same branch choice
    without the loss of accuracy of arcsin near sn = +-1; the multiple of
    2 pi is the one closest to the linear growth pi u / (2K), which am
    never deviates from by pi / 2 or more.
    """
    u = np.asarray(u, dtype=float)
    sncndn = elliptic.jacobi_array(u, k, quarter=quarter)
    angle = np.arctan2(sncndn[..., 0], sncndn[..., 1])
    linear = np.pi * u / (2 * quarter)
    return angle + 2 * np.pi * np.round((linear - angle) / (2 * np.pi))


def solve_closed_form(solution: PendulumSolution, t):
    """theta(t) from the closed-form descriptor (vectorized in t)."""
    t = np.asarray(t, dtype=float)
    s = t - solution.t0
    case = solution.case
    if case.is_equilibrium:
        base = 0.0 if case is PendulumCase.DOWN_EQUILIBRIUM else math.pi
        return np.full_like(s, solution.offset + base)
    if case is PendulumCase.OSCILLATING:
        sn = elliptic.jacobi_array(solution.omega * s, solution.k, quarter=solution.quarter)[..., 0]
        f = 2 * np.arcsin(solution.k * sn)
    elif case is PendulumCase.SEPARATRIX:
        # 2 arcsin(tanh x) == 2 arctan(sinh x), without cancellation near |tanh| = 1
        f = 2 * np.arctan(np.sinh(solution.omega * s))
    else:
        f = 2 * amplitude(math.sqrt(solution.I) * s, solution.k, solution.quarter)
    return solution.offset + solution.sign * f


def _rhs(omega):
    w2 = omega * omega

    def rhs(t, y):
        return np.array([y[1], -w2 * math.sin(y[0])])

    return rhs


def solve_numeric(params: PendulumParams, t_end: float, tolerance: float = 1e-10):
    """Trajectory of (theta, theta') from t = 0 to ``t_end``.

    Steps are controlled to ``tolerance / 100``: per-step errors accumulate
    over many cycles and the energy drift must stay below 10 * tolerance.
    """
    problem = OdeProblem(_rhs(params.omega), 0.0, [params.theta0, params.thetadot0])
    return integrate(problem, t_end, tolerance * NUMERIC_SAFETY)


def energy_along(trajectory, omega, t=None):
    y = trajectory.states if t is None else trajectory(t)
    return 0.25 * y[..., 1] ** 2 + omega ** 2 * np.sin(y[..., 0] / 2) ** 2


def _nearest_zero(traj):
    """Time closest to 0 at which theta is a multiple of 2 pi."""
    g = np.sin(traj.states[:, 0] / 2)
    changes = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    if changes.size == 0:
        return None
    best = None
    for j in changes:
        lo, hi = traj.times[j], traj.times[j + 1]
        if g[j] == 0:
            guess = lo
        elif g[j + 1] == 0:
            guess = hi
        else:
            guess = lo - g[j] * (hi - lo) / (g[j + 1] - g[j])

        def res(x):
            return np.array([math.sin(traj(min(max(x[0], lo), hi))[0] / 2)])

        def jac(x):
            th, thd = traj(min(max(x[0], lo), hi))
            return np.array([[0.5 * math.cos(th / 2) * thd]])

        try:
            root = find_root(RootProblem(res, 1, jac), [guess], 1e-14, 60)[0]
        except ConvergenceError as exc:
            if exc.residual_norm > 1e-12:
                continue
            root = exc.best[0]
        root = min(max(root, lo), hi)
        if best is None or abs(root) < abs(best):
            best = root
    return best


def fit_solution(params: PendulumParams, tolerance: float = 1e-12) -> PendulumSolution:
    """Closed-form parameters (I, k, t0, sign, offset) reproducing ``params``.

    t0 is the crossing of theta through a multiple of 2 pi nearest to t = 0,
    found by root finding on numerical trajectories run in both time
    directions; the sign is that of theta' at the crossing.
    """
    case = classify(params)
    w = params.omega
    I = energy(params)
    if case.is_equilibrium:
        base = 0.0 if case is PendulumCase.DOWN_EQUILIBRIUM else math.pi
        offset = 2 * math.pi * round((params.theta0 - base) / (2 * math.pi))
        return PendulumSolution(case, w, I, math.nan, 0.0, 1, offset)
    if case is PendulumCase.OSCILLATING:
        k = math.sqrt(I) / w
        quarter = elliptic.quarter_period(k)
        window = 4 * quarter / w
    elif case is PendulumCase.CIRCULATING:
        k = w / math.sqrt(I)
        quarter = elliptic.quarter_period(k)
        window = 2 * quarter / math.sqrt(I)
    else:
        k, quarter = 1.0, math.nan
        window = 2.0 / w

    t0 = None
    while t0 is None:
        candidates = []
        for direction in (1.0, -1.0):
            traj = solve_numeric(params, direction * 1.05 * window, tolerance / NUMERIC_SAFETY)
            root = _nearest_zero(traj)
            if root is not None:
                candidates.append((abs(root), root, traj))
        if candidates:
            _, t0, traj = min(candidates, key=lambda c: c[0])
        elif case is PendulumCase.SEPARATRIX and window < 64.0 / w:
            window *= 2
        else:
            raise FitError(f"no crossing of theta through 0 mod 2 pi found for {params}")
    theta_c, thetadot_c = traj(t0)
    sign = 1 if thetadot_c >= 0 else -1
    offset = 2 * math.pi * round(theta_c / (2 * math.pi))
    return PendulumSolution(case, w, I, k, float(t0), sign, offset, quarter)


@dataclass(frozen=True)
class LemmaReport:
    halfangle_integrals: tuple
    hypothesis_holds: bool
    I_gt_omega2: bool
    period_multiple_defect: float
    sin_integral: float

    def as_dict(self):
        return {
            "halfangle_integrals": list(self.halfangle_integrals),
            "hypothesis_holds": self.hypothesis_holds,
            "I_gt_omega2": self.I_gt_omega2,
            "period_multiple_defect": self.period_multiple_defect,
            "sin_integral": self.sin_integral,
        }


def verify_lemma_int(solution: PendulumSolution, length: float,
                     tolerance: float = 1e-11, hypothesis_tol: float = 1e-8) -> LemmaReport:
    """Integrals of sin(theta/2), cos(theta/2) and sin(theta) over [0, length].

    When both half-angle integrals vanish (within ``hypothesis_tol``) the
    motion must be circulating with length * sqrt(I) a multiple of 4K and
    the sin(theta) integral must vanish; the report carries all three
    quantities either way. ``period_multiple_defect`` is the distance of
    length * sqrt(I) to the nearest multiple of 4K (NaN unless circulating).
    """
    if not length > 0:
        raise DomainError("length must be positive")

    def integral(fn):
        return quadrature(lambda t: fn(solve_closed_form(solution, t)), 0.0, length, tolerance)

    s_half = integral(lambda th: np.sin(th / 2))
    c_half = integral(lambda th: np.cos(th / 2))
    s_full = integral(np.sin)
    holds = abs(s_half) <= hypothesis_tol and abs(c_half) <= hypothesis_tol
    if solution.case is PendulumCase.CIRCULATING:
        u = length * math.sqrt(solution.I)
        period = 4 * solution.quarter
        defect = abs(u - period * round(u / period))
    else:
        defect = math.nan
    return LemmaReport((s_half, c_half), holds, solution.I > solution.omega ** 2,
                       float(defect), s_full)
