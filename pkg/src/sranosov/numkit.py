"""Numerical plumbing: adaptive Runge-Kutta with dense output, adaptive
Gauss-Kronrod quadrature and damped Newton root finding.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable, Optional

import numpy as np

from .errors import AccuracyError, ConvergenceError, DomainError, IntegrationError

EPS = np.finfo(float).eps

# Dormand-Prince 5(4) tableau, FSAL.
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1], dtype=float)
_A = [
    [],
    [F(1, 5)],
    [F(3, 40), F(9, 40)],
    [F(44, 45), F(-56, 15), F(32, 9)],
    [F(19372, 6561), F(-25360, 2187), F(64448, 6561), F(-212, 729)],
    [F(9017, 3168), F(-355, 33), F(46732, 5247), F(49, 176), F(-5103, 18656)],
    [F(35, 384), F(0), F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84)],
]
_A = [np.array([float(a) for a in row]) for row in _A]
_B = _A[6]
# difference between the 5th and embedded 4th order weights
_E = np.array([F(-71, 57600), F(0), F(71, 16695), F(-71, 1920), F(17253, 339200),
               F(-22, 525), F(1, 40)], dtype=float)
# continuous extension: y(t0 + s h) = y0 + h * K^T P [s, s^2, s^3, s^4]
_P = np.array([
    [1, F(-8048581381, 2820520608), F(8663915743, 2820520608), F(-12715105075, 11282082432)],
    [0, 0, 0, 0],
    [0, F(131558114200, 32700410799), F(-68118460800, 10900136933), F(87487479700, 32700410799)],
    [0, F(-1754552775, 470086768), F(14199869525, 1410260304), F(-10690763975, 1880347072)],
    [0, F(127303824393, 49829197408), F(-318862633887, 49829197408), F(701980252875, 199316789632)],
    [0, F(-282668133, 205662961), F(2019193451, 616988883), F(-1453857185, 822651844)],
    [0, F(40617522, 29380423), F(-110615467, 29380423), F(69997945, 29380423)],
], dtype=float)

STEP_FLOOR = 1e-12
MAX_STEPS = 1_000_000


@dataclass(frozen=True)
class OdeProblem:
    """Initial value problem ``y' = rhs(t, y)``, ``y(initial_time) = initial_state``."""

    right_hand_side: Callable[[float, np.ndarray], np.ndarray]
    initial_time: float
    initial_state: np.ndarray

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.initial_state, dtype=float))
        object.__setattr__(self, "initial_state", y0)
        f0 = np.asarray(self.right_hand_side(self.initial_time, y0.copy()))
        if f0.shape != y0.shape:
            raise DomainError(
                f"right_hand_side returned shape {f0.shape}, expected {y0.shape}")

    @property
    def dimension(self) -> int:
        return self.initial_state.shape[0]


class Trajectory:
    """Accepted steps of an integration plus the continuous extension.

    ``times`` is strictly increasing regardless of the integration direction.
    Calling the trajectory (or ``evaluate``) at any time in
    ``[times[0], times[-1]]`` returns the interpolated state.
    """

    interpolation_order = 4

    def __init__(self, times, states, seg_start, seg_h, seg_y0, seg_k):
        self.times = times
        self.states = states
        self._seg_start = seg_start
        self._seg_h = seg_h
        self._seg_y0 = seg_y0
        self._seg_k = seg_k

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    @property
    def t_span(self):
        return self.times[0], self.times[-1]

    def __len__(self):
        return len(self.times)

    def evaluate(self, t):
        """Dense output at ``t`` (scalar -> 1-D state, array -> one row per time)."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        lo, hi = self.times[0], self.times[-1]
        span = hi - lo
        if np.any(t_arr < lo - 1e-12 * span) or np.any(t_arr > hi + 1e-12 * span):
            raise DomainError(f"dense output requested outside [{lo}, {hi}]")
        if len(self.times) == 1:
            out = np.repeat(self.states[:1], len(t_arr), axis=0)
            return out[0] if scalar else out
        idx = np.searchsorted(self.times, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.times) - 2)
        h = self._seg_h[idx]
        s = (t_arr - self._seg_start[idx]) / h
        powers = np.stack([s, s * s, s ** 3, s ** 4], axis=-1)
        weights = powers @ _P.T  # (n, 7)
        out = self._seg_y0[idx] + h[:, None] * np.einsum("ns,nsd->nd", weights, self._seg_k[idx])
        # stored nodes are returned verbatim
        exact = np.searchsorted(self.times, t_arr, side="left")
        exact = np.clip(exact, 0, len(self.times) - 1)
        hit = self.times[exact] == t_arr
        out[hit] = self.states[exact[hit]]
        return out[0] if scalar else out

    __call__ = evaluate


def _initial_step(fun, t0, y0, f0, direction, tol):
    scale = tol + tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = np.asarray(fun(t0 + direction * h0, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(problem: OdeProblem, t_end: float, tolerance: float,
              project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
              max_step: float = np.inf) -> Trajectory:
    """Integrate ``problem`` from its initial time to ``t_end`` with Dormand-Prince 5(4).

    The local error of every accepted step satisfies the mixed test
    ``|err_i| <= tolerance * max(1, |y_i|)`` in RMS norm. ``project``, when
    given, is applied to each accepted state (e.g. to renormalize onto an
    invariant manifold). Raises ``IntegrationError`` when the step size
    drops below ``1e-12 * |t_end - t0|``.
    """
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    fun = problem.right_hand_side
    t0 = float(problem.initial_time)
    t_end = float(t_end)
    if t_end == t0:
        raise DomainError("t_end must differ from the initial time")
    direction = 1.0 if t_end > t0 else -1.0
    floor = STEP_FLOOR * abs(t_end - t0)

    y = problem.initial_state.copy()
    if project is not None:
        y = np.asarray(project(y), dtype=float)
    f = np.asarray(fun(t0, y), dtype=float)
    dim = y.shape[0]
    h = min(_initial_step(fun, t0, y, f, direction, tolerance), abs(t_end - t0), max_step)

    times, states = [t0], [y]
    seg_start, seg_h, seg_y0, seg_k = [], [], [], []
    k = np.empty((7, dim))
    t = t0
    steps = 0
    while direction * (t_end - t) > 0:
        steps += 1
        if steps > MAX_STEPS:
            raise IntegrationError(f"step budget exhausted at t={t}", t)
        if h < floor:
            raise IntegrationError(
                f"step size {h:.3e} below floor {floor:.3e} at t={t}: stiff or blowing up", t)
        # land exactly on t_end
        if direction * (t + direction * h - t_end) > 0 or abs(t_end - t - direction * h) < 1e-3 * h:
            h = abs(t_end - t)
        hs = direction * h
        k[0] = f
        for i in range(1, 6):
            k[i] = fun(t + _C[i] * hs, y + hs * (_A[i] @ k[:i]))
        y_new = y + hs * (_B @ k[:6])
        t_new = t_end if h == abs(t_end - t) else t + hs
        k[6] = fun(t_new, y_new)
        err = hs * (_E @ k)
        scale = tolerance * np.maximum(1.0, np.maximum(np.abs(y), np.abs(y_new)))
        err_norm = np.sqrt(np.mean((err / scale) ** 2))
        if not np.isfinite(err_norm):
            h *= 0.2
            continue
        if err_norm <= 1.0:
            seg_start.append(t)
            seg_h.append(hs)
            seg_y0.append(y)
            seg_k.append(k.copy())
            f = k[6].copy()
            if project is not None:
                y_new = np.asarray(project(y_new), dtype=float)
                f = np.asarray(fun(t_new, y_new), dtype=float)
            t, y = t_new, y_new
            times.append(t)
            states.append(y)
            factor = 10.0 if err_norm == 0 else min(10.0, 0.9 * err_norm ** -0.2)
            h = min(h * factor, max_step)
        else:
            h *= max(0.2, 0.9 * err_norm ** -0.2)

    times = np.array(times)
    states = np.array(states)
    seg_start = np.array(seg_start)
    seg_h = np.array(seg_h)
    seg_y0 = np.array(seg_y0)
    seg_k = np.array(seg_k)
    if direction < 0:
        times, states = times[::-1].copy(), states[::-1].copy()
        seg_start, seg_h = seg_start[::-1].copy(), seg_h[::-1].copy()
        seg_y0, seg_k = seg_y0[::-1].copy(), seg_k[::-1].copy()
    return Trajectory(times, states, seg_start, seg_h, seg_y0, seg_k)


# Gauss-Kronrod 7/15 nodes (non-negative half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG7 = np.zeros(15)
_WG7[[1, 3, 5]] = _WG[:3]
_WG7[[13, 11, 9]] = _WG[:3]
_WG7[7] = _WG[3]


def _call(f, x):
    try:
        y = np.asarray(f(x), dtype=float)
    except TypeError:  # integrand accepts scalars only
        y = None
    if y is None or y.shape != x.shape:
        y = np.array([float(f(xi)) for xi in x])
    return y


def _gk15(f, a, b):
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    fx = _call(f, c + r * _NODES)
    kron = r * (_WK15 @ fx)
    gauss = r * (_WG7 @ fx)
    return kron, abs(kron - gauss), r * (_WK15 @ np.abs(fx))


def quadrature(f: Callable, a: float, b: float, tolerance: float,
               max_intervals: int = 2000) -> float:
    """Adaptive Gauss-Kronrod (7, 15) quadrature of ``f`` over ``[a, b]``.

    ``f`` is called on arrays of nodes; scalar-only callables are
    evaluated node by node. Bisects the interval with the largest error
    estimate until the summed estimate is within ``tolerance`` (or at the
    roundoff floor of the integrand).
    """
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    if b < a:
        raise DomainError("quadrature requires a <= b")
    if a == b:
        return 0.0
    kron, err, absval = _gk15(f, a, b)
    heap = [(-err, a, b, kron, absval)]
    total, total_err, total_abs = kron, err, absval
    while total_err > max(tolerance, 50 * EPS * total_abs):
        if len(heap) >= max_intervals:
            raise AccuracyError(
                f"quadrature did not converge: estimate {total!r} +- {total_err:.3e}",
                total, total_err)
        neg_err, lo, hi, val, av = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise AccuracyError("quadrature interval collapsed", total, total_err)
        k1, e1, a1 = _gk15(f, lo, mid)
        k2, e2, a2 = _gk15(f, mid, hi)
        total += k1 + k2 - val
        total_err += e1 + e2 + neg_err
        total_abs += a1 + a2 - av
        heapq.heappush(heap, (-e1, lo, mid, k1, a1))
        heapq.heappush(heap, (-e2, mid, hi, k2, a2))
        if total_err < 0:  # cancellation in the running sum
            total_err = sum(-h[0] for h in heap)
    return float(total)


@dataclass(frozen=True)
class RootProblem:
    residual: Callable[[np.ndarray], np.ndarray]
    dimension: int
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None


def fd_jacobian(residual, x, r0=None):
    """Forward-difference Jacobian with step ``sqrt(eps) * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    r0 = np.asarray(residual(x), dtype=float) if r0 is None else r0
    jac = np.empty((r0.shape[0], x.shape[0]))
    for i in range(x.shape[0]):
        step = np.sqrt(EPS) * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += step
        step = xp[i] - x[i]
        jac[:, i] = (np.asarray(residual(xp), dtype=float) - r0) / step
    return jac


def find_root(problem: RootProblem, initial_guess, tolerance: float,
              max_iterations: int = 50) -> np.ndarray:
    """Damped Newton iteration until ``max|residual| <= tolerance``.

    Steps come from a least-squares solve so a rank-deficient Jacobian does
    not abort the iteration; each step is halved until the residual sup-norm
    decreases. Raises ``ConvergenceError`` carrying the best iterate.
    """
    x = np.atleast_1d(np.asarray(initial_guess, dtype=float)).copy()
    if x.shape[0] != problem.dimension:
        raise DomainError(f"initial guess has length {x.shape[0]}, expected {problem.dimension}")

    def res(z):
        return np.atleast_1d(np.asarray(problem.residual(z), dtype=float))

    r = res(x)
    norm = np.max(np.abs(r))
    best, best_norm = x.copy(), norm
    for _ in range(max_iterations):
        if not np.isfinite(norm):
            break
        if norm <= tolerance:
            return x
        if problem.jacobian is not None:
            jac = np.atleast_2d(np.asarray(problem.jacobian(x), dtype=float))
        else:
            jac = fd_jacobian(res, x, r)
        dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam = 1.0
        while True:
            x_try = x + lam * dx
            r_try = res(x_try)
            n_try = np.max(np.abs(r_try))
            if np.isfinite(n_try) and n_try <= (1 - 1e-4 * lam) * norm:
                break
            lam *= 0.5
            if lam < 2 ** -12:
                break
        if not (np.isfinite(n_try) and n_try < norm):
            raise ConvergenceError(
                f"Newton stalled with residual {best_norm:.3e}", best, best_norm)
        x, r, norm = x_try, r_try, n_try
        if norm < best_norm:
            best, best_norm = x.copy(), norm
    if best_norm <= tolerance:
        return best
    raise ConvergenceError(
        f"no convergence after {max_iterations} iterations (residual {best_norm:.3e})",
        best, best_norm)
