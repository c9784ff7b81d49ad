"""Subriemannian machinery of a contact 3-manifold given by a frame.

The frame is (X0, X1, X2) with X0 the Reeb field and (X1, X2) an
orthonormal frame of the contact plane. Its constant structure constants
c[i, j, k] ([Xi, Xj] = sum_k c[i, j, k] Xk) determine the Poisson brackets
of the momentum functions P_i = p(Xi),

    {P_i, P_j} = -sum_k c[i, j, k] P_k,

and with them the normal geodesic equation P_i' = {P_i, H} for
H = (P_1^2 + P_2^2) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

BALANCE_TOLERANCE = 1e-6
UNIT_SPEED_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ContactFrame3:
    structure_constants: np.ndarray
    name: str = "frame"

    def __post_init__(self):
        c = np.array(self.structure_constants, dtype=float)
        if c.shape != (3, 3, 3):
            raise DomainError("structure constants must have shape (3, 3, 3)")
        if not np.array_equal(c, -c.transpose(1, 0, 2)):
            raise DomainError("structure constants must be antisymmetric in (i, j)")
        if c[1, 2, 0] == 0:
            raise DomainError("[X1, X2] has no Reeb component: the plane field is not contact")
        c.setflags(write=False)
        object.__setattr__(self, "structure_constants", c)

    @classmethod
    def from_brackets(cls, brackets, name="frame"):
        """Build from ``{(i, j): {k: c_ij^k}}`` for i < j."""
        c = np.zeros((3, 3, 3))
        for (i, j), comps in brackets.items():
            for k, val in comps.items():
                c[i, j, k] = val
                c[j, i, k] = -val
        return cls(c, name)


def heisenberg_frame() -> ContactFrame3:
    """[X1, X2] = X0, all other brackets zero."""
    return ContactFrame3.from_brackets({(1, 2): {0: 1.0}}, "heisenberg")


def special_contact_frame() -> ContactFrame3:
    """(X0, X1, X2) = (X, Y, Z) with [X, Y] = Y, [Y, Z] = X, [Z, X] = Z."""
    return ContactFrame3.from_brackets(
        {(0, 1): {1: 1.0}, (1, 2): {0: 1.0}, (0, 2): {2: -1.0}}, "special-contact")


def hamiltonian(P) -> float:
    P = np.asarray(P, dtype=float)
    return 0.5 * (P[..., 1] ** 2 + P[..., 2] ** 2)


def momentum_bracket(frame: ContactFrame3, i: int, j: int, P) -> float:
    if i not in (0, 1, 2) or j not in (0, 1, 2):
        raise DomainError("frame indices must be 0, 1 or 2")
    return -float(frame.structure_constants[i, j] @ np.asarray(P, dtype=float))


def bracket_with_hamiltonian(frame: ContactFrame3, i: int, P) -> float:
    """{P_i, H} by the Leibniz rule: {P_i, P_1} P_1 + {P_i, P_2} P_2."""
    return (momentum_bracket(frame, i, 1, P) * P[1]
            + momentum_bracket(frame, i, 2, P) * P[2])


def geodesic_field(frame: ContactFrame3, P) -> np.ndarray:
    """Momentum part of the normal geodesic equation, (P_0', P_1', P_2')."""
    P = np.asarray(P, dtype=float)
    # brackets[i, j] = {P_i, P_j}
    brackets = -np.einsum("ijk,k->ij", frame.structure_constants, P)
    return brackets[:, 1] * P[1] + brackets[:, 2] * P[2]


@dataclass(frozen=True)
class HorizontalPath:
    """Samples of a horizontal path in an orthonormal horizontal frame.

    ``w1``, ``w2`` are the coefficients of the velocity along the two
    summands of the splitting at each sample time.
    """

    times: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    unit_speed: bool = True

    def __post_init__(self):
        for name in ("times", "w1", "w2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.times.shape == self.w1.shape == self.w2.shape) or self.times.ndim != 1:
            raise DomainError("times, w1 and w2 must be 1-D arrays of equal length")
        if self.times.size < 2 or np.any(np.diff(self.times) <= 0):
            raise DomainError("sample times must be strictly increasing")

    @property
    def length(self) -> float:
        """Parameter length; equals the path length for unit-speed paths."""
        return float(self.times[-1] - self.times[0])

    def reversed(self) -> "HorizontalPath":
        t = self.times[-1] + self.times[0] - self.times[::-1]
        return HorizontalPath(t, -self.w1[::-1], -self.w2[::-1], self.unit_speed)


@dataclass(frozen=True)
class EnergyReport:
    E1: float
    E2: float
    defect: float
    length: float
    tolerance: float = BALANCE_TOLERANCE

    @property
    def balanced(self) -> bool:
        return abs(self.defect) <= self.tolerance

    def as_dict(self):
        return {"E1": self.E1, "E2": self.E2, "defect": self.defect,
                "length": self.length, "balanced": self.balanced}


def energy_split(path: HorizontalPath, tolerance: float = BALANCE_TOLERANCE) -> EnergyReport:
    """Energies E_i = (1/l) int w_i^2 dt by the trapezoid rule on the samples."""
    if not path.unit_speed:
        raise DomainError("energy split is defined for unit-speed paths")
    speed2 = path.w1 ** 2 + path.w2 ** 2
    bad = np.abs(speed2 - 1.0) > UNIT_SPEED_TOLERANCE
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DomainError(
            f"path is not unit speed at t={path.times[j]!r} (|w|^2 = {speed2[j]!r})")
    ell = path.length
    E1 = float(np.trapezoid(path.w1 ** 2, path.times)) / ell
    E2 = float(np.trapezoid(path.w2 ** 2, path.times)) / ell
    return EnergyReport(E1, E2, E1 - E2, ell, tolerance)
