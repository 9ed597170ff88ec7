"""
Integer DoF maximization for the two-phase RIA scheme.

The scheme sends ``b`` symbols per user over ``W1`` interference-sensing
slots and ``W2`` alignment slots, achieving ``b / (W1 + W2)`` DoF per user
subject to four linear constraints (see :func:`check_constraints`).

:func:`closed_form` returns the analytical optimum on its region of
validity; :func:`brute_force` enumerates the integer grid and serves as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .catalog import AntennaConfig, classify
from .errors import ParameterError, RegionError

__all__ = [
    "SchemeParams",
    "ConstraintReport",
    "check_constraints",
    "closed_form",
    "w1_star",
    "w2_star",
    "brute_force",
    "default_bounds",
]


@dataclass(frozen=True)
class SchemeParams:
    b: int
    W1: int
    W2: int

    def __post_init__(self):
        for name in ("b", "W1", "W2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def W(self) -> int:
        return self.W1 + self.W2

    @property
    def dof(self) -> Fraction:
        return Fraction(self.b, self.W)

    def as_dict(self) -> dict:
        return {"b": self.b, "W1": self.W1, "W2": self.W2, "W": self.W, "dof": str(self.dof)}


@dataclass(frozen=True)
class ConstraintReport:
    c16_u_filter: bool
    c17_intersection: bool
    c18_rank: bool
    c19_space: bool

    @property
    def feasible(self) -> bool:
        return self.c16_u_filter and self.c17_intersection and self.c18_rank and self.c19_space

    def failed(self) -> list[str]:
        return [name for name, ok in asdict(self).items() if not ok]

    def as_dict(self) -> dict:
        return {**asdict(self), "feasible": self.feasible}


def check_constraints(b: int, W1: int, W2: int, cfg: AntennaConfig) -> ConstraintReport:
    """
    Evaluate the four feasibility constraints with exact integer arithmetic.

    * U-filter existence: ``b <= min(M*W1, N*W1 - 1)``
    * nonempty intersection: ``2*min(N*W1 - b, b) - b >= 1``
    * desired rank after zero-forcing: ``5*b <= 3*N*W1``
    * receive dimensions: ``b <= N*W2``
    """
    M, N = cfg.M, cfg.N
    return ConstraintReport(
        c16_u_filter=b <= min(M * W1, N * W1 - 1),
        c17_intersection=2 * min(N * W1 - b, b) - b >= 1,
        c18_rank=5 * b <= 3 * N * W1,
        c19_space=b <= N * W2,
    )


def w2_star(b: int, N: int) -> int:
    """Smallest ``W2`` with ``b <= N*W2``."""
    if b < 1 or N < 1:
        raise ParameterError("b and N must be positive")
    return -(-b // N)


def w1_star(b: int, cfg: AntennaConfig, search_limit: int | None = None) -> int | None:
    """
    Smallest ``W1`` satisfying the first three constraints for this `b`.

    The candidate is the ceiling of the largest lower bound implied by the
    constraints; it is then checked directly and, if necessary, increased
    until the constraints hold. Returns ``None`` when nothing up to
    `search_limit` (default ``2*b + 2``, above every lower bound) works.
    """
    if b < 1:
        raise ParameterError("b must be positive")
    M, N = cfg.M, cfg.N
    candidate = max(
        math.ceil(Fraction(b, M)),
        math.ceil(Fraction(b + 1, N)),
        math.ceil(Fraction(3 * b + 1, 2 * N)),
        math.ceil(Fraction(5 * b, 3 * N)),
        1,
    )
    limit = 2 * b + 2 if search_limit is None else search_limit
    W2 = w2_star(b, N)
    for W1 in range(candidate, limit + 1):
        rep = check_constraints(b, W1, W2, cfg)
        if rep.c16_u_filter and rep.c17_intersection and rep.c18_rank:
            return W1
    return None


_B1 = (Fraction(1, 2), Fraction(3, 5))
_B2 = (Fraction(3, 5), Fraction(31, 32))


def closed_form(cfg: AntennaConfig) -> SchemeParams:
    """
    Analytical optimum ``(b, W1, W2)`` for ``1/2 < rho <= 31/32``.

    ``(M*N, N, M)`` on ``(1/2, 3/5]`` and ``(3N, 5, 3)`` on ``(3/5, 31/32]``.

    Raises
    ------
    RegionError
        Outside that range; the error names the region that applies.
    """
    rho = cfg.rho
    if _B1[0] < rho <= _B1[1]:
        return SchemeParams(cfg.M * cfg.N, cfg.N, cfg.M)
    if _B2[0] < rho <= _B2[1]:
        return SchemeParams(3 * cfg.N, 5, 3)
    region = classify(cfg)
    raise RegionError(
        f"rho = {rho} lies in region {region.label} {region.interval_str()}; "
        "the closed form covers only (1/2, 31/32]; use the brute-force oracle instead",
        region=region.label,
    )


def default_bounds(cfg: AntennaConfig) -> tuple[int, int]:
    return 3 * cfg.N + 5, 3 * cfg.M + 5


def _feasible_grid(cfg: AntennaConfig, w1_max: int, w2_max: int):
    # Vectorized copy of check_constraints over the whole (W1, W2, b) box.
    M, N = cfg.M, cfg.N
    b_max = max(min(M * w1_max, N * w1_max - 1), 1)
    W1 = np.arange(1, w1_max + 1, dtype=np.int64)[:, None, None]
    W2 = np.arange(1, w2_max + 1, dtype=np.int64)[None, :, None]
    b = np.arange(1, b_max + 1, dtype=np.int64)[None, None, :]
    feasible = (
        (b <= np.minimum(M * W1, N * W1 - 1))
        & (2 * np.minimum(N * W1 - b, b) - b >= 1)
        & (5 * b <= 3 * N * W1)
        & (b <= N * W2)
    )
    return feasible, b_max


def brute_force(cfg: AntennaConfig, w1_max: int | None = None, w2_max: int | None = None) -> SchemeParams | None:
    """
    Exhaustive maximization of ``b / (W1 + W2)`` over the integer box.

    Enumerates ``W1 in [1, w1_max]``, ``W2 in [1, w2_max]`` and
    ``b in [1, min(M*W1, N*W1 - 1)]``. Ties are broken by smallest ``W``,
    then smallest ``b``, then smallest ``W1``. Returns ``None`` when no
    triple in the box is feasible.
    """
    d1, d2 = default_bounds(cfg)
    w1_max = d1 if w1_max is None else w1_max
    w2_max = d2 if w2_max is None else w2_max
    if w1_max < 1 or w2_max < 1:
        raise ParameterError("search bounds must be positive")

    feasible, b_max = _feasible_grid(cfg, w1_max, w2_max)
    b_values = np.arange(1, b_max + 1)
    # Largest feasible b per (W1, W2), 0 where none.
    best_b = np.where(feasible, b_values, 0).max(axis=2)

    best = None
    best_key = None
    for i in range(w1_max):
        for j in range(w2_max):
            b = int(best_b[i, j])
            if b == 0:
                continue
            W1, W2 = i + 1, j + 1
            key = (-Fraction(b, W1 + W2), W1 + W2, b, W1)
            if best_key is None or key < best_key:
                best_key, best = key, (b, W1, W2)
    return None if best is None else SchemeParams(*best)
