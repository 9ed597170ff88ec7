"""
Achievable per-user DoF of the 3-user MIMO interference channel with
delayed CSIT, as a function of the antenna ratio ``rho = M/N``.

All formulas are evaluated in exact rational arithmetic. Every formula is
homogeneous of degree one in ``(M, N)``, so each one is written as
``N * f(rho)`` where ``f`` is the normalized value ``d/N`` plotted against
``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParameterError

__all__ = [
    "AntennaConfig",
    "RegionCase",
    "DofValue",
    "STRATEGIES",
    "REGIONS",
    "BREAKPOINTS",
    "classify",
    "classify_rho",
    "inner_bound",
    "inner_normalized",
    "region_formula",
    "strategy_dof",
    "strategy_normalized",
    "outer_bound",
    "outer_is_interpolated",
    "sweep",
    "rho_grid",
]


@dataclass(frozen=True)
class AntennaConfig:
    """Transmit antennas `M` and receive antennas `N` of every user."""

    M: int
    N: int

    def __post_init__(self):
        for name in ("M", "N"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")

    @property
    def rho(self) -> Fraction:
        return Fraction(self.M, self.N)


@dataclass(frozen=True)
class RegionCase:
    """One row of the achievable-DoF table: a label and its rho interval."""

    label: str
    lower: Fraction
    upper: Fraction | None  # None means +infinity
    lower_closed: bool
    upper_closed: bool

    def __contains__(self, rho) -> bool:
        rho = Fraction(rho)
        if rho < self.lower or (rho == self.lower and not self.lower_closed):
            return False
        if self.upper is None:
            return True
        return rho < self.upper or (rho == self.upper and self.upper_closed)

    @property
    def case(self) -> str:
        return self.label[0]

    def interval_str(self) -> str:
        upper = "inf" if self.upper is None else str(self.upper)
        return (
            f"{'[' if self.lower_closed else '('}{self.lower}, {upper}"
            f"{']' if self.upper_closed else ')'}"
        )


_F = Fraction

REGIONS: tuple[RegionCase, ...] = (
    RegionCase("A1", _F(0), _F(1, 3), True, False),
    RegionCase("A2", _F(1, 3), _F(1, 2), True, True),
    RegionCase("B1", _F(1, 2), _F(3, 5), False, True),
    RegionCase("B2", _F(3, 5), _F(31, 32), False, True),
    RegionCase("C", _F(31, 32), _F(18, 13), False, False),
    RegionCase("D1", _F(18, 13), _F(2), True, False),
    RegionCase("D2", _F(2), _F(3), True, False),
    RegionCase("E", _F(3), None, True, False),
)

BREAKPOINTS: tuple[Fraction, ...] = (
    _F(1, 3), _F(1, 2), _F(3, 5), _F(31, 32), _F(18, 13), _F(2), _F(3),
)

# Strategy keys, in catalog order.
ZF = "zf"
RIA = "ria"
SCALED_SISO = "scaled_siso"
TDMA_2USER = "tdma_2user"
KUSER_2PHASE = "kuser_2phase"
STRATEGIES: tuple[str, ...] = (ZF, RIA, SCALED_SISO, TDMA_2USER, KUSER_2PHASE)

STRATEGY_DESCRIPTIONS = {
    ZF: "receive zero-forcing, CSIR only",
    RIA: "two-phase retrospective interference alignment",
    SCALED_SISO: "scaled SISO scheme with surplus antennas switched off",
    TDMA_2USER: "TDMA over the three 2-user MIMO ICs",
    KUSER_2PHASE: "two-phase K-user MIMO IC scheme",
}

# Region -> strategy that attains the table value there.
REGION_STRATEGY = {
    "A1": ZF, "A2": ZF, "B1": RIA, "B2": RIA,
    "C": SCALED_SISO, "D1": TDMA_2USER, "D2": TDMA_2USER, "E": KUSER_2PHASE,
}


@dataclass(frozen=True)
class DofValue:
    """Per-user DoF together with its normalized value ``d/N``."""

    value: Fraction
    normalized: Fraction
    strategy: str

    def __float__(self):
        return float(self.value)


def _as_rho(rho) -> Fraction:
    rho = Fraction(rho)
    if rho < 0:
        raise ParameterError(f"rho must be nonnegative, got {rho}")
    return rho


def classify_rho(rho) -> RegionCase:
    rho = _as_rho(rho)
    for region in REGIONS:
        if rho in region:
            return region
    raise AssertionError(f"regions do not cover rho={rho}")  # pragma: no cover


def classify(cfg: AntennaConfig) -> RegionCase:
    """Region of the DoF table that contains ``cfg.rho``."""
    return classify_rho(cfg.rho)


def _region_formula(label: str, rho: Fraction) -> Fraction:
    if label == "A1":
        return rho
    if label == "A2":
        return _F(1, 3)
    if label == "B1":
        return rho / (1 + rho)
    if label == "B2":
        return _F(3, 8)
    if label == "C":
        return _F(12, 31) * min(rho, _F(1))
    if label == "D1":
        return _F(2, 3) * rho / (1 + rho)
    if label == "D2":
        return _F(4, 9)
    if label == "E":
        return _F(1, 2)
    raise ParameterError(f"unknown region label {label!r}")


def region_formula(label: str, rho) -> Fraction:
    """Normalized value of one region's table formula, evaluated at any rho."""
    return _region_formula(label, _as_rho(rho))


def inner_normalized(rho) -> Fraction:
    """Best known achievable ``d/N`` at antenna ratio `rho`."""
    rho = _as_rho(rho)
    return _region_formula(classify_rho(rho).label, rho)


def inner_bound(cfg: AntennaConfig) -> DofValue:
    region = classify(cfg)
    normalized = _region_formula(region.label, cfg.rho)
    return DofValue(normalized * cfg.N, normalized, REGION_STRATEGY[region.label])


def strategy_normalized(rho, strategy: str) -> Fraction | None:
    """
    Normalized DoF of one catalog strategy, or ``None`` when the strategy
    does not apply at `rho`.

    The RIA entry uses the closed-form scheme parameters: ``(MN, N, M)`` for
    ``rho <= 3/5`` and ``(3N, 5, 3)`` above, both of which satisfy the
    scheme's feasibility constraints at every ratio.
    """
    rho = _as_rho(rho)
    if strategy == ZF:
        return min(rho, _F(1, 3))
    if strategy == RIA:
        return rho / (1 + rho) if rho <= _F(3, 5) else _F(3, 8)
    if strategy == SCALED_SISO:
        return _F(12, 31) * min(rho, _F(1))
    if strategy == TDMA_2USER:
        return _F(2, 3) * rho / (1 + rho) if rho < 2 else _F(4, 9)
    if strategy == KUSER_2PHASE:
        return _F(1, 2) if rho >= 3 else None
    raise ParameterError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def strategy_dof(cfg: AntennaConfig, strategy: str) -> DofValue | None:
    normalized = strategy_normalized(cfg.rho, strategy)
    if normalized is None:
        return None
    return DofValue(normalized * cfg.N, normalized, strategy)


# Outer bound pieces: (lower, upper, slope, intercept)
# meaning d/N = slope * rho + intercept on [lower, upper].
_INTERP_LO = (_F(4, 5), _F(4, 9))
_INTERP_HI = (_F(6, 5), _F(6, 11))
_INTERP_SLOPE = (_INTERP_HI[1] - _INTERP_LO[1]) / (_INTERP_HI[0] - _INTERP_LO[0])
_OUTER_PIECES = (
    (_F(0), _F(1, 3), _F(1), _F(0)),
    (_F(1, 3), _F(1, 2), _F(0), _F(1, 3)),
    (_F(1, 2), _F(3, 5), _F(2, 3), _F(0)),
    (_F(3, 5), _F(2, 3), _F(0), _F(2, 5)),
    (_F(2, 3), _F(5, 7), _F(3, 5), _F(0)),
    (_F(5, 7), _F(3, 4), _F(0), _F(3, 7)),
    (_F(3, 4), _F(7, 9), _F(4, 7), _F(0)),
    (_F(7, 9), _F(4, 5), _F(0), _F(4, 9)),
    (_INTERP_LO[0], _INTERP_HI[0], _INTERP_SLOPE, _INTERP_LO[1] - _INTERP_SLOPE * _INTERP_LO[0]),
)


def outer_bound(rho) -> Fraction:
    """Normalized outer bound ``d/N`` at antenna ratio `rho`."""
    rho = _as_rho(rho)
    for lower, upper, slope, intercept in _OUTER_PIECES:
        if lower <= rho <= upper:
            return slope * rho + intercept
    return _F(6, 11)


def outer_is_interpolated(rho) -> bool:
    """True where the outer bound comes from the straight dotted segment."""
    rho = _as_rho(rho)
    return _INTERP_LO[0] < rho < _INTERP_HI[0]


def rho_grid(rho_min, rho_max, steps: int, include_breakpoints: bool = True) -> list[Fraction]:
    """Evenly spaced rational grid, optionally augmented with the breakpoints."""
    rho_min, rho_max = _as_rho(rho_min), _as_rho(rho_max)
    if not rho_min < rho_max:
        raise ParameterError(f"need rho_min < rho_max, got {rho_min} and {rho_max}")
    if steps < 2:
        raise ParameterError(f"steps must be at least 2, got {steps}")
    step = (rho_max - rho_min) / (steps - 1)
    points = {rho_min + k * step for k in range(steps)}
    if include_breakpoints:
        points.update(b for b in BREAKPOINTS if rho_min <= b <= rho_max)
    return sorted(points)


def _row(rho: Fraction, cfg: AntennaConfig | None = None) -> dict:
    row = {
        "rho": rho,
        "M": cfg.M if cfg else None,
        "N": cfg.N if cfg else None,
        "region": classify_rho(rho).label,
        "inner": inner_normalized(rho),
        "outer": outer_bound(rho),
        "outer_interpolated": outer_is_interpolated(rho),
    }
    for s in STRATEGIES:
        row[s] = strategy_normalized(rho, s)
    return row


def sweep(
    rho_min=None,
    rho_max=None,
    steps: int | None = None,
    configs: Iterable[AntennaConfig | Sequence[int]] | None = None,
) -> list[dict]:
    """
    Table of normalized inner/outer bounds and per-strategy values.

    Either sweep a rational rho grid (``rho_min``, ``rho_max``, ``steps``;
    breakpoints are always added) or evaluate an explicit list of antenna
    configurations. Rows are sorted by rho; values are exact ``Fraction``
    objects, with ``None`` for inapplicable strategies.
    """
    if configs is not None:
        cfgs = [c if isinstance(c, AntennaConfig) else AntennaConfig(*c) for c in configs]
        rows = [_row(c.rho, c) for c in cfgs]
        return sorted(rows, key=lambda r: (r["rho"], r["N"]))
    if rho_min is None or rho_max is None or steps is None:
        raise ParameterError("give either configs or rho_min, rho_max and steps")
    return [_row(rho) for rho in rho_grid(rho_min, rho_max, steps)]
