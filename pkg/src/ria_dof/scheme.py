"""
End-to-end realization of the two-phase RIA scheme on a three-user
MIMO interference channel.

One realization proceeds as follows:

1. Draw i.i.d. CN(0, 1) channels ``H[j, i, t]`` (receiver ``j``,
   transmitter ``i``, slot ``t``) for ``W1 + W2`` slots.
2. Interference-sensing phase: every transmitter uses a predefined random
   precoder ``V_i^(1)`` of shape ``(M*W1, b)``.
3. Receiver ``j`` separates its two interferers with the filters
   ``U_{j,i}`` and reports the row spaces ``S_{j,i}`` of
   ``T_{j,i} = U_{j,i} H_{j,i}^(1) V_i^(1)``.
4. Transmitter ``i`` intersects the two subspaces it created,
   ``S_i = S_{i+1,i} & S_{i-1,i}``, and sends rows of an orthonormal basis
   of ``S_i`` as its alignment-phase precoders.
5. Each receiver zero-forces the stacked interference and checks that
   ``b`` independent combinations of its own symbols survive.

Users are indexed 0, 1, 2 and all index arithmetic is modulo 3. Slots are
0-based within each phase.
"""

from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .catalog import AntennaConfig
from .errors import DegenerateInstanceError, InfeasibleError, ParameterError
from .optimizer import SchemeParams, check_constraints
from .subspace import (
    DEFAULT_TOL,
    IntersectionDimensionWarning,
    Rng,
    Subspace,
    containment_residual,
    intersect,
    left_null_basis,
    random_gaussian,
    rank,
    row_space,
)

__all__ = [
    "ChannelSet",
    "Phase1Design",
    "ReceiverReport",
    "Phase2Design",
    "FeasibilityReport",
    "TrialResult",
    "TrialSummary",
    "SlopeEstimate",
    "draw_channels",
    "build_phase1",
    "receiver_reports",
    "transmitter_intersection",
    "build_phase2",
    "random_phase2",
    "assemble_and_verify",
    "expected_intersection_dim",
    "run_trial",
    "run_trials",
    "estimate_dof_slope",
]

log = logging.getLogger(__name__)

SCHEME_TOL = 1e-8
K = 3

# Substream roles under each trial's key.
ROLE_CHANNEL = 0
ROLE_PHASE1 = 1
ROLE_CONTROL = 2


def _others(j):
    return (j + 1) % K, (j - 1) % K


# ---------------------------------------------------------------------------
# Channels and precoders
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ChannelSet:
    """
    All per-slot channel matrices of one realization.

    ``H[j, i, t]`` is the ``N x M`` channel from transmitter ``i`` to
    receiver ``j`` in global slot ``t``; slots ``0..W1-1`` form phase 1 and
    ``W1..W1+W2-1`` phase 2.
    """

    M: int
    N: int
    W1: int
    W2: int
    H: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.H.shape != (K, K, self.W1 + self.W2, self.N, self.M):
            raise ParameterError(f"channel array has shape {self.H.shape}")

    def slots(self, j: int, i: int, p: int) -> np.ndarray:
        """Channels of phase `p` (1 or 2), shape ``(W_p, N, M)``."""
        if p == 1:
            return self.H[j, i, : self.W1]
        if p == 2:
            return self.H[j, i, self.W1 :]
        raise ParameterError(f"phase must be 1 or 2, got {p}")

    def slot(self, j: int, i: int, p: int, s: int) -> np.ndarray:
        return self.slots(j, i, p)[s]

    def block(self, j: int, i: int, p: int) -> np.ndarray:
        """Block-diagonal phase channel of shape ``(N*W_p, M*W_p)``."""
        hs = self.slots(j, i, p)
        W, N, M = hs.shape
        out = np.zeros((W * N, W * M), dtype=np.complex128)
        for s in range(W):
            out[s * N : (s + 1) * N, s * M : (s + 1) * M] = hs[s]
        return out


def _apply(hs: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Block-diagonal channel times stacked precoder without forming the blocks."""
    W, N, M = hs.shape
    return np.einsum("tnm,tmb->tnb", hs, V.reshape(W, M, -1)).reshape(W * N, -1)


def draw_channels(cfg: AntennaConfig, params: SchemeParams, rng: Rng) -> ChannelSet:
    """Fresh channels for every slot, each slot from its own substream."""
    W = params.W
    H = np.empty((K, K, W, cfg.N, cfg.M), dtype=np.complex128)
    for t in range(W):
        draw = random_gaussian(K * K * cfg.N, cfg.M, rng.child(ROLE_CHANNEL, t))
        H[:, :, t] = draw.reshape(K, K, cfg.N, cfg.M)
    return ChannelSet(cfg.M, cfg.N, params.W1, params.W2, H)


@dataclass(frozen=True)
class Phase1Design:
    """Predefined phase-1 precoders, ``V[i]`` of shape ``(M*W1, b)``."""

    V: tuple


def build_phase1(cfg: AntennaConfig, params: SchemeParams, rng: Rng, rank_tol: float = DEFAULT_TOL) -> Phase1Design:
    M, W1, b = cfg.M, params.W1, params.b
    if b > M * W1:
        raise InfeasibleError(f"b = {b} exceeds M*W1 = {M * W1}; phase-1 precoders cannot have rank b")
    V = []
    for i in range(K):
        Vi = random_gaussian(M * W1, b, rng.child(ROLE_PHASE1, i))
        if rank(Vi, rank_tol) != b:
            raise DegenerateInstanceError(f"phase-1 precoder of transmitter {i} is rank deficient")
        V.append(Vi)
    return Phase1Design(tuple(V))


# ---------------------------------------------------------------------------
# Receiver reports and transmitter intersections
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ReceiverReport:
    """
    What receiver `j` learns in phase 1, keyed by interferer index.

    ``U[i]`` annihilates the other interferer's phase-1 signal, ``T[i]`` is
    the filtered interference from `i` and ``S[i]`` its row space in C^b.
    """

    j: int
    U: dict
    T: dict
    S: dict
    residual: dict


def receiver_reports(
    ch: ChannelSet,
    p1: Phase1Design,
    tol: float = SCHEME_TOL,
    rank_tol: float = DEFAULT_TOL,
) -> tuple[ReceiverReport, ...]:
    """
    Build ``U``, ``T`` and ``S`` at every receiver.

    Raises
    ------
    DegenerateInstanceError
        If a phase-1 interference matrix misses rank ``b`` or the
        annihilator residual exceeds `tol`.
    InfeasibleError
        If ``b >= N*W1`` so no annihilator exists.
    """
    b = p1.V[0].shape[1]
    if b >= ch.N * ch.W1:
        raise InfeasibleError(f"b = {b} leaves no room for U filters (N*W1 = {ch.N * ch.W1})")
    reports = []
    for j in range(K):
        A = {i: _apply(ch.slots(j, i, 1), p1.V[i]) for i in _others(j)}
        for i in _others(j):
            if rank(A[i], rank_tol) != b:
                raise DegenerateInstanceError(f"interference {i}->{j} has rank below b = {b}")
        U, T, S, res = {}, {}, {}, {}
        for i in _others(j):
            other = A[(2 * j - i) % K]  # the interferer that is not i
            U[i] = left_null_basis(other, rank_tol)
            res[i] = float(np.linalg.norm(U[i] @ other) / np.linalg.norm(other))
            if res[i] > tol:
                raise DegenerateInstanceError(f"U filter residual {res[i]:.2e} at receiver {j}")
            T[i] = U[i] @ A[i]
            S[i] = row_space(T[i], rank_tol)
        reports.append(ReceiverReport(j, U, T, S, res))
    return tuple(reports)


def expected_intersection_dim(cfg: AntennaConfig, params: SchemeParams) -> int:
    """Generic dimension ``2*min(N*W1 - b, b) - b`` of each ``S_i``."""
    b = params.b
    return 2 * min(cfg.N * params.W1 - b, b) - b


def transmitter_intersection(reports, i: int) -> tuple[Subspace, np.ndarray]:
    """
    Subspace ``S_i`` known to transmitter `i` and its orthonormal basis ``T_i``.

    Raises
    ------
    InfeasibleError
        If the intersection is empty.
    """
    a, c = _others(i)
    S_i = intersect(reports[a].S[i], reports[c].S[i])
    if S_i.dim == 0:
        raise InfeasibleError(f"intersection subspace of transmitter {i} is empty")
    return S_i, np.asarray(S_i.basis)


@dataclass(frozen=True)
class Phase2Design:
    """
    Alignment-phase precoders of one transmitter.

    ``V`` is the stacked ``(M*W2, b)`` precoder. Slot `s` carries the rows
    ``sigma * T[rows[s]]`` on top and zeros below, so ``allocation[s]`` is
    ``len(rows[s])``. ``T`` is ``None`` for the randomized control design.
    """

    V: np.ndarray = field(repr=False)
    rows: tuple
    sigma: float
    T: np.ndarray | None = field(default=None, repr=False)

    @property
    def allocation(self) -> tuple:
        return tuple(len(r) for r in self.rows)

    @property
    def rows_sent(self) -> int:
        """Number of distinct basis rows used over the whole phase."""
        return len({k for r in self.rows for k in r})

    def slot(self, s: int, M: int) -> np.ndarray:
        return self.V[s * M : (s + 1) * M]


def _greedy_rows(dim, M, W2):
    rows, start = [], 0
    stop = min(dim, M * W2)
    for _ in range(W2):
        r = min(M, stop - start)
        rows.append(tuple(range(start, start + r)))
        start += r
    return rows


def _cyclic_rows(dim, M, W2):
    r = min(M, dim)
    return [tuple((s * r + k) % dim for k in range(r)) for s in range(W2)]


PHASE2_FILLS = {"cyclic": _cyclic_rows, "greedy": _greedy_rows}


def build_phase2(
    T_i: np.ndarray,
    cfg: AntennaConfig,
    params: SchemeParams,
    sigma: float = 1.0,
    fill: str = "cyclic",
) -> Phase2Design:
    """
    Distribute the rows of ``sigma * T_i`` over the alignment slots.

    ``fill="cyclic"`` (default) keeps every slot busy: each slot carries
    ``r = min(M, dim)`` rows, slot `s` taking rows ``s*r .. s*r + r - 1``
    modulo ``dim``. With ``dim <= M`` every slot sends the whole of
    ``T_i`` padded with zero rows; with ``dim > M*W2`` the first ``M*W2``
    rows are sent once each.

    ``fill="greedy"`` packs rows ``M`` per slot without reuse and leaves
    trailing slots empty. It aligns just as well but starves the receivers
    of alignment-phase dimensions whenever ``dim < M*W2``.
    """
    T_i = np.asarray(T_i, dtype=np.complex128)
    dim = T_i.shape[0]
    if dim < 1:
        raise ParameterError("intersection basis is empty")
    if params.W2 < 1:
        raise ParameterError("W2 must be positive")
    if fill not in PHASE2_FILLS:
        raise ParameterError(f"unknown fill rule {fill!r}; expected one of {sorted(PHASE2_FILLS)}")
    M = cfg.M
    rows = PHASE2_FILLS[fill](dim, M, params.W2)
    V = np.zeros((M * params.W2, params.b), dtype=np.complex128)
    for s, idx in enumerate(rows):
        V[s * M : s * M + len(idx)] = sigma * T_i[list(idx)]
    return Phase2Design(V, tuple(rows), float(sigma), T_i)


def random_phase2(cfg: AntennaConfig, params: SchemeParams, rng: Rng, i: int, sigma: float = 1.0) -> Phase2Design:
    """Non-aligned control: i.i.d. Gaussian precoders in every alignment slot."""
    V = sigma * random_gaussian(cfg.M * params.W2, params.b, rng.child(ROLE_CONTROL, i))
    return Phase2Design(V, (tuple(range(cfg.M)),) * params.W2, float(sigma))


# ---------------------------------------------------------------------------
# Zero-forcing verification
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FeasibilityReport:
    """Rank and residual measurements at one receiver."""

    j: int
    b: int
    NW: int
    NW1: int
    NW2: int
    interference_rank: int
    interference_rank_phase1: int
    interference_rank_expected: int
    complement_dim: int
    zf_desired_rank: int
    zf_residual: float
    alignment_residual: float | None
    phase2_block_ranks: tuple
    phase2_rank: int
    alignment_ok: bool
    decodable: bool

    @property
    def passed(self) -> bool:
        return (
            self.alignment_ok
            and self.decodable
            and self.interference_rank == self.interference_rank_expected
        )

    def as_dict(self) -> dict:
        return {
            "receiver": self.j,
            "dims": {"NW": self.NW, "NW1": self.NW1, "NW2": self.NW2},
            "interference_rank": self.interference_rank,
            "interference_rank_phase1": self.interference_rank_phase1,
            "interference_rank_expected": self.interference_rank_expected,
            "complement_dim": self.complement_dim,
            "zf_desired_rank": self.zf_desired_rank,
            "b": self.b,
            "zf_residual": self.zf_residual,
            "alignment_residual": self.alignment_residual,
            "phase2_block_ranks": list(self.phase2_block_ranks),
            "phase2_rank": self.phase2_rank,
            "alignment_ok": self.alignment_ok,
            "decodable": self.decodable,
            "passed": self.passed,
        }


def _received(ch: ChannelSet, p1: Phase1Design, p2s, j: int, i: int) -> np.ndarray:
    """``H_{j,i} V_i`` over both phases, shape ``(N*W, b)``."""
    return np.vstack([_apply(ch.slots(j, i, 1), p1.V[i]), _apply(ch.slots(j, i, 2), p2s[i].V)])


def _zf_filter(D: np.ndarray, I: np.ndarray, b: int, rank_tol: float):
    """
    Zero-forcing receiver ``Z`` with orthonormal rows.

    Rows are taken from the orthogonal complement of the interference
    column space, keeping the top ``min(b, dim)`` left singular directions
    of the projected desired signal.
    """
    r = rank(I, rank_tol)
    NW = I.shape[0]
    if r == NW:
        return np.zeros((0, NW), dtype=np.complex128), r
    Q = left_null_basis(I, rank_tol)
    P, _, _ = np.linalg.svd(Q @ D, full_matrices=False)
    k = min(b, Q.shape[0])
    return P[:, :k].conj().T @ Q, r


def assemble_and_verify(
    ch: ChannelSet,
    p1: Phase1Design,
    p2s,
    params: SchemeParams,
    reports=None,
    tol: float = SCHEME_TOL,
    rank_tol: float = DEFAULT_TOL,
) -> tuple[FeasibilityReport, ...]:
    """
    Check the zero-forcing conditions at every receiver.

    For receiver ``j`` the desired signal ``D_j = H_{j,j} V_j`` and the
    interference ``I_j = [H_{j,j+1} V_{j+1} | H_{j,j-1} V_{j-1}]`` are
    stacked over both phases. ``I_j`` should keep the rank of its phase-1
    part, and the zero-forcing filter ``Z_j`` must satisfy
    ``rank(Z_j D_j) == b`` and ``||Z_j I_j|| <= tol * ||I_j||``.

    When `reports` is given, the alignment residual of every phase-2
    interference block against the reported ``S_{j,i}`` is measured too.
    """
    b, N, M = params.b, ch.N, ch.M
    NW1, NW2 = N * ch.W1, N * ch.W2
    out = []
    for j in range(K):
        a, c = _others(j)
        D = _received(ch, p1, p2s, j, j)
        I = np.hstack([_received(ch, p1, p2s, j, a), _received(ch, p1, p2s, j, c)])

        Z, r = _zf_filter(D, I, b, rank_tol)
        r1 = rank(I[:NW1], rank_tol)
        comp = I.shape[0] - r
        if Z.shape[0]:
            zf_rank = rank(Z @ D, rank_tol)
            zf_res = float(np.linalg.norm(Z @ I) / np.linalg.norm(I))
        else:
            zf_rank, zf_res = 0, 0.0

        align_res = None
        if reports is not None:
            align_res = 0.0
            for i in (a, c):
                hs = ch.slots(j, i, 2)
                for s in range(ch.W2):
                    block = hs[s] @ p2s[i].slot(s, M)
                    align_res = max(align_res, containment_residual(reports[j].S[i], block))

        G2 = [_apply(ch.slots(j, i, 2), p2s[i].V) for i in (j, a, c)]
        block_ranks = tuple(rank(g, rank_tol) if np.any(g) else 0 for g in G2)
        g2_rank = rank(np.hstack(G2), rank_tol) if any(block_ranks) else 0

        alignment_ok = r == r1 and (align_res is None or align_res <= tol)
        decodable = comp >= b and zf_rank == b and zf_res <= tol
        out.append(
            FeasibilityReport(
                j=j, b=b, NW=I.shape[0], NW1=NW1, NW2=NW2,
                interference_rank=r,
                interference_rank_phase1=r1,
                interference_rank_expected=min(2 * b, NW1),
                complement_dim=comp,
                zf_desired_rank=zf_rank,
                zf_residual=zf_res,
                alignment_residual=align_res,
                phase2_block_ranks=block_ranks,
                phase2_rank=g2_rank,
                alignment_ok=alignment_ok,
                decodable=decodable,
            )
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# Monte Carlo harness
# ---------------------------------------------------------------------------
@dataclass
class _Realization:
    channels: ChannelSet
    phase1: Phase1Design
    reports: tuple
    intersections: tuple  # (Subspace, T_i) per transmitter, empty for control
    phase2: tuple
    grassmann_ok: bool


def _realize(cfg, params, rng, rank_tol, tol, aligned=True, normalize_power=False, fill="cyclic") -> _Realization:
    ch = draw_channels(cfg, params, rng)
    p1 = build_phase1(cfg, params, rng, rank_tol)
    if normalize_power:
        # Average ||V^(1,s)||_F^2 over the phase equals b.
        p1 = Phase1Design(tuple(V * np.sqrt(params.b * params.W1) / np.linalg.norm(V) for V in p1.V))
    reports = receiver_reports(ch, p1, tol, rank_tol)

    grassmann_ok = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntersectionDimensionWarning)
        inters = tuple(transmitter_intersection(reports, i) for i in range(K))
    if any(issubclass(w.category, IntersectionDimensionWarning) for w in caught):
        grassmann_ok = False

    p2 = []
    for i in range(K):
        if aligned:
            T_i = inters[i][1]
            design = build_phase2(T_i, cfg, params, 1.0, fill)
            if normalize_power:
                # Orthonormal rows: ||V^(2)||_F^2 equals the number of rows sent.
                sigma = float(np.sqrt(params.b * params.W2 / sum(design.allocation)))
                design = build_phase2(T_i, cfg, params, sigma, fill)
            p2.append(design)
        else:
            # Unscaled E||V^(2,s)||_F^2 = M*b.
            sigma = 1.0 / np.sqrt(cfg.M) if normalize_power else 1.0
            p2.append(random_phase2(cfg, params, rng, i, float(sigma)))
    return _Realization(ch, p1, reports, inters, tuple(p2), grassmann_ok)


@dataclass
class TrialResult:
    trial: int
    status: str  # "pass", "fail" or "degenerate"
    dim_S: tuple = ()
    dim_S_reports: tuple = ()
    grassmann_ok: bool = True
    t_consistency: float = 0.0
    receivers: tuple = ()
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "trial": self.trial,
            "status": self.status,
            "dim_S": list(self.dim_S),
            "dim_S_reports": [list(d) for d in self.dim_S_reports],
            "grassmann_ok": self.grassmann_ok,
            "t_consistency": self.t_consistency,
            "receivers": [r.as_dict() for r in self.receivers],
            "message": self.message,
        }


def run_trial(
    cfg: AntennaConfig,
    params: SchemeParams,
    rng: Rng,
    trial: int = 0,
    tol: float = SCHEME_TOL,
    rank_tol: float = DEFAULT_TOL,
    aligned: bool = True,
    fill: str = "cyclic",
) -> TrialResult:
    """One realization; degenerate draws are reported, never retried."""
    try:
        real = _realize(cfg, params, rng, rank_tol, tol, aligned=aligned, fill=fill)
    except DegenerateInstanceError as exc:
        log.warning("trial %d discarded as degenerate: %s", trial, exc)
        return TrialResult(trial, "degenerate", message=str(exc))

    ch, p1, reports = real.channels, real.phase1, real.reports
    t_err = 0.0
    for rep in reports:
        for i in _others(rep.j):
            T = rep.U[i] @ _apply(ch.slots(rep.j, i, 1), p1.V[i])
            t_err = max(t_err, float(np.linalg.norm(T - rep.T[i]) / np.linalg.norm(rep.T[i])))

    fr = assemble_and_verify(ch, p1, real.phase2, params, reports, tol, rank_tol)
    status = "pass" if all(r.passed for r in fr) else "fail"
    return TrialResult(
        trial=trial,
        status=status,
        dim_S=tuple(S.dim for S, _ in real.intersections),
        dim_S_reports=tuple(tuple(rep.S[i].dim for i in _others(rep.j)) for rep in reports),
        grassmann_ok=real.grassmann_ok,
        t_consistency=t_err,
        receivers=fr,
    )


@dataclass
class TrialSummary:
    cfg: AntennaConfig
    params: SchemeParams
    seed: int
    aligned: bool
    trials: list

    @property
    def pass_count(self) -> int:
        return sum(t.status == "pass" for t in self.trials)

    @property
    def fail_count(self) -> int:
        return sum(t.status == "fail" for t in self.trials)

    @property
    def degenerate_count(self) -> int:
        return sum(t.status == "degenerate" for t in self.trials)

    @property
    def all_passed(self) -> bool:
        """Every non-degenerate trial passed (and at least one ran)."""
        return self.fail_count == 0 and self.pass_count > 0

    def summary(self) -> dict:
        done = [t for t in self.trials if t.status != "degenerate"]
        recs = [r for t in done for r in t.receivers]
        return {
            "schema": 1,
            "type": "summary",
            "M": self.cfg.M,
            "N": self.cfg.N,
            "params": self.params.as_dict(),
            "seed": self.seed,
            "aligned": self.aligned,
            "n_trials": len(self.trials),
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "degenerate_count": self.degenerate_count,
            "dim_S_expected": expected_intersection_dim(self.cfg, self.params),
            "dim_S_observed": sorted({d for t in done for d in t.dim_S}),
            "interference_rank_expected": min(2 * self.params.b, self.cfg.N * self.params.W1),
            "interference_ranks_observed": sorted({r.interference_rank for r in recs}),
            "mean_zf_residual": float(np.mean([r.zf_residual for r in recs])) if recs else None,
            "max_zf_residual": float(np.max([r.zf_residual for r in recs])) if recs else None,
            "max_alignment_residual": (
                float(np.max([r.alignment_residual for r in recs])) if recs else None
            ),
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps({"schema": 1, "type": "trial", **t.as_dict()}, sort_keys=True) for t in self.trials]
        lines.append(json.dumps(self.summary(), sort_keys=True))
        return "\n".join(lines) + "\n"


def run_trials(
    cfg: AntennaConfig,
    params: SchemeParams,
    n_trials: int,
    seed: int,
    tol: float = SCHEME_TOL,
    rank_tol: float = DEFAULT_TOL,
    aligned: bool = True,
    workers: int = 1,
    require_feasible: bool = True,
    fill: str = "cyclic",
) -> TrialSummary:
    """
    Run `n_trials` independent realizations.

    Trial ``t`` draws everything from the substream ``Rng(seed).child(t)``,
    so results do not depend on `workers` or execution order.
    """
    if n_trials < 1:
        raise ParameterError(f"n_trials must be at least 1, got {n_trials}")
    if require_feasible:
        rep = check_constraints(params.b, params.W1, params.W2, cfg)
        if not rep.feasible:
            raise InfeasibleError(f"parameters violate {', '.join(rep.failed())}")
    root = Rng(seed)

    def one(t):
        return run_trial(cfg, params, root.child(t), t, tol, rank_tol, aligned, fill)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(one, range(n_trials)))
    else:
        trials = [one(t) for t in range(n_trials)]
    return TrialSummary(cfg, params, seed, aligned, trials)


# ---------------------------------------------------------------------------
# Finite-SNR slope
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    dof: Fraction
    snr_db: tuple
    mean_rates: tuple
    used_trials: int
    excluded_trials: int

    @property
    def relative_error(self) -> float:
        return abs(self.slope - float(self.dof)) / float(self.dof)

    def as_dict(self) -> dict:
        return {
            "schema": 1,
            "slope": self.slope,
            "dof": str(self.dof),
            "dof_float": float(self.dof),
            "relative_error": self.relative_error,
            "snr_db": list(self.snr_db),
            "mean_rates": list(self.mean_rates),
            "used_trials": self.used_trials,
            "excluded_trials": self.excluded_trials,
        }


def estimate_dof_slope(
    cfg: AntennaConfig,
    params: SchemeParams,
    snr_db_pair=(40.0, 60.0),
    n_trials: int = 200,
    seed: int = 0,
    aligned: bool = True,
    rank_tol: float = DEFAULT_TOL,
    tol: float = SCHEME_TOL,
    fill: str = "cyclic",
) -> SlopeEstimate:
    """
    High-SNR slope of the per-user rate of the zero-forced scheme.

    Per-slot transmit power is normalized so that ``||V^(p,s)||_F^2`` averages
    to ``b`` over each phase. The rate of user ``j`` is
    ``log2 det(I + snr/b * (Z_j D_j)(Z_j D_j)^H) / W``, averaged over users
    and trials; the slope is the rate difference over the ``log2 snr``
    difference between the two SNR points.

    In aligned mode non-decodable trials are excluded with a warning. The
    control mode (``aligned=False``) keeps every trial and uses whatever
    zero-forcing dimension is left.
    """
    lo, hi = (float(x) for x in snr_db_pair)
    if lo == hi:
        raise ParameterError("the two SNR points must differ")
    if n_trials < 1:
        raise ParameterError(f"n_trials must be at least 1, got {n_trials}")
    snr = np.array([10 ** (lo / 10), 10 ** (hi / 10)])
    b, W = params.b, params.W
    root = Rng(seed)
    totals = np.zeros(2)
    used = excluded = 0
    for t in range(n_trials):
        try:
            real = _realize(cfg, params, root.child(t), rank_tol, tol, aligned=aligned, normalize_power=True, fill=fill)
        except DegenerateInstanceError:
            excluded += 1
            continue
        rates = np.zeros(2)
        ok = True
        for j in range(K):
            a, c = _others(j)
            D = _received(real.channels, real.phase1, real.phase2, j, j)
            I = np.hstack([
                _received(real.channels, real.phase1, real.phase2, j, a),
                _received(real.channels, real.phase1, real.phase2, j, c),
            ])
            Z, _ = _zf_filter(D, I, b, rank_tol)
            E = Z @ D
            if aligned and (Z.shape[0] < b or rank(E, rank_tol) < b):
                ok = False
                break
            gram = E @ E.conj().T
            for k, x in enumerate(snr):
                _, logdet = np.linalg.slogdet(np.eye(E.shape[0]) + (x / b) * gram)
                rates[k] += logdet / np.log(2) / W
        if not ok:
            warnings.warn(f"trial {t} is not decodable; excluded from the slope estimate", RuntimeWarning)
            excluded += 1
            continue
        totals += rates / K
        used += 1
    if used == 0:
        raise DegenerateInstanceError("no usable trials for the slope estimate")
    mean = totals / used
    slope = float((mean[1] - mean[0]) / (np.log2(snr[1]) - np.log2(snr[0])))
    return SlopeEstimate(slope, params.dof, (lo, hi), (float(mean[0]), float(mean[1])), used, excluded)
