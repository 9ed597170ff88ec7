from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ria_dof.catalog import AntennaConfig, inner_bound
from ria_dof.errors import ParameterError, RegionError
from ria_dof.optimizer import (
    SchemeParams,
    _feasible_grid,
    brute_force,
    check_constraints,
    closed_form,
    default_bounds,
    w1_star,
    w2_star,
)


def case_b_configs(limit_m, limit_n):
    return [
        (M, N)
        for M in range(1, limit_m + 1)
        for N in range(1, limit_n + 1)
        if F(1, 2) < F(M, N) <= F(31, 32)
    ]


def naive_feasible(b, W1, W2, M, N):
    # Written out independently of check_constraints.
    ok_u = b <= M * W1 and b <= N * W1 - 1
    ok_int = 2 * min(N * W1 - b, b) > b
    ok_rank = F(b) <= F(3, 5) * N * W1
    ok_space = b <= N * W2
    return ok_u and ok_int and ok_rank and ok_space


# ---------------------------------------------------------------- SchemeParams
def test_scheme_params_fields():
    p = SchemeParams(15, 5, 3)
    assert (p.W, p.dof) == (8, F(15, 8))
    assert p.as_dict() == {"b": 15, "W1": 5, "W2": 3, "W": 8, "dof": "15/8"}


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, 0), (1.0, 1, 1), (True, 1, 1)])
def test_scheme_params_validation(bad):
    with pytest.raises(ParameterError):
        SchemeParams(*bad)


# ---------------------------------------------------------------- constraints
def test_constraints_table_point():
    rep = check_constraints(15, 5, 3, AntennaConfig(3, 5))
    assert rep.feasible and rep.failed() == []


def test_constraints_space_failure():
    rep = check_constraints(15, 5, 2, AntennaConfig(3, 5))
    assert rep.failed() == ["c19_space"]


def test_constraints_u_filter_margin():
    rep = check_constraints(25, 5, 5, AntennaConfig(5, 5))
    assert not rep.c16_u_filter
    assert not rep.feasible


def test_constraints_intersection_is_strict():
    # N*W1 = 10, b = 6: 2*min(4, 6) - 6 = 2 > 0; b = 7: 2*3 - 7 < 0.
    cfg = AntennaConfig(10, 2)
    assert check_constraints(6, 5, 3, cfg).c17_intersection
    assert not check_constraints(7, 5, 4, cfg).c17_intersection
    # Left side exactly zero: N*W1 = 3, b = 2 -> 2*1 - 2 = 0.
    assert not check_constraints(2, 1, 1, AntennaConfig(3, 3)).c17_intersection


@settings(max_examples=200, deadline=None)
@given(M=st.integers(1, 9), N=st.integers(1, 9), b=st.integers(1, 60), W1=st.integers(1, 12), W2=st.integers(1, 12))
def test_constraints_match_naive(M, N, b, W1, W2):
    rep = check_constraints(b, W1, W2, AntennaConfig(M, N))
    assert rep.feasible == naive_feasible(b, W1, W2, M, N)
    assert rep.as_dict()["feasible"] == rep.feasible


@settings(max_examples=200, deadline=None)
@given(M=st.integers(1, 9), N=st.integers(1, 9), b=st.integers(1, 60), W1=st.integers(1, 12), W2=st.integers(1, 12))
def test_feasibility_upward_closed(M, N, b, W1, W2):
    # More slots never break a constraint for fixed b.
    cfg = AntennaConfig(M, N)
    if check_constraints(b, W1, W2, cfg).feasible:
        assert check_constraints(b, W1 + 1, W2, cfg).feasible
        assert check_constraints(b, W1, W2 + 1, cfg).feasible


# ---------------------------------------------------------------- closed form
@pytest.mark.parametrize(
    "M, N, params, dof",
    [(3, 5, (15, 5, 3), F(15, 8)), (5, 9, (45, 9, 5), F(45, 14)), (2, 3, (9, 5, 3), F(9, 8)),
     (31, 32, (96, 5, 3), F(12))],
)
def test_closed_form_examples(M, N, params, dof):
    p = closed_form(AntennaConfig(M, N))
    assert (p.b, p.W1, p.W2) == params
    assert p.dof == dof


@pytest.mark.parametrize("M, N, region", [(1, 1, "C"), (1, 2, "A2"), (32, 32, "C"), (4, 1, "E")])
def test_closed_form_region_error(M, N, region):
    with pytest.raises(RegionError) as err:
        closed_form(AntennaConfig(M, N))
    assert err.value.region == region


def test_closed_form_three_fifths_coincide():
    cfg = AntennaConfig(3, 5)
    assert F(cfg.M * cfg.N, cfg.M + cfg.N) == F(3, 8) * cfg.N


def test_closed_form_feasible_and_matches_catalog():
    for M, N in case_b_configs(32, 32):
        cfg = AntennaConfig(M, N)
        p = closed_form(cfg)
        assert check_constraints(p.b, p.W1, p.W2, cfg).feasible, (M, N)
        assert p.dof == inner_bound(cfg).value


# ---------------------------------------------------------------- w2*, w1*
@pytest.mark.parametrize("b, N, expected", [(15, 5, 3), (1, 7, 1), (45, 9, 5), (16, 5, 4)])
def test_w2_star(b, N, expected):
    assert w2_star(b, N) == expected


def test_w2_star_validation():
    with pytest.raises(ParameterError):
        w2_star(0, 3)


@pytest.mark.parametrize("b, M, N, expected", [(15, 3, 5, 5), (45, 5, 9, 9)])
def test_w1_star_table(b, M, N, expected):
    assert w1_star(b, AntennaConfig(M, N)) == expected


def scan_w1(b, cfg, upto=20):
    W2 = w2_star(b, cfg.N)
    for W1 in range(1, upto + 1):
        rep = check_constraints(b, W1, W2, cfg)
        if rep.c16_u_filter and rep.c17_intersection and rep.c18_rank:
            return W1
    return None


def test_w1_star_small_case_against_scan():
    cfg = AntennaConfig(2, 3)
    assert w1_star(3, cfg) == scan_w1(3, cfg) == 2


@settings(max_examples=150, deadline=None)
@given(M=st.integers(1, 8), N=st.integers(1, 8), b=st.integers(1, 8))
def test_w1_star_against_scan(M, N, b):
    cfg = AntennaConfig(M, N)
    assert w1_star(b, cfg) == scan_w1(b, cfg, upto=20)


def test_w1_star_respects_search_limit():
    assert w1_star(15, AntennaConfig(3, 5), search_limit=4) is None


# ---------------------------------------------------------------- brute force
@pytest.mark.parametrize("M, N, dof", [(3, 5, F(15, 8)), (5, 9, F(45, 14)), (2, 3, F(9, 8))])
def test_brute_force_examples(M, N, dof):
    assert brute_force(AntennaConfig(M, N)).dof == dof


def test_brute_force_tie_break():
    p = brute_force(AntennaConfig(2, 3))
    assert (p.b, p.W1, p.W2) == (9, 5, 3)


def test_brute_force_against_naive_loops():
    for M, N in [(1, 1), (2, 3), (3, 5), (1, 3), (4, 2), (2, 7)]:
        w1_max, w2_max = 8, 8
        best = None
        for W1 in range(1, w1_max + 1):
            for W2 in range(1, w2_max + 1):
                for b in range(1, M * W1 + 1):
                    if naive_feasible(b, W1, W2, M, N):
                        key = (-F(b, W1 + W2), W1 + W2, b, W1)
                        if best is None or key < best[0]:
                            best = (key, (b, W1, W2))
        got = brute_force(AntennaConfig(M, N), w1_max, w2_max)
        if best is None:
            assert got is None
        else:
            assert (got.b, got.W1, got.W2) == best[1], (M, N)


def test_brute_force_infeasible_box():
    # N = 1: c16 needs b <= W1 - 1 and c17 needs W1 - b > b/2, so tiny boxes fail.
    assert brute_force(AntennaConfig(1, 1), 1, 1) is None
    with pytest.raises(ParameterError):
        brute_force(AntennaConfig(1, 1), 0, 3)


def test_oracle_agreement_grid():
    for M, N in case_b_configs(12, 12):
        cfg = AntennaConfig(M, N)
        assert brute_force(cfg).dof == closed_form(cfg).dof, (M, N)


def test_optimality_certificate_at_fixed_w():
    for M, N in case_b_configs(10, 10):
        cfg = AntennaConfig(M, N)
        p = closed_form(cfg)
        assert check_constraints(p.b, p.W1, p.W2, cfg).feasible
        for W1 in range(1, p.W):
            W2 = p.W - W1
            for b in range(p.b + 1, M * W1 + 1):
                assert not check_constraints(b, W1, W2, cfg).feasible, (M, N, b, W1, W2)


def test_decreasing_slots_raises_dof_or_breaks():
    for M, N in case_b_configs(6, 8):
        cfg = AntennaConfig(M, N)
        for W1 in range(1, 10):
            for W2 in range(1, 10):
                for b in range(1, M * W1 + 1):
                    if not check_constraints(b, W1, W2, cfg).feasible:
                        continue
                    for d1, d2 in [(1, 0), (0, 1)]:
                        w1, w2 = W1 - d1, W2 - d2
                        if w1 < 1 or w2 < 1:
                            continue
                        shrunk = check_constraints(b, w1, w2, cfg)
                        assert (not shrunk.feasible) or F(b, w1 + w2) > F(b, W1 + W2)


@pytest.mark.parametrize("M, N", [(3, 5), (2, 3), (4, 7), (5, 6)])
def test_scale_consistency(M, N):
    base = AntennaConfig(M, N)
    dof1 = brute_force(base).dof
    for k in (1, 2):
        w1, w2 = default_bounds(base)
        assert brute_force(AntennaConfig(k * M, k * N), k * w1, k * w2).dof == k * dof1


def test_vectorized_mask_matches_scalar():
    cfg = AntennaConfig(3, 5)
    mask, b_max = _feasible_grid(cfg, 6, 4)
    for W1 in range(1, 7):
        for W2 in range(1, 5):
            for b in range(1, b_max + 1):
                assert bool(mask[W1 - 1, W2 - 1, b - 1]) == check_constraints(b, W1, W2, cfg).feasible
    assert mask.dtype == np.bool_
