import numpy as np
import pytest
from scipy.optimize import linprog

import boxlab as bl
from boxlab.protocols import (BINARY, Alphabets, local_deterministic_boxes,
                              protocol_from_json, protocol_to_json)


def k0_protocol(s_map, t_map):
    return bl.DeterministicProtocol(BINARY, 0, (), (), tuple(s_map),
                                    tuple(t_map))


def test_k0_equals_local_box():
    protocol = k0_protocol((0, 1), (1, 0))
    induced = bl.induced_box(protocol, bl.pr_box())
    assert bl.tv_closeness(induced, bl.local_box([0, 1], [1, 0])) == 0.0


def test_identity_protocol_reproduces_pr():
    protocol = bl.identity_protocol()
    ok, tv = bl.check_reduction(protocol, bl.pr_box(), bl.pr_box(), 0.0)
    assert ok and tv == 0.0


def test_one_query_pr_protocol_wins_chsh():
    best = max(bl.win_prob(bl.induced_box(pi, bl.pr_box()), 0.5, 0.5)
               for pi in bl.enumerate_protocols(BINARY, 1))
    assert best == 1.0


def test_counting():
    assert bl.count_protocols(BINARY, 0) == 16
    assert bl.count_protocols(BINARY, 1) == 4096
    assert bl.counting_bound(BINARY, 1) == 65536
    assert sum(1 for _ in bl.enumerate_protocols(BINARY, 0)) == 16
    assert sum(1 for _ in bl.enumerate_protocols(BINARY, 1)) == 4096


def test_enumeration_cap():
    big = Alphabets(2, 2, 2, 2, 10, 10, 4, 4)
    with pytest.raises(ValueError):
        next(bl.enumerate_protocols(big, 2))


def test_enumeration_yields_distinct_protocols():
    seen = set(pi for pi in bl.enumerate_protocols(BINARY, 0))
    assert len(seen) == 16


def test_randomized_protocol_mixture_linearity():
    p1 = k0_protocol((0, 0), (0, 0))
    p2 = k0_protocol((1, 1), (1, 1))
    randomized = bl.RandomizedProtocol((p1, p2), (0.5, 0.5))
    target = bl.pr_box()
    mixed = bl.induced_box_randomized(randomized, target)
    direct = bl.mix([bl.induced_box(p1, target), bl.induced_box(p2, target)],
                    [0.5, 0.5])
    assert bl.tv_closeness(mixed, direct) == 0.0
    singleton = bl.RandomizedProtocol((p1,), (1.0,))
    assert bl.tv_closeness(bl.induced_box_randomized(singleton, target),
                           bl.induced_box(p1, target)) == 0.0


def test_induced_box_of_bell_target_nonsignaling():
    rng = np.random.default_rng(3)
    spec = bl.simple_bell_spec([bl.random_unitary(rng) for _ in range(2)],
                               [bl.random_unitary(rng) for _ in range(2)])
    target = bl.bell_box(spec, bl.SINGLET)
    for pi in list(bl.enumerate_protocols(BINARY, 1))[:200]:
        assert bl.is_nonsignaling(bl.induced_box(pi, target), 1e-10)


def test_k0_cannot_approximate_pr_below_quarter():
    # deterministic side: every k=0 protocol is at TV >= 1/2 from PR
    pr = bl.pr_box()
    for pi in bl.enumerate_protocols(BINARY, 0):
        _, tv = bl.check_reduction(pi, pr, pr, 0.0)
        assert tv >= 0.5
    # mixtures: LP over the 16 local deterministic vertices; the best
    # achievable max-input TV to PR is exactly 1/4
    vertices = [b.table.reshape(4, 4) for b in local_deterministic_boxes()]
    target = pr.table.reshape(4, 4)
    n = len(vertices)
    # variables: weights w_i, slacks e[input, outcome], objective t
    n_vars = n + 16 + 1
    c = np.zeros(n_vars)
    c[-1] = 1.0
    a_ub, b_ub = [], []
    for inp in range(4):
        for out in range(4):
            # e >= +- (sum_i w_i v_i - target)
            for sign in (1.0, -1.0):
                row = np.zeros(n_vars)
                for i in range(n):
                    row[i] = sign * vertices[i][inp, out]
                row[n + 4 * 0 + 0] = 0.0
                row[n + inp * 4 + out] = -1.0
                a_ub.append(row)
                b_ub.append(sign * target[inp, out])
        row = np.zeros(n_vars)
        row[n + inp * 4: n + inp * 4 + 4] = 0.5
        row[-1] = -1.0
        a_ub.append(row)
        b_ub.append(0.0)
    a_eq = np.zeros((1, n_vars))
    a_eq[0, :n] = 1.0
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=a_eq, b_eq=[1.0], bounds=[(0, None)] * n_vars)
    assert res.success
    assert res.fun == pytest.approx(0.25, abs=1e-9)


def test_affine_of_matches_win_prob():
    rng = np.random.default_rng(9)
    for _ in range(30):
        table = rng.random((2, 2, 2, 2))
        table /= table.sum(axis=(2, 3), keepdims=True)
        target = bl.CorrelationBox(table)
        pi = next(bl.enumerate_protocols(BINARY, 1))
        ell = bl.affine_of(pi, target)
        induced = bl.induced_box(pi, target)
        for p in (0.5, 0.7, 1.0):
            assert abs(float(ell(p))
                       - bl.win_prob(induced, p, 0.5)) <= 1e-12


def test_pass_through_on_pr_is_constant_one():
    ell = bl.affine_of(bl.identity_protocol(), bl.pr_box())
    assert ell.intercept == pytest.approx(1.0, abs=1e-12)
    assert ell.slope == pytest.approx(0.0, abs=1e-12)


def test_all_zero_k0_line():
    ell = bl.affine_of(k0_protocol((0, 0), (0, 0)), bl.pr_box())
    assert ell.intercept == pytest.approx(1.0, abs=1e-12)
    assert ell.slope == pytest.approx(-0.5, abs=1e-12)


def test_queries_useless_against_constant_box():
    const = bl.local_box([0, 0], [0, 0], a_size=2, b_size=2)
    fam0 = sorted(ell.key() for ell in bl.affine_family(const, 0))
    fam1 = sorted(ell.key() for ell in bl.affine_family(const, 1))
    assert fam0 == fam1


def test_family_monotone_in_k():
    pr = bl.pr_box()
    fam0 = set(ell.key() for ell in bl.affine_family(pr, 0))
    fam1 = set(ell.key() for ell in bl.affine_family(pr, 1))
    assert fam0 <= fam1
    both = set(ell.key() for ell in bl.affine_family(pr, 1, up_to_k=True))
    assert both == fam0 | fam1


def test_family_of_bell_target_below_omega():
    rng = np.random.default_rng(21)
    spec = bl.simple_bell_spec([bl.random_unitary(rng) for _ in range(2)],
                               [bl.random_unitary(rng) for _ in range(2)])
    target = bl.bell_box(spec, bl.SINGLET)
    family = bl.affine_family(target, 1)
    assert len(family) <= 4096
    for p in np.linspace(0.5, 1.0, 101):
        best = max(float(ell(p)) for ell in family)
        assert best <= bl.omega(float(p)) + 1e-9


def test_best_vs_average():
    rng = np.random.default_rng(31)
    protos = [p for i, p in zip(range(8), bl.enumerate_protocols(BINARY, 1))]
    weights = rng.random(len(protos))
    weights /= weights.sum()
    randomized = bl.RandomizedProtocol(tuple(protos), tuple(weights))
    target = bl.pr_box()
    mixture_win = bl.win_prob(bl.induced_box_randomized(randomized, target),
                              0.6, 0.5)
    best = max(bl.win_prob(bl.induced_box(pi, target), 0.6, 0.5)
               for pi in protos)
    assert best >= mixture_win - 1e-12


def test_protocol_json_roundtrip():
    pi = bl.identity_protocol()
    again = protocol_from_json(protocol_to_json(pi))
    assert again == pi
