import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import boxlab as bl
from boxlab.boxes import box_from_json, box_to_json


def test_pr_box_rows():
    pr = bl.pr_box()
    assert bl.prob(pr, 0, 0, 0, 0) == 0.5
    assert bl.prob(pr, 0, 0, 1, 1) == 0.5
    assert bl.prob(pr, 1, 1, 0, 1) == 0.5
    assert bl.prob(pr, 1, 1, 1, 0) == 0.5
    for x in range(2):
        for y in range(2):
            assert np.allclose(bl.marginal_a(pr, x, y), [0.5, 0.5])
            assert np.allclose(bl.marginal_b(pr, x, y), [0.5, 0.5])


def test_local_box_point_masses():
    identity = bl.local_box([0, 1], [0, 1])
    assert bl.prob(identity, 1, 0, 1, 0) == 1.0
    const = bl.local_box([0, 0], [0, 0], a_size=2, b_size=2)
    for x in range(2):
        for y in range(2):
            assert bl.prob(const, x, y, 0, 0) == 1.0
    assert bl.is_nonsignaling(identity)
    assert bl.is_nonsignaling(const)


def test_mix_identity_and_midpoint():
    pr = bl.pr_box()
    assert bl.tv_closeness(bl.mix([pr], [1.0]), pr) == 0.0
    b1 = bl.local_box([0, 0], [0, 0], a_size=2, b_size=2)
    b2 = bl.local_box([1, 1], [1, 1], a_size=2, b_size=2)
    m = bl.mix([b1, b2], [0.5, 0.5])
    for x in range(2):
        for y in range(2):
            assert bl.prob(m, x, y, 0, 0) == 0.5
            assert bl.prob(m, x, y, 1, 1) == 0.5


def test_mix_errors():
    pr = bl.pr_box()
    with pytest.raises(ValueError):
        bl.mix([pr, bl.local_box([0], [0], a_size=2, b_size=2)], [0.5, 0.5])
    with pytest.raises(ValueError):
        bl.mix([pr, pr], [0.7, 0.7])


def test_tv_closeness_values():
    pr = bl.pr_box()
    const = bl.local_box([0, 0], [0, 0], a_size=2, b_size=2)
    assert bl.tv_closeness(pr, pr) == 0.0
    assert bl.tv_closeness(pr, const) == 1.0
    # the maximum is attained at input (1, 1): PR puts no mass on (0, 0)
    assert pr(1, 1).tv(const(1, 1)) == 1.0


def test_signaling_box_detected():
    table = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            table[x, y, y, 0] = 1.0    # a reveals y
    assert not bl.is_nonsignaling(bl.CorrelationBox(table))


def test_sample_matches_table():
    pr = bl.pr_box()
    rng = np.random.default_rng(42)
    n = 10 ** 5
    hits = sum(bl.sample(pr, 0, 1, rng) == (0, 0) for _ in range(n))
    assert abs(hits / n - 0.5) < 5e-3


def test_normalization_rejected():
    bad = np.full((1, 1, 2, 2), 0.3)
    with pytest.raises(ValueError):
        bl.CorrelationBox(bad)
    with pytest.raises(ValueError):
        bl.CorrelationBox(np.array([[[[1.2, -0.2], [0.0, 0.0]]]]))


def test_out_of_range_errors():
    pr = bl.pr_box()
    with pytest.raises(ValueError):
        bl.prob(pr, 2, 0, 0, 0)
    with pytest.raises(ValueError):
        bl.prob(pr, 0, 0, 0, 2)


def test_json_roundtrip_bit_exact():
    rng = np.random.default_rng(7)
    table = rng.random((3, 2, 2, 4))
    table /= table.sum(axis=(2, 3), keepdims=True)
    box = bl.CorrelationBox(table)
    again = box_from_json(box_to_json(box))
    assert np.array_equal(box.table, again.table)


@st.composite
def random_boxes(draw, shape=(2, 2, 2, 2)):
    n = int(np.prod(shape))
    raw = draw(st.lists(st.floats(min_value=1e-3, max_value=1.0),
                        min_size=n, max_size=n))
    table = np.array(raw).reshape(shape)
    table /= table.sum(axis=(2, 3), keepdims=True)
    return bl.CorrelationBox(table)


@settings(max_examples=50, deadline=None)
@given(random_boxes(), random_boxes(), random_boxes())
def test_tv_is_a_metric(b1, b2, b3):
    assert bl.tv_closeness(b1, b2) == bl.tv_closeness(b2, b1)
    assert bl.tv_closeness(b1, b3) <= (bl.tv_closeness(b1, b2)
                                       + bl.tv_closeness(b2, b3) + 1e-12)
    assert bl.tv_closeness(b1, b1) == 0.0


@settings(max_examples=30, deadline=None)
@given(random_boxes(), random_boxes(),
       st.floats(min_value=0.0, max_value=1.0))
def test_mix_properties(b1, b2, t):
    mixed = bl.mix([b1, b2], [1.0 - t, t])
    # TV contraction under mixing toward a component
    assert bl.tv_closeness(mixed, b1) <= t * bl.tv_closeness(b2, b1) + 1e-12
    # associativity in distribution
    inner = bl.mix([b1, b2], [0.5, 0.5])
    left = bl.mix([inner, b2], [0.5, 0.5])
    right = bl.mix([b1, b2], [0.25, 0.75])
    assert np.abs(left.table - right.table).max() <= 1e-12


def test_mix_preserves_nonsignaling():
    rng = np.random.default_rng(11)
    ns_boxes = [bl.pr_box(), bl.local_box([0, 1], [1, 0])]
    for _ in range(20):
        w = rng.random()
        assert bl.is_nonsignaling(bl.mix(ns_boxes, [w, 1.0 - w]))
