import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apf_mapf.apf import (
    ASTAR_PRESET,
    PIBT_PRESET,
    SIPPS_PRESET,
    APFField,
    APFParams,
    FieldPool,
    build_path_apf,
    build_pibt_apf,
    max_over_interval,
    point_repulsion,
    sum_fields_at,
)
from apf_mapf.grid import GridMap


def test_kernel_values_and_cutoff():
    p = APFParams(w=1.0, gamma=2.0, d_max=4)
    assert [point_repulsion(d, p) for d in range(6)] == [1.0, 0.5, 0.25, 0.125, 0.0, 0.0]


def test_presets():
    assert (ASTAR_PRESET.w, ASTAR_PRESET.gamma, ASTAR_PRESET.d_max) == (1.0, 2.0, 4)
    assert (SIPPS_PRESET.w, SIPPS_PRESET.gamma, SIPPS_PRESET.d_max) == (0.1, 3.0, 3)
    assert (PIBT_PRESET.w, PIBT_PRESET.gamma, PIBT_PRESET.d_max, PIBT_PRESET.t_max) == (0.1, 3.0, 2, 2)


@pytest.mark.parametrize("kw", [{"w": -1}, {"gamma": 0.5}, {"d_max": -1}, {"t_max": -2}])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        APFParams(**kw)


def test_inactive_params_build_empty_fields():
    g = GridMap(5, 5)
    for p in (APFParams(w=0), APFParams(d_max=0)):
        assert p.inactive
        assert not build_path_apf(g, [0, 1, 2], p)
        assert not build_pibt_apf(g, [0, 1], p)


def test_path_field_values():
    g = GridMap(6, 6)
    path = [g.index(2, 2), g.index(2, 3)]
    f = build_path_apf(g, path, ASTAR_PRESET, 0, 3)
    assert f.value(g.index(2, 2), 0) == 1.0
    assert f.value(g.index(2, 2), 1) == 0.5
    # past the path end the agent stays on its last cell
    assert f.value(g.index(2, 3), 3) == 1.0
    assert f.value(g.index(2, 3), 4) == 0.0
    open_ended = build_path_apf(g, path, ASTAR_PRESET)
    assert open_ended.value(g.index(2, 3), 50) == 1.0
    assert open_ended.value(g.index(0, 3), 50) == 0.25


def test_field_respects_manhattan_radius():
    g = GridMap(9, 9)
    f = build_path_apf(g, [g.index(4, 4)], APFParams(w=1, gamma=2, d_max=2), 0, 0)
    assert {g.coord(v) for (v, _t) in f.entries} == {(4, 4), (3, 4), (5, 4), (4, 3), (4, 5)}


def test_pibt_field_sums_lookahead_and_pads():
    g = GridMap(5, 5)
    p = PIBT_PRESET
    f = build_pibt_apf(g, [g.index(2, 2)], p)
    # a one-cell look-ahead is padded: t_max + 1 = 3 identical positions
    assert f.entries[g.index(2, 2)] == pytest.approx(3 * 0.1)
    assert f.entries[g.index(2, 3)] == pytest.approx(3 * 0.1 / 3)
    f2 = build_pibt_apf(g, [g.index(2, 2), g.index(2, 3), g.index(2, 4)], p)
    assert f2.entries[g.index(2, 3)] == pytest.approx(0.1 / 3 + 0.1 + 0.1 / 3)


def _random_field(g, data):
    path = data.draw(st.lists(st.integers(0, g.size - 1), min_size=1, max_size=5))
    open_ended = data.draw(st.booleans())
    params = APFParams(w=data.draw(st.sampled_from([0.1, 1.0])), gamma=2.0, d_max=data.draw(st.integers(0, 3)))
    return build_path_apf(g, path, params, 0, None if open_ended else 6)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_pool_matches_direct_sum(data):
    g = GridMap(4, 4)
    fields = [_random_field(g, data) for _ in range(data.draw(st.integers(1, 4)))]
    pool = FieldPool(fields)
    for v in range(g.size):
        for t in range(9):
            assert pool.at(v, t) == pytest.approx(sum_fields_at(fields, v, t))
        lo = data.draw(st.integers(0, 5))
        hi = data.draw(st.sampled_from([lo + 1, lo + 3, math.inf]))
        assert pool.max_over(v, lo, hi) == pytest.approx(max_over_interval(fields, v, lo, hi))


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_pool_removal_leaves_no_residue(data):
    g = GridMap(4, 4)
    keep = [_random_field(g, data) for _ in range(2)]
    extra = [_random_field(g, data) for _ in range(3)]
    pool = FieldPool(keep)
    for f in extra:
        pool.add(f)
    for f in extra:
        pool.remove(f)
    for v in range(g.size):
        for t in range(9):
            assert pool.at(v, t) == pytest.approx(sum_fields_at(keep, v, t), rel=1e-12, abs=1e-12)
    for f in keep:
        pool.remove(f)
    assert not pool


def test_max_over_interval_sees_tail_start():
    f = APFField(entries={(0, 1): 0.5}, tail={0: 2.0}, tail_from=5)
    assert max_over_interval([f], 0, 0, 4) == 0.5
    assert max_over_interval([f], 0, 0, math.inf) == 2.0
    with pytest.raises(ValueError):
        max_over_interval([f], 0, 3, 3)
