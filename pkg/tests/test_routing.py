"""HV paths, designated relays, and path-load counting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiersim.deployment import SimConfig, build_deployment
from tiersim.routing import (
    hv_path,
    hv_path_cells,
    path_load_census,
    paths_through_cell,
    select_relays,
)


def flat(x, y, k):
    return x * k + y


# ======== path shape ========


def test_same_cell_path():
    k = 8
    path = hv_path(flat(2, 3, k), flat(2, 3, k), _grid(k))
    assert path.cells == (flat(2, 3, k),)
    assert len(path) == 1


def test_horizontal_path():
    k = 8
    path = hv_path(flat(0, 0, k), flat(3, 0, k), _grid(k))
    assert path.cells == tuple(flat(x, 0, k) for x in range(4))


def test_horizontal_then_vertical_path():
    k = 8
    path = hv_path(flat(0, 0, k), flat(2, 2, k), _grid(k))
    expected = [flat(0, 0, k), flat(1, 0, k), flat(2, 0, k), flat(2, 1, k), flat(2, 2, k)]
    assert path.cells == tuple(expected)


def test_path_rejects_out_of_grid():
    with pytest.raises(ValueError):
        hv_path(0, 64, _grid(8))
    with pytest.raises(ValueError):
        hv_path(-1, 0, _grid(8))


def _grid(k):
    from tiersim.deployment import CellGrid

    return CellGrid(side_count=k, tier="secondary")


@given(
    st.integers(min_value=2, max_value=24),
    st.integers(min_value=0, max_value=23 * 23),
    st.integers(min_value=0, max_value=23 * 23),
)
@settings(max_examples=120, deadline=None)
def test_path_properties(k, a, b):
    src, dst = a % (k * k), b % (k * k)
    cells = hv_path_cells(src, dst, k)
    sx, sy = divmod(src, k)
    dx, dy = divmod(dst, k)
    # endpoints, length, adjacency, single turn
    assert cells[0] == src and cells[-1] == dst
    assert len(cells) == abs(dx - sx) + abs(dy - sy) + 1
    xs = [c // k for c in cells]
    ys = [c % k for c in cells]
    for i in range(len(cells) - 1):
        assert abs(xs[i + 1] - xs[i]) + abs(ys[i + 1] - ys[i]) == 1
    # horizontal run first: y stays sy until x reaches dx
    for x, y in zip(xs, ys):
        assert y == sy or x == dx


# ======== designated relays ========


def test_single_node_cell_is_forced():
    dep = build_deployment(SimConfig(n=100, seed=0))
    relays = select_relays(dep, 1)
    occ_p = dep.primary_index.counts
    occ_s = dep.secondary_index_primary_grid.counts
    lone = np.where(occ_p + occ_s == 1)[0]
    for cell in lone:
        if occ_p[cell] == 1:
            assert relays.primary_relay[cell] == dep.primary_index.members(cell)[0]
        else:
            assert (
                relays.primary_relay[cell]
                == dep.secondary_index_primary_grid.members(cell)[0]
            )


def test_relay_lives_in_its_cell():
    dep = build_deployment(SimConfig(n=100, seed=1))
    relays = select_relays(dep, 2)
    for cell in range(dep.primary_grid.cell_count):
        r = relays.primary_relay[cell]
        if r < 0:
            continue
        if relays.primary_relay_is_secondary[cell]:
            assert dep.secondary_cells_primary_grid[r] == cell
        else:
            assert dep.primary_cells[r] == cell
    for cell in range(dep.secondary_grid.cell_count):
        r = relays.secondary_relay[cell]
        if r >= 0:
            assert dep.secondary_cells[r] == cell


def test_relay_deterministic():
    dep = build_deployment(SimConfig(n=100, seed=3))
    a = select_relays(dep, 7)
    b = select_relays(dep, 7)
    assert np.array_equal(a.primary_relay, b.primary_relay)
    assert np.array_equal(a.secondary_relay, b.secondary_relay)


def test_secondary_capture_dominates():
    # with m = n^2 the dense tier wins the relay draw almost every time;
    # pooled over 20 seeds the fraction clears 1 - 2n/m = 0.98 at n=100
    won, cells = 0, 0
    for seed in range(20):
        dep = build_deployment(SimConfig(n=100, seed=seed))
        relays = select_relays(dep, np.random.default_rng(seed).spawn(4)[2])
        has = relays.primary_relay >= 0
        won += int(relays.primary_relay_is_secondary[has].sum())
        cells += int(has.sum())
    assert won / cells > 0.98


def test_empty_cells_get_no_relay():
    dep = build_deployment(SimConfig(n=100, seed=4))
    relays = select_relays(dep, 5)
    empty = dep.secondary_index.counts == 0
    assert (relays.secondary_relay[empty] == -1).all()
    assert (relays.secondary_relay[~empty] >= 0).all()


# ======== path load ========


def test_single_pair_census():
    k = 8
    pairs = np.array([[flat(1, 1, k), flat(4, 5, k)]])
    counts = paths_through_cell(pairs, _grid(k))
    path = set(hv_path_cells(flat(1, 1, k), flat(4, 5, k), k))
    for cell in range(k * k):
        assert counts[cell] == (1 if cell in path else 0)


def test_census_double_counting_identity():
    rng = np.random.default_rng(0)
    k = 16
    pairs = rng.integers(0, k * k, size=(500, 2))
    counts = path_load_census(pairs, k)
    total = sum(len(hv_path_cells(int(s), int(d), k)) for s, d in pairs)
    assert counts.sum() == total


def test_census_matches_brute_force():
    rng = np.random.default_rng(1)
    k = 9
    pairs = rng.integers(0, k * k, size=(200, 2))
    counts = path_load_census(pairs, k)
    brute = np.zeros(k * k, dtype=np.int64)
    for s, d in pairs:
        for cell in hv_path_cells(int(s), int(d), k):
            brute[cell] += 1
    assert np.array_equal(counts, brute)


def test_census_empty():
    assert path_load_census(np.empty((0, 2), dtype=np.int64), 8).sum() == 0


def test_central_load_within_spread_of_mean():
    # uniform random pairs load the central cells within 3x of the grid mean
    rng = np.random.default_rng(2)
    k = 16
    pairs = rng.integers(0, k * k, size=(4000, 2))
    counts = path_load_census(pairs, k).reshape(k, k)
    mean = counts.mean()
    central = counts[4:12, 4:12]
    assert (central < 3.0 * mean).all()
    assert (central > mean / 3.0).all()
