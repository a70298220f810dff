import pytest
import math
import numpy as np

import netelast.net as net
import netelast.solver as solver
from . import nets

@pytest.fixture
def hexagonal():
    return net.lattice_preset("hexagonal", l=1, w0=1, w1=1)

def test_canonical_orbit():
    assert(net.canonical_orbit(1, 0, (1, -1)) == (0, 1, (-1, 1)))
    assert(net.canonical_orbit(0, 1, (1, -1)) == (0, 1, (1, -1)))
    assert(net.canonical_orbit(2, 2, (0, -1)) == (2, 2, (0, -1)))
    assert(net.canonical_orbit(2, 2, (0, 1)) == (2, 2, (0, -1)))

def test_build_graph_merges_parallel_edges():
    g = net.build_graph(2, 2, [(0, 1, (0, 0), 1), (1, 0, (0, 0), 2.5), (0, 1, (1, 0), 1)])
    assert(len(g.edges) == 2)
    assert(g.edges[0] == net.EdgeOrbit(0, 1, (0, 0), 3.5))
    assert(g.total_weight() == pytest.approx(4.5))

def test_build_graph_rejects():
    with pytest.raises(ValueError):
        net.build_graph(0, 1, [])
    with pytest.raises(ValueError):
        net.build_graph(2, 2, [(0, 2, (0, 0), 1)])
    with pytest.raises(ValueError):
        net.build_graph(2, 2, [(0, 1, (0, 0, 0), 1)])
    with pytest.raises(ValueError):
        net.build_graph(2, 2, [(0, 1, (0.5, 0), 1)])
    with pytest.raises(ValueError):
        net.build_graph(2, 2, [(0, 1, (0, 0), -1)])
    with pytest.raises(ValueError):
        net.build_graph(2, 2, [(0, 1, (0, 0), float("inf"))])

def test_graph_equality():
    a = net.build_graph(1, 2, [(0, 1, (1,), 2)])
    b = net.build_graph(1, 2, [(1, 0, (-1,), 2)])
    assert(a == b)
    assert(hash(a) == hash(b))
    assert(a != net.build_graph(1, 2, [(0, 1, (0,), 2)]))

def test_darts_and_degree(hexagonal):
    g, _ = hexagonal
    darts = net.darts_at(g, 0)
    assert(len(darts) == 5)
    # The loop gives two darts, and counts twice in the degree
    assert(net.degree(g, 0) == pytest.approx(5))
    heads = sorted((d.head, d.offset) for d in net.darts_at(g, 1))
    assert(heads == [(0, (0, 0)), (0, (0, 1)), (0, (1, 0)), (1, (0, 0)), (1, (0, 0))])
    with pytest.raises(ValueError):
        net.darts_at(g, 2)

def test_self_edge_darts():
    g = net.build_graph(1, 1, [(0, 0, (1,), 2)])
    darts = net.darts_at(g, 0)
    assert(sorted(d.offset for d in darts) == [(-1,), (1,)])
    assert(net.degree(g, 0) == 4)
    assert(not net.is_true_loop(g.edges[0]))

def test_positively_connected():
    g = net.build_graph(1, 3, [(0, 1, (0,), 1), (1, 2, (1,), 0)])
    assert(not net.is_positively_connected(g))
    g = net.with_edge_weight(g, 1, 2, 1, (1,))
    assert(net.is_positively_connected(g))
    assert(not net.is_positively_connected(net.build_graph(1, 0, [])))

def test_translate_offsets():
    g = net.build_graph(2, 2, [(0, 1, (0, 0), 1), (1, 1, (1, 0), 2), (0, 0, (0, 1), 1)])
    h = net.translate_offsets(g, 1, (1, 2))
    assert(net.EdgeOrbit(0, 1, (-1, -2), 1.0) in h.edges)
    assert(net.EdgeOrbit(1, 1, (-1, 0), 2.0) in h.edges)
    assert(net.EdgeOrbit(0, 0, (0, -1), 1.0) in h.edges)

def test_with_edge_weight():
    g = net.build_graph(1, 2, [(0, 1, (0,), 1)])
    h = net.with_edge_weight(g, 1, 0, 5)
    assert(h.edges == (net.EdgeOrbit(0, 1, (0,), 5.0),))
    h = net.with_edge_weight(g, 1, 1, 2)
    assert(len(h.edges) == 2)

def test_period_map():
    period = net.PeriodMap([[2, 1], [0, 3]])
    assert(period.dimension == 2)
    assert(period.covolume == pytest.approx(6))
    assert(np.allclose(period.vector((1, -1)), [1, -3]))
    with pytest.raises(ValueError):
        net.PeriodMap([[1, 2], [2, 4]])
    with pytest.raises(ValueError):
        net.PeriodMap([[1, 2, 3]])
    assert(net.PeriodMap([2.0]).covolume == 2)

def test_realization_vectors(hexagonal):
    g, period = hexagonal
    r = net.Realization([[0, 0], [math.sqrt(3) / 2, 0.5]], period)
    for e in g.edges:
        if not net.is_true_loop(e):
            assert(np.linalg.norm(r.edge_vector(e)) == pytest.approx(1))
    dart = net.darts_at(g, 1)[0]
    assert(np.allclose(r.dart_vector(1, dart), -r.edge_vector(dart.edge)))
    with pytest.raises(ValueError):
        net.Realization([[0, 0, 0]], period)

def test_hexagonal_preset(hexagonal):
    g, period = hexagonal
    assert(g.vertex_count == 2)
    assert(period.covolume == pytest.approx(3 * math.sqrt(3) / 2))
    loops = [e for e in g.edges if net.is_true_loop(e)]
    assert(len(loops) == 2)

def test_cubic_preset():
    g, period = net.lattice_preset("cubic", N=3, a=2, m=5)
    assert(g.vertex_count == 1)
    assert(net.EdgeOrbit(0, 0, (0, 0, -5), 1.0) in g.edges)
    assert(net.EdgeOrbit(0, 0, (0, 0, 0), 2.0) in g.edges)
    assert(net.degree(g, 0) == pytest.approx(10))
    with pytest.raises(ValueError):
        net.lattice_preset("cubic", N=3, m=0)

def test_square_and_single_vertex_presets():
    g, _ = net.lattice_preset("square", l=2, w1=1)
    assert(len(g.edges) == 2)
    g, period = net.lattice_preset("single_vertex", weights={(1, 0): 3, (-1, 0): 3, (0, 0): 2, (1, 1): 1})
    assert(g.dimension == 2)
    assert(net.EdgeOrbit(0, 0, (0, 0), 2.0) in g.edges)
    assert(net.EdgeOrbit(0, 0, (-1, 0), 3.0) in g.edges)
    with pytest.raises(ValueError):
        net.lattice_preset("single_vertex", weights={(1, 0): 3, (-1, 0): 2})

def test_preset_errors():
    with pytest.raises(KeyError):
        net.lattice_preset("diamond")
    with pytest.raises(ValueError):
        net.lattice_preset("hexagonal", l=-1)
    with pytest.raises(ValueError):
        net.lattice_preset("hexagonal", w0=-1)

def test_supercell(hexagonal):
    g, period = hexagonal
    big, big_period = net.supercell(g, period, (2, 3))
    assert(big.vertex_count == 12)
    assert(big_period.covolume == pytest.approx(6 * period.covolume))
    assert(big.total_weight() == pytest.approx(6 * g.total_weight()))
    for v in range(big.vertex_count):
        assert(net.degree(big, v) == pytest.approx(5))
    with pytest.raises(ValueError):
        net.supercell(g, period, (0, 1))

def test_supercell_of_random_nets():
    for g, period in nets.random_nets(7, 20):
        factors = [2] + [1] * (g.dimension - 1)
        big, _ = net.supercell(g, period, factors)
        assert(big.total_weight() == pytest.approx(2 * g.total_weight()))

def test_supercell_harmonic_is_lift(hexagonal):
    g, period = hexagonal
    big, big_period = net.supercell(g, period, (2, 3))
    r = solver.harmonic_realize(g, period)
    lifted = net.supercell_positions(r, (2, 3))
    assert(lifted.shape == (12, 2))
    assert(np.allclose(solver.harmonic_realize(big, big_period).positions, lifted))
    big_r = net.Realization(lifted, big_period)
    assert(np.allclose(solver.global_tension(big, big_r), 6 * solver.global_tension(g, r)))

def test_supercell_harmonic_random():
    for g, period in nets.random_nets(8, 30):
        factors = [2] + [1] * (g.dimension - 2) + [3] if g.dimension > 1 else [3]
        big, big_period = net.supercell(g, period, factors)
        lifted = net.supercell_positions(solver.harmonic_realize(g, period), factors)
        scale = max(1.0, np.max(np.abs(lifted)))
        assert(np.allclose(solver.harmonic_realize(big, big_period).positions, lifted, atol=1e-9 * scale))

def test_build_graph_is_idempotent(hexagonal):
    assert(net.build_graph(2, 2, hexagonal[0].edges) == hexagonal[0])
    for g, _ in nets.random_nets(9, 100):
        again = net.build_graph(g.dimension, g.vertex_count, g.edges)
        assert(again == g)
        assert(again.edges == g.edges)
