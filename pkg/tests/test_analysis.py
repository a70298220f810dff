import pytest
import math
import numpy as np

import netelast.net as net
import netelast.solver as solver
import netelast.mechanics as mechanics
import netelast.moves as moves
import netelast.analysis as analysis
from . import nets

def _split_halves(g, period, v, fractions=(0.25, 0.25, 0.5)):
    """Split `v` at exactly its threshold; return the new graph, the period,
    the threshold and the halves `(v0, v1)` with `v1` of smaller degree."""
    r = solver.harmonic_realize(g, period)
    c = moves.splitting_candidate(g, r, v, moves.Firmness(1))
    if not c.generic:
        return None
    params = moves.MoveParams(0.1, c.lambda_max, *fractions)
    h, _ = moves.apply_splitting(g, r, c, params)
    new = g.vertex_count
    if net.degree(h, new) <= net.degree(h, v):
        return h, c.lambda_max, v, new
    return h, c.lambda_max, new, v

@pytest.fixture
def split_hexagonal():
    g, period = net.lattice_preset("hexagonal", l=1, w0=2, w1=1)
    A = mechanics.uniaxial_map(2.0, 2, mechanics.rotation_2d(math.pi / 6))
    period = net.PeriodMap(A @ period.basis)
    h, K, v0, v1 = _split_halves(g, period, 0)
    return g, h, period, K, v0, v1

def test_split_hexagonal_halves(split_hexagonal):
    g, h, period, K, v0, v1 = split_hexagonal
    assert(K == pytest.approx(6))
    assert((v0, v1) == (0, 2))
    assert(net.degree(g, 0) == pytest.approx(7))
    assert(analysis.weight_bound(h, v1) == pytest.approx(2))
    assert(analysis.auxiliary_weight(h, v0, v1) == pytest.approx(1))

def test_minimum_edge_length(split_hexagonal):
    g, h, period, K, v0, v1 = split_hexagonal
    full = solver.harmonic_realize(h, period)
    full_length = np.linalg.norm(full.positions[v1] - full.positions[v0])
    anchor = analysis.contracted_anchor(h, period, v0, v1)
    aux = analysis.auxiliary_realization(h, anchor, v1)
    aux_length = np.linalg.norm(aux.positions[v1] - aux.positions[v0])
    bound = moves.compatibility_lower_bound(net.degree(g, 0), K)
    assert(aux_length == pytest.approx(1))
    assert(bound == pytest.approx(math.sqrt(12) / 7))
    assert(full_length >= aux_length - 1e-10)
    assert(aux_length >= bound - 1e-10)

def test_minimum_edge_length_random():
    rng = np.random.default_rng(17)
    checked = 0
    for g, period in nets.random_nets(31, 400, dimensions=(2, 3)):
        v = int(rng.integers(g.vertex_count))
        found = _split_halves(g, period, v)
        if found is None:
            continue
        h, K, v0, v1 = found
        if not any(net.is_true_loop(e) for e in g.edges if e.tail == v):
            continue
        full = solver.harmonic_realize(h, period)
        full_length = np.linalg.norm(full.positions[v1] - full.positions[v0])
        aux = analysis.auxiliary_realization(h, analysis.contracted_anchor(h, period, v0, v1), v1)
        aux_length = np.linalg.norm(aux.positions[v1] - aux.positions[v0])
        bound = moves.compatibility_lower_bound(net.degree(g, v), K)
        assert(full_length >= aux_length * (1 - 1e-9) - 1e-10)
        assert(aux_length >= bound * (1 - 1e-9) - 1e-10)
        checked += 1
    assert(checked >= 100)

def test_extract_zW(split_hexagonal):
    _, h, period, _, v0, v1 = split_hexagonal
    fit = analysis.extract_zW(h, period, (v0, v1))
    assert(fit.residual < 1e-8)
    assert(0 < fit.W <= analysis.auxiliary_weight(h, v0, v1) + 1e-9)
    full = solver.harmonic_realize(h, period)
    w = [e.weight for e in h.edges if (e.tail, e.head, e.offset) == fit.edge][0]
    assert(np.allclose(full.positions[v1] - full.positions[v0], fit.z / (w + fit.W)))
    # z is what the auxiliary realization sees as well
    aux = analysis.auxiliary_realization(h, analysis.contracted_anchor(h, period, v0, v1), v1)
    W_aux = analysis.auxiliary_weight(h, v0, v1)
    assert(np.allclose(aux.positions[v1] - aux.positions[v0], fit.z / (w + W_aux)))

def test_loss_identity_random():
    rng = np.random.default_rng(23)
    checked = 0
    for g, period in nets.random_nets(41, 100, dimensions=(1, 2, 3), sizes=(2, 4)):
        g = net.with_edge_weight(g, 0, 1, int(rng.integers(1, 4)))
        fit = analysis.extract_zW(g, period, (0, 1, (0,) * g.dimension))
        if fit.W is None:
            continue
        assert(fit.residual < 1e-7)
        assert(fit.W > 0)
        assert(fit.W <= analysis.weight_bound(g, 1) - fit_weight(g) + 1e-9)
        for w in (0.25, 1.0, 3.7):
            report = analysis.verify_loss_identity(g, period, fit, w, tolerance=1e-7)
            assert(report.ok)
        checked += 1
    assert(checked > 50)

def fit_weight(g):
    return [e.weight for e in g.edges if (e.tail, e.head) == (0, 1) and not any(e.offset)][0]

def test_extract_zW_rejects():
    g, period = net.lattice_preset("hexagonal")
    with pytest.raises(ValueError):
        analysis.extract_zW(g, period, (0, 0))
    with pytest.raises(ValueError):
        analysis.extract_zW(g, period, (0, 1, (1, 0)))
    with pytest.raises(ValueError):
        analysis.extract_zW(g, period, (0, 1), probes=(1, 1, 2))

def test_contracted_anchor_places_v1_on_v0(split_hexagonal):
    _, h, period, _, v0, v1 = split_hexagonal
    anchor = analysis.contracted_anchor(h, period, v0, v1)
    assert(np.allclose(anchor.positions[v0], anchor.positions[v1]))
    contracted = analysis.contract_edge(h, v0, v1)
    assert(contracted.vertex_count == h.vertex_count - 1)

WEIGHTS = {(1, 0): 3, (0, 1): 1, (1, 1): 0.5, (0, 0): 2}

def test_single_vertex_split_matches_moves():
    g, period = net.lattice_preset("single_vertex", weights=WEIGHTS, basis=[[1.0, 0.2], [0.1, 1.1]])
    r = solver.harmonic_realize(g, period)
    c = moves.splitting_candidate(g, r, 0, moves.Firmness(1))
    assert(c.generic)
    for p in (0.0, 0.5, 1.0):
        params = moves.MoveParams(0.1, 1, (1 - p) / 2, (1 - p) / 2, p)
        h, _ = moves.apply_splitting(g, r, c, params)
        relaxed = solver.harmonic_realize(h, period)
        split = analysis.single_vertex_split(WEIGHTS, period, p, u=c.u)
        assert(np.allclose(relaxed.positions[1] - relaxed.positions[0], split.x))
        before, after = solver.energy(g, r), solver.energy(h, relaxed)
        assert(split.energy == pytest.approx(before))
        assert(split.delta_energy == pytest.approx(before - after))
        assert(split.ratio == pytest.approx((before - after) / before))

def test_single_vertex_split_index_set():
    by_normal = analysis.single_vertex_split(WEIGHTS, np.eye(2), 0.5, u=[1, 1])
    by_set = analysis.single_vertex_split(WEIGHTS, np.eye(2), 0.5, index_set=[(1, 0), (0, 1), (1, 1)])
    assert(np.allclose(by_normal.x, by_set.x))
    # z = 3 (1,0) + (0,1) + 0.5 (1,1); denominator 0.5 * 2 + 4.5
    assert(np.allclose(by_set.x, np.array([3.5, 1.5]) / 5.5))
    assert(by_set.energy == pytest.approx(3 + 1 + 1))
    with pytest.raises(ValueError):
        analysis.single_vertex_split(WEIGHTS, np.eye(2), 0.5, index_set=[(1, 0), (-1, 0), (0, 1), (1, 1)])
    with pytest.raises(ValueError):
        analysis.single_vertex_split(WEIGHTS, np.eye(2), 0.5, u=[1, 1], index_set=[(1, 0)])
    with pytest.raises(ValueError):
        analysis.single_vertex_split(WEIGHTS, np.eye(2), 1.5, u=[1, 1])

def test_half_space_mask_ties():
    offsets = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    mask = analysis.half_space_mask(offsets, offsets.astype(float), [1, 0])
    assert(mask.tolist() == [True, False, True, False])

def test_weight_functions():
    F = analysis.WeightFunction.table({(1, 0): 2, (0, 0): 1})
    assert(F.params["weights"][(-1, 0)] == 2)
    assert(F.at_zero(2) == 1)
    G = analysis.WeightFunction.gaussian(0.5)
    assert(G.at_zero(2) == pytest.approx(1 / (2 * math.pi * 0.25)))
    blend = analysis.WeightFunction.linear_blend(F, G, 0.25)
    assert(blend.at_zero(2) == pytest.approx(0.75 + 0.25 * G.at_zero(2)))
    with pytest.raises(ValueError):
        analysis.WeightFunction.table({(1, 0): 2, (-1, 0): 3})
    with pytest.raises(ValueError):
        analysis.WeightFunction.gaussian(0)
    with pytest.raises(ValueError):
        analysis.WeightFunction.linear_blend(F, G, 1.5)
    with pytest.raises(ValueError):
        analysis.half_space_sums(G, np.eye(2), index_set=[(1, 0)])

def test_loss_ratio_zero_denominator():
    sums = analysis.HalfSpaceSums(np.zeros(2), 0.0, 0.0, 0.0)
    assert(analysis.loss_ratio(sums, 0.5) == 0)

def test_gaussian_wide_limit():
    R = analysis.ratio_at(analysis.WeightFunction.gaussian(1.0), [1, math.sqrt(2)], 0.5, 1 / 50, radius=400.0)
    assert(abs(R - 1 / math.pi) <= 1e-2)
    assert(analysis.gaussian_limit_ratio(2) == pytest.approx(1 / math.pi))

def test_gaussian_narrow_limit():
    R = analysis.ratio_at(analysis.WeightFunction.gaussian(0.05), [1, math.sqrt(2)], 0.5, 1.0, radius=3.0)
    assert(0 <= R <= 1e-3)

def test_gaussian_blend_limit():
    assert(analysis.gaussian_blend_limit(1.0, 2, 0.3) == pytest.approx(1 / math.pi))
    F = analysis.WeightFunction.linear_blend(analysis.WeightFunction.gaussian(1.0),
                                             analysis.WeightFunction.gaussian(2.0), 0.5)
    R = analysis.ratio_at(F, [1, math.sqrt(2)], 0.5, 1 / 20)
    assert(abs(R - analysis.gaussian_blend_limit(2.0, 2, 0.5)) <= 1e-2)

def test_limit_ratio_grid():
    first, _ = analysis.cube_lattice_tables(2, 1.0, 3)
    grid = analysis.limit_ratio(first, [1, 1], 0.5, [0.5, 1.0, 2.0], workers=2)
    assert([s for s, _ in grid] == [0.5, 1.0, 2.0])
    # Table weights ignore the scale, so the ratio is 1/(p a + N)
    for _, R in grid:
        assert(R == pytest.approx(1 / 2.5))
    with pytest.raises(ValueError):
        analysis.limit_ratio(first, [1, 1], 2, [1.0])

@pytest.mark.parametrize("m", [2, 5, 10])
def test_cube_blend(m):
    N, a, p = 3, 2.0, 0.5
    first, second = analysis.cube_lattice_tables(N, a, m)
    grid = [k / 200 for k in range(201)]
    result = analysis.blend_analysis(first, second, p, grid)
    R0 = 1 / (p * a + N)
    assert(result.r0 == pytest.approx(R0))
    assert(result.r1 == pytest.approx(R0))
    assert(result.s_hat == pytest.approx(1 / (1 + m)))
    assert(result.r_hat == pytest.approx(4 * m / (1 + m) ** 2 * R0))
    assert(result.verified)
    assert(min(r for _, r in result.curve) >= result.r_hat * (1 - 1e-12))

def test_flat_blend_is_verified():
    first, _ = analysis.cube_lattice_tables(2, 1.0, 1)
    result = analysis.blend_analysis(first, first, 0.5, [0, 0.5, 1])
    assert(result.verified)
    assert(result.s_hat == pytest.approx(0.5))

def test_unequal_blend_is_not_verified():
    first, _ = analysis.cube_lattice_tables(2, 0.0, 1)
    _, second = analysis.cube_lattice_tables(2, 4.0, 2)
    result = analysis.blend_analysis(first, second, 0.5, [0, 0.5, 1])
    assert(result.verified is None)
    assert(result.r0 != pytest.approx(result.r1))
