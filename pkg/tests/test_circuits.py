import numpy as np
import pytest

from oracles import dense_circuit_state, fid, full_operator, sgs_state
from seqpeps.checks import restrict_to_original
from seqpeps.circuits import (
    Circuit,
    SgsSpec,
    build_brickwall,
    build_fpeps_circuit,
    build_isotns_circuit,
    build_pppeps,
    build_rppeps,
    build_sgs,
    compose_gates,
    embed_in_plaquettes,
    lgate_support,
    mps_column_gates,
    random_sgs_spec,
    sgs_grouped_circuit,
    validate_circuit,
)
from seqpeps.lattice import Lattice, depth_formulas, layerize
from seqpeps.statevector import simulate
from seqpeps.tensor_core import Gate, random_unitary


def test_compose_gates_against_full_operators():
    sup = [(0, 0), (0, 1), (1, 0)]
    g1 = Gate(random_unitary(4, 1), ((0, 1), (1, 0)))
    g2 = Gate(random_unitary(4, 2), ((0, 0), (0, 1)))
    m = compose_gates([g1, g2], sup, 2)
    ref = full_operator(g2.matrix, [0, 1], 3, 2) @ full_operator(g1.matrix, [1, 2], 3, 2)
    assert np.allclose(m, ref, atol=1e-12)


def test_rppeps_valid_and_seeded():
    c = build_rppeps(Lattice((4, 5)), 2, (1, 2), "horizontal", gate_seed=3)
    assert validate_circuit(c) == []
    again = build_rppeps(Lattice((4, 5)), 2, (1, 2), "horizontal", gate_seed=3)
    assert all(np.array_equal(a.matrix, b.matrix) for a, b in zip(c.gates, again.gates))
    assert c.family == "rp-peps" and len(c.gates) == 12


def test_pppeps_rejects_repeated_position():
    with pytest.raises(ValueError, match="pairwise distinct"):
        build_pppeps(Lattice((3, 3)), 2, [(0, 0), (0, 0)])


def test_validate_circuit_flags_problems():
    lat = Lattice((3, 3))
    c = build_rppeps(lat, 2, (0, 0))
    c.gates[1] = Gate(np.eye(8), ((0, 0), (0, 1), (1, 1)))
    assert validate_circuit(c)
    c = build_rppeps(lat, 2, (0, 0))
    c.gates.reverse()
    assert any("radial" in p or "touch" in p for p in validate_circuit(c))


def test_lgate_support_shapes():
    assert lgate_support((0, 0), 1, 2) == ((0, 0), (0, 1), (1, 1))
    assert lgate_support((0, 0), 2, 2) == ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2))
    assert lgate_support((0, 0, 0), 1, 3) == ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1))


def test_isotns_corner_structure():
    c = build_isotns_circuit(Lattice((3, 3)), 2)
    assert len(c.gates) == 6
    assert [len(g.support) for g in c.gates].count(3) == 4  # top row gates are truncated
    assert c.params["s"] == 1 and c.params["oc"] == (0, 0)
    assert layerize(c).depth == 3 + 3 - 2


def test_isotns_depth_large():
    d2 = layerize(build_isotns_circuit(Lattice((50, 50)), 2)).depth
    assert d2 == 98 and abs(d2 - depth_formulas((50, 50), 2, "isotns")) <= 4
    d3 = layerize(build_isotns_circuit(Lattice((10, 10, 10)), 2)).depth
    assert d3 == 27 and abs(d3 - 30) <= 6


def test_isotns_larger_bond_dimension():
    c = build_isotns_circuit(Lattice((5, 5)), 4)
    assert c.params["s"] == 2
    assert max(len(g.support) for g in c.gates) == 5
    c3 = build_isotns_circuit(Lattice((5, 5)), 3)
    assert c3.params["s"] == 2
    with pytest.raises(ValueError):
        build_isotns_circuit(Lattice((5, 5)), 3, pad=False)
    with pytest.raises(ValueError):
        build_isotns_circuit(Lattice((5, 5)), 1)


def test_isotns_bulk_center():
    lat = Lattice((5, 5))
    c = build_isotns_circuit(lat, 2, oc=(2, 2), gate_seed=1)
    sizes = {g.pos: len(g.support) for g in c.gates}
    assert c.gates[0].pos == (2, 2) and sizes[(2, 2)] == 5
    assert sizes[(3, 2)] == 4 and sizes[(2, 3)] == 4 and sizes[(1, 2)] == 4 and sizes[(2, 1)] == 4
    assert sizes[(3, 3)] == 3 and sizes[(1, 1)] == 3
    corner = build_isotns_circuit(lat, 2)
    assert layerize(c).depth < layerize(corner).depth
    with pytest.raises(ValueError):
        build_isotns_circuit(lat, 2, oc=(2, 0))
    with pytest.raises(NotImplementedError):
        build_isotns_circuit(lat, 4, oc=(2, 2))


def test_sgs_circuit_matches_direct_evaluation():
    for rows, cols, L_p in [(3, 3, 2), (3, 4, 2), (3, 3, 3)]:
        spec = random_sgs_spec(rows, cols, 2, L_p, seed=rows + cols + L_p)
        ref = sgs_state(spec)
        assert fid(simulate(build_sgs(spec)).amplitudes, ref) >= 1 - 1e-10
        assert fid(simulate(sgs_grouped_circuit(spec)).amplitudes, ref) >= 1 - 1e-10


def test_sgs_product_spec():
    spec = random_sgs_spec(3, 3, 2, 2, product=True)
    s = simulate(build_sgs(spec))
    assert abs(s.amplitudes[0] - 1) <= 1e-12


def test_sgs_spec_validation():
    spec = random_sgs_spec(3, 3, 2, 2, seed=1)
    bad = [list(col) for col in spec.mps]
    bad[0][1] = bad[0][1] * 1.01
    with pytest.raises(ValueError, match="canonical"):
        SgsSpec(3, 3, 2, 2, bad, spec.V)
    with pytest.raises(ValueError):
        SgsSpec(3, 3, 2, 2, spec.mps, spec.V[:1])
    with pytest.raises(ValueError):
        random_sgs_spec(1, 3, 2, 2)


def test_mps_column_gates_prepare_the_column():
    spec = random_sgs_spec(4, 2, 2, 2, seed=5)
    gates = mps_column_gates(spec, 1)
    psi = dense_circuit_state([(r, 1) for r in range(4)], gates, 2)
    col = spec.mps[1]
    ref = col[0]
    for A in col[1:]:
        ref = np.tensordot(ref, A, axes=([ref.ndim - 1], [0]))
    assert np.allclose(psi, ref.reshape(-1), atol=1e-12)


def test_sgs_grouped_fits_plaquettes():
    spec = random_sgs_spec(3, 4, 2, 2, seed=2)
    g = sgs_grouped_circuit(spec)
    assert len(g.gates) == 6
    emb = embed_in_plaquettes(g, 2)
    assert emb.family == "rp-peps" and validate_circuit(emb) == []
    assert fid(simulate(emb).amplitudes, sgs_state(spec)) >= 1 - 1e-10


def test_fpeps_structure_and_depth():
    c = build_fpeps_circuit(Lattice((3, 3)), 2, gate_seed=1)
    row_end = [g for g in c.gates if g.pos[1] == 1]
    assert [g.support[-1] for g in row_end[:2]] == [(1, 0), (2, 0)]
    depths = [layerize(build_fpeps_circuit(Lattice((n, n)), 2)).depth for n in (4, 6, 8)]
    ratios = [dep / n**2 for dep, n in zip(depths, (4, 6, 8))]
    assert depths == sorted(depths)
    assert max(ratios) / min(ratios) < 1.5
    with pytest.raises(ValueError, match="too small"):
        build_fpeps_circuit(Lattice((3, 2)), 2)


def test_embed_isotns_small():
    c = build_isotns_circuit(Lattice((2, 2)), 2, gate_seed=4)
    emb = embed_in_plaquettes(c, 3)
    assert emb.lattice.dims == (4, 4) and emb.family == "rp-peps"
    assert validate_circuit(emb) == []
    small = restrict_to_original(simulate(emb), c.lattice, emb.params["offset"])
    assert fid(small.amplitudes, simulate(c).amplitudes) >= 1 - 1e-10


def test_embed_fpeps_3x3():
    c = build_fpeps_circuit(Lattice((3, 3)), 2, gate_seed=6)
    emb = embed_in_plaquettes(c, 3)
    assert emb.lattice.dims == (4, 4) and emb.family == "p-peps"
    assert validate_circuit(emb) == []
    small = restrict_to_original(simulate(emb), c.lattice, emb.params["offset"])
    assert fid(small.amplitudes, simulate(c).amplitudes) >= 1 - 1e-10


def test_embed_rejects_oversized_gate():
    lat = Lattice((3, 3))
    c = Circuit(lat, [Gate(np.eye(8), ((0, 0), (0, 1), (0, 2)))])
    with pytest.raises(ValueError, match="fits no free plaquette"):
        embed_in_plaquettes(c, 2)


def test_brickwall_circuit():
    c = build_brickwall(Lattice((12,)), 2, 2, gate_seed=1)
    assert len(c.gates) == 11 and layerize(c).depth == 2


@pytest.mark.parametrize("n", [9, 21, 41])
def test_isotns_bulk_depth_is_half_of_corner(n):
    lat = Lattice((n, n))
    bulk = layerize(build_isotns_circuit(lat, 2, oc=(n // 2, n // 2))).depth
    corner = layerize(build_isotns_circuit(lat, 2)).depth
    assert (bulk, corner) == (n - 1, 2 * n - 2)
