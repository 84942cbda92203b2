import json

import numpy as np
import pytest

from oracles import fid, sgs_state
from seqpeps.circuits import (
    Circuit,
    build_fpeps_circuit,
    build_isotns_circuit,
    build_rppeps,
    random_sgs_spec,
)
from seqpeps.convert import (
    circuit_to_network,
    contract_network,
    lgate_from_tensor,
    pepo_bond_bound,
    save_network,
    sgs_to_network,
    tensor_from_lgate,
    unitary_to_pepo,
    verify_network_isometries,
)
from seqpeps.lattice import Lattice
from seqpeps.statevector import MemoryCapError, simulate
from seqpeps.tensor_core import Gate, is_isometry, qr_split, random_unitary

L3 = ((0, 0), (0, 1), (1, 1))


def test_tensor_from_identity_lgate():
    b = tensor_from_lgate(Gate(np.eye(8), L3))
    assert b.shape == (2, 2, 2, 2, 2)
    # identity maps l -> k, b -> r and the fixed |0> -> u
    for k in range(2):
        for l in range(2):
            for u in range(2):
                for r in range(2):
                    for bb in range(2):
                        want = float(k == l and r == bb and u == 0)
                        assert b[k, l, u, r, bb] == want


def test_tensor_from_random_lgate_is_isometry():
    for seed in range(10):
        b = tensor_from_lgate(Gate(random_unitary(8, seed), L3))
        ok, res = is_isometry(b, [1, 4], 1e-12)
        assert ok and res <= 1e-12


def test_lgate_roundtrip_on_zero_sector():
    g = Gate(random_unitary(8, 3), L3)
    back = lgate_from_tensor(tensor_from_lgate(g))
    assert np.max(np.abs(back.matrix.conj().T @ back.matrix - np.eye(8))) <= 1e-12
    zero_cols = [x * 2 for x in range(4)]
    assert np.array_equal(back.matrix[:, zero_cols], g.matrix[:, zero_cols])


def test_lgate_from_random_isometric_tensor():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((2, 2, 2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2, 2, 2))
    # isometry from (l, b) into (k, u, r)
    q, _ = qr_split(np.transpose(t, (0, 2, 3, 1, 4)).reshape(2, 2, 2, 4), [0, 1, 2])
    b = q.reshape(2, 2, 2, 2, 2).transpose(0, 3, 1, 2, 4)
    g = lgate_from_tensor(b, anchor=(2, 3))
    assert g.support == ((2, 3), (2, 4), (3, 4))
    assert np.max(np.abs(g.matrix.conj().T @ g.matrix - np.eye(8))) <= 1e-12
    assert np.array_equal(tensor_from_lgate(g), b)


def test_lgate_errors():
    b = tensor_from_lgate(Gate(random_unitary(8, 1), L3))
    bad = b.copy()
    bad[0, 0, 0, 0, 0] += 1e-3
    with pytest.raises(ValueError, match="residual"):
        lgate_from_tensor(bad)
    with pytest.raises(ValueError, match="'L' pattern"):
        tensor_from_lgate(Gate(np.eye(8), ((0, 0), (0, 1), (0, 2))))
    with pytest.raises(ValueError):
        lgate_from_tensor(np.zeros((2, 2, 2)))


def test_rppeps_network_structure_and_contraction():
    c = build_rppeps(Lattice((3, 3)), 2, (0, 0), gate_seed=5)
    net = circuit_to_network(c)
    assert net.check() == [] and net.oc == (0, 0)
    assert len(net.nodes) == 4
    # order (0,0), (1,0), (0,1), (1,1); a site links to the last gate that touched it
    assert [n.coord for n in net.nodes] == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert net.neighbour_dims() == {(0, 1): 4, (0, 2): 2, (1, 2): 2, (2, 3): 4, (1, 3): 2}
    assert net.incoming(0) and not net.outgoing(0)
    assert fid(contract_network(net).amplitudes, simulate(c).amplitudes) >= 1 - 1e-10
    assert verify_network_isometries(net).passed


def test_single_gate_network():
    lat = Lattice((2, 2))
    c = Circuit(lat, [Gate(random_unitary(16, 2), lat.sites())])
    net = circuit_to_network(c)
    assert len(net.nodes) == 1 and net.bonds == []
    assert fid(contract_network(net).amplitudes, simulate(c).amplitudes) >= 1 - 1e-12


def test_empty_circuit_gives_product_network():
    net = circuit_to_network(Circuit(Lattice((2, 3)), []))
    assert len(net.nodes) == 6 and net.bonds == [] and net.oc is None
    s = contract_network(net)
    assert s.amplitudes[0] == 1 and np.count_nonzero(s.amplitudes) == 1
    assert verify_network_isometries(net).passed


def test_isotns_network_is_grid_connected():
    c = build_isotns_circuit(Lattice((3, 3)), 2, gate_seed=2)
    net = circuit_to_network(c)
    assert net.oc == (0, 0)
    coords = [n.coord for n in net.nodes]
    for b in net.bonds:
        p, q = coords[b.producer], coords[b.consumer]
        assert abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1
    assert not net.outgoing(0)
    assert fid(contract_network(net).amplitudes, simulate(c).amplitudes) >= 1 - 1e-10


def test_incoming_count_matches_gate_outputs():
    for c in (build_isotns_circuit(Lattice((5, 5)), 2, gate_seed=1),
              build_rppeps(Lattice((5, 5)), 2, (0, 0)),
              build_isotns_circuit(Lattice((5, 5)), 2, oc=(2, 2))):
        net = circuit_to_network(c)
        single = 0
        for k, node in enumerate(net.nodes):
            if node.gate is None:
                continue
            outputs = len(c.gates[node.gate].support)
            assert len(net.incoming(k)) == outputs - len(node.physical_sites)
            single += len(node.physical_sites) == 1
        assert single > 0
    bulk = circuit_to_network(build_isotns_circuit(Lattice((5, 5)), 2, oc=(2, 2)))
    assert len(bulk.incoming(0)) == 4 and not bulk.outgoing(0)


def test_fault_injection_flags_one_site():
    c = build_isotns_circuit(Lattice((3, 3)), 2, gate_seed=3)
    net = circuit_to_network(c)
    rep = verify_network_isometries(net, 1e-12)
    assert rep.passed and len(rep.residuals) == len(net.nodes)
    net.nodes[2].tensor = net.nodes[2].tensor.copy()
    net.nodes[2].tensor.flat[0] += 1e-3
    rep = verify_network_isometries(net, 1e-12)
    assert rep.failures() == [2]


def test_sgs_network_matches_oracle():
    spec = random_sgs_spec(3, 3, 2, 2, seed=11)
    net = sgs_to_network(spec)
    assert net.check() == []
    assert all(len(n.physical_sites) == 1 for n in net.nodes)
    assert sorted(n.coord for n in net.nodes) == Lattice((3, 3)).sites()
    assert verify_network_isometries(net, 1e-12).passed
    assert fid(contract_network(net).amplitudes, sgs_state(spec)) >= 1 - 1e-10


def test_sgs_trivial_spec_gives_product_network():
    net = sgs_to_network(random_sgs_spec(3, 3, 2, 2, product=True))
    s = contract_network(net)
    assert abs(s.amplitudes[0] - 1) <= 1e-12


@pytest.mark.parametrize("L_p", [2, 3])
def test_sgs_bond_dimensions(L_p):
    d = 2
    net = sgs_to_network(random_sgs_spec(4, 4, d, L_p, seed=1))
    dims = set(net.neighbour_dims().values())
    assert max(dims) == d ** (L_p * (L_p - 1))
    assert d ** (L_p - 1) in dims
    assert verify_network_isometries(net, 1e-12).passed


def test_fpeps_network_has_wrap_bonds():
    c = build_fpeps_circuit(Lattice((3, 3)), 2, gate_seed=4)
    net = circuit_to_network(c)
    coords = [n.coord for n in net.nodes]
    wraps = {(coords[b.producer], coords[b.consumer]) for b in net.bonds
             if coords[b.producer][1] > coords[b.consumer][1] and coords[b.consumer][0] > coords[b.producer][0]}
    # the row-end gate of row i feeds the first site of row i+1
    assert {(p[0], q[0]) for p, q in wraps} == {(0, 1), (1, 2)}
    assert fid(contract_network(net).amplitudes, simulate(c).amplitudes) >= 1 - 1e-10
    assert verify_network_isometries(net).passed


def test_contract_network_cap():
    net = circuit_to_network(Circuit(Lattice((5, 5)), []))
    with pytest.raises(MemoryCapError):
        contract_network(net)


def test_pepo_identity():
    g = Gate(np.eye(16), ((0, 0), (0, 1), (1, 0), (1, 1)))
    p = unitary_to_pepo(g)
    assert p.bond_dims == [1, 1, 1]
    for t in p.tensors.values():
        assert np.allclose(t.reshape(2, 2), np.eye(2) * t.reshape(2, 2)[0, 0])
    assert np.max(np.abs(p.to_matrix() - np.eye(16))) <= 1e-12


def test_pepo_random_gates():
    bound = pepo_bond_bound(2, 2)
    for seed in range(100):
        g = Gate(random_unitary(16, seed), ((3, 1), (3, 2), (4, 1), (4, 2)))
        p = unitary_to_pepo(g, gate_id=seed)
        assert np.linalg.norm(p.to_matrix() - g.matrix) <= 1e-10
        assert max(p.bond_dims) <= bound["per_gate"]
    assert bound == {"per_gate": 16, "state": 65536}


def test_pepo_three_by_three_and_errors():
    sup = tuple((r, c) for r in range(3) for c in range(3))
    g = Gate(random_unitary(512, 7), sup)
    p = unitary_to_pepo(g)
    assert np.linalg.norm(p.to_matrix() - g.matrix) <= 1e-10
    assert max(p.bond_dims) <= 2**9
    with pytest.raises(ValueError, match="square plaquette"):
        unitary_to_pepo(Gate(np.eye(8), L3))
    with pytest.raises(ValueError, match="2D"):
        unitary_to_pepo(Gate(np.eye(4), ((0,), (1,))))


def test_save_network(tmp_path):
    net = circuit_to_network(build_rppeps(Lattice((3, 3)), 2, (0, 0), gate_seed=1))
    save_network(tmp_path / "net", net)
    man = json.loads((tmp_path / "net" / "manifest.json").read_text())
    assert man["oc"] == [0, 0] and len(man["nodes"]) == len(net.nodes)
    assert len(man["bonds"]) == len(net.bonds)
    for node in man["nodes"]:
        assert (tmp_path / "net" / node["file"]).read_bytes()[:4] == b"TNS1"
