import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_circuit_state, expectation_full
from seqpeps.checks import amplitude_cap
from seqpeps.circuits import Circuit, build_brickwall, build_pppeps, build_rppeps, ghz_chain_circuit
from seqpeps.lattice import Lattice, plaquette_anchors, reverse_light_cone
from seqpeps.lightcone import (
    brickwall_comparison,
    cancellation_report,
    cones_overlap,
    correlation_scan,
    expectation_via_lightcone,
    write_correlation_csv,
)
from seqpeps.statevector import Observable, expectation, simulate
from seqpeps.tensor_core import Gate, random_unitary

Z = np.diag([1, -1]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_source_observable_on_5x5():
    c = build_rppeps(Lattice((5, 5)), 2, (0, 0), gate_seed=1)
    obs = Observable(Z, ((0, 0),))
    with amplitude_cap(2**25):
        full = expectation(simulate(c), obs)
    val, rep = expectation_via_lightcone(c, obs, return_report=True)
    assert abs(val - full) <= 1e-10
    assert rep.cost_ratio < 1 and rep.surviving == [0]


def test_line_through_source_is_cheap():
    c = build_rppeps(Lattice((4, 5)), 2, (0, 0), "horizontal", gate_seed=3)
    s = simulate(c)
    for j in range(5):
        obs = Observable(Z, ((0, j),))
        val, rep = expectation_via_lightcone(c, obs, return_report=True)
        assert abs(val - expectation(s, obs)) <= 1e-10
        assert rep.cost_ratio < 1


def test_product_circuit_uses_one_gate():
    lat = Lattice((2, 4))
    gates = [Gate(random_unitary(4, k), ((0, k), (1, k))) for k in range(4)]
    c = Circuit(lat, gates)
    obs = Observable(X, ((1, 2),))
    val, rep = expectation_via_lightcone(c, obs, return_report=True)
    assert rep.surviving == [2] and rep.sites == [(0, 2), (1, 2)]
    assert abs(val - expectation(simulate(c), obs)) <= 1e-12


def test_cancellation_report_matches_reverse_cone():
    c = build_rppeps(Lattice((4, 4)), 2, (1, 1), gate_seed=2)
    rep = cancellation_report(c, [(3, 3), (0, 2)])
    assert rep.surviving == reverse_light_cone(c, [(3, 3), (0, 2)])
    assert rep.total == len(c.gates)
    j = rep.to_json()
    assert j["total_gates"] == 9 and j["cost_ratio"] == rep.cost_ratio


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.integers(0, 11), b=st.integers(0, 11))
def test_lightcone_matches_dense_oracle(seed, a, b):
    lat = Lattice((3, 4))
    rng = np.random.default_rng(seed)
    anchors = plaquette_anchors(lat, 2)
    c = build_pppeps(lat, 2, [anchors[i] for i in rng.permutation(len(anchors))][: 1 + seed % 6], gate_seed=seed)
    sites = lat.sites()
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    if a == b:
        obs, pos = Observable(h[:2, :2] + h[:2, :2].conj().T, (sites[a],)), [a]
    else:
        obs, pos = Observable(h + h.conj().T, (sites[a], sites[b])), [a, b]
    psi = dense_circuit_state(sites, c.gates, 2)
    ref = expectation_full(psi, obs.matrix, pos, 12, 2)
    assert abs(expectation_via_lightcone(c, obs) - ref) <= 1e-10


def test_ghz_correlation_scan(tmp_path):
    rows = correlation_scan(ghz_chain_circuit(6), Z, Z, [((0,), (5,)), ((1,), (3,))])
    assert all(abs(r["re"] - 1) <= 1e-10 and abs(r["im"]) <= 1e-12 for r in rows)
    assert [r["distance"] for r in rows] == [5, 2]
    write_correlation_csv(rows, tmp_path / "c.csv")
    with open(tmp_path / "c.csv") as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["site_a", "site_b", "distance", "re", "im"]
    assert table[1][:3] == ["0", "5", "5"]


def test_brickwall_tiles_are_uncorrelated():
    c = build_brickwall(Lattice((8,)), 2, 1, gate_seed=4)
    rows = correlation_scan(c, Z, X, [((1,), (2,)), ((0,), (7,))])
    assert all(abs(complex(r["re"], r["im"])) <= 1e-12 for r in rows)


def test_sequential_chain_end_to_end_is_nonzero():
    c = build_rppeps(Lattice((8,)), 2, (0,), gate_seed=9)
    rows = correlation_scan(c, Z, Z, [((0,), (7,))])
    assert abs(complex(rows[0]["re"], rows[0]["im"])) > 1e-6


def test_cones_overlap_monotone_in_support():
    c = build_rppeps(Lattice((4, 4)), 2, (0, 0))
    assert cones_overlap(c.supports(), (0, 0), (3, 3))
    bw = build_brickwall(Lattice((4, 4)), 2, 1)
    assert not cones_overlap(bw.supports(), (0, 0), (3, 3))


def test_brickwall_comparison_values():
    chain = brickwall_comparison(Lattice((12,)), 2)
    assert chain["sequential_gates"] == 11 and chain["sequential_cones_overlap"]
    assert chain["min_sweeps"] == 7 and chain["brickwall_gates"] == 39
    sq = brickwall_comparison(Lattice((10, 10)), 2)
    assert sq["sequential_gates"] == 81 and sq["min_sweeps"] == 5 and sq["brickwall_gates"] == 107
    one = brickwall_comparison(Lattice((1, 1)), 2)
    assert one["sequential_gates"] == 0 and one["brickwall_gates"] == 0
    with pytest.raises(RuntimeError):
        brickwall_comparison(Lattice((12,)), 2, max_sweeps=3)


def test_brickwall_comparison_scaling():
    for dims in ([(20,), (40,), (80,)], [(6, 6), (10, 10), (14, 14)]):
        reps = [brickwall_comparison(Lattice(d), 2) for d in dims]
        seq = [r["sequential_gates"] / r["N"] for r in reps]
        bw = [r["brickwall_gates"] / (r["N"] * r["max_side"]) for r in reps]
        assert max(seq) <= 1 and min(seq) >= 0.5
        assert max(bw) / min(bw) < 1.5
        # the brickwall overhead over one sequential pass grows with size
        gap = [r["brickwall_gates"] / r["sequential_gates"] for r in reps]
        assert gap == sorted(gap) and gap[-1] > 1
