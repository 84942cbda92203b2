"""End-to-end checks that tie the modules together: family inclusions,
area-law bounds and network soundness. Each check returns a plain dict with
the measured quantities and a ``passed`` flag."""

from __future__ import annotations

import contextlib
import math
import os
from typing import Iterable, Sequence

from .circuits import (
    Circuit,
    build_fpeps_circuit,
    build_isotns_circuit,
    build_sgs,
    embed_in_plaquettes,
    random_sgs_spec,
    sgs_grouped_circuit,
    validate_circuit,
)
from .convert import circuit_to_network, contract_network, sgs_to_network, verify_network_isometries
from .lattice import Coord, Lattice
from .statevector import StateVector, entanglement_entropy, fidelity, simulate

__all__ = [
    "amplitude_cap",
    "restrict_to_original",
    "sgs_inclusion_chain",
    "isotns_embedding_check",
    "fpeps_embedding_check",
    "straight_cuts",
    "area_law_bound",
    "area_law_check",
    "conversion_check",
]

FIDELITY_TOL = 1e-10


@contextlib.contextmanager
def amplitude_cap(n: int):
    """Temporarily raise the dense-simulation amplitude cap."""
    old = os.environ.get("SEQPEPS_MAX_AMPLITUDES")
    os.environ["SEQPEPS_MAX_AMPLITUDES"] = str(n)
    try:
        yield
    finally:
        if old is None:
            del os.environ["SEQPEPS_MAX_AMPLITUDES"]
        else:
            os.environ["SEQPEPS_MAX_AMPLITUDES"] = old


def restrict_to_original(state: StateVector, lattice: Lattice, offset: Sequence[int]) -> StateVector:
    """Project every site outside the shifted copy of ``lattice`` onto ``|0>``."""
    big = state.lattice
    inner = {tuple(x + o for x, o in zip(c, offset)) for c in lattice.sites()}
    idx = tuple(slice(None) if c in inner else 0 for c in big.sites())
    return StateVector(lattice, state.tensor[idx].reshape(-1))


def sgs_inclusion_chain(rows: int = 3, cols: int = 3, d: int = 2, L_p: int = 2, seed: int = 0) -> dict:
    """SGS circuit state vs its isometric network vs its plaquette embedding."""
    spec = random_sgs_spec(rows, cols, d, L_p, seed)
    circ = build_sgs(spec)
    a = simulate(circ)
    net = sgs_to_network(spec)
    b = contract_network(net)
    emb = embed_in_plaquettes(sgs_grouped_circuit(spec), L_p)
    c = simulate(emb)
    out = {
        "circuit_vs_network": fidelity(a, b),
        "circuit_vs_embedded": fidelity(a, c),
        "network_vs_embedded": fidelity(b, c),
        "network_isometry_max_residual": max(r for _, r, _ in verify_network_isometries(net).residuals),
        "embedded_validity": validate_circuit(emb),
    }
    out["passed"] = (
        min(out["circuit_vs_network"], out["circuit_vs_embedded"], out["network_vs_embedded"]) >= 1 - FIDELITY_TOL
        and not out["embedded_validity"]
        and out["network_isometry_max_residual"] <= 1e-12
    )
    return out


def _embedding_check(circ: Circuit, L_p: int) -> dict:
    emb = embed_in_plaquettes(circ, L_p)
    problems = validate_circuit(emb)
    with amplitude_cap(max(emb.lattice.d**emb.lattice.num_sites, 2**24)):
        big = simulate(emb)
    small = restrict_to_original(big, circ.lattice, emb.params["offset"])
    f = fidelity(simulate(circ), small)
    return {
        "embedded_dims": list(emb.lattice.dims),
        "plaquettes": len(emb.gates),
        "validity": problems,
        "fidelity": f,
        "passed": not problems and f >= 1 - FIDELITY_TOL,
    }


def isotns_embedding_check(dims=(3, 3), D: int = 2, seed: int = 0, d: int = 2) -> dict:
    circ = build_isotns_circuit(Lattice(tuple(dims), d), D, gate_seed=seed)
    return _embedding_check(circ, 2 * circ.params["s"] + 1)


def fpeps_embedding_check(dims=(3, 3), D: int = 2, seed: int = 0, d: int = 2) -> dict:
    circ = build_fpeps_circuit(Lattice(tuple(dims), d), D, gate_seed=seed)
    return _embedding_check(circ, 2 * circ.params["s"] + 1)


def straight_cuts(lattice: Lattice) -> list[list[Coord]]:
    """Regions on one side of every straight cut perpendicular to an axis."""
    out = []
    for ax, n in enumerate(lattice.dims):
        for k in range(1, n):
            out.append([c for c in lattice.sites() if c[ax] < k])
    return out


def area_law_bound(circuit: Circuit, region: Iterable[Coord]) -> float:
    """``2 ln d`` times the sum over gates of the smaller share of their support."""
    A = {tuple(c) for c in region}
    total = 0
    for g in circuit.gates:
        inside = sum(1 for c in g.support if c in A)
        total += min(inside, len(g.support) - inside)
    return 2 * math.log(circuit.lattice.d) * total


def area_law_check(circuit: Circuit, tol: float = 1e-10) -> dict:
    state = simulate(circuit)
    rows = []
    for region in straight_cuts(circuit.lattice):
        S = entanglement_entropy(state, region)
        bound = area_law_bound(circuit, region)
        rows.append({"size": len(region), "entropy": S, "bound": bound, "ok": S <= bound + tol})
    return {"cuts": rows, "passed": all(r["ok"] for r in rows)}


def conversion_check(circuit: Circuit, tol: float = 1e-12) -> dict:
    net = circuit_to_network(circuit)
    f = fidelity(contract_network(net), simulate(circuit))
    rep = verify_network_isometries(net, tol)
    worst = max((r for _, r, _ in rep.residuals), default=0.0)
    return {
        "fidelity": f,
        "isometry_max_residual": worst,
        "structure": net.check(),
        "passed": f >= 1 - FIDELITY_TOL and rep.passed and not net.check(),
    }
