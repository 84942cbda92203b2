"""Local expectation values by gate cancellation, correlation scans and the
sequential-versus-brickwall comparison of correlation reach."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import Circuit
from .lattice import Coord, Lattice, brickwall_ordering, plaquette_anchors, radial_ordering, reverse_light_cone
from .statevector import Observable, apply_matrix, expectation, simulate, simulate_sites

__all__ = [
    "CancellationReport",
    "cancellation_report",
    "expectation_via_lightcone",
    "connected_correlator",
    "correlation_scan",
    "write_correlation_csv",
    "cones_overlap",
    "brickwall_comparison",
]


@dataclass
class CancellationReport:
    surviving: list[int]
    sites: list[Coord]
    total: int

    @property
    def cost_ratio(self) -> float:
        return len(self.surviving) / self.total if self.total else 0.0

    def to_json(self) -> dict:
        return {
            "surviving": self.surviving,
            "sites": [list(c) for c in self.sites],
            "total_gates": self.total,
            "cost_ratio": self.cost_ratio,
        }


def cancellation_report(circuit: Circuit, support: Sequence[Coord]) -> CancellationReport:
    """Gates left after cancelling ``U^dagger U`` pairs outside the observable's cone."""
    keep = reverse_light_cone(circuit, support)
    sites = {tuple(c) for c in support}
    for k in keep:
        sites.update(circuit.gates[k].support)
    order = {c: i for i, c in enumerate(circuit.lattice.sites())}
    return CancellationReport(keep, sorted(sites, key=order.__getitem__), len(circuit.gates))


def expectation_via_lightcone(circuit: Circuit, obs: Observable, return_report: bool = False):
    """``<psi|O|psi>`` simulating only the surviving gates on the sites they touch."""
    rep = cancellation_report(circuit, obs.support)
    d = circuit.lattice.d
    psi = simulate_sites(rep.sites, d, [circuit.gates[k] for k in rep.surviving])
    pos = {c: i for i, c in enumerate(rep.sites)}
    opsi = apply_matrix(psi, obs.matrix, [pos[c] for c in obs.support], d)
    value = complex(np.vdot(psi, opsi))
    return (value, rep) if return_report else value


def connected_correlator(state, op_a: Observable, op_b: Observable) -> complex:
    joint = Observable(np.kron(op_a.matrix, op_b.matrix), op_a.support + op_b.support)
    return expectation(state, joint) - expectation(state, op_a) * expectation(state, op_b)


def correlation_scan(circuit: Circuit, op_a: np.ndarray, op_b: np.ndarray, pairs: Sequence[tuple[Coord, Coord]]) -> list[dict]:
    """Connected correlators of single-site operators for each site pair, from the full state."""
    state = simulate(circuit)
    rows = []
    for a, b in pairs:
        a, b = tuple(a), tuple(b)
        c = connected_correlator(state, Observable(op_a, (a,)), Observable(op_b, (b,)))
        rows.append({
            "site_a": a,
            "site_b": b,
            "distance": sum(abs(x - y) for x, y in zip(a, b)),
            "re": c.real,
            "im": c.imag,
        })
    return rows


def write_correlation_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["site_a", "site_b", "distance", "re", "im"])
        for r in rows:
            w.writerow([
                " ".join(map(str, r["site_a"])),
                " ".join(map(str, r["site_b"])),
                r["distance"],
                repr(r["re"]),
                repr(r["im"]),
            ])


def cones_overlap(supports, a: Coord, b: Coord) -> bool:
    """Whether the reverse light cones of sites ``a`` and ``b`` share a gate."""
    return bool(set(reverse_light_cone(supports, [a])) & set(reverse_light_cone(supports, [b])))


def brickwall_comparison(lattice: Lattice, L_p: int, max_sweeps: int | None = None) -> dict:
    """Gate counts needed before opposite corners can be correlated.

    The sequential count is the number of plaquettes in one radial pass
    from a corner, whose cones of the two far corners always meet. The
    brickwall count comes from the smallest number of staggered sweeps
    whose corner cones share a gate, searched sweep by sweep.
    """
    a = (0,) * lattice.q
    b = tuple(n - 1 for n in lattice.dims)
    n_anchor = len(plaquette_anchors(lattice, L_p))
    out = {
        "dims": list(lattice.dims),
        "L_p": L_p,
        "N": lattice.num_sites,
        "max_side": max(lattice.dims),
        "sequential_gates": n_anchor,
        "sequential_cones_overlap": a == b,
        "min_sweeps": 0,
        "brickwall_gates": 0,
    }
    if a == b or n_anchor == 0:
        return out
    seq = radial_ordering(lattice, L_p, a).supports()
    out["sequential_cones_overlap"] = cones_overlap(seq, a, b)
    limit = max_sweeps if max_sweeps is not None else 4 * max(lattice.dims) + 4
    for k in range(1, limit + 1):
        bw = brickwall_ordering(lattice, L_p, k)
        if cones_overlap(bw, a, b):
            out["min_sweeps"] = k
            out["brickwall_gates"] = len(bw)
            return out
    raise RuntimeError(f"corner cones still disjoint after {limit} sweeps")


def save_comparison(reports: list[dict], path) -> None:
    with open(path, "w") as fh:
        json.dump(reports, fh, indent=1)
