"""Circuits to tensor networks and back.

A sequential circuit is read as a tensor network by turning every gate into
one tensor: inputs that start from ``|0>`` are fixed, inputs coming from an
earlier gate and outputs consumed by a later gate become virtual bonds, and
the remaining outputs are physical legs.

Arrows follow the isometric-network convention: each bond points from the
later gate to the earlier one, so the first gate is an orthogonality center
with only incoming bonds. A tensor is then an isometry from its outgoing
bonds into its physical and incoming legs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuits import Circuit, SgsSpec, lgate_support, sgs_grouped_circuit
from .lattice import Coord, Lattice
from .statevector import MemoryCapError, StateVector, max_amplitudes
from .tensor_core import ISOMETRY_TOL, Gate, complete_isometry, is_isometry, qr_split, save_tensor

__all__ = [
    "Node",
    "Bond",
    "ArrowedNetwork",
    "IsometryReport",
    "PepoGrid",
    "tensor_from_lgate",
    "lgate_from_tensor",
    "circuit_to_network",
    "sgs_to_network",
    "unitary_to_pepo",
    "pepo_bond_bound",
    "contract_network",
    "verify_network_isometries",
    "save_network",
]

# leg labels: ("phys", site) or ("in", bond) / ("out", bond); "out" legs
# carry incoming arrows (the neighbour across the bond is later in time)


@dataclass
class Node:
    coord: Coord
    tensor: np.ndarray
    legs: list[tuple]
    gate: int | None = None

    def legs_of(self, kind: str) -> list[int]:
        return [i for i, leg in enumerate(self.legs) if leg[0] == kind]

    @property
    def physical_sites(self) -> list[Coord]:
        return [self.legs[i][1] for i in self.legs_of("phys")]


@dataclass
class Bond:
    """Virtual bond; the arrow points from ``consumer`` to ``producer``."""

    producer: int
    consumer: int
    dim: int
    site: Coord | None = None


@dataclass
class ArrowedNetwork:
    lattice: Lattice
    nodes: list[Node]
    bonds: list[Bond]
    oc: Coord | None = None

    @property
    def sites(self) -> dict[Coord, np.ndarray]:
        out = {n.coord: n.tensor for n in self.nodes}
        if len(out) != len(self.nodes):
            raise ValueError("several tensors share a coordinate; use nodes instead")
        return out

    def incoming(self, k: int) -> list[int]:
        return [b for b, bond in enumerate(self.bonds) if bond.producer == k]

    def outgoing(self, k: int) -> list[int]:
        return [b for b, bond in enumerate(self.bonds) if bond.consumer == k]

    def neighbour_dims(self) -> dict[tuple[int, int], int]:
        """Total bond dimension between each connected pair ``(producer, consumer)``."""
        out: dict[tuple[int, int], int] = {}
        for b in self.bonds:
            key = (b.producer, b.consumer)
            out[key] = out.get(key, 1) * b.dim
        return out

    def check(self) -> list[str]:
        problems = []
        seen: dict[int, int] = {}
        for k, node in enumerate(self.nodes):
            if node.tensor.ndim != len(node.legs):
                problems.append(f"node {k} has {node.tensor.ndim} legs but {len(node.legs)} labels")
                continue
            for i, leg in enumerate(node.legs):
                if leg[0] in ("in", "out"):
                    b = self.bonds[leg[1]]
                    seen[leg[1]] = seen.get(leg[1], 0) + 1
                    owner = b.producer if leg[0] == "out" else b.consumer
                    if owner != k or node.tensor.shape[i] != b.dim:
                        problems.append(f"node {k} leg {i} disagrees with bond {leg[1]}")
        for b in range(len(self.bonds)):
            if seen.get(b, 0) != 2:
                problems.append(f"bond {b} has {seen.get(b, 0)} ends")
        return problems


# --- 'L' gates --------------------------------------------------------------


def _lgate_s(gate: Gate) -> int:
    n = len(gate.support)
    s = (n - 1) // 2
    if n < 3 or n % 2 == 0 or tuple(gate.support) != lgate_support(gate.support[0], s, 2):
        raise ValueError(f"support {gate.support} is not a full 2D 'L' pattern")
    return s


def tensor_from_lgate(gate: Gate, d: int = 2) -> np.ndarray:
    """Site tensor ``B[k, l, u, r, b]`` of an 'L' gate with the last input fixed to ``|0>``.

    For ``s`` sites per bond the support is the anchor, ``s`` sites to the
    right and ``s`` sites up from there. Outputs: ``k`` on the anchor, ``r``
    on the horizontal arm, ``u`` on the vertical arm. Inputs: ``l`` on the
    first ``s`` sites, ``b`` on the next ``s``; the corner-most site starts
    in ``|0>``. Virtual legs have dimension ``d**s``.
    """
    s = _lgate_s(gate)
    D = d**s
    w = gate.matrix.reshape(d ** (2 * s + 1), D * D, d)[:, :, 0]
    return w.reshape(d, D, D, D, D).transpose(0, 3, 2, 1, 4)


def lgate_from_tensor(b: np.ndarray, anchor: Coord = (0, 0), tol: float = ISOMETRY_TOL) -> Gate:
    """Unitary 'L' gate whose ``|0>``-sector reproduces ``b[k, l, u, r, b]``."""
    b = np.asarray(b, dtype=complex)
    if b.ndim != 5 or len({b.shape[1], b.shape[2], b.shape[3], b.shape[4]}) != 1:
        raise ValueError(f"expected legs (k, l, u, r, b) with equal virtual dims, got {b.shape}")
    d, D = b.shape[0], b.shape[1]
    s = round(np.log(D) / np.log(d))
    if d**s != D:
        raise ValueError(f"virtual dimension {D} is not a power of {d}")
    ok, res = is_isometry(b, [1, 4], tol)
    if not ok:
        raise ValueError(f"tensor violates the isometry condition (residual {res:.3e})")
    w = b.transpose(0, 3, 2, 1, 4).reshape(d * D * D, D * D)
    u = complete_isometry(w, [x * d for x in range(D * D)])
    return Gate(u, lgate_support(tuple(anchor), s, 2), "L")


# --- circuit conversion -----------------------------------------------------


def circuit_to_network(circuit: Circuit) -> ArrowedNetwork:
    """One tensor per gate; sites never touched become ``|0>`` tensors."""
    lat = circuit.lattice
    d = lat.d
    gates = circuit.gates
    next_gate: dict[tuple[int, Coord], int] = {}
    last: dict[Coord, int] = {}
    for k, g in enumerate(gates):
        for c in g.support:
            if c in last:
                next_gate[(last[c], c)] = k
            last[c] = k
    nodes: list[Node] = []
    bonds: list[Bond] = []
    open_bond: dict[Coord, int] = {}
    for k, g in enumerate(gates):
        K = len(g.support)
        t = g.matrix.reshape((d,) * (2 * K))
        index: list = [slice(None)] * (2 * K)
        legs = []
        for p, c in enumerate(g.support):
            if (k, c) in next_gate:
                bonds.append(Bond(k, next_gate[(k, c)], d, c))
                legs.append(("out", len(bonds) - 1))
            else:
                legs.append(("phys", c))
        for p, c in enumerate(g.support):
            if c in open_bond:
                legs.append(("in", open_bond.pop(c)))
            else:
                index[K + p] = 0
        for p, c in enumerate(g.support):
            if legs[p][0] == "out":
                open_bond[c] = legs[p][1]
        nodes.append(Node(g.pos, t[tuple(index)], legs, k))
    touched = set(last)
    for c in lat.sites():
        if c not in touched:
            e0 = np.zeros(d, dtype=complex)
            e0[0] = 1
            nodes.append(Node(c, e0, [("phys", c)], None))
    oc = gates[0].pos if gates else None
    return ArrowedNetwork(lat, nodes, bonds, oc)


def _split_physical(net: ArrowedNetwork, k: int, keep: Coord | None) -> None:
    """Peel extra physical legs off node ``k`` into new one-site tensors."""
    node = net.nodes[k]
    while len(node.legs_of("phys")) > 1:
        phys = node.legs_of("phys")
        pick = [i for i in phys if node.legs[i][1] != keep][-1]
        site = node.legs[pick][1]
        q, r = qr_split(node.tensor, [pick])
        b = len(net.bonds)
        new = len(net.nodes)
        net.bonds.append(Bond(k, new, q.shape[-1], site))
        net.nodes.append(Node(site, q, [("phys", site), ("in", b)], node.gate))
        rest = [leg for i, leg in enumerate(node.legs) if i != pick]
        node.tensor = r
        node.legs = [("out", b)] + rest


def sgs_to_network(spec: SgsSpec) -> ArrowedNetwork:
    """Per-site isometric network of an SGS, via the grouped plaquette circuit.

    Group tensors that end up with several physical legs are split by QR,
    one physical site at a time; the split-off tensors receive the new bond
    as their only outgoing leg, so every tensor keeps the isometry property.
    """
    net = circuit_to_network(sgs_grouped_circuit(spec))
    for k in range(len(net.nodes)):
        _split_physical(net, k, net.nodes[k].coord)
    return net


# --- contraction and checks -------------------------------------------------


def _label(leg) -> tuple:
    return ("p", leg[1]) if leg[0] == "phys" else ("b", leg[1])


def contract_network(net: ArrowedNetwork) -> StateVector:
    """Exact contraction, greedily merging the pair with the smallest result."""
    lat = net.lattice
    cap = max_amplitudes()
    if lat.d**lat.num_sites > cap:
        raise MemoryCapError(f"{lat.d}^{lat.num_sites} amplitudes exceed the cap of {cap}")
    items = [(n.tensor, [_label(l) for l in n.legs]) for n in net.nodes]
    while len(items) > 1:
        best = None
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                shared = set(items[i][1]) & set(items[j][1])
                size = items[i][0].size * items[j][0].size
                for lab in shared:
                    size //= items[i][0].shape[items[i][1].index(lab)] ** 2
                key = (not shared, size)
                if best is None or key < best[0]:
                    best = (key, i, j, shared)
        _, i, j, shared = best
        (a, la), (b, lb) = items[i], items[j]
        if best[0][1] > cap:
            raise MemoryCapError("intermediate tensor exceeds the amplitude cap")
        ia = [la.index(x) for x in shared]
        ib = [lb.index(x) for x in shared]
        t = np.tensordot(a, b, axes=(ia, ib))
        labels = [x for x in la if x not in shared] + [x for x in lb if x not in shared]
        items = [it for n, it in enumerate(items) if n not in (i, j)] + [(t, labels)]
    t, labels = items[0]
    order = [labels.index(("p", c)) for c in lat.sites()]
    if len(order) != len(labels):
        raise ValueError("network has dangling virtual legs")
    return StateVector(lat, np.transpose(t, order).reshape(-1))


@dataclass
class IsometryReport:
    residuals: list[tuple[Coord, float, bool]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.residuals)

    def failures(self) -> list[int]:
        return [k for k, (_, _, ok) in enumerate(self.residuals) if not ok]


def verify_network_isometries(net: ArrowedNetwork, tol: float = 1e-12) -> IsometryReport:
    """Each tensor must be an isometry from its outgoing bonds into all other legs."""
    rep = IsometryReport()
    for node in net.nodes:
        _, res = is_isometry(node.tensor, node.legs_of("in"), tol)
        rep.residuals.append((node.coord, res, res <= tol))
    return rep


def save_network(path: str | Path, net: ArrowedNetwork) -> None:
    """JSON manifest ``manifest.json`` plus one TNS1 file per tensor under ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    nodes = []
    for k, n in enumerate(net.nodes):
        fname = f"node{k}.tns"
        labels = [[leg[0], list(leg[1]) if leg[0] == "phys" else leg[1]] for leg in n.legs]
        save_tensor(path / fname, n.tensor, labels)
        nodes.append({"coord": list(n.coord), "gate": n.gate, "file": fname, "legs": labels})
    manifest = {
        "lattice": {"dims": list(net.lattice.dims), "d": net.lattice.d, "boundary": net.lattice.boundary},
        "oc": list(net.oc) if net.oc is not None else None,
        "arrow": "consumer -> producer",
        "nodes": nodes,
        "bonds": [
            {"producer": b.producer, "consumer": b.consumer, "dim": b.dim, "site": list(b.site) if b.site else None}
            for b in net.bonds
        ],
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=1))


# --- plaquette operators as PEPO --------------------------------------------


@dataclass
class PepoGrid:
    """Operator tensors of one plaquette gate.

    ``tensors[c]`` has legs ``(out, in)`` of site ``c`` followed by its
    virtual legs listed in ``legs[c]`` as bond ids. Rows are chained through
    their first column; each row is an operator chain.
    """

    d: int
    support: tuple[Coord, ...]
    tensors: dict[Coord, np.ndarray]
    legs: dict[Coord, list[int]]
    bond_dims: list[int]
    gate_id: int | None = None

    def to_matrix(self) -> np.ndarray:
        d = self.d
        items = [(self.tensors[c], [("o", c), ("i", c)] + [("b", b) for b in self.legs[c]]) for c in self.support]
        t, labels = items[0]
        for u, lu in items[1:]:
            shared = [x for x in labels if x in lu]
            t = np.tensordot(t, u, axes=([labels.index(x) for x in shared], [lu.index(x) for x in shared]))
            labels = [x for x in labels if x not in shared] + [x for x in lu if x not in shared]
        order = [labels.index(("o", c)) for c in self.support] + [labels.index(("i", c)) for c in self.support]
        n = d ** len(self.support)
        return np.transpose(t, order).reshape(n, n)


def unitary_to_pepo(gate: Gate, d: int = 2, rank_tol: float = 1e-13, gate_id: int | None = None) -> PepoGrid:
    """Split a 2D plaquette unitary into per-site operators by pivoted QR.

    Rows are split off top to bottom, then each row left to right; bonds
    whose weight is below ``rank_tol`` relative to the norm are dropped, so
    products of single-site operators give bond dimension 1.
    """
    sup = tuple(gate.support)
    if len(sup[0]) != 2:
        raise ValueError("PEPO splitting needs a 2D plaquette")
    rows = sorted({c[0] for c in sup})
    cols = sorted({c[1] for c in sup})
    if len(rows) != len(cols) or sorted(sup) != [(r, c) for r in rows for c in cols] or rows != list(range(rows[0], rows[0] + len(rows))) or cols != list(range(cols[0], cols[0] + len(cols))):
        raise ValueError(f"support {sup} is not a square plaquette")
    K = len(sup)
    t = gate.matrix.reshape((d,) * (2 * K))
    t = np.transpose(t, [x for p in range(K) for x in (p, K + p)]).reshape((d * d,) * K)
    labels: list = [("s", c) for c in sup]
    bond_dims: list[int] = []
    legs: dict[Coord, list[int]] = {c: [] for c in sup}

    def split(t, labels, left_labels):
        left = [labels.index(x) for x in left_labels]
        q, r = qr_split(t, left, rank_tol)
        b = len(bond_dims)
        bond_dims.append(q.shape[-1])
        rest = [x for x in labels if x not in left_labels]
        return q, left_labels + [("b", b)], r, [("b", b)] + rest

    row_tensors = []
    cur, cur_labels = t, labels
    for r in rows[:-1]:
        left = [x for x in cur_labels if x[0] == "b"] + [("s", (r, c)) for c in cols]
        q, ql, cur, cur_labels = split(cur, cur_labels, left)
        row_tensors.append((q, ql))
    row_tensors.append((cur, cur_labels))
    tensors = {}
    for r, (rt, rl) in zip(rows, row_tensors):
        cur, cur_labels = rt, rl
        # vertical bonds stay with the first column; later columns only take
        # the horizontal bond from the previous split
        carried = [x for x in cur_labels if x[0] == "b"]
        for c in cols[:-1]:
            q, ql, cur, cur_labels = split(cur, cur_labels, [("s", (r, c))] + carried)
            tensors[(r, c)] = (q, ql)
            carried = [cur_labels[0]]
        tensors[(r, cols[-1])] = (cur, cur_labels)
    out = {}
    for c, (q, ql) in tensors.items():
        # order legs as (out, in, bonds...)
        perm = [ql.index(("s", c))] + [i for i, x in enumerate(ql) if x[0] == "b"]
        q = np.transpose(q, perm)
        q = q.reshape((d, d) + q.shape[1:])
        out[c] = q
        legs[c] = [ql[i][1] for i in perm[1:]]
    return PepoGrid(d, sup, out, legs, bond_dims, gate_id)


def pepo_bond_bound(L_p: int, d: int) -> dict:
    """Upper bounds on virtual dimensions: one plaquette gate and the whole state."""
    return {"per_gate": d ** (L_p**2), "state": d ** (L_p**4)}
