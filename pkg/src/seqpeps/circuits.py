"""Constructors for sequential circuits of every state family.

Families: generic plaquette circuits (``p-peps``), radially ordered ones
(``rp-peps``), 'L'-gate circuits for isometric tensor networks (``isotns``),
sequentially generated states (``sgs``) and photon-feedback states
(``f-peps``), plus the identity-padding embedding into plaquette circuits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .lattice import (
    Coord,
    Lattice,
    brickwall_ordering,
    ceil_log,
    check_ordering,
    layerize,
    plaquette_support,
    radial_ordering,
)
from .statevector import apply_matrix
from .tensor_core import (
    ISOMETRY_TOL,
    Gate,
    complete_isometry,
    derive_seed,
    is_isometry,
    random_unitary,
    unitarity_residual,
)

__all__ = [
    "Circuit",
    "SgsSpec",
    "compose_gates",
    "seeded_gate",
    "build_rppeps",
    "build_pppeps",
    "build_brickwall",
    "ghz_chain_circuit",
    "cluster_state_circuit",
    "lgate_support",
    "build_isotns_circuit",
    "random_sgs_spec",
    "mps_column_gates",
    "build_sgs",
    "sgs_grouped_circuit",
    "build_fpeps_circuit",
    "embed_in_plaquettes",
    "validate_circuit",
]

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass
class Circuit:
    lattice: Lattice
    gates: list[Gate]
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def supports(self) -> list[tuple[Coord, ...]]:
        return [g.support for g in self.gates]

    def depth(self) -> int:
        return layerize(self).depth


def compose_gates(gates: Sequence[Gate], support: Sequence[Coord], d: int) -> np.ndarray:
    """Matrix on ``support`` of the product of ``gates`` (first gate applied first)."""
    support = [tuple(c) for c in support]
    k = len(support)
    pos = {c: i for i, c in enumerate(support)}
    op = np.eye(d**k, dtype=complex).reshape((d,) * (2 * k))
    for g in gates:
        op = apply_matrix(op, g.matrix, [pos[c] for c in g.support], d)
    return op.reshape(d**k, d**k)


def seeded_gate(support: Sequence[Coord], d: int, seed: int, kind: str = "custom") -> Gate:
    return Gate(random_unitary(d ** len(support), seed), tuple(support), kind, seed=seed)


UnitarySource = None | str | Callable | Mapping


def _make_gate(k: int, anchor: Coord, support, d: int, gate_seed: int, unitaries: UnitarySource, kind: str) -> Gate:
    dim = d ** len(support)
    if unitaries is None:
        return seeded_gate(support, d, derive_seed(gate_seed, k), kind)
    if isinstance(unitaries, str):
        if unitaries != "identity":
            raise ValueError(f"unknown unitary source {unitaries!r}")
        return Gate(np.eye(dim), support, kind)
    if callable(unitaries):
        return Gate(unitaries(anchor, support), support, kind)
    return Gate(unitaries[tuple(anchor)], support, kind)


def build_pppeps(
    lattice: Lattice, L_p: int, positions: Sequence[Coord], gate_seed: int = 0, unitaries: UnitarySource = None, family: str = "p-peps"
) -> Circuit:
    """Plaquette circuit with the given ordering of positions."""
    problems = check_ordering(lattice, positions, L_p)
    if problems:
        raise ValueError("; ".join(problems))
    gates = []
    for k, p in enumerate(positions):
        sup = plaquette_support(lattice, p, L_p)
        gates.append(_make_gate(k, p, sup, lattice.d, gate_seed, unitaries, "plaquette"))
    return Circuit(lattice, gates, family, {"L_p": L_p})


def build_rppeps(
    lattice: Lattice,
    L_p: int,
    source: Coord | None = None,
    preferred=None,
    gate_seed: int = 0,
    unitaries: UnitarySource = None,
) -> Circuit:
    """Radial plaquette circuit; ``source`` defaults to the origin corner."""
    source = (0,) * lattice.q if source is None else tuple(source)
    order = radial_ordering(lattice, L_p, source, preferred)
    c = build_pppeps(lattice, L_p, order.positions, gate_seed, unitaries, family="rp-peps")
    c.params.update({"source": source, "preferred": order.preferred})
    return c


def build_brickwall(lattice: Lattice, L_p: int, num_sweeps: int, gate_seed: int = 0, unitaries: UnitarySource = None) -> Circuit:
    gates = []
    for k, sup in enumerate(brickwall_ordering(lattice, L_p, num_sweeps)):
        gates.append(_make_gate(k, sup[0], sup, lattice.d, gate_seed, unitaries, "plaquette"))
    return Circuit(lattice, gates, "p-peps", {"L_p": L_p, "sweeps": num_sweeps})


def ghz_chain_circuit(n: int) -> Circuit:
    """Sequential qubit chain: Hadamard-then-CNOT, then CNOTs down the chain."""
    first = CNOT @ np.kron(H, np.eye(2))

    def gate(anchor, support):
        return first if anchor == (0,) else CNOT

    return build_rppeps(Lattice((n,), 2), 2, (0,), unitaries=gate)


def cluster_state_circuit(lattice: Lattice) -> Circuit:
    """2D cluster state as a radial ``L_p = 2`` plaquette circuit from the origin.

    Each plaquette applies Hadamards to sites it touches first, then CZ on
    every lattice edge inside it that no earlier plaquette covered.
    """
    if lattice.q != 2 or lattice.d != 2 or lattice.boundary != "open":
        raise ValueError("cluster_state_circuit needs an open 2D qubit lattice")
    touched: set[Coord] = set()
    done: set[frozenset] = set()

    def gate(anchor, support):
        subs = []
        for c in support:
            if c not in touched:
                subs.append(Gate(H, (c,)))
                touched.add(c)
        for a, b in itertools.combinations(support, 2):
            if sum(abs(x - y) for x, y in zip(a, b)) == 1 and frozenset((a, b)) not in done:
                subs.append(Gate(CZ, (a, b)))
                done.add(frozenset((a, b)))
        return compose_gates(subs, support, 2)

    c = build_rppeps(lattice, 2, (0, 0), unitaries=gate)
    c.params["target"] = "cluster"
    return c


# --- isometric tensor network circuits --------------------------------------


def lgate_support(anchor: Coord, s: int, q: int) -> tuple[Coord, ...]:
    """Untruncated 'L' support: ``s`` steps along the last axis, then ``s`` along each earlier one."""
    cur = list(anchor)
    sites = [tuple(cur)]
    for ax in reversed(range(q)):
        for _ in range(s):
            cur[ax] += 1
            sites.append(tuple(cur))
    return tuple(sites)


def _corner_supports(lattice: Lattice, s: int) -> list[tuple[Coord, tuple[Coord, ...]]]:
    q = lattice.q
    out = []
    for a in lattice.sites():
        full = lgate_support(a, s, q)
        if not all(lattice.contains(c) for c in full[: s + 1]):
            continue
        out.append((a, tuple(c for c in full if lattice.contains(c))))
    out.sort(key=lambda t: (sum(t[0]), t[0]))
    return out


def _bulk_supports(lattice: Lattice, oc: Coord) -> list[tuple[Coord, tuple[Coord, ...]]]:
    n, m = lattice.dims
    a, c = oc
    if not (0 <= a < n and 1 <= c <= m - 2):
        raise ValueError(f"bulk orthogonality center {oc} needs 0 <= row < {n} and 1 <= col <= {m - 2}")
    out = []
    for i in range(n):
        for j in range(1, m - 1):
            v = 1 if i > a else -1  # vertical growth direction
            h = 1 if j >= c else -1
            if (i, j) == (a, c):
                sup = [(i, j), (i, j + 1), (i + 1, j + 1), (i, j - 1), (i - 1, j + 1)]
            elif j == c:
                sup = [(i, j), (i, j + 1), (i + v, j + 1), (i, j - 1)]
            elif i == a:
                sup = [(i, j), (i, j + h), (i + 1, j + h), (i - 1, j + h)]
            else:
                sup = [(i, j), (i, j + h), (i + v, j + h)]
            out.append(((i, j), tuple(x for x in sup if lattice.contains(x))))
    out.sort(key=lambda t: (abs(t[0][0] - a) + abs(t[0][1] - c), t[0]))
    return out


def build_isotns_circuit(
    lattice: Lattice,
    D: int,
    oc: Coord | None = None,
    gate_seed: int = 0,
    pad: bool = True,
    unitaries: UnitarySource = None,
) -> Circuit:
    """'L'-gate circuit whose tensor network is an isoTNS of bond dimension ``D``.

    With ``oc`` at the origin (default) the corner pattern is used on a
    ``q``-dimensional lattice, with ``s = ceil(log_d D)`` sites per bond.
    Any other ``oc`` gives the 2D bulk pattern (``s = 1``): a 5-site gate at
    the center, 4-site gates along the two orthogonality lines and 3-site
    'L' gates in the four quadrants. Gates at the far boundary are truncated
    and merge the leftover sites into their physical leg.
    """
    d = lattice.d
    s = ceil_log(D, d)
    if s < 1:
        raise ValueError("bond dimension must be >= 2")
    if d**s != D and not pad:
        raise ValueError(f"D={D} is not a power of d={d}; enable padding")
    if lattice.boundary != "open":
        raise ValueError("isoTNS circuits are defined with open boundaries")
    q = lattice.q
    corner = oc is None or tuple(oc) == (0,) * q
    if corner:
        if any(n < s + 1 for n in lattice.dims[-1:]):
            raise ValueError("lattice too small for the ancilla framing")
        placed = _corner_supports(lattice, s)
    else:
        if q != 2 or s != 1:
            raise NotImplementedError("bulk orthogonality centers are built for 2D lattices with D <= d")
        placed = _bulk_supports(lattice, tuple(oc))
    gates = [_make_gate(k, a, sup, d, gate_seed, unitaries, "L") for k, (a, sup) in enumerate(placed)]
    oc_pos = (0,) * q if corner else tuple(oc)
    return Circuit(lattice, gates, "isotns", {"D": D, "s": s, "oc": oc_pos, "pattern": "corner" if corner else "bulk"})


# --- sequentially generated states ------------------------------------------


@dataclass
class SgsSpec:
    """Columns of canonical MPS coupled by rows of ``L_p``-site unitaries.

    ``mps[c][j]`` has legs ``(bond_below, physical, bond_above)`` and maps
    the lower bond isometrically into the other two. ``V[c][j]`` acts on
    row ``j``, columns ``c .. c + L_p - 1``.
    """

    rows: int
    cols: int
    d: int
    L_p: int
    mps: list[list[np.ndarray]]
    V: list[list[np.ndarray]]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        s = self.L_p - 1
        if self.rows < self.L_p or self.cols < self.L_p:
            raise ValueError("SGS lattice must be at least L_p x L_p")
        if len(self.mps) != self.cols or any(len(col) != self.rows for col in self.mps):
            raise ValueError("one MPS tensor per site is required")
        for c, col in enumerate(self.mps):
            prev = 1
            for j, A in enumerate(col):
                if A.ndim != 3 or A.shape[0] != prev or A.shape[1] != self.d:
                    raise ValueError(f"MPS tensor ({j},{c}) has shape {A.shape}")
                if A.shape[0] > self.d ** min(s, self.rows - j):
                    raise ValueError(f"MPS tensor ({j},{c}) bond exceeds d^(L_p-1)")
                ok, res = is_isometry(A, [0], ISOMETRY_TOL)
                if not ok:
                    raise ValueError(f"MPS tensor ({j},{c}) is not canonical (residual {res:.3e})")
                prev = A.shape[2]
            if prev != 1:
                raise ValueError(f"column {c} MPS must end with bond dimension 1")
        if len(self.V) != self.cols - s or any(len(r) != self.rows for r in self.V):
            raise ValueError("need V[c][j] for c < cols - L_p + 1 and every row j")
        for c, col in enumerate(self.V):
            for j, v in enumerate(col):
                res = unitarity_residual(v)
                if v.shape != (self.d**self.L_p,) * 2 or res > 1e-10:
                    raise ValueError(f"V[{c}][{j}] is not a unitary on L_p sites (residual {res:.3e})")

    @property
    def lattice(self) -> Lattice:
        return Lattice((self.rows, self.cols), self.d)


def _bond_dims(rows: int, d: int, s: int) -> list[int]:
    return [min(d**s, d**j, d ** (rows - j)) for j in range(rows + 1)]


def random_sgs_spec(rows: int, cols: int, d: int = 2, L_p: int = 2, seed: int = 0, product: bool = False) -> SgsSpec:
    """Seeded SGS with maximal column bond ``d**(L_p-1)``; ``product`` gives bond 1 and identity rows."""
    s = L_p - 1
    dims = [1] * (rows + 1) if product else _bond_dims(rows, d, s)
    mps = []
    for c in range(cols):
        col = []
        for j in range(rows):
            Din, Dout = dims[j], dims[j + 1]
            if product:
                A = np.zeros((1, d, 1), dtype=complex)
                A[0, 0, 0] = 1
            else:
                w = random_unitary(d * Dout, derive_seed(seed, 1, c, j))[:, :Din]
                A = w.T.reshape(Din, d, Dout)
            col.append(A)
        mps.append(col)
    V = [
        [np.eye(d**L_p, dtype=complex) if product else random_unitary(d**L_p, derive_seed(seed, 2, c, j)) for j in range(rows)]
        for c in range(cols - s)
    ]
    return SgsSpec(rows, cols, d, L_p, mps, V)


def mps_column_gates(spec: SgsSpec, c: int) -> list[Gate]:
    """Staircase of ``L_p``-site gates preparing column ``c`` from ``|0...0>``.

    Gate ``j`` reads the incoming bond from sites ``j .. j+L_p-2`` and one
    fresh site, writes the physical index on site ``j`` and the outgoing
    bond above it. The last gate writes all remaining sites.
    """
    d, s, m = spec.d, spec.L_p - 1, spec.rows
    col = spec.mps[c]
    last = max(0, m - spec.L_p)
    gates = []
    for j in range(last + 1):
        L = min(spec.L_p, m - j)
        support = tuple((r, c) for r in range(j, j + L))
        Din = col[j].shape[0]
        fresh = L - min(s, m - j)
        if j == last:
            t = col[j]
            for A in col[j + 1 :]:
                t = np.tensordot(t, A, axes=([t.ndim - 1], [0]))
            w = t.reshape(Din, d**L).T
        else:
            Dout = col[j].shape[2]
            w = np.zeros((d, d**s, Din), dtype=complex)
            w[:, :Dout, :] = np.transpose(col[j], (1, 2, 0))
            w = w.reshape(d ** (s + 1), Din)
        cols_in = [alpha * d**fresh for alpha in range(Din)]
        gates.append(Gate(complete_isometry(w, cols_in), support, "mps"))
    return gates


def _v_gate(spec: SgsSpec, c: int, j: int) -> Gate:
    return Gate(spec.V[c][j], tuple((j, c + k) for k in range(spec.L_p)), "row")


def build_sgs(spec: SgsSpec) -> Circuit:
    """Column MPS staircases, then the row unitaries column by column, in increasing row index."""
    gates = [g for c in range(spec.cols) for g in mps_column_gates(spec, c)]
    gates += [_v_gate(spec, c, j) for c in range(spec.cols - spec.L_p + 1) for j in range(spec.rows)]
    return Circuit(spec.lattice, gates, "sgs", {"L_p": spec.L_p, "source": (0, 0)})


def sgs_grouped_circuit(spec: SgsSpec) -> Circuit:
    """The SGS circuit regrouped into one gate per PEPS tensor.

    Group ``(j, c)`` holds the MPS gate of column ``c + L_p - 1`` at row
    ``j`` followed by the row unitary ``V[c][j]``; the leftmost groups also
    carry the staircases of the first ``L_p - 1`` columns and the top groups
    absorb the remaining row unitaries. Every group fits an ``L_p x L_p``
    plaquette anchored at ``(j, c)``.
    """
    s = spec.L_p - 1
    stair = [mps_column_gates(spec, c) for c in range(spec.cols)]
    top = spec.rows - spec.L_p
    gates = []
    for c in range(spec.cols - s):
        for j in range(top + 1):
            subs = []
            if c == 0:
                subs += [stair[cc][j] for cc in range(s)]
            subs.append(stair[c + s][j])
            subs.append(_v_gate(spec, c, j))
            if j == top:
                subs += [_v_gate(spec, c, jj) for jj in range(j + 1, spec.rows)]
            support = []
            for g in subs:
                support += [x for x in g.support if x not in support]
            support.sort()
            support.remove((j, c))
            support.insert(0, (j, c))
            gates.append(Gate(compose_gates(subs, support, spec.d), tuple(support), "sgs-group"))
    return Circuit(spec.lattice, gates, "sgs", {"L_p": spec.L_p, "source": (0, 0), "grouped": True})


# --- photon-feedback states -------------------------------------------------


def build_fpeps_circuit(lattice: Lattice, D: int, gate_seed: int = 0, unitaries: UnitarySource = None) -> Circuit:
    """Fully sequential 'L'-gate circuit with shifted periodic boundaries.

    Row by row, as in the corner isoTNS pattern, except that the last gate of
    each row also acts on the first ``s`` sites of the next row; those sites
    carry the bond that closes the shifted boundary.
    """
    if lattice.q != 2 or lattice.boundary != "open":
        raise ValueError("F-PEPS circuits are built on open 2D lattices")
    n, m = lattice.dims
    d = lattice.d
    s = ceil_log(D, d)
    if s < 1 or m < s + 2 or n < 2:
        raise ValueError("lattice too small for the ancilla framing")
    placed = []
    for i in range(n):
        for j in range(m - s):
            sup = [x for x in lgate_support((i, j), s, 2) if lattice.contains(x)]
            if j == m - 1 - s and i + 1 < n:
                sup += [(i + 1, k) for k in range(s)]
            placed.append(((i, j), tuple(sup)))
    gates = [_make_gate(k, a, sup, d, gate_seed, unitaries, "L") for k, (a, sup) in enumerate(placed)]
    return Circuit(lattice, gates, "f-peps", {"D": D, "s": s})


# --- embedding into plaquette circuits --------------------------------------


def embed_in_plaquettes(
    circuit: Circuit,
    L_p: int,
    dims: Sequence[int] | None = None,
    offset: Sequence[int] | None = None,
    family: str | None = None,
) -> Circuit:
    """Extend every gate by identities to a full ``L_p`` plaquette.

    The original lattice is placed at ``offset`` inside a lattice of size
    ``dims``. Defaults: isoTNS circuits go to ``(n+2s) x (m+2s)`` at offset
    ``(s, s)`` and become ``rp-peps``; F-PEPS circuits go to
    ``(n+s) x (m+s)`` at the origin and become ``p-peps``; anything else
    keeps its lattice and becomes ``rp-peps``. Gate order is preserved and
    anchors are assigned greedily so that they stay pairwise distinct; a
    gate with no free plaquette left is multiplied into the previous
    plaquette if that one covers it.
    """
    lat = circuit.lattice
    s = circuit.params.get("s", 0)
    if dims is None:
        grow = {"isotns": 2 * s, "f-peps": s}.get(circuit.family, 0)
        dims = tuple(n + grow for n in lat.dims)
    if offset is None:
        offset = (s,) * lat.q if circuit.family == "isotns" else (0,) * lat.q
    if family is None:
        family = "p-peps" if circuit.family == "f-peps" else "rp-peps"
    new_lat = Lattice(tuple(dims), lat.d, "open")
    shift = lambda c: tuple(x + o for x, o in zip(c, offset))  # noqa: E731
    used: set[Coord] = set()
    gates = []
    positions = []
    for g in circuit.gates:
        sup = [shift(c) for c in g.support]
        lo = [min(c[ax] for c in sup) for ax in range(lat.q)]
        hi = [max(c[ax] for c in sup) for ax in range(lat.q)]
        ranges = []
        for ax in range(lat.q):
            a0 = max(0, hi[ax] - (L_p - 1))
            a1 = min(lo[ax], new_lat.dims[ax] - L_p)
            ranges.append(range(a0, a1 + 1))
        inner = Gate(g.matrix, tuple(sup), g.kind)
        anchor = next((a for a in itertools.product(*ranges) if a not in used), None)
        if anchor is None:
            # absorb into the previous plaquette when it already covers this gate
            if gates and set(sup) <= set(gates[-1].support):
                prev = gates[-1]
                gates[-1] = Gate(compose_gates([prev, inner], prev.support, lat.d), prev.support, "plaquette")
                continue
            raise ValueError(f"gate on {g.support} fits no free plaquette of size {L_p}")
        used.add(anchor)
        plaq = plaquette_support(new_lat, anchor, L_p)
        gates.append(Gate(compose_gates([inner], plaq, lat.d), plaq, "plaquette"))
        positions.append(anchor)
    params = {"L_p": L_p, "offset": tuple(offset), "embedded_from": circuit.family, "source": positions[0] if positions else None}
    return Circuit(new_lat, gates, family, params)


def validate_circuit(circuit: Circuit) -> list[str]:
    """Family invariants that ``circuit`` violates; empty when valid."""
    lat = circuit.lattice
    problems = []
    for k, g in enumerate(circuit.gates):
        res = unitarity_residual(g.matrix)
        if res > 1e-10:
            problems.append(f"gate {k} not unitary (residual {res:.3e})")
        if g.matrix.shape != (lat.d ** len(g.support),) * 2:
            problems.append(f"gate {k} matrix does not match its support")
        for c in g.support:
            if not lat.contains(c):
                problems.append(f"gate {k} site {c} outside the lattice")
    if circuit.family in ("p-peps", "rp-peps"):
        L_p = circuit.params.get("L_p")
        positions = []
        for k, g in enumerate(circuit.gates):
            plaq = plaquette_support(lat, g.pos, L_p)
            if plaq is None or tuple(g.support) != plaq:
                problems.append(f"gate {k} is not an L_p={L_p} plaquette anchored at {g.pos}")
            positions.append(g.pos)
        problems += check_ordering(lat, positions, L_p, radial=circuit.family == "rp-peps")
        pref = circuit.params.get("preferred")
        if circuit.family == "rp-peps" and pref is not None and "embedded_from" not in circuit.params:
            expected = radial_ordering(lat, L_p, circuit.params["source"], pref).positions
            if positions != expected:
                problems.append("ordering differs from the radial ordering for the stored source")
    return problems
