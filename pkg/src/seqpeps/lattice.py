"""Lattice geometry, gate orderings, ASAP layerization and light cones."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Coord = tuple[int, ...]

__all__ = [
    "Lattice",
    "Ordering",
    "Schedule",
    "plaquette_support",
    "plaquette_anchors",
    "radial_ordering",
    "brickwall_ordering",
    "layerize",
    "reverse_light_cone",
    "depth_formulas",
    "check_ordering",
]


@dataclass(frozen=True)
class Lattice:
    """Hypercubic lattice of ``d``-level sites, ``q = len(dims)`` in 1..3."""

    dims: tuple[int, ...]
    d: int = 2
    boundary: str = "open"

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        if not 1 <= len(dims) <= 3:
            raise ValueError("lattice dimension q must be 1, 2 or 3")
        if any(n < 1 for n in dims):
            raise ValueError("all side lengths must be >= 1")
        if self.d < 2:
            raise ValueError("local dimension d must be >= 2")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def q(self) -> int:
        return len(self.dims)

    @property
    def num_sites(self) -> int:
        return int(np.prod(self.dims))

    def sites(self) -> list[Coord]:
        """All sites in row-major order; (0,...,0) first."""
        return list(itertools.product(*(range(n) for n in self.dims)))

    def index(self, c: Coord) -> int:
        return int(np.ravel_multi_index(tuple(c), self.dims))

    def contains(self, c: Coord) -> bool:
        return len(c) == self.q and all(0 <= x < n for x, n in zip(c, self.dims))

    def wrap(self, c: Coord) -> Coord:
        if self.boundary == "periodic":
            return tuple(x % n for x, n in zip(c, self.dims))
        return tuple(c)


def plaquette_support(lattice: Lattice, anchor: Coord, size: int | Sequence[int]) -> tuple[Coord, ...] | None:
    """Sites of the plaquette at ``anchor``; ``None`` if it crosses an open boundary.

    The anchor is the first site; the rest follow in row-major offset order.
    """
    sizes = (size,) * lattice.q if isinstance(size, int) else tuple(size)
    out = []
    for off in itertools.product(*(range(s) for s in sizes)):
        c = tuple(a + o for a, o in zip(anchor, off))
        if lattice.boundary == "open" and not lattice.contains(c):
            return None
        out.append(lattice.wrap(c))
    if len(set(out)) != len(out):
        return None
    return tuple(out)


def plaquette_anchors(lattice: Lattice, size: int) -> list[Coord]:
    """Every anchor whose plaquette fits, row-major."""
    return [a for a in lattice.sites() if plaquette_support(lattice, a, size) is not None]


@dataclass
class Ordering:
    """An ordered list of plaquette positions on a lattice."""

    lattice: Lattice
    positions: list[Coord]
    plaquette_size: int
    source: Coord | None = None
    preferred: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def supports(self) -> list[tuple[Coord, ...]]:
        out = []
        for p in self.positions:
            s = plaquette_support(self.lattice, p, self.plaquette_size)
            if s is None:
                raise ValueError(f"plaquette at {p} does not fit the lattice")
            out.append(s)
        return out

    def to_json(self) -> dict:
        return {
            "lattice": {"dims": list(self.lattice.dims), "d": self.lattice.d, "boundary": self.lattice.boundary},
            "plaquette_size": self.plaquette_size,
            "source": list(self.source) if self.source is not None else None,
            "preferred": [list(x) for x in self.preferred] if self.preferred else None,
            "positions": [list(p) for p in self.positions],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Ordering":
        lat = Lattice(tuple(obj["lattice"]["dims"]), obj["lattice"]["d"], obj["lattice"]["boundary"])
        pref = obj.get("preferred")
        return cls(
            lat,
            [tuple(p) for p in obj["positions"]],
            int(obj["plaquette_size"]),
            tuple(obj["source"]) if obj.get("source") is not None else None,
            (tuple(pref[0]), tuple(pref[1])) if pref else None,
        )


@dataclass
class Schedule:
    layers: list[list[int]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def layer_of(self) -> dict[int, int]:
        return {g: k for k, layer in enumerate(self.layers) for g in layer}

    def flatten(self) -> list[int]:
        return [g for layer in self.layers for g in layer]

    def to_json(self) -> dict:
        return {"depth": self.depth, "layers": self.layers}


def _normalize_preferred(q: int, preferred) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if preferred is None:
        return tuple(range(q)), (1,) * q
    if isinstance(preferred, str):
        # names for 2D (row, column) lattices
        table = {
            "horizontal": ((1, 0), (1, 1)),
            "vertical": ((0, 1), (1, 1)),
        }
        if preferred not in table or q != 2:
            raise ValueError(f"unknown preferred direction {preferred!r} for q={q}")
        return table[preferred]
    perm, signs = preferred
    perm = tuple(int(a) for a in perm)
    signs = tuple(int(s) for s in signs)
    if sorted(perm) != list(range(q)) or len(signs) != q or any(s not in (1, -1) for s in signs):
        raise ValueError(f"invalid preferred direction {preferred!r}")
    return perm, signs


def _offset(lattice: Lattice, a: Coord, b: Coord) -> tuple[int, ...]:
    off = []
    for x, y, n in zip(a, b, lattice.dims):
        dx = x - y
        if lattice.boundary == "periodic":
            dx = (dx + n // 2) % n - n // 2
        off.append(dx)
    return tuple(off)


def radial_ordering(lattice: Lattice, L_p: int, source: Coord, preferred=None) -> Ordering:
    """Order all fitting plaquettes by their weighted distance from ``source``.

    The distance weights the k-th preferred axis by ``L_p**k``, so the
    gate-acted region expands one step per layer along the first preferred
    axis. Ties go to smaller offsets along later preferred axes, then to the
    preferred sign along each axis in preference order.
    """
    if L_p < 1:
        raise ValueError("L_p must be >= 1")
    source = tuple(int(x) for x in source)
    perm, signs = _normalize_preferred(lattice.q, preferred)
    if len(source) != lattice.q or plaquette_support(lattice, source, L_p) is None:
        raise ValueError(f"source plaquette at {source} is out of range")
    anchors = plaquette_anchors(lattice, L_p)

    def key(a):
        off = _offset(lattice, a, source)
        w = sum(L_p**k * abs(off[ax]) for k, ax in enumerate(perm))
        later = tuple(abs(off[ax]) for ax in reversed(perm[1:]))
        direction = tuple(-signs[ax] * off[ax] for ax in perm)
        return (w,) + later + direction

    return Ordering(lattice, sorted(anchors, key=key), L_p, source, (perm, signs))


def brickwall_ordering(lattice: Lattice, L_p: int, num_sweeps: int) -> list[tuple[Coord, ...]]:
    """Supports of ``num_sweeps`` staggered non-overlapping plaquette tilings.

    Sweep ``k`` uses anchors congruent to ``k mod L_p`` on every axis;
    plaquettes that cross an open boundary are omitted.
    """
    gates = []
    for k in range(num_sweeps):
        off = k % L_p
        ranges = [range(off, n, L_p) for n in lattice.dims]
        for a in itertools.product(*ranges):
            s = plaquette_support(lattice, a, L_p)
            if s is not None:
                gates.append(s)
    return gates


def _as_supports(x) -> list[tuple[Coord, ...]]:
    if isinstance(x, Ordering):
        return x.supports()
    if hasattr(x, "gates"):
        return [g.support for g in x.gates]
    return [tuple(tuple(c) for c in s) for s in x]


def layerize(x) -> Schedule:
    """ASAP schedule: each gate goes one layer after the latest earlier gate it overlaps.

    Accepts an :class:`Ordering`, a circuit (anything with ``gates``) or a
    sequence of supports.
    """
    supports = _as_supports(x)
    last: dict[Coord, int] = {}
    layers: list[list[int]] = []
    for g, sup in enumerate(supports):
        k = max((last.get(c, -1) for c in sup), default=-1) + 1
        if k == len(layers):
            layers.append([])
        layers[k].append(g)
        for c in sup:
            last[c] = k
    return Schedule(layers)


def reverse_light_cone(supports, targets: Iterable[Coord]) -> list[int]:
    """Indices of gates that survive cancellation in ``<psi|O|psi>``.

    Gates are scanned last to first; a gate survives iff it touches the
    accumulated region (initially the observable's support), which then
    absorbs its support.
    """
    supports = _as_supports(supports)
    region = {tuple(c) for c in targets}
    keep = []
    for g in range(len(supports) - 1, -1, -1):
        if region.intersection(supports[g]):
            keep.append(g)
            region.update(supports[g])
    return sorted(keep)


def depth_formulas(dims: Sequence[int], L_p: int, family: str, preferred=None) -> int:
    """Asymptotic depth: ``sum_k L_p**k n_(perm k)`` for RP-PEPS, ``sum n_i`` for isoTNS."""
    dims = tuple(int(n) for n in dims)
    if family == "rp-peps":
        perm, _ = _normalize_preferred(len(dims), preferred)
        return sum(L_p**k * dims[ax] for k, ax in enumerate(perm))
    if family == "isotns":
        return sum(dims)
    raise ValueError(f"unknown family tag {family!r}")


def check_ordering(lattice: Lattice, positions: Sequence[Coord], L_p: int, radial: bool = False) -> list[str]:
    """Validity problems of a plaquette ordering; an empty list means valid.

    Positions must be pairwise distinct and every plaquette must fit. With
    ``radial`` set, each plaquette after the first must also act on the
    region already touched by earlier plaquettes.
    """
    problems = []
    seen = set()
    region: set[Coord] = set()
    for k, p in enumerate(positions):
        p = tuple(p)
        if p in seen:
            problems.append(f"position {p} repeated (plaquette positions must be pairwise distinct)")
        seen.add(p)
        sup = plaquette_support(lattice, p, L_p)
        if sup is None:
            problems.append(f"plaquette at {p} does not fit the lattice")
            continue
        if radial and k > 0 and not region.intersection(sup):
            problems.append(f"plaquette {k} at {p} does not touch the gate-acted region")
        region.update(sup)
    return problems


def chebyshev_radius(lattice: Lattice, a: Coord, b: Coord) -> int:
    return max(abs(x) for x in _offset(lattice, a, b))


def ceil_log(D: int, d: int) -> int:
    """Smallest integer ``s`` with ``d**s >= D``."""
    s = 0
    while d**s < D:
        s += 1
    return s
