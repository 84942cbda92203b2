"""Circuit files: JSON with one entry per gate.

Gate supports are stored as a kind plus anchor where possible (``plaquette``
or ``L``) and explicitly otherwise (``custom``). Matrices are stored as
seeds when a gate came from :func:`random_unitary`, else as rows of
``[re, im]`` pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .circuits import Circuit, lgate_support
from .lattice import Lattice, check_ordering, plaquette_support
from .tensor_core import UNITARY_TOL, Gate, random_unitary, unitarity_residual

__all__ = ["CircuitFormatError", "circuit_to_json", "circuit_from_json", "save_circuit", "load_circuit", "dumps_canonical"]

FAMILIES = ("p-peps", "rp-peps", "isotns", "sgs", "f-peps", "custom")


class CircuitFormatError(ValueError):
    pass


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _truncated_l(lattice: Lattice, pos, s: int):
    return tuple(c for c in lgate_support(pos, s, lattice.q) if lattice.contains(c))


def circuit_to_json(circuit: Circuit) -> dict:
    lat = circuit.lattice
    L_p = circuit.params.get("L_p")
    s = circuit.params.get("s")
    gates = []
    for g in circuit.gates:
        entry = {"pos": list(g.pos)}
        if L_p is not None and plaquette_support(lat, g.pos, L_p) == g.support:
            entry["support_kind"] = "plaquette"
        elif s is not None and _truncated_l(lat, g.pos, s) == g.support:
            entry["support_kind"] = "L"
        else:
            entry["support_kind"] = "custom"
            entry["custom_support"] = [list(c) for c in g.support]
        dim = g.matrix.shape[0]
        if g.seed is not None and np.array_equal(random_unitary(dim, g.seed), g.matrix):
            entry["gate_kind"] = "seed"
            entry["seed"] = int(g.seed)
        else:
            entry["gate_kind"] = "matrix"
            entry["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in g.matrix]
        gates.append(entry)
    # L_p is stored once, as plaquette.size
    params = {k: _jsonable(v) for k, v in circuit.params.items() if k != "L_p"}
    return {
        "lattice": {"dims": list(lat.dims), "d": lat.d, "boundary": lat.boundary},
        "plaquette": {"size": L_p},
        "family": circuit.family,
        "params": params,
        "gates": gates,
    }


def _fail(msg: str, text: str | None, gate: int | None = None):
    if text is not None and gate is not None:
        at = -1
        for _ in range(gate + 1):
            at = text.find('"pos"', at + 1)
        if at >= 0:
            msg = f"line {text.count(chr(10), 0, at) + 1}: {msg}"
    raise CircuitFormatError(msg)


def circuit_from_json(obj: dict, text: str | None = None) -> Circuit:
    """Build a circuit from its JSON form, reporting the first schema violation."""
    for key in ("lattice", "family", "gates"):
        if key not in obj:
            _fail(f"missing top-level key {key!r}", text)
    try:
        lo = obj["lattice"]
        lat = Lattice(tuple(lo["dims"]), int(lo.get("d", 2)), lo.get("boundary", "open"))
    except (KeyError, TypeError, ValueError) as exc:
        _fail(f"invalid lattice: {exc}", text)
    family = obj["family"]
    if family not in FAMILIES:
        _fail(f"unknown family {family!r}", text)
    params = dict(obj.get("params") or {})
    for key in ("source", "oc", "offset"):
        if params.get(key) is not None:
            params[key] = tuple(params[key])
    if params.get("preferred") is not None:
        params["preferred"] = tuple(tuple(x) for x in params["preferred"])
    size = (obj.get("plaquette") or {}).get("size")
    if size is not None:
        params.setdefault("L_p", size)
    gates = []
    for k, e in enumerate(obj["gates"]):
        try:
            pos = tuple(int(x) for x in e["pos"])
            kind = e["support_kind"]
        except (KeyError, TypeError, ValueError):
            _fail(f"gate {k}: needs pos and support_kind", text, k)
        if kind == "plaquette":
            if size is None:
                _fail(f"gate {k}: plaquette support without plaquette.size", text, k)
            sup = plaquette_support(lat, pos, size)
            if sup is None:
                _fail(f"gate {k}: plaquette at {list(pos)} does not fit the lattice", text, k)
        elif kind == "L":
            if "s" not in params:
                _fail(f"gate {k}: 'L' support needs params.s", text, k)
            sup = _truncated_l(lat, pos, params["s"])
        elif kind == "custom":
            sup = tuple(tuple(int(x) for x in c) for c in e.get("custom_support", []))
            if not sup:
                _fail(f"gate {k}: custom support missing", text, k)
        else:
            _fail(f"gate {k}: unknown support_kind {kind!r}", text, k)
        for c in sup:
            if not lat.contains(c):
                _fail(f"gate {k}: site {list(c)} outside the lattice", text, k)
        dim = lat.d ** len(sup)
        seed = None
        if e.get("gate_kind") == "seed":
            seed = int(e["seed"])
            m = random_unitary(dim, seed)
        elif e.get("gate_kind") == "matrix":
            try:
                arr = np.asarray(e["matrix"], dtype=float)
                m = arr[..., 0] + 1j * arr[..., 1]
            except (KeyError, IndexError, ValueError, TypeError):
                _fail(f"gate {k}: matrix must be rows of [re, im] pairs", text, k)
            if m.shape != (dim, dim):
                _fail(f"gate {k}: matrix shape {m.shape} does not match {len(sup)} sites", text, k)
            res = unitarity_residual(m)
            if res > UNITARY_TOL:
                _fail(f"gate {k}: matrix not unitary, residual {res:.3e} > {UNITARY_TOL:.0e}", text, k)
        else:
            _fail(f"gate {k}: gate_kind must be 'seed' or 'matrix'", text, k)
        kind_tag = {"plaquette": "plaquette", "L": "L"}.get(kind, "custom")
        gates.append(Gate(m, sup, kind_tag, seed=seed))
    if family in ("p-peps", "rp-peps") and size is not None:
        problems = check_ordering(lat, [g.pos for g in gates], size)
        if problems:
            _fail(problems[0], text)
    return Circuit(lat, gates, family, params)


def dumps_canonical(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_circuit(circuit: Circuit, path) -> None:
    Path(path).write_text(dumps_canonical(circuit_to_json(circuit)))


def load_circuit(path) -> Circuit:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
    return circuit_from_json(obj, text)
