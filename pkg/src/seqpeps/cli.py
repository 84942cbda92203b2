"""Command-line entry point: ``python -m seqpeps <command> ...``.

Exit codes: 0 success, 1 a verification failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from .circuits import (
    build_brickwall,
    build_fpeps_circuit,
    build_isotns_circuit,
    build_pppeps,
    build_rppeps,
    build_sgs,
    cluster_state_circuit,
    ghz_chain_circuit,
    random_sgs_spec,
    sgs_grouped_circuit,
)
from .convert import circuit_to_network, pepo_bond_bound, save_network, unitary_to_pepo
from .io import CircuitFormatError, load_circuit, save_circuit
from .lattice import Lattice, depth_formulas, layerize, plaquette_anchors
from .lightcone import brickwall_comparison, correlation_scan, expectation_via_lightcone, write_correlation_csv
from .photonic import run_protocol, verify_disentangled
from .statevector import MemoryCapError, Observable, save_state, simulate

PAULI = {
    "Z": np.diag([1, -1]).astype(complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
}


class UsageError(Exception):
    pass


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad size {text!r}; use e.g. 3x3") from None
    return dims


def _coord(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad coordinate {text!r}; use e.g. 0,0") from None


def _preferred(text: str | None):
    if text in (None, "", "default"):
        return None
    return text


def _emit(obj, out: str | None, outputs: list) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True, default=_default)
    if out:
        Path(out).write_text(text + "\n")
        outputs.append(out)
    else:
        print(text)


def _default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x)}")


def build_family(family: str, dims, d: int, L_p: int, D: int, seed: int, source=None, preferred=None, oc=None, sweeps: int = 1):
    lat = Lattice(dims, d)
    if family == "rp-peps":
        return build_rppeps(lat, L_p, source, preferred, gate_seed=seed)
    if family == "p-peps":
        rng = np.random.default_rng(seed)
        anchors = plaquette_anchors(lat, L_p)
        order = [anchors[i] for i in rng.permutation(len(anchors))]
        return build_pppeps(lat, L_p, order, gate_seed=seed)
    if family == "isotns":
        return build_isotns_circuit(lat, D, oc, gate_seed=seed)
    if family == "f-peps":
        return build_fpeps_circuit(lat, D, gate_seed=seed)
    if family == "sgs":
        if len(dims) != 2:
            raise UsageError("sgs needs a 2D size")
        return build_sgs(random_sgs_spec(dims[0], dims[1], d, L_p, seed))
    if family == "sgs-grouped":
        return sgs_grouped_circuit(random_sgs_spec(dims[0], dims[1], d, L_p, seed))
    if family == "brickwall":
        return build_brickwall(lat, L_p, sweeps, gate_seed=seed)
    if family == "ghz":
        return ghz_chain_circuit(int(np.prod(dims)))
    if family == "cluster":
        return cluster_state_circuit(lat)
    raise UsageError(f"unknown family {family!r}")


FAMILY_CHOICES = ["rp-peps", "p-peps", "isotns", "f-peps", "sgs", "sgs-grouped", "brickwall", "ghz", "cluster"]


def _circuit_from_args(args):
    if getattr(args, "circuit", None):
        return load_circuit(args.circuit)
    return build_family(
        args.family, _dims(args.size), args.d, args.lp, args.D, args.seed,
        _coord(args.source), _preferred(args.preferred), _coord(args.oc), args.sweeps,
    )


def cmd_gen(args, outputs):
    c = _circuit_from_args(args)
    if args.out:
        save_circuit(c, args.out)
        outputs.append(args.out)
    else:
        from .io import circuit_to_json, dumps_canonical

        sys.stdout.write(dumps_canonical(circuit_to_json(c)))
    return True


def cmd_schedule(args, outputs):
    c = _circuit_from_args(args)
    sched = layerize(c)
    fam = "isotns" if c.family in ("isotns",) else "rp-peps"
    pref = c.params.get("preferred")
    L_p = c.params.get("L_p", args.lp)
    out = {"family": c.family, "dims": list(c.lattice.dims), "gates": len(c.gates), "depth": sched.depth}
    if c.family in ("rp-peps", "isotns"):
        out["formula"] = depth_formulas(c.lattice.dims, L_p, fam, pref)
        out["formula_text"] = "sum_i n_i" if fam == "isotns" else "sum_k L_p^k n_(k)"
    if args.layers:
        out["layers"] = sched.layers
    _emit(out, args.out, outputs)
    return True


def cmd_simulate(args, outputs):
    c = _circuit_from_args(args)
    state = simulate(c)
    if args.out:
        save_state(args.out, state)
        outputs += [args.out, args.out + ".json"]
    else:
        _emit({"amplitudes": [[z.real, z.imag] for z in state.amplitudes]}, None, outputs)
    return True


def cmd_convert(args, outputs):
    c = _circuit_from_args(args)
    if args.pepo:
        rows = []
        worst = 0.0
        for k, g in enumerate(c.gates):
            p = unitary_to_pepo(g, c.lattice.d, gate_id=k)
            err = float(np.linalg.norm(p.to_matrix() - g.matrix))
            worst = max(worst, err)
            rows.append({"gate": k, "bond_dims": p.bond_dims, "recontraction_error": err})
        L_p = c.params.get("L_p", args.lp)
        out = {"gates": rows, "bound": pepo_bond_bound(L_p, c.lattice.d), "max_error": worst}
        ok = worst <= args.tol and all(b <= out["bound"]["per_gate"] for r in rows for b in r["bond_dims"])
        if not ok:
            print(f"pepo failed: max recontraction error {worst:.3e}, per-gate bound {out['bound']['per_gate']}", file=sys.stderr)
        _emit(out, args.out, outputs)
        return ok
    net = circuit_to_network(c)
    if not args.out:
        raise UsageError("convert needs --out DIR for the network files")
    save_network(args.out, net)
    outputs.append(str(Path(args.out) / "manifest.json"))
    return not net.check()


def cmd_verify(args, outputs):
    seed, dims = args.seed, _dims(args.size)
    results = {}
    if args.inclusion:
        kind = args.inclusion
        if kind in ("sgs-isotns", "sgs-rppeps", "sgs"):
            results["sgs"] = checks.sgs_inclusion_chain(dims[0], dims[1], args.d, args.lp, seed)
        elif kind in ("isotns-rppeps", "isotns"):
            results["isotns"] = checks.isotns_embedding_check(dims, args.D, seed, args.d)
        elif kind in ("fpeps-ppeps", "f-peps"):
            results["f-peps"] = checks.fpeps_embedding_check(dims, args.D, seed, args.d)
        else:
            raise UsageError(f"unknown inclusion {kind!r}")
    if args.isometries or args.entropy or args.disentangle:
        c = _circuit_from_args(args)
        if args.isometries:
            results["isometries"] = checks.conversion_check(c, args.tol)
        if args.entropy:
            results["area_law"] = checks.area_law_check(c)
        if args.disentangle:
            results["disentangle"] = verify_disentangled(run_protocol(c), args.tol)
    if not results:
        raise UsageError("verify needs at least one of --inclusion, --isometries, --entropy, --disentangle")
    ok = all(r["passed"] for r in results.values())
    for name, r in results.items():
        if not r["passed"]:
            print(f"{name} failed: {_failure_detail(r)}", file=sys.stderr)
    results["passed"] = ok
    _emit(results, args.out, outputs)
    return ok


def _failure_detail(result: dict) -> str:
    """Measured values of a failed check, for the error stream."""
    parts = []
    for key, val in result.items():
        if key == "passed":
            continue
        if isinstance(val, float):
            parts.append(f"{key}={val:.3e}")
        elif isinstance(val, list) and val and isinstance(val[0], str):
            parts.append(f"{key}: {val[0]}")
        elif key == "cuts":
            bad = [c for c in val if not c["ok"]]
            if bad:
                parts.append(f"entropy {bad[0]['entropy']:.6f} > bound {bad[0]['bound']:.6f} at cut size {bad[0]['size']}")
    return "; ".join(parts)


def cmd_photonic(args, outputs):
    if args.circuit is None and args.family == "rp-peps" and args.preferred is None:
        args.preferred = "horizontal"
    c = _circuit_from_args(args)
    res = run_protocol(c)
    rep = res.report(simulate(c))
    rep["passed"] = rep["source_deficit"] <= args.tol and rep.get("fidelity", 0) >= 1 - args.tol and not rep["gates_touch_photons"]
    if not rep["passed"]:
        print(f"photonic failed: source_deficit={rep['source_deficit']:.3e}; fidelity={rep.get('fidelity', 0):.12f}; "
              f"gates_touch_photons={rep['gates_touch_photons']}", file=sys.stderr)
    _emit(rep, args.out, outputs)
    return rep["passed"]


def cmd_lightcone(args, outputs):
    c = _circuit_from_args(args)
    op = PAULI[args.op]
    if args.pair:
        pairs = []
        for p in args.pair:
            a, b = p.split(":")
            pairs.append((_coord(a), _coord(b)))
        rows = correlation_scan(c, op, op, pairs)
        if args.csv:
            write_correlation_csv(rows, args.csv)
            outputs.append(args.csv)
        _emit(rows, args.out, outputs)
        return True
    site = _coord(args.site) or (0,) * c.lattice.q
    value, rep = expectation_via_lightcone(c, Observable(op, (site,)), return_report=True)
    out = {"site": site, "value": [value.real, value.imag], **rep.to_json()}
    _emit(out, args.out, outputs)
    return True


def cmd_compare_brickwall(args, outputs):
    sizes = args.size or ["12"]
    reports = [brickwall_comparison(Lattice(_dims(s)), args.lp) for s in sizes]
    for r in reports:
        r["sequential_per_site"] = r["sequential_gates"] / r["N"]
        r["brickwall_per_site_side"] = r["brickwall_gates"] / (r["N"] * r["max_side"])
    _emit(reports if len(reports) > 1 else reports[0], args.out, outputs)
    return all(r["sequential_cones_overlap"] for r in reports)


def cmd_report(args, outputs):
    """Plot-ready data: depth versus size, brickwall comparison, GHZ correlations."""
    out_dir = Path(args.out or "report")
    out_dir.mkdir(parents=True, exist_ok=True)
    depth_csv = out_dir / "depth.csv"
    lines = ["family,n,m,depth,formula"]
    for n in (10, 20, 30, 40, 50):
        c = build_rppeps(Lattice((n, n)), 2)
        lines.append(f"rp-peps,{n},{n},{layerize(c).depth},{depth_formulas((n, n), 2, 'rp-peps')}")
        c = build_isotns_circuit(Lattice((n, n)), 2)
        lines.append(f"isotns,{n},{n},{layerize(c).depth},{depth_formulas((n, n), 2, 'isotns')}")
    depth_csv.write_text("\n".join(lines) + "\n")
    outputs.append(str(depth_csv))
    bw = [brickwall_comparison(Lattice((n,)), 2) for n in (12, 24, 48)]
    bw += [brickwall_comparison(Lattice((n, n)), 2) for n in (6, 10, 14)]
    (out_dir / "brickwall.json").write_text(json.dumps(bw, indent=1) + "\n")
    outputs.append(str(out_dir / "brickwall.json"))
    ghz = ghz_chain_circuit(12)
    rows = correlation_scan(ghz, PAULI["Z"], PAULI["Z"], [((0,), (k,)) for k in range(1, 12)])
    write_correlation_csv(rows, out_dir / "ghz_correlations.csv")
    outputs.append(str(out_dir / "ghz_correlations.csv"))
    return True


COMMANDS = {
    "gen": cmd_gen,
    "schedule": cmd_schedule,
    "simulate": cmd_simulate,
    "convert": cmd_convert,
    "verify": cmd_verify,
    "photonic": cmd_photonic,
    "lightcone": cmd_lightcone,
    "compare-brickwall": cmd_compare_brickwall,
    "report": cmd_report,
}


def _add_circuit_args(p, default_size="3x3"):
    p.add_argument("--circuit", help="circuit JSON file (overrides the family options)")
    p.add_argument("--family", default="rp-peps", choices=FAMILY_CHOICES)
    p.add_argument("--size", default=default_size, help="lattice size, e.g. 3x3 or 10x10x10")
    p.add_argument("--d", type=int, default=2, help="local dimension")
    p.add_argument("--lp", type=int, default=2, help="plaquette side length")
    p.add_argument("--D", type=int, default=2, help="bond dimension for isotns / f-peps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", help="source plaquette, e.g. 0,0")
    p.add_argument("--preferred", help="horizontal | vertical")
    p.add_argument("--oc", help="orthogonality center for isotns, e.g. 2,2")
    p.add_argument("--sweeps", type=int, default=1, help="brickwall sweeps")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqpeps", description="Sequential plaquette circuits and tensor networks.")
    ap.add_argument("--manifest", help="write a run manifest JSON here")
    sub = ap.add_subparsers(dest="command")
    for name in ("gen", "schedule", "simulate", "convert", "photonic", "lightcone"):
        p = sub.add_parser(name)
        _add_circuit_args(p)
        p.add_argument("--out")
        p.add_argument("--tol", type=float, default=1e-10)
        if name == "schedule":
            p.add_argument("--layers", action="store_true", help="include the layer lists")
        if name == "convert":
            p.add_argument("--pepo", action="store_true", help="decompose each gate into operator tensors")
        if name == "lightcone":
            p.add_argument("--site", help="observable site, e.g. 0,0")
            p.add_argument("--op", default="Z", choices=sorted(PAULI))
            p.add_argument("--pair", action="append", help="correlation pair a:b, e.g. 0:11 or 0,0:2,2")
            p.add_argument("--csv")
    p = sub.add_parser("verify")
    _add_circuit_args(p)
    p.add_argument("--inclusion", help="sgs-isotns | isotns-rppeps | fpeps-ppeps")
    p.add_argument("--isometries", action="store_true")
    p.add_argument("--entropy", action="store_true")
    p.add_argument("--disentangle", action="store_true")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p = sub.add_parser("compare-brickwall")
    p.add_argument("--size", action="append", help="lattice size; repeat for several")
    p.add_argument("--lp", type=int, default=2)
    p.add_argument("--out")
    p = sub.add_parser("report")
    p.add_argument("--out", help="output directory")
    return ap


def _hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dispatch(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command is None:
        ap.print_usage(sys.stderr)
        return 2
    outputs: list[str] = []
    try:
        ok = COMMANDS[args.command](args, outputs)
    except (UsageError, CircuitFormatError, ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MemoryCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not ok:
        print("verification failed", file=sys.stderr)
    if args.manifest:
        inputs = {}
        if getattr(args, "circuit", None):
            inputs[args.circuit] = _hash(args.circuit)
        manifest = {
            "command": args.command,
            "argv": list(argv if argv is not None else sys.argv[1:]),
            "inputs": inputs,
            "seed": getattr(args, "seed", None),
            "tolerance": getattr(args, "tol", None),
            "outputs": {o: _hash(o) for o in outputs},
            "passed": bool(ok),
        }
        Path(args.manifest).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return 0 if ok else 1


def main() -> None:
    sys.exit(dispatch())
