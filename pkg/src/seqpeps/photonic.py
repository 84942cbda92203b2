"""Photonic generation with an array of coupled ancilla-emitter sources.

Source ``c`` plays the role of lattice column ``c``. It holds a window of
``w`` qudits: the emitter (slot 0) and ``w - 1`` ancillas, standing for
rows ``head .. head + w - 1`` of its column. Gates act only on qudits
inside the sources. Whenever the site at the bottom of a window is no longer
touched by any later gate, the emitter releases it as a photon and the
window moves up one row: the ancillas shift down one slot and the emptied
emitter, now back in ``|0>``, becomes the top slot. The last ``w - 1`` rows
stay in the sources until the closing operation, which emits them the same
way.

A circuit can be run this way only if each gate finds all of its sites in
the current windows; a radial plaquette ordering that grows fastest along
the rows (``preferred="horizontal"``) and the 'L'-gate circuits qualify.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, build_fpeps_circuit
from .lattice import Coord, Lattice
from .statevector import MemoryCapError, StateVector, apply_matrix, max_amplitudes

__all__ = [
    "ProtocolResult",
    "emit",
    "source_window",
    "run_protocol",
    "run_fpeps_protocol",
    "verify_disentangled",
    "photons_touched",
]


def emit(psi: np.ndarray, emitter_axis: int, d: int) -> np.ndarray:
    """Photon emission isometry ``|k>_E -> |0>_E |k>_ph`` on one emitter.

    ``psi`` has one axis per qudit; the photon is appended as a new last
    axis and the emitter axis is left in ``|0>``.
    """
    if not 0 <= emitter_axis < psi.ndim:
        raise IndexError(f"emitter axis {emitter_axis} out of range for {psi.ndim} qudits")
    moved = np.moveaxis(psi, emitter_axis, -1)
    out = np.zeros(moved.shape[:emitter_axis] + (d,) + moved.shape[emitter_axis:], dtype=complex)
    idx = [slice(None)] * out.ndim
    idx[emitter_axis] = 0
    out[tuple(idx)] = moved
    return out


def source_window(circuit: Circuit) -> int:
    """Qudits per source: ``L_p`` for plaquette circuits, ``s + 1`` for 'L'-gate circuits."""
    p = circuit.params
    if "s" in p and circuit.family in ("isotns", "f-peps"):
        return p["s"] + 1
    if "L_p" in p:
        return p["L_p"]
    raise ValueError("cannot infer the source size; pass window explicitly")


@dataclass
class ProtocolResult:
    joint: np.ndarray
    num_sources: int
    window: int
    site_of_photon: list[Coord]
    trace: list[tuple] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    completed: bool = True
    lattice: Lattice | None = None

    def source_vacuum_projection(self) -> np.ndarray:
        """Photon amplitudes with every source qudit projected on ``|0>`` (emission order)."""
        k = self.num_sources * self.window
        return self.joint[(0,) * k].reshape(-1)

    @property
    def deficit(self) -> float:
        return float(max(0.0, 1.0 - np.linalg.norm(self.source_vacuum_projection()) ** 2))

    def photonic_state(self) -> StateVector:
        """Photons reordered to lattice sites; requires a completed run."""
        if not self.completed:
            raise ValueError("protocol stopped before the closing emissions")
        lat = self.lattice
        amps = self.source_vacuum_projection().reshape((lat.d,) * len(self.site_of_photon))
        order = {lat.index(c): p for p, c in enumerate(self.site_of_photon)}
        amps = np.transpose(amps, [order[i] for i in range(lat.num_sites)])
        return StateVector(lat, amps.reshape(-1))

    def report(self, reference: StateVector | None = None) -> dict:
        out = {
            "sources": self.num_sources,
            "qudits_per_source": self.window,
            "photons": len(self.site_of_photon),
            "completed": self.completed,
            "source_deficit": self.deficit,
            "site_of_photon": [list(c) for c in self.site_of_photon],
            "max_step_norm_drift": float(max((abs(n - 1) for n in self.norms), default=0.0)),
            "gates_touch_photons": photons_touched(self),
        }
        if reference is not None and self.completed:
            out["fidelity"] = float(abs(np.vdot(reference.amplitudes, self.photonic_state().amplitudes)) ** 2)
        return out

    def save_report(self, path, reference: StateVector | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.report(reference), fh, indent=1)


def photons_touched(result: ProtocolResult) -> bool:
    """Whether any recorded gate acted on an already emitted photon."""
    k = result.num_sources * result.window
    return any(step[0] == "gate" and max(step[2]) >= k for step in result.trace)


def _as_2d(c: Coord) -> tuple[int, int]:
    return (c[0], 0) if len(c) == 1 else (c[0], c[1])


def run_protocol(circuit: Circuit, window: int | None = None, close: bool = True) -> ProtocolResult:
    """Run ``circuit`` on the source array and emit every site as a photon.

    With ``close=False`` the closing emissions are skipped, which leaves the
    last rows inside the sources.
    """
    lat = circuit.lattice
    if lat.q not in (1, 2) or lat.boundary != "open":
        raise ValueError("photonic generation needs an open 1D or 2D lattice")
    d = lat.d
    rows = lat.dims[0]
    cols = 1 if lat.q == 1 else lat.dims[1]
    w = source_window(circuit) if window is None else int(window)
    nsrc = cols * w
    if d ** (nsrc + lat.num_sites) > max_amplitudes():
        raise MemoryCapError(f"{nsrc} source qudits and {lat.num_sites} photons exceed the amplitude cap")

    remaining: dict[tuple[int, int], int] = {}
    for g in circuit.gates:
        for c in g.support:
            remaining[_as_2d(c)] = remaining.get(_as_2d(c), 0) + 1
    head = [0] * cols
    slot = [list(range(c * w, (c + 1) * w)) for c in range(cols)]  # axis of each slot
    psi = np.zeros((d,) * nsrc, dtype=complex)
    psi[(0,) * nsrc] = 1
    photons: list[Coord] = []
    trace: list[tuple] = []
    norms: list[float] = []

    def site_coord(r, c):
        return (r,) if lat.q == 1 else (r, c)

    def release(c: int, force: bool = False) -> None:
        nonlocal psi
        # the top w - 1 rows stay in the sources until the closing operation
        stop = rows if force else rows - (w - 1)
        while head[c] < stop and (force or remaining.get((head[c], c), 0) == 0):
            psi = emit(psi, slot[c][0], d)
            photons.append(site_coord(head[c], c))
            trace.append(("emit", c, psi.ndim - 1))
            slot[c] = slot[c][1:] + slot[c][:1]
            trace.append(("shift", c))
            head[c] += 1

    for k, g in enumerate(circuit.gates):
        axes = []
        for site in g.support:
            r, c = _as_2d(site)
            t = r - head[c]
            if not 0 <= t < w:
                raise ValueError(f"gate {k}: site {site} is outside source {c} (rows {head[c]}..{head[c] + w - 1})")
            axes.append(slot[c][t])
        before = np.linalg.norm(psi)
        psi = apply_matrix(psi, g.matrix, axes, d)
        trace.append(("gate", k, tuple(axes)))
        for site in g.support:
            remaining[_as_2d(site)] -= 1
        for c in sorted({_as_2d(s)[1] for s in g.support}):
            release(c)
        norms.append(float(np.linalg.norm(psi) / before))
    if close:
        for c in range(cols):
            release(c, force=True)
    return ProtocolResult(psi, cols, w, photons, trace, norms, completed=close, lattice=lat)


def run_fpeps_protocol(lattice: Lattice, D: int, gate_seed: int = 0, unitaries=None, close: bool = True) -> ProtocolResult:
    """Photon-feedback state: the row-end gate couples the last source back to the first ones."""
    return run_protocol(build_fpeps_circuit(lattice, D, gate_seed, unitaries), close=close)


def verify_disentangled(result: ProtocolResult, tol: float = 1e-10) -> dict:
    """Overlap of the final source register with its initial vacuum."""
    deficit = result.deficit
    return {"deficit": deficit, "fidelity": 1.0 - deficit, "passed": deficit <= tol}
