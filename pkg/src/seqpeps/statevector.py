"""Exact dense simulation of qudit circuits.

Amplitudes are indexed in mixed radix with the row-major first site,
``(0, ..., 0)``, as the most significant digit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lattice import Coord, Lattice
from .tensor_core import save_tensor

DEFAULT_MAX_AMPLITUDES = 2**24

__all__ = [
    "StateVector",
    "Observable",
    "MemoryCapError",
    "max_amplitudes",
    "apply_matrix",
    "simulate",
    "simulate_sites",
    "expectation",
    "reduced_density_matrix",
    "entanglement_entropy",
    "fidelity",
    "save_state",
]


class MemoryCapError(RuntimeError):
    pass


def max_amplitudes() -> int:
    return int(os.environ.get("SEQPEPS_MAX_AMPLITUDES", DEFAULT_MAX_AMPLITUDES))


@dataclass
class StateVector:
    lattice: Lattice
    amplitudes: np.ndarray

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.lattice.d,) * self.lattice.num_sites)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def zero(cls, lattice: Lattice) -> "StateVector":
        amps = np.zeros(lattice.d**lattice.num_sites, dtype=complex)
        amps[0] = 1
        return cls(lattice, amps)


@dataclass
class Observable:
    """Operator on ``support`` (first site most significant)."""

    matrix: np.ndarray
    support: tuple[Coord, ...]

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        self.support = tuple(tuple(c) for c in self.support)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)


def apply_matrix(psi: np.ndarray, matrix: np.ndarray, axes: Sequence[int], d: int) -> np.ndarray:
    """Apply ``matrix`` to the tensor axes ``axes`` of ``psi`` (shape ``(d,)*N``)."""
    k = len(axes)
    if matrix.shape != (d**k, d**k):
        raise ValueError(f"matrix shape {matrix.shape} does not match {k} sites of dimension {d}")
    u = matrix.reshape((d,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _check_cap(n: int, d: int) -> None:
    if d**n > max_amplitudes():
        raise MemoryCapError(f"{d}^{n} amplitudes exceed the cap of {max_amplitudes()}")


def simulate_sites(sites: Sequence[Coord], d: int, gates: Iterable) -> np.ndarray:
    """Evolve ``|0...0>`` on ``sites`` under ``gates``; returns a ``(d,)*len(sites)`` tensor."""
    sites = [tuple(c) for c in sites]
    _check_cap(len(sites), d)
    pos = {c: i for i, c in enumerate(sites)}
    psi = np.zeros((d,) * len(sites), dtype=complex)
    psi[(0,) * len(sites)] = 1
    for g in gates:
        try:
            axes = [pos[c] for c in g.support]
        except KeyError as exc:
            raise ValueError(f"gate support site {exc.args[0]} is outside the register") from None
        psi = apply_matrix(psi, g.matrix, axes, d)
    return psi


def simulate(circuit) -> StateVector:
    """``U_N ... U_1 |0>^N`` for the circuit's gates in order."""
    lat = circuit.lattice
    for g in circuit.gates:
        for c in g.support:
            if not lat.contains(c):
                raise ValueError(f"gate support site {c} is outside the lattice")
    psi = simulate_sites(lat.sites(), lat.d, circuit.gates)
    return StateVector(lat, psi.reshape(-1))


def expectation(state: StateVector, obs: Observable) -> complex:
    lat = state.lattice
    axes = [lat.index(c) for c in obs.support]
    psi = state.tensor
    if obs.matrix.shape != (lat.d ** len(axes),) * 2:
        raise ValueError("observable dimension does not match its support")
    opsi = apply_matrix(psi, obs.matrix, axes, lat.d)
    return complex(np.vdot(psi, opsi))


def reduced_density_matrix(state: StateVector, region: Iterable[Coord]) -> np.ndarray:
    lat = state.lattice
    idx = sorted(lat.index(c) for c in region)
    rest = [i for i in range(lat.num_sites) if i not in idx]
    m = np.transpose(state.tensor, idx + rest).reshape(lat.d ** len(idx), -1)
    return m @ m.conj().T


def entanglement_entropy(state: StateVector, region: Iterable[Coord]) -> float:
    """Von Neumann entropy (natural log) of ``region``."""
    lat = state.lattice
    idx = sorted({lat.index(c) for c in region})
    if not idx or len(idx) == lat.num_sites:
        raise ValueError("region must be a proper nonempty subset of the sites")
    rest = [i for i in range(lat.num_sites) if i not in idx]
    m = np.transpose(state.tensor, idx + rest).reshape(lat.d ** len(idx), -1)
    sv = np.linalg.svd(m, compute_uv=False)
    p = sv**2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``."""
    if a.amplitudes.shape != b.amplitudes.shape:
        raise ValueError("states have different dimensions")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def save_state(path, state: StateVector) -> None:
    lat = state.lattice
    save_tensor(
        path,
        state.amplitudes,
        labels=None,
        meta={
            "index_convention": "mixed radix, row-major sites, site (0,...,0) most significant",
            "lattice": {"dims": list(lat.dims), "d": lat.d, "boundary": lat.boundary},
        },
    )
