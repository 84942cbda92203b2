"""Dense complex tensor algebra.

Tensors are plain :class:`numpy.ndarray` objects; legs are addressed by
position. Labels, when needed, travel separately (see :func:`save_tensor`).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

UNITARY_TOL = 1e-10
ISOMETRY_TOL = 1e-10
EXACT_TOL = 1e-12

Coord = tuple[int, ...]

__all__ = [
    "Gate",
    "contract",
    "qr_split",
    "is_isometry",
    "is_unitary",
    "unitarity_residual",
    "random_unitary",
    "derive_seed",
    "complete_isometry",
    "save_tensor",
    "load_tensor",
]


def unitarity_residual(u: np.ndarray) -> float:
    """Return ``max |U^dagger U - I|``."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return float("inf")
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_residual(u) <= tol


@dataclass(frozen=True)
class Gate:
    """A unitary acting on an ordered list of lattice sites.

    ``matrix`` has shape ``(d**k, d**k)`` with the first support site as the
    most significant tensor factor. ``seed`` records where a Haar-random
    matrix came from, so circuits can be serialized compactly.
    """

    matrix: np.ndarray
    support: tuple[Coord, ...]
    kind: str = "custom"
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        support = tuple(tuple(int(x) for x in c) for c in self.support)
        object.__setattr__(self, "support", support)
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if len(set(support)) != len(support):
            raise ValueError(f"gate support has repeated sites: {support}")
        res = unitarity_residual(m)
        if res > UNITARY_TOL:
            raise ValueError(f"gate matrix is not unitary (residual {res:.3e})")

    @property
    def pos(self) -> Coord:
        return self.support[0]

    @property
    def num_sites(self) -> int:
        return len(self.support)


def contract(a: np.ndarray, b: np.ndarray, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired legs of ``a`` and ``b``.

    The result carries the unpaired legs of ``a`` followed by those of ``b``,
    each group in its original order.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    la = [p[0] for p in pairs]
    lb = [p[1] for p in pairs]
    if len(set(la)) != len(la) or len(set(lb)) != len(lb):
        raise ValueError("a leg is paired more than once")
    for i, j in pairs:
        if not (0 <= i < a.ndim and 0 <= j < b.ndim):
            raise ValueError(f"leg pair ({i}, {j}) out of range")
        if a.shape[i] != b.shape[j]:
            raise ValueError(
                f"dimension mismatch on pair ({i}, {j}): {a.shape[i]} != {b.shape[j]}"
            )
    return np.tensordot(a, b, axes=(la, lb))


def _phase_fixed_qr(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(m, mode="reduced")
    diag = np.diagonal(r)
    phases = np.ones(len(diag), dtype=complex)
    nz = np.abs(diag) > 0
    phases[nz] = diag[nz] / np.abs(diag[nz])
    q = q * phases[None, :]
    r = phases.conj()[:, None] * r
    return q, r


def qr_split(
    t: np.ndarray, left_legs: Sequence[int], rank_tol: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Split ``t`` into an isometry ``q`` on ``left_legs`` and a remainder ``r``.

    ``q`` has legs ``(*left_legs, bond)`` and satisfies ``q^dagger q = I``;
    ``r`` has legs ``(bond, *remaining legs)``. The diagonal of the
    triangular factor is real and non-negative. A zero tensor gives ``r = 0``
    and ``q`` the phase-fixed Householder basis numpy returns.

    With ``rank_tol`` set, a column-pivoted QR is used and bond directions
    whose ``r`` rows fall below ``rank_tol * ||t||`` are dropped, which is
    exact up to that tolerance.
    """
    t = np.asarray(t)
    left = [int(i) for i in left_legs]
    if not left or len(left) >= t.ndim or len(set(left)) != len(left):
        raise ValueError("left_legs must be a nonempty proper subset of the legs")
    right = [i for i in range(t.ndim) if i not in left]
    lshape = [t.shape[i] for i in left]
    rshape = [t.shape[i] for i in right]
    m = np.transpose(t, left + right).reshape(int(np.prod(lshape)), int(np.prod(rshape)))
    if rank_tol is None:
        q, r = _phase_fixed_qr(m)
    else:
        q, r, piv = scipy.linalg.qr(m, mode="economic", pivoting=True)
        norm = np.linalg.norm(m)
        keep = np.linalg.norm(r, axis=1) > rank_tol * max(norm, 1e-300)
        rank = max(1, int(np.count_nonzero(keep)))
        q = q[:, :rank]
        r_unpiv = np.empty_like(r[:rank])
        r_unpiv[:, piv] = r[:rank]
        r = r_unpiv
        diag = np.array([r[k, piv[k]] for k in range(rank)])
        phases = np.where(np.abs(diag) > 0, diag / np.where(diag == 0, 1, np.abs(diag)), 1)
        q = q * phases[None, :]
        r = phases.conj()[:, None] * r
    bond = q.shape[1]
    return q.reshape(lshape + [bond]), r.reshape([bond] + rshape)


def is_isometry(t: np.ndarray, in_legs: Iterable[int], tol: float = ISOMETRY_TOL) -> tuple[bool, float]:
    """Check that ``t`` is an isometry from ``in_legs`` into the other legs.

    ``t`` is contracted with ``conj(t)`` over every leg not in ``in_legs``;
    the residual is the max-norm distance of the result from the identity on
    ``in_legs``.
    """
    t = np.asarray(t)
    ins = [int(i) for i in in_legs]
    outs = [i for i in range(t.ndim) if i not in ins]
    din = int(np.prod([t.shape[i] for i in ins])) if ins else 1
    m = np.transpose(t, outs + ins).reshape(-1, din)
    residual = float(np.max(np.abs(m.conj().T @ m - np.eye(din))))
    return residual <= tol, residual


def derive_seed(*parts: int) -> int:
    """Deterministic 63-bit child seed from integer parts."""
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-random unitary from a seeded complex Gaussian matrix (PCG64).

    The phases of the triangular factor's diagonal are divided out. For
    ``dim == 1`` the global phase is fixed to 1.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 1:
        return np.ones((1, 1), dtype=complex)
    rng = np.random.default_rng(int(seed))
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, _ = _phase_fixed_qr(z)
    return q


def complete_isometry(w: np.ndarray, columns: Sequence[int], dim: int | None = None) -> np.ndarray:
    """Return a unitary whose ``columns`` equal the orthonormal columns of ``w``.

    The remaining columns are the orthonormal complement obtained from a
    phase-fixed QR of ``[w | I]``; the result is deterministic.
    """
    w = np.asarray(w, dtype=complex)
    dim = w.shape[0] if dim is None else dim
    k = w.shape[1]
    if len(columns) != k:
        raise ValueError("one target column per isometry column is required")
    q, _ = _phase_fixed_qr(np.hstack([w, np.eye(dim, dtype=complex)]))
    comp = q[:, k:dim]
    u = np.zeros((dim, dim), dtype=complex)
    rest = [c for c in range(dim) if c not in set(columns)]
    u[:, list(columns)] = w
    u[:, rest] = comp
    return u


_MAGIC = b"TNS1"


def save_tensor(path: str | Path, t: np.ndarray, labels: Sequence | None = None, meta: dict | None = None) -> None:
    """Write ``t`` in the TNS1 binary format; labels go to a JSON sidecar."""
    path = Path(path)
    t = np.ascontiguousarray(np.asarray(t, dtype=np.complex128))
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", t.ndim))
        for n in t.shape:
            fh.write(struct.pack("<I", n))
        fh.write(t.astype("<c16").tobytes(order="C"))
    if labels is not None or meta is not None:
        side = {"labels": [_jsonable(x) for x in labels] if labels is not None else None}
        if meta:
            side.update(meta)
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, sort_keys=True))


def load_tensor(path: str | Path) -> tuple[np.ndarray, list | None]:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}")
    (rank,) = struct.unpack_from("<I", raw, 4)
    shape = struct.unpack_from("<" + "I" * rank, raw, 8)
    off = 8 + 4 * rank
    n = int(np.prod(shape)) if rank else 1
    data = np.frombuffer(raw, dtype="<c16", count=n, offset=off).astype(complex)
    side = path.with_suffix(path.suffix + ".json")
    labels = None
    if side.exists():
        labels = json.loads(side.read_text()).get("labels")
    return data.reshape(shape), labels


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x
