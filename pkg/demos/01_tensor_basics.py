"""
Tensors, QR splits and isometries
=================================

The building blocks used everywhere else: contracting labelled legs,
splitting a tensor by QR and checking the isometry condition.
"""

import numpy as np

from seqpeps.tensor_core import contract, is_isometry, qr_split, random_unitary

# a seeded Haar-random two-qubit gate, reshaped to four legs (out, out, in, in)
u = random_unitary(4, seed=1).reshape(2, 2, 2, 2)

# contracting it with its conjugate over the output legs gives the identity
uu = contract(u.conj(), u, [(0, 0), (1, 1)]).reshape(4, 4)
print("U^dagger U = 1 up to", np.max(np.abs(uu - np.eye(4))))

# split off the first output and first input; the left factor is an isometry
q, r = qr_split(u, [0, 2])
print("left factor shape", q.shape, "right factor shape", r.shape)
ok, res = is_isometry(q, [2])
print("left factor isometric:", ok, "residual", res)

# a product of single-qubit gates has operator rank one across the split
prod = np.kron(random_unitary(2, 2), random_unitary(2, 3)).reshape(2, 2, 2, 2)
q, _ = qr_split(prod, [0, 2], rank_tol=1e-13)
print("bond kept for a product gate:", q.shape[-1])
