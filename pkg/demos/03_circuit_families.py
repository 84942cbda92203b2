"""
Circuit families and their inclusions
=====================================

Several families of sequential circuits are built on small lattices and
checked against each other: an SGS state is rebuilt from plaquettes, and
isoTNS and F-PEPS circuits are embedded in larger plaquette circuits.
"""

import numpy as np

from seqpeps.checks import fpeps_embedding_check, sgs_inclusion_chain
from seqpeps.circuits import build_rppeps, cluster_state_circuit, validate_circuit
from seqpeps.lattice import Lattice
from seqpeps.statevector import Observable, expectation, simulate

# a seeded radial circuit; the same seed always gives the same gates
c = build_rppeps(Lattice((4, 4)), 2, (1, 1), "horizontal", gate_seed=3)
print("plaquettes:", [g.pos for g in c.gates])
print("problems found by validate_circuit:", validate_circuit(c))

# the 2D cluster state as a radial circuit; check one stabilizer X Z Z
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
cl = simulate(cluster_state_circuit(Lattice((3, 3))))
stab = Observable(np.kron(X, np.kron(Z, Z)), ((0, 0), (0, 1), (1, 0)))
print("<X Z Z> on the corner:", expectation(cl, stab).real)

# SGS state = its isometric network = its plaquette embedding
rep = sgs_inclusion_chain(3, 3, seed=7)
print("SGS chain fidelities:", {k: round(v, 12) for k, v in rep.items() if "_vs_" in k})

# F-PEPS circuit inside a 4x4 plaquette circuit with L_p = 3
rep = fpeps_embedding_check((3, 3), 2, seed=7)
print("F-PEPS embedded in", rep["embedded_dims"], "with", rep["plaquettes"], "plaquettes, fidelity", rep["fidelity"])
