"""
From circuits to isometric tensor networks
==========================================

Every gate becomes one tensor. Bonds carry arrows that point back in
time, so the first gate is the orthogonality center and every tensor is
an isometry from its outgoing bonds. Plaquette gates can also be split
into operator networks.
"""

import numpy as np

from seqpeps.circuits import build_isotns_circuit, build_rppeps
from seqpeps.convert import (
    circuit_to_network,
    contract_network,
    lgate_from_tensor,
    pepo_bond_bound,
    tensor_from_lgate,
    unitary_to_pepo,
    verify_network_isometries,
)
from seqpeps.lattice import Lattice
from seqpeps.statevector import fidelity, simulate
from seqpeps.tensor_core import Gate, random_unitary

c = build_rppeps(Lattice((3, 3)), 2, (0, 0), gate_seed=5)
net = circuit_to_network(c)
print("tensors:", [n.coord for n in net.nodes], "orthogonality center:", net.oc)
print("bond dimension between tensor pairs:", net.neighbour_dims())
print("contraction vs simulation fidelity:", fidelity(contract_network(net), simulate(c)))
rep = verify_network_isometries(net)
print("all tensors isometric:", rep.passed, "worst residual", max(r for _, r, _ in rep.residuals))

# an 'L' gate and its site tensor B[k, l, u, r, b]
g = Gate(random_unitary(8, 2), ((0, 0), (0, 1), (1, 1)))
b = tensor_from_lgate(g)
back = lgate_from_tensor(b)
print("recovered gate agrees on the |0> sector:", np.allclose(back.matrix[:, ::2], g.matrix[:, ::2]))

# a whole isoTNS circuit: bonds only between lattice neighbours
net = circuit_to_network(build_isotns_circuit(Lattice((3, 3)), 2, gate_seed=1))
print("isoTNS bonds:", sorted((net.nodes[x.producer].coord, net.nodes[x.consumer].coord) for x in net.bonds))

# a random 2x2 plaquette gate as a PEPO
p = unitary_to_pepo(Gate(random_unitary(16, 4), ((0, 0), (0, 1), (1, 0), (1, 1))))
print("PEPO bonds", p.bond_dims, "error", np.linalg.norm(p.to_matrix() - random_unitary(16, 4)))
print("bounds for L_p = 2, d = 2:", pepo_bond_bound(2, 2))
