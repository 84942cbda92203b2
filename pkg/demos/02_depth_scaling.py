"""
Circuit depth of radial plaquette orderings
===========================================

Plaquette unitaries are placed in an order that grows outward from a
source. Scheduling them as early as possible gives a depth that grows
linearly with the lattice sides, unlike a fully sequential sweep.
"""

from seqpeps.circuits import build_isotns_circuit
from seqpeps.lattice import Lattice, depth_formulas, layerize, radial_ordering

# the first few layers from an interior source grow as 1, 2, 4, 6, 8 gates
o = radial_ordering(Lattice((11, 11)), 2, (4, 4))
print("layer sizes:", [len(layer) for layer in layerize(o).layers[:6]])

# depth from a corner source against n + L_p * m
for n in (10, 20, 50, 100):
    o = radial_ordering(Lattice((n, n)), 2, (0, 0))
    print(f"{n:>3}x{n:<3} gates {len(o.positions):>5}  depth {layerize(o).depth:>4}"
          f"  formula {depth_formulas((n, n), 2, 'rp-peps'):>4}")

# 'L'-shaped gates for an isometric network: depth close to n + m
for n in (10, 30, 50):
    c = build_isotns_circuit(Lattice((n, n)), 2)
    print(f"isoTNS {n}x{n}: depth {layerize(c).depth}, n + m = {2 * n}")

# the same construction in three dimensions
c = build_isotns_circuit(Lattice((10, 10, 10)), 2)
print("isoTNS 10x10x10: depth", layerize(c).depth)
