"""
Light cones and long-range correlations
=======================================

Gates outside the reverse light cone of an observable cancel in its
expectation value. Near the source only a few gates survive. A sequential
circuit correlates the ends of a chain with one pass, while a brickwall
needs many more gates before the cones of the two ends meet.
"""

import numpy as np

from seqpeps.circuits import build_brickwall, build_rppeps, ghz_chain_circuit
from seqpeps.lattice import Lattice
from seqpeps.lightcone import brickwall_comparison, correlation_scan, expectation_via_lightcone
from seqpeps.statevector import Observable

Z = np.diag([1, -1]).astype(complex)

c = build_rppeps(Lattice((4, 5)), 2, (0, 0), gate_seed=1)
for site in [(0, 0), (1, 2), (3, 4)]:
    val, rep = expectation_via_lightcone(c, Observable(Z, (site,)), return_report=True)
    print(f"<Z{site}> = {val.real:+.6f} from {len(rep.surviving)} of {rep.total} gates")

# end-to-end correlation on a 12-site chain with 11 gates each
ghz = correlation_scan(ghz_chain_circuit(12), Z, Z, [((0,), (11,))])[0]
bw = correlation_scan(build_brickwall(Lattice((12,)), 2, 2, gate_seed=3), Z, Z, [((0,), (11,))])[0]
print("sequential:", ghz["re"], " brickwall:", bw["re"])

# gates needed before opposite corners can be correlated
for dims in [(12,), (24,), (48,), (6, 6), (10, 10), (14, 14)]:
    r = brickwall_comparison(Lattice(dims), 2)
    print(f"{str(dims):>9}: sequential {r['sequential_gates']:>4}  brickwall {r['brickwall_gates']:>5}"
          f" ({r['min_sweeps']} sweeps)")
