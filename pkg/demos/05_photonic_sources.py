"""
Photonic generation with coupled sources
========================================

One source per lattice column holds a short window of qudits. Gates act
only inside the sources; whenever the bottom qudit is finished, its
emitter releases it as a photon. At the end the sources return to the
vacuum and the photons carry the lattice state.
"""

from seqpeps.circuits import build_fpeps_circuit, build_rppeps, ghz_chain_circuit
from seqpeps.lattice import Lattice
from seqpeps.photonic import run_fpeps_protocol, run_protocol, verify_disentangled
from seqpeps.statevector import fidelity, simulate

c = build_rppeps(Lattice((3, 3)), 2, (0, 0), "horizontal", gate_seed=5)
res = run_protocol(c)
rep = res.report(simulate(c))
print("sources", rep["sources"], "qudits each", rep["qudits_per_source"])
print("emission order:", [tuple(x) for x in rep["site_of_photon"]])
print("source deficit", rep["source_deficit"], "fidelity", rep["fidelity"])

# stopping before the closing emissions leaves the sources entangled
print("truncated run:", verify_disentangled(run_protocol(c, close=False)))

# one source produces a photonic GHZ state
amps = run_protocol(ghz_chain_circuit(6)).photonic_state().amplitudes
print("GHZ_6 nonzero amplitudes:", {i: round(float(abs(a)), 6) for i, a in enumerate(amps) if abs(a) > 1e-12})

# feedback from the last source to the first gives the F-PEPS state
res = run_fpeps_protocol(Lattice((3, 3)), 2, gate_seed=8)
matter = simulate(build_fpeps_circuit(Lattice((3, 3)), 2, gate_seed=8))
print("F-PEPS source deficit", res.deficit, "fidelity", fidelity(res.photonic_state(), matter))
