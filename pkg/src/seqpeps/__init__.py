"""Sequential quantum circuits for plaquette-generated PEPS.

Circuits of plaquette unitaries applied to a product state, their
scheduling and light cones, conversion to isometric tensor networks,
photonic generation with ancilla-emitter sources, and exact small-scale
simulation for verification.
"""

from .circuits import (
    Circuit,
    SgsSpec,
    build_brickwall,
    build_fpeps_circuit,
    build_isotns_circuit,
    build_pppeps,
    build_rppeps,
    build_sgs,
    cluster_state_circuit,
    embed_in_plaquettes,
    ghz_chain_circuit,
    random_sgs_spec,
    sgs_grouped_circuit,
    validate_circuit,
)
from .convert import (
    ArrowedNetwork,
    PepoGrid,
    circuit_to_network,
    contract_network,
    lgate_from_tensor,
    sgs_to_network,
    tensor_from_lgate,
    unitary_to_pepo,
    verify_network_isometries,
)
from .io import load_circuit, save_circuit
from .lattice import Lattice, Ordering, Schedule, depth_formulas, layerize, radial_ordering, reverse_light_cone
from .lightcone import brickwall_comparison, correlation_scan, expectation_via_lightcone
from .photonic import emit, run_fpeps_protocol, run_protocol, verify_disentangled
from .statevector import Observable, StateVector, entanglement_entropy, expectation, fidelity, simulate
from .tensor_core import Gate, contract, is_isometry, qr_split, random_unitary

__version__ = "0.1.0"
