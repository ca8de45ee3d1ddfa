"""Block-encoding circuits for the lattice Boltzmann operators."""
from .ir import Circuit, CircuitError, Gate, RegisterLayout
from .oracles import (
    ConstructionError, NormalizationError, alpha_A, alpha_L, build_Ocollision, build_OsetBC,
    build_Ostreaming, build_OunsetBC, build_UA, build_UL, layout_qubits, ua_layout, ul_layout,
)
