"""Phase-space Hilbert mechanics and coherent-state projection quantization.

Classical mechanics is run as wave mechanics on phase space (fields phi(p,q),
diagonal observables, Liouville transport), a distinguished symplectic
involution singles out irreducible subspaces of the Galileo group, and
projecting onto one subspace produces the usual quantum operators together
with their window-induced energy offsets.  Every closed-form identity along
that road is verifiable numerically on desk-scale spectral grids.
"""

from .phase_grid import (
    PhaseGrid,
    PhaseField,
    Symbol,
    PolynomialSymbol,
    CallableSymbol,
    SampledSymbol,
    DensityModel,
    DiagonalOperator,
    make_grid,
    event_projector,
    expectation,
    collapse,
    density_from_state,
    symplectic_compatible_grid,
    p_symbol,
    q_symbol,
    constant_symbol,
    kinetic_symbol,
    harmonic_symbol,
    quartic_symbol,
    angular_symbol_z,
)
from .koopman import (
    poisson_bracket,
    KoopmanGenerator,
    apply_generator,
    liouville_propagate,
    classical_flow,
    ClassicalTrajectory,
)
from .galileo import (
    SymplecticTransform,
    fundamental_symplectic,
    PrequantumGenerator,
    prequantum_apply,
    translate,
    boost,
    rotate_z,
    parity,
    time_reversal,
)
from .windows import Window, build_window, chi_squared, eta_squared, radial_norm
from .frames import (
    XGrid,
    XState,
    FrameMaps,
    natural_phase_grid,
    coherent_state,
    coherent_norm_squared,
    quasi_projector_trace,
    discrete_symmetry_signs,
    x_parity,
)
from .quantize import (
    QuantizedOperator,
    SpinAlgebra,
    EnergyConstants,
    energy_constants,
    quantize_grid_route,
    quantize_potential,
    free_hamiltonian,
    harmonic_hamiltonian,
    angular_spin_operators,
    wedge_identity_residual,
    orbital_operator,
    magnetic_hamiltonian,
    semiclassical_expectation,
    operator_expectation,
)
from .qdynamics import (
    EvolutionRecord,
    schrodinger_propagate,
    husimi,
    weak_equation_residuals,
    compare_classical_quantum,
)

__version__ = "0.1.0"
