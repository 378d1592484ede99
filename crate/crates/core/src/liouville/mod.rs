//! Exact diagonalization of the truncated Lindbladian.

mod evolve;
mod operators;
mod spectrum;
mod sweep;
mod wigner;

pub use evolve::evolve;
pub use operators::{
    build_hamiltonian, build_liouvillian, build_liouvillian_capped, Csr, FockOperators, LiouvilleOperator, Parity,
    DEFAULT_DIM_CAP,
};
pub use spectrum::{
    diagonalize, diagonalize_full, expectation, hermitian_eigenvalues, observable_n, steady_pair, steady_state, tail_weight,
    trace, trace_norm, LiouvilleSpectrum, SteadyPair, ZERO_EIGENVALUE_TOL,
};
pub use sweep::{
    estimated_occupation, finite_size_sweep, sweep_point, CutoffRule, NmaxRule, SweepRow, REPORTED_EIGENVALUES,
    UNRELIABLE_TAIL,
};
pub use wigner::{wigner, PhaseGrid, WignerGrid, HERMITIAN_TOL, TAIL_WARNING};
