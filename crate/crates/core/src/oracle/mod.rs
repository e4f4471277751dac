//! Independent route to the single-mode probabilities.
//!
//! Finite-energy codewords are built as position wavefunctions, projected
//! onto Hermite functions, filtered Pauli operators are assembled in the
//! truncated Fock basis, rotated by photon-number phases and their position
//! marginals integrated over the bins. Nothing here uses the lattice or
//! error-function series; only the bin definition is shared.

mod fock;
mod hermite;
mod kernel;
mod quadrature;

pub use fock::{
    apply_pure_loss, convolved_bin_probabilities, filtered_pauli_operator, filtered_pauli_operators, fock_codeword, oracle_bin_probabilities,
    oracle_bin_probability, suggested_n_max, thermal_bin_probabilities, thermal_bin_probability, FockCodeword,
    HomodyneOracle, CODEWORD_RESIDUAL_TOL, GRID_CHECK_TOL,
};
pub use hermite::{hermite_functions, hermite_matrix};
pub use kernel::{
    energy_filter_kernel, filtered_comb, gkp_wavefunction, mehler_kernel_sum, operator_wigner, GkpWavefunction,
};
pub use quadrature::QuadratureGrid;
