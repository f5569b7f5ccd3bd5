//! Unitary-group matrix integrals `I_k(n; R)`: exact lattice counts, the
//! closed forms on their ranges, Monte-Carlo Haar integration, and the
//! asymptotic coefficient `gamma_k(c)`.

pub mod gamma;
pub mod haar;
pub mod lattice;

pub use gamma::{barnes_g_one_plus, gamma_from_lattice, gamma_mc};
pub use haar::{haar_mc_all, haar_mc_integral, haar_sample, HaarSample, McEstimate};
pub use lattice::{
    binomial, calibrate_column_order, closed_form, lattice_count, lattice_count_with, ColumnOrder,
    CALIBRATED_COLUMN_ORDER,
};
