//! Infinite-width kernel theory of the two-layer ReLU network.

mod bounds;
mod eigen;
mod gram;
mod theory;
mod validate;

pub use bounds::{bound_curves, chebyshev_coverage, BoundCurve, BoundParams, BoundPoint, BOUND_CSV_HEADER};
pub use eigen::{eigendecompose, GramSpectrum};
pub use gram::{gram_entry_monte_carlo, gram_infinity, kernel_entry};
pub use theory::{base_term, decay_factors, mu, phi_tilde_approx, projections, theorem1_norm};
pub use validate::{validate_against_gd, StepSize, ValidateParams, ValidationReport, ValidationRow};
