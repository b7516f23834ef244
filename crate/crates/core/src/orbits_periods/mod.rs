//! Orbit combinatorics of matrices with prescribed row classes, the slash
//! action, and numerics for period pairings of cusp forms.

pub mod orbits;
pub mod periods;
pub mod slash;
pub mod suites;

pub use orbits::{
    check_tau_bijections, enumerate_all_orbits, enumerate_orbits, orbit_key, transporter,
    BijectionReport, Orbit, OrbitKey, RatMatrix2, Sign,
};
pub use periods::{
    closed_form_i, integral_i, integral_i_with_estimate, mellin, period_form_i, period_pairing, period_pairing_at,
    period_pairing_quadrature, CuspFormNumeric, IMatrix,
};
pub use slash::{HalfPlaneFn, Mat2, Polynomial, Slashed, SIGMA, TAU};
