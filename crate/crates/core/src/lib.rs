//! Exact q-expansions of Eisenstein series on `Gamma(N)`, products of them,
//! membership in the Eisenstein space, trace identities between levels, and
//! the orbit and period numerics behind the product relations.

pub mod cyclotomic;
pub mod eisenstein;
pub mod error;
pub mod identities;
pub mod orbits_periods;
pub mod qseries;
pub mod report;
pub mod trace;

pub use cyclotomic::{cyclotomic_polynomial, euler_phi, CyclotomicNumber, Rational};
pub use eisenstein::{eis, eisenstein_expansion, EisensteinDescriptor, TorsionPoint};
pub use error::{Error, Result};
pub use identities::{eisenstein_membership, Membership, MembershipCertificate, TorsionTriple};
pub use orbits_periods::{CuspFormNumeric, OrbitKey, Polynomial, RatMatrix2, Sign};
pub use qseries::{default_prec, sturm_bound, BivarPoly, ModularExpression, QSeries};
pub use report::{Status, VerificationReport};
pub use trace::{trace_matrices, TraceProblem, TraceTerm};
