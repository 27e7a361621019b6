//! Dynamic asymptotic dimension witnesses for actions of infinite virtually
//! cyclic groups on zero-dimensional symbolic spaces.
//!
//! The pipeline: find a marker `U` whose `p⁻¹(B_{5N})`-translates are disjoint,
//! build the cover `U₀ = p⁻¹(B_N)·U`, `U₁ = X ∖ U₀`, compute the transition
//! sets `F(Uᵢ, E)` by a fixpoint over clopen attainability sets, and package
//! everything in a certificate that [`certificate::verify_certificate`] re-checks
//! using only clopen algebra and group arithmetic.

pub mod canonical;
pub mod certificate;
pub mod corpus;
pub mod dad;
pub mod freeness;
pub mod group;
pub mod marker;
pub mod quotient;
pub mod space;

pub use certificate::{verify_certificate, CertVerdict, DadCertificate};
pub use group::{Element, GroupSpec, QuotientElement, QuotientKind};
pub use space::{ClopenSet, Space};
