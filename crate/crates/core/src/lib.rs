//! Entropy of expansive principal algebraic actions over concrete residually
//! finite amenable groups.
//!
//! For an integer group-ring element f, the action on X_f (the kernel of
//! right convolution by f inside the full torus shift) has entropy equal to
//! the logarithm of the Fuglede-Kadison determinant of f, and that
//! determinant is the limit of ordinary finite determinants along any chain
//! of finite quotients shrinking to the identity. This crate computes those
//! finite determinants four ways and makes them argue with each other:
//!
//! * `dense` - pivoted log-determinants of the materialized quotient operator;
//! * `exact` - fraction-free integer determinants counting periodic points;
//! * `cheb`  - Chebyshev approximation of log evaluated through group-ring
//!   convolutions, which scales past the dense cap and also runs directly on
//!   the infinite group;
//! * `mahler` - for Z^d, torus quadrature of log |f-hat| (the logarithmic
//!   Mahler measure).
//!
//! Alongside the determinant pipeline live the dynamical verification
//! surfaces: certified L^1 invertibility (equivalently, expansiveness),
//! homoclinic points and their decay, specification-style gluing, and exact
//! enumeration of periodic points via Smith normal form.

pub mod cheb;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod group;
pub mod invert;
pub mod linalg;
pub mod mahler;
pub mod quotient;
pub mod report;
pub mod ring;
pub mod transfer;

pub use cheb::{
    chebyshev_log, entropy_cheb_auto, entropy_cheb_direct, entropy_cheb_quotient,
    spectral_interval, trace_identity_coeff, trace_stabilization, ChebEstimate, LogPolynomial,
    SpectralInterval, StabilizationReport,
};
pub use dynamics::{
    check_pairwise_separation, enumerate_fixed_points, homoclinic_point, lift_periodic,
    lift_window, specification_glue, xi_map, xi_periodic_exact, FixEnumeration, FixedPointGroup,
    GlueResult, PeriodicPoint, TorusPoint,
};
pub use entropy::{
    entropy_at_level, entropy_bounds, entropy_converge, fixed_points_exact, logdet_dense,
    separated_lower_bound, Convergence, EntropyBracket, FixCount, LogDet, SeparationDemo, StopRule,
};
pub use error::{Error, Result};
pub use group::{word_ball, word_ball_lengths, Group, GroupDescriptor, GroupElement};
pub use invert::{
    certify_invertible, certify_invertible_with, decay_profile, detect_noninvertible, l1_inverse,
    l1_inverse_best_effort, DecayProfile, InvertibilityCertificate, Route, TruncatedInverse,
    Verdict,
};
pub use mahler::{
    mahler_quadrature, wiener_invertibility, MahlerEstimate, TorusPolynomial, WienerReport,
    WienerVerdict,
};
pub use quotient::{verify_chain_separation, FiniteQuotient, QuotientChain};
pub use report::{CertificateSnapshot, EntropyReport, LevelRow, MethodTag};
pub use ring::{eval_int_poly, Coeff, RingElement};
pub use transfer::{fibre_integrate, QuotientOperator, DENSE_CAP};
