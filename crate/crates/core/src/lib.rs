//! Numerical toolkit for general-monotone double sequences and the regular
//! convergence of double sine series.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for `f32`
//! and `f64`); the aliases below fix it to `f64`.

pub mod class_lab;
pub mod convergence;
pub mod counterexample;
pub mod error;
pub mod kernel;
pub mod scalar;
pub mod sequence;
pub mod sum;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub use class_lab::{
    divisor_embedding_check, embedding_check, membership_scan, rhs_col_bound, rhs_mixed_bound,
    rhs_row_bound, BoundFamily, BoundStatus, Component, MembershipScanner, Verdict,
};
pub use convergence::{
    check_col_tail_sup, check_lemma4_tail, check_lemma5_col_tail, check_lemma5_tail,
    check_loglog_decay, check_row_tail_sup, check_zak_sneider, double_partial_sum,
    log_integral_bound, point_remainder_sup, rational_point_regular_convergence,
    regular_remainder_sup, ConvergenceVerdict, DecayVerdict, FrontierSampling, TailStatus,
};
pub use counterexample::{
    dgm1_violation_ratio, divergence_certificate, prop_double_term, prop_single_term,
};
pub use kernel::{
    dirichlet_d, dirichlet_tilde, kernel_band_bound, lemma2_bound, sbp_decompose,
    sine_partial_sum, HalfBand, KernelPoint,
};
pub use sequence::{
    block_p_norm, col_block_p_norm, diff_0r, diff_r, diff_r0, diff_rr, double_block_p_norm,
    lp_norm, row_block_p_norm, DecayEnvelope,
};

pub type Complex64 = Cx<f64>;
pub type Sequence = sequence::SequenceRule<f64>;
pub type DoubleSequence = sequence::DoubleSequenceRule<f64>;
pub type Bound = class_lab::BoundSpec<f64>;
pub type Grid = convergence::GridSpec<f64>;
pub type Prop = counterexample::PropSequence<f64>;
pub type MembershipReport = class_lab::MembershipReport<f64>;
pub type InclusionReport = class_lab::InclusionReport<f64>;
pub type RemainderProfile = convergence::RemainderProfile<f64>;
pub type DecayReport = convergence::DecayReport<f64>;
pub type Certificate = counterexample::DivergenceCertificate<f64>;
pub type Sbp = kernel::SbpDecomposition<f64>;
