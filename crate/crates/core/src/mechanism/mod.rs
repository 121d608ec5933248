//! Randomized auction mechanisms built on a fractional welfare solver and a
//! convex decomposition of its allocation.

mod audit;
mod fractional;
mod integral;
mod params;

pub use audit::{
    audit_truthfulness, AuditConfig, AuditFlags, AuditPlan, AuditReport, DeviationAudit, DeviationGainCheck,
    MonteCarloCheck, PlayerAudit, WelfareStabilityCheck,
};
pub use fractional::{
    approx_fractional_mechanism, dominating_value, fractional_vcg, others_dominating_values, others_value,
    run_sub_mechanism, sample_index, without_player, FractionalBranch, FractionalMechanism, PlayerStatus, SubMechanism,
    VcgOutcome,
};
pub use integral::{
    exact_ls_mechanism, integral_conversion, scaled_payment, IntegralBranch, IntegralMechanism, LsOutcome, Realization,
};
pub use params::MechanismParams;

/// Reported values at or below this count as zero when scaling payments.
pub const VALUE_FLOOR: f64 = 1e-12;
