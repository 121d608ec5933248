//! Report documents. Every report carries the effective configuration, the
//! result, named invariant flags and a timing block; everything except the
//! timing block is a deterministic function of the configuration.

use std::collections::BTreeMap;

use mwumech_core::mechanism::{
    AuditReport, DeviationAudit, IntegralBranch, MechanismParams, MonteCarloCheck, PlayerAudit, PlayerStatus,
    Realization, WelfareStabilityCheck,
};
use mwumech_core::IntegralPoint;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Report<C, R> {
    pub command: &'static str,
    pub config: C,
    pub result: R,
    pub flags: BTreeMap<&'static str, bool>,
    pub passed: bool,
    pub timing: Timing,
}

impl<C, R> Report<C, R> {
    pub fn new(command: &'static str, config: C, result: R, flags: BTreeMap<&'static str, bool>) -> Self {
        let passed = flags.values().all(|f| *f);
        Self {
            command,
            config,
            result,
            flags,
            passed,
            timing: Timing::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub lambda: f64,
    pub point: Vec<u32>,
}

impl Term {
    pub fn new(lambda: f64, point: &IntegralPoint) -> Self {
        Self {
            lambda,
            point: point.coords().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsReport {
    pub epsilon0: f64,
    pub players: usize,
    pub solver_probability: f64,
    pub player_probability: f64,
    pub utility_slack: f64,
    pub activity_threshold: f64,
    pub dominating_price: f64,
    pub epsilon: f64,
    pub epsilon_lower_bound: f64,
    pub epsilon_upper_bound: f64,
}

impl From<&MechanismParams> for ParamsReport {
    fn from(p: &MechanismParams) -> Self {
        Self {
            epsilon0: p.epsilon0,
            players: p.players,
            solver_probability: p.solver_probability,
            player_probability: p.player_probability,
            utility_slack: p.utility_slack,
            activity_threshold: p.activity_threshold,
            dominating_price: p.dominating_price,
            epsilon: p.epsilon,
            epsilon_lower_bound: p.epsilon_lower_bound(),
            epsilon_upper_bound: p.epsilon_upper_bound(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerReport {
    pub player: usize,
    pub dominating_value: f64,
    pub others_dominating: f64,
    pub beta: f64,
    pub vcg_payment: f64,
    pub payment: f64,
    pub value: f64,
    pub active: bool,
}

impl PlayerReport {
    pub fn new(player: usize, s: &PlayerStatus) -> Self {
        Self {
            player,
            dominating_value: s.dominating_value,
            others_dominating: s.others_dominating,
            beta: s.beta,
            vcg_payment: s.vcg_payment,
            payment: s.payment,
            value: s.value,
            active: s.active,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeTerm {
    pub lambda: f64,
    pub point: Vec<u32>,
    pub payments: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub branch: usize,
    pub probability: f64,
    pub allocation: Vec<f64>,
    pub payments: Vec<f64>,
    pub reported_values: Vec<f64>,
    pub verifier_calls: usize,
    pub residual_norm: f64,
    pub terms: Vec<OutcomeTerm>,
}

impl BranchReport {
    pub fn new(branch: usize, b: &IntegralBranch) -> Self {
        Self {
            branch,
            probability: b.probability,
            allocation: b.fractional.coords().to_vec(),
            payments: b.payments.clone(),
            reported_values: b.reported_values.clone(),
            verifier_calls: b.decomposition.dominating.verifier_calls,
            residual_norm: b.decomposition.residual_norm,
            terms: b
                .terms()
                .iter()
                .zip(&b.realized_payments)
                .map(|((lambda, point), payments)| OutcomeTerm {
                    lambda: *lambda,
                    point: point.coords().to_vec(),
                    payments: payments.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizationReport {
    pub branch: usize,
    pub term: usize,
    pub allocation: Vec<u32>,
    pub payments: Vec<f64>,
}

impl From<&Realization> for RealizationReport {
    fn from(r: &Realization) -> Self {
        Self {
            branch: r.branch,
            term: r.term,
            allocation: r.allocation.coords().to_vec(),
            payments: r.payments.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerAuditReport {
    pub player: usize,
    pub active: bool,
    pub dominating_value: f64,
    pub others_dominating: f64,
    pub fractional_utility: f64,
    pub expected_utility: f64,
    pub negative_utility_probability: f64,
    pub ir_ok: bool,
    pub fractional_utility_floor: f64,
    pub utility_floor: f64,
    pub min_utility_ok: bool,
}

impl From<&PlayerAudit> for PlayerAuditReport {
    fn from(p: &PlayerAudit) -> Self {
        Self {
            player: p.player,
            active: p.active,
            dominating_value: p.dominating_value,
            others_dominating: p.others_dominating,
            fractional_utility: p.fractional_utility,
            expected_utility: p.expected_utility,
            negative_utility_probability: p.negative_utility_probability,
            ir_ok: p.ir_ok,
            fractional_utility_floor: p.fractional_utility_floor,
            utility_floor: p.utility_floor,
            min_utility_ok: p.min_utility_ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub player: usize,
    pub factor: f64,
    pub truthful_utility: f64,
    pub deviation_utility: f64,
    pub ratio: Option<f64>,
    pub truthful_ok: bool,
    pub min_payment: f64,
    pub gain_epsilon: f64,
    pub gain_beta: f64,
    pub gain_truthful_utility: f64,
    pub gain_deviation_utility: f64,
    pub gain_slack: f64,
    pub gain_ok: bool,
    pub stability_min_slack: f64,
    pub stability_ok: bool,
}

impl From<&DeviationAudit> for DeviationReport {
    fn from(d: &DeviationAudit) -> Self {
        let g = &d.deviation_gain;
        Self {
            player: d.player,
            factor: d.factor,
            truthful_utility: d.truthful_utility,
            deviation_utility: d.deviation_utility,
            ratio: d.ratio,
            truthful_ok: d.truthful_ok,
            min_payment: d.min_payment,
            gain_epsilon: g.epsilon,
            gain_beta: g.beta,
            gain_truthful_utility: g.truthful_utility,
            gain_deviation_utility: g.deviation_utility,
            gain_slack: g.slack,
            gain_ok: g.holds,
            stability_min_slack: d.stability.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min),
            stability_ok: d.stability.iter().all(|c| c.holds),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub deviation: Option<usize>,
    pub player: usize,
    pub candidate: &'static str,
    pub epsilon: f64,
    pub welfare: f64,
    pub candidate_welfare: f64,
    pub beta: f64,
    pub slack: f64,
    pub holds: bool,
}

impl From<&WelfareStabilityCheck> for StabilityReport {
    fn from(c: &WelfareStabilityCheck) -> Self {
        Self {
            deviation: c.deviation,
            player: c.player,
            candidate: c.candidate,
            epsilon: c.epsilon,
            welfare: c.welfare,
            candidate_welfare: c.candidate_welfare,
            beta: c.beta,
            slack: c.slack,
            holds: c.holds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub player: usize,
    pub samples: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub exact: f64,
    pub agrees: bool,
}

impl From<&MonteCarloCheck> for MonteCarloReport {
    fn from(m: &MonteCarloCheck) -> Self {
        Self {
            player: m.player,
            samples: m.samples,
            mean: m.mean,
            standard_error: m.standard_error,
            exact: m.exact,
            agrees: m.agrees,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditResult {
    pub params: ParamsReport,
    pub alpha_mode: &'static str,
    pub alpha: f64,
    pub decomposition_epsilon: f64,
    pub deviation_factors: Vec<f64>,
    pub inequality_epsilon: f64,
    pub optimum_fractional: f64,
    pub optimum_integral: f64,
    pub expected_welfare: f64,
    pub welfare_factor: f64,
    pub welfare_bound: f64,
    pub players: Vec<PlayerAuditReport>,
    pub deviations: Vec<DeviationReport>,
    pub stability_checks: usize,
    pub stability_min_slack: f64,
    pub stability_failures: Vec<StabilityReport>,
    /// Sampling cross-check; informational only.
    pub monte_carlo: Vec<MonteCarloReport>,
    pub monte_carlo_agrees: bool,
    pub branches: Vec<BranchReport>,
}

impl AuditResult {
    pub fn new(r: &AuditReport, deviation_factors: Vec<f64>, inequality_epsilon: f64) -> Self {
        let checks: Vec<&WelfareStabilityCheck> = r
            .stability
            .iter()
            .chain(r.deviations.iter().flat_map(|d| &d.stability))
            .collect();
        Self {
            params: ParamsReport::from(&r.params),
            alpha_mode: r.alpha_mode.name(),
            alpha: r.alpha,
            decomposition_epsilon: r.decomposition_epsilon,
            deviation_factors,
            inequality_epsilon,
            optimum_fractional: r.optimum_fractional,
            optimum_integral: r.optimum_integral,
            expected_welfare: r.expected_welfare,
            welfare_factor: r.welfare_factor,
            welfare_bound: r.welfare_factor * r.optimum_fractional,
            players: r.players.iter().map(PlayerAuditReport::from).collect(),
            deviations: r.deviations.iter().map(DeviationReport::from).collect(),
            stability_checks: checks.len(),
            stability_min_slack: checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min),
            stability_failures: checks
                .iter()
                .filter(|c| !c.holds)
                .map(|c| StabilityReport::from(*c))
                .collect(),
            monte_carlo: r.monte_carlo.iter().map(MonteCarloReport::from).collect(),
            monte_carlo_agrees: r.monte_carlo.iter().all(|m| m.agrees),
            branches: r
                .truthful
                .branches
                .iter()
                .enumerate()
                .map(|(k, b)| BranchReport::new(k, b))
                .collect(),
        }
    }
}
