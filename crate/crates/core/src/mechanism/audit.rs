use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::fractional::{
    approx_fractional_mechanism, dominating_value, others_dominating_values, others_value, without_player,
};
use super::integral::{integral_conversion, IntegralMechanism};
use super::params::MechanismParams;
use crate::auction::{
    AlphaMode, AuctionDomain, AuctionInstance, AuctionVerifier, ExactWelfareSolver, MwuWelfareSolver, WelfareSolution,
    WelfareSolver,
};
use crate::model::{FractionalPoint, IntegralityGapVerifier, PackingDomain};
use crate::numeric::{self, FEAS_TOL};
use crate::rng::SeededRng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub epsilon0: f64,
    /// Accuracy of the convex decompositions.
    pub decomposition_epsilon: f64,
    /// Each deviation reports the player's values multiplied by a factor.
    pub deviation_factors: Vec<f64>,
    /// Accuracy of the MWU solver used for the inequality checks.
    pub inequality_epsilon: f64,
    /// Samples per player for the Monte Carlo cross-check; zero disables it.
    pub monte_carlo_samples: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            epsilon0: 0.5,
            decomposition_epsilon: 0.25,
            deviation_factors: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
            inequality_epsilon: 0.1,
            monte_carlo_samples: 1000,
            seed: 0,
        }
    }
}

/// `v(x) >= v(x̂) - beta_i - eps v_i(x̂)` for one candidate `x̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareStabilityCheck {
    /// Index of the deviation whose report was used, or `None` for the
    /// truthful report.
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

/// `U_i(v̄) >= U_i(v) - eps v̄_i(x) - 3 beta_i` for the sub-mechanism alone.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationGainCheck {
    pub epsilon: f64,
    pub beta: f64,
    pub truthful_utility: f64,
    pub deviation_utility: f64,
    pub true_value_of_deviation: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationAudit {
    pub player: usize,
    pub factor: f64,
    pub truthful_utility: f64,
    pub deviation_utility: f64,
    /// `E[U(truth)] / E[U(dev)]`, or `None` when the deviation utility is not
    /// positive.
    pub ratio: Option<f64>,
    pub truthful_ok: bool,
    pub min_payment: f64,
    pub deviation_gain: DeviationGainCheck,
    pub stability: Vec<WelfareStabilityCheck>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerAudit {
    pub player: usize,
    pub active: bool,
    pub dominating_value: f64,
    pub others_dominating: f64,
    pub fractional_utility: f64,
    pub expected_utility: f64,
    pub negative_utility_probability: f64,
    pub ir_ok: bool,
    /// `(1 - utility_slack) * player_probability * dominating value`.
    pub fractional_utility_floor: f64,
    /// The floor times `alpha / (1 + 4 eps)`.
    pub utility_floor: f64,
    pub min_utility_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloCheck {
    pub player: usize,
    pub samples: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub exact: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditFlags {
    pub no_positive_transfer: bool,
    pub individual_rationality: bool,
    pub truthfulness: bool,
    pub welfare: bool,
    pub min_utility: bool,
    pub welfare_stability: bool,
    pub deviation_gain: bool,
}

impl AuditFlags {
    pub fn all(&self) -> bool {
        self.no_positive_transfer
            && self.individual_rationality
            && self.truthfulness
            && self.welfare
            && self.min_utility
            && self.welfare_stability
            && self.deviation_gain
    }

    pub fn named(&self) -> [(&'static str, bool); 7] {
        [
            ("no_positive_transfer", self.no_positive_transfer),
            ("individual_rationality", self.individual_rationality),
            ("truthfulness", self.truthfulness),
            ("welfare", self.welfare),
            ("min_utility", self.min_utility),
            ("welfare_stability", self.welfare_stability),
            ("deviation_gain", self.deviation_gain),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub params: MechanismParams,
    pub alpha_mode: AlphaMode,
    pub alpha: f64,
    pub decomposition_epsilon: f64,
    pub optimum_fractional: f64,
    pub optimum_integral: f64,
    pub expected_welfare: f64,
    /// `alpha (1 - eps)(1 - eps0) / (1 + 4 eps_dec)`.
    pub welfare_factor: f64,
    pub truthful: IntegralMechanism,
    pub players: Vec<PlayerAudit>,
    pub deviations: Vec<DeviationAudit>,
    pub stability: Vec<WelfareStabilityCheck>,
    pub monte_carlo: Vec<MonteCarloCheck>,
    pub flags: AuditFlags,
}

struct MwuRuns {
    main: WelfareSolution,
    without: Vec<WelfareSolution>,
}

/// Precomputed state of an audit. Deviations are independent tasks so a
/// caller may run them in any order or in parallel and pass the results to
/// [`finish`](Self::finish) in task order.
pub struct AuditPlan {
    instance: AuctionInstance,
    domain: AuctionDomain,
    weights: Vec<f64>,
    config: AuditConfig,
    params: MechanismParams,
    verifier: AuctionVerifier,
    exact: ExactWelfareSolver,
    mwu: MwuWelfareSolver,
    truthful: IntegralMechanism,
    truthful_runs: MwuRuns,
    optimum: FractionalPoint,
}

impl AuditPlan {
    pub fn new(instance: &AuctionInstance, alpha_mode: AlphaMode, config: AuditConfig) -> Result<Self> {
        let domain = instance.domain();
        let weights = instance.weights();
        let params = MechanismParams::new(config.epsilon0, instance.num_players())?;
        if config.deviation_factors.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::InvalidArgument("deviation factors must be non-negative".into()));
        }
        let verifier = AuctionVerifier::new(domain.clone(), alpha_mode)?;
        let exact = ExactWelfareSolver::new(domain.clone())?;
        let mwu = MwuWelfareSolver::new(instance.clone(), config.inequality_epsilon)?;
        let first = exact.solve(&weights)?;
        if exact.solve(&weights)? != first {
            return Err(Error::Audit("welfare solver is not a function of the report".into()));
        }
        let fractional = approx_fractional_mechanism(&domain, &weights, &exact, &params)?;
        let truthful = integral_conversion(&fractional, &domain, &weights, &verifier, config.decomposition_epsilon)?;
        let truthful_runs = mwu_runs(&mwu, &domain, &weights)?;
        Ok(Self {
            instance: instance.clone(),
            domain,
            weights,
            config,
            params,
            verifier,
            exact,
            mwu,
            truthful,
            truthful_runs,
            optimum: first.allocation,
        })
    }

    pub fn params(&self) -> &MechanismParams {
        &self.params
    }

    pub fn truthful(&self) -> &IntegralMechanism {
        &self.truthful
    }

    /// `(player, factor)` pairs in task order.
    pub fn tasks(&self) -> Vec<(usize, f64)> {
        (0..self.instance.num_players())
            .flat_map(|i| self.config.deviation_factors.iter().map(move |f| (i, *f)))
            .collect()
    }

    fn deviation_report(&self, player: usize, factor: f64) -> Vec<f64> {
        let block = self.domain.block(player);
        self.weights
            .iter()
            .enumerate()
            .map(|(c, w)| if block.contains(&c) { w * factor } else { *w })
            .collect()
    }

    pub fn run_task(&self, k: usize) -> Result<DeviationAudit> {
        let tasks = self.tasks();
        let &(i, factor) = tasks
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("no deviation task {k}")))?;
        let report = self.deviation_report(i, factor);
        let fractional = approx_fractional_mechanism(&self.domain, &report, &self.exact, &self.params)?;
        let mechanism = integral_conversion(
            &fractional,
            &self.domain,
            &report,
            &self.verifier,
            self.config.decomposition_epsilon,
        )?;
        let truthful_utility = self.truthful.expected_utility(&self.domain, i, &self.weights);
        let deviation_utility = mechanism.expected_utility(&self.domain, i, &self.weights);
        let truthful_ok = truthful_utility >= (1.0 - self.params.epsilon0) * deviation_utility - FEAS_TOL;
        let ratio = (deviation_utility > 0.0).then(|| truthful_utility / deviation_utility);

        let main = self.mwu.solve(&report)?;
        let deviation_gain = self.deviation_gain(i, &report, &main);
        let runs = MwuRuns {
            main,
            without: self.truthful_runs.without.clone(),
        };
        let stability = self.stability_checks(Some(k), &report, &runs)?;
        Ok(DeviationAudit {
            player: i,
            factor,
            truthful_utility,
            deviation_utility,
            ratio,
            truthful_ok,
            min_payment: mechanism.min_payment(),
            deviation_gain,
            stability,
        })
    }

    /// Sub-mechanism inequality for player `i` deviating to `report`; the
    /// slack uses the largest certified error among the solver runs involved.
    fn deviation_gain(&self, i: usize, report: &[f64], deviation: &WelfareSolution) -> DeviationGainCheck {
        let truth = &self.truthful_runs.main;
        let removed = &self.truthful_runs.without[i];
        let epsilon = truth
            .certified_epsilon
            .max(removed.certified_epsilon)
            .max(deviation.certified_epsilon);
        let others = others_dominating_values(&self.domain, &self.weights);
        let beta = epsilon * others[i];
        let payment = |weights: &[f64], x: &FractionalPoint| {
            let vcg = others_value(&self.domain, weights, i, removed.allocation.coords())
                - others_value(&self.domain, weights, i, x.coords());
            (vcg - beta).max(0.0)
        };
        let truthful_utility = self.domain.player_value(i, &self.weights, truth.allocation.coords())
            - payment(&self.weights, &truth.allocation);
        let true_value_of_deviation = self
            .domain
            .player_value(i, &self.weights, deviation.allocation.coords());
        let deviation_utility = true_value_of_deviation - payment(report, &deviation.allocation);
        let slack = truthful_utility - (deviation_utility - epsilon * true_value_of_deviation - 3.0 * beta);
        DeviationGainCheck {
            epsilon,
            beta,
            truthful_utility,
            deviation_utility,
            true_value_of_deviation,
            slack,
            holds: slack >= -FEAS_TOL,
        }
    }

    fn stability_checks(
        &self,
        deviation: Option<usize>,
        report: &[f64],
        runs: &MwuRuns,
    ) -> Result<Vec<WelfareStabilityCheck>> {
        let epsilon = runs.main.certified_epsilon;
        let welfare = numeric::dot(report, runs.main.allocation.coords());
        let others = others_dominating_values(&self.domain, report);
        let optimum = self.exact.solve(report)?.allocation;
        let zero = FractionalPoint::zeros(self.domain.dimension());
        let mut checks = Vec::new();
        for i in 0..self.domain.num_players() {
            let own = FractionalPoint::new(self.domain.dominating_allocation(i).to_f64())?;
            let removed = self.mwu.solve(&without_player(&self.domain, report, i))?;
            let candidates: [(&'static str, &FractionalPoint); 4] = [
                ("optimum", &optimum),
                ("dominating", &own),
                ("without_player", &removed.allocation),
                ("zero", &zero),
            ];
            let beta = epsilon * others[i];
            for (name, x) in candidates {
                let candidate_welfare = numeric::dot(report, x.coords());
                let slack =
                    welfare - (candidate_welfare - beta - epsilon * self.domain.player_value(i, report, x.coords()));
                checks.push(WelfareStabilityCheck {
                    deviation,
                    player: i,
                    candidate: name,
                    epsilon,
                    welfare,
                    candidate_welfare,
                    beta,
                    slack,
                    holds: slack >= -FEAS_TOL,
                });
            }
        }
        Ok(checks)
    }

    pub fn finish(&self, deviations: Vec<DeviationAudit>) -> Result<AuditReport> {
        let expected = self.tasks().len();
        if deviations.len() != expected {
            return Err(Error::Internal(format!(
                "expected {expected} deviation results, got {}",
                deviations.len()
            )));
        }
        let dom = &self.domain;
        let w = &self.weights;
        let params = &self.params;
        let scale = self.truthful.scale();
        let players: Vec<PlayerAudit> = self
            .truthful
            .fractional
            .players
            .iter()
            .enumerate()
            .map(|(i, status)| {
                let fractional_utility = self.truthful.fractional.expected_utility(dom, i, w);
                let expected_utility = self.truthful.expected_utility(dom, i, w);
                let negative = self.truthful.negative_utility_probability(dom, i, w);
                let floor = (1.0 - params.utility_slack) * params.player_probability * dominating_value(dom, w, i);
                PlayerAudit {
                    player: i,
                    active: status.active,
                    dominating_value: status.dominating_value,
                    others_dominating: status.others_dominating,
                    fractional_utility,
                    expected_utility,
                    negative_utility_probability: negative,
                    ir_ok: negative <= 1.0 - params.solver_probability + 1e-12,
                    fractional_utility_floor: floor,
                    utility_floor: scale * floor,
                    min_utility_ok: fractional_utility >= floor - FEAS_TOL
                        && expected_utility >= scale * floor - FEAS_TOL,
                }
            })
            .collect();

        let optimum_fractional = numeric::dot(w, self.optimum.coords());
        let optimum_integral = dom.integral_points()?.iter().map(|x| x.dot(w)).fold(0.0, f64::max);
        let expected_welfare = self.truthful.expected_welfare(w);
        let welfare_factor = scale * (1.0 - params.epsilon) * (1.0 - params.epsilon0);
        let stability = self.stability_checks(None, w, &self.truthful_runs)?;
        let monte_carlo = self.monte_carlo();

        let flags = AuditFlags {
            no_positive_transfer: self.truthful.min_payment() >= 0.0 && deviations.iter().all(|d| d.min_payment >= 0.0),
            individual_rationality: players.iter().all(|p| p.ir_ok),
            truthfulness: deviations.iter().all(|d| d.truthful_ok),
            welfare: expected_welfare >= welfare_factor * optimum_fractional - FEAS_TOL,
            min_utility: players.iter().all(|p| p.min_utility_ok),
            welfare_stability: stability
                .iter()
                .chain(deviations.iter().flat_map(|d| &d.stability))
                .all(|c| c.holds),
            deviation_gain: deviations.iter().all(|d| d.deviation_gain.holds),
        };
        Ok(AuditReport {
            params: *params,
            alpha_mode: self.verifier.mode(),
            alpha: self.verifier.alpha(),
            decomposition_epsilon: self.config.decomposition_epsilon,
            optimum_fractional,
            optimum_integral,
            expected_welfare,
            welfare_factor,
            truthful: self.truthful.clone(),
            players,
            deviations,
            stability,
            monte_carlo,
            flags,
        })
    }

    fn monte_carlo(&self) -> Vec<MonteCarloCheck> {
        let samples = self.config.monte_carlo_samples;
        if samples == 0 {
            return Vec::new();
        }
        let rng = SeededRng::new(self.config.seed);
        let draws: Vec<_> = (0..samples as u64).map(|k| self.truthful.realize(&rng, k)).collect();
        (0..self.domain.num_players())
            .map(|i| {
                let utilities: Vec<f64> = draws
                    .iter()
                    .map(|r| self.domain.player_value_integral(i, &self.weights, &r.allocation) - r.payments[i])
                    .collect();
                let n = samples as f64;
                let mean = utilities.iter().sum::<f64>() / n;
                let var = if samples > 1 {
                    utilities.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                let standard_error = numeric::sqrt(var / n);
                let exact = self.truthful.expected_utility(&self.domain, i, &self.weights);
                MonteCarloCheck {
                    player: i,
                    samples,
                    mean,
                    standard_error,
                    exact,
                    agrees: (mean - exact).abs() <= 3.0 * standard_error + FEAS_TOL,
                }
            })
            .collect()
    }
}

fn mwu_runs(solver: &MwuWelfareSolver, domain: &AuctionDomain, weights: &[f64]) -> Result<MwuRuns> {
    let main = solver.solve(weights)?;
    let without = (0..domain.num_players())
        .map(|i| solver.solve(&without_player(domain, weights, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MwuRuns { main, without })
}

/// Runs every deviation in order and assembles the report.
pub fn audit_truthfulness(
    instance: &AuctionInstance,
    alpha_mode: AlphaMode,
    config: AuditConfig,
) -> Result<AuditReport> {
    let plan = AuditPlan::new(instance, alpha_mode, config)?;
    let results = (0..plan.tasks().len())
        .map(|k| plan.run_task(k))
        .collect::<Result<Vec<_>>>()?;
    plan.finish(results)
}
