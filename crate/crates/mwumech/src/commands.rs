//! The subcommands as functions from settings to reports.

use std::collections::BTreeMap;

use log::{debug, info, trace};
use mwumech_core::auction::{
    generate_instance, AlphaMode, AuctionInstance, AuctionVerifier, ExactWelfareSolver, InstanceKind, MwuWelfareSolver,
    WelfareSolver, MAX_EXACT_DIMENSION,
};
use mwumech_core::covering::{solve_covering, ExplicitCoveringOracle};
use mwumech_core::decomposition::convex_decompose;
use mwumech_core::lp::{binomial, DenseLp};
use mwumech_core::mechanism::{
    approx_fractional_mechanism, integral_conversion, AuditConfig, AuditPlan, MechanismParams,
};
use mwumech_core::numeric::{mwu_iteration_bound, FEAS_TOL};
use mwumech_core::packing::{solve_packing, ExplicitPackingOracle};
use mwumech_core::{
    verify_membership, FractionalPoint, IntegralPoint, IntegralityGapVerifier, PackingDomain, SeededRng,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::input::{parse_alpha_mode, DecomposeInput, InstanceInput, MatrixInput};
use crate::report::{AuditResult, BranchReport, ParamsReport, PlayerReport, RealizationReport, Report, Term};

pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_EPSILON0: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_INEQUALITY_EPSILON: f64 = 0.1;
pub const DEFAULT_SAMPLES: usize = 1000;

/// Command-line overrides; unset fields fall back to the input document and
/// then to the defaults above.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub epsilon0: Option<f64>,
    pub alpha_mode: Option<String>,
}

fn flags<const N: usize>(entries: [(&'static str, bool); N]) -> BTreeMap<&'static str, bool> {
    entries.into_iter().collect()
}

/// Reference optima come from vertex enumeration, which is only attempted
/// when the number of candidate bases stays small.
const MAX_REFERENCE_BASES: usize = 200_000;

fn reference_lp(m: usize, n: usize) -> bool {
    binomial(m + n, n) <= MAX_REFERENCE_BASES
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixConfig {
    pub input: String,
    pub epsilon: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverResult {
    pub m: usize,
    pub n: usize,
    pub x: Vec<f64>,
    pub objective: f64,
    pub min_load: f64,
    pub scale: f64,
    pub threshold: f64,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub support_size: usize,
    pub iteration_bound: usize,
    pub reference_optimum: Option<f64>,
    pub approximation_bound: Option<f64>,
}

pub fn solve_cover(
    doc: &MatrixInput,
    source: &str,
    o: &Overrides,
) -> Result<Report<MatrixConfig, CoverResult>, CliError> {
    let rows = doc.rows()?;
    let eps = o.epsilon.or(doc.epsilon).unwrap_or(DEFAULT_EPSILON);
    let kappa = doc.kappa.unwrap_or(1.0);
    let oracle = ExplicitCoveringOracle::new(rows.clone(), doc.b.clone(), doc.c.clone())?.with_kappa(kappa)?;
    let mut problem = oracle.into_problem()?;
    info!("covering: m = {}, n = {}, eps = {eps}, kappa = {kappa}", doc.m, doc.n);
    let sol = solve_covering(&mut problem, eps, kappa)?;
    debug!("covering: {} iterations, objective {}", sol.iterations, sol.objective);
    let mut x = vec![0.0; doc.n];
    for (j, v) in &sol.columns {
        x[*j] += v;
    }
    let reference = reference_lp(doc.m, doc.n)
        .then(|| DenseLp::covering(rows, doc.b.clone(), doc.c.clone()).and_then(|lp| lp.maximize()))
        .and_then(|r| r.ok())
        .map(|s| -s.value);
    let approximation_bound = reference.map(|z| (1.0 + 4.0 * eps) / kappa * z);
    let bound = mwu_iteration_bound(doc.m, eps);
    let mut f = flags([
        ("feasible", sol.min_load >= 1.0 - FEAS_TOL),
        ("iteration_bound", sol.iterations <= bound),
    ]);
    if let Some(b) = approximation_bound {
        f.insert("approximation", sol.objective <= b + FEAS_TOL);
    }
    let result = CoverResult {
        m: doc.m,
        n: doc.n,
        x,
        objective: sol.objective,
        min_load: sol.min_load,
        scale: sol.scale,
        threshold: sol.threshold,
        iterations: sol.iterations,
        oracle_calls: sol.oracle_calls,
        support_size: sol.support_size(),
        iteration_bound: bound,
        reference_optimum: reference,
        approximation_bound,
    };
    let config = MatrixConfig {
        input: source.to_owned(),
        epsilon: eps,
        kappa,
    };
    Ok(Report::new("solve-cover", config, result, f))
}

#[derive(Debug, Clone, Serialize)]
pub struct PackResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub upper_bound: f64,
    pub certified_epsilon: f64,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub max_load: f64,
    pub reference_optimum: Option<f64>,
    pub guarantee: Option<f64>,
}

pub fn solve_pack_matrix(
    doc: &MatrixInput,
    source: &str,
    o: &Overrides,
) -> Result<Report<MatrixConfig, PackResult>, CliError> {
    let rows = doc.rows()?;
    let eps = o.epsilon.or(doc.epsilon).unwrap_or(DEFAULT_EPSILON);
    let kappa = doc.kappa.unwrap_or(1.0);
    let oracle = ExplicitPackingOracle::new(rows.clone(), doc.b.clone(), doc.c.clone())?.with_kappa(kappa)?;
    let mut problem = oracle.into_problem()?;
    info!("packing: m = {}, n = {}, eps = {eps}, kappa = {kappa}", doc.m, doc.n);
    let sol = solve_packing(&mut problem, eps)?;
    let mut x = vec![0.0; doc.n];
    for (j, v) in &sol.columns {
        x[*j] += v;
    }
    let reference = reference_lp(doc.m, doc.n)
        .then(|| DenseLp::new(rows, doc.b.clone(), doc.c.clone()).and_then(|lp| lp.maximize()))
        .and_then(|r| r.ok())
        .map(|s| s.value);
    let guarantee = reference.map(|z| (1.0 - eps) / kappa * z);
    let mut f = flags([("feasible", sol.max_load <= 1.0 + FEAS_TOL)]);
    if let Some(g) = guarantee {
        f.insert("guarantee", sol.objective >= g - FEAS_TOL);
    }
    let result = PackResult {
        x,
        objective: sol.objective,
        upper_bound: sol.upper_bound,
        certified_epsilon: sol.certified_epsilon,
        iterations: sol.iterations,
        oracle_calls: sol.oracle_calls,
        max_load: sol.max_load,
        reference_optimum: reference,
        guarantee,
    };
    let config = MatrixConfig {
        input: source.to_owned(),
        epsilon: eps,
        kappa,
    };
    Ok(Report::new("solve-pack", config, result, f))
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonConfig {
    pub input: String,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WelfareResult {
    pub allocation: Vec<f64>,
    pub welfare: f64,
    pub certified_epsilon: f64,
    pub iterations: usize,
    pub max_item_load: f64,
    pub reference_optimum: Option<f64>,
    pub guarantee: Option<f64>,
}

pub fn solve_pack_auction(
    doc: &InstanceInput,
    source: &str,
    o: &Overrides,
) -> Result<Report<EpsilonConfig, WelfareResult>, CliError> {
    let instance = doc.instance()?;
    let eps = o.epsilon.or(doc.epsilon).unwrap_or(DEFAULT_EPSILON);
    let weights = instance.weights();
    let dom = instance.domain();
    info!(
        "auction packing: {} players, {} items, eps = {eps}",
        instance.num_players(),
        instance.num_items()
    );
    let sol = MwuWelfareSolver::new(instance.clone(), eps)?.solve(&weights)?;
    let x = sol.allocation.coords().to_vec();
    let welfare: f64 = weights.iter().zip(&x).map(|(w, v)| w * v).sum();
    let max_item_load = dom.item_loads(&x).into_iter().fold(0.0, f64::max);
    let reference = if dom.dimension() <= MAX_EXACT_DIMENSION {
        let s = ExactWelfareSolver::new(dom.clone())?.solve(&weights)?;
        Some(
            weights
                .iter()
                .zip(s.allocation.coords())
                .map(|(w, v)| w * v)
                .sum::<f64>(),
        )
    } else {
        None
    };
    let guarantee = reference.map(|z| (1.0 - eps) * z);
    let mut f = flags([("feasible", max_item_load <= 1.0 + FEAS_TOL)]);
    if let Some(g) = guarantee {
        f.insert("guarantee", welfare >= g - FEAS_TOL);
    }
    let result = WelfareResult {
        allocation: x,
        welfare,
        certified_epsilon: sol.certified_epsilon,
        iterations: sol.iterations,
        max_item_load,
        reference_optimum: reference,
        guarantee,
    };
    let config = EpsilonConfig {
        input: source.to_owned(),
        epsilon: eps,
    };
    Ok(Report::new("solve-pack", config, result, f))
}

/// A verifier advertising a weaker guarantee than the one it achieves.
struct WeakenedVerifier<'a> {
    inner: &'a AuctionVerifier,
    alpha: f64,
}

impl IntegralityGapVerifier for WeakenedVerifier<'_> {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn find(&self, weights: &[f64], x_star: &FractionalPoint) -> mwumech_core::Result<IntegralPoint> {
        self.inner.find(weights, x_star)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeConfig {
    pub input: String,
    pub epsilon: f64,
    pub alpha_mode: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeResult {
    pub alpha: f64,
    pub x_star: Vec<f64>,
    pub target: Vec<f64>,
    pub support_size: usize,
    pub terms: Vec<Term>,
    pub weight_sum: f64,
    pub verifier_calls: usize,
    pub covering_iterations: usize,
    pub dominating_terms: usize,
    pub added_terms: usize,
    pub conversion_steps: usize,
    pub residual_norm: f64,
    pub size_bound: Option<usize>,
    pub call_bound: Option<usize>,
}

pub fn decompose(
    doc: &DecomposeInput,
    source: &str,
    o: &Overrides,
) -> Result<Report<DecomposeConfig, DecomposeResult>, CliError> {
    let instance = doc.instance()?;
    let dom = instance.domain();
    let eps = o.epsilon.or(doc.epsilon).unwrap_or(DEFAULT_EPSILON);
    let mode = parse_alpha_mode(o.alpha_mode.as_deref().or(doc.alpha_mode.as_deref()).unwrap_or("exact"))?;
    let x_star = match &doc.x_star {
        Some(x) => {
            if !dom.contains_fractional(x, FEAS_TOL) {
                return Err(CliError::Input(format!(
                    "x_star must have {} non-negative entries with item loads at most 1",
                    dom.dimension()
                )));
            }
            FractionalPoint::new(x.iter().map(|v| v.max(0.0)).collect())?
        }
        None => {
            ExactWelfareSolver::new(dom.clone())?
                .solve(&instance.weights())?
                .allocation
        }
    };
    let verifier = AuctionVerifier::new(dom.clone(), mode)?;
    let alpha = match doc.alpha {
        Some(a) if !(a > 0.0 && a <= verifier.alpha()) => {
            return Err(CliError::Input(format!(
                "alpha = {a} must lie in (0, {}] for the {} verifier",
                verifier.alpha(),
                mode.name()
            )))
        }
        Some(a) => a,
        None => verifier.alpha(),
    };
    let weakened = WeakenedVerifier {
        inner: &verifier,
        alpha,
    };
    info!(
        "decompose: support {}, alpha = {alpha}, eps = {eps}",
        x_star.support().len()
    );
    let dec = convex_decompose(&x_star, &weakened, eps, &dom)?;
    let terms = &dec.decomposition.terms;
    let s = x_star.support().len();
    let per_row = (s >= 2).then(|| (eps.powi(-2) * (s as f64).ln()).ceil() as usize);
    let size_bound = per_row.map(|r| s * (1 + r));
    let call_bound = per_row.map(|r| s * r);
    let max_x = x_star.coords().iter().fold(0.0f64, |a, b| a.max(*b));
    let all_feasible = terms
        .iter()
        .map(|(_, p)| verify_membership(&dom, p))
        .collect::<mwumech_core::Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    let mut f = flags([
        ("exact", dec.residual_norm <= FEAS_TOL * (1.0 + max_x)),
        (
            "convex",
            terms.iter().all(|(l, _)| *l >= 0.0) && (dec.decomposition.weight_sum() - 1.0).abs() <= 1e-12,
        ),
        (
            "feasible",
            all_feasible && dec.conversion_steps.iter().all(|st| st.point_feasible),
        ),
        ("conversion_added_terms", dec.added_terms <= s.max(1)),
        (
            "conversion_progress",
            dec.conversion_steps
                .iter()
                .zip(&dec.step_weights)
                .all(|(st, w)| st.made_progress(*w)),
        ),
    ]);
    if let (Some(sb), Some(cb)) = (size_bound, call_bound) {
        f.insert("size_bound", terms.len() <= sb);
        f.insert("call_bound", dec.dominating.verifier_calls <= cb);
    }
    let result = DecomposeResult {
        alpha,
        x_star: x_star.coords().to_vec(),
        target: dec.target().coords().to_vec(),
        support_size: s,
        terms: terms.iter().map(|(l, p)| Term::new(*l, p)).collect(),
        weight_sum: dec.decomposition.weight_sum(),
        verifier_calls: dec.dominating.verifier_calls,
        covering_iterations: dec.dominating.covering_iterations,
        dominating_terms: dec.dominating.terms.len(),
        added_terms: dec.added_terms,
        conversion_steps: dec.conversion_steps.len(),
        residual_norm: dec.residual_norm,
        size_bound,
        call_bound,
    };
    let config = DecomposeConfig {
        input: source.to_owned(),
        epsilon: eps,
        alpha_mode: mode.name(),
    };
    Ok(Report::new("decompose", config, result, f))
}

#[derive(Debug, Clone, Serialize)]
pub struct MechanismConfig {
    pub input: String,
    pub epsilon0: f64,
    pub decomposition_epsilon: f64,
    pub alpha_mode: &'static str,
    pub seed: u64,
}

struct MechanismSettings {
    instance: AuctionInstance,
    mode: AlphaMode,
    config: MechanismConfig,
}

fn mechanism_settings(doc: &InstanceInput, source: &str, o: &Overrides) -> Result<MechanismSettings, CliError> {
    let instance = doc.instance()?;
    let mode = parse_alpha_mode(o.alpha_mode.as_deref().or(doc.alpha_mode.as_deref()).unwrap_or("exact"))?;
    let config = MechanismConfig {
        input: source.to_owned(),
        epsilon0: o.epsilon0.or(doc.epsilon0).unwrap_or(DEFAULT_EPSILON0),
        decomposition_epsilon: o.epsilon.or(doc.epsilon).unwrap_or(DEFAULT_EPSILON),
        alpha_mode: mode.name(),
        seed: o.seed.or(doc.seed).unwrap_or(DEFAULT_SEED),
    };
    Ok(MechanismSettings { instance, mode, config })
}

#[derive(Debug, Clone, Serialize)]
pub struct MechanismRunResult {
    pub params: ParamsReport,
    pub alpha: f64,
    pub optimum_fractional: f64,
    pub players: Vec<PlayerReport>,
    pub branches: Vec<BranchReport>,
    pub expected_welfare: f64,
    pub expected_utilities: Vec<f64>,
    pub realization: RealizationReport,
}

pub fn mechanism_run(
    doc: &InstanceInput,
    source: &str,
    o: &Overrides,
) -> Result<Report<MechanismConfig, MechanismRunResult>, CliError> {
    let MechanismSettings { instance, mode, config } = mechanism_settings(doc, source, o)?;
    let dom = instance.domain();
    let w = instance.weights();
    let params = MechanismParams::new(config.epsilon0, instance.num_players())?;
    let solver = ExactWelfareSolver::new(dom.clone())?;
    let verifier = AuctionVerifier::new(dom.clone(), mode)?;
    info!(
        "mechanism run: {} players, {} items, eps0 = {}, alpha mode {}",
        instance.num_players(),
        instance.num_items(),
        config.epsilon0,
        mode.name()
    );
    let optimum = solver.solve(&w)?;
    let fractional = approx_fractional_mechanism(&dom, &w, &solver, &params)?;
    let integral = integral_conversion(&fractional, &dom, &w, &verifier, config.decomposition_epsilon)?;
    let realization = integral.realize(&SeededRng::new(config.seed), 0);
    debug!("realized branch {} term {}", realization.branch, realization.term);

    let max_x =
        |b: &mwumech_core::mechanism::IntegralBranch| b.fractional.coords().iter().fold(0.0f64, |a, v| a.max(*v));
    let probability_sum: f64 = integral.branches.iter().map(|b| b.probability).sum();
    let f = flags([
        ("no_positive_transfer", integral.min_payment() >= 0.0),
        ("probabilities_sum_to_one", (probability_sum - 1.0).abs() <= 1e-12),
        (
            "decompositions_exact",
            integral
                .branches
                .iter()
                .all(|b| b.decomposition.residual_norm <= FEAS_TOL * (1.0 + max_x(b))),
        ),
        ("realization_feasible", dom.contains(&realization.allocation)),
    ]);
    let result = MechanismRunResult {
        params: ParamsReport::from(&params),
        alpha: integral.alpha,
        optimum_fractional: w.iter().zip(optimum.allocation.coords()).map(|(a, b)| a * b).sum(),
        players: fractional
            .players
            .iter()
            .enumerate()
            .map(|(i, s)| PlayerReport::new(i, s))
            .collect(),
        branches: integral
            .branches
            .iter()
            .enumerate()
            .map(|(k, b)| BranchReport::new(k, b))
            .collect(),
        expected_welfare: integral.expected_welfare(&w),
        expected_utilities: (0..instance.num_players())
            .map(|i| integral.expected_utility(&dom, i, &w))
            .collect(),
        realization: RealizationReport::from(&realization),
    };
    Ok(Report::new("mechanism run", config, result, f))
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditConfigEcho {
    #[serde(flatten)]
    pub mechanism: MechanismConfig,
    pub monte_carlo_samples: usize,
}

pub fn mechanism_audit(
    doc: &InstanceInput,
    source: &str,
    o: &Overrides,
    samples: usize,
) -> Result<Report<AuditConfigEcho, AuditResult>, CliError> {
    let MechanismSettings { instance, mode, config } = mechanism_settings(doc, source, o)?;
    let audit = AuditConfig {
        epsilon0: config.epsilon0,
        decomposition_epsilon: config.decomposition_epsilon,
        inequality_epsilon: DEFAULT_INEQUALITY_EPSILON,
        monte_carlo_samples: samples,
        seed: config.seed,
        ..AuditConfig::default()
    };
    let factors = audit.deviation_factors.clone();
    info!(
        "mechanism audit: {} players, {} deviation factors, alpha mode {}",
        instance.num_players(),
        factors.len(),
        mode.name()
    );
    let plan = AuditPlan::new(&instance, mode, audit)?;
    let tasks = plan.tasks();
    let results = (0..tasks.len())
        .into_par_iter()
        .map(|k| {
            let r = plan.run_task(k);
            if let Ok(d) = &r {
                trace!(
                    "deviation {k}: player {} factor {} truthful {} deviating {}",
                    d.player,
                    d.factor,
                    d.truthful_utility,
                    d.deviation_utility
                );
            }
            r
        })
        .collect::<mwumech_core::Result<Vec<_>>>()?;
    let report = plan.finish(results)?;
    let f = report.flags.named().into_iter().collect();
    let result = AuditResult::new(&report, factors, DEFAULT_INEQUALITY_EPSILON);
    let config = AuditConfigEcho {
        mechanism: config,
        monte_carlo_samples: samples,
    };
    Ok(Report::new("mechanism audit", config, result, f))
}

/// Flat CSV projection of the deviation table.
pub fn audit_csv(report: &Report<AuditConfigEcho, AuditResult>) -> Result<String, CliError> {
    use crate::json::format_f64;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "player",
        "factor",
        "truthful_utility",
        "deviation_utility",
        "ratio",
        "truthful_ok",
        "min_payment",
        "gain_slack",
        "gain_ok",
        "stability_min_slack",
        "stability_ok",
    ];
    let io = |e: csv::Error| CliError::Failure(e.to_string());
    w.write_record(header).map_err(io)?;
    for d in &report.result.deviations {
        w.write_record([
            d.player.to_string(),
            format_f64(d.factor),
            format_f64(d.truthful_utility),
            format_f64(d.deviation_utility),
            d.ratio.map(format_f64).unwrap_or_default(),
            d.truthful_ok.to_string(),
            format_f64(d.min_payment),
            format_f64(d.gain_slack),
            d.gain_ok.to_string(),
            format_f64(d.stability_min_slack),
            d.stability_ok.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct GenConfig {
    pub kind: &'static str,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// A generated instance document; the settings used are folded into the
/// instance so that it can be fed straight back to `mechanism`.
pub fn gen(kind: InstanceKind, n: usize, m: usize, o: &Overrides) -> Result<InstanceInput, CliError> {
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    let instance = generate_instance(kind, n, m, seed)?;
    info!("generated {} instance with {n} players and {m} items", kind.name());
    let mut doc = InstanceInput::from_instance(&instance);
    doc.seed = Some(seed);
    doc.epsilon0 = o.epsilon0;
    doc.epsilon = o.epsilon;
    if let Some(mode) = &o.alpha_mode {
        doc.alpha_mode = Some(parse_alpha_mode(mode)?.name().to_owned());
    }
    Ok(doc)
}
