//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Reference optima come from the vertex enumerator below, which shares no
//! code with the library.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mwumech_core::auction::{
    generate_instance, AlphaMode, AuctionDomain, AuctionInstance, AuctionVerifier, InstanceKind, MwuWelfareSolver,
    WelfareSolver,
};
use mwumech_core::covering::{solve_covering, ExplicitCoveringOracle};
use mwumech_core::decomposition::{convex_decompose, Decomposition};
use mwumech_core::mechanism::{audit_truthfulness, AuditConfig, AuditReport, MechanismParams};
use mwumech_core::{FractionalPoint, IntegralPoint, IntegralityGapVerifier, PackingDomain, SeededRng};
use rand::Rng;

const SEED: u64 = 20240611;
const TOL: f64 = 1e-9;

/// Result of one criterion: verdict, failure notes and a digest of every
/// number it computed.
#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    digest: String,
    checks: usize,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 8 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    fn record(&mut self, values: &[f64]) {
        for v in values {
            write!(self.digest, "{:016x} ", v.to_bits()).unwrap();
        }
        self.digest.push('\n');
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Reference LP solver

/// `max c.x` over `{rows x <= rhs, x >= 0}` by enumerating every basic
/// solution. Returns the optimal value and a maximiser.
fn lp_max(rows: &[Vec<f64>], rhs: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    let m = rows.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = basic_solution(rows, rhs, n, &chosen) {
            let feasible = x.iter().all(|v| *v >= -TOL)
                && rows
                    .iter()
                    .zip(rhs)
                    .all(|(r, b)| dot(r, &x) <= b + TOL * (1.0 + b.abs()));
            if feasible {
                let value = dot(c, &x);
                if best.as_ref().map_or(true, |(bv, _)| value > *bv) {
                    best = Some((value, x));
                }
            }
        }
        if !next_combination(&mut chosen, m + n) {
            return best;
        }
    }
}

fn next_combination(c: &mut [usize], total: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < total - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the square system where constraint `k < m` is tight and `k >= m`
/// fixes `x_{k-m} = 0`.
fn basic_solution(rows: &[Vec<f64>], rhs: &[f64], n: usize, chosen: &[usize]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut a: Vec<Vec<f64>> = chosen
        .iter()
        .map(|&k| {
            let mut r = if k < m { rows[k].clone() } else { unit(n, k - m) };
            r.push(if k < m { rhs[k] } else { 0.0 });
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[j] = 1.0;
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Item rows of the auction polytope, built from the bids.
fn auction_rows(dom: &AuctionDomain) -> Vec<Vec<f64>> {
    (0..dom.num_items())
        .map(|j| {
            dom.bids()
                .iter()
                .map(|b| if b.items >> j & 1 == 1 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

fn welfare_optimum(dom: &AuctionDomain, w: &[f64]) -> (f64, Vec<f64>) {
    let rows = auction_rows(dom);
    lp_max(&rows, &vec![1.0; rows.len()], w).expect("the auction polytope contains zero")
}

fn integral_feasible(dom: &AuctionDomain, x: &IntegralPoint) -> bool {
    let mut used = 0u64;
    for (bid, &k) in dom.bids().iter().zip(x.coords()) {
        match k {
            0 => {}
            1 if used & bid.items == 0 => used |= bid.items,
            _ => return false,
        }
    }
    true
}

fn block_value(dom: &AuctionDomain, w: &[f64], i: usize, x: &[f64]) -> f64 {
    dom.block(i).map(|c| w[c] * x[c]).sum()
}

fn others_value(dom: &AuctionDomain, w: &[f64], i: usize, x: &[f64]) -> f64 {
    (0..dom.num_players())
        .filter(|&k| k != i)
        .map(|k| block_value(dom, w, k, x))
        .sum()
}

/// Best value player `i` can get anywhere in the polytope.
fn dominating_value(dom: &AuctionDomain, w: &[f64], i: usize) -> f64 {
    dom.block(i).map(|c| w[c]).sum()
}

/// Per-row threshold with the single-row convention `max(ln s / eps^2, 1)`.
fn rounds(rows: usize, eps: f64) -> usize {
    ((rows as f64).ln() / (eps * eps)).max(1.0).ceil() as usize
}

// ---------------------------------------------------------------------------
// Criterion 1: covering solver

fn criterion_covering(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    let mut rng = SeededRng::new(seed).stream("acceptance-covering");
    for instance in 0..50 {
        let m = rng.random_range(1..=6usize);
        let n = rng.random_range(1..=6usize);
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0.0..=5.0)).collect())
            .collect();
        let b: Vec<f64> = (0..m).map(|_| 2.0 - rng.random_range(0.0..2.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| 2.0 - rng.random_range(0.0..2.0)).collect();
        let negated: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let nb: Vec<f64> = b.iter().map(|v| -v).collect();
        let nc: Vec<f64> = c.iter().map(|v| -v).collect();
        let z_star = -lp_max(&negated, &nb, &nc).expect("covering instance is feasible").0;
        for eps in [0.5, 0.25, 0.1] {
            let mut problem = ExplicitCoveringOracle::new(a.clone(), b.clone(), c.clone())
                .and_then(|o| o.into_problem())
                .expect("valid instance");
            let sol = match solve_covering(&mut problem, eps, 1.0) {
                Ok(s) => s,
                Err(e) => {
                    out.check(false, || format!("instance {instance} eps {eps}: {e}"));
                    continue;
                }
            };
            let mut x = vec![0.0; n];
            for (j, v) in &sol.columns {
                x[*j] += v;
            }
            let min_load = a
                .iter()
                .zip(&b)
                .map(|(r, bi)| dot(r, &x) / bi)
                .fold(f64::INFINITY, f64::min);
            let cost = dot(&c, &x);
            out.check(min_load >= 1.0 - TOL, || {
                format!("instance {instance} eps {eps}: min load {min_load}")
            });
            if m >= 2 {
                let bound = m * ((m as f64).ln() / (eps * eps)).ceil() as usize;
                out.check(sol.iterations <= bound, || {
                    format!("instance {instance} eps {eps}: {} iterations > {bound}", sol.iterations)
                });
            }
            out.check(cost <= (1.0 + 4.0 * eps) * z_star + TOL, || {
                format!(
                    "instance {instance} eps {eps}: cost {cost} vs (1+4eps) z* = {}",
                    (1.0 + 4.0 * eps) * z_star
                )
            });
            out.record(&x);
            out.record(&[cost, z_star, sol.iterations as f64]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria 2 to 4: decompositions of random single-minded auctions

struct DecompositionRun {
    label: String,
    domain: AuctionDomain,
    x_star: FractionalPoint,
    alpha: f64,
    epsilon: f64,
    result: Result<Decomposition, String>,
}

fn decomposition_runs(seed: u64) -> Vec<DecompositionRun> {
    let mut rng = SeededRng::new(seed).stream("acceptance-decomposition");
    let mut runs = Vec::new();
    for k in 0..30 {
        let n = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=4usize);
        let kind = if k % 3 == 2 {
            InstanceKind::AdversarialOverlap
        } else {
            InstanceKind::SingleMindedUniform
        };
        let instance = generate_instance(kind, n, m, rng.random()).expect("instance within caps");
        let dom = instance.domain();
        let (_, optimum) = welfare_optimum(&dom, &instance.weights());
        let x_star = if k % 2 == 0 {
            optimum
        } else {
            // A point inside the polytope: a mix of two vertices.
            let other_weights: Vec<f64> = (0..dom.dimension()).map(|_| rng.random_range(0.0..1.0)).collect();
            let (_, other) = welfare_optimum(&dom, &other_weights);
            let t = rng.random_range(0.1..0.9);
            optimum.iter().zip(&other).map(|(a, b)| t * a + (1.0 - t) * b).collect()
        };
        let x_star = FractionalPoint::new(x_star.into_iter().map(|v| v.max(0.0)).collect()).unwrap();
        for mode in [AlphaMode::Exact, AlphaMode::Greedy] {
            let verifier = AuctionVerifier::new(dom.clone(), mode).expect("small domain");
            for eps in [0.5, 0.25] {
                let result = convex_decompose(&x_star, &verifier, eps, &dom).map_err(|e| e.to_string());
                runs.push(DecompositionRun {
                    label: format!("instance {k} ({} players, {m} items) {} eps {eps}", n, mode.name()),
                    domain: dom.clone(),
                    x_star: x_star.clone(),
                    alpha: verifier.alpha(),
                    epsilon: eps,
                    result,
                });
            }
        }
    }
    runs
}

fn greedy_alpha_matches(runs: &[DecompositionRun], out: &mut Outcome) {
    for run in runs.iter().filter(|r| r.label.contains("greedy")) {
        let expected = 1.0 / (run.domain.num_items() as f64).sqrt();
        out.check((run.alpha - expected).abs() <= 1e-15, || {
            format!("{}: greedy alpha {}", run.label, run.alpha)
        });
    }
}

fn criterion_covering_systems(runs: &[DecompositionRun]) -> Outcome {
    let mut out = Outcome::default();
    for run in runs {
        let Ok(d) = &run.result else { continue };
        let s = run.x_star.support().len();
        if s == 0 {
            continue;
        }
        let eps = run.epsilon;
        let dom = &d.dominating;
        out.check(dom.covering_min_load >= 1.0 - TOL, || {
            format!("{}: covering min load {}", run.label, dom.covering_min_load)
        });
        out.check(dom.covering_total <= 1.0 + 4.0 * eps + TOL, || {
            format!("{}: covering total {} > 1 + 4 eps", run.label, dom.covering_total)
        });
        let support: std::collections::BTreeSet<&[u32]> = dom.terms.iter().map(|(_, p)| p.coords()).collect();
        let bound = s * rounds(s, eps);
        out.check(support.len() <= bound, || {
            format!("{}: support {} > {bound}", run.label, support.len())
        });
        out.record(&[dom.covering_total, dom.covering_min_load, support.len() as f64]);
    }
    out
}

fn criterion_decomposition(runs: &[DecompositionRun]) -> Outcome {
    let mut out = Outcome::default();
    greedy_alpha_matches(runs, &mut out);
    for run in runs {
        let d = match &run.result {
            Ok(d) => d,
            Err(e) => {
                out.check(false, || format!("{}: {e}", run.label));
                continue;
            }
        };
        let x = run.x_star.coords();
        let scale = run.alpha / (1.0 + 4.0 * run.epsilon);
        let terms = &d.decomposition.terms;
        let mut sum = vec![0.0; x.len()];
        for (lambda, point) in terms {
            for (s, v) in sum.iter_mut().zip(point.coords()) {
                *s += lambda * f64::from(*v);
            }
        }
        let residual = sum
            .iter()
            .zip(x)
            .map(|(s, v)| (s - scale * v).abs())
            .fold(0.0, f64::max);
        let x_max = x.iter().fold(0.0f64, |a, v| a.max(*v));
        out.check(residual <= TOL * (1.0 + x_max), || {
            format!("{}: residual {residual}", run.label)
        });
        out.check(terms.iter().all(|(l, _)| *l >= 0.0), || {
            format!("{}: negative weight", run.label)
        });
        let total: f64 = terms.iter().map(|(l, _)| l).sum();
        out.check((total - 1.0).abs() <= 1e-12, || {
            format!("{}: weights sum to {total}", run.label)
        });
        let s = run.x_star.support().len();
        if s > 0 {
            let size_bound = s * (1 + rounds(s, run.epsilon));
            let call_bound = s * rounds(s, run.epsilon);
            out.check(terms.len() <= size_bound, || {
                format!("{}: {} terms > {size_bound}", run.label, terms.len())
            });
            out.check(d.dominating.verifier_calls <= call_bound, || {
                format!(
                    "{}: {} verifier calls > {call_bound}",
                    run.label, d.dominating.verifier_calls
                )
            });
        }
        out.record(&[residual, total, terms.len() as f64, d.dominating.verifier_calls as f64]);
        for (lambda, _) in terms {
            out.record(&[*lambda]);
        }
    }
    out
}

fn criterion_conversion(runs: &[DecompositionRun]) -> Outcome {
    let mut out = Outcome::default();
    for run in runs {
        let Ok(d) = &run.result else {
            out.check(false, || format!("{}: no decomposition", run.label));
            continue;
        };
        let s = run.x_star.support().len();
        out.check(d.added_terms <= s.max(1), || {
            format!("{}: {} terms added, support {s}", run.label, d.added_terms)
        });
        for (k, step) in d.conversion_steps.iter().enumerate() {
            out.check(step.point_feasible, || {
                format!("{}: step {k} produced an infeasible point", run.label)
            });
            let slack = 1e-12 * (1.0 + step.potential_before);
            out.check(step.potential_after <= step.potential_before + slack, || {
                format!(
                    "{}: step {k} potential {} -> {}",
                    run.label, step.potential_before, step.potential_after
                )
            });
            out.record(&[step.potential_before, step.potential_after]);
        }
        for (_, point) in &d.decomposition.terms {
            out.check(integral_feasible(&run.domain, point), || {
                format!("{}: infeasible term {:?}", run.label, point.coords())
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 5: mechanism constants

fn criterion_constants() -> Outcome {
    let mut out = Outcome::default();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(f64::MIN_POSITIVE);
    for n in 1..=5usize {
        for eps0 in [0.1, 0.25, 0.5] {
            let p = match MechanismParams::new(eps0, n) {
                Ok(p) => p,
                Err(e) => {
                    out.check(false, || format!("n {n} eps0 {eps0}: {e}"));
                    continue;
                }
            };
            let nf = n as f64;
            let solver_probability = (1.0 - eps0 / nf).powi(n as i32);
            let player_probability = (1.0 - solver_probability) / nf;
            let utility_slack = eps0 / 2.0;
            let activity_threshold = utility_slack * (1.0 - solver_probability).powi(2) / nf.powi(3);
            let epsilon = activity_threshold * utility_slack * (1.0 - solver_probability) / (8.0 * nf);
            out.check(
                close(p.solver_probability, solver_probability)
                    && close(p.player_probability, player_probability)
                    && close(p.activity_threshold, activity_threshold)
                    && close(p.epsilon, epsilon),
                || format!("n {n} eps0 {eps0}: derived constants differ"),
            );
            let lower = eps0.powi(5) / (128.0 * nf.powi(4));
            let upper = eps0.powi(5) / (16.0 * nf.powi(4));
            out.check(
                p.epsilon >= lower * (1.0 - 1e-12) && p.epsilon <= upper * (1.0 + 1e-12),
                || format!("n {n} eps0 {eps0}: epsilon {} outside [{lower}, {upper}]", p.epsilon),
            );
            out.check(
                p.solver_probability >= (1.0 - eps0) * (1.0 - 1e-12)
                    && p.solver_probability <= (1.0 - eps0 / 2.0) * (1.0 + 1e-12),
                || format!("n {n} eps0 {eps0}: solver_probability {}", p.solver_probability),
            );
            out.record(&[
                p.solver_probability,
                p.player_probability,
                p.activity_threshold,
                p.dominating_price,
                p.epsilon,
            ]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria 6 and 7: audits

fn audit_instances(seed: u64) -> Vec<AuctionInstance> {
    let mut rng = SeededRng::new(seed).stream("acceptance-audit");
    (0..10)
        .map(|k| {
            let n = rng.random_range(1..=3usize);
            let m = rng.random_range(1..=3usize);
            generate_instance(InstanceKind::ALL[k % 3], n, m, rng.random()).expect("instance within caps")
        })
        .collect()
}

fn audit_config(seed: u64) -> AuditConfig {
    AuditConfig {
        monte_carlo_samples: 200,
        seed,
        ..AuditConfig::default()
    }
}

fn criterion_truthfulness(instances: &[AuctionInstance], seed: u64) -> (Outcome, Vec<Option<AuditReport>>) {
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for (k, instance) in instances.iter().enumerate() {
        let config = audit_config(seed);
        let eps0 = config.epsilon0;
        let report = match audit_truthfulness(instance, AlphaMode::Exact, config) {
            Ok(r) => r,
            Err(e) => {
                out.check(false, || format!("instance {k}: {e}"));
                reports.push(None);
                continue;
            }
        };
        let dom = instance.domain();
        let w = instance.weights();
        let n = instance.num_players() as f64;
        let solver_probability = (1.0 - eps0 / n).powf(n);
        let player_probability = (1.0 - solver_probability) / n;
        let mech = &report.truthful;
        let scale = mech.alpha / (1.0 + 4.0 * mech.epsilon);

        // Exact expectations from the full outcome table.
        let mut welfare = 0.0;
        let mut utility = vec![0.0; instance.num_players()];
        let mut negative = vec![0.0; instance.num_players()];
        let mut min_payment = f64::INFINITY;
        for branch in &mech.branches {
            for ((lambda, point), payments) in branch.terms().iter().zip(&branch.realized_payments) {
                let x = point.to_f64();
                let p = branch.probability * lambda;
                welfare += p * dot(&w, &x);
                for i in 0..instance.num_players() {
                    let u = block_value(&dom, &w, i, &x) - payments[i];
                    utility[i] += p * u;
                    if u < 0.0 {
                        negative[i] += p;
                    }
                    min_payment = min_payment.min(payments[i]);
                }
            }
        }
        out.check(min_payment >= 0.0, || format!("instance {k}: payment {min_payment}"));
        for d in &report.deviations {
            out.check(d.min_payment >= 0.0, || {
                format!("instance {k}: deviation payment {}", d.min_payment)
            });
        }
        for i in 0..instance.num_players() {
            out.check(negative[i] <= 1.0 - solver_probability + 1e-12, || {
                format!(
                    "instance {k} player {i}: negative utility with probability {}",
                    negative[i]
                )
            });
            let floor = (1.0 - eps0 / 2.0) * player_probability * dominating_value(&dom, &w, i) * scale;
            out.check(utility[i] >= floor - TOL, || {
                format!("instance {k} player {i}: utility {} < {floor}", utility[i])
            });
            let reported = report.players[i].expected_utility;
            out.check((reported - utility[i]).abs() <= 1e-9 * (1.0 + utility[i].abs()), || {
                format!("instance {k} player {i}: reported utility {reported} vs {}", utility[i])
            });
        }
        for d in &report.deviations {
            out.check(d.truthful_utility >= (1.0 - eps0) * d.deviation_utility - TOL, || {
                format!(
                    "instance {k} player {} factor {}: {} < (1 - eps0) {}",
                    d.player, d.factor, d.truthful_utility, d.deviation_utility
                )
            });
            out.record(&[d.truthful_utility, d.deviation_utility]);
        }
        let (opt, _) = welfare_optimum(&dom, &w);
        let bound = scale * (1.0 - report.params.epsilon) * (1.0 - eps0) * opt;
        out.check(welfare >= bound - TOL, || {
            format!("instance {k}: welfare {welfare} < {bound}")
        });
        out.check((report.optimum_fractional - opt).abs() <= 1e-9 * (1.0 + opt), || {
            format!("instance {k}: optimum {} vs reference {opt}", report.optimum_fractional)
        });
        out.record(&[welfare, opt]);
        out.record(&utility);
        reports.push(Some(report));
    }
    (out, reports)
}

fn criterion_inequalities(instances: &[AuctionInstance], reports: &[Option<AuditReport>], seed: u64) -> Outcome {
    let mut out = Outcome::default();
    let config = audit_config(seed);
    for (k, (instance, report)) in instances.iter().zip(reports).enumerate() {
        let Some(report) = report else {
            out.check(false, || format!("instance {k}: no audit report"));
            continue;
        };
        out.check(report.flags.welfare_stability && report.flags.deviation_gain, || {
            format!("instance {k}: audit flags {:?}", report.flags)
        });
        let dom = instance.domain();
        let w = instance.weights();
        let solver = MwuWelfareSolver::new(instance.clone(), config.inequality_epsilon).expect("solver");
        let solve = |weights: &[f64]| solver.solve(weights).expect("MWU solve");
        let without = |weights: &[f64], i: usize| -> Vec<f64> {
            let block = dom.block(i);
            weights
                .iter()
                .enumerate()
                .map(|(c, v)| if block.contains(&c) { 0.0 } else { *v })
                .collect()
        };

        let mut reports_to_check = vec![w.clone()];
        for i in 0..instance.num_players() {
            for &f in &config.deviation_factors {
                let mut r = w.clone();
                for c in dom.block(i) {
                    r[c] *= f;
                }
                reports_to_check.push(r);
            }
        }

        // Welfare stability of the solver output on every audited report.
        for report_w in &reports_to_check {
            let sol = solve(report_w);
            let eps = sol.certified_epsilon;
            let x = sol.allocation.coords();
            let welfare = dot(report_w, x);
            let (opt, opt_x) = welfare_optimum(&dom, report_w);
            out.check(welfare >= (1.0 - eps) * opt - TOL, || {
                format!("instance {k}: certified eps {eps} is not sound")
            });
            for i in 0..instance.num_players() {
                let others: f64 = (0..instance.num_players())
                    .filter(|&j| j != i)
                    .map(|j| dominating_value(&dom, report_w, j))
                    .sum();
                let beta = eps * others;
                let own = dom.dominating_allocation(i).to_f64();
                let removed = solve(&without(report_w, i)).allocation.coords().to_vec();
                let zero = vec![0.0; x.len()];
                for candidate in [&opt_x, &own, &removed, &zero] {
                    let rhs = dot(report_w, candidate) - beta - eps * block_value(&dom, report_w, i, candidate);
                    out.check(welfare >= rhs - TOL, || {
                        format!("instance {k} player {i}: welfare {welfare} < {rhs}")
                    });
                }
            }
            out.record(&[welfare, eps]);
        }

        // Gain from a deviation under the solver's VCG-style payments.
        let truth = solve(&w);
        for i in 0..instance.num_players() {
            let removed = solve(&without(&w, i));
            let others_dom: f64 = (0..instance.num_players())
                .filter(|&j| j != i)
                .map(|j| dominating_value(&dom, &w, j))
                .sum();
            for &f in &config.deviation_factors {
                let mut r = w.clone();
                for c in dom.block(i) {
                    r[c] *= f;
                }
                let dev = solve(&r);
                let eps = truth
                    .certified_epsilon
                    .max(removed.certified_epsilon)
                    .max(dev.certified_epsilon);
                let beta = eps * others_dom;
                let pay = |x: &[f64]| {
                    (others_value(&dom, &w, i, removed.allocation.coords()) - others_value(&dom, &w, i, x) - beta)
                        .max(0.0)
                };
                let u_truth = block_value(&dom, &w, i, truth.allocation.coords()) - pay(truth.allocation.coords());
                let v_dev = block_value(&dom, &w, i, dev.allocation.coords());
                let u_dev = v_dev - pay(dev.allocation.coords());
                let rhs = u_dev - eps * v_dev - 3.0 * beta;
                out.check(u_truth >= rhs - TOL, || {
                    format!("instance {k} player {i} factor {f}: utility {u_truth} < {rhs}")
                });
                out.record(&[u_truth, u_dev, eps]);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 8: determinism

fn cli_reports_repeat() -> Outcome {
    let mut out = Outcome::default();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let path = |name: &str| data.join(name).to_string_lossy().into_owned();
    let cases: Vec<Vec<String>> = vec![
        vec!["solve-cover".into(), "--input".into(), path("covering.json")],
        vec!["solve-pack".into(), "--input".into(), path("packing.json")],
        vec!["solve-pack".into(), "--input".into(), path("auction_2x2.json")],
        vec!["decompose".into(), "--input".into(), path("triangle.json")],
        vec![
            "mechanism".into(),
            "run".into(),
            "--input".into(),
            path("auction_2x2.json"),
            "--seed".into(),
            "5".into(),
        ],
        vec![
            "mechanism".into(),
            "audit".into(),
            "--input".into(),
            path("auction_2x2.json"),
        ],
    ];
    let strip = |bytes: &[u8]| {
        let text = String::from_utf8_lossy(bytes).into_owned();
        match text.find("\"timing\"") {
            Some(cut) => text[..cut].to_owned(),
            None => text,
        }
    };
    for args in cases {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_mwumech"))
                .args(&args)
                .env_remove("MWUMECH_LOG")
                .output()
        };
        match (run(), run()) {
            (Ok(a), Ok(b)) => {
                out.check(a.status.success(), || format!("{args:?}: exit {:?}", a.status.code()));
                out.check(strip(&a.stdout) == strip(&b.stdout), || {
                    format!("{args:?}: reports differ")
                });
            }
            _ => out.check(false, || format!("{args:?}: binary did not run")),
        }
    }
    out
}

// ---------------------------------------------------------------------------

struct Line {
    id: usize,
    name: &'static str,
    outcome: Outcome,
    elapsed: Duration,
    limit: Option<Duration>,
}

fn main() -> ExitCode {
    let timed = |f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        (o, start.elapsed())
    };
    let mut lines = Vec::new();

    let (c1, t1) = timed(&mut || criterion_covering(SEED));
    let start = Instant::now();
    let runs = decomposition_runs(SEED);
    let decomposition_time = start.elapsed();
    let (c2, t2) = timed(&mut || criterion_covering_systems(&runs));
    let (c3, t3) = timed(&mut || criterion_decomposition(&runs));
    let (c4, t4) = timed(&mut || criterion_conversion(&runs));
    let (c5, t5) = timed(&mut criterion_constants);
    let instances = audit_instances(SEED);
    let start = Instant::now();
    let (c6, reports) = criterion_truthfulness(&instances, SEED);
    let t6 = start.elapsed();
    let (c7, t7) = timed(&mut || criterion_inequalities(&instances, &reports, SEED));

    // Repeat everything with the same seed and compare digests.
    let start = Instant::now();
    let runs_again = decomposition_runs(SEED);
    let again = [
        criterion_covering(SEED).digest,
        criterion_covering_systems(&runs_again).digest,
        criterion_decomposition(&runs_again).digest,
        criterion_conversion(&runs_again).digest,
        criterion_constants().digest,
        {
            let (o, r) = criterion_truthfulness(&instances, SEED);
            let inequalities = criterion_inequalities(&instances, &r, SEED).digest;
            format!("{}{inequalities}", o.digest)
        },
    ];
    let first = [
        c1.digest.clone(),
        c2.digest.clone(),
        c3.digest.clone(),
        c4.digest.clone(),
        c5.digest.clone(),
        format!("{}{}", c6.digest, c7.digest),
    ];
    let mut c8 = cli_reports_repeat();
    for (k, (a, b)) in first.iter().zip(&again).enumerate() {
        c8.check(a == b && !a.is_empty(), || format!("digest {k} differs between runs"));
    }
    let t8 = start.elapsed();

    lines.push(Line {
        id: 1,
        name: "covering solver feasibility, iteration bound and (1+4eps) approximation",
        outcome: c1,
        elapsed: t1,
        limit: Some(Duration::from_secs(5)),
    });
    lines.push(Line {
        id: 2,
        name: "covering systems of the decompositions: total and support bounds",
        outcome: c2,
        elapsed: t2,
        limit: None,
    });
    lines.push(Line {
        id: 3,
        name: "decomposition exactness, convexity, size and verifier-call bounds",
        outcome: c3,
        elapsed: t3 + decomposition_time,
        limit: Some(Duration::from_secs(10)),
    });
    lines.push(Line {
        id: 4,
        name: "exact conversion adds at most s terms, feasible points, monotone potential",
        outcome: c4,
        elapsed: t4,
        limit: None,
    });
    lines.push(Line {
        id: 5,
        name: "mechanism constants within their brackets",
        outcome: c5,
        elapsed: t5,
        limit: None,
    });
    lines.push(Line {
        id: 6,
        name: "truthfulness audit: transfers, IR, truthfulness, welfare, minimum utility",
        outcome: c6,
        elapsed: t6,
        limit: Some(Duration::from_secs(60)),
    });
    lines.push(Line {
        id: 7,
        name: "welfare-stability and deviation-gain inequalities with the MWU solver",
        outcome: c7,
        elapsed: t7,
        limit: None,
    });
    lines.push(Line {
        id: 8,
        name: "determinism of criteria and CLI reports",
        outcome: c8,
        elapsed: t8,
        limit: None,
    });

    let mut all = true;
    for line in &lines {
        let in_time = line.limit.map_or(true, |l| line.elapsed <= l);
        let ok = line.outcome.passed() && in_time;
        all &= ok;
        println!(
            "criterion {} {}: {} ({} checks, {:.2} s{})",
            line.id,
            if ok { "PASS" } else { "FAIL" },
            line.name,
            line.outcome.checks,
            line.elapsed.as_secs_f64(),
            line.limit
                .map_or(String::new(), |l| format!(", limit {} s", l.as_secs())),
        );
        for f in line.outcome.failures.iter().filter(|f| !f.is_empty()) {
            println!("    {f}");
        }
        if !in_time {
            println!("    runtime limit exceeded");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
