use alloc::vec::Vec;

use rand::Rng;

use super::fractional::{fractional_vcg, sample_index, FractionalMechanism, VcgOutcome};
use super::VALUE_FLOOR;
use crate::auction::{AuctionDomain, WelfareSolver};
use crate::decomposition::{convex_decompose, Decomposition};
use crate::model::{FractionalPoint, IntegralPoint, IntegralityGapVerifier};
use crate::numeric::FEAS_TOL;
use crate::rng::SeededRng;
use crate::Result;

/// Payment of one realized point: `p * v(x^l) / v(x)`, or zero when the
/// reported value of the fractional allocation is negligible.
pub fn scaled_payment(payment: f64, realized_value: f64, fractional_value: f64) -> f64 {
    if fractional_value <= VALUE_FLOOR || payment == 0.0 {
        0.0
    } else {
        payment * realized_value / fractional_value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralBranch {
    pub probability: f64,
    pub fractional: FractionalPoint,
    pub payments: Vec<f64>,
    /// `v_i(x)` under the report.
    pub reported_values: Vec<f64>,
    pub decomposition: Decomposition,
    /// `realized_payments[l][i]` for term `l`.
    pub realized_payments: Vec<Vec<f64>>,
}

impl IntegralBranch {
    pub fn terms(&self) -> &[(f64, IntegralPoint)] {
        &self.decomposition.decomposition.terms
    }
}

/// One sampled outcome of the integral mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub branch: usize,
    pub term: usize,
    pub allocation: IntegralPoint,
    pub payments: Vec<f64>,
}

/// The fractional mechanism with every branch replaced by an exact convex
/// decomposition of `alpha / (1 + 4 eps)` times its allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralMechanism {
    pub fractional: FractionalMechanism,
    pub branches: Vec<IntegralBranch>,
    pub alpha: f64,
    pub epsilon: f64,
}

impl IntegralMechanism {
    /// `alpha / (1 + 4 eps)`.
    pub fn scale(&self) -> f64 {
        self.alpha / (1.0 + 4.0 * self.epsilon)
    }

    fn outcomes(&self) -> impl Iterator<Item = (f64, &IntegralPoint, &[f64])> {
        self.branches.iter().flat_map(|b| {
            b.terms()
                .iter()
                .zip(&b.realized_payments)
                .map(move |((lambda, point), pay)| (b.probability * lambda, point, pay.as_slice()))
        })
    }

    /// Utility of player `i` with true weights `truth` in each outcome, with
    /// its probability.
    pub fn utility_distribution(&self, domain: &AuctionDomain, i: usize, truth: &[f64]) -> Vec<(f64, f64)> {
        self.outcomes()
            .map(|(p, point, pay)| (p, domain.player_value_integral(i, truth, point) - pay[i]))
            .collect()
    }

    pub fn expected_utility(&self, domain: &AuctionDomain, i: usize, truth: &[f64]) -> f64 {
        self.utility_distribution(domain, i, truth)
            .into_iter()
            .map(|(p, u)| p * u)
            .sum()
    }

    pub fn expected_welfare(&self, truth: &[f64]) -> f64 {
        self.outcomes().map(|(p, point, _)| p * point.dot(truth)).sum()
    }

    /// Probability mass of outcomes where player `i`'s utility is below
    /// `-1e-9`.
    pub fn negative_utility_probability(&self, domain: &AuctionDomain, i: usize, truth: &[f64]) -> f64 {
        self.utility_distribution(domain, i, truth)
            .into_iter()
            .filter(|(_, u)| *u < -FEAS_TOL)
            .map(|(p, _)| p)
            .sum()
    }

    pub fn min_payment(&self) -> f64 {
        self.outcomes()
            .flat_map(|(_, _, pay)| pay.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Draws a branch from the mechanism-stage stream and a term from the
    /// decomposition-sample stream, both keyed by `index`.
    pub fn realize(&self, rng: &SeededRng, index: u64) -> Realization {
        let mut stage = rng.indexed_stream(SeededRng::MECHANISM_STAGE, index);
        let branch = self.fractional.draw_branch(&mut stage);
        let b = &self.branches[branch];
        let mut sample = rng.indexed_stream(SeededRng::DECOMPOSITION_SAMPLE, index);
        let weights: Vec<f64> = b.terms().iter().map(|(l, _)| *l).collect();
        let term = sample_index(&weights, sample.random::<f64>());
        Realization {
            branch,
            term,
            allocation: b.terms()[term].1.clone(),
            payments: b.realized_payments[term].clone(),
        }
    }
}

fn realized_payments(
    domain: &AuctionDomain,
    weights: &[f64],
    payments: &[f64],
    reported_values: &[f64],
    decomposition: &Decomposition,
) -> Vec<Vec<f64>> {
    decomposition
        .decomposition
        .terms
        .iter()
        .map(|(_, point)| {
            (0..domain.num_players())
                .map(|i| {
                    scaled_payment(
                        payments[i],
                        domain.player_value_integral(i, weights, point),
                        reported_values[i],
                    )
                })
                .collect()
        })
        .collect()
}

/// Converts every branch of the fractional mechanism into a lottery over
/// `Q_I`. `weights` is the report the mechanism was built from.
pub fn integral_conversion<V: IntegralityGapVerifier + ?Sized>(
    fractional: &FractionalMechanism,
    domain: &AuctionDomain,
    weights: &[f64],
    verifier: &V,
    epsilon: f64,
) -> Result<IntegralMechanism> {
    let mut branches = Vec::with_capacity(fractional.branches.len());
    for b in &fractional.branches {
        let x = b.allocation.coords();
        let reported_values: Vec<f64> = (0..domain.num_players())
            .map(|i| domain.player_value(i, weights, x))
            .collect();
        let decomposition = convex_decompose(&b.allocation, verifier, epsilon, domain)?;
        let realized = realized_payments(domain, weights, &b.payments, &reported_values, &decomposition);
        branches.push(IntegralBranch {
            probability: b.probability,
            fractional: b.allocation.clone(),
            payments: b.payments.clone(),
            reported_values,
            decomposition,
            realized_payments: realized,
        });
    }
    Ok(IntegralMechanism {
        fractional: fractional.clone(),
        branches,
        alpha: verifier.alpha(),
        epsilon,
    })
}

/// Fractional VCG followed by a decomposition of its allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct LsOutcome {
    pub vcg: VcgOutcome,
    pub decomposition: Decomposition,
    /// `realized_payments[l][i]` for term `l`.
    pub realized_payments: Vec<Vec<f64>>,
    /// `v_i(x*)` per player.
    pub values: Vec<f64>,
}

impl LsOutcome {
    pub fn terms(&self) -> &[(f64, IntegralPoint)] {
        &self.decomposition.decomposition.terms
    }

    pub fn expected_welfare(&self, weights: &[f64]) -> f64 {
        self.terms().iter().map(|(l, x)| l * x.dot(weights)).sum()
    }

    pub fn expected_payment(&self, i: usize) -> f64 {
        self.terms()
            .iter()
            .zip(&self.realized_payments)
            .map(|((l, _), p)| l * p[i])
            .sum()
    }

    /// Index of the sampled term.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let weights: Vec<f64> = self.terms().iter().map(|(l, _)| *l).collect();
        sample_index(&weights, rng.random::<f64>())
    }
}

/// Truthful-in-expectation mechanism from an exact welfare solver: VCG
/// prices on the fractional optimum, scaled by realized value.
pub fn exact_ls_mechanism<V: IntegralityGapVerifier + ?Sized>(
    domain: &AuctionDomain,
    weights: &[f64],
    solver: &dyn WelfareSolver,
    verifier: &V,
    epsilon: f64,
) -> Result<LsOutcome> {
    let vcg = fractional_vcg(domain, weights, solver)?;
    let x = vcg.allocation.coords();
    let values: Vec<f64> = (0..domain.num_players())
        .map(|i| domain.player_value(i, weights, x))
        .collect();
    let decomposition = convex_decompose(&vcg.allocation, verifier, epsilon, domain)?;
    let realized = realized_payments(domain, weights, &vcg.payments, &values, &decomposition);
    Ok(LsOutcome {
        vcg,
        decomposition,
        realized_payments: realized,
        values,
    })
}
