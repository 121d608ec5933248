//! Convex decompositions of a scaled fractional point into integral points,
//! using only an integrality-gap verifier and the packing property.
//!
//! [`find_dominating_combination`] solves the covering LP
//! `min sum lambda  s.t.  sum_i lambda_i x^i_j / (alpha x*_j) >= 1` over the
//! support of `x*` with the unit-cost MWU solver; each oracle call is one
//! verifier call with weights `z_j / (alpha x*_j)`. Normalising the weights
//! gives a convex combination that dominates `alpha / (1 + 4 eps) * x*`.
//!
//! [`exact_decompose`] then removes the surplus: it either lowers one
//! coordinate of a point by one, or splits weight off to a copy of the point
//! with all still-overcovered coordinates zeroed. Each split removes one
//! overcovered coordinate, so at most `s` points are added.

use alloc::vec;
use alloc::vec::Vec;

use crate::covering::{solve_covering_unit, UnitColumnOracle};
use crate::model::{
    verify_membership, ConvexDecomposition, FractionalPoint, IntegralPoint, IntegralityGapVerifier, PackingDomain,
};
use crate::numeric::FEAS_TOL;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DominatingCombination {
    /// Normalised weights with points zeroed outside the support of `x*`.
    pub terms: Vec<(f64, IntegralPoint)>,
    /// `alpha / (1 + 4 eps) * x*`.
    pub target: FractionalPoint,
    pub alpha: f64,
    pub epsilon: f64,
    pub verifier_calls: usize,
    pub covering_iterations: usize,
    /// `Lambda = 1.lambda'` of the covering solution before normalisation.
    pub covering_total: f64,
    pub covering_min_load: f64,
}

impl DominatingCombination {
    pub fn support_size(&self) -> usize {
        self.target.support().len()
    }
}

struct VerifierColumns<'a, V: ?Sized> {
    verifier: &'a V,
    x_star: &'a FractionalPoint,
    alpha: f64,
    calls: usize,
}

impl<V: IntegralityGapVerifier + ?Sized> UnitColumnOracle for VerifierColumns<'_, V> {
    type Id = IntegralPoint;

    fn select(&mut self, z: &[f64]) -> Result<(IntegralPoint, Vec<(usize, f64)>)> {
        let support = self.x_star.support();
        let coords = self.x_star.coords();
        let mut weights = vec![0.0; coords.len()];
        for (row, &j) in support.iter().enumerate() {
            weights[j] = z[row] / (self.alpha * coords[j]);
        }
        self.calls += 1;
        let x = self.verifier.find_checked(&weights, self.x_star)?;
        let x = x.zeroed_where(|j| coords[j] == 0.0);
        let entries = support
            .iter()
            .enumerate()
            .filter(|(_, &j)| x.get(j) > 0)
            .map(|(row, &j)| (row, f64::from(x.get(j)) / (self.alpha * coords[j])))
            .collect();
        Ok((x, entries))
    }
}

/// Convex combination of verifier outputs dominating
/// `alpha / (1 + 4 eps) * x*`, with at most `s * ceil(ln s / eps^2)` terms and
/// verifier calls for support size `s >= 2`.
pub fn find_dominating_combination<V: IntegralityGapVerifier + ?Sized>(
    x_star: &FractionalPoint,
    verifier: &V,
    epsilon: f64,
) -> Result<DominatingCombination> {
    crate::covering::check_epsilon(epsilon)?;
    let d = verifier.dimension();
    if x_star.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x_star.dimension(),
        });
    }
    let alpha = verifier.alpha();
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "verifier guarantee {alpha} must lie in (0, 1]"
        )));
    }
    let target = x_star.scaled(alpha / (1.0 + 4.0 * epsilon))?;
    let s = x_star.support().len();
    if s == 0 {
        return Ok(DominatingCombination {
            terms: vec![(1.0, IntegralPoint::zeros(d))],
            target,
            alpha,
            epsilon,
            verifier_calls: 0,
            covering_iterations: 0,
            covering_total: 1.0,
            covering_min_load: f64::INFINITY,
        });
    }
    let mut oracle = VerifierColumns {
        verifier,
        x_star,
        alpha,
        calls: 0,
    };
    let sol = solve_covering_unit(s, &mut oracle, epsilon)?;
    let total = sol.total();
    let terms = sol
        .columns
        .into_iter()
        .map(|(point, lambda)| (lambda / total, point))
        .collect();
    Ok(DominatingCombination {
        terms,
        target,
        alpha,
        epsilon,
        verifier_calls: oracle.calls,
        covering_iterations: sol.iterations,
        covering_total: total,
        covering_min_load: sol.min_load,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// A point lost one unit in `coordinate`.
    Subtract { coordinate: usize },
    /// `weight` moved to a copy of the point with the overcovered
    /// coordinates zeroed; `coordinate` became exact.
    Split { coordinate: usize, weight: f64 },
}

/// One pass of the conversion loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionStep {
    pub term: usize,
    pub branch: Branch,
    /// `sum_j Delta_j` before and after.
    pub potential_before: f64,
    pub potential_after: f64,
    /// Number of coordinates with `Delta_j` above tolerance, before and after.
    pub positive_before: usize,
    pub positive_after: usize,
    /// Minimum gap after the step; stays above `-1e-9`.
    pub min_gap: f64,
    /// Membership of the point created or modified by the step.
    pub point_feasible: bool,
}

impl ConversionStep {
    /// Progress guarantee of the step: a subtraction lowers the potential by
    /// the term's weight, a split lowers the count of overcovered coordinates.
    pub fn made_progress(&self, weight: f64) -> bool {
        match self.branch {
            Branch::Subtract { .. } => {
                self.potential_after <= self.potential_before - weight + 1e-12 * (1.0 + self.potential_before)
            }
            Branch::Split { .. } => self.positive_after < self.positive_before,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConversion {
    pub decomposition: ConvexDecomposition,
    pub steps: Vec<ConversionStep>,
    /// Weights of the terms touched by each step, aligned with `steps`.
    pub step_weights: Vec<f64>,
    /// Final terms minus input terms.
    pub added_terms: usize,
}

fn gap_threshold(target: f64) -> f64 {
    FEAS_TOL * (1.0 + target)
}

/// Turns a combination dominating `target` into an exact decomposition of it.
///
/// Points are first zeroed outside the support of `target`. A coordinate
/// counts as overcovered when `Delta_j > 1e-9 (1 + target_j)`. The loop picks
/// the first term that covers an overcovered coordinate, subtracts a unit
/// vector when the gap allows it (lowest coordinate first), and otherwise
/// splits.
pub fn exact_decompose(
    target: &FractionalPoint,
    dominating: &[(f64, IntegralPoint)],
    domain: &dyn PackingDomain,
) -> Result<ExactConversion> {
    let d = domain.dimension();
    if target.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: target.dimension(),
        });
    }
    let goal = target.coords();
    let mut terms: Vec<(f64, IntegralPoint)> = Vec::with_capacity(dominating.len());
    for (lambda, point) in dominating {
        if !verify_membership(domain, point)? {
            return Err(Error::Precondition(alloc::format!(
                "input point {point:?} is not in Q_I"
            )));
        }
        if !(*lambda >= 0.0) {
            return Err(Error::Precondition(alloc::format!("negative weight {lambda}")));
        }
        terms.push((*lambda, point.zeroed_where(|j| goal[j] == 0.0)));
    }
    let input_len = terms.len();

    let mut gap = vec![0.0; d];
    for (lambda, point) in &terms {
        for (g, c) in gap.iter_mut().zip(point.coords()) {
            *g += lambda * f64::from(*c);
        }
    }
    for (j, g) in gap.iter_mut().enumerate() {
        *g -= goal[j];
        if *g < -gap_threshold(goal[j]) {
            return Err(Error::Precondition(alloc::format!(
                "combination misses the target in coordinate {j} by {}",
                -*g
            )));
        }
    }
    let positive = |gap: &[f64]| (0..d).filter(|&j| gap[j] > gap_threshold(goal[j])).count();

    let longest = terms.iter().map(|(_, p)| p.l1_norm()).max().unwrap_or(0) as usize;
    let s = target.support().len();
    let limit = (input_len + s) * (longest + 1) + 1;

    let mut steps = Vec::new();
    let mut step_weights = Vec::new();
    loop {
        let over: Vec<bool> = (0..d).map(|j| gap[j] > gap_threshold(goal[j])).collect();
        let Some(i) = terms
            .iter()
            .position(|(lambda, p)| *lambda > 0.0 && (0..d).any(|j| over[j] && p.get(j) > 0))
        else {
            break;
        };
        if steps.len() >= limit {
            return Err(Error::Internal(alloc::format!(
                "exact conversion exceeded {limit} steps"
            )));
        }
        let potential_before: f64 = gap.iter().sum();
        let positive_before = positive(&gap);
        let lambda = terms[i].0;

        let subtract = (0..d).find(|&j| terms[i].1.get(j) > 0 && over[j] && gap[j] >= lambda);
        let (branch, point_feasible) = match subtract {
            Some(j) => {
                let lowered = terms[i]
                    .1
                    .minus_unit(j)
                    .ok_or_else(|| Error::Internal("subtracting from a zero coordinate".into()))?;
                let feasible = verify_membership(domain, &lowered)?;
                terms[i].1 = lowered;
                gap[j] -= lambda;
                (Branch::Subtract { coordinate: j }, feasible)
            }
            None => {
                let point = terms[i].1.clone();
                let k = (0..d)
                    .filter(|&j| point.get(j) > 0 && over[j])
                    .min_by(|&a, &b| {
                        let ra = gap[a] / f64::from(point.get(a));
                        let rb = gap[b] / f64::from(point.get(b));
                        ra.total_cmp(&rb).then(a.cmp(&b))
                    })
                    .ok_or_else(|| Error::Internal("split without an overcovered coordinate".into()))?;
                let theta = gap[k] / f64::from(point.get(k));
                let y = point.zeroed_where(|j| over[j]);
                let feasible = verify_membership(domain, &y)?;
                for j in 0..d {
                    if over[j] {
                        gap[j] -= theta * f64::from(point.get(j));
                    }
                }
                gap[k] = 0.0;
                terms[i].0 = lambda - theta;
                match terms.iter().position(|(_, p)| *p == y) {
                    Some(h) => terms[h].0 += theta,
                    None => terms.push((theta, y)),
                }
                (
                    Branch::Split {
                        coordinate: k,
                        weight: theta,
                    },
                    feasible,
                )
            }
        };
        steps.push(ConversionStep {
            term: i,
            branch,
            potential_before,
            potential_after: gap.iter().sum(),
            positive_before,
            positive_after: positive(&gap),
            min_gap: gap.iter().copied().fold(f64::INFINITY, f64::min),
            point_feasible,
        });
        step_weights.push(lambda);
    }

    // merge duplicates created by subtraction and drop empty weights
    let mut merged: Vec<(f64, IntegralPoint)> = Vec::with_capacity(terms.len());
    for (lambda, point) in terms {
        if lambda <= 0.0 {
            continue;
        }
        match merged.iter_mut().find(|(_, p)| *p == point) {
            Some(t) => t.0 += lambda,
            None => merged.push((lambda, point)),
        }
    }
    let added_terms = merged.len().saturating_sub(input_len);
    Ok(ExactConversion {
        decomposition: ConvexDecomposition { terms: merged },
        steps,
        step_weights,
        added_terms,
    })
}

/// Result of the full pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub decomposition: ConvexDecomposition,
    pub dominating: DominatingCombination,
    pub conversion_steps: Vec<ConversionStep>,
    pub step_weights: Vec<f64>,
    pub added_terms: usize,
    /// `max_j |sum lambda x_j - target_j|`.
    pub residual_norm: f64,
}

impl Decomposition {
    pub fn target(&self) -> &FractionalPoint {
        &self.dominating.target
    }

    pub fn support_size(&self) -> usize {
        self.dominating.support_size()
    }
}

/// Exact decomposition of `alpha / (1 + 4 eps) * x*` with at most
/// `s (1 + ceil(ln s / eps^2))` terms.
pub fn convex_decompose<V: IntegralityGapVerifier + ?Sized>(
    x_star: &FractionalPoint,
    verifier: &V,
    epsilon: f64,
    domain: &dyn PackingDomain,
) -> Result<Decomposition> {
    let dominating = find_dominating_combination(x_star, verifier, epsilon)?;
    let conversion = exact_decompose(&dominating.target, &dominating.terms, domain)?;
    let combined = conversion.decomposition.combination(domain.dimension());
    let residual_norm = combined
        .iter()
        .zip(dominating.target.coords())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Decomposition {
        decomposition: conversion.decomposition,
        dominating,
        conversion_steps: conversion.steps,
        step_weights: conversion.step_weights,
        added_terms: conversion.added_terms,
        residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{AuctionInstance, ExactVerifier, GreedyVerifier, Valuation};
    use crate::numeric;

    /// `{x in Z^d : sum x <= cap}`.
    struct Simplex {
        d: usize,
        cap: u32,
    }

    impl PackingDomain for Simplex {
        fn dimension(&self) -> usize {
            self.d
        }
        fn contains(&self, p: &IntegralPoint) -> bool {
            p.coords().iter().sum::<u32>() <= self.cap
        }
    }

    struct Boxed(usize);

    impl PackingDomain for Boxed {
        fn dimension(&self) -> usize {
            self.0
        }
        fn contains(&self, p: &IntegralPoint) -> bool {
            p.coords().iter().all(|c| *c <= 1)
        }
    }

    fn two_item_instance() -> AuctionInstance {
        AuctionInstance::new(
            2,
            vec![
                Valuation::SingleMinded {
                    bundle: vec![0],
                    value: 2.0,
                },
                Valuation::SingleMinded {
                    bundle: vec![0, 1],
                    value: 3.0,
                },
                Valuation::SingleMinded {
                    bundle: vec![1],
                    value: 2.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_support() {
        let inst = two_item_instance();
        let v = ExactVerifier::new(inst.domain()).unwrap();
        let dec = convex_decompose(&FractionalPoint::zeros(3), &v, 0.25, &inst.domain()).unwrap();
        assert_eq!(dec.decomposition.terms, vec![(1.0, IntegralPoint::zeros(3))]);
        assert_eq!(dec.dominating.verifier_calls, 0);
    }

    #[test]
    fn already_exact_is_unchanged() {
        let target = FractionalPoint::new(vec![1.0]).unwrap();
        let terms = vec![(1.0, IntegralPoint::new(vec![1]))];
        let out = exact_decompose(&target, &terms, &Simplex { d: 1, cap: 1 }).unwrap();
        assert!(out.steps.is_empty());
        assert_eq!(out.decomposition.terms, terms);
    }

    #[test]
    fn split_on_half() {
        let target = FractionalPoint::new(vec![0.5]).unwrap();
        let terms = vec![(1.0, IntegralPoint::new(vec![1]))];
        let out = exact_decompose(&target, &terms, &Simplex { d: 1, cap: 1 }).unwrap();
        assert_eq!(
            out.decomposition.terms,
            vec![(0.5, IntegralPoint::new(vec![1])), (0.5, IntegralPoint::new(vec![0]))]
        );
        assert!(matches!(out.steps[0].branch, Branch::Split { coordinate: 0, .. }));
    }

    #[test]
    fn split_keeps_exact_coordinates() {
        let target = FractionalPoint::new(vec![1.0, 0.5]).unwrap();
        let terms = vec![(1.0, IntegralPoint::new(vec![1, 1]))];
        let out = exact_decompose(&target, &terms, &Boxed(2)).unwrap();
        assert_eq!(
            out.decomposition.terms,
            vec![
                (0.5, IntegralPoint::new(vec![1, 1])),
                (0.5, IntegralPoint::new(vec![1, 0]))
            ]
        );
        assert_eq!(out.decomposition.combination(2), vec![1.0, 0.5]);
    }

    #[test]
    fn subtraction_branch() {
        // gap 1 in coordinate 0 is as large as the weight: lower the point
        let target = FractionalPoint::new(vec![1.0, 1.0]).unwrap();
        let terms = vec![(1.0, IntegralPoint::new(vec![2, 1]))];
        let out = exact_decompose(&target, &terms, &Simplex { d: 2, cap: 3 }).unwrap();
        assert_eq!(out.steps[0].branch, Branch::Subtract { coordinate: 0 });
        assert_eq!(out.decomposition.terms, vec![(1.0, IntegralPoint::new(vec![1, 1]))]);
        assert_eq!(out.added_terms, 0);
    }

    #[test]
    fn undercovered_input_is_rejected() {
        let target = FractionalPoint::new(vec![1.0]).unwrap();
        let terms = vec![(0.5, IntegralPoint::new(vec![1])), (0.5, IntegralPoint::new(vec![0]))];
        assert!(matches!(
            exact_decompose(&target, &terms, &Simplex { d: 1, cap: 1 }),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn integral_point_with_exact_verifier() {
        let inst = two_item_instance();
        let dom = inst.domain();
        let v = ExactVerifier::new(dom.clone()).unwrap();
        assert_eq!(v.alpha(), 1.0);
        let x = FractionalPoint::new(vec![1.0, 0.0, 1.0]).unwrap();
        let dominating = find_dominating_combination(&x, &v, 0.25).unwrap();
        let sum = ConvexDecomposition {
            terms: dominating.terms.clone(),
        }
        .combination(3);
        for j in 0..3 {
            assert!(sum[j] >= x.coords()[j] / 2.0 - 1e-9);
        }
        let bound = 2 * numeric::ceil(16.0 * numeric::ln(2.0)) as usize;
        assert!(dominating.verifier_calls <= bound);
    }

    #[test]
    fn fractional_point_with_greedy_verifier() {
        let inst = two_item_instance();
        let dom = inst.domain();
        let v = GreedyVerifier::new(dom.clone());
        let x = FractionalPoint::new(vec![0.5, 0.5, 0.5]).unwrap();
        let dec = convex_decompose(&x, &v, 0.5, &dom).unwrap();
        dec.decomposition.validate(&dom).unwrap();
        let scale = v.alpha() / 3.0;
        let sum = dec.decomposition.combination(3);
        for j in 0..3 {
            assert!((sum[j] - 0.5 * scale).abs() <= 1e-9);
        }
        assert!(dec.residual_norm <= 1e-9);
        assert!(dec.added_terms <= 3);
        assert!(dec.decomposition.len() <= 3 * (1 + numeric::ceil(4.0 * numeric::ln(3.0)) as usize));
        for (step, w) in dec.conversion_steps.iter().zip(&dec.step_weights) {
            assert!(step.point_feasible && step.made_progress(*w));
        }
    }

    #[test]
    fn single_coordinate_support() {
        let inst = two_item_instance();
        let dom = inst.domain();
        let v = ExactVerifier::new(dom.clone()).unwrap();
        let x = FractionalPoint::new(vec![0.0, 1.0, 0.0]).unwrap();
        let dec = convex_decompose(&x, &v, 0.25, &dom).unwrap();
        for (_, p) in &dec.decomposition.terms {
            assert_eq!(p.get(0) + p.get(2), 0);
        }
        let sum = dec.decomposition.combination(3);
        assert!((sum[1] - 0.5).abs() <= 1e-9);
    }
}
