//! Width-independent MWU packing solver for
//! `max c.x s.t. A x <= b, x >= 0` in the column oracle model, and the demand
//! oracle that makes it an FPTAS for combinatorial-auction welfare.
//!
//! Every row carries a length `y_i`, initially `delta / b_i`. The oracle is
//! asked for a column that approximately minimises
//! `(1/c_j) sum_i z_i a_ij / b_i` with `z ∝ (y_i b_i)`; the column is raised by
//! its bottleneck capacity and each row length it touches is multiplied by
//! `1 + eps' a_ij q / b_i`. The loop stops once `sum_i b_i y_i >= 1` and the
//! iterate is scaled down to feasibility.
//!
//! The oracle's guarantee `kappa >= 1` bounds its column's ratio by `kappa`
//! times the minimum. Each answer also yields a dual bound on the optimum,
//! which is reported as a certified relative error.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::auction::{items_of, Bundle, Valuation};
use crate::covering::{check_epsilon, validate_dense, Column};
use crate::numeric;
use crate::{Error, Result};

/// Oracle for the packing loop: given normalised row weights `z`, returns a
/// column whose ratio `(1/c_j) sum_i z_i a_ij / b_i` is at most
/// [`kappa`](Self::kappa) times the minimum.
pub trait PackingOracle {
    type Id: Clone + Ord;

    fn kappa(&self) -> f64 {
        1.0
    }

    fn select(&mut self, weights: &[f64]) -> Result<Column<Self::Id>>;
}

#[derive(Debug, Clone)]
pub struct PackingProblem<O> {
    capacities: Vec<f64>,
    oracle: O,
}

impl<O: PackingOracle> PackingProblem<O> {
    pub fn new(capacities: Vec<f64>, oracle: O) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::InvalidArgument("packing problem needs at least one row".into()));
        }
        if let Some(b) = capacities.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidArgument(format!("row capacity {b} is not positive")));
        }
        let kappa = oracle.kappa();
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "oracle guarantee {kappa} must be at least 1"
            )));
        }
        Ok(Self { capacities, oracle })
    }

    pub fn num_rows(&self) -> usize {
        self.capacities.len()
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingSolution<Id> {
    /// Support in order of first selection.
    pub columns: Vec<(Id, f64)>,
    pub objective: f64,
    /// Best dual bound on the optimum seen during the run.
    pub upper_bound: f64,
    /// `max(0, 1 - objective / upper_bound)`.
    pub certified_epsilon: f64,
    pub iterations: usize,
    pub oracle_calls: usize,
    /// `max_i A_i x / b_i` of the returned point.
    pub max_load: f64,
}

/// Runs the packing loop with internal step parameter `eps / 3`.
///
/// On return `A x <= b` holds up to rounding and, when the oracle honours its
/// guarantee, `c.x >= (1 - eps) / kappa * OPT`.
pub fn solve_packing<O: PackingOracle>(
    problem: &mut PackingProblem<O>,
    epsilon: f64,
) -> Result<PackingSolution<O::Id>> {
    check_epsilon(epsilon)?;
    let b = &problem.capacities;
    let m = b.len();
    let kappa = problem.oracle.kappa();
    let step = epsilon / 3.0;
    let ln_step = numeric::ln_1p(step);
    // ln delta with delta = (1 + e)((1 + e) m)^(-1/e)
    let ln_delta = ln_step - (ln_step + numeric::ln(m as f64)) / step;
    let mut log_y: Vec<f64> = b.iter().map(|bi| ln_delta - numeric::ln(*bi)).collect();
    let phases = 1.0 + -ln_delta / ln_step;
    let cap = 2 * m * (numeric::ceil(phases) as usize + 1);

    let mut index: BTreeMap<O::Id, usize> = BTreeMap::new();
    let mut columns: Vec<(O::Id, f64, f64)> = Vec::new();
    let mut loads = vec![0.0; m];
    let mut dense = vec![0.0; m];
    let mut upper_bound = f64::INFINITY;
    let mut iterations = 0;

    loop {
        // z ∝ y_i b_i, evaluated relative to the largest term
        let terms: Vec<f64> = log_y.iter().zip(b).map(|(ly, bi)| ly + numeric::ln(*bi)).collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z: Vec<f64> = terms.iter().map(|t| numeric::exp(t - top)).collect();
        let total: f64 = z.iter().sum();
        if top + numeric::ln(total) >= 0.0 {
            break;
        }
        if iterations >= cap {
            return Err(Error::IterationCap { cap });
        }
        z.iter_mut().for_each(|w| *w /= total);

        let column = problem.oracle.select(&z)?;
        if !(column.cost.is_finite() && column.cost > 0.0) {
            return Err(Error::MalformedOracle(format!(
                "column cost {} is not positive",
                column.cost
            )));
        }
        dense.iter_mut().for_each(|v| *v = 0.0);
        for &(row, a) in &column.entries {
            if row >= m {
                return Err(Error::MalformedOracle(format!("row {row} out of range")));
            }
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::MalformedOracle(format!(
                    "entry ({row}, {a}) is negative or not finite"
                )));
            }
            dense[row] += a;
        }
        let mut q = f64::INFINITY;
        let mut ratio = 0.0;
        for i in 0..m {
            if dense[i] > 0.0 {
                q = q.min(b[i] / dense[i]);
                ratio += z[i] * dense[i] / b[i];
            }
        }
        if q == f64::INFINITY {
            return Err(Error::MalformedOracle("column has no positive entry".into()));
        }
        ratio /= column.cost;
        if ratio > 0.0 {
            upper_bound = upper_bound.min(kappa / ratio);
        }

        for i in 0..m {
            if dense[i] > 0.0 {
                let share = dense[i] * q / b[i];
                log_y[i] += numeric::ln_1p(step * share);
                loads[i] += share;
            }
        }
        let slot = match index.get(&column.id) {
            Some(&k) => k,
            None => {
                index.insert(column.id.clone(), columns.len());
                columns.push((column.id, 0.0, column.cost));
                columns.len() - 1
            }
        };
        columns[slot].1 += q;
        iterations += 1;
    }

    let max_raw = loads.iter().copied().fold(0.0f64, f64::max);
    let scale = phases.max(max_raw);
    let objective: f64 = columns.iter().map(|(_, x, c)| c * x / scale).sum();
    let certified_epsilon = if upper_bound.is_finite() && upper_bound > 0.0 {
        (1.0 - objective / upper_bound).max(0.0)
    } else {
        0.0
    };
    Ok(PackingSolution {
        columns: columns.into_iter().map(|(id, x, _)| (id, x / scale)).collect(),
        objective,
        upper_bound,
        certified_epsilon,
        iterations,
        oracle_calls: iterations,
        max_load: max_raw / scale,
    })
}

/// Explicit dense packing instance; the oracle scans all columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitPackingOracle {
    matrix: Vec<Vec<f64>>,
    capacities: Vec<f64>,
    values: Vec<f64>,
    kappa: f64,
}

impl ExplicitPackingOracle {
    /// Validates the data and rejects all-zero columns (the LP would be
    /// unbounded).
    pub fn new(matrix: Vec<Vec<f64>>, capacities: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_dense(&matrix, &capacities, &values)?;
        if let Some(j) = (0..values.len()).find(|&j| matrix.iter().all(|r| r[j] == 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "column {j} has no positive entry; the packing LP is unbounded"
            )));
        }
        Ok(Self {
            matrix,
            capacities,
            values,
            kappa: 1.0,
        })
    }

    /// Degrades the oracle: it returns the worst column whose ratio is within
    /// `kappa` of the best one.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::InvalidArgument(format!("kappa = {kappa} must be at least 1")));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn into_problem(self) -> Result<PackingProblem<Self>> {
        PackingProblem::new(self.capacities.clone(), self)
    }

    pub fn num_columns(&self) -> usize {
        self.values.len()
    }
}

impl PackingOracle for ExplicitPackingOracle {
    type Id = usize;

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn select(&mut self, weights: &[f64]) -> Result<Column<usize>> {
        let m = self.matrix.len();
        let ratios: Vec<f64> = (0..self.values.len())
            .map(|j| {
                (0..m)
                    .map(|i| weights[i] * self.matrix[i][j] / self.capacities[i])
                    .sum::<f64>()
                    / self.values[j]
            })
            .collect();
        let best = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let ceiling = self.kappa * best;
        let j = (0..ratios.len())
            .filter(|&j| ratios[j] <= ceiling)
            .max_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(b.cmp(&a)))
            .ok_or_else(|| Error::MalformedOracle("no column available".into()))?;
        Ok(Column {
            id: j,
            cost: self.values[j],
            entries: (0..m)
                .filter(|&i| self.matrix[i][j] != 0.0)
                .map(|i| (i, self.matrix[i][j]))
                .collect(),
        })
    }
}

/// Answer of the demand oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub player: usize,
    pub bundle: Bundle,
    pub ratio: f64,
}

/// Player `k` and set `T` minimising `(y_k + sum_{j in T} z_j) / v_k(T)`.
///
/// Single-minded players only consider their bundle. For additive players the
/// optimal set is found by bisection on the ratio `beta`: `beta` is
/// achievable iff `y_k + sum_j min(0, z_j - beta a_j) <= 0`, witnessed by
/// `T(beta) = { j : a_j > 0, beta a_j >= z_j }`. Players without value are
/// skipped; ties go to the lower player index.
pub fn auction_demand_oracle(y: &[f64], z: &[f64], profile: &[Valuation]) -> Result<Demand> {
    if y.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            found: y.len(),
        });
    }
    if y.iter().chain(z).any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument("demand weights must be non-negative".into()));
    }
    let mut best: Option<Demand> = None;
    for (k, v) in profile.iter().enumerate() {
        let Some((bundle, ratio)) = best_bundle(y[k], z, v)? else {
            continue;
        };
        if best.map_or(true, |b| ratio < b.ratio) {
            best = Some(Demand {
                player: k,
                bundle,
                ratio,
            });
        }
    }
    best.ok_or(Error::NoDemand)
}

const BISECTION_STEPS: usize = 200;

fn best_bundle(y: f64, z: &[f64], v: &Valuation) -> Result<Option<(Bundle, f64)>> {
    match v {
        Valuation::SingleMinded { bundle, value } => {
            if *value == 0.0 {
                return Ok(None);
            }
            let cost: f64 = y + bundle
                .iter()
                .map(|j| {
                    z.get(*j).copied().ok_or(Error::DimensionMismatch {
                        expected: j + 1,
                        found: z.len(),
                    })
                })
                .sum::<Result<f64>>()?;
            Ok(Some((crate::auction::mask_of(bundle), cost / value)))
        }
        Valuation::Additive { values } => {
            if values.len() != z.len() {
                return Err(Error::DimensionMismatch {
                    expected: values.len(),
                    found: z.len(),
                });
            }
            let total: f64 = values.iter().sum();
            if total == 0.0 {
                return Ok(None);
            }
            let set_at = |beta: f64| -> Bundle {
                values
                    .iter()
                    .zip(z)
                    .enumerate()
                    .filter(|(_, (a, zj))| **a > 0.0 && beta * **a >= **zj)
                    .fold(0, |m, (j, _)| m | 1 << j)
            };
            let feasible = |beta: f64| -> bool {
                let slack: f64 = values.iter().zip(z).map(|(a, zj)| (zj - beta * a).min(0.0)).sum();
                y + slack <= 0.0
            };
            let mut lo = 0.0;
            let mut hi = (y + z.iter().sum::<f64>()) / total;
            if !feasible(lo) {
                for _ in 0..BISECTION_STEPS {
                    if hi - lo <= 1e-12 * hi {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if feasible(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            } else {
                hi = 0.0;
            }
            let mut set = set_at(hi);
            if set == 0 {
                // hi was the all-items bound and only ties with it remain
                set = values
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a > 0.0)
                    .fold(0, |m, (j, _)| m | 1 << j);
            }
            let cost = y + items_of(set).iter().map(|j| z[*j]).sum::<f64>();
            Ok(Some((set, cost / v.value_of(set))))
        }
    }
}

/// Demand oracle as a packing oracle over rows `players ++ items`, all with
/// capacity one. Columns are `(player, bundle)` with cost `v_k(bundle)`.
#[derive(Debug, Clone)]
pub struct AuctionDemandOracle<'a> {
    profile: &'a [Valuation],
    items: usize,
    kappa: f64,
}

impl<'a> AuctionDemandOracle<'a> {
    pub fn new(profile: &'a [Valuation], items: usize) -> Result<Self> {
        if profile.iter().all(Valuation::is_zero) {
            return Err(Error::NoDemand);
        }
        Ok(Self {
            profile,
            items,
            kappa: 1.0,
        })
    }

    /// Degrades the oracle: among the players' best bundles it returns the one
    /// with the largest ratio that is still within `kappa` of the minimum.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::InvalidArgument(format!("kappa = {kappa} must be at least 1")));
        }
        self.kappa = kappa;
        Ok(self)
    }
}

impl PackingOracle for AuctionDemandOracle<'_> {
    type Id = (usize, Bundle);

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn select(&mut self, weights: &[f64]) -> Result<Column<(usize, Bundle)>> {
        let n = self.profile.len();
        if weights.len() != n + self.items {
            return Err(Error::DimensionMismatch {
                expected: n + self.items,
                found: weights.len(),
            });
        }
        let (y, z) = weights.split_at(n);
        let demand = if self.kappa == 1.0 {
            auction_demand_oracle(y, z, self.profile)?
        } else {
            let mut options = Vec::new();
            for (k, v) in self.profile.iter().enumerate() {
                if let Some((bundle, ratio)) = best_bundle(y[k], z, v)? {
                    options.push(Demand {
                        player: k,
                        bundle,
                        ratio,
                    });
                }
            }
            let best = options.iter().map(|d| d.ratio).fold(f64::INFINITY, f64::min);
            options
                .into_iter()
                .filter(|d| d.ratio <= self.kappa * best)
                .fold(None, |acc: Option<Demand>, d| match acc {
                    Some(a) if a.ratio >= d.ratio => Some(a),
                    _ => Some(d),
                })
                .ok_or(Error::NoDemand)?
        };
        let mut entries = vec![(demand.player, 1.0)];
        entries.extend(items_of(demand.bundle).into_iter().map(|j| (n + j, 1.0)));
        Ok(Column {
            id: (demand.player, demand.bundle),
            cost: self.profile[demand.player].value_of(demand.bundle),
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive(values: &[f64]) -> Valuation {
        Valuation::Additive {
            values: values.to_vec(),
        }
    }

    #[test]
    fn single_row_single_column() {
        let mut p = ExplicitPackingOracle::new(vec![vec![1.0]], vec![1.0], vec![1.0])
            .unwrap()
            .into_problem()
            .unwrap();
        let sol = solve_packing(&mut p, 0.1).unwrap();
        assert!(sol.objective >= 0.9 && sol.objective <= 1.0 + 1e-12);
        assert!(sol.max_load <= 1.0 + 1e-12);
        assert!(sol.upper_bound >= 1.0 - 1e-12);
    }

    #[test]
    fn two_additive_bidders() {
        let profile = [additive(&[3.0, 1.0]), additive(&[1.0, 3.0])];
        let oracle = AuctionDemandOracle::new(&profile, 2).unwrap();
        let mut p = PackingProblem::new(vec![1.0; 4], oracle).unwrap();
        let sol = solve_packing(&mut p, 0.05).unwrap();
        assert!(sol.objective >= 0.95 * 6.0, "{}", sol.objective);
        assert!(sol.upper_bound >= 6.0 - 1e-9);

        let oracle = AuctionDemandOracle::new(&profile, 2).unwrap().with_kappa(2.0).unwrap();
        let mut p = PackingProblem::new(vec![1.0; 4], oracle).unwrap();
        let sol = solve_packing(&mut p, 0.05).unwrap();
        assert!(sol.objective >= 0.475 * 6.0, "{}", sol.objective);
    }

    #[test]
    fn single_minded_demand() {
        let profile = [Valuation::SingleMinded {
            bundle: vec![0, 1],
            value: 4.0,
        }];
        let d = auction_demand_oracle(&[1.0], &[1.0, 1.0], &profile).unwrap();
        assert_eq!(d.bundle, 0b11);
        assert!((d.ratio - 0.75).abs() < 1e-15);
    }

    #[test]
    fn additive_demand_examples() {
        let d = auction_demand_oracle(&[0.0], &[0.0, 0.0], &[additive(&[2.0, 2.0])]).unwrap();
        assert_eq!((d.bundle, d.ratio), (0b11, 0.0));
        let d = auction_demand_oracle(&[2.0], &[1.0, 3.0], &[additive(&[4.0, 1.0])]).unwrap();
        assert_eq!(d.bundle, 0b01);
        assert!((d.ratio - 0.75).abs() < 1e-9);
    }

    #[test]
    fn zero_players_are_skipped() {
        let profile = [additive(&[0.0, 0.0]), additive(&[1.0, 0.0])];
        let d = auction_demand_oracle(&[0.0, 1.0], &[0.0, 0.0], &profile).unwrap();
        assert_eq!(d.player, 1);
        assert_eq!(
            auction_demand_oracle(&[0.0], &[0.0, 0.0], &profile[..1]),
            Err(Error::NoDemand)
        );
    }

    #[test]
    fn unbounded_column_rejected() {
        assert!(ExplicitPackingOracle::new(vec![vec![1.0, 0.0]], vec![1.0], vec![1.0, 1.0]).is_err());
    }
}
