//! MWU solver for covering LPs `min c.x s.t. A x >= b, x >= 0` in the column
//! oracle model.
//!
//! The loop keeps the normalised row loads `A_i x / b_i`, gives every active
//! row (load below the threshold `T = ln(m) / eps^2`) the weight
//! `(1 - eps)^load`, asks the oracle for a column that is good for these
//! weights, and raises that column by the largest step that lifts no active
//! row by more than one unit. Once every load reaches `T` the iterate is
//! divided by the minimum load.
//!
//! Two oracle flavours are supported:
//!
//! * [`ColumnOracle`] maximises `(1/c_j) sum_i z_i a_ij / b_i` within a factor
//!   `kappa`; the result satisfies `c.x <= (1 + 4 eps) / kappa * OPT`.
//! * [`UnitColumnOracle`] (unit costs and targets) only promises a column with
//!   `z^T A 1_j >= 1` for normalised `z`; the result satisfies
//!   `1.x <= 1 + 4 eps`.
//!
//! A single row would give `T = 0`; the threshold is clamped to 1 so the
//! final scaling is well defined (see [`crate::numeric::mwu_threshold`]).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::numeric::{self, FEAS_TOL, ZERO_TOL};
use crate::{Error, Result};

/// A column `a_{., j}` with its cost, as delivered by an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Column<Id> {
    pub id: Id,
    pub cost: f64,
    /// Sparse `(row, value)` entries; values must be non-negative.
    pub entries: Vec<(usize, f64)>,
}

/// Oracle `O_kappa`: given normalised row weights, returns a column whose
/// ratio `(1/c_j) sum_i z_i a_ij / b_i` is within `kappa` of the best.
pub trait ColumnOracle {
    type Id: Clone + Ord;

    fn select(&mut self, weights: &[f64]) -> Result<Column<Self::Id>>;
}

/// Oracle `O'` for unit costs and targets: given `z` with `1.z = 1`, returns
/// a column with `z^T A 1_j >= 1`.
pub trait UnitColumnOracle {
    type Id: Clone + Ord;

    fn select(&mut self, weights: &[f64]) -> Result<(Self::Id, Vec<(usize, f64)>)>;
}

/// Row targets `b > 0` plus the oracle that generates columns.
#[derive(Debug, Clone)]
pub struct CoveringProblem<O> {
    targets: Vec<f64>,
    oracle: O,
}

impl<O> CoveringProblem<O> {
    pub fn new(targets: Vec<f64>, oracle: O) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("covering problem needs at least one row".into()));
        }
        if let Some(b) = targets.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidArgument(format!("row target {b} is not positive")));
        }
        Ok(Self { targets, oracle })
    }

    pub fn num_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn into_oracle(self) -> O {
        self.oracle
    }
}

/// Loop state: normalised loads, threshold and iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringState {
    loads: Vec<f64>,
    threshold: f64,
    iteration: usize,
}

impl CoveringState {
    pub fn new(rows: usize, epsilon: f64) -> Self {
        Self {
            loads: vec![0.0; rows],
            threshold: numeric::mwu_threshold(rows, epsilon),
            iteration: 0,
        }
    }

    /// State with prescribed loads (used to inspect the weight rule).
    pub fn with_loads(loads: Vec<f64>, epsilon: f64) -> Self {
        let threshold = numeric::mwu_threshold(loads.len(), epsilon);
        Self {
            loads,
            threshold,
            iteration: 0,
        }
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_active(&self, row: usize) -> bool {
        self.loads[row] < self.threshold
    }

    pub fn active_rows(&self) -> Vec<usize> {
        (0..self.loads.len()).filter(|&i| self.is_active(i)).collect()
    }

    pub fn min_load(&self) -> f64 {
        self.loads.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Normalised MWU weights `z_i ∝ (1 - eps)^{load_i}` on active rows, zero on
/// inactive rows. Evaluated in log space with max-subtraction.
pub fn weight_vector(state: &CoveringState, epsilon: f64) -> Result<Vec<f64>> {
    let log_base = numeric::ln(1.0 - epsilon);
    let mut z = vec![0.0; state.loads.len()];
    let mut max_log = f64::NEG_INFINITY;
    for (i, load) in state.loads.iter().enumerate() {
        if state.is_active(i) {
            max_log = max_log.max(load * log_base);
        }
    }
    if max_log == f64::NEG_INFINITY {
        return Err(Error::EmptyActiveList);
    }
    let mut total = 0.0;
    for (i, load) in state.loads.iter().enumerate() {
        if state.is_active(i) {
            z[i] = numeric::exp(load * log_base - max_log);
            total += z[i];
        }
    }
    z.iter_mut().for_each(|w| *w /= total);
    Ok(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSolution<Id> {
    /// Support of `x_hat` in order of first selection.
    pub columns: Vec<(Id, f64)>,
    pub iterations: usize,
    pub oracle_calls: usize,
    /// `c . x_hat`.
    pub objective: f64,
    /// Minimum normalised load of `A x_hat`; at least `1 - 1e-9`.
    pub min_load: f64,
    /// Minimum load `M(t)` of the unscaled iterate (the scaling divisor).
    pub scale: f64,
    pub threshold: f64,
    /// Loads of the unscaled iterate at termination.
    pub final_loads: Vec<f64>,
}

impl<Id> CoveringSolution<Id> {
    pub fn support_size(&self) -> usize {
        self.columns.iter().filter(|(_, v)| *v > 0.0).count()
    }

    pub fn total(&self) -> f64 {
        self.columns.iter().map(|(_, v)| v).sum()
    }
}

/// One pass of the MWU loop, recorded for invariant checks.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Index into [`CoveringSolution::columns`].
    pub column: usize,
    pub delta: f64,
    pub active_before: Vec<usize>,
    /// `max_i delta * a_ij / b_i` over the rows active before the step.
    pub max_active_step: f64,
    pub loads_after: Vec<f64>,
}

/// Runs the MWU loop with an `O_kappa` oracle.
pub fn solve_covering<O: ColumnOracle>(
    problem: &mut CoveringProblem<O>,
    epsilon: f64,
    kappa: f64,
) -> Result<CoveringSolution<O::Id>> {
    check_kappa(kappa)?;
    let oracle = &mut problem.oracle;
    run(&problem.targets, epsilon, |z| oracle.select(z), None)
}

/// [`solve_covering`] that also returns the per-iteration trace.
pub fn solve_covering_traced<O: ColumnOracle>(
    problem: &mut CoveringProblem<O>,
    epsilon: f64,
    kappa: f64,
) -> Result<(CoveringSolution<O::Id>, Vec<IterationRecord>)> {
    check_kappa(kappa)?;
    let mut trace = Vec::new();
    let oracle = &mut problem.oracle;
    let sol = run(&problem.targets, epsilon, |z| oracle.select(z), Some(&mut trace))?;
    Ok((sol, trace))
}

/// Unit-cost, unit-target variant driven by an `O'` oracle. Every response is
/// checked with [`check_unit_response`].
pub fn solve_covering_unit<O: UnitColumnOracle>(
    rows: usize,
    oracle: &mut O,
    epsilon: f64,
) -> Result<CoveringSolution<O::Id>> {
    solve_covering_unit_inner(rows, oracle, epsilon, None)
}

pub fn solve_covering_unit_traced<O: UnitColumnOracle>(
    rows: usize,
    oracle: &mut O,
    epsilon: f64,
) -> Result<(CoveringSolution<O::Id>, Vec<IterationRecord>)> {
    let mut trace = Vec::new();
    let sol = solve_covering_unit_inner(rows, oracle, epsilon, Some(&mut trace))?;
    Ok((sol, trace))
}

fn solve_covering_unit_inner<O: UnitColumnOracle>(
    rows: usize,
    oracle: &mut O,
    epsilon: f64,
    trace: Option<&mut Vec<IterationRecord>>,
) -> Result<CoveringSolution<O::Id>> {
    if rows == 0 {
        return Err(Error::InvalidArgument("covering problem needs at least one row".into()));
    }
    let targets = vec![1.0; rows];
    run(
        &targets,
        epsilon,
        |z| {
            let (id, entries) = oracle.select(z)?;
            check_unit_response(z, &entries)?;
            Ok(Column { id, cost: 1.0, entries })
        },
        trace,
    )
}

/// Validates an `O'` response: `z` must be normalised (`|1.z - 1| <= 1e-12`)
/// and the column must reach `z^T a >= 1 - 1e-9`. Returns `z^T a`.
pub fn check_unit_response(weights: &[f64], entries: &[(usize, f64)]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > ZERO_TOL || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::OracleContract(format!(
            "weights must be a probability vector (sum = {total})"
        )));
    }
    let mut value = 0.0;
    for &(row, a) in entries {
        let w = weights
            .get(row)
            .ok_or_else(|| Error::MalformedOracle(format!("row {row} out of range")))?;
        value += w * a;
    }
    if value < 1.0 - FEAS_TOL {
        return Err(Error::OracleContract(format!("column reaches z^T a = {value} < 1")));
    }
    Ok(value)
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} must lie in (0, 1]")));
    }
    Ok(())
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must lie in (0, 1/2]"
        )));
    }
    Ok(())
}

fn run<Id: Clone + Ord>(
    targets: &[f64],
    epsilon: f64,
    mut select: impl FnMut(&[f64]) -> Result<Column<Id>>,
    mut trace: Option<&mut Vec<IterationRecord>>,
) -> Result<CoveringSolution<Id>> {
    check_epsilon(epsilon)?;
    let m = targets.len();
    let mut state = CoveringState::new(m, epsilon);
    let cap = 2 * numeric::mwu_iteration_bound(m, epsilon);

    let mut index: BTreeMap<Id, usize> = BTreeMap::new();
    let mut columns: Vec<(Id, f64, f64)> = Vec::new();
    let mut dense = vec![0.0; m];
    let mut oracle_calls = 0;

    while state.min_load() < state.threshold {
        if state.iteration >= cap {
            return Err(Error::IterationCap { cap });
        }
        let z = weight_vector(&state, epsilon)?;
        oracle_calls += 1;
        let column = select(&z)?;
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

        // delta = min over active rows hit by the column of b_i / a_ij
        let mut delta = f64::INFINITY;
        let mut argmin = usize::MAX;
        for i in 0..m {
            if state.is_active(i) && dense[i] > 0.0 {
                let step = targets[i] / dense[i];
                if step < delta {
                    delta = step;
                    argmin = i;
                }
            }
        }
        if argmin == usize::MAX {
            return Err(Error::MalformedOracle(
                "column has no positive entry on an active row".into(),
            ));
        }

        let active_before = if trace.is_some() {
            state.active_rows()
        } else {
            Vec::new()
        };
        let mut max_active_step = 0.0f64;
        for i in 0..m {
            if dense[i] == 0.0 {
                continue;
            }
            let inc = if i == argmin {
                1.0
            } else {
                delta * dense[i] / targets[i]
            };
            if state.is_active(i) {
                max_active_step = max_active_step.max(inc);
            }
            state.loads[i] += inc;
        }
        state.iteration += 1;

        let slot = match index.get(&column.id) {
            Some(&k) => {
                if columns[k].2 != column.cost {
                    return Err(Error::MalformedOracle("column cost changed between calls".into()));
                }
                k
            }
            None => {
                index.insert(column.id.clone(), columns.len());
                columns.push((column.id, 0.0, column.cost));
                columns.len() - 1
            }
        };
        columns[slot].1 += delta;

        if let Some(trace) = trace.as_deref_mut() {
            trace.push(IterationRecord {
                column: slot,
                delta,
                active_before,
                max_active_step,
                loads_after: state.loads.clone(),
            });
        }
    }

    let scale = state.min_load();
    let objective = columns.iter().map(|(_, x, c)| c * x / scale).sum();
    Ok(CoveringSolution {
        columns: columns.into_iter().map(|(id, x, _)| (id, x / scale)).collect(),
        iterations: state.iteration,
        oracle_calls,
        objective,
        min_load: state.min_load() / scale,
        scale,
        threshold: state.threshold,
        final_loads: state.loads,
    })
}

/// Explicit dense covering instance with an exact or `kappa`-degraded oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCoveringOracle {
    matrix: Vec<Vec<f64>>,
    targets: Vec<f64>,
    costs: Vec<f64>,
    kappa: f64,
}

impl ExplicitCoveringOracle {
    /// Validates `A >= 0` (`m x n`), `b > 0`, `c > 0` and that every row has a
    /// positive entry.
    pub fn new(matrix: Vec<Vec<f64>>, targets: Vec<f64>, costs: Vec<f64>) -> Result<Self> {
        validate_dense(&matrix, &targets, &costs)?;
        if let Some(i) = matrix.iter().position(|r| r.iter().all(|a| *a == 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has no positive entry; the covering LP is infeasible"
            )));
        }
        Ok(Self {
            matrix,
            targets,
            costs,
            kappa: 1.0,
        })
    }

    /// Degrades the oracle: it returns the *worst* column whose ratio is still
    /// at least `kappa` times the best one.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        self.kappa = kappa;
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn into_problem(self) -> Result<CoveringProblem<Self>> {
        CoveringProblem::new(self.targets.clone(), self)
    }

    fn ratio(&self, weights: &[f64], j: usize) -> f64 {
        let s: f64 = (0..self.matrix.len())
            .map(|i| weights[i] * self.matrix[i][j] / self.targets[i])
            .sum();
        s / self.costs[j]
    }
}

impl ColumnOracle for ExplicitCoveringOracle {
    type Id = usize;

    fn select(&mut self, weights: &[f64]) -> Result<Column<usize>> {
        let n = self.costs.len();
        let ratios: Vec<f64> = (0..n).map(|j| self.ratio(weights, j)).collect();
        let best = ratios.iter().copied().fold(0.0f64, f64::max);
        // lowest id among the admissible columns (the best one when kappa = 1)
        let pick = if self.kappa == 1.0 {
            ratios.iter().position(|r| *r == best)
        } else {
            let floor = self.kappa * best;
            (0..n)
                .filter(|&j| ratios[j] >= floor)
                .min_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(a.cmp(&b)))
        };
        let j = pick.ok_or_else(|| Error::MalformedOracle("no column available".into()))?;
        Ok(Column {
            id: j,
            cost: self.costs[j],
            entries: (0..self.matrix.len())
                .filter(|&i| self.matrix[i][j] != 0.0)
                .map(|i| (i, self.matrix[i][j]))
                .collect(),
        })
    }
}

pub(crate) fn validate_dense(matrix: &[Vec<f64>], targets: &[f64], costs: &[f64]) -> Result<()> {
    let m = targets.len();
    let n = costs.len();
    if matrix.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: matrix.len(),
        });
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty LP".into()));
    }
    if let Some(r) = matrix.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.len(),
        });
    }
    if matrix.iter().flatten().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidArgument(
            "matrix entries must be finite and non-negative".into(),
        ));
    }
    if targets.iter().chain(costs).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidArgument(
            "right-hand side and costs must be positive".into(),
        ));
    }
    Ok(())
}
