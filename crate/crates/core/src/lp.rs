//! Exact solver for tiny dense LPs by vertex enumeration.
//!
//! Every basic solution of `{A x <= b, x >= 0}` is obtained by making `n` of
//! the `m + n` constraints tight and solving the square system. This is
//! exponential, but on desk-scale instances (a dozen variables) it is exact
//! up to the conditioning of the linear systems and is independent of any
//! iterative method, which is the point.

use alloc::vec;
use alloc::vec::Vec;

use crate::numeric::FEAS_TOL;
use crate::{Error, Result};

/// Upper limit on the number of candidate bases examined.
pub const MAX_BASES: usize = 5_000_000;

const SNAP_TOL: f64 = 1e-11;

/// `maximize c.x subject to A x <= b, x >= 0` with explicit dense data.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLp {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl DenseLp {
    pub fn new(rows: Vec<Vec<f64>>, rhs: Vec<f64>, objective: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if rows.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: rhs.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let finite = rows.iter().flatten().chain(&rhs).chain(&objective);
        if finite.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("LP data must be finite".into()));
        }
        Ok(Self { rows, rhs, objective })
    }

    /// `minimize c.x subject to A x >= b, x >= 0`, rewritten as a maximization.
    pub fn covering(rows: Vec<Vec<f64>>, rhs: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        let rows = rows.into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect();
        Self::new(
            rows,
            rhs.into_iter().map(|v| -v).collect(),
            cost.into_iter().map(|v| -v).collect(),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Optimal vertex; among optimal vertices (objective within `1e-9`
    /// relative) the lexicographically smallest one is returned. The caller
    /// guarantees that the LP is bounded.
    pub fn maximize(&self) -> Result<LpSolution> {
        let mut best: Option<LpSolution> = None;
        self.for_each_vertex(|x| {
            let value = crate::numeric::dot(&self.objective, &x);
            let replace = match &best {
                None => true,
                Some(b) => {
                    let tol = FEAS_TOL * (1.0 + b.value.abs());
                    value > b.value + tol || (value >= b.value - tol && lex_less(&x, &b.x))
                }
            };
            if replace {
                best = Some(LpSolution { x, value });
            }
        })?;
        best.ok_or_else(|| Error::Precondition("LP has no feasible vertex".into()))
    }

    /// All distinct vertices of the feasible region.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        self.for_each_vertex(|x| {
            if !out.iter().any(|y| approx_eq(y, &x)) {
                out.push(x);
            }
        })?;
        Ok(out)
    }

    fn for_each_vertex(&self, mut visit: impl FnMut(Vec<f64>)) -> Result<()> {
        let n = self.num_vars();
        let m = self.num_rows();
        if n == 0 {
            if self.rhs.iter().all(|b| *b >= -FEAS_TOL) {
                visit(Vec::new());
            }
            return Ok(());
        }
        if binomial(m + n, n) > MAX_BASES {
            return Err(Error::Capacity {
                what: "vertex enumeration bases",
                limit: MAX_BASES,
            });
        }
        let mut pick: Vec<usize> = (0..n).collect();
        let mut matrix = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        loop {
            for (r, &k) in pick.iter().enumerate() {
                if k < m {
                    matrix[r].copy_from_slice(&self.rows[k]);
                    rhs[r] = self.rhs[k];
                } else {
                    matrix[r].iter_mut().for_each(|v| *v = 0.0);
                    matrix[r][k - m] = 1.0;
                    rhs[r] = 0.0;
                }
            }
            if let Some(mut x) = solve_square(&mut matrix, &mut rhs) {
                snap(&mut x);
                if self.is_feasible(&x) {
                    x.iter_mut().for_each(|v| *v = v.max(0.0));
                    visit(x);
                }
            }
            if !next_combination(&mut pick, m + n) {
                break;
            }
        }
        Ok(())
    }

    fn is_feasible(&self, x: &[f64]) -> bool {
        x.iter().all(|v| *v >= -FEAS_TOL)
            && self
                .rows
                .iter()
                .zip(&self.rhs)
                .all(|(row, b)| crate::numeric::dot(row, x) <= b + FEAS_TOL * (1.0 + b.abs()))
    }
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_square(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn snap(x: &mut [f64]) {
    for v in x.iter_mut() {
        let r = libm::round(*v);
        if (*v - r).abs() < SNAP_TOL {
            *v = r;
        }
        if *v == 0.0 {
            *v = 0.0; // normalise -0.0
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x < y;
        }
    }
    false
}

fn approx_eq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= FEAS_TOL)
}

fn next_combination(pick: &mut [usize], total: usize) -> bool {
    let k = pick.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if pick[i] < total - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Saturating binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return usize::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(4, 2), 6);
    }

    #[test]
    fn covering_two_by_two() {
        // min x1 + x2 s.t. x1 + 2 x2 >= 1, 2 x1 + x2 >= 1: optimum 2/3 at (1/3, 1/3)
        let lp = DenseLp::covering(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let sol = lp.maximize().unwrap();
        assert!((-sol.value - 2.0 / 3.0).abs() < 1e-12);
        assert!((sol.x[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn packing_single_item_two_bidders() {
        // max 3 x1 + x2 s.t. x1 + x2 <= 1
        let lp = DenseLp::new(vec![vec![1.0, 1.0]], vec![1.0], vec![3.0, 1.0]).unwrap();
        let sol = lp.maximize().unwrap();
        assert_eq!(sol.x, vec![1.0, 0.0]);
        assert_eq!(sol.value, 3.0);
        assert_eq!(lp.vertices().unwrap().len(), 3);
    }

    #[test]
    fn ties_break_lexicographically() {
        let lp = DenseLp::new(vec![vec![1.0, 1.0]], vec![1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(lp.maximize().unwrap().x, vec![0.0, 1.0]);
    }

    #[test]
    fn fractional_vertex_of_triangle_instance() {
        // three bidders pairwise sharing one of three items: LP optimum is 1/2 each
        let rows = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]];
        let lp = DenseLp::new(rows, vec![1.0; 3], vec![1.0; 3]).unwrap();
        let sol = lp.maximize().unwrap();
        assert_eq!(sol.x, vec![0.5, 0.5, 0.5]);
        assert_eq!(sol.value, 1.5);
    }
}
