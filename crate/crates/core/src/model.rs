//! Points, decompositions and the oracle-model interfaces to a packing
//! polytope `Q` and its integral points `Q_I`.

use alloc::format;
use alloc::vec::Vec;

use crate::numeric::{dot, FEAS_TOL, ZERO_TOL};
use crate::{Error, Result};

/// A point of `Q` with its support cached.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint {
    coords: Vec<f64>,
    support: Vec<usize>,
}

impl FractionalPoint {
    /// Builds a point, snapping entries within [`ZERO_TOL`] of zero to zero.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let mut coords = coords;
        for (index, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() || *c < -ZERO_TOL {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {index} = {c} is not a non-negative real"
                )));
            }
            if *c <= ZERO_TOL {
                *c = 0.0;
            }
        }
        let support = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(|(j, _)| j)
            .collect();
        Ok(Self { coords, support })
    }

    pub fn zeros(dimension: usize) -> Self {
        Self {
            coords: alloc::vec![0.0; dimension],
            support: Vec::new(),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.coords.iter().map(|c| c * factor).collect())
    }

    /// Recomputes the support and compares it with the cached one.
    pub fn support_is_consistent(&self) -> bool {
        self.coords.iter().all(|c| *c >= 0.0)
            && self
                .coords
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0.0)
                .map(|(j, _)| j)
                .eq(self.support.iter().copied())
    }
}

/// A point of `Z^d_{>=0}`; membership in `Q_I` is decided by a
/// [`PackingDomain`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntegralPoint {
    coords: Vec<u32>,
}

impl IntegralPoint {
    pub fn new(coords: Vec<u32>) -> Self {
        Self { coords }
    }

    pub fn zeros(dimension: usize) -> Self {
        Self {
            coords: alloc::vec![0; dimension],
        }
    }

    /// Unit vector `1_j`.
    pub fn unit(dimension: usize, j: usize) -> Self {
        let mut p = Self::zeros(dimension);
        p.coords[j] = 1;
        p
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.coords[j]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0)
    }

    pub fn l1_norm(&self) -> u64 {
        self.coords.iter().map(|c| u64::from(*c)).sum()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.coords.iter().zip(weights).map(|(c, w)| f64::from(*c) * w).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| f64::from(*c)).collect()
    }

    /// `self - 1_j`; `None` when coordinate `j` is already zero.
    pub fn minus_unit(&self, j: usize) -> Option<Self> {
        let c = *self.coords.get(j)?;
        if c == 0 {
            return None;
        }
        let mut out = self.clone();
        out.coords[j] = c - 1;
        Some(out)
    }

    /// Zeroes every coordinate for which `drop` returns true.
    pub fn zeroed_where(&self, mut drop: impl FnMut(usize) -> bool) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .enumerate()
                .map(|(j, c)| if drop(j) { 0 } else { *c })
                .collect(),
        }
    }
}

/// Weighted list of integral points whose weights form a probability vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexDecomposition {
    pub terms: Vec<(f64, IntegralPoint)>,
}

impl ConvexDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|(l, _)| *l).sum()
    }

    /// `sum_i lambda_i x^i`.
    pub fn combination(&self, dimension: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; dimension];
        for (lambda, point) in &self.terms {
            for (o, c) in out.iter_mut().zip(point.coords()) {
                *o += lambda * f64::from(*c);
            }
        }
        out
    }

    /// Checks non-negative weights summing to one (within `1e-12`) and that
    /// every point lies in the domain.
    pub fn validate(&self, domain: &dyn PackingDomain) -> Result<()> {
        for (lambda, point) in &self.terms {
            if !(*lambda >= 0.0) {
                return Err(Error::Internal(format!("negative weight {lambda}")));
            }
            if !verify_membership(domain, point)? {
                return Err(Error::Internal(format!("point {point:?} is not in Q_I")));
            }
        }
        let sum = self.weight_sum();
        if (sum - 1.0).abs() > ZERO_TOL {
            return Err(Error::Internal(format!("weights sum to {sum}")));
        }
        Ok(())
    }
}

/// Oracle access to a downward-closed polytope `Q` through its integral
/// points.
///
/// Implementations must be downward closed: if `x` is feasible then so is
/// every integral `0 <= y <= x`.
pub trait PackingDomain {
    fn dimension(&self) -> usize;

    /// Membership of a point of matching dimension in `Q_I`.
    fn contains(&self, point: &IntegralPoint) -> bool;
}

/// An `alpha`-integrality-gap verifier: for weights `v >= 0` and `x* in Q` it
/// returns `x in Q_I` with `v.x >= alpha * v.x*`.
pub trait IntegralityGapVerifier {
    fn alpha(&self) -> f64;

    fn dimension(&self) -> usize;

    fn find(&self, weights: &[f64], x_star: &FractionalPoint) -> Result<IntegralPoint>;

    /// Calls [`find`](Self::find) and enforces the contract.
    fn find_checked(&self, weights: &[f64], x_star: &FractionalPoint) -> Result<IntegralPoint> {
        let d = self.dimension();
        if weights.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: weights.len(),
            });
        }
        if x_star.dimension() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x_star.dimension(),
            });
        }
        let x = self.find(weights, x_star)?;
        if x.dimension() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.dimension(),
            });
        }
        let reference = dot(weights, x_star.coords());
        let achieved = x.dot(weights);
        let required = self.alpha() * reference;
        if achieved < required - FEAS_TOL * reference.abs() {
            return Err(Error::VerifierContract { achieved, required });
        }
        Ok(x)
    }
}

pub fn verify_membership(domain: &dyn PackingDomain, point: &IntegralPoint) -> Result<bool> {
    if point.dimension() != domain.dimension() {
        return Err(Error::DimensionMismatch {
            expected: domain.dimension(),
            found: point.dimension(),
        });
    }
    Ok(domain.contains(point))
}

/// Sets the given coordinates to zero; the result stays in `Q_I` by downward
/// closure.
pub fn zero_out(domain: &dyn PackingDomain, point: &IntegralPoint, indices: &[usize]) -> Result<IntegralPoint> {
    let d = domain.dimension();
    if point.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: point.dimension(),
        });
    }
    if let Some(bad) = indices.iter().find(|j| **j >= d) {
        return Err(Error::InvalidArgument(format!(
            "index {bad} out of range for dimension {d}"
        )));
    }
    Ok(point.zeroed_where(|j| indices.contains(&j)))
}
