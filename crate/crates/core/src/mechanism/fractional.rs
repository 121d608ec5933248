use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::params::MechanismParams;
use crate::auction::{AuctionDomain, WelfareSolver};
use crate::model::{FractionalPoint, PackingDomain};
use crate::numeric;
use crate::{Error, Result};

/// `v_i(u^i)`: player `i`'s value when receiving every item.
pub fn dominating_value(domain: &AuctionDomain, weights: &[f64], i: usize) -> f64 {
    domain.block(i).map(|c| weights[c]).sum()
}

/// `L_i = sum_{j != i} v_j(u^j)` for every player.
pub fn others_dominating_values(domain: &AuctionDomain, weights: &[f64]) -> Vec<f64> {
    let own: Vec<f64> = (0..domain.num_players())
        .map(|i| dominating_value(domain, weights, i))
        .collect();
    let total: f64 = own.iter().sum();
    (0..own.len())
        .map(|i| {
            own.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v)
                .sum::<f64>()
        })
        .map(|l: f64| if total == 0.0 { 0.0 } else { l })
        .collect()
}

/// Report profile with player `i`'s weights set to zero.
pub fn without_player(domain: &AuctionDomain, weights: &[f64], i: usize) -> Vec<f64> {
    let block = domain.block(i);
    weights
        .iter()
        .enumerate()
        .map(|(c, w)| if block.contains(&c) { 0.0 } else { *w })
        .collect()
}

/// `v_{-i}(x)`.
pub fn others_value(domain: &AuctionDomain, weights: &[f64], i: usize, x: &[f64]) -> f64 {
    (0..domain.num_players())
        .filter(|j| *j != i)
        .map(|j| domain.player_value(j, weights, x))
        .sum()
}

fn check_weights(domain: &AuctionDomain, weights: &[f64]) -> Result<()> {
    if weights.len() != domain.dimension() {
        return Err(Error::DimensionMismatch {
            expected: domain.dimension(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidArgument("reported values must be non-negative".into()));
    }
    Ok(())
}

/// The welfare solver together with the payment rule
/// `p_i = max(v_{-i}(x') - v_{-i}(x) - beta_i, 0)`, `beta_i = eps L_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubMechanism {
    /// `x = A(v)`.
    pub allocation: FractionalPoint,
    /// `x'_i = A(0, v_{-i})` per player.
    pub without: Vec<FractionalPoint>,
    pub vcg_payments: Vec<f64>,
    pub betas: Vec<f64>,
    pub payments: Vec<f64>,
    /// Largest certified error over the `n + 1` solver runs.
    pub certified_epsilon: f64,
}

/// Runs the solver on the report and on every report with one player
/// removed, and prices with slack `beta_i = epsilon * L_i`.
pub fn run_sub_mechanism(
    domain: &AuctionDomain,
    weights: &[f64],
    solver: &dyn WelfareSolver,
    epsilon: f64,
) -> Result<SubMechanism> {
    check_weights(domain, weights)?;
    let n = domain.num_players();
    let main = solver.solve(weights)?;
    let mut certified = main.certified_epsilon;
    let x = main.allocation;
    let others = others_dominating_values(domain, weights);
    let mut without = Vec::with_capacity(n);
    let mut vcg = Vec::with_capacity(n);
    let mut betas = Vec::with_capacity(n);
    let mut payments = Vec::with_capacity(n);
    for i in 0..n {
        let reduced = without_player(domain, weights, i);
        let alt = solver.solve(&reduced)?;
        certified = certified.max(alt.certified_epsilon);
        let p =
            others_value(domain, weights, i, alt.allocation.coords()) - others_value(domain, weights, i, x.coords());
        let beta = epsilon * others[i];
        vcg.push(p);
        betas.push(beta);
        payments.push((p - beta).max(0.0));
        without.push(alt.allocation);
    }
    Ok(SubMechanism {
        allocation: x,
        without,
        vcg_payments: vcg,
        betas,
        payments,
        certified_epsilon: certified,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcgOutcome {
    pub allocation: FractionalPoint,
    /// `p_i = v_{-i}(x^{(-i)}) - v_{-i}(x*)`.
    pub payments: Vec<f64>,
    pub welfare: f64,
}

/// Fractional VCG with an exact welfare solver.
pub fn fractional_vcg(domain: &AuctionDomain, weights: &[f64], solver: &dyn WelfareSolver) -> Result<VcgOutcome> {
    let sub = run_sub_mechanism(domain, weights, solver, 0.0)?;
    if sub.certified_epsilon > 0.0 {
        return Err(Error::Precondition(format!(
            "fractional VCG needs an exact solver, got certified error {}",
            sub.certified_epsilon
        )));
    }
    Ok(VcgOutcome {
        welfare: numeric::dot(weights, sub.allocation.coords()),
        allocation: sub.allocation,
        payments: sub.vcg_payments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerStatus {
    /// `v_i(u^i)` under the report.
    pub dominating_value: f64,
    /// `L_i`.
    pub others_dominating: f64,
    pub beta: f64,
    pub vcg_payment: f64,
    /// Payment of the welfare branch before inactive players are zeroed.
    pub payment: f64,
    /// `v_i(x)` under the report.
    pub value: f64,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalBranch {
    pub probability: f64,
    pub allocation: FractionalPoint,
    pub payments: Vec<f64>,
}

/// The full distribution of the randomized fractional mechanism: branch 0
/// runs the welfare solver, branch `j >= 1` hands player `j` everything.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalMechanism {
    pub params: MechanismParams,
    pub players: Vec<PlayerStatus>,
    pub branches: Vec<FractionalBranch>,
    pub certified_epsilon: f64,
}

impl FractionalMechanism {
    pub fn active_set(&self) -> Vec<usize> {
        (0..self.players.len()).filter(|&i| self.players[i].active).collect()
    }

    /// `E[v̄_i(x) - p_i]` for true weights `truth` (only player `i`'s block
    /// is read).
    pub fn expected_utility(&self, domain: &AuctionDomain, i: usize, truth: &[f64]) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * (domain.player_value(i, truth, b.allocation.coords()) - b.payments[i]))
            .sum()
    }

    pub fn expected_welfare(&self, truth: &[f64]) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * numeric::dot(truth, b.allocation.coords()))
            .sum()
    }

    pub fn draw_branch<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let q: Vec<f64> = self.branches.iter().map(|b| b.probability).collect();
        sample_index(&q, rng.random::<f64>())
    }
}

/// Index `k` with `sum_{h<k} w_h <= u < sum_{h<=k} w_h`, skipping zero
/// weights; the last positive index absorbs rounding.
pub fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        last = k;
        acc += w;
        if target < acc {
            return k;
        }
    }
    last
}

/// Builds the mechanism for a report. The solver's certified error must not
/// exceed `params.epsilon`.
pub fn approx_fractional_mechanism(
    domain: &AuctionDomain,
    weights: &[f64],
    solver: &dyn WelfareSolver,
    params: &MechanismParams,
) -> Result<FractionalMechanism> {
    let n = domain.num_players();
    if params.players != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: params.players,
        });
    }
    let sub = run_sub_mechanism(domain, weights, solver, params.epsilon)?;
    if sub.certified_epsilon > params.epsilon {
        return Err(Error::OracleContract(format!(
            "welfare solver certifies only {} but the mechanism needs {}",
            sub.certified_epsilon, params.epsilon
        )));
    }
    let others = others_dominating_values(domain, weights);
    let x = sub.allocation.coords();
    let ratio = params.player_probability / params.solver_probability;
    let players: Vec<PlayerStatus> = (0..n)
        .map(|i| {
            let own = dominating_value(domain, weights, i);
            let value = domain.player_value(i, weights, x);
            let utility_hat = value - sub.payments[i];
            let active = utility_hat + params.utility_slack * ratio * own
                >= ratio * params.dominating_price * others[i]
                && own >= params.activity_threshold * others[i];
            PlayerStatus {
                dominating_value: own,
                others_dominating: others[i],
                beta: sub.betas[i],
                vcg_payment: sub.vcg_payments[i],
                payment: sub.payments[i],
                value,
                active,
            }
        })
        .collect();

    let mut branches = Vec::with_capacity(n + 1);
    let mut welfare_x = x.to_vec();
    let mut welfare_p = vec![0.0; n];
    for (i, status) in players.iter().enumerate() {
        if status.active {
            welfare_p[i] = status.payment;
        } else {
            for c in domain.block(i) {
                welfare_x[c] = 0.0;
            }
        }
    }
    branches.push(FractionalBranch {
        probability: params.solver_probability,
        allocation: FractionalPoint::new(welfare_x)?,
        payments: welfare_p,
    });
    for (j, status) in players.iter().enumerate() {
        let mut p = vec![0.0; n];
        if status.active {
            p[j] = params.dominating_price * status.others_dominating;
        }
        branches.push(FractionalBranch {
            probability: params.player_probability,
            allocation: FractionalPoint::new(domain.dominating_allocation(j).to_f64())?,
            payments: p,
        });
    }
    Ok(FractionalMechanism {
        params: *params,
        players,
        branches,
        certified_epsilon: sub.certified_epsilon,
    })
}
