use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::numeric;
use crate::{Error, Result};

/// Constants of the randomized fractional mechanism for `n` players and
/// target truthfulness `1 - eps0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismParams {
    pub epsilon0: f64,
    pub players: usize,
    /// Probability of the welfare branch, `(1 - eps0/n)^n`.
    pub solver_probability: f64,
    /// Probability of each dominating branch, `(1 - solver_probability)/n`.
    pub player_probability: f64,
    /// `eps0 / 2`.
    pub utility_slack: f64,
    /// `utility_slack (1 - solver_probability)^2 / n^3`.
    pub activity_threshold: f64,
    /// `activity_threshold / player_probability`.
    pub dominating_price: f64,
    /// Required accuracy of the welfare solver, `activity_threshold utility_slack (1 - solver_probability) / (8n)`.
    pub epsilon: f64,
}

impl MechanismParams {
    pub fn new(epsilon0: f64, players: usize) -> Result<Self> {
        if !(epsilon0 > 0.0 && epsilon0 <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "epsilon0 = {epsilon0} must lie in (0, 1/2]"
            )));
        }
        if players == 0 {
            return Err(Error::InvalidArgument("mechanism needs at least one player".into()));
        }
        let n = players as f64;
        let solver_probability = numeric::powi(1.0 - epsilon0 / n, players as i32);
        let player_probability = (1.0 - solver_probability) / n;
        let utility_slack = epsilon0 / 2.0;
        let activity_threshold = utility_slack * (1.0 - solver_probability) * (1.0 - solver_probability) / (n * n * n);
        Ok(Self {
            epsilon0,
            players,
            solver_probability,
            player_probability,
            utility_slack,
            activity_threshold,
            dominating_price: activity_threshold / player_probability,
            epsilon: activity_threshold * utility_slack * (1.0 - solver_probability) / (8.0 * n),
        })
    }

    /// `(solver_probability, q_1, ..., q_n)`.
    pub fn branch_probabilities(&self) -> Vec<f64> {
        let mut q = vec![self.player_probability; self.players + 1];
        q[0] = self.solver_probability;
        q
    }

    /// `eps0^5 / (128 n^4)`.
    pub fn epsilon_lower_bound(&self) -> f64 {
        numeric::powi(self.epsilon0, 5) / (128.0 * numeric::powi(self.players as f64, 4))
    }

    /// `eps0^5 / (16 n^4)`.
    pub fn epsilon_upper_bound(&self) -> f64 {
        numeric::powi(self.epsilon0, 5) / (16.0 * numeric::powi(self.players as f64, 4))
    }
}
