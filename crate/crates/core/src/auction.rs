//! Combinatorial auctions with single-minded and additive bidders as a
//! packing domain.
//!
//! Every coordinate of the domain is a *bid*: an owner and a nonempty item
//! bundle. A single-minded player owns one bid on their bundle, an additive
//! player owns one bid per item. The polytope is
//! `Q = { x >= 0 : sum over bids containing j of x_c <= 1 for every item j }`
//! and a player's value is linear in their own block of coordinates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::lp::DenseLp;
use crate::model::{FractionalPoint, IntegralPoint, IntegralityGapVerifier, PackingDomain};
use crate::numeric::{self, FEAS_TOL};
use crate::packing::{solve_packing, AuctionDemandOracle, PackingProblem};
use crate::rng::SeededRng;
use crate::{Error, Result};

pub const MAX_PLAYERS: usize = 20;
pub const MAX_ITEMS: usize = 20;
/// Dimension cap of the vertex-enumeration welfare solver.
pub const MAX_EXACT_DIMENSION: usize = 12;
/// Dimension cap of the enumerating verifier.
pub const MAX_ENUM_DIMENSION: usize = 20;
/// Cap on `|Q_I|` for the enumerating verifier.
pub const MAX_INTEGRAL_POINTS: usize = 1 << 16;

/// Item set as a bitmask.
pub type Bundle = u64;

#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    /// Value `value` for any set containing `bundle`, zero otherwise.
    SingleMinded { bundle: Vec<usize>, value: f64 },
    /// Value `sum_{j in S} values[j]`.
    Additive { values: Vec<f64> },
}

impl Valuation {
    pub fn value_of(&self, set: Bundle) -> f64 {
        match self {
            Valuation::SingleMinded { bundle, value } => {
                if mask_of(bundle) & !set == 0 {
                    *value
                } else {
                    0.0
                }
            }
            Valuation::Additive { values } => values
                .iter()
                .enumerate()
                .filter(|(j, _)| set >> j & 1 == 1)
                .map(|(_, a)| a)
                .sum(),
        }
    }

    /// Same bundle structure, every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Valuation::SingleMinded { bundle, value } => Valuation::SingleMinded {
                bundle: bundle.clone(),
                value: value * factor,
            },
            Valuation::Additive { values } => Valuation::Additive {
                values: values.iter().map(|a| a * factor).collect(),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Valuation::SingleMinded { value, .. } => *value == 0.0,
            Valuation::Additive { values } => values.iter().all(|a| *a == 0.0),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::SingleMinded { .. } => "single_minded",
            Valuation::Additive { .. } => "additive",
        }
    }
}

pub fn mask_of(items: &[usize]) -> Bundle {
    items.iter().fold(0, |m, j| m | 1 << j)
}

pub fn items_of(mask: Bundle) -> Vec<usize> {
    (0..64).filter(|j| mask >> j & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionInstance {
    items: usize,
    players: Vec<Valuation>,
}

impl AuctionInstance {
    pub fn new(items: usize, players: Vec<Valuation>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::InvalidArgument("auction needs at least one player".into()));
        }
        if items == 0 {
            return Err(Error::InvalidArgument("auction needs at least one item".into()));
        }
        if players.len() > MAX_PLAYERS {
            return Err(Error::Capacity {
                what: "players",
                limit: MAX_PLAYERS,
            });
        }
        if items > MAX_ITEMS {
            return Err(Error::Capacity {
                what: "items",
                limit: MAX_ITEMS,
            });
        }
        for (i, v) in players.iter().enumerate() {
            match v {
                Valuation::SingleMinded { bundle, value } => {
                    if bundle.is_empty() {
                        return Err(Error::InvalidArgument(format!("player {i} has an empty bundle")));
                    }
                    if let Some(j) = bundle.iter().find(|j| **j >= items) {
                        return Err(Error::InvalidArgument(format!(
                            "player {i} wants item {j}, but there are only {items} items"
                        )));
                    }
                    if mask_of(bundle).count_ones() as usize != bundle.len() {
                        return Err(Error::InvalidArgument(format!("player {i} lists an item twice")));
                    }
                    check_value(i, *value)?;
                }
                Valuation::Additive { values } => {
                    if values.len() != items {
                        return Err(Error::DimensionMismatch {
                            expected: items,
                            found: values.len(),
                        });
                    }
                    for a in values {
                        check_value(i, *a)?;
                    }
                }
            }
        }
        Ok(Self { items, players })
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Valuation] {
        &self.players
    }

    /// Copy with player `i`'s valuation replaced by `valuation`.
    pub fn with_player(&self, i: usize, valuation: Valuation) -> Result<Self> {
        let mut players = self.players.clone();
        players[i] = valuation;
        Self::new(self.items, players)
    }

    pub fn domain(&self) -> AuctionDomain {
        let mut bids = Vec::new();
        let mut blocks = Vec::new();
        for (owner, v) in self.players.iter().enumerate() {
            let start = bids.len();
            match v {
                Valuation::SingleMinded { bundle, .. } => bids.push(Bid {
                    owner,
                    items: mask_of(bundle),
                }),
                Valuation::Additive { .. } => bids.extend((0..self.items).map(|j| Bid { owner, items: 1 << j })),
            }
            blocks.push(start..bids.len());
        }
        AuctionDomain {
            items: self.items,
            bids,
            blocks,
        }
    }

    /// Coordinate weights `w` with `v_i(x) = sum_{c in block i} w_c x_c`.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = Vec::new();
        for v in &self.players {
            match v {
                Valuation::SingleMinded { value, .. } => w.push(*value),
                Valuation::Additive { values } => w.extend_from_slice(values),
            }
        }
        w
    }

    /// Valuations with the same bundle structure whose coordinate weights are
    /// `weights`.
    pub fn valuations_for(&self, weights: &[f64]) -> Result<Vec<Valuation>> {
        let domain = self.domain();
        if weights.len() != domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                found: weights.len(),
            });
        }
        Ok(self
            .players
            .iter()
            .zip(&domain.blocks)
            .map(|(v, block)| match v {
                Valuation::SingleMinded { bundle, .. } => Valuation::SingleMinded {
                    bundle: bundle.clone(),
                    value: weights[block.start],
                },
                Valuation::Additive { .. } => Valuation::Additive {
                    values: weights[block.clone()].to_vec(),
                },
            })
            .collect())
    }
}

fn check_value(player: usize, value: f64) -> Result<()> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "player {player} has value {value}; values must be finite and non-negative"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bid {
    pub owner: usize,
    pub items: Bundle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionDomain {
    items: usize,
    bids: Vec<Bid>,
    blocks: Vec<Range<usize>>,
}

impl AuctionDomain {
    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn num_players(&self) -> usize {
        self.blocks.len()
    }

    pub fn bids(&self) -> &[Bid] {
        &self.bids
    }

    /// Coordinates owned by player `i`.
    pub fn block(&self, i: usize) -> Range<usize> {
        self.blocks[i].clone()
    }

    /// `v_i(x)` for coordinate weights `w`.
    pub fn player_value(&self, i: usize, weights: &[f64], x: &[f64]) -> f64 {
        self.block(i).map(|c| weights[c] * x[c]).sum()
    }

    pub fn player_value_integral(&self, i: usize, weights: &[f64], x: &IntegralPoint) -> f64 {
        self.block(i).map(|c| weights[c] * f64::from(x.get(c))).sum()
    }

    /// Dominating allocation `u^i`: every coordinate of player `i` at one,
    /// i.e. all items go to player `i`.
    pub fn dominating_allocation(&self, i: usize) -> IntegralPoint {
        let block = self.block(i);
        IntegralPoint::new((0..self.dimension()).map(|c| u32::from(block.contains(&c))).collect())
    }

    /// `x` with every coordinate outside player `i`'s block set to zero.
    pub fn restrict_to(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let block = self.block(i);
        x.iter()
            .enumerate()
            .map(|(c, v)| if block.contains(&c) { *v } else { 0.0 })
            .collect()
    }

    pub fn item_loads(&self, x: &[f64]) -> Vec<f64> {
        let mut loads = vec![0.0; self.items];
        for (bid, v) in self.bids.iter().zip(x) {
            for j in items_of(bid.items) {
                loads[j] += v;
            }
        }
        loads
    }

    /// Membership of a fractional point in `Q` with absolute slack `tol`.
    pub fn contains_fractional(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dimension()
            && x.iter().all(|v| *v >= -tol)
            && self.item_loads(x).iter().all(|l| *l <= 1.0 + tol)
    }

    /// The packing LP `max w.x over Q` with one row per item.
    pub fn welfare_lp(&self, weights: &[f64]) -> Result<DenseLp> {
        let rows = (0..self.items)
            .map(|j| {
                self.bids
                    .iter()
                    .map(|b| if b.items >> j & 1 == 1 { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        DenseLp::new(rows, vec![1.0; self.items], weights.to_vec())
    }

    /// All points of `Q_I` in lexicographic order.
    pub fn integral_points(&self) -> Result<Vec<IntegralPoint>> {
        let d = self.dimension();
        if d > MAX_ENUM_DIMENSION {
            return Err(Error::Capacity {
                what: "enumeration dimension",
                limit: MAX_ENUM_DIMENSION,
            });
        }
        let mut out = Vec::new();
        let mut current = vec![0u32; d];
        self.enumerate(0, 0, &mut current, &mut out)?;
        out.sort();
        Ok(out)
    }

    fn enumerate(&self, c: usize, used: Bundle, current: &mut Vec<u32>, out: &mut Vec<IntegralPoint>) -> Result<()> {
        if c == current.len() {
            if out.len() == MAX_INTEGRAL_POINTS {
                return Err(Error::Capacity {
                    what: "integral points",
                    limit: MAX_INTEGRAL_POINTS,
                });
            }
            out.push(IntegralPoint::new(current.clone()));
            return Ok(());
        }
        self.enumerate(c + 1, used, current, out)?;
        let items = self.bids[c].items;
        if used & items == 0 {
            current[c] = 1;
            self.enumerate(c + 1, used | items, current, out)?;
            current[c] = 0;
        }
        Ok(())
    }
}

impl PackingDomain for AuctionDomain {
    fn dimension(&self) -> usize {
        self.bids.len()
    }

    fn contains(&self, point: &IntegralPoint) -> bool {
        let mut used: Bundle = 0;
        for (bid, &k) in self.bids.iter().zip(point.coords()) {
            match k {
                0 => {}
                1 if used & bid.items == 0 => used |= bid.items,
                _ => return false,
            }
        }
        true
    }
}

/// Greedy winner determination: positive-weight bids by `w / sqrt(|bundle|)`
/// descending (lower index first on ties), accepted when conflict-free.
/// Achieves `alpha = 1/sqrt(items)` against any point of `Q`.
#[derive(Debug, Clone)]
pub struct GreedyVerifier {
    domain: AuctionDomain,
}

impl GreedyVerifier {
    pub fn new(domain: AuctionDomain) -> Self {
        Self { domain }
    }
}

impl IntegralityGapVerifier for GreedyVerifier {
    fn alpha(&self) -> f64 {
        1.0 / numeric::sqrt(self.domain.items as f64)
    }

    fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    fn find(&self, weights: &[f64], _x_star: &FractionalPoint) -> Result<IntegralPoint> {
        let bids = &self.domain.bids;
        let key = |c: usize| weights[c] / numeric::sqrt(f64::from(bids[c].items.count_ones()));
        let mut order: Vec<usize> = (0..bids.len()).filter(|&c| weights[c] > 0.0).collect();
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
        let mut used: Bundle = 0;
        let mut x = vec![0u32; bids.len()];
        for c in order {
            if used & bids[c].items == 0 {
                used |= bids[c].items;
                x[c] = 1;
            }
        }
        Ok(IntegralPoint::new(x))
    }
}

/// Exhaustive verifier returning `argmax_{x in Q_I} v.x` (the smallest
/// point in lexicographic order among ties).
///
/// Its guarantee is the integrality gap of the instance: 1 when every bid
/// is on a single item (the item rows are then totally unimodular), otherwise
/// measured by [`integrality_gap`].
#[derive(Debug, Clone)]
pub struct ExactVerifier {
    domain: AuctionDomain,
    points: Vec<IntegralPoint>,
    alpha: f64,
}

impl ExactVerifier {
    pub fn new(domain: AuctionDomain) -> Result<Self> {
        let points = domain.integral_points()?;
        let alpha = gap_from_points(&domain, &points)?;
        Ok(Self { domain, points, alpha })
    }

    pub fn points(&self) -> &[IntegralPoint] {
        &self.points
    }

    pub fn is_lp_integral(&self) -> bool {
        self.alpha == 1.0
    }
}

impl IntegralityGapVerifier for ExactVerifier {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    fn find(&self, weights: &[f64], _x_star: &FractionalPoint) -> Result<IntegralPoint> {
        let mut best = &self.points[0];
        let mut best_value = best.dot(weights);
        for p in &self.points[1..] {
            let v = p.dot(weights);
            if v > best_value {
                best = p;
                best_value = v;
            }
        }
        Ok(best.clone())
    }
}

/// Largest `alpha` with `max_{Q_I} v.y >= alpha * v.x` for all `v >= 0` and
/// `x in Q`.
///
/// For a vertex `x` of `Q` the worst weights solve
/// `max { v.x : v.y <= 1 for all y in Q_I }`, whose value `V(x)` gives the
/// local gap `1 / V(x)`; the instance gap is the minimum over the fractional
/// vertices.
pub fn integrality_gap(domain: &AuctionDomain) -> Result<f64> {
    gap_from_points(domain, &domain.integral_points()?)
}

fn gap_from_points(domain: &AuctionDomain, points: &[IntegralPoint]) -> Result<f64> {
    if domain.bids.iter().all(|b| b.items.count_ones() == 1) {
        return Ok(1.0);
    }
    let d = domain.dimension();
    let vertices = domain.welfare_lp(&vec![0.0; d])?.vertices()?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| !p.is_zero())
        .map(IntegralPoint::to_f64)
        .collect();
    let mut alpha = 1.0f64;
    for x in vertices {
        if x.iter().all(|v| *v == libm::round(*v)) {
            continue;
        }
        let lp = DenseLp::new(rows.clone(), vec![1.0; rows.len()], x)?;
        let worst = lp.maximize()?.value;
        if worst > 1.0 {
            alpha = alpha.min(1.0 / worst);
        }
    }
    Ok(alpha)
}

/// Which verifier backs a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaMode {
    Exact,
    Greedy,
}

impl AlphaMode {
    pub fn name(self) -> &'static str {
        match self {
            AlphaMode::Exact => "exact",
            AlphaMode::Greedy => "greedy",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exact" => Ok(AlphaMode::Exact),
            "greedy" => Ok(AlphaMode::Greedy),
            _ => Err(Error::InvalidArgument(format!(
                "unknown alpha mode {name:?}; expected exact or greedy"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AuctionVerifier {
    Exact(ExactVerifier),
    Greedy(GreedyVerifier),
}

impl AuctionVerifier {
    pub fn new(domain: AuctionDomain, mode: AlphaMode) -> Result<Self> {
        Ok(match mode {
            AlphaMode::Exact => AuctionVerifier::Exact(ExactVerifier::new(domain)?),
            AlphaMode::Greedy => AuctionVerifier::Greedy(GreedyVerifier::new(domain)),
        })
    }

    pub fn mode(&self) -> AlphaMode {
        match self {
            AuctionVerifier::Exact(_) => AlphaMode::Exact,
            AuctionVerifier::Greedy(_) => AlphaMode::Greedy,
        }
    }
}

impl IntegralityGapVerifier for AuctionVerifier {
    fn alpha(&self) -> f64 {
        match self {
            AuctionVerifier::Exact(v) => v.alpha(),
            AuctionVerifier::Greedy(v) => v.alpha(),
        }
    }

    fn dimension(&self) -> usize {
        match self {
            AuctionVerifier::Exact(v) => v.dimension(),
            AuctionVerifier::Greedy(v) => v.dimension(),
        }
    }

    fn find(&self, weights: &[f64], x_star: &FractionalPoint) -> Result<IntegralPoint> {
        match self {
            AuctionVerifier::Exact(v) => v.find(weights, x_star),
            AuctionVerifier::Greedy(v) => v.find(weights, x_star),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareSolution {
    pub allocation: FractionalPoint,
    /// `eps` with `w.x >= (1 - eps) * max_Q w.x`; zero for exact solvers.
    pub certified_epsilon: f64,
    pub iterations: usize,
}

/// A fractional welfare maximiser over the auction polytope.
///
/// Implementations must be pure functions of the weights: the audits rely on
/// `solve(w)` returning the same point on every call.
pub trait WelfareSolver {
    fn solve(&self, weights: &[f64]) -> Result<WelfareSolution>;

    fn name(&self) -> &'static str;
}

/// Vertex enumeration on the item rows; among optimal vertices the
/// lexicographically smallest one is returned.
#[derive(Debug, Clone)]
pub struct ExactWelfareSolver {
    domain: AuctionDomain,
}

impl ExactWelfareSolver {
    pub fn new(domain: AuctionDomain) -> Result<Self> {
        if domain.dimension() > MAX_EXACT_DIMENSION {
            return Err(Error::Capacity {
                what: "exact solver dimension",
                limit: MAX_EXACT_DIMENSION,
            });
        }
        Ok(Self { domain })
    }
}

impl WelfareSolver for ExactWelfareSolver {
    fn solve(&self, weights: &[f64]) -> Result<WelfareSolution> {
        let sol = self.domain.welfare_lp(weights)?.maximize()?;
        Ok(WelfareSolution {
            allocation: FractionalPoint::new(sol.x)?,
            certified_epsilon: 0.0,
            iterations: 0,
        })
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}

/// Width-independent MWU packing over (player, bundle) columns with the
/// demand oracle, projected back to bid coordinates.
#[derive(Debug, Clone)]
pub struct MwuWelfareSolver {
    instance: AuctionInstance,
    epsilon: f64,
}

impl MwuWelfareSolver {
    pub fn new(instance: AuctionInstance, epsilon: f64) -> Result<Self> {
        crate::covering::check_epsilon(epsilon)?;
        Ok(Self { instance, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl WelfareSolver for MwuWelfareSolver {
    fn solve(&self, weights: &[f64]) -> Result<WelfareSolution> {
        let domain = self.instance.domain();
        let valuations = self.instance.valuations_for(weights)?;
        if valuations.iter().all(Valuation::is_zero) {
            return Ok(WelfareSolution {
                allocation: FractionalPoint::zeros(domain.dimension()),
                certified_epsilon: 0.0,
                iterations: 0,
            });
        }
        let n = valuations.len();
        let items = self.instance.items;
        let oracle = AuctionDemandOracle::new(&valuations, items)?;
        let mut problem = PackingProblem::new(vec![1.0; n + items], oracle)?;
        let sol = solve_packing(&mut problem, self.epsilon)?;
        let mut x = vec![0.0; domain.dimension()];
        for ((player, bundle), value) in &sol.columns {
            let block = domain.block(*player);
            match &valuations[*player] {
                Valuation::SingleMinded { .. } => x[block.start] += value,
                Valuation::Additive { .. } => {
                    for j in items_of(*bundle) {
                        x[block.start + j] += value;
                    }
                }
            }
        }
        // the packing scaling is exact up to rounding in the last digit
        let load = domain.item_loads(&x).into_iter().fold(0.0f64, f64::max);
        if load > 1.0 {
            if load > 1.0 + FEAS_TOL {
                return Err(Error::Internal(format!("packing overshoot {load}")));
            }
            x.iter_mut().for_each(|v| *v /= load);
        }
        Ok(WelfareSolution {
            allocation: FractionalPoint::new(x)?,
            certified_epsilon: sol.certified_epsilon,
            iterations: sol.iterations,
        })
    }

    fn name(&self) -> &'static str {
        "mwu"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    SingleMindedUniform,
    AdditiveUniform,
    /// Single-minded bundles that all contain item 0.
    AdversarialOverlap,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [
        InstanceKind::SingleMindedUniform,
        InstanceKind::AdditiveUniform,
        InstanceKind::AdversarialOverlap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::SingleMindedUniform => "single_minded_uniform",
            InstanceKind::AdditiveUniform => "additive_uniform",
            InstanceKind::AdversarialOverlap => "adversarial_overlap",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidArgument(format!(
                "unknown instance kind {name:?}; expected one of {}",
                known.join(", ")
            ))
        })
    }
}

/// Random instance with values drawn uniformly from the integers `1..=100`.
/// Bundles are uniform over nonempty subsets (for the overlap kind: uniform
/// over subsets containing item 0).
pub fn generate_instance(kind: InstanceKind, n: usize, m: usize, seed: u64) -> Result<AuctionInstance> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(String::from(
            "generated instances need at least one player and one item",
        )));
    }
    if n > MAX_PLAYERS {
        return Err(Error::Capacity {
            what: "players",
            limit: MAX_PLAYERS,
        });
    }
    if m > MAX_ITEMS {
        return Err(Error::Capacity {
            what: "items",
            limit: MAX_ITEMS,
        });
    }
    let mut rng = SeededRng::new(seed).stream(SeededRng::INSTANCE_GEN);
    let full: Bundle = (1 << m) - 1;
    let players = (0..n)
        .map(|_| match kind {
            InstanceKind::SingleMindedUniform => {
                let mask = rng.random_range(1..=full);
                Valuation::SingleMinded {
                    bundle: items_of(mask),
                    value: f64::from(rng.random_range(1u32..=100)),
                }
            }
            InstanceKind::AdversarialOverlap => {
                let mask = rng.random_range(0..=full >> 1) << 1 | 1;
                Valuation::SingleMinded {
                    bundle: items_of(mask),
                    value: f64::from(rng.random_range(1u32..=100)),
                }
            }
            InstanceKind::AdditiveUniform => Valuation::Additive {
                values: (0..m).map(|_| f64::from(rng.random_range(1u32..=100))).collect(),
            },
        })
        .collect();
    AuctionInstance::new(m, players)
}
