//! Multigraph sampling with a prescribed degree sequence, an exact count of
//! units on friend dyads, and a per-dyad multiplicity cap.
//!
//! Units are wired one at a time: sample a stub uniformly, then sample a
//! partner among the owner's eligible nodes with probability proportional to
//! remaining degree. Friend dyads are wired first until the target is met,
//! then the rest goes to non-friend dyads, so the friend-unit count is exact
//! rather than a minimum. A dead end triggers a full restart with fresh
//! draws.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::friendship::FriendshipNetwork;

pub const DEFAULT_MAX_RESTARTS: usize = 100;

/// Constraints for one matching: target share of units on friend dyads and
/// the per-dyad cap.
#[derive(Debug, Clone, Copy)]
pub struct MatchConstraints {
    pub friend_fraction: f64,
    pub max_multiplicity: u8,
    pub target_friend_units: u64,
}

impl MatchConstraints {
    /// Target friend units T = round(p * sum(d) / 2), half away from zero.
    pub fn new(degrees: &[u64], friend_fraction: f64, max_multiplicity: u8) -> Self {
        let total: u64 = degrees.iter().sum();
        let target = (friend_fraction * total as f64 / 2.0).round() as u64;
        MatchConstraints {
            friend_fraction,
            max_multiplicity,
            target_friend_units: target,
        }
    }

    /// Same, but with the target clamped to the wireable friend capacity
    /// m * |friendships|.
    pub fn new_capped(
        degrees: &[u64],
        friendships: &FriendshipNetwork,
        friend_fraction: f64,
        max_multiplicity: u8,
    ) -> Self {
        let mut c = Self::new(degrees, friend_fraction, max_multiplicity);
        let capacity = max_multiplicity as u64 * friendships.edge_count() as u64;
        c.target_friend_units = c.target_friend_units.min(capacity);
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityViolation {
    /// The degree sum must be even to pair all stubs.
    OddDegreeSum { sum: u64 },
    /// m * |friendships| must cover the friend-unit target.
    FriendCapacity { capacity: u64, target: u64 },
    /// The largest degree must not exceed the capped capacity of all nodes.
    MaxDegree { max_degree: u64, capacity: u64 },
}

impl std::fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeasibilityViolation::OddDegreeSum { sum } => write!(f, "odd degree sum {sum}"),
            FeasibilityViolation::FriendCapacity { capacity, target } => {
                write!(f, "friend capacity {capacity} below target {target}")
            }
            FeasibilityViolation::MaxDegree {
                max_degree,
                capacity,
            } => write!(f, "max degree {max_degree} above capped capacity {capacity}"),
        }
    }
}

/// Check the three feasibility conditions; an empty list means ok.
pub fn check_feasibility(
    degrees: &[u64],
    friendships: &FriendshipNetwork,
    friend_fraction: f64,
    max_multiplicity: u8,
) -> Vec<FeasibilityViolation> {
    let mut violations = Vec::new();
    let sum: u64 = degrees.iter().sum();
    if sum % 2 != 0 {
        violations.push(FeasibilityViolation::OddDegreeSum { sum });
    }
    let constraints = MatchConstraints::new(degrees, friend_fraction, max_multiplicity);
    let capacity = max_multiplicity as u64 * friendships.edge_count() as u64;
    if capacity < constraints.target_friend_units {
        violations.push(FeasibilityViolation::FriendCapacity {
            capacity,
            target: constraints.target_friend_units,
        });
    }
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    if max_degree > 0 {
        let capped: u64 = degrees
            .iter()
            .map(|&d| d.min(max_multiplicity as u64))
            .sum();
        if max_degree > capped {
            violations.push(FeasibilityViolation::MaxDegree {
                max_degree,
                capacity: capped,
            });
        }
    }
    violations
}

/// Sparse symmetric multigraph layer with capped multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiLayer {
    n: usize,
    max_multiplicity: u8,
    entries: HashMap<(u32, u32), u8>, // key (min, max)
}

impl MultiLayer {
    pub fn empty(n: usize, max_multiplicity: u8) -> Self {
        MultiLayer {
            n,
            max_multiplicity,
            entries: HashMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_multiplicity(&self) -> u8 {
        self.max_multiplicity
    }

    pub fn multiplicity(&self, i: u32, j: u32) -> u8 {
        *self
            .entries
            .get(&(i.min(j), i.max(j)))
            .unwrap_or(&0)
    }

    pub fn dyad_count(&self) -> usize {
        self.entries.len()
    }

    pub fn total_units(&self) -> u64 {
        self.entries.values().map(|&m| m as u64).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), u8)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Entries sorted by (i, j).
    pub fn sorted_entries(&self) -> Vec<((u32, u32), u8)> {
        let mut v: Vec<_> = self.entries().collect();
        v.sort_unstable_by_key(|&(k, _)| k);
        v
    }

    /// Per-node unit sums.
    pub fn unit_degrees(&self) -> Vec<u64> {
        let mut degrees = vec![0u64; self.n];
        for (&(i, j), &m) in &self.entries {
            degrees[i as usize] += m as u64;
            degrees[j as usize] += m as u64;
        }
        degrees
    }

    pub fn friend_units(&self, friendships: &FriendshipNetwork) -> u64 {
        self.entries
            .iter()
            .filter(|(&(i, j), _)| friendships.is_friend(i, j))
            .map(|(_, &m)| m as u64)
            .sum()
    }

    fn add_unit(&mut self, i: u32, j: u32) {
        let key = (i.min(j), i.max(j));
        *self.entries.entry(key).or_insert(0) += 1;
    }

    #[cfg(test)]
    pub(crate) fn add_unit_for_tests(&mut self, i: u32, j: u32) {
        self.add_unit(i, j);
    }
}

/// Histogram of dyad multiplicities, indexed 1..=max_multiplicity.
pub fn multiplicity_histogram(layer: &MultiLayer) -> Vec<usize> {
    let mut hist = vec![0usize; layer.max_multiplicity() as usize + 1];
    for (_, m) in layer.entries() {
        hist[m as usize] += 1;
    }
    hist
}

struct MatchState {
    residual: Vec<u64>,
    residual_tree: Fenwick,
    owner_tree: Fenwick,
    masked: Vec<bool>,
    layer: MultiLayer,
}

impl MatchState {
    fn new(degrees: &[u64], max_multiplicity: u8) -> Self {
        MatchState {
            residual: degrees.to_vec(),
            residual_tree: Fenwick::from_weights(degrees),
            owner_tree: Fenwick::from_weights(degrees),
            masked: vec![false; degrees.len()],
            layer: MultiLayer::empty(degrees.len(), max_multiplicity),
        }
    }

    fn wire(&mut self, i: u32, j: u32) {
        self.layer.add_unit(i, j);
        for node in [i as usize, j as usize] {
            self.residual[node] -= 1;
            self.residual_tree.add(node, -1);
            if !self.masked[node] {
                self.owner_tree.add(node, -1);
            }
        }
    }

    fn mask(&mut self, i: usize) {
        if !self.masked[i] {
            self.masked[i] = true;
            self.owner_tree.add(i, -(self.residual[i] as i64));
        }
    }

    fn unmask_all(&mut self) {
        self.masked = vec![false; self.residual.len()];
        self.owner_tree = Fenwick::from_weights(&self.residual);
    }

    fn sample_owner(&self, rng: &mut impl Rng) -> Option<u32> {
        let total = self.owner_tree.total();
        if total == 0 {
            return None;
        }
        Some(self.owner_tree.find(rng.gen_range(0..total)) as u32)
    }
}

const REJECTION_CAP: usize = 64;

/// Pick a friend of `owner` with residual degree, below the cap, weighted by
/// residual degree.
fn pick_friend_partner(
    state: &MatchState,
    friendships: &FriendshipNetwork,
    owner: u32,
    m: u8,
    rng: &mut impl Rng,
) -> Option<u32> {
    let candidates: Vec<(u32, u64)> = friendships
        .friends(owner as usize)
        .iter()
        .filter_map(|&j| {
            let r = state.residual[j as usize];
            (r > 0 && state.layer.multiplicity(owner, j) < m).then_some((j, r))
        })
        .collect();
    weighted_pick(&candidates, rng)
}

/// Pick a non-friend partner by rejection sampling from the residual tree,
/// falling back to exact enumeration when rejections pile up.
fn pick_nonfriend_partner(
    state: &MatchState,
    friendships: &FriendshipNetwork,
    owner: u32,
    m: u8,
    rng: &mut impl Rng,
) -> Option<u32> {
    let total = state.residual_tree.total();
    debug_assert!(total > 0);
    for _ in 0..REJECTION_CAP {
        let j = state.residual_tree.find(rng.gen_range(0..total)) as u32;
        if j != owner
            && !friendships.is_friend(owner, j)
            && state.layer.multiplicity(owner, j) < m
        {
            return Some(j);
        }
    }
    let candidates: Vec<(u32, u64)> = (0..state.residual.len() as u32)
        .filter_map(|j| {
            let r = state.residual[j as usize];
            (r > 0
                && j != owner
                && !friendships.is_friend(owner, j)
                && state.layer.multiplicity(owner, j) < m)
                .then_some((j, r))
        })
        .collect();
    weighted_pick(&candidates, rng)
}

fn weighted_pick(candidates: &[(u32, u64)], rng: &mut impl Rng) -> Option<u32> {
    let total: u64 = candidates.iter().map(|&(_, w)| w).sum();
    if total == 0 {
        return None;
    }
    let mut target = rng.gen_range(0..total);
    for &(j, w) in candidates {
        if target < w {
            return Some(j);
        }
        target -= w;
    }
    unreachable!()
}

/// Sample a layer matching `degrees` exactly, with exactly
/// `constraints.target_friend_units` units on friend dyads and every dyad at
/// or below the multiplicity cap.
pub fn match_stubs(
    degrees: &[u64],
    friendships: &FriendshipNetwork,
    constraints: &MatchConstraints,
    rng: &mut impl Rng,
    max_restarts: usize,
) -> Result<MultiLayer> {
    assert_eq!(degrees.len(), friendships.n(), "degree/network size mismatch");
    let violations = check_feasibility(
        degrees,
        friendships,
        constraints.friend_fraction,
        constraints.max_multiplicity,
    );
    // the capped constructor may lower T below round(p*sum/2); only parity
    // and structural violations block the run
    let blocking: Vec<_> = violations
        .iter()
        .filter(|v| {
            !matches!(v, FeasibilityViolation::FriendCapacity { target, .. }
                if *target > constraints.target_friend_units)
        })
        .collect();
    if !blocking.is_empty() {
        let msg = blocking
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Infeasible(msg));
    }

    let m = constraints.max_multiplicity;
    let target = constraints.target_friend_units;
    for restart in 0..=max_restarts {
        if let Some(layer) = try_match(degrees, friendships, m, target, rng) {
            debug_assert_eq!(layer.unit_degrees(), degrees);
            return Ok(layer);
        }
        if restart == max_restarts {
            break;
        }
    }
    Err(Error::DeadEnd {
        restarts: max_restarts,
    })
}

fn try_match(
    degrees: &[u64],
    friendships: &FriendshipNetwork,
    m: u8,
    target_friend_units: u64,
    rng: &mut impl Rng,
) -> Option<MultiLayer> {
    let mut state = MatchState::new(degrees, m);

    // phase 1: friend units
    let mut friend_units = 0u64;
    while friend_units < target_friend_units {
        let owner = state.sample_owner(rng)?;
        match pick_friend_partner(&state, friendships, owner, m, rng) {
            Some(j) => {
                state.wire(owner, j);
                friend_units += 1;
            }
            // owner's friend options are exhausted for good; return its
            // stubs to the pool for phase 2
            None => state.mask(owner as usize),
        }
    }

    // phase 2: remaining units go to non-friend dyads
    state.unmask_all();
    while state.residual_tree.total() > 0 {
        let owner = state.sample_owner(rng)?;
        match pick_nonfriend_partner(&state, friendships, owner, m, rng) {
            Some(j) => state.wire(owner, j),
            None => state.mask(owner as usize),
        }
    }
    Some(state.layer)
}
