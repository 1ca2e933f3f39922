use std::collections::HashMap;

use smallvec::SmallVec;

use super::params::{confidence_radius, eta, PlannerConfig};
use super::{PlanError, RunCounter};
use crate::mdp::{sample_transition, GenerativeModel, RngStream, Root};

pub(crate) type AvgId = usize;
pub(crate) type MaxId = usize;

struct Slot<S> {
    state: S,
    /// Index of the first sample that reached this child.
    first: usize,
    child: Option<MaxId>,
}

/// Persistent memory of a state-action node.
pub(crate) struct AvgNode<S> {
    state: S,
    action: usize,
    /// Sampled children in sampling order, as slot indices.
    sampled: Vec<u32>,
    /// Distinct children in order of first appearance.
    slots: Vec<Slot<S>>,
    lookup: HashMap<S, u32>,
    reward_sum: f64,
    /// Multiplicity of each slot within `sampled[..active_len]`.
    active_counts: Vec<u64>,
    active_len: usize,
}

impl<S: Clone + Eq + std::hash::Hash> AvgNode<S> {
    fn new(state: S, action: usize) -> Self {
        Self {
            state,
            action,
            sampled: Vec::new(),
            slots: Vec::new(),
            lookup: HashMap::new(),
            reward_sum: 0.0,
            active_counts: Vec::new(),
            active_len: 0,
        }
    }

    fn push_sample(&mut self, reward: f64, next: S) {
        let index = self.sampled.len();
        let slot = match self.lookup.get(&next) {
            Some(&slot) => slot,
            None => {
                let slot = self.slots.len() as u32;
                self.lookup.insert(next.clone(), slot);
                self.slots.push(Slot {
                    state: next,
                    first: index,
                    child: None,
                });
                self.active_counts.push(0);
                slot
            }
        };
        self.sampled.push(slot);
        self.reward_sum += reward;
    }

    /// Moves the active prefix to the first `m` samples and returns the
    /// number of distinct children inside it.
    fn activate(&mut self, m: usize) -> usize {
        debug_assert!(m <= self.sampled.len());
        while self.active_len < m {
            self.active_counts[self.sampled[self.active_len] as usize] += 1;
            self.active_len += 1;
        }
        while self.active_len > m {
            self.active_len -= 1;
            self.active_counts[self.sampled[self.active_len] as usize] -= 1;
        }
        // slots are ordered by first appearance, so the active ones form a prefix
        self.slots.partition_point(|s| s.first < m)
    }

    fn mean_reward(&self) -> f64 {
        self.reward_sum / self.sampled.len() as f64
    }

    pub(crate) fn sample_count(&self) -> usize {
        self.sampled.len()
    }

    pub(crate) fn active_multiplicities(&self) -> Vec<u64> {
        let n = self.slots.partition_point(|s| s.first < self.active_len);
        self.active_counts[..n].to_vec()
    }
}

#[derive(Debug, Clone)]
struct Arm {
    k: u64,
    mu: f64,
    u: f64,
    eps: f64,
    child: Option<AvgId>,
}

/// Persistent memory of a state node: per-action call counts, last
/// estimates, last radii and last requested biases.
pub(crate) struct MaxNode<S> {
    state: S,
    arms: Vec<Arm>,
    last_choice: Option<usize>,
}

/// Keeps the arms of `live` whose upper bound reaches the best lower bound
/// among `live`. Never adds an arm.
pub(crate) fn prune(live: &mut SmallVec<[usize; 8]>, mu: impl Fn(usize) -> f64, u: impl Fn(usize) -> f64) {
    let best_lower = live
        .iter()
        .map(|&j| mu(j) - 2.0 * u(j))
        .fold(f64::NEG_INFINITY, f64::max);
    live.retain(|i| mu(*i) + 2.0 * u(*i) >= best_lower);
}

/// The planning tree of a single run: node arenas, the oracle counter and the
/// run's random stream.
pub struct SearchTree<'a, M: GenerativeModel> {
    model: &'a M,
    config: &'a PlannerConfig,
    rng: &'a mut RngStream,
    counter: RunCounter,
    avg: Vec<AvgNode<M::State>>,
    max: Vec<MaxNode<M::State>>,
    depth_guard: usize,
    max_depth_reached: usize,
    half_range: f64,
    value_range: f64,
    skip_idle: bool,
}

impl<'a, M: GenerativeModel> SearchTree<'a, M> {
    pub fn new(model: &'a M, config: &'a PlannerConfig, rng: &'a mut RngStream) -> Self {
        let gamma = config.gamma;
        Self {
            model,
            config,
            rng,
            counter: RunCounter::default(),
            avg: Vec::new(),
            max: Vec::new(),
            depth_guard: config.max_depth_guard(),
            max_depth_reached: 0,
            half_range: 1.0 / (2.0 * (1.0 - gamma)),
            value_range: 1.0 / (1.0 - gamma),
            skip_idle: true,
        }
    }

    pub fn counter(&self) -> &RunCounter {
        &self.counter
    }

    pub fn max_depth_reached(&self) -> usize {
        self.max_depth_reached
    }

    pub fn depth_guard(&self) -> usize {
        self.depth_guard
    }

    /// Creates the root node and returns a handle for [`Self::call`].
    pub fn add_root(&mut self, root: Root<M::State>) -> NodeHandle {
        match root {
            Root::Max(s) => NodeHandle::Max(self.new_max(s)),
            Root::Avg(s, a) => NodeHandle::Avg(self.new_avg(s, a)),
        }
    }

    /// Calls a node with sample budget `m` and bias `eps`; the node sits at `depth`.
    pub fn call(
        &mut self,
        node: NodeHandle,
        m: u64,
        eps: f64,
        depth: usize,
    ) -> Result<f64, PlanError> {
        match node {
            NodeHandle::Avg(id) => self.avg_call(id, m, eps, depth),
            NodeHandle::Max(id) => self.max_call(id, m, eps, depth),
        }
    }

    /// Action chosen by a MAX node on its most recent call.
    pub fn last_choice(&self, node: NodeHandle) -> Option<usize> {
        match node {
            NodeHandle::Max(id) => self.max[id].last_choice,
            NodeHandle::Avg(_) => None,
        }
    }

    /// Number of stored transition samples of an AVG node.
    pub fn sample_count(&self, node: NodeHandle) -> Option<usize> {
        match node {
            NodeHandle::Avg(id) => Some(self.avg[id].sample_count()),
            NodeHandle::Max(_) => None,
        }
    }

    /// Child multiplicities inside the active prefix of an AVG node.
    pub fn active_multiplicities(&self, node: NodeHandle) -> Option<Vec<u64>> {
        match node {
            NodeHandle::Avg(id) => Some(self.avg[id].active_multiplicities()),
            NodeHandle::Max(_) => None,
        }
    }

    /// Call counts `k_i` of a MAX node's actions.
    pub fn arm_counts(&self, node: NodeHandle) -> Option<Vec<u64>> {
        match node {
            NodeHandle::Max(id) => Some(self.max[id].arms.iter().map(|a| a.k).collect()),
            NodeHandle::Avg(_) => None,
        }
    }

    fn new_avg(&mut self, state: M::State, action: usize) -> AvgId {
        self.avg.push(AvgNode::new(state, action));
        self.avg.len() - 1
    }

    fn new_max(&mut self, state: M::State) -> MaxId {
        let k = self.model.action_count(&state);
        assert!(k >= 1, "state {state:?} has no actions");
        let arm = Arm {
            k: 0,
            mu: 0.0,
            u: f64::INFINITY,
            eps: f64::INFINITY,
            child: None,
        };
        self.max.push(MaxNode {
            state,
            arms: vec![arm; k],
            last_choice: None,
        });
        self.max.len() - 1
    }

    fn enter(&mut self, depth: usize) -> Result<(), PlanError> {
        if depth > self.depth_guard {
            return Err(PlanError::DepthGuard {
                depth,
                guard: self.depth_guard,
            });
        }
        self.max_depth_reached = self.max_depth_reached.max(depth);
        Ok(())
    }

    fn check_range(&self, v: f64) {
        debug_assert!(
            (-1e-9..=self.value_range + 1e-9).contains(&v),
            "estimate {v} outside [0, {}]",
            self.value_range
        );
    }

    fn avg_call(&mut self, id: AvgId, m: u64, eps: f64, depth: usize) -> Result<f64, PlanError> {
        self.enter(depth)?;
        if eps >= self.half_range {
            return Ok(self.half_range);
        }
        let m = m as usize;
        while self.avg[id].sampled.len() < m {
            if let Some(cap) = self.config.call_cap {
                if self.counter.oracle_calls() + 2 > cap {
                    return Err(PlanError::BudgetExceeded {
                        calls: self.counter.oracle_calls(),
                        cap,
                    });
                }
            }
            let node = &self.avg[id];
            let t = sample_transition(self.model, &node.state, node.action, self.rng)?;
            self.counter.record_sample();
            self.avg[id].push_sample(t.reward, t.next);
        }
        let distinct = self.avg[id].activate(m);
        let child_eps = eps / self.config.gamma;
        let mut mu = 0.0;
        for slot in 0..distinct {
            let k = self.avg[id].active_counts[slot];
            let child = match self.avg[id].slots[slot].child {
                Some(c) => c,
                None => {
                    let c = self.new_max(self.avg[id].slots[slot].state.clone());
                    self.avg[id].slots[slot].child = Some(c);
                    c
                }
            };
            let nu = self.max_call(child, k, child_eps, depth + 1)?;
            mu += nu * k as f64 / m as f64;
        }
        let out = self.avg[id].mean_reward() + self.config.gamma * mu;
        self.check_range(out);
        Ok(out)
    }

    fn child_of(&mut self, id: MaxId, arm: usize) -> AvgId {
        match self.max[id].arms[arm].child {
            Some(c) => c,
            None => {
                let c = self.new_avg(self.max[id].state.clone(), arm);
                self.max[id].arms[arm].child = Some(c);
                c
            }
        }
    }

    fn max_call(&mut self, id: MaxId, m: u64, eps: f64, depth: usize) -> Result<f64, PlanError> {
        self.enter(depth)?;
        if self.max[id].arms.len() == 1 {
            // a single action is never eliminated and the loop never runs
            let child = self.child_of(id, 0);
            let out = self.avg_call(child, m, eps, depth + 1)?;
            self.max[id].last_choice = Some(0);
            return Ok(out);
        }
        let eta = eta(eps, self.config.gamma);
        let stop_radius = (1.0 - eta) * eps;
        let mut live: SmallVec<[usize; 8]> = (0..self.max[id].arms.len()).collect();
        {
            let arms = &self.max[id].arms;
            prune(&mut live, |i| arms[i].mu, |i| arms[i].u);
        }
        while live.len() > 1 {
            let arms = &self.max[id].arms;
            let widest = live.iter().map(|&i| arms[i].u).fold(0.0, f64::max);
            if widest <= stop_radius {
                break;
            }
            if self.skip_idle && self.skip_idle_rounds(id, &live, eps, eta, stop_radius, depth)? {
                continue;
            }
            let arms = &self.max[id].arms;
            // `live` is sorted, so min_by_key keeps the lowest index on ties
            let l = *live.iter().min_by_key(|&&i| arms[i].k).expect("live is non-empty");
            let k = arms[l].k + 1;
            let u = confidence_radius(k, self.counter.effective_t(), self.config, eta);
            let child_eps = eta * u.max(eps);
            let child = self.child_of(id, l);
            let mu = self.avg_call(child, k, child_eps, depth + 1)?;
            let arm = &mut self.max[id].arms[l];
            arm.k = k;
            arm.u = u;
            arm.mu = mu;
            arm.eps = child_eps;
            let arms = &self.max[id].arms;
            prune(&mut live, |i| arms[i].mu, |i| arms[i].u);
        }
        let (choice, out) = if live.len() == 1 {
            let l = live[0];
            let child = self.child_of(id, l);
            (l, self.avg_call(child, m, eps, depth + 1)?)
        } else {
            let arms = &self.max[id].arms;
            let mut best = live[0];
            for &i in &live[1..] {
                if arms[i].mu > arms[best].mu {
                    best = i;
                }
            }
            (best, arms[best].mu)
        };
        self.max[id].last_choice = Some(choice);
        self.check_range(out);
        Ok(out)
    }
}

impl<'a, M: GenerativeModel> SearchTree<'a, M> {
    /// Replays, in one step, a run of elimination rounds in which every child
    /// call takes the early exit.
    ///
    /// Applies when all live arms hold the midpoint estimate and the arms with
    /// the fewest samples carry radii computed at the current time index. Such
    /// rounds draw nothing, so `t` is frozen, every live estimate stays at the
    /// midpoint and nothing is pruned. The lowest arms are then raised together
    /// up to the first level where another arm joins them, the early exit stops
    /// applying, or the stopping rule fires. The resulting state is the one
    /// the round-by-round loop reaches.
    fn skip_idle_rounds(
        &mut self,
        id: MaxId,
        live: &[usize],
        eps: f64,
        eta: f64,
        stop_radius: f64,
        depth: usize,
    ) -> Result<bool, PlanError> {
        let half = self.half_range;
        let t = self.counter.effective_t();
        let config = self.config;
        let radius = |k: u64| confidence_radius(k, t, config, eta);
        let arms = &self.max[id].arms;
        if live.iter().any(|&i| arms[i].mu != half) {
            return Ok(false);
        }
        let low = live.iter().map(|&i| arms[i].k).min().expect("live is non-empty");
        if low == 0 {
            return Ok(false);
        }
        let current = radius(low);
        let (lowest, rest): (SmallVec<[usize; 8]>, SmallVec<[usize; 8]>) =
            live.iter().copied().partition(|&i| arms[i].k == low);
        if lowest.iter().any(|&i| arms[i].u != current) {
            return Ok(false);
        }
        let idle = |k: u64| eta * radius(k).max(eps) >= half;
        if !idle(low + 1) {
            return Ok(false);
        }
        let mut target = rest.iter().map(|&i| arms[i].k).min().unwrap_or(u64::MAX);
        if let Some(busy) = first_level(low + 1, |k| !idle(k)) {
            target = target.min(busy - 1);
        }
        if rest.iter().all(|&i| arms[i].u <= stop_radius) {
            let settled = first_level(low + 1, |k| radius(k) <= stop_radius)
                .expect("the radius vanishes as k grows");
            target = target.min(settled);
        }
        if target <= low + 1 {
            return Ok(false);
        }
        self.enter(depth + 1)?;
        let u = radius(target);
        for &i in &lowest {
            let arm = &mut self.max[id].arms[i];
            arm.k = target;
            arm.u = u;
            arm.eps = eta * u.max(eps);
        }
        Ok(true)
    }
}

/// Smallest `k ≥ from` satisfying a predicate that is monotone in `k`.
fn first_level(from: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if pred(from) {
        return Some(from);
    }
    // pred(lo) is false; grow hi until pred(hi) holds
    let mut lo = from;
    let mut step = 1u64;
    let mut hi = loop {
        let next = lo.checked_add(step)?;
        if pred(next) {
            break next;
        }
        lo = next;
        step = step.checked_mul(2)?;
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Handle to a node of a [`SearchTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeHandle {
    Avg(usize),
    Max(usize),
}
