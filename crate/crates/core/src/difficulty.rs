//! Problem-difficulty measures on tabular MDPs.
//!
//! The planning tree is indexed by paths: a state reached along two different
//! paths appears as two nodes. Depth counts tree levels, so MAX nodes sit at
//! even depths and AVG nodes at odd depths (the root is a MAX node at depth 0).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{RngStream, Root, TabularMdp, ValueTable};

/// Absolute error of the node values used for gap and Δ computations.
pub const VALUE_TOLERANCE: f64 = 1e-10;
/// Decisions whose margin is at most this are flagged as ambiguous.
pub const AMBIGUITY_BAND: f64 = 1e-9;
/// Default cap on the number of paths at the deepest enumerated level.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DifficultyError {
    #[error("tree has {paths} paths at depth {depth}, above the enumeration cap {cap}")]
    EnumerationCap {
        depth: usize,
        paths: usize,
        cap: usize,
    },
    #[error("difficulty analysis needs a MAX (state) root")]
    AvgRoot,
    #[error("node {ancestor} is not a MAX ancestor of node {descendant}")]
    NotAncestor { ancestor: NodeId, descendant: NodeId },
    #[error("depth {requested} is beyond the enumerated depth {enumerated}")]
    DepthOutOfRange { requested: usize, enumerated: usize },
    #[error("depth {0} must be even")]
    OddDepth(usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Max { state: usize },
    Avg { state: usize, action: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub parent: Option<NodeId>,
    pub depth: usize,
    pub kind: NodeKind,
    /// Probability of the edge from the parent (1 for MAX → AVG edges).
    pub prob: f64,
    pub value: f64,
    pub children: Vec<NodeId>,
}

/// Path-indexed planning tree with exact node values.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    nodes: Vec<TreeNode>,
    levels: Vec<Vec<NodeId>>,
    gamma: f64,
}

impl TreeIndex {
    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes at `depth`, in enumeration order.
    pub fn level(&self, depth: usize) -> &[NodeId] {
        &self.levels[depth]
    }

    /// Root-to-node sequence of node ids.
    pub fn path(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Ancestor of `id` at `depth` (the node itself when the depths agree).
    pub fn ancestor_at(&self, id: NodeId, depth: usize) -> Option<NodeId> {
        let mut cur = id;
        while self.nodes[cur].depth > depth {
            cur = self.nodes[cur].parent?;
        }
        (self.nodes[cur].depth == depth).then_some(cur)
    }

    fn best_child_value(&self, id: NodeId) -> f64 {
        self.nodes[id]
            .children
            .iter()
            .map(|&c| self.nodes[c].value)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Enumerates every path of the planning tree down to `depth` levels.
///
/// Fails when the number of nodes at any level exceeds `cap`.
pub fn enumerate_tree(
    mdp: &TabularMdp,
    depth: usize,
    cap: usize,
) -> Result<TreeIndex, DifficultyError> {
    let root_state = match *mdp.root_node() {
        Root::Max(s) => s,
        Root::Avg(..) => return Err(DifficultyError::AvgRoot),
    };
    let values = ValueTable::solve(mdp, VALUE_TOLERANCE);
    let mut nodes = vec![TreeNode {
        parent: None,
        depth: 0,
        kind: NodeKind::Max { state: root_state },
        prob: 1.0,
        value: values.state_value(root_state),
        children: Vec::new(),
    }];
    let mut levels = vec![vec![0]];
    for d in 0..depth {
        let mut next = Vec::new();
        for &id in &levels[d] {
            let kind = nodes[id].kind;
            let children: Vec<(NodeKind, f64, f64)> = match kind {
                NodeKind::Max { state } => (0..mdp.actions(state).len())
                    .map(|a| {
                        let value = values.action_value(state, a);
                        (NodeKind::Avg { state, action: a }, 1.0, value)
                    })
                    .collect(),
                NodeKind::Avg { state, action } => {
                    let mut merged: Vec<(usize, f64)> = Vec::new();
                    for o in &mdp.actions(state)[action].next {
                        if o.p <= 0.0 {
                            continue;
                        }
                        match merged.iter_mut().find(|(s, _)| *s == o.state) {
                            Some((_, p)) => *p += o.p,
                            None => merged.push((o.state, o.p)),
                        }
                    }
                    merged
                        .into_iter()
                        .map(|(s, p)| (NodeKind::Max { state: s }, p, values.state_value(s)))
                        .collect()
                }
            };
            if next.len() + children.len() > cap {
                return Err(DifficultyError::EnumerationCap {
                    depth: d + 1,
                    paths: next.len() + children.len(),
                    cap,
                });
            }
            for (kind, prob, value) in children {
                let child = nodes.len();
                nodes.push(TreeNode {
                    parent: Some(id),
                    depth: d + 1,
                    kind,
                    prob,
                    value,
                    children: Vec::new(),
                });
                nodes[id].children.push(child);
                next.push(child);
            }
        }
        levels.push(next);
    }
    Ok(TreeIndex {
        nodes,
        levels,
        gamma: mdp.gamma(),
    })
}

/// Value lost at MAX node `ancestor` by taking the child that leads to
/// `descendant` instead of the best child.
pub fn delta_to(
    tree: &TreeIndex,
    ancestor: NodeId,
    descendant: NodeId,
) -> Result<f64, DifficultyError> {
    let not_ancestor = DifficultyError::NotAncestor {
        ancestor,
        descendant,
    };
    let anc = tree.node(ancestor);
    if !matches!(anc.kind, NodeKind::Max { .. }) || tree.node(descendant).depth <= anc.depth {
        return Err(not_ancestor);
    }
    let child = tree
        .ancestor_at(descendant, anc.depth + 1)
        .filter(|&c| tree.node(c).parent == Some(ancestor))
        .ok_or(not_ancestor)?;
    Ok(tree.best_child_value(ancestor) - tree.node(child).value)
}

/// Threshold `θ(j)` bounding the loss allowed at an ancestor `j` levels up.
pub trait Threshold {
    fn at(&self, levels_up: usize) -> f64;
}

impl<F: Fn(usize) -> f64> Threshold for F {
    fn at(&self, levels_up: usize) -> f64 {
        self(levels_up)
    }
}

/// Default threshold `θ(j) = γ^j / (1 − γ)`.
pub fn discounted_threshold(gamma: f64) -> impl Fn(usize) -> f64 + Copy {
    move |j| gamma.powi(j as i32) / (1.0 - gamma)
}

/// Near-optimal nodes at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearOptimalSet {
    pub depth: usize,
    pub members: Vec<NodeId>,
    /// Nodes with at least one ancestor decision within [`AMBIGUITY_BAND`]
    /// of its threshold. They are classified with `Δ ≤ θ` but flagged.
    pub ambiguous: Vec<NodeId>,
    /// `θ(j)` for `j = 0..=depth`.
    pub thresholds: Vec<f64>,
}

/// All depth-`h` nodes whose loss at every even-depth ancestor `h'` is at
/// most `θ(h − h')`.
pub fn near_optimal_set(
    tree: &TreeIndex,
    h: usize,
    theta: &impl Threshold,
) -> Result<NearOptimalSet, DifficultyError> {
    if h > tree.depth() {
        return Err(DifficultyError::DepthOutOfRange {
            requested: h,
            enumerated: tree.depth(),
        });
    }
    let thresholds: Vec<f64> = (0..=h).map(|j| theta.at(j)).collect();
    let mut members = Vec::new();
    let mut ambiguous = Vec::new();
    for &id in tree.level(h) {
        let path = tree.path(id);
        let mut member = true;
        let mut flagged = false;
        for h_anc in (0..h).step_by(2) {
            let anc = path[h_anc];
            let loss = tree.best_child_value(anc) - tree.node(path[h_anc + 1]).value;
            let bound = thresholds[h - h_anc];
            if (loss - bound).abs() <= AMBIGUITY_BAND {
                flagged = true;
            }
            if loss > bound {
                member = false;
            }
        }
        if member {
            members.push(id);
        }
        if flagged {
            ambiguous.push(id);
        }
    }
    Ok(NearOptimalSet {
        depth: h,
        members,
        ambiguous,
        thresholds,
    })
}

/// `|N_{2h}|` for `h = 1..=h_cap`.
pub fn near_optimal_sizes(
    tree: &TreeIndex,
    h_cap: usize,
    theta: &impl Threshold,
) -> Result<Vec<usize>, DifficultyError> {
    (1..=h_cap)
        .map(|h| near_optimal_set(tree, 2 * h, theta).map(|s| s.members.len()))
        .collect()
}

/// Gap of every MAX node in the enumerated tree.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEntry {
    pub node: NodeId,
    /// Best minus second-best child value; `+∞` with a single child.
    pub gap: f64,
    pub child_values: Vec<f64>,
}

pub fn gap_table(tree: &TreeIndex) -> Vec<GapEntry> {
    let mut out = Vec::new();
    for (id, node) in tree.nodes.iter().enumerate() {
        if !matches!(node.kind, NodeKind::Max { .. }) || node.children.is_empty() {
            continue;
        }
        let child_values: Vec<f64> = node.children.iter().map(|&c| tree.nodes[c].value).collect();
        out.push(GapEntry {
            node: id,
            gap: gap_of(&child_values),
            child_values,
        });
    }
    out
}

fn gap_of(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::INFINITY;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted[0] - sorted[1]
}

/// Least-squares fit of `|N_{2h}| ≈ C (Nκ)^h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    /// Fitted κ clamped to `[1, K]`.
    pub kappa: f64,
    /// Fitted κ before clamping.
    pub raw_kappa: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub clamped: bool,
    pub depths_used: usize,
}

/// Fits κ from near-optimal set sizes `sizes[h − 1] = |N_{2h}|`.
///
/// Regresses `ln|N_{2h}| − h ln N` on `h` and exponentiates the slope; depths
/// with an empty set are skipped.
pub fn estimate_kappa(
    sizes: &[f64],
    branching: usize,
    max_actions: usize,
) -> Result<KappaFit, DifficultyError> {
    let ln_n = (branching.max(1) as f64).ln();
    let points: Vec<(f64, f64)> = sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(i, &s)| {
            let h = (i + 1) as f64;
            (h, s.ln() - h * ln_n)
        })
        .collect();
    if points.is_empty() {
        return Err(DifficultyError::Degenerate("all sizes are zero".into()));
    }
    if points.len() < 3 {
        return Err(DifficultyError::Degenerate(format!(
            "need at least 3 nonzero sizes, got {}",
            points.len()
        )));
    }
    let line = least_squares(&points);
    let raw_kappa = line.slope.exp();
    let upper = max_actions.max(1) as f64;
    let kappa = raw_kappa.clamp(1.0, upper);
    Ok(KappaFit {
        kappa,
        raw_kappa,
        residual: line.rms_residual,
        clamped: kappa != raw_kappa,
        depths_used: points.len(),
    })
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    /// Standard error of the slope (0 with two points).
    pub slope_std_err: f64,
}

pub fn least_squares(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let slope_std_err = if points.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept,
        rms_residual: (sse / n).sqrt(),
        slope_std_err,
    }
}

/// Monte-Carlo estimate of the d-integrand expectation at even depth `h`.
///
/// One draw picks a uniformly random leaf of a random subtree in which every
/// AVG node keeps a single sampled successor. That is the same as walking
/// down from the root choosing actions uniformly and sampling transitions;
/// the leaf is weighted by the product of action counts along the path (the
/// number of leaves of the subtree, `K^(h/2)` for a constant action count).
pub fn estimate_d(
    mdp: &TabularMdp,
    values: &ValueTable,
    xi: f64,
    h: usize,
    n_samples: usize,
    theta: &impl Threshold,
    rng: &mut RngStream,
) -> Result<f64, DifficultyError> {
    let root = match *mdp.root_node() {
        Root::Max(s) => s,
        Root::Avg(..) => return Err(DifficultyError::AvgRoot),
    };
    if !h.is_multiple_of(2) {
        return Err(DifficultyError::OddDepth(h));
    }
    if n_samples == 0 {
        return Err(DifficultyError::Degenerate("no samples requested".into()));
    }
    let gamma = mdp.gamma();
    let mut total = 0.0;
    for _ in 0..n_samples {
        let mut state = root;
        let mut weight = 1.0;
        let mut near_optimal = true;
        let mut factor = 1.0;
        for step in 0..h / 2 {
            let levels_up = h - 2 * step;
            let actions = mdp.actions(state);
            let a = rng.random_range(0..actions.len());
            weight *= actions.len() as f64;
            let bound = theta.at(levels_up);
            if values.state_value(state) - values.action_value(state, a) > bound {
                near_optimal = false;
            }
            if values.gap(state) < bound {
                factor *= xi / gamma.powi(levels_up as i32);
            }
            state = sample_successor(&actions[a].next, rng);
        }
        if near_optimal {
            total += weight * factor;
        }
    }
    Ok(total / n_samples as f64)
}

fn sample_successor(next: &[crate::mdp::Outcome], rng: &mut RngStream) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last = next[0].state;
    for o in next.iter().filter(|o| o.p > 0.0) {
        acc += o.p;
        last = o.state;
        if u < acc {
            break;
        }
    }
    last
}

/// Slope of `ln E_h` against `h·ln(1/γ)`, an estimate of the exponent `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DFit {
    pub xi: f64,
    /// Regression slope; may be negative.
    pub raw_slope: f64,
    /// `max(0, raw_slope)`.
    pub d: f64,
    pub residual: f64,
    pub depths_used: usize,
}

/// Regresses `(h, estimate)` pairs; depths with a zero estimate are skipped.
pub fn fit_d(points: &[(usize, f64)], gamma: f64, xi: f64) -> Result<DFit, DifficultyError> {
    let scale = (1.0 / gamma).ln();
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(h, e)| (h as f64 * scale, e.ln()))
        .collect();
    if data.len() < 2 {
        return Err(DifficultyError::Degenerate(
            "need at least 2 depths with a positive estimate".into(),
        ));
    }
    let line = least_squares(&data);
    Ok(DFit {
        xi,
        raw_slope: line.slope,
        d: line.slope.max(0.0),
        residual: line.rms_residual,
        depths_used: data.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    /// Near-optimal sets are counted at depths `2, 4, …, 2·h_cap`.
    pub h_cap: usize,
    pub enumeration_cap: usize,
    pub xi_grid: Vec<f64>,
    /// Even depths at which the d integrand is estimated.
    pub d_depths: Vec<usize>,
    pub d_samples: usize,
    pub seed: u64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            h_cap: 4,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            xi_grid: vec![0.1, 0.5],
            d_depths: vec![2, 4, 6, 8],
            d_samples: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DPoint {
    pub xi: f64,
    pub h: usize,
    pub estimate: f64,
}

/// Difficulty summary of one tabular MDP (default threshold `γ^j/(1 − γ)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyReport {
    pub gamma: f64,
    pub max_actions: usize,
    pub branching: usize,
    pub h_cap: usize,
    /// `|N_{2h}|` for `h = 1..=h_cap`.
    pub near_optimal_sizes: Vec<usize>,
    pub ambiguous_nodes: usize,
    pub kappa: Option<KappaFit>,
    pub d_grid: Vec<DPoint>,
    /// Experimental regression estimates of d, one per ξ.
    pub d_fits: Vec<DFit>,
    pub gap_histogram: Vec<HistogramBin>,
    /// MAX nodes with a single action (infinite gap).
    pub infinite_gaps: usize,
}

pub fn analyze(mdp: &TabularMdp, config: &AnalyzeConfig) -> Result<DifficultyReport, DifficultyError> {
    let gamma = mdp.gamma();
    let theta = discounted_threshold(gamma);
    let tree = enumerate_tree(mdp, 2 * config.h_cap, config.enumeration_cap)?;
    let mut sizes = Vec::with_capacity(config.h_cap);
    let mut ambiguous_nodes = 0;
    for h in 1..=config.h_cap {
        let set = near_optimal_set(&tree, 2 * h, &theta)?;
        sizes.push(set.members.len());
        ambiguous_nodes += set.ambiguous.len();
    }
    let size_f: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let kappa = estimate_kappa(&size_f, mdp.max_branching(), mdp.max_actions()).ok();

    let values = ValueTable::solve(mdp, VALUE_TOLERANCE);
    let mut rng = crate::mdp::rng_stream(config.seed);
    let mut d_grid = Vec::new();
    let mut d_fits = Vec::new();
    for &xi in &config.xi_grid {
        let mut points = Vec::new();
        for &h in &config.d_depths {
            let estimate = estimate_d(mdp, &values, xi, h, config.d_samples, &theta, &mut rng)?;
            d_grid.push(DPoint { xi, h, estimate });
            points.push((h, estimate));
        }
        if let Ok(fit) = fit_d(&points, gamma, xi) {
            d_fits.push(fit);
        }
    }

    let gaps = gap_table(&tree);
    let bins = 10;
    let range = 1.0 / (1.0 - gamma);
    let mut gap_histogram: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lower: range * i as f64 / bins as f64,
            upper: range * (i + 1) as f64 / bins as f64,
            count: 0,
        })
        .collect();
    let mut infinite_gaps = 0;
    for g in &gaps {
        if g.gap.is_infinite() {
            infinite_gaps += 1;
        } else {
            let i = ((g.gap / range * bins as f64) as usize).min(bins - 1);
            gap_histogram[i].count += 1;
        }
    }

    Ok(DifficultyReport {
        gamma,
        max_actions: mdp.max_actions(),
        branching: mdp.max_branching(),
        h_cap: config.h_cap,
        near_optimal_sizes: sizes,
        ambiguous_nodes,
        kappa,
        d_grid,
        d_fits,
        gap_histogram,
        infinite_gaps,
    })
}
