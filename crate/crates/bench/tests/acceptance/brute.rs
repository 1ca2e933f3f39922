//! Brute-force near-optimality oracle sharing no code with the library:
//! its own value iteration and its own recursive walk over tree paths.

use std::collections::BTreeMap;

use trailblazer::mdp::TabularMdp;

pub struct Values {
    pub v: Vec<f64>,
    pub q: Vec<Vec<f64>>,
}

pub fn solve(mdp: &TabularMdp) -> Values {
    let gamma = mdp.gamma();
    let n = mdp.n_states();
    let mut v = vec![0.0; n];
    let mut q: Vec<Vec<f64>> = (0..n).map(|s| vec![0.0; mdp.actions(s).len()]).collect();
    loop {
        let mut change: f64 = 0.0;
        for (s, qs) in q.iter_mut().enumerate() {
            for (a, act) in mdp.actions(s).iter().enumerate() {
                qs[a] = act.reward.mean() + gamma * act.next.iter().map(|o| o.p * v[o.state]).sum::<f64>();
            }
        }
        for s in 0..n {
            let best = q[s].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            change = change.max((best - v[s]).abs());
            v[s] = best;
        }
        if change < 1e-14 {
            return Values { v, q };
        }
    }
}

/// Path key `[s0, a0, s1, a1, …, s_last]` mapped to the losses at every
/// MAX ancestor, as `(depth, loss)`.
pub type Paths = BTreeMap<Vec<usize>, Vec<(usize, f64)>>;

/// All MAX-level paths ending at even depth `h`.
pub fn paths(mdp: &TabularMdp, root: usize, h: usize, values: &Values) -> Paths {
    let mut out = Paths::new();
    walk(mdp, values, vec![root], Vec::new(), h, &mut out);
    out
}

fn walk(mdp: &TabularMdp, values: &Values, key: Vec<usize>, losses: Vec<(usize, f64)>, h: usize, out: &mut Paths) {
    let depth = key.len() - 1;
    if depth == h {
        out.insert(key, losses);
        return;
    }
    let s = *key.last().unwrap();
    for (a, act) in mdp.actions(s).iter().enumerate() {
        let mut successors: Vec<usize> = act.next.iter().filter(|o| o.p > 0.0).map(|o| o.state).collect();
        successors.sort_unstable();
        successors.dedup();
        let mut l = losses.clone();
        l.push((depth, values.v[s] - values.q[s][a]));
        for s2 in successors {
            let mut k = key.clone();
            k.push(a);
            k.push(s2);
            walk(mdp, values, k, l.clone(), h, out);
        }
    }
}

pub enum Verdict {
    In,
    Out,
    /// Some loss lies within `band` of its threshold.
    Borderline,
}

pub fn classify(losses: &[(usize, f64)], h: usize, theta: impl Fn(usize) -> f64, band: f64) -> Verdict {
    let mut borderline = false;
    let mut member = true;
    for &(d, loss) in losses {
        let t = theta(h - d);
        if (loss - t).abs() <= band {
            borderline = true;
        } else if loss > t {
            member = false;
        }
    }
    match (member, borderline) {
        (false, _) => Verdict::Out,
        (true, true) => Verdict::Borderline,
        (true, false) => Verdict::In,
    }
}
