//! Multiclass gradient boosting with softmax loss.
//!
//! Every round fits one depth-limited least-squares regression tree per class
//! to the residuals `onehot - softmax(F)`, then sets each leaf to the Newton
//! step `(K-1)/K * sum(r) / sum(|r| (1 - |r|))` and adds it scaled by the
//! shrinkage.

use serde::{Deserialize, Serialize};

use super::N_CLASSES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    fn leaf_of(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = &self.nodes[i]
        {
            i = if x[*feature] <= *threshold { *left } else { *right };
        }
        i
    }

    /// Least-squares tree structure on `targets`; leaf values are placeholders.
    fn grow(rows: &[Vec<f64>], order: &[Vec<usize>], targets: &[f64], max_depth: usize) -> Self {
        let n = rows.len();
        let mut nodes = vec![TreeNode::Leaf(0.0)];
        // node id of every sample; only nodes in `frontier` can still split
        let mut node_of = vec![0usize; n];
        let mut frontier = vec![0usize];

        for _ in 0..max_depth {
            if frontier.is_empty() {
                break;
            }
            let mut slot = vec![usize::MAX; nodes.len()];
            for (s, &id) in frontier.iter().enumerate() {
                slot[id] = s;
            }
            let mut total = vec![(0.0f64, 0usize); frontier.len()];
            for i in 0..n {
                let s = slot[node_of[i]];
                if s != usize::MAX {
                    total[s].0 += targets[i];
                    total[s].1 += 1;
                }
            }
            // best (gain, feature, threshold) per frontier node
            let mut best: Vec<Option<(f64, usize, f64)>> = vec![None; frontier.len()];
            for (f, sorted) in order.iter().enumerate() {
                let mut left = vec![(0.0f64, 0usize, f64::NAN); frontier.len()];
                for &i in sorted {
                    let s = slot[node_of[i]];
                    if s == usize::MAX {
                        continue;
                    }
                    let v = rows[i][f];
                    let (ls, lc, last) = left[s];
                    if lc > 0 && v > last {
                        let (ts, tc) = total[s];
                        let (rs, rc) = (ts - ls, tc - lc);
                        let gain = ls * ls / lc as f64 + rs * rs / rc as f64 - ts * ts / tc as f64;
                        if gain > 1e-12 && best[s].is_none_or(|(g, _, _)| gain > g) {
                            best[s] = Some((gain, f, 0.5 * (last + v)));
                        }
                    }
                    left[s] = (ls + targets[i], lc + 1, v);
                }
            }
            let mut next = Vec::new();
            let mut child = vec![(usize::MAX, usize::MAX); frontier.len()];
            for (s, &id) in frontier.iter().enumerate() {
                if let Some((_, feature, threshold)) = best[s] {
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf(0.0));
                    nodes.push(TreeNode::Leaf(0.0));
                    nodes[id] = TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right: left + 1,
                    };
                    child[s] = (left, left + 1);
                    next.push(left);
                    next.push(left + 1);
                }
            }
            for i in 0..n {
                let s = slot[node_of[i]];
                if s != usize::MAX {
                    if let TreeNode::Split { feature, threshold, .. } = nodes[node_of[i]] {
                        node_of[i] = if rows[i][feature] <= threshold {
                            child[s].0
                        } else {
                            child[s].1
                        };
                    }
                }
            }
            frontier = next;
        }
        RegressionTree { nodes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtEnsemble {
    /// Log class priors.
    pub base: [f64; N_CLASSES],
    pub shrinkage: f64,
    /// `rounds[r][k]` is round `r`'s tree for class `k`.
    pub rounds: Vec<Vec<RegressionTree>>,
    /// Mean training log-loss before any round and after each round.
    pub train_loss: Vec<f64>,
}

fn softmax(logits: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; N_CLASSES];
    let mut z = 0.0;
    for (pk, &l) in p.iter_mut().zip(logits) {
        *pk = (l - m).exp();
        z += *pk;
    }
    p.iter_mut().for_each(|v| *v /= z);
    p
}

fn log_loss(scores: &[[f64; N_CLASSES]], labels: &[usize]) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(s, &y)| -softmax(s)[y].max(1e-300).ln())
        .sum::<f64>()
        / scores.len() as f64
}

impl GbtEnsemble {
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], rounds: usize, depth: usize, shrinkage: f64) -> Self {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut counts = [0usize; N_CLASSES];
        labels.iter().for_each(|&l| counts[l] += 1);
        // unseen classes get a tiny prior so logits stay finite
        let base = counts.map(|c| ((c as f64).max(1e-3) / n as f64).ln());

        let order: Vec<Vec<usize>> = (0..d)
            .map(|f| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
                idx
            })
            .collect();

        let mut scores = vec![base; n];
        let mut trees = Vec::with_capacity(rounds);
        let mut train_loss = vec![log_loss(&scores, labels)];
        let k_factor = (N_CLASSES as f64 - 1.0) / N_CLASSES as f64;

        for _ in 0..rounds {
            let probs: Vec<[f64; N_CLASSES]> = scores.iter().map(softmax).collect();
            let mut round = Vec::with_capacity(N_CLASSES);
            for k in 0..N_CLASSES {
                let residual: Vec<f64> = probs
                    .iter()
                    .zip(labels)
                    .map(|(p, &y)| f64::from(u8::from(y == k)) - p[k])
                    .collect();
                let mut tree = RegressionTree::grow(rows, &order, &residual, depth);
                let mut num = vec![0.0; tree.nodes.len()];
                let mut den = vec![0.0; tree.nodes.len()];
                let leaves: Vec<usize> = rows.iter().map(|x| tree.leaf_of(x)).collect();
                for (i, &leaf) in leaves.iter().enumerate() {
                    let r = residual[i];
                    num[leaf] += r;
                    den[leaf] += r.abs() * (1.0 - r.abs());
                }
                for (id, node) in tree.nodes.iter_mut().enumerate() {
                    if let TreeNode::Leaf(v) = node {
                        *v = if den[id] > 1e-12 {
                            k_factor * num[id] / den[id]
                        } else {
                            0.0
                        };
                    }
                }
                for (s, &leaf) in scores.iter_mut().zip(&leaves) {
                    if let TreeNode::Leaf(v) = tree.nodes[leaf] {
                        s[k] += shrinkage * v;
                    }
                }
                round.push(tree);
            }
            trees.push(round);
            train_loss.push(log_loss(&scores, labels));
        }
        GbtEnsemble {
            base,
            shrinkage,
            rounds: trees,
            train_loss,
        }
    }

    pub fn logits(&self, x: &[f64]) -> [f64; N_CLASSES] {
        let mut s = self.base;
        for round in &self.rounds {
            for (sk, tree) in s.iter_mut().zip(round) {
                *sk += self.shrinkage * tree.predict(x);
            }
        }
        s
    }

    pub fn probabilities(&self, x: &[f64]) -> [f64; N_CLASSES] {
        softmax(&self.logits(x))
    }
}
