//! Binary decision trees and a greedy CART trainer.
//!
//! Trees are stored as a flat pre-order node array with the root at index 0.
//! Traversal sends a sample left when `value <= threshold`, everywhere in the
//! crate; the bundle codec and any external trainer must agree on that rule.

use std::cmp::Ordering;

use crate::ensemble::dataset::{LabeledDataset, MALICIOUS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Nodes with fewer rows become leaves.
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 7,
            min_samples_split: 2,
        }
    }
}

impl DecisionTree {
    /// Builds a tree from a pre-order node array, checking structure.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let tree = Self { nodes };
        tree.validate()?;
        Ok(tree)
    }

    pub fn leaf(class: u8) -> Self {
        Self {
            nodes: vec![Node::Leaf { class }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of comparisons on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Largest feature index any split reads, if the tree has splits.
    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn predict(&self, features: &[f64]) -> Result<u8> {
        self.predict_traced(features).map(|(class, _)| class)
    }

    /// Returns the class and the number of nodes visited (leaf included).
    pub fn predict_traced(&self, features: &[f64]) -> Result<(u8, usize)> {
        let mut i = 0;
        let mut visited = 1;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return Ok((class, visited)),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let value = *features.get(feature).ok_or(Error::FeatureOutOfRange {
                        index: feature,
                        len: features.len(),
                    })?;
                    i = if value <= threshold { left } else { right };
                    visited += 1;
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidBundle("tree has no nodes".into()));
        }
        // A pre-order walk from the root must visit every index exactly once,
        // in order. That rules out cycles, shared children and orphans.
        let mut next = 0usize;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i != next {
                return Err(Error::InvalidBundle(format!(
                    "node array is not in pre-order (expected node {next}, reached {i})"
                )));
            }
            next += 1;
            match self.nodes[i] {
                Node::Leaf { class } => {
                    if class > 1 {
                        return Err(Error::InvalidBundle(format!("leaf {i} has class {class}")));
                    }
                }
                Node::Split {
                    threshold, left, right, ..
                } => {
                    if !threshold.is_finite() {
                        return Err(Error::InvalidBundle(format!("node {i} has a non-finite threshold")));
                    }
                    if left >= self.nodes.len() || right >= self.nodes.len() {
                        return Err(Error::InvalidBundle(format!("node {i} points outside the node array")));
                    }
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        if next != self.nodes.len() {
            return Err(Error::InvalidBundle(format!(
                "{} unreachable nodes",
                self.nodes.len() - next
            )));
        }
        Ok(())
    }
}

/// Greedy CART with Gini impurity.
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// Equal-impurity candidates resolve to the lowest feature index, then the
/// lowest threshold. An impure node is split whenever a candidate exists and
/// depth allows, even at zero gain, so parity-style data can still be fitted.
pub fn train_tree(data: &LabeledDataset, params: &TreeParams) -> Result<DecisionTree> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    let mut builder = Builder {
        data,
        params,
        nodes: Vec::new(),
    };
    let mut rows: Vec<usize> = (0..data.len()).collect();
    builder.grow(&mut rows, 0);
    Ok(DecisionTree { nodes: builder.nodes })
}

struct Builder<'a> {
    data: &'a LabeledDataset,
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    // Split quality as the exact fraction num/den of
    // (a_l^2 + b_l^2)/n_l + (a_r^2 + b_r^2)/n_r; larger is purer.
    num: u128,
    den: u128,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        // Strictly better only; earlier candidates (lower feature, lower
        // threshold) win ties because they are visited first.
        (self.num * other.den).cmp(&(other.num * self.den)) == Ordering::Greater
    }
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let labels = self.data.labels();
        let positives = rows.iter().filter(|&&r| labels[r] == MALICIOUS).count();
        let majority = if 2 * positives >= rows.len() { 1 } else { 0 };
        let pure = positives == 0 || positives == rows.len();

        let index = self.nodes.len();
        if pure || depth >= self.params.max_depth || rows.len() < self.params.min_samples_split {
            self.nodes.push(Node::Leaf { class: majority });
            return index;
        }
        let Some(best) = self.best_split(rows) else {
            self.nodes.push(Node::Leaf { class: majority });
            return index;
        };

        let x = self.data.rows();
        // Stable partition keeps row order deterministic in the children.
        let (mut left, mut right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| x[r][best.feature] <= best.threshold);

        self.nodes.push(Node::Leaf { class: majority });
        let l = self.grow(&mut left, depth + 1);
        let r = self.grow(&mut right, depth + 1);
        self.nodes[index] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        index
    }

    fn best_split(&self, rows: &[usize]) -> Option<Candidate> {
        let x = self.data.rows();
        let labels = self.data.labels();
        let n = rows.len() as u128;
        let total_pos = rows.iter().filter(|&&r| labels[r] == MALICIOUS).count() as u128;

        let mut best: Option<Candidate> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
        #[allow(clippy::needless_range_loop)]
        for feature in 0..self.data.feature_count() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (x[r][feature], labels[r])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_pos = 0u128;
            for i in 0..sorted.len() - 1 {
                left_pos += u128::from(sorted[i].1 == MALICIOUS);
                let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = (i + 1) as u128;
                let nr = n - nl;
                let (al, bl) = (left_pos, nl - left_pos);
                let (ar, br) = (total_pos - left_pos, nr - (total_pos - left_pos));
                let cand = Candidate {
                    feature,
                    threshold: midpoint(lo, hi),
                    num: (al * al + bl * bl) * nr + (ar * ar + br * br) * nl,
                    den: nl * nr,
                };
                if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}

/// Midpoint that is guaranteed to satisfy `lo <= mid < hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[(&[f64], u8)]) -> LabeledDataset {
        LabeledDataset::from_rows(rows[0].0.len(), rows.iter().map(|(r, l)| (r.to_vec(), *l)).collect()).unwrap()
    }

    fn stump() -> DecisionTree {
        DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 1 },
        ])
        .unwrap()
    }

    #[test]
    fn separable_stump() {
        let data = ds(&[(&[0.2], 0), (&[0.8], 1)]);
        let tree = train_tree(
            &data,
            &TreeParams {
                max_depth: 1,
                ..Default::default()
            },
        )
        .unwrap();
        match tree.nodes()[0] {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(feature, 0);
                assert!(threshold > 0.2 && threshold < 0.8);
                assert_eq!(tree.nodes()[left], Node::Leaf { class: 0 });
                assert_eq!(tree.nodes()[right], Node::Leaf { class: 1 });
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn single_class_is_a_leaf() {
        let data = ds(&[(&[0.1, 3.0], 1), (&[0.9, 1.0], 1), (&[0.5, 2.0], 1)]);
        let tree = train_tree(&data, &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes(), &[Node::Leaf { class: 1 }]);
        assert_eq!(tree.depth(), 0);
    }

    #[test]
    fn xor_depth_two_fits_exactly() {
        let pts: [(&[f64], u8); 4] = [(&[0.0, 0.0], 0), (&[0.0, 1.0], 1), (&[1.0, 0.0], 1), (&[1.0, 1.0], 0)];
        let data = ds(&pts);
        let tree = train_tree(
            &data,
            &TreeParams {
                max_depth: 2,
                ..Default::default()
            },
        )
        .unwrap();
        for (x, y) in pts {
            assert_eq!(tree.predict(x).unwrap(), y);
        }
        assert_eq!(tree.depth(), 2);
        // every root candidate ties at zero gain; lowest feature wins
        assert!(matches!(tree.nodes()[0], Node::Split { feature: 0, threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn empty_dataset_rejected() {
        let data = LabeledDataset::new(3);
        assert!(matches!(
            train_tree(&data, &TreeParams::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn stump_prediction_and_boundary() {
        let t = stump();
        assert_eq!(t.predict(&[0.7]).unwrap(), 1);
        assert_eq!(t.predict(&[0.5]).unwrap(), 0);
        assert!(matches!(
            t.predict(&[]),
            Err(Error::FeatureOutOfRange { index: 0, len: 0 })
        ));
    }

    #[test]
    fn rejects_non_preorder_arrays() {
        let swapped = vec![
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 2,
                right: 1,
            },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 1 },
        ];
        assert!(DecisionTree::from_nodes(swapped).is_err());
        let cyclic = vec![Node::Split {
            feature: 0,
            threshold: 0.5,
            left: 0,
            right: 0,
        }];
        assert!(DecisionTree::from_nodes(cyclic).is_err());
        let orphan = vec![Node::Leaf { class: 0 }, Node::Leaf { class: 1 }];
        assert!(DecisionTree::from_nodes(orphan).is_err());
    }

    #[test]
    fn equal_values_never_split() {
        let data = ds(&[(&[1.0], 0), (&[1.0], 1)]);
        let tree = train_tree(&data, &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes(), &[Node::Leaf { class: 1 }]);
    }
}
