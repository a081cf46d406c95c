use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::dataset::{LabeledDataset, BENIGN, MALICIOUS};
use crate::ensemble::tree::{train_tree, DecisionTree, TreeParams};
use crate::error::{Error, Result};
use crate::flow::project_features;

/// Anything that labels a full-width feature vector.
pub trait Classifier {
    fn predict(&self, features: &[f64]) -> Result<u8>;
}

impl Classifier for DecisionTree {
    fn predict(&self, features: &[f64]) -> Result<u8> {
        DecisionTree::predict(self, features)
    }
}

/// The only vote rule: malicious iff at least half of the learners say so.
/// Even-sized ensembles therefore break ties towards blocking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoteRule {
    #[default]
    MajorityTieMalicious,
}

impl VoteRule {
    pub const NAME: &'static str = "majority_tie_malicious";

    pub fn decide(self, malicious_votes: usize, total: usize) -> u8 {
        match self {
            VoteRule::MajorityTieMalicious => {
                if total > 0 && 2 * malicious_votes >= total {
                    MALICIOUS
                } else {
                    BENIGN
                }
            }
        }
    }
}

/// One tree of the decomposed ensemble, trained on a slice of the features.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakLearner {
    pub wl_id: u16,
    /// Sorted, distinct global feature indices; the tree indexes into this.
    pub feature_subset: Vec<usize>,
    pub tree: DecisionTree,
}

impl WeakLearner {
    /// Vote on a full-width vector.
    pub fn vote(&self, features: &[f64]) -> Result<u8> {
        self.vote_traced(features).map(|(c, _)| c)
    }

    pub fn vote_traced(&self, features: &[f64]) -> Result<(u8, usize)> {
        let local = project_features(features, &self.feature_subset)?;
        self.tree.predict_traced(&local)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongLearner {
    pub feature_count: usize,
    pub learners: Vec<WeakLearner>,
    pub vote_rule: VoteRule,
}

impl StrongLearner {
    pub fn n_learners(&self) -> usize {
        self.learners.len()
    }

    pub fn learner(&self, wl_id: u16) -> Option<&WeakLearner> {
        self.learners.iter().find(|l| l.wl_id == wl_id)
    }

    /// Each learner votes on its projection; the vote rule decides.
    pub fn predict_majority(&self, features: &[f64]) -> Result<u8> {
        if features.len() != self.feature_count {
            return Err(Error::InvalidArgument(format!(
                "feature vector has {} entries, model expects {}",
                features.len(),
                self.feature_count
            )));
        }
        let mut malicious = 0;
        for learner in &self.learners {
            if learner.vote(features)? == MALICIOUS {
                malicious += 1;
            }
        }
        Ok(self.vote_rule.decide(malicious, self.learners.len()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::InvalidBundle("at least one weak learner required".into()));
        }
        let n = self.learners.len();
        let mut seen = vec![false; n];
        for l in &self.learners {
            let id = usize::from(l.wl_id);
            if id >= n || seen[id] {
                return Err(Error::InvalidBundle(format!(
                    "weak learner ids must be exactly 0..{n}; got duplicate or out-of-range id {}",
                    l.wl_id
                )));
            }
            seen[id] = true;
            if l.feature_subset.is_empty() {
                return Err(Error::InvalidBundle(format!(
                    "learner {id} has an empty feature subset"
                )));
            }
            if l.feature_subset.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidBundle(format!(
                    "learner {id} feature subset must be sorted and distinct"
                )));
            }
            if let Some(&last) = l.feature_subset.last() {
                if last >= self.feature_count {
                    return Err(Error::InvalidBundle(format!(
                        "learner {id} references feature {last} of {}",
                        self.feature_count
                    )));
                }
            }
            if let Some(f) = l.tree.max_feature() {
                if f >= l.feature_subset.len() {
                    return Err(Error::InvalidBundle(format!(
                        "learner {id} tree reads local feature {f} but subset has {}",
                        l.feature_subset.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Classifier for StrongLearner {
    fn predict(&self, features: &[f64]) -> Result<u8> {
        self.predict_majority(features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleParams {
    pub n_learners: usize,
    pub subsample_ratio: f64,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            n_learners: 3,
            subsample_ratio: 0.33,
            max_depth: 7,
            seed: 0,
        }
    }
}

/// `round(ratio * feature_count)` with halves rounded up.
pub fn subset_size(feature_count: usize, ratio: f64) -> usize {
    (ratio * feature_count as f64 + 0.5).floor() as usize
}

/// Trains `n_learners` trees, each on its own random feature subset.
///
/// Subsets are drawn without replacement inside a learner; different learners
/// may share features. Rows are not resampled.
pub fn build_decomposed_ensemble(data: &LabeledDataset, params: &EnsembleParams) -> Result<StrongLearner> {
    if params.n_learners == 0 {
        return Err(Error::InvalidArgument("at least one weak learner required".into()));
    }
    if params.n_learners > usize::from(u16::MAX) {
        return Err(Error::InvalidArgument("too many weak learners".into()));
    }
    if !(params.subsample_ratio > 0.0 && params.subsample_ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "subsample ratio {} outside (0, 1]",
            params.subsample_ratio
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let f = data.feature_count();
    let k = subset_size(f, params.subsample_ratio).min(f);
    if k < 1 {
        return Err(Error::InvalidArgument(format!(
            "ratio {} of {f} features selects no feature",
            params.subsample_ratio
        )));
    }
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        ..Default::default()
    };

    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let mut learners = Vec::with_capacity(params.n_learners);
    for wl_id in 0..params.n_learners {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let mut subset = rand::seq::index::sample(&mut rng, f, k).into_vec();
        subset.sort_unstable();
        let tree = train_tree(&data.project(&subset)?, &tree_params)?;
        learners.push(WeakLearner {
            wl_id: wl_id as u16,
            feature_subset: subset,
            tree,
        });
    }
    Ok(StrongLearner {
        feature_count: f,
        learners,
        vote_rule: VoteRule::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::tree::Node;

    fn constant(wl_id: u16, class: u8, feature_count: usize) -> WeakLearner {
        WeakLearner {
            wl_id,
            feature_subset: (0..feature_count).collect(),
            tree: DecisionTree::leaf(class),
        }
    }

    fn voting(votes: &[u8]) -> StrongLearner {
        StrongLearner {
            feature_count: 1,
            learners: votes
                .iter()
                .enumerate()
                .map(|(i, &v)| constant(i as u16, v, 1))
                .collect(),
            vote_rule: VoteRule::default(),
        }
    }

    #[test]
    fn majority_examples() {
        assert_eq!(voting(&[1, 0, 1]).predict_majority(&[0.0]).unwrap(), 1);
        assert_eq!(voting(&[0, 0, 0]).predict_majority(&[0.0]).unwrap(), 0);
        assert_eq!(voting(&[0, 1]).predict_majority(&[0.0]).unwrap(), 1);
        assert_eq!(voting(&[0, 0, 1, 1]).predict_majority(&[0.0]).unwrap(), 1);
        assert_eq!(voting(&[0, 0, 0, 1]).predict_majority(&[0.0]).unwrap(), 0);
    }

    #[test]
    fn wrong_width_rejected() {
        assert!(voting(&[1]).predict_majority(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn subset_sizes() {
        assert_eq!(subset_size(72, 0.33), 24);
        assert_eq!(subset_size(6, 0.33), 2);
        assert_eq!(subset_size(10, 0.25), 3);
        assert_eq!(subset_size(2, 0.1), 0);
    }

    fn toy(features: usize, rows: usize) -> LabeledDataset {
        let mut ds = LabeledDataset::new(features);
        for i in 0..rows {
            let label = (i % 2) as u8;
            let row = (0..features)
                .map(|j| ((i * 7 + j * 13) % 11) as f64 + f64::from(label) * (j % 3) as f64)
                .collect();
            ds.push(row, label).unwrap();
        }
        ds
    }

    #[test]
    fn decomposition_shapes() {
        let ds = toy(72, 60);
        let sl = build_decomposed_ensemble(
            &ds,
            &EnsembleParams {
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sl.n_learners(), 3);
        for (i, l) in sl.learners.iter().enumerate() {
            assert_eq!(usize::from(l.wl_id), i);
            assert_eq!(l.feature_subset.len(), 24);
            assert!(l.tree.depth() <= 7);
        }
        sl.validate().unwrap();

        let small = build_decomposed_ensemble(&toy(6, 20), &EnsembleParams::default()).unwrap();
        assert!(small.learners.iter().all(|l| l.feature_subset.len() == 2));
    }

    #[test]
    fn full_ratio_single_learner_is_the_tree() {
        let ds = toy(5, 40);
        let sl = build_decomposed_ensemble(
            &ds,
            &EnsembleParams {
                n_learners: 1,
                subsample_ratio: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sl.learners[0].feature_subset, vec![0, 1, 2, 3, 4]);
        for (row, _) in ds.iter() {
            assert_eq!(
                sl.predict_majority(row).unwrap(),
                sl.learners[0].tree.predict(row).unwrap()
            );
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let ds = toy(12, 50);
        let p = EnsembleParams {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(
            build_decomposed_ensemble(&ds, &p).unwrap(),
            build_decomposed_ensemble(&ds, &p).unwrap()
        );
    }

    #[test]
    fn bad_params() {
        let ds = toy(2, 10);
        let err = |p: EnsembleParams| build_decomposed_ensemble(&ds, &p).is_err();
        assert!(err(EnsembleParams {
            n_learners: 0,
            ..Default::default()
        }));
        assert!(err(EnsembleParams {
            subsample_ratio: 0.0,
            ..Default::default()
        }));
        assert!(err(EnsembleParams {
            subsample_ratio: 1.5,
            ..Default::default()
        }));
        assert!(err(EnsembleParams {
            subsample_ratio: 0.1,
            ..Default::default()
        }));
    }

    #[test]
    fn validate_catches_bad_ids_and_subsets() {
        let mut sl = voting(&[0, 1, 1]);
        sl.learners[2].wl_id = 0;
        assert!(sl.validate().is_err());

        let mut sl = voting(&[0]);
        sl.learners[0].tree = DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 3,
                threshold: 0.0,
                left: 1,
                right: 2,
            },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 1 },
        ])
        .unwrap();
        assert!(sl.validate().is_err());
    }
}
