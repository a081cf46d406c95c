//! Strong learner training, decomposition into weak learners, evaluation and
//! the portable bundle format.

pub mod bundle;
pub mod dataset;
pub mod learner;
pub mod report;
pub mod synthetic;
pub mod tree;

pub use dataset::{FeatureVector, LabeledDataset, BENIGN, DEFAULT_FEATURE_COUNT, MALICIOUS};
pub use learner::{
    build_decomposed_ensemble, subset_size, Classifier, EnsembleParams, StrongLearner, VoteRule, WeakLearner,
};
pub use report::{evaluate, ClassifierReport, Confusion};
pub use tree::{train_tree, DecisionTree, Node, TreeParams};
