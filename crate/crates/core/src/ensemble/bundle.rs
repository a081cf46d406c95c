//! Portable JSON encoding of a [`StrongLearner`].
//!
//! ```text
//! {format_version, feature_count, n_learners, vote_rule,
//!  learners: [{wl_id, feature_subset: [int],
//!              nodes: [{f, t, l, r} | {leaf}]}]}
//! ```
//!
//! Node arrays are pre-order with the root at index 0. Thresholds go through
//! serde_json's shortest round-trip float formatting, so a save/load cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::learner::{StrongLearner, VoteRule, WeakLearner};
use crate::ensemble::tree::{DecisionTree, Node};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleFile {
    format_version: u32,
    feature_count: usize,
    n_learners: usize,
    vote_rule: String,
    learners: Vec<LearnerFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnerFile {
    wl_id: u16,
    feature_subset: Vec<usize>,
    nodes: Vec<NodeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeFile {
    Split { f: usize, t: f64, l: usize, r: usize },
    Leaf { leaf: u8 },
}

pub fn to_json(sl: &StrongLearner) -> Result<String> {
    let file = BundleFile {
        format_version: FORMAT_VERSION,
        feature_count: sl.feature_count,
        n_learners: sl.learners.len(),
        vote_rule: VoteRule::NAME.to_string(),
        learners: sl
            .learners
            .iter()
            .map(|l| LearnerFile {
                wl_id: l.wl_id,
                feature_subset: l.feature_subset.clone(),
                nodes: l
                    .tree
                    .nodes()
                    .iter()
                    .map(|n| match *n {
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => NodeFile::Split {
                            f: feature,
                            t: threshold,
                            l: left,
                            r: right,
                        },
                        Node::Leaf { class } => NodeFile::Leaf { leaf: class },
                    })
                    .collect(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn from_json(text: &str) -> Result<StrongLearner> {
    let file: BundleFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidBundle(format!("malformed bundle: {e}")))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: file.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if file.vote_rule != VoteRule::NAME {
        return Err(Error::InvalidBundle(format!("unknown vote rule {:?}", file.vote_rule)));
    }
    if file.n_learners != file.learners.len() {
        return Err(Error::InvalidBundle(format!(
            "n_learners is {} but {} learners are listed",
            file.n_learners,
            file.learners.len()
        )));
    }
    let learners = file
        .learners
        .into_iter()
        .map(|l| {
            let nodes = l
                .nodes
                .into_iter()
                .map(|n| match n {
                    NodeFile::Split { f, t, l, r } => Node::Split {
                        feature: f,
                        threshold: t,
                        left: l,
                        right: r,
                    },
                    NodeFile::Leaf { leaf } => Node::Leaf { class: leaf },
                })
                .collect();
            let tree = DecisionTree::from_nodes(nodes)
                .map_err(|e| Error::InvalidBundle(format!("learner {}: {e}", l.wl_id)))?;
            Ok(WeakLearner {
                wl_id: l.wl_id,
                feature_subset: l.feature_subset,
                tree,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sl = StrongLearner {
        feature_count: file.feature_count,
        learners,
        vote_rule: VoteRule::MajorityTieMalicious,
    };
    sl.validate()?;
    Ok(sl)
}

/// Writes through a sibling temp file so a failed save never leaves a
/// truncated bundle behind.
pub fn save(sl: &StrongLearner, path: &Path) -> Result<()> {
    sl.validate()?;
    let text = to_json(sl)?;
    let tmp = path.with_extension("json.partial");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<StrongLearner> {
    from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
      "format_version": 1, "feature_count": 3, "n_learners": 2,
      "vote_rule": "majority_tie_malicious",
      "learners": [
        {"wl_id": 0, "feature_subset": [0, 2],
         "nodes": [{"f": 1, "t": 0.1, "l": 1, "r": 2}, {"leaf": 0}, {"leaf": 1}]},
        {"wl_id": 1, "feature_subset": [1], "nodes": [{"leaf": 1}]}
      ]}"#;

    #[test]
    fn parses_schema() {
        let sl = from_json(GOOD).unwrap();
        assert_eq!(sl.n_learners(), 2);
        assert_eq!(sl.learners[0].feature_subset, vec![0, 2]);
        assert_eq!(sl.predict_majority(&[0.0, 0.0, 0.05]).unwrap(), 1);
        let again = from_json(&to_json(&sl).unwrap()).unwrap();
        assert_eq!(again, sl);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = GOOD.replace(r#""wl_id": 1"#, r#""wl_id": 0"#);
        assert!(matches!(from_json(&text), Err(Error::InvalidBundle(_))));
    }

    #[test]
    fn truncated_rejected() {
        assert!(matches!(
            from_json(&GOOD[..GOOD.len() / 2]),
            Err(Error::InvalidBundle(_))
        ));
    }

    #[test]
    fn version_mismatch() {
        let text = GOOD.replace(r#""format_version": 1"#, r#""format_version": 7"#);
        assert!(matches!(
            from_json(&text),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn count_mismatch() {
        let text = GOOD.replace(r#""n_learners": 2"#, r#""n_learners": 3"#);
        assert!(from_json(&text).is_err());
    }

    #[test]
    fn awkward_thresholds_survive() {
        let mut sl = from_json(GOOD).unwrap();
        for t in [0.1 + 0.2, 1e-300, -7.000000000000001, f64::MAX, 5e-324] {
            if let Node::Split {
                feature, left, right, ..
            } = sl.learners[0].tree.nodes()[0]
            {
                sl.learners[0].tree = DecisionTree::from_nodes(vec![
                    Node::Split {
                        feature,
                        threshold: t,
                        left,
                        right,
                    },
                    Node::Leaf { class: 0 },
                    Node::Leaf { class: 1 },
                ])
                .unwrap();
            }
            let back = from_json(&to_json(&sl).unwrap()).unwrap();
            match back.learners[0].tree.nodes()[0] {
                Node::Split { threshold, .. } => assert_eq!(threshold.to_bits(), t.to_bits()),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn save_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let sl = from_json(GOOD).unwrap();
        save(&sl, &path).unwrap();
        assert_eq!(load(&path).unwrap(), sl);
        assert!(!path.with_extension("json.partial").exists());
    }
}
