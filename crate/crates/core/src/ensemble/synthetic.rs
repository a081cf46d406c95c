//! Two-class Gaussian-mixture generator over the flow feature space, used
//! when no labelled capture is available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ensemble::dataset::{LabeledDataset, BENIGN, MALICIOUS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Separation {
    Easy,
    Hard,
}

impl Separation {
    /// Mean shift, in standard deviations, on informative features.
    fn shift(self) -> f64 {
        match self {
            Separation::Easy => 2.5,
            Separation::Hard => 0.8,
        }
    }
}

impl std::str::FromStr for Separation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Separation::Easy),
            "hard" => Ok(Separation::Hard),
            other => Err(Error::InvalidArgument(format!(
                "unknown separation preset {other:?} (expected easy or hard)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianSpec {
    pub feature_count: usize,
    pub rows: usize,
    /// Share of rows labelled malicious.
    pub malicious_fraction: f64,
    /// Share of features whose class means differ.
    pub informative_fraction: f64,
    pub separation: Separation,
    pub components_per_class: usize,
    pub seed: u64,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        Self {
            feature_count: 72,
            rows: 4000,
            malicious_fraction: 0.3,
            informative_fraction: 1.0 / 3.0,
            separation: Separation::Easy,
            components_per_class: 2,
            seed: 1,
        }
    }
}

pub fn gaussian_dataset(spec: &GaussianSpec) -> Result<LabeledDataset> {
    if spec.feature_count == 0 || spec.rows == 0 || spec.components_per_class == 0 {
        return Err(Error::InvalidArgument("empty synthetic dataset requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let f = spec.feature_count;

    // Direction of the class shift per feature; zero for uninformative ones.
    let direction: Vec<f64> = (0..f)
        .map(|_| {
            if rng.random::<f64>() < spec.informative_fraction {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        })
        .collect();

    // Mixture components share the class shift but jitter their centres.
    let mut centres = |shift: f64| -> Vec<Vec<f64>> {
        (0..spec.components_per_class)
            .map(|_| {
                direction
                    .iter()
                    .map(|d| d * shift + rng.random_range(-0.5..0.5))
                    .collect()
            })
            .collect()
    };
    let benign = centres(0.0);
    let malicious = centres(spec.separation.shift());

    let mut ds = LabeledDataset::new(f);
    for _ in 0..spec.rows {
        let label = if rng.random::<f64>() < spec.malicious_fraction {
            MALICIOUS
        } else {
            BENIGN
        };
        let pool = if label == MALICIOUS { &malicious } else { &benign };
        let centre = &pool[rng.random_range(0..pool.len())];
        let row = centre
            .iter()
            .map(|c| {
                let z: f64 = StandardNormal.sample(&mut rng);
                c + z
            })
            .collect();
        ds.push(row, label)?;
    }
    Ok(ds)
}
