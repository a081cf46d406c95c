//! Biased random-key genetic algorithm for colour placement.
//!
//! A chromosome holds `switches * n_colors` keys in `[0, 1)`. The decoder
//! gives each colour the `R` switches with the largest keys in that colour's
//! block (lower index wins a tie); under [`PlacementRule::Exclusive`] switches
//! already taken by an earlier colour are skipped.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deploy::graph::{Commodity, NetworkGraph};
use crate::deploy::placement::{placement_objective, DeploymentPlan, Mode, Placement, PlacementRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrkgaParams {
    pub population: usize,
    pub elite_fraction: f64,
    pub mutant_fraction: f64,
    /// Probability that a child gene comes from the elite parent.
    pub inherit_prob_rho: f64,
    pub generations: usize,
    pub seed: u64,
    pub replicas_per_color: usize,
}

impl Default for BrkgaParams {
    fn default() -> Self {
        Self {
            population: 100,
            elite_fraction: 0.2,
            mutant_fraction: 0.15,
            inherit_prob_rho: 0.7,
            generations: 200,
            seed: 0,
            replicas_per_color: 1,
        }
    }
}

impl BrkgaParams {
    pub fn validate(&self) -> Result<()> {
        let frac = |x: f64| x > 0.0 && x < 1.0;
        if !frac(self.elite_fraction) || !frac(self.mutant_fraction) {
            return Err(Error::InvalidArgument(
                "elite and mutant fractions must lie in (0, 1)".into(),
            ));
        }
        if self.elite_fraction + self.mutant_fraction >= 1.0 {
            return Err(Error::InvalidArgument(
                "elite + mutant fractions must be below 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.inherit_prob_rho) {
            return Err(Error::InvalidArgument("rho must lie in [0, 1]".into()));
        }
        if self.population < 3 {
            return Err(Error::InvalidArgument(
                "population must hold at least 3 chromosomes".into(),
            ));
        }
        if self.replicas_per_color == 0 {
            return Err(Error::InvalidArgument("at least one replica per colour".into()));
        }
        Ok(())
    }

    fn sizes(&self) -> (usize, usize) {
        let elite = ((self.population as f64 * self.elite_fraction).round() as usize).max(1);
        let mutants = ((self.population as f64 * self.mutant_fraction).round() as usize).max(1);
        let elite = elite.min(self.population - 2);
        let mutants = mutants.min(self.population - elite - 1);
        (elite, mutants)
    }
}

pub fn decode(
    keys: &[f64],
    switches: usize,
    n_colors: usize,
    replicas: usize,
    rule: PlacementRule,
    mode: Mode,
) -> Placement {
    let mut p = Placement::empty(mode, n_colors, switches);
    let mut taken = vec![false; switches];
    let mut order: Vec<usize> = Vec::with_capacity(switches);
    for c in 0..n_colors {
        let block = &keys[c * switches..(c + 1) * switches];
        order.clear();
        order.extend(0..switches);
        order.sort_by(|&a, &b| block[b].total_cmp(&block[a]).then(a.cmp(&b)));
        let mut placed = 0;
        for &s in &order {
            if placed == replicas {
                break;
            }
            if rule == PlacementRule::Exclusive && taken[s] {
                continue;
            }
            p.colors[s] |= 1 << c;
            taken[s] = true;
            placed += 1;
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrkgaOutcome {
    pub plan: DeploymentPlan,
    /// Best objective after each generation, starting with the initial one.
    pub history: Vec<f64>,
}

pub fn brkga_solve(
    g: &NetworkGraph,
    commodities: &[Commodity],
    n_colors: usize,
    mode: Mode,
    rule: PlacementRule,
    params: &BrkgaParams,
) -> Result<BrkgaOutcome> {
    params.validate()?;
    let switches = g.switch_count();
    if switches == 0 {
        return Err(Error::InvalidTopology("no switches".into()));
    }
    if n_colors == 0 || n_colors > 16 {
        return Err(Error::InvalidArgument(format!("{n_colors} colours unsupported")));
    }
    let genes = switches * n_colors;
    let (n_elite, n_mutants) = params.sizes();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let random_chromosome = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..genes).map(|_| rng.random::<f64>()).collect() };

    let mut cache: HashMap<Placement, f64> = HashMap::new();
    let decode_one = |keys: &[f64]| decode(keys, switches, n_colors, params.replicas_per_color, rule, mode);

    let evaluate = |pop: &[Vec<f64>], cache: &mut HashMap<Placement, f64>| -> Vec<f64> {
        let placements: Vec<Placement> = pop.iter().map(|k| decode_one(k)).collect();
        let mut fresh: Vec<Placement> = placements.iter().filter(|p| !cache.contains_key(*p)).cloned().collect();
        fresh.sort_by(|a, b| a.colors.cmp(&b.colors));
        fresh.dedup();
        let scores: Vec<f64> = fresh
            .par_iter()
            .map(|p| placement_objective(g, p, commodities))
            .collect();
        cache.extend(fresh.into_iter().zip(scores));
        placements.iter().map(|p| cache[p]).collect()
    };

    let mut population: Vec<Vec<f64>> = (0..params.population).map(|_| random_chromosome(&mut rng)).collect();
    let mut fitness = evaluate(&population, &mut cache);
    let mut history = Vec::with_capacity(params.generations + 1);

    for generation in 0..=params.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        history.push(fitness[order[0]]);
        if generation == params.generations {
            population = order.iter().map(|&i| population[i].clone()).collect();
            break;
        }

        let elites: Vec<&Vec<f64>> = order[..n_elite].iter().map(|&i| &population[i]).collect();
        let others: Vec<&Vec<f64>> = order[n_elite..].iter().map(|&i| &population[i]).collect();
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(params.population);
        next.extend(elites.iter().map(|c| (*c).clone()));
        for _ in 0..n_mutants {
            next.push(random_chromosome(&mut rng));
        }
        while next.len() < params.population {
            let e = elites[rng.random_range(0..elites.len())];
            let o = others[rng.random_range(0..others.len())];
            let child = (0..genes)
                .map(|i| {
                    if rng.random::<f64>() < params.inherit_prob_rho {
                        e[i]
                    } else {
                        o[i]
                    }
                })
                .collect();
            next.push(child);
        }
        population = next;
        fitness = evaluate(&population, &mut cache);
    }

    let best = decode_one(&population[0]);
    Ok(BrkgaOutcome {
        plan: DeploymentPlan::build(g, best, commodities),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deploy::graph::CommoditySpec;
    use crate::deploy::paths::shortest_path;

    #[test]
    fn decoder_picks_top_keys() {
        let keys = [0.1, 0.9, 0.5, /* colour 1 */ 0.8, 0.2, 0.7];
        let p = decode(&keys, 3, 2, 1, PlacementRule::Shared, Mode::Wl);
        assert_eq!(p.colors, vec![0b10, 0b01, 0]);
        let p = decode(&keys, 3, 2, 2, PlacementRule::Shared, Mode::Wl);
        assert_eq!(p.colors, vec![0b10, 0b01, 0b11]);
        let keys = [0.1, 0.9, 0.5, /* colour 1 */ 0.1, 0.95, 0.7];
        let p = decode(&keys, 3, 2, 1, PlacementRule::Exclusive, Mode::Wl);
        assert_eq!(p.colors, vec![0, 0b01, 0b10]);
    }

    #[test]
    fn param_validation() {
        assert!(BrkgaParams {
            elite_fraction: 0.6,
            mutant_fraction: 0.4,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BrkgaParams {
            elite_fraction: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BrkgaParams::default().validate().is_ok());
    }

    #[test]
    fn single_switch() {
        let g = NetworkGraph::from_edges(1, &[]).unwrap();
        let cs = g
            .commodities(&[CommoditySpec {
                src: "s0".into(),
                dst: "s0".into(),
                demand: 1.0,
            }])
            .unwrap();
        let out = brkga_solve(
            &g,
            &cs,
            1,
            Mode::Wl,
            PlacementRule::Shared,
            &BrkgaParams {
                generations: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.plan.coverage, 1.0);
        assert_eq!(out.plan.objective, 0.0);
    }

    #[test]
    fn replicas_everywhere_gives_plain_costs() {
        let g = NetworkGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 5.0)]).unwrap();
        let specs = [("s0", "s2"), ("s3", "s1"), ("s0", "s3")].map(|(a, b)| CommoditySpec {
            src: a.into(),
            dst: b.into(),
            demand: 1.0,
        });
        let cs = g.commodities(&specs).unwrap();
        let params = BrkgaParams {
            replicas_per_color: 4,
            generations: 2,
            ..Default::default()
        };
        let out = brkga_solve(&g, &cs, 3, Mode::Wl, PlacementRule::Shared, &params).unwrap();
        let plain: f64 = cs.iter().map(|c| shortest_path(&g, c.src, c.dst).unwrap().cost).sum();
        assert_eq!(out.plan.objective, plain);
    }

    #[test]
    fn deterministic_and_monotone_history() {
        let g =
            NetworkGraph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 4, 3.0)]).unwrap();
        let cs = g
            .commodities(&[CommoditySpec {
                src: "s0".into(),
                dst: "s2".into(),
                demand: 1.0,
            }])
            .unwrap();
        let params = BrkgaParams {
            generations: 20,
            seed: 9,
            ..Default::default()
        };
        let a = brkga_solve(&g, &cs, 2, Mode::Wl, PlacementRule::Exclusive, &params).unwrap();
        let b = brkga_solve(&g, &cs, 2, Mode::Wl, PlacementRule::Exclusive, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
