//! Exhaustive placement search, the reference the heuristic is judged by.

use crate::deploy::graph::{Commodity, NetworkGraph};
use crate::deploy::placement::{placement_objective, DeploymentPlan, Mode, Placement, PlacementRule};
use crate::error::{Error, Result};

pub const DEFAULT_GUARD: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `0..n` as bitmasks, in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<u64> {
    fn go(start: usize, n: usize, k: usize, cur: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for i in start..=n - k {
            go(i + 1, n, k - 1, cur | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, 0, &mut out);
    }
    out
}

/// Enumerates every assignment of `replicas` switches to each colour and
/// keeps the lowest objective (first found on ties). Fails when the number
/// of assignments, `C(|S|, R)^N`, exceeds `guard`.
pub fn brute_force_placement(
    g: &NetworkGraph,
    commodities: &[Commodity],
    n_colors: usize,
    replicas: usize,
    mode: Mode,
    rule: PlacementRule,
    guard: u128,
) -> Result<DeploymentPlan> {
    let s = g.switch_count();
    if s > 64 {
        return Err(Error::InvalidArgument(
            "exhaustive search supports at most 64 switches".into(),
        ));
    }
    if n_colors == 0 || n_colors > 16 {
        return Err(Error::InvalidArgument(format!("{n_colors} colours unsupported")));
    }
    if replicas == 0 || replicas > s {
        return Err(Error::InvalidArgument(format!("{replicas} replicas on {s} switches")));
    }
    let per_color = binomial(s, replicas);
    let total = per_color.checked_pow(n_colors as u32).unwrap_or(u128::MAX);
    if total > guard {
        return Err(Error::GuardExceeded(total, guard));
    }

    let choices = subsets(s, replicas);
    let mut digits = vec![0usize; n_colors];
    let mut best: Option<(f64, Placement)> = None;
    loop {
        let used = digits.iter().map(|&d| choices[d]);
        let overlapping = rule == PlacementRule::Exclusive && {
            let mut acc = 0u64;
            used.clone().any(|m| {
                let clash = acc & m != 0;
                acc |= m;
                clash
            })
        };
        if !overlapping {
            let mut p = Placement::empty(mode, n_colors, s);
            for (c, m) in used.enumerate() {
                for (v, slot) in p.colors.iter_mut().enumerate() {
                    if m & (1 << v) != 0 {
                        *slot |= 1 << c;
                    }
                }
            }
            let obj = placement_objective(g, &p, commodities);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, p));
            }
        }

        // odometer
        let mut i = 0;
        loop {
            if i == n_colors {
                let (_, p) = best.ok_or_else(|| {
                    Error::Infeasible(format!(
                        "no valid placement of {n_colors} colours x {replicas} replicas on {s} switches"
                    ))
                })?;
                return Ok(DeploymentPlan::build(g, p, commodities));
            }
            digits[i] += 1;
            if digits[i] < choices.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
