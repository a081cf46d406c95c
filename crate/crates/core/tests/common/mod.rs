#![allow(dead_code)]

use innet::deploy::{CommoditySpec, Mode, NetworkGraph, Placement};
use innet::ensemble::{DecisionTree, Node, StrongLearner, VoteRule, WeakLearner};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Packs a header by building the bit string character by character.
pub fn pack_bits(n: usize, ids: &[u16], outputs: &[bool], mask: &[bool]) -> Vec<u8> {
    let mut width = 1;
    while (1usize << width) < n {
        width += 1;
    }
    let mut bits = String::new();
    for &id in ids {
        bits.push_str(&format!("{id:0width$b}"));
    }
    for &o in outputs {
        bits.push(if o { '1' } else { '0' });
    }
    for &m in mask {
        bits.push(if m { '1' } else { '0' });
    }
    while !bits.len().is_multiple_of(8) {
        bits.push('0');
    }
    bits.as_bytes()
        .chunks(8)
        .map(|c| u8::from_str_radix(std::str::from_utf8(c).unwrap(), 2).unwrap())
        .collect()
}

/// Cheapest colour-complete walk by relaxing walks one edge at a time, up
/// to `(N+1)(|V|-1)` edges. Costs are compared exactly.
pub fn walk_dp(adj: &[Vec<(usize, f64)>], colors: &[u32], n_colors: usize, src: usize, dst: usize) -> Option<f64> {
    let v = adj.len();
    let full = (1u32 << n_colors) - 1;
    let states = 1usize << n_colors;
    let mut cur = vec![vec![f64::INFINITY; states]; v];
    cur[src][(colors[src] & full) as usize] = 0.0;
    let mut best = cur[dst][full as usize];
    let max_edges = (n_colors + 1) * v.saturating_sub(1);
    for _ in 0..max_edges {
        let mut next = vec![vec![f64::INFINITY; states]; v];
        for (u, row) in cur.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                if c.is_infinite() {
                    continue;
                }
                for &(w, cost) in &adj[u] {
                    let mm = (m as u32 | (colors[w] & full)) as usize;
                    if c + cost < next[w][mm] {
                        next[w][mm] = c + cost;
                    }
                }
            }
        }
        cur = next;
        best = best.min(cur[dst][full as usize]);
    }
    best.is_finite().then_some(best)
}

/// Plain shortest distance by Floyd-Warshall.
pub fn floyd(adj: &[Vec<(usize, f64)>], src: usize, dst: usize) -> Option<f64> {
    let v = adj.len();
    let mut d = vec![vec![f64::INFINITY; v]; v];
    for (u, row) in adj.iter().enumerate() {
        d[u][u] = 0.0;
        for &(w, c) in row {
            d[u][w] = d[u][w].min(c);
        }
    }
    for k in 0..v {
        for i in 0..v {
            for j in 0..v {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d[src][dst].is_finite().then_some(d[src][dst])
}

/// Random connected graph: a random spanning tree plus extra edges, with
/// integer costs so sums compare exactly.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize, max_cost: u32) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let has =
        |e: &[(usize, usize, f64)], a: usize, b: usize| e.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a));
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((order[i], parent, f64::from(rng.random_range(1..=max_cost))));
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !has(&edges, a, b) {
            edges.push((a, b, f64::from(rng.random_range(1..=max_cost))));
        }
    }
    edges
}

pub fn adjacency(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, c) in edges {
        adj[a].push((b, c));
        adj[b].push((a, c));
    }
    adj
}

/// Topology JSON for a switch graph with one host per switch (`h{i}` at `s{i}`).
pub fn topology_json(n: usize, edges: &[(usize, usize, f64)]) -> innet::deploy::TopologyFile {
    innet::deploy::TopologyFile {
        switches: (0..n).map(|i| format!("s{i}")).collect(),
        hosts: (0..n)
            .map(|i| innet::deploy::HostSpec {
                id: format!("h{i}"),
                attach: format!("s{i}"),
            })
            .collect(),
        links: edges
            .iter()
            .map(|&(a, b, c)| innet::deploy::LinkSpec {
                a: format!("s{a}"),
                b: format!("s{b}"),
                cost: c,
            })
            .collect(),
        commodities: vec![],
    }
}

pub fn random_commodities(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<CommoditySpec> {
    (0..count)
        .map(|_| {
            let s = rng.random_range(0..n);
            let mut d = rng.random_range(0..n);
            while d == s && n > 1 {
                d = rng.random_range(0..n);
            }
            CommoditySpec {
                src: format!("h{s}"),
                dst: format!("h{d}"),
                demand: 1.0,
            }
        })
        .collect()
}

pub fn random_placement(rng: &mut ChaCha8Rng, switches: usize, n_colors: usize) -> Placement {
    let mut p = Placement::empty(Mode::Wl, n_colors, switches);
    for c in 0..n_colors {
        let copies = rng.random_range(1..=2);
        for _ in 0..copies {
            p.colors[rng.random_range(0..switches)] |= 1 << c;
        }
    }
    p
}

/// Random pre-order tree over `features` inputs, no deeper than `depth`.
pub fn random_tree(rng: &mut ChaCha8Rng, features: usize, depth: usize) -> DecisionTree {
    fn grow(rng: &mut ChaCha8Rng, features: usize, depth: usize, nodes: &mut Vec<Node>) {
        if depth == 0 || rng.random_bool(0.25) {
            nodes.push(Node::Leaf {
                class: rng.random_range(0..=1),
            });
            return;
        }
        let at = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        grow(rng, features, depth - 1, nodes);
        let right = nodes.len();
        grow(rng, features, depth - 1, nodes);
        nodes[at] = Node::Split {
            feature: rng.random_range(0..features),
            threshold: rng.random_range(-1.0..1.0),
            left: at + 1,
            right,
        };
    }
    let mut nodes = Vec::new();
    grow(rng, features, depth, &mut nodes);
    DecisionTree::from_nodes(nodes).expect("pre-order tree")
}

/// Random ensemble of `n` learners over `f` features with 24-feature subsets.
pub fn random_ensemble(rng: &mut ChaCha8Rng, n: usize, f: usize, depth: usize) -> StrongLearner {
    let k = 24.min(f);
    let learners = (0..n)
        .map(|i| {
            let mut subset = rand::seq::index::sample(rng, f, k).into_vec();
            subset.sort_unstable();
            WeakLearner {
                wl_id: i as u16,
                feature_subset: subset,
                tree: random_tree(rng, k, depth),
            }
        })
        .collect();
    StrongLearner {
        feature_count: f,
        learners,
        vote_rule: VoteRule::default(),
    }
}

pub fn graph_of(n: usize, edges: &[(usize, usize, f64)]) -> NetworkGraph {
    NetworkGraph::from_file(&topology_json(n, edges)).expect("valid graph")
}
