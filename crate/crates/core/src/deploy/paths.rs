//! Plain and colour-constrained shortest walks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::deploy::graph::NetworkGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Switch indices from source to destination; may revisit switches.
    pub walk: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
    mask: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Min-heap on (cost, node, mask).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.mask.cmp(&self.mask))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Minimum-cost path. Among equal-cost paths the lexicographically smallest
/// switch-index sequence wins. `None` when `dst` is unreachable.
pub fn shortest_path(g: &NetworkGraph, src: usize, dst: usize) -> Option<Route> {
    let n = g.switch_count();
    // Distances to dst, then a greedy forward pass that always takes the
    // smallest neighbour still on some shortest path.
    let mut to_dst = vec![f64::INFINITY; n];
    to_dst[dst] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        cost: 0.0,
        node: dst,
        mask: 0,
    });
    while let Some(Entry { cost, node, .. }) = heap.pop() {
        if cost > to_dst[node] {
            continue;
        }
        for &(v, c) in g.neighbors(node) {
            let next = cost + c;
            if next < to_dst[v] {
                to_dst[v] = next;
                heap.push(Entry {
                    cost: next,
                    node: v,
                    mask: 0,
                });
            }
        }
    }
    if !to_dst[src].is_finite() {
        return None;
    }
    let mut walk = vec![src];
    let mut cost = 0.0;
    let mut u = src;
    while u != dst {
        let &(v, c) = g
            .neighbors(u)
            .iter()
            .find(|&&(v, c)| to_dst[v].is_finite() && close(c + to_dst[v], to_dst[u]))
            .expect("a finite distance always has a tight neighbour");
        walk.push(v);
        cost += c;
        u = v;
    }
    Some(Route { walk, cost })
}

/// Cheapest walk from `src` to `dst` whose visited switches together carry
/// every colour in `0..n_colors`.
///
/// Label-setting search over `(switch, colours collected)` states, so the
/// state space is `|V| * 2^n_colors`. `colors[v]` is the bitmask of colours
/// hosted at switch `v`. Walks may revisit switches.
pub fn colored_shortest_path(
    g: &NetworkGraph,
    colors: &[u32],
    n_colors: usize,
    src: usize,
    dst: usize,
) -> Option<Route> {
    assert!(n_colors < 32, "at most 31 colours supported");
    let full: u32 = (1u32 << n_colors) - 1;
    let n = g.switch_count();
    let states = n << n_colors;
    let idx = |v: usize, m: u32| (v << n_colors) | m as usize;

    let mut dist = vec![f64::INFINITY; states];
    let mut pred = vec![usize::MAX; states];
    let mut done = vec![false; states];

    let start_mask = colors[src] & full;
    dist[idx(src, start_mask)] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        cost: 0.0,
        node: src,
        mask: start_mask,
    });

    while let Some(Entry { cost, node, mask }) = heap.pop() {
        let s = idx(node, mask);
        if done[s] {
            continue;
        }
        done[s] = true;
        if node == dst && mask == full {
            let mut walk = vec![node];
            let mut cur = s;
            while pred[cur] != usize::MAX {
                cur = pred[cur];
                walk.push(cur >> n_colors);
            }
            walk.reverse();
            return Some(Route { walk, cost });
        }
        for &(v, c) in g.neighbors(node) {
            let m = mask | (colors[v] & full);
            let t = idx(v, m);
            let next = cost + c;
            if !done[t] && next < dist[t] {
                dist[t] = next;
                pred[t] = s;
                heap.push(Entry {
                    cost: next,
                    node: v,
                    mask: m,
                });
            }
        }
    }
    None
}

/// Colours in `0..n_colors` hosted on no switch reachable from `src`.
pub fn unreachable_colors(g: &NetworkGraph, colors: &[u32], n_colors: usize, src: usize) -> Vec<usize> {
    let mut seen = vec![false; g.switch_count()];
    let mut stack = vec![src];
    seen[src] = true;
    let mut have = 0u32;
    while let Some(u) = stack.pop() {
        have |= colors[u];
        for &(v, _) in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    (0..n_colors).filter(|c| have & (1 << c) == 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> NetworkGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        NetworkGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn plain_line() {
        let r = shortest_path(&line(3), 0, 2).unwrap();
        assert_eq!(r.walk, vec![0, 1, 2]);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn picks_cheaper_parallel_route() {
        // 0-1-3 costs 3, 0-2-3 costs 2
        let g = NetworkGraph::from_edges(4, &[(0, 1, 1.5), (1, 3, 1.5), (0, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let r = shortest_path(&g, 0, 3).unwrap();
        assert_eq!(r.walk, vec![0, 2, 3]);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn lexicographic_tie_break() {
        let g = NetworkGraph::from_edges(4, &[(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)]).unwrap();
        assert_eq!(shortest_path(&g, 0, 3).unwrap().walk, vec![0, 1, 3]);
    }

    #[test]
    fn unreachable() {
        let g = NetworkGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(shortest_path(&g, 0, 2).is_none());
        assert!(colored_shortest_path(&g, &[0, 0, 1], 1, 0, 1).is_none());
    }

    #[test]
    fn colored_line() {
        // s=0, a=1 (red), b=2 (blue), t=3
        let r = colored_shortest_path(&line(4), &[0, 0b01, 0b10, 0], 2, 0, 3).unwrap();
        assert_eq!(r.walk, vec![0, 1, 2, 3]);
        assert_eq!(r.cost, 3.0);
    }

    #[test]
    fn all_colours_on_one_switch() {
        let r = colored_shortest_path(&line(4), &[0, 0, 0b111, 0], 3, 0, 3).unwrap();
        assert_eq!(r.cost, shortest_path(&line(4), 0, 3).unwrap().cost);
    }

    #[test]
    fn spur_detour() {
        // 0-1-2 main line, red on spur 3 hanging off 1 with cost 2.
        let g = NetworkGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 2.0)]).unwrap();
        let r = colored_shortest_path(&g, &[0, 0, 0, 1], 1, 0, 2).unwrap();
        assert_eq!(r.cost, 2.0 + 4.0);
        assert_eq!(r.walk, vec![0, 1, 3, 1, 2]);
    }

    #[test]
    fn source_and_destination_colours_count() {
        let r = colored_shortest_path(&line(2), &[0b01, 0b10], 2, 0, 1).unwrap();
        assert_eq!(r.cost, 1.0);
        let r = colored_shortest_path(&line(2), &[0b11, 0], 2, 0, 0).unwrap();
        assert_eq!((r.walk.as_slice(), r.cost), (&[0][..], 0.0));
    }

    #[test]
    fn missing_colour() {
        let g = line(3);
        assert!(colored_shortest_path(&g, &[0, 0b01, 0], 2, 0, 2).is_none());
        assert_eq!(unreachable_colors(&g, &[0, 0b01, 0], 2, 0), vec![1]);
    }
}
