//! Word mover's distance: the relaxed lower bound used as a feature, and an
//! exact small-instance solver used to check it.

use std::collections::BTreeMap;

use crate::embeddings::EmbeddingTable;
use crate::{Error, Result};

/// Largest number of distinct in-table tokens per side the exact solver
/// accepts.
pub const EXACT_WMD_LIMIT: usize = 8;

/// Normalised bag of words over in-table tokens, as (vector, weight, count).
struct Bag<'a> {
    vectors: Vec<&'a [f64]>,
    counts: Vec<u64>,
    total: u64,
}

impl<'a> Bag<'a> {
    fn new(tokens: &[String], table: &'a EmbeddingTable) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for t in tokens {
            if table.contains(t) {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let total = counts.values().sum();
        Bag {
            vectors: counts
                .keys()
                .map(|t| table.get(t).expect("filtered"))
                .collect(),
            counts: counts.into_values().collect(),
            total,
        }
    }

    fn weight(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.total as f64
    }

    fn is_empty(&self) -> bool {
        self.total == 0
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn one_sided(from: &Bag<'_>, to: &Bag<'_>) -> f64 {
    (0..from.vectors.len())
        .map(|i| {
            let nearest = to
                .vectors
                .iter()
                .map(|v| euclidean(from.vectors[i], v))
                .fold(f64::INFINITY, f64::min);
            from.weight(i) * nearest
        })
        .sum()
}

/// Relaxed WMD: each word travels whole to its nearest counterpart; the
/// larger of the two directions. 0 when either side has no in-table token.
pub fn relaxed_wmd(t1: &[String], t2: &[String], table: &EmbeddingTable) -> f64 {
    let b1 = Bag::new(t1, table);
    let b2 = Bag::new(t2, table);
    if b1.is_empty() || b2.is_empty() {
        return 0.0;
    }
    one_sided(&b1, &b2).max(one_sided(&b2, &b1))
}

/// Exact WMD by min-cost flow. Bag weights are rational, so scaling every
/// supply by the other side's token total makes all capacities integral and
/// successive shortest paths terminates at the optimum.
pub fn exact_wmd_small(t1: &[String], t2: &[String], table: &EmbeddingTable) -> Result<f64> {
    let b1 = Bag::new(t1, table);
    let b2 = Bag::new(t2, table);
    for bag in [&b1, &b2] {
        if bag.vectors.len() > EXACT_WMD_LIMIT {
            return Err(Error::TransportTooLarge {
                count: bag.vectors.len(),
                limit: EXACT_WMD_LIMIT,
            });
        }
    }
    if b1.is_empty() || b2.is_empty() {
        return Ok(0.0);
    }
    let (m, n) = (b1.vectors.len(), b2.vectors.len());
    let supply: Vec<u64> = b1.counts.iter().map(|c| c * b2.total).collect();
    let demand: Vec<u64> = b2.counts.iter().map(|c| c * b1.total).collect();
    let cost: Vec<Vec<f64>> = b1
        .vectors
        .iter()
        .map(|a| b2.vectors.iter().map(|b| euclidean(a, b)).collect())
        .collect();

    let flow = min_cost_transport(&supply, &demand, &cost);
    let scale = (b1.total * b2.total) as f64;
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            total += flow[i][j] as f64 * cost[i][j];
        }
    }
    Ok(total / scale)
}

struct Edge {
    to: usize,
    cap: u64,
    cost: f64,
}

/// Successive shortest augmenting paths (Bellman-Ford) on the bipartite
/// transport network. Returns the flow matrix.
fn min_cost_transport(supply: &[u64], demand: &[u64], cost: &[Vec<f64>]) -> Vec<Vec<u64>> {
    let (m, n) = (supply.len(), demand.len());
    let source = m + n;
    let sink = source + 1;
    let nodes = sink + 1;
    let mut edges: Vec<Edge> = Vec::new();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |edges: &mut Vec<Edge>, from: usize, to: usize, cap: u64, cost: f64| {
        adjacency[from].push(edges.len());
        edges.push(Edge { to, cap, cost });
        adjacency[to].push(edges.len());
        edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
    };
    for (i, &s) in supply.iter().enumerate() {
        add(&mut edges, source, i, s, 0.0);
    }
    let mut cell_edge = vec![vec![0usize; n]; m];
    for i in 0..m {
        for j in 0..n {
            cell_edge[i][j] = edges.len();
            add(&mut edges, i, m + j, u64::MAX, cost[i][j]);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        add(&mut edges, m + j, sink, d, 0.0);
    }

    let required: u64 = supply.iter().sum();
    let mut sent = 0;
    while sent < required {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &adjacency[u] {
                    let edge = &edges[e];
                    if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut bottleneck = required - sent;
        let mut v = sink;
        while let Some(e) = via[v] {
            bottleneck = bottleneck.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        assert!(
            v == source && bottleneck > 0,
            "balanced transport always has an augmenting path"
        );
        let mut v = sink;
        while let Some(e) = via[v] {
            edges[e].cap -= bottleneck;
            edges[e ^ 1].cap += bottleneck;
            v = edges[e ^ 1].to;
        }
        sent += bottleneck;
    }

    cell_edge
        .iter()
        .map(|row| row.iter().map(|&e| edges[e ^ 1].cap).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_entries(
            2,
            [
                ("a", vec![0.0, 0.0]),
                ("b", vec![3.0, 4.0]),
                ("c", vec![1.0, 0.0]),
                ("d", vec![0.0, 2.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identical_bags_are_zero() {
        let t = table();
        assert_eq!(relaxed_wmd(&toks("a b c"), &toks("c b a"), &t), 0.0);
        assert_eq!(
            exact_wmd_small(&toks("a b c"), &toks("c b a"), &t).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_tokens_at_distance_d() {
        let t = table();
        assert_eq!(relaxed_wmd(&toks("a"), &toks("b"), &t), 5.0);
        assert_eq!(exact_wmd_small(&toks("a"), &toks("b"), &t).unwrap(), 5.0);
    }

    #[test]
    fn missing_side_is_zero() {
        let t = table();
        assert_eq!(relaxed_wmd(&toks("zz"), &toks("a"), &t), 0.0);
        assert_eq!(exact_wmd_small(&toks(""), &toks("a"), &t).unwrap(), 0.0);
    }

    /// Bags {a, b} and {c, d}, weights 1/2 each. The 2x2 transport polytope
    /// with equal marginals has two vertices: the identity and the swap
    /// assignment, each moving 1/2 along two edges.
    ///   identity: d(a,c) + d(b,d) = 1 + sqrt(9 + 4)
    ///   swap:     d(a,d) + d(b,c) = 2 + sqrt(4 + 16)
    #[test]
    fn two_by_two_vertex_enumeration() {
        let t = table();
        let identity = 0.5 * (1.0 + 13f64.sqrt());
        let swap = 0.5 * (2.0 + 20f64.sqrt());
        let expected = identity.min(swap);
        let got = exact_wmd_small(&toks("a b"), &toks("c d"), &t).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(relaxed_wmd(&toks("a b"), &toks("c d"), &t) <= got + 1e-12);
    }

    #[test]
    fn unequal_mass_split() {
        // {a, a, b} vs {c}: everything moves to c.
        let t = table();
        let got = exact_wmd_small(&toks("a a b"), &toks("c"), &t).unwrap();
        let expected = (2.0 / 3.0) * 1.0 + (1.0 / 3.0) * (4.0f64 + 16.0).sqrt();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        let entries: Vec<(String, Vec<f64>)> =
            (0..9).map(|i| (format!("w{i}"), vec![i as f64])).collect();
        let t = EmbeddingTable::from_entries(1, entries).unwrap();
        let nine: Vec<String> = (0..9).map(|i| format!("w{i}")).collect();
        assert!(matches!(
            exact_wmd_small(&nine, &nine[..2], &t),
            Err(Error::TransportTooLarge { count: 9, limit: 8 })
        ));
    }
}
