//! Label-blind question co-occurrence graph.

use std::collections::{BTreeSet, HashMap};

/// Undirected simple graph whose nodes are distinct question texts and whose
/// edges join two questions that appear together in some pair.
#[derive(Debug, Clone, Default)]
pub struct PairGraph {
    index: HashMap<String, usize>,
    neighbors: Vec<BTreeSet<usize>>,
}

impl PairGraph {
    fn node(&mut self, text: &str) -> usize {
        if let Some(&i) = self.index.get(text) {
            return i;
        }
        let i = self.neighbors.len();
        self.index.insert(text.to_string(), i);
        self.neighbors.push(BTreeSet::new());
        i
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn degree(&self, text: &str) -> Option<usize> {
        self.index.get(text).map(|&i| self.neighbors[i].len())
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.neighbors[i].contains(&j),
            _ => false,
        }
    }
}

/// Build the graph from `(q1, q2)` texts. Self-pairs add the node only.
pub fn build_pair_graph<'a, I>(pairs: I) -> PairGraph
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut graph = PairGraph::default();
    for (a, b) in pairs {
        let i = graph.node(a);
        let j = graph.node(b);
        if i != j {
            graph.neighbors[i].insert(j);
            graph.neighbors[j].insert(i);
        }
    }
    graph
}

/// `[common neighbours, min degree, max degree, neighbourhood Jaccard]`.
/// Each neighbourhood excludes the other question of the pair. Unknown
/// questions give all zeros; two empty neighbourhoods have Jaccard 0.
pub fn graph_features(graph: &PairGraph, q1: &str, q2: &str) -> [f64; 4] {
    let (Some(&i), Some(&j)) = (graph.index.get(q1), graph.index.get(q2)) else {
        return [0.0; 4];
    };
    let n1: BTreeSet<usize> = graph.neighbors[i]
        .iter()
        .copied()
        .filter(|&k| k != j)
        .collect();
    let n2: BTreeSet<usize> = graph.neighbors[j]
        .iter()
        .copied()
        .filter(|&k| k != i)
        .collect();
    let common = n1.intersection(&n2).count();
    let union = n1.union(&n2).count();
    let (d1, d2) = (graph.neighbors[i].len(), graph.neighbors[j].len());
    [
        common as f64,
        d1.min(d2) as f64,
        d1.max(d2) as f64,
        if union == 0 {
            0.0
        } else {
            common as f64 / union as f64
        },
    ]
}
