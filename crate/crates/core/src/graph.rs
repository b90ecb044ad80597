//! Simple undirected graphs and labeled ground-truth instances.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// An undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge iterator. Self-loops are dropped and
    /// duplicate edges (in either orientation) collapse to one.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Config(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut twice = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Graph {
            adj,
            edge_count: twice / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Multi-source BFS hop distances; `None` for unreachable nodes.
    pub fn bfs_distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected-component id per node, numbered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let n = self.adj.len();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// A complete graph with binary node labels (`true` = target). Never handed
/// to agents; environments and evaluation code read it.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub graph: Graph,
    pub labels: Vec<bool>,
    /// Background block/community per node (all zero when unknown).
    pub communities: Vec<usize>,
    /// Host node sets of implanted foreground subnetworks, in implant order.
    pub anomalies: Vec<Vec<usize>>,
    /// Original node identifiers for graphs loaded from files.
    pub id_map: Option<Vec<String>>,
}

impl GroundTruth {
    pub fn unlabeled(graph: Graph) -> Self {
        let n = graph.node_count();
        GroundTruth {
            graph,
            labels: vec![false; n],
            communities: vec![0; n],
            anomalies: Vec::new(),
            id_map: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.labels[v]
    }

    pub fn target_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn targets(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v]).collect()
    }

    /// Checks the structural invariants; a usable instance needs a target.
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.labels.len() != n || self.communities.len() != n {
            return Err(Error::Config(format!(
                "label/community vectors must have length {n}"
            )));
        }
        if !self.labels.iter().any(|&l| l) {
            return Err(Error::Config("instance has no target nodes".into()));
        }
        for set in &self.anomalies {
            if set.iter().any(|&v| v >= n || !self.labels[v]) {
                return Err(Error::Config(
                    "anomaly host sets must contain in-range target nodes".into(),
                ));
            }
        }
        Ok(())
    }

    /// Target groups used to pick seeds: the implanted host sets when known,
    /// otherwise all targets as a single group.
    pub fn target_groups(&self) -> Vec<Vec<usize>> {
        if self.anomalies.is_empty() {
            vec![self.targets()]
        } else {
            self.anomalies.clone()
        }
    }
}
