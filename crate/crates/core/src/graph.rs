//! Conditional-dependency graphs read off a sparse precision matrix.
//!
//! Nodes are the precision's coordinates; an edge joins `i` and `j` when the
//! partial correlation `-theta_ij / sqrt(theta_ii theta_jj)` exceeds the edge
//! threshold in magnitude. Exports are Graphviz DOT and a small JSON shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glasso::SymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub i: usize,
    pub j: usize,
    /// Partial correlation between nodes `i` and `j`.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

/// Thresholded partial-correlation graph of a precision matrix.
pub fn dependency_graph(
    theta: &SymMatrix,
    labels: &[String],
    edge_threshold: f64,
) -> Result<DependencyGraph> {
    let p = theta.order();
    if labels.len() != p {
        return Err(Error::Mismatch(format!(
            "{} labels for a precision of order {p}",
            labels.len()
        )));
    }
    if !(edge_threshold >= 0.0) {
        return Err(Error::Config("edge threshold must be nonnegative".into()));
    }
    for i in 0..p {
        if theta.get(i, i) <= 0.0 {
            return Err(Error::NotPositiveDefinite(
                "precision diagonal must be positive".into(),
            ));
        }
    }
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let w = -theta.get(i, j) / (theta.get(i, i) * theta.get(j, j)).sqrt();
            if w.abs() > edge_threshold {
                edges.push(GraphEdge { i, j, weight: w });
            }
        }
    }
    Ok(DependencyGraph {
        nodes: labels.to_vec(),
        edges,
    })
}

impl DependencyGraph {
    /// Component id per node, ids numbered by first appearance.
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut ids = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            let root = find(&mut parent, v);
            if ids[root] == usize::MAX {
                ids[root] = next;
                next += 1;
            }
            ids[v] = ids[root];
        }
        ids
    }

    pub fn component_count(&self) -> usize {
        self.connected_components()
            .iter()
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Graphviz DOT text: `graph <name> { "a" -- "b" [weight=...]; }`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("graph {name} {{\n"));
        for node in &self.nodes {
            out.push_str(&format!("  \"{node}\";\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [weight={:.6}];\n",
                self.nodes[e.i], self.nodes[e.j], e.weight
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
