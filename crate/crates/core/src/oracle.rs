//! Exact ground truth for small instances.

use thiserror::Error;

use crate::graph::{Color, EdgeColoring, EdgeId, Graph};
use crate::lists::ListAssignment;

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;
/// Colors are tracked in one machine word per vertex.
pub const MAX_ORACLE_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("node budget exhausted after {nodes_explored} nodes")]
    BudgetExceeded { nodes_explored: u64 },
    #[error("oracle supports d <= {MAX_ORACLE_DEGREE}, got {0}")]
    DegreeTooLarge(usize),
    #[error("graph is not {0}-regular")]
    NotRegular(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub avoidable: bool,
    pub witness: Option<EdgeColoring>,
    pub nodes_explored: u64,
}

struct Search<'a> {
    graph: &'a Graph,
    forbidden: Vec<u64>,
    vertex_used: Vec<u64>,
    colors: Vec<Color>,
    full: u64,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn available(&self, e: EdgeId) -> u64 {
        let (u, v) = self.graph.endpoints(e);
        self.full & !(self.vertex_used[u] | self.vertex_used[v] | self.forbidden[e])
    }

    /// `Ok(true)` once every edge is colored.
    fn run(&mut self) -> Result<bool, OracleError> {
        // most constrained uncolored edge; a dead edge prunes the branch
        let mut pick: Option<(EdgeId, u64)> = None;
        for e in 0..self.colors.len() {
            if self.colors[e] != 0 {
                continue;
            }
            let avail = self.available(e);
            if avail == 0 {
                return Ok(false);
            }
            if pick.is_none_or(|(_, best)| avail.count_ones() < best.count_ones()) {
                pick = Some((e, avail));
            }
        }
        let Some((e, mut avail)) = pick else {
            return Ok(true);
        };
        let (u, v) = self.graph.endpoints(e);
        while avail != 0 {
            let bit = avail & avail.wrapping_neg();
            avail ^= bit;
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(OracleError::BudgetExceeded {
                    nodes_explored: self.nodes,
                });
            }
            self.colors[e] = bit.trailing_zeros() + 1;
            self.vertex_used[u] |= bit;
            self.vertex_used[v] |= bit;
            if self.run()? {
                return Ok(true);
            }
            self.vertex_used[u] &= !bit;
            self.vertex_used[v] &= !bit;
            self.colors[e] = 0;
        }
        Ok(false)
    }
}

/// Decides by exhaustive search whether some proper d-edge coloring of `graph`
/// avoids `lists`.
pub fn oracle_avoidable(
    graph: &Graph,
    d: usize,
    lists: &ListAssignment,
    limit: u64,
) -> Result<OracleResult, OracleError> {
    if d > MAX_ORACLE_DEGREE {
        return Err(OracleError::DegreeTooLarge(d));
    }
    if graph.edge_count() > 0 && graph.regular_degree() != Some(d) {
        return Err(OracleError::NotRegular(d));
    }
    let full = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    let mut forbidden = vec![0u64; graph.edge_count()];
    for (e, list) in lists.iter() {
        if e < forbidden.len() {
            for &c in list {
                if c >= 1 && (c as usize) <= d {
                    forbidden[e] |= 1 << (c - 1);
                }
            }
        }
    }
    let mut search = Search {
        graph,
        forbidden,
        vertex_used: vec![0; graph.vertex_count()],
        colors: vec![0; graph.edge_count()],
        full,
        nodes: 0,
        limit,
    };
    let avoidable = search.run()?;
    Ok(OracleResult {
        avoidable,
        witness: avoidable.then(|| EdgeColoring::new(search.colors.clone(), d)),
        nodes_explored: search.nodes,
    })
}

/// Number of 2-colored 4-cycles through each edge, found by scanning every
/// 4-cycle of the graph directly.
pub fn oracle_cycle_census(graph: &Graph, f: &EdgeColoring) -> Vec<usize> {
    let mut counts = vec![0; graph.edge_count()];
    let n = graph.vertex_count();
    // each 4-cycle is visited once: u is its least vertex and v < t
    for u in 0..n {
        for &(v, uv) in graph.incident(u) {
            if v <= u {
                continue;
            }
            for &(z, vz) in graph.incident(v) {
                if z <= u {
                    continue;
                }
                for &(t, zt) in graph.incident(z) {
                    if t <= v || t == u {
                        continue;
                    }
                    let Some(tu) = graph.edge_between(t, u) else {
                        continue;
                    };
                    let (a, b) = (f.color(uv), f.color(vz));
                    if a != b && f.color(zt) == a && f.color(tu) == b {
                        for e in [uv, vz, zt, tu] {
                            counts[e] += 1;
                        }
                    }
                }
            }
        }
    }
    counts
}
