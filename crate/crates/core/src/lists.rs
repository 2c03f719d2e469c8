//! Lists of forbidden colors: representation, β-sparsity validation and
//! seeded generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constructors::ColoredGraph;
use crate::graph::{Color, EdgeColoring, EdgeId, Graph, Neighborhoods, Vertex};
use crate::ratio::{self, Rational};

/// Radius of the neighborhoods in sparsity condition (iii).
pub const SPARSITY_RADIUS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ListError {
    #[error("edge {edge} lists color {color} outside 1..={d}")]
    ColorOutOfRange { edge: EdgeId, color: Color, d: usize },
    #[error("list key {edge} is not an edge index (graph has {count} edges)")]
    EdgeOutOfRange { edge: EdgeId, count: usize },
    #[error("max list size {max_list} exceeds s-1 = {limit}")]
    InvalidBound { max_list: usize, limit: usize },
    #[error("beta must be non-negative")]
    NegativeBeta,
}

/// Forbidden colors per edge; an absent edge has an empty list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ListAssignment {
    lists: BTreeMap<EdgeId, BTreeSet<Color>>,
}

impl ListAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, e: EdgeId, c: Color) -> bool {
        self.lists.entry(e).or_default().insert(c)
    }

    pub fn set<I: IntoIterator<Item = Color>>(&mut self, e: EdgeId, colors: I) {
        let set: BTreeSet<Color> = colors.into_iter().collect();
        if set.is_empty() {
            self.lists.remove(&e);
        } else {
            self.lists.insert(e, set);
        }
    }

    pub fn get(&self, e: EdgeId) -> Option<&BTreeSet<Color>> {
        self.lists.get(&e)
    }

    pub fn contains(&self, e: EdgeId, c: Color) -> bool {
        self.lists.get(&e).is_some_and(|l| l.contains(&c))
    }

    pub fn list_len(&self, e: EdgeId) -> usize {
        self.lists.get(&e).map_or(0, BTreeSet::len)
    }

    /// Edges with a nonempty list, ascending.
    pub fn support(&self) -> Vec<EdgeId> {
        self.lists
            .iter()
            .filter(|(_, l)| !l.is_empty())
            .map(|(&e, _)| e)
            .collect()
    }

    pub fn max_list_len(&self) -> usize {
        self.lists.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.lists.values().all(BTreeSet::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, &BTreeSet<Color>)> {
        self.lists.iter().map(|(&e, l)| (e, l))
    }

    pub fn check_range(&self, edge_count: usize, d: usize) -> Result<(), ListError> {
        for (&e, list) in &self.lists {
            if e >= edge_count {
                return Err(ListError::EdgeOutOfRange {
                    edge: e,
                    count: edge_count,
                });
            }
            if let Some(&c) = list.iter().find(|&&c| c == 0 || c as usize > d) {
                return Err(ListError::ColorOutOfRange { edge: e, color: c, d });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SparsityCondition {
    /// (i) list size per edge
    ListSize,
    /// (ii) occurrences of a color at one vertex
    VertexColor,
    /// (iii) occurrences of a color in one standard matching inside a 6-neighborhood
    NeighborhoodMatching,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SparsityWitness {
    Edge(EdgeId),
    VertexColor { vertex: Vertex, color: Color },
    Neighborhood { anchor: EdgeId, matching: Color, color: Color },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: SparsityCondition,
    pub witness: SparsityWitness,
    pub count: usize,
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Counts of list occurrences per anchor neighborhood, matching and color.
struct NeighborhoodCounts {
    d: usize,
    counts: Vec<u32>,
}

impl NeighborhoodCounts {
    fn new(edges: usize, d: usize) -> Self {
        NeighborhoodCounts {
            d,
            counts: vec![0; edges * d * d],
        }
    }

    fn slot(&self, anchor: EdgeId, matching: Color, color: Color) -> usize {
        (anchor * self.d + matching as usize - 1) * self.d + color as usize - 1
    }

    fn get(&self, anchor: EdgeId, matching: Color, color: Color) -> u32 {
        self.counts[self.slot(anchor, matching, color)]
    }

    fn bump(&mut self, anchor: EdgeId, matching: Color, color: Color) {
        let i = self.slot(anchor, matching, color);
        self.counts[i] += 1;
    }
}

/// Checks conditions (i)-(iii) against the exact value `beta * s`.
/// Condition (iii) ranges over the 6-neighborhood of every edge.
pub fn validate_beta_sparse(
    cg: &ColoredGraph,
    lists: &ListAssignment,
    beta: &Rational,
) -> Result<SparsityReport, ListError> {
    if *beta < ratio::int(0) {
        return Err(ListError::NegativeBeta);
    }
    let g = &cg.graph;
    lists.check_range(g.edge_count(), cg.d)?;
    let bound = beta * ratio::int(cg.s as i64);
    let limit = ratio::max_count_at_most(&bound).unwrap_or(0);
    let mut violations = Vec::new();

    for (e, list) in lists.iter() {
        if list.len() > limit {
            violations.push(Violation {
                condition: SparsityCondition::ListSize,
                witness: SparsityWitness::Edge(e),
                count: list.len(),
                bound: bound.clone(),
            });
        }
    }

    let d = cg.d;
    let mut at_vertex = vec![0usize; d + 1];
    for v in 0..g.vertex_count() {
        for &(_, e) in g.incident(v) {
            if let Some(list) = lists.get(e) {
                for &c in list {
                    at_vertex[c as usize] += 1;
                }
            }
        }
        for (c, count) in at_vertex.iter_mut().enumerate() {
            if *count > limit {
                violations.push(Violation {
                    condition: SparsityCondition::VertexColor,
                    witness: SparsityWitness::VertexColor {
                        vertex: v,
                        color: c as Color,
                    },
                    count: *count,
                    bound: bound.clone(),
                });
            }
            *count = 0;
        }
    }

    if !lists.is_empty() {
        let hoods = Neighborhoods::new(g, SPARSITY_RADIUS);
        let mut counts = NeighborhoodCounts::new(g.edge_count(), d);
        // f ∈ N(anchor) iff anchor ∈ N(f)
        for (f, list) in lists.iter() {
            let m = cg.h.color(f);
            for &anchor in hoods.of(f) {
                for &c in list {
                    counts.bump(anchor, m, c);
                }
            }
        }
        for anchor in 0..g.edge_count() {
            for m in 1..=d as Color {
                for c in 1..=d as Color {
                    let count = counts.get(anchor, m, c) as usize;
                    if count > limit {
                        violations.push(Violation {
                            condition: SparsityCondition::NeighborhoodMatching,
                            witness: SparsityWitness::Neighborhood {
                                anchor,
                                matching: m,
                                color: c,
                            },
                            count,
                            bound: bound.clone(),
                        });
                    }
                }
            }
        }
    }

    // an empty list assignment is valid even when beta*s < 0 rounds to nothing
    Ok(SparsityReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// Number of list occurrences of `color` among edges of standard matching
/// `matching` inside `region`.
pub fn matching_color_count(
    cg: &ColoredGraph,
    lists: &ListAssignment,
    region: &[EdgeId],
    matching: Color,
    color: Color,
) -> usize {
    region
        .iter()
        .filter(|&&f| cg.h.color(f) == matching && lists.contains(f, color))
        .count()
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Greedy-random β-sparse assignment: (edge, color) pairs are visited in a
/// seeded random order and a pair is kept iff all three conditions still
/// hold afterwards.
pub fn generate_sparse(cg: &ColoredGraph, beta: &Rational, seed: u64) -> ListAssignment {
    let mut out = ListAssignment::new();
    let bound = beta * ratio::int(cg.s as i64);
    let limit = match ratio::max_count_at_most(&bound) {
        Some(l) if l > 0 => l,
        _ => return out,
    };
    let g = &cg.graph;
    let d = cg.d;
    let mut pairs: Vec<(EdgeId, Color)> = (0..g.edge_count())
        .flat_map(|e| (1..=d as Color).map(move |c| (e, c)))
        .collect();
    pairs.shuffle(&mut rng_for(seed));

    let hoods = Neighborhoods::new(g, SPARSITY_RADIUS);
    let mut list_size = vec![0usize; g.edge_count()];
    let mut vertex_color = vec![0usize; g.vertex_count() * (d + 1)];
    let mut counts = NeighborhoodCounts::new(g.edge_count(), d);

    for (e, c) in pairs {
        let (u, v) = g.endpoints(e);
        let m = cg.h.color(e);
        let fits = list_size[e] < limit
            && vertex_color[u * (d + 1) + c as usize] < limit
            && vertex_color[v * (d + 1) + c as usize] < limit
            && hoods
                .of(e)
                .iter()
                .all(|&anchor| (counts.get(anchor, m, c) as usize) < limit);
        if !fits {
            continue;
        }
        out.insert(e, c);
        list_size[e] += 1;
        vertex_color[u * (d + 1) + c as usize] += 1;
        vertex_color[v * (d + 1) + c as usize] += 1;
        for &anchor in hoods.of(e) {
            counts.bump(anchor, m, c);
        }
    }
    out
}

/// Lists supported on a seeded greedy maximal distance-2 matching; each
/// supported edge gets a uniformly sized nonempty random subset of
/// `1..=d` with at most `max_list` colors.
pub fn generate_distance2(cg: &ColoredGraph, seed: u64, max_list: usize) -> Result<ListAssignment, ListError> {
    let limit = cg.s.saturating_sub(1);
    if max_list > limit {
        return Err(ListError::InvalidBound { max_list, limit });
    }
    let mut out = ListAssignment::new();
    if max_list == 0 {
        return Ok(out);
    }
    let g = &cg.graph;
    let mut rng = rng_for(seed);
    let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
    order.shuffle(&mut rng);
    let mut blocked = vec![false; g.edge_count()];
    let mut support = Vec::new();
    for e in order {
        if blocked[e] {
            continue;
        }
        support.push(e);
        for f in g.t_neighborhood(e, 1) {
            blocked[f] = true;
        }
    }
    support.sort_unstable();
    let palette: Vec<Color> = (1..=cg.d as Color).collect();
    for e in support {
        let size = rng.random_range(1..=max_list.min(cg.d));
        out.set(e, palette.choose_multiple(&mut rng, size).copied());
    }
    Ok(out)
}

/// Edges whose color under `f` is in their list.
pub fn conflict_edges(graph: &Graph, f: &EdgeColoring, lists: &ListAssignment) -> Vec<EdgeId> {
    lists
        .iter()
        .filter(|&(e, l)| e < graph.edge_count() && l.contains(&f.color(e)))
        .map(|(e, _)| e)
        .collect()
}
