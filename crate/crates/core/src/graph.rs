//! Simple undirected graphs with canonical edge indexing, proper edge
//! colorings and the 2-colored 4-cycle machinery built on top of them.
//!
//! Edges are stored as `(u, v)` pairs with `u < v`, sorted
//! lexicographically; an edge's index into that list is its identity
//! everywhere else in the crate.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

pub type Vertex = usize;
pub type EdgeId = usize;
/// Colors are `1..=d`; `0` marks an uncolored edge.
pub type Color = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge index {edge} out of range ({count} edges)")]
    EdgeOutOfRange { edge: EdgeId, count: usize },
    #[error("no path between edges {0} and {1}")]
    Unreachable(EdgeId, EdgeId),
    #[error("coloring is incomplete (edge {0} uncolored or missing)")]
    IncompleteColoring(EdgeId),
    #[error("edge {edge} has color {color} outside 1..={d}")]
    ColorOutOfRange { edge: EdgeId, color: Color, d: usize },
    #[error("cycle is not 2-colored under the given coloring")]
    NotTwoColored,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    // (neighbor, edge) sorted by neighbor
    adjacency: Vec<Vec<(Vertex, EdgeId)>>,
}

impl Graph {
    /// Builds a simple graph. Pairs may be given in any orientation and
    /// order; they are canonicalized.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut list = Vec::new();
        for (a, b) in edges {
            for x in [a, b] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (id, &(u, v)) in list.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: list,
            adjacency,
        })
    }

    /// Builds a graph together with a coloring given per edge.
    pub fn with_colors<I>(n: usize, d: usize, colored: I) -> Result<(Self, EdgeColoring), GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex, Color)>,
    {
        let mut triples: Vec<(Vertex, Vertex, Color)> = colored
            .into_iter()
            .map(|(a, b, c)| (a.min(b), a.max(b), c))
            .collect();
        triples.sort_unstable();
        let graph = Graph::new(n, triples.iter().map(|&(u, v, _)| (u, v)))?;
        let coloring = EdgeColoring::new(triples.iter().map(|t| t.2).collect(), d);
        coloring.check_range()?;
        Ok((graph, coloring))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    /// Incident `(neighbor, edge)` pairs of `v`, sorted by neighbor.
    pub fn incident(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let adj = self.adjacency.get(u)?;
        adj.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| adj[i].1)
    }

    /// The common degree if the graph is regular (an empty vertex set counts as 0-regular).
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency.first().map_or(0, Vec::len);
        self.adjacency.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn check_edge(&self, e: EdgeId) -> Result<(), GraphError> {
        if e < self.edges.len() {
            Ok(())
        } else {
            Err(GraphError::EdgeOutOfRange {
                edge: e,
                count: self.edges.len(),
            })
        }
    }

    /// Vertex distances from the endpoints of `e`, truncated at `limit`.
    /// Unreached vertices get `usize::MAX`.
    fn distances_from_edge(&self, e: EdgeId, limit: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        let (u, v) = self.edges[e];
        for x in [u, v] {
            dist[x] = 0;
            queue.push_back(x);
        }
        while let Some(x) = queue.pop_front() {
            let dx = dist[x];
            if dx >= limit {
                continue;
            }
            for &(y, _) in &self.adjacency[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Number of edges on a shortest path between an endpoint of `e` and an
    /// endpoint of `f`. Adjacent or identical edges are at distance 0.
    pub fn edge_distance(&self, e: EdgeId, f: EdgeId) -> Result<usize, GraphError> {
        self.check_edge(e)?;
        self.check_edge(f)?;
        let dist = self.distances_from_edge(e, usize::MAX);
        let (a, b) = self.edges[f];
        match dist[a].min(dist[b]) {
            usize::MAX => Err(GraphError::Unreachable(e, f)),
            d => Ok(d),
        }
    }

    /// Edges at distance at most `t` from `e` (including `e`), sorted.
    pub fn t_neighborhood(&self, e: EdgeId, t: usize) -> Vec<EdgeId> {
        let dist = self.distances_from_edge(e, t);
        let mut out: Vec<EdgeId> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| dist[a] <= t || dist[b] <= t)
            .map(|(id, _)| id)
            .collect();
        out.sort_unstable();
        out
    }

    /// Pairwise edge distance at least `t`. Unreachable pairs count as far apart.
    pub fn is_distance_t_matching(&self, edges: &[EdgeId], t: usize) -> bool {
        if t == 0 {
            return true;
        }
        for (i, &e) in edges.iter().enumerate() {
            let near = self.t_neighborhood(e, t - 1);
            if edges[i + 1..]
                .iter()
                .any(|f| *f == e || near.binary_search(f).is_ok())
            {
                return false;
            }
        }
        true
    }
}

/// Precomputed `t`-neighborhoods of every edge.
#[derive(Debug, Clone)]
pub struct Neighborhoods {
    radius: usize,
    sets: Vec<Vec<EdgeId>>,
}

impl Neighborhoods {
    pub fn new(graph: &Graph, radius: usize) -> Self {
        let sets = (0..graph.edge_count())
            .map(|e| graph.t_neighborhood(e, radius))
            .collect();
        Neighborhoods { radius, sets }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn of(&self, e: EdgeId) -> &[EdgeId] {
        &self.sets[e]
    }

    pub fn contains(&self, anchor: EdgeId, f: EdgeId) -> bool {
        self.sets[anchor].binary_search(&f).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeColoring {
    colors: Vec<Color>,
    d: usize,
}

impl EdgeColoring {
    pub fn new(colors: Vec<Color>, d: usize) -> Self {
        EdgeColoring { colors, d }
    }

    pub fn color(&self, e: EdgeId) -> Color {
        self.colors[e]
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub(crate) fn set(&mut self, e: EdgeId, c: Color) {
        self.colors[e] = c;
    }

    fn check_range(&self) -> Result<(), GraphError> {
        for (e, &c) in self.colors.iter().enumerate() {
            if c == 0 {
                return Err(GraphError::IncompleteColoring(e));
            }
            if c as usize > self.d {
                return Err(GraphError::ColorOutOfRange {
                    edge: e,
                    color: c,
                    d: self.d,
                });
            }
        }
        Ok(())
    }

    pub fn vertex_color_set(&self, graph: &Graph, u: Vertex) -> VertexColorSet {
        VertexColorSet {
            vertex: u,
            colors: graph
                .incident(u)
                .iter()
                .map(|&(_, e)| self.colors[e])
                .collect(),
        }
    }
}

/// The set of colors seen at one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexColorSet {
    pub vertex: Vertex,
    pub colors: BTreeSet<Color>,
}

/// True iff no two incident edges share a color.
pub fn is_proper(graph: &Graph, f: &EdgeColoring) -> Result<bool, GraphError> {
    if f.len() != graph.edge_count() {
        return Err(GraphError::IncompleteColoring(f.len().min(graph.edge_count())));
    }
    f.check_range()?;
    let mut seen = vec![false; f.d() + 1];
    for v in 0..graph.vertex_count() {
        for &(_, e) in graph.incident(v) {
            let c = f.color(e) as usize;
            if seen[c] {
                return Ok(false);
            }
            seen[c] = true;
        }
        for &(_, e) in graph.incident(v) {
            seen[f.color(e) as usize] = false;
        }
    }
    Ok(true)
}

/// A 4-cycle `u-v-z-t-u` whose edges alternate between `color_a` (on
/// `uv`, `zt`) and `color_b` (on `vz`, `tu`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourCycle {
    /// `[u, v, z, t]`
    pub vertices: [Vertex; 4],
    /// `[uv, vz, zt, tu]`
    pub edges: [EdgeId; 4],
    pub color_a: Color,
    pub color_b: Color,
}

impl FourCycle {
    /// The edge opposite to the anchor `uv`.
    pub fn partner(&self) -> EdgeId {
        self.edges[2]
    }

    /// Color each cycle edge takes after the two colors are interchanged.
    pub fn swapped_color(&self, slot: usize) -> Color {
        if slot.is_multiple_of(2) {
            self.color_b
        } else {
            self.color_a
        }
    }

    /// The same cycle as it reads after its swap (colors interchanged).
    pub fn swapped(&self) -> FourCycle {
        FourCycle {
            color_a: self.color_b,
            color_b: self.color_a,
            ..*self
        }
    }

    pub fn is_two_colored_under(&self, f: &EdgeColoring) -> bool {
        self.color_a != self.color_b
            && f.color(self.edges[0]) == self.color_a
            && f.color(self.edges[2]) == self.color_a
            && f.color(self.edges[1]) == self.color_b
            && f.color(self.edges[3]) == self.color_b
    }

    pub fn shares_edge_with(&self, other: &FourCycle) -> bool {
        self.edges.iter().any(|e| other.edges.contains(e))
    }

    pub fn shares_vertex_with(&self, other: &FourCycle) -> bool {
        self.vertices.iter().any(|x| other.vertices.contains(x))
    }
}

/// Lookup table from (vertex, color) to the incident edge of that color.
/// Built from a proper coloring.
#[derive(Debug, Clone)]
pub struct ColorIndex {
    d: usize,
    // slot v*(d+1)+c -> (neighbor, edge)
    table: Vec<Option<(Vertex, EdgeId)>>,
}

impl ColorIndex {
    pub fn new(graph: &Graph, f: &EdgeColoring) -> Self {
        let d = f.d();
        let mut table = vec![None; graph.vertex_count() * (d + 1)];
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            let c = f.color(e) as usize;
            table[u * (d + 1) + c] = Some((v, e));
            table[v * (d + 1) + c] = Some((u, e));
        }
        ColorIndex { d, table }
    }

    pub fn edge_at(&self, v: Vertex, c: Color) -> Option<(Vertex, EdgeId)> {
        self.table[v * (self.d + 1) + c as usize]
    }

    /// All 2-colored 4-cycles through `e`, one per second color, in
    /// increasing order of that color.
    pub fn cycles_through(&self, graph: &Graph, f: &EdgeColoring, e: EdgeId) -> Vec<FourCycle> {
        let (u, v) = graph.endpoints(e);
        let a = f.color(e);
        let mut out = Vec::new();
        for b in 1..=self.d as Color {
            if b == a {
                continue;
            }
            let (Some((z, vz)), Some((t, tu))) = (self.edge_at(v, b), self.edge_at(u, b)) else {
                continue;
            };
            match self.edge_at(z, a) {
                Some((w, zt)) if w == t => out.push(FourCycle {
                    vertices: [u, v, z, t],
                    edges: [e, vz, zt, tu],
                    color_a: a,
                    color_b: b,
                }),
                _ => {}
            }
        }
        out
    }
}

/// Every 2-colored 4-cycle containing `e` under the proper coloring `f`.
pub fn two_colored_cycles_through(graph: &Graph, f: &EdgeColoring, e: EdgeId) -> Vec<FourCycle> {
    ColorIndex::new(graph, f).cycles_through(graph, f, e)
}

/// `1 +` the minimum number of 2-colored 4-cycles through any edge.
pub fn compute_s(graph: &Graph, f: &EdgeColoring) -> usize {
    let index = ColorIndex::new(graph, f);
    (0..graph.edge_count())
        .map(|e| index.cycles_through(graph, f, e).len())
        .min()
        .map_or(1, |m| m + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub edges: Vec<EdgeId>,
    pub color: Option<Color>,
}

impl Matching {
    pub fn is_matching(&self, graph: &Graph) -> bool {
        graph.is_distance_t_matching(&self.edges, 1)
    }
}

/// The color classes of `h`, one per color `1..=d`.
pub fn standard_matchings(graph: &Graph, h: &EdgeColoring) -> Vec<Matching> {
    let mut classes = vec![Vec::new(); h.d()];
    for e in 0..graph.edge_count() {
        classes[h.color(e) as usize - 1].push(e);
    }
    classes
        .into_iter()
        .enumerate()
        .map(|(i, edges)| Matching {
            edges,
            color: Some(i as Color + 1),
        })
        .collect()
}

/// Interchanges the two colors along `c`.
pub fn swap_cycle(f: &EdgeColoring, c: &FourCycle) -> Result<EdgeColoring, GraphError> {
    swap_cycles(f, std::slice::from_ref(c))
}

/// Swaps every cycle simultaneously. The cycles must be pairwise
/// edge-disjoint and 2-colored under `f`.
pub fn swap_cycles(f: &EdgeColoring, cycles: &[FourCycle]) -> Result<EdgeColoring, GraphError> {
    let mut out = f.clone();
    for c in cycles {
        if !c.is_two_colored_under(f) {
            return Err(GraphError::NotTwoColored);
        }
        for (slot, &e) in c.edges.iter().enumerate() {
            out.set(e, c.swapped_color(slot));
        }
    }
    Ok(out)
}
