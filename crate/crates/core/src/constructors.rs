//! Families of (d,s)-edge colorable graphs together with their standard
//! colorings.
//!
//! Every constructor measures `s` with [`compute_s`] and stores the
//! measured value; the value the construction is supposed to achieve is
//! kept next to it as `claimed_s`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{compute_s, is_proper, Color, EdgeColoring, Graph, GraphError, Vertex};

/// Largest vertex count any constructor will build.
pub const MAX_VERTICES: usize = 1 << 16;
/// Largest group accepted as an explicit multiplication table.
pub const MAX_TABLE_ORDER: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("construction would need {needed} vertices (limit {limit})")]
    ResourceLimit { needed: u128, limit: usize },
    #[error("cannot remove {k} standard matchings from a {d}-regular graph")]
    InvalidK { k: usize, d: usize },
    #[error("Cayley spec violation: {0}")]
    SpecViolation(String),
    #[error("coloring is not proper")]
    NotProper,
    #[error("graph is not regular")]
    NotRegular,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Constructor name and parameters, kept for provenance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Family {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl Family {
    pub fn new(name: &str) -> Self {
        Family {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

/// A d-regular graph with a standard coloring `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    pub graph: Graph,
    pub h: EdgeColoring,
    pub d: usize,
    /// Measured: `1 +` the minimum 2-colored 4-cycle count over all edges.
    pub s: usize,
    /// The value of `s` the construction guarantees, if any.
    pub claimed_s: Option<usize>,
    pub family: Family,
}

impl ColoredGraph {
    /// Checks regularity and properness, then measures `s`.
    pub fn new(
        graph: Graph,
        h: EdgeColoring,
        claimed_s: Option<usize>,
        family: Family,
    ) -> Result<Self, ConstructionError> {
        let d = h.d();
        match graph.regular_degree() {
            Some(deg) if deg == d || graph.vertex_count() == 0 => {}
            _ => return Err(ConstructionError::NotRegular),
        }
        if !is_proper(&graph, &h)? {
            return Err(ConstructionError::NotProper);
        }
        let s = compute_s(&graph, &h);
        Ok(ColoredGraph {
            graph,
            h,
            d,
            s,
            claimed_s,
            family,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.vertex_count()
    }

    /// True when the construction claims more than was measured.
    pub fn discrepancy(&self) -> bool {
        self.claimed_s.is_some_and(|c| c > self.s)
    }
}

fn check_size(needed: u128) -> Result<usize, ConstructionError> {
    if needed > MAX_VERTICES as u128 {
        Err(ConstructionError::ResourceLimit {
            needed,
            limit: MAX_VERTICES,
        })
    } else {
        Ok(needed as usize)
    }
}

/// Q_d, colored by the index of the differing coordinate.
pub fn hypercube(d: usize) -> Result<ColoredGraph, ConstructionError> {
    if d == 0 {
        return Err(ConstructionError::SpecViolation("hypercube dimension must be >= 1".into()));
    }
    let n = check_size(if d >= 127 { u128::MAX } else { 1u128 << d })?;
    let mut triples = Vec::with_capacity(n * d / 2);
    for x in 0..n {
        for i in 0..d {
            let y = x ^ (1 << i);
            if x < y {
                triples.push((x, y, i as Color + 1));
            }
        }
    }
    let (graph, h) = Graph::with_colors(n, d, triples)?;
    ColoredGraph::new(graph, h, Some(d), Family::new("hypercube").with("d", d))
}

/// K_{d,d} with d = 2^t; `u_i = i`, `v_j = d + j`, `h(u_i v_j) = (i xor j) + 1`.
pub fn complete_bipartite_pow2(t: u32) -> Result<ColoredGraph, ConstructionError> {
    let d = if t >= 64 { u128::MAX } else { 1u128 << t };
    let n = check_size(d.saturating_mul(2))?;
    let d = n / 2;
    let triples = (0..d).flat_map(|i| (0..d).map(move |j| (i, d + j, (i ^ j) as Color + 1)));
    let (graph, h) = Graph::with_colors(n, d, triples)?;
    ColoredGraph::new(
        graph,
        h,
        Some(d),
        Family::new("complete_bipartite_pow2").with("t", t),
    )
}

/// Deletes `k` color classes. By default the `k` largest colors go; an
/// explicit list overrides that. Surviving colors are relabeled to
/// `1..=d-k` preserving order.
pub fn remove_standard_matchings(
    cg: &ColoredGraph,
    k: usize,
    colors: Option<&[Color]>,
) -> Result<ColoredGraph, ConstructionError> {
    let d = cg.d;
    if k >= d {
        return Err(ConstructionError::InvalidK { k, d });
    }
    let removed: BTreeSet<Color> = match colors {
        Some(list) => {
            let set: BTreeSet<Color> = list.iter().copied().collect();
            if set.len() != k || set.iter().any(|&c| c == 0 || c as usize > d) {
                return Err(ConstructionError::InvalidK { k, d });
            }
            set
        }
        None => ((d - k + 1) as Color..=d as Color).collect(),
    };
    let relabel: HashMap<Color, Color> = (1..=d as Color)
        .filter(|c| !removed.contains(c))
        .zip(1..)
        .collect();
    let triples = cg
        .graph
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(e, &(u, v))| relabel.get(&cg.h.color(e)).map(|&c| (u, v, c)));
    let (graph, h) = Graph::with_colors(cg.n(), d - k, triples)?;
    // the d-k guarantee only applies to the xor-colored complete bipartite graph
    let claimed = (cg.family.name == "complete_bipartite_pow2").then_some(d - k);
    let mut family = Family::new("remove_standard_matchings")
        .with("k", k)
        .with("source", &cg.family.name)
        .with(
            "removed",
            removed.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
        );
    for (key, value) in &cg.family.params {
        family.params.insert(format!("source.{key}"), value.clone());
    }
    ColoredGraph::new(graph, h, claimed, family)
}

/// `G1 □ G2`; vertex `(a, b)` is `a * n2 + b`. Copies of G1 edges keep
/// their colors, G2 colors are shifted to `d1+1..=d1+d2`.
pub fn cartesian_product(cg1: &ColoredGraph, cg2: &ColoredGraph) -> Result<ColoredGraph, ConstructionError> {
    let (n1, n2) = (cg1.n(), cg2.n());
    let n = check_size(n1 as u128 * n2 as u128)?;
    let d1 = cg1.d;
    let mut triples = Vec::new();
    for a in 0..n1 {
        for (e, &(x, y)) in cg2.graph.edges().iter().enumerate() {
            triples.push((a * n2 + x, a * n2 + y, cg2.h.color(e) + d1 as Color));
        }
    }
    for b in 0..n2 {
        for (e, &(x, y)) in cg1.graph.edges().iter().enumerate() {
            triples.push((x * n2 + b, y * n2 + b, cg1.h.color(e)));
        }
    }
    let (graph, h) = Graph::with_colors(n, d1 + cg2.d, triples)?;
    let claimed = (d1 + cg2.s).min(cg2.d + cg1.s);
    let family = Family::new("cartesian_product")
        .with("left", &cg1.family.name)
        .with("right", &cg2.family.name);
    ColoredGraph::new(graph, h, Some(claimed), family)
}

/// A finite group on elements `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    /// `Z_{o_1} x ... x Z_{o_k}`. Element index is mixed radix with the first
    /// coordinate least significant.
    CyclicProduct(Vec<u32>),
    Table(TableGroup),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl TableGroup {
    /// Validates closure, identity, inverses and associativity.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, ConstructionError> {
        let n = table.len();
        let bad = |m: &str| ConstructionError::SpecViolation(format!("multiplication table: {m}"));
        if n == 0 || n > MAX_TABLE_ORDER {
            return Err(bad("order must be in 1..=256"));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(bad("not a closed n x n table"));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| bad("no identity element"))?;
        let mut inverses = Vec::with_capacity(n);
        for x in 0..n {
            let inv = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| bad("element without inverse"))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(bad("not associative"));
                    }
                }
            }
        }
        Ok(TableGroup {
            table,
            identity,
            inverses,
        })
    }
}

impl Group {
    pub fn order(&self) -> usize {
        match self {
            Group::CyclicProduct(orders) => orders.iter().map(|&o| o as usize).product(),
            Group::Table(t) => t.table.len(),
        }
    }

    pub fn identity(&self) -> usize {
        match self {
            Group::CyclicProduct(_) => 0,
            Group::Table(t) => t.identity,
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match self {
            Group::CyclicProduct(orders) => {
                let (xa, xb) = (self.coords(a), self.coords(b));
                let sum: Vec<u32> = xa
                    .iter()
                    .zip(&xb)
                    .zip(orders)
                    .map(|((x, y), o)| (x + y) % o)
                    .collect();
                self.element(&sum)
            }
            Group::Table(t) => t.table[a][b],
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match self {
            Group::CyclicProduct(orders) => {
                let neg: Vec<u32> = self
                    .coords(a)
                    .iter()
                    .zip(orders)
                    .map(|(x, o)| (o - x) % o)
                    .collect();
                self.element(&neg)
            }
            Group::Table(t) => t.inverses[a],
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            Group::CyclicProduct(_) => true,
            Group::Table(t) => {
                let n = t.table.len();
                (0..n).all(|a| (0..n).all(|b| t.table[a][b] == t.table[b][a]))
            }
        }
    }

    pub fn element_order(&self, a: usize) -> usize {
        let id = self.identity();
        let mut x = a;
        let mut k = 1;
        while x != id {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Coordinates of an element of a cyclic product (empty for table groups).
    pub fn coords(&self, mut a: usize) -> Vec<u32> {
        match self {
            Group::CyclicProduct(orders) => orders
                .iter()
                .map(|&o| {
                    let x = (a % o as usize) as u32;
                    a /= o as usize;
                    x
                })
                .collect(),
            Group::Table(_) => Vec::new(),
        }
    }

    /// Index of the cyclic-product element with the given coordinates
    /// (taken modulo each factor).
    pub fn element(&self, coords: &[u32]) -> usize {
        match self {
            Group::CyclicProduct(orders) => {
                let mut idx = 0usize;
                for (x, &o) in coords.iter().zip(orders).rev() {
                    idx = idx * o as usize + (*x % o) as usize;
                }
                idx
            }
            Group::Table(_) => coords.first().copied().unwrap_or(0) as usize,
        }
    }
}

/// Group, generators and the distinguished generator subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleySpec {
    pub group: Group,
    /// `S`; for [`cayley_abelian`] it may be left empty and is derived from
    /// `half_generators`.
    pub generators: Vec<usize>,
    /// `S_c ⊆ S`: elements commuting with all of `S`.
    pub commuting: Vec<usize>,
    /// `S_k`, with `S_k ∪ S_k⁻¹ = S`.
    pub half_generators: Vec<usize>,
}

fn violation(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::SpecViolation(msg.into())
}

fn check_group_size(group: &Group) -> Result<usize, ConstructionError> {
    let n = match group {
        Group::CyclicProduct(orders) => {
            if orders.is_empty() || orders.contains(&0) {
                return Err(violation("cyclic factor orders must be positive"));
            }
            orders.iter().map(|&o| o as u128).try_fold(1u128, |acc, o| acc.checked_mul(o)).unwrap_or(u128::MAX)
        }
        Group::Table(t) => t.table.len() as u128,
    };
    check_size(n)
}

/// Cayley graph over involutions; edge `{u, u·a}` gets the color of `a`
/// (its position in `S`, 1-based). Claims `s = max(1, |S_c|)`.
pub fn cayley_involutions(spec: &CayleySpec) -> Result<ColoredGraph, ConstructionError> {
    let g = &spec.group;
    let n = check_group_size(g)?;
    let s_set = &spec.generators;
    let unique: BTreeSet<usize> = s_set.iter().copied().collect();
    if unique.len() != s_set.len() {
        return Err(violation("S contains a repeated element"));
    }
    if s_set.iter().any(|&a| a >= n) || spec.commuting.iter().any(|&a| a >= n) {
        return Err(violation("element index out of range"));
    }
    if unique.contains(&g.identity()) {
        return Err(violation("identity element in S"));
    }
    if let Some(&a) = s_set.iter().find(|&&a| g.inv(a) != a) {
        return Err(violation(format!("element {a} of S is not an involution (a != a^-1)")));
    }
    let commuting: BTreeSet<usize> = spec.commuting.iter().copied().collect();
    if commuting.len() != spec.commuting.len() || !commuting.is_subset(&unique) {
        return Err(violation("S_c must be a subset of S without repeats"));
    }
    for &c in &commuting {
        if let Some(&a) = s_set.iter().find(|&&a| g.mul(a, c) != g.mul(c, a)) {
            return Err(violation(format!("element {c} of S_c does not commute with {a}")));
        }
    }
    let d = s_set.len();
    let mut triples = Vec::with_capacity(n * d / 2);
    for u in 0..n {
        for (i, &a) in s_set.iter().enumerate() {
            let v = g.mul(u, a);
            if u < v {
                triples.push((u, v, i as Color + 1));
            }
        }
    }
    let (graph, h) = Graph::with_colors(n, d, triples)?;
    let family = Family::new("cayley_involutions")
        .with("order", n)
        .with("generators", join(s_set))
        .with("commuting", join(&spec.commuting));
    ColoredGraph::new(graph, h, Some(commuting.len().max(1)), family)
}

/// Cayley graph on an abelian cyclic product over `S = S_k ∪ S_k⁻¹`, with
/// edge `{u, u·s_i}` colored `s_i` when the power of `s_i` in `u` is even and
/// `s_i⁻¹` when odd. Color tokens map to integers in generator order
/// (`s_1, s_1⁻¹, s_2, ...`, an involution getting a single token). Claims `s = d`.
pub fn cayley_abelian(spec: &CayleySpec) -> Result<ColoredGraph, ConstructionError> {
    let g = &spec.group;
    if !matches!(g, Group::CyclicProduct(_)) {
        return Err(violation("cayley_abelian needs a product of cyclic groups"));
    }
    let n = check_group_size(g)?;
    let half = &spec.half_generators;
    if half.is_empty() {
        return Err(violation("S_k is empty"));
    }
    if half.iter().any(|&a| a >= n) {
        return Err(violation("element index out of range"));
    }
    if half.contains(&g.identity()) {
        return Err(violation("identity element in S_k"));
    }
    for (i, &a) in half.iter().enumerate() {
        for &b in &half[i + 1..] {
            if a == b || g.inv(a) == b {
                return Err(violation(format!("S_k holds {a} and {b} with one the other's inverse or equal")));
            }
        }
    }
    let orders: Vec<usize> = half.iter().map(|&a| g.element_order(a)).collect();
    if let Some(i) = orders.iter().position(|o| o % 2 != 0) {
        return Err(violation(format!("s_{} has odd order {}", i + 1, orders[i])));
    }
    // unique factorization g = s_1^x_1 ... s_k^x_k
    let total: u128 = orders.iter().map(|&o| o as u128).product();
    if total != n as u128 {
        return Err(violation("powers of S_k do not factor the group uniquely"));
    }
    let mut powers = vec![usize::MAX; n * half.len()];
    let mut seen = vec![false; n];
    let mut exps = vec![0usize; half.len()];
    loop {
        let mut x = g.identity();
        for (&a, &k) in half.iter().zip(&exps) {
            for _ in 0..k {
                x = g.mul(x, a);
            }
        }
        if seen[x] {
            return Err(violation("powers of S_k do not factor the group uniquely"));
        }
        seen[x] = true;
        powers[x * half.len()..(x + 1) * half.len()].copy_from_slice(&exps);
        let mut i = 0;
        while i < exps.len() {
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
        if i == exps.len() {
            break;
        }
    }

    // tokens: (generator, odd) -> color
    let mut tokens = Vec::with_capacity(half.len());
    let mut next: Color = 1;
    let mut full_set = Vec::new();
    for (i, &a) in half.iter().enumerate() {
        let even = next;
        let odd = if orders[i] == 2 { even } else { even + 1 };
        next = odd + 1;
        tokens.push((even, odd));
        full_set.push(a);
        if orders[i] != 2 {
            full_set.push(g.inv(a));
        }
    }
    let d = (next - 1) as usize;
    if !spec.generators.is_empty() {
        let given: BTreeSet<usize> = spec.generators.iter().copied().collect();
        let derived: BTreeSet<usize> = full_set.iter().copied().collect();
        if given != derived || given.len() != spec.generators.len() {
            return Err(violation("S differs from S_k ∪ S_k^-1"));
        }
    }

    let mut triples = Vec::with_capacity(n * d / 2);
    for u in 0..n {
        for (i, &a) in half.iter().enumerate() {
            let v = g.mul(u, a);
            let x = powers[u * half.len() + i];
            let c = if x % 2 == 0 { tokens[i].0 } else { tokens[i].1 };
            if orders[i] == 2 && v < u {
                // involution edges are reached from both ends
                continue;
            }
            triples.push((u, v, c));
        }
    }
    let (graph, h) = Graph::with_colors(n, d, triples)?;
    let family = Family::new("cayley_abelian")
        .with("orders", match g {
            Group::CyclicProduct(o) => o.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            Group::Table(_) => String::new(),
        })
        .with("half_generators", join(half));
    ColoredGraph::new(graph, h, Some(d), family)
}

fn join(items: &[usize]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Checks that two colored graphs are identical up to the vertex map `phi`
/// and color map `psi` (both as lookup tables).
pub fn is_isomorphic_under(
    a: &ColoredGraph,
    b: &ColoredGraph,
    phi: &[Vertex],
    psi: &[Color],
) -> bool {
    if a.n() != b.n() || a.graph.edge_count() != b.graph.edge_count() {
        return false;
    }
    a.graph.edges().iter().enumerate().all(|(e, &(u, v))| {
        b.graph
            .edge_between(phi[u], phi[v])
            .is_some_and(|f| b.h.color(f) == psi[a.h.color(e) as usize])
    })
}
