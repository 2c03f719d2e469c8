//! The `dsgraph-v1` JSON instance format.
//!
//! Keys are written in sorted order and arrays in canonical order, so saving
//! the same instance twice yields identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructors::{ColoredGraph, ConstructionError, Family};
use crate::graph::{Color, EdgeColoring, FourCycle, Graph, GraphError};
use crate::lists::ListAssignment;

pub const FORMAT: &str = "dsgraph-v1";

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read or write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("instance has no coloring")]
    MissingColoring,
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

fn invariant(msg: impl Into<String>) -> InstanceError {
    InstanceError::Invariant(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed: Option<usize>,
    pub measured: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyBlock {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_s: Option<usize>,
    pub measured_s: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub n: usize,
    pub d: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<Vec<Color>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<SBlock>,
    /// Edge index (as a decimal string) to sorted forbidden colors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lists: Option<BTreeMap<String, Vec<Color>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<Color>>,
    /// Swapped cycles as `[u, v, z, t]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<[usize; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyBlock>,
}

impl InstanceFile {
    pub fn from_colored(cg: &ColoredGraph) -> Self {
        InstanceFile {
            format: FORMAT.to_string(),
            n: cg.n(),
            d: cg.d,
            edges: cg.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            coloring: Some(cg.h.colors().to_vec()),
            s: Some(SBlock {
                claimed: cg.claimed_s,
                measured: cg.s,
            }),
            lists: None,
            solution: None,
            plan: None,
            report: None,
            family: Some(FamilyBlock {
                name: cg.family.name.clone(),
                params: cg.family.params.clone(),
                claimed_s: cg.claimed_s,
                measured_s: cg.s,
            }),
        }
    }

    /// Checks every structural invariant; the error names the one violated.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.format != FORMAT {
            return Err(invariant(format!("format tag must be {FORMAT:?}, found {:?}", self.format)));
        }
        for (i, &[u, v]) in self.edges.iter().enumerate() {
            if u >= v {
                return Err(invariant(format!("edges must be canonical (u < v): edge {i} is [{u}, {v}]")));
            }
            if v >= self.n {
                return Err(invariant(format!("edge {i} has endpoint {v} >= n = {}", self.n)));
            }
        }
        if self.edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invariant("edges must be sorted and distinct"));
        }
        let m = self.edges.len();
        for (name, colors) in [("coloring", &self.coloring), ("solution", &self.solution)] {
            if let Some(colors) = colors {
                if colors.len() != m {
                    return Err(invariant(format!("{name} length {} != number of edges {m}", colors.len())));
                }
                if let Some((e, c)) = colors.iter().enumerate().find(|(_, &c)| c == 0 || c as usize > self.d) {
                    return Err(invariant(format!("{name} color {c} of edge {e} outside 1..={}", self.d)));
                }
            }
        }
        if let Some(lists) = &self.lists {
            for (key, colors) in lists {
                let e: usize = key
                    .parse()
                    .map_err(|_| invariant(format!("list key {key:?} is not an edge index")))?;
                if e >= m || key != &e.to_string() {
                    return Err(invariant(format!("list key {key:?} is not a valid edge index")));
                }
                if let Some(c) = colors.iter().find(|&&c| c == 0 || c as usize > self.d) {
                    return Err(invariant(format!("list of edge {e} contains color {c} outside 1..={}", self.d)));
                }
                if colors.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invariant(format!("list of edge {e} must be sorted without repeats")));
                }
            }
        }
        if let Some(plan) = &self.plan {
            if let Some(c) = plan.iter().flatten().find(|&&v| v >= self.n) {
                return Err(invariant(format!("plan vertex {c} >= n = {}", self.n)));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<Graph, InstanceError> {
        self.validate()?;
        Graph::new(self.n, self.edges.iter().map(|&[u, v]| (u, v))).map_err(|e| invariant(e.to_string()))
    }

    /// Rebuilds the colored graph and re-measures `s`.
    pub fn colored_graph(&self) -> Result<ColoredGraph, InstanceError> {
        let graph = self.graph()?;
        let colors = self.coloring.clone().ok_or(InstanceError::MissingColoring)?;
        let claimed = self.s.as_ref().and_then(|s| s.claimed);
        let family = match &self.family {
            Some(f) => Family {
                name: f.name.clone(),
                params: f.params.clone(),
            },
            None => Family::new("file"),
        };
        match ColoredGraph::new(graph, EdgeColoring::new(colors, self.d), claimed, family) {
            Ok(cg) => Ok(cg),
            Err(ConstructionError::NotRegular) => Err(invariant(format!("graph is not {}-regular", self.d))),
            Err(ConstructionError::NotProper) | Err(ConstructionError::Graph(GraphError::IncompleteColoring(_))) => {
                Err(invariant("coloring is not a proper d-edge coloring"))
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn list_assignment(&self) -> Result<ListAssignment, InstanceError> {
        self.validate()?;
        let mut l = ListAssignment::new();
        if let Some(lists) = &self.lists {
            for (key, colors) in lists {
                l.set(key.parse().expect("validated"), colors.iter().copied());
            }
        }
        Ok(l)
    }

    pub fn set_lists(&mut self, lists: &ListAssignment) {
        self.lists = Some(
            lists
                .iter()
                .map(|(e, colors)| (e.to_string(), colors.iter().copied().collect()))
                .collect(),
        );
    }

    pub fn solution_coloring(&self) -> Option<EdgeColoring> {
        self.solution.as_ref().map(|c| EdgeColoring::new(c.clone(), self.d))
    }

    pub fn set_plan(&mut self, cycles: &[FourCycle]) {
        self.plan = Some(cycles.iter().map(|c| c.vertices).collect());
    }

    pub fn to_json(&self) -> Result<String, InstanceError> {
        // Value objects are BTreeMap-backed, which sorts keys
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), InstanceError> {
        fs::write(path, self.to_json()?).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
