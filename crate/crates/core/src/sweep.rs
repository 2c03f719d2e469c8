//! Seeded experiment sweeps over families and sparsity levels.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::default_params;
use crate::constructors::{complete_bipartite_pow2, hypercube, remove_standard_matchings, ColoredGraph};
use crate::lists::generate_sparse;
use crate::ratio::{self, Rational};
use crate::solver::{solve_pipeline, LemmaParams, Phase, SearchStrategy};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("bad family spec {spec:?}: {reason}")]
    BadFamily { spec: String, reason: String },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Builds a graph from `hypercube:D`, `kdd:T` (complete bipartite of
/// order `2^T`) or `kdd-minus:T:K` (the same with `K` matchings removed).
pub fn family_from_spec(spec: &str) -> Result<ColoredGraph, SweepError> {
    let bad = |reason: &str| SweepError::BadFamily {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<u32, SweepError> {
        parts
            .get(i)
            .ok_or_else(|| bad("missing argument"))?
            .parse()
            .map_err(|_| bad("argument is not a non-negative integer"))
    };
    let built = match parts[0] {
        "hypercube" if parts.len() == 2 => hypercube(num(1)? as usize),
        "kdd" if parts.len() == 2 => complete_bipartite_pow2(num(1)?),
        "kdd-minus" if parts.len() == 3 => {
            let base = complete_bipartite_pow2(num(1)?).map_err(|e| bad(&e.to_string()))?;
            remove_standard_matchings(&base, num(2)? as usize, None)
        }
        _ => return Err(bad("expected hypercube:D, kdd:T or kdd-minus:T:K")),
    };
    built.map_err(|e| bad(&e.to_string()))
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub families: Vec<String>,
    pub betas: Vec<Rational>,
    /// Seeds `0..seeds`.
    pub seeds: u64,
    pub gamma: Option<Rational>,
    pub tau: Option<Rational>,
    pub epsilon: Option<Rational>,
    pub trials: usize,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub beta: String,
    pub gamma: String,
    pub tau: String,
    pub epsilon: String,
    pub seed: u64,
    pub phase1_success: bool,
    pub phase2_success: bool,
    pub verified: bool,
    pub trials_used: Option<usize>,
    /// Empty unless timing was requested, so that rows stay reproducible.
    pub wall_ms: Option<u128>,
}

fn params_for(cg: &ColoredGraph, cfg: &SweepConfig, beta: &Rational) -> Result<LemmaParams, SweepError> {
    let defaults = default_params(cg.d, cg.s).map_err(|e| SweepError::BadParams(e.to_string()))?;
    LemmaParams::new(
        cg.d,
        cg.s,
        beta.clone(),
        cfg.gamma.clone().unwrap_or(defaults.gamma),
        cfg.tau.clone().unwrap_or(defaults.tau),
        cfg.epsilon.clone().unwrap_or(defaults.epsilon),
    )
    .map_err(|e| SweepError::BadParams(e.to_string()))
}

fn run_one(spec: &str, cg: &ColoredGraph, p: &LemmaParams, seed: u64, cfg: &SweepConfig) -> SweepRow {
    let start = Instant::now();
    let lists = generate_sparse(cg, &p.beta, seed);
    let outcome = solve_pipeline(
        cg,
        &lists,
        p,
        SearchStrategy::Random {
            trials: cfg.trials,
            seed,
        },
    );
    let (phase1, phase2, verified, trials_used) = match &outcome {
        Ok(sol) => (true, true, true, Some(sol.permutation.trials)),
        Err(f) => (
            f.permutation.is_some(),
            f.phase == Phase::Verification,
            false,
            f.permutation.as_ref().map(|p| p.trials),
        ),
    };
    SweepRow {
        family: spec.to_string(),
        n: cg.n(),
        d: cg.d,
        s: cg.s,
        beta: ratio::format(&p.beta),
        gamma: ratio::format(&p.gamma),
        tau: ratio::format(&p.tau),
        epsilon: ratio::format(&p.epsilon),
        seed,
        phase1_success: phase1,
        phase2_success: phase2,
        verified,
        trials_used,
        wall_ms: cfg.timing.then(|| start.elapsed().as_millis()),
    }
}

/// One row per (family, β, seed), in that nesting order regardless of how
/// the rows were scheduled.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    let graphs = cfg
        .families
        .iter()
        .map(|f| family_from_spec(f))
        .collect::<Result<Vec<_>, _>>()?;
    let mut jobs = Vec::new();
    for (fi, cg) in graphs.iter().enumerate() {
        for (bi, beta) in cfg.betas.iter().enumerate() {
            let p = params_for(cg, cfg, beta)?;
            for seed in 0..cfg.seeds {
                jobs.push((fi, bi, seed, p.clone()));
            }
        }
    }
    let mut rows: Vec<((usize, usize, u64), SweepRow)> = jobs
        .into_par_iter()
        .map(|(fi, bi, seed, p)| ((fi, bi, seed), run_one(&cfg.families[fi], &graphs[fi], &p, seed, cfg)))
        .collect();
    rows.sort_by_key(|(k, _)| *k);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "family",
            "n",
            "d",
            "s",
            "beta",
            "gamma",
            "tau",
            "epsilon",
            "seed",
            "phase1_success",
            "phase2_success",
            "verified",
            "trials_used",
            "wall_ms",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `(β, verified, total)` per distinct β, in first-seen order.
pub fn success_by_beta(rows: &[SweepRow]) -> Vec<(String, usize, usize)> {
    let mut out: Vec<(String, usize, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(b, _, _)| *b == r.beta) {
            Some(entry) => {
                entry.1 += usize::from(r.verified);
                entry.2 += 1;
            }
            None => out.push((r.beta.clone(), usize::from(r.verified), 1)),
        }
    }
    out
}
