//! Bound tables over instance families.
//!
//! Each row holds, for one instance, the lower bounds, the numerical optimum,
//! the upper bounds and the relaxation time of a standard chain:
//!
//! | column          | meaning                                                        |
//! |-----------------|----------------------------------------------------------------|
//! | `family`        | family name                                                    |
//! | `params`        | `key=value` pairs joined by `;`                                |
//! | `n_states`      | states of the chain                                            |
//! | `lb_embed`      | analytic embedding bound                                       |
//! | `lb_expansion`  | vertex-expansion bound (recursive-majority bound on `b=3` trees too big to enumerate) |
//! | `tau2_solver`   | relaxation time found by the subgradient solver                |
//! | `ub_congestion` | congestion of the equalized chain under shortest paths         |
//! | `ub_cheeger`    | Cheeger-type bound through the max-degree chain                |
//! | `tau2_standard` | max-degree chain; uniform-rate Glauber dynamics for spin trees |
//!
//! Cells are empty where a quantity is not applicable or too expensive.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::max_degree_chain;
use crate::error::{Error, Result};
use crate::families::{generate, Family, Generated};
use crate::glauber::{build_glauber_chain, configuration_graph, RateVector, SpinSystem};
use crate::graph::TransitionGraph;
use crate::lower::{
    cycle_embedding, embedding_bound, expansion_lower_bound, geometric_embedding, knkn_embedding,
    torus_embedding, Embedding, EXHAUSTIVE_LIMIT,
};
use crate::solver::{solve_fastest_mixing, SolverConfig};
use crate::spectral::{spectrum, DENSE_SPECTRUM_LIMIT};
use crate::tree::{bv_bounds, majority_cut_bound, optimal_rates, TreeSpec};
use crate::upper::{cheeger_upper_bound, equalize_congestion, shortest_path_system};

/// Relative slack of the sandwich check.
pub const SANDWICH_TOL: f64 = 1e-6;

/// Largest instance handed to the solver.
pub const SOLVER_STATE_LIMIT: usize = 200;

/// Largest instance for which all-pairs canonical paths are built.
pub const PATHS_STATE_LIMIT: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub instances: Vec<Family>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Skip the solver column.
    #[serde(default)]
    pub skip_solver: bool,
}

impl ExperimentSpec {
    pub fn new(instances: Vec<Family>) -> Self {
        Self {
            instances,
            solver: SolverConfig::default(),
            skip_solver: false,
        }
    }

    pub fn knkn_sweep(ns: impl IntoIterator<Item = usize>) -> Self {
        Self::new(ns.into_iter().map(|n| Family::Knkn { n }).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub family: String,
    pub params: String,
    pub n_states: usize,
    pub lb_embed: Option<f64>,
    pub lb_expansion: Option<f64>,
    pub tau2_solver: Option<f64>,
    pub ub_congestion: Option<f64>,
    pub ub_cheeger: Option<f64>,
    pub tau2_standard: Option<f64>,
}

impl ExperimentRow {
    fn lower(&self) -> impl Iterator<Item = (&'static str, f64)> {
        [("lb_embed", self.lb_embed), ("lb_expansion", self.lb_expansion)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
    }

    fn upper(&self) -> impl Iterator<Item = (&'static str, f64)> {
        [
            ("ub_congestion", self.ub_congestion),
            ("ub_cheeger", self.ub_cheeger),
            ("tau2_standard", self.tau2_standard),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
    }

    /// Every lower bound below the solver value, the solver value below every
    /// upper bound, and every lower bound below every upper bound.
    pub fn sandwich_check(&self) -> Result<()> {
        let le = |a: f64, b: f64| a <= b + SANDWICH_TOL * b.abs().max(1.0);
        let label = format!("{}({})", self.family, self.params);
        for (lk, lv) in self.lower() {
            if let Some(t) = self.tau2_solver {
                if !le(lv, t) {
                    return Err(Error::BoundInversion(format!(
                        "{label}: {lk} = {lv} > tau2_solver = {t}"
                    )));
                }
            }
            for (uk, uv) in self.upper() {
                if !le(lv, uv) {
                    return Err(Error::BoundInversion(format!(
                        "{label}: {lk} = {lv} > {uk} = {uv}"
                    )));
                }
            }
        }
        if let Some(t) = self.tau2_solver {
            for (uk, uv) in self.upper() {
                if !le(t, uv) {
                    return Err(Error::BoundInversion(format!(
                        "{label}: tau2_solver = {t} > {uk} = {uv}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }
}

fn analytic_embedding(family: &Family) -> Result<Option<Embedding>> {
    Ok(match *family {
        Family::Knkn { n } => Some(knkn_embedding(n)?),
        Family::Cycle { n } => Some(cycle_embedding(n)?),
        Family::Torus { m, d } => Some(torus_embedding(m, d)?),
        Family::Geometric { m, k, d } => Some(geometric_embedding(m, k, d)?),
        Family::IsingTree { .. } | Family::Custom { .. } => None,
    })
}

/// Bound columns shared by plain graphs and configuration graphs.
fn graph_columns(
    graph: &TransitionGraph,
    spec: &ExperimentSpec,
    row: &mut ExperimentRow,
) -> Result<()> {
    let n = graph.node_count();
    if n >= 2 && n <= EXHAUSTIVE_LIMIT {
        row.lb_expansion = Some(expansion_lower_bound(graph)?.bound);
        row.ub_cheeger = Some(cheeger_upper_bound(graph)?.bound);
    }
    if !spec.skip_solver && n <= SOLVER_STATE_LIMIT {
        row.tau2_solver = Some(solve_fastest_mixing(graph, &spec.solver)?.tau2_star);
    }
    if n <= PATHS_STATE_LIMIT {
        row.ub_congestion = Some(equalize_congestion(graph, &shortest_path_system(graph))?.rho_bar);
    }
    Ok(())
}

fn spin_row(sys: &SpinSystem, tree: &TreeSpec, beta: f64, spec: &ExperimentSpec, row: &mut ExperimentRow) -> Result<()> {
    let label = format!("{}({})", row.family, row.params);
    let states = sys.state_count()?;
    row.n_states = states;
    if states <= DENSE_SPECTRUM_LIMIT {
        let tau_u = spectrum(&build_glauber_chain(sys, &RateVector::uniform(sys.site_count()))?)?
            .relaxation_time;
        row.tau2_standard = Some(tau_u);
        let (rates, claimed) = optimal_rates(tree, beta)?;
        let tau_rates = spectrum(&build_glauber_chain(sys, &rates)?)?.relaxation_time;
        let max_b = bv_bounds(tree, beta)?.max();
        if tau_u > max_b * (1.0 + SANDWICH_TOL) || tau_rates > claimed * (1.0 + SANDWICH_TOL) {
            return Err(Error::BoundInversion(format!(
                "{label}: tau2(P_U) = {tau_u} vs max B_v = {max_b}, \
                 tau2(P_rates) = {tau_rates} vs sum B_v / |V| = {claimed}"
            )));
        }
    }
    if states <= PATHS_STATE_LIMIT {
        let graph = configuration_graph(sys)?;
        graph_columns(&graph, spec, row)?;
    }
    if row.lb_expansion.is_none() && tree.b == 3 {
        let m = majority_cut_bound(tree, beta)?;
        if !m.vacuous {
            row.lb_expansion = Some(m.tau2_star_lower);
        }
    }
    Ok(())
}

fn run_instance(family: &Family, spec: &ExperimentSpec) -> Result<ExperimentRow> {
    let mut row = ExperimentRow {
        family: family.name().to_string(),
        params: family.params(),
        n_states: 0,
        lb_embed: None,
        lb_expansion: None,
        tau2_solver: None,
        ub_congestion: None,
        ub_cheeger: None,
        tau2_standard: None,
    };
    match generate(family)? {
        Generated::Graph(graph) => {
            row.n_states = graph.node_count();
            if let Some(e) = analytic_embedding(family)? {
                row.lb_embed = Some(embedding_bound(&graph, &e)?);
            }
            if graph.node_count() <= DENSE_SPECTRUM_LIMIT {
                row.tau2_standard = Some(spectrum(&max_degree_chain(&graph))?.relaxation_time);
            }
            graph_columns(&graph, spec, &mut row)?;
        }
        Generated::Spins(sys) => {
            let Family::IsingTree { b, r, beta } = *family else {
                unreachable!("only trees generate spin systems")
            };
            spin_row(&sys, &TreeSpec::new(b, r)?, beta, spec, &mut row)?;
        }
    }
    Ok(row)
}

/// Runs every instance (in parallel), then sandwich-checks each row in order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentTable> {
    let rows = spec
        .instances
        .par_iter()
        .map(|f| run_instance(f, spec))
        .collect::<Result<Vec<_>>>()?;
    for row in &rows {
        row.sandwich_check()?;
    }
    Ok(ExperimentTable { rows })
}
