use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fastmix::experiment::{run_experiment, ExperimentSpec};
use fastmix::families::{self, Family, Generated};
use fastmix::glauber::{build_glauber_chain, check_prop3, kbar, RateVector, SpinSystem};
use fastmix::lower::{embedding_bound, expansion_lower_bound, specified_chain_bound, Embedding};
use fastmix::solver::{solve_fastest_mixing, SolverConfig};
use fastmix::spectral::spectrum;
use fastmix::tree::{bv_bounds, majority_cut_bound, node_widths, optimal_rates, TreeSpec};
use fastmix::upper::{cheeger_upper_bound, congestion, equalize_congestion, shortest_path_system};
use fastmix::{max_degree_chain, Error, ReversibleChain, TransitionGraph};

#[derive(Parser)]
#[command(name = "fastmix", version, about = "Bounds on fastest-mixing reversible chains")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rates {
    Uniform,
    Optimal,
}

#[derive(clap::Args)]
struct FamilyArgs {
    /// knkn, cycle, torus, geometric or ising_tree
    family: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
}

impl FamilyArgs {
    fn family(&self) -> fastmix::Result<Family> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("--{name} is required")))
        };
        Ok(match self.family.as_str() {
            "knkn" => Family::Knkn { n: need(self.n, "n")? },
            "cycle" => Family::Cycle { n: need(self.n, "n")? },
            "torus" => Family::Torus {
                m: need(self.m, "m")?,
                d: self.d.unwrap_or(1),
            },
            "geometric" => Family::Geometric {
                m: need(self.m, "m")?,
                k: need(self.k, "k")?,
                d: self.d.unwrap_or(1),
            },
            "ising_tree" => Family::IsingTree {
                b: need(self.b, "b")?,
                r: need(self.r, "r")?,
                beta: self.beta.unwrap_or(1.0),
            },
            other => return Err(Error::InvalidParameter(format!("unknown family {other}"))),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family instance as a graph file (configuration graph for spin trees).
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Spectrum of a chain given as dense CSV (max-degree chain by default).
    Spectral {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Lower bounds: vertex expansion, plus an embedding file and/or a chain.
    Lower {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embedding: Option<PathBuf>,
        /// With --embedding, also evaluate the bound for this specific chain.
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Upper bounds: congestion of the equalized chain and the Cheeger-type bound.
    Upper {
        #[arg(long)]
        graph: PathBuf,
        /// Where to write the equalized chain as CSV.
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
    /// Numerical fastest-mixing chain.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
    /// Glauber dynamics of the Ising model on a complete tree.
    Glauber {
        /// Branching and levels, as `b,r`.
        #[arg(long, value_parser = parse_tree)]
        tree: (usize, usize),
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Rates::Optimal)]
        rates: Rates,
        /// Build the configuration chain and compute its spectrum.
        #[arg(long)]
        exact: bool,
    },
    /// Bound table over a set of instances.
    Report {
        /// Experiment spec as JSON; without it, the K_n-K_n sweep n = 3..=12.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_tree(s: &str) -> Result<(usize, usize), String> {
    let (b, r) = s.split_once(',').ok_or("expected b,r")?;
    Ok((
        b.trim().parse().map_err(|e| format!("b: {e}"))?,
        r.trim().parse().map_err(|e| format!("r: {e}"))?,
    ))
}

/// Command output: a JSON document and, where it has one, a CSV form.
struct Output {
    json: Value,
    csv: Option<Csv>,
}

enum Csv {
    Table(Vec<String>, Vec<Vec<String>>),
    Text(String),
}

impl Output {
    fn json(json: Value) -> Self {
        Self { json, csv: None }
    }

    fn with_csv(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.csv = Some(Csv::Table(header.iter().map(|s| s.to_string()).collect(), rows));
        self
    }
}

fn load_chain(graph: &TransitionGraph, path: &PathBuf) -> fastmix::Result<ReversibleChain> {
    ReversibleChain::read_csv(graph.clone(), File::open(path)?)?.validated()
}

fn save_chain(chain: &ReversibleChain, path: &PathBuf) -> fastmix::Result<()> {
    chain.write_csv(File::create(path)?)
}

fn run(command: Command) -> fastmix::Result<Output> {
    Ok(match command {
        Command::Gen { family, output } => {
            let graph = match families::generate(&family.family()?)? {
                Generated::Graph(g) => g,
                Generated::Spins(sys) => fastmix::glauber::configuration_graph(&sys)?,
            };
            if let Some(path) = output {
                graph.save(path)?;
            }
            let rows = graph.edges().iter().map(|(i, j)| vec![i.to_string(), j.to_string()]);
            Output::json(serde_json::to_value(graph.to_file())?).with_csv(&["i", "j"], rows.collect())
        }
        Command::Spectral { graph, chain } => {
            let graph = TransitionGraph::load(graph)?;
            let chain = match chain {
                Some(p) => load_chain(&graph, &p)?,
                None => max_degree_chain(&graph),
            };
            let s = spectrum(&chain)?;
            let rows = s
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(k, l)| vec![(k + 1).to_string(), l.to_string()])
                .collect();
            Output::json(serde_json::to_value(&s)?).with_csv(&["k", "eigenvalue"], rows)
        }
        Command::Lower {
            graph,
            embedding,
            chain,
        } => {
            let graph = TransitionGraph::load(graph)?;
            let mut doc = serde_json::Map::new();
            let mut rows = Vec::new();
            if graph.node_count() <= fastmix::lower::EXHAUSTIVE_LIMIT && graph.node_count() >= 2 {
                let x = expansion_lower_bound(&graph)?;
                rows.push(vec!["expansion".into(), x.bound.to_string()]);
                doc.insert("expansion".into(), serde_json::to_value(&x)?);
            }
            if let Some(path) = embedding {
                let e = Embedding::load(path)?;
                let b = embedding_bound(&graph, &e)?;
                rows.push(vec!["embedding".into(), b.to_string()]);
                doc.insert("embedding".into(), json!(b));
                if let Some(path) = chain {
                    let c = load_chain(&graph, &path)?;
                    let b = specified_chain_bound(&c, &e.vectors)?;
                    rows.push(vec!["specified_chain".into(), b.to_string()]);
                    doc.insert("specified_chain".into(), json!(b));
                }
            }
            Output::json(Value::Object(doc)).with_csv(&["bound", "value"], rows)
        }
        Command::Upper { graph, chain_out } => {
            let graph = TransitionGraph::load(graph)?;
            let paths = shortest_path_system(&graph);
            let eq = equalize_congestion(&graph, &paths)?;
            let report = congestion(&eq.chain, &paths)?;
            if let Some(p) = &chain_out {
                save_chain(&eq.chain, p)?;
            }
            let cheeger = if graph.node_count() <= fastmix::lower::EXHAUSTIVE_LIMIT
                && graph.node_count() >= 2
            {
                Some(cheeger_upper_bound(&graph)?)
            } else {
                None
            };
            let rows = report
                .edges
                .iter()
                .map(|e| {
                    [e.i.to_string(), e.j.to_string(), e.w.to_string(), e.q.to_string(), e.ratio.to_string()]
                        .to_vec()
                })
                .collect();
            Output::json(json!({
                "edges": report.edges,
                "rho_bar": report.rho_bar,
                "argmax": report.argmax,
                "equalized_chain": chain_out,
                "cheeger": cheeger,
            }))
            .with_csv(&["i", "j", "w", "q", "ratio"], rows)
        }
        Command::Solve {
            graph,
            iters,
            seed,
            step,
            chain_out,
        } => {
            let graph = TransitionGraph::load(graph)?;
            let config = SolverConfig {
                max_iters: iters,
                seed,
                step,
                ..SolverConfig::default()
            };
            let r = solve_fastest_mixing(&graph, &config)?;
            if let Some(p) = &chain_out {
                save_chain(&r.chain, p)?;
            }
            let rows = r
                .history
                .iter()
                .enumerate()
                .map(|(t, l)| vec![(t + 1).to_string(), l.to_string()])
                .collect();
            Output::json(json!({
                "lambda2_star": r.lambda2_star,
                "tau2_star": r.tau2_star,
                "iterations": r.iterations,
                "certificate_gap": r.certificate_gap,
                "chain": chain_out,
            }))
            .with_csv(&["iteration", "best_lambda2"], rows)
        }
        Command::Glauber {
            tree: (b, r),
            beta,
            rates,
            exact,
        } => {
            let tree = TreeSpec::new(b, r)?;
            let widths = node_widths(&tree);
            let bv = bv_bounds(&tree, beta)?;
            let (optimal, claimed) = optimal_rates(&tree, beta)?;
            let chosen = match rates {
                Rates::Uniform => RateVector::uniform(tree.node_count()),
                Rates::Optimal => optimal,
            };
            let mut doc = json!({
                "widths": widths.widths,
                "max_width": widths.max,
                "log_b": bv.log_b,
                "rates": chosen.rho,
                "bounds": {
                    "sum_b_over_v": claimed,
                    "log_sum_b_over_v": bv.log_mean,
                    "max_b": bv.max(),
                    "log_max_b": bv.log_max,
                    "log_zeta": bv.log_zeta,
                },
            });
            if b == 3 {
                doc["majority"] = serde_json::to_value(majority_cut_bound(&tree, beta)?)?;
            }
            if exact {
                let sys = SpinSystem::ising_tree(&tree, beta)?;
                let tau = spectrum(&build_glauber_chain(&sys, &chosen)?)?.relaxation_time;
                let tau_u = spectrum(&build_glauber_chain(
                    &sys,
                    &RateVector::uniform(tree.node_count()),
                )?)?
                .relaxation_time;
                doc["exact"] = json!({
                    "tau2": tau,
                    "tau2_uniform": tau_u,
                    "kbar": kbar(&sys)?,
                    "prop3": check_prop3(&sys, tau, &chosen)?.margin_rates,
                });
            }
            let rows = (0..tree.node_count())
                .map(|v| {
                    vec![
                        v.to_string(),
                        widths.widths[v].to_string(),
                        bv.log_b[v].to_string(),
                        chosen.rho[v].to_string(),
                    ]
                })
                .collect();
            Output::json(doc).with_csv(&["site", "width", "log_b", "rate"], rows)
        }
        Command::Report { spec, output } => {
            let spec = match spec {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => ExperimentSpec::knkn_sweep(3..=12),
            };
            let table = run_experiment(&spec)?;
            if let Some(p) = output {
                let csv = p.extension().is_some_and(|e| e == "csv");
                std::fs::write(p, if csv { table.to_csv()? } else { table.to_json()? })?;
            }
            Output {
                json: serde_json::to_value(&table.rows)?,
                csv: Some(Csv::Text(table.to_csv()?)),
            }
        }
    })
}

fn emit(output: Output, format: Format) -> fastmix::Result<()> {
    let mut out = io::stdout().lock();
    match (format, output.csv) {
        (Format::Json, _) => writeln!(out, "{}", serde_json::to_string_pretty(&output.json)?)?,
        (Format::Csv, Some(Csv::Text(text))) => write!(out, "{text}")?,
        (Format::Csv, Some(Csv::Table(header, rows))) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header)?;
            for row in rows {
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        (Format::Csv, None) => {
            return Err(Error::InvalidParameter("no CSV form for this command".into()))
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command).and_then(|out| emit(out, cli.format)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BoundInversion(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
