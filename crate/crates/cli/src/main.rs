//! `sparse-ld`: command-line front end for the library.
//!
//! Exit codes: 0 pass, 1 criterion fail, 2 infeasible or over budget,
//! 3 input error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sparse_ld::coloring::{partition_set, quotient, set_distance, Coloring, Method, Quotient};
use sparse_ld::enumerate::DEFAULT_BUDGET;
use sparse_ld::hom::{deletion_witness_report, dyadic_schedule, hom_count, lambda_limit, maxcut_from_beta, HomAlgorithm, TargetGraph};
use sparse_ld::lab::{run_scenario, Scenario, ScenarioName};
use sparse_ld::measures::{build_measures, project_tk, RealColoring};
use sparse_ld::neighborhood::{bs_frequencies, colored_frequencies, colored_frequency_set};
use sparse_ld::numeric::fmt_ext;
use sparse_ld::rate::sampled::{rate_iid, IidConfig};
use sparse_ld::rate::{bucket_histogram, rate_exact};
use sparse_ld::rational::{format_q, parse_q, Q};
use sparse_ld::variational::{gibbs_bucket_decomposition, variational_free_energy};
use sparse_ld::{Error, Graph, GraphFamily};

use config::Config;

#[derive(Parser)]
#[command(name = "sparse-ld", version, about = "Partition sets, rates and partition functions of small sparse graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random choice (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enumeration budget in colorings (overrides the config file).
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Output file, or output directory for `scenario`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML run configuration; echoed into scenario bundles.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Realize a graph family at one index. CSV output is the edge-list text format.
    Gen {
        /// Family as JSON, inline or `@file`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1)]
        index: usize,
    },
    /// Quotient of a graph under a coloring.
    Quotient {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        coloring: ColoringArg,
    },
    /// All k-quotients of a graph, exact or sampled; optionally the distance to a second graph's set.
    PartitionSet {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        /// Sample this many random colorings instead of enumerating.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Measures of a random real coloring and their k-grid projection.
    Measures {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Empirical rate of a quotient ball.
    Rate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        /// Quotient JSON file.
        #[arg(long)]
        center: Option<PathBuf>,
        #[arg(long, default_value = "1/8")]
        delta: String,
        /// Use this many i.i.d. samples instead of exact enumeration.
        #[arg(long)]
        samples: Option<u64>,
        /// Emit the exact bucket histogram (CSV) instead of a ball estimate.
        #[arg(long)]
        buckets: bool,
    },
    /// log hom(G, H).
    Hom {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        #[arg(long, value_enum, default_value = "components")]
        algorithm: AlgorithmArg,
    },
    /// Free energies of a family under softened targets; fails unless monotone in λ.
    FreeEnergy {
        /// Family as JSON, inline or `@file`.
        #[arg(long)]
        family: String,
        #[command(flatten)]
        target: TargetArg,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        indices: Vec<usize>,
        /// Explicit λ values; otherwise the dyadic schedule.
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        steps: u32,
    },
    /// Edge-deletion witness for a hard-core target; fails when none is found.
    Witness {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        lambda: f64,
    },
    /// MaxCut brackets from the cut-weight partition function; fails if a bracket misses the exact value.
    Maxcut {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "20")]
        beta: Vec<f64>,
    },
    /// Rooted-ball frequencies, plain, under a coloring, or over all m-colorings.
    Neighborhood {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[command(flatten)]
        coloring: ColoringArg,
        /// Frequency set over all colorings with this many colors.
        #[arg(long)]
        m: Option<usize>,
        /// Write the key decoding table here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Energy-entropy minimization; fails when the gap exceeds its slack.
    Variational {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        #[arg(long, default_value = "1/8")]
        delta: String,
        /// Report the bucket sandwich on log Z instead; fails unless it contains the exact value.
        #[arg(long)]
        gibbs: bool,
        /// With `--gibbs`, also re-sum exact per-cell weights (k^n extra work).
        #[arg(long, requires = "gibbs")]
        identity: bool,
    },
    /// Run a named scenario and write its bundle.
    Scenario {
        /// Scenario name; may come from the config file instead.
        name: Option<String>,
        /// Parameters as JSON, inline or `@file`; overrides the config file.
        #[arg(long)]
        params: Option<String>,
        /// List scenario names and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args)]
struct ColoringArg {
    /// Coloring JSON file ({"k", "colors"}, colors in 1..=k).
    #[arg(long, conflicts_with = "colors")]
    coloring: Option<PathBuf>,
    /// Inline colors in 1..=k, comma separated.
    #[arg(long, value_delimiter = ',')]
    colors: Vec<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct TargetArg {
    /// Target graph JSON file ({"alpha", "A", "labels"}).
    #[arg(long)]
    target: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Brute,
    Transfer,
    Components,
}

/// What a command produced.
enum Outcome {
    Pass,
    Fail,
    Truncated,
}

/// Settings after merging flags over the config file.
struct Settings {
    seed: u64,
    budget: u128,
    out: Option<PathBuf>,
    format: Format,
    config: Option<Config>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Ok(Outcome::Truncated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let budget = e.chain().any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::BudgetExceeded { .. } | Error::ExactSearchInfeasible { .. })));
    if budget {
        2
    } else {
        3
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let config = cli.global.config.as_deref().map(Config::load).transpose()?;
    let from_config = |f: fn(&Config) -> Option<u128>| config.as_ref().and_then(f);
    let s = Settings {
        seed: cli.global.seed.or(config.as_ref().and_then(|c| c.seed)).unwrap_or(0),
        budget: cli.global.budget.or(from_config(|c| c.budget)).unwrap_or(DEFAULT_BUDGET),
        out: cli.global.out.or(config.as_ref().and_then(|c| c.out.clone())),
        format: cli.global.format.or(config.as_ref().and_then(|c| c.format)).unwrap_or(Format::Json),
        config,
    };
    match cli.command {
        Command::Gen { family, index } => {
            let fam: GraphFamily = parse_json_arg(&family, "family")?;
            let g = fam.realize(index)?;
            let text = match s.format {
                Format::Json => g.to_json() + "\n",
                Format::Csv => g.to_edge_list(),
            };
            emit(&s, &text)?;
            Ok(Outcome::Pass)
        }
        Command::Quotient { graph, coloring } => {
            let g = read_graph(&graph)?;
            let sigma =
                coloring_from(coloring.coloring.as_deref(), &coloring.colors, coloring.k)?.ok_or_else(|| input("pass --coloring FILE or --colors with --k"))?;
            let q = quotient(&g, &sigma)?;
            match s.format {
                Format::Json => emit_json(&s, &q)?,
                Format::Csv => emit(&s, &quotient_csv(q.k(), [&q]))?,
            }
            Ok(Outcome::Pass)
        }
        Command::PartitionSet { graph, k, samples, against } => {
            let g = read_graph(&graph)?;
            let method = match samples {
                Some(budget) => Method::Sampled { budget, seed: s.seed },
                None => Method::Exact,
            };
            let set = partition_set(&g, k, method, s.budget)?;
            if let Some(other) = against {
                let other = partition_set(&read_graph(&other)?, k, method, s.budget)?;
                let d = set_distance(&set, &other)?;
                #[derive(Serialize)]
                struct Distance {
                    k: usize,
                    left: usize,
                    right: usize,
                    distance: String,
                }
                let rep = Distance { k, left: set.len(), right: other.len(), distance: format_q(&d) };
                match s.format {
                    Format::Json => emit_json(&s, &rep)?,
                    Format::Csv => emit(&s, &format!("k,left,right,distance\n{k},{},{},{}\n", rep.left, rep.right, rep.distance))?,
                }
                return Ok(Outcome::Pass);
            }
            match s.format {
                Format::Json => emit_json(&s, &set)?,
                Format::Csv => emit(&s, &quotient_csv(k, set.points.iter()))?,
            }
            Ok(Outcome::Pass)
        }
        Command::Measures { graph, k } => {
            let g = read_graph(&graph)?;
            let sigma = RealColoring::uniform(g.n(), s.seed, &[k]);
            let m = build_measures(&g, &sigma)?;
            let step = project_tk(&m, k)?;
            #[derive(Serialize)]
            struct Report<'a> {
                coloring: &'a RealColoring,
                measures: &'a sparse_ld::measures::MeasurePair,
                projection: &'a sparse_ld::measures::StepMeasurePair,
            }
            match s.format {
                Format::Json => emit_json(&s, &Report { coloring: &sigma, measures: &m, projection: &step })?,
                Format::Csv => {
                    let mut out = String::from("i,j,mass\n");
                    for (i, r) in step.rho().iter().enumerate() {
                        out += &format!("{},,{}\n", i + 1, format_q(r));
                    }
                    for i in 0..k {
                        for j in 0..k {
                            out += &format!("{},{},{}\n", i + 1, j + 1, format_q(&step.mu_cell(i, j)));
                        }
                    }
                    emit(&s, &out)?;
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Rate { graph, k, center, delta, samples, buckets } => {
            let g = read_graph(&graph)?;
            let delta = parse_rational(&delta)?;
            if buckets {
                emit(&s, &bucket_histogram(&g, k, &delta, s.budget)?.to_csv())?;
                return Ok(Outcome::Pass);
            }
            let center = center.ok_or_else(|| input("rate needs --center (or --buckets)"))?;
            let center: Quotient = parse_json_file(&center)?;
            let est = match samples {
                Some(samples) => rate_iid(&g, k, &center, &delta, &IidConfig { samples, seed: s.seed, ..Default::default() })?,
                None => rate_exact(&g, k, &center, &delta, s.budget)?,
            };
            match s.format {
                Format::Json => emit_json(&s, &est)?,
                Format::Csv => emit(&s, &format!("n,k,value,count\n{},{},{},{}\n", est.n, est.k, fmt_ext(est.value), est.count.clone().unwrap_or_default()))?,
            }
            Ok(Outcome::Pass)
        }
        Command::Hom { graph, target, algorithm } => {
            let g = read_graph(&graph)?;
            let h = read_target(&target.target)?;
            let alg = match algorithm {
                AlgorithmArg::Brute => HomAlgorithm::Brute,
                AlgorithmArg::Transfer => HomAlgorithm::Transfer,
                AlgorithmArg::Components => HomAlgorithm::Components,
            };
            let lp = hom_count(&g, &h, alg, s.budget)?;
            match s.format {
                Format::Json => emit_json(&s, &lp)?,
                Format::Csv => emit(
                    &s,
                    &format!("log_value,per_vertex,free_energy\n{},{},{}\n", fmt_ext(lp.log_value), fmt_ext(lp.per_vertex), fmt_ext(lp.free_energy())),
                )?,
            }
            Ok(Outcome::Pass)
        }
        Command::FreeEnergy { family, target, indices, lambdas, steps } => {
            let fam: GraphFamily = parse_json_arg(&family, "family")?;
            let h = read_target(&target.target)?;
            let lambdas = if lambdas.is_empty() { dyadic_schedule(steps) } else { lambdas };
            let table = lambda_limit(&fam, &h, &indices, &lambdas, s.budget)?;
            match s.format {
                Format::Json => emit_json(&s, &table)?,
                Format::Csv => emit(&s, &table.to_csv()?)?,
            }
            Ok(if table.monotone { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Witness { graph, target, epsilon, lambda } => {
            let g = read_graph(&graph)?;
            let h = read_target(&target.target)?;
            let w = deletion_witness_report(&g, &h, epsilon, lambda, s.budget)?;
            match s.format {
                Format::Json => emit_json(&s, &w)?,
                Format::Csv => {
                    let rows: String = w.removed_edges.iter().map(|(u, v)| format!("{u},{v}\n")).collect();
                    emit(&s, &format!("u,v\n{rows}"))?;
                }
            }
            Ok(if w.satisfied() { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Maxcut { graph, beta } => {
            let g = read_graph(&graph)?;
            let rep = maxcut_from_beta(&g, &beta, s.budget)?;
            match s.format {
                Format::Json => emit_json(&s, &rep)?,
                Format::Csv => {
                    let exact = rep.exact.map(|v| v.to_string()).unwrap_or_default();
                    let mut out = String::from("beta,log_hom,lower,upper,exact\n");
                    for r in &rep.rows {
                        out += &format!("{},{},{},{},{exact}\n", r.beta, fmt_ext(r.log_hom), fmt_ext(r.lower), fmt_ext(r.upper));
                    }
                    emit(&s, &out)?;
                }
            }
            Ok(if rep.bracketed == Some(false) { Outcome::Fail } else { Outcome::Pass })
        }
        Command::Neighborhood { graph, r, coloring, m, table } => {
            let g = read_graph(&graph)?;
            if let Some(m) = m {
                let set = colored_frequency_set(&g, m, r, Method::Exact, s.budget)?;
                emit_json(&s, &set)?;
                return Ok(Outcome::Pass);
            }
            let fv = match coloring_from(coloring.coloring.as_deref(), &coloring.colors, coloring.k)? {
                Some(sigma) => colored_frequencies(&g, &sigma, r)?,
                None => bs_frequencies(&g, r)?,
            };
            if let Some(path) = table {
                let mut text = serde_json::to_string_pretty(&fv.decode_table()?)?;
                text.push('\n');
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            match s.format {
                Format::Json => emit_json(&s, &fv)?,
                Format::Csv => {
                    let rows: String = fv.entries.iter().map(|(key, v)| format!("{},{}\n", hex_key(key), format_q(v))).collect();
                    emit(&s, &format!("key,frequency\n{rows}"))?;
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Variational { graph, target, delta, gibbs, identity } => {
            let g = read_graph(&graph)?;
            let h = read_target(&target.target)?;
            let delta = parse_rational(&delta)?;
            if gibbs {
                let rep = gibbs_bucket_decomposition(&g, &h, &delta, identity, s.budget)?;
                let ok = rep.contained && rep.upper - rep.lower <= rep.width_bound + 1e-12;
                match s.format {
                    Format::Json => emit_json(&s, &rep)?,
                    Format::Csv => emit(
                        &s,
                        &format!("lower,exact,upper,width_bound,occupied\n{},{},{},{},{}\n", rep.lower, rep.exact, rep.upper, rep.width_bound, rep.occupied),
                    )?,
                }
                return Ok(if ok { Outcome::Pass } else { Outcome::Fail });
            }
            let rep = variational_free_energy(&g, &h, &delta, s.budget)?;
            match s.format {
                Format::Json => emit_json(&s, &rep)?,
                Format::Csv => emit(
                    &s,
                    &format!(
                        "energy,entropy,value,direct,gap,slack\n{},{},{},{},{},{}\n",
                        rep.energy,
                        rep.entropy,
                        rep.value,
                        fmt_ext(rep.direct),
                        fmt_ext(rep.gap),
                        rep.slack
                    ),
                )?,
            }
            Ok(if rep.gap.abs() <= rep.slack { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Scenario { name, params, list } => {
            if list {
                let names: String = ScenarioName::ALL.iter().map(|n| format!("{n}\n")).collect();
                emit(&s, &names)?;
                return Ok(Outcome::Pass);
            }
            scenario(&s, name, params)
        }
    }
}

fn scenario(s: &Settings, name: Option<String>, params: Option<String>) -> anyhow::Result<Outcome> {
    let name = name
        .or_else(|| s.config.as_ref().and_then(|c| c.scenario.clone()))
        .ok_or_else(|| input("scenario needs a name (argument or `scenario` in the config)"))?;
    let name: ScenarioName = name.parse().map_err(|e: Error| anyhow!(e))?;
    let params = match params {
        Some(p) => Some(parse_json_arg::<serde_json::Value>(&p, "params")?),
        None => s.config.as_ref().and_then(|c| c.params.clone()),
    };
    let sc = match params {
        Some(v) => Scenario::from_json(name, s.seed, v)?,
        None => Scenario::new(name, s.seed),
    };
    let mut bundle = run_scenario(&sc, s.budget)?;
    if let Some(c) = &s.config {
        bundle.attach("config.toml", c.text.clone());
    }
    match &s.out {
        Some(dir) => {
            bundle.write(dir).with_context(|| format!("writing bundle to {}", dir.display()))?;
            print!("{}", bundle.summary());
        }
        None => print!("{}", bundle.summary()),
    }
    Ok(if bundle.truncated.is_some() {
        Outcome::Truncated
    } else if bundle.passed {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn input(msg: &str) -> anyhow::Error {
    anyhow!(Error::InvalidParameter(msg.into()))
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    Graph::read(path).with_context(|| format!("reading graph {}", path.display()))
}

fn read_target(path: &Path) -> anyhow::Result<TargetGraph> {
    parse_json_file(path)
}

fn parse_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Inline JSON, or `@path` to read it from a file.
fn parse_json_arg<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> anyhow::Result<T> {
    match arg.strip_prefix('@') {
        Some(path) => parse_json_file(Path::new(path)),
        None => serde_json::from_str(arg).with_context(|| format!("parsing --{what}")),
    }
}

fn parse_rational(s: &str) -> anyhow::Result<Q> {
    Ok(parse_q(s)?)
}

fn coloring_from(file: Option<&Path>, colors: &[usize], k: Option<usize>) -> anyhow::Result<Option<Coloring>> {
    if let Some(path) = file {
        return Ok(Some(parse_json_file(path)?));
    }
    if colors.is_empty() {
        return Ok(None);
    }
    let k = k.or_else(|| colors.iter().copied().max()).unwrap_or(1);
    Ok(Some(Coloring::from_one_based(colors, k)?))
}

fn quotient_csv<'a>(k: usize, points: impl IntoIterator<Item = &'a Quotient>) -> String {
    let mut cols: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    cols.extend((1..=k).flat_map(|i| (1..=k).map(move |j| format!("X{i}_{j}"))));
    let mut out = cols.join(",") + "\n";
    for p in points {
        let row: Vec<String> = p.flatten().iter().map(format_q).collect();
        out += &row.join(",");
        out.push('\n');
    }
    out
}

fn hex_key(key: &[u8]) -> String {
    key.iter().map(|b| format!("{b:02x}")).collect()
}

fn emit(s: &Settings, text: &str) -> anyhow::Result<()> {
    match &s.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(s: &Settings, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(s, &text)
}
