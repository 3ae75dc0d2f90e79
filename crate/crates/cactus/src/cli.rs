//! Command-line front end: tune weight sequences, sample maps and labeled
//! trees, build cactuses of graphs, and run the statistical experiments.
//!
//! Exit codes are part of the contract: 0 success, 2 usage error, 3 input
//! parse error, 4 numerical non-convergence, 5 sampling budget exhausted.
//! Every run writes `manifest.txt` (command echo, tool version, generator,
//! seed, config echo) next to its outputs, and outputs are a pure function
//! of the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::boltzmann::{BoltzmannError, MapSampler, WeightSeq};
use crate::brownian::LabeledTree;
use crate::experiments::{self, ConvergenceMode, ExpError, ExperimentConfig, StatReport};
use crate::graph::{build_cactus, PointedGraph};
use crate::map::MapClass;
use crate::mobile::LabelSampler;
use crate::rng::{task_rng, GENERATOR_ID};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Parser)]
#[command(name = "cactus", version, about = "cactus trees of graphs and random planar maps")]
struct Cli {
    /// Directory receiving output files and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Pos,
    Neg,
    Null,
}

impl From<Variant> for MapClass {
    fn from(v: Variant) -> MapClass {
        match v {
            Variant::Pos => MapClass::Positive,
            Variant::Neg => MapClass::Negative,
            Variant::Null => MapClass::Null,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Tune a weight file (lines `k q_k`) to criticality and print the
    /// parameters.
    Tune { weights: PathBuf },
    /// Sample a Boltzmann map with a fixed vertex count; writes `map.txt`
    /// and `mobile.txt`.
    SampleMap {
        /// Weight file (lines `k q_k`).
        #[arg(long)]
        q: PathBuf,
        /// Number of map vertices.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        variant: Variant,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = u64::MAX)]
        max_tries: u64,
    },
    /// Build the cactus of a pointed graph file; writes `cactus.txt`.
    Cactus { graph: PathBuf },
    /// Sample a labeled plane tree and write `tree_summary.txt`.
    SampleTree {
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run a statistical experiment; writes `report.csv` and `report.json`.
    Exp {
        #[command(subcommand)]
        which: ExpCmd,
    },
}

#[derive(Subcommand)]
enum ExpCmd {
    VolumeGrowth(ExpArgs),
    SeparatingCycle(ExpArgs),
    BallExponent(ExpArgs),
    Convergence(ExpArgs),
}

#[derive(clap::Args)]
struct ExpArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (overrides the config file).
    #[arg(long)]
    workers: Option<usize>,
}

enum CliError {
    Parse(String),
    Numerical(String),
    Budget(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Numerical(m)
            | CliError::Budget(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<BoltzmannError> for CliError {
    fn from(e: BoltzmannError) -> Self {
        match e {
            BoltzmannError::NoConvergence(_) => CliError::Numerical(e.to_string()),
            BoltzmannError::BudgetExhausted { .. } | BoltzmannError::SizeCapExceeded(_) => {
                CliError::Budget(e.to_string())
            }
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<ExpError> for CliError {
    fn from(e: ExpError) -> Self {
        match e {
            ExpError::Sampling(inner) => inner.into(),
            ExpError::Config(_) => CliError::Parse(e.to_string()),
            ExpError::Pool(m) => CliError::Io(m),
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_manifest(
    dir: &Path,
    command: &str,
    seed: Option<u64>,
    config: &[(String, String)],
) -> Result<(), CliError> {
    let mut m = String::new();
    let _ = writeln!(m, "tool = cactus {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "command = {command}");
    let _ = writeln!(m, "generator = {GENERATOR_ID}");
    if let Some(s) = seed {
        let _ = writeln!(m, "seed = {s}");
    }
    for (k, v) in config {
        let _ = writeln!(m, "{k} = {v}");
    }
    write_output(dir, "manifest.txt", &m)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let out = cli.out;
    match cli.cmd {
        Cmd::Tune { weights } => {
            let q = WeightSeq::from_text(&read_input(&weights)?)?;
            let params = crate::boltzmann::tune_critical(&q)?;
            write_manifest(
                &out,
                &format!("tune {}", weights.display()),
                None,
                &[("weights".into(), q.to_text().replace('\n', "; "))],
            )?;
            print!("{}", params.to_text());
            Ok(())
        }
        Cmd::SampleMap {
            q,
            n,
            variant,
            seed,
            max_tries,
        } => {
            let weights = WeightSeq::from_text(&read_input(&q)?)?;
            let sampler = MapSampler::tune(&weights)?;
            let mut labels = LabelSampler::new();
            let mut rng = task_rng(seed, 0x5a, 0);
            let (built, mobile) =
                sampler.sample_map(n, variant.into(), &mut rng, &mut labels, max_tries)?;
            write_manifest(
                &out,
                &format!(
                    "sample-map --q {} --n {n} --variant {variant:?} --seed {seed}",
                    q.display()
                ),
                Some(seed),
                &[
                    ("n".into(), n.to_string()),
                    ("variant".into(), format!("{variant:?}").to_lowercase()),
                    ("weights".into(), weights.to_text().replace('\n', "; ")),
                ],
            )?;
            write_output(&out, "map.txt", &built.map.to_text())?;
            write_output(&out, "mobile.txt", &mobile.to_text())?;
            println!(
                "map: {} vertices, {} edges, {} faces -> {}",
                built.map.n_vertices(),
                built.map.n_edges(),
                built.map.faces().len(),
                out.join("map.txt").display()
            );
            Ok(())
        }
        Cmd::Cactus { graph } => {
            let g = PointedGraph::from_text(&read_input(&graph)?)
                .map_err(|e| CliError::Parse(e.to_string()))?;
            let cactus = build_cactus(&g);
            write_manifest(&out, &format!("cactus {}", graph.display()), None, &[])?;
            write_output(&out, "cactus.txt", &cactus.to_text())?;
            println!(
                "cactus: {} classes over {} vertices -> {}",
                cactus.classes().len(),
                g.n_vertices(),
                out.join("cactus.txt").display()
            );
            Ok(())
        }
        Cmd::SampleTree { edges, seed } => {
            if edges == 0 {
                return Err(CliError::Parse("edges must be positive".into()));
            }
            let mut rng = task_rng(seed, 0x7e, 0);
            let tree = LabeledTree::sample(edges, &mut rng);
            let a_star = tree.min_label_vertex();
            let v = tree.sample_mass_vertex(&mut rng);
            let w = tree.sample_mass_vertex(&mut rng);
            let max_depth = (0..tree.n_vertices() as u32)
                .map(|x| tree.depth(x))
                .max()
                .unwrap_or(0);
            let mut s = String::new();
            let _ = writeln!(s, "edges = {edges}");
            let _ = writeln!(s, "max_depth = {max_depth}");
            let _ = writeln!(s, "min_label_vertex = {a_star}");
            let _ = writeln!(
                s,
                "min_label_scaled = {}",
                tree.min_label_raw() * tree.label_scale()
            );
            let _ = writeln!(s, "mass_pair_distance_scaled = {}", tree.kac_distance(v, w));
            let _ = writeln!(
                s,
                "one_point_scaled = {}",
                (tree.label_raw(v) - tree.min_label_raw()) * tree.label_scale()
            );
            write_manifest(
                &out,
                &format!("sample-tree --edges {edges} --seed {seed}"),
                Some(seed),
                &[("edges".into(), edges.to_string())],
            )?;
            write_output(&out, "tree_summary.txt", &s)?;
            println!("tree summary -> {}", out.join("tree_summary.txt").display());
            Ok(())
        }
        Cmd::Exp { which } => {
            let (name, args): (&str, &ExpArgs) = match &which {
                ExpCmd::VolumeGrowth(a) => ("volume-growth", a),
                ExpCmd::SeparatingCycle(a) => ("separating-cycle", a),
                ExpCmd::BallExponent(a) => ("ball-exponent", a),
                ExpCmd::Convergence(a) => ("convergence", a),
            };
            let mut cfg = ExperimentConfig::from_text(&read_input(&args.config)?)?;
            if let Some(w) = args.workers {
                cfg.workers = w;
            }
            let report: StatReport = match which {
                ExpCmd::VolumeGrowth(_) => experiments::volume_growth(&cfg)?,
                ExpCmd::SeparatingCycle(_) => experiments::separating_cycle(&cfg)?,
                ExpCmd::BallExponent(_) => experiments::ball_exponent(&cfg)?,
                ExpCmd::Convergence(_) => {
                    let mode = ConvergenceMode::from_config(&cfg)?;
                    experiments::cactus_convergence(&cfg, &mode)?
                }
            };
            let echo: Vec<(String, String)> = report
                .config
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            write_manifest(
                &out,
                &format!("exp {name} --config {}", args.config.display()),
                Some(cfg.seed),
                &echo,
            )?;
            write_output(&out, "report.csv", &report.to_csv())?;
            write_output(&out, "report.json", &report.to_json())?;
            println!(
                "{name}: {} rows -> {}",
                report.rows.len(),
                out.join("report.csv").display()
            );
            for row in &report.rows {
                println!(
                    "  {} = {:.6}{}",
                    row.name,
                    row.estimate,
                    if row.reference.is_nan() {
                        String::new()
                    } else {
                        format!(" (reference {:.6})", row.reference)
                    }
                );
            }
            Ok(())
        }
    }
}
