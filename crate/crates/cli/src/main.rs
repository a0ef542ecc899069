use clap::{Args, Parser, Subcommand, ValueEnum};
use detlattice::pipeline::{
    cmd_generate, cmd_pipeline, cmd_stats, cmd_sweep, format_sweep_table, run_stages, PipelineError, Preset,
    RunConfig, Stage,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Reconstruct and measure 3D detonation-cell lattices from labelled volumes.
#[derive(Debug, Parser)]
#[command(name = "detlattice", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Ellipsoid,
    Graphlattice,
}

#[derive(Debug, Args)]
struct InputArg {
    /// Input volume (VLF `<name>`, `<name>.json` or `<name>.bin`).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic benchmark volume with ground truth.
    Generate {
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Voxels per axis (ellipsoid preset).
        #[arg(long)]
        nx: Option<usize>,
        /// Cells per axis as `mx,my,mz` (graph-lattice preset).
        #[arg(long, value_delimiter = ',')]
        cells: Option<Vec<usize>>,
        /// Vertex jitter as a fraction of the pitch (graph-lattice preset).
        #[arg(long)]
        jitter: Option<f64>,
    },
    /// Centroid table of every instance.
    Centroids(InputArg),
    /// Centroids and the lattice graph.
    Graph(InputArg),
    /// Centroids, graph and closed cells.
    Cells(InputArg),
    /// Statistics of a cells CSV.
    Stats {
        /// Cells CSV written by `cells` or `pipeline`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Every stage from centroids to statistics.
    Pipeline(InputArg),
    /// Volume error of the ellipsoid lattice across resolutions.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        nx_list: Option<Vec<usize>>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(p) if !p.exists() => return Err(PipelineError::InputNotFound(p.clone())),
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut cfg = load_config(&cli)?;
    let set_input = |cfg: &mut RunConfig, input: &Option<PathBuf>| {
        if let Some(i) = input {
            cfg.input = Some(i.clone());
        }
    };
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match &cli.command {
        Command::Generate { preset, nx, cells, jitter } => {
            if let Some(p) = preset {
                cfg.generate.preset = match p {
                    PresetArg::Ellipsoid => Preset::Ellipsoid,
                    PresetArg::Graphlattice => Preset::Graphlattice,
                };
            }
            if let Some(n) = nx {
                cfg.generate.ellipsoid.nx = *n;
            }
            if let Some(c) = cells {
                let c: [usize; 3] = c
                    .as_slice()
                    .try_into()
                    .map_err(|_| PipelineError::Config(format!("--cells needs 3 values, got {}", c.len())))?;
                cfg.generate.graphlattice.cells = c;
            }
            if let Some(j) = jitter {
                cfg.generate.graphlattice.jitter = *j;
            }
            let r = cmd_generate(&cfg)?;
            let edges = r.truth_edges.map(|e| format!(", {e} truth edges")).unwrap_or_default();
            say(format!("wrote {} ({} instances{edges})", r.volume.display(), r.instances));
        }
        Command::Centroids(a) | Command::Graph(a) | Command::Cells(a) | Command::Pipeline(a) => {
            set_input(&mut cfg, &a.input);
            let stage = match &cli.command {
                Command::Centroids(_) => Stage::Centroids,
                Command::Graph(_) => Stage::Graph,
                Command::Cells(_) => Stage::Cells,
                _ => Stage::Stats,
            };
            let r = if stage == Stage::Stats { cmd_pipeline(&cfg)? } else { run_stages(&cfg, stage)? };
            let mut parts = vec![format!("{} centroids", r.centroids.len())];
            if let Some(g) = &r.graph {
                parts.push(format!("{} edges", g.edges.len()));
            }
            if let Some(c) = &r.cells {
                parts.push(format!("{} cells", c.len()));
            }
            say(format!("{} -> {}", parts.join(", "), cfg.output.display()));
        }
        Command::Stats { input } => {
            set_input(&mut cfg, input);
            let r = cmd_stats(&cfg)?;
            say(format!("{} features summarised -> {}", r.summaries.len(), cfg.output.display()));
        }
        Command::Sweep { nx_list } => {
            if let Some(l) = nx_list {
                cfg.sweep.nx = l.clone();
            }
            let rows = cmd_sweep(&cfg)?;
            say(format_sweep_table(&rows).trim_end().to_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
