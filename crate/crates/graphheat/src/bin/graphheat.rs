use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphheat::cli::{cmd_closed_form, cmd_compare, cmd_compute, cmd_gen, cmd_metric, cmd_validate, Against, CliError, Family, Outcome};
use graphheat::config::{ConfigError, Format, ParametrixChoice, RunConfig};
use graphheat::gen::Generator;
use graphheat::validation::{CheckKind, MassRoute};

/// Heat kernels on weighted graphs.
///
/// Exit status: 0 success, 1 a deterministic check failed, 2 configuration
/// error, 3 resource limit (window too small, quadrature not converged).
#[derive(Parser)]
#[command(name = "graphheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Graph file (JSON)
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Generator, e.g. lattice:radius=80, tree:q=2,radius=8, random:n=200,degree=6,seed=1, pair
    #[arg(long, global = true)]
    generator: Option<String>,
    /// Metric for the Gaussian parametrix: combinatorial, normalized[:a=..], intrinsic, adapted, edge_weighted[:e1=..]
    #[arg(long, global = true)]
    metric: Option<String>,
    /// dirac or gaussian
    #[arg(long, global = true)]
    parametrix: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Comma-separated times
    #[arg(long, global = true, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// Comma-separated queries x:y
    #[arg(long, global = true, value_delimiter = ',')]
    pairs: Option<Vec<String>>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, env = "GRAPHHEAT_THREADS")]
    threads: Option<usize>,
    /// Treat a window as a complete finite graph
    #[arg(long, global = true)]
    as_finite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as JSON
    Gen,
    /// Evaluate H(x, y; t) with its error budget
    Compute,
    /// Run the property suite
    Validate {
        /// Comma-separated checks (default: all)
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Force the series order of the mass check
        #[arg(long)]
        series_order: Option<usize>,
        /// dirac or gaussian
        #[arg(long)]
        mass_route: Option<String>,
        /// Random-walk trajectories per time
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Compare two routes per query
    Compare {
        /// closed, walk or gaussian
        #[arg(long, default_value = "closed")]
        against: String,
    },
    /// Tabulate the ℤ or tree closed form
    ClosedForm {
        /// lattice or tree
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        q: usize,
        /// Comma-separated distances
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tail_tol: f64,
    },
    /// Verify a metric and print the violation report
    Metric,
}

fn config_err(e: ConfigError) -> CliError {
    CliError::Config(e)
}

fn merge(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p).map_err(config_err)?,
        None => RunConfig::default(),
    };
    if c.graph.is_some() {
        cfg.graph = c.graph.clone();
        cfg.generator = None;
    }
    if c.generator.is_some() {
        cfg.generator = c.generator.clone();
        if c.graph.is_none() {
            cfg.graph = None;
        }
    }
    if let Some(m) = &c.metric {
        cfg.metric = m.clone();
    }
    if let Some(p) = &c.parametrix {
        cfg.parametrix = p.parse::<ParametrixChoice>().map_err(config_err)?;
    }
    if let Some(t) = c.tol {
        cfg.tol = t;
    }
    if let Some(t) = &c.t {
        cfg.t = t.clone();
        cfg.suite.times = t.clone();
    }
    if let Some(p) = &c.pairs {
        cfg.pairs = p.clone();
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if let Some(f) = &c.format {
        cfg.format = f.parse::<Format>().map_err(config_err)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
        cfg.suite.seed = s;
    }
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    cfg.as_finite |= c.as_finite;
    cfg.check().map_err(config_err)?;
    Ok(cfg)
}

fn invalid(msg: String) -> CliError {
    CliError::Config(graphheat::config::invalid(msg))
}

fn parse_checks(names: &[String]) -> Result<Vec<CheckKind>, CliError> {
    names
        .iter()
        .map(|n| {
            CheckKind::ALL
                .iter()
                .copied()
                .find(|k| k.name() == n.trim())
                .ok_or_else(|| invalid(format!("unknown check {n}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let mut cfg = merge(&cli.common)?;
    if let Some(n) = cfg.threads {
        // the global pool can only be built once; a second build is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.command {
        Command::Gen => {
            let spec = cfg.generator.as_deref().ok_or_else(|| invalid("gen needs --generator".into()))?;
            let gen: Generator = spec.parse().map_err(|e| config_err(ConfigError::Gen(e)))?;
            cmd_gen(&gen)?
        }
        Command::Compute => cmd_compute(&cfg)?,
        Command::Validate { checks, series_order, mass_route, samples } => {
            if let Some(c) = checks {
                cfg.suite.checks = parse_checks(&c)?;
            }
            if series_order.is_some() {
                cfg.suite.series_order = series_order;
            }
            if let Some(r) = mass_route {
                cfg.suite.mass_route = match r.as_str() {
                    "dirac" => MassRoute::Dirac,
                    "gaussian" => MassRoute::Gaussian,
                    other => return Err(invalid(format!("unknown mass route {other}"))),
                };
            }
            if let Some(n) = samples {
                cfg.suite.mc_samples = n;
            }
            cfg.suite.as_finite |= cfg.as_finite;
            cmd_validate(&cfg)?.0
        }
        Command::Compare { against } => {
            let against: Against = against.parse().map_err(config_err)?;
            cmd_compare(&cfg, against)?
        }
        Command::ClosedForm { family, q, r, tail_tol } => {
            let family = match family.as_str() {
                "lattice" => Family::Lattice,
                "tree" => Family::Tree { q },
                other => return Err(invalid(format!("unknown family {other} (lattice, tree)"))),
            };
            cmd_closed_form(family, &r, &cfg.t, tail_tol, cfg.format)?
        }
        Command::Metric => cmd_metric(&cfg)?.0,
    };
    Ok((outcome, cfg.out))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| {
            CliError::Config(ConfigError::Read { path: p.display().to_string(), source })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(o, out)| emit(&out, &o.output).map(|_| o));
    match result {
        Ok(o) => {
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
