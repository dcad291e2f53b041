mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kaf_core::KafError;

use config::{Config, Format, Radial};

const GRAMMAR: &str = "\
Test functions (--fn) are arithmetic expressions in x1..xN and r = |x|:
  numbers     2  0.5  1e-3
  operators   + - * / ^   (^ binds tightest and is right-associative; -x^2 = -(x^2))
  functions   exp abs sin cos sqrt  pow(x, y)
Example: --fn \"(1 + x1) * exp(-r^2/2)\"

Exit codes: 0 success, 1 I/O error, 2 usage or domain error, 3 unsupported
parameters, 4 a check ran and failed.";

#[derive(Parser)]
#[command(name = "kaf", version, about = "Spectral (k,a)-generalized Fourier transform and its invariant checks")]
#[command(after_long_help = GRAMMAR)]
struct Cli {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// dimension N
    #[arg(long = "N", global = true)]
    dim: Option<usize>,
    /// deformation a, as p/q (exact) or a decimal
    #[arg(long = "a", global = true, allow_hyphen_values = true)]
    a: Option<String>,
    /// multiplicity k (N = 1 only)
    #[arg(long = "k", global = true, allow_hyphen_values = true)]
    k: Option<f64>,
    /// largest spherical degree m
    #[arg(long = "M", global = true)]
    m_max: Option<usize>,
    /// largest radial index l
    #[arg(long = "L", global = true)]
    l_max: Option<usize>,
    /// Gauss radial nodes per sector
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// radial integration scheme for analysis
    #[arg(long, global = true, value_enum)]
    radial: Option<Radial>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand a function, apply F_{k,a} spectrally and write both coefficient sets
    Transform {
        #[arg(long = "fn")]
        expr: String,
        #[arg(long)]
        out: PathBuf,
        /// compare with direct Fourier quadrature (a = 2, k = 0, N <= 2)
        #[arg(long)]
        oracle: bool,
    },
    /// Run a named invariant suite
    Verify {
        /// basis, sl2, fourier, estimates, schwartz, appendixB, harmonic or conformal
        #[arg(long)]
        suite: String,
    },
    /// Coefficient decay diagnostic for a function
    Decay {
        #[arg(long = "fn")]
        expr: String,
    },
    /// Split f(x) = u(|x|^a) + x v(|x|^a) on the line (N = 1)
    Rank1 {
        #[arg(long = "fn")]
        expr: String,
    },
    /// Sweep the Laguerre inequalities over parameter ranges
    Estimates {
        /// largest l in every sweep
        #[arg(long = "l-max")]
        sweep_l: Option<u32>,
        /// comma-separated λ values for the Duran and weighted sweeps
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        t_points: Option<usize>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Io(String),
    Usage(String),
    Capability(String),
    /// already reported on stdout
    Failed,
}

impl From<KafError> for Failure {
    fn from(e: KafError) -> Self {
        match e {
            KafError::Domain(_) | KafError::Usage(_) => Failure::Usage(e.to_string()),
            KafError::Capability(_) => Failure::Capability(e.to_string()),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Capability(_) => 3,
            Failure::Failed => 4,
        }
    }
}

fn threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("KAF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("KAF_THREADS = '{v}': expected a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn merged(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(n) = cli.dim {
        cfg.dim = n;
    }
    if let Some(a) = &cli.a {
        cfg.a = config::AValue::Text(a.clone());
    }
    if let Some(k) = cli.k {
        cfg.k = k;
    }
    if let Some(m) = cli.m_max {
        cfg.m_max = m;
    }
    if let Some(l) = cli.l_max {
        cfg.l_max = l;
    }
    if let Some(n) = cli.nodes {
        cfg.nodes = Some(n);
    }
    if let Some(r) = cli.radial {
        cfg.radial = r;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Cmd::Estimates { sweep_l, lambdas, t_max, t_points } = &cli.cmd {
        let e = &mut cfg.estimates;
        if let Some(l) = *sweep_l {
            (e.duran.l_max, e.weighted.l_max, e.koornwinder.l_max) = (l, l, l);
        }
        if let Some(ls) = lambdas {
            e.duran.lambdas = ls.clone();
            e.weighted.lambdas = ls.clone();
        }
        if let Some(t) = *t_max {
            (e.duran.t_max, e.weighted.t_max) = (t, t);
        }
        if let Some(n) = *t_points {
            (e.duran.t_points, e.weighted.t_points) = (n, n);
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    threads()?;
    let cfg = merged(&cli)?;
    let params = cfg.validate()?;
    match &cli.cmd {
        Cmd::Transform { expr, out, oracle } => commands::transform(&cfg, &params, expr, out, *oracle),
        Cmd::Verify { suite } => commands::verify(&cfg, &params, suite),
        Cmd::Decay { expr } => commands::decay(&cfg, &params, expr),
        Cmd::Rank1 { expr } => commands::rank1(&cfg, &params, expr),
        Cmd::Estimates { .. } => commands::estimates(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(m) => eprintln!("kaf: I/O error: {m}"),
                Failure::Usage(m) | Failure::Capability(m) => eprintln!("kaf: {m}"),
                Failure::Failed => {}
            }
            ExitCode::from(f.code())
        }
    }
}
