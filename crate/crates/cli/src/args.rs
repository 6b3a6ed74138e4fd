use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Escape probabilities and Julia sets of Markov random polynomial systems.
#[derive(Parser, Debug, Clone)]
#[command(name = "mrds", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// System config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Image and table formats written for raster outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads, 0 for machine parallelism. MRDS_THREADS overrides.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Structural checks: irreducibility, non-determinism, separation, kernel.
    Check {
        /// Points per vertex in the clouds used by the separation check.
        #[arg(long, default_value_t = 4000)]
        points: usize,
    },
    /// Escape-probability fields per vertex, the aggregate and 1 - T.
    Tinf {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = TinfMethod::Tree)]
        method: TinfMethod,
        /// Tree depth, or word length for monte-carlo.
        #[arg(long, default_value_t = 24)]
        depth: usize,
        /// Monte Carlo samples per pixel.
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Sup-norm stopping tolerance for operator iteration.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
    },
    /// Backward-orbit point cloud of one vertex Julia set.
    Julia {
        #[command(flatten)]
        grid: Grid,
        /// One-based vertex id.
        #[arg(long, default_value_t = 1)]
        vertex: usize,
        #[arg(long, default_value_t = 100_000)]
        points: usize,
        #[arg(long, value_enum, default_value_t = CloudMethod::Chain)]
        method: CloudMethod,
    },
    /// Raster of the filled-in Julia set of one vertex.
    Filled {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1)]
        vertex: usize,
        #[arg(long, default_value_t = 24)]
        depth: usize,
    },
    /// Random filled-in Julia set and its boundary along one sampled word.
    Jxi {
        #[command(flatten)]
        grid: Grid,
        /// One-based start vertex.
        #[arg(long, default_value_t = 1)]
        vertex: usize,
        #[arg(long, default_value_t = 40)]
        length: usize,
        /// Word stream id.
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Forward orbit of one point along a sampled word.
    Orbit {
        /// Start point as re,im.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: (f64, f64),
        #[arg(long, default_value_t = 1)]
        vertex: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Repelling fixed points of loop words at one vertex.
    Fixedpoints {
        #[arg(long, default_value_t = 1)]
        vertex: usize,
        #[arg(long, default_value_t = 3)]
        max_word_len: usize,
        /// Cap on the number of words; a seeded subset is taken beyond it.
        #[arg(long, default_value_t = 1000)]
        words: usize,
    },
    /// Runs the built-in acceptance criteria.
    Verify {
        /// Run only these criteria (1-based ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Grid {
    /// x0,x1,y0,y1; defaults to the config window, else [-2,2]^2.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<[f64; 4]>,
    /// NX,NY
    #[arg(long, value_parser = parse_res, default_value = "512,512")]
    pub res: (usize, usize),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Pgm,
    Csv,
    Both,
}

impl Format {
    pub fn pgm(self) -> bool {
        matches!(self, Format::Pgm | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TinfMethod {
    Tree,
    MonteCarlo,
    Operator,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudMethod {
    /// Random backward chains.
    Chain,
    /// Breadth-first preimage tree with one point per cell.
    Tree,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {:?}", s));
    }
    parts.iter().map(|p| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

pub fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v = parse_floats(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

pub fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

pub fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| p.parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    match parts.as_slice() {
        [n] => {
            let n = parse(n)?;
            Ok((n, n))
        }
        [x, y] => Ok((parse(x)?, parse(y)?)),
        _ => Err(format!("expected NX,NY, got {s:?}")),
    }
    .and_then(|(x, y)| if x == 0 || y == 0 { Err("resolution must be positive".into()) } else { Ok((x, y)) })
}
