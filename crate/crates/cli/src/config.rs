//! Flag, environment and config-file handling. Precedence: flags (or their
//! `HTYPE_*` environment variables) > config file > built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use htype_core::verify::SuiteConfig;
use htype_core::{Error, OperatorParams};

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Group id: heisenberg:<n>, quaternionic:<n> or custom:<file>
    #[arg(long, env = "HTYPE_GROUP")]
    pub group: Option<String>,
    #[arg(long, env = "HTYPE_K")]
    pub k: Option<f64>,
    #[arg(long, env = "HTYPE_P")]
    pub p: Option<f64>,
    #[arg(long, env = "HTYPE_ALPHA", allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, env = "HTYPE_BETA", allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Plain-text key = value file with any SuiteConfig field
    #[arg(long, env = "HTYPE_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, env = "HTYPE_SEED")]
    pub seed: Option<u64>,
    /// Monte Carlo samples per region
    #[arg(long, env = "HTYPE_SAMPLES")]
    pub samples: Option<usize>,
    /// Monte Carlo samples per shell for Rayleigh quotients
    #[arg(long, env = "HTYPE_HARDY_SAMPLES")]
    pub hardy_samples: Option<usize>,
    /// Points for pointwise checks
    #[arg(long, env = "HTYPE_POINTS")]
    pub points: Option<usize>,
    /// Test functions in the Hardy corpus
    #[arg(long, env = "HTYPE_CORPUS_SIZE")]
    pub corpus_size: Option<usize>,
    #[arg(long, env = "HTYPE_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Output formats; verify defaults to kv, sweep to csv
    #[arg(long, env = "HTYPE_FORMAT", value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Kv,
    Csv,
}

impl RunArgs {
    pub fn formats_or(&self, default: Format) -> Vec<Format> {
        if self.format.is_empty() {
            vec![default]
        } else {
            self.format.clone()
        }
    }
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Kv => "kv",
            Format::Csv => "csv",
        }
    }
}

pub fn load_file(path: &Path) -> Result<SuiteConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn build(params: &ParamArgs, run: Option<&RunArgs>) -> Result<SuiteConfig, Error> {
    let mut cfg = match &params.config {
        Some(path) => load_file(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(g) = &params.group {
        cfg.group = g.clone();
    }
    set(&mut cfg.k, params.k);
    set(&mut cfg.p, params.p);
    set(&mut cfg.alpha, params.alpha);
    set(&mut cfg.beta, params.beta);
    if let Some(run) = run {
        set(&mut cfg.seed, run.seed);
        set(&mut cfg.samples, run.samples);
        set(&mut cfg.hardy_samples, run.hardy_samples);
        set(&mut cfg.points, run.points);
        set(&mut cfg.corpus_size, run.corpus_size);
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Validated parameters, weights included.
pub fn validate(cfg: &SuiteConfig) -> Result<OperatorParams, Error> {
    let (_, params) = cfg.setup()?;
    params.with_weight(cfg.alpha, cfg.beta)
}

/// `heisenberg:1` -> `heisenberg-1`; anything outside `[A-Za-z0-9_.]` becomes `-`.
pub fn sanitize(group: &str) -> String {
    let s: String = group
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '-'
            }
        })
        .collect();
    s.trim_matches('-').to_string()
}

/// `<out>/<stem>-<group>-<stamp>.<ext>`, with a counter appended on collision.
pub fn output_path(out: &Path, stem: &str, group: &str, stamp: &str, ext: &str) -> PathBuf {
    let base = format!("{stem}-{}-{stamp}", sanitize(group));
    let mut path = out.join(format!("{base}.{ext}"));
    let mut n = 1;
    while path.exists() {
        path = out.join(format!("{base}-{n}.{ext}"));
        n += 1;
    }
    path
}
