//! Rayleigh-quotient sweeps over a (k, p, alpha) grid.

use clap::ValueEnum;
use serde::Serialize;

use htype_core::closedform::hardy_constant;
use htype_core::verify::{hardy_corpus, hardy_ratio, HardyTestFunction, SharpnessSequenceSpec, SuiteConfig};
use htype_core::{Error, HTypeAlgebra, OperatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// One corpus test function at every grid point
    Hardy,
    /// The j-th member of the extremal sequence at every grid point
    Sharpness,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Hardy => "hardy",
            SweepMode::Sharpness => "sharpness",
        }
    }
}

/// One CSV row. `margin = ratio - sharp`; `margin_sigma = margin / stderr`.
/// Numeric fields are empty when `status` is not `ok`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub p: f64,
    pub alpha: f64,
    pub status: String,
    pub ratio: Option<f64>,
    pub stderr: Option<f64>,
    pub sharp: Option<f64>,
    pub margin: Option<f64>,
    pub margin_sigma: Option<f64>,
    pub radial_ratio: Option<f64>,
    pub samples: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub ks: Vec<f64>,
    pub ps: Vec<f64>,
    pub alphas: Vec<f64>,
    pub mode: SweepMode,
    pub function: usize,
    pub j: u32,
}

impl SweepGrid {
    /// Rejects values no grid point could use (k < 1, p <= 1, alpha <= -Q).
    pub fn validate(&self, alg: &HTypeAlgebra) -> Result<(), Error> {
        if self.ks.is_empty() || self.ps.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidArgument("sweep lists must be non-empty".into()));
        }
        if self.j == 0 {
            return Err(Error::InvalidArgument("j must be at least 1".into()));
        }
        for &k in &self.ks {
            for &p in &self.ps {
                let params = OperatorParams::new(alg, k, p)?;
                for &a in &self.alphas {
                    params.with_weight(a, 0.0)?;
                }
            }
        }
        Ok(())
    }
}

fn test_function(cfg: &SuiteConfig, grid: &SweepGrid, params: &OperatorParams) -> Result<HardyTestFunction, Error> {
    match grid.mode {
        SweepMode::Hardy => Ok(hardy_corpus(grid.function + 1, cfg.corpus_seed).swap_remove(grid.function)),
        SweepMode::Sharpness => Ok(SharpnessSequenceSpec::new(params, grid.j)?.test_function()),
    }
}

pub fn run(cfg: &SuiteConfig, grid: &SweepGrid) -> Result<Vec<SweepRow>, Error> {
    let alg = cfg.algebra()?;
    grid.validate(&alg)?;
    let mut rows = Vec::new();
    for &k in &grid.ks {
        for &p in &grid.ps {
            for &alpha in &grid.alphas {
                let params = OperatorParams::new(&alg, k, p)?.with_weight(alpha, 0.0)?;
                let mut row = SweepRow {
                    k,
                    p,
                    alpha,
                    status: "ok".into(),
                    ratio: None,
                    stderr: None,
                    sharp: None,
                    margin: None,
                    margin_sigma: None,
                    radial_ratio: None,
                    samples: None,
                };
                if hardy_constant(&params).is_err() {
                    row.status = "out_of_range".into();
                    rows.push(row);
                    continue;
                }
                let phi = test_function(cfg, grid, &params)?;
                let r = hardy_ratio(&alg, &params, &phi, cfg.hardy_samples, cfg.seed)?;
                row.ratio = Some(r.ratio);
                row.stderr = Some(r.ratio_stderr);
                row.sharp = Some(r.sharp);
                row.margin = Some(r.ratio - r.sharp);
                row.margin_sigma = Some(r.margin_sigma());
                row.radial_ratio = r.radial_ratio;
                row.samples = Some(r.n_samples);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    mode: SweepMode,
    function: usize,
    j: u32,
    config: &'a SuiteConfig,
    rows: &'a [SweepRow],
}

pub fn to_kv(cfg: &SuiteConfig, grid: &SweepGrid, rows: &[SweepRow]) -> Result<String, Error> {
    let doc = SweepDoc {
        mode: grid.mode,
        function: grid.function,
        j: grid.j,
        config: cfg,
        rows,
    };
    toml::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))
}
