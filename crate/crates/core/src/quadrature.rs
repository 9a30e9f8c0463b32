//! Seeded Monte Carlo over `d`-balls, `d`-shells and the whole group, plus
//! composite Gauss–Legendre quadrature on intervals.
//!
//! Samples are drawn uniformly from the bounding box
//! `z ∈ [-R, R]^m`, `|t_i| ≤ R^{2k}/4` of the ball `{d < R}` and weighted by
//! the region indicator, so the estimate `V_box · mean(f·1_region)` is
//! unbiased and its standard error includes the acceptance noise.
//!
//! The sample stream is split into fixed-size shards; shard `s` of region `r`
//! draws from ChaCha8 stream `(r << 40) | s` of the user seed. Shards are
//! evaluated in parallel and merged in shard order, so results are
//! bit-identical regardless of the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{dot, GroupPoint, HTypeAlgebra, OperatorParams};
use crate::error::{Error, Result};

/// Samples per shard.
pub const SHARD_SIZE: usize = 4096;

/// Samples with `|z|` below this are discarded (integrable singularities at `z = 0`).
pub const Z_EXCLUSION: f64 = 1e-12;

pub const MIN_ACCEPTANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `d < radius`.
    Ball { radius: f64 },
    /// `inner ≤ d < outer`.
    Shell { inner: f64, outer: f64 },
    /// `|z_i| ≤ z_half`, `|t_i| ≤ t_half`.
    Box { z_half: f64, t_half: f64 },
    /// A dyadic shell decomposition of the whole group.
    Group { a_min: i32, a_max: i32 },
}

impl Region {
    fn bounding_box(&self, k: f64) -> (f64, f64) {
        let outer = match *self {
            Region::Ball { radius } => radius,
            Region::Shell { outer, .. } => outer,
            Region::Box { z_half, t_half } => return (z_half, t_half),
            Region::Group { a_max, .. } => 2f64.powi(a_max),
        };
        (outer, 0.25 * outer.powf(2.0 * k))
    }

    fn contains(&self, params: &OperatorParams, g: &GroupPoint) -> bool {
        match *self {
            Region::Ball { radius } => params.norm(g) < radius,
            Region::Shell { inner, outer } => {
                let d = params.norm(g);
                d >= inner && d < outer
            }
            Region::Box { .. } => true,
            Region::Group { .. } => unreachable!("group regions are sampled shell by shell"),
        }
    }
}

/// A region together with the seed of its sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub region: Region,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub region: Region,
}

impl IntegralEstimate {
    /// `|value - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target).abs() / self.stderr
        }
    }

    pub fn within(&self, target: f64, n_sigma: f64) -> bool {
        (self.value - target).abs() <= n_sigma * self.stderr
    }
}

/// Joint estimate of several integrals from common samples.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub values: Vec<f64>,
    /// Row-major covariance of the estimates.
    pub cov: Vec<f64>,
    pub n_samples: u64,
    pub accepted: u64,
    pub region: Region,
}

impl VectorEstimate {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim() + j]
    }

    pub fn component(&self, i: usize) -> IntegralEstimate {
        IntegralEstimate {
            value: self.values[i],
            stderr: self.covariance(i, i).max(0.0).sqrt(),
            n_samples: self.n_samples,
            region: self.region,
        }
    }

    /// Sum of independent estimates (e.g. over disjoint regions).
    pub fn add_independent(&mut self, other: &VectorEstimate) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        for (a, b) in self.cov.iter_mut().zip(&other.cov) {
            *a += b;
        }
        self.n_samples += other.n_samples;
        self.accepted += other.accepted;
    }
}

/// Running mean and co-moment matrix (Chan et al. parallel update).
#[derive(Debug, Clone)]
struct Moments {
    n: u64,
    accepted: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            accepted: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
        }
    }

    fn push(&mut self, x: &[f64], delta: &mut [f64]) {
        let dim = x.len();
        self.n += 1;
        let n = self.n as f64;
        for i in 0..dim {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        for i in 0..dim {
            let di_new = x[i] - self.mean[i];
            for j in 0..dim {
                self.comoment[i * dim + j] += di_new * delta[j];
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let dim = self.mean.len();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = (0..dim).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..dim {
            for j in 0..dim {
                self.comoment[i * dim + j] += other.comoment[i * dim + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..dim {
            self.mean[i] += delta[i] * nb / n;
        }
        self.n += other.n;
        self.accepted += other.accepted;
    }
}

fn random_point(rng: &mut ChaCha8Rng, m: usize, q: usize, z_half: f64, t_half: f64) -> GroupPoint {
    GroupPoint {
        z: (0..m).map(|_| z_half * rng.random_range(-1.0..1.0)).collect(),
        t: (0..q).map(|_| t_half * rng.random_range(-1.0..1.0)).collect(),
    }
}

/// Monte Carlo estimate of `∫_region f` for a vector-valued integrand
/// writing `dim` components into its output slice. `stream` separates
/// independent regions drawn from one seed.
pub fn sample_region<F>(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    sampler: &Sampler,
    stream: u64,
    n: usize,
    dim: usize,
    f: F,
) -> Result<VectorEstimate>
where
    F: Fn(&GroupPoint, &mut [f64]) + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let region = sampler.region;
    if matches!(region, Region::Group { .. }) {
        return Err(Error::InvalidArgument(
            "use mc_group_integral for whole-group regions".into(),
        ));
    }
    let (m, q) = (alg.m(), alg.q());
    let (z_half, t_half) = region.bounding_box(params.k);
    let volume = (2.0 * z_half).powi(m as i32) * (2.0 * t_half).powi(q as i32);
    let n_shards = n.div_ceil(SHARD_SIZE);

    let shards: Vec<Moments> = (0..n_shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
            rng.set_stream((stream << 40) | s as u64);
            let count = SHARD_SIZE.min(n - s * SHARD_SIZE);
            let mut acc = Moments::new(dim);
            let mut out = vec![0.0; dim];
            let mut scratch = vec![0.0; dim];
            for _ in 0..count {
                let g = random_point(&mut rng, m, q, z_half, t_half);
                out.iter_mut().for_each(|v| *v = 0.0);
                if region.contains(params, &g) && dot(&g.z, &g.z).sqrt() >= Z_EXCLUSION {
                    acc.accepted += 1;
                    f(&g, &mut out);
                }
                acc.push(&out, &mut scratch);
            }
            acc
        })
        .collect();

    let mut total = Moments::new(dim);
    for shard in &shards {
        total.merge(shard);
    }
    let nf = total.n as f64;
    let rate = total.accepted as f64 / nf;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::LowAcceptance { rate });
    }
    let denom = if total.n > 1 { nf * (nf - 1.0) } else { f64::INFINITY };
    Ok(VectorEstimate {
        values: total.mean.iter().map(|v| volume * v).collect(),
        cov: total.comoment.iter().map(|c| volume * volume * c / denom).collect(),
        n_samples: total.n,
        accepted: total.accepted,
        region,
    })
}

/// `∫_{d<R} f` with `n` samples.
pub fn mc_ball_integral<F>(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    f: F,
    radius: f64,
    n: usize,
    seed: u64,
) -> Result<IntegralEstimate>
where
    F: Fn(&GroupPoint) -> f64 + Sync,
{
    if !(radius > 0.0) {
        return Err(Error::NonPositive {
            name: "radius",
            value: radius,
        });
    }
    let sampler = Sampler {
        region: Region::Ball { radius },
        seed,
    };
    let est = sample_region(alg, params, &sampler, 0, n, 1, |g, out| out[0] = f(g))?;
    Ok(est.component(0))
}

/// `∫_{inner ≤ d < outer} f` with `n` samples.
pub fn mc_shell_integral<F>(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    f: F,
    inner: f64,
    outer: f64,
    n: usize,
    seed: u64,
) -> Result<IntegralEstimate>
where
    F: Fn(&GroupPoint) -> f64 + Sync,
{
    if !(inner >= 0.0 && outer > inner) {
        return Err(Error::InvalidArgument(format!("bad shell [{inner}, {outer})")));
    }
    let sampler = Sampler {
        region: Region::Shell { inner, outer },
        seed,
    };
    let est = sample_region(alg, params, &sampler, 0, n, 1, |g, out| out[0] = f(g))?;
    Ok(est.component(0))
}

/// Dyadic shells `2^a ≤ d < 2^{a+1}` for `a_min ≤ a < a_max`, preceded by
/// the ball `d < 2^{a_min}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub a_min: i32,
    pub a_max: i32,
    pub per_shell: usize,
}

impl Default for ShellSpec {
    fn default() -> Self {
        Self {
            a_min: -12,
            a_max: 12,
            per_shell: 200_000,
        }
    }
}

impl ShellSpec {
    pub fn regions(&self) -> Vec<Region> {
        let mut out = vec![Region::Ball {
            radius: 2f64.powi(self.a_min),
        }];
        out.extend((self.a_min..self.a_max).map(|a| Region::Shell {
            inner: 2f64.powi(a),
            outer: 2f64.powi(a + 1),
        }));
        out
    }
}

/// Whole-group estimate with its per-region breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupEstimate {
    pub total: VectorEstimate,
    pub shells: Vec<VectorEstimate>,
    /// `|last shell|` per component, a bound on the neglected tail.
    pub tail_bound: Vec<f64>,
}

impl GroupEstimate {
    pub fn component(&self, i: usize) -> IntegralEstimate {
        self.total.component(i)
    }
}

/// Vector-valued whole-group integral over a dyadic shell decomposition.
/// Fails with [`Error::NonDecayingTail`] when the outermost shell carries
/// more than 1% of the total for any component.
pub fn mc_group_integral_vec<F>(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    dim: usize,
    f: F,
    shells: &ShellSpec,
    seed: u64,
) -> Result<GroupEstimate>
where
    F: Fn(&GroupPoint, &mut [f64]) + Sync,
{
    if shells.a_max <= shells.a_min {
        return Err(Error::InvalidArgument("a_max must exceed a_min".into()));
    }
    let mut parts = Vec::new();
    for (r, region) in shells.regions().into_iter().enumerate() {
        let sampler = Sampler { region, seed };
        parts.push(sample_region(
            alg,
            params,
            &sampler,
            r as u64,
            shells.per_shell,
            dim,
            &f,
        )?);
    }
    let mut total = VectorEstimate {
        values: vec![0.0; dim],
        cov: vec![0.0; dim * dim],
        n_samples: 0,
        accepted: 0,
        region: Region::Group {
            a_min: shells.a_min,
            a_max: shells.a_max,
        },
    };
    for part in &parts {
        total.add_independent(part);
    }
    let last = parts.last().expect("at least one region");
    let tail_bound: Vec<f64> = last.values.iter().map(|v| v.abs()).collect();
    for (tail, tot) in tail_bound.iter().zip(&total.values) {
        if *tot != 0.0 && tail / tot.abs() > 0.01 {
            return Err(Error::NonDecayingTail {
                fraction: tail / tot.abs(),
            });
        }
    }
    Ok(GroupEstimate {
        total,
        shells: parts,
        tail_bound,
    })
}

/// Scalar whole-group integral.
pub fn mc_group_integral<F>(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    f: F,
    shells: &ShellSpec,
    seed: u64,
) -> Result<GroupEstimate>
where
    F: Fn(&GroupPoint) -> f64 + Sync,
{
    mc_group_integral_vec(alg, params, 1, |g, out| out[0] = f(g), shells, seed)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite 8-point Gauss–Legendre over `n` equal panels of `[a, b]`.
pub fn grid_integral_1d<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("panel count must be positive".into()));
    }
    let (nodes, weights) = gauss_legendre(8);
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for panel in 0..n {
        let lo = a + panel as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    Ok(total)
}
