//! Random evaluation points with `d` log-uniform on an interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{GroupPoint, HTypeAlgebra, OperatorParams};
use crate::error::{Error, Result};

/// Largest angle `θ` in `|z|^{2k} = d^{2k} cos θ`, `4|t| = d^{2k} sin θ`.
/// Keeping `θ < π/2` bounds `|z|/d` away from zero.
pub const MAX_CENTRAL_ANGLE: f64 = 0.45 * std::f64::consts::PI;

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A point with prescribed `d` and angle `θ ∈ [0, π/2)` between the
/// horizontal and central parts, with uniformly random directions.
pub fn point_at(params: &OperatorParams, rng: &mut ChaCha8Rng, d: f64, theta: f64) -> GroupPoint {
    let k = params.k;
    let d2k = d.powf(2.0 * k);
    let z_len = (d2k * theta.cos()).powf(0.5 / k);
    let t_len = 0.25 * d2k * theta.sin();
    let z = unit_vector(rng, params.m()).into_iter().map(|x| z_len * x).collect();
    let t = unit_vector(rng, params.q()).into_iter().map(|x| t_len * x).collect();
    GroupPoint { z, t }
}

/// `n` points with `log d` uniform on `[log lo, log hi]`.
pub fn sample_points(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    n: usize,
    (lo, hi): (f64, f64),
    seed: u64,
) -> Result<Vec<GroupPoint>> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidArgument(format!("bad d-range [{lo}, {hi}]")));
    }
    if params.m() != alg.m() || params.q() != alg.q() {
        return Err(Error::DimensionMismatch {
            expected: alg.m(),
            found: params.m(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|_| {
            let d = if lhi > llo {
                rng.random_range(llo..lhi).exp()
            } else {
                lo
            };
            let theta = rng.random_range(0.0..MAX_CENTRAL_ANGLE);
            point_at(params, &mut rng, d, theta)
        })
        .collect())
}
