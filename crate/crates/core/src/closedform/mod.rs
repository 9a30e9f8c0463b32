//! Closed-form expressions: the `d_ε` identities, the radial form of
//! `L_{p,k}`, the kernel `ψ`, moment integrals over the unit `d`-ball and
//! sphere, and the constants of the fundamental solutions.
//!
//! Gamma-function constants are assembled in log space and exponentiated
//! once. Real powers of possibly negative bases are written as
//! `|a|^{p-2} a`, so every value stays real.

mod gamma;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use gamma::log_gamma;

use crate::algebra::{dot, GroupPoint, OperatorParams};
use crate::error::{Error, Result};
use crate::fields::{Profile, ScalarField};

/// `p` and `Q + α` closer than this select the logarithmic branch.
pub const CRITICAL_TOL: f64 = 1e-12;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::NonPositive {
            name: "eps",
            value: eps,
        });
    }
    Ok(())
}

/// `|∇_X d_ε|² = d^{4k} d_ε^{2-8k} |z|^{4k-2}`.
pub fn grad_d_eps_sq(params: &OperatorParams, g: &GroupPoint, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let k = params.k;
    let d4k = params.norm_pow4k(g);
    let de4k = d4k + eps.powf(4.0 * k);
    let z2 = dot(&g.z, &g.z);
    Ok(d4k * de4k.powf((2.0 - 8.0 * k) / (4.0 * k)) * z2.powf(2.0 * k - 1.0))
}

/// `|∇_X d|² = (|z|/d)^{2(2k-1)}`, the `ε → 0` limit of [`grad_d_eps_sq`].
pub fn grad_d_sq(params: &OperatorParams, g: &GroupPoint) -> f64 {
    let d = params.norm(g);
    if d == 0.0 {
        return 0.0;
    }
    (g.z_norm() / d).powf(2.0 * (2.0 * params.k - 1.0))
}

/// `Σ_j X_j²(d_ε^{4k}) = 4k(4k - 2 + Q)|z|^{4k-2}` (independent of ε).
pub fn lap_d4k(params: &OperatorParams, g: &GroupPoint) -> f64 {
    let k = params.k;
    let q_hom = params.homogeneous_dim();
    4.0 * k * (4.0 * k - 2.0 + q_hom) * dot(&g.z, &g.z).powf(2.0 * k - 1.0)
}

/// `Σ_j X_j² d_ε = |∇_X d_ε|² (d_ε^{4k-1}/d^{4k}) {4k + Q - 2 - (4k-1) d^{4k}/d_ε^{4k}}`.
pub fn lap_d_eps(params: &OperatorParams, g: &GroupPoint, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let k = params.k;
    let q_hom = params.homogeneous_dim();
    let d4k = params.norm_pow4k(g);
    let de4k = d4k + eps.powf(4.0 * k);
    let de = de4k.powf(0.25 / k);
    let braces = 4.0 * k + q_hom - 2.0 - (4.0 * k - 1.0) * d4k / de4k;
    if d4k > 0.0 {
        let grad_sq = grad_d_eps_sq(params, g, eps)?;
        Ok(grad_sq * (de4k / de) / d4k * braces)
    } else {
        // d_ε^{1-4k} |z|^{4k-2} {…}; vanishes with z
        Ok(de / de4k * dot(&g.z, &g.z).powf(2.0 * k - 1.0) * braces)
    }
}

/// `4kp - 4k + Q - p`, positive for every `p > 1`, `k ≥ 1`.
pub fn radial_shift(params: &OperatorParams) -> f64 {
    let (k, p) = (params.k, params.p);
    4.0 * k * p - 4.0 * k + params.homogeneous_dim() - p
}

/// `L_{p,k}(f ∘ d_ε)` through the radial formula
/// `|f'|^{p-2}|∇_X d_ε|^p {(p-1)f'' + f'[(Q-1)d^{4k} + (4kp-4k+Q-p)ε^{4k}]/(d_ε d^{4k})}`
/// with `f', f''` evaluated at `d_ε`.
pub fn radial_l(params: &OperatorParams, profile: &Profile, g: &GroupPoint, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let (k, p) = (params.k, params.p);
    let q_hom = params.homogeneous_dim();
    let d4k = params.norm_pow4k(g);
    let e4k = eps.powf(4.0 * k);
    let de4k = d4k + e4k;
    let de = de4k.powf(0.25 / k);
    let f1 = (profile.df)(de);
    let f2 = (profile.d2f)(de);
    let z2 = dot(&g.z, &g.z);

    if p < 2.0 && f1 == 0.0 {
        return Err(Error::DegenerateFlux { value: 0.0 });
    }
    let abs_f1 = f1.abs().powf(p - 2.0);
    if d4k == 0.0 {
        // |∇_X d_ε|^p / d^{4k} ~ d^{(4k-1)p - 4k} along t = 0
        if (4.0 * k - 1.0) * p > 4.0 * k {
            return Ok(0.0);
        }
        return Err(Error::InvalidArgument(
            "radial formula diverges at the identity for this p".into(),
        ));
    }
    // |∇_X d_ε|^p = (d^{4k} |z|^{4k-2})^{p/2} d_ε^{(1-4k)p}
    let grad_p = (d4k * z2.powf(2.0 * k - 1.0)).powf(0.5 * p) * de.powf((1.0 - 4.0 * k) * p);
    let bracket = ((q_hom - 1.0) * d4k + radial_shift(params) * e4k) / (de * d4k);
    Ok(abs_f1 * grad_p * ((p - 1.0) * f2 + f1 * bracket))
}

/// Prefactor of `ψ`: `|a|^{p-2} a` with `a = (p - Q)/(p - 1)`, i.e.
/// `-|(Q-p)/(p-1)|^{p-2} (Q-p)/(p-1)`.
fn psi_prefactor(params: &OperatorParams) -> Result<f64> {
    let p = params.p;
    let q_hom = params.homogeneous_dim();
    if (p - q_hom).abs() < CRITICAL_TOL {
        return Err(Error::CriticalExponent);
    }
    let a = (p - q_hom) / (p - 1.0);
    Ok(a.abs().powf(p - 2.0) * a)
}

fn psi_kernel(params: &OperatorParams, g: &GroupPoint, prefactor: f64) -> f64 {
    let (k, p) = (params.k, params.p);
    let q_hom = params.homogeneous_dim();
    let d4k = params.norm_pow4k(g);
    let z2 = dot(&g.z, &g.z);
    let denom = (1.0 + d4k).powf((4.0 * k * p - p + q_hom) / (4.0 * k));
    let body = if d4k == 0.0 {
        // d^{2kp-4k}|z|^{(2k-1)p} ≤ d^{(4k-1)p-4k}
        let expo = (4.0 * k - 1.0) * p - 4.0 * k;
        if expo > 0.0 {
            0.0
        } else if expo == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        d4k.powf((2.0 * k * p - 4.0 * k) / (4.0 * k)) * z2.powf(0.5 * (2.0 * k - 1.0) * p)
    };
    prefactor * radial_shift(params) * body / denom
}

/// `ψ(z,t) = |a|^{p-2} a (4kp-4k+Q-p) d^{2kp-4k}|z|^{(2k-1)p} / (1+d^{4k})^{(4kp-p+Q)/4k}`,
/// so that `L_{p,k} d_ε^a = ε^{-Q} ψ(δ_{1/ε} g)` with `a = (p-Q)/(p-1)`.
pub fn psi(params: &OperatorParams, g: &GroupPoint) -> Result<f64> {
    let pre = psi_prefactor(params)?;
    Ok(psi_kernel(params, g, pre))
}

/// The critical-case kernel: `L_{Q,k} log(1/d_ε) = ε^{-Q} ψ_log(δ_{1/ε} g)`,
/// which is `ψ` with prefactor `-1` at `p = Q`.
pub fn psi_log(params: &OperatorParams, g: &GroupPoint) -> Result<f64> {
    let q_hom = params.homogeneous_dim();
    if (params.p - q_hom).abs() >= CRITICAL_TOL {
        return Err(Error::InvalidArgument(format!(
            "logarithmic kernel needs p = Q = {q_hom}, got p = {}",
            params.p
        )));
    }
    Ok(psi_kernel(params, g, -1.0))
}

/// Closed-form value of `∫_G ψ` (or `∫_G ψ_log` when `p = Q`):
/// `|a|^{p-2} a σ_p`, resp. `-σ_Q`.
pub fn psi_integral(params: &OperatorParams) -> Result<f64> {
    let sigma = sigma_p(params)?;
    match psi_prefactor(params) {
        Ok(pre) => Ok(pre * sigma),
        Err(Error::CriticalExponent) => Ok(-sigma),
        Err(e) => Err(e),
    }
}

fn log_gamma_ratio(params: &OperatorParams, gamma: f64) -> Result<f64> {
    let k = params.k;
    let m = params.m() as f64;
    Ok(log_gamma((gamma + m) / (4.0 * k))?
        - log_gamma(m / 2.0)?
        - log_gamma((gamma + params.homogeneous_dim()) / (4.0 * k))?)
}

/// `σ_p = (1/4)^{q-1/2} π^{(q+m)/2} Γ(((2k-1)p+m)/4k) / (Γ(m/2) Γ(((2k-1)p+Q)/4k))`.
pub fn sigma_p(params: &OperatorParams) -> Result<f64> {
    let (m, q) = (params.m() as f64, params.q() as f64);
    let gamma = (2.0 * params.k - 1.0) * params.p;
    let log_val = (q - 0.5) * 0.25f64.ln() + 0.5 * (q + m) * PI.ln() + log_gamma_ratio(params, gamma)?;
    Ok(log_val.exp())
}

/// `σ_{p,β}`: as [`sigma_p`] with `(2k-1)p` replaced by `(2k-1)(p+β)`.
pub fn sigma_p_beta(params: &OperatorParams) -> Result<f64> {
    let (m, q) = (params.m() as f64, params.q() as f64);
    let gamma = (2.0 * params.k - 1.0) * (params.p + params.beta);
    if !(gamma + m > 0.0) {
        return Err(Error::BetaRange {
            beta: params.beta,
            bound: params.beta_lower_bound(),
        });
    }
    let log_val = (q - 0.5) * 0.25f64.ln() + 0.5 * (q + m) * PI.ln() + log_gamma((gamma + m) / (4.0 * params.k))?
        - log_gamma(m / 2.0)?
        - log_gamma((gamma + params.homogeneous_dim()) / (4.0 * params.k))?;
    Ok(log_val.exp())
}

fn check_gamma(params: &OperatorParams, gamma: f64) -> Result<()> {
    let m = params.m() as f64;
    if !(gamma > -m) {
        return Err(Error::InvalidArgument(format!(
            "moment exponent gamma = {gamma} must exceed -m = {}",
            -m
        )));
    }
    Ok(())
}

/// `∫_{d<1} |z|^γ = (1/(2(γ+Q))) (1/4)^{q-1} π^{(q+m)/2} Γ((γ+m)/4k) / (Γ(m/2) Γ((γ+Q)/4k))`.
pub fn ball_moment(params: &OperatorParams, gamma: f64) -> Result<f64> {
    check_gamma(params, gamma)?;
    let (m, q) = (params.m() as f64, params.q() as f64);
    let log_val = -(2.0 * (gamma + params.homogeneous_dim())).ln()
        + (q - 1.0) * 0.25f64.ln()
        + 0.5 * (q + m) * PI.ln()
        + log_gamma_ratio(params, gamma)?;
    Ok(log_val.exp())
}

/// `∫_S |z*|^γ dσ = (γ + Q) ∫_{d<1} |z|^γ`.
pub fn sphere_moment(params: &OperatorParams, gamma: f64) -> Result<f64> {
    check_gamma(params, gamma)?;
    Ok((gamma + params.homogeneous_dim()) * ball_moment(params, gamma)?)
}

/// Sharp constant `((Q + α - p)/p)^p` of the weighted Hardy inequality.
pub fn hardy_constant(params: &OperatorParams) -> Result<f64> {
    let p = params.p;
    let bound = params.homogeneous_dim() + params.alpha;
    if !(p > 1.0 && p < bound) {
        return Err(Error::HardyRange { p, bound });
    }
    Ok(((bound - p) / p).powf(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Power,
    Log,
}

/// `Γ = C d^{(p-Q-α)/(p-1)}` (power branch) or `Γ = C log(1/d)` (log branch).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSolutionSpec {
    pub kind: SolutionKind,
    pub exponent: f64,
    pub constant: f64,
}

impl FundamentalSolutionSpec {
    /// Value as a function of `d`; at `d = 0` returns the signed infinity the
    /// branch tends to (or 0 for a positive exponent).
    pub fn eval_radial(&self, d: f64) -> f64 {
        match self.kind {
            SolutionKind::Power => {
                if d == 0.0 {
                    if self.exponent > 0.0 {
                        0.0
                    } else {
                        self.constant.signum() * f64::INFINITY
                    }
                } else {
                    self.constant * d.powf(self.exponent)
                }
            }
            SolutionKind::Log => {
                if d == 0.0 {
                    self.constant.signum() * f64::INFINITY
                } else {
                    -self.constant * d.ln()
                }
            }
        }
    }

    pub fn eval(&self, params: &OperatorParams, g: &GroupPoint) -> f64 {
        self.eval_radial(params.norm(g))
    }

    /// The radial profile `x ↦ Γ(x)`.
    pub fn profile(&self) -> Profile {
        let c = self.constant;
        match self.kind {
            SolutionKind::Power => {
                let a = self.exponent;
                Profile::new(
                    format!("{c}*x^{a}"),
                    move |x| c * x.powf(a),
                    move |x| c * a * x.powf(a - 1.0),
                    move |x| c * a * (a - 1.0) * x.powf(a - 2.0),
                )
            }
            SolutionKind::Log => Profile::new(
                format!("{c}*log(1/x)"),
                move |x| -c * x.ln(),
                move |x| -c / x,
                move |x| c / (x * x),
            ),
        }
    }

    /// `Γ` as a scalar field with analytic gradient.
    pub fn field(&self, params: &OperatorParams) -> ScalarField {
        crate::fields::profile_of_norm(params, &self.profile(), 0.0)
    }
}

/// Fundamental solution of `L_{p,k}` (or of `L_{p,k,w}` when `weighted`)
/// with singularity at the identity.
pub fn fundamental_solution(params: &OperatorParams, weighted: bool) -> Result<FundamentalSolutionSpec> {
    let p = params.p;
    let (alpha, sigma) = if weighted {
        let checked = params.with_weight(params.alpha, params.beta)?;
        (checked.alpha, sigma_p_beta(&checked)?)
    } else {
        (0.0, sigma_p(params)?)
    };
    let critical = params.homogeneous_dim() + alpha;
    if (p - critical).abs() < CRITICAL_TOL {
        Ok(FundamentalSolutionSpec {
            kind: SolutionKind::Log,
            exponent: 0.0,
            constant: -sigma.powf(-1.0 / (critical - 1.0)),
        })
    } else {
        Ok(FundamentalSolutionSpec {
            kind: SolutionKind::Power,
            exponent: (p - critical) / (p - 1.0),
            constant: (p - 1.0) / (p - critical) * sigma.powf(-1.0 / (p - 1.0)),
        })
    }
}
