//! Test functions for the weighted Hardy inequality, their Rayleigh
//! quotients, and the sharpness sequence `u_j`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{GroupPoint, HTypeAlgebra, OperatorParams};
use crate::closedform::hardy_constant;
use crate::error::{Error, Result};
use crate::fields::{norm_eps_euclid_grad, DiffBackend, Profile, ScalarField, VectorFields};
use crate::quadrature::{grid_integral_1d, sample_region, Region, Sampler, VectorEstimate};

/// Value and first two derivatives of a function of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        d: 0.0,
        dd: 0.0,
    };

    pub fn var(x: f64) -> Self {
        Jet { v: x, d: 1.0, dd: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Jet { v: c, d: 0.0, dd: 0.0 }
    }

    /// `g ∘ self` given `g`, `g'`, `g''` at `self.v`.
    pub fn compose(self, g: f64, g1: f64, g2: f64) -> Self {
        Jet {
            v: g,
            d: g1 * self.d,
            dd: g2 * self.d * self.d + g1 * self.dd,
        }
    }

    pub fn mul(self, o: Jet) -> Self {
        Jet {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        }
    }

    pub fn add(self, o: Jet) -> Self {
        Jet {
            v: self.v + o.v,
            d: self.d + o.d,
            dd: self.dd + o.dd,
        }
    }

    pub fn affine(self, a: f64, b: f64) -> Self {
        Jet {
            v: a * self.v + b,
            d: a * self.d,
            dd: a * self.dd,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn ln(self) -> Self {
        let x = self.v;
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn powf(self, a: f64) -> Self {
        let x = self.v;
        self.compose(x.powf(a), a * x.powf(a - 1.0), a * (a - 1.0) * x.powf(a - 2.0))
    }

    pub fn recip(self) -> Self {
        let x = self.v;
        self.compose(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn cos(self) -> Self {
        let x = self.v;
        self.compose(x.cos(), -x.sin(), -x.cos())
    }
}

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

fn profile_from_jet(label: String, jet: Arc<JetFn>) -> Profile {
    let (j1, j2, j3) = (jet.clone(), jet.clone(), jet);
    Profile::new(label, move |x| j1(x).v, move |x| j2(x).d, move |x| j3(x).dd)
}

/// Quintic smoothstep `6x⁵ - 15x⁴ + 10x³` clamped to `[0, 1]`, with its
/// first two derivatives. It is `C²` at both ends.
pub fn smoothstep(x: f64) -> Jet {
    if x <= 0.0 {
        Jet::ZERO
    } else if x >= 1.0 {
        Jet::constant(1.0)
    } else {
        let x2 = x * x;
        Jet {
            v: x2 * x * (10.0 + x * (-15.0 + 6.0 * x)),
            d: 30.0 * x2 * (1.0 - x) * (1.0 - x),
            dd: 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
        }
    }
}

/// `max |S'|` of the quintic smoothstep, attained at `x = 1/2`.
pub const SMOOTHSTEP_SLOPE: f64 = 1.875;

/// Angular factor `1 + a u₁ + b v₁ + c u₁u₂` with `u = z/d`, `v = 4t/d^{2k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angular {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Angular {
    /// Value and Euclidean gradient at `g`, given `d(g)` and `∇d(g)`.
    fn value_grad(&self, params: &OperatorParams, g: &GroupPoint, d: f64, dgrad: &[f64]) -> (f64, Vec<f64>) {
        let m = g.z.len();
        let k = params.k;
        let u1 = g.z[0] / d;
        let u2 = if m > 1 { g.z[1] / d } else { 0.0 };
        let d2k = d.powf(2.0 * k);
        let v1 = 4.0 * g.t[0] / d2k;
        let value = 1.0 + self.a * u1 + self.b * v1 + self.c * u1 * u2;

        let mut grad = vec![0.0; dgrad.len()];
        // ∇u_i = e_{z_i}/d - z_i ∇d / d²
        let gu = |i: usize, out: &mut [f64], s: f64| {
            if i >= m || s == 0.0 {
                return;
            }
            out[i] += s / d;
            for (o, dd) in out.iter_mut().zip(dgrad) {
                *o -= s * g.z[i] * dd / (d * d);
            }
        };
        gu(0, &mut grad, self.a + self.c * u2);
        gu(1, &mut grad, self.c * u1);
        // ∇v₁ = 4 e_{t_1} d^{-2k} - 8k t₁ d^{-2k-1} ∇d
        if self.b != 0.0 {
            grad[m] += self.b * 4.0 / d2k;
            let s = self.b * 8.0 * k * g.t[0] / (d2k * d);
            for (o, dd) in grad.iter_mut().zip(dgrad) {
                *o -= s * dd;
            }
        }
        (value, grad)
    }
}

/// `Φ = f(d)·A` with `f` supported on the annulus `[r₀, r₁]`, `r₀ > 0`,
/// and `A` an optional angular factor.
#[derive(Debug, Clone)]
pub struct HardyTestFunction {
    pub label: String,
    pub profile: Profile,
    pub support: (f64, f64),
    pub angular: Option<Angular>,
    /// Points in the support where the profile is only piecewise smooth.
    pub knots: Vec<f64>,
}

impl HardyTestFunction {
    pub fn new(label: impl Into<String>, profile: Profile, support: (f64, f64)) -> Result<Self> {
        let (inner, outer) = support;
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::BadSupport { inner, outer });
        }
        Ok(Self {
            label: label.into(),
            profile,
            support,
            angular: None,
            knots: Vec::new(),
        })
    }

    pub fn with_angular(mut self, angular: Angular) -> Self {
        self.angular = Some(angular);
        self
    }

    pub fn with_knots(mut self, knots: Vec<f64>) -> Self {
        self.knots = knots;
        self
    }

    pub fn is_radial(&self) -> bool {
        self.angular.is_none()
    }

    /// `c·Φ`.
    pub fn scaled(&self, c: f64) -> Self {
        let (f, df, d2f) = (
            self.profile.f.clone(),
            self.profile.df.clone(),
            self.profile.d2f.clone(),
        );
        Self {
            label: format!("{c}*{}", self.label),
            profile: Profile::new(
                format!("{c}*{}", self.profile.label),
                move |x| c * f(x),
                move |x| c * df(x),
                move |x| c * d2f(x),
            ),
            ..self.clone()
        }
    }

    /// `Φ ∘ δ_λ`; the angular factor is dilation invariant.
    pub fn dilated(&self, lambda: f64) -> Self {
        let (f, df, d2f) = (
            self.profile.f.clone(),
            self.profile.df.clone(),
            self.profile.d2f.clone(),
        );
        Self {
            label: format!("{}∘δ_{lambda}", self.label),
            profile: Profile::new(
                format!("{}(λx)", self.profile.label),
                move |x| f(lambda * x),
                move |x| lambda * df(lambda * x),
                move |x| lambda * lambda * d2f(lambda * x),
            ),
            support: (self.support.0 / lambda, self.support.1 / lambda),
            angular: self.angular,
            knots: self.knots.iter().map(|x| x / lambda).collect(),
        }
    }

    /// Value and Euclidean gradient of `Φ` at `g`.
    pub fn value_grad(&self, params: &OperatorParams, g: &GroupPoint) -> (f64, Vec<f64>) {
        let d = params.norm(g);
        let n = g.z.len() + g.t.len();
        if !(d > self.support.0 && d < self.support.1) {
            return (0.0, vec![0.0; n]);
        }
        let dgrad = norm_eps_euclid_grad(params, g, 0.0);
        let f = (self.profile.f)(d);
        let df = (self.profile.df)(d);
        match &self.angular {
            None => (f, dgrad.iter().map(|x| df * x).collect()),
            Some(ang) => {
                let (a, agrad) = ang.value_grad(params, g, d, &dgrad);
                let grad = dgrad.iter().zip(&agrad).map(|(dd, ag)| df * dd * a + f * ag).collect();
                (f * a, grad)
            }
        }
    }

    pub fn field(&self, params: &OperatorParams) -> ScalarField {
        let (p1, p2) = (*params, *params);
        let (s1, s2) = (self.clone(), self.clone());
        ScalarField::with_grad(
            self.label.clone(),
            move |g| s1.value_grad(&p1, g).0,
            move |g| s2.value_grad(&p2, g).1,
        )
    }

    /// Break points of the 1-D integrals: support ends and knots.
    fn pieces(&self) -> Vec<f64> {
        let (r0, r1) = self.support;
        let mut pts: Vec<f64> = std::iter::once(r0)
            .chain(self.knots.iter().copied().filter(|x| *x > r0 && *x < r1))
            .chain(std::iter::once(r1))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Seeded corpus of `n` test functions on varying annuli. Every other
/// function carries an angular factor.
pub fn hardy_corpus(n: usize, seed: u64) -> Vec<HardyTestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let r0 = (rng.random_range(0.05f64.ln()..0.0)).exp();
            let r1 = r0 * rng.random_range(2.0..8.0);
            let family = i % 5;
            let c = rng.random_range(-0.8..0.8);
            let gamma = rng.random_range(0.5..3.0);
            let omega = rng.random_range(1.0..6.0);
            let b = rng.random_range(-2.0..2.0);
            let (l0, width) = (r0.ln(), (r1 / r0).ln());
            let jet: Arc<JetFn> = Arc::new(move |r: f64| {
                if !(r > r0 && r < r1) {
                    return Jet::ZERO;
                }
                let rj = Jet::var(r);
                let s = rj.ln().affine(2.0 / width, -2.0 * l0 / width - 1.0);
                let w = s.mul(s).affine(-1.0, 1.0);
                let phi = w.recip().affine(-1.0, 1.0);
                match family {
                    0 => phi.exp(),
                    1 => phi.exp().mul(s.affine(c, 1.0)),
                    2 => phi.affine(gamma, 0.0).exp(),
                    3 => phi.exp().mul(s.affine(omega, 0.0).cos()),
                    _ => phi.exp().mul(rj.powf(b)),
                }
            });
            let name = ["bump", "tilted", "power", "wave", "weighted"][family];
            let label = format!("corpus[{i}]:{name}");
            let profile = profile_from_jet(label.clone(), jet);
            let phi = HardyTestFunction::new(label, profile, (r0, r1)).expect("valid annulus");
            if i % 2 == 1 {
                phi.with_angular(Angular {
                    a: rng.random_range(-0.3..0.3),
                    b: rng.random_range(-0.3..0.3),
                    c: rng.random_range(-0.3..0.3),
                })
            } else {
                phi
            }
        })
        .collect()
}

/// Both sides of the Hardy inequality and their quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyRatio {
    /// `∫ d^α |∇_X Φ|^p`.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// `∫ d^{α-p} |∇_X d|^p |Φ|^p`.
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub cov: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// `((Q + α - p)/p)^p`.
    pub sharp: f64,
    /// Ratio from the 1-D radial reduction when `Φ` is radial.
    pub radial_ratio: Option<f64>,
    pub n_samples: u64,
}

impl HardyRatio {
    /// `(ratio - sharp) / ratio_stderr`.
    pub fn margin_sigma(&self) -> f64 {
        (self.ratio - self.sharp) / self.ratio_stderr
    }
}

/// Annulus split into shells `[r₀2^i, r₀2^{i+1})`, with a thin last piece
/// merged into its neighbour.
fn support_shells((r0, r1): (f64, f64)) -> Vec<(f64, f64)> {
    let mut edges = vec![r0];
    let mut r = r0;
    while 2.0 * r < r1 {
        r *= 2.0;
        edges.push(r);
    }
    edges.push(r1);
    if edges.len() > 2 && r1 / edges[edges.len() - 2] < std::f64::consts::SQRT_2 {
        edges.remove(edges.len() - 2);
    }
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Vector integral over the annulus `support`, `n` samples per shell.
pub fn support_integrals<F>(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    support: (f64, f64),
    n: usize,
    seed: u64,
    dim: usize,
    f: F,
) -> Result<VectorEstimate>
where
    F: Fn(&GroupPoint, &mut [f64]) + Sync,
{
    let (inner, outer) = support;
    if !(inner > 0.0 && outer > inner) {
        return Err(Error::BadSupport { inner, outer });
    }
    let mut total: Option<VectorEstimate> = None;
    for (i, (a, b)) in support_shells(support).into_iter().enumerate() {
        let sampler = Sampler {
            region: Region::Shell { inner: a, outer: b },
            seed,
        };
        let est = sample_region(alg, params, &sampler, i as u64, n, dim, &f)?;
        match total.as_mut() {
            None => total = Some(est),
            Some(t) => t.add_independent(&est),
        }
    }
    Ok(total.expect("at least one shell"))
}

/// Rayleigh quotient of `Φ` for the weight `d^α` (`params.alpha`) by shell
/// Monte Carlo over the support, `n` samples per shell.
pub fn hardy_ratio(
    alg: &HTypeAlgebra,
    params: &OperatorParams,
    phi: &HardyTestFunction,
    n: usize,
    seed: u64,
) -> Result<HardyRatio> {
    let params = params.with_weight(params.alpha, 0.0)?;
    let sharp = hardy_constant(&params)?;
    let fields = VectorFields::new(alg, &params, DiffBackend::analytic());
    let (p, alpha) = (params.p, params.alpha);
    let integrand = |g: &GroupPoint, out: &mut [f64]| {
        let d = params.norm(g);
        let (v, egrad) = phi.value_grad(&params, g);
        if v == 0.0 && egrad.iter().all(|x| *x == 0.0) {
            return;
        }
        let grad = fields.assemble(g, &egrad);
        let grad_d = fields.assemble(g, &norm_eps_euclid_grad(&params, g, 0.0));
        let gn = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dn = grad_d.iter().map(|x| x * x).sum::<f64>().sqrt();
        out[0] = d.powf(alpha) * gn.powf(p);
        out[1] = d.powf(alpha - p) * dn.powf(p) * v.abs().powf(p);
    };

    let total = support_integrals(alg, &params, phi.support, n, seed, 2, integrand)?;
    let (lhs, rhs) = (total.values[0], total.values[1]);
    let (vl, vr, cov) = (total.covariance(0, 0), total.covariance(1, 1), total.covariance(0, 1));
    let ratio = lhs / rhs;
    let rel_var = vl / (lhs * lhs) + vr / (rhs * rhs) - 2.0 * cov / (lhs * rhs);
    let radial_ratio = if phi.is_radial() {
        Some(radial_ratio(&params, phi)?)
    } else {
        None
    };
    Ok(HardyRatio {
        lhs,
        lhs_stderr: vl.max(0.0).sqrt(),
        rhs,
        rhs_stderr: vr.max(0.0).sqrt(),
        cov,
        ratio,
        ratio_stderr: ratio.abs() * rel_var.max(0.0).sqrt(),
        sharp,
        radial_ratio,
        n_samples: total.n_samples,
    })
}

/// The Rayleigh quotient of a radial `Φ = f(d)` from the polar formula:
/// `∫ r^{α+Q-1}|f'|^p dr / ∫ r^{α+Q-p-1}|f|^p dr` (the sphere moment of
/// `|z|^{(2k-1)p}` cancels).
pub fn radial_ratio(params: &OperatorParams, phi: &HardyTestFunction) -> Result<f64> {
    let (p, e) = (params.p, params.alpha + params.homogeneous_dim());
    let (f, df) = (phi.profile.f.clone(), phi.profile.df.clone());
    let mut num = 0.0;
    let mut den = 0.0;
    for w in phi.pieces().windows(2) {
        let (a, b) = (w[0].ln(), w[1].ln());
        num += grid_integral_1d(|s| (e * s).exp() * df(s.exp()).abs().powf(p), a, b, 400)?;
        den += grid_integral_1d(|s| ((e - p) * s).exp() * f(s.exp()).abs().powf(p), a, b, 400)?;
    }
    Ok(num / den)
}

/// The sequence `u_j = d^{(p-Q-α)/p - 1/j} ψ_j(d)` with `ψ_j = 1` on
/// `[2^{-j}, 1]`, a quintic smoothstep on `[2^{-j-1}, 2^{-j}]` and `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSequenceSpec {
    pub j: u32,
    pub p: f64,
    /// `(p - Q - α)/p - 1/j`.
    pub exponent: f64,
    /// Continuity order of the cutoff.
    pub smoothness: u32,
}

impl SharpnessSequenceSpec {
    pub fn new(params: &OperatorParams, j: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidArgument("sharpness index j must be positive".into()));
        }
        hardy_constant(params)?;
        let (p, q_hom) = (params.p, params.homogeneous_dim());
        Ok(Self {
            j,
            p,
            exponent: (p - q_hom - params.alpha) / p - 1.0 / j as f64,
            smoothness: 2,
        })
    }

    /// Inner edge `2^{-j-1}` of the support.
    pub fn inner(&self) -> f64 {
        0.5f64.powi(self.j as i32 + 1)
    }

    /// The cutoff `ψ_j` with its derivatives.
    pub fn cutoff(&self, r: f64) -> Jet {
        let rho = self.inner();
        if r <= rho || r >= 2.0 {
            Jet::ZERO
        } else if r < 2.0 * rho {
            let s = smoothstep((r - rho) / rho);
            Jet {
                v: s.v,
                d: s.d / rho,
                dd: s.dd / (rho * rho),
            }
        } else if r <= 1.0 {
            Jet::constant(1.0)
        } else {
            let s = smoothstep(2.0 - r);
            Jet {
                v: s.v,
                d: -s.d,
                dd: s.dd,
            }
        }
    }

    /// Bound `C` in `|ψ_j'| ≤ C 2^j` on the inner band.
    pub fn derivative_bound(&self) -> f64 {
        2.0 * SMOOTHSTEP_SLOPE
    }

    pub fn test_function(&self) -> HardyTestFunction {
        let spec = *self;
        let b = self.exponent;
        let jet: Arc<JetFn> = Arc::new(move |r| {
            if r <= spec.inner() || r >= 2.0 {
                Jet::ZERO
            } else {
                Jet::var(r).powf(b).mul(spec.cutoff(r))
            }
        });
        let label = format!("u_{}", self.j);
        let rho = self.inner();
        HardyTestFunction::new(label.clone(), profile_from_jet(label, jet), (rho, 2.0))
            .expect("valid annulus")
            .with_knots(vec![2.0 * rho, 1.0])
    }

    /// `(∫ r^{α+Q-1}|u_j'|^p, ∫ r^{α+Q-p-1}|u_j|^p)` in scale-free form:
    /// both reduce to `∫ r^{-1-p/j}(…)` with the inner band written in the
    /// band variable, so large `j` does not underflow.
    pub fn radial_integrals(&self) -> Result<(f64, f64)> {
        let (p, b) = (self.p, self.exponent);
        let e = p / self.j as f64;
        let panels = 200;
        // [2^{-j}, 1]: ∫ r^{-1-e} dr = (2^p - 1)/e
        let mid = (2f64.powf(p) - 1.0) / e;
        let (mut lhs, mut rhs) = (b.abs().powf(p) * mid, mid);
        // inner band r = ρ(1+x): r ψ' = (1+x) S'(x), ρ^{-e} = 2^{p(j+1)/j}
        let scale = 2f64.powf(e * (self.j as f64 + 1.0));
        lhs += scale
            * grid_integral_1d(
                |x| {
                    let s = smoothstep(x);
                    (1.0 + x).powf(-1.0 - e) * (b * s.v + (1.0 + x) * s.d).abs().powf(p)
                },
                0.0,
                1.0,
                panels,
            )?;
        rhs += scale * grid_integral_1d(|x| (1.0 + x).powf(-1.0 - e) * smoothstep(x).v.powf(p), 0.0, 1.0, panels)?;
        // outer band r ∈ [1, 2]: ψ = S(2 - r)
        lhs += grid_integral_1d(
            |r| {
                let s = smoothstep(2.0 - r);
                r.powf(-1.0 - e) * (b * s.v - r * s.d).abs().powf(p)
            },
            1.0,
            2.0,
            panels,
        )?;
        rhs += grid_integral_1d(|r| r.powf(-1.0 - e) * smoothstep(2.0 - r).v.powf(p), 1.0, 2.0, panels)?;
        Ok((lhs, rhs))
    }

    /// Exact Rayleigh quotient of `u_j` from the 1-D reduction.
    pub fn exact_ratio(&self) -> Result<f64> {
        let (l, r) = self.radial_integrals()?;
        Ok(l / r)
    }
}

/// Least-squares fit of `y = A j + B + C/j + D/j²`; returns `(A, B, C, D)`.
pub fn fit_linear_growth(js: &[f64], ys: &[f64]) -> Result<(f64, f64, f64, f64)> {
    const N: usize = 4;
    if js.len() != ys.len() || js.len() < N {
        return Err(Error::InvalidArgument("slope fit needs at least four points".into()));
    }
    let mut a = [[0.0; N]; N];
    let mut rhs = [0.0; N];
    for (&j, &y) in js.iter().zip(ys) {
        let basis = [j, 1.0, 1.0 / j, 1.0 / (j * j)];
        for r in 0..N {
            rhs[r] += basis[r] * y;
            for c in 0..N {
                a[r][c] += basis[r] * basis[c];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty");
        a.swap(col, piv);
        rhs.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return Err(Error::InvalidArgument("singular slope fit".into()));
        }
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Ok((x[0], x[1], x[2], x[3]))
}

#[cfg(test)]
mod tests;
