//! The vector fields `X_j = ∂_j + ½ k |z|^{2k-2} ∂_{[z, e_j]}`, horizontal
//! gradient and divergence, and the (weighted) degenerate p-Laplacian.
//!
//! Derivatives come from a [`DiffBackend`]: with [`DiffMode::Analytic`] the
//! Euclidean partials of a [`ScalarField`] are taken from its analytic
//! gradient when it carries one, otherwise (and always with
//! [`DiffMode::CentralFd`]) from central differences with step `h1`. The
//! outer divergence of a flux is always a central difference with step `h2`.
//!
//! For non-integer `k` the coefficient `|z|^{2k-2}` is not smooth on
//! `{z = 0}`. Evaluations closer than [`SINGULAR_RADIUS`] to that set still
//! compute a value but return it inside [`Error::NearSingular`].

mod corpus;

use std::fmt;
use std::sync::Arc;

pub use corpus::*;

use crate::algebra::{dot, norm2, GroupPoint, HTypeAlgebra, OperatorParams};
use crate::error::{Error, Result};

/// Exclusion radius around `{z = 0}` for non-integer `k`.
pub const SINGULAR_RADIUS: f64 = 1e-6;

/// Below this `|∇_X f|` the flux is treated as degenerate when `p < 2`.
pub const DEGENERATE_GRAD: f64 = 1e-10;

pub type EvalFn = dyn Fn(&GroupPoint) -> f64 + Send + Sync;
pub type GradFn = dyn Fn(&GroupPoint) -> Vec<f64> + Send + Sync;
pub type VectorFn = dyn Fn(&GroupPoint) -> Vec<f64> + Send + Sync;
pub type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A real function on the group, optionally with its Euclidean gradient
/// `(∂/∂z_1, …, ∂/∂z_m, ∂/∂t_1, …, ∂/∂t_q)`.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("analytic_grad", &self.grad.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            grad: None,
            label: label.into(),
        }
    }

    pub fn with_grad<F, G>(label: impl Into<String>, eval: F, grad: G) -> Self
    where
        F: Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
        G: Fn(&GroupPoint) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            grad: Some(Arc::new(grad)),
            label: label.into(),
        }
    }

    /// Drops the analytic gradient, forcing finite differences.
    pub fn without_grad(&self) -> Self {
        Self {
            eval: self.eval.clone(),
            grad: None,
            label: self.label.clone(),
        }
    }

    pub fn eval(&self, g: &GroupPoint) -> f64 {
        (self.eval)(g)
    }

    pub fn euclid_grad(&self, g: &GroupPoint) -> Option<Vec<f64>> {
        self.grad.as_ref().map(|gr| gr(g))
    }

    pub fn has_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.eval.clone();
        let grad = self.grad.clone().map(|gr| {
            Arc::new(move |g: &GroupPoint| gr(g).into_iter().map(|x| c * x).collect::<Vec<_>>()) as Arc<GradFn>
        });
        Self {
            eval: Arc::new(move |g| c * f(g)),
            grad,
            label: format!("{c}*({})", self.label),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        let (f1, f2) = (self.eval.clone(), other.eval.clone());
        let grad = match (self.grad.clone(), other.grad.clone()) {
            (Some(g1), Some(g2)) => Some(Arc::new(move |g: &GroupPoint| {
                g1(g).into_iter().zip(g2(g)).map(|(a, b)| a + b).collect::<Vec<_>>()
            }) as Arc<GradFn>),
            _ => None,
        };
        Self {
            eval: Arc::new(move |g| f1(g) + f2(g)),
            grad,
            label: format!("({}) + ({})", self.label, other.label),
        }
    }
}

/// A horizontal vector field `(F_1, …, F_m)`, evaluated all components at once.
#[derive(Clone)]
pub struct HorizontalVectorField {
    components: Arc<VectorFn>,
    dim: usize,
}

impl HorizontalVectorField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&GroupPoint) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            components: Arc::new(f),
            dim,
        }
    }

    /// Builds the field from `m` scalar component functions.
    pub fn from_components(parts: Vec<Arc<EvalFn>>) -> Self {
        let dim = parts.len();
        Self::new(dim, move |g| parts.iter().map(|f| f(g)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, g: &GroupPoint) -> Vec<f64> {
        (self.components)(g)
    }
}

/// A real profile `f` on `(0, ∞)` with its first two derivatives.
#[derive(Clone)]
pub struct Profile {
    pub f: Arc<RealFn>,
    pub df: Arc<RealFn>,
    pub d2f: Arc<RealFn>,
    pub label: String,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.label)
    }
}

impl Profile {
    pub fn new<F, D, D2>(label: impl Into<String>, f: F, df: D, d2f: D2) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
            label: label.into(),
        }
    }

    /// `x ↦ x^a`.
    pub fn power(a: f64) -> Self {
        Self::new(
            format!("x^{a}"),
            move |x| x.powf(a),
            move |x| a * x.powf(a - 1.0),
            move |x| a * (a - 1.0) * x.powf(a - 2.0),
        )
    }

    /// `x ↦ log(1/x)`.
    pub fn log_inv() -> Self {
        Self::new("log(1/x)", |x| -x.ln(), |x| -1.0 / x, |x| 1.0 / (x * x))
    }

    /// `x ↦ c·exp(-b x)`.
    pub fn exp_decay(c: f64, b: f64) -> Self {
        Self::new(
            format!("{c}*exp(-{b}x)"),
            move |x| c * (-b * x).exp(),
            move |x| -b * c * (-b * x).exp(),
            move |x| b * b * c * (-b * x).exp(),
        )
    }

    /// `x ↦ log(1 + c x)`.
    pub fn log1p(c: f64) -> Self {
        Self::new(
            format!("log(1+{c}x)"),
            move |x| (c * x).ln_1p(),
            move |x| c / (1.0 + c * x),
            move |x| -c * c / ((1.0 + c * x) * (1.0 + c * x)),
        )
    }

    /// `x ↦ atan(c x)`.
    pub fn arctan(c: f64) -> Self {
        Self::new(
            format!("atan({c}x)"),
            move |x| (c * x).atan(),
            move |x| c / (1.0 + c * c * x * x),
            move |x| {
                let u = 1.0 + c * c * x * x;
                -2.0 * c * c * c * x / (u * u)
            },
        )
    }

    /// `x ↦ a x + b x³`.
    pub fn cubic(a: f64, b: f64) -> Self {
        Self::new(
            format!("{a}x+{b}x^3"),
            move |x| a * x + b * x * x * x,
            move |x| a + 3.0 * b * x * x,
            move |x| 6.0 * b * x,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    /// Use the field's analytic Euclidean gradient when present.
    Analytic,
    /// Always use central differences.
    CentralFd,
}

/// How finite-difference steps are scaled at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `h·(1 + |x_i|)` per coordinate.
    Coordinate,
    /// `h·s` on z-coordinates and `h·s^{2k}` on t-coordinates with
    /// `s = d(g)`, so relative truncation error is dilation invariant.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffBackend {
    pub mode: DiffMode,
    pub h1: f64,
    pub h2: f64,
    pub step_rule: StepRule,
}

impl Default for DiffBackend {
    fn default() -> Self {
        Self::analytic()
    }
}

impl DiffBackend {
    pub const DEFAULT_H1: f64 = 6e-6;
    pub const DEFAULT_H2: f64 = 1e-4;

    pub fn analytic() -> Self {
        Self {
            mode: DiffMode::Analytic,
            h1: Self::DEFAULT_H1,
            h2: Self::DEFAULT_H2,
            step_rule: StepRule::Homogeneous,
        }
    }

    pub fn central_fd() -> Self {
        Self {
            mode: DiffMode::CentralFd,
            ..Self::analytic()
        }
    }

    pub fn with_steps(mut self, h1: f64, h2: f64) -> Result<Self> {
        for (name, v) in [("h1", h1), ("h2", h2)] {
            if !(v > 0.0) {
                return Err(Error::NonPositive { name, value: v });
            }
        }
        self.h1 = h1;
        self.h2 = h2;
        Ok(self)
    }

    pub fn with_step_rule(mut self, rule: StepRule) -> Self {
        self.step_rule = rule;
        self
    }

    /// Per-coordinate steps at `g` for base step `h`.
    fn steps(&self, params: &OperatorParams, g: &GroupPoint, h: f64) -> Vec<f64> {
        match self.step_rule {
            StepRule::Coordinate => g.coords().iter().map(|x| h * (1.0 + x.abs())).collect(),
            StepRule::Homogeneous => {
                let s = params.norm(g).max(f64::MIN_POSITIVE.sqrt());
                let hz = h * s;
                let ht = h * s.powf(2.0 * params.k);
                g.z.iter().map(|_| hz).chain(g.t.iter().map(|_| ht)).collect()
            }
        }
    }
}

/// Shifts coordinate `i` of the flattened `(z, t)` vector by `delta`.
fn shifted(g: &GroupPoint, i: usize, delta: f64) -> GroupPoint {
    let mut out = g.clone();
    let m = g.z.len();
    if i < m {
        out.z[i] += delta;
    } else {
        out.t[i - m] += delta;
    }
    out
}

fn coord(g: &GroupPoint, i: usize) -> f64 {
    let m = g.z.len();
    if i < m {
        g.z[i]
    } else {
        g.t[i - m]
    }
}

/// Central difference of a vector-valued function along coordinate `i`.
fn central_diff_vec<F>(f: &F, g: &GroupPoint, i: usize, h: f64) -> Vec<f64>
where
    F: Fn(&GroupPoint) -> Vec<f64> + ?Sized,
{
    let plus = shifted(g, i, h);
    let minus = shifted(g, i, -h);
    let width = coord(&plus, i) - coord(&minus, i);
    f(&plus)
        .into_iter()
        .zip(f(&minus))
        .map(|(a, b)| (a - b) / width)
        .collect()
}

/// The X-fields of an H-type group for fixed parameters and backend.
#[derive(Debug, Clone, Copy)]
pub struct VectorFields<'a> {
    pub alg: &'a HTypeAlgebra,
    pub params: &'a OperatorParams,
    pub backend: DiffBackend,
}

impl<'a> VectorFields<'a> {
    pub fn new(alg: &'a HTypeAlgebra, params: &'a OperatorParams, backend: DiffBackend) -> Self {
        Self { alg, params, backend }
    }

    /// `½ k |z|^{2k-2}`, the coefficient in front of the central derivative.
    pub fn central_coeff(&self, z: &[f64]) -> f64 {
        let k = self.params.k;
        0.5 * k * dot(z, z).powf(k - 1.0)
    }

    fn near_singular(&self, g: &GroupPoint) -> bool {
        self.params.k.fract() != 0.0 && g.z_norm() < SINGULAR_RADIUS
    }

    fn flag(&self, g: &GroupPoint, value: f64) -> Result<f64> {
        if self.near_singular(g) {
            Err(Error::NearSingular { value })
        } else {
            Ok(value)
        }
    }

    /// Euclidean gradient of `f` at `g` through the backend.
    pub fn euclid_grad(&self, f: &ScalarField, g: &GroupPoint) -> Vec<f64> {
        if self.backend.mode == DiffMode::Analytic {
            if let Some(gr) = f.euclid_grad(g) {
                return gr;
            }
        }
        let steps = self.backend.steps(self.params, g, self.backend.h1);
        let scalar = |x: &GroupPoint| vec![f.eval(x)];
        steps
            .iter()
            .enumerate()
            .map(|(i, &h)| central_diff_vec(&scalar, g, i, h)[0])
            .collect()
    }

    /// Assembles `∇_X` from Euclidean partials:
    /// `X_j f = ∂_{z_j} f + ½k|z|^{2k-2} Σ_i (J_i z)_j ∂_{t_i} f`.
    pub fn assemble(&self, g: &GroupPoint, egrad: &[f64]) -> Vec<f64> {
        let m = self.alg.m();
        let c = self.central_coeff(&g.z);
        let dt = &egrad[m..];
        let jtz = self.alg.apply_jt(dt, &g.z);
        egrad[..m].iter().zip(jtz).map(|(dz, j)| dz + c * j).collect()
    }

    fn raw_gradient(&self, f: &ScalarField, g: &GroupPoint) -> Vec<f64> {
        let egrad = self.euclid_grad(f, g);
        self.assemble(g, &egrad)
    }

    /// `X_j f(g)` for 0-based `j`.
    pub fn apply_x(&self, f: &ScalarField, g: &GroupPoint, j: usize) -> Result<f64> {
        self.alg.check_point(g)?;
        if j >= self.alg.m() {
            return Err(Error::IndexOutOfRange {
                index: j + 1,
                len: self.alg.m(),
            });
        }
        let v = self.raw_gradient(f, g)[j];
        self.flag(g, v)
    }

    /// `∇_X f(g) = (X_1 f, …, X_m f)`.
    pub fn horizontal_gradient(&self, f: &ScalarField, g: &GroupPoint) -> Result<Vec<f64>> {
        self.alg.check_point(g)?;
        let grad = self.raw_gradient(f, g);
        if self.near_singular(g) {
            return Err(Error::NearSingular { value: norm2(&grad) });
        }
        Ok(grad)
    }

    /// `div_X F = Σ_j X_j F_j`, by central differences with step `h2`.
    pub fn horizontal_divergence(&self, field: &HorizontalVectorField, g: &GroupPoint) -> Result<f64> {
        self.alg.check_point(g)?;
        if field.dim() != self.alg.m() {
            return Err(Error::DimensionMismatch {
                expected: self.alg.m(),
                found: field.dim(),
            });
        }
        let f = |x: &GroupPoint| field.eval(x);
        let v = self.divergence_of(&f, g);
        self.flag(g, v)
    }

    fn divergence_of<F>(&self, f: &F, g: &GroupPoint) -> f64
    where
        F: Fn(&GroupPoint) -> Vec<f64> + ?Sized,
    {
        let m = self.alg.m();
        let q = self.alg.q();
        let steps = self.backend.steps(self.params, g, self.backend.h2);
        // ∂_{z_j} F_j
        let mut div: f64 = (0..m).map(|j| central_diff_vec(f, g, j, steps[j])[j]).sum();
        // ½k|z|^{2k-2} Σ_i Σ_j (J_i z)_j ∂_{t_i} F_j
        let c = self.central_coeff(&g.z);
        if c != 0.0 {
            let mut central = 0.0;
            for i in 0..q {
                let dfi = central_diff_vec(f, g, m + i, steps[m + i]);
                central += dot(&self.alg.apply_j(i, &g.z), &dfi);
            }
            div += c * central;
        }
        div
    }

    /// `|∇_X f|^{p-2} ∇_X f`, continued by zero where the gradient vanishes.
    fn flux(&self, f: &ScalarField, weight: Option<&ScalarField>, x: &GroupPoint) -> Vec<f64> {
        let grad = self.raw_gradient(f, x);
        let norm = norm2(&grad);
        let p = self.params.p;
        let mut scale = if norm == 0.0 { 0.0 } else { norm.powf(p - 2.0) };
        if let Some(w) = weight {
            scale *= w.eval(x);
        }
        grad.into_iter().map(|v| v * scale).collect()
    }

    fn laplacian_impl(&self, f: &ScalarField, weight: Option<&ScalarField>, g: &GroupPoint) -> Result<f64> {
        self.alg.check_point(g)?;
        let flux = |x: &GroupPoint| self.flux(f, weight, x);
        let value = self.divergence_of(&flux, g);
        if self.near_singular(g) {
            return Err(Error::NearSingular { value });
        }
        if self.params.p < 2.0 && norm2(&self.raw_gradient(f, g)) < DEGENERATE_GRAD {
            return Err(Error::DegenerateFlux { value });
        }
        Ok(value)
    }

    /// `L_{p,k} f = div_X(|∇_X f|^{p-2} ∇_X f)` by nested differentiation.
    pub fn p_laplacian(&self, f: &ScalarField, g: &GroupPoint) -> Result<f64> {
        self.laplacian_impl(f, None, g)
    }

    /// The weight `w = d^α |∇_X d|^β`, with `|∇_X d|` computed through the
    /// fields from the analytic Euclidean gradient of `d`.
    pub fn weight_field(&self) -> ScalarField {
        let params = *self.params;
        let alg = self.alg.clone();
        let (alpha, beta) = (params.alpha, params.beta);
        let d = norm_field(&params);
        ScalarField::new(format!("d^{alpha}|grad d|^{beta}"), move |x| {
            let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
            let gd = norm2(&fields.raw_gradient(&d, x));
            params.norm(x).powf(alpha) * gd.powf(beta)
        })
    }

    /// `L_{p,k,w} f = div_X(w |∇_X f|^{p-2} ∇_X f)`, `w = d^α |∇_X d|^β`.
    pub fn weighted_p_laplacian(&self, f: &ScalarField, g: &GroupPoint) -> Result<f64> {
        let params = self.params.with_weight(self.params.alpha, self.params.beta)?;
        if params.alpha == 0.0 && params.beta == 0.0 {
            return self.p_laplacian(f, g);
        }
        let weight = self.weight_field();
        let value = self.laplacian_impl(f, Some(&weight), g)?;
        let singular = params.norm(g) < SINGULAR_RADIUS || (params.beta != 0.0 && g.z_norm() < SINGULAR_RADIUS);
        if singular {
            return Err(Error::NearSingular { value });
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests;
