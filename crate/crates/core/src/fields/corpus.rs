//! Scalar fields with analytic Euclidean gradients: coordinates, Gaussians,
//! monomials and functions of the (regularized) homogeneous norm.

use super::{Profile, ScalarField};
use crate::algebra::{dot, GroupPoint, OperatorParams};

pub fn constant(c: f64) -> ScalarField {
    ScalarField::with_grad(
        format!("{c}"),
        move |_| c,
        |g: &GroupPoint| vec![0.0; g.z.len() + g.t.len()],
    )
}

/// The coordinate `z_i` (0-based).
pub fn z_coord(i: usize) -> ScalarField {
    ScalarField::with_grad(
        format!("z_{}", i + 1),
        move |g| g.z[i],
        move |g: &GroupPoint| {
            let mut v = vec![0.0; g.z.len() + g.t.len()];
            v[i] = 1.0;
            v
        },
    )
}

/// The coordinate `t_i` (0-based).
pub fn t_coord(i: usize) -> ScalarField {
    ScalarField::with_grad(
        format!("t_{}", i + 1),
        move |g| g.t[i],
        move |g: &GroupPoint| {
            let mut v = vec![0.0; g.z.len() + g.t.len()];
            v[g.z.len() + i] = 1.0;
            v
        },
    )
}

/// `exp(-a|z|² - b|t|²)`.
pub fn gaussian(a: f64, b: f64) -> ScalarField {
    let val = move |g: &GroupPoint| (-a * dot(&g.z, &g.z) - b * dot(&g.t, &g.t)).exp();
    ScalarField::with_grad(format!("exp(-{a}|z|^2-{b}|t|^2)"), val, move |g| {
        let f = val(g);
        g.z.iter()
            .map(|z| -2.0 * a * z * f)
            .chain(g.t.iter().map(|t| -2.0 * b * t * f))
            .collect()
    })
}

/// `c · Π x_i^{e_i}` over the flattened coordinates `(z, t)`.
pub fn monomial(c: f64, exponents: Vec<u32>) -> ScalarField {
    let label = format!("{c}*x^{exponents:?}");
    let ex = exponents.clone();
    let val = move |g: &GroupPoint| {
        c * g
            .coords()
            .iter()
            .zip(&ex)
            .map(|(x, &e)| x.powi(e as i32))
            .product::<f64>()
    };
    ScalarField::with_grad(label, val, move |g| {
        let x = g.coords();
        (0..x.len())
            .map(|i| {
                if exponents[i] == 0 {
                    return 0.0;
                }
                c * x
                    .iter()
                    .zip(&exponents)
                    .enumerate()
                    .map(|(l, (xl, &e))| {
                        if l == i {
                            e as f64 * xl.powi(e as i32 - 1)
                        } else {
                            xl.powi(e as i32)
                        }
                    })
                    .product::<f64>()
            })
            .collect()
    })
}

/// Euclidean gradient of `d_ε` (with `ε = 0` giving `d`):
/// `∂_z d_ε = d_ε^{1-4k}|z|^{4k-2} z`, `∂_t d_ε = 8 d_ε^{1-4k} t / k`.
pub fn norm_eps_euclid_grad(params: &OperatorParams, g: &GroupPoint, eps: f64) -> Vec<f64> {
    let k = params.k;
    let d4k = params.norm_pow4k(g) + eps.powf(4.0 * k);
    if d4k == 0.0 {
        return vec![0.0; g.z.len() + g.t.len()];
    }
    let de = d4k.powf(0.25 / k);
    let lead = de / d4k; // d_ε^{1-4k}
    let z2 = dot(&g.z, &g.z);
    let zc = lead * z2.powf(2.0 * k - 1.0);
    g.z.iter()
        .map(|z| zc * z)
        .chain(g.t.iter().map(|t| 8.0 * lead * t / k))
        .collect()
}

/// The homogeneous norm `d`.
pub fn norm_field(params: &OperatorParams) -> ScalarField {
    let p1 = *params;
    let p2 = *params;
    ScalarField::with_grad("d", move |g| p1.norm(g), move |g| norm_eps_euclid_grad(&p2, g, 0.0))
}

/// The regularized norm `d_ε`.
pub fn norm_eps_field(params: &OperatorParams, eps: f64) -> ScalarField {
    profile_of_norm(params, &Profile::power(1.0), eps)
}

/// `d_ε^{4k} = |z|^{4k} + 16|t|² + ε^{4k}`.
pub fn norm_eps_pow4k_field(params: &OperatorParams, eps: f64) -> ScalarField {
    let p1 = *params;
    let k = params.k;
    let e4k = eps.powf(4.0 * k);
    ScalarField::with_grad(
        format!("d_{eps}^4k"),
        move |g| p1.norm_pow4k(g) + e4k,
        move |g| {
            let z2 = dot(&g.z, &g.z);
            let c = 4.0 * k * z2.powf(2.0 * k - 1.0);
            g.z.iter().map(|z| c * z).chain(g.t.iter().map(|t| 32.0 * t)).collect()
        },
    )
}

/// `f ∘ d_ε` for a profile `f` (`ε = 0` allowed, giving `f ∘ d`).
pub fn profile_of_norm(params: &OperatorParams, profile: &Profile, eps: f64) -> ScalarField {
    let p1 = *params;
    let p2 = *params;
    let k = params.k;
    let e4k = if eps == 0.0 { 0.0 } else { eps.powf(4.0 * k) };
    let f = profile.f.clone();
    let df = profile.df.clone();
    ScalarField::with_grad(
        format!("{}(d_{eps})", profile.label),
        move |g| f((p1.norm_pow4k(g) + e4k).powf(0.25 / k)),
        move |g| {
            let de = (p2.norm_pow4k(g) + e4k).powf(0.25 / k);
            let s = df(de);
            norm_eps_euclid_grad(&p2, g, eps).into_iter().map(|v| s * v).collect()
        },
    )
}

/// `d^a`.
pub fn norm_power(params: &OperatorParams, a: f64) -> ScalarField {
    profile_of_norm(params, &Profile::power(a), 0.0)
}
