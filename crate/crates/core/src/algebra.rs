//! Concrete H-type groups.
//!
//! An H-type algebra `V ⊕ 𝔱` is stored through its J-maps: for an orthonormal
//! basis `t_1, …, t_q` of the center, `J_i` is the skew `m × m` matrix with
//! `⟨J_i u, v⟩ = ⟨t_i, [u, v]⟩`. Everything downstream (bracket, group law,
//! the vector fields) only uses the relations `J_i^T = -J_i` and
//! `J_i J_j + J_j J_i = -2 δ_ij Id`, so any representation satisfying them is
//! as good as another.
//!
//! Sign conventions of the built-in families:
//!
//! * `heisenberg:n`: `m = 2n`, `q = 1`, `J_1 e_j = e_{n+j}`, `J_1 e_{n+j} = -e_j`.
//! * `quaternionic:n`: `m = 4n`, `q = 3`, `J_1, J_2, J_3` act on each block
//!   `R^4 ≅ ℍ` as left multiplication by `i`, `j`, `k`, so `J_1 J_2 = J_3`.
//!
//! The anisotropic dilation `δ_λ(z, t) = (λz, λ^{2k} t)` is a group
//! automorphism only for `k = 1`; for other `k` it is just the coordinate
//! scaling under which the operators are homogeneous.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating J-map relations.
pub const INVARIANT_TOL: f64 = 1e-12;

/// An H-type Lie algebra given by its J-maps (dense, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeAlgebra {
    m: usize,
    q: usize,
    j: Vec<Vec<f64>>,
}

/// A point `(z, t)` of the group in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
}

impl GroupPoint {
    pub fn new(z: Vec<f64>, t: Vec<f64>) -> Self {
        Self { z, t }
    }

    pub fn identity(m: usize, q: usize) -> Self {
        Self {
            z: vec![0.0; m],
            t: vec![0.0; q],
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            z: self.z.iter().map(|x| -x).collect(),
            t: self.t.iter().map(|x| -x).collect(),
        }
    }

    pub fn z_norm(&self) -> f64 {
        norm2(&self.z)
    }

    pub fn t_norm(&self) -> f64 {
        norm2(&self.t)
    }

    /// Flattened coordinates `(z_1, …, z_m, t_1, …, t_q)`.
    pub fn coords(&self) -> Vec<f64> {
        self.z.iter().chain(self.t.iter()).copied().collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            let a_rk = a[r * n + k];
            if a_rk == 0.0 {
                continue;
            }
            for col in 0..n {
                c[r * n + col] += a_rk * b[k * n + col];
            }
        }
    }
    c
}

impl HTypeAlgebra {
    /// Heisenberg algebra of `H^n` (`m = 2n`, `q = 1`).
    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let m = 2 * n;
        let mut j1 = vec![0.0; m * m];
        for a in 0..n {
            // column a is J e_a = e_{n+a}; column n+a is J e_{n+a} = -e_a
            j1[(n + a) * m + a] = 1.0;
            j1[a * m + (n + a)] = -1.0;
        }
        Ok(Self { m, q: 1, j: vec![j1] })
    }

    /// Quaternionic H-type algebra `ℍ^n ⊕ Im ℍ` (`m = 4n`, `q = 3`).
    pub fn quaternionic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        // left multiplication by i, j, k on a + b i + c j + d k
        const LI: [[f64; 4]; 4] = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        const LJ: [[f64; 4]; 4] = [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ];
        const LK: [[f64; 4]; 4] = [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ];
        let m = 4 * n;
        let j = [LI, LJ, LK]
            .iter()
            .map(|block| {
                let mut mat = vec![0.0; m * m];
                for b in 0..n {
                    for r in 0..4 {
                        for c in 0..4 {
                            mat[(4 * b + r) * m + 4 * b + c] = block[r][c];
                        }
                    }
                }
                mat
            })
            .collect();
        Ok(Self { m, q: 3, j })
    }

    /// Builds an algebra from explicit J-maps (each given as a list of rows),
    /// validating every H-type relation to [`INVARIANT_TOL`].
    pub fn from_j_matrices(mats: &[Vec<Vec<f64>>]) -> Result<Self> {
        let first = mats.first().ok_or(Error::NoMatrices)?;
        let m = first.len();
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut j = Vec::with_capacity(mats.len());
        for (idx, mat) in mats.iter().enumerate() {
            if mat.len() != m || mat.iter().any(|row| row.len() != m) {
                return Err(Error::NotSquare {
                    index: idx + 1,
                    expected: m,
                });
            }
            j.push(mat.iter().flatten().copied().collect::<Vec<_>>());
        }
        let alg = Self { m, q: mats.len(), j };
        alg.validate(INVARIANT_TOL)?;
        Ok(alg)
    }

    /// Resolves a catalog id: `heisenberg:<n>`, `quaternionic:<n>` or
    /// `custom:<file>`.
    pub fn from_catalog(id: &str) -> Result<Self> {
        let (kind, arg) = id.split_once(':').ok_or_else(|| Error::UnknownGroup(id.to_string()))?;
        let parse_n = || {
            arg.trim()
                .parse::<usize>()
                .map_err(|_| Error::UnknownGroup(id.to_string()))
        };
        match kind.trim() {
            "heisenberg" => Self::heisenberg(parse_n()?),
            "quaternionic" => Self::quaternionic(parse_n()?),
            "custom" => Self::from_matrix_file(Path::new(arg.trim())),
            _ => Err(Error::UnknownGroup(id.to_string())),
        }
    }

    pub fn from_matrix_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_j_matrices(&parse_matrix_list(&text)?)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Row-major entries of `J_i` (0-based `i`).
    pub fn j_matrix(&self, i: usize) -> &[f64] {
        &self.j[i]
    }

    /// Checks skewness, `J_i² = -Id` and anticommutation.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = self.m;
        for (i, a) in self.j.iter().enumerate() {
            let mut skew = 0.0f64;
            for r in 0..m {
                for c in 0..m {
                    skew = skew.max((a[r * m + c] + a[c * m + r]).abs());
                }
            }
            if skew > tol {
                return Err(Error::Skewness {
                    index: i + 1,
                    deviation: skew,
                });
            }
        }
        for i in 0..self.q {
            for jdx in i..self.q {
                let ab = matmul(&self.j[i], &self.j[jdx], m);
                let ba = matmul(&self.j[jdx], &self.j[i], m);
                let target = if i == jdx { -2.0 } else { 0.0 };
                let mut dev = 0.0f64;
                for r in 0..m {
                    for c in 0..m {
                        let want = if r == c { target } else { 0.0 };
                        dev = dev.max((ab[r * m + c] + ba[r * m + c] - want).abs());
                    }
                }
                if dev > tol {
                    return Err(if i == jdx {
                        Error::NotComplexStructure {
                            index: i + 1,
                            deviation: dev / 2.0,
                        }
                    } else {
                        Error::Anticommutation {
                            i: i + 1,
                            j: jdx + 1,
                            deviation: dev,
                        }
                    });
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, v: &[f64], expected: usize) -> Result<()> {
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn check_point(&self, g: &GroupPoint) -> Result<()> {
        self.check_len(&g.z, self.m)?;
        self.check_len(&g.t, self.q)
    }

    /// `J_i z` for 0-based `i`.
    pub fn apply_j(&self, i: usize, z: &[f64]) -> Vec<f64> {
        let m = self.m;
        let a = &self.j[i];
        (0..m).map(|r| dot(&a[r * m..(r + 1) * m], z)).collect()
    }

    /// `J_t z = Σ_i t_i J_i z`.
    pub fn apply_jt(&self, t: &[f64], z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (i, &ti) in t.iter().enumerate() {
            if ti == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.apply_j(i, z)) {
                *o += ti * v;
            }
        }
        out
    }

    /// `[u, v]` with components `⟨J_i u, v⟩`.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u, self.m)?;
        self.check_len(v, self.m)?;
        Ok((0..self.q).map(|i| dot(&self.apply_j(i, u), v)).collect())
    }

    /// `(u, t)(v, s) = (u + v, t + s + ½[u, v])`.
    pub fn product(&self, g: &GroupPoint, h: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(g)?;
        self.check_point(h)?;
        let br = self.bracket(&g.z, &h.z)?;
        Ok(GroupPoint {
            z: g.z.iter().zip(&h.z).map(|(a, b)| a + b).collect(),
            t: g.t
                .iter()
                .zip(&h.t)
                .zip(&br)
                .map(|((a, b), c)| a + b + 0.5 * c)
                .collect(),
        })
    }
}

/// Parses a plain-text list of square matrices: rows are whitespace-separated
/// numbers, matrices are separated by blank lines, `#` starts a comment.
pub fn parse_matrix_list(text: &str) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut mats = Vec::new();
    let mut current: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !current.is_empty() {
                mats.push(std::mem::take(&mut current));
            }
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{tok}'", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        current.push(row);
    }
    if !current.is_empty() {
        mats.push(current);
    }
    if mats.is_empty() {
        return Err(Error::NoMatrices);
    }
    Ok(mats)
}

/// The parameter tuple `(k, p, α, β)` together with the group dimensions and
/// the homogeneous dimension `Q = m + 2kq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub k: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    m: usize,
    q: usize,
}

impl OperatorParams {
    pub fn new(alg: &HTypeAlgebra, k: f64, p: f64) -> Result<Self> {
        Self::for_dims(alg.m(), alg.q(), k, p)
    }

    pub fn for_dims(m: usize, q: usize, k: f64, p: f64) -> Result<Self> {
        if m == 0 || q == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::KBelowOne(k));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::PNotAboveOne(p));
        }
        Ok(Self {
            k,
            p,
            alpha: 0.0,
            beta: 0.0,
            m,
            q,
        })
    }

    /// Attaches the weight exponents of `w = d^α |∇_X d|^β`, enforcing the
    /// ranges under which the weighted fundamental solution exists.
    pub fn with_weight(mut self, alpha: f64, beta: f64) -> Result<Self> {
        let alpha_bound = -self.homogeneous_dim();
        if !(alpha > alpha_bound) {
            return Err(Error::AlphaRange {
                alpha,
                bound: alpha_bound,
            });
        }
        let beta_bound = self.beta_lower_bound();
        if !(beta > beta_bound) {
            return Err(Error::BetaRange {
                beta,
                bound: beta_bound,
            });
        }
        self.alpha = alpha;
        self.beta = beta;
        Ok(self)
    }

    /// Same parameters with a different `p`.
    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::PNotAboveOne(p));
        }
        self.p = p;
        Ok(self)
    }

    pub fn beta_lower_bound(&self) -> f64 {
        let k = self.k;
        let q_hom = self.homogeneous_dim();
        ((1.0 - q_hom) / (4.0 * k - 1.0)).max(-(self.m as f64) / (2.0 * k - 1.0) - 1.0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `Q = m + 2kq`.
    pub fn homogeneous_dim(&self) -> f64 {
        self.m as f64 + 2.0 * self.k * self.q as f64
    }

    /// `δ_λ(z, t) = (λz, λ^{2k} t)`.
    pub fn dilate(&self, g: &GroupPoint, lambda: f64) -> Result<GroupPoint> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositive {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(self.dilate_unchecked(g, lambda))
    }

    pub(crate) fn dilate_unchecked(&self, g: &GroupPoint, lambda: f64) -> GroupPoint {
        let s = lambda.powf(2.0 * self.k);
        GroupPoint {
            z: g.z.iter().map(|x| lambda * x).collect(),
            t: g.t.iter().map(|x| s * x).collect(),
        }
    }

    /// `d^{4k} = |z|^{4k} + 16|t|²`.
    pub fn norm_pow4k(&self, g: &GroupPoint) -> f64 {
        let z2 = dot(&g.z, &g.z);
        let t2 = dot(&g.t, &g.t);
        z2.powf(2.0 * self.k) + 16.0 * t2
    }

    /// Homogeneous norm `d(z, t) = (|z|^{4k} + 16|t|²)^{1/4k}`.
    pub fn norm(&self, g: &GroupPoint) -> f64 {
        self.norm_pow4k(g).powf(0.25 / self.k)
    }

    /// Regularized norm `d_ε = (d^{4k} + ε^{4k})^{1/4k}`.
    pub fn norm_eps(&self, g: &GroupPoint, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::NonPositive {
                name: "eps",
                value: eps,
            });
        }
        Ok((self.norm_pow4k(g) + eps.powf(4.0 * self.k)).powf(0.25 / self.k))
    }
}
