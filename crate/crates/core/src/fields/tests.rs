use super::*;
use crate::closedform::{grad_d_eps_sq, lap_d4k, lap_d_eps, psi};
use crate::verify::sample_points;

fn heis(k: f64, p: f64) -> (HTypeAlgebra, OperatorParams) {
    let alg = HTypeAlgebra::heisenberg(1).unwrap();
    let params = OperatorParams::new(&alg, k, p).unwrap();
    (alg, params)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn catalog() -> Vec<HTypeAlgebra> {
    vec![
        HTypeAlgebra::heisenberg(1).unwrap(),
        HTypeAlgebra::heisenberg(2).unwrap(),
        HTypeAlgebra::quaternionic(1).unwrap(),
    ]
}

#[test]
fn x_of_central_coordinate() {
    let (alg, params) = heis(1.0, 2.0);
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let g = GroupPoint::new(vec![1.0, 0.0], vec![0.0]);
    let je1 = alg.apply_j(0, &[1.0, 0.0]);
    let v = fields.apply_x(&t_coord(0), &g, 1).unwrap();
    assert!((v - 0.5 * je1[1]).abs() < 1e-15);
    assert_eq!(v.abs(), 0.5);
    let fd = VectorFields::new(&alg, &params, DiffBackend::central_fd());
    assert!((fd.apply_x(&t_coord(0).without_grad(), &g, 1).unwrap() - v).abs() < 1e-9);
}

#[test]
fn x_of_horizontal_coordinate() {
    let alg = HTypeAlgebra::quaternionic(1).unwrap();
    let params = OperatorParams::new(&alg, 2.0, 2.0).unwrap();
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let g = GroupPoint::new(vec![0.3, -1.2, 0.5, 2.0], vec![0.1, 0.2, -0.7]);
    for j in 0..4 {
        for i in 0..4 {
            let v = fields.apply_x(&z_coord(i), &g, j).unwrap();
            assert_eq!(v, if i == j { 1.0 } else { 0.0 });
        }
    }
    assert!(matches!(
        fields.apply_x(&z_coord(0), &g, 4),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn x_of_norm_power() {
    for alg in catalog() {
        for k in [1.0, 1.5, 2.0] {
            let params = OperatorParams::new(&alg, k, 2.0).unwrap();
            let fields = VectorFields::new(&alg, &params, DiffBackend::central_fd());
            let f = norm_eps_pow4k_field(&params, 0.5).without_grad();
            for g in sample_points(&alg, &params, 20, (0.2, 3.0), 11).unwrap() {
                let z2 = dot(&g.z, &g.z);
                let jtz = alg.apply_jt(&g.t, &g.z);
                for j in 0..alg.m() {
                    let expect = 4.0 * k * z2.powf(2.0 * k - 1.0) * g.z[j] + 16.0 * k * z2.powf(k - 1.0) * jtz[j];
                    let got = fields.apply_x(&f, &g, j).unwrap();
                    let scale = 4.0 * k * params.norm_pow4k(&g) / params.norm(&g);
                    assert!((got - expect).abs() <= 1e-7 * scale, "{got} vs {expect}");
                }
            }
        }
    }
}

#[test]
fn gradient_examples() {
    let alg = HTypeAlgebra::heisenberg(2).unwrap();
    let params = OperatorParams::new(&alg, 1.5, 2.0).unwrap();
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let g = GroupPoint::new(vec![0.4, -0.3, 1.1, 0.2], vec![0.6]);
    assert!(fields
        .horizontal_gradient(&constant(3.0), &g)
        .unwrap()
        .iter()
        .all(|v| *v == 0.0));

    let f = z_coord(0).add(&t_coord(0));
    let grad = fields.horizontal_gradient(&f, &g).unwrap();
    let c = 0.5 * params.k * dot(&g.z, &g.z).powf(params.k - 1.0);
    let jz = alg.apply_j(0, &g.z);
    for j in 0..4 {
        let e = if j == 0 { 1.0 } else { 0.0 };
        assert!((grad[j] - (e + c * jz[j])).abs() < 1e-14);
    }

    for eps in [1.0, 0.1] {
        let de = norm_eps_field(&params, eps);
        let grad = fields.horizontal_gradient(&de, &g).unwrap();
        let got = dot(&grad, &grad);
        assert!(rel(got, grad_d_eps_sq(&params, &g, eps).unwrap()) < 1e-12);
    }
}

#[test]
fn gradient_is_linear() {
    let (alg, params) = heis(2.0, 2.0);
    let fields = VectorFields::new(&alg, &params, DiffBackend::central_fd());
    let f = gaussian(0.7, 1.3);
    let h = monomial(1.0, vec![2, 1, 1]);
    let comb = f.scale(2.0).add(&h.scale(-0.5));
    for g in sample_points(&alg, &params, 10, (0.3, 2.0), 2).unwrap() {
        let a = fields.horizontal_gradient(&f, &g).unwrap();
        let b = fields.horizontal_gradient(&h, &g).unwrap();
        let c = fields.horizontal_gradient(&comb, &g).unwrap();
        for j in 0..2 {
            assert!((c[j] - (2.0 * a[j] - 0.5 * b[j])).abs() < 1e-8 * (1.0 + c[j].abs()));
        }
    }
}

#[test]
fn divergence_examples() {
    for alg in catalog() {
        for k in [1.0, 1.5, 2.0] {
            let params = OperatorParams::new(&alg, k, 2.0).unwrap();
            let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
            let m = alg.m();
            let konst = HorizontalVectorField::new(m, |g| vec![1.5; g.z.len()]);
            let f = norm_eps_pow4k_field(&params, 1.0);
            let grad_field = {
                let (alg, params, f) = (alg.clone(), params, f.clone());
                HorizontalVectorField::new(m, move |g| {
                    VectorFields::new(&alg, &params, DiffBackend::analytic())
                        .horizontal_gradient(&f, g)
                        .unwrap()
                })
            };
            for g in sample_points(&alg, &params, 10, (0.1, 10.0), 3).unwrap() {
                let dc = fields.horizontal_divergence(&konst, &g).unwrap();
                assert!(dc.abs() < 1e-9, "{dc}");
                let got = fields.horizontal_divergence(&grad_field, &g).unwrap();
                assert!(rel(got, lap_d4k(&params, &g)) < 1e-5, "k={k}");
            }
        }
    }
}

#[test]
fn divergence_is_linear_and_checks_dimension() {
    let alg = HTypeAlgebra::heisenberg(1).unwrap();
    let params = OperatorParams::new(&alg, 1.0, 2.0).unwrap();
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let a = HorizontalVectorField::new(2, |g| vec![g.z[0] * g.t[0], (g.z[1] + g.t[0]).sin()]);
    let b = HorizontalVectorField::new(2, |g| vec![(g.t[0] * g.z[1]).cos(), g.z[0].powi(3)]);
    let (a2, b2) = (a.clone(), b.clone());
    let sum = HorizontalVectorField::new(2, move |g| {
        a2.eval(g).into_iter().zip(b2.eval(g)).map(|(x, y)| x + y).collect()
    });
    for g in sample_points(&alg, &params, 20, (0.3, 3.0), 8).unwrap() {
        let lhs = fields.horizontal_divergence(&sum, &g).unwrap();
        let rhs = fields.horizontal_divergence(&a, &g).unwrap() + fields.horizontal_divergence(&b, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
    let wrong = HorizontalVectorField::new(3, |_| vec![0.0; 3]);
    let g = GroupPoint::new(vec![1.0, 0.0], vec![0.0]);
    assert!(matches!(
        fields.horizontal_divergence(&wrong, &g),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn leibniz_rule() {
    // div(φF) = <∇_X φ, F> + φ div F
    for alg in catalog() {
        let params = OperatorParams::new(&alg, 1.5, 2.0).unwrap();
        let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
        let m = alg.m();
        let phi = gaussian(0.3, 0.2);
        let field = HorizontalVectorField::new(m, move |g| {
            (0..m)
                .map(|j| (g.z[j] + g.t[j % g.t.len()]).sin() + 0.1 * j as f64)
                .collect()
        });
        let (phi2, field2) = (phi.clone(), field.clone());
        let product = HorizontalVectorField::new(m, move |g| {
            let s = phi2.eval(g);
            field2.eval(g).into_iter().map(|v| s * v).collect()
        });
        for g in sample_points(&alg, &params, 20, (0.2, 2.0), 5).unwrap() {
            let lhs = fields.horizontal_divergence(&product, &g).unwrap();
            let gphi = fields.horizontal_gradient(&phi, &g).unwrap();
            let rhs = dot(&gphi, &field.eval(&g)) + phi.eval(&g) * fields.horizontal_divergence(&field, &g).unwrap();
            let scale = dot(&gphi, &gphi).sqrt() * norm2(&field.eval(&g)) + rhs.abs();
            assert!((lhs - rhs).abs() <= 1e-5 * scale, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn backend_consistency_on_corpus() {
    for alg in catalog() {
        let m = alg.m();
        let q = alg.q();
        for k in [1.0, 1.5, 2.0] {
            let params = OperatorParams::new(&alg, k, 2.0).unwrap();
            let mut exps = vec![0u32; m + q];
            exps[0] = 2;
            exps[1] = 1;
            exps[m] = 1;
            let corpus = vec![
                gaussian(0.5, 0.25),
                gaussian(2.0, 0.1),
                monomial(1.5, exps),
                z_coord(m - 1),
                t_coord(q - 1),
                norm_field(&params),
                norm_eps_field(&params, 0.05),
                profile_of_norm(&params, &Profile::arctan(0.7), 0.05),
                // d_ε profiles are nearly constant where d ≪ ε, so keep ε below the sampled d
                profile_of_norm(&params, &Profile::exp_decay(2.0, 0.5), 0.05),
            ];
            let an = VectorFields::new(&alg, &params, DiffBackend::analytic());
            let fd = VectorFields::new(&alg, &params, DiffBackend::central_fd());
            for f in &corpus {
                for g in sample_points(&alg, &params, 15, (0.1, 10.0), 6).unwrap() {
                    let a = an.horizontal_gradient(f, &g).unwrap();
                    let b = fd.horizontal_gradient(f, &g).unwrap();
                    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                    let scale = norm2(&a);
                    if scale > 1e-12 {
                        assert!(norm2(&diff) <= 1e-6 * scale, "{} k={k}: {a:?} vs {b:?}", f.label());
                    }
                }
            }
        }
    }
}

#[test]
fn coordinate_step_rule_available() {
    let (alg, params) = heis(1.0, 2.0);
    let backend = DiffBackend::central_fd().with_step_rule(StepRule::Coordinate);
    let fields = VectorFields::new(&alg, &params, backend);
    let f = gaussian(1.0, 1.0).without_grad();
    let g = GroupPoint::new(vec![0.5, 0.4], vec![0.3]);
    let exact = VectorFields::new(&alg, &params, DiffBackend::analytic())
        .horizontal_gradient(&gaussian(1.0, 1.0), &g)
        .unwrap();
    let approx = fields.horizontal_gradient(&f, &g).unwrap();
    for (a, b) in exact.iter().zip(&approx) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(DiffBackend::analytic().with_steps(0.0, 1.0).is_err());
}

#[test]
fn p_laplacian_of_horizontal_coordinate_vanishes() {
    for alg in catalog() {
        let params = OperatorParams::new(&alg, 2.0, 2.0).unwrap();
        let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
        for g in sample_points(&alg, &params, 10, (0.1, 5.0), 1).unwrap() {
            assert!(fields.p_laplacian(&z_coord(0), &g).unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn p_laplacian_of_regularized_norm() {
    for alg in catalog() {
        for k in [1.0, 1.5, 2.0] {
            let params = OperatorParams::new(&alg, k, 2.0).unwrap();
            let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
            for eps in [1.0, 0.1] {
                let f = norm_eps_field(&params, eps);
                for g in sample_points(&alg, &params, 10, (0.1, 10.0), 9).unwrap() {
                    let got = fields.p_laplacian(&f, &g).unwrap();
                    let expect = lap_d_eps(&params, &g, eps).unwrap();
                    assert!(rel(got, expect) < 1e-4, "k={k} eps={eps}: {got} vs {expect}");
                }
            }
        }
    }
}

#[test]
fn p_laplacian_of_psi_potential() {
    // L d_ε^a = ε^{-Q} ψ(δ_{1/ε} g), a = (p-Q)/(p-1). For d ≫ ε the left side
    // is a small remainder of an almost L-harmonic function, so keep d ≲ ε.
    for alg in catalog() {
        for (k, p) in [(1.0, 2.0), (1.0, 3.0), (1.5, 1.5), (2.0, 2.5)] {
            let params = OperatorParams::new(&alg, k, p).unwrap();
            let q_hom = params.homogeneous_dim();
            let a = (p - q_hom) / (p - 1.0);
            let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
            for eps in [1.0, 0.5] {
                let f = profile_of_norm(&params, &Profile::power(a), eps);
                for g in sample_points(&alg, &params, 8, (0.05, 0.6), 12).unwrap() {
                    let got = fields.p_laplacian(&f, &g).unwrap();
                    let scaled = params.dilate(&g, 1.0 / eps).unwrap();
                    let expect = eps.powf(-q_hom) * psi(&params, &scaled).unwrap();
                    assert!(rel(got, expect) < 1e-4, "k={k} p={p}: {got} vs {expect}");
                }
            }
        }
    }
}

#[test]
fn p_laplacian_homogeneous_in_u() {
    for p in [1.5, 2.0, 3.0] {
        let (alg, params) = heis(1.5, p);
        let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
        let f = gaussian(0.4, 0.3).add(&z_coord(0));
        for c in [-2.0, 3.0] {
            let cf = f.scale(c);
            for g in sample_points(&alg, &params, 10, (0.2, 2.0), 13).unwrap() {
                let base = fields.p_laplacian(&f, &g).unwrap();
                let scaled = fields.p_laplacian(&cf, &g).unwrap();
                let expect = c * c.abs().powf(p - 2.0) * base;
                assert!((scaled - expect).abs() <= 1e-9 * (1.0 + expect.abs()), "p={p} c={c}");
            }
        }
    }
}

#[test]
fn near_singular_flag_for_fractional_k() {
    let (alg, params) = heis(1.5, 2.0);
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let g = GroupPoint::new(vec![1e-8, 0.0], vec![0.3]);
    let f = gaussian(1.0, 1.0);
    assert!(matches!(fields.apply_x(&f, &g, 0), Err(Error::NearSingular { .. })));
    assert!(matches!(
        fields.horizontal_gradient(&f, &g),
        Err(Error::NearSingular { .. })
    ));
    assert!(matches!(fields.p_laplacian(&f, &g), Err(Error::NearSingular { .. })));
    let (alg1, params1) = heis(2.0, 2.0);
    let integer = VectorFields::new(&alg1, &params1, DiffBackend::analytic());
    assert!(integer.apply_x(&f, &g, 0).is_ok());
}

#[test]
fn degenerate_flux_flag() {
    let (alg, params) = heis(1.0, 1.5);
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let f = gaussian(1.0, 1.0);
    let origin = GroupPoint::identity(2, 1);
    let err = fields.p_laplacian(&f, &origin).unwrap_err();
    assert!(matches!(err, Error::DegenerateFlux { .. }));
    assert!(err.flagged_value().unwrap().is_finite());
    let p2 = OperatorParams::new(&alg, 1.0, 2.0).unwrap();
    assert!(VectorFields::new(&alg, &p2, DiffBackend::analytic())
        .p_laplacian(&f, &origin)
        .is_ok());
}

#[test]
fn weighted_reductions() {
    let alg = HTypeAlgebra::heisenberg(1).unwrap();
    let base = OperatorParams::new(&alg, 1.0, 3.0).unwrap();
    let f = gaussian(0.5, 0.5).add(&z_coord(1));
    let fields = VectorFields::new(&alg, &base, DiffBackend::analytic());
    for g in sample_points(&alg, &base, 10, (0.2, 3.0), 21).unwrap() {
        assert_eq!(
            fields.weighted_p_laplacian(&f, &g).unwrap(),
            fields.p_laplacian(&f, &g).unwrap()
        );
    }

    for (k, p, alpha) in [(1.0, 2.0, 1.0), (1.0, 3.0, -1.0), (2.0, 2.5, 0.5)] {
        let params = OperatorParams::new(&alg, k, p)
            .unwrap()
            .with_weight(alpha, 0.0)
            .unwrap();
        let q_hom = params.homogeneous_dim();
        let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
        let gamma = norm_power(&params, (p - q_hom - alpha) / (p - 1.0));
        for g in sample_points(&alg, &params, 10, (0.5, 5.0), 22).unwrap() {
            let v = fields.weighted_p_laplacian(&gamma, &g).unwrap();
            let grad = norm2(&fields.horizontal_gradient(&gamma, &g).unwrap());
            let scale = params.norm(&g).powf(alpha) * grad.powf(p - 1.0) / params.norm(&g);
            assert!(v.abs() <= 1e-4 * scale, "{v} vs scale {scale}");
        }
    }

    let params = OperatorParams::new(&alg, 2.0, 2.0)
        .unwrap()
        .with_weight(1.5, 2.0)
        .unwrap();
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let w = fields.weight_field();
    let g = GroupPoint::new(vec![0.6, -0.8], vec![0.0]);
    assert!((w.eval(&g) - params.norm(&g).powf(1.5)).abs() < 1e-14);
}

#[test]
fn weighted_range_and_singular_flags() {
    let alg = HTypeAlgebra::heisenberg(1).unwrap();
    let mut params = OperatorParams::new(&alg, 1.0, 2.0).unwrap();
    params.alpha = -10.0;
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let g = GroupPoint::new(vec![0.5, 0.1], vec![0.2]);
    assert!(matches!(
        fields.weighted_p_laplacian(&gaussian(1.0, 1.0), &g),
        Err(Error::AlphaRange { .. })
    ));
    let params = OperatorParams::new(&alg, 1.0, 2.0)
        .unwrap()
        .with_weight(0.5, 1.0)
        .unwrap();
    let fields = VectorFields::new(&alg, &params, DiffBackend::analytic());
    let on_axis = GroupPoint::new(vec![1e-9, 0.0], vec![0.2]);
    assert!(matches!(
        fields.weighted_p_laplacian(&gaussian(1.0, 1.0), &on_axis),
        Err(Error::NearSingular { .. })
    ));
}
