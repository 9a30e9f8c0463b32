use super::*;
use crate::verify::sample_points;
use proptest::prelude::*;

fn setup(alg: HTypeAlgebra, k: f64, p: f64, alpha: f64) -> (HTypeAlgebra, OperatorParams) {
    let params = OperatorParams::new(&alg, k, p)
        .unwrap()
        .with_weight(alpha, 0.0)
        .unwrap();
    (alg, params)
}

fn heis(p: f64, alpha: f64) -> (HTypeAlgebra, OperatorParams) {
    setup(HTypeAlgebra::heisenberg(1).unwrap(), 1.0, p, alpha)
}

fn central(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn smoothstep_is_c2_with_known_slope() {
    assert_eq!(smoothstep(0.0), Jet::ZERO);
    assert_eq!(smoothstep(1.0), Jet::constant(1.0));
    let s = smoothstep(0.5);
    assert!((s.v - 0.5).abs() < 1e-15);
    assert!((s.d - SMOOTHSTEP_SLOPE).abs() < 1e-15);
    for x in [1e-9, 1.0 - 1e-9] {
        let s = smoothstep(x);
        assert!(s.d.abs() < 1e-12 && s.dd.abs() < 1e-6, "{x} {s:?}");
    }
    for x in [0.1, 0.37, 0.8] {
        let d = central(&|y| smoothstep(y).v, x, 1e-6);
        let dd = central(&|y| smoothstep(y).d, x, 1e-6);
        assert!((d - smoothstep(x).d).abs() < 1e-8);
        assert!((dd - smoothstep(x).dd).abs() < 1e-7);
    }
}

#[test]
fn corpus_profiles_have_consistent_derivatives() {
    for phi in hardy_corpus(20, 3) {
        let (r0, r1) = phi.support;
        for t in [0.2, 0.45, 0.7] {
            let r = r0 * (r1 / r0).powf(t);
            let h = 1e-6 * r;
            let f = phi.profile.f.clone();
            let df = phi.profile.df.clone();
            let d1 = central(&|x| f(x), r, h);
            let d2 = central(&|x| df(x), r, h);
            let scale = 1.0 + (phi.profile.df)(r).abs();
            assert!((d1 - (phi.profile.df)(r)).abs() < 1e-6 * scale, "{}", phi.label);
            let scale2 = 1.0 + (phi.profile.d2f)(r).abs();
            assert!((d2 - (phi.profile.d2f)(r)).abs() < 1e-5 * scale2, "{}", phi.label);
        }
        assert_eq!((phi.profile.f)(r0), 0.0);
        assert_eq!((phi.profile.f)(r1 * 1.01), 0.0);
    }
}

#[test]
fn corpus_is_seeded_and_mixed() {
    let a = hardy_corpus(50, 7);
    let b = hardy_corpus(50, 7);
    assert_eq!(a.len(), 50);
    assert_eq!(a.iter().filter(|f| f.is_radial()).count(), 25);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.support, y.support);
        assert_eq!(x.angular, y.angular);
        assert_eq!((x.profile.f)(x.support.0 * 1.5), (y.profile.f)(y.support.0 * 1.5));
    }
    for f in &a {
        let (r0, r1) = f.support;
        assert!(r0 >= 0.05 && r0 < 1.0 && r1 / r0 >= 2.0 && r1 / r0 <= 8.0);
    }
}

#[test]
fn bad_support_is_rejected() {
    let prof = Profile::power(1.0);
    for s in [(0.0, 1.0), (1.0, 0.5), (0.1, f64::INFINITY)] {
        assert!(matches!(
            HardyTestFunction::new("x", prof.clone(), s),
            Err(Error::BadSupport { .. })
        ));
    }
}

#[test]
fn analytic_gradient_matches_differences() {
    let alg = HTypeAlgebra::quaternionic(1).unwrap();
    let params = OperatorParams::new(&alg, 1.5, 2.0).unwrap();
    let corpus = hardy_corpus(6, 11);
    for phi in corpus.iter().filter(|f| !f.is_radial()) {
        let (r0, r1) = phi.support;
        let pts = sample_points(&alg, &params, 20, (r0 * 1.1, r1 / 1.1), 5).unwrap();
        for g in &pts {
            let (_, grad) = phi.value_grad(&params, g);
            let coords = g.coords();
            let d = params.norm(g);
            for (i, gi) in grad.iter().enumerate() {
                let h = if i < 4 { 1e-5 * d } else { 1e-5 * d.powf(3.0) };
                let shift = |s: f64| {
                    let mut c = coords.clone();
                    c[i] += s;
                    GroupPoint::new(c[..4].to_vec(), c[4..].to_vec())
                };
                let fd = (phi.value_grad(&params, &shift(h)).0 - phi.value_grad(&params, &shift(-h)).0) / (2.0 * h);
                let scale = 1.0 + grad.iter().map(|x| x.abs()).fold(0.0, f64::max);
                assert!((fd - gi).abs() < 1e-6 * scale, "{} comp {i}: {fd} vs {gi}", phi.label);
            }
        }
    }
}

#[test]
fn support_shells_cover_annulus() {
    let s = support_shells((0.1, 0.75));
    assert_eq!(s, vec![(0.1, 0.2), (0.2, 0.4), (0.4, 0.75)]);
    let s = support_shells((0.1, 0.45));
    assert_eq!(s, vec![(0.1, 0.2), (0.2, 0.45)]);
    let s = support_shells((0.1, 0.35));
    assert_eq!(s, vec![(0.1, 0.2), (0.2, 0.35)]);
    let s = support_shells((1.0, 1.5));
    assert_eq!(s, vec![(1.0, 1.5)]);
}

#[test]
fn radial_monte_carlo_matches_reduction() {
    let (alg, params) = heis(2.0, 0.0);
    let corpus = hardy_corpus(6, 7);
    for phi in corpus.iter().filter(|f| f.is_radial()) {
        let r = hardy_ratio(&alg, &params, phi, 40_000, 9).unwrap();
        let exact = r.radial_ratio.unwrap();
        assert!((r.ratio - exact).abs() < 4.0 * r.ratio_stderr, "{}: {r:?}", phi.label);
        assert!(r.ratio_stderr < 0.05 * r.ratio);
        assert!(r.ratio > r.sharp);
    }
}

#[test]
fn ratio_invariant_under_scaling() {
    let (alg, params) = heis(3.0, 1.0);
    let phi = &hardy_corpus(2, 7)[1];
    let a = hardy_ratio(&alg, &params, phi, 20_000, 1).unwrap();
    let b = hardy_ratio(&alg, &params, &phi.scaled(-3.5), 20_000, 1).unwrap();
    assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio);
    assert!((b.lhs / a.lhs - 3.5f64.powf(3.0)).abs() < 1e-9 * b.lhs / a.lhs);
}

#[test]
fn ratio_invariant_under_dilation() {
    let (alg, params) = heis(2.0, -1.0);
    for phi in &hardy_corpus(4, 7)[..2] {
        let a = hardy_ratio(&alg, &params, phi, 40_000, 2).unwrap();
        let b = hardy_ratio(&alg, &params, &phi.dilated(2.0), 40_000, 3).unwrap();
        let sd = (a.ratio_stderr.powi(2) + b.ratio_stderr.powi(2)).sqrt();
        assert!((a.ratio - b.ratio).abs() < 4.0 * sd, "{a:?} {b:?}");
    }
}

#[test]
fn hardy_range_is_enforced() {
    let (alg, params) = heis(2.0, 0.0);
    let phi = &hardy_corpus(1, 7)[0];
    let bad = params.with_p(4.0).unwrap();
    assert!(matches!(
        hardy_ratio(&alg, &bad, phi, 100, 0),
        Err(Error::HardyRange { .. })
    ));
    let bad = params.with_weight(-2.0, 0.0).unwrap();
    assert!(matches!(
        hardy_ratio(&alg, &bad, phi, 100, 0),
        Err(Error::HardyRange { .. })
    ));
}

#[test]
fn sharpness_cutoff_shape() {
    for j in 1..=24 {
        let (_, params) = heis(2.0, 0.0);
        let spec = SharpnessSequenceSpec::new(&params, j).unwrap();
        let rho = spec.inner();
        assert_eq!(spec.cutoff(rho).v, 0.0);
        assert_eq!(spec.cutoff(2.0).v, 0.0);
        assert_eq!(spec.cutoff(2.0 * rho).v, 1.0);
        assert_eq!(spec.cutoff(1.0).v, 1.0);
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let r = rho * (1.0 + i as f64 / 1000.0);
            worst = worst.max(spec.cutoff(r).d.abs());
        }
        assert!(worst <= spec.derivative_bound() * 2f64.powi(j as i32) * (1.0 + 1e-12));
        assert!(worst >= 0.99 * spec.derivative_bound() * 2f64.powi(j as i32));
    }
}

#[test]
fn sharpness_reductions_agree() {
    for (p, alpha) in [(2.0, 0.0), (1.5, 1.0), (3.0, 0.5)] {
        let (_, params) = heis(p, alpha);
        for j in 1..=5 {
            let spec = SharpnessSequenceSpec::new(&params, j).unwrap();
            let a = spec.exact_ratio().unwrap();
            let b = radial_ratio(&params, &spec.test_function()).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "p={p} j={j}: {a} vs {b}");
        }
    }
}

#[test]
fn sharpness_ratios_decrease_towards_constant() {
    let (_, params) = heis(2.0, 0.0);
    let sharp = hardy_constant(&params).unwrap();
    let ratios: Vec<f64> = [1, 2, 4, 8, 64, 1024, 1 << 16]
        .iter()
        .map(|&j| SharpnessSequenceSpec::new(&params, j).unwrap().exact_ratio().unwrap())
        .collect();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0], "{ratios:?}");
    }
    assert!(ratios.iter().all(|r| *r > sharp));
    assert!(*ratios.last().unwrap() < 1.01 * sharp, "{ratios:?}");
}

#[test]
fn sharpness_monte_carlo_matches_reduction() {
    let (alg, params) = heis(2.0, 0.0);
    let spec = SharpnessSequenceSpec::new(&params, 3).unwrap();
    let r = hardy_ratio(&alg, &params, &spec.test_function(), 40_000, 4).unwrap();
    let exact = spec.exact_ratio().unwrap();
    assert!((r.ratio - exact).abs() < 4.0 * r.ratio_stderr, "{} vs {exact}", r.ratio);
}

#[test]
fn slope_fit_recovers_coefficients() {
    let js: Vec<f64> = (1..=8).map(f64::from).collect();
    let ys: Vec<f64> = js.iter().map(|j| 2.5 * j - 1.0 + 0.75 / j - 0.2 / (j * j)).collect();
    let (a, b, c, d) = fit_linear_growth(&js, &ys).unwrap();
    assert!((a - 2.5).abs() < 1e-10 && (b + 1.0).abs() < 1e-9 && (c - 0.75).abs() < 1e-8 && (d + 0.2).abs() < 1e-8);
    assert!(fit_linear_growth(&js[..3], &ys[..3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The 1-D Hardy inequality behind the radial reduction.
    #[test]
    fn radial_ratio_never_below_sharp_constant(
        seed in 0u64..1000,
        p in 1.2f64..4.0,
        alpha in -1.5f64..2.0,
    ) {
        let (_, params) = heis(p, alpha);
        prop_assume!(p < 4.0 + alpha);
        let sharp = hardy_constant(&params).unwrap();
        for phi in hardy_corpus(6, seed).iter().filter(|f| f.is_radial()) {
            let r = radial_ratio(&params, phi).unwrap();
            prop_assert!(r >= sharp * (1.0 - 1e-10), "{} {r} < {sharp}", phi.label);
        }
    }
}
