//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use htype_core::verify::{
    run_suite, verify_fundamental_solution, verify_hardy, verify_lemma1, verify_lemma2, verify_moments, verify_radial,
    verify_sharpness, SuiteConfig, VerificationReport, SUITES,
};
use htype_core::HTypeAlgebra;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn failed_ids(r: &VerificationReport) -> String {
    let ids: Vec<_> = r.failed_checks().map(|c| c.id.as_str()).collect();
    if ids.is_empty() {
        String::new()
    } else {
        format!(" failed: [{}]", ids.join(", "))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for id in ["heisenberg:1", "heisenberg:2", "heisenberg:3", "quaternionic:1"] {
        let alg = HTypeAlgebra::from_catalog(id).unwrap();
        ok &= alg.validate(1e-12).is_ok();
        let (m, q) = (alg.m(), alg.q());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let z: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t: Vec<f64> = (0..q).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z2 = dot(&z, &z);
            let scale = z2.max(1.0);
            let jtz = alg.apply_jt(&t, &z);
            worst = worst.max((dot(&jtz, &jtz) - dot(&t, &t) * z2).abs() / (scale * dot(&t, &t).max(1.0)));
            for i in 0..q {
                let jz = alg.apply_j(i, &z);
                worst = worst.max((dot(&jz, &jz) - z2).abs() / scale);
                worst = worst.max(dot(&jz, &z).abs() / scale);
                let jjz = alg.apply_j(i, &jz);
                worst = worst.max(jjz.iter().zip(&z).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max));
            }
            let mut sum = 0.0;
            for j in 0..m {
                let mut e = vec![0.0; m];
                e[j] = 1.0;
                let b = alg.bracket(&z, &e).unwrap();
                sum += alg.apply_jt(&b, &z)[j];
            }
            worst = worst.max((sum - q as f64 * z2).abs() / scale);
        }
    }
    outcome(ok && worst <= 1e-12, format!("max deviation {worst:.2e} (tol 1e-12)"))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut worst = [0.0f64; 3];
    for group in ["heisenberg:1", "heisenberg:2", "quaternionic:1"] {
        for k in [1.0, 1.5, 2.0] {
            let cfg = SuiteConfig {
                group: group.into(),
                k,
                points: 500,
                ..SuiteConfig::default()
            };
            let r = verify_lemma1(&cfg).unwrap();
            for c in &r.checks {
                for (i, id) in ["lemma1.grad_sq", "lemma1.lap_d4k", "lemma1.lap_d_eps"]
                    .iter()
                    .enumerate()
                {
                    if c.id.starts_with(id) {
                        worst[i] = worst[i].max(c.value);
                    }
                }
            }
            if !r.passed {
                ok = false;
                detail.push(format!("{group} k={k}{}", failed_ids(&r)));
            }
        }
    }
    outcome(
        ok,
        format!(
            "max rel err {:.2e} / {:.2e} / {:.2e} (tol 1e-6 / 1e-5 / 1e-4){}",
            worst[0],
            worst[1],
            worst[2],
            detail.join("; ")
        ),
    )
}

fn criterion_3() -> Outcome {
    let cfg = SuiteConfig {
        points: 500,
        p_list: vec![1.5, 2.0, 3.0],
        ..SuiteConfig::default()
    };
    let r = verify_radial(&cfg).unwrap();
    let c = r.check("radial.equivalence").unwrap();
    outcome(
        r.passed,
        format!("max rel err {:.2e} over {} samples (tol 1e-4)", c.value, c.samples),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1.0, 2.0] {
        let cfg = SuiteConfig {
            k,
            samples: 1_000_000,
            ..SuiteConfig::default()
        };
        let r = verify_moments(&cfg).unwrap();
        ok &= r.passed;
        for c in r.checks.iter().filter(|c| c.id.starts_with("moments.ball")) {
            parts.push(format!(
                "k={k} {} z={:.2}",
                c.id.trim_start_matches("moments.ball."),
                c.error / c.stderr
            ));
        }
        if k == 1.0 {
            let c = r.check("moments.ball.gamma=0").unwrap();
            let bracket = (c.value - PI * PI / 8.0).abs() <= 3.0 * c.stderr;
            ok &= bracket;
            parts.push(format!("gamma=0 estimate {:.5} +- {:.5} vs pi^2/8", c.value, c.stderr));
        }
        if !r.passed {
            parts.push(failed_ids(&r));
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let cfg = SuiteConfig {
        samples: 1_000_000,
        ..SuiteConfig::default()
    };
    let r = verify_fundamental_solution(&cfg).unwrap();
    let psi = r.check("fundamental.psi_integral").unwrap();
    let fin = r.check("fundamental.eps_sweep.final").unwrap();
    let mono = r.check("fundamental.eps_sweep.monotone").unwrap();
    let target_ok = (psi.target + 2.0 * PI).abs() < 1e-12;
    let gap = (fin.value - psi.target).abs() / psi.target.abs();
    let ok = target_ok && psi.passed && fin.passed && gap <= 0.01 && mono.passed;
    outcome(
        ok,
        format!(
            "int psi = {:.5} +- {:.5} (target {:.6}); sweep final rel err {:.2e} (gap to closed form {:.2e}), monotone {}",
            psi.value,
            psi.stderr,
            psi.target,
            fin.error,
            gap,
            mono.passed
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, k) in [(2.0, 1.0), (3.0, 1.0), (2.0, 2.0), (4.0, 1.0)] {
        let cfg = SuiteConfig {
            p,
            k,
            points: 200,
            samples: 80_000,
            ..SuiteConfig::default()
        };
        let r = verify_fundamental_solution(&cfg).unwrap();
        let c = r.check("fundamental.harmonicity").unwrap();
        ok &= c.passed;
        parts.push(format!("(p={p},k={k}) {:.2e}", c.value));
    }
    outcome(ok, format!("max scaled residual {} (tol 1e-4)", parts.join(", ")))
}

fn criterion_7() -> Outcome {
    let r = verify_hardy(&SuiteConfig::default()).unwrap();
    let worst = r
        .checks
        .iter()
        .filter(|c| c.id.starts_with("hardy.p="))
        .map(|c| (c.value - c.target) / c.target)
        .fold(f64::INFINITY, f64::min);
    let n = r.checks.iter().filter(|c| c.id.starts_with("hardy.p=")).count();
    outcome(
        r.passed,
        format!(
            "{n} (p, alpha) pairs x 50 functions; smallest relative excess over the sharp constant {worst:.3}{}",
            failed_ids(&r)
        ),
    )
}

fn criterion_8() -> Outcome {
    let r = verify_sharpness(&SuiteConfig::default()).unwrap();
    let mono = r.check("sharpness.monotone").unwrap();
    let last = r.check("sharpness.ratio_j8").unwrap();
    outcome(
        mono.passed && last.passed,
        format!(
            "monotone {} (max rise {:.2} sigma); ratio(8) = {:.4} +- {:.4} vs bound {:.2}",
            mono.passed, mono.value, last.value, last.stderr, last.target
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, alpha) in [(2.0, 0.0), (3.0, 1.0)] {
        let cfg = SuiteConfig {
            p,
            alpha,
            points: 200,
            corpus_size: 2,
            hardy_samples: 2000,
            ..SuiteConfig::default()
        };
        let r = verify_lemma2(&cfg).unwrap();
        let c = r.check("lemma2.pointwise").unwrap();
        ok &= c.passed;
        parts.push(format!("(p={p},alpha={alpha}) {:.2e}", c.value));
    }
    outcome(ok, format!("max rel err {} (tol 1e-4)", parts.join(", ")))
}

fn criterion_10() -> Outcome {
    let cfg = SuiteConfig {
        points: 40,
        samples: 40_000,
        hardy_samples: 3000,
        corpus_size: 3,
        ..SuiteConfig::default()
    };
    let mut bad = Vec::new();
    for name in SUITES {
        let a = run_suite(name, &cfg).unwrap();
        let b = run_suite(name, &cfg).unwrap();
        if !a.same_results(&b) {
            bad.push(name);
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} suites re-run; differing: {bad:?}", SUITES.len()),
    )
}

fn main() {
    let criteria: [(u32, f64, fn() -> Outcome); 10] = [
        (1, 1.0, criterion_1),
        (2, 30.0, criterion_2),
        (3, 60.0, criterion_3),
        (4, 60.0, criterion_4),
        (5, 300.0, criterion_5),
        (6, 60.0, criterion_6),
        (7, 300.0, criterion_7),
        (8, 300.0, criterion_8),
        (9, 60.0, criterion_9),
        (10, f64::INFINITY, criterion_10),
    ];
    let mut failures = 0;
    for (n, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= budget;
        let passed = out.passed && in_time;
        if !passed {
            failures += 1;
        }
        let limit = if budget.is_finite() {
            format!(", limit {budget:.0} s")
        } else {
            String::new()
        };
        println!(
            "criterion {n}: {} {} ({secs:.1} s{limit}{})",
            if passed { "PASS" } else { "FAIL" },
            out.detail,
            if in_time { "" } else { ", over time budget" }
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
