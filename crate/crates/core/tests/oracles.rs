use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use ssd_core::linalg::DenseMatrix;
use ssd_core::problem::{gen_gaussian, gen_gaussian_spd, GenSpec, LinearSystem, Metric};
use ssd_core::rng::Gaussian;
use ssd_core::sampling::{gs_expectation_weights, SamplingRule};
use ssd_core::sketch::{SketchFamily, SketchKind};
use ssd_core::solver::{run_sd, run_ssd, InitialPoint, SolverConfig};

fn binom(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

#[test]
fn weights_match_rational_binomials() {
    for q in [1u64, 2, 7, 31, 64] {
        for tau in 1..=q {
            let w = gs_expectation_weights(q as usize, tau as usize).unwrap();
            let total = binom(q, tau);
            for (j, wj) in w.iter().enumerate() {
                let exact = BigRational::new(binom(tau - 1 + j as u64, tau - 1), total.clone());
                assert!((wj - exact.to_f64().unwrap()).abs() <= 1e-12, "q {q} tau {tau} j {j}");
            }
        }
    }
}

fn systems() -> Vec<(LinearSystem<f64>, SketchKind)> {
    let spd = |b: Metric<f64>, g: Metric<f64>, seed| {
        gen_gaussian_spd::<f64>(&GenSpec::gaussian_spd(12, 6, seed))
            .unwrap()
            .with_metrics(b, g)
            .unwrap()
    };
    let rect = |b: Metric<f64>, g: Metric<f64>| {
        gen_gaussian::<f64>(&GenSpec::gaussian(10, 5, 4)).unwrap().with_metrics(b, g).unwrap()
    };
    let g_dense = {
        let w = DenseMatrix::from_fn(5, 5, |i, j| if i == j { 2.0 } else { 0.3 / (1.0 + (i + j) as f64) });
        Metric::Dense(w)
    };
    vec![
        (rect(Metric::Identity, Metric::Identity), SketchKind::Row),
        (rect(Metric::Identity, g_dense.clone()), SketchKind::Row),
        (rect(Metric::Gram, Metric::Gram), SketchKind::LsqColumn),
        (rect(Metric::Gram, g_dense.clone()), SketchKind::LsqColumn),
        (rect(Metric::Identity, g_dense), SketchKind::Block { size: 3 }),
        (spd(Metric::SystemMatrix, Metric::SystemMatrix, 1), SketchKind::Row),
        (spd(Metric::SystemMatrix, Metric::Identity, 2), SketchKind::Block { size: 4 }),
        (spd(Metric::SystemMatrix, Metric::SystemMatrix, 3), SketchKind::Spectral),
        (spd(Metric::Identity, Metric::SystemMatrix, 3), SketchKind::Spectral),
        (spd(Metric::SystemMatrix, Metric::Identity, 5), SketchKind::Full),
        (spd(Metric::Identity, Metric::Gram, 6), SketchKind::Full),
    ]
}

/// The specialised evaluations agree with the definitions built from
/// `H_i = S_i(S_iᵀAB⁻¹AᵀS_i)†S_iᵀ`.
#[test]
fn closed_forms_match_generic_definitions() {
    let mut g = Gaussian::from_seed(9, 0);
    for (sys, kind) in systems() {
        let family = SketchFamily::new(&sys, kind).unwrap();
        for _ in 0..5 {
            let x = g.vector(sys.n());
            for i in 0..family.q() {
                let fast = family.eval(i, &x).unwrap();
                let slow = family.eval_generic(i, &x).unwrap();
                let scale = 1.0 + slow.loss.abs();
                assert!((fast.loss - slow.loss).abs() <= 1e-9 * scale, "{} loss {i}", kind.label());
                for (a, b) in fast.direction.iter().zip(&slow.direction) {
                    assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{} direction {i}", kind.label());
                }
                if let (Some(a), Some(b)) = (fast.step, slow.step) {
                    assert!((a - b).abs() <= 1e-8 * b.abs(), "{} step {i}", kind.label());
                }
                let z = family.z_matrix(i).unwrap();
                let zg = family.z_matrix_generic(i).unwrap();
                assert!(z.sub(&zg).max_abs() <= 1e-8 * (1.0 + zg.max_abs()));
            }
        }
    }
}

#[test]
fn full_sketch_is_steepest_descent() {
    let sys = gen_gaussian_spd::<f64>(&GenSpec::gaussian_spd(30, 15, 2))
        .unwrap()
        .with_metrics(Metric::SystemMatrix, Metric::Identity)
        .unwrap();
    let cfg = SolverConfig {
        max_iters: 40,
        tol: 1e-300,
        check_every: Some(1),
        record_iterates: true,
        x0: InitialPoint::Thousands,
        ..SolverConfig::default()
    };
    let family = SketchFamily::new(&sys, SketchKind::Full).unwrap();
    let ssd = run_ssd(&family, &SamplingRule::Uniform, &cfg).unwrap();
    let sd = run_sd(&sys, &cfg).unwrap();
    assert_eq!(ssd.iterates.len(), sd.iterates.len());
    for (a, b) in ssd.iterates.iter().zip(&sd.iterates) {
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in a.iter().zip(b) {
            assert!((u - v).abs() <= 1e-12 * scale);
        }
    }
}
