use std::sync::Arc;

use kvn_core::dictionary::*;
use kvn_core::estimator::*;
use kvn_core::linalg::{fro_norm, max_abs};
use kvn_core::propagate::*;
use kvn_core::reference;
use kvn_core::systems::*;
use ndarray::prelude::*;
use num_complex::Complex64;

#[test]
#[ignore]
fn probe_quadrature_2000() {
    let sys = make_undamped_oscillator();
    let dict = build_monomial_tapered(&MonomialTaperedSpec {
        max_degree: 2,
        dim: 2,
        law: sys.law.clone().unwrap(),
    });
    let t0 = std::time::Instant::now();
    let data = assemble_by_quadrature(&dict, &sys.field, &sys.domain, 2000).unwrap();
    let gen = estimate_generators(data, 1e-10).unwrap();
    println!("assembly+estimate: {:?}", t0.elapsed());
    let g_ref = reference::oscillator_analytic_gram();
    let a_ref = reference::oscillator_analytic_stiffness();
    let q_ref = reference::oscillator_analytic_kvn();
    println!(
        "rel G err {:.3e}, rel A err {:.3e}, Q entrywise {:.3e}",
        fro_norm(&(&gen.g - &g_ref)) / fro_norm(&g_ref),
        fro_norm(&(&gen.a - &a_ref)) / fro_norm(&a_ref),
        max_abs(&(&gen.q - &q_ref)),
    );
}

#[test]
#[ignore]
fn probe_damped_rff() {
    let sys = make_damped_oscillator();
    let taper = sys.taper();
    for sigma in [0.2, 0.3, 0.4] {
        let t0 = std::time::Instant::now();
        let dict = Arc::new(
            build_rff_tapered(
                &RFFTaperedSpec {
                    n: 1000,
                    dim: 2,
                    bandwidth: sigma,
                    seed: 1,
                    taper: TaperKind::ConservationLaw,
                },
                Some(&taper),
            )
            .unwrap(),
        );
        let data = assemble_by_quadrature(&dict, &sys.field, &sys.domain, 240).unwrap();
        let gen = estimate_generators(data, 1e-10).unwrap();
        let white = Arc::new(whiten(&gen));
        println!("sigma={sigma}: rank {} assembly {:?}", white.rank(), t0.elapsed());
        // Two-gaussian initial state.
        let psi0_fn = |x: &[f64]| {
            let g = |c: [f64; 2]| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                (-d2 / (2.0 * 0.15 * 0.15)).exp()
            };
            Complex64::new(g([0.4, 0.0]) + g([-0.4, 0.0]), 0.0)
        };
        let fit_pts = sample_uniform(&sys.domain, 20000, 3).unwrap();
        let (psi, rel) = fit_wavefunction(&dict, &white, &psi0_fn, &fit_pts).unwrap();
        println!("  fit residual {rel:.3e}");
        // Test points where backward flow stays inside for t <= 0.5.
        let test_pts: Vec<Vec<f64>> = sample_uniform(&sys.domain, 20000, 5)
            .unwrap()
            .into_iter()
            .filter(|x| sys.domain.boundary_level(x) < 0.36)
            .take(2000)
            .collect();
        for &t in &[0.25, 0.5] {
            let psi_t = evolve(&psi, t);
            let ev = psi_t.eval_batch(&test_pts);
            let mut num = 0.0;
            let mut den = 0.0;
            for (x, e) in test_pts.iter().zip(&ev) {
                let oracle = characteristic_solution(&sys, &psi0_fn, x, t).unwrap();
                num += (e.norm_sqr() - oracle.norm_sqr()).powi(2);
                den += oracle.norm_sqr().powi(2);
            }
            println!("  t={t}: rel L2 density err {:.3e}", (num / den).sqrt());
        }
    }
}

#[test]
#[ignore]
fn probe_lotka_volterra() {
    let sys = make_lotka_volterra();
    let law = sys.law.clone().unwrap();
    let t0 = std::time::Instant::now();
    let dict = Arc::new(
        build_rff_tapered(
            &RFFTaperedSpec {
                n: 1000,
                dim: 2,
                bandwidth: 0.2,
                seed: 1,
                taper: TaperKind::Exponential { sharpness: 5000.0 },
            },
            Some(&law),
        )
        .unwrap(),
    );
    let pts = sample_uniform(&sys.domain, 50_000, 2).unwrap();
    let data = assemble_from_samples(&dict, &sys.field, &pts).unwrap();
    let gen = estimate_generators(data, 1e-10).unwrap();
    let white = Arc::new(whiten(&gen));
    println!("rank {} after {:?}", white.rank(), t0.elapsed());
    let law2 = law.clone();
    let target = move |x: &[f64]| Complex64::new((law2.f0(x) / (x[0] * x[1])).max(0.0).sqrt(), 0.0);
    let fit_pts = sample_uniform(&sys.domain, 30_000, 7).unwrap();
    let (psi, rel) = fit_wavefunction(&dict, &white, &target, &fit_pts).unwrap();
    println!("fit residual {rel:.3e}");
    // Invariance: ||Qt c|| / ||c||.
    let qc_re = white.qt.dot(&psi.coeffs.mapv(|z| z.re));
    let qc_im = white.qt.dot(&psi.coeffs.mapv(|z| z.im));
    let qc_norm = (qc_re.mapv(|v| v * v).sum() + qc_im.mapv(|v| v * v).sum()).sqrt();
    println!("||Qt c||/||c|| = {:.3e}", qc_norm / psi.norm());
    let (nodes, _) = quadrature_grid(&sys.domain, 150).unwrap();
    let rho0 = born_density(&psi, &nodes, None);
    let psi7 = evolve(&psi, 7.0);
    let rho7 = born_density(&psi7, &nodes, None);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in rho7.values.iter().zip(&rho0.values) {
        num += (a - b) * (a - b);
        den += b * b;
    }
    println!("density rel L2 (t=7 vs 0): {:.3e}", (num / den).sqrt());
    println!("total {:?}", t0.elapsed());
}
