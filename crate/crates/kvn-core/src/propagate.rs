//! Wavefunction propagation under the projected KvN generator, Born-rule
//! density recovery, observable expectations, and the characteristic-solution
//! and particle-ensemble oracles.

use std::sync::Arc;

use ndarray::prelude::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dictionary::Dictionary;
use crate::error::{KvnError, Result};
use crate::estimator::WhitenedRepresentation;
use crate::linalg::sym_eig;
use crate::systems::{rk4_step, BenchmarkSystem, Domain, DEFAULT_DT};

/// A wavefunction as a complex coefficient vector over the whitened basis.
/// Immutable value: `evolve` returns a new wavefunction.
#[derive(Clone)]
pub struct Wavefunction {
    /// Coefficients in whitened coordinates (length k).
    pub coeffs: Array1<Complex64>,
    pub time: f64,
    pub white: Arc<WhitenedRepresentation>,
    pub dict: Arc<Dictionary>,
}

impl Wavefunction {
    /// psi(x) = sum_i c_i phi~_i(x) with phi~ = T^T phi.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let phi = self.dict.eval(x);
        let tphi = self.white.t.t().dot(&phi);
        tphi.iter()
            .zip(&self.coeffs)
            .map(|(&p, c)| c * p)
            .sum()
    }

    pub fn eval_batch(&self, points: &[Vec<f64>]) -> Vec<Complex64> {
        let phi = self.dict.eval_batch(points);
        let tphi = self.white.t.t().dot(&phi); // k x p
        let re = self.coeffs.mapv(|c| c.re);
        let im = self.coeffs.mapv(|c| c.im);
        let vre = re.dot(&tphi);
        let vim = im.dot(&tphi);
        vre.iter()
            .zip(&vim)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Least-squares fit of a target function in the whitened basis over the
/// given points. Returns the wavefunction and the relative fit residual.
pub fn fit_wavefunction(
    dict: &Arc<Dictionary>,
    white: &Arc<WhitenedRepresentation>,
    target: &dyn Fn(&[f64]) -> Complex64,
    points: &[Vec<f64>],
) -> Result<(Wavefunction, f64)> {
    let k = white.rank();
    assert!(points.len() >= k, "fit needs at least k = {k} points");
    let phi = dict.eval_batch(points);
    let tphi = white.t.t().dot(&phi); // k x p
    let y: Vec<Complex64> = points.iter().map(|x| target(x)).collect();
    let y_re = Array1::from_iter(y.iter().map(|z| z.re));
    let y_im = Array1::from_iter(y.iter().map(|z| z.im));
    // Normal equations M c = tphi y; real/imaginary parts decouple.
    let m = tphi.dot(&tphi.t());
    let (vals, vecs) = sym_eig(&m)?;
    let lambda_max = vals[k - 1].max(0.0);
    let tol = white.eig_threshold;
    let kept: Vec<usize> = (0..k).filter(|&i| vals[i] > tol * lambda_max).collect();
    if kept.len() < k {
        return Err(KvnError::RankDeficient { rank: kept.len(), dim: k });
    }
    let rhs_re = tphi.dot(&y_re);
    let rhs_im = tphi.dot(&y_im);
    let solve = |rhs: &Array1<f64>| -> Array1<f64> {
        let mut out = Array1::zeros(k);
        for &i in &kept {
            let v = vecs.column(i);
            let coeff = v.dot(rhs) / vals[i];
            out.scaled_add(coeff, &v);
        }
        out
    };
    let c_re = solve(&rhs_re);
    let c_im = solve(&rhs_im);
    let coeffs =
        Array1::from_iter(c_re.iter().zip(&c_im).map(|(&r, &i)| Complex64::new(r, i)));
    let psi = Wavefunction {
        coeffs,
        time: 0.0,
        white: Arc::clone(white),
        dict: Arc::clone(dict),
    };
    let fitted = psi.eval_batch(points);
    let mut err = 0.0;
    let mut norm = 0.0;
    for (f, t) in fitted.iter().zip(&y) {
        err += (f - t).norm_sqr();
        norm += t.norm_sqr();
    }
    let rel = if norm > 0.0 { (err / norm).sqrt() } else { err.sqrt() };
    Ok((psi, rel))
}

/// Advances the wavefunction by dt with the unitary propagator exp(dt Qt),
/// evaluated exactly through the cached Hermitian eigendecomposition of i Qt.
pub fn evolve(psi: &Wavefunction, dt: f64) -> Wavefunction {
    assert!(dt.is_finite(), "evolve needs a finite dt");
    Wavefunction {
        coeffs: psi.white.apply_propagator(&psi.coeffs, dt),
        time: psi.time + dt,
        white: Arc::clone(&psi.white),
        dict: Arc::clone(&psi.dict),
    }
}

/// Method-of-characteristics solution of the KvN equation:
/// psi(x, t) = psi0(Phi^{-t} x) exp(-1/2 int_0^t div b(Phi^{s-t} x) ds),
/// computed by integrating state and accumulated divergence backward with RK4.
pub fn characteristic_solution(
    sys: &BenchmarkSystem,
    psi0: &dyn Fn(&[f64]) -> Complex64,
    x: &[f64],
    t: f64,
) -> Result<Complex64> {
    let d = sys.field.dim;
    let mut state: Vec<f64> = x.to_vec();
    state.push(0.0); // accumulated divergence
    let rhs = |z: &[f64]| -> Vec<f64> {
        let mut out = sys.field.b(&z[..d]).iter().map(|v| -v).collect::<Vec<f64>>();
        out.push(sys.field.div_b(&z[..d]));
        out
    };
    let mut remaining = t;
    let mut elapsed = 0.0;
    while remaining > 0.0 {
        let step = remaining.min(DEFAULT_DT);
        state = rk4_step(&rhs, &state, step);
        elapsed += step;
        if !sys.domain.in_bounding_box(&state[..d]) {
            return Err(KvnError::DomainEscape {
                time: elapsed,
                state: state[..d].to_vec(),
            });
        }
        remaining -= step;
    }
    let amplitude = (-0.5 * state[d]).exp();
    Ok(psi0(&state[..d]) * amplitude)
}

/// Pointwise Born density rho = |psi|^2, with total mass when quadrature
/// weights are supplied.
pub struct DensityField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub mass: Option<f64>,
}

pub fn born_density(
    psi: &Wavefunction,
    points: &[Vec<f64>],
    weights: Option<&[f64]>,
) -> DensityField {
    let values: Vec<f64> = psi
        .eval_batch(points)
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let mass = weights.map(|w| {
        assert_eq!(w.len(), values.len());
        w.iter().zip(&values).map(|(wi, vi)| wi * vi).sum()
    });
    DensityField { points: points.to_vec(), values, mass }
}

/// Quadrature estimate of E[f] = int |psi|^2 f / int |psi|^2 over the given
/// points (uniform weights when none are supplied).
pub fn expectation(
    psi: &Wavefunction,
    f: &dyn Fn(&[f64]) -> f64,
    points: &[Vec<f64>],
    weights: Option<&[f64]>,
) -> f64 {
    let rho: Vec<f64> = psi
        .eval_batch(points)
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, x) in points.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[l]);
        num += w * rho[l] * f(x);
        den += w * rho[l];
    }
    num / den
}

/// Rejection sampler from an unnormalized density bounded by `bound` on the
/// domain. Deterministic for a fixed seed.
pub fn sample_from_density(
    domain: &Domain,
    rho: &dyn Fn(&[f64]) -> f64,
    bound: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    assert!(bound > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut proposals: u64 = 0;
    while out.len() < count {
        let x: Vec<f64> = domain
            .bounding_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        proposals += 1;
        if !domain.contains(&x) {
            continue;
        }
        let r = rho(&x);
        if r > bound * (1.0 + 1e-9) {
            return Err(KvnError::Config(format!(
                "density value {r:.6e} exceeds the stated bound {bound:.6e}"
            )));
        }
        if rng.random_range(0.0..1.0) < r / bound {
            out.push(x);
        }
        if proposals >= 10_000_000 && (out.len() as f64 / proposals as f64) < 1e-6 {
            return Err(KvnError::DegenerateDomain {
                rate: out.len() as f64 / proposals as f64,
                proposals,
            });
        }
    }
    Ok(out)
}

/// Draws `count` initial states from the sampler and flows each to time t
/// with fixed-step RK4; the oracle counterpart of wavefunction propagation.
pub fn particle_ensemble(
    sys: &BenchmarkSystem,
    sampler: &mut dyn FnMut() -> Result<Vec<f64>>,
    count: usize,
    t: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x0 = sampler()?;
        out.push(crate::systems::flow(sys, &x0, t, DEFAULT_DT)?);
    }
    Ok(out)
}
