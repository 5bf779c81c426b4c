//! Evaluatable basis sets with analytic gradients: polynomials times a
//! conservation law, and tapered random Fourier features. Also applies the
//! three generators to basis functions pointwise.

use ndarray::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{KvnError, Result};
use crate::systems::{ConservationLaw, VectorField};

/// Sharpness constant k of the exponential taper exp(-1/(k f0^2)).
pub const DEFAULT_EXP_TAPER_SHARPNESS: f64 = 5000.0;

/// Below this value of f0 the exponential taper and its gradient are defined
/// as exactly zero, avoiding overflow in the exponent.
const EXP_TAPER_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// L f = b . grad f
    Koopman,
    /// L* rho = -b . grad rho - div(b) rho
    PerronFrobenius,
    /// Q psi = -b . grad psi - div(b)/2 psi
    KoopmanVonNeumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TaperKind {
    /// Multiply features by the conservation law f0 itself.
    ConservationLaw,
    /// Multiply features by exp(-1/(k f0^2)) with sharpness constant k.
    Exponential { sharpness: f64 },
}

/// Polynomial-times-f0 basis of all monomials up to a maximum total degree.
#[derive(Clone)]
pub struct MonomialTaperedSpec {
    pub max_degree: usize,
    pub dim: usize,
    pub law: ConservationLaw,
}

/// Tapered random Fourier feature basis for a Gaussian kernel of bandwidth
/// sigma; frequencies are N(0, 1/sigma^2) per coordinate, phases U[0, 2pi].
#[derive(Clone, Debug)]
pub struct RFFTaperedSpec {
    pub n: usize,
    pub dim: usize,
    pub bandwidth: f64,
    pub seed: u64,
    pub taper: TaperKind,
}

#[derive(Clone)]
enum DictKind {
    Monomial {
        exponents: Vec<Vec<usize>>,
        law: ConservationLaw,
    },
    Rff {
        omega: Array2<f64>,
        phase: Vec<f64>,
        taper: TaperKind,
        law: ConservationLaw,
    },
}

/// An evaluatable dictionary of n basis functions on R^d with analytic
/// gradients. Immutable and cheap to share.
#[derive(Clone)]
pub struct Dictionary {
    n: usize,
    dim: usize,
    kind: DictKind,
    pub description: String,
}

/// Multi-indices of total degree <= r in graded lexicographic order:
/// degree first, then lexicographically with earlier coordinates dominant
/// (1, x1, x2, x1^2, x1 x2, x2^2, ... for d = 2).
pub fn graded_lex_exponents(dim: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn fill(dim: usize, degree: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=degree).rev() {
            prefix.push(first);
            fill(dim - 1, degree - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        fill(dim, degree, &mut Vec::new(), &mut out);
    }
    out
}

/// phi_k(x) = f0(x) x^{alpha_k} with graded-lex multi-indices.
pub fn build_monomial_tapered(spec: &MonomialTaperedSpec) -> Dictionary {
    let exponents = graded_lex_exponents(spec.dim, spec.max_degree);
    let n = exponents.len();
    Dictionary {
        n,
        dim: spec.dim,
        description: format!(
            "monomial_tapered(max_degree={}, dim={}, n={})",
            spec.max_degree, spec.dim, n
        ),
        kind: DictKind::Monomial { exponents, law: spec.law.clone() },
    }
}

/// phi_i(x) = taper(x) cos(omega_i . x + b_i), reproducible from the seed.
pub fn build_rff_tapered(spec: &RFFTaperedSpec, law: Option<&ConservationLaw>) -> Result<Dictionary> {
    assert!(spec.n >= 1, "rff basis needs n >= 1");
    assert!(spec.bandwidth > 0.0, "rff bandwidth must be positive");
    let law = law.ok_or_else(|| match spec.taper {
        TaperKind::Exponential { .. } => {
            KvnError::Config("exponential taper requested without a conservation law".into())
        }
        TaperKind::ConservationLaw => {
            KvnError::Config("conservation-law taper requested without a conservation law".into())
        }
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut omega = Array2::zeros((spec.n, spec.dim));
    for i in 0..spec.n {
        for j in 0..spec.dim {
            let z: f64 = rng.sample(StandardNormal);
            omega[[i, j]] = z / spec.bandwidth;
        }
    }
    let phase: Vec<f64> = (0..spec.n)
        .map(|_| rng.random_range(0.0..2.0 * std::f64::consts::PI))
        .collect();
    Ok(Dictionary::rff_from_parts(omega, phase, spec.taper, law.clone(), spec.seed))
}

impl Dictionary {
    /// RFF dictionary from explicit frequencies and phases.
    pub fn rff_from_parts(
        omega: Array2<f64>,
        phase: Vec<f64>,
        taper: TaperKind,
        law: ConservationLaw,
        seed: u64,
    ) -> Dictionary {
        let (n, dim) = omega.dim();
        assert_eq!(n, phase.len());
        let taper_name = match taper {
            TaperKind::ConservationLaw => "conservation_law".to_string(),
            TaperKind::Exponential { sharpness } => format!("exponential(k={sharpness})"),
        };
        Dictionary {
            n,
            dim,
            description: format!("rff_tapered(n={n}, dim={dim}, seed={seed}, taper={taper_name})"),
            kind: DictKind::Rff { omega, phase, taper, law },
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn taper_value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (law, taper) = match &self.kind {
            DictKind::Monomial { law, .. } => (law, TaperKind::ConservationLaw),
            DictKind::Rff { law, taper, .. } => (law, *taper),
        };
        let f0 = law.f0(x);
        let grad_f0 = law.grad_f0(x);
        match taper {
            TaperKind::ConservationLaw => (f0, grad_f0),
            TaperKind::Exponential { sharpness } => {
                if f0 <= EXP_TAPER_CUTOFF {
                    return (0.0, vec![0.0; self.dim]);
                }
                let eta = (-1.0 / (sharpness * f0 * f0)).exp();
                let scale = eta * 2.0 / (sharpness * f0 * f0 * f0);
                (eta, grad_f0.iter().map(|g| scale * g).collect())
            }
        }
    }

    /// Basis values phi(x) in R^n.
    pub fn eval(&self, x: &[f64]) -> Array1<f64> {
        let (tau, _) = self.taper_value_grad(x);
        let mut out = Array1::zeros(self.n);
        match &self.kind {
            DictKind::Monomial { exponents, .. } => {
                for (k, alpha) in exponents.iter().enumerate() {
                    out[k] = tau * monomial(x, alpha);
                }
            }
            DictKind::Rff { omega, phase, .. } => {
                for i in 0..self.n {
                    let arg = omega.row(i).dot(&ArrayView1::from(x)) + phase[i];
                    out[i] = tau * arg.cos();
                }
            }
        }
        out
    }

    /// Gradient rows (grad phi_k)(x), an n x d matrix.
    pub fn grad(&self, x: &[f64]) -> Array2<f64> {
        let (tau, dtau) = self.taper_value_grad(x);
        let mut out = Array2::zeros((self.n, self.dim));
        match &self.kind {
            DictKind::Monomial { exponents, .. } => {
                for (k, alpha) in exponents.iter().enumerate() {
                    let mono = monomial(x, alpha);
                    for j in 0..self.dim {
                        let dmono = monomial_partial(x, alpha, j);
                        out[[k, j]] = dtau[j] * mono + tau * dmono;
                    }
                }
            }
            DictKind::Rff { omega, phase, .. } => {
                for i in 0..self.n {
                    let arg = omega.row(i).dot(&ArrayView1::from(x)) + phase[i];
                    let (s, c) = arg.sin_cos();
                    for j in 0..self.dim {
                        out[[i, j]] = dtau[j] * c - tau * s * omega[[i, j]];
                    }
                }
            }
        }
        out
    }

    /// Values of the chosen generator applied to every basis function at x.
    pub fn apply_generator(
        &self,
        field: &VectorField,
        which: GeneratorKind,
        x: &[f64],
    ) -> Array1<f64> {
        let grads = self.grad(x);
        let b = Array1::from(field.b(x));
        let lphi = grads.dot(&b);
        match which {
            GeneratorKind::Koopman => lphi,
            GeneratorKind::PerronFrobenius => {
                let div = field.div_b(x);
                let phi = self.eval(x);
                -lphi - div * &phi
            }
            GeneratorKind::KoopmanVonNeumann => {
                let div = field.div_b(x);
                let phi = self.eval(x);
                -lphi - 0.5 * div * &phi
            }
        }
    }

    /// Basis values at many points as an n x m matrix (column per point).
    pub fn eval_batch(&self, points: &[Vec<f64>]) -> Array2<f64> {
        let m = points.len();
        let mut out = Array2::zeros((self.n, m));
        for (l, x) in points.iter().enumerate() {
            out.column_mut(l).assign(&self.eval(x));
        }
        out
    }

    /// phi, L phi, and Q phi at many points in one pass (n x m each).
    pub fn generator_tables(
        &self,
        field: &VectorField,
        points: &[Vec<f64>],
    ) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let m = points.len();
        let mut phi = Array2::zeros((self.n, m));
        let mut dphi = Array2::zeros((self.n, m));
        let mut qphi = Array2::zeros((self.n, m));
        for (l, x) in points.iter().enumerate() {
            let vals = self.eval(x);
            let grads = self.grad(x);
            let b = Array1::from(field.b(x));
            let div = field.div_b(x);
            let lcol = grads.dot(&b);
            let qcol = -&lcol - 0.5 * div * &vals;
            phi.column_mut(l).assign(&vals);
            dphi.column_mut(l).assign(&lcol);
            qphi.column_mut(l).assign(&qcol);
        }
        (phi, dphi, qphi)
    }
}

fn monomial(x: &[f64], alpha: &[usize]) -> f64 {
    x.iter()
        .zip(alpha)
        .map(|(&xi, &a)| xi.powi(a as i32))
        .product()
}

fn monomial_partial(x: &[f64], alpha: &[usize], j: usize) -> f64 {
    if alpha[j] == 0 {
        return 0.0;
    }
    let mut v = alpha[j] as f64;
    for (i, (&xi, &a)) in x.iter().zip(alpha).enumerate() {
        let p = if i == j { a - 1 } else { a };
        v *= xi.powi(p as i32);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{
        make_damped_oscillator, make_lotka_volterra, make_undamped_oscillator, sample_uniform,
        BenchmarkSystem,
    };
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::Rng;

    fn monomial_dict(sys: &BenchmarkSystem, r: usize) -> Dictionary {
        build_monomial_tapered(&MonomialTaperedSpec {
            max_degree: r,
            dim: 2,
            law: sys.law.clone().unwrap(),
        })
    }

    #[test]
    fn graded_lex_matches_reference_ordering() {
        let e = graded_lex_exponents(2, 2);
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn monomial_count_is_binomial() {
        // n = C(r + d, d)
        assert_eq!(graded_lex_exponents(2, 2).len(), 6);
        assert_eq!(graded_lex_exponents(2, 3).len(), 10);
        assert_eq!(graded_lex_exponents(3, 2).len(), 10);
    }

    #[test]
    fn monomial_point_values() {
        let sys = make_undamped_oscillator();
        let dict = monomial_dict(&sys, 2);
        assert_eq!(dict.size(), 6);
        let at_center = dict.eval(&[0.0, 0.0]);
        assert_abs_diff_eq!(at_center[0], 1.0, epsilon = 1e-15);
        // f0(0.5, 0) = 0.75, phi_2 = f0 * x1 = 0.375.
        let v = dict.eval(&[0.5, 0.0]);
        assert_abs_diff_eq!(v[1], 0.375, epsilon = 1e-15);
    }

    fn check_gradients_fd(dict: &Dictionary, points: &[Vec<f64>]) {
        for x in points {
            let grad = dict.grad(x);
            for j in 0..dict.dim() {
                let h = 1e-6 * x[j].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (dict.eval(&xp) - dict.eval(&xm)) / (2.0 * h);
                for k in 0..dict.size() {
                    let scale = grad[[k, j]].abs().max(1.0);
                    assert!(
                        (grad[[k, j]] - fd[k]).abs() <= 1e-6 * scale,
                        "grad mismatch at {x:?}: k={k} j={j} analytic {} fd {}",
                        grad[[k, j]],
                        fd[k]
                    );
                }
            }
        }
    }

    #[test]
    fn monomial_gradients_match_finite_differences() {
        let sys = make_undamped_oscillator();
        let dict = monomial_dict(&sys, 3);
        let pts = sample_uniform(&sys.domain, 50, 2).unwrap();
        check_gradients_fd(&dict, &pts);
    }

    #[test]
    fn rff_gradients_match_finite_differences() {
        let sys = make_undamped_oscillator();
        let dict = build_rff_tapered(
            &RFFTaperedSpec {
                n: 40,
                dim: 2,
                bandwidth: 0.5,
                seed: 9,
                taper: TaperKind::ConservationLaw,
            },
            sys.law.as_ref(),
        )
        .unwrap();
        let pts = sample_uniform(&sys.domain, 50, 3).unwrap();
        check_gradients_fd(&dict, &pts);
    }

    #[test]
    fn exponential_taper_gradients_match_finite_differences() {
        let sys = make_lotka_volterra();
        let dict = build_rff_tapered(
            &RFFTaperedSpec {
                n: 30,
                dim: 2,
                bandwidth: 0.2,
                seed: 4,
                taper: TaperKind::Exponential { sharpness: DEFAULT_EXP_TAPER_SHARPNESS },
            },
            sys.law.as_ref(),
        )
        .unwrap();
        // Stay away from the boundary where the taper is flat anyway.
        let pts: Vec<Vec<f64>> = sample_uniform(&sys.domain, 400, 5)
            .unwrap()
            .into_iter()
            .filter(|x| sys.law.as_ref().unwrap().f0(x) > 0.3)
            .take(40)
            .collect();
        check_gradients_fd(&dict, &pts);
    }

    #[test]
    fn tapered_bases_vanish_on_boundary() {
        let sys = make_undamped_oscillator();
        let dict = monomial_dict(&sys, 2);
        // Points on the ellipse boundary: |f0| < 1e-8.
        for k in 0..100 {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 100.0;
            let x = [a.cos(), 2.0_f64.sqrt() * a.sin()];
            assert!(sys.law.as_ref().unwrap().f0(&x).abs() < 1e-8);
            let norm = dict.eval(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < 1e-6, "basis norm {norm:.3e} on boundary");
        }
    }

    #[test]
    fn rff_zero_frequency_reduces_to_taper() {
        let sys = make_undamped_oscillator();
        let law = sys.law.clone().unwrap();
        let omega = Array2::zeros((3, 2));
        let dict = Dictionary::rff_from_parts(
            omega,
            vec![0.0; 3],
            TaperKind::ConservationLaw,
            law.clone(),
            0,
        );
        let x = [0.3, -0.4];
        let v = dict.eval(&x);
        for k in 0..3 {
            assert_abs_diff_eq!(v[k], law.f0(&x), epsilon = 1e-15);
        }
    }

    #[test]
    fn rff_reproducible_from_seed() {
        let sys = make_undamped_oscillator();
        let spec = RFFTaperedSpec {
            n: 300,
            dim: 2,
            bandwidth: 0.5,
            seed: 7,
            taper: TaperKind::ConservationLaw,
        };
        let d1 = build_rff_tapered(&spec, sys.law.as_ref()).unwrap();
        let d2 = build_rff_tapered(&spec, sys.law.as_ref()).unwrap();
        let x = [0.2, 0.6];
        assert_eq!(d1.eval(&x), d2.eval(&x));
        assert_eq!(d1.size(), 300);
    }

    #[test]
    fn rff_without_law_is_config_error() {
        let spec = RFFTaperedSpec {
            n: 10,
            dim: 2,
            bandwidth: 0.5,
            seed: 1,
            taper: TaperKind::Exponential { sharpness: 5000.0 },
        };
        assert!(matches!(
            build_rff_tapered(&spec, None),
            Err(KvnError::Config(_))
        ));
    }

    #[test]
    fn exponential_taper_cutoff_is_exact_zero() {
        let sys = make_lotka_volterra();
        let dict = build_rff_tapered(
            &RFFTaperedSpec {
                n: 5,
                dim: 2,
                bandwidth: 0.2,
                seed: 0,
                taper: TaperKind::Exponential { sharpness: 5000.0 },
            },
            sys.law.as_ref(),
        )
        .unwrap();
        // A point essentially on the boundary: f0 ~ 0.
        let x = [sys.domain.bounding_box[0].0 + 1e-14, 1.0];
        let v = dict.eval(&x);
        let g = dict.grad(&x);
        assert!(v.iter().all(|&z| z == 0.0));
        assert!(g.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn kvn_is_half_pf_minus_koopman() {
        for sys in [make_undamped_oscillator(), make_lotka_volterra()] {
            let dict = build_rff_tapered(
                &RFFTaperedSpec {
                    n: 25,
                    dim: 2,
                    bandwidth: 0.4,
                    seed: 12,
                    taper: TaperKind::ConservationLaw,
                },
                sys.law.as_ref(),
            )
            .unwrap();
            for x in sample_uniform(&sys.domain, 50, 8).unwrap() {
                let k = dict.apply_generator(&sys.field, GeneratorKind::Koopman, &x);
                let pf = dict.apply_generator(&sys.field, GeneratorKind::PerronFrobenius, &x);
                let q = dict.apply_generator(&sys.field, GeneratorKind::KoopmanVonNeumann, &x);
                for i in 0..dict.size() {
                    assert_abs_diff_eq!(q[i], 0.5 * (pf[i] - k[i]), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_generators_coincide() {
        // div b = 0: PF = -K = KvN pointwise.
        let sys = make_undamped_oscillator();
        let dict = monomial_dict(&sys, 2);
        for x in sample_uniform(&sys.domain, 100, 10).unwrap() {
            let k = dict.apply_generator(&sys.field, GeneratorKind::Koopman, &x);
            let pf = dict.apply_generator(&sys.field, GeneratorKind::PerronFrobenius, &x);
            let q = dict.apply_generator(&sys.field, GeneratorKind::KoopmanVonNeumann, &x);
            for i in 0..dict.size() {
                assert_abs_diff_eq!(pf[i], -k[i], epsilon = 1e-12);
                assert_abs_diff_eq!(q[i], pf[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn koopman_annihilates_the_conservation_law() {
        // phi_1 = f0 * 1, so (L phi_1)(x) = 0 everywhere.
        let sys = make_undamped_oscillator();
        let dict = monomial_dict(&sys, 2);
        for x in sample_uniform(&sys.domain, 100, 14).unwrap() {
            let k = dict.apply_generator(&sys.field, GeneratorKind::Koopman, &x);
            assert!(k[0].abs() < 1e-12);
        }
    }

    // Pointwise operator identity suite evaluated on random span elements
    // with analytic gradients.

    struct SpanFn {
        coeffs: Array1<f64>,
    }

    impl SpanFn {
        fn value(&self, dict: &Dictionary, x: &[f64]) -> f64 {
            self.coeffs.dot(&dict.eval(x))
        }
        fn grad(&self, dict: &Dictionary, x: &[f64]) -> Array1<f64> {
            dict.grad(x).t().dot(&self.coeffs)
        }
    }

    fn random_span_fn(n: usize, rng: &mut impl Rng) -> SpanFn {
        SpanFn {
            coeffs: Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0))),
        }
    }

    fn suite_dict(sys: &BenchmarkSystem) -> Dictionary {
        match sys.law.as_ref() {
            Some(_) => build_rff_tapered(
                &RFFTaperedSpec {
                    n: 20,
                    dim: 2,
                    bandwidth: 0.5,
                    seed: 21,
                    taper: TaperKind::ConservationLaw,
                },
                sys.law.as_ref(),
            )
            .unwrap(),
            None => {
                let taper = sys.taper();
                build_rff_tapered(
                    &RFFTaperedSpec {
                        n: 20,
                        dim: 2,
                        bandwidth: 0.5,
                        seed: 21,
                        taper: TaperKind::ConservationLaw,
                    },
                    Some(&taper),
                )
                .unwrap()
            }
        }
    }

    #[test]
    fn product_rule_identities_hold_pointwise() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for sys in [
            make_undamped_oscillator(),
            make_damped_oscillator(),
            make_lotka_volterra(),
        ] {
            let dict = suite_dict(&sys);
            let f = random_span_fn(dict.size(), &mut rng);
            let g = random_span_fn(dict.size(), &mut rng);
            for x in sample_uniform(&sys.domain, 1000, 31).unwrap() {
                let b = Array1::from(sys.field.b(&x));
                let div = sys.field.div_b(&x);
                let (fv, gv) = (f.value(&dict, &x), g.value(&dict, &x));
                let (fg, gg) = (f.grad(&dict, &x), g.grad(&dict, &x));
                let lf = b.dot(&fg);
                let lg = b.dot(&gg);
                // (i) L(fg) = (Lf) g + f (Lg)
                let grad_prod = &fg * gv + &gg * fv;
                let l_prod = b.dot(&grad_prod);
                assert_abs_diff_eq!(l_prod, lf * gv + fv * lg, epsilon = 1e-10);
                // (vi) L*(fg) = (Qf) g + f (Qg)
                let lstar_prod = -l_prod - div * fv * gv;
                let qf = -lf - 0.5 * div * fv;
                let qg = -lg - 0.5 * div * gv;
                assert_abs_diff_eq!(lstar_prod, qf * gv + fv * qg, epsilon = 1e-10);
            }
        }
    }

    fn principal_eigenpairs(sys: &BenchmarkSystem) -> Vec<(Complex64, [Complex64; 2])> {
        // Eigenvectors of B^T for the linear benchmark systems, so that
        // f_lambda(x) = x . w is an eigenfunction of the Koopman generator.
        match sys.name {
            crate::systems::SystemName::UndampedOscillator => {
                let s = 2.0_f64.sqrt();
                vec![
                    (
                        Complex64::new(0.0, s),
                        [Complex64::new(0.0, 1.0), Complex64::new(1.0 / s, 0.0)],
                    ),
                    (
                        Complex64::new(0.0, -s),
                        [Complex64::new(0.0, -1.0), Complex64::new(1.0 / s, 0.0)],
                    ),
                ]
            }
            crate::systems::SystemName::DampedOscillator => {
                // lambda = -1 +/- i, w = (1, -lambda/2).
                let l1 = Complex64::new(-1.0, 1.0);
                let l2 = Complex64::new(-1.0, -1.0);
                vec![
                    (l1, [Complex64::new(1.0, 0.0), -l1 / 2.0]),
                    (l2, [Complex64::new(1.0, 0.0), -l2 / 2.0]),
                ]
            }
            _ => panic!("principal eigenpairs are defined for linear systems only"),
        }
    }

    #[test]
    fn principal_eigenfunctions_satisfy_koopman_eigenproblem() {
        for sys in [make_undamped_oscillator(), make_damped_oscillator()] {
            for (lambda, w) in principal_eigenpairs(&sys) {
                for x in sample_uniform(&sys.domain, 1000, 41).unwrap() {
                    let b = sys.field.b(&x);
                    let f = w[0] * x[0] + w[1] * x[1];
                    let lf = w[0] * b[0] + w[1] * b[1];
                    assert!((lf - lambda * f).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn constant_divergence_shifts_pf_and_kvn_spectra() {
        // div b = beta: L* f = -(lambda + beta) f and Q f = -(lambda + beta/2) f.
        let sys = make_damped_oscillator();
        let beta = -2.0;
        for (lambda, w) in principal_eigenpairs(&sys) {
            for x in sample_uniform(&sys.domain, 1000, 43).unwrap() {
                let b = sys.field.b(&x);
                let f = w[0] * x[0] + w[1] * x[1];
                let lf = w[0] * b[0] + w[1] * b[1];
                let lstar_f = -lf - beta * f;
                let q_f = -lf - 0.5 * beta * f;
                assert!((lstar_f - (-(lambda + beta)) * f).norm() < 1e-10);
                assert!((q_f - (-(lambda + 0.5 * beta)) * f).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn squared_eigenfunctions_double_the_eigenvalue() {
        // Lemma items on powers via g(u) = u^2: L(f^2) = 2 lambda f^2.
        let sys = make_damped_oscillator();
        for (lambda, w) in principal_eigenpairs(&sys) {
            for x in sample_uniform(&sys.domain, 200, 47).unwrap() {
                let b = sys.field.b(&x);
                let f = w[0] * x[0] + w[1] * x[1];
                let lf = w[0] * b[0] + w[1] * b[1];
                let l_f2 = 2.0 * f * lf;
                assert!((l_f2 - 2.0 * lambda * f * f).norm() < 1e-10);
            }
        }
    }
}
