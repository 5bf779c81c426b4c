//! Eigenvalues and eigenvectors of projected generators, residual scores for
//! discarding spurious eigenvalues, and eigenfunction evaluation.

use ndarray::prelude::*;
use ndarray_linalg::Eig;
use num_complex::Complex64;

use crate::dictionary::Dictionary;
use crate::error::{KvnError, Result};
use crate::estimator::{GeneratorMatrices, WhitenedRepresentation};
use crate::linalg::{hermitian_eig, skew_defect};

/// Eigenvalue/eigenvector/residual triples of a projected generator.
///
/// Eigenvectors are unit-norm coefficient vectors: whitened coordinates for
/// the KvN path, original coordinates for the Koopman/Perron-Frobenius path.
#[derive(Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<Array1<Complex64>>,
    /// Residual scores; empty until populated by `score_spectrum`.
    pub residuals: Vec<f64>,
    pub basis_ref: String,
}

/// Tolerance below which a near-zero eigenfrequency pair is reported as an
/// exact zero pair.
const ZERO_PAIR_TOL: f64 = 1e-12;

/// Spectrum of a skew-symmetric matrix via the Hermitian eigenproblem for
/// H = i Qt. Eigenvalues are nu_j = -i h_j, purely imaginary, sorted by
/// increasing |Im nu| with the positive member of each pair first; the
/// multiset is exactly closed under negation by construction.
pub fn eig_skew(qt: &Array2<f64>) -> Result<SpectrumResult> {
    let defect = skew_defect(qt);
    if defect >= 1e-10 {
        return Err(KvnError::StructureViolation(format!(
            "matrix is not skew-symmetric: max |Qt + Qt^T| = {defect:.3e}"
        )));
    }
    let k = qt.nrows();
    let mut h = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            h[[i, j]] = Complex64::new(0.0, qt[[i, j]]);
        }
    }
    let (vals, vecs) = hermitian_eig(&h)?;
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    // Pair h-eigenvalues from both ends of the sorted list: lambda_lo ~
    // -lambda_hi, giving nu = +/- i omega with omega = (lambda_hi - lambda_lo)/2.
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    if k % 2 == 1 {
        let mid = k / 2;
        eigenvalues.push(Complex64::new(0.0, 0.0));
        eigenvectors.push(vecs.column(mid).to_owned());
    }
    for i in (0..k / 2).rev() {
        let (lo, hi) = (i, k - 1 - i);
        let omega = 0.5 * (vals[hi] - vals[lo]);
        let u_lo = vecs.column(lo).to_owned();
        if omega <= ZERO_PAIR_TOL * scale.max(1.0) {
            // Zero cluster: keep both solver vectors to preserve the span.
            eigenvalues.push(Complex64::new(0.0, 0.0));
            eigenvectors.push(u_lo);
            eigenvalues.push(Complex64::new(0.0, 0.0));
            eigenvectors.push(vecs.column(hi).to_owned());
        } else {
            // H u_lo = -omega u_lo, so Qt u_lo = +i omega u_lo.
            let u_conj = u_lo.mapv(|z| z.conj());
            eigenvalues.push(Complex64::new(0.0, omega));
            eigenvectors.push(u_lo);
            eigenvalues.push(Complex64::new(0.0, -omega));
            eigenvectors.push(u_conj);
        }
    }
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        residuals: Vec::new(),
        basis_ref: String::new(),
    })
}

/// Complex eigenpairs of a general real matrix (dense nonsymmetric solver),
/// sorted by real part, then |Im|, with the positive member of each conjugate
/// pair first so pairs are adjacent.
pub fn eig_general(m: &Array2<f64>) -> Result<SpectrumResult> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(KvnError::StructureViolation(
            "matrix contains non-finite entries".into(),
        ));
    }
    let (vals, vecs) = m.eig()?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| {
        vals[i]
            .re
            .total_cmp(&vals[j].re)
            .then(vals[i].im.abs().total_cmp(&vals[j].im.abs()))
            .then(vals[j].im.total_cmp(&vals[i].im))
    });
    let mut eigenvalues = Vec::with_capacity(vals.len());
    let mut eigenvectors = Vec::with_capacity(vals.len());
    for &i in &order {
        eigenvalues.push(vals[i]);
        let col = vecs.column(i);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        eigenvectors.push(col.mapv(|z| z / norm));
    }
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        residuals: Vec::new(),
        basis_ref: String::new(),
    })
}

/// Sampled estimate of ||(Q - nu) psi_v|| / ||psi_v|| for a coefficient
/// vector v in the original basis.
///
/// The quadratic form v*(C - conj(nu) B - nu B^T + |nu|^2 G)v is evaluated as
/// ||R z||^2 with z = [v; -nu v] and R the square root of the stacked Gram
/// matrix [[C, B^T], [B, G]], which avoids cancellation for near-exact
/// eigenpairs.
pub fn residual_score(
    gen: &GeneratorMatrices,
    nu: Complex64,
    v: &Array1<Complex64>,
) -> Result<f64> {
    let n = gen.size();
    assert_eq!(v.len(), n, "coefficient vector length mismatch");
    let den = quadratic_form(&gen.g, v);
    if den <= 0.0 {
        return Err(KvnError::UndefinedScore { value: den });
    }
    let r = gen.residual_factor()?;
    let mut z_re = Array1::zeros(2 * n);
    let mut z_im = Array1::zeros(2 * n);
    for i in 0..n {
        z_re[i] = v[i].re;
        z_im[i] = v[i].im;
        let top = -nu * v[i];
        z_re[n + i] = top.re;
        z_im[n + i] = top.im;
    }
    // z = [v; -nu v] ordered to match S = [[C, B^T], [B, G]] means the first
    // block multiplies Q-phi columns: [q-part; phi-part] = [v; -nu v] after
    // the identification (Q psi - nu psi) = [Psi_q^T, Phi^T] [v; -nu v].
    let num = r.dot(&z_re).mapv(|x| x * x).sum() + r.dot(&z_im).mapv(|x| x * x).sum();
    Ok((num.max(0.0) / den).sqrt())
}

fn quadratic_form(g: &Array2<f64>, v: &Array1<Complex64>) -> f64 {
    let mut acc = 0.0;
    for (i, row) in g.rows().into_iter().enumerate() {
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, &gij) in row.iter().enumerate() {
            dot += gij * v[j];
        }
        acc += (v[i].conj() * dot).re;
    }
    acc
}

/// Scores every eigenpair of a spectrum, mapping whitened eigenvectors back
/// through T when a whitened representation is given.
pub fn score_spectrum(
    gen: &GeneratorMatrices,
    white: Option<&WhitenedRepresentation>,
    spec: &mut SpectrumResult,
) -> Result<()> {
    let mut residuals = Vec::with_capacity(spec.eigenvalues.len());
    for (nu, u) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
        let v = match white {
            Some(w) => complex_map(&w.t, u),
            None => u.clone(),
        };
        residuals.push(residual_score(gen, *nu, &v)?);
    }
    spec.residuals = residuals;
    Ok(())
}

fn complex_map(t: &Array2<f64>, u: &Array1<Complex64>) -> Array1<Complex64> {
    let re = u.mapv(|z| z.re);
    let im = u.mapv(|z| z.im);
    let vre = t.dot(&re);
    let vim = t.dot(&im);
    Array1::from_iter(vre.iter().zip(&vim).map(|(&r, &i)| Complex64::new(r, i)))
}

/// Keeps eigenpairs whose residual is strictly below the threshold,
/// preserving order.
pub fn filter_spectrum(spec: &SpectrumResult, threshold: f64) -> SpectrumResult {
    assert_eq!(
        spec.residuals.len(),
        spec.eigenvalues.len(),
        "residuals must be populated before filtering"
    );
    let mut out = SpectrumResult {
        eigenvalues: Vec::new(),
        eigenvectors: Vec::new(),
        residuals: Vec::new(),
        basis_ref: spec.basis_ref.clone(),
    };
    for i in 0..spec.eigenvalues.len() {
        if spec.residuals[i] < threshold {
            out.eigenvalues.push(spec.eigenvalues[i]);
            out.eigenvectors.push(spec.eigenvectors[i].clone());
            out.residuals.push(spec.residuals[i]);
        }
    }
    out
}

/// Evaluates the j-th eigenfunction psi_j(x) = v^T phi(x) at the given
/// points, mapping whitened coefficients back through T when provided.
pub fn eigenfunction_values(
    spec: &SpectrumResult,
    dict: &Dictionary,
    white: Option<&WhitenedRepresentation>,
    j: usize,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    if j >= spec.eigenvalues.len() {
        return Err(KvnError::Config(format!(
            "eigenfunction index {j} out of range ({} eigenpairs)",
            spec.eigenvalues.len()
        )));
    }
    let v = match white {
        Some(w) => complex_map(&w.t, &spec.eigenvectors[j]),
        None => spec.eigenvectors[j].clone(),
    };
    assert_eq!(v.len(), dict.size(), "coefficients do not match dictionary");
    Ok(points
        .iter()
        .map(|x| {
            let phi = dict.eval(x);
            phi.iter().zip(&v).map(|(&p, c)| c * p).sum()
        })
        .collect())
}
