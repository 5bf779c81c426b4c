//! Assembly of Gram/stiffness matrices from samples, trajectories, or
//! quadrature, and the projected generator matrices derived from them.
//!
//! All assembly paths share one weighted code path: Monte Carlo uses uniform
//! weights 1/m, quadrature uses cell volumes. Reductions are performed by
//! blocked BLAS products, so results are bit-stable for a fixed input
//! irrespective of worker count.

use std::sync::OnceLock;

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::dictionary::Dictionary;
use crate::error::{KvnError, Result};
use crate::linalg::sym_eig;
use crate::systems::{Domain, VectorField};

/// Basis and generator values tabulated at the sample points.
#[derive(Clone)]
pub struct DataMatrices {
    /// Basis values, n x m (column l holds phi(x_l)).
    pub phi: Array2<f64>,
    /// Koopman-generator values (L phi_k)(x_l), n x m.
    pub dphi: Array2<f64>,
    /// KvN-generator values (Q phi_k)(x_l); absent for trajectory assembly
    /// where the divergence of b is not estimable.
    pub qphi: Option<Array2<f64>>,
    /// Per-sample weights: 1/m for Monte Carlo, cell volumes for quadrature.
    pub weights: Vec<f64>,
}

impl DataMatrices {
    pub fn sample_count(&self) -> usize {
        self.weights.len()
    }
}

fn check_finite(m: &Array2<f64>, what: &str) -> Result<()> {
    for (l, col) in m.columns().into_iter().enumerate() {
        if col.iter().any(|v| !v.is_finite()) {
            let _ = what;
            return Err(KvnError::NonFinite { sample: l });
        }
    }
    Ok(())
}

/// Tabulates phi, L phi, Q phi at the given interior points with uniform
/// weights 1/m.
pub fn assemble_from_samples(
    dict: &Dictionary,
    field: &VectorField,
    points: &[Vec<f64>],
) -> Result<DataMatrices> {
    let m = points.len();
    assert!(m >= 1, "assembly requires at least one sample");
    let (phi, dphi, qphi) = dict.generator_tables(field, points);
    check_finite(&phi, "phi")?;
    check_finite(&dphi, "dphi")?;
    check_finite(&qphi, "qphi")?;
    Ok(DataMatrices {
        phi,
        dphi,
        qphi: Some(qphi),
        weights: vec![1.0 / m as f64; m],
    })
}

/// Assembly from snapshot pairs (x_t, x_{t+h}): the time derivative is the
/// forward difference (x_{t+h} - x_t)/h used in place of b. The KvN columns
/// are left empty since div(b) cannot be formed from single differences.
pub fn assemble_from_trajectories(
    dict: &Dictionary,
    snapshots: &[(Vec<f64>, Vec<f64>)],
    h: f64,
) -> Result<DataMatrices> {
    if h <= 0.0 {
        return Err(KvnError::Config(format!(
            "trajectory step h must be positive, got {h}"
        )));
    }
    let m = snapshots.len();
    assert!(m >= 1, "assembly requires at least one snapshot pair");
    let n = dict.size();
    let mut phi = Array2::zeros((n, m));
    let mut dphi = Array2::zeros((n, m));
    for (l, (x, x_next)) in snapshots.iter().enumerate() {
        let xdot: Vec<f64> = x
            .iter()
            .zip(x_next)
            .map(|(a, b)| (b - a) / h)
            .collect();
        phi.column_mut(l).assign(&dict.eval(x));
        let grads = dict.grad(x);
        dphi.column_mut(l)
            .assign(&grads.dot(&ArrayView1::from(&xdot)));
    }
    check_finite(&phi, "phi")?;
    check_finite(&dphi, "dphi")?;
    Ok(DataMatrices {
        phi,
        dphi,
        qphi: None,
        weights: vec![1.0 / m as f64; m],
    })
}

/// Midpoint-rule nodes over the bounding box restricted to interior cells,
/// with the common cell volume as weight.
pub fn quadrature_grid(domain: &Domain, grid_per_dim: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    assert!(grid_per_dim >= 2, "quadrature grid needs at least 2 cells per dim");
    let d = domain.dim();
    let steps: Vec<f64> = domain
        .bounding_box
        .iter()
        .map(|&(lo, hi)| (hi - lo) / grid_per_dim as f64)
        .collect();
    let cell_volume: f64 = steps.iter().product();
    let mut nodes = Vec::new();
    let mut index = vec![0usize; d];
    loop {
        let x: Vec<f64> = (0..d)
            .map(|j| domain.bounding_box[j].0 + (index[j] as f64 + 0.5) * steps[j])
            .collect();
        if domain.contains(&x) {
            nodes.push(x);
        }
        // Odometer increment over the tensor grid.
        let mut j = 0;
        loop {
            index[j] += 1;
            if index[j] < grid_per_dim {
                break;
            }
            index[j] = 0;
            j += 1;
            if j == d {
                if nodes.is_empty() {
                    return Err(KvnError::EmptyQuadrature { grid: grid_per_dim });
                }
                return Ok((nodes, cell_volume));
            }
        }
    }
}

/// Tensor midpoint quadrature assembly over the domain.
pub fn assemble_by_quadrature(
    dict: &Dictionary,
    field: &VectorField,
    domain: &Domain,
    grid_per_dim: usize,
) -> Result<DataMatrices> {
    let (nodes, cell_volume) = quadrature_grid(domain, grid_per_dim)?;
    let (phi, dphi, qphi) = dict.generator_tables(field, &nodes);
    check_finite(&phi, "phi")?;
    check_finite(&dphi, "dphi")?;
    check_finite(&qphi, "qphi")?;
    let m = nodes.len();
    Ok(DataMatrices {
        phi,
        dphi,
        qphi: Some(qphi),
        weights: vec![cell_volume; m],
    })
}

/// Weighted Galerkin estimates of the projected generators.
///
/// Holds the Gram pair (G, A), the KvN cross and second-order matrices used
/// for residual scoring, and the derived matrices L = G+ A, L* = G+ A^T,
/// Q = G+ (A^T - A)/2.
pub struct GeneratorMatrices {
    pub g: Array2<f64>,
    pub a: Array2<f64>,
    /// KvN second-order matrix sum_l w_l (Q phi)(x_l) (Q phi)(x_l)^T.
    pub c: Option<Array2<f64>>,
    /// KvN cross matrix sum_l w_l phi(x_l) (Q phi)(x_l)^T.
    pub b_cross: Option<Array2<f64>>,
    pub l: Array2<f64>,
    pub lstar: Array2<f64>,
    pub q: Array2<f64>,
    /// Retained rank of G after truncation.
    pub rank: usize,
    /// Relative eigenvalue truncation used for the pseudoinverse.
    pub truncation: f64,
    pub sample_count: usize,
    gram_eigvals: Array1<f64>,
    gram_eigvecs: Array2<f64>,
    residual_factor: OnceLock<Array2<f64>>,
}

impl GeneratorMatrices {
    /// Builds the derived matrices from an explicit Gram pair. The cross and
    /// second-order KvN matrices may be omitted when residual scoring is not
    /// needed (e.g. trajectory data).
    pub fn from_matrices(
        g: Array2<f64>,
        a: Array2<f64>,
        b_cross: Option<Array2<f64>>,
        c: Option<Array2<f64>>,
        truncation: f64,
        sample_count: usize,
    ) -> Result<Self> {
        let n = g.nrows();
        assert_eq!(g.ncols(), n);
        assert_eq!(a.dim(), (n, n));
        // Symmetrize to kill product roundoff.
        let g = 0.5 * (&g + &g.t());
        let c = c.map(|c| 0.5 * (&c + &c.t()));
        let (vals, vecs) = sym_eig(&g)?;
        let lambda_max = vals[n - 1];
        if lambda_max <= 0.0 {
            return Err(KvnError::RankZero);
        }
        let kept: Vec<usize> = (0..n)
            .filter(|&i| vals[i] > truncation * lambda_max && vals[i] > 0.0)
            .collect();
        if kept.is_empty() {
            return Err(KvnError::RankZero);
        }
        let rank = kept.len();
        let pinv_apply = |rhs: &Array2<f64>| -> Array2<f64> {
            // G+ rhs = V_kept diag(1/lambda) V_kept^T rhs
            let mut out = Array2::zeros((n, n));
            for &i in &kept {
                let v = vecs.column(i);
                let coeff = v.dot(rhs) / vals[i];
                // out += v * coeff^T
                for r in 0..n {
                    for cidx in 0..n {
                        out[[r, cidx]] += v[r] * coeff[cidx];
                    }
                }
            }
            out
        };
        let l = pinv_apply(&a);
        let at = a.t().to_owned();
        let lstar = pinv_apply(&at);
        let skew = 0.5 * (&a.t() - &a);
        let q = pinv_apply(&skew);
        Ok(GeneratorMatrices {
            g,
            a,
            c,
            b_cross,
            l,
            lstar,
            q,
            rank,
            truncation,
            sample_count,
            gram_eigvals: vals,
            gram_eigvecs: vecs,
            residual_factor: OnceLock::new(),
        })
    }

    /// Rebuilds the struct from stored blocks verbatim (archive loading);
    /// only the internal Gram eigendecomposition is recomputed.
    #[allow(clippy::too_many_arguments)]
    pub fn from_stored(
        g: Array2<f64>,
        a: Array2<f64>,
        b_cross: Option<Array2<f64>>,
        c: Option<Array2<f64>>,
        l: Array2<f64>,
        lstar: Array2<f64>,
        q: Array2<f64>,
        rank: usize,
        truncation: f64,
        sample_count: usize,
    ) -> Result<Self> {
        let (vals, vecs) = sym_eig(&g)?;
        Ok(GeneratorMatrices {
            g,
            a,
            c,
            b_cross,
            l,
            lstar,
            q,
            rank,
            truncation,
            sample_count,
            gram_eigvals: vals,
            gram_eigvecs: vecs,
            residual_factor: OnceLock::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.g.nrows()
    }

    /// Largest and smallest retained Gram eigenvalues (condition estimate).
    pub fn gram_extremes(&self) -> (f64, f64) {
        let n = self.gram_eigvals.len();
        let lambda_max = self.gram_eigvals[n - 1];
        let lambda_min_kept = self
            .gram_eigvals
            .iter()
            .copied()
            .filter(|&v| v > self.truncation * lambda_max && v > 0.0)
            .fold(f64::INFINITY, f64::min);
        (lambda_max, lambda_min_kept)
    }

    /// Square root factor R with R^T R = [[C, B^T], [B, G]], used to evaluate
    /// residual quadratic forms as plain norms (no cancellation between the
    /// four assembled matrices).
    pub(crate) fn residual_factor(&self) -> Result<&Array2<f64>> {
        if let Some(r) = self.residual_factor.get() {
            return Ok(r);
        }
        let (b, c) = match (&self.b_cross, &self.c) {
            (Some(b), Some(c)) => (b, c),
            _ => {
                return Err(KvnError::Config(
                    "residual scoring needs the KvN cross and second-order matrices".into(),
                ))
            }
        };
        let n = self.size();
        let mut s = Array2::zeros((2 * n, 2 * n));
        s.slice_mut(s![..n, ..n]).assign(c);
        s.slice_mut(s![..n, n..]).assign(&b.t());
        s.slice_mut(s![n.., ..n]).assign(b);
        s.slice_mut(s![n.., n..]).assign(&self.g);
        let (vals, vecs) = sym_eig(&s)?;
        // R = diag(sqrt(max(lambda, 0))) V^T
        let mut r = vecs.t().to_owned();
        for (i, mut row) in r.rows_mut().into_iter().enumerate() {
            let scale = vals[i].max(0.0).sqrt();
            row.mapv_inplace(|v| v * scale);
        }
        let _ = self.residual_factor.set(r);
        Ok(self.residual_factor.get().unwrap())
    }
}

/// Estimates the generator matrices from tabulated data.
pub fn estimate_generators(data: DataMatrices, truncation: f64) -> Result<GeneratorMatrices> {
    let DataMatrices { mut phi, mut dphi, qphi, weights } = data;
    let m = weights.len();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    scale_columns(&mut phi, &sqrt_w);
    scale_columns(&mut dphi, &sqrt_w);
    let g = phi.dot(&phi.t());
    let a = phi.dot(&dphi.t());
    drop(dphi);
    let (b_cross, c) = match qphi {
        Some(mut qphi) => {
            scale_columns(&mut qphi, &sqrt_w);
            let b = phi.dot(&qphi.t());
            let c = qphi.dot(&qphi.t());
            (Some(b), Some(c))
        }
        None => (None, None),
    };
    drop(phi);
    GeneratorMatrices::from_matrices(g, a, b_cross, c, truncation, m)
}

fn scale_columns(m: &mut Array2<f64>, scale: &[f64]) {
    for (mut col, &s) in m.columns_mut().into_iter().zip(scale) {
        col.mapv_inplace(|v| v * s);
    }
}

/// Whitened representation: T maps original to orthonormal coefficients and
/// the projected KvN matrix becomes exactly skew-symmetric.
pub struct WhitenedRepresentation {
    /// n x k transform, columns are Gram eigenvectors scaled by 1/sqrt(lambda),
    /// ordered by descending eigenvalue.
    pub t: Array2<f64>,
    /// k x k whitened KvN matrix, antisymmetric by construction.
    pub qt: Array2<f64>,
    /// Relative truncation tolerance inherited from the estimator.
    pub eig_threshold: f64,
    propagator: OnceLock<(Array1<f64>, Array2<Complex64>)>,
}

impl WhitenedRepresentation {
    /// Rebuilds from stored blocks (archive loading).
    pub fn from_stored(t: Array2<f64>, qt: Array2<f64>, eig_threshold: f64) -> Self {
        WhitenedRepresentation { t, qt, eig_threshold, propagator: OnceLock::new() }
    }

    pub fn rank(&self) -> usize {
        self.qt.nrows()
    }

    /// Eigendecomposition of the Hermitian matrix H = i Qt, cached. The
    /// propagator is exp(t Qt) = U exp(-i Lambda t) U*.
    pub fn propagator_eig(&self) -> &(Array1<f64>, Array2<Complex64>) {
        self.propagator.get_or_init(|| {
            let k = self.qt.nrows();
            let mut h = Array2::zeros((k, k));
            for i in 0..k {
                for j in 0..k {
                    h[[i, j]] = Complex64::new(0.0, self.qt[[i, j]]);
                }
            }
            crate::linalg::hermitian_eig(&h).expect("hermitian eigensolver failed on i*Qt")
        })
    }

    /// Applies exp(dt Qt) to a complex coefficient vector.
    pub fn apply_propagator(&self, coeffs: &Array1<Complex64>, dt: f64) -> Array1<Complex64> {
        let (vals, u) = self.propagator_eig();
        let mut y = Array1::<Complex64>::zeros(coeffs.len());
        // y = U^H c
        for (j, col) in u.columns().into_iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (ui, ci) in col.iter().zip(coeffs) {
                acc += ui.conj() * ci;
            }
            y[j] = acc;
        }
        for (j, v) in y.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, -vals[j] * dt);
        }
        u.dot(&y)
    }
}

/// Whitening transform from the eigendecomposition of G.
pub fn whiten(gen: &GeneratorMatrices) -> WhitenedRepresentation {
    let n = gen.size();
    let vals = &gen.gram_eigvals;
    let vecs = &gen.gram_eigvecs;
    let lambda_max = vals[n - 1];
    let kept: Vec<usize> = (0..n)
        .rev()
        .filter(|&i| vals[i] > gen.truncation * lambda_max && vals[i] > 0.0)
        .collect();
    let k = kept.len();
    let mut t = Array2::zeros((n, k));
    for (col, &i) in kept.iter().enumerate() {
        let scale = 1.0 / vals[i].sqrt();
        t.column_mut(col).assign(&(&vecs.column(i) * scale));
    }
    let a_tilde = t.t().dot(&gen.a).dot(&t);
    // Qt_ij = (A~_ji - A~_ij)/2 is antisymmetric exactly in floating point.
    let mut qt = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            qt[[i, j]] = 0.5 * (a_tilde[[j, i]] - a_tilde[[i, j]]);
        }
    }
    WhitenedRepresentation {
        t,
        qt,
        eig_threshold: gen.truncation,
        propagator: OnceLock::new(),
    }
}

/// Default relative truncation for the Gram pseudoinverse.
pub const DEFAULT_TRUNCATION: f64 = 1e-10;
