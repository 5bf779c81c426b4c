//! Benchmark dynamical systems: vector fields, forward-invariant domains,
//! conservation laws, uniform samplers, and a reference RK4 integrator.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::prelude::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KvnError, Result};

/// Default fixed integration step used by `flow` and the characteristic oracles.
pub const DEFAULT_DT: f64 = 1e-3;

type StateFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&[f64]) -> Array2<f64> + Send + Sync>;

/// Right-hand side of an autonomous ODE together with its divergence and Jacobian.
#[derive(Clone)]
pub struct VectorField {
    pub dim: usize,
    b: StateFn,
    div_b: ScalarFn,
    jac_b: MatrixFn,
}

impl VectorField {
    pub fn new(dim: usize, b: StateFn, div_b: ScalarFn, jac_b: MatrixFn) -> Self {
        Self { dim, b, div_b, jac_b }
    }

    /// Linear field b(x) = Bx with constant divergence tr(B).
    pub fn linear(bmat: Array2<f64>) -> Self {
        let dim = bmat.nrows();
        assert_eq!(dim, bmat.ncols());
        let trace = bmat.diag().sum();
        let b = bmat.clone();
        let j = bmat;
        Self {
            dim,
            b: Arc::new(move |x| b.dot(&ArrayView1::from(x)).to_vec()),
            div_b: Arc::new(move |_| trace),
            jac_b: Arc::new(move |_| j.clone()),
        }
    }

    pub fn b(&self, x: &[f64]) -> Vec<f64> {
        (self.b)(x)
    }

    pub fn div_b(&self, x: &[f64]) -> f64 {
        (self.div_b)(x)
    }

    pub fn jac_b(&self, x: &[f64]) -> Array2<f64> {
        (self.jac_b)(x)
    }
}

/// Bounded state-space domain given by the sublevel set {g < c}.
///
/// Membership is strict interior; boundary points are rejected by samplers.
#[derive(Clone)]
pub struct Domain {
    pub bounding_box: Vec<(f64, f64)>,
    level: ScalarFn,
    level_grad: StateFn,
    pub boundary_value: f64,
}

impl Domain {
    pub fn new(
        bounding_box: Vec<(f64, f64)>,
        level: ScalarFn,
        level_grad: StateFn,
        boundary_value: f64,
    ) -> Self {
        Self { bounding_box, level, level_grad, boundary_value }
    }

    pub fn dim(&self) -> usize {
        self.bounding_box.len()
    }

    /// Strict interior membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        (self.level)(x) < self.boundary_value
    }

    /// Level-set function g defining the boundary {g = c}.
    pub fn boundary_level(&self, x: &[f64]) -> f64 {
        (self.level)(x)
    }

    pub fn boundary_level_grad(&self, x: &[f64]) -> Vec<f64> {
        (self.level_grad)(x)
    }

    /// Boundary gap c - g(x): positive inside, zero on the boundary.
    pub fn gap(&self, x: &[f64]) -> f64 {
        self.boundary_value - (self.level)(x)
    }

    pub fn in_bounding_box(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.bounding_box)
            .all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi)
    }

    pub fn box_volume(&self) -> f64 {
        self.bounding_box.iter().map(|&(lo, hi)| hi - lo).product()
    }
}

/// A conserved quantity f0 with L f0 = 0 that vanishes on the domain boundary.
///
/// Systems without a conservation law use the boundary gap c - g as a taper
/// carrier instead; it vanishes on the boundary but is not conserved.
#[derive(Clone)]
pub struct ConservationLaw {
    f0: ScalarFn,
    grad_f0: StateFn,
}

impl ConservationLaw {
    pub fn new(f0: ScalarFn, grad_f0: StateFn) -> Self {
        Self { f0, grad_f0 }
    }

    pub fn f0(&self, x: &[f64]) -> f64 {
        (self.f0)(x)
    }

    pub fn grad_f0(&self, x: &[f64]) -> Vec<f64> {
        (self.grad_f0)(x)
    }
}

/// Reference eigenvalues bundled with a note on where they come from.
#[derive(Clone, Debug)]
pub struct ReferenceEigenvalues {
    pub values: Vec<Complex64>,
    pub provenance: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemName {
    UndampedOscillator,
    DampedOscillator,
    LotkaVolterra,
}

impl fmt::Display for SystemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SystemName::UndampedOscillator => "undamped_oscillator",
            SystemName::DampedOscillator => "damped_oscillator",
            SystemName::LotkaVolterra => "lotka_volterra",
        };
        write!(f, "{s}")
    }
}

impl FromStr for SystemName {
    type Err = KvnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undamped_oscillator" => Ok(SystemName::UndampedOscillator),
            "damped_oscillator" => Ok(SystemName::DampedOscillator),
            "lotka_volterra" => Ok(SystemName::LotkaVolterra),
            other => Err(KvnError::Config(format!("unknown system `{other}`"))),
        }
    }
}

/// A benchmark system: field, forward-invariant domain, optional conservation
/// law, and reference eigenvalues where known.
#[derive(Clone)]
pub struct BenchmarkSystem {
    pub field: VectorField,
    pub domain: Domain,
    pub law: Option<ConservationLaw>,
    pub name: SystemName,
    pub reference_eigenvalues: Option<ReferenceEigenvalues>,
}

impl BenchmarkSystem {
    /// Returns the boundary-vanishing taper: the conservation law when one
    /// exists, otherwise the boundary gap c - g of the domain.
    pub fn taper(&self) -> ConservationLaw {
        if let Some(law) = &self.law {
            return law.clone();
        }
        let c = self.domain.boundary_value;
        let level = self.domain.level.clone();
        let grad = self.domain.level_grad.clone();
        ConservationLaw::new(
            Arc::new(move |x| c - level(x)),
            Arc::new(move |x| grad(x).iter().map(|g| -g).collect()),
        )
    }

    pub fn by_name(name: SystemName) -> BenchmarkSystem {
        match name {
            SystemName::UndampedOscillator => make_undamped_oscillator(),
            SystemName::DampedOscillator => make_damped_oscillator(),
            SystemName::LotkaVolterra => make_lotka_volterra(),
        }
    }
}

/// Undamped oscillator with angular frequency sqrt(2) on the elliptic domain
/// {x1^2 + x2^2/2 < 1}, conservation law f0 = 1 - x1^2 - x2^2/2.
pub fn make_undamped_oscillator() -> BenchmarkSystem {
    let bmat = array![[0.0, 1.0], [-2.0, 0.0]];
    let field = VectorField::linear(bmat);
    let domain = Domain::new(
        vec![(-1.0, 1.0), (-2.0_f64.sqrt(), 2.0_f64.sqrt())],
        Arc::new(|x: &[f64]| x[0] * x[0] + 0.5 * x[1] * x[1]),
        Arc::new(|x: &[f64]| vec![2.0 * x[0], x[1]]),
        1.0,
    );
    let law = ConservationLaw::new(
        Arc::new(|x: &[f64]| 1.0 - x[0] * x[0] - 0.5 * x[1] * x[1]),
        Arc::new(|x: &[f64]| vec![-2.0 * x[0], -x[1]]),
    );
    let sqrt2 = 2.0_f64.sqrt();
    BenchmarkSystem {
        field,
        domain,
        law: Some(law),
        name: SystemName::UndampedOscillator,
        reference_eigenvalues: Some(ReferenceEigenvalues {
            values: vec![Complex64::new(0.0, sqrt2), Complex64::new(0.0, -sqrt2)],
            provenance: "principal Koopman eigenvalues of B^T".into(),
        }),
    }
}

/// Damped oscillator (omega = sqrt(2), gamma = 2) on the forward-invariant
/// ellipse {x1^2 + x1 x2 + x2^2/2 < 1}; no conservation law.
pub fn make_damped_oscillator() -> BenchmarkSystem {
    let bmat = array![[0.0, 1.0], [-2.0, -2.0]];
    let field = VectorField::linear(bmat);
    // Axis extremes of the boundary ellipse: max |x_i| = sqrt((M^-1)_ii) for
    // the quadratic form M = [[1, 1/2], [1/2, 1/2]], padded by 1e-12.
    let pad = 1e-12;
    let x1_max = 2.0_f64.sqrt() + pad;
    let x2_max = 2.0 + pad;
    let domain = Domain::new(
        vec![(-x1_max, x1_max), (-x2_max, x2_max)],
        Arc::new(|x: &[f64]| x[0] * x[0] + x[0] * x[1] + 0.5 * x[1] * x[1]),
        Arc::new(|x: &[f64]| vec![2.0 * x[0] + x[1], x[0] + x[1]]),
        1.0,
    );
    BenchmarkSystem {
        field,
        domain,
        law: None,
        name: SystemName::DampedOscillator,
        reference_eigenvalues: Some(ReferenceEigenvalues {
            values: vec![Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0)],
            provenance: "principal Koopman eigenvalues of B^T".into(),
        }),
    }
}

/// Lotka-Volterra predator-prey model on the level-set domain
/// {x1 + x2 - log x1 - log x2 < 3} with conserved quantity
/// f0 = 3 - (x1 + x2 - log x1 - log x2).
pub fn make_lotka_volterra() -> BenchmarkSystem {
    let field = VectorField::new(
        2,
        Arc::new(|x: &[f64]| vec![x[0] * (1.0 - x[1]), x[1] * (x[0] - 1.0)]),
        Arc::new(|x: &[f64]| x[0] - x[1]),
        Arc::new(|x: &[f64]| array![[1.0 - x[1], -x[0]], [x[1], x[0] - 1.0]]),
    );
    // Axis extremes of the level set solve 1 + x - log x = 3; the other
    // coordinate's contribution y - log y is minimal (= 1) at y = 1.
    let root = |lo: f64, hi: f64| bisect(|x| 1.0 + x - x.ln() - 3.0, lo, hi, 1e-12);
    let x_lo = root(1e-3, 1.0) - 2e-12;
    let x_hi = root(1.0, 10.0) + 2e-12;
    // log is undefined for x_i <= 0; such states are outside the domain.
    let level = |x: &[f64]| {
        if x[0] <= 0.0 || x[1] <= 0.0 {
            f64::INFINITY
        } else {
            x[0] + x[1] - x[0].ln() - x[1].ln()
        }
    };
    let domain = Domain::new(
        vec![(x_lo, x_hi), (x_lo, x_hi)],
        Arc::new(level),
        Arc::new(|x: &[f64]| vec![1.0 - 1.0 / x[0], 1.0 - 1.0 / x[1]]),
        3.0,
    );
    let law = ConservationLaw::new(
        Arc::new(move |x: &[f64]| 3.0 - level(x)),
        Arc::new(|x: &[f64]| vec![1.0 / x[0] - 1.0, 1.0 / x[1] - 1.0]),
    );
    BenchmarkSystem {
        field,
        domain,
        law: Some(law),
        name: SystemName::LotkaVolterra,
        reference_eigenvalues: None,
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    assert!(
        flo * f(hi) < 0.0,
        "bisection bracket does not straddle a root"
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One classical RK4 step for dx/dt = f(x).
pub fn rk4_step(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], dt: f64) -> Vec<f64> {
    let k1 = f(x);
    let x2: Vec<f64> = x.iter().zip(&k1).map(|(xi, ki)| xi + 0.5 * dt * ki).collect();
    let k2 = f(&x2);
    let x3: Vec<f64> = x.iter().zip(&k2).map(|(xi, ki)| xi + 0.5 * dt * ki).collect();
    let k3 = f(&x3);
    let x4: Vec<f64> = x.iter().zip(&k3).map(|(xi, ki)| xi + dt * ki).collect();
    let k4 = f(&x4);
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates the flow map to time t with fixed-step RK4 (one shortened final
/// step when t is not a multiple of dt). Errors if the state leaves the
/// bounding box mid-integration.
pub fn flow(sys: &BenchmarkSystem, x0: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    assert!(dt > 0.0, "flow requires dt > 0");
    let rhs = |x: &[f64]| sys.field.b(x);
    let mut x = x0.to_vec();
    if t == 0.0 {
        return Ok(x);
    }
    let n_full = (t / dt).floor() as u64;
    for k in 0..n_full {
        x = rk4_step(&rhs, &x, dt);
        if !sys.domain.in_bounding_box(&x) {
            let time = (k + 1) as f64 * dt;
            return Err(KvnError::DomainEscape { time, state: x });
        }
    }
    let rest = t - n_full as f64 * dt;
    if rest > 1e-15 * t.abs() {
        x = rk4_step(&rhs, &x, rest);
        if !sys.domain.in_bounding_box(&x) {
            return Err(KvnError::DomainEscape { time: t, state: x });
        }
    }
    Ok(x)
}

/// Uniform samples on the domain via rejection from the bounding box.
///
/// Deterministic for a fixed seed. Parallel use: split the seed into
/// per-worker streams as seed + worker index. Aborts when the acceptance rate
/// falls below 1e-4 over 10^6 proposals.
pub fn sample_uniform(domain: &Domain, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    assert!(m >= 1, "sample_uniform requires m >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(m);
    let mut proposals: u64 = 0;
    while points.len() < m {
        let x: Vec<f64> = domain
            .bounding_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        proposals += 1;
        if domain.contains(&x) {
            points.push(x);
        }
        if proposals >= 1_000_000 {
            let rate = points.len() as f64 / proposals as f64;
            if rate < 1e-4 {
                return Err(KvnError::DegenerateDomain { rate, proposals });
            }
        }
    }
    Ok(points)
}

/// Acceptance rate observed while drawing m samples (used for volume estimates).
pub fn acceptance_rate(domain: &Domain, m: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0usize;
    let mut proposals: u64 = 0;
    while accepted < m {
        let x: Vec<f64> = domain
            .bounding_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        proposals += 1;
        if domain.contains(&x) {
            accepted += 1;
        }
        if proposals >= 1_000_000 && (accepted as f64 / proposals as f64) < 1e-4 {
            return Err(KvnError::DegenerateDomain {
                rate: accepted as f64 / proposals as f64,
                proposals,
            });
        }
    }
    Ok(accepted as f64 / proposals as f64)
}
