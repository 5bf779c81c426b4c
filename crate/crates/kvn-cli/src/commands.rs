//! Command implementations wiring systems, dictionaries, estimation, spectra,
//! propagation, and circuit export into reproducible experiments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::prelude::*;
use num_complex::Complex64;
use serde::Serialize;

use kvn_core::archive::{load_matrices, save_matrices};
use kvn_core::dictionary::{
    build_monomial_tapered, build_rff_tapered, Dictionary, MonomialTaperedSpec, RFFTaperedSpec,
    TaperKind,
};
use kvn_core::estimator::{
    assemble_by_quadrature, assemble_from_samples, assemble_from_trajectories,
    estimate_generators, quadrature_grid, whiten, DataMatrices, GeneratorMatrices,
};
use kvn_core::linalg::{regression_slope, skew_defect};
use kvn_core::propagate::{
    evolve, fit_wavefunction, particle_ensemble, sample_from_density,
};
use kvn_core::qcircuit::{decompose, detect_structure, render_circuit, render_circuit_qasm_lite};
use kvn_core::reference;
use kvn_core::spectral::{eig_skew, eigenfunction_values, filter_spectrum, score_spectrum};
use kvn_core::systems::{sample_uniform, BenchmarkSystem, SystemName};
use kvn_core::{KvnError, Result};

use crate::config::{
    BasisConfig, CircuitFormat, ExperimentConfig, InitialConfig, SourceConfig, TaperConfig,
};

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

fn build_system(cfg: &ExperimentConfig) -> Result<BenchmarkSystem> {
    let name: SystemName = cfg.system.parse()?;
    Ok(BenchmarkSystem::by_name(name))
}

fn build_dictionary(cfg: &ExperimentConfig, sys: &BenchmarkSystem) -> Result<Dictionary> {
    let taper_law = sys.taper();
    match &cfg.basis {
        BasisConfig::Monomial { max_degree } => Ok(build_monomial_tapered(&MonomialTaperedSpec {
            max_degree: *max_degree,
            dim: sys.field.dim,
            law: taper_law,
        })),
        BasisConfig::Rff { n, bandwidth, seed, taper } => {
            let taper = match taper {
                TaperConfig::ConservationLaw => TaperKind::ConservationLaw,
                TaperConfig::Exponential { sharpness } => {
                    TaperKind::Exponential { sharpness: *sharpness }
                }
            };
            build_rff_tapered(
                &RFFTaperedSpec {
                    n: *n,
                    dim: sys.field.dim,
                    bandwidth: *bandwidth,
                    seed: *seed,
                    taper,
                },
                Some(&taper_law),
            )
        }
    }
}

fn read_trajectory_pairs(path: &Path, dim: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && line.chars().any(|c| c.is_alphabetic()) {
            continue; // header
        }
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| {
            KvnError::Config(format!("trajectory file line {}: {e}", lineno + 1))
        })?;
        if vals.len() != 2 * dim {
            return Err(KvnError::Config(format!(
                "trajectory file line {} has {} columns, expected {}",
                lineno + 1,
                vals.len(),
                2 * dim
            )));
        }
        out.push((vals[..dim].to_vec(), vals[dim..].to_vec()));
    }
    if out.is_empty() {
        return Err(KvnError::Config("trajectory file contains no snapshot pairs".into()));
    }
    Ok(out)
}

fn assemble(
    cfg: &ExperimentConfig,
    sys: &BenchmarkSystem,
    dict: &Dictionary,
) -> Result<DataMatrices> {
    match &cfg.source {
        SourceConfig::Samples { m, seed } => {
            let points = sample_uniform(&sys.domain, *m, *seed)?;
            assemble_from_samples(dict, &sys.field, &points)
        }
        SourceConfig::Quadrature { grid } => {
            assemble_by_quadrature(dict, &sys.field, &sys.domain, *grid)
        }
        SourceConfig::Trajectories { file, h } => {
            let pairs = read_trajectory_pairs(file, sys.field.dim)?;
            assemble_from_trajectories(dict, &pairs, *h)
        }
    }
}

pub fn archive_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.outputs.join(format!("{}.kvngen", cfg.system))
}

#[derive(Serialize)]
struct EstimateSummary {
    n: usize,
    k: usize,
    m: usize,
    skew_defect: f64,
    gram_condition: f64,
    archive: PathBuf,
}

/// Assembles, estimates, whitens, and writes the matrix archive plus a JSON
/// summary. Deterministic: identical configs give byte-identical archives.
pub fn cmd_estimate(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let sys = build_system(cfg)?;
    let dict = build_dictionary(cfg, &sys)?;
    if cfg.export_samples {
        if let SourceConfig::Samples { m, seed } = &cfg.source {
            let points = sample_uniform(&sys.domain, *m, *seed)?;
            fs::create_dir_all(&cfg.outputs)?;
            write_samples_csv(&points, &cfg.outputs.join("samples.csv"))?;
        }
    }
    let data = assemble(cfg, &sys, &dict)?;
    let gen = estimate_generators(data, cfg.truncation)?;
    let white = whiten(&gen);
    fs::create_dir_all(&cfg.outputs)?;
    let path = archive_path(cfg);
    save_matrices(&gen, &white, &dict.description, &cfg.system, &path)?;
    let (lmax, lmin) = gen.gram_extremes();
    let summary = EstimateSummary {
        n: gen.size(),
        k: white.rank(),
        m: gen.sample_count,
        skew_defect: skew_defect(&white.qt),
        gram_condition: lmax / lmin,
        archive: path.clone(),
    };
    let summary_path = cfg.outputs.join("estimate_summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    println!(
        "estimate: n={} k={} m={} skew_defect={:.3e} gram_condition={:.3e}",
        summary.n, summary.k, summary.m, summary.skew_defect, summary.gram_condition
    );
    println!("wrote {} and {}", path.display(), summary_path.display());
    Ok(path)
}

/// Recomputes the whitened spectrum from an archive, scores residuals, and
/// writes `spectrum.csv` (re,im,residual), a filtered copy, and optional
/// eigenfunction grids.
pub fn cmd_spectrum(cfg: &ExperimentConfig, archive: &Path) -> Result<()> {
    let sys = build_system(cfg)?;
    let dict = build_dictionary(cfg, &sys)?;
    let (gen, white, header) = load_matrices(archive)?;
    if gen.size() != dict.size() {
        return Err(KvnError::Config(format!(
            "archive basis size {} does not match configured dictionary size {}",
            gen.size(),
            dict.size()
        )));
    }
    let mut spec = eig_skew(&white.qt)?;
    spec.basis_ref = header.basis.clone();
    score_spectrum(&gen, Some(&white), &mut spec)?;
    fs::create_dir_all(&cfg.outputs)?;
    let write_csv = |path: &Path, s: &kvn_core::spectral::SpectrumResult| -> Result<()> {
        let mut out = String::from("re,im,residual\n");
        for (nu, r) in s.eigenvalues.iter().zip(&s.residuals) {
            out.push_str(&format!("{},{},{}\n", f17(nu.re), f17(nu.im), f17(*r)));
        }
        fs::write(path, out)?;
        Ok(())
    };
    let spec_path = cfg.outputs.join("spectrum.csv");
    write_csv(&spec_path, &spec)?;
    let threshold = cfg.spectrum.as_ref().map_or(1e-2, |s| s.threshold);
    let filtered = filter_spectrum(&spec, threshold);
    let filt_path = cfg.outputs.join("spectrum_filtered.csv");
    write_csv(&filt_path, &filtered)?;
    println!(
        "spectrum: {} eigenpairs, {} below residual threshold {:.3e}",
        spec.eigenvalues.len(),
        filtered.eigenvalues.len(),
        threshold
    );
    if let Some(scfg) = &cfg.spectrum {
        if let Some(grid) = scfg.eigenfunction_grid {
            let (nodes, _) = quadrature_grid(&sys.domain, grid)?;
            for &j in &scfg.eigenfunction_indices {
                let vals = eigenfunction_values(&spec, &dict, Some(&white), j, &nodes)?;
                let mut out = String::from("x1,x2,re_psi,im_psi\n");
                for (x, v) in nodes.iter().zip(&vals) {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        f17(x[0]),
                        f17(x[1]),
                        f17(v.re),
                        f17(v.im)
                    ));
                }
                let path = cfg.outputs.join(format!("eigenfunction_{j}.csv"));
                fs::write(&path, out)?;
            }
        }
    }
    println!("wrote {} and {}", spec_path.display(), filt_path.display());
    Ok(())
}

/// Monte Carlo convergence study against the analytic oscillator matrices:
/// matrix error and leading eigenvalue errors over a grid of sample counts,
/// with log-log regression slopes appended.
pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<()> {
    let sys = build_system(cfg)?;
    if sys.name != SystemName::UndampedOscillator {
        return Err(KvnError::Config(
            "converge requires system = undamped_oscillator (analytic reference)".into(),
        ));
    }
    match &cfg.basis {
        BasisConfig::Monomial { max_degree: 2 } => {}
        _ => {
            return Err(KvnError::Config(
                "converge requires basis = monomial with max_degree 2 (analytic reference)".into(),
            ))
        }
    }
    let dict = build_dictionary(cfg, &sys)?;
    let ccfg = cfg.converge.clone().unwrap_or(crate::config::ConvergeConfig {
        exponents: vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0],
        seeds: 10,
        master_seed: 0,
    });
    let q_ref = reference::oscillator_analytic_kvn();
    let sqrt2 = 2.0_f64.sqrt();
    let mut rows = String::from("m,seed,matrix_error,eig1_error,eig2_error\n");
    let mut mean_log_m = Vec::new();
    let mut mean_log_mat = Vec::new();
    let mut mean_log_e1 = Vec::new();
    let mut mean_log_e2 = Vec::new();
    for &ex in &ccfg.exponents {
        let m = 10f64.powf(ex).round() as usize;
        let mut mat_acc = 0.0;
        let mut e1_acc = 0.0;
        let mut e2_acc = 0.0;
        for s in 0..ccfg.seeds {
            let seed = ccfg.master_seed + s;
            let points = sample_uniform(&sys.domain, m, seed)?;
            let data = assemble_from_samples(&dict, &sys.field, &points)?;
            let gen = estimate_generators(data, cfg.truncation)?;
            let mat_err = kvn_core::linalg::fro_norm(&(&gen.q - &q_ref));
            let white = whiten(&gen);
            let spec = eig_skew(&white.qt)?;
            // Positive-imaginary members sorted ascending: nu1 ~ i sqrt(2),
            // nu2 ~ 2 i sqrt(2).
            let mut pos: Vec<f64> = spec
                .eigenvalues
                .iter()
                .map(|z| z.im)
                .filter(|&v| v > 1e-9)
                .collect();
            pos.sort_by(f64::total_cmp);
            let e1 = pos.first().map_or(f64::NAN, |v| (v - sqrt2).abs());
            let e2 = pos.get(1).map_or(f64::NAN, |v| (v - 2.0 * sqrt2).abs());
            rows.push_str(&format!(
                "{m},{seed},{},{},{}\n",
                f17(mat_err),
                f17(e1),
                f17(e2)
            ));
            mat_acc += mat_err;
            e1_acc += e1;
            e2_acc += e2;
        }
        let k = ccfg.seeds as f64;
        mean_log_m.push((m as f64).log10());
        mean_log_mat.push((mat_acc / k).log10());
        mean_log_e1.push((e1_acc / k).log10());
        mean_log_e2.push((e2_acc / k).log10());
    }
    let slopes = if mean_log_m.len() >= 2 {
        let sm = regression_slope(&mean_log_m, &mean_log_mat);
        let s1 = regression_slope(&mean_log_m, &mean_log_e1);
        let s2 = regression_slope(&mean_log_m, &mean_log_e2);
        println!("converge slopes: matrix {sm:.3}, eig1 {s1:.3}, eig2 {s2:.3}");
        (Some(sm), Some(s1), Some(s2))
    } else {
        (None, None, None)
    };
    let fmt_slope = |s: Option<f64>| s.map_or(String::new(), |v| format!("{v:.6}"));
    rows.push_str(&format!(
        "# slopes,,{},{},{}\n",
        fmt_slope(slopes.0),
        fmt_slope(slopes.1),
        fmt_slope(slopes.2)
    ));
    fs::create_dir_all(&cfg.outputs)?;
    let path = cfg.outputs.join("converge.csv");
    fs::write(&path, rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn initial_condition(
    cfg: &ExperimentConfig,
    sys: &BenchmarkSystem,
) -> Result<Box<dyn Fn(&[f64]) -> Complex64>> {
    let choice = cfg
        .propagate
        .as_ref()
        .and_then(|p| p.initial.clone())
        .unwrap_or_else(|| default_initial(sys.name));
    match choice {
        InitialConfig::Gaussian { center, bandwidth } => {
            if center.len() != sys.field.dim {
                return Err(KvnError::Config("initial gaussian center dimension mismatch".into()));
            }
            Ok(Box::new(move |x: &[f64]| {
                let d2: f64 = x
                    .iter()
                    .zip(&center)
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum();
                Complex64::new((-d2 / (2.0 * bandwidth * bandwidth)).exp(), 0.0)
            }))
        }
        InitialConfig::GaussianSuperposition { centers, bandwidth } => {
            Ok(Box::new(move |x: &[f64]| {
                let mut v = 0.0;
                for c in &centers {
                    let d2: f64 = x
                        .iter()
                        .zip(c)
                        .map(|(xi, ci)| (xi - ci) * (xi - ci))
                        .sum();
                    v += (-d2 / (2.0 * bandwidth * bandwidth)).exp();
                }
                Complex64::new(v, 0.0)
            }))
        }
        InitialConfig::SqrtInvariantDensity => {
            let law = sys.law.clone().ok_or_else(|| {
                KvnError::Config("sqrt_invariant_density needs a conservation law".into())
            })?;
            if sys.name != SystemName::LotkaVolterra {
                return Err(KvnError::Config(
                    "sqrt_invariant_density is defined for lotka_volterra".into(),
                ));
            }
            Ok(Box::new(move |x: &[f64]| {
                Complex64::new((law.f0(x) / (x[0] * x[1])).max(0.0).sqrt(), 0.0)
            }))
        }
    }
}

fn default_initial(name: SystemName) -> InitialConfig {
    match name {
        // The damped superposition centers/widths are artifact defaults.
        SystemName::DampedOscillator => InitialConfig::GaussianSuperposition {
            centers: vec![vec![0.4, 0.0], vec![-0.4, 0.0]],
            bandwidth: 0.15,
        },
        SystemName::LotkaVolterra => InitialConfig::Gaussian {
            center: vec![0.5, 0.5],
            bandwidth: 0.02_f64.sqrt(),
        },
        SystemName::UndampedOscillator => InitialConfig::Gaussian {
            center: vec![0.3, 0.0],
            bandwidth: 0.2,
        },
    }
}

/// Fits the configured initial wavefunction, evolves it to each requested
/// time, and writes wavefunction/density and optional particle-ensemble
/// snapshots.
pub fn cmd_propagate(cfg: &ExperimentConfig, archive: &Path) -> Result<()> {
    let sys = build_system(cfg)?;
    let dict = Arc::new(build_dictionary(cfg, &sys)?);
    let (_, white, _) = load_matrices(archive)?;
    if white.t.nrows() != dict.size() {
        return Err(KvnError::Config(format!(
            "archive basis size {} does not match configured dictionary size {}",
            white.t.nrows(),
            dict.size()
        )));
    }
    let white = Arc::new(white);
    let pcfg = cfg
        .propagate
        .as_ref()
        .ok_or_else(|| KvnError::Config("propagate block missing from config".into()))?;
    let psi0_fn = initial_condition(cfg, &sys)?;
    let fit_pts = sample_uniform(&sys.domain, pcfg.fit_samples, pcfg.fit_seed)?;
    let (psi0, fit_residual) = fit_wavefunction(&dict, &white, psi0_fn.as_ref(), &fit_pts)?;
    println!("propagate: initial fit residual {fit_residual:.3e}");
    fs::create_dir_all(&cfg.outputs)?;
    // Full box grid; out-of-domain rows keep empty value fields.
    let g = pcfg.grid;
    let steps: Vec<f64> = sys
        .domain
        .bounding_box
        .iter()
        .map(|&(lo, hi)| (hi - lo) / g as f64)
        .collect();
    let mut box_nodes = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            box_nodes.push(vec![
                sys.domain.bounding_box[0].0 + (i as f64 + 0.5) * steps[0],
                sys.domain.bounding_box[1].0 + (j as f64 + 0.5) * steps[1],
            ]);
        }
    }
    let interior: Vec<usize> = (0..box_nodes.len())
        .filter(|&i| sys.domain.contains(&box_nodes[i]))
        .collect();
    let interior_nodes: Vec<Vec<f64>> = interior.iter().map(|&i| box_nodes[i].clone()).collect();
    // Particle ensemble setup shares the initial density across times.
    let ensemble_init: Option<Vec<Vec<f64>>> = match pcfg.ensemble_count {
        Some(count) => {
            let psi_for_rho = psi0.clone();
            let rho = move |x: &[f64]| psi_for_rho.eval(x).norm_sqr();
            let bound = interior_nodes.iter().map(|x| rho(x)).fold(0.0_f64, f64::max) * 1.3;
            Some(sample_from_density(
                &sys.domain,
                &rho,
                bound,
                count,
                pcfg.ensemble_seed,
            )?)
        }
        None => None,
    };
    for &t in &pcfg.times {
        let psi_t = evolve(&psi0, t);
        let vals = psi_t.eval_batch(&interior_nodes);
        let mut table: Vec<Option<Complex64>> = vec![None; box_nodes.len()];
        for (slot, v) in interior.iter().zip(&vals) {
            table[*slot] = Some(*v);
        }
        let mut out = String::from("x1,x2,re_psi,im_psi,rho\n");
        for (node, entry) in box_nodes.iter().zip(&table) {
            match entry {
                Some(v) => out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    f17(node[0]),
                    f17(node[1]),
                    f17(v.re),
                    f17(v.im),
                    f17(v.norm_sqr())
                )),
                None => out.push_str(&format!("{},{},,,\n", f17(node[0]), f17(node[1]))),
            }
        }
        let path = cfg.outputs.join(format!("wavefunction_t{t:.3}.csv"));
        fs::write(&path, out)?;
        println!("wrote {}", path.display());
        if let Some(init) = &ensemble_init {
            let mut iter = init.clone().into_iter();
            let mut sampler = move || {
                Ok(iter
                    .next()
                    .expect("ensemble sampler exhausted"))
            };
            let flowed = particle_ensemble(&sys, &mut sampler, init.len(), t)?;
            let mut out = String::from("x1,x2\n");
            for p in &flowed {
                out.push_str(&format!("{},{}\n", f17(p[0]), f17(p[1])));
            }
            let path = cfg.outputs.join(format!("ensemble_t{t:.3}.csv"));
            fs::write(&path, out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CircuitReport {
    t: f64,
    a: f64,
    z: [f64; 3],
    max_error: f64,
    identity_check: Option<bool>,
}

/// Detects the 2+4 block structure, compiles and simulates the circuits, and
/// writes the gate files plus a JSON verification report.
pub fn cmd_circuit(cfg: &ExperimentConfig, archive: &Path) -> Result<()> {
    let (_, white, _) = load_matrices(archive)?;
    let ccfg = cfg
        .circuit
        .as_ref()
        .ok_or_else(|| KvnError::Config("circuit block missing from config".into()))?;
    if white.qt.nrows() != 6 {
        return Err(KvnError::StructureNotFound { tolerance: ccfg.structure_tolerance });
    }
    let blocks = detect_structure(&white.qt, ccfg.structure_tolerance)?;
    let (c1, c2) = decompose(&blocks, ccfg.t);
    let u1 = kvn_core::qcircuit::simulate(&c1)?;
    let u2 = kvn_core::qcircuit::simulate(&c2)?;
    let rebuilt = blocks.embed(&u1, &u2);
    // Reference propagator exp(t Qt) column by column.
    let k = white.rank();
    let mut expm = Array2::zeros((k, k));
    for j in 0..k {
        let mut e = Array1::from_elem(k, Complex64::new(0.0, 0.0));
        e[j] = Complex64::new(1.0, 0.0);
        let col = white.apply_propagator(&e, ccfg.t);
        for i in 0..k {
            expm[[i, j]] = col[i].re;
        }
    }
    let max_error = kvn_core::linalg::max_abs(&(&rebuilt - &expm));
    fs::create_dir_all(&cfg.outputs)?;
    let render = match ccfg.format {
        CircuitFormat::Text => render_circuit,
        CircuitFormat::QasmLite => render_circuit_qasm_lite,
    };
    let p1 = cfg.outputs.join("circuit_q1.gates");
    let p2 = cfg.outputs.join("circuit_q2.gates");
    fs::write(&p1, render(&c1))?;
    fs::write(&p2, render(&c2))?;
    let identity_check = if ccfg.t == 0.0 {
        let d1 = kvn_core::linalg::max_abs(&(&u1 - &Array2::<f64>::eye(2)));
        let d2 = kvn_core::linalg::max_abs(&(&u2 - &Array2::<f64>::eye(4)));
        Some(d1 < 1e-12 && d2 < 1e-12)
    } else {
        None
    };
    let report = CircuitReport { t: ccfg.t, a: blocks.a, z: blocks.z, max_error, identity_check };
    let report_path = cfg.outputs.join("circuit_report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    println!(
        "circuit: a={:.6} z=[{:.6}, {:.6}, {:.6}] max_error={:.3e}",
        blocks.a, blocks.z[0], blocks.z[1], blocks.z[2], max_error
    );
    println!(
        "wrote {}, {}, {}",
        p1.display(),
        p2.display(),
        report_path.display()
    );
    Ok(())
}

/// Runs the structural property suite on an archive, printing one PASS/FAIL
/// line per check.
pub fn cmd_verify(archive: &Path) -> Result<()> {
    let (gen, white, header) = load_matrices(archive)?;
    let mut failures = 0usize;
    let mut check = |name: &str, value: f64, bound: f64| {
        let ok = value <= bound;
        println!(
            "{} {name}: {value:.3e} (bound {bound:.1e})",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures += 1;
        }
    };
    // Gram symmetry and positivity.
    let sym = kvn_core::linalg::max_abs(&(&gen.g - &gen.g.t()));
    check("gram_symmetry", sym, 1e-12);
    let (lmax, lmin) = gen.gram_extremes();
    check("gram_positive", if lmin > 0.0 && lmax > 0.0 { 0.0 } else { 1.0 }, 0.5);
    // Q reproducibility from stored G, A.
    let rebuilt = GeneratorMatrices::from_matrices(
        gen.g.clone(),
        gen.a.clone(),
        None,
        None,
        header.truncation,
        header.m,
    )?;
    let q_defect = kvn_core::linalg::max_abs(&(&gen.q - &rebuilt.q));
    check("kvn_matrix_reproducible", q_defect, 1e-12);
    // Whitening identities.
    check("whitened_skew_defect", skew_defect(&white.qt), 1e-10);
    let tgt = white.t.t().dot(&gen.g).dot(&white.t);
    let k = white.rank();
    let ortho = kvn_core::linalg::max_abs(&(&tgt - &Array2::<f64>::eye(k)));
    check("whitening_orthonormal", ortho, 1e-10);
    // Spectrum on the imaginary axis.
    let spec = eig_skew(&white.qt)?;
    let re_max = spec
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.re.abs()));
    check("spectrum_imaginary", re_max, 1e-10);
    // Unitarity of the propagator on a deterministic test vector.
    let c0 = Array1::from_iter(
        (0..k).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.71).cos())),
    );
    let n0 = c0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let c1 = white.apply_propagator(&c0, 1.0);
    let n1 = c1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    check("propagator_unitary", (n1 - n0).abs() / n0, 1e-12);
    if failures > 0 {
        return Err(KvnError::Linalg(format!("{failures} verification checks failed")));
    }
    println!("verify: all checks passed for {}", archive.display());
    Ok(())
}

/// Exports sampled point sets as CSV with header `x1,...,xd`.
pub fn write_samples_csv(points: &[Vec<f64>], path: &Path) -> Result<()> {
    let dim = points.first().map_or(0, |p| p.len());
    let mut f = fs::File::create(path)?;
    let header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    writeln!(f, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p.iter().map(|&v| f17(v)).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}
