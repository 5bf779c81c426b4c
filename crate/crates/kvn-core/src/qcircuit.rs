//! Compilation of the block-structured whitened KvN propagator into one- and
//! two-qubit gate sequences, a dense state-vector simulator, and a textual
//! gate format.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::prelude::*;

use crate::error::{KvnError, Result};
use crate::linalg::skew_defect;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Ry,
    CRy,
    X,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Rotation angle in radians; 0 for X gates.
    pub angle: f64,
}

/// Ordered gate sequence; gates[0] is applied first. Qubit 0 is the most
/// significant bit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct GateList {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub comment: Option<String>,
}

/// Detected 2 (+) 4 block split of a 6x6 skew-symmetric matrix: a rotation
/// block [[0, -a], [a, 0]] and an arrowhead block whose only nonzeros are the
/// first row (0, -z1, -z2, -z3) and column (z1, z2, z3).
#[derive(Clone, Debug)]
pub struct BlockStructure {
    /// Qt indices of the rotation block, ordered so Qt[pair.1][pair.0] = a.
    pub pair: (usize, usize),
    pub a: f64,
    /// Qt index of the arrowhead hub.
    pub hub: usize,
    /// Qt indices of the arrowhead leaves (ascending).
    pub leaves: [usize; 3],
    pub z: [f64; 3],
    /// Leaves whose whitened basis vector was sign-flipped to make z_i > 0.
    pub flips: [bool; 3],
    pub tolerance: f64,
}

impl BlockStructure {
    /// Orthogonal alignment S (signed permutation) with S Qt S^T equal to
    /// blockdiag(rotation, arrowhead) in the canonical ordering.
    pub fn alignment(&self) -> Array2<f64> {
        let mut s = Array2::zeros((6, 6));
        s[[0, self.pair.0]] = 1.0;
        s[[1, self.pair.1]] = 1.0;
        s[[2, self.hub]] = 1.0;
        for (k, &leaf) in self.leaves.iter().enumerate() {
            s[[3 + k, leaf]] = if self.flips[k] { -1.0 } else { 1.0 };
        }
        s
    }

    /// Canonical block matrix rebuilt from the extracted values.
    pub fn pattern(&self) -> Array2<f64> {
        let mut m = Array2::zeros((6, 6));
        m[[0, 1]] = -self.a;
        m[[1, 0]] = self.a;
        for k in 0..3 {
            m[[2, 3 + k]] = -self.z[k];
            m[[3 + k, 2]] = self.z[k];
        }
        m
    }

    /// Maps simulated block propagators back to Qt coordinates:
    /// S^T blockdiag(two, four) S.
    pub fn embed(&self, two: &Array2<f64>, four: &Array2<f64>) -> Array2<f64> {
        let mut block = Array2::zeros((6, 6));
        block.slice_mut(s![..2, ..2]).assign(two);
        block.slice_mut(s![2.., 2..]).assign(four);
        let s = self.alignment();
        s.t().dot(&block).dot(&s)
    }
}

/// Identifies the 2 (+) 4 block-arrowhead split of a 6x6 skew matrix under a
/// simultaneous signed row/column permutation.
pub fn detect_structure(qt: &Array2<f64>, tol: f64) -> Result<BlockStructure> {
    if qt.nrows() != 6 || qt.ncols() != 6 {
        return Err(KvnError::StructureViolation(format!(
            "block detection expects a 6x6 matrix, got {}x{}",
            qt.nrows(),
            qt.ncols()
        )));
    }
    let defect = skew_defect(qt);
    if defect >= 1e-10 {
        return Err(KvnError::StructureViolation(format!(
            "matrix is not skew-symmetric: max |Qt + Qt^T| = {defect:.3e}"
        )));
    }
    // Adjacency above tolerance.
    let edge = |i: usize, j: usize| qt[[i, j]].abs() > tol;
    let neighbors: Vec<Vec<usize>> = (0..6)
        .map(|i| (0..6).filter(|&j| j != i && edge(i, j)).collect())
        .collect();
    let not_found = || KvnError::StructureNotFound { tolerance: tol };
    // Rotation block: a mutually exclusive degree-1 pair.
    let mut pair = None;
    for i in 0..6 {
        if neighbors[i].len() == 1 {
            let j = neighbors[i][0];
            if j > i && neighbors[j] == vec![i] {
                if pair.is_some() {
                    return Err(not_found());
                }
                pair = Some((i, j));
            }
        }
    }
    let (p, q) = pair.ok_or_else(not_found)?;
    // Arrowhead: among the remaining four, one hub of degree 3 whose leaves
    // have degree 1.
    let rest: Vec<usize> = (0..6).filter(|&i| i != p && i != q).collect();
    let hub = *rest
        .iter()
        .find(|&&i| neighbors[i].len() == 3)
        .ok_or_else(not_found)?;
    let mut leaves = [0usize; 3];
    let mut idx = 0;
    for &i in &rest {
        if i == hub {
            continue;
        }
        if neighbors[i] != vec![hub] {
            return Err(not_found());
        }
        leaves[idx] = i;
        idx += 1;
    }
    // Orientation: a = Qt[q][p] > 0, otherwise swap the pair.
    let (pair, a) = if qt[[q, p]] > 0.0 {
        ((p, q), qt[[q, p]])
    } else {
        ((q, p), qt[[p, q]])
    };
    // Leaf signs: flip whitened directions so z_k > 0.
    let mut z = [0.0; 3];
    let mut flips = [false; 3];
    for k in 0..3 {
        let v = qt[[leaves[k], hub]];
        z[k] = v.abs();
        flips[k] = v < 0.0;
        if z[k] <= tol {
            return Err(not_found());
        }
    }
    let blocks = BlockStructure { pair, a, hub, leaves, z, flips, tolerance: tol };
    // Entrywise validation of the reassembled matrix.
    let s = blocks.alignment();
    let aligned = s.dot(qt).dot(&s.t());
    let worst = crate::linalg::max_abs(&(&aligned - &blocks.pattern()));
    if worst > tol {
        return Err(not_found());
    }
    Ok(blocks)
}

/// Gate sequences for the two propagator blocks at time t.
///
/// The rotation block is a single Ry(2 a t). The arrowhead block is the
/// seven-gate sequence V, U, V^T with V = CRy(q2->q1, -theta) CRy(q1->q2, phi)
/// and U = (X (x) I) CRy(q1->q2, beta) (X (x) I), where theta = 2 atan2(s, z1),
/// phi = 2 atan2(z2, z3), beta = 2 r t.
pub fn decompose(blocks: &BlockStructure, t: f64) -> (GateList, GateList) {
    let [z1, z2, z3] = blocks.z;
    let s = (z2 * z2 + z3 * z3).sqrt();
    let r = (z1 * z1 + z2 * z2 + z3 * z3).sqrt();
    let theta = 2.0 * s.atan2(z1);
    let phi = 2.0 * z2.atan2(z3);
    let beta = 2.0 * r * t;
    let single = GateList {
        num_qubits: 1,
        gates: vec![Gate { kind: GateKind::Ry, target: 0, control: None, angle: 2.0 * blocks.a * t }],
        comment: Some(format!("t={t} a={a}", a = blocks.a)),
    };
    let ry = |control: usize, target: usize, angle: f64| Gate {
        kind: GateKind::CRy,
        target,
        control: Some(control),
        angle,
    };
    let x = |target: usize| Gate { kind: GateKind::X, target, control: None, angle: 0.0 };
    let double = GateList {
        num_qubits: 2,
        gates: vec![
            // V
            ry(0, 1, phi),
            ry(1, 0, -theta),
            // U
            x(0),
            ry(0, 1, beta),
            x(0),
            // V^T
            ry(1, 0, theta),
            ry(0, 1, -phi),
        ],
        comment: Some(format!("t={t} z1={z1} z2={z2} z3={z3}")),
    };
    (single, double)
}

/// Dense real matrix of a single gate on `num_qubits` qubits.
fn gate_matrix(gate: &Gate, num_qubits: usize) -> Result<Array2<f64>> {
    let dim = 1usize << num_qubits;
    let bit = |qubit: usize| -> Result<usize> {
        if qubit >= num_qubits {
            return Err(KvnError::QubitOutOfRange { index: qubit, num_qubits });
        }
        Ok(1usize << (num_qubits - 1 - qubit))
    };
    let tbit = bit(gate.target)?;
    let cbit = gate.control.map(bit).transpose()?;
    let mut m = Array2::zeros((dim, dim));
    match gate.kind {
        GateKind::X => {
            for col in 0..dim {
                if cbit.map_or(true, |c| col & c != 0) {
                    m[[col ^ tbit, col]] = 1.0;
                } else {
                    m[[col, col]] = 1.0;
                }
            }
        }
        GateKind::Ry | GateKind::CRy => {
            let (sh, ch) = (gate.angle / 2.0).sin_cos();
            for col in 0..dim {
                if !cbit.map_or(true, |c| col & c != 0) {
                    m[[col, col]] = 1.0;
                    continue;
                }
                if col & tbit == 0 {
                    // Ry |0> = cos |0> + sin |1>
                    m[[col, col]] = ch;
                    m[[col | tbit, col]] = sh;
                } else {
                    // Ry |1> = -sin |0> + cos |1>
                    m[[col ^ tbit, col]] = -sh;
                    m[[col, col]] = ch;
                }
            }
        }
    }
    Ok(m)
}

/// Multiplies the gate list into a dense orthogonal matrix; gates[0] acts
/// first, so the product is U_k ... U_1.
pub fn simulate(gates: &GateList) -> Result<Array2<f64>> {
    let dim = 1usize << gates.num_qubits;
    let mut total = Array2::eye(dim);
    for gate in &gates.gates {
        total = gate_matrix(gate, gates.num_qubits)?.dot(&total);
    }
    Ok(total)
}

/// Renders the gate list in the textual format: one gate per line
/// (`ry q[i] <angle>`, `cry q[c] q[t] <angle>`, `x q[i]`) with angles as
/// decimal radians at 17 significant digits.
pub fn render_circuit(gates: &GateList) -> String {
    let mut out = String::new();
    if let Some(c) = &gates.comment {
        let _ = writeln!(out, "# {c}");
    }
    for g in &gates.gates {
        match g.kind {
            GateKind::Ry => {
                let _ = writeln!(out, "ry q[{}] {:.16e}", g.target, g.angle);
            }
            GateKind::CRy => {
                let _ = writeln!(
                    out,
                    "cry q[{}] q[{}] {:.16e}",
                    g.control.unwrap(),
                    g.target,
                    g.angle
                );
            }
            GateKind::X => {
                let _ = writeln!(out, "x q[{}]", g.target);
            }
        }
    }
    out
}

/// Same lines wrapped with a `qreg` declaration.
pub fn render_circuit_qasm_lite(gates: &GateList) -> String {
    let mut out = String::new();
    if let Some(c) = &gates.comment {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "qreg q[{}];", gates.num_qubits);
    for g in &gates.gates {
        match g.kind {
            GateKind::Ry => {
                let _ = writeln!(out, "ry q[{}] {:.16e}", g.target, g.angle);
            }
            GateKind::CRy => {
                let _ = writeln!(
                    out,
                    "cry q[{}] q[{}] {:.16e}",
                    g.control.unwrap(),
                    g.target,
                    g.angle
                );
            }
            GateKind::X => {
                let _ = writeln!(out, "x q[{}]", g.target);
            }
        }
    }
    out
}

pub fn export_circuit(gates: &GateList, path: &Path) -> Result<()> {
    std::fs::write(path, render_circuit(gates))?;
    Ok(())
}

/// Parses the textual gate format back into a GateList.
pub fn parse_circuit(text: &str) -> Result<GateList> {
    let mut gates = Vec::new();
    let mut comment = None;
    let mut max_qubit = 0usize;
    let parse_q = |tok: &str| -> Result<usize> {
        tok.strip_prefix("q[")
            .and_then(|s| s.strip_suffix(']'))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| KvnError::Config(format!("bad qubit token `{tok}`")))
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("qreg") {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if comment.is_none() {
                comment = Some(c.trim().to_string());
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let gate = match toks[0] {
            "ry" if toks.len() == 3 => Gate {
                kind: GateKind::Ry,
                target: parse_q(toks[1])?,
                control: None,
                angle: toks[2]
                    .parse()
                    .map_err(|e| KvnError::Config(format!("bad angle: {e}")))?,
            },
            "cry" if toks.len() == 4 => Gate {
                kind: GateKind::CRy,
                control: Some(parse_q(toks[1])?),
                target: parse_q(toks[2])?,
                angle: toks[3]
                    .parse()
                    .map_err(|e| KvnError::Config(format!("bad angle: {e}")))?,
            },
            "x" if toks.len() == 2 => Gate {
                kind: GateKind::X,
                target: parse_q(toks[1])?,
                control: None,
                angle: 0.0,
            },
            other => {
                return Err(KvnError::Config(format!("unknown gate line `{other}`")));
            }
        };
        max_qubit = max_qubit.max(gate.target).max(gate.control.unwrap_or(0));
        gates.push(gate);
    }
    Ok(GateList { num_qubits: max_qubit + 1, gates, comment })
}

/// Closed-form propagator of the arrowhead generator: since A^3 = -r^2 A,
/// exp(tA) = I + sin(rt)/r A + (1 - cos(rt))/r^2 A^2.
pub fn arrowhead_exponential(z: [f64; 3], t: f64) -> Array2<f64> {
    let r = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
    let (srt, crt) = (r * t).sin_cos();
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = crt;
    for i in 0..3 {
        m[[0, i + 1]] = -srt * z[i] / r;
        m[[i + 1, 0]] = srt * z[i] / r;
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[[i + 1, j + 1]] = delta - (1.0 - crt) * z[i] * z[j] / (r * r);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::whiten;
    use crate::linalg::max_abs;
    use crate::reference;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn analytic_whitened() -> crate::estimator::WhitenedRepresentation {
        whiten(&reference::oscillator_analytic_generators().unwrap())
    }

    #[test]
    fn detects_oscillator_structure() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        assert_abs_diff_eq!(blocks.a, SQRT2, epsilon = 1e-12);
        let r = (blocks.z.iter().map(|z| z * z).sum::<f64>()).sqrt();
        assert_abs_diff_eq!(r, 2.0 * SQRT2, epsilon = 1e-12);
        for &z in &blocks.z {
            assert!(z > 0.0);
        }
        // Reassembled matrix matches entrywise.
        let s = blocks.alignment();
        let aligned = s.dot(&white.qt).dot(&s.t());
        assert!(max_abs(&(&aligned - &blocks.pattern())) < 1e-12);
    }

    #[test]
    fn oscillator_arrowhead_golden_values() {
        // Frozen output of whiten() on the analytic Gram pair; the invariant
        // checks are r = 2 sqrt(2) and positivity.
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let golden = crate::reference::OSCILLATOR_ARROWHEAD_Z;
        for (got, want) in blocks.z.iter().zip(&golden) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn dense_skew_matrix_has_no_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut qt = Array2::zeros((6, 6));
        for i in 0..6 {
            for j in 0..i {
                let v: f64 = rng.random_range(-1.0..1.0);
                qt[[i, j]] = v;
                qt[[j, i]] = -v;
            }
        }
        assert!(matches!(
            detect_structure(&qt, 1e-8),
            Err(KvnError::StructureNotFound { .. })
        ));
    }

    #[test]
    fn zero_time_circuits_are_identity() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let (c1, c2) = decompose(&blocks, 0.0);
        let u1 = simulate(&c1).unwrap();
        let u2 = simulate(&c2).unwrap();
        assert!(max_abs(&(&u1 - &Array2::<f64>::eye(2))) < 1e-14);
        assert!(max_abs(&(&u2 - &Array2::<f64>::eye(4))) < 1e-14);
    }

    #[test]
    fn circuit_matches_arrowhead_exponential_for_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let z = [
                rng.random_range(1e-6..2.0),
                rng.random_range(1e-6..2.0),
                rng.random_range(1e-6..2.0),
            ];
            let t = rng.random_range(0.0..5.0);
            let blocks = BlockStructure {
                pair: (0, 1),
                a: 1.0,
                hub: 2,
                leaves: [3, 4, 5],
                z,
                flips: [false; 3],
                tolerance: 1e-10,
            };
            let (_, c2) = decompose(&blocks, t);
            let u = simulate(&c2).unwrap();
            let exact = arrowhead_exponential(z, t);
            assert!(
                max_abs(&(&u - &exact)) < 1e-12,
                "z = {z:?}, t = {t}: defect {
                    }",
                max_abs(&(&u - &exact))
            );
        }
    }

    #[test]
    fn single_qubit_block_is_a_rotation() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let t = 0.77;
        let (c1, _) = decompose(&blocks, t);
        let u = simulate(&c1).unwrap();
        let (s, c) = (SQRT2 * t).sin_cos();
        let expect = array![[c, -s], [s, c]];
        assert!(max_abs(&(&u - &expect)) < 1e-14);
    }

    #[test]
    fn controlled_ry_matrix_matches_reference_form() {
        // CRy^{q2->q1}(-theta) in the |q1 q2> ordering.
        let theta = 0.9_f64;
        let g = Gate {
            kind: GateKind::CRy,
            control: Some(1),
            target: 0,
            angle: -theta,
        };
        let m = gate_matrix(&g, 2).unwrap();
        let (sh, ch) = (theta / 2.0).sin_cos();
        let expect = array![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, ch, 0.0, sh],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -sh, 0.0, ch]
        ];
        assert!(max_abs(&(&m - &expect)) < 1e-15);
        // CRy^{q1->q2}(phi).
        let phi = 0.4_f64;
        let g2 = Gate {
            kind: GateKind::CRy,
            control: Some(0),
            target: 1,
            angle: phi,
        };
        let m2 = gate_matrix(&g2, 2).unwrap();
        let (sh2, ch2) = (phi / 2.0).sin_cos();
        let expect2 = array![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, ch2, -sh2],
            [0.0, 0.0, sh2, ch2]
        ];
        assert!(max_abs(&(&m2 - &expect2)) < 1e-15);
    }

    #[test]
    fn pauli_x_matrix() {
        let g = Gate { kind: GateKind::X, target: 0, control: None, angle: 0.0 };
        let m = gate_matrix(&g, 1).unwrap();
        assert_eq!(m, array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn simulated_circuits_are_orthogonal() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        for &t in &[0.1, 0.9, 3.3] {
            let (c1, c2) = decompose(&blocks, t);
            for u in [simulate(&c1).unwrap(), simulate(&c2).unwrap()] {
                let dim = u.nrows();
                let defect = max_abs(&(&u.t().dot(&u) - &Array2::<f64>::eye(dim)));
                assert!(defect < 1e-12);
            }
        }
    }

    #[test]
    fn angle_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let z1: f64 = rng.random_range(1e-3..2.0);
            let z2: f64 = rng.random_range(1e-3..2.0);
            let z3: f64 = rng.random_range(1e-3..2.0);
            let s = (z2 * z2 + z3 * z3).sqrt();
            let r = (z1 * z1 + s * s).sqrt();
            let theta = 2.0 * s.atan2(z1);
            let phi = 2.0 * z2.atan2(z3);
            assert_abs_diff_eq!((theta / 2.0).cos(), z1 / r, epsilon = 1e-13);
            assert_abs_diff_eq!((theta / 2.0).sin(), s / r, epsilon = 1e-13);
            assert_abs_diff_eq!((phi / 2.0).cos(), z3 / s, epsilon = 1e-13);
            assert_abs_diff_eq!((phi / 2.0).sin(), z2 / s, epsilon = 1e-13);
        }
    }

    #[test]
    fn atan2_covers_degenerate_axes() {
        // z1 = 0 gives theta = pi, z3 = 0 gives phi = pi; both circuits stay
        // orthogonal and correct.
        for z in [[0.0_f64, 1.0, 1.0], [1.0, 1.0, 0.0]] {
            let z = [z[0].max(1e-300), z[1], z[2].max(1e-300)];
            let blocks = BlockStructure {
                pair: (0, 1),
                a: 1.0,
                hub: 2,
                leaves: [3, 4, 5],
                z,
                flips: [false; 3],
                tolerance: 1e-10,
            };
            let (_, c2) = decompose(&blocks, 1.3);
            let u = simulate(&c2).unwrap();
            let exact = arrowhead_exponential(z, 1.3);
            assert!(max_abs(&(&u - &exact)) < 1e-12);
        }
    }

    #[test]
    fn export_parse_round_trip() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let (c1, c2) = decompose(&blocks, 1.0);
        for c in [c1, c2] {
            let text = render_circuit(&c);
            let parsed = parse_circuit(&text).unwrap();
            assert_eq!(parsed, c);
            // qasm-lite parses to the same list.
            let parsed2 = parse_circuit(&render_circuit_qasm_lite(&c)).unwrap();
            assert_eq!(parsed2, c);
        }
    }

    #[test]
    fn zero_time_export_keeps_v_and_vt() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let (_, c2) = decompose(&blocks, 0.0);
        let text = render_circuit(&c2);
        // beta = 0 but the V / V^T rotations are still emitted.
        let angles: Vec<f64> = c2.gates.iter().map(|g| g.angle).collect();
        assert_eq!(angles.len(), 7);
        assert_eq!(angles[3], 0.0);
        assert!(angles[0] == -angles[6] && angles[1] == -angles[5]);
        assert_eq!(text.lines().filter(|l| l.starts_with("cry")).count(), 5);
        assert_eq!(text.lines().filter(|l| l.starts_with("x ")).count(), 2);
    }

    #[test]
    fn end_to_end_propagator_equivalence() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let period = 2.0 * std::f64::consts::PI / SQRT2;
        for &t in &[0.1, 0.5, 1.0, period] {
            let (c1, c2) = decompose(&blocks, t);
            let u1 = simulate(&c1).unwrap();
            let u2 = simulate(&c2).unwrap();
            let rebuilt = blocks.embed(&u1, &u2);
            // Reference propagator via the Hermitian eigendecomposition.
            let k = white.rank();
            let mut expm = Array2::zeros((k, k));
            for j in 0..k {
                let mut e = ndarray::Array1::from_elem(k, num_complex::Complex64::new(0.0, 0.0));
                e[j] = num_complex::Complex64::new(1.0, 0.0);
                let col = white.apply_propagator(&e, t);
                for i in 0..k {
                    expm[[i, j]] = col[i].re;
                }
            }
            let defect = max_abs(&(&rebuilt - &expm));
            assert!(defect < 1e-10, "t = {t}: defect {defect:.3e}");
        }
    }

    #[test]
    fn golden_circuit_file_for_t_one() {
        let white = analytic_whitened();
        let blocks = detect_structure(&white.qt, 1e-8).unwrap();
        let (c1, c2) = decompose(&blocks, 1.0);
        let rendered = format!("{}{}", render_circuit(&c1), render_circuit(&c2));
        let fixture = include_str!("../tests/fixtures/oscillator_circuit_t1.gates");
        assert_eq!(rendered, fixture);
    }
}
