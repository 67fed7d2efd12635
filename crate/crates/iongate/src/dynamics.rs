//! Ising spin-chain Hamiltonians for the driven three-qubit register, the
//! piecewise-constant propagator, the gate-ratio sweep and a lab-frame check
//! of the rotating-wave approximation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{embed, expm_herm, pauli_axis, pauli_x, pauli_z, CMatrix, MathError, StateVector};
use crate::metrics::{classical_fidelity, OutcomeTable, TruthTable};

pub const TAU: f64 = std::f64::consts::TAU;

/// Convenience for "×2π Hz" inputs: 31 Hz → 2π·31 rad/s.
pub fn rad_from_hz(f_hz: f64) -> f64 {
    TAU * f_hz
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("empty sweep grid")]
    EmptyGrid,
    #[error("omega values must be positive (got {0})")]
    NonPositiveOmega(f64),
    #[error("under-resolved time step: {0} steps per drive cycle (need >= 50)")]
    UnderResolved(usize),
}

/// Couplings and drive of the three-qubit chain, rotating frame.
/// All frequencies in rad/s, phases in rad; `target` is the driven qubit
/// (0-indexed; 1 is the middle qubit and the paper's default).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainParams {
    pub j12: f64,
    pub j23: f64,
    pub j13: f64,
    pub delta: f64,
    pub omega: f64,
    pub phi: f64,
    pub target: usize,
}

impl ChainParams {
    /// The paper's operating point: J12 = J23 = j, δ = delta_ratio·j,
    /// Ω = omega_ratio·j, φ = 0, drive on the middle qubit, J13 = 0.
    pub fn toffoli(j: f64, delta_ratio: f64, omega_ratio: f64) -> Self {
        Self {
            j12: j,
            j23: j,
            j13: 0.0,
            delta: delta_ratio * j,
            omega: omega_ratio * j,
            phi: 0.0,
            target: 1,
        }
    }

    /// Pure zz configuration (no drive), used by conditional-evolution gates.
    pub fn zz_only(j12: f64, j23: f64, j13: f64) -> Self {
        Self { j12, j23, j13, delta: 0.0, omega: 0.0, phi: 0.0, target: 1 }
    }
}

/// Lab-frame parameters: chain couplings plus bare qubit frequencies and the
/// explicit drive frequency ω_x.
#[derive(Debug, Clone, Copy)]
pub struct LabParams {
    pub chain: ChainParams,
    pub omega_qubits: [f64; 3],
    pub omega_drive: f64,
}

impl LabParams {
    /// The paper's tuning ω_x = ω_target − δ.
    pub fn tuned(chain: ChainParams, omega_qubits: [f64; 3]) -> Self {
        let omega_drive = omega_qubits[chain.target] - chain.delta;
        Self { chain, omega_qubits, omega_drive }
    }
}

fn zz_term(i: usize, j: usize, coeff: f64) -> CMatrix {
    let zz = crate::math::kron(&pauli_z(), &pauli_z());
    embed(&zz, &[i, j], 3).expect("fixed indices").scale(C64::new(coeff, 0.0))
}

/// H/ħ of Eq.-(1) form: (J12/2)σz₁σz₂ + (J23/2)σz₂σz₃ [+ (J13/2)σz₁σz₃]
/// + (δ/2)σz_t + (Ω/2)σx_t, as an 8×8 Hermitian matrix in rad/s.
pub fn build_h_tof(p: &ChainParams) -> CMatrix {
    let mut h = zz_term(0, 1, 0.5 * p.j12).add(&zz_term(1, 2, 0.5 * p.j23));
    if p.j13 != 0.0 {
        h = h.add(&zz_term(0, 2, 0.5 * p.j13));
    }
    let sz_t = embed(&pauli_z(), &[p.target], 3).expect("target in range");
    let sx_t = embed(&pauli_x(), &[p.target], 3).expect("target in range");
    h.add(&sz_t.scale(C64::new(0.5 * p.delta, 0.0)))
        .add(&sx_t.scale(C64::new(0.5 * p.omega, 0.0)))
}

/// Rotating-frame Hamiltonian with a phased drive: the σx term of
/// [`build_h_tof`] becomes (Ω/2)(cos φ σx + sin φ σy); φ = 0 recovers it.
pub fn build_h_rot(p: &ChainParams) -> CMatrix {
    let mut h = zz_term(0, 1, 0.5 * p.j12).add(&zz_term(1, 2, 0.5 * p.j23));
    if p.j13 != 0.0 {
        h = h.add(&zz_term(0, 2, 0.5 * p.j13));
    }
    let sz_t = embed(&pauli_z(), &[p.target], 3).expect("target in range");
    let drive = embed(&pauli_axis(p.phi), &[p.target], 3).expect("target in range");
    h.add(&sz_t.scale(C64::new(0.5 * p.delta, 0.0)))
        .add(&drive.scale(C64::new(0.5 * p.omega, 0.0)))
}

/// ψ ← Π exp(−i Hᵢ tᵢ) ψ applied in list order.
pub fn evolve_piecewise(
    segments: &[(CMatrix, f64)],
    psi: &StateVector,
) -> Result<StateVector, DynamicsError> {
    let mut out = psi.clone();
    for (h, t) in segments {
        if h.rows() != out.dim() {
            return Err(MathError::DimensionMismatch(format!(
                "segment is {}x{}, state dim {}",
                h.rows(),
                h.cols(),
                out.dim()
            ))
            .into());
        }
        out = out.apply(&expm_herm(h, *t)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub omega_over_j: f64,
    pub gate_time_s: f64,
    pub classical_fidelity: f64,
}

/// Gate-ratio sweep curve with detected local fidelity maxima.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Indices into `points` that are strictly greater than both neighbours.
    pub peak_indices: Vec<usize>,
}

impl SweepResult {
    pub fn rightmost_peak(&self) -> Option<&SweepPoint> {
        self.peak_indices.last().map(|&i| &self.points[i])
    }

    /// CSV with header `omega_over_j,gate_time_s,classical_fidelity`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega_over_j,gate_time_s,classical_fidelity\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:.6},{:.6e},{:.6}\n",
                p.omega_over_j, p.gate_time_s, p.classical_fidelity
            ));
        }
        s
    }
}

/// Evolve H_TOF for t = π/Ω at each Ω/J in `omega_grid` (sorted ascending
/// internally) and score the classical Toffoli fidelity over all 8 inputs.
pub fn sweep_omega(
    j: f64,
    delta_ratio: f64,
    omega_grid: &[f64],
) -> Result<SweepResult, DynamicsError> {
    if omega_grid.is_empty() {
        return Err(DynamicsError::EmptyGrid);
    }
    let mut grid: Vec<f64> = omega_grid.to_vec();
    if let Some(&bad) = grid.iter().find(|&&r| r <= 0.0) {
        return Err(DynamicsError::NonPositiveOmega(bad));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tt = TruthTable::toffoli();
    let mut points = Vec::with_capacity(grid.len());
    for ratio in grid {
        let p = ChainParams::toffoli(j, delta_ratio, ratio);
        let gate_time = std::f64::consts::PI / p.omega;
        let u = expm_herm(&build_h_tof(&p), gate_time)?;
        let table = OutcomeTable::from_unitary(&u);
        points.push(SweepPoint {
            omega_over_j: ratio,
            gate_time_s: gate_time,
            classical_fidelity: classical_fidelity(&table, &tt),
        });
    }
    let peak_indices = (1..points.len().saturating_sub(1))
        .filter(|&i| {
            points[i].classical_fidelity > points[i - 1].classical_fidelity
                && points[i].classical_fidelity > points[i + 1].classical_fidelity
        })
        .collect();
    Ok(SweepResult { points, peak_indices })
}

/// Integrate the explicit-drive lab-frame Hamiltonian by midpoint-sampled
/// piecewise-constant steps and compare outcome statistics against the
/// rotating-frame propagator. Returns the worst-case total-variation gap
/// between the two outcome distributions over the 8 computational inputs.
pub fn rwa_validate(p: &LabParams, steps_per_cycle: usize) -> Result<f64, DynamicsError> {
    if steps_per_cycle < 50 {
        return Err(DynamicsError::UnderResolved(steps_per_cycle));
    }
    let chain = p.chain;
    let t_total = if chain.omega > 0.0 {
        std::f64::consts::PI / chain.omega
    } else {
        100.0 * TAU / p.omega_drive
    };
    let cycles = t_total * p.omega_drive / TAU;
    let n_steps = (cycles * steps_per_cycle as f64).ceil().max(1.0) as usize;
    let dt = t_total / n_steps as f64;

    let mut h_static = zz_term(0, 1, 0.5 * chain.j12).add(&zz_term(1, 2, 0.5 * chain.j23));
    if chain.j13 != 0.0 {
        h_static = h_static.add(&zz_term(0, 2, 0.5 * chain.j13));
    }
    for q in 0..3 {
        let sz = embed(&pauli_z(), &[q], 3)?;
        h_static = h_static.add(&sz.scale(C64::new(0.5 * p.omega_qubits[q], 0.0)));
    }
    let sx_t = embed(&pauli_x(), &[chain.target], 3)?;

    let mut u_lab = CMatrix::identity(8);
    for k in 0..n_steps {
        let tm = (k as f64 + 0.5) * dt;
        // Eq.-(2) drive carries the full Ω (no factor 1/2)
        let amp = chain.omega * (p.omega_drive * tm + chain.phi).cos();
        let h = h_static.add(&sx_t.scale(C64::new(amp, 0.0)));
        u_lab = expm_herm(&h, dt)?.mul(&u_lab);
    }

    let mut rot_chain = chain;
    rot_chain.delta = p.omega_qubits[chain.target] - p.omega_drive;
    let u_rot = expm_herm(&build_h_rot(&rot_chain), t_total)?;

    let mut worst: f64 = 0.0;
    for x in 0..8 {
        let tv: f64 = (0..8)
            .map(|y| (u_lab[(y, x)].norm_sqr() - u_rot[(y, x)].norm_sqr()).abs())
            .sum::<f64>()
            * 0.5;
        worst = worst.max(tv);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::kron;
    use proptest::prelude::*;

    const J: f64 = TAU * 31.0;

    /// Generalized-Rabi closed form for the Toffoli fidelity at δ = 2J,
    /// t = π/Ω: the independent oracle for the sweep.
    pub(crate) fn sector_fidelity(u: f64) -> f64 {
        let p = |d: f64| {
            let w = (u * u + d * d).sqrt();
            (u * u / (w * w)) * (0.5 * std::f64::consts::PI * w / u).sin().powi(2)
        };
        1.0 - 0.5 * p(2.0) - 0.25 * p(4.0)
    }

    #[test]
    fn h_tof_diagonal_resonance_structure() {
        // Ω=0, J=1, δ=2: diagonal 0 at |111⟩, +2 at |000⟩, −2 at |010⟩
        let p = ChainParams::toffoli(1.0, 2.0, 0.0);
        let h = build_h_tof(&p);
        assert!((h[(0b111, 0b111)].re - 0.0).abs() < 1e-15);
        assert!((h[(0b000, 0b000)].re - 2.0).abs() < 1e-15);
        assert!((h[(0b010, 0b010)].re + 2.0).abs() < 1e-15);
    }

    #[test]
    fn h_tof_effective_detuning_per_sector() {
        // detuning of the driven qubit in sector (s1, s3) is J(s1+s3) + δ;
        // read it off the diagonal as (H[s,0] − H[s,1])/2 per outer sector
        let p = ChainParams::toffoli(1.0, 2.0, 0.0);
        let h = build_h_tof(&p);
        for (b0, b2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s0 = if b0 == 0 { 1.0 } else { -1.0 };
            let s2 = if b2 == 0 { 1.0 } else { -1.0 };
            let up = (b0 << 2) | b2;
            let dn = (b0 << 2) | 0b010 | b2;
            let detuning = h[(up, up)].re - h[(dn, dn)].re;
            assert!((detuning - (1.0 * (s0 + s2) + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn h_tof_reduces_to_pure_drive() {
        let p = ChainParams { j12: 0.0, j23: 0.0, j13: 0.0, delta: 0.0, omega: 2.0, phi: 0.0, target: 1 };
        let want = embed(&pauli_x(), &[1], 3).unwrap();
        assert!(build_h_tof(&p).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn h_rot_matches_h_tof_at_phi_zero() {
        let p = ChainParams::toffoli(J, 2.0, 1.1);
        assert!(build_h_rot(&p).max_abs_diff(&build_h_tof(&p)) < 1e-12);
    }

    #[test]
    fn h_rot_phi_pi_negates_drive() {
        let mut p = ChainParams::toffoli(J, 2.0, 1.1);
        p.phi = std::f64::consts::PI;
        let mut q = p;
        q.phi = 0.0;
        q.omega = -p.omega;
        assert!(build_h_rot(&p).max_abs_diff(&build_h_tof(&q)) < 1e-12);
    }

    #[test]
    fn h_rot_phi_half_pi_drives_about_y() {
        // a π-pulse about σy still takes |0⟩₂ to |1⟩₂
        let p = ChainParams {
            j12: 0.0,
            j23: 0.0,
            j13: 0.0,
            delta: 0.0,
            omega: 1.0,
            phi: std::f64::consts::FRAC_PI_2,
            target: 1,
        };
        let u = expm_herm(&build_h_rot(&p), std::f64::consts::PI).unwrap();
        let out = StateVector::basis(3, 0b000).apply(&u);
        assert!((out.probability(0b010) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_tof_commutes_with_outer_sz() {
        let h = build_h_tof(&ChainParams::toffoli(J, 2.0, 1.1));
        for q in [0usize, 2] {
            let sz = embed(&pauli_z(), &[q], 3).unwrap();
            let comm = h.mul(&sz).max_abs_diff(&sz.mul(&h));
            assert!(comm < 1e-12, "[H, sz_{q}] = {comm}");
        }
    }

    #[test]
    fn evolve_empty_is_identity() {
        let psi = StateVector::basis(3, 5);
        let out = evolve_piecewise(&[], &psi).unwrap();
        assert!((out.inner(&psi).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_semigroup_split() {
        let h = build_h_tof(&ChainParams::toffoli(J, 2.0, 1.1));
        let psi = StateVector::basis(3, 0b101);
        let one = evolve_piecewise(&[(h.clone(), 3e-3)], &psi).unwrap();
        let two = evolve_piecewise(&[(h.clone(), 1e-3), (h.clone(), 2e-3)], &psi).unwrap();
        let d: f64 = one
            .amplitudes()
            .iter()
            .zip(two.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
        assert!((two.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolve_dimension_mismatch_rejected() {
        let h = CMatrix::identity(4);
        assert!(evolve_piecewise(&[(h, 1.0)], &StateVector::basis(3, 0)).is_err());
    }

    #[test]
    fn resonant_toffoli_flip() {
        // Ω = 1.1J, δ = 2J, t = π/Ω maps |101⟩ → |111⟩ with high probability
        let p = ChainParams::toffoli(J, 2.0, 1.1);
        let t = std::f64::consts::PI / p.omega;
        let out = evolve_piecewise(&[(build_h_tof(&p), t)], &StateVector::basis(3, 0b101)).unwrap();
        assert!(out.probability(0b111) >= 0.98);
    }

    #[test]
    fn omega_zero_evolution_is_diagonal() {
        let p = ChainParams::toffoli(J, 2.0, 0.0);
        let u = expm_herm(&build_h_tof(&p), 0.0149).unwrap();
        for x in 0..8 {
            assert!((u[(x, x)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_matches_sector_oracle() {
        let grid = [0.3, 0.5, 0.9, 1.0, 1.1, 1.2];
        let res = sweep_omega(J, 2.0, &grid).unwrap();
        for pt in &res.points {
            let oracle = sector_fidelity(pt.omega_over_j);
            assert!(
                (pt.classical_fidelity - oracle).abs() < 1e-9,
                "u={} sim={} oracle={}",
                pt.omega_over_j,
                pt.classical_fidelity,
                oracle
            );
        }
    }

    #[test]
    fn sweep_operating_point_values() {
        // frozen from the sector oracle: F(1.1) = 0.9962227
        let res = sweep_omega(J, 2.0, &[1.05, 1.1, 1.15]).unwrap();
        let f = res.points[1].classical_fidelity;
        assert!((f - 0.9962227).abs() < 1e-6);
        // gate time at Ω = 1.1J with J = 2π×31 Hz: 1/(2·1.1·31) s
        assert!((res.points[1].gate_time_s - 0.01466276).abs() < 1e-7);
    }

    #[test]
    fn sweep_rightmost_peak_location() {
        let grid: Vec<f64> = (0..400).map(|i| 0.05 + 1.25 * i as f64 / 399.0).collect();
        let res = sweep_omega(J, 2.0, &grid).unwrap();
        let peak = res.rightmost_peak().expect("a peak exists");
        assert!(peak.omega_over_j >= 1.05 && peak.omega_over_j <= 1.15);
        assert!(peak.classical_fidelity >= 0.985);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(matches!(sweep_omega(J, 2.0, &[]), Err(DynamicsError::EmptyGrid)));
        assert!(matches!(
            sweep_omega(J, 2.0, &[0.5, -0.1]),
            Err(DynamicsError::NonPositiveOmega(_))
        ));
    }

    #[test]
    fn sweep_csv_shape() {
        let res = sweep_omega(J, 2.0, &[0.5, 1.0]).unwrap();
        let csv = res.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("omega_over_j,gate_time_s,classical_fidelity"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn rwa_gap_zero_drive() {
        let mut chain = ChainParams::toffoli(J, 2.0, 1.1);
        chain.omega = 0.0;
        let lab = LabParams::tuned(chain, [TAU * 1.3e5, TAU * 1e5, TAU * 0.8e5]);
        let gap = rwa_validate(&lab, 50).unwrap();
        assert!(gap < 1e-8, "gap = {gap}");
    }

    #[test]
    fn rwa_under_resolved_rejected() {
        let chain = ChainParams::toffoli(J, 2.0, 1.1);
        let lab = LabParams::tuned(chain, [TAU * 1.3e5, TAU * 1e5, TAU * 0.8e5]);
        assert!(matches!(rwa_validate(&lab, 10), Err(DynamicsError::UnderResolved(10))));
    }

    #[test]
    fn zz_term_uses_embed_correctly() {
        let direct = embed(&kron(&pauli_z(), &pauli_z()), &[0, 2], 3).unwrap();
        assert!(zz_term(0, 2, 1.0).max_abs_diff(&direct) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn prop_sweep_scale_invariance(c in 0.5f64..20.0, u in 0.2f64..1.3) {
            // fidelity at (J, δ, Ω, t) equals fidelity at (cJ, cδ, cΩ, t/c)
            let a = sweep_omega(J, 2.0, &[u]).unwrap().points[0].classical_fidelity;
            let b = sweep_omega(c * J, 2.0, &[u]).unwrap().points[0].classical_fidelity;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
