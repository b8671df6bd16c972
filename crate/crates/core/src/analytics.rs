//! Closed-form crosstalk error budget of an MS gate acting on `N` active ions
//! with `M` illuminated spectators.
//!
//! Frequencies and rates are angular (rad/s) and times are in seconds.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::noise::{KrausChannel, NoiseError};
use crate::pauli::Pauli;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("{0}: per-mode arrays differ in length")]
    LengthMismatch(&'static str),
    #[error("detuning must be nonzero")]
    ZeroDetuning,
    #[error("mode frequency must be nonzero")]
    ZeroModeFrequency,
    #[error("invalid input: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Channel(#[from] NoiseError),
}

/// `χ = Σ_j (Ω_j/Ω)²`.
pub fn chi(omega_ratios: &[f64]) -> f64 {
    omega_ratios.iter().map(|r| r * r).sum()
}

/// Spectator rotation by the ideal MS interaction: `(π²/4) N χ`.
pub fn eps_ct_ms(n: usize, omega_ratios: &[f64]) -> f64 {
    PI * PI / 4.0 * n as f64 * chi(omega_ratios)
}

/// Off-resonant carrier excitation: `½ (Ω/δ)² χ`.
pub fn eps_ct_off(omega: f64, delta: f64, omega_ratios: &[f64]) -> Result<f64, AnalyticsError> {
    if delta == 0.0 {
        return Err(AnalyticsError::ZeroDetuning);
    }
    let r = omega / delta;
    Ok(0.5 * r * r * chi(omega_ratios))
}

/// Debye-Waller fluctuations:
/// `(πN/4) Σ_n Σ_j ((Ω_j/Ω) η_n² / (N+M))² (2n̄_n+1)²`.
pub fn eps_ct_dw(n: usize, m: usize, omega_ratios: &[f64], eta: &[f64], nbar: &[f64]) -> Result<f64, AnalyticsError> {
    if eta.len() != nbar.len() {
        return Err(AnalyticsError::LengthMismatch("eta_n, nbar_n"));
    }
    let nm = (n + m) as f64;
    let mut s = 0.0;
    for (e, nb) in eta.iter().zip(nbar) {
        let th = (2.0 * nb + 1.0) * (2.0 * nb + 1.0);
        for r in omega_ratios {
            let t = r * e * e / nm;
            s += t * t * th;
        }
    }
    Ok(PI * n as f64 / 4.0 * s)
}

/// Residual spin-motion entanglement of the non-COM modes:
/// `Σ_j Σ_{n≥2} (Ω_j/ω_n)² (η_n M_{j,n})² (2n̄_n+1)`.
///
/// `omega_j[j]` are absolute spectator Rabi frequencies and `mode_matrix[j][n]`
/// the mode eigenvector elements. Mode 0 is the COM mode and is skipped.
pub fn eps_ct_loops(omega_j: &[f64], omega_n: &[f64], eta: &[f64], mode_matrix: &[Vec<f64>], nbar: &[f64]) -> Result<f64, AnalyticsError> {
    if omega_n.len() != eta.len() || eta.len() != nbar.len() {
        return Err(AnalyticsError::LengthMismatch("omega_n, eta_n, nbar_n"));
    }
    if mode_matrix.len() != omega_j.len() || mode_matrix.iter().any(|row| row.len() != omega_n.len()) {
        return Err(AnalyticsError::LengthMismatch("M_jn"));
    }
    let mut s = 0.0;
    for (j, oj) in omega_j.iter().enumerate() {
        for n in 1..omega_n.len() {
            if omega_n[n] == 0.0 {
                return Err(AnalyticsError::ZeroModeFrequency);
            }
            let a = oj / omega_n[n];
            let b = eta[n] * mode_matrix[j][n];
            s += a * a * b * b * (2.0 * nbar[n] + 1.0);
        }
    }
    Ok(s)
}

/// Collective dephasing during the gate: `2N² t_g / T₂`.
pub fn eps_ct_deph(n: usize, t_g: f64, t2: f64) -> f64 {
    2.0 * (n * n) as f64 * t_g / t2
}

/// Intensity noise: `Γ_I t_g Σ_n η_n² (n̄_n + ½) χ`, summed over every given mode.
pub fn eps_ct_int(gamma_i: f64, t_g: f64, eta: &[f64], nbar: &[f64], omega_ratios: &[f64]) -> Result<f64, AnalyticsError> {
    if eta.len() != nbar.len() {
        return Err(AnalyticsError::LengthMismatch("eta_n, nbar_n"));
    }
    let modes: f64 = eta.iter().zip(nbar).map(|(e, nb)| e * e * (nb + 0.5)).sum();
    Ok(gamma_i * t_g * modes * chi(omega_ratios))
}

/// Total crosstalk infidelity `χ(ε_MS + π²N/4 + 2N² t_g/T₂) − 2N² t_g/T₂`,
/// clamped at zero. The flag reports whether the clamp was applied.
pub fn eps_ct_total(eps_ms: f64, n: usize, chi: f64, t_g: f64, t2: f64) -> (f64, bool) {
    let deph = eps_ct_deph(n, t_g, t2);
    let v = chi * (eps_ms + PI * PI / 4.0 * n as f64 + deph) - deph;
    if v < 0.0 {
        (0.0, true)
    } else {
        (v, false)
    }
}

/// Number of single- and two-qubit Pauli errors on `n` qubits, `15n(n−1)/2 + 3n`.
pub fn n_ms(n: usize) -> usize {
    15 * n * n.saturating_sub(1) / 2 + 3 * n
}

/// Same count over active and spectator ions.
pub fn n_ct(n: usize, m: usize) -> usize {
    n_ms(n + m)
}

/// Channel rates `(p_MS, p_ct)` from infidelities. `ZZ` errors leave the
/// target GHZ state invariant, so `p_MS = ε_MS N_MS / (N_MS − N(N−1)/2)`;
/// every spectator error is visible, so `p_ct = ε_ct`.
pub fn channel_rates(eps_ms: f64, eps_ct: f64, n: usize, _m: usize) -> (f64, f64) {
    let nms = n_ms(n) as f64;
    let zz = (n * n.saturating_sub(1) / 2) as f64;
    (eps_ms * nms / (nms - zz), eps_ct)
}

/// Every Pauli of weight one or two on `qubits` out of `arity`.
fn low_weight_paulis(arity: usize, qubits: &[usize]) -> Vec<Vec<Pauli>> {
    let mut out = Vec::new();
    for (i, &a) in qubits.iter().enumerate() {
        for pa in Pauli::NON_IDENTITY {
            let mut v = vec![Pauli::I; arity];
            v[a] = pa;
            out.push(v);
        }
        for &b in &qubits[i + 1..] {
            for pa in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                for pb in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                    if pa == Pauli::I && pb == Pauli::I {
                        continue;
                    }
                    let mut v = vec![Pauli::I; arity];
                    v[a] = pa;
                    v[b] = pb;
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Depolarising channel on `n` active and `m` spectator ions: weight `p_ms`
/// spread uniformly over the `N_MS` low-weight Paulis of the active ions, and
/// weight `p_ct` over the `N_ct` low-weight Paulis of all ions. Active ions
/// come first.
pub fn depolarising_ms_channel(p_ms: f64, p_ct: f64, n: usize, m: usize) -> Result<KrausChannel, AnalyticsError> {
    let arity = n + m;
    if n == 0 || arity > 6 {
        return Err(AnalyticsError::Invalid("need 1 ≤ N and N + M ≤ 6"));
    }
    let mut weights: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
    let active: Vec<usize> = (0..n).collect();
    let all: Vec<usize> = (0..arity).collect();
    for (qs, total, count) in [(&active, p_ms, n_ms(n)), (&all, p_ct, n_ct(n, m))] {
        for v in low_weight_paulis(arity, qs) {
            *weights.entry(v).or_insert(0.0) += total / count as f64;
        }
    }
    let branches: Vec<(f64, &[Pauli])> = weights.iter().map(|(v, w)| (*w, v.as_slice())).collect();
    Ok(KrausChannel::from_paulis(arity, &branches)?)
}

/// Effective rotation angle from a residual intensity fraction:
/// `Θ_eff = Θ √(I_r / ⟨I⟩)`.
pub fn single_qubit_ct_angle(theta: f64, intensity_ratio: f64) -> f64 {
    theta * libm::sqrt(intensity_ratio)
}

/// Physical inputs of the budget.
#[derive(Clone, Debug, PartialEq)]
pub struct MsBudgetInput {
    /// Active ions.
    pub n: usize,
    /// Spectators; must equal `omega_ratios.len()`.
    pub m: usize,
    pub omega_ratios: Vec<f64>,
    pub omega: f64,
    pub delta: f64,
    pub eta_n: Vec<f64>,
    pub omega_n: Vec<f64>,
    pub nbar_n: Vec<f64>,
    /// `m × modes` eigenvector elements.
    pub m_jn: Vec<Vec<f64>>,
    pub t_g: f64,
    pub t2: f64,
    pub gamma_i: f64,
    pub eps_ms: f64,
}

impl MsBudgetInput {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.n < 2 {
            return Err(AnalyticsError::Invalid("N must be at least 2"));
        }
        if self.omega_ratios.len() != self.m {
            return Err(AnalyticsError::LengthMismatch("omega_ratios vs M"));
        }
        if self.omega_ratios.iter().any(|r| !(*r >= 0.0)) {
            return Err(AnalyticsError::Invalid("Rabi frequency ratios must be non-negative"));
        }
        if !(self.t_g >= 0.0 && self.t_g < self.t2) {
            return Err(AnalyticsError::Invalid("need 0 ≤ t_g < T2"));
        }
        Ok(())
    }
}

/// Every term of the budget and the derived channel rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsBudget {
    pub chi: f64,
    pub eps_ct_ms: f64,
    pub eps_ct_off: f64,
    pub eps_ct_dw: f64,
    pub eps_ct_loops: f64,
    pub eps_ct_deph: f64,
    pub eps_ct_int: f64,
    pub eps_ct_total: f64,
    pub total_clamped: bool,
    pub n_ms: usize,
    pub n_ct: usize,
    pub p_ms: f64,
    pub p_ct: f64,
}

pub fn budget(input: &MsBudgetInput) -> Result<MsBudget, AnalyticsError> {
    input.validate()?;
    let r = &input.omega_ratios;
    let omega_j: Vec<f64> = r.iter().map(|x| x * input.omega).collect();
    let x = chi(r);
    let (total, clamped) = eps_ct_total(input.eps_ms, input.n, x, input.t_g, input.t2);
    let (p_ms, p_ct) = channel_rates(input.eps_ms, total, input.n, input.m);
    Ok(MsBudget {
        chi: x,
        eps_ct_ms: eps_ct_ms(input.n, r),
        eps_ct_off: eps_ct_off(input.omega, input.delta, r)?,
        eps_ct_dw: eps_ct_dw(input.n, input.m, r, &input.eta_n, &input.nbar_n)?,
        eps_ct_loops: eps_ct_loops(&omega_j, &input.omega_n, &input.eta_n, &input.m_jn, &input.nbar_n)?,
        eps_ct_deph: eps_ct_deph(input.n, input.t_g, input.t2),
        eps_ct_int: eps_ct_int(input.gamma_i, input.t_g, &input.eta_n, &input.nbar_n, r)?,
        eps_ct_total: total,
        total_clamped: clamped,
        n_ms: n_ms(input.n),
        n_ct: n_ct(input.n, input.m),
        p_ms,
        p_ct,
    })
}
