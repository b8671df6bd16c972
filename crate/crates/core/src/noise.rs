//! Error channels: parameters, Kraus sets, crosstalk angles and the per-event
//! samplers used by the executor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::pauli::Pauli;
use crate::rng::bernoulli;

/// How crosstalk from MS gates onto neighbouring ions is modelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CrosstalkMode {
    #[default]
    Off,
    /// `exp(-i ε θ/2 X_g X_n)` applied coherently.
    EntanglingCoherent,
    /// `X_g X_n` with probability `p_c` per gate/neighbour pair.
    EntanglingIncoherent,
    /// Systematic `exp(-i μ π/4 Z_n)` on each neighbour.
    StarkCoherent,
    /// `Z_n` with probability `p_c` per neighbour.
    StarkIncoherent,
}

impl CrosstalkMode {
    pub const ALL: [CrosstalkMode; 5] = [
        CrosstalkMode::Off,
        CrosstalkMode::EntanglingCoherent,
        CrosstalkMode::EntanglingIncoherent,
        CrosstalkMode::StarkCoherent,
        CrosstalkMode::StarkIncoherent,
    ];

    pub fn is_coherent(self) -> bool {
        matches!(self, CrosstalkMode::EntanglingCoherent | CrosstalkMode::StarkCoherent)
    }

    pub fn is_entangling(self) -> bool {
        matches!(self, CrosstalkMode::EntanglingCoherent | CrosstalkMode::EntanglingIncoherent)
    }

    pub fn is_stark(self) -> bool {
        matches!(self, CrosstalkMode::StarkCoherent | CrosstalkMode::StarkIncoherent)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CrosstalkMode::Off => "off",
            CrosstalkMode::EntanglingCoherent => "entangling-coherent",
            CrosstalkMode::EntanglingIncoherent => "entangling-incoherent",
            CrosstalkMode::StarkCoherent => "stark-coherent",
            CrosstalkMode::StarkIncoherent => "stark-incoherent",
        }
    }
}

impl fmt::Display for CrosstalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrosstalkMode {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CrosstalkMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or(NoiseError::UnknownMode)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("idle duration must be non-negative, got {0}")]
    NegativeDuration(f64),
    #[error("kraus operators violate completeness by {0:e}")]
    NotTracePreserving(f64),
    #[error("unknown crosstalk mode")]
    UnknownMode,
}

fn check_prob(name: &'static str, value: f64, hi: f64) -> Result<(), NoiseError> {
    if (0.0..=hi).contains(&value) {
        Ok(())
    } else {
        Err(NoiseError::OutOfRange { name, value, lo: 0.0, hi })
    }
}

/// Physical error parameters. Times are in seconds, probabilities per operation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    pub p_1q: f64,
    pub p_ms: f64,
    pub p_c: f64,
    pub crosstalk_mode: CrosstalkMode,
    pub refocussing: bool,
    pub p_sp: f64,
    pub p_m: f64,
    /// Fraction of preparation faults that leak instead of flipping.
    pub prep_leak_fraction: f64,
    pub t1: f64,
    pub t2: f64,
    /// `Γ_l / Γ_d`.
    pub leak_branching: f64,
    /// Error probability of a single repump pulse.
    pub p_sg: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            p_1q: 1e-5,
            p_ms: 2e-4,
            p_c: 0.0,
            crosstalk_mode: CrosstalkMode::Off,
            refocussing: false,
            p_sp: 1e-4,
            p_m: 1e-4,
            prep_leak_fraction: 0.0,
            t1: 1.1,
            t2: 2.2,
            leak_branching: 4.0 / 9.0,
            p_sg: 1e-4,
        }
    }
}

impl NoiseParams {
    /// Every error source switched off.
    pub fn noiseless() -> Self {
        Self {
            p_1q: 0.0,
            p_ms: 0.0,
            p_c: 0.0,
            crosstalk_mode: CrosstalkMode::Off,
            refocussing: false,
            p_sp: 0.0,
            p_m: 0.0,
            prep_leak_fraction: 0.0,
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            leak_branching: 4.0 / 9.0,
            p_sg: 0.0,
        }
    }

    /// Only crosstalk at rate `p_c`.
    pub fn crosstalk_only(p_c: f64, mode: CrosstalkMode) -> Self {
        Self {
            p_c,
            crosstalk_mode: mode,
            ..Self::noiseless()
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        check_prob("p_1q", self.p_1q, 1.0)?;
        check_prob("p_ms", self.p_ms, 1.0)?;
        check_prob("p_c", self.p_c, 1.0)?;
        if self.p_c >= 1.0 {
            return Err(NoiseError::OutOfRange {
                name: "p_c",
                value: self.p_c,
                lo: 0.0,
                hi: 1.0,
            });
        }
        check_prob("p_sp", self.p_sp, 1.0)?;
        check_prob("p_m", self.p_m, 1.0)?;
        check_prob("prep_leak_fraction", self.prep_leak_fraction, 1.0)?;
        check_prob("p_sg", self.p_sg, 0.5)?;
        for (name, v) in [("t1", self.t1), ("t2", self.t2)] {
            if v.is_nan() || v <= 0.0 {
                return Err(NoiseError::NotPositive { name, value: v });
            }
        }
        if self.leak_branching.is_nan() || self.leak_branching < 0.0 || self.leak_branching.is_infinite() {
            return Err(NoiseError::NotPositive {
                name: "leak_branching",
                value: self.leak_branching,
            });
        }
        Ok(())
    }

    /// Effective crosstalk mode (`Off` when `p_c` is zero).
    pub fn active_crosstalk(&self) -> CrosstalkMode {
        if self.p_c > 0.0 {
            self.crosstalk_mode
        } else {
            CrosstalkMode::Off
        }
    }

    /// True when no stochastic channel can fire, so the only noise is a
    /// deterministic unitary insertion.
    pub fn is_coherent_only(&self) -> bool {
        self.p_1q == 0.0
            && self.p_ms == 0.0
            && self.p_sp == 0.0
            && self.p_m == 0.0
            && self.p_sg == 0.0
            && self.t1.is_infinite()
            && self.t2.is_infinite()
            && (self.p_c == 0.0 || self.crosstalk_mode.is_coherent() || self.crosstalk_mode == CrosstalkMode::Off)
    }

    /// Fraction of decays that end in the leaked level, `Γ_l / Γ`.
    pub fn leak_fraction_of_decays(&self) -> f64 {
        self.leak_branching / (1.0 + self.leak_branching)
    }

    /// Dephasing probability for an idle interval of `dt_us` microseconds.
    pub fn dephasing_probability(&self, dt_us: f64) -> f64 {
        0.5 * (1.0 - libm::exp(-dt_us * 1e-6 / self.t2))
    }

    /// Decay probability for an idle interval of `dt_us` microseconds.
    pub fn decay_probability(&self, dt_us: f64) -> f64 {
        1.0 - libm::exp(-dt_us * 1e-6 / self.t1)
    }
}

/// Crosstalk angle with `p_c = sin²(θ_c/2)`.
pub fn crosstalk_angle(p_c: f64) -> f64 {
    2.0 * libm::asin(libm::sqrt(p_c))
}

/// Crosstalk fraction `ε` such that a full `π/2` MS gate rotates each pair by `θ_c`.
pub fn crosstalk_fraction(p_c: f64) -> f64 {
    crosstalk_angle(p_c) / FRAC_PI_2
}

/// Flip probability of a neighbour between both gate ions, `sin²(θ_c) = 4 p_c (1 - p_c)`.
pub fn doubled_probability(p_c: f64) -> f64 {
    4.0 * p_c * (1.0 - p_c)
}

/// Stark-shift parameter with `p_c = sin²(μ π/4)`.
pub fn stark_mu(p_c: f64) -> f64 {
    4.0 / PI * libm::asin(libm::sqrt(p_c))
}

/// One Kraus operator with an optional Pauli label for frame/tableau sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOp {
    /// Row-major `dim × dim` matrix.
    pub matrix: Vec<Complex64>,
    /// Branch probability when the operator is a scaled unitary.
    pub probability: f64,
    /// Pauli on each qubit (qubit 0 least significant), if the branch is a Pauli.
    pub paulis: Option<Vec<Pauli>>,
}

/// Completely positive trace-preserving map given by Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<KrausOp>,
}

pub const COMPLETENESS_TOLERANCE: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli_matrix(p: Pauli) -> [Complex64; 4] {
    let (o, l, i) = (c(0.0), c(1.0), Complex64::new(0.0, 1.0));
    match p {
        Pauli::I => [l, o, o, l],
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
    }
}

/// Matrix of a Pauli product; `ps[0]` acts on the least-significant qubit.
pub fn pauli_product_matrix(ps: &[Pauli]) -> Vec<Complex64> {
    let dim = 1usize << ps.len();
    let mut m = vec![c(0.0); dim * dim];
    for r in 0..dim {
        for col in 0..dim {
            let mut v = c(1.0);
            for (q, &p) in ps.iter().enumerate() {
                let pm = pauli_matrix(p);
                v *= pm[((r >> q) & 1) * 2 + ((col >> q) & 1)];
            }
            m[r * dim + col] = v;
        }
    }
    m
}

pub fn mat_mul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == c(0.0) {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

fn scaled(m: &[Complex64], s: f64) -> Vec<Complex64> {
    m.iter().map(|x| x * s).collect()
}

/// `exp(-i φ/2 P)` as a matrix.
pub fn pauli_rotation_matrix(ps: &[Pauli], phi: f64) -> Vec<Complex64> {
    let p = pauli_product_matrix(ps);
    let dim = 1usize << ps.len();
    let (co, si) = (libm::cos(phi / 2.0), libm::sin(phi / 2.0));
    (0..dim * dim)
        .map(|k| {
            let id = if k / dim == k % dim { co } else { 0.0 };
            c(id) + Complex64::new(0.0, -si) * p[k]
        })
        .collect()
}

impl KrausChannel {
    /// Builds a channel and checks `Σ K†K = I`.
    pub fn new(dim: usize, ops: Vec<KrausOp>) -> Result<Self, NoiseError> {
        let ch = Self { dim, ops };
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOLERANCE {
            return Err(NoiseError::NotTracePreserving(err));
        }
        Ok(ch)
    }

    /// Channel with weighted Pauli branches; the identity branch is added first.
    pub fn from_paulis(arity: usize, branches: &[(f64, &[Pauli])]) -> Result<Self, NoiseError> {
        let total: f64 = branches.iter().map(|b| b.0).sum();
        check_prob("total error probability", total, 1.0 + 1e-15)?;
        let mut ops = vec![KrausOp {
            matrix: scaled(&pauli_product_matrix(&vec![Pauli::I; arity]), libm::sqrt((1.0 - total).max(0.0))),
            probability: (1.0 - total).max(0.0),
            paulis: Some(vec![Pauli::I; arity]),
        }];
        for &(w, ps) in branches {
            ops.push(KrausOp {
                matrix: scaled(&pauli_product_matrix(ps), libm::sqrt(w)),
                probability: w,
                paulis: Some(ps.to_vec()),
            });
        }
        Self::new(1 << arity, ops)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[KrausOp] {
        &self.ops
    }

    /// Largest entry of `|Σ K†K - I|`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim;
        let mut acc = vec![c(0.0); d * d];
        for op in &self.ops {
            let k = &op.matrix;
            for i in 0..d {
                for j in 0..d {
                    let mut s = c(0.0);
                    for r in 0..d {
                        s += k[r * d + i].conj() * k[r * d + j];
                    }
                    acc[i * d + j] += s;
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc[i * d + j] - c(target)).norm());
            }
        }
        worst
    }

    /// Samples a branch index by `probability`; one uniform draw. Meaningful for
    /// channels whose operators are scaled unitaries.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, op) in self.ops.iter().enumerate().skip(1) {
            acc += op.probability;
            if u < acc {
                return i;
            }
        }
        0
    }
}

/// `{1-p: I, p/3: X, p/3: Y, p/3: Z}`.
pub fn depolarizing_1q(p: f64) -> Result<KrausChannel, NoiseError> {
    check_prob("p_1q", p, 1.0)?;
    KrausChannel::from_paulis(1, &[(p / 3.0, &[Pauli::X]), (p / 3.0, &[Pauli::Y]), (p / 3.0, &[Pauli::Z])])
}

/// Two-qubit MS error channel; label order is `(qubit 1, qubit 2)`.
pub const MS_BRANCHES: [(f64, [Pauli; 2]); 5] = [
    (0.80, [Pauli::X, Pauli::X]),
    (0.05, [Pauli::Y, Pauli::I]),
    (0.05, [Pauli::I, Pauli::Y]),
    (0.05, [Pauli::X, Pauli::Z]),
    (0.05, [Pauli::Z, Pauli::X]),
];

pub fn ms_pauli_channel(p: f64) -> Result<KrausChannel, NoiseError> {
    check_prob("p_ms", p, 1.0)?;
    let branches: Vec<(f64, &[Pauli])> = MS_BRANCHES.iter().map(|(w, ps)| (w * p, &ps[..])).collect();
    KrausChannel::from_paulis(2, &branches)
}

/// Incoherent entangling crosstalk on one `(gate, neighbour)` pair.
pub fn crosstalk_entangling_channel(p_c: f64, doubled: bool) -> Result<KrausChannel, NoiseError> {
    check_prob("p_c", p_c, 1.0)?;
    let p = if doubled { doubled_probability(p_c) } else { p_c };
    KrausChannel::from_paulis(2, &[(p, &[Pauli::X, Pauli::X])])
}

/// Incoherent Stark-shift crosstalk on one neighbour.
pub fn crosstalk_stark_channel(p_c: f64) -> Result<KrausChannel, NoiseError> {
    check_prob("p_c", p_c, 1.0)?;
    KrausChannel::from_paulis(1, &[(p_c, &[Pauli::Z])])
}

/// Residual channel of a refocussed MS gate on a `(gate, neighbour)` pair with
/// noisy spectator pulses. Qubit 0 is the gate ion, qubit 1 the neighbour, and
/// `theta` is the angle of each half gate, so
/// `U_CT = exp(-i θ ε X_n X_g)`.
///
/// Branches in order: `I`, `Z_n U_CT`, `Y_n U_CT`, `X_n`, `Z_n`, `Y_n`.
pub fn refocus_residual_channel(p_1q: f64, theta: f64, eps_ct: f64) -> Result<KrausChannel, NoiseError> {
    check_prob("p_1q", p_1q, 0.5)?;
    let u_ct = pauli_rotation_matrix(&[Pauli::X, Pauli::X], 2.0 * theta * eps_ct);
    let z_n = pauli_product_matrix(&[Pauli::I, Pauli::Z]);
    let y_n = pauli_product_matrix(&[Pauli::I, Pauli::Y]);
    let x_n = pauli_product_matrix(&[Pauli::I, Pauli::X]);
    let id = pauli_product_matrix(&[Pauli::I, Pauli::I]);
    let s = |w: f64| libm::sqrt(w);
    let third = p_1q / 3.0;
    let ops = vec![
        KrausOp {
            matrix: scaled(&id, s(1.0 - 2.0 * p_1q)),
            probability: 1.0 - 2.0 * p_1q,
            paulis: Some(vec![Pauli::I, Pauli::I]),
        },
        KrausOp {
            matrix: scaled(&mat_mul(&z_n, &u_ct, 4), s(third)),
            probability: third,
            paulis: None,
        },
        KrausOp {
            matrix: scaled(&mat_mul(&y_n, &u_ct, 4), s(third)),
            probability: third,
            paulis: None,
        },
        KrausOp {
            matrix: scaled(&x_n, s(2.0 * third)),
            probability: 2.0 * third,
            paulis: Some(vec![Pauli::I, Pauli::X]),
        },
        KrausOp {
            matrix: scaled(&z_n, s(third)),
            probability: third,
            paulis: Some(vec![Pauli::I, Pauli::Z]),
        },
        KrausOp {
            matrix: scaled(&y_n, s(third)),
            probability: third,
            paulis: Some(vec![Pauli::I, Pauli::Y]),
        },
    ];
    KrausChannel::new(4, ops)
}

/// Clifford approximation of decay over one interval on a qutrit `{|0⟩, |1⟩, |ℓ⟩}`.
pub fn idle_decay_channel(p: f64, leak_fraction: f64) -> Result<KrausChannel, NoiseError> {
    check_prob("decay probability", p, 1.0)?;
    check_prob("leak fraction", leak_fraction, 1.0)?;
    let ket_bra = |r: usize, col: usize, w: f64| {
        let mut m = vec![c(0.0); 9];
        m[r * 3 + col] = c(libm::sqrt(w));
        m
    };
    let mut k0 = vec![c(0.0); 9];
    for i in 0..3 {
        k0[i * 4] = c(libm::sqrt(1.0 - p));
    }
    let op = |matrix, probability| KrausOp {
        matrix,
        probability,
        paulis: None,
    };
    KrausChannel::new(
        3,
        vec![
            op(k0, 1.0 - p),
            op(ket_bra(0, 0, p), p),
            op(ket_bra(2, 2, p), p),
            op(ket_bra(0, 1, p * (1.0 - leak_fraction)), p * (1.0 - leak_fraction)),
            op(ket_bra(2, 1, p * leak_fraction), p * leak_fraction),
        ],
    )
}

/// Exact amplitude-damping plus leakage map with `γ_d`, `γ_l` the decay
/// probabilities into `|0⟩` and `|ℓ⟩`.
pub fn amplitude_damping_leak_channel(gamma_d: f64, gamma_l: f64) -> Result<KrausChannel, NoiseError> {
    check_prob("gamma", gamma_d + gamma_l, 1.0)?;
    let mut e0 = vec![c(0.0); 9];
    e0[0] = c(1.0);
    e0[4] = c(libm::sqrt(1.0 - gamma_d - gamma_l));
    e0[8] = c(1.0);
    let mut e1 = vec![c(0.0); 9];
    e1[1] = c(libm::sqrt(gamma_d));
    let mut e2 = vec![c(0.0); 9];
    e2[2 * 3 + 1] = c(libm::sqrt(gamma_l));
    let op = |matrix| KrausOp {
        matrix,
        probability: f64::NAN,
        paulis: None,
    };
    KrausChannel::new(3, vec![op(e0), op(e1), op(e2)])
}

/// Uniform Pauli from `{X, Y, Z}` with probability `p`.
#[inline]
pub fn sample_depolarizing<R: Rng + ?Sized>(rng: &mut R, p: f64) -> Option<Pauli> {
    if p <= 0.0 {
        return None;
    }
    let u: f64 = rng.gen();
    if u >= p {
        return None;
    }
    let k = (3.0 * u / p) as usize;
    Some(Pauli::NON_IDENTITY[k.min(2)])
}

/// Samples the MS error channel; returns the Paulis on `(qubit 1, qubit 2)`.
#[inline]
pub fn sample_ms<R: Rng + ?Sized>(rng: &mut R, p: f64) -> Option<[Pauli; 2]> {
    if p <= 0.0 {
        return None;
    }
    let u: f64 = rng.gen();
    if u >= p {
        return None;
    }
    let v = u / p;
    let mut acc = 0.0;
    for (w, ps) in MS_BRANCHES {
        acc += w;
        if v < acc {
            return Some(ps);
        }
    }
    Some(MS_BRANCHES[4].1)
}

/// Outcome of the decay part of an idle interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decay {
    Ground,
    Leak,
}

/// Samples the idle channel on a qubit: `(dephase, decay)`. The caller must
/// ignore `decay` for a qubit already in `|0⟩` or leaked.
#[inline]
pub fn sample_idle<R: Rng + ?Sized>(rng: &mut R, p_dephase: f64, p_decay: f64, leak_fraction: f64) -> (bool, Option<Decay>) {
    let dephase = bernoulli(rng, p_dephase);
    let decay = if bernoulli(rng, p_decay) {
        Some(if bernoulli(rng, leak_fraction) { Decay::Leak } else { Decay::Ground })
    } else {
        None
    };
    (dephase, decay)
}

/// Result of one repump sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepumpOutcome {
    Nothing,
    /// Leaked qubit stays leaked.
    StayLeaked,
    /// Leaked qubit returns to the computational basis, in `|1⟩` if `excited`.
    Released { excited: bool },
    /// Computational qubit leaks.
    Leak,
    /// Computational qubit decays to `|0⟩`.
    Damp,
    /// Computational qubit dephases; `flip` says whether `Z` is applied.
    Dephase { flip: bool },
}

pub fn sample_repump<R: Rng + ?Sized>(rng: &mut R, leaked: bool, p_sg: f64) -> RepumpOutcome {
    if leaked {
        if bernoulli(rng, 2.0 * p_sg) {
            RepumpOutcome::StayLeaked
        } else {
            RepumpOutcome::Released { excited: rng.gen() }
        }
    } else {
        if p_sg <= 0.0 {
            return RepumpOutcome::Nothing;
        }
        let u: f64 = rng.gen();
        if u < p_sg {
            RepumpOutcome::Leak
        } else if u < 1.5 * p_sg {
            RepumpOutcome::Damp
        } else if u < 2.0 * p_sg {
            RepumpOutcome::Dephase { flip: rng.gen() }
        } else {
            RepumpOutcome::Nothing
        }
    }
}

/// Per-ion leakage flags.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LeakRegistry {
    flags: Vec<bool>,
}

impl LeakRegistry {
    pub fn new(n: usize) -> Self {
        Self { flags: vec![false; n] }
    }

    pub fn is_leaked(&self, ion: usize) -> bool {
        self.flags[ion]
    }

    pub fn set(&mut self, ion: usize, leaked: bool) {
        self.flags[ion] = leaked;
    }

    pub fn clear_all(&mut self) {
        self.flags.fill(false);
    }

    pub fn any(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }
}

/// What actually happens to an event given the leak flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Effective {
    /// Execute normally with its noise.
    Execute,
    /// Nothing happens: no gate, no gate noise, no crosstalk.
    Suppress,
    /// Measurement of a leaked ion: reads `0` and clears the flag.
    ReadLeakedAsZero,
    /// Preparation of a leaked ion: clears the flag, then executes.
    ClearAndExecute,
}

pub fn leaked_gate_semantics(op: &crate::circuit::Op, leaks: &LeakRegistry) -> Effective {
    use crate::circuit::Op;
    match *op {
        Op::Ms { a, b, .. } if leaks.is_leaked(a) || leaks.is_leaked(b) => Effective::Suppress,
        Op::Rotation { ion, .. } if leaks.is_leaked(ion) => Effective::Suppress,
        Op::MeasureZ { ion, .. } if leaks.is_leaked(ion) => Effective::ReadLeakedAsZero,
        Op::Prepare0 { ion } if leaks.is_leaked(ion) => Effective::ClearAndExecute,
        _ => Effective::Execute,
    }
}
