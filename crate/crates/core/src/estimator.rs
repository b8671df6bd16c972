//! Logical error rate estimation: Monte Carlo with binomial errors, adaptive
//! sampling, parameter sweeps, pseudo-thresholds and exact enumeration of
//! measurement paths for coherent-only noise.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::backend::{Backend, DenseBackend, SimError, TableauBackend};
use crate::circuit::Op;
use crate::dense::DenseState;
use crate::executor::TrialState;
use crate::noise::NoiseParams;
use crate::pauli::Pauli;
use crate::rng::trial_rng;
use crate::steane::code::decode_readout;
use crate::steane::{Attempt, Protocol, Target};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("enumeration valid for coherent-only models")]
    NotCoherentOnly,
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("unknown {0}")]
    Unknown(&'static str),
}

/// Standard error of a binomial proportion.
pub fn binomial_err(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    libm::sqrt(p * (1.0 - p) / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalErrorEstimate {
    pub p_log: f64,
    pub err: f64,
    pub n_samples: u64,
    pub failures: u64,
    pub params: NoiseParams,
    /// Adaptive sampling stopped at its cap before meeting the error target.
    pub capped: bool,
    /// `3/n` when no failure was observed.
    pub zero_failure_bound: Option<f64>,
}

impl LogicalErrorEstimate {
    pub fn from_counts(failures: u64, n_samples: u64, params: NoiseParams) -> Self {
        let p_log = if n_samples == 0 { 0.0 } else { failures as f64 / n_samples as f64 };
        Self {
            p_log,
            err: binomial_err(p_log, n_samples),
            n_samples,
            failures,
            params,
            capped: false,
            zero_failure_bound: (failures == 0 && n_samples > 0).then(|| 3.0 / n_samples as f64),
        }
    }

    /// Exact value with no sampling error.
    pub fn exact(p_log: f64, params: NoiseParams) -> Self {
        Self {
            p_log,
            err: 0.0,
            n_samples: 0,
            failures: 0,
            params,
            capped: false,
            zero_failure_bound: None,
        }
    }
}

/// Simulator used for Monte Carlo trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BackendKind {
    #[default]
    Tableau,
    Dense,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Tableau => "tableau",
            BackendKind::Dense => "dense",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = EstimatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tableau" => Ok(BackendKind::Tableau),
            "dense" => Ok(BackendKind::Dense),
            _ => Err(EstimatorError::Unknown("backend")),
        }
    }
}

fn count_with<B: Backend>(protocol: &Protocol, target: Target, seed: u64, start: u64, count: u64, make: impl Fn() -> Result<B, SimError>) -> Result<u64, SimError> {
    let mut failures = 0;
    for trial in start..start + count {
        let mut st = TrialState::new(make()?);
        let mut rng = trial_rng(seed, trial);
        failures += protocol.run_trial(target, &mut st, &mut rng)?.logical_failure as u64;
    }
    Ok(failures)
}

/// Logical failures among trials `start..start + count`. Trial `k` always
/// draws from stream `k` of `seed`, so any partition of the range gives the
/// same total.
pub fn count_failures(protocol: &Protocol, target: Target, kind: BackendKind, seed: u64, start: u64, count: u64) -> Result<u64, SimError> {
    let n = Protocol::NUM_IONS;
    match kind {
        BackendKind::Tableau => count_with(protocol, target, seed, start, count, || Ok(TableauBackend::new(n))),
        BackendKind::Dense => count_with(protocol, target, seed, start, count, || DenseBackend::new(n)),
    }
}

/// Serial Monte Carlo estimate over `n_samples` trials.
pub fn monte_carlo(protocol: &Protocol, target: Target, kind: BackendKind, n_samples: u64, seed: u64) -> Result<LogicalErrorEstimate, EstimatorError> {
    if n_samples == 0 {
        return Err(EstimatorError::NoSamples);
    }
    let f = count_failures(protocol, target, kind, seed, 0, n_samples)?;
    Ok(LogicalErrorEstimate::from_counts(f, n_samples, *protocol.params()))
}

/// Stopping rule for [`adaptive_sample`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptivePolicy {
    pub initial: u64,
    /// Each batch multiplies the total sample count by this factor.
    pub growth: u64,
    pub cap: u64,
    /// Stop once `err ≤ rel_err · p_log` (with at least one failure).
    pub rel_err: f64,
    /// Or once `err ≤ abs_err`.
    pub abs_err: f64,
}

impl Default for AdaptivePolicy {
    fn default() -> Self {
        Self {
            initial: 100_000,
            growth: 2,
            cap: 10_000_000,
            rel_err: 0.1,
            abs_err: 0.0,
        }
    }
}

impl AdaptivePolicy {
    fn met(&self, e: &LogicalErrorEstimate) -> bool {
        (e.failures > 0 && e.err <= self.rel_err * e.p_log) || (e.failures > 0 && e.err <= self.abs_err)
    }
}

/// Grows the sample count geometrically until the error target or the cap is
/// reached. `batch(start, count)` returns the failures among those trials.
pub fn adaptive_sample<E, F>(policy: &AdaptivePolicy, params: NoiseParams, mut batch: F) -> Result<LogicalErrorEstimate, E>
where
    F: FnMut(u64, u64) -> Result<u64, E>,
{
    let cap = policy.cap.max(1);
    let mut n = 0u64;
    let mut failures = 0u64;
    let mut next = policy.initial.clamp(1, cap);
    loop {
        failures += batch(n, next - n)?;
        n = next;
        let e = LogicalErrorEstimate::from_counts(failures, n, params);
        if policy.met(&e) {
            return Ok(e);
        }
        if n >= cap {
            return Ok(LogicalErrorEstimate { capped: true, ..e });
        }
        next = n.saturating_mul(policy.growth.max(2)).min(cap);
    }
}

/// Swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    PMs,
    PC,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::PMs => "p_ms",
            SweepAxis::PC => "p_c",
        }
    }

    pub fn apply(self, base: &NoiseParams, value: f64) -> NoiseParams {
        let mut p = *base;
        match self {
            SweepAxis::PMs => p.p_ms = value,
            SweepAxis::PC => p.p_c = value,
        }
        p
    }
}

impl FromStr for SweepAxis {
    type Err = EstimatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p_ms" => Ok(SweepAxis::PMs),
            "p_c" => Ok(SweepAxis::PC),
            _ => Err(EstimatorError::Unknown("sweep axis")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub estimate: LogicalErrorEstimate,
}

/// `per_decade` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = libm::log10(hi / lo);
    let steps = libm::round(decades * per_decade as f64).max(1.0) as usize;
    (0..=steps)
        .map(|i| lo * libm::pow(10.0, decades * i as f64 / steps as f64))
        .collect()
}

/// One estimate per grid value of `axis`.
pub fn sweep<E, F>(axis: SweepAxis, grid: &[f64], base: &NoiseParams, mut estimate: F) -> Result<Vec<SweepPoint>, E>
where
    F: FnMut(NoiseParams) -> Result<LogicalErrorEstimate, E>,
    E: From<EstimatorError>,
{
    if grid.is_empty() {
        return Err(EstimatorError::EmptyGrid.into());
    }
    grid.iter()
        .map(|&x| {
            Ok(SweepPoint {
                x,
                estimate: estimate(axis.apply(base, x))?,
            })
        })
        .collect()
}

/// The largest `x` where `y(x) = x` changes from `y < x` to `y ≥ x`, by linear
/// interpolation in log-log coordinates between bracketing points.
pub fn pseudo_threshold(points: &[(f64, f64)]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, _)| x > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let d = |(x, y): (f64, f64)| libm::log(y.max(f64::MIN_POSITIVE)) - libm::log(x);
    pts.windows(2).rev().find_map(|w| {
        let (d0, d1) = (d(w[0]), d(w[1]));
        (d0 < 0.0 && d1 >= 0.0).then(|| {
            let t = d0 / (d0 - d1);
            let (l0, l1) = (libm::log(w[0].0), libm::log(w[1].0));
            libm::exp(l0 + t * (l1 - l0))
        })
    })
}

/// Least-squares fit of `ln y = a + b ln x`; returns `(b, a, σ_b)`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (libm::log(x), libm::log(y)))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let sigma = if pts.len() > 2 {
        let rss: f64 = pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
        libm::sqrt(rss / (n - 2.0) / sxx)
    } else {
        0.0
    };
    Some((b, a, sigma))
}

/// Result of [`enumerate_paths`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathEnumeration {
    /// Logical error probability conditioned on accepting the preparation.
    pub p_logical: f64,
    pub accepted_weight: f64,
    pub restart_weight: f64,
    /// Total weight of branches dropped below the pruning threshold.
    pub pruned_weight: f64,
    pub leaves: usize,
}

impl PathEnumeration {
    /// Weight of every path, traversed or pruned.
    pub fn total_weight(&self) -> f64 {
        self.accepted_weight + self.restart_weight + self.pruned_weight
    }
}

/// State-vector backend whose measurements follow a forced prefix of outcomes
/// and then the likelier branch, recording the alternatives.
#[derive(Clone, Debug)]
struct PathBackend {
    state: DenseState,
    prefix: Vec<bool>,
    outcomes: Vec<bool>,
    /// Running weight before each measurement.
    weights: Vec<f64>,
    /// Probability of the branch not taken at each measurement.
    alt: Vec<f64>,
    weight: f64,
}

impl PathBackend {
    fn new(prefix: Vec<bool>, weight_hint: usize) -> Result<Self, SimError> {
        Ok(Self {
            state: DenseState::new(Protocol::NUM_IONS)?,
            prefix,
            outcomes: Vec::with_capacity(weight_hint),
            weights: Vec::with_capacity(weight_hint),
            alt: Vec::with_capacity(weight_hint),
            weight: 1.0,
        })
    }
}

impl Backend for PathBackend {
    fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    fn supports_coherent(&self) -> bool {
        true
    }

    fn reset_all(&mut self) {
        self.state.reset_all();
    }

    fn rotate(&mut self, terms: &[(usize, Pauli)], theta: f64) -> Result<(), SimError> {
        Ok(self.state.apply_pauli_rotation(terms, theta)?)
    }

    fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<(), SimError> {
        if p == Pauli::I {
            return Ok(());
        }
        Ok(self.state.apply_pauli(&[(q, p)])?)
    }

    fn measure<R: Rng + ?Sized>(&mut self, q: usize, _rng: &mut R) -> Result<bool, SimError> {
        let (p0, p1) = self.state.branch_probs(q)?;
        let k = self.outcomes.len();
        let outcome = match self.prefix.get(k) {
            Some(&o) => o,
            None => p1 > p0,
        };
        let (p, other) = if outcome { (p1, p0) } else { (p0, p1) };
        self.weights.push(self.weight);
        self.alt.push(other);
        self.outcomes.push(outcome);
        self.state.project(q, outcome)?;
        self.weight *= p;
        Ok(outcome)
    }

    fn is_ground(&mut self, q: usize) -> Result<bool, SimError> {
        Ok(self.state.branch_probs(q)?.1 < 1e-12)
    }
}

/// Squared amplitudes below this are rounding residue of exact cancellations.
const ROUNDING_FLOOR: f64 = 1e-28;

/// Probability that the ideal transversal readout of `state` decodes to the
/// wrong logical value.
fn leaf_failure(protocol: &Protocol, target: Target, state: &mut DenseState) -> Result<f64, SimError> {
    let readout = protocol.circuits(target)[5].1.circuit();
    let mut bit_of_ion = [usize::MAX; 64];
    for e in readout.events() {
        match e.op {
            Op::Rotation { axis, theta, ion } => state.apply_rotation(axis, theta, ion)?,
            Op::MeasureZ { ion, bit } => bit_of_ion[ion] = bit,
            Op::Barrier => {}
            _ => return Err(SimError::Unsupported("unexpected readout operation")),
        }
    }
    let mut p = 0.0;
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w < ROUNDING_FLOOR {
            continue;
        }
        let mut bits = 0u8;
        for (ion, &bit) in bit_of_ion.iter().enumerate().take(state.num_qubits()) {
            if bit != usize::MAX && idx >> ion & 1 == 1 {
                bits |= 1 << bit;
            }
        }
        if decode_readout(bits) {
            p += w;
        }
    }
    Ok(p)
}

/// Exact logical error probability under coherent-only noise, by depth-first
/// traversal of every measurement branch whose weight exceeds `prune`.
/// Restarted preparations are discarded and the result is renormalised by the
/// acceptance probability.
pub fn enumerate_paths(protocol: &Protocol, target: Target, prune: f64) -> Result<PathEnumeration, EstimatorError> {
    if !protocol.params().is_coherent_only() {
        return Err(EstimatorError::NotCoherentOnly);
    }
    let mut out = PathEnumeration {
        p_logical: 0.0,
        accepted_weight: 0.0,
        restart_weight: 0.0,
        pruned_weight: 0.0,
        leaves: 0,
    };
    let mut failing = 0.0;
    let mut rng = trial_rng(0, 0);
    let mut stack: Vec<Vec<bool>> = alloc::vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let fixed = prefix.len();
        let mut st = TrialState::new(PathBackend::new(prefix, 32)?);
        let attempt = protocol.run_attempt(target, &mut st, &mut rng)?;
        let b = &mut st.backend;
        for k in fixed..b.outcomes.len() {
            let w = b.weights[k] * b.alt[k];
            if w <= 0.0 {
                continue;
            }
            if w <= prune {
                out.pruned_weight += w;
            } else {
                let mut p = b.outcomes[..k].to_vec();
                p.push(!b.outcomes[k]);
                stack.push(p);
            }
        }
        out.leaves += 1;
        match attempt {
            Attempt::Restart => out.restart_weight += b.weight,
            Attempt::Corrected { .. } => {
                out.accepted_weight += b.weight;
                failing += b.weight * leaf_failure(protocol, target, &mut b.state)?;
            }
        }
    }
    out.p_logical = if out.accepted_weight > 0.0 { failing / out.accepted_weight } else { 0.0 };
    Ok(out)
}

/// Outcome counts of process sampling on one refocussed MS gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResidualSample {
    pub trials: u64,
    /// Trials whose output carries uncancelled crosstalk, by the spectator
    /// Pauli accompanying it (`I, X, Y, Z`).
    pub two_body: [u64; 4],
    /// Trials left with only a spectator Pauli, same indexing.
    pub one_body: [u64; 4],
    /// Outputs matching no candidate branch.
    pub unexplained: u64,
}

impl ResidualSample {
    pub fn two_body_total(&self) -> u64 {
        self.two_body.iter().sum()
    }

    /// Mean rate of the two leading two-body branches (`Y` or `Z` on the
    /// spectator), with its binomial error.
    pub fn residual_rate(&self) -> (f64, f64) {
        let n = 2.0 * self.trials as f64;
        let p = (self.two_body[2] + self.two_body[3]) as f64 / n;
        (p, libm::sqrt(p * (1.0 - p) / n))
    }
}

/// Samples a refocussed `MS(π/2)` on ions 0 and 1 of a three-ion chain with
/// coherent entangling crosstalk onto ion 2 and noisy refocussing pulses, and
/// classifies every output state against the ideal gate followed by a
/// spectator Pauli, with or without the uncancelled crosstalk unitary.
pub fn sample_refocus_residual(p_1q: f64, p_c: f64, n: u64, seed: u64) -> Result<ResidualSample, SimError> {
    use crate::circuit::{Circuit, DurationTable, IonLayout};
    use crate::tableau::Axis;
    use crate::executor::NoisyExecutor;
    use crate::noise::{crosstalk_angle, CrosstalkMode};

    let params = NoiseParams {
        p_1q,
        refocussing: true,
        ..NoiseParams::crosstalk_only(p_c, CrosstalkMode::EntanglingCoherent)
    };
    let ex = NoisyExecutor::new(params, IonLayout::linear(3), DurationTable::default()).map_err(|_| SimError::Unsupported("invalid noise parameters"))?;
    let mut c = Circuit::new(3);
    c.push(Op::Ms { theta: core::f64::consts::FRAC_PI_2, a: 0, b: 1 });
    let pc = ex.prepare(&c)?;

    let mut input = DenseState::new(3)?;
    input.apply_rotation(Axis::X, 0.4, 0)?;
    input.apply_rotation(Axis::Y, 1.1, 2)?;
    input.apply_rotation(Axis::Z, 0.7, 2)?;
    let mut ideal = input.clone();
    ideal.apply_xx(core::f64::consts::FRAC_PI_2, 0, 1)?;
    let theta_c = crosstalk_angle(p_c);
    let mut candidates: Vec<(bool, usize, DenseState)> = Vec::new();
    for (k, p) in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        for unrefocussed in [None, Some(theta_c), Some(-theta_c)] {
            let mut s = ideal.clone();
            if let Some(a) = unrefocussed {
                s.apply_xx(a, 0, 2)?;
                s.apply_xx(a, 1, 2)?;
            }
            if p != Pauli::I {
                s.apply_pauli(&[(2, p)])?;
            }
            candidates.push((unrefocussed.is_some(), k, s));
        }
    }

    let mut out = ResidualSample { trials: n, ..ResidualSample::default() };
    for t in 0..n {
        let mut rng = trial_rng(seed, t);
        let mut st = TrialState::new(DenseBackend::new(3)?);
        *st.backend.state_mut() = input.clone();
        ex.run(&pc, &mut st, &mut rng)?;
        let state = st.backend.state();
        match candidates.iter().find(|(_, _, s)| s.fidelity(state) > 1.0 - 1e-9) {
            Some(&(true, k, _)) => out.two_body[k] += 1,
            Some(&(false, k, _)) => out.one_body[k] += 1,
            None => out.unexplained += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::DurationTable;
    use crate::noise::CrosstalkMode;

    fn protocol(params: NoiseParams) -> Protocol {
        Protocol::new(params, DurationTable::default()).unwrap()
    }

    #[test]
    fn binomial_error_formula() {
        assert!((binomial_err(0.5, 100) - 0.05).abs() < 1e-15);
        let e = LogicalErrorEstimate::from_counts(50, 100, NoiseParams::noiseless());
        assert_eq!(e.p_log, 0.5);
        assert!((e.err - 0.05).abs() < 1e-15);
    }

    #[test]
    fn noiseless_monte_carlo_is_zero() {
        let p = protocol(NoiseParams::noiseless());
        let e = monte_carlo(&p, Target::Plus, BackendKind::Tableau, 200, 3).unwrap();
        assert_eq!((e.p_log, e.err, e.failures), (0.0, 0.0, 0));
        assert_eq!(e.zero_failure_bound, Some(3.0 / 200.0));
    }

    #[test]
    fn partitioned_counts_match() {
        let params = NoiseParams::crosstalk_only(2e-2, CrosstalkMode::EntanglingIncoherent);
        let p = protocol(params);
        let whole = count_failures(&p, Target::Zero, BackendKind::Tableau, 11, 0, 300).unwrap();
        let parts: u64 = [(0, 17), (17, 200), (217, 83)]
            .iter()
            .map(|&(s, c)| count_failures(&p, Target::Zero, BackendKind::Tableau, 11, s, c).unwrap())
            .sum();
        assert_eq!(whole, parts);
        assert!(whole > 0);
    }

    #[test]
    fn adaptive_stops_on_target_or_cap() {
        let params = NoiseParams::noiseless();
        let policy = AdaptivePolicy {
            initial: 1000,
            growth: 2,
            cap: 16_000,
            rel_err: 0.1,
            abs_err: 0.0,
        };
        // p = 0.5: the first batch already meets the target.
        let mut calls = 0;
        let e = adaptive_sample::<(), _>(&policy, params, |_, c| {
            calls += 1;
            Ok(c / 2)
        })
        .unwrap();
        assert_eq!((calls, e.n_samples, e.capped), (1, 1000, false));
        // No failures: run to the cap and report the rule-of-three bound.
        let e = adaptive_sample::<(), _>(&policy, params, |_, _| Ok(0)).unwrap();
        assert!(e.capped);
        assert_eq!(e.n_samples, 16_000);
        assert_eq!(e.zero_failure_bound, Some(3.0 / 16_000.0));
        // Batches tile the trial range without gaps.
        let mut next = 0;
        adaptive_sample::<(), _>(&policy, params, |s, c| {
            assert_eq!(s, next);
            next = s + c;
            Ok(0)
        })
        .unwrap();
        assert_eq!(next, 16_000);
    }

    #[test]
    fn threshold_interpolation() {
        // y = x² / 1e-2 crosses y = x at x = 1e-2.
        let pts: Vec<_> = log_grid(1e-4, 1.0, 8).into_iter().map(|x| (x, x * x / 1e-2)).collect();
        let t = pseudo_threshold(&pts).unwrap();
        assert!((t / 1e-2 - 1.0).abs() < 1e-9, "{t}");
        // A floor creates a lower crossing too; the upper one is reported.
        let pts: Vec<_> = log_grid(1e-6, 1.0, 8).into_iter().map(|x| (x, x * x / 1e-2 + 1e-5)).collect();
        let t = pseudo_threshold(&pts).unwrap();
        assert!(t > 5e-3 && t < 2e-2, "{t}");
        // Always above the diagonal: no crossing.
        let pts: Vec<_> = log_grid(1e-4, 1e-2, 8).into_iter().map(|x| (x, 0.5)).collect();
        assert_eq!(pseudo_threshold(&pts), None);
    }

    #[test]
    fn grid_and_sweep() {
        let g = log_grid(1e-4, 1e-2, 8);
        assert_eq!(g.len(), 17);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[16] / 1e-2 - 1.0).abs() < 1e-12);
        let base = NoiseParams::noiseless();
        let pts = sweep::<EstimatorError, _>(SweepAxis::PMs, &g, &base, |p| Ok(LogicalErrorEstimate::exact(p.p_ms * 2.0, p))).unwrap();
        assert_eq!(pts[3].estimate.params.p_ms, g[3]);
        assert!(matches!(sweep::<EstimatorError, _>(SweepAxis::PC, &[], &base, |p| Ok(LogicalErrorEstimate::exact(0.0, p))), Err(EstimatorError::EmptyGrid)));
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<_> = log_grid(1e-5, 1e-3, 4).into_iter().map(|x| (x, 3.0 * x)).collect();
        let (b, a, s) = loglog_fit(&pts).unwrap();
        assert!((b - 1.0).abs() < 1e-12 && (a - libm::log(3.0)).abs() < 1e-10 && s < 1e-10);
    }

    #[test]
    fn enumeration_without_crosstalk_is_zero() {
        let p = protocol(NoiseParams::noiseless());
        for t in Target::BOTH {
            let e = enumerate_paths(&p, t, 1e-15).unwrap();
            assert_eq!(e.p_logical, 0.0);
            assert_eq!(e.leaves, 1);
            assert!((e.total_weight() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn enumeration_rejects_stochastic_models() {
        let p = protocol(NoiseParams::crosstalk_only(1e-3, CrosstalkMode::EntanglingIncoherent));
        assert_eq!(enumerate_paths(&p, Target::Plus, 1e-15), Err(EstimatorError::NotCoherentOnly));
    }

    #[test]
    fn enumeration_weights_are_complete() {
        let p = protocol(NoiseParams::crosstalk_only(1e-3, CrosstalkMode::StarkCoherent));
        let e = enumerate_paths(&p, Target::Plus, 1e-15).unwrap();
        assert!((e.total_weight() - 1.0).abs() < 1e-10, "{e:?}");
        assert!(e.leaves > 1 && e.p_logical > 0.0);
    }

    #[test]
    fn refocus_residual_branches() {
        let r = sample_refocus_residual(0.03, 1e-3, 20_000, 5).unwrap();
        assert_eq!(r.unexplained, 0);
        // To first order only Y and Z after the first pulse leave crosstalk
        // uncancelled.
        assert!(20 * (r.two_body[0] + r.two_body[1]) < r.two_body_total(), "{r:?}");
        let (rate, err) = r.residual_rate();
        assert!((rate - 0.01).abs() < 4.0 * err, "{rate} ± {err}");
        let clean = sample_refocus_residual(0.0, 1e-3, 50, 5).unwrap();
        assert_eq!(clean.one_body[0], 50);
    }

}
