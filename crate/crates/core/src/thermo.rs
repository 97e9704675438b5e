//! Per-cycle energetics, operating phases and performance bounds.
//!
//! Energies are in mechanical quanta, `E = ¼ Tr V` up to the zero-point
//! offset, and positive values flow into the oscillator. The squeezers
//! exchange work; the bath interactions exchange heat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bath::{temperature_ratio, BathModel, ColdCoupling, OscillatorParams, TemperatureConvention};
use crate::error::{Error, Result};
use crate::gaussian::Covar2;
use crate::precise::{to_f64, Dd, DdCov};
use crate::protocol::{build_cycle, tau_from_omega_ap, MachineParams};
use crate::steadystate::{effective_occupancy, steady_state_dd};

/// Relative tolerance between the two independent cold-heat evaluations.
pub const LEDGER_TOL: f64 = 1e-9;
/// Default phase deadband per quantum of hot-bath occupancy.
pub const DEADBAND_PER_QUANTUM: f64 = 1e-12;
/// Relative slack allowed on the Carnot bounds.
pub const COP_BOUND_SLACK: f64 = 1e-6;
/// Closure residual, relative to the steady-state energy, that is attributed
/// to extended-precision rounding when all flows vanish.
const LEDGER_PRECISION_FLOOR: f64 = 1e-22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Engine,
    Pump,
    Fridge,
    Trivial,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Engine => "engine",
            Phase::Pump => "pump",
            Phase::Fridge => "fridge",
            Phase::Trivial => "trivial",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Work and heats exchanged during one steady-state cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleLedger {
    pub w: f64,
    pub q_h: f64,
    /// Cold heat from energy balance, `−(W + Q_H)`.
    pub q_c: f64,
    /// Cold heat summed directly over the two cold interactions.
    pub q_c_cold_steps: f64,
    pub phase: Phase,
    /// Coefficient of performance; absent in the trivial phase.
    pub cop: Option<f64>,
    pub n_ss: f64,
}

impl CycleLedger {
    /// `|W + Q_H + Q_C|` with the directly summed cold heat.
    pub fn closure_error(&self) -> f64 {
        (self.w + self.q_h + self.q_c_cold_steps).abs()
    }

    pub fn flow_scale(&self) -> f64 {
        self.w.abs().max(self.q_h.abs()).max(self.q_c.abs()).max(1e-30)
    }
}

pub fn default_deadband(n_h: f64) -> f64 {
    DEADBAND_PER_QUANTUM * n_h
}

/// Ledger with the default deadband `1e-12·n̄_H`.
pub fn cycle_ledger(p: &MachineParams) -> Result<CycleLedger> {
    cycle_ledger_with(p, default_deadband(p.n_h))
}

pub fn cycle_ledger_with(p: &MachineParams, deadband: f64) -> Result<CycleLedger> {
    let channels = build_cycle(p)?;
    let v_ss = steady_state_dd(&channels)?;
    let [v1, v2, v3, v4, closed] = channels.snapshots_dd(&v_ss);
    let quarter = Dd::from(0.25);
    let tr = |v: &DdCov| v.trace();

    let w = quarter * ((tr(&v1) - tr(&v_ss)) + (tr(&v4) - tr(&v3)));
    let q_h = quarter * (tr(&v3) - tr(&v2));
    let q_c = -(w + q_h);
    let q_c_steps = quarter * ((tr(&closed) - tr(&v4)) + (tr(&v2) - tr(&v1)));

    let (w, q_h, q_c, q_c_steps) = (to_f64(w), to_f64(q_h), to_f64(q_c), to_f64(q_c_steps));
    let scale = w.abs().max(q_h.abs()).max(q_c.abs()).max(1e-30);
    let floor = LEDGER_PRECISION_FLOOR * to_f64(tr(&v_ss));
    if !((q_c - q_c_steps).abs() <= LEDGER_TOL * scale + floor) {
        return Err(Error::LedgerInconsistent { from_balance: q_c, from_cold_steps: q_c_steps });
    }

    let phase = classify_phase(w, q_h, q_c, deadband);
    let cop = cop_value(phase, w, q_h, q_c);
    let n_ss = effective_occupancy(&v_ss.to_f64())?;
    Ok(CycleLedger { w, q_h, q_c, q_c_cold_steps: q_c_steps, phase, cop, n_ss })
}

/// Operating phase with deadband `δ` (in quanta):
/// engine if `W < −δ, Q_H > δ`; fridge if `Q_C > δ, W > δ`; pump if
/// `Q_H < −δ, W > δ, Q_C ≤ δ`; trivial otherwise.
pub fn classify_phase(w: f64, q_h: f64, q_c: f64, deadband: f64) -> Phase {
    if w < -deadband && q_h > deadband {
        Phase::Engine
    } else if q_c > deadband && w > deadband {
        Phase::Fridge
    } else if q_h < -deadband && w > deadband && q_c <= deadband {
        Phase::Pump
    } else {
        Phase::Trivial
    }
}

fn cop_value(phase: Phase, w: f64, q_h: f64, q_c: f64) -> Option<f64> {
    match phase {
        Phase::Pump => Some((q_h / w).abs()),
        Phase::Engine => Some((w / q_h).abs()),
        Phase::Fridge => Some((q_c / w).abs()),
        Phase::Trivial => None,
    }
}

/// Carnot efficiency `η = 1 − T_C/T_H`.
pub fn carnot_efficiency(n_c: f64, n_h: f64, convention: TemperatureConvention) -> f64 {
    1.0 - temperature_ratio(n_c, n_h, convention)
}

/// Thermodynamic ceiling on the coefficient of performance of `phase`:
/// `1/η` for a pump, `η` for an engine, `(1−η)/η` for a fridge.
pub fn cop_bound(phase: Phase, eta: f64) -> Option<f64> {
    match phase {
        Phase::Pump => Some(1.0 / eta),
        Phase::Engine => Some(eta),
        Phase::Fridge => Some((1.0 - eta) / eta),
        Phase::Trivial => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopReport {
    pub phase: Phase,
    pub value: f64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Coefficient of performance of a non-trivial cycle with its Carnot bound.
pub fn cop(ledger: &CycleLedger, p: &MachineParams) -> Result<CopReport> {
    cop_with(ledger, p, TemperatureConvention::HighTemperature)
}

pub fn cop_with(ledger: &CycleLedger, p: &MachineParams, convention: TemperatureConvention) -> Result<CopReport> {
    let value = cop_value(ledger.phase, ledger.w, ledger.q_h, ledger.q_c).ok_or(Error::TrivialPhase)?;
    let eta = carnot_efficiency(p.n_c, p.n_h, convention);
    let bound = cop_bound(ledger.phase, eta).ok_or(Error::TrivialPhase)?;
    Ok(CopReport { phase: ledger.phase, value, bound, within_bound: value <= bound * (1.0 + COP_BOUND_SLACK) })
}

/// Heat-engine condition for small cold coupling: `n̄_H > μ²n_SS` when
/// `μ > 1`, `n̄_H < μ²n_SS` when `μ < 1`, never at `μ = 1`.
pub fn engine_condition(mu: f64, n_h: f64, n_ss: f64) -> bool {
    let rhs = mu * mu * n_ss;
    if mu > 1.0 {
        n_h > rhs
    } else if mu < 1.0 {
        n_h < rhs
    } else {
        false
    }
}

/// [`engine_condition`] evaluated with the exact steady-state occupancy.
pub fn engine_criterion(p: &MachineParams) -> Result<bool> {
    let n_ss = crate::steadystate::steady_state(p)?.n_ss;
    Ok(engine_condition(p.mu, p.n_h, n_ss))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FridgeForm {
    /// `n̄_C > n_SS(1 + μ²)/2`, valid for `ε ≪ 1`.
    #[default]
    Simplified,
    /// `n̄_C(2 − 2ε + ε²) > n_SS(1 + (1−ε)²μ²)`.
    Full,
}

pub fn fridge_condition(mu: f64, n_c: f64, epsilon: f64, n_ss: f64, form: FridgeForm) -> bool {
    let mu2 = mu * mu;
    match form {
        FridgeForm::Simplified => n_c > 0.5 * n_ss * (1.0 + mu2),
        FridgeForm::Full => {
            let keep = 1.0 - epsilon;
            n_c * (2.0 - 2.0 * epsilon + epsilon * epsilon) > n_ss * (1.0 + keep * keep * mu2)
        }
    }
}

/// [`fridge_condition`] evaluated with the exact steady-state occupancy.
pub fn fridge_criterion(p: &MachineParams, form: FridgeForm) -> Result<bool> {
    let n_ss = crate::steadystate::steady_state(p)?.n_ss;
    Ok(fridge_condition(p.mu, p.n_c, p.epsilon.epsilon(), n_ss, form))
}

/// `K = Tr V / √det V`, equal to `μ² + μ⁻²` for a pure state squeezed by `μ`.
pub fn squeezing_proxy(v: &Covar2) -> f64 {
    v.trace() / v.det().sqrt()
}

/// Coefficients of the RWA work condition `μ⁴ + Bμ² + 1 < 0`, with
/// `B = [a(2n̄_H+1) + b(2n̄_C+1)] / [c(2n̄_H+1) + d(2n̄_C+1)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub big_b: f64,
}

impl RwaCoefficients {
    /// Roots of `x² + Bx + 1` (real parts when complex).
    pub fn work_roots(&self) -> (f64, f64) {
        let disc = self.big_b * self.big_b - 4.0;
        if disc < 0.0 {
            let re = -0.5 * self.big_b;
            return (re, re);
        }
        // product of the roots is 1, so take the larger-magnitude one first
        let big = -0.5 * (self.big_b + disc.sqrt());
        (big, 1.0 / big)
    }

    /// Whether some real `μ` satisfies the engine condition.
    pub fn admits_engine(&self) -> bool {
        let (r1, r2) = self.work_roots();
        self.big_b * self.big_b >= 4.0 && (r1 > 0.0 || r2 > 0.0)
    }
}

/// RWA engine coefficients as functions of `ε`, `Γτ` and `ω_Mτ`.
///
/// The trigonometric brackets are rewritten through `cos 2x = 1 − 2sin²x` and
/// `e^{Γτ} = 1 + x` so that each term stays accurate as `ω_Mτ`, `Γτ` and `ε`
/// become small; the tests compare against the unreduced expressions.
pub fn rwa_coefficients(epsilon: f64, gamma_tau: f64, omega_tau: f64, n_h: f64, n_c: f64) -> Result<RwaCoefficients> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ParameterOutOfDomain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(gamma_tau > 0.0 && gamma_tau.is_finite()) {
        return Err(Error::ParameterOutOfDomain(format!("gamma*tau must be positive, got {gamma_tau}")));
    }
    let sin = omega_tau.sin();
    if !(sin != 0.0 && sin.is_finite()) {
        return Err(Error::ParameterOutOfDomain(format!("sin(omega*tau) vanishes at omega*tau = {omega_tau}")));
    }
    let sin2 = sin * sin;
    let e = epsilon;
    let keep = 1.0 - e;
    let x = gamma_tau.exp_m1();
    let lam = 1.0 + x;
    // e^{Γτ} − (1−ε)²
    let gap = x + e * (2.0 - e);
    // e^{Γτ} + ε − 1
    let shifted = x + e;

    let a = x * gap * (e * gap / sin2 + 2.0 * keep * (lam + keep));
    let k = e * (6.0 - 6.0 * e + e * e) + x * (4.0 + e - 3.0 * e * e) + x * x * (3.0 - 2.0 * e);
    let b = e * (gap * gap * (x + 2.0 * e) / sin2 + 2.0 * keep * k);
    let common = (lam + keep * keep) * shifted;
    let c = x * keep * common;
    let d = e * keep * common;

    let (sh, sc) = (2.0 * n_h + 1.0, 2.0 * n_c + 1.0);
    let big_b = (a * sh + b * sc) / (c * sh + d * sc);
    Ok(RwaCoefficients { a, b, c, d, big_b })
}

/// [`rwa_coefficients`] at the operating point `p`.
pub fn rwa_engine_coefficients(p: &MachineParams) -> Result<RwaCoefficients> {
    rwa_coefficients(p.epsilon.epsilon(), p.osc.gamma * p.tau, p.omega_tau(), p.n_h, p.n_c)
}

/// Ranges for random parameter draws. Scale parameters are drawn
/// log-uniformly, the occupancy ratio uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRanges {
    pub omega_m: f64,
    pub epsilon: (f64, f64),
    pub gamma_over_omega: (f64, f64),
    pub omega_tau: (f64, f64),
    pub cold_ratio: (f64, f64),
    pub n_h: (f64, f64),
    pub mu: (f64, f64),
}

impl Default for RegimeRanges {
    fn default() -> Self {
        Self {
            omega_m: 1e6,
            epsilon: (1e-10, 0.5),
            gamma_over_omega: (1e-7, 1e-3),
            omega_tau: (1e-4, 0.1),
            cold_ratio: (0.1, 0.99),
            n_h: (1e2, 1e6),
            mu: (0.1, 100.0),
        }
    }
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// `count` reproducible random operating points drawn from `ranges`.
pub fn sample_regime(ranges: &RegimeRanges, count: usize, model: BathModel, seed: u64) -> Vec<MachineParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let omega_m = ranges.omega_m;
            let eps = log_uniform(&mut rng, ranges.epsilon);
            let gamma = omega_m * log_uniform(&mut rng, ranges.gamma_over_omega);
            let tau = log_uniform(&mut rng, ranges.omega_tau) / omega_m;
            let ratio = rng.gen_range(ranges.cold_ratio.0..=ranges.cold_ratio.1);
            let n_h = log_uniform(&mut rng, ranges.n_h);
            let mu = log_uniform(&mut rng, ranges.mu);
            MachineParams {
                osc: OscillatorParams { omega_m, gamma },
                n_h,
                n_c: ratio * n_h,
                epsilon: ColdCoupling::new(eps).expect("sampled coupling lies in [0, 1]"),
                mu,
                tau,
                model,
            }
        })
        .collect()
}

/// `count` points log-spaced in `μ` over `[mu_min, mu_max]` around `base`.
pub fn mu_slice(base: &MachineParams, mu_min: f64, mu_max: f64, count: usize) -> Vec<MachineParams> {
    let (lo, hi) = (mu_min.ln(), mu_max.ln());
    let last = count.saturating_sub(1).max(1) as f64;
    (0..count).map(|i| base.with_mu((lo + (hi - lo) * i as f64 / last).exp())).collect()
}

/// Grid over `μ` and `ω_ap/ω_M` with `ε` adjusted so that
/// `ω_M/γ_eff = q_eff` at every rate.
pub fn constant_q_eff_grid(
    base: &MachineParams,
    q_eff: f64,
    mu: (f64, f64, usize),
    rate_ratio: (f64, f64, usize),
) -> Result<Vec<MachineParams>> {
    let mut out = Vec::with_capacity(mu.2 * rate_ratio.2);
    for rate in mu_slice(&base.with_mu(1.0), rate_ratio.0, rate_ratio.1, rate_ratio.2).iter().map(|p| p.mu) {
        let omega_ap = rate * base.osc.omega_m;
        let mut p = *base;
        p.tau = tau_from_omega_ap(omega_ap);
        p.epsilon = crate::protocol::epsilon_for_effective_q(base.osc.omega_m, omega_ap, q_eff)?;
        out.extend(mu_slice(&p, mu.0, mu.1, mu.2));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanViolation {
    pub index: usize,
    pub params: MachineParams,
    pub phase: Phase,
}

/// Phase tally over a parameter grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoGoScanReport {
    pub description: String,
    pub points: usize,
    pub engine: usize,
    pub pump: usize,
    pub fridge: usize,
    pub trivial: usize,
    pub failures: usize,
    /// Engine or fridge classifications, ordered by grid index.
    pub violations: Vec<ScanViolation>,
}

impl NoGoScanReport {
    pub fn count(&self, phase: Phase) -> usize {
        match phase {
            Phase::Engine => self.engine,
            Phase::Pump => self.pump,
            Phase::Fridge => self.fridge,
            Phase::Trivial => self.trivial,
        }
    }
}

/// Full-ledger phase classification at every grid point, in parallel.
pub fn phase_scan(grid: &[MachineParams], description: impl Into<String>) -> NoGoScanReport {
    let phases: Vec<Option<Phase>> = grid.par_iter().map(|p| cycle_ledger(p).ok().map(|l| l.phase)).collect();
    let mut report = NoGoScanReport { description: description.into(), points: grid.len(), ..Default::default() };
    for (index, (phase, params)) in phases.into_iter().zip(grid).enumerate() {
        match phase {
            None => report.failures += 1,
            Some(phase) => {
                match phase {
                    Phase::Engine => report.engine += 1,
                    Phase::Pump => report.pump += 1,
                    Phase::Fridge => report.fridge += 1,
                    Phase::Trivial => report.trivial += 1,
                }
                if matches!(phase, Phase::Engine | Phase::Fridge) {
                    report.violations.push(ScanViolation { index, params: *params, phase });
                }
            }
        }
    }
    report
}

/// [`phase_scan`] with every point forced onto the rotating-wave model.
pub fn rwa_nogo_scan(grid: &[MachineParams]) -> NoGoScanReport {
    let rwa: Vec<MachineParams> = grid.iter().map(|p| p.with_model(BathModel::Rwa)).collect();
    phase_scan(&rwa, format!("rwa scan over {} points", grid.len()))
}
