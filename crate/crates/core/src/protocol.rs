//! One squeeze–rotate–squeeze cycle as a composition of Gaussian channels.
//!
//! A cycle starts immediately before the first squeezer:
//!
//! ```text
//! V_SS --S1--> V1 --cold--> V2 --hot(τ)--> V3 --S2--> V4 --cold--> V_SS
//! ```
//!
//! The second squeezer `S2 = R S1⁻¹ Rᵀ`, with `R` the free rotation over
//! one period, undoes the first one along the rotated axis so that without
//! damping the whole cycle is just free evolution.

use std::f64::consts::PI;
use std::fmt;

use crate::bath::{self, check_occupancy, BathModel, ColdCoupling, OscillatorParams, HIGH_OCCUPANCY_THRESHOLD};
use crate::error::{Error, Result};
use crate::gaussian::{squeeze_map, Covar2, GaussChannel, Mat2};
use crate::precise::{DdChannel, DdCov};

/// Period of the reference configuration relative to the oscillator:
/// `ω_ap/ω_M`.
pub const REFERENCE_OMEGA_AP_RATIO: f64 = 1e3;

/// Full parameter set of the machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineParams {
    pub osc: OscillatorParams,
    pub n_h: f64,
    pub n_c: f64,
    pub epsilon: ColdCoupling,
    pub mu: f64,
    /// Cycle period in seconds.
    pub tau: f64,
    pub model: BathModel,
}

/// Conditions under which the machine still runs but the underlying
/// approximations are not trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidityWarning {
    LowOccupancy { bath: &'static str, occupancy: f64 },
    LongCycle { omega_tau: f64 },
    ColdNotColder { n_c: f64, n_h: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityWarning::LowOccupancy { bath, occupancy } => {
                write!(f, "{bath} occupancy {occupancy} is below {HIGH_OCCUPANCY_THRESHOLD}; Markovian bath model is unreliable")
            }
            ValidityWarning::LongCycle { omega_tau } => {
                write!(f, "omega_m * tau = {omega_tau} is not small; short-period approximations do not apply")
            }
            ValidityWarning::ColdNotColder { n_c, n_h } => {
                write!(f, "cold occupancy {n_c} is not below hot occupancy {n_h}")
            }
        }
    }
}

/// `τ = 2π/ω_ap`.
pub fn tau_from_omega_ap(omega_ap: f64) -> f64 {
    2.0 * PI / omega_ap
}

/// Cold coupling that fixes the effective cold-bath quality factor
/// `q_eff = ω_M/γ_eff = πω_M/(εω_ap)` at the given squeezing rate.
pub fn epsilon_for_effective_q(omega_m: f64, omega_ap: f64, q_eff: f64) -> Result<ColdCoupling> {
    if !(q_eff > 0.0) {
        return Err(Error::invalid("q_eff", format!("must be positive, got {q_eff}")));
    }
    ColdCoupling::new(PI * omega_m / (q_eff * omega_ap))
}

impl MachineParams {
    pub fn new(
        osc: OscillatorParams,
        n_h: f64,
        n_c: f64,
        epsilon: ColdCoupling,
        mu: f64,
        tau: f64,
        model: BathModel,
    ) -> Result<Self> {
        let p = Self { osc, n_h, n_c, epsilon, mu, tau, model };
        p.validate()?;
        Ok(p)
    }

    /// `ω_M = 1 MHz`, `Q = 10⁶`, `n̄_H = 4·10⁴`, `ω_ap = 10³ω_M`, and no
    /// cold bath (`ε = 0`).
    pub fn baseline(mu: f64) -> Self {
        let omega_m = 1e6;
        Self {
            osc: OscillatorParams { omega_m, gamma: 1.0 },
            n_h: 4e4,
            n_c: 0.0,
            epsilon: ColdCoupling::new(0.0).expect("zero coupling is valid"),
            mu,
            tau: tau_from_omega_ap(REFERENCE_OMEGA_AP_RATIO * omega_m),
            model: BathModel::IndependentOscillator,
        }
    }

    /// [`baseline`](Self::baseline) with a cold bath at `n̄_C = 3·10⁴` and
    /// `ε` chosen so that `ω_M/γ_eff = 10⁶`.
    pub fn baseline_with_cold_bath(mu: f64) -> Self {
        let mut p = Self::baseline(mu);
        p.n_c = 3e4;
        p.epsilon = epsilon_for_effective_q(p.osc.omega_m, p.omega_ap(), 1e6).expect("small coupling is valid");
        p
    }

    pub fn validate(&self) -> Result<()> {
        OscillatorParams::new(self.osc.omega_m, self.osc.gamma)?;
        check_occupancy("n_h", self.n_h)?;
        check_occupancy("n_c", self.n_c)?;
        ColdCoupling::new(self.epsilon.epsilon())?;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid("mu", format!("must be positive and finite, got {}", self.mu)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("tau", format!("must be positive and finite, got {}", self.tau)));
        }
        Ok(())
    }

    /// Squeezing repetition rate `ω_ap = 2π/τ`.
    pub fn omega_ap(&self) -> f64 {
        2.0 * PI / self.tau
    }

    /// Effective cold-bath decay rate `γ_eff = εω_ap/π`.
    pub fn gamma_eff(&self) -> f64 {
        self.epsilon.epsilon() * self.omega_ap() / PI
    }

    pub fn omega_tau(&self) -> f64 {
        self.osc.omega_m * self.tau
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_model(mut self, model: BathModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_omega_ap(mut self, omega_ap: f64) -> Self {
        self.tau = tau_from_omega_ap(omega_ap);
        self
    }

    pub fn warnings(&self) -> Vec<ValidityWarning> {
        let mut out = Vec::new();
        if self.n_h < HIGH_OCCUPANCY_THRESHOLD {
            out.push(ValidityWarning::LowOccupancy { bath: "hot", occupancy: self.n_h });
        }
        if self.epsilon.epsilon() > 0.0 && self.n_c < HIGH_OCCUPANCY_THRESHOLD {
            out.push(ValidityWarning::LowOccupancy { bath: "cold", occupancy: self.n_c });
        }
        if self.omega_tau() >= 0.1 {
            out.push(ValidityWarning::LongCycle { omega_tau: self.omega_tau() });
        }
        if self.n_c >= self.n_h {
            out.push(ValidityWarning::ColdNotColder { n_c: self.n_c, n_h: self.n_h });
        }
        out
    }
}

/// The five channels of one cycle plus their composition
/// `V ↦ m_hom V m_homᵀ + v_add`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleChannels {
    pub s1: GaussChannel,
    pub cold1: GaussChannel,
    pub hot: GaussChannel,
    pub s2: GaussChannel,
    pub cold2: GaussChannel,
    pub m_hom: Mat2,
    pub v_add: Covar2,
}

/// Covariance snapshots through a steady-state cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleStates {
    pub v_ss: Covar2,
    /// After the first squeezer.
    pub v1: Covar2,
    /// After the first cold interaction.
    pub v2: Covar2,
    /// After the hot evolution.
    pub v3: Covar2,
    /// After the second squeezer.
    pub v4: Covar2,
}

impl CycleStates {
    pub fn as_array(&self) -> [Covar2; 5] {
        [self.v_ss, self.v1, self.v2, self.v3, self.v4]
    }
}

/// `R (D − I) Rᵀ + I` with `D = S1⁻¹`, which equals `R S1⁻¹ Rᵀ` but is
/// exactly the identity at `μ = 1`.
fn second_squeezer(mu: f64, theta: f64) -> Mat2 {
    let a = mu - 1.0;
    let b = (1.0 - mu) / mu;
    let (s, c) = theta.sin_cos();
    let off = c * s * (b - a);
    Mat2::new(a * c * c + b * s * s + 1.0, off, off, a * s * s + b * c * c + 1.0)
}

pub fn build_cycle(p: &MachineParams) -> Result<CycleChannels> {
    p.validate()?;
    let s1 = GaussChannel::unitary(squeeze_map(p.mu)?);
    let s2 = GaussChannel::unitary(second_squeezer(p.mu, p.omega_tau()));
    let hot = bath::hot_channel(p.model, &p.osc, p.n_h, p.tau)?;
    let cold = bath::cold_channel(p.model, p.epsilon, p.n_c)?;
    let full = cold.after(&s2).after(&hot).after(&cold).after(&s1);
    Ok(CycleChannels { s1, cold1: cold, hot, s2, cold2: cold, m_hom: full.m, v_add: full.n })
}

impl CycleChannels {
    pub fn full(&self) -> GaussChannel {
        GaussChannel::new(self.m_hom, self.v_add)
    }

    /// Steps in application order.
    pub fn steps(&self) -> [GaussChannel; 5] {
        [self.s1, self.cold1, self.hot, self.s2, self.cold2]
    }

    pub(crate) fn full_dd(&self) -> DdChannel {
        let steps = self.steps().map(|s| DdChannel::from_f64(&s));
        steps[1..].iter().fold(steps[0], |acc, step| step.after(&acc))
    }

    /// Snapshots `[v1, v2, v3, v4, cold2(v4)]` in extended precision.
    pub(crate) fn snapshots_dd(&self, v_ss: &DdCov) -> [DdCov; 5] {
        let mut out = [*v_ss; 5];
        let mut v = *v_ss;
        for (slot, step) in out.iter_mut().zip(self.steps()) {
            v = DdChannel::from_f64(&step).apply(&v);
            *slot = v;
        }
        out
    }

    pub fn states(&self, v_ss: &Covar2) -> CycleStates {
        let [v1, v2, v3, v4, _] = self.snapshots_dd(&DdCov::from_f64(v_ss)).map(DdCov::to_f64);
        CycleStates { v_ss: *v_ss, v1, v2, v3, v4 }
    }
}

/// Covariance snapshots through one cycle starting from `v_ss`.
pub fn step_states(p: &MachineParams, v_ss: &Covar2) -> Result<CycleStates> {
    Ok(build_cycle(p)?.states(v_ss))
}
