//! Gaussian channels generated by the thermal baths.
//!
//! The hot bath acts for a finite time through either the momentum-damped
//! (independent oscillator) Langevin equations or their rotating-wave
//! counterpart. The cold bath acts instantaneously, parametrized by the loss
//! `ε ∈ [0, 1]`.

use std::f64::consts::PI;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::gaussian::{rotation, Covar2, GaussChannel, Mat2};

/// Occupancy below which the Markovian Langevin description is not trusted.
pub const HIGH_OCCUPANCY_THRESHOLD: f64 = 100.0;

/// Which bath coupling model generates the dissipative channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BathModel {
    /// Loss and noise enter through the momentum only.
    IndependentOscillator,
    /// Rotating-wave (Born–Markov) model: loss and noise shared isotropically.
    Rwa,
}

impl BathModel {
    pub fn label(&self) -> &'static str {
        match self {
            BathModel::IndependentOscillator => "io",
            BathModel::Rwa => "rwa",
        }
    }
}

impl std::str::FromStr for BathModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "io" | "independent-oscillator" | "independentoscillator" => Ok(BathModel::IndependentOscillator),
            "rwa" => Ok(BathModel::Rwa),
            other => Err(Error::invalid("model", format!("unknown bath model `{other}`"))),
        }
    }
}

/// Resonance frequency and damping rate of the working oscillator (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub omega_m: f64,
    pub gamma: f64,
}

impl OscillatorParams {
    pub fn new(omega_m: f64, gamma: f64) -> Result<Self> {
        if !(omega_m > 0.0 && omega_m.is_finite()) {
            return Err(Error::invalid("omega_m", format!("must be positive and finite, got {omega_m}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("must be non-negative and finite, got {gamma}")));
        }
        Ok(Self { omega_m, gamma })
    }

    /// From the quality factor `Q = ω_M/Γ`.
    pub fn from_quality(omega_m: f64, q: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::invalid("q", format!("quality factor must be positive, got {q}")));
        }
        Self::new(omega_m, omega_m / q)
    }

    /// `ω_M/Γ`; infinite for an undamped oscillator.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma
    }

    pub fn is_underdamped(&self) -> bool {
        self.gamma < 2.0 * self.omega_m
    }
}

/// A thermal bath: equilibrium occupancy plus coupling model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub occupancy: f64,
    pub model: BathModel,
}

impl BathSpec {
    pub fn new(occupancy: f64, model: BathModel) -> Result<Self> {
        check_occupancy("occupancy", occupancy)?;
        Ok(Self { occupancy, model })
    }

    /// False when the occupancy is below [`HIGH_OCCUPANCY_THRESHOLD`].
    pub fn is_high_occupancy(&self) -> bool {
        self.occupancy >= HIGH_OCCUPANCY_THRESHOLD
    }
}

/// Loss of the instantaneous cold-bath interaction: 0 is lossless, 1 fully
/// thermalizes the affected quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColdCoupling(f64);

impl ColdCoupling {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid("epsilon", format!("cold coupling must lie in [0, 1], got {epsilon}")));
        }
        Ok(Self(epsilon))
    }

    /// Coupling equivalent to damping `λ = γ·t_C` applied instantaneously.
    pub fn from_damping(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::invalid("lambda", format!("must be non-negative, got {lambda}")));
        }
        Self::new(-(-lambda).exp_m1())
    }

    pub fn epsilon(&self) -> f64 {
        self.0
    }
}

/// How bath temperatures are recovered from occupancies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemperatureConvention {
    /// `n ≈ k_B T / ħω`, so temperature ratios equal occupancy ratios.
    #[default]
    HighTemperature,
    /// Exact inversion of the Bose–Einstein distribution.
    BoseEinstein,
}

/// Temperature in units of `ħω/k_B` for a mode of occupancy `n`.
pub fn temperature_from_occupancy(n: f64, convention: TemperatureConvention) -> f64 {
    match convention {
        TemperatureConvention::HighTemperature => n,
        TemperatureConvention::BoseEinstein => 1.0 / (1.0 / n).ln_1p(),
    }
}

/// `T_C / T_H` under the given convention.
pub fn temperature_ratio(n_c: f64, n_h: f64, convention: TemperatureConvention) -> f64 {
    temperature_from_occupancy(n_c, convention) / temperature_from_occupancy(n_h, convention)
}

pub(crate) fn check_occupancy(name: &'static str, n: f64) -> Result<()> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::invalid(name, format!("occupancy must be non-negative and finite, got {n}")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 || t.is_infinite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// Homogeneous solution of the momentum-damped equations at one time,
/// pre-multiplied by the envelope `e^{−Γt/2}`.
///
/// With `h = Γ/2` and `q = ω² − h²`, let `C = cos(√q t)` and
/// `S = sin(√q t)/√q` (analytically continued to `cosh`/`sinh` for `q < 0`).
/// Both are entire in `q`, so the under-, critically and overdamped regimes
/// share one representation; each field is formed without cancelling large
/// exponentials.
#[derive(Debug, Clone, Copy)]
struct Propagator {
    /// `e^{−ht}·S`
    es: f64,
    /// `e^{−ht}(C + hS)`
    plus: f64,
    /// `e^{−ht}(C − hS)`
    minus: f64,
}

impl Propagator {
    fn new(omega: f64, gamma: f64, t: f64) -> Self {
        let h = 0.5 * gamma;
        let q = (omega - h) * (omega + h);
        if q > 0.0 {
            let k = q.sqrt();
            let env = (-h * t).exp();
            let (s, c) = (k * t).sin_cos();
            let sinc = if k * t == 0.0 { t } else { s / k };
            let es = env * sinc;
            let ec = env * c;
            Self { es, plus: ec + h * es, minus: ec - h * es }
        } else if q < 0.0 {
            let kappa = (-q).sqrt();
            // growth exponent κ − h = −ω²/(κ + h) ≤ 0
            let slow = -(omega * omega) / (kappa + h);
            let fast = -(kappa + h);
            let ea = (slow * t).exp();
            let eb = (fast * t).exp();
            let es = ea * (-(-2.0 * kappa * t).exp_m1()) / (2.0 * kappa);
            let ec = 0.5 * (ea + eb);
            let minus = if kappa >= 0.5 * h { (slow * ea + (kappa + h) * eb) / (2.0 * kappa) } else { ec - h * es };
            Self { es, plus: ec + h * es, minus }
        } else {
            let env = (-h * t).exp();
            let es = t * env;
            Self { es, plus: env + h * es, minus: env - h * es }
        }
    }

    fn matrix(&self, omega: f64) -> Mat2 {
        Mat2::new(self.plus, omega * self.es, -omega * self.es, self.minus)
    }
}

/// Gauss–Legendre rule on [−1, 1] used for the position-noise integral.
const GL_ORDER: usize = 12;
/// Beyond this many quadrature panels the direct closed form is used.
const MAX_QUADRATURE_PANELS: f64 = 256.0;

static GAUSS_LEGENDRE: LazyLock<[(f64, f64); GL_ORDER]> = LazyLock::new(gauss_legendre::<GL_ORDER>);

fn gauss_legendre<const N: usize>() -> [(f64, f64); N] {
    let mut rule = [(0.0, 0.0); N];
    let n = N as f64;
    for (i, slot) in rule.iter_mut().enumerate() {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=N {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    rule
}

/// `∫₀ᵗ (e^{−Γs/2} S(s))² ds` by composite Gauss–Legendre quadrature.
fn position_noise_integral(omega: f64, gamma: f64, t: f64, panels: usize) -> f64 {
    let width = t / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for &(x, w) in GAUSS_LEGENDRE.iter() {
            let es = Propagator::new(omega, gamma, mid + 0.5 * width * x).es;
            acc += w * es * es;
        }
        total += 0.5 * width * acc;
    }
    total
}

/// Hot-bath channel of the momentum-damped (independent oscillator) model
/// after evolving for `t` seconds.
///
/// `M_H` is the damped rotation; the added noise is
/// `(2n+1)(I − M_H M_Hᵀ)` entrywise, except that the position variance,
/// which starts at order `t³` and would cancel catastrophically, is taken
/// as `2Γω²(2n+1)∫₀ᵗ e^{−Γs} S(s)² ds`.
pub fn hot_channel_io(osc: &OscillatorParams, n_h: f64, t: f64) -> Result<GaussChannel> {
    check_time(t)?;
    check_occupancy("n_h", n_h)?;
    let (omega, gamma) = (osc.omega_m, osc.gamma);
    if t == 0.0 {
        return Ok(GaussChannel::identity());
    }
    let prop = Propagator::new(omega, gamma, t);
    let m = prop.matrix(omega);
    let loss = -(-gamma * t).exp_m1();
    let panels = ((gamma + 2.0 * omega) * t).ceil().max(1.0);
    let xx = if panels <= MAX_QUADRATURE_PANELS {
        2.0 * gamma * omega * omega * position_noise_integral(omega, gamma, t, panels as usize)
    } else {
        loss - gamma * prop.es * prop.plus
    };
    let xp = gamma * omega * prop.es * prop.es;
    let pp = loss + gamma * prop.es * prop.minus;
    let s = 2.0 * n_h + 1.0;
    Ok(GaussChannel::new(m, Covar2::new(xx * s, xp * s, pp * s)))
}

/// Hot-bath channel of the rotating-wave model:
/// `M = e^{−Γt/2} R(ω t)`, `N = (2n+1)(1 − e^{−Γt}) I`.
pub fn hot_channel_rwa(osc: &OscillatorParams, n_h: f64, t: f64) -> Result<GaussChannel> {
    check_time(t)?;
    check_occupancy("n_h", n_h)?;
    let m = rotation(osc.omega_m * t).scale((-0.5 * osc.gamma * t).exp());
    let noise = (2.0 * n_h + 1.0) * -(-osc.gamma * t).exp_m1();
    Ok(GaussChannel::new(m, Covar2::isotropic(noise)))
}

/// Dispatches on the bath model.
pub fn hot_channel(model: BathModel, osc: &OscillatorParams, n_h: f64, t: f64) -> Result<GaussChannel> {
    match model {
        BathModel::IndependentOscillator => hot_channel_io(osc, n_h, t),
        BathModel::Rwa => hot_channel_rwa(osc, n_h, t),
    }
}

/// Leading-order added noise of the momentum-damped model,
/// `(2n+1)[[⅔Γω²t³, Γωt²], [Γωt², 2Γt]]`. Accurate while `ω t ≪ 1`.
pub fn short_time_vh(osc: &OscillatorParams, n_h: f64, t: f64) -> Covar2 {
    let (w, g) = (osc.omega_m, osc.gamma);
    let s = 2.0 * n_h + 1.0;
    Covar2::new(s * (2.0 / 3.0) * g * w * w * t * t * t, s * g * w * t * t, s * 2.0 * g * t)
}

/// Whether `t` is inside the domain where [`short_time_vh`] is meaningful.
pub fn short_time_valid(osc: &OscillatorParams, t: f64) -> bool {
    osc.omega_m * t < 0.1
}

/// Instantaneous momentum-damped cold interaction:
/// `M = diag(1, 1−ε)`, `N = (2n_C+1) diag(0, ε(2−ε))`.
pub fn cold_channel_io(coupling: ColdCoupling, n_c: f64) -> Result<GaussChannel> {
    check_occupancy("n_c", n_c)?;
    let eps = coupling.epsilon();
    Ok(GaussChannel::new(Mat2::diag(1.0, 1.0 - eps), Covar2::diag(0.0, (2.0 * n_c + 1.0) * eps * (2.0 - eps))))
}

/// Instantaneous rotating-wave cold interaction, a beamsplitter of
/// reflectivity `ε`: `M = √(1−ε) I`, `N = (2n_C+1) ε I`.
pub fn cold_channel_rwa(coupling: ColdCoupling, n_c: f64) -> Result<GaussChannel> {
    check_occupancy("n_c", n_c)?;
    let eps = coupling.epsilon();
    Ok(GaussChannel::new(Mat2::identity().scale((1.0 - eps).sqrt()), Covar2::isotropic((2.0 * n_c + 1.0) * eps)))
}

pub fn cold_channel(model: BathModel, coupling: ColdCoupling, n_c: f64) -> Result<GaussChannel> {
    match model {
        BathModel::IndependentOscillator => cold_channel_io(coupling, n_c),
        BathModel::Rwa => cold_channel_rwa(coupling, n_c),
    }
}

/// Finite-duration momentum-damped channel in the overdamped regime
/// `γ > 2ω`. In the limit `γ = λ/t`, `t → 0` it reduces to
/// [`cold_channel_io`] with `ε = 1 − e^{−λ}`.
pub fn overdamped_channel(omega: f64, gamma: f64, n: f64, t: f64) -> Result<GaussChannel> {
    let osc = OscillatorParams::new(omega, gamma)?;
    if osc.is_underdamped() || gamma == 2.0 * omega {
        return Err(Error::invalid(
            "gamma",
            format!("overdamped channel needs gamma > 2 omega, got gamma={gamma}, omega={omega}"),
        ));
    }
    hot_channel_io(&osc, n, t)
}

/// Reference channel from direct integration of the momentum-damped
/// moment equations with classical fourth-order Runge–Kutta:
/// `Ṁ = A M`, `Ṅ = A N + N Aᵀ + D`, with `A = [[0, ω], [−ω, −γ]]` and
/// `D = diag(0, 2γ(2n+1))`.
pub fn ode_oracle_channel(omega: f64, gamma: f64, n: f64, t: f64, dt: f64) -> Result<GaussChannel> {
    check_time(t)?;
    check_occupancy("n", n)?;
    if t == 0.0 {
        return Ok(GaussChannel::identity());
    }
    if !(dt > 0.0) || dt > t / 1000.0 {
        return Err(Error::StepTooLarge { dt, t });
    }
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let a = Mat2::new(0.0, omega, -omega, -gamma);
    let diffusion = 2.0 * gamma * (2.0 * n + 1.0);
    let deriv_m = |m: &Mat2| a * *m;
    let deriv_n = |v: &Covar2| {
        let av = a * v.as_mat();
        Covar2::new(2.0 * av.xx, av.xp + av.px, 2.0 * av.pp + diffusion)
    };
    let mut m = Mat2::identity();
    let mut v = Covar2::zero();
    for _ in 0..steps {
        let k1 = deriv_m(&m);
        let k2 = deriv_m(&(m + k1.scale(0.5 * h)));
        let k3 = deriv_m(&(m + k2.scale(0.5 * h)));
        let k4 = deriv_m(&(m + k3.scale(h)));
        m = m + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);

        let l1 = deriv_n(&v);
        let l2 = deriv_n(&(v + l1.scale(0.5 * h)));
        let l3 = deriv_n(&(v + l2.scale(0.5 * h)));
        let l4 = deriv_n(&(v + l3.scale(h)));
        v = v + (l1 + l2.scale(2.0) + l3.scale(2.0) + l4).scale(h / 6.0);
    }
    Ok(GaussChannel::new(m, v))
}
