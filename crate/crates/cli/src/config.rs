use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use squeeze_core::protocol::tau_from_omega_ap;
use squeeze_core::{BathModel, ColdCoupling, MachineParams, OscillatorParams};

use crate::args::MachineArgs;
use crate::error::CliError;

const MAX_SWEEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Mu,
    /// Repetition rate as a multiple of `omega_m`.
    OmegaAp,
    Epsilon,
    NC,
    NH,
    Tau,
    Gamma,
}

impl SweepVar {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVar::Mu => "mu",
            SweepVar::OmegaAp => "omega_ap",
            SweepVar::Epsilon => "epsilon",
            SweepVar::NC => "n_c",
            SweepVar::NH => "n_h",
            SweepVar::Tau => "tau",
            SweepVar::Gamma => "gamma",
        }
    }

    fn set(&self, k: &mut Knobs, value: f64) {
        match self {
            SweepVar::Mu => k.mu = value,
            SweepVar::OmegaAp => k.tau = tau_from_omega_ap(value * k.omega_m),
            SweepVar::Epsilon => k.eps = value,
            SweepVar::NC => k.n_c = value,
            SweepVar::NH => k.n_h = value,
            SweepVar::Tau => k.tau = value,
            SweepVar::Gamma => k.gamma = value,
        }
    }
}

impl FromStr for SweepVar {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "mu" => SweepVar::Mu,
            "omega_ap" | "omega_ap_ratio" => SweepVar::OmegaAp,
            "epsilon" | "eps" => SweepVar::Epsilon,
            "n_c" => SweepVar::NC,
            "n_h" => SweepVar::NH,
            "tau" => SweepVar::Tau,
            "gamma" => SweepVar::Gamma,
            other => return Err(CliError::usage(format!("unknown sweep variable `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * t,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::usage(format!("sweep `{s}` is not var=scale:min:max:count"));
        let (var, rest) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        let [scale, min, max, count] = parts[..] else { return Err(bad()) };
        let scale = match scale {
            "lin" | "linear" => Scale::Linear,
            "log" => Scale::Log,
            _ => return Err(bad()),
        };
        let spec = SweepSpec {
            var: var.trim().parse()?,
            scale,
            min: min.parse().map_err(|_| bad())?,
            max: max.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
        };
        if spec.count < 2 {
            return Err(CliError::usage(format!("sweep `{s}`: count must be at least 2")));
        }
        if !(spec.min < spec.max) {
            return Err(CliError::usage(format!("sweep `{s}`: min must be below max")));
        }
        if spec.scale == Scale::Log && spec.min <= 0.0 {
            return Err(CliError::usage(format!("sweep `{s}`: log scale needs a positive minimum")));
        }
        Ok(spec)
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            Scale::Linear => "lin",
            Scale::Log => "log",
        };
        write!(f, "{}={scale}:{:e}:{:e}:{}", self.var.label(), self.min, self.max, self.count)
    }
}

/// Held-constant quantity, enforced by solving for `epsilon` at each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hold {
    /// `omega_m/gamma_eff = pi*omega_m/(epsilon*omega_ap)`.
    QEff(f64),
    /// `gamma_eff = epsilon*omega_ap/pi`.
    GammaEff(f64),
}

impl Hold {
    fn apply(&self, k: &mut Knobs) {
        // omega_ap = 2*pi/tau, so epsilon = gamma_eff*tau/2
        let gamma_eff = match *self {
            Hold::QEff(q) => k.omega_m / q,
            Hold::GammaEff(g) => g,
        };
        k.eps = 0.5 * gamma_eff * k.tau;
    }
}

impl FromStr for Hold {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::usage(format!("hold `{s}` is not q_eff=<value> or gamma_eff=<value>"));
        let (name, value) = s.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::usage(format!("hold `{s}`: value must be positive")));
        }
        match name.trim() {
            "q_eff" => Ok(Hold::QEff(value)),
            "gamma_eff" => Ok(Hold::GammaEff(value)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Hold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hold::QEff(v) => write!(f, "q_eff={v:e}"),
            Hold::GammaEff(v) => write!(f, "gamma_eff={v:e}"),
        }
    }
}

/// Raw operating point before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knobs {
    pub omega_m: f64,
    pub gamma: f64,
    pub n_h: f64,
    pub n_c: f64,
    pub eps: f64,
    pub mu: f64,
    pub tau: f64,
}

impl Knobs {
    pub fn omega_ap_ratio(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.tau * self.omega_m)
    }

    pub fn params(&self, model: BathModel) -> squeeze_core::Result<MachineParams> {
        MachineParams::new(
            OscillatorParams::new(self.omega_m, self.gamma)?,
            self.n_h,
            self.n_c,
            ColdCoupling::new(self.eps)?,
            self.mu,
            self.tau,
            model,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base: Knobs,
    pub sweeps: Vec<SweepSpec>,
    pub holds: Vec<Hold>,
    pub models: Vec<BathModel>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub precision: Option<usize>,
}

impl RunConfig {
    /// Sweep grid in row-major order (first sweep outermost), with holds
    /// applied after each point is expanded.
    pub fn grid(&self) -> Vec<Knobs> {
        let mut points = vec![self.base];
        for sweep in &self.sweeps {
            let values = sweep.values();
            points = points
                .into_iter()
                .flat_map(|pt| {
                    values.iter().map(move |&v| {
                        let mut next = pt;
                        sweep.var.set(&mut next, v);
                        next
                    })
                })
                .collect();
        }
        for pt in &mut points {
            for hold in &self.holds {
                hold.apply(pt);
            }
        }
        points
    }

    /// `#`-prefixed description of the full configuration.
    pub fn header(&self, command: &str) -> String {
        let b = &self.base;
        let mut lines = vec![
            format!("# squeeze {command}"),
            format!("# omega_m = {:e}", b.omega_m),
            format!("# gamma = {:e}", b.gamma),
            format!("# n_h = {:e}", b.n_h),
            format!("# n_c = {:e}", b.n_c),
            format!("# eps = {:e}", b.eps),
            format!("# mu = {:e}", b.mu),
            format!("# tau = {:e}", b.tau),
            format!("# model = {}", self.models.iter().map(|m| m.label()).collect::<Vec<_>>().join(",")),
            format!("# seed = {}", self.seed),
        ];
        lines.extend(self.sweeps.iter().map(|s| format!("# sweep = {s}")));
        lines.extend(self.holds.iter().map(|h| format!("# hold = {h}")));
        lines.join("\n") + "\n"
    }
}

/// Every setting as an optional value, so file and flag layers can merge.
#[derive(Debug, Clone, Default, PartialEq)]
struct Layer {
    omega_m: Option<f64>,
    q: Option<f64>,
    gamma: Option<f64>,
    n_h: Option<f64>,
    n_c: Option<f64>,
    eps: Option<f64>,
    mu: Option<f64>,
    tau: Option<f64>,
    omega_ap_ratio: Option<f64>,
    model: Option<String>,
    sweep: Vec<String>,
    hold: Vec<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    precision: Option<usize>,
}

impl Layer {
    fn from_args(a: &MachineArgs) -> Self {
        Layer {
            omega_m: a.omega_m,
            q: a.q,
            gamma: a.gamma,
            n_h: a.n_h,
            n_c: a.n_c,
            eps: a.eps,
            mu: a.mu,
            tau: a.tau,
            omega_ap_ratio: a.omega_ap_ratio,
            model: a.model.clone(),
            sweep: a.sweep.clone(),
            hold: a.hold.clone(),
            out: a.out.clone(),
            seed: a.seed,
            precision: a.precision,
        }
    }

    fn parse_file(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut layer = Layer::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |what: &str| CliError::usage(format!("{}:{}: {what}", path.display(), lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            let num = || value.parse::<f64>().map_err(|_| err(&format!("`{value}` is not a number")));
            match key.as_str() {
                "omega_m" => layer.omega_m = Some(num()?),
                "q" => layer.q = Some(num()?),
                "gamma" => layer.gamma = Some(num()?),
                "n_h" => layer.n_h = Some(num()?),
                "n_c" => layer.n_c = Some(num()?),
                "eps" | "epsilon" => layer.eps = Some(num()?),
                "mu" => layer.mu = Some(num()?),
                "tau" => layer.tau = Some(num()?),
                "omega_ap_ratio" => layer.omega_ap_ratio = Some(num()?),
                "model" => layer.model = Some(value.to_string()),
                "sweep" => layer.sweep.push(value.to_string()),
                "hold" => layer.hold.push(value.to_string()),
                "out" => layer.out = Some(PathBuf::from(value)),
                "seed" => layer.seed = Some(value.parse().map_err(|_| err("seed must be an unsigned integer"))?),
                "precision" => {
                    layer.precision = Some(value.parse().map_err(|_| err("precision must be an unsigned integer"))?)
                }
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        Ok(layer)
    }

    /// `top` wins wherever it sets a value. Setting either member of a
    /// mutually exclusive pair in `top` clears both members below it.
    fn overlay(mut self, top: Layer) -> Layer {
        if top.q.is_some() || top.gamma.is_some() {
            self.q = top.q;
            self.gamma = top.gamma;
        }
        if top.tau.is_some() || top.omega_ap_ratio.is_some() {
            self.tau = top.tau;
            self.omega_ap_ratio = top.omega_ap_ratio;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(omega_m, n_h, n_c, eps, mu, model, out, seed, precision);
        if !top.sweep.is_empty() {
            self.sweep = top.sweep;
        }
        if !top.hold.is_empty() {
            self.hold = top.hold;
        }
        self
    }
}

fn parse_models(s: &str) -> Result<Vec<BathModel>, CliError> {
    match s {
        "both" => Ok(vec![BathModel::IndependentOscillator, BathModel::Rwa]),
        other => other
            .parse::<BathModel>()
            .map(|m| vec![m])
            .map_err(|_| CliError::usage(format!("unknown model `{other}`, expected io, rwa or both"))),
    }
}

/// Merge built-in defaults, the optional config file and the flags.
pub fn resolve(args: &MachineArgs) -> Result<RunConfig, CliError> {
    let mut layer = Layer::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        layer = Layer::parse_file(&text, path)?;
    }
    let l = layer.overlay(Layer::from_args(args));
    if l.q.is_some() && l.gamma.is_some() {
        return Err(CliError::usage("set only one of q and gamma"));
    }
    if l.tau.is_some() && l.omega_ap_ratio.is_some() {
        return Err(CliError::usage("set only one of tau and omega_ap_ratio"));
    }

    let omega_m = l.omega_m.unwrap_or(1e6);
    let gamma = match (l.q, l.gamma) {
        (Some(q), _) => {
            if !(q > 0.0) {
                return Err(CliError::usage(format!("quality factor must be positive, got {q}")));
            }
            omega_m / q
        }
        (None, Some(g)) => g,
        (None, None) => omega_m / 1e6,
    };
    let tau = match (l.tau, l.omega_ap_ratio) {
        (Some(t), _) => t,
        (None, Some(r)) => tau_from_omega_ap(r * omega_m),
        (None, None) => tau_from_omega_ap(1e3 * omega_m),
    };
    let base = Knobs {
        omega_m,
        gamma,
        n_h: l.n_h.unwrap_or(4e4),
        n_c: l.n_c.unwrap_or(0.0),
        eps: l.eps.unwrap_or(0.0),
        mu: l.mu.unwrap_or(1.0),
        tau,
    };

    let sweeps = l.sweep.iter().map(|s| s.parse()).collect::<Result<Vec<SweepSpec>, _>>()?;
    if sweeps.len() > MAX_SWEEPS {
        return Err(CliError::usage(format!("at most {MAX_SWEEPS} sweeps, got {}", sweeps.len())));
    }
    if sweeps.len() == 2 && sweeps[0].var == sweeps[1].var {
        return Err(CliError::usage("sweep variables must be distinct"));
    }
    let holds = l.hold.iter().map(|s| s.parse()).collect::<Result<Vec<Hold>, _>>()?;
    if holds.len() > 1 {
        return Err(CliError::usage("at most one hold constraint"));
    }
    if !holds.is_empty() && sweeps.iter().any(|s| s.var == SweepVar::Epsilon) {
        return Err(CliError::usage("cannot sweep epsilon while a hold constraint fixes it"));
    }

    Ok(RunConfig {
        base,
        sweeps,
        holds,
        models: parse_models(l.model.as_deref().unwrap_or("io"))?,
        out: l.out,
        seed: l.seed.unwrap_or(42),
        precision: l.precision,
    })
}
