//! Self-check suite: each check compares an implementation against an
//! independent route to the same quantity.
//!
//! The hot-bath channel is injectable so that a deliberately broken variant
//! can be shown to fail the suite.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bath::{self, BathModel, OscillatorParams};
use crate::error::Result;
use crate::gaussian::{Covar2, GaussChannel, Mat2};
use crate::steadystate::{solve_direct, solve_iterative};
use crate::thermo::{cycle_ledger, rwa_coefficients, rwa_nogo_scan, sample_regime, RegimeRanges};

/// Signature of a finite-time hot-bath channel `(oscillator, n̄_H, t)`.
pub type HotChannelFn = fn(&OscillatorParams, f64, f64) -> Result<GaussChannel>;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random draws used by the statistical checks.
    pub draws: usize,
    pub hot_channel: HotChannelFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 42, draws: 500, hot_channel: bath::hot_channel_io }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Fixed-width table, one line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<28} {}", c.name, c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }
}

/// Largest relative deviation between two channels: matrix entries against
/// the largest entry, variances entrywise, the covariance against the
/// geometric mean of the variances.
pub fn channel_rel_error(a: &GaussChannel, b: &GaussChannel) -> f64 {
    let m = (a.m - b.m).max_abs() / b.m.max_abs().max(f64::MIN_POSITIVE);
    m.max(covar_rel_error(&a.n, &b.n))
}

pub fn covar_rel_error(a: &Covar2, b: &Covar2) -> f64 {
    let rel = |x: f64, y: f64| {
        if x == y {
            0.0
        } else {
            (x - y).abs() / y.abs()
        }
    };
    let cross = (b.xx * b.pp).sqrt();
    let xp = if a.xp == b.xp { 0.0 } else { (a.xp - b.xp).abs() / cross };
    rel(a.xx, b.xx).max(rel(a.pp, b.pp)).max(xp)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Random map with spectral radius below `max_radius` and random positive
/// semidefinite added noise.
pub fn random_contractive_instance<R: Rng>(rng: &mut R, max_radius: f64) -> (Mat2, Covar2) {
    let mut m = Mat2::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let rho = m.spectral_radius();
    if rho > 0.0 {
        m = m.scale(rng.gen_range(0.0..max_radius) / rho);
    }
    let (l11, l21, l22) = (rng.gen_range(0.1..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.1..2.0));
    let v = Covar2::new(l11 * l11, l11 * l21, l21 * l21 + l22 * l22);
    (m, v)
}

fn oracle_check(hot: HotChannelFn) -> CheckResult {
    let mut worst: f64 = 0.0;
    let n_h = 50.0;
    for i in 0..5 {
        for j in 0..5 {
            let gt = 10f64.powf(-6.0 + 6.5 * i as f64 / 4.0).min(3.0);
            let wt = 10f64.powf(-4.0 + 4.5 * j as f64 / 4.0).min(3.0);
            let t = 1.0;
            let Ok(osc) = OscillatorParams::new(wt / t, gt / t) else { return fail("ode oracle", "bad grid point") };
            let err = match (hot(&osc, n_h, t), bath::ode_oracle_channel(osc.omega_m, osc.gamma, n_h, t, t / 4000.0)) {
                (Ok(a), Ok(b)) => channel_rel_error(&a, &b),
                _ => f64::INFINITY,
            };
            worst = worst.max(err);
        }
    }
    CheckResult { name: "ode oracle", passed: worst <= 1e-8, detail: format!("max rel err {worst:.3e} (tol 1e-8)") }
}

fn semigroup_check(hot: HotChannelFn) -> CheckResult {
    let cases = [(1.0, 0.1, 0.7, 1.3), (1e6, 1.0, 2e-9, 5e-9), (1.0, 3.0, 0.2, 0.5), (2.0, 4.0, 0.3, 0.9)];
    let mut worst: f64 = 0.0;
    for &(w, g, t1, t2) in &cases {
        let osc = OscillatorParams { omega_m: w, gamma: g };
        let err = match (hot(&osc, 20.0, t1), hot(&osc, 20.0, t2), hot(&osc, 20.0, t1 + t2)) {
            (Ok(a), Ok(b), Ok(ab)) => channel_rel_error(&b.after(&a), &ab),
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    CheckResult { name: "semigroup", passed: worst <= 1e-10, detail: format!("max rel err {worst:.3e} (tol 1e-10)") }
}

fn short_time_check(hot: HotChannelFn) -> CheckResult {
    let osc = OscillatorParams { omega_m: 1e6, gamma: 1.0 };
    let ts: Vec<f64> = (0..12).map(|i| 1e-12 * 10f64.powf(i as f64 / 4.0)).collect();
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for &t in &ts {
        match hot(&osc, 4e4, t) {
            Ok(ch) => {
                cols[0].push(ch.n.xx);
                cols[1].push(ch.n.xp);
                cols[2].push(ch.n.pp);
            }
            Err(_) => return fail("short-time scaling", "channel evaluation failed"),
        }
    }
    if cols.iter().flatten().any(|v| !(*v > 0.0)) {
        return fail("short-time scaling", "non-positive noise entry");
    }
    let slopes = cols.map(|c| log_log_slope(&ts, &c));
    let want = [3.0, 2.0, 1.0];
    let ok = slopes.iter().zip(want).all(|(s, w)| (s - w).abs() <= 0.05 * w);
    CheckResult {
        name: "short-time scaling",
        passed: ok,
        detail: format!("slopes {:.4} {:.4} {:.4} (want 3 2 1)", slopes[0], slopes[1], slopes[2]),
    }
}

fn sylvester_check(seed: u64, draws: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (m, v) = random_contractive_instance(&mut rng, 0.95);
        let err = match (solve_direct(&m, &v), solve_iterative(&m, &v, 1e-12, 10_000_000)) {
            (Ok(a), Ok(b)) => (a - b).max_abs() / a.max_abs(),
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    CheckResult {
        name: "sylvester direct/iterative",
        passed: worst <= 1e-9,
        detail: format!("{draws} draws, max rel diff {worst:.3e} (tol 1e-9)"),
    }
}

fn first_law_check(seed: u64, draws: usize) -> CheckResult {
    let ranges = RegimeRanges::default();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (k, model) in [BathModel::IndependentOscillator, BathModel::Rwa].into_iter().enumerate() {
        for p in sample_regime(&ranges, draws, model, seed.wrapping_add(k as u64)) {
            match cycle_ledger(&p) {
                Ok(l) => worst = worst.max(l.closure_error() / l.flow_scale()),
                Err(_) => failures += 1,
            }
        }
    }
    CheckResult {
        name: "first-law closure",
        passed: failures == 0 && worst <= 1e-9,
        detail: format!("{} draws, {failures} failed, max rel imbalance {worst:.3e} (tol 1e-9)", 2 * draws),
    }
}

fn rwa_nogo_check(seed: u64, draws: usize) -> CheckResult {
    let grid = sample_regime(&RegimeRanges::default(), draws, BathModel::Rwa, seed.wrapping_add(17));
    let report = rwa_nogo_scan(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(29));
    let mut min_b = f64::INFINITY;
    for _ in 0..draws {
        let eps = rng.gen_range(1e-6..1.0 - 1e-6);
        let gt = rng.gen_range(1e-6..5.0);
        let wt = rng.gen_range(1e-4..std::f64::consts::PI - 1e-4);
        if let Ok(c) = rwa_coefficients(eps, gt, wt, rng.gen_range(1.0..1e6), rng.gen_range(0.0..1e6)) {
            min_b = min_b.min(c.big_b);
        }
    }
    CheckResult {
        name: "rwa no-go",
        passed: report.violations.is_empty() && report.failures == 0 && min_b >= 2.0 - 1e-9,
        detail: format!(
            "{} points: {} engine, {} fridge, {} failed; min B {min_b:.6}",
            report.points, report.engine, report.fridge, report.failures
        ),
    }
}

fn fail(name: &'static str, why: &str) -> CheckResult {
    CheckResult { name, passed: false, detail: why.to_string() }
}

pub fn run_suite(opts: &VerifyOptions) -> VerifyReport {
    VerifyReport {
        checks: vec![
            oracle_check(opts.hot_channel),
            semigroup_check(opts.hot_channel),
            short_time_check(opts.hot_channel),
            sylvester_check(opts.seed, opts.draws),
            first_law_check(opts.seed, opts.draws),
            rwa_nogo_check(opts.seed, opts.draws),
        ],
    }
}
