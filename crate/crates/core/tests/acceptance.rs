//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squeeze_core::bath::{hot_channel_io, ode_oracle_channel};
use squeeze_core::steadystate::snapshot_occupancies;
use squeeze_core::thermo::{
    carnot_efficiency, default_deadband, fridge_condition, mu_slice, phase_scan, rwa_coefficients, sample_regime,
    FridgeForm, RegimeRanges,
};
use squeeze_core::verify::{channel_rel_error, covar_rel_error, random_contractive_instance};
use squeeze_core::{
    cycle_ledger, engine_criterion, mu_opt_numeric, rwa_nogo_scan, solve_direct, solve_iterative, steady_state,
    BathModel, Covar2, CycleLedger, MachineParams, Mat2, OscillatorParams, Phase, TemperatureConvention,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within_budget(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn n_ss(p: &MachineParams) -> f64 {
    steady_state(p).expect("steady state exists").n_ss
}

/// Independent reading of the small-parameter steady-state formula.
fn mu_opt_formula(p: &MachineParams) -> f64 {
    let r = p.omega_ap() / (2.0 * PI * p.osc.omega_m);
    (3.0 * r * r).powf(0.25)
}

fn first_law() -> Outcome {
    let start = Instant::now();
    let ranges = RegimeRanges::default();
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    let mut unphysical = 0;
    let mut other_errors = 0;
    for (model, seed) in [(BathModel::IndependentOscillator, 1), (BathModel::Rwa, 2)] {
        for p in sample_regime(&ranges, 10_000, model, seed) {
            match cycle_ledger(&p) {
                Ok(l) => {
                    let scale = l.w.abs().max(l.q_h.abs()).max(l.q_c.abs()).max(1e-30);
                    worst = worst.max((l.w + l.q_h + l.q_c).abs() / scale);
                    evaluated += 1;
                }
                Err(squeeze_core::Error::UnphysicalState { .. }) => unphysical += 1,
                Err(_) => other_errors += 1,
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && other_errors == 0 && within_budget(elapsed, 10.0),
        format!(
            "worst |W+Q_H+Q_C|/scale = {worst:.2e} over {evaluated} draws \
             ({unphysical} with unphysical steady state, {other_errors} other errors) in {elapsed:.2?}"
        ),
    )
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let gts = log_space(1e-6, 3.0, 20);
    let wts = log_space(1e-4, 3.0, 20);
    let (t, n) = (1.0, 50.0);
    let mut worst: f64 = 0.0;
    for &gt in &gts {
        for &wt in &wts {
            let osc = OscillatorParams::new(wt / t, gt / t).expect("grid parameters are valid");
            let closed = hot_channel_io(&osc, n, t).expect("closed form");
            let ode = ode_oracle_channel(osc.omega_m, osc.gamma, n, t, t / 4000.0).expect("oracle");
            worst = worst.max(channel_rel_error(&closed, &ode));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && within_budget(elapsed, 30.0),
        format!("worst relative deviation {worst:.2e} on 20x20 grid in {elapsed:.2?}"),
    )
}

fn short_time() -> Outcome {
    let osc = OscillatorParams::new(1e6, 1.0).expect("valid oscillator");
    let ts = log_space(1e-10, 1e-8, 12);
    let noise: Vec<Covar2> = ts.iter().map(|&t| hot_channel_io(&osc, 4e4, t).expect("hot channel").n).collect();
    let xx = slope(&ts, &noise.iter().map(|v| v.xx).collect::<Vec<_>>());
    let xp = slope(&ts, &noise.iter().map(|v| v.xp).collect::<Vec<_>>());
    let pp = slope(&ts, &noise.iter().map(|v| v.pp).collect::<Vec<_>>());
    let ok = (xx - 3.0).abs() <= 0.15 && (xp - 2.0).abs() <= 0.10 && (pp - 1.0).abs() <= 0.05;
    outcome(ok, format!("slopes xx {xx:.4}, xp {xp:.4}, pp {pp:.4}"))
}

fn sylvester() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (m, v) = random_contractive_instance(&mut rng, 0.95);
        let direct = solve_direct(&m, &v).expect("direct solve");
        let iter = solve_iterative(&m, &v, 1e-14, 1_000_000).expect("iterative solve");
        worst = worst.max(covar_rel_error(&iter, &direct));
    }
    let half = solve_direct(&Mat2::new(0.5, 0.0, 0.0, 0.5), &Covar2::identity()).expect("half map");
    let half_err = (half - Covar2::isotropic(4.0 / 3.0)).max_abs();
    outcome(
        worst <= 1e-9 && half_err <= 1e-11,
        format!("worst direct/iterative deviation {worst:.2e}; half-map case off by {half_err:.1e}"),
    )
}

fn lossless_slice() -> Outcome {
    let start = Instant::now();
    let base = MachineParams::baseline(1.0);
    let low = log_space(1e-2, 1e-1, 8);
    let high = log_space(1e3, 1e4, 8);
    let s_low = slope(&low, &low.iter().map(|&m| n_ss(&base.with_mu(m))).collect::<Vec<_>>());
    let s_high = slope(&high, &high.iter().map(|&m| n_ss(&base.with_mu(m))).collect::<Vec<_>>());

    let (mu_min, n_min) = log_space(1.0, 100.0, 2001)
        .into_iter()
        .map(|m| (m, n_ss(&base.with_mu(m))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty sweep");
    let mu_opt = mu_opt_formula(&base);
    let predicted = 2.0 * base.n_h / (mu_opt * mu_opt);
    let elapsed = start.elapsed();
    let ok = (s_low + 2.0).abs() <= 0.1
        && (s_high - 2.0).abs() <= 0.1
        && (mu_min / mu_opt - 1.0).abs() <= 0.1
        && (n_min / predicted - 1.0).abs() <= 0.2
        && within_budget(elapsed, 5.0);
    outcome(
        ok,
        format!(
            "slopes {s_low:.4} / {s_high:.4}; minimum {n_min:.1} at mu {mu_min:.2} \
             vs predicted {predicted:.1} at {mu_opt:.2}; {elapsed:.2?}"
        ),
    )
}

fn rwa_floor() -> Outcome {
    let base = MachineParams::baseline_with_cold_bath(1.0).with_model(BathModel::Rwa);
    let (worst_mu, worst) = mu_slice(&base, 1e-2, 1e3, 1000)
        .iter()
        .map(|p| (p.mu, n_ss(p) / p.n_c))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty sweep");
    outcome(worst >= 1.0 - 1e-9, format!("min n_SS/n_C = {worst:.6} at mu {worst_mu:.3}"))
}

fn top_slice_ledgers(n_c: f64) -> Vec<(MachineParams, CycleLedger)> {
    let mut base = MachineParams::baseline_with_cold_bath(1.0);
    base.n_c = n_c;
    mu_slice(&base, 0.2, 100.0, 4000).into_iter().map(|p| (p, cycle_ledger(&p).expect("ledger on the slice"))).collect()
}

fn engine_efficiency(slice: &[(MachineParams, CycleLedger)]) -> Outcome {
    let p0 = slice[0].0;
    let eta = carnot_efficiency(p0.n_c, p0.n_h, TemperatureConvention::HighTemperature);
    let peak = slice
        .iter()
        .filter(|(_, l)| l.phase == Phase::Engine)
        .map(|(p, l)| (p.mu, (l.w / l.q_h).abs() / eta))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match peak {
        Some((mu, r)) => outcome((0.10..=0.30).contains(&r), format!("peak efficiency {r:.4} of Carnot at mu {mu:.4}")),
        None => outcome(false, "no engine points on the slice"),
    }
}

/// Largest `|Q_H/W|` over points that pump heat into the hot bath.
fn pump_peak(slice: &[(MachineParams, CycleLedger)]) -> Option<(f64, f64, Phase)> {
    slice
        .iter()
        .filter(|(p, l)| {
            let d = default_deadband(p.n_h);
            l.w > d && l.q_h < -d
        })
        .map(|(p, l)| (p.mu, (l.q_h / l.w).abs(), l.phase))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

fn pump_cop(slice: &[(MachineParams, CycleLedger)]) -> Outcome {
    let mu_opt = mu_opt_numeric(&slice[0].0).expect("mu_opt").mu;
    match pump_peak(slice) {
        Some((mu, cop, phase)) => outcome(
            (1.0..=1.3).contains(&cop) && mu < mu_opt,
            format!("peak |Q_H/W| = {cop:.4} at mu {mu:.4} ({phase}), mu_opt {mu_opt:.3}"),
        ),
        None => outcome(false, "no heat-pumping points on the slice"),
    }
}

fn no_go() -> Outcome {
    let start = Instant::now();
    let grid = sample_regime(&RegimeRanges::default(), 10_000, BathModel::Rwa, 9);
    let rwa = rwa_nogo_scan(&grid);
    let io_grid: Vec<MachineParams> = grid.iter().map(|p| p.with_model(BathModel::IndependentOscillator)).collect();
    let io = phase_scan(&io_grid, "io");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_b = f64::INFINITY;
    let mut coeff_errors = 0;
    for _ in 0..10_000 {
        let eps = rng.gen_range(1e-9..1.0);
        let gt = rng.gen_range(1e-9..5.0);
        let wt = rng.gen_range(1e-9..PI);
        let n_h = 10f64.powf(rng.gen_range(0.0..6.0));
        let n_c = n_h * rng.gen_range(0.0..1.0);
        match rwa_coefficients(eps, gt, wt, n_h, n_c) {
            Ok(c) => min_b = min_b.min(c.big_b),
            Err(_) => coeff_errors += 1,
        }
    }
    let elapsed = start.elapsed();
    let ok = rwa.engine == 0
        && rwa.fridge == 0
        && rwa.failures == 0
        && io.engine > 0
        && io.fridge > 0
        && min_b >= 2.0 - 1e-9
        && coeff_errors == 0
        && within_budget(elapsed, 60.0);
    outcome(
        ok,
        format!(
            "rwa engine {} fridge {} pump {} trivial {}; io engine {} fridge {} pump {} trivial {} failed {}; \
             min B {min_b:.9}; {elapsed:.2?}",
            rwa.engine, rwa.fridge, rwa.pump, rwa.trivial, io.engine, io.fridge, io.pump, io.trivial, io.failures
        ),
    )
}

fn criteria_agreement(slice: &[(MachineParams, CycleLedger)]) -> Outcome {
    let mut agree = 0;
    let mut engine_hits = 0;
    for (p, l) in slice {
        let engine = engine_criterion(p).expect("steady state on the slice");
        let fridge = fridge_condition(p.mu, p.n_c, p.epsilon.epsilon(), l.n_ss, FridgeForm::Simplified);
        engine_hits += usize::from(engine);
        if engine == (l.phase == Phase::Engine) && fridge == (l.phase == Phase::Fridge) {
            agree += 1;
        }
    }
    let frac = agree as f64 / slice.len() as f64;
    outcome(
        frac >= 0.9,
        format!("{agree}/{} points agree ({:.1}%), engine criterion true at {engine_hits}", slice.len(), 100.0 * frac),
    )
}

fn below_cold() -> Outcome {
    let base = MachineParams::baseline_with_cold_bath(1.0);
    let mut best: Option<(f64, f64)> = None;
    for p in mu_slice(&base, 1.0, 100.0, 400) {
        let occ = snapshot_occupancies(&p).expect("snapshots");
        let lowest = occ.iter().copied().fold(f64::INFINITY, f64::min);
        if occ[0] < p.n_h && best.is_none_or(|(_, b)| lowest < b) {
            best = Some((p.mu, lowest));
        }
    }
    match best {
        Some((mu, lowest)) => outcome(
            lowest < base.n_c,
            format!("lowest snapshot occupancy {lowest:.1} at mu {mu:.3} (n_C = {:.0})", base.n_c),
        ),
        None => outcome(false, "no point with n_SS below n_H"),
    }
}

fn main() -> ExitCode {
    let total = Instant::now();
    let slice = top_slice_ledgers(3e4);
    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "first-law closure", first_law()),
        (2, "hot channel vs ODE oracle", oracle()),
        (3, "short-time noise scaling", short_time()),
        (4, "steady-state solver agreement", sylvester()),
        (5, "lossless slice asymptotics", lossless_slice()),
        (6, "rwa occupancy floor", rwa_floor()),
        (7, "engine efficiency", engine_efficiency(&slice)),
        (8, "pump coefficient of performance", pump_cop(&slice)),
        (9, "rwa no-go scan", no_go()),
        (10, "analytic criteria vs ledger", criteria_agreement(&slice)),
        (11, "below-cold-bath snapshots", below_cold()),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        let status = if o.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!o.passed);
        println!("{status} {id:>2} {name}: {}", o.detail);
    }

    // Same slice with a warmer cold bath, where the refrigerator branch exists.
    let warm = top_slice_ledgers(3.5e4);
    if let Some((mu, cop, phase)) = pump_peak(&warm) {
        println!("info    pump peak with n_C = 3.5e4: |Q_H/W| = {cop:.4} at mu {mu:.4} ({phase})");
    }

    println!("{}/{} criteria passed in {:.2?}", results.len() - failed, results.len(), total.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
