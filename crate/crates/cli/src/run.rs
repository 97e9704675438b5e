use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use squeeze_core::verify::{run_suite, VerifyOptions};
use squeeze_core::{
    cop, cycle_ledger, mu_opt_approx, mu_opt_numeric, n_ss_approx, n_ss_rwa_approx, steady_state, BathModel, CopReport,
    CycleLedger, Error, MachineParams,
};

use crate::args::{MachineArgs, VerifyArgs};
use crate::config::{resolve, Knobs, RunConfig};
use crate::error::CliError;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_float(x: f64, precision: Option<usize>) -> String {
    match precision {
        Some(p) => format!("{:.*e}", p.saturating_sub(1), x),
        None => format!("{x:e}"),
    }
}

fn approx_occupancy(p: &MachineParams) -> f64 {
    match p.model {
        BathModel::IndependentOscillator => n_ss_approx(p),
        BathModel::Rwa => n_ss_rwa_approx(p),
    }
}

fn print_warnings(p: &MachineParams) {
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
}

pub fn steady(args: &MachineArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    if !cfg.sweeps.is_empty() {
        return Err(CliError::usage("steady evaluates a single point; use sweep for --sweep"));
    }
    let mut out = open_output(cfg.out.as_deref())?;
    out.write_all(cfg.header("steady").as_bytes())?;
    let knobs = cfg.grid().remove(0);
    let f = |x: f64| fmt_float(x, cfg.precision);
    for &model in &cfg.models {
        let p = knobs.params(model)?;
        print_warnings(&p);
        let ss = steady_state(&p)?;
        let mu_opt = mu_opt_numeric(&p)?;
        writeln!(out, "model = {}", model.label())?;
        writeln!(out, "v_ss_xx = {}", f(ss.v_ss.xx))?;
        writeln!(out, "v_ss_xp = {}", f(ss.v_ss.xp))?;
        writeln!(out, "v_ss_pp = {}", f(ss.v_ss.pp))?;
        writeln!(out, "n_ss = {}", f(ss.n_ss))?;
        writeln!(out, "n_ss_approx = {}", f(approx_occupancy(&p)))?;
        writeln!(out, "mu_opt_approx = {}", f(mu_opt_approx(&p)))?;
        writeln!(out, "mu_opt_numeric = {}", f(mu_opt.mu))?;
        writeln!(out, "residual = {}", f(ss.residual))?;
        writeln!(out, "method = {:?}", ss.method)?;
    }
    out.flush()?;
    Ok(())
}

struct Evaluation {
    n_ss_approx: f64,
    ledger: CycleLedger,
    cop: Option<CopReport>,
    mu_opt: Option<f64>,
}

fn evaluate(k: &Knobs, model: BathModel, with_mu_opt: bool) -> Result<Evaluation, Error> {
    let p = k.params(model)?;
    let ledger = cycle_ledger(&p)?;
    let cop = match cop(&ledger, &p) {
        Ok(c) => Some(c),
        Err(Error::TrivialPhase) => None,
        Err(e) => return Err(e),
    };
    let mu_opt = if with_mu_opt { Some(mu_opt_numeric(&p)?.mu) } else { None };
    Ok(Evaluation { n_ss_approx: approx_occupancy(&p), ledger, cop, mu_opt })
}

/// Evaluate every grid point under every model in parallel and write the
/// rows in grid order.
fn grid_csv(cfg: &RunConfig, command: &str, with_mu_opt: bool) -> Result<(), CliError> {
    let grid = cfg.grid();
    let tasks: Vec<(&Knobs, BathModel)> = grid.iter().flat_map(|pt| cfg.models.iter().map(move |&m| (pt, m))).collect();
    let results: Vec<Result<Evaluation, Error>> =
        tasks.par_iter().map(|(pt, m)| evaluate(pt, *m, with_mu_opt)).collect();

    let mut out = open_output(cfg.out.as_deref())?;
    out.write_all(cfg.header(command).as_bytes())?;
    let mut csv = csv::Writer::from_writer(out);

    let mut head: Vec<&str> = vec!["model"];
    head.extend(["omega_m", "gamma", "n_h", "n_c", "eps", "mu", "tau", "omega_ap_ratio"]);
    head.extend(["n_ss", "n_ss_approx", "w", "q_h", "q_c", "phase", "cop", "cop_bound", "within_bound"]);
    if with_mu_opt {
        head.push("mu_opt");
    }
    head.push("error");
    csv.write_record(&head)?;

    let f = |x: f64| fmt_float(x, cfg.precision);
    let mut failures = Vec::new();
    for ((k, model), result) in tasks.iter().zip(&results) {
        let mut row = vec![model.label().to_string()];
        row.extend([k.omega_m, k.gamma, k.n_h, k.n_c, k.eps, k.mu, k.tau, k.omega_ap_ratio()].map(f));
        match result {
            Ok(e) => {
                let l = &e.ledger;
                row.extend([f(l.n_ss), f(e.n_ss_approx), f(l.w), f(l.q_h), f(l.q_c), l.phase.label().to_string()]);
                match &e.cop {
                    Some(c) => row.extend([f(c.value), f(c.bound), c.within_bound.to_string()]),
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
                if let Some(m) = e.mu_opt {
                    row.push(f(m));
                }
                row.push(String::new());
            }
            Err(err) => {
                let blanks = 9 + usize::from(with_mu_opt);
                row.extend(std::iter::repeat_n(String::new(), blanks));
                row.push(err.to_string());
                failures.push(err.clone());
            }
        }
        csv.write_record(&row)?;
    }
    csv.flush()?;

    if !results.is_empty() && failures.len() == results.len() {
        let first = failures.swap_remove(0);
        if matches!(first, Error::NoUniqueSteadyState { .. }) {
            return Err(first.into());
        }
        return Err(CliError::usage(format!("every grid point failed; first error: {first}")));
    }
    Ok(())
}

pub fn sweep(args: &MachineArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    if cfg.sweeps.is_empty() {
        return Err(CliError::usage("sweep needs at least one --sweep"));
    }
    grid_csv(&cfg, "sweep", false)
}

pub fn phase_diagram(args: &MachineArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    if cfg.sweeps.len() != 2 {
        return Err(CliError::usage("phase-diagram needs exactly two --sweep axes"));
    }
    grid_csv(&cfg, "phase-diagram", true)
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let opts = VerifyOptions { seed: args.seed, draws: args.draws, ..Default::default() };
    let report = run_suite(&opts);
    let mut out = open_output(args.out.as_deref())?;
    out.write_all(report.render().as_bytes())?;
    out.flush()?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed("verification suite reported failures".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_by_default() {
        for x in [1e6, 0.1 + 0.2, 3.0e4, -2.5e-17] {
            assert_eq!(fmt_float(x, None).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(12345.0, Some(3)), "1.23e4");
    }
}
