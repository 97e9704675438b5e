//! Periodic steady state of the cycle map and its effective occupancy.
//!
//! The steady state solves `V = M V Mᵀ + N` for the composed cycle channel.
//! Near the high-Q regime `M` contracts by only `~Γτ` per cycle, so the
//! production solver works on the symmetry-reduced 3×3 system in
//! double-double arithmetic; plain iteration is kept as an independent
//! oracle and Smith's squaring iteration covers slow contractions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{Covar2, Mat2, TOL_PHYS};
use crate::precise::{solve_stein, to_f64, DdCov, DdMat2};
use crate::protocol::{build_cycle, CycleChannels, MachineParams};

/// Relative fixed-point residual accepted from the solvers.
pub const TOL_SS: f64 = 1e-10;
/// Spectral radius at or above `1 − SPECTRAL_MARGIN` has no unique fixed point.
pub const SPECTRAL_MARGIN: f64 = 1e-12;
/// Search bracket for the optimal squeezing strength.
pub const MU_SEARCH_RANGE: (f64, f64) = (1e-2, 1e4);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Direct,
    Iterative,
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateResult {
    pub v_ss: Covar2,
    pub n_ss: f64,
    /// `‖V − (M V Mᵀ + N)‖∞ / ‖V‖∞`.
    pub residual: f64,
    pub method: SolveMethod,
}

/// Relative residual of `v` as a fixed point of `V ↦ M V Mᵀ + N`.
pub fn fixed_point_residual(m: &Mat2, v_add: &Covar2, v: &Covar2) -> f64 {
    let image = m.conjugate(v) + *v_add;
    (image - *v).norm_inf() / v.norm_inf().max(f64::MIN_POSITIVE)
}

fn check_contraction(m: &Mat2) -> Result<()> {
    let rho = m.spectral_radius();
    if !(rho < 1.0 - SPECTRAL_MARGIN) {
        return Err(Error::NoUniqueSteadyState { spectral_radius: rho });
    }
    Ok(())
}

fn check_inputs(m: &Mat2, v_add: &Covar2) -> Result<()> {
    if !m.is_finite() || !v_add.is_finite() {
        return Err(Error::invalid("m_hom", "cycle map contains non-finite entries"));
    }
    Ok(())
}

pub(crate) fn solve_direct_dd(m: &DdMat2, v_add: &DdCov) -> Result<DdCov> {
    let rounded = m.to_f64();
    check_contraction(&rounded)?;
    solve_stein(m, v_add).ok_or(Error::NoUniqueSteadyState { spectral_radius: rounded.spectral_radius() })
}

/// Unique symmetric solution of `V = M V Mᵀ + N`.
pub fn solve_direct(m_hom: &Mat2, v_add: &Covar2) -> Result<Covar2> {
    check_inputs(m_hom, v_add)?;
    solve_direct_dd(&DdMat2::from_f64(m_hom), &DdCov::from_f64(v_add)).map(DdCov::to_f64)
}

/// Plain fixed-point iteration from `V = 0` until successive iterates
/// differ by less than `tol` relative.
pub fn solve_iterative(m_hom: &Mat2, v_add: &Covar2, tol: f64, max_iters: u64) -> Result<Covar2> {
    check_inputs(m_hom, v_add)?;
    check_contraction(m_hom)?;
    let mut v = Covar2::zero();
    for _ in 0..max_iters {
        let next = m_hom.conjugate(&v) + *v_add;
        let step = (next - v).norm_inf();
        v = next;
        if step <= tol * v.norm_inf() {
            return Ok(v);
        }
    }
    Err(Error::MaxItersExceeded { iterations: max_iters })
}

/// Squaring iteration `V ← V + A V Aᵀ`, `A ← A²`, which after `k` rounds
/// equals the `2ᵏ`-th plain iterate. Runs in double-double arithmetic.
pub fn solve_doubling(m_hom: &Mat2, v_add: &Covar2, tol: f64) -> Result<Covar2> {
    check_inputs(m_hom, v_add)?;
    check_contraction(m_hom)?;
    const MAX_ROUNDS: u64 = 128;
    let mut a = DdMat2::from_f64(m_hom);
    let mut v = DdCov::from_f64(v_add);
    for _ in 0..MAX_ROUNDS {
        let increment = a.conjugate(&v);
        v = v.add(&increment);
        a = a.mul(&a);
        if increment.max_abs() <= tol * v.max_abs() {
            return Ok(v.to_f64());
        }
    }
    Err(Error::MaxItersExceeded { iterations: MAX_ROUNDS })
}

/// `n_SS = (√det V − 1)/2`.
pub fn effective_occupancy(v: &Covar2) -> Result<f64> {
    let det = v.det();
    if !(det >= 1.0 - TOL_PHYS) || !v.is_positive_definite() {
        return Err(Error::UnphysicalState { det });
    }
    Ok(0.5 * (det.sqrt() - 1.0))
}

pub(crate) fn steady_state_dd(channels: &CycleChannels) -> Result<DdCov> {
    let full = channels.full_dd();
    solve_direct_dd(&full.m, &full.n)
}

/// Steady state of the full cycle for `p`.
pub fn steady_state(p: &MachineParams) -> Result<SteadyStateResult> {
    let channels = build_cycle(p)?;
    steady_state_of(&channels)
}

pub(crate) fn steady_state_of(channels: &CycleChannels) -> Result<SteadyStateResult> {
    let v_ss = steady_state_dd(channels)?.to_f64();
    let residual = fixed_point_residual(&channels.m_hom, &channels.v_add, &v_ss);
    let n_ss = effective_occupancy(&v_ss)?;
    Ok(SteadyStateResult { v_ss, n_ss, residual, method: SolveMethod::Direct })
}

/// `n̄_SS ≈ [(Γn̄_H + γ_eff n̄_C)/(Γ + γ_eff)]·(μ⁻² + μ²/μ_opt⁴)`, valid for
/// `Q, n̄_H ≫ 1 ≫ ω_Mτ, ε`.
pub fn n_ss_approx(p: &MachineParams) -> f64 {
    let mu2 = p.mu * p.mu;
    let mu_opt4 = mu_opt_approx(p).powi(4);
    detailed_balance_occupancy(p) * (1.0 / mu2 + mu2 / mu_opt4)
}

/// `(Γn̄_H + γ_eff n̄_C)/(Γ + γ_eff)`, the occupancy set by the two baths alone.
pub fn detailed_balance_occupancy(p: &MachineParams) -> f64 {
    let g = p.osc.gamma;
    let ge = p.gamma_eff();
    if g + ge == 0.0 {
        return p.n_h;
    }
    (g * p.n_h + ge * p.n_c) / (g + ge)
}

/// `μ_opt⁴ ≈ 3(ω_ap/2πω_M)²·[1 + γ_eff n̄_C/(2Γn̄_H)]`.
pub fn mu_opt_approx(p: &MachineParams) -> f64 {
    let ratio = p.omega_ap() / (2.0 * PI * p.osc.omega_m);
    let cold = p.gamma_eff() * p.n_c / (2.0 * p.osc.gamma * p.n_h);
    let cold = if cold.is_nan() { 0.0 } else { cold };
    (3.0 * ratio * ratio * (1.0 + cold)).powf(0.25)
}

/// RWA analogue of [`n_ss_approx`]: detailed balance times `½(μ⁻² + μ²)`.
pub fn n_ss_rwa_approx(p: &MachineParams) -> f64 {
    let mu2 = p.mu * p.mu;
    detailed_balance_occupancy(p) * 0.5 * (1.0 / mu2 + mu2)
}

/// Result of minimizing `Tr v_add` over the squeezing strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub mu: f64,
    pub trace_v_add: f64,
    /// Number of strict local minima found on the bracketing grid.
    pub local_minima: usize,
}

impl MuOptimum {
    pub fn unimodal(&self) -> bool {
        self.local_minima == 1
    }
}

const MU_GRID_POINTS: usize = 241;

/// Squeezing strength minimizing the noise energy `Tr v_add` added per
/// cycle, found on a log grid over [`MU_SEARCH_RANGE`] and refined by
/// golden-section search in `ln μ`.
pub fn mu_opt_numeric(p: &MachineParams) -> Result<MuOptimum> {
    let trace_at = |ln_mu: f64| -> Result<f64> { Ok(build_cycle(&p.with_mu(ln_mu.exp()))?.v_add.trace()) };
    let (lo, hi) = (MU_SEARCH_RANGE.0.ln(), MU_SEARCH_RANGE.1.ln());
    let step = (hi - lo) / (MU_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..MU_GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let values = grid.iter().map(|&x| trace_at(x)).collect::<Result<Vec<_>>>()?;

    let mut local_minima = 0;
    for i in 1..values.len() - 1 {
        if values[i] < values[i - 1] && values[i] < values[i + 1] {
            local_minima += 1;
        }
    }
    let best = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).expect("grid is non-empty");
    if best == 0 || best == values.len() - 1 {
        return Ok(MuOptimum { mu: grid[best].exp(), trace_v_add: values[best], local_minima });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = trace_at(c)?;
    let mut fd = trace_at(d)?;
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = trace_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = trace_at(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok(MuOptimum { mu: x.exp(), trace_v_add: trace_at(x)?, local_minima })
}

/// Effective occupancy of each cycle snapshot, `[v_ss, v1, v2, v3, v4]`.
pub fn snapshot_occupancies(p: &MachineParams) -> Result<[f64; 5]> {
    let channels = build_cycle(p)?;
    let v_ss = steady_state_dd(&channels)?;
    let snaps = channels.snapshots_dd(&v_ss);
    let mut out = [0.0; 5];
    out[0] = dd_occupancy(&v_ss)?;
    for (slot, s) in out[1..].iter_mut().zip(&snaps[..4]) {
        *slot = dd_occupancy(s)?;
    }
    Ok(out)
}

fn dd_occupancy(v: &DdCov) -> Result<f64> {
    let det = to_f64(v.det());
    if !(det >= 1.0 - TOL_PHYS) {
        return Err(Error::UnphysicalState { det });
    }
    Ok(0.5 * (det.sqrt() - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathModel;
    use crate::gaussian::rotation;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zero_map_returns_added_noise() {
        let n = Covar2::new(2.0, 0.3, 5.0);
        assert_eq!(solve_direct(&Mat2::zero(), &n).unwrap(), n);
        assert_eq!(solve_iterative(&Mat2::zero(), &n, 1e-12, 10).unwrap(), n);
    }

    #[test]
    fn half_identity_geometric_series() {
        let m = Mat2::diag(0.5, 0.5);
        let v = solve_direct(&m, &Covar2::identity()).unwrap();
        assert!((v.xx - 4.0 / 3.0).abs() < 1e-15 && (v.pp - 4.0 / 3.0).abs() < 1e-15 && v.xp == 0.0);
        let it = solve_iterative(&m, &Covar2::identity(), 1e-12, 1000).unwrap();
        assert!((it - Covar2::isotropic(4.0 / 3.0)).max_abs() < 1e-11);
        let dbl = solve_doubling(&m, &Covar2::identity(), 1e-20).unwrap();
        assert!((dbl - Covar2::isotropic(4.0 / 3.0)).max_abs() < 1e-15);
    }

    #[test]
    fn pure_rotation_has_no_steady_state() {
        for solve in [
            solve_direct(&rotation(0.3), &Covar2::identity()),
            solve_iterative(&rotation(0.3), &Covar2::identity(), 1e-12, 10),
            solve_doubling(&rotation(0.3), &Covar2::identity(), 1e-12),
        ] {
            assert!(matches!(solve, Err(Error::NoUniqueSteadyState { .. })));
        }
        let mut p = MachineParams::baseline(3.0);
        p.osc.gamma = 0.0;
        assert!(matches!(steady_state(&p), Err(Error::NoUniqueSteadyState { .. })));
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let m = Mat2::diag(0.999, 0.999);
        assert!(matches!(
            solve_iterative(&m, &Covar2::identity(), 1e-12, 5),
            Err(Error::MaxItersExceeded { iterations: 5 })
        ));
    }

    #[test]
    fn slow_contraction_solvers_agree() {
        let p = MachineParams::baseline(10.0);
        let c = build_cycle(&p).unwrap();
        let direct = solve_direct(&c.m_hom, &c.v_add).unwrap();
        let dbl = solve_doubling(&c.m_hom, &c.v_add, 1e-22).unwrap();
        assert!((direct - dbl).max_abs() < 1e-9 * direct.max_abs());
        assert!(fixed_point_residual(&c.m_hom, &c.v_add, &direct) < TOL_SS);
    }

    #[test]
    fn occupancy_of_simple_states() {
        assert_eq!(effective_occupancy(&Covar2::identity()).unwrap(), 0.0);
        assert!((effective_occupancy(&Covar2::thermal(4e4)).unwrap() - 4e4).abs() < 1e-9);
        assert_eq!(effective_occupancy(&Covar2::diag(3.0, 27.0)).unwrap(), 4.0);
        assert!(matches!(effective_occupancy(&Covar2::diag(0.5, 0.5)), Err(Error::UnphysicalState { .. })));
    }

    #[test]
    fn unit_squeezing_equilibrates_with_hot_bath() {
        for model in [BathModel::IndependentOscillator, BathModel::Rwa] {
            let r = steady_state(&MachineParams::baseline(1.0).with_model(model)).unwrap();
            // f64 rounding of the hot channel is amplified by 1/(Γτ) ~ 1.6e8
            assert!(rel(r.n_ss, 4e4) < 1e-7, "{model:?}: {}", r.n_ss);
            assert!(r.residual < TOL_SS);
        }
    }

    #[test]
    fn steady_state_is_near_thermal_in_reference_regime() {
        let r = steady_state(&MachineParams::baseline(16.0)).unwrap();
        let tr = r.v_ss.trace();
        assert!((r.v_ss.xx - r.v_ss.pp).abs() / tr < 0.05);
        assert!(r.v_ss.xp.abs() / tr < 0.05);
    }

    #[test]
    fn mu_opt_closed_form() {
        let p = MachineParams::baseline(1.0);
        let want = (3.0 * (1e3 / (2.0 * PI)).powi(2)).powf(0.25);
        assert!(rel(mu_opt_approx(&p), want) < 1e-14);
        assert!((mu_opt_approx(&p) - 16.60).abs() < 0.01);
        let doubled = p.with_omega_ap(2.0 * p.omega_ap());
        assert!(rel(mu_opt_approx(&doubled), 2f64.sqrt() * want) < 1e-14);
    }

    #[test]
    fn approximate_occupancy_near_optimum() {
        let p = MachineParams::baseline(1.0);
        let mu_opt = mu_opt_approx(&p);
        assert!(rel(n_ss_approx(&p), 4e4) < 1e-4);
        let at_opt = n_ss_approx(&p.with_mu(mu_opt));
        assert!(rel(at_opt, 2.0 * 4e4 / (mu_opt * mu_opt)) < 1e-12);
        assert!((at_opt - 290.0).abs() < 1.0);
    }

    #[test]
    fn numeric_mu_opt_matches_closed_form() {
        let p = MachineParams::baseline(1.0);
        let num = mu_opt_numeric(&p).unwrap();
        assert!(num.unimodal());
        assert!(rel(num.mu, mu_opt_approx(&p)) < 0.02, "{num:?}");

        let mut hotter = p;
        hotter.n_h = 1e5;
        assert!(rel(mu_opt_numeric(&hotter).unwrap().mu, num.mu) < 1e-6);

        let cold = MachineParams::baseline_with_cold_bath(1.0);
        let num = mu_opt_numeric(&cold).unwrap();
        assert!(rel(num.mu, mu_opt_approx(&cold)) < 0.05, "{num:?} vs {}", mu_opt_approx(&cold));
    }

    #[test]
    fn rwa_approximation_symmetry() {
        let p = MachineParams::baseline_with_cold_bath(1.0).with_model(BathModel::Rwa);
        let db = (p.n_h + p.n_c) / 2.0;
        assert!(rel(n_ss_rwa_approx(&p), db) < 1e-12);
        assert!(rel(n_ss_rwa_approx(&p.with_mu(2.0)), n_ss_rwa_approx(&p.with_mu(0.5))) < 1e-14);
        for i in 0..50 {
            let mu = 10f64.powf(-1.0 + 3.0 * i as f64 / 49.0);
            assert!(n_ss_rwa_approx(&p.with_mu(mu)) >= p.n_c);
        }
    }

    #[test]
    fn cold_bath_snapshots() {
        let p = MachineParams::baseline_with_cold_bath(18.0);
        let occ = snapshot_occupancies(&p).unwrap();
        assert!(occ[0] < p.n_c && occ[0] < p.n_h);
        // squeezers preserve the determinant
        assert!(rel(occ[1], occ[0]) < 1e-9);
    }
}
