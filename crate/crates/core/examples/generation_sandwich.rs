//! Barrier `h`, its five conditions and the super/sub solutions around a
//! deterministic run.

use sharp_interface::generation::{build_barrier, super_sub_solutions, verify_barrier, BarrierParams, OdeFlow};
use sharp_interface::harness::data_c0;
use sharp_interface::spde::initial::{general_initial, GeneralParams};
use sharp_interface::spde::{simulate, SimConfig};
use sharp_interface::{Grid1D, ReactionSpec};

fn main() -> sharp_interface::Result<()> {
    let eps = 0.01;
    let grid = Grid1D::for_eps(4.0, eps)?;
    let u0 = general_initial(&grid, eps, &GeneralParams::default())?;
    let c0 = data_c0(&u0);
    let params = BarrierParams { c1: 0.25, ..BarrierParams::new(eps, c0, 1.0) };
    let h = build_barrier(&params, &grid)?;
    let report = verify_barrier(&h, &u0, params.c1, eps, 20)?;
    for c in &report.checks {
        println!("{:<17} {:<5} {:+.3e} at x = {:.3}, t = {:.2e}", c.name, c.passed, c.value, c.at_x, c.at_t);
    }
    let r = ReactionSpec::cubic_with_c0(c0);
    let flow = OdeFlow::new(r.clone());
    let mut cfg = SimConfig::deterministic(eps, r, grid, report.t_max);
    cfg.record_times = (1..=5).map(|k| report.t_max * k as f64 / 5.0).collect();
    let traj = simulate(&cfg, &u0)?;
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        let (lo, hi) = super_sub_solutions(&flow, &h, &u0, eps, *t)?;
        let below = lo.sub(u).values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let above = u.sub(&hi).values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("t = {t:.4}: max(w- - u) = {below:+.2e}, max(u - w+) = {above:+.2e}");
    }
    Ok(())
}
