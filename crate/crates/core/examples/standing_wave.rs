//! Standing wave of the cubic and of a tabulated reaction, with the ODE
//! residual and the coefficient alpha1.

use sharp_interface::interface_sde::compute_alpha1;
use sharp_interface::{solve_standing_wave, Grid1D, ReactionSpec};

fn main() -> sharp_interface::Result<()> {
    let grid = Grid1D::with_max_spacing(12.0, 1e-3)?;
    let cubic = ReactionSpec::cubic();
    let u: Vec<f64> = (0..=500).map(|i| -2.5 + 0.01 * i as f64).collect();
    let f: Vec<f64> = u.iter().map(|&s| 2.0 * (s - s * s * s)).collect();
    let table = ReactionSpec::tabulated(u, f, 1.0)?;
    for (name, r) in [("cubic", cubic), ("2 (u - u^3) table", table)] {
        let p = solve_standing_wave(&r, &grid)?;
        println!(
            "{name:>18}: m(1) = {:.6}, |m'|^2 = {:.6}, residual {:.1e}, alpha1 = {:.6}",
            p.eval(1.0).0,
            p.grad_norm_sq,
            p.ode_residual(&r),
            compute_alpha1(&p)?
        );
    }
    Ok(())
}
