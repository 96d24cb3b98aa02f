//! Closest point on the standing-wave manifold for a perturbed wave.

use sharp_interface::fermi::{chi, dist_to_manifold, project};
use sharp_interface::{solve_standing_wave, Grid1D, ReactionSpec};

fn main() -> sharp_interface::Result<()> {
    let eps = 0.01;
    let profile = solve_standing_wave(&ReactionSpec::cubic(), &Grid1D::with_max_spacing(30.0, 5e-3)?)?;
    let grid = Grid1D::for_eps(2.0, eps)?;
    let wave = profile.rescale(&grid, eps, 0.3);
    let u = wave.zip_map(&grid_field(&grid), |m, s| m + 0.02 * s);
    let d = project(&u, &profile, eps)?;
    println!("eta = {:.5} (wave at 0.3), distance {:.3e}, H1 remainder {:.3e}", d.eta, d.distance, d.h1_of_remainder);
    println!("orthogonality residual {:.1e}", d.orthogonality);
    println!("dist_to_manifold = {:.3e}", dist_to_manifold(&u, &profile, eps));
    println!("|u - chi_eta|_L2 = {:.4}", u.sub(&chi(&grid, d.eta)).l2_norm());
    Ok(())
}

fn grid_field(grid: &Grid1D) -> sharp_interface::Field {
    sharp_interface::Field::from_fn(*grid, |x| (3.0 * x).sin() * (1.0 - x * x / 4.0))
}
