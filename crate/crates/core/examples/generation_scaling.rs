//! First time a deterministic run reaches the manifold, against `eps |log eps|`.

use sharp_interface::harness::{generation_scaling, GenerationSpec};
use sharp_interface::{solve_standing_wave, Grid1D, ReactionSpec};

fn main() -> sharp_interface::Result<()> {
    let r = ReactionSpec::cubic();
    let profile = solve_standing_wave(&r, &Grid1D::with_max_spacing(30.0, 5e-3)?)?;
    let rep = generation_scaling(&GenerationSpec::default(), &r, &profile)?;
    for row in &rep.rows {
        println!("eps {:<6} t* = {:?}, t*/(eps |log eps|) = {:?}", row.eps, row.t_star, row.ratio);
    }
    if let Some(fit) = rep.fit {
        println!("C_hat {:.3}, r^2 {:.3} (uncentered {:.4})", fit.c_hat, fit.r_squared, fit.r_squared_uncentered);
    }
    Ok(())
}
