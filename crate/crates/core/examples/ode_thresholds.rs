//! Time the reaction flow needs to leave the unstable zero and to settle
//! near the stable one, per `|log eps|`.

use sharp_interface::generation::{ode_threshold_times, OdeFlow};
use sharp_interface::ReactionSpec;

fn main() -> sharp_interface::Result<()> {
    let flow = OdeFlow::new(ReactionSpec::cubic());
    for eps in [1e-2, 1e-3, 1e-4, 1e-6] {
        let r = ode_threshold_times(&flow, eps, 1.0, 1.5, 0.5)?;
        println!(
            "eps {eps:.0e}: escape {:.4} (alpha/mu = 1), approach {:.4} (kappa/p = 0.75), worst {:.4}",
            r.escape_rate, r.approach_rate, r.worst_rate
        );
    }
    Ok(())
}
