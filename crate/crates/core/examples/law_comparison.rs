//! Interface increments of the SPDE against the SDE on a common rescaled
//! lattice, at a coarse `eps` so that it runs in seconds.

use sharp_interface::harness::{
    coefficients, compare_path_laws, increments, sde_lattice_paths, spde_interface_paths, InterfaceEnsembleSpec,
};
use sharp_interface::path::PathRecord;
use sharp_interface::{ReactionSpec, RngStream};

fn main() -> sharp_interface::Result<()> {
    let r = ReactionSpec::cubic();
    let (profile, coeffs) = coefficients(&r)?;
    let spec = InterfaceEnsembleSpec {
        eps: 0.1,
        gamma: 1.0,
        half_width: 3.0,
        amplitude: 1.0,
        xi0: 0.0,
        t_rescaled: 0.5,
        n_slices: 5,
        n_paths: 100,
        seed: 4,
        dt_factor: 0.1,
    };
    let run = spde_interface_paths(&spec, &profile, &r)?;
    let spde: Vec<PathRecord> = run.completed.iter().map(|p| p.record.clone()).collect();
    let sde = sde_lattice_paths(&coeffs, &spec, 50, RngStream::new(spec.seed, 1))?;
    let stats = compare_path_laws(&increments(&spde), &increments(&sde))?;
    for s in &stats.slices {
        println!(
            "t = {:.2}: var {:.4} vs {:.4}, KS p = {}",
            s.t,
            s.var_a,
            s.var_b,
            s.ks_p_value.map_or("-".into(), |p| format!("{p:.3}"))
        );
    }
    println!("failed paths: {}", run.failures.len());
    Ok(())
}
