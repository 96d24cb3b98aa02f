//! Sup norms of the stochastic heat equation normalized by `eps^gamma`.

use sharp_interface::harness::{noise_audit, NoiseAuditSpec};

fn main() -> sharp_interface::Result<()> {
    let spec = NoiseAuditSpec {
        eps_list: vec![0.05, 0.02, 0.01],
        gamma: 1.0,
        half_width: 3.0,
        amplitude: 1.0,
        t_end: 1.0,
        n_paths: 100,
        seed: 9,
    };
    let rep = noise_audit(&spec)?;
    for r in &rep.rows {
        println!("eps {:<5} dx {:.4} dt {:.4}: median {:.3}, q90 {:.3}", r.eps, r.dx, r.dt, r.median, r.q90);
    }
    println!("spread of the median {:.3}, of q90 {:.3}", rep.median_spread, rep.q90_spread);
    Ok(())
}
