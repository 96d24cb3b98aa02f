//! Euler-Maruyama ensemble of the interface SDE with a bump amplitude.

use sharp_interface::interface_sde::{euler_maruyama, Amplitude, SdeCoefficients, SdeRun};
use sharp_interface::RngStream;

fn main() -> sharp_interface::Result<()> {
    let coeffs = SdeCoefficients::new(1.029884, 2.4977);
    let run = SdeRun { xi0: 0.2, t_end: 1.0, dt: 1e-3, n_paths: 2000, stride: 100, stream: RngStream::new(3, 1) };
    let paths = euler_maruyama(&coeffs, &Amplitude::Bump { amplitude: 1.0 }, &run)?;
    for k in 0..paths[0].points.len() {
        let x: Vec<f64> = paths.iter().map(|p| p.points[k].position).collect();
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        println!("t = {:.1}: mean {m:+.4}, variance {v:.4}", paths[0].points[k].t);
    }
    Ok(())
}
