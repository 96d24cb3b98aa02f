//! Spectrum of the linearized operator and the SDE coefficients.

use sharp_interface::harness::coefficients;
use sharp_interface::interface_sde::default_operator;
use sharp_interface::ReactionSpec;

fn main() -> sharp_interface::Result<()> {
    let r = ReactionSpec::cubic();
    let (profile, c) = coefficients(&r)?;
    let op = default_operator(&profile, &r)?;
    println!("lowest eigenvalues {:?}", &op.eigenvalues[..4]);
    println!("orthonormality defect {:.1e}, zero-mode alignment {:.12}", op.orthonormality_defect(), op.zero_mode_alignment());
    println!("alpha1 = {:.9}", c.alpha1);
    println!("alpha2 = {:.5} +- {:.1e} (truncated {:.5})", c.alpha2, c.alpha2_error_estimate, c.alpha2_truncated);
    println!("partial sums {:?}, G00 = {:.1e}", c.truncation_series, c.g00);
    Ok(())
}
