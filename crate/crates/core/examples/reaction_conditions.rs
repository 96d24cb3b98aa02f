//! Structural conditions of a reaction and the shifted reactions that
//! dominate it from above and below.

use sharp_interface::{ReactionSpec, ShiftSign};

fn main() -> sharp_interface::Result<()> {
    let r = ReactionSpec::cubic();
    for c in &r.validate_conditions().checks {
        println!("{:<24} {:<5} {}", c.name, c.passed, c.detail);
    }
    let c = r.constants()?;
    println!("p = {}, mu = {}, c_f = {}", c.p, c.mu, c.c_f);
    for sign in [ShiftSign::Minus, ShiftSign::Plus] {
        let s = r.shifted(0.05, sign)?;
        let (lo, hi) = s.domination_margin(&r, 0.05, sign, 2001);
        println!("{sign:?}: zeros {:?}, margin in [{lo:.4}, {hi:.4}]", s.zeros);
    }
    Ok(())
}
