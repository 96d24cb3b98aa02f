//! Runs an experiment from a JSON config and lists its artifacts.

use sharp_interface::harness::{run_experiment, ExperimentConfig};

fn main() -> sharp_interface::Result<()> {
    let text = std::env::args()
        .nth(1)
        .map(std::fs::read_to_string)
        .transpose()?
        .unwrap_or_else(|| r#"{ "id": "sandwich", "kind": "sandwich-check", "eps": [0.04, 0.01] }"#.into());
    let mut cfg = ExperimentConfig::from_json(&text)?;
    cfg.out_dir = std::env::temp_dir().join("sharp-interface");
    let s = run_experiment(&cfg)?;
    for c in &s.criteria {
        println!("{} {}: {:.3e}", if c.passed { "pass" } else { "fail" }, c.name, c.value);
    }
    for e in std::fs::read_dir(cfg.out_dir.join(&cfg.id))? {
        println!("{}", e?.path().display());
    }
    Ok(())
}
