//! Regenerates the bundled synthetic dataset under `data/synthetic/`.
//!
//! Run from the repository root:
//!
//! ```text
//! cargo run --release -p scengen-core --example gen_synthetic [out_dir]
//! ```
//!
//! The generator is fully seeded, so the output is byte-identical across
//! runs. One issue time (index 800) carries a planted extreme lower-tail
//! path for band-coverage experiments.

use std::path::PathBuf;

use scengen_core::synthetic::{generate_to_dir, SyntheticSpec};

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/synthetic"));
    let spec = SyntheticSpec::default();
    match generate_to_dir(&spec, &out) {
        Ok(truth) => {
            println!(
                "wrote {} variables x {} lags, {} issue times to {}",
                truth.variables.len(),
                truth.lags,
                truth.issue_times.len(),
                out.display()
            );
            if let Some(planted) = truth.planted {
                println!(
                    "planted extreme path at {} (marginal probability {})",
                    planted.issue_time, planted.lower_tail_u
                );
            }
            println!("config: {}", truth.config_path.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
