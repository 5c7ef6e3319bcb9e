//! Stabilized weights for one simulated dataset: the two pooled treatment
//! models, per-unit weight summary, and the effect of 1/99 truncation.
//!
//! ```bash
//! cargo run -p longicausal --example stabilized_weights -- [seed] [weights.csv]
//! ```

use longicausal::iptw::{compute_stabilized_weights, Truncation};
use longicausal::simulate::{generate_dataset, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let config = SimulationConfig {
        master_seed: seed,
        ..Default::default()
    };
    let data = generate_dataset(&config, 0)?;

    let ws = compute_stabilized_weights(&data, None)?;
    let num = &ws.models.numerator;
    let den = &ws.models.denominator;
    println!(
        "numerator   A(t) ~ 1 + A(t-1):          {:.3?}, sd {:.2}",
        num.coefficients.as_slice(),
        num.residual_sd.unwrap()
    );
    println!(
        "denominator A(t) ~ 1 + A(t-1) + L(t-1): {:.3?}, sd {:.2}",
        den.coefficients.as_slice(),
        den.residual_sd.unwrap()
    );

    let mut w = ws.per_unit_weights.clone();
    w.sort_by(f64::total_cmp);
    println!(
        "{} units: mean {:.4}, min {:.3}, median {:.3}, max {:.3}",
        w.len(),
        ws.mean(),
        w[0],
        w[w.len() / 2],
        w[w.len() - 1]
    );

    let truncated = compute_stabilized_weights(&data, Some(Truncation::default()))?;
    let applied = truncated.truncation.as_ref().expect("truncation requested");
    println!(
        "after 1/99 truncation: mean {:.4}, bounds {:?}",
        truncated.mean(),
        applied
    );

    if let Some(path) = args.next() {
        ws.write_diagnostics_csv(std::path::Path::new(&path))?;
        println!("per-period factors written to {path}");
    }
    Ok(())
}
