//! Seismogenic-index rate factors and expected counts.
//!
//! ```bash
//! cargo run -p longicausal --example gr_baseline
//! ```

use longicausal::baselines::{gr_expected_count, gr_rate_factor, GrParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (region, sigma, b) in [("central", -0.47, 1.41), ("western", -0.63, 1.33)] {
        let p = GrParams::new(sigma, b, 3.0);
        let factor = gr_rate_factor(&p)?;
        println!("{region:<8} sigma {sigma:+.2} b {b:.2}: 10^(sigma - bM) = {factor:.3e} per unit volume");
        let p = p.with_a_tec(0.0);
        for volume in [0.0, 1e5, 1e6] {
            println!(
                "         volume {volume:>9.0}: expected M>=3 count {:.4}",
                gr_expected_count(&p, volume)?
            );
        }
    }
    Ok(())
}
