//! Reads a panel in the CSV schema (or builds one from the synthetic corpus), runs the three
//! estimators and prints relative risks per million barrels with Wald tests.
//!
//! ```bash
//! cargo run -p longicausal --example analyze_panel -- [panel.csv outcomes.csv]
//! ```

use std::path::Path;

use longicausal::estimators::{estimate_all, EstimatorOptions};
use longicausal::geo::{run_pipeline, synthetic::synthetic_corpus, PipelineConfig};
use longicausal::glm::HcType;
use longicausal::panel::read_panel_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let data = match args.as_slice() {
        [panel, outcomes] => read_panel_csv(Path::new(panel), Path::new(outcomes))?,
        _ => {
            let corpus = synthetic_corpus(11);
            run_pipeline(&corpus.wells, &corpus.catalog, &PipelineConfig::default())?.dataset
        }
    };
    println!("{} units, {} periods", data.len(), data.horizon());

    let options = EstimatorOptions {
        robust_all: true,
        hc: HcType::HC1,
        truncation: None,
    };
    let (reports, _) = estimate_all(&data, &options)?;
    println!(
        "{:<9} {:>12} {:>12} {:>8} {:>10} {:>5}",
        "model", "beta1", "SE", "z", "p", "SE"
    );
    for r in &reports {
        println!(
            "{:<9} {:>12.4e} {:>12.4e} {:>8.2} {:>10.3e} {:>5}   RR/MMbbl {:.4} [{:.4}, {:.4}]",
            r.estimator.as_str(),
            r.beta1_hat,
            r.se,
            r.z,
            r.p,
            r.se_kind.to_string(),
            r.relative_risk_per_mmbbl,
            (r.ci95.0 * 1e6).exp(),
            (r.ci95.1 * 1e6).exp()
        );
    }
    Ok(())
}
