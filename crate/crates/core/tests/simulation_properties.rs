mod common;

use longicausal::estimators::EstimatorKind;
use longicausal::simulate::{run_monte_carlo, SimulationConfig};

#[test]
fn naive_bias_grows_with_confounding() {
    let biases: Vec<f64> = [0.0, 0.05, 0.1]
        .iter()
        .map(|&confounding| {
            let config = SimulationConfig {
                confounding,
                replicates: 500,
                master_seed: 31,
                ..Default::default()
            };
            let s = run_monte_carlo(&config).unwrap();
            (s.get(EstimatorKind::Naive).avg_point_estimate - config.causal_effect).abs()
        })
        .collect();
    println!("|naive bias| at confounding 0, 0.05, 0.1: {biases:?}");
    assert!(
        biases[0] <= biases[1] && biases[1] <= biases[2],
        "{biases:?}"
    );
}

#[test]
fn msm_is_centred_on_the_truth_at_defaults() {
    let config = SimulationConfig::default();
    let s = run_monte_carlo(&config).unwrap();
    let msm = s.get(EstimatorKind::Msm);
    let gap = (msm.avg_point_estimate - config.causal_effect).abs();
    println!(
        "MSM average {:.4e}, |gap| {:.2e}, 3 MC SE {:.2e}",
        msm.avg_point_estimate,
        gap,
        3.0 * msm.mc_standard_error()
    );
    assert!(gap < 3.0 * msm.mc_standard_error());
}
