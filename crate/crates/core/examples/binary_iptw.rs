//! Binary-treatment IPTW: dichotomise cumulative volume at a threshold and
//! compare the Hajek and arm-size weighted contrasts.
//!
//! ```bash
//! cargo run -p longicausal --example binary_iptw
//! ```

use longicausal::iptw::{ate_iptw_binary, IptwForm, PropensityModel};
use longicausal::simulate::{generate_dataset, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimulationConfig {
        n_units: 400,
        ..Default::default()
    };
    let data = generate_dataset(&config, 0)?;
    let cum: Vec<f64> = data.cum_treatments();
    let mut sorted = cum.clone();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[sorted.len() / 2];
    println!("threshold (median cumulative volume): {threshold:.1}");

    for form in [IptwForm::Hajek, IptwForm::ArmSize] {
        let ate = ate_iptw_binary(&data, threshold, &PropensityModel::InterceptOnly, form)?;
        println!(
            "{form:?}: ATE {:.3}  (treated {:.3} over {} units, control {:.3} over {})",
            ate.ate, ate.treated_mean, ate.n_treated, ate.control_mean, ate.n_control
        );
    }
    Ok(())
}
