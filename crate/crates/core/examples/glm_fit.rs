//! Poisson, logistic and linear GLM fits with model-based and sandwich SEs.
//!
//! ```bash
//! cargo run -p longicausal --example glm_fit
//! ```

use longicausal::glm::{fit_glm, fit_glm_with, wald_test, Family, GlmOptions, HcType};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Poisson};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let n = 400;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { x[i] });

    // Poisson with overdispersion from a gamma-like multiplicative shock.
    let counts: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let shock: f64 = Normal::new(0.0, 0.4).unwrap().sample(&mut rng);
            Poisson::new((0.5 + 0.8 * xi + shock).exp())
                .unwrap()
                .sample(&mut rng)
        })
        .collect();
    let options = GlmOptions {
        robust: Some(HcType::HC0),
        ..Default::default()
    };
    let fit = fit_glm_with(&design, &counts, Family::Poisson, None, &options)?;
    let robust = fit.robust_se(1).expect("robust covariance requested");
    println!(
        "poisson: beta = [{:.4}, {:.4}], model SE {:.4}, HC0 SE {:.4}, {} iterations",
        fit.coefficients[0],
        fit.coefficients[1],
        fit.model_se(1),
        robust,
        fit.iterations
    );
    let w = wald_test(fit.coefficients[1], robust)?;
    println!("         Wald z {:.2}, p {:.2e}", w.z, w.p);

    let binary: Vec<f64> = x
        .iter()
        .map(|&xi| f64::from(rng.random_bool(1.0 / (1.0 + (-(2.0 * xi)).exp()))))
        .collect();
    let fit = fit_glm(&design, &binary, Family::Logistic, None)?;
    println!(
        "logistic: slope {:.4} (SE {:.4}), converged {}",
        fit.coefficients[1],
        fit.model_se(1),
        fit.converged
    );

    let noise = Normal::new(0.0, 0.3)?;
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| 1.0 - 2.0 * xi + noise.sample(&mut rng))
        .collect();
    let fit = fit_glm(&design, &y, Family::Linear, None)?;
    println!(
        "linear:   beta = [{:.4}, {:.4}], residual sd {:.4}",
        fit.coefficients[0],
        fit.coefficients[1],
        fit.residual_sd.unwrap_or(f64::NAN)
    );
    Ok(())
}
