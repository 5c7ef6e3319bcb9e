mod common;

use common::mean_and_se;
use longicausal::iptw::{
    ate_from_propensities, ate_iptw_binary, compute_stabilized_weights, IptwForm, PropensityModel,
    Truncation,
};
use longicausal::panel::{ClusterPanel, PanelDataset};
use longicausal::simulate::{generate_dataset, SimulationConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};

fn simulated(replicate: u64) -> PanelDataset {
    generate_dataset(&SimulationConfig::default(), replicate).unwrap()
}

/// Pooled OLS with ML residual sd, solved from the normal equations.
fn ols(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let x = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let beta = (x.transpose() * &x)
        .lu()
        .solve(&(x.transpose() * &yv))
        .unwrap();
    let resid = &yv - &x * &beta;
    let sd = (resid.norm_squared() / y.len() as f64).sqrt();
    (beta.iter().copied().collect(), sd)
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

#[test]
fn weights_match_direct_density_ratio_product() {
    let data = simulated(4);
    let (mut num_rows, mut den_rows, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for p in &data {
        for t in 1..=p.horizon() {
            let (a_prev, l_prev) = (
                p.treatment_at(t - 1).unwrap(),
                p.confounder_at(t - 1).unwrap() as f64,
            );
            num_rows.push(vec![1.0, a_prev]);
            den_rows.push(vec![1.0, a_prev, l_prev]);
            y.push(p.treatment_at(t).unwrap());
        }
    }
    let (bn, sn) = ols(&num_rows, &y);
    let (bd, sd) = ols(&den_rows, &y);

    let ws = compute_stabilized_weights(&data, None).unwrap();
    for (i, p) in data.iter().enumerate() {
        let mut sw = 1.0;
        for t in 1..=p.horizon() {
            let (a_prev, l_prev) = (
                p.treatment_at(t - 1).unwrap(),
                p.confounder_at(t - 1).unwrap() as f64,
            );
            let a = p.treatment_at(t).unwrap();
            sw *= normal_pdf(a, bn[0] + bn[1] * a_prev, sn)
                / normal_pdf(a, bd[0] + bd[1] * a_prev + bd[2] * l_prev, sd);
        }
        let got = ws.per_unit_weights[i];
        assert!((got - sw).abs() <= 1e-8 * sw, "unit {i}: {got} vs {sw}");
    }
}

#[test]
fn weights_follow_units_under_relabelling() {
    let data = simulated(1);
    let mut panels = data.panels().to_vec();
    panels.reverse();
    let shuffled = PanelDataset::new(panels).unwrap();
    let a = compute_stabilized_weights(&data, None).unwrap();
    let b = compute_stabilized_weights(&shuffled, None).unwrap();
    let n = data.len();
    for i in 0..n {
        assert_eq!(a.unit_ids[i], b.unit_ids[n - 1 - i]);
        let (x, y) = (a.per_unit_weights[i], b.per_unit_weights[n - 1 - i]);
        assert!((x - y).abs() <= 1e-10 * x, "{x} vs {y}");
    }
}

#[test]
fn log_weights_sum_to_log_factors() {
    for r in 0..5 {
        let ws = compute_stabilized_weights(&simulated(r), None).unwrap();
        let lhs: f64 = ws.per_unit_weights.iter().map(|w| w.ln()).sum();
        let rhs: f64 = ws.per_time_factors.iter().map(|f| f.ln()).sum();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }
}

#[test]
fn constant_confounder_gives_unit_weights() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let panels = (0..20)
        .map(|i| {
            let a = (0..6).map(|_| rng.random_range(500.0..1500.0)).collect();
            ClusterPanel::new(format!("u{i}"), a, vec![0; 6], rng.random_range(0..50))
                .unwrap()
                .with_baseline(1000.0, 0)
                .unwrap()
        })
        .collect();
    let ws = compute_stabilized_weights(&PanelDataset::new(panels).unwrap(), None).unwrap();
    assert!(ws.models.confounder_dropped);
    assert!(ws.per_unit_weights.iter().all(|&w| w == 1.0));
}

#[test]
fn truncation_clips_to_percentiles() {
    let data = simulated(6);
    let raw = compute_stabilized_weights(&data, None).unwrap();
    let cut = compute_stabilized_weights(&data, Some(Truncation::default())).unwrap();
    let applied = cut.truncation.unwrap();
    assert!(applied.lower_value <= applied.upper_value);
    for (r, c) in raw.per_unit_weights.iter().zip(&cut.per_unit_weights) {
        assert_eq!(*c, r.clamp(applied.lower_value, applied.upper_value));
    }
}

#[test]
fn binary_ate_is_shift_invariant() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let n = 40;
    let ids: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let treated: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..20.0)).collect();
    let ps: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..0.9)).collect();
    let base = ate_from_propensities(&id_refs, &treated, &y, &ps, IptwForm::Hajek)
        .unwrap()
        .ate;
    for c in [-7.5, 0.25, 1e3] {
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let ate = ate_from_propensities(&id_refs, &treated, &shifted, &ps, IptwForm::Hajek)
            .unwrap()
            .ate;
        assert!((ate - base).abs() < 1e-10, "c={c}: {ate} vs {base}");
    }
}

#[test]
fn randomized_binary_treatment_recovers_effect() {
    // Treatment assigned by a fair coin, outcome mean 5 (control) vs 8 (treated).
    let mut estimates = Vec::new();
    for r in 0..200u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(1000 + r);
        let panels: Vec<ClusterPanel> = (0..120)
            .map(|i| {
                let t = rng.random_bool(0.5);
                let vol = if t { 10.0 } else { 1.0 };
                let y = Poisson::new(if t { 8.0 } else { 5.0 })
                    .unwrap()
                    .sample(&mut rng) as u64;
                ClusterPanel::new(format!("u{i}"), vec![vol; 3], vec![0; 3], y).unwrap()
            })
            .collect();
        let data = PanelDataset::new(panels).unwrap();
        let ate = ate_iptw_binary(
            &data,
            15.0,
            &PropensityModel::InterceptOnly,
            IptwForm::Hajek,
        )
        .unwrap();
        estimates.push(ate.ate);
    }
    let (mean, se) = mean_and_se(&estimates);
    assert!((mean - 3.0).abs() < 3.0 * se, "mean {mean} se {se}");
}
