use longicausal::estimators::{estimate_all, EstimatorOptions, Z_95};
use longicausal::glm::HcType;
use longicausal::panel::{ClusterPanel, PanelDataset};
use longicausal::simulate::{generate_dataset, SimulationConfig};

fn options(robust_all: bool) -> EstimatorOptions {
    EstimatorOptions {
        robust_all,
        hc: HcType::HC0,
        truncation: None,
    }
}

#[test]
fn scaling_treatments_rescales_beta1() {
    let data = generate_dataset(&SimulationConfig::default(), 2).unwrap();
    let (base, _) = estimate_all(&data, &options(false)).unwrap();
    for c in [1e-3, 0.5, 4.0, 1e6] {
        let (scaled, _) =
            estimate_all(&data.scale_treatments(c).unwrap(), &options(false)).unwrap();
        for (b, s) in base.iter().zip(&scaled) {
            let expected = b.beta1_hat / c;
            assert!(
                (s.beta1_hat - expected).abs() <= 1e-8 * expected.abs(),
                "{} c={c}: {} vs {expected}",
                b.estimator,
                s.beta1_hat
            );
        }
    }
}

#[test]
fn intervals_are_estimate_plus_minus_z_se() {
    for robust in [false, true] {
        let data = generate_dataset(&SimulationConfig::default(), 3).unwrap();
        let (reports, _) = estimate_all(&data, &options(robust)).unwrap();
        for r in reports {
            assert_eq!(r.ci95.0, r.beta1_hat - Z_95 * r.se);
            assert_eq!(r.ci95.1, r.beta1_hat + Z_95 * r.se);
            assert_eq!(r.z, r.beta1_hat / r.se);
        }
    }
}

#[test]
fn unit_order_does_not_change_estimates() {
    let data = generate_dataset(&SimulationConfig::default(), 5).unwrap();
    let mut panels = data.panels().to_vec();
    panels.rotate_left(17);
    let (a, _) = estimate_all(&data, &options(true)).unwrap();
    let (b, _) = estimate_all(&PanelDataset::new(panels).unwrap(), &options(true)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.beta1_hat - y.beta1_hat).abs() <= 1e-9 * x.beta1_hat.abs());
        assert!((x.se - y.se).abs() <= 1e-7 * x.se);
    }
}

#[test]
fn one_unit_is_rejected() {
    let p = ClusterPanel::new("only", vec![1.0, 2.0, 3.0], vec![0, 1, 0], 4).unwrap();
    let data = PanelDataset::new(vec![p]).unwrap();
    assert!(estimate_all(&data, &options(false)).is_err());
}
