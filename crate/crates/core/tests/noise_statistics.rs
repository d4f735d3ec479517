use nvcoh::noise::{autocorrelation, sample_ou_path};
use nvcoh::units::micro_tesla;
use nvcoh::OuParams;

fn bath() -> OuParams {
    OuParams::new(micro_tesla(6.0), 0.170).unwrap()
}

#[test]
fn long_path_matches_stationary_statistics() {
    let p = bath();
    let dt = p.tau_c / 50.0;
    let path = sample_ou_path(&p, dt, 10_000_000, 17).unwrap();
    let acf = autocorrelation(&path, 100).unwrap();
    let var = p.sigma * p.sigma;

    let (_, c0) = acf[0];
    assert!((c0 / var - 1.0).abs() < 0.01, "variance {}", c0 / var);
    let (lag, c50) = acf[50];
    assert!((lag - p.tau_c).abs() < 1e-12);
    let target = var / std::f64::consts::E;
    assert!((c50 / target - 1.0).abs() < 0.03, "ACF(tau_c) {}", c50 / target);

    // least-squares slope of ln C over lags up to 2τ_c
    let pts: Vec<(f64, f64)> = acf.iter().map(|&(t, c)| (t, c.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope * p.tau_c + 1.0).abs() < 0.05, "slope {}", slope * p.tau_c);

    let mean = path.samples.iter().sum::<f64>() / path.len() as f64;
    // mean of a correlated path: 4σ bound with n·dt/(2τ_c) effective samples
    let n_eff = path.len() as f64 * dt / (2.0 * p.tau_c);
    assert!(mean.abs() < 4.0 * p.sigma / n_eff.sqrt(), "mean {mean}");
}

#[test]
fn white_noise_limit_has_no_memory() {
    let p = OuParams::new(1.0, 1e-6).unwrap();
    let path = sample_ou_path(&p, 1.0, 200_000, 3).unwrap();
    let acf = autocorrelation(&path, 5).unwrap();
    let bound = 4.0 / (path.len() as f64).sqrt();
    for &(_, c) in &acf[1..] {
        assert!(c.abs() < bound, "{c}");
    }
}

#[test]
fn silent_path_has_zero_autocorrelation() {
    let path = sample_ou_path(&OuParams::silent(), 1e-3, 100, 0).unwrap();
    assert!(autocorrelation(&path, 10).unwrap().iter().all(|&(_, c)| c == 0.0));
    assert!(autocorrelation(&path, 100).is_err());
}
