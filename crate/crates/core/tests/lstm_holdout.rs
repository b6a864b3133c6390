use factorbt::factors::{fit_ols, predict_linear};
use factorbt::lstm::{make_windows_ending, mse_loss, predict, train, TrainConfig};
use factorbt::marketdata::{asset_returns, compute_factors, standardize, synth_generate, SynthConfig};

#[test]
fn lstm_beats_ols_on_planted_nonlinear_signal() {
    let m = synth_generate(&SynthConfig::default(), 42).unwrap();
    let raw = compute_factors(&m.panel).unwrap();
    let returns = asset_returns(&m.panel).unwrap();
    let n = raw.n_days();
    let split = n * 8 / 10;
    let x = standardize(&raw, 0..split).unwrap();

    let window = 10;
    let ols = fit_ols(&x, &returns, 0..split - 1).unwrap();
    let cfg = TrainConfig {
        window,
        hidden_size: 8,
        epochs: 10,
        learning_rate: 3e-3,
        seed: 42,
        ..TrainConfig::default()
    };
    let mut fit = make_windows_ending(&x, &returns, window, 0..split - 1).unwrap();
    let mean = fit.iter().map(|s| s.target).sum::<f64>() / fit.len() as f64;
    let sd = (fit.iter().map(|s| (s.target - mean).powi(2)).sum::<f64>() / fit.len() as f64).sqrt();
    fit.iter_mut().for_each(|s| s.target = (s.target - mean) / sd);
    let out = train(&fit, &cfg).unwrap();
    assert!(out.loss_curve.last().unwrap() < &out.loss_curve[0]);

    let held = make_windows_ending(&x, &returns, window, split..n - 1).unwrap();
    let actual: Vec<f64> = held.iter().map(|s| s.target).collect();
    let lstm: Vec<f64> = held
        .iter()
        .map(|s| predict(&out.params, &s.inputs).unwrap() * sd + mean)
        .collect();
    let linear: Vec<f64> = held
        .iter()
        .map(|s| predict_linear(&ols, x.row(s.end_day, s.asset)).unwrap())
        .collect();
    let (l, b) = (mse_loss(&lstm, &actual).unwrap(), mse_loss(&linear, &actual).unwrap());
    assert!(l < b, "lstm {l} vs linear {b}");
}
