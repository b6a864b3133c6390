use super::config::BacktestConfig;

/// Long-only top quantile: the `⌈q·N⌉` highest predictions, ties broken
/// by asset id, equally weighted at gross exposure 1.
pub fn construct_portfolio(predictions: &[f64], asset_ids: &[String], top_fraction: f64) -> Vec<f64> {
    let n = predictions.len();
    let mut weights = vec![0.0; n];
    if n == 0 {
        return weights;
    }
    let k = ((top_fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        predictions[b]
            .total_cmp(&predictions[a])
            .then_with(|| asset_ids[a].cmp(&asset_ids[b]))
    });
    let w = 1.0 / k as f64;
    for &i in &order[..k] {
        weights[i] = w;
    }
    weights
}

/// Exposure multiplier: `min(1, vol_target / realized_vol)`, halved once
/// while the running drawdown exceeds the limit.
pub fn risk_scale(realized_vol: f64, running_drawdown: f64, vol_target: f64, drawdown_limit: f64) -> f64 {
    let mut scale = if realized_vol > 0.0 {
        (vol_target / realized_vol).min(1.0)
    } else {
        1.0
    };
    if running_drawdown > drawdown_limit {
        scale *= 0.5;
    }
    scale
}

pub fn apply_risk_constraints(weights: &[f64], realized_vol: f64, running_drawdown: f64, cfg: &BacktestConfig) -> Vec<f64> {
    let scale = risk_scale(
        realized_vol,
        running_drawdown,
        cfg.vol_target.unwrap_or(f64::INFINITY),
        cfg.drawdown_limit.unwrap_or(1.0),
    );
    weights.iter().map(|w| w * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("A{i:02}")).collect()
    }

    #[test]
    fn ties_go_to_first_ids() {
        let w = construct_portfolio(&[0.1; 10], &ids(10), 0.25);
        let third = 1.0 / 3.0;
        assert_eq!(&w[..4], &[third, third, third, 0.0]);
        let mut rev = ids(4);
        rev.reverse();
        assert_eq!(construct_portfolio(&[0.0; 4], &rev, 0.5), vec![0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn full_universe() {
        assert_eq!(construct_portfolio(&[3.0, -1.0, 2.0, 0.0], &ids(4), 1.0), vec![0.25; 4]);
    }

    #[test]
    fn top_two_of_ten() {
        let p = [0.3, -0.1, 0.9, 0.05, 0.7, 0.2, -0.4, 0.1, 0.0, 0.6];
        let w = construct_portfolio(&p, &ids(10), 0.2);
        let mut sorted: Vec<usize> = (0..10).collect();
        sorted.sort_by(|a, b| p[*b].partial_cmp(&p[*a]).unwrap());
        for (rank, &i) in sorted.iter().enumerate() {
            assert_eq!(w[i], if rank < 2 { 0.5 } else { 0.0 });
        }
    }

    #[test]
    fn risk_scaling_examples() {
        let cfg = BacktestConfig::default();
        let w = vec![0.5, 0.5, 0.0];
        assert_eq!(apply_risk_constraints(&w, 0.15, 0.0, &cfg), w);
        assert_eq!(apply_risk_constraints(&w, 0.30, 0.0, &cfg), vec![0.25, 0.25, 0.0]);
        assert_eq!(apply_risk_constraints(&w, 0.15, 0.12, &cfg), vec![0.25, 0.25, 0.0]);
        assert_eq!(apply_risk_constraints(&w, 0.30, 0.12, &cfg), vec![0.125, 0.125, 0.0]);
        assert_eq!(apply_risk_constraints(&w, 0.0, 0.0, &cfg), w);
    }

    proptest! {
        #[test]
        fn weights_are_valid(p in prop::collection::vec(-1.0f64..1.0, 1..40), q in 0.01f64..=1.0) {
            let w = construct_portfolio(&p, &ids(p.len()), q);
            prop_assert!(w.iter().all(|x| (0.0..=1.0).contains(x)));
            let total: f64 = w.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn unlimited_constraints_are_identity(
            w in prop::collection::vec(0.0f64..1.0, 1..20),
            vol in 0.0f64..5.0,
            dd in 0.0f64..=1.0,
        ) {
            let cfg = BacktestConfig { vol_target: Some(f64::INFINITY), drawdown_limit: None, ..BacktestConfig::default() };
            prop_assert_eq!(apply_risk_constraints(&w, vol, dd, &cfg), w.clone());
            let cfg = BacktestConfig { vol_target: None, drawdown_limit: Some(1.0), ..BacktestConfig::default() };
            prop_assert_eq!(apply_risk_constraints(&w, vol, dd, &cfg), w);
        }
    }
}
