use crate::error::{Error, Result};

use super::dd::Dd;
use super::params::{Gate, Gradients, LstmParams};

/// Hidden and cell vectors between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> LstmState {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Per-step activations recorded by [`forward`]; all buffers step-major.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    stamp: u64,
    hidden: usize,
    input: usize,
    steps: usize,
    xs: Vec<f64>,
    /// `h_0 .. h_T`, so `steps + 1` rows.
    hs: Vec<f64>,
    cs: Vec<f64>,
    gi: Vec<f64>,
    gf: Vec<f64>,
    go: Vec<f64>,
    gg: Vec<f64>,
    tanh_c: Vec<f64>,
    prediction: f64,
}

impl Tape {
    pub fn prediction(&self) -> f64 {
        self.prediction
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn final_state(&self) -> LstmState {
        let h = self.hidden;
        let t = self.steps;
        LstmState {
            h: self.hs[t * h..(t + 1) * h].to_vec(),
            c: self.cs[t * h..(t + 1) * h].to_vec(),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `out[r] += Σ_k m[r·cols + k] · v[k]`
fn mat_vec_add(m: &[f64], v: &[f64], out: &mut [f64]) {
    let cols = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Runs the recurrence from a zero state over `sequence` (row-major,
/// `input_size` columns) and returns the scalar prediction with its tape.
pub fn forward(params: &LstmParams, sequence: &[f64]) -> Result<(f64, Tape)> {
    let mut tape = Tape::default();
    forward_into(params, sequence, &mut tape)?;
    Ok((tape.prediction, tape))
}

/// Like [`forward`] but reuses the buffers of an existing tape.
pub fn forward_into(params: &LstmParams, sequence: &[f64], tape: &mut Tape) -> Result<f64> {
    let n = params.input_size();
    let h = params.hidden_size();
    if sequence.is_empty() || sequence.len() % n != 0 {
        return Err(Error::DimensionMismatch(format!(
            "sequence of {} values does not split into rows of {n}",
            sequence.len()
        )));
    }
    if sequence.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let steps = sequence.len() / n;

    tape.stamp = params.stamp();
    tape.hidden = h;
    tape.input = n;
    tape.steps = steps;
    tape.xs.clear();
    tape.xs.extend_from_slice(sequence);
    for buf in [&mut tape.hs, &mut tape.cs] {
        buf.clear();
        buf.resize((steps + 1) * h, 0.0);
    }
    for buf in [&mut tape.gi, &mut tape.gf, &mut tape.go, &mut tape.gg, &mut tape.tanh_c] {
        buf.clear();
        buf.resize(steps * h, 0.0);
    }

    let mut z = vec![0.0; 4 * h];
    for t in 0..steps {
        let x = &sequence[t * n..(t + 1) * n];
        let h_prev = &tape.hs[t * h..(t + 1) * h];
        for g in Gate::ALL {
            let zg = &mut z[g as usize * h..(g as usize + 1) * h];
            zg.copy_from_slice(params.b(g));
            mat_vec_add(params.w(g), x, zg);
            mat_vec_add(params.u(g), h_prev, zg);
        }
        let row = t * h..(t + 1) * h;
        for k in 0..h {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[h + k]);
            let o = sigmoid(z[2 * h + k]);
            let g = z[3 * h + k].tanh();
            let c = f * tape.cs[t * h + k] + i * g;
            let tc = c.tanh();
            tape.gi[row.start + k] = i;
            tape.gf[row.start + k] = f;
            tape.go[row.start + k] = o;
            tape.gg[row.start + k] = g;
            tape.tanh_c[row.start + k] = tc;
            tape.cs[(t + 1) * h + k] = c;
            tape.hs[(t + 1) * h + k] = o * tc;
        }
    }
    let h_last = &tape.hs[steps * h..];
    let pred = params.b_out() + params.w_out().iter().zip(h_last).map(|(a, b)| a * b).sum::<f64>();
    tape.prediction = pred;
    Ok(pred)
}

/// Gradient of `(ŷ − target)² + l2·Σw²` for one sample.
pub fn backward(params: &LstmParams, tape: &Tape, target: f64, l2: f64) -> Result<Gradients> {
    let mut grads = Gradients::zeros(params.layout());
    accumulate(params, tape, 2.0 * (tape.prediction - target), &mut grads)?;
    grads.add_weight_penalty(params, l2);
    Ok(grads)
}

/// Adds the data-term gradient for output sensitivity `d_pred = ∂L/∂ŷ`.
pub(crate) fn accumulate(params: &LstmParams, tape: &Tape, d_pred: f64, grads: &mut Gradients) -> Result<()> {
    if tape.stamp != params.stamp() || tape.hidden != params.hidden_size() || tape.input != params.input_size() {
        return Err(Error::StaleTape);
    }
    let layout = params.layout();
    let (h, n, steps) = (tape.hidden, tape.input, tape.steps);
    let g = grads.as_mut_slice();

    let h_last = &tape.hs[steps * h..];
    for (k, r) in layout.w_out().enumerate() {
        g[r] += d_pred * h_last[k];
    }
    g[layout.b_out()] += d_pred;

    let mut dh: Vec<f64> = params.w_out().iter().map(|w| d_pred * w).collect();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for t in (0..steps).rev() {
        let row = t * h;
        for k in 0..h {
            let (i, f, o, gg, tc) = (
                tape.gi[row + k],
                tape.gf[row + k],
                tape.go[row + k],
                tape.gg[row + k],
                tape.tanh_c[row + k],
            );
            let c_prev = tape.cs[row + k];
            let d_o = dh[k] * tc;
            dc[k] += dh[k] * o * (1.0 - tc * tc);
            dz[k] = dc[k] * gg * i * (1.0 - i);
            dz[h + k] = dc[k] * c_prev * f * (1.0 - f);
            dz[2 * h + k] = d_o * o * (1.0 - o);
            dz[3 * h + k] = dc[k] * i * (1.0 - gg * gg);
            dc[k] *= f;
        }
        let x = &tape.xs[t * n..(t + 1) * n];
        let h_prev = &tape.hs[row..row + h];
        dh.iter_mut().for_each(|v| *v = 0.0);
        for gate in Gate::ALL {
            let dzg = &dz[gate as usize * h..(gate as usize + 1) * h];
            let w = layout.w(gate);
            let u = layout.u(gate);
            let b = layout.b(gate);
            let uw = params.u(gate);
            for (r, &d) in dzg.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let wrow = &mut g[w.start + r * n..w.start + (r + 1) * n];
                wrow.iter_mut().zip(x).for_each(|(a, xv)| *a += d * xv);
                let urow = &mut g[u.start + r * h..u.start + (r + 1) * h];
                urow.iter_mut().zip(h_prev).for_each(|(a, hv)| *a += d * hv);
                g[b.start + r] += d;
                let uparam = &uw[r * h..(r + 1) * h];
                dh.iter_mut().zip(uparam).for_each(|(a, uv)| *a += d * uv);
            }
        }
    }
    Ok(())
}

/// `(1/T)·Σ (actual − predicted)²`
pub fn mse_loss(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    if predictions.len() != actuals.len() {
        return Err(Error::LengthMismatch {
            expected: actuals.len(),
            actual: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = predictions.iter().zip(actuals).map(|(p, a)| (a - p) * (a - p)).sum();
    Ok(sum / predictions.len() as f64)
}

/// Forward pass and penalized loss in double-double precision, with
/// parameter `index` shifted by `delta` exactly.
fn dd_loss(params: &LstmParams, sequence: &[f64], target: f64, l2: f64, index: usize, delta: f64) -> Dd {
    let layout = params.layout();
    let (h, n) = (params.hidden_size(), params.input_size());
    let theta: Vec<Dd> = params
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == index { Dd::from(v) + Dd::from(delta) } else { Dd::from(v) })
        .collect();
    let mut hs = vec![Dd::ZERO; h];
    let mut cs = vec![Dd::ZERO; h];
    let mut z = vec![Dd::ZERO; 4 * h];
    for x in sequence.chunks(n) {
        for g in Gate::ALL {
            let (w, u, b) = (layout.w(g), layout.u(g), layout.b(g));
            for r in 0..h {
                let mut acc = theta[b.start + r];
                for (k, &xv) in x.iter().enumerate() {
                    acc = acc + theta[w.start + r * n + k] * Dd::from(xv);
                }
                for (k, hv) in hs.iter().enumerate() {
                    acc = acc + theta[u.start + r * h + k] * *hv;
                }
                z[g as usize * h + r] = acc;
            }
        }
        for k in 0..h {
            let i = z[k].sigmoid();
            let f = z[h + k].sigmoid();
            let o = z[2 * h + k].sigmoid();
            let g = z[3 * h + k].tanh();
            cs[k] = f * cs[k] + i * g;
            hs[k] = o * cs[k].tanh();
        }
    }
    let mut pred = theta[layout.b_out()];
    for (k, r) in layout.w_out().enumerate() {
        pred = pred + theta[r] * hs[k];
    }
    let resid = pred - Dd::from(target);
    let mut loss = resid * resid;
    for (i, t) in theta.iter().enumerate() {
        if layout.is_weight(i) {
            loss = loss + Dd::from(l2) * *t * *t;
        }
    }
    loss
}

/// Largest relative disagreement between [`backward`] and the central
/// difference `(f(θ+eps) − f(θ−eps))/(2·eps)` over every parameter, using
/// `|a−b|/max(|a|,|b|,1e-8)`. Invalid inputs yield NaN.
///
/// The two loss evaluations run in double-double precision so the
/// reference is limited by the step size rather than by cancellation.
pub fn grad_check(params: &LstmParams, sequence: &[f64], target: f64, eps: f64, l2: f64) -> f64 {
    let analytic = match forward(params, sequence).and_then(|(_, tape)| backward(params, &tape, target, l2)) {
        Ok(g) => g,
        Err(_) => return f64::NAN,
    };
    if !(eps > 0.0) {
        return f64::NAN;
    }
    let mut worst = 0.0f64;
    for (i, &a) in analytic.as_slice().iter().enumerate() {
        let up = dd_loss(params, sequence, target, l2, i, eps);
        let down = dd_loss(params, sequence, target, l2, i, -eps);
        let numeric = ((up - down) / Dd::from(2.0 * eps)).to_f64();
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if rel.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(rel);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Parameters at their training initialisation, N(0,1) inputs and target.
    fn seeded_instance(seed: u64) -> (LstmParams, Vec<f64>, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let p = LstmParams::init(4, 3, seed).unwrap();
        let seq: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
        (p, seq, rng.sample(StandardNormal))
    }

    fn random_instance(seed: u64) -> (LstmParams, Vec<f64>, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = LstmParams::init(4, 3, seed).unwrap();
        p.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-0.8..0.8));
        let seq: Vec<f64> = (0..15).map(|_| rng.random_range(-1.5..1.5)).collect();
        (p, seq, rng.random_range(-1.0..1.0))
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..64 {
            let (p, seq, y) = seeded_instance(seed);
            let l2 = if seed % 2 == 0 { 0.0 } else { 1e-3 };
            let err = grad_check(&p, &seq, y, 1e-5, l2);
            assert!(err < 1e-5, "seed {seed}: {err}");
        }
    }

    #[test]
    fn zero_network_predicts_zero() {
        let p = LstmParams::zeros(3, 2).unwrap();
        let (y, tape) = forward(&p, &[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(y, 0.0);
        assert!(tape.final_state().h.iter().all(|v| *v == 0.0));
        let g = backward(&p, &tape, 0.0, 1e-3).unwrap();
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
        assert_eq!(grad_check(&p, &[1.0, -2.0, 3.0, 0.5], 0.0, 1e-5, 0.0), 0.0);
    }

    #[test]
    fn bias_passthrough() {
        let mut p = LstmParams::zeros(1, 1).unwrap();
        let bo = p.layout().b_out();
        p.as_mut_slice()[bo] = 0.5;
        assert_eq!(forward(&p, &[3.0]).unwrap().0, 0.5);
    }

    #[test]
    fn scalar_step_matches_hand_formula() {
        // order: wi wf wo wg, ui uf uo ug, bi bf bo bg, w_out, b_out
        let v = [0.3, -0.2, 0.5, 0.7, 0.1, 0.4, -0.3, 0.2, 0.05, 1.0, -0.1, 0.2, 1.5, -0.25];
        let p = LstmParams::from_vec(1, 1, v.to_vec()).unwrap();
        let x = 0.8;
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let i = s(0.3 * x + 0.05);
        let g = (0.7 * x + 0.2).tanh();
        let o = s(0.5 * x - 0.1);
        let c = i * g;
        let expected = 1.5 * o * c.tanh() - 0.25;
        let got = forward(&p, &[x]).unwrap().0;
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let p = LstmParams::zeros(2, 3).unwrap();
        assert!(matches!(forward(&p, &[1.0, 2.0]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(forward(&p, &[]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(forward(&p, &[1.0, f64::NAN, 0.0]), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn stale_tape_is_rejected() {
        let (mut p, seq, y) = random_instance(1);
        let (_, tape) = forward(&p, &seq).unwrap();
        p.as_mut_slice()[0] += 0.1;
        assert!(matches!(backward(&p, &tape, y, 0.0), Err(Error::StaleTape)));
        let other = LstmParams::from_vec(4, 3, p.as_slice().to_vec()).unwrap();
        let (_, tape) = forward(&p, &seq).unwrap();
        assert!(matches!(backward(&other, &tape, y, 0.0), Err(Error::StaleTape)));
    }

    #[test]
    fn readout_bias_gradient_is_linear_in_residual() {
        let (p, seq, _) = random_instance(2);
        let (pred, tape) = forward(&p, &seq).unwrap();
        let g1 = backward(&p, &tape, pred - 0.3, 1e-4).unwrap().b_out();
        let g2 = backward(&p, &tape, pred - 0.6, 1e-4).unwrap().b_out();
        assert!((g2 - 2.0 * g1).abs() < 1e-10);
    }

    #[test]
    fn larger_step_has_larger_error() {
        let (p, seq, y) = random_instance(3);
        let coarse = grad_check(&p, &seq, y, 1e-2, 0.0);
        let fine = grad_check(&p, &seq, y, 1e-5, 0.0);
        assert!(fine < 1e-5, "{fine}");
        assert!(coarse > fine, "{coarse} vs {fine}");
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(mse_loss(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(mse_loss(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        // pairwise summation of squared errors, reversed order
        let mut sq: Vec<f64> = p.iter().zip(&a).rev().map(|(x, y)| (y - x).powi(2)).collect();
        while sq.len() > 1 {
            sq = sq.chunks(2).map(|c| c.iter().sum()).collect();
        }
        let oracle = sq[0] / 100.0;
        let got = mse_loss(&p, &a).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hidden_state_is_bounded(seed in any::<u64>(), scale in 0.1f64..50.0) {
            let (mut p, seq, _) = random_instance(seed);
            p.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
            let (_, tape) = forward(&p, &seq).unwrap();
            for t in 0..=tape.steps() {
                let h = &tape.hs[t * 4..(t + 1) * 4];
                prop_assert!(h.iter().all(|v| v.abs() <= 1.0));
                prop_assert!(tape.cs[t * 4..(t + 1) * 4].iter().all(|v| v.is_finite()));
            }
        }
    }
}
