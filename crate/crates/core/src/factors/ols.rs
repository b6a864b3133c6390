//! Householder QR least squares.

/// Outcome of a QR solve.
#[derive(Debug, Clone)]
pub(crate) enum QrSolve {
    Solved(Vec<f64>),
    /// Indices of columns numerically dependent on earlier ones.
    RankDeficient(Vec<usize>),
}

/// Relative size of `|R_jj|` to the column norm below which column `j` is
/// treated as a combination of the preceding columns.
const RANK_TOL: f64 = 1e-10;

/// Minimizes `‖X b − y‖²` for a column-major `X` (`cols[j]` has `y.len()` rows).
pub(crate) fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> QrSolve {
    let m = y.len();
    let p = cols.len();
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut qty = y.to_vec();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut dependent = Vec::new();

    for k in 0..p.min(m) {
        let alpha_norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha_norm <= RANK_TOL * norms[k] || alpha_norm == 0.0 {
            dependent.push(k);
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -alpha_norm } else { alpha_norm };
        // v = x - alpha e1, stored in place; R_kk = alpha
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let dot: f64 = col.iter().zip(&v).map(|(c, w)| c * w).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, w) in col.iter_mut().zip(&v) {
                *c -= s * w;
            }
        };
        for col in a.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut qty[k..]);
    }
    if p > m {
        dependent.extend(m..p);
    }
    if !dependent.is_empty() {
        return QrSolve::RankDeficient(dependent);
    }

    // back substitution on the upper triangle
    let mut b = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = qty[i];
        for j in i + 1..p {
            s -= a[j][i] * b[j];
        }
        b[i] = s / a[i][i];
    }
    QrSolve::Solved(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let ones = vec![1.0; 5];
        let y: Vec<f64> = x1.iter().map(|x| 3.0 - 2.0 * x).collect();
        match least_squares(&[ones, x1], &y) {
            QrSolve::Solved(b) => {
                assert!((b[0] - 3.0).abs() < 1e-12);
                assert!((b[1] + 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_column_detected() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0];
        let x2: Vec<f64> = x1.iter().map(|x| 2.0 * x).collect();
        let ones = vec![1.0; 4];
        match least_squares(&[ones, x1, x2], &[1.0, 2.0, 3.0, 5.0]) {
            QrSolve::RankDeficient(cols) => assert_eq!(cols, vec![2]),
            other => panic!("{other:?}"),
        }
    }
}
