//! Quadrature and differentiation on non-uniform grids.

/// Composite Simpson rule on arbitrary increasing abscissae.
///
/// Pairs of intervals use the exact quadratic-interpolant weights; an odd
/// interval count closes with a quadratic fitted through the last three
/// nodes. Needs at least two nodes (one interval falls back to trapezoid).
pub fn simpson(s: &[f64], f: &[f64]) -> f64 {
    assert_eq!(s.len(), f.len());
    let n = s.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (s[1] - s[0]) * (f[0] + f[1]);
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut total = 0.0;
    let mut i = 0;
    while i < paired {
        let h0 = s[i + 1] - s[i];
        let h1 = s[i + 2] - s[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if paired < intervals {
        let h0 = s[n - 2] - s[n - 3];
        let h1 = s[n - 1] - s[n - 2];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total += alpha * f[n - 1] + beta * f[n - 2] - eta * f[n - 3];
    }
    total
}

/// Derivative at every node from the Lagrange interpolant through the five
/// nearest nodes (fewer when the grid is shorter).
pub fn lagrange_derivative(s: &[f64], values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = s.len();
    assert_eq!(n, values.len());
    assert!(n >= 2, "need at least two nodes");
    let width = n.min(5);
    let dim = values[0].len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let nodes: Vec<usize> = (lo..lo + width).collect();
            let mut d = vec![0.0; dim];
            for &j in &nodes {
                let w = weight(s, &nodes, i, j);
                for (dk, vk) in d.iter_mut().zip(&values[j]) {
                    *dk += w * vk;
                }
            }
            d
        })
        .collect()
}

/// `L_j'(s_i)` for the Lagrange basis on `nodes`.
fn weight(s: &[f64], nodes: &[usize], i: usize, j: usize) -> f64 {
    if i == j {
        return nodes.iter().filter(|&&m| m != i).map(|&m| 1.0 / (s[i] - s[m])).sum();
    }
    let num: f64 = nodes.iter().filter(|&&m| m != i && m != j).map(|&m| s[i] - s[m]).product();
    let den: f64 = nodes.iter().filter(|&&m| m != j).map(|&m| s[j] - s[m]).product();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_quadratics_on_paired_intervals() {
        let s = [0.0, 0.1, 0.35, 0.5, 0.9];
        let f: Vec<f64> = s.iter().map(|x| 2.0 * x * x - x + 1.0).collect();
        let exact = 2.0 / 3.0 * 0.729 - 0.405 + 0.9;
        assert!((simpson(&s, &f) - exact).abs() < 1e-14);
    }

    #[test]
    fn simpson_odd_interval_count_is_exact_for_quadratics() {
        let s = [0.0, 0.2, 0.3, 0.7, 0.8, 1.0];
        let f: Vec<f64> = s.iter().map(|x| x * x).collect();
        assert!((simpson(&s, &f) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_converges_at_fourth_order() {
        let err = |n: usize| {
            let s: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let f: Vec<f64> = s.iter().map(|x| x.exp()).collect();
            (simpson(&s, &f) - (1f64.exp() - 1.0)).abs()
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn lagrange_derivative_is_exact_for_quartics() {
        let s: [f64; 7] = [0.0, 0.1, 0.25, 0.3, 0.5, 0.55, 0.8];
        let vals: Vec<Vec<f64>> = s.iter().map(|x| vec![x.powi(4) - x, 3.0 * x]).collect();
        let d = lagrange_derivative(&s, &vals);
        for (x, dx) in s.iter().zip(&d) {
            assert!((dx[0] - (4.0 * x.powi(3) - 1.0)).abs() < 1e-11);
            assert!((dx[1] - 3.0).abs() < 1e-11);
        }
    }
}
