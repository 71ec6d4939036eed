//! Small numerical kernels shared by the modules: quadrature, finite
//! difference weights and the sphere area.

use std::f64::consts::PI;

/// Composite trapezoid rule on arbitrary (sorted) nodes.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Γ(n/2) for a positive integer n.
pub fn gamma_half_integer(n: u32) -> f64 {
    assert!(n > 0);
    let (mut g, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area ω_N = 2π^{N/2}/Γ(N/2) of the unit sphere S^{N−1}.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// Finite-difference weights for the derivatives of order 0..=m at `x0`
/// from the stencil `xs` (Fornberg's recursion). Returns `w[k][j]`, the
/// weight of node j in the k-th derivative.
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index window of `width` consecutive nodes centred on `i` and clamped to
/// `0..n`.
pub fn stencil_window(i: usize, n: usize, width: usize) -> std::ops::Range<usize> {
    let half = width / 2;
    let start = i.saturating_sub(half).min(n.saturating_sub(width));
    start..(start + width).min(n)
}

/// Derivative of order `order` of sampled data at every node, using
/// `width`-point Fornberg stencils (centred in the interior, one-sided at
/// the ends).
pub fn differentiate(x: &[f64], y: &[f64], order: usize, width: usize) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let win = stencil_window(i, n, width);
            let w = fd_weights(x[i], &x[win.clone()], order);
            w[order].iter().zip(&y[win]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Cubic Hermite interpolation on [x0, x1].
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// expm1(x·t)/x, continuous through x = 0 where it equals t.
pub fn expm1_over(x: f64, t: f64) -> f64 {
    if x == 0.0 {
        t
    } else {
        (x * t).exp_m1() / x
    }
}

/// Least-squares line y = a + b x. Returns (intercept, slope, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (intercept, slope, r2)
}
