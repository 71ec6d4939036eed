//! Independent reference computations used by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

/// First positive zero of j_{3/2}(x) ∝ (sin x − x cos x)/x², by bisection
/// on (π, 3π/2).
pub fn bessel_j32_first_zero() -> f64 {
    let f = |x: f64| x.sin() - x * x.cos();
    let (mut lo, mut hi) = (std::f64::consts::PI, 1.5 * std::f64::consts::PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Coefficients c₀..c₄ of det(λI − A) = λ⁴ + c₃λ³ + … + c₀ by the
/// Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &[[f64; 4]; 4]) -> [f64; 5] {
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut m = [[0.0; 4]; 4];
    for k in 1..=4 {
        let mut am = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                am[i][j] = (0..4).map(|s| a[i][s] * m[s][j]).sum();
            }
        }
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += c[4 - k + 1];
        }
        m = am;
        let mut amk = 0.0;
        for i in 0..4 {
            amk += (0..4).map(|s| a[i][s] * m[s][i]).sum::<f64>();
        }
        c[4 - k] = -amk / k as f64;
    }
    c
}

fn horner(c: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// All roots of a monic polynomial (coefficients lowest degree first) by
/// Weierstrass–Durand–Kerner iteration followed by Newton polishing.
pub fn durand_kerner(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let bound = 1.0 + c[..deg].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut change = 0.0f64;
        for i in 0..deg {
            let (p, _) = horner(c, z[i]);
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = p / den;
            z[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * bound {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = horner(c, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
    }
    z
}

/// Closed-form critical bubble for N = 5, α = l = 0, p = 9:
/// u = c(1+r²)^{−1/2}, v = −Δu, with c⁸ = 105. Returns (u, u′, v, v′).
pub fn bubble(r: f64) -> [f64; 4] {
    let c = 105f64.powf(0.125);
    let q = 1.0 + r * r;
    [
        c * q.powf(-0.5),
        -c * r * q.powf(-1.5),
        c * (5.0 + 2.0 * r * r) * q.powf(-2.5),
        -c * r * (21.0 + 6.0 * r * r) * q.powf(-3.5),
    ]
}

/// Radial Laplacian g″ + (n−1)g′/r from five-point differences.
pub fn radial_laplacian(g: &dyn Fn(f64) -> f64, n: f64, r: f64, h: f64) -> f64 {
    let (f2, f1, f0, fm1, fm2) = (g(r + 2.0 * h), g(r + h), g(r), g(r - h), g(r - 2.0 * h));
    let d1 = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
    let d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    d2 + (n - 1.0) * d1 / r
}

/// Finite-difference collocation of −Δu = v, −Δv = u^p on the unit ball in
/// R^n with u = v = 0 on the boundary (α = l = 0), on `nodes` uniform
/// nodes including r = 0 and r = 1. The fixed point u = (−Δ)⁻²(u^p) is
/// made scale-neutral by the stabilizing factor M^{p/(p−1)} and damped.
/// Returns (r, u, v, iterations).
pub fn fd_collocation(n: f64, p: f64, nodes: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, usize) {
    let m = nodes - 1;
    let h = 1.0 / m as f64;
    let r: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    // unknowns i = 0..m−1, u_m = 0
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    diag[0] = 2.0 * n / (h * h);
    sup[0] = -2.0 * n / (h * h);
    for i in 1..m {
        let rp = (r[i] + 0.5 * h).powf(n - 1.0);
        let rm = (r[i] - 0.5 * h).powf(n - 1.0);
        let ri = r[i].powf(n - 1.0);
        sub[i] = -rm / (h * h * ri);
        diag[i] = (rp + rm) / (h * h * ri);
        sup[i] = -rp / (h * h * ri);
    }
    let thomas = |rhs: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        for i in 0..m {
            let denom = diag[i] - if i > 0 { sub[i] * c[i - 1] } else { 0.0 };
            c[i] = sup[i] / denom;
            d[i] = (rhs[i] - if i > 0 { sub[i] * d[i - 1] } else { 0.0 }) / denom;
        }
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            x[i] = d[i] - if i + 1 < m { c[i] * x[i + 1] } else { 0.0 };
        }
        x
    };
    let weight: Vec<f64> = r[..m].iter().map(|x| x.powf(n - 1.0).max(h.powf(n - 1.0) / 2f64.powf(n))).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { (0..m).map(|i| weight[i] * a[i] * b[i]).sum() };
    let gamma = p / (p - 1.0);
    let theta = 0.7;
    let mut u: Vec<f64> = r[..m].iter().map(|x| 50.0 * (1.0 - x * x)).collect();
    let mut iterations = 0;
    for it in 1..=5000 {
        iterations = it;
        let f: Vec<f64> = u.iter().map(|x| x.abs().powf(p - 1.0) * x).collect();
        let v = thomas(&f);
        let z = thomas(&v);
        let mfac = dot(&u, &u) / dot(&u, &z);
        let s = mfac.powf(gamma);
        let next: Vec<f64> = u.iter().zip(&z).map(|(a, b)| (1.0 - theta) * a + theta * s * b).collect();
        let scale = next.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let diff = next.iter().zip(&u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        u = next;
        if diff < 1e-13 * scale {
            break;
        }
    }
    let f: Vec<f64> = u.iter().map(|x| x.abs().powf(p - 1.0) * x).collect();
    let mut v = thomas(&f);
    u.push(0.0);
    v.push(0.0);
    (r, u, v, iterations)
}

/// σ_k = (2+l)(p^k − 1)/(p − 1).
pub fn sigma_exact(l: &BigRational, p: &BigRational, k: usize) -> BigRational {
    let one = BigRational::from_integer(BigInt::from(1));
    let two_l = BigRational::from_integer(BigInt::from(2)) + l;
    two_l * (pow(p, k) - &one) / (p - &one)
}

/// b_k = (2+l)[p^{k+1} − (k+1)p + k]/(p − 1)².
pub fn b_exact(l: &BigRational, p: &BigRational, k: usize) -> BigRational {
    let one = BigRational::from_integer(BigInt::from(1));
    let two_l = BigRational::from_integer(BigInt::from(2)) + l;
    let kk = BigRational::from_integer(BigInt::from(k));
    let k1 = BigRational::from_integer(BigInt::from(k + 1));
    let pm1 = p - &one;
    two_l * (pow(p, k + 1) - k1 * p + kk) / (&pm1 * &pm1)
}

fn pow(x: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for _ in 0..k {
        acc *= x;
    }
    acc
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Geometric nodes from r0 to r1.
pub fn geom(r0: f64, r1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r0 * (r1 / r0).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Taylor coefficients f_k = f^{(k)}(r0)/k! of (1+r²)^a at r0, k ≤ order,
/// from the power-series recurrence for g^a.
pub fn power_series_coefficients(r0: f64, a: f64, order: usize) -> Vec<f64> {
    let g = [1.0 + r0 * r0, 2.0 * r0, 1.0];
    let mut f = vec![0.0; order + 1];
    f[0] = g[0].powf(a);
    for k in 1..=order {
        let mut s = 0.0;
        for (j, gj) in g.iter().enumerate().skip(1).take(k) {
            s += ((a + 1.0) * j as f64 - k as f64) * gj * f[k - j];
        }
        f[k] = s / (k as f64 * g[0]);
    }
    f
}

/// Radial bi-Laplacian f'''' + 2(n−1)f'''/r + (n−1)(n−3)(f''/r² − f'/r³)
/// of (1+r²)^a, from exact Taylor coefficients.
pub fn radial_bilaplacian_power(r: f64, a: f64, n: f64) -> f64 {
    let c = power_series_coefficients(r, a, 4);
    let (d1, d2, d3, d4) = (c[1], 2.0 * c[2], 6.0 * c[3], 24.0 * c[4]);
    d4 + 2.0 * (n - 1.0) * d3 / r + (n - 1.0) * (n - 3.0) * (d2 / (r * r) - d1 / (r * r * r))
}
