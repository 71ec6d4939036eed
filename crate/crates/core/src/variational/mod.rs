//! Discretization of the transformed quadratic form on a truncated t-line,
//! Rayleigh-quotient minimization and the first Navier eigenpair on balls.
//!
//! On the interior chart the Navier ball B_R becomes t ∈ (−ln R, ∞) and
//!
//!   ∫_{B_R} |x|^α (Δu)² dx = ω_N ∫ (ẅ + (α−2)ẇ − γ_α w)² dt,
//!   ∫_{B_R} |x|^l |u|^q dx = ω_N ∫ e^{−q_* t} |w|^q dt.
//!
//! For w vanishing with its derivative at both ends the first integrand
//! integrates to w″² + 2δ̃_α w′² + δ_α w².

pub mod banded;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::numerics::{differentiate, sphere_area};
use crate::transform::{q_star, ChartKind, TransformedProfile};
pub use banded::{BandCholesky, SymBanded};

/// Uniform grid t_i = t_min + i h, i = 0..n−1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::Resolution(format!("grid needs ≥ 16 nodes, got {n}")));
        }
        if !(t_max - t_min >= 10.0) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::Domain(format!(
                "window [{t_min}, {t_max}] shorter than 10"
            )));
        }
        Ok(Self { t_min, t_max, n })
    }

    /// Window length used for a ball: long enough that e^{−(N′−4)t/2}
    /// decays by e^{−10} across it.
    pub fn default_length(params: &ProblemParams) -> f64 {
        20.0f64.max(20.0 / (params.nprime() - 4.0))
    }

    /// Grid for B_R: t_min = −ln R.
    pub fn for_ball(params: &ProblemParams, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ball radius {radius} must be positive")));
        }
        let t_min = -radius.ln();
        Self::new(t_min, t_min + Self::default_length(params), n)
    }

    pub fn h(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.h()
    }
}

/// Discrete forms over the unknowns w_1..w_{n−1} (w_0 = 0 at t_min).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub q: f64,
    pub q_star: f64,
    /// K = h DᵀD with D the three-point discretization of
    /// ẅ + (α−2)ẇ − γ_α w.
    pub stiffness: SymBanded,
    /// Trapezoid weights of ∫ e^{−q_* t}|w|^q dt, with the decaying tail
    /// beyond t_max integrated analytically into the last weight.
    pub mass: Vec<f64>,
    /// Nodes t_1..t_{n−1} of the unknowns.
    pub t: Vec<f64>,
    d_lower: f64,
    d_diag: f64,
    d_upper: f64,
    d_last: f64,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// ∫ (Dw)² dt = wᵀKw.
    pub fn energy(&self, w: &[f64]) -> f64 {
        self.stiffness.quad(w)
    }

    /// Σ m_i |w_i|^q.
    pub fn weighted(&self, w: &[f64]) -> f64 {
        self.mass.iter().zip(w).map(|(m, x)| m * x.abs().powf(self.q)).sum()
    }

    /// wᵀKw / (Σ m|w|^q)^{2/q}, without the ω_N factors.
    pub fn quotient(&self, w: &[f64]) -> f64 {
        self.energy(w) / self.weighted(w).powf(2.0 / self.q)
    }

    /// Dw at the unknown nodes, i.e. −z with z = r^{(N−α)/2} v.
    pub fn apply_d(&self, w: &[f64]) -> Vec<f64> {
        let m = w.len();
        (0..m)
            .map(|k| {
                let mut s = if k + 1 == m { self.d_last } else { self.d_diag } * w[k];
                if k >= 1 {
                    s += self.d_lower * w[k - 1];
                }
                if k + 1 < m {
                    s += self.d_upper * w[k + 1];
                }
                s
            })
            .collect()
    }

    /// z solving Dᵀ(−z) = s/h, the companion of Kw = s. The matrix −Dᵀ is
    /// an M-matrix, so a positive source gives a positive z without the
    /// cancellation of forming −Dw directly.
    pub fn z_from_source(&self, s: &[f64]) -> Vec<f64> {
        let m = s.len();
        let h = self.grid.h();
        // −Dᵀ: sub-diagonal −d_upper, diagonal −d_diag, super-diagonal −d_lower
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        for i in 0..m {
            let diag = -(if i + 1 == m { self.d_last } else { self.d_diag });
            let sub = if i >= 1 { -self.d_upper } else { 0.0 };
            let denom = diag - sub * if i >= 1 { c[i - 1] } else { 0.0 };
            c[i] = -self.d_lower / denom;
            d[i] = (s[i] / h - sub * if i >= 1 { d[i - 1] } else { 0.0 }) / denom;
        }
        let mut z = vec![0.0; m];
        for i in (0..m).rev() {
            z[i] = d[i] - if i + 1 < m { c[i] * z[i + 1] } else { 0.0 };
        }
        z
    }

    /// Profile on the full grid from the unknowns, with z = −Dw and z = 0
    /// at t_min (Navier condition).
    pub fn to_profile(&self, params: &ProblemParams, w: &[f64]) -> Result<TransformedProfile> {
        let z: Vec<f64> = self.apply_d(w).into_iter().map(|x| -x).collect();
        self.to_profile_with_z(params, w, &z)
    }

    /// Same as [`Self::to_profile`] with z at the unknown nodes supplied.
    pub fn to_profile_with_z(&self, params: &ProblemParams, w: &[f64], zi: &[f64]) -> Result<TransformedProfile> {
        let mut t = Vec::with_capacity(w.len() + 1);
        t.push(self.grid.t_min);
        t.extend_from_slice(&self.t);
        let mut wf = Vec::with_capacity(w.len() + 1);
        wf.push(0.0);
        wf.extend_from_slice(w);
        let mut z = vec![0.0];
        z.extend_from_slice(zi);
        let dw = differentiate(&t, &wf, 1, 3);
        let dz = differentiate(&t, &z, 1, 3);
        TransformedProfile::new(*params, ChartKind::Interior, t, wf, dw, z, dz)
    }
}

/// Assembles K and the q-mass on `grid`.
pub fn assemble_forms(params: &ProblemParams, grid: &Grid1D, q: f64) -> Result<DiscreteOperator> {
    params.validate()?;
    let q_crit = params.p_s() + 1.0;
    if !(q >= 1.0 && q <= q_crit * (1.0 + 1e-14)) {
        return Err(Error::Domain(format!("q = {q} outside [1, p_s + 1 = {q_crit}]")));
    }
    let h = grid.h();
    let am2 = params.alpha - 2.0;
    let a = params.interior_w_exponent();
    let b = params.interior_z_exponent();
    if h * (0.5 * am2.abs()).max(a).max(b) >= 1.0 {
        return Err(Error::Resolution(format!(
            "spacing h = {h} too coarse for the decay rates ({a}, {b}) and drift {am2}"
        )));
    }
    let ga = params.gamma_alpha();
    let d_lower = 1.0 / (h * h) - am2 / (2.0 * h);
    let d_upper = 1.0 / (h * h) + am2 / (2.0 * h);
    let d_diag = -2.0 / (h * h) - ga;
    // Ghost node beyond t_max follows the decaying mode e^{−At}, which D
    // annihilates in the continuum.
    let d_last = d_diag + d_upper * (-a * h).exp();

    let m = grid.n - 1;
    let mut k = SymBanded::zeros(m);
    for row in 0..m {
        let mut cols: Vec<(usize, f64)> = Vec::with_capacity(3);
        if row >= 1 {
            cols.push((row - 1, d_lower));
        }
        cols.push((row, if row + 1 == m { d_last } else { d_diag }));
        if row + 1 < m {
            cols.push((row + 1, d_upper));
        }
        for (x, &(i, di)) in cols.iter().enumerate() {
            for &(j, dj) in &cols[x..] {
                k.add(i, j, h * di * dj);
            }
        }
    }

    let qs = q_star(params, q);
    let t: Vec<f64> = (1..grid.n).map(|i| grid.node(i)).collect();
    let mut mass: Vec<f64> = t.iter().map(|ti| h * (-qs * ti).exp()).collect();
    let t_last = t[m - 1];
    // ∫_{t_max}^∞ e^{−q_* t} e^{−qA(t − t_max)} dt, with q_* + qA = N′ + τ > 0.
    mass[m - 1] = (-qs * t_last).exp() * (0.5 * h + 1.0 / (qs + q * a));

    Ok(DiscreteOperator {
        grid: *grid,
        q,
        q_star: qs,
        stiffness: k,
        mass,
        t,
        d_lower,
        d_diag,
        d_upper,
        d_last,
    })
}

/// Minimizer of the radial Rayleigh quotient.
#[derive(Debug, Clone)]
pub struct RayleighResult {
    /// ∫|x|^α(Δu)² / (∫|x|^l|u|^q)^{2/q} at the minimizer.
    pub value: f64,
    /// Normalized to ∫|x|^l|u|^q = 1.
    pub minimizer: TransformedProfile,
    pub iterations: usize,
    pub grid: Grid1D,
    pub q: f64,
    /// Set at q = p_s + 1, where a minimizer need not exist.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_iterations: usize,
    /// Relative decrease over `window` iterations that counts as converged.
    pub rel_decrease: f64,
    pub window: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            rel_decrease: 1e-12,
            window: 10,
        }
    }
}

fn bump(op: &DiscreteOperator) -> Vec<f64> {
    let g = &op.grid;
    let len = g.t_max - g.t_min;
    op.t
        .iter()
        .map(|t| 1.0 - (2.0 * std::f64::consts::PI * (t - g.t_min) / len).cos())
        .collect()
}

fn sign_normalize(w: &mut [f64]) {
    let (_, big) = w
        .iter()
        .fold((0.0f64, 0.0f64), |(m, v), &x| if x.abs() > m { (x.abs(), x) } else { (m, v) });
    if big < 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn minimize_rayleigh(params: &ProblemParams, grid: &Grid1D, q: f64) -> Result<RayleighResult> {
    minimize_rayleigh_with(params, grid, q, &DescentOptions::default())
}

/// Sobolev-preconditioned gradient descent: the direction
/// d = w − (E/W) K⁻¹(m|w|^{q−2}w) is the gradient in the K inner product,
/// and a unit step is the nonlinear inverse iteration. Armijo backtracking
/// keeps every step a convex combination of positive vectors.
pub fn minimize_rayleigh_with(
    params: &ProblemParams,
    grid: &Grid1D,
    q: f64,
    opts: &DescentOptions,
) -> Result<RayleighResult> {
    if q < 2.0 {
        return Err(Error::Domain(format!("q = {q} must be ≥ 2")));
    }
    let op = assemble_forms(params, grid, q)?;
    let chol = op.stiffness.cholesky()?;
    let warning = (q >= (params.p_s() + 1.0) * (1.0 - 1e-14))
        .then(|| "q = p_s + 1: the quotient is scale invariant and a minimizer may not exist".to_string());

    let normalize = |w: &mut Vec<f64>| {
        let s = op.weighted(w).powf(1.0 / q);
        w.iter_mut().for_each(|x| *x /= s);
    };
    let mut w = bump(&op);
    normalize(&mut w);
    let mut value = op.energy(&w);
    let mut history = vec![value];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        let g: Vec<f64> = op
            .mass
            .iter()
            .zip(&w)
            .map(|(m, x)| m * x.abs().powf(q - 2.0) * x)
            .collect();
        let y = chol.solve(&g);
        let d: Vec<f64> = w.iter().zip(&y).map(|(wi, yi)| wi - value * yi).collect();
        let slope = 2.0 * op.energy(&d);
        let mut s = 1.0;
        let mut next: Vec<f64>;
        let mut next_value;
        loop {
            next = w.iter().zip(&d).map(|(wi, di)| wi - s * di).collect();
            next_value = op.quotient(&next);
            if next_value <= value - 1e-4 * s * slope || s < 1e-12 {
                break;
            }
            s *= 0.5;
        }
        if !(next_value <= value) {
            converged = true;
            break;
        }
        normalize(&mut next);
        w = next;
        value = op.energy(&w);
        history.push(value);
        let hn = history.len();
        if hn > opts.window {
            let old = history[hn - 1 - opts.window];
            if (old - value) <= opts.rel_decrease * value {
                converged = true;
                break;
            }
        }
    }
    let omega = sphere_area(params.n);
    let scale = omega.powf(1.0 - 2.0 / q);
    let warning = match (converged, warning) {
        (false, None) => {
            return Err(Error::Convergence {
                iterations,
                best: scale * value,
            })
        }
        (false, Some(msg)) => Some(format!(
            "{msg}; descent still decreasing after {iterations} iterations, value is an upper bound"
        )),
        (true, msg) => msg,
    };
    sign_normalize(&mut w);
    // At a critical point Kw = E m|w|^{q−2}w (with Σ m|w|^q = 1).
    let source: Vec<f64> = op
        .mass
        .iter()
        .zip(&w)
        .map(|(m, x)| value * m * x.abs().powf(q - 2.0) * x)
        .collect();
    let z = op.z_from_source(&source);
    // ω_N normalization: the physical profile has ω_N ∫ e^{−q_* t}|w|^q = 1.
    let c = omega.powf(-1.0 / q);
    let ws: Vec<f64> = w.iter().map(|x| c * x).collect();
    let zs: Vec<f64> = z.iter().map(|x| c * x).collect();
    Ok(RayleighResult {
        value: scale * value,
        minimizer: op.to_profile_with_z(params, &ws, &zs)?,
        iterations,
        grid: *grid,
        q,
        warning,
    })
}

/// First eigenpair of Δ(|x|^α Δφ) = λ|x|^l φ on B_R with Navier conditions.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Normalized to ω_N ∫ e^{−(4+τ)t} w² dt = 1 and positive maximum;
    /// z from the flux equation Dᵀ(−z) = λ m w / h.
    pub eigenfunction: TransformedProfile,
    /// Normwise backward error ‖Kx − λMx‖ / ((‖K‖ + |λ|‖M‖)‖x‖).
    pub residual: f64,
    /// ‖Kx − λMx‖ / ‖x‖.
    pub raw_residual: f64,
    /// Discrete Rayleigh quotient xᵀKx / xᵀMx of the returned vector.
    pub rayleigh_quotient: f64,
    pub iterations: usize,
    pub grid: Grid1D,
}

/// Inverse power iteration on K x = λ M₂ x with a banded Cholesky factor.
pub fn first_eigenpair(params: &ProblemParams, grid: &Grid1D) -> Result<SpectralResult> {
    let op = assemble_forms(params, grid, 2.0)?;
    let chol = op.stiffness.cholesky()?;
    let m_norm = op.mass.iter().fold(0.0f64, |a, &b| a.max(b));
    let k_norm = op.stiffness.norm_inf();
    let mnorm = |x: &[f64]| op.weighted(x).sqrt();

    let mut x = bump(&op);
    let s = mnorm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut lambda = op.energy(&x);
    let mut residual = f64::INFINITY;
    let mut raw = f64::INFINITY;
    let max_iter = 1000;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mx: Vec<f64> = op.mass.iter().zip(&x).map(|(m, v)| m * v).collect();
        let mut y = chol.solve(&mx);
        let s = mnorm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let new_lambda = op.energy(&y);
        x = y;
        let kx = op.stiffness.matvec(&x);
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rn = kx
            .iter()
            .zip(&op.mass)
            .zip(&x)
            .map(|((k, m), v)| (k - new_lambda * m * v).powi(2))
            .sum::<f64>()
            .sqrt();
        raw = rn / xn;
        residual = rn / ((k_norm + new_lambda.abs() * m_norm) * xn);
        let settled = (new_lambda - lambda).abs() <= 4.0 * f64::EPSILON * new_lambda.abs();
        lambda = new_lambda;
        if residual < 1e-13 || (settled && residual < 1e-10) {
            break;
        }
    }
    if !(residual < 1e-10) {
        return Err(Error::Convergence {
            iterations,
            best: lambda,
        });
    }
    sign_normalize(&mut x);
    let omega = sphere_area(params.n);
    let rq = op.energy(&x) / op.weighted(&x);
    let scale = omega.sqrt();
    let xs: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let source: Vec<f64> = op.mass.iter().zip(&xs).map(|(m, v)| lambda * m * v).collect();
    let z = op.z_from_source(&source);
    Ok(SpectralResult {
        lambda1: lambda,
        eigenfunction: op.to_profile_with_z(params, &xs, &z)?,
        residual,
        raw_residual: raw,
        rayleigh_quotient: rq,
        iterations,
        grid: *grid,
    })
}
