//! Parameter algebra for Δ(|x|^α Δu) = |x|^l u^p.
//!
//! Everything here is a closed-form function of the tuple (N, α, l, p):
//! admissibility, the critical exponent and the exponents that govern the
//! Emden–Fowler charts, the spectrum of the linearized transformed system,
//! and the bootstrap sequences σ_k, b_k used in the Liouville argument.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative width of the band around p = p_s inside which p is treated as
/// exactly critical. A floating-point p can only approximate p_s.
const CRITICAL_BAND_ULPS: f64 = 8.0;

/// The tuple (N, α, l, p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    pub l: f64,
    pub p: f64,
}

impl ProblemParams {
    /// Builds and validates a parameter tuple.
    pub fn new(n: u32, alpha: f64, l: f64, p: f64) -> Result<Self> {
        let params = Self { n, alpha, l, p };
        params.validate()?;
        Ok(params)
    }

    /// Same tuple with a different nonlinearity exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.n, self.alpha, self.l, p)
    }

    /// Checks N ≥ 5, 4 < N + α < 2N, l − α > −4 and p > 1, naming the
    /// first violated inequality.
    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        if !(self.alpha.is_finite() && self.l.is_finite() && self.p.is_finite()) {
            return Err(Error::InvalidParams("α, l and p must be finite".into()));
        }
        if self.n < 5 {
            return Err(Error::InvalidParams(format!("N = {} violates N ≥ 5", self.n)));
        }
        let nprime = n + self.alpha;
        if nprime <= 4.0 {
            return Err(Error::InvalidParams(format!(
                "N' = N + α = {nprime} violates N' > 4"
            )));
        }
        if nprime >= 2.0 * n {
            return Err(Error::InvalidParams(format!(
                "N' = N + α = {nprime} violates N' < 2N = {}",
                2.0 * n
            )));
        }
        let tau = self.l - self.alpha;
        if tau <= -4.0 {
            return Err(Error::InvalidParams(format!(
                "τ = l − α = {tau} violates τ > −4"
            )));
        }
        if self.p <= 1.0 {
            return Err(Error::InvalidParams(format!("p = {} violates p > 1", self.p)));
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// N' = N + α.
    pub fn nprime(&self) -> f64 {
        self.dim() + self.alpha
    }

    /// τ = l − α.
    pub fn tau(&self) -> f64 {
        self.l - self.alpha
    }

    /// p_s = (N' + 4 + 2τ)/(N' − 4).
    pub fn p_s(&self) -> f64 {
        (self.nprime() + 4.0 + 2.0 * self.tau()) / (self.nprime() - 4.0)
    }

    /// Interior similarity exponent (N' − 4)/2: w = r^{(N'−4)/2} u.
    pub fn interior_w_exponent(&self) -> f64 {
        0.5 * (self.nprime() - 4.0)
    }

    /// Interior similarity exponent (N − α)/2: z = r^{(N−α)/2} v.
    pub fn interior_z_exponent(&self) -> f64 {
        0.5 * (self.dim() - self.alpha)
    }

    /// γ_α = ((N−2)/2)² − ((α−2)/2)², the zeroth-order coefficient of the
    /// transformed system.
    pub fn gamma_alpha(&self) -> f64 {
        let a = 0.5 * (self.dim() - 2.0);
        let b = 0.5 * (self.alpha - 2.0);
        a * a - b * b
    }

    /// Interior forcing rate p_* with values within rounding of zero
    /// snapped to exactly zero.
    pub fn p_star(&self) -> f64 {
        let lead = self.nprime() + 4.0 + 2.0 * self.tau();
        let tail = (self.nprime() - 4.0) * self.p;
        let raw = lead - tail;
        let band = CRITICAL_BAND_ULPS * f64::EPSILON * (lead.abs() + tail.abs());
        if raw.abs() <= band {
            0.0
        } else {
            0.5 * raw
        }
    }

    /// Exterior forcing rate p^* = ((N + 2 + 2l) − (N − 2)p)/2.
    pub fn p_upper_star(&self) -> f64 {
        let n = self.dim();
        0.5 * ((n + 2.0 + 2.0 * self.l) - (n - 2.0) * self.p)
    }

    /// Decay exponent (4 + τ)/(p − 1) of u in the a-priori bounds and in
    /// the similarity scaling u_λ(x) = λ^{(4+τ)/(p−1)} u(λx).
    pub fn u_scaling_exponent(&self) -> f64 {
        (4.0 + self.tau()) / (self.p - 1.0)
    }

    /// Scaling exponent of v = −|x|^α Δu: (2(p+1) + τ)/(p − 1) − α.
    pub fn v_scaling_exponent(&self) -> f64 {
        (2.0 * (self.p + 1.0) + self.tau()) / (self.p - 1.0) - self.alpha
    }
}

/// Every exponent and constant derived from a [`ProblemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub nprime: f64,
    pub tau: f64,
    pub p_s: f64,
    pub p_star: f64,
    pub p_upper_star: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub gamma_alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sobolev_exp: f64,
}

pub fn derive_exponents(params: &ProblemParams) -> Result<DerivedExponents> {
    params.validate()?;
    let n = params.dim();
    let gamma_alpha = params.gamma_alpha();
    let a = 0.5 * (n - 2.0);
    let b = 0.5 * (params.alpha - 2.0);
    Ok(DerivedExponents {
        nprime: params.nprime(),
        tau: params.tau(),
        p_s: params.p_s(),
        p_star: params.p_star(),
        p_upper_star: params.p_upper_star(),
        delta: gamma_alpha * gamma_alpha,
        delta_tilde: a * a + b * b,
        gamma_alpha,
        beta: (2.0 + params.l) / (params.p - 1.0),
        gamma: 4.0 / (params.p - 1.0),
        sobolev_exp: (n + 4.0) / (n - 4.0),
    })
}

/// Position of p relative to a threshold exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl Criticality {
    fn compare(p: f64, threshold: f64) -> Self {
        let band = CRITICAL_BAND_ULPS * f64::EPSILON * threshold.abs().max(1.0);
        if (p - threshold).abs() <= band {
            Criticality::Critical
        } else if p < threshold {
            Criticality::Subcritical
        } else {
            Criticality::Supercritical
        }
    }
}

/// Which weighted embedding governs the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingRegime {
    /// α ≥ (N−4)τ/4: embedding up to q = p_s + 1, and p_s ≤ (N+4)/(N−4).
    WeightDominated,
    /// α < (N−4)τ/4: general domains only reach q = 2N/(N−4) < p_s + 1.
    SobolevCapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: EmbeddingRegime,
    /// Admissible embedding exponents [1, q_max] on general domains.
    pub q_range: (f64, f64),
    pub p_s: f64,
    pub sobolev_exp: f64,
    /// Threshold α must reach for the weight-dominated regime.
    pub alpha_threshold: f64,
    pub p_vs_p_s: Criticality,
    pub p_vs_sobolev: Criticality,
}

pub fn classify_regime(params: &ProblemParams) -> Result<RegimeReport> {
    params.validate()?;
    let n = params.dim();
    let alpha_threshold = (n - 4.0) * params.tau() / 4.0;
    let p_s = params.p_s();
    let sobolev_exp = (n + 4.0) / (n - 4.0);
    let (regime, q_max) = if params.alpha >= alpha_threshold {
        (EmbeddingRegime::WeightDominated, p_s + 1.0)
    } else {
        (EmbeddingRegime::SobolevCapped, 2.0 * n / (n - 4.0))
    };
    let p_vs_p_s = match params.p_star() {
        x if x == 0.0 => Criticality::Critical,
        x if x > 0.0 => Criticality::Subcritical,
        _ => Criticality::Supercritical,
    };
    Ok(RegimeReport {
        regime,
        q_range: (1.0, q_max),
        p_s,
        sobolev_exp,
        alpha_threshold,
        p_vs_p_s,
        p_vs_sobolev: Criticality::compare(params.p, sobolev_exp),
    })
}

/// Linearization of the interior transformed system at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationSpectrum {
    pub matrix: [[f64; 4]; 4],
    /// Ordered as −(N'−4)/2, +(N'−4)/2, −(N−α)/2, +(N−α)/2.
    pub eigenvalues: [f64; 4],
    /// Unit eigenvectors, one per eigenvalue. At α = 2 the matrix is
    /// defective and repeated eigenvalues share one eigenvector.
    pub eigenvectors: [[f64; 4]; 4],
}

impl LinearizationSpectrum {
    /// Largest |det(𝒜 − λI)| over the closed-form eigenvalues, scaled by
    /// the size of the matrix entries.
    pub fn charpoly_residual(&self) -> f64 {
        let scale = self
            .matrix
            .iter()
            .flatten()
            .fold(1.0f64, |m, x| m.max(x.abs()));
        self.eigenvalues
            .iter()
            .map(|&lam| {
                let lam_scale = scale.max(lam.abs());
                let mut shifted = self.matrix;
                for (i, row) in shifted.iter_mut().enumerate() {
                    row[i] -= lam;
                }
                det4(&shifted).abs() / lam_scale.powi(4)
            })
            .fold(0.0, f64::max)
    }

    /// Largest ‖𝒜e − λe‖ / max(1, |λ|) over the eigenpairs.
    pub fn eigen_residual(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&lam, e)| {
                let ae = mat_vec(&self.matrix, e);
                let r: f64 = ae
                    .iter()
                    .zip(e)
                    .map(|(x, y)| (x - lam * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                r / lam.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// The matrix 𝒜 of the linearized interior system in the state
/// (w, ẇ, z, ż).
pub fn linearization_matrix(params: &ProblemParams) -> [[f64; 4]; 4] {
    let c = params.gamma_alpha();
    let d = params.alpha - 2.0;
    [
        [0.0, 1.0, 0.0, 0.0],
        [c, -d, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, c, d],
    ]
}

pub fn linearization_spectrum(params: &ProblemParams) -> Result<LinearizationSpectrum> {
    params.validate()?;
    let matrix = linearization_matrix(params);
    let a = params.interior_w_exponent();
    let b = params.interior_z_exponent();
    let eigenvalues = [-a, a, -b, b];

    // The w-block [[0,1],[γ,2−α]] has roots −a and +b; the z-block
    // [[0,1],[γ,α−2]] has roots +a and −b.
    let w_block = |lam: f64| normalize([1.0, lam, 0.0, 0.0]);
    let z_block = |lam: f64| {
        // (𝒜 − λ)e = 0 with z-part (1, λ) forces e_1 (λ² − (2−α)λ − γ) = −1.
        let char_w = lam * lam - (2.0 - params.alpha) * lam - params.gamma_alpha();
        if char_w == 0.0 {
            w_block(lam)
        } else {
            let e1 = -1.0 / char_w;
            normalize([e1, lam * e1, 1.0, lam])
        }
    };
    let eigenvectors = [w_block(-a), z_block(a), z_block(-b), w_block(b)];
    Ok(LinearizationSpectrum {
        matrix,
        eigenvalues,
        eigenvectors,
    })
}

fn normalize(v: [f64; 4]) -> [f64; 4] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

fn mat_vec(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    (0..4)
        .map(|col| {
            let mut minor = [[0.0; 3]; 3];
            for (r, row) in m.iter().skip(1).enumerate() {
                let mut c = 0;
                for (j, &x) in row.iter().enumerate() {
                    if j != col {
                        minor[r][c] = x;
                        c += 1;
                    }
                }
            }
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][col] * det3(minor)
        })
        .sum()
}

/// σ_k and b_k from the bootstrap iteration, computed exactly and rounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSequence {
    pub sigma: Vec<f64>,
    pub b: Vec<f64>,
    /// First k with l + p σ_k = −1, if any k ≤ k_max has it.
    pub degenerate_index: Option<usize>,
}

/// Exact rational form of the bootstrap sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactBootstrap {
    pub sigma: Vec<BigRational>,
    pub b: Vec<BigRational>,
    pub degenerate_index: Option<usize>,
}

impl ExactBootstrap {
    /// Runs σ_{k+1} = 2 + l + pσ_k and b_{k+1} = p b_k + (2+l)(k+1) from
    /// σ_0 = b_0 = 0.
    pub fn recursion(l: &BigRational, p: &BigRational, k_max: usize) -> Self {
        let two_l = BigRational::from_integer(BigInt::from(2)) + l;
        let mut sigma = Vec::with_capacity(k_max + 1);
        let mut b = Vec::with_capacity(k_max + 1);
        sigma.push(BigRational::zero());
        b.push(BigRational::zero());
        for k in 0..k_max {
            let next_sigma = &two_l + p * &sigma[k];
            let next_b = p * &b[k] + &two_l * BigRational::from_integer(BigInt::from(k + 1));
            sigma.push(next_sigma);
            b.push(next_b);
        }
        let minus_one = -BigRational::one();
        let degenerate_index = sigma.iter().position(|s| l + p * s == minus_one);
        Self {
            sigma,
            b,
            degenerate_index,
        }
    }

    pub fn to_floats(&self) -> BootstrapSequence {
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        BootstrapSequence {
            sigma: self.sigma.iter().map(f).collect(),
            b: self.b.iter().map(f).collect(),
            degenerate_index: self.degenerate_index,
        }
    }
}

/// σ_k = (2+l)(p^k − 1)/(p − 1).
pub fn sigma_closed_form(l: &BigRational, p: &BigRational, k: usize) -> BigRational {
    let one = BigRational::one();
    let two_l = BigRational::from_integer(BigInt::from(2)) + l;
    two_l * (num_traits::pow(p.clone(), k) - &one) / (p - &one)
}

/// b_k = (2+l)[p^{k+1} − (k+1)p + k]/(p − 1)².
pub fn b_closed_form(l: &BigRational, p: &BigRational, k: usize) -> BigRational {
    let one = BigRational::one();
    let two_l = BigRational::from_integer(BigInt::from(2)) + l;
    let kk = BigRational::from_integer(BigInt::from(k));
    let k1 = BigRational::from_integer(BigInt::from(k + 1));
    let pm1 = p - &one;
    two_l * (num_traits::pow(p.clone(), k + 1) - k1 * p + kk) / (&pm1 * &pm1)
}

/// Converts a finite double to the rational number it represents exactly.
pub fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Bootstrap sequences for the given parameters. The iteration runs in
/// exact rational arithmetic on the binary values of l and p, so the
/// degenerate case l + pσ_k = −1 is detected without tolerance.
pub fn bootstrap_sequences(params: &ProblemParams, k_max: usize) -> Result<BootstrapSequence> {
    params.validate()?;
    if k_max < 1 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let l = exact_rational(params.l);
    let p = exact_rational(params.p);
    Ok(ExactBootstrap::recursion(&l, &p, k_max).to_floats())
}

/// Coefficient (N'+τ)/(p+1) − (N'−4)/2 of the volume term in the
/// Rellich–Pohozaev identity. It equals p_*/(p+1), and is exactly zero
/// at p = p_s.
pub fn pohozaev_coefficient(params: &ProblemParams) -> Result<f64> {
    params.validate()?;
    Ok(params.p_star() / (params.p + 1.0))
}

/// True when p lies within rounding of p_s.
pub fn is_critical(params: &ProblemParams) -> bool {
    params.p_star() == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn five_zero_zero_three() {
        let p = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
        let d = derive_exponents(&p).unwrap();
        assert_eq!(d.nprime, 5.0);
        assert_eq!(d.tau, 0.0);
        assert_eq!(d.p_s, 9.0);
        assert_eq!(d.p_star, 3.0);
        assert_eq!(d.delta, 1.5625);
        assert_eq!(d.delta_tilde, 3.25);
        assert_eq!(d.beta, 1.0);
        assert_eq!(d.gamma, 2.0);
        assert_eq!(d.sobolev_exp, 9.0);
    }

    #[test]
    fn alpha_two_critical_exponent() {
        let p = ProblemParams::new(5, 2.0, 0.0, 2.0).unwrap();
        let d = derive_exponents(&p).unwrap();
        assert_eq!(d.tau, -2.0);
        assert_eq!(d.nprime, 7.0);
        assert!((d.p_s - 7.0 / 3.0).abs() < 1e-15);
        // p_* and p^* coincide at α = 2
        assert!((d.p_star - d.p_upper_star).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_nprime() {
        let err = ProblemParams::new(5, -2.0, 0.0, 2.0).unwrap_err();
        assert!(matches!(&err, Error::InvalidParams(m) if m.contains("N' > 4")), "{err}");
    }

    #[test]
    fn rejects_each_inequality() {
        assert!(matches!(ProblemParams::new(4, 0.0, 0.0, 2.0), Err(Error::InvalidParams(m)) if m.contains("N ≥ 5")));
        assert!(matches!(ProblemParams::new(5, 5.0, 6.0, 2.0), Err(Error::InvalidParams(m)) if m.contains("2N")));
        assert!(matches!(ProblemParams::new(5, 1.0, -3.5, 2.0), Err(Error::InvalidParams(m)) if m.contains("τ > −4")));
        assert!(matches!(ProblemParams::new(5, 0.0, 0.0, 0.5), Err(Error::InvalidParams(m)) if m.contains("p > 1")));
    }

    #[test]
    fn regimes() {
        let r = classify_regime(&ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap()).unwrap();
        assert_eq!(r.regime, EmbeddingRegime::WeightDominated);
        assert_eq!(r.q_range, (1.0, 10.0));
        assert_eq!(r.p_s, 9.0);
        assert_eq!(r.p_vs_p_s, Criticality::Subcritical);

        let r = classify_regime(&ProblemParams::new(5, 0.0, 1.0, 3.0).unwrap()).unwrap();
        assert_eq!(r.regime, EmbeddingRegime::SobolevCapped);
        assert_eq!(r.p_s, 11.0);
        assert_eq!(r.q_range, (1.0, 10.0));

        let r = classify_regime(&ProblemParams::new(6, 1.0, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(r.regime, EmbeddingRegime::WeightDominated);
    }

    #[test]
    fn boundary_alpha_is_weight_dominated() {
        // N = 8: threshold α = τ; α = 2, l = 4 gives τ = 2 = α
        let r = classify_regime(&ProblemParams::new(8, 2.0, 4.0, 2.0).unwrap()).unwrap();
        assert_eq!(r.alpha_threshold, 2.0);
        assert_eq!(r.regime, EmbeddingRegime::WeightDominated);
    }

    #[test]
    fn spectrum_examples() {
        let s = linearization_spectrum(&ProblemParams::new(5, 0.0, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, [-0.5, 0.5, -2.5, 2.5]);
        assert!(s.eigen_residual() < 1e-12);
        assert!(s.charpoly_residual() < 1e-12);

        let s = linearization_spectrum(&ProblemParams::new(6, 2.0, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, [-2.0, 2.0, -2.0, 2.0]);
        assert!(s.eigen_residual() < 1e-12);
    }

    #[test]
    fn bootstrap_small() {
        let p = ProblemParams::new(5, 0.0, 0.0, 2.0).unwrap();
        let s = bootstrap_sequences(&p, 3).unwrap();
        assert_eq!(s.sigma, vec![0.0, 2.0, 6.0, 14.0]);
        assert_eq!(s.b, vec![0.0, 2.0, 8.0, 22.0]);
        assert_eq!(s.degenerate_index, None);
    }

    #[test]
    fn bootstrap_degenerate() {
        let p = ProblemParams::new(5, 0.0, -1.0, 2.0).unwrap();
        let s = bootstrap_sequences(&p, 5).unwrap();
        assert_eq!(s.degenerate_index, Some(0));
    }

    #[test]
    fn bootstrap_closed_forms_exact() {
        for (l, p) in [(rat(0, 1), rat(2, 1)), (rat(1, 3), rat(4, 3)), (rat(-3, 2), rat(7, 5))] {
            let rec = ExactBootstrap::recursion(&l, &p, 30);
            for k in 0..=30 {
                assert_eq!(rec.sigma[k], sigma_closed_form(&l, &p, k));
                assert_eq!(rec.b[k], b_closed_form(&l, &p, k));
            }
        }
    }

    #[test]
    fn pohozaev_coefficient_values() {
        let p = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
        assert!((pohozaev_coefficient(&p).unwrap() - 0.75).abs() < 1e-15);
        let crit = ProblemParams::new(5, 0.0, 0.0, 9.0).unwrap();
        assert_eq!(pohozaev_coefficient(&crit).unwrap(), 0.0);
    }

    #[test]
    fn exact_rational_is_exact() {
        assert_eq!(exact_rational(0.5), rat(1, 2));
        assert_eq!(exact_rational(-3.0), rat(-3, 1));
    }
}
