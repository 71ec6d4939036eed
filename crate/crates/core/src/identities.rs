//! Rellich–Pohozaev identity, energy functional and pointwise residuals
//! on radial profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{pohozaev_coefficient, ProblemParams};
use crate::numerics::{differentiate, sphere_area};
use crate::transform::RadialProfile;

const RESIDUAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    /// Coefficient × ω_N ∫₀^R r^{N+l−1} |u|^{p+1} dr.
    pub lhs: f64,
    /// Radial surface expression at R.
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

/// Checks
///
///   [(N′+τ)/(p+1) − (N′−4)/2] ∫_{B_R} |x|^l |u|^{p+1} dx
///     = ω_N R^{N−1} [ R^{l+1} |u|^{p+1}/(p+1)      (potential flux)
///                     + R^{1−α} v²/2                (v-energy flux)
///                     + R u′v′                      (2R u′v′ − R ∇u·∇v)
///                     + (N−α)/2 · v u′
///                     + (N′−4)/2 · u v′ ]_{r=R}
///
/// where the radial reduction uses ∇u·∇v = u′v′ and dσ_R = ω_N R^{N−1}.
pub fn pohozaev_check(params: &ProblemParams, profile: &RadialProfile, radius: f64) -> Result<PohozaevReport> {
    params.validate()?;
    let coef = pohozaev_coefficient(params)?;
    let omega = sphere_area(params.n);
    let p1 = params.p + 1.0;
    let k = params.dim() + params.l;
    let volume = profile.radial_integral(radius, k, |s| s[0].abs().powf(p1))?;
    let lhs = coef * omega * volume;

    let [u, du, v, dv] = profile.state_at(radius)?;
    let (n, alpha) = (params.dim(), params.alpha);
    let r = radius;
    let bracket = r.powf(params.l + 1.0) * u.abs().powf(p1) / p1
        + r.powf(1.0 - alpha) * v * v / 2.0
        + r * du * dv
        + 0.5 * (n - alpha) * v * du
        + params.interior_w_exponent() * u * dv;
    let rhs = omega * r.powf(n - 1.0) * bracket;
    let residual = (lhs - rhs).abs();
    Ok(PohozaevReport {
        lhs,
        rhs,
        residual,
        relative_residual: residual / lhs.abs().max(rhs.abs()).max(RESIDUAL_FLOOR),
        radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// J(u) = ½∫|x|^α(Δu)² − 1/(p+1) ∫|x|^l|u|^{p+1}.
    pub energy: f64,
    /// ∫_{B_R} |x|^α (Δu)² dx = ω_N ∫ r^{N−α−1} v² dr.
    pub kinetic: f64,
    /// ∫_{B_R} |x|^l |u|^{p+1} dx.
    pub potential: f64,
    /// kinetic − potential; zero for weak solutions.
    pub nehari_gap: f64,
}

/// Energy functional on B_R with Δu = −r^{−α} v.
pub fn energy(params: &ProblemParams, profile: &RadialProfile, radius: f64) -> Result<EnergyReport> {
    params.validate()?;
    let omega = sphere_area(params.n);
    let n = params.dim();
    let p1 = params.p + 1.0;
    let kinetic = omega * profile.radial_integral(radius, n - params.alpha, |s| s[2] * s[2])?;
    let potential = omega * profile.radial_integral(radius, n + params.l, |s| s[0].abs().powf(p1))?;
    Ok(EnergyReport {
        energy: 0.5 * kinetic - potential / p1,
        kinetic,
        potential,
        nehari_gap: kinetic - potential,
    })
}

/// Largest normalized residual of the two flux equations
///
///   (r^{N−1}u′)′ + r^{N−α−1} v = 0,   (r^{N−1}v′)′ + r^{N+l−1}|u|^{p−1}u = 0
///
/// over interior nodes, with the flux derivative from five-point stencils.
/// Each residual is divided by max(|(flux)′|, |source|), floored at 1e−6 of
/// the largest such magnitude along the profile.
pub fn pde_residual(params: &ProblemParams, profile: &RadialProfile) -> Result<f64> {
    let m = profile.len();
    if m < 5 {
        return Err(Error::Resolution(format!("pde residual needs ≥ 5 nodes, got {m}")));
    }
    let n = params.dim();
    let r = &profile.r;
    let fu: Vec<f64> = r.iter().zip(&profile.du).map(|(x, d)| x.powf(n - 1.0) * d).collect();
    let fv: Vec<f64> = r.iter().zip(&profile.dv).map(|(x, d)| x.powf(n - 1.0) * d).collect();
    let dfu = differentiate(r, &fu, 1, 5);
    let dfv = differentiate(r, &fv, 1, 5);
    let su: Vec<f64> = (0..m).map(|i| r[i].powf(n - params.alpha - 1.0) * profile.v[i]).collect();
    let sv: Vec<f64> = (0..m)
        .map(|i| {
            let u = profile.u[i];
            r[i].powf(n + params.l - 1.0) * u.abs().powf(params.p - 1.0) * u
        })
        .collect();
    let worst = |df: &[f64], s: &[f64]| {
        let interior = 2..m - 2;
        let scale = interior
            .clone()
            .map(|i| df[i].abs().max(s[i].abs()))
            .fold(0.0, f64::max);
        let floor = (1e-6 * scale).max(RESIDUAL_FLOOR);
        interior
            .map(|i| (df[i] + s[i]).abs() / df[i].abs().max(s[i].abs()).max(floor))
            .fold(0.0, f64::max)
    };
    Ok(worst(&dfu, &su).max(worst(&dfv, &sv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::Origin;

    fn bubble(r: f64) -> [f64; 4] {
        let c = 105f64.powf(0.125);
        let q = 1.0 + r * r;
        [
            c * q.powf(-0.5),
            -c * r * q.powf(-1.5),
            c * (5.0 + 2.0 * r * r) * q.powf(-2.5),
            -c * r * (21.0 + 6.0 * r * r) * q.powf(-3.5),
        ]
    }

    fn geom(r0: f64, r1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| r0 * (r1 / r0).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn zero_profile() {
        let params = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
        let prof = RadialProfile::from_fn(params, geom(1e-3, 1.0, 50), |_| [0.0; 4], Origin::Synthetic).unwrap();
        let rep = pohozaev_check(&params, &prof, 1.0).unwrap();
        assert_eq!((rep.lhs, rep.rhs, rep.residual), (0.0, 0.0, 0.0));
        let e = energy(&params, &prof, 1.0).unwrap();
        assert_eq!((e.energy, e.nehari_gap), (0.0, 0.0));
        assert_eq!(pde_residual(&params, &prof).unwrap(), 0.0);
    }

    #[test]
    fn bubble_residual_and_flux_decay() {
        let params = ProblemParams::new(5, 0.0, 0.0, 9.0).unwrap();
        let prof = RadialProfile::from_fn(params, geom(1e-2, 1e3, 2000), bubble, Origin::Synthetic).unwrap();
        assert!(pde_residual(&params, &prof).unwrap() < 1e-6);
        let r10 = pohozaev_check(&params, &prof, 10.0).unwrap();
        let r100 = pohozaev_check(&params, &prof, 100.0).unwrap();
        assert_eq!(r10.lhs, 0.0);
        assert_eq!(r100.lhs, 0.0);
        assert!(r100.rhs.abs() < r10.rhs.abs());
    }

    #[test]
    fn non_solution_has_large_residual() {
        let params = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
        let prof = RadialProfile::from_fn(
            params,
            geom(1e-2, 2.0, 400),
            |r| [2.0 + r.sin(), r.cos(), 1.0 + r * r, 2.0 * r],
            Origin::Synthetic,
        )
        .unwrap();
        assert!(pde_residual(&params, &prof).unwrap() > 0.1);
    }

    #[test]
    fn pohozaev_outside_profile_is_domain_error() {
        let params = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
        let prof = RadialProfile::from_fn(params, geom(1e-3, 1.0, 50), |_| [1.0; 4], Origin::Synthetic).unwrap();
        assert!(matches!(pohozaev_check(&params, &prof, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn critical_coefficient_kills_lhs() {
        let params = ProblemParams::new(7, 0.5, 0.25, 2.0).unwrap();
        let params = params.with_p(params.p_s()).unwrap();
        let prof = RadialProfile::from_fn(params, geom(1e-3, 1.0, 50), |r| [1.0 + r, 1.0, 2.0, 0.0], Origin::Synthetic).unwrap();
        assert_eq!(pohozaev_check(&params, &prof, 1.0).unwrap().lhs, 0.0);
    }
}
