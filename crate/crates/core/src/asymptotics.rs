//! Decay-rate fits on transformed profiles, a-priori bound quantities and
//! monotonicity diagnostics on radial profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::numerics::{differentiate, linear_fit};
use crate::transform::{RadialProfile, TransformedProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailComponent {
    W,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsFit {
    /// −slope of ln(component) against t.
    pub rate: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    /// Coefficient of determination of the log-linear fit.
    pub fit_quality: f64,
    pub samples: usize,
}

/// Last 40% of the t-range.
pub fn default_window(tp: &TransformedProfile) -> (f64, f64) {
    let t0 = tp.t[0];
    let t1 = tp.t[tp.len() - 1];
    (t0 + 0.6 * (t1 - t0), t1)
}

/// Fits component ≈ amplitude · e^{−rate·t} on the window.
pub fn fit_tail(tp: &TransformedProfile, component: TailComponent, window: (f64, f64)) -> Result<AsymptoticsFit> {
    let (lo, hi) = window;
    let t_first = tp.t[0];
    let t_last = tp.t[tp.len() - 1];
    if !(lo < hi) || lo < t_first || hi > t_last {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] not inside the profile range [{t_first}, {t_last}]"
        )));
    }
    let ys = match component {
        TailComponent::W => &tp.w,
        TailComponent::Z => &tp.z,
    };
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for (ti, yi) in tp.t.iter().zip(ys) {
        if *ti >= lo && *ti <= hi {
            if !(*yi > 0.0) {
                return Err(Error::Domain(format!("non-positive sample {yi} at t = {ti}")));
            }
            t.push(*ti);
            y.push(yi.ln());
        }
    }
    if t.len() < 2 {
        return Err(Error::Resolution(format!("{} nodes in the fit window", t.len())));
    }
    let (intercept, slope, r2) = linear_fit(&t, &y);
    Ok(AsymptoticsFit {
        rate: -slope,
        amplitude: intercept.exp(),
        window,
        fit_quality: r2,
        samples: t.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound_name: String,
    /// Supremum over nodes of the bound-normalized quantity.
    pub sup_constant: f64,
    /// Radius where the supremum is attained.
    pub location: f64,
    /// Supremum finite and not attained at the innermost node.
    pub satisfied: bool,
}

/// Suprema of the scale-invariant quantities
///   u r^{(4+τ)/(p−1)},  |u′| r^{(p+τ+3)/(p−1)},
///   v r^{(2(p+1)+τ)/(p−1)−α},  |v′| r^{(2(p+1)+τ)/(p−1)−α+1}.
pub fn check_bounds(params: &ProblemParams, profile: &RadialProfile) -> Vec<BoundCheck> {
    let ku = params.u_scaling_exponent();
    let kv = params.v_scaling_exponent();
    let specs: [(&str, &[f64], f64); 4] = [
        ("u", &profile.u, ku),
        ("du", &profile.du, ku + 1.0),
        ("v", &profile.v, kv),
        ("dv", &profile.dv, kv + 1.0),
    ];
    specs
        .iter()
        .map(|(name, data, k)| {
            let mut best = (0.0f64, 0usize);
            for (i, (r, x)) in profile.r.iter().zip(data.iter()).enumerate() {
                let q = x.abs() * r.powf(*k);
                if q > best.0 || q.is_nan() || (i == 0 && q.is_infinite()) {
                    best = (q, i);
                    if !q.is_finite() {
                        break;
                    }
                }
            }
            BoundCheck {
                bound_name: name.to_string(),
                sup_constant: best.0,
                location: profile.r[best.1],
                satisfied: best.0.is_finite() && (best.1 != 0 || best.0 == 0.0),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimumAt {
    pub value: f64,
    pub location: f64,
    /// value > 0 beyond rounding of the underlying quantity.
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// min of d/dr [r^{(N−2)/2} u].
    pub scaled_u_derivative: MinimumAt,
    /// min of d/dr [r^{(N−2)/2} v].
    pub scaled_v_derivative: MinimumAt,
    /// min of r u′ + (N−2) u.
    pub u_combination: MinimumAt,
    /// min of r v′ + (N−2) v.
    pub v_combination: MinimumAt,
}

fn minimum(r: &[f64], values: &[f64], scale: f64) -> MinimumAt {
    let (i, v) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    MinimumAt {
        value: v,
        location: r[i],
        strict: v > 1e-10 * scale,
    }
}

pub fn monotonicity_report(params: &ProblemParams, profile: &RadialProfile) -> Result<MonotonicityReport> {
    if profile.len() < 3 {
        return Err(Error::Resolution("monotonicity needs ≥ 3 nodes".into()));
    }
    let n = params.dim();
    let a = 0.5 * (n - 2.0);
    let r = &profile.r;
    let scaled = |x: &[f64]| -> Vec<f64> { r.iter().zip(x).map(|(ri, xi)| ri.powf(a) * xi).collect() };
    let su = scaled(&profile.u);
    let sv = scaled(&profile.v);
    let dsu = differentiate(r, &su, 1, 3);
    let dsv = differentiate(r, &sv, 1, 3);
    let cu: Vec<f64> = (0..profile.len()).map(|i| r[i] * profile.du[i] + (n - 2.0) * profile.u[i]).collect();
    let cv: Vec<f64> = (0..profile.len()).map(|i| r[i] * profile.dv[i] + (n - 2.0) * profile.v[i]).collect();
    let mag = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rmax = profile.r_max();
    Ok(MonotonicityReport {
        scaled_u_derivative: minimum(r, &dsu, mag(&su) / rmax),
        scaled_v_derivative: minimum(r, &dsv, mag(&sv) / rmax),
        u_combination: minimum(r, &cu, mag(&profile.u)),
        v_combination: minimum(r, &cv, mag(&profile.v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{ChartKind, Origin};

    fn params() -> ProblemParams {
        ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap()
    }

    fn geom(r0: f64, r1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| r0 * (r1 / r0).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn exact_exponential_tail() {
        let t: Vec<f64> = (0..101).map(|i| 0.1 * i as f64).collect();
        let w: Vec<f64> = t.iter().map(|t| 3.0 * (-0.5 * t).exp()).collect();
        let n = t.len();
        let tp = TransformedProfile::new(params(), ChartKind::Interior, t, w, vec![0.0; n], vec![1.0; n], vec![0.0; n]).unwrap();
        let fit = fit_tail(&tp, TailComponent::W, default_window(&tp)).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-12);
        assert!((fit.amplitude - 3.0).abs() < 1e-12);
        assert!((fit.fit_quality - 1.0).abs() < 1e-12);
        let z = fit_tail(&tp, TailComponent::Z, (0.0, 10.0)).unwrap();
        assert!(z.rate.abs() < 1e-14);
        assert!(fit_tail(&tp, TailComponent::W, (-1.0, 5.0)).is_err());
    }

    #[test]
    fn non_positive_window_rejected() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let tp = TransformedProfile::new(params(), ChartKind::Interior, t, vec![-1.0; 10], vec![0.0; 10], vec![1.0; 10], vec![0.0; 10]).unwrap();
        assert!(matches!(fit_tail(&tp, TailComponent::W, (0.0, 9.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn singular_profile_violates_bound() {
        let prof = RadialProfile::from_fn(params(), geom(1e-3, 1.0, 100), |r| [r.powi(-10), -10.0 * r.powi(-11), 1.0, 0.0], Origin::Synthetic).unwrap();
        let checks = check_bounds(&params(), &prof);
        assert_eq!(checks[0].bound_name, "u");
        assert!(!checks[0].satisfied);
        assert_eq!(checks[0].location, 1e-3);
    }

    #[test]
    fn constant_profile_bounds_are_finite() {
        let prof = RadialProfile::from_fn(params(), geom(1e-3, 1.0, 100), |_| [1.0, 0.0, 1.0, 0.0], Origin::Synthetic).unwrap();
        let checks = check_bounds(&params(), &prof);
        assert_eq!(checks.len(), 4);
        assert!(checks.iter().all(|c| c.sup_constant.is_finite() && c.satisfied));
    }

    #[test]
    fn bubble_bounds_stable_under_window_growth() {
        let p9 = ProblemParams::new(5, 0.0, 0.0, 9.0).unwrap();
        let c = 105f64.powf(0.125);
        let f = |r: f64| {
            let q = 1.0 + r * r;
            [
                c * q.powf(-0.5),
                -c * r * q.powf(-1.5),
                c * (5.0 + 2.0 * r * r) * q.powf(-2.5),
                -c * r * (21.0 + 6.0 * r * r) * q.powf(-3.5),
            ]
        };
        let a = check_bounds(&p9, &RadialProfile::from_fn(p9, geom(1e-3, 100.0, 4000), f, Origin::Synthetic).unwrap());
        let b = check_bounds(&p9, &RadialProfile::from_fn(p9, geom(1e-3, 200.0, 4000), f, Origin::Synthetic).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.satisfied && y.satisfied);
            assert!((x.sup_constant - y.sup_constant).abs() < 0.01 * x.sup_constant);
        }
        let mono = monotonicity_report(&p9, &RadialProfile::from_fn(p9, geom(1e-3, 100.0, 400), f, Origin::Synthetic).unwrap()).unwrap();
        assert!(mono.u_combination.value > 0.0 && mono.u_combination.strict);
    }

    #[test]
    fn critical_decay_is_non_strict() {
        let prof = RadialProfile::from_fn(params(), geom(1e-2, 10.0, 300), |r| [r.powf(-1.5), -1.5 * r.powf(-2.5), 1.0, 0.0], Origin::Synthetic).unwrap();
        let rep = monotonicity_report(&params(), &prof).unwrap();
        assert!(rep.scaled_u_derivative.value.abs() < 1e-10);
        assert!(!rep.scaled_u_derivative.strict);
    }
}
