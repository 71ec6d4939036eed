//! Emden–Fowler change of variables between physical radial profiles and
//! the two logarithmic charts.
//!
//! Interior chart (any admissible α):
//!   t = −ln r,  w = r^{(N'−4)/2} u,  z = r^{(N−α)/2} v.
//! Exterior chart (α = 2 only):
//!   t = ln r,   w = r^{(N−2)/2} u,   z = r^{(N−2)/2} v.
//!
//! Derivatives follow from the chain rule with dr/dt = ∓r.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::numerics::{differentiate, hermite, sphere_area, trapezoid};

/// Where a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Shot,
    Bvp,
    Synthetic,
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Interior,
    Exterior,
}

/// Radial samples (u, u′, v, v′) with v = −r^α Δu.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub params: ProblemParams,
    pub origin: Origin,
}

impl RadialProfile {
    pub fn new(
        params: ProblemParams,
        r: Vec<f64>,
        u: Vec<f64>,
        du: Vec<f64>,
        v: Vec<f64>,
        dv: Vec<f64>,
        origin: Origin,
    ) -> Result<Self> {
        let p = Self {
            r,
            u,
            du,
            v,
            dv,
            params,
            origin,
        };
        p.validate()?;
        Ok(p)
    }

    /// Samples closed-form functions on the given radii.
    pub fn from_fn<F>(params: ProblemParams, r: Vec<f64>, f: F, origin: Origin) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 4],
    {
        let n = r.len();
        let (mut u, mut du, mut v, mut dv) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for &ri in &r {
            let [a, b, c, d] = f(ri);
            u.push(a);
            du.push(b);
            v.push(c);
            dv.push(d);
        }
        Self::new(params, r, u, du, v, dv, origin)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.r.len();
        if n < 2 {
            return Err(Error::Profile("profile needs at least 2 nodes".into()));
        }
        if [self.u.len(), self.du.len(), self.v.len(), self.dv.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::Profile("sample sequences differ in length".into()));
        }
        if self.r[0] <= 0.0 || !self.r[0].is_finite() {
            return Err(Error::Profile(format!("radius {} is not positive", self.r[0])));
        }
        if let Some(w) = self.r.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Profile(format!(
                "radii not strictly increasing at {} → {}",
                w[0], w[1]
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("validated profile is non-empty")
    }

    /// State (u, u′, v, v′) at radius `x`, by cubic Hermite interpolation
    /// of u and v and linear interpolation of the derivatives.
    pub fn state_at(&self, x: f64) -> Result<[f64; 4]> {
        let n = self.r.len();
        if x < self.r[0] || x > self.r[n - 1] {
            return Err(Error::Domain(format!(
                "radius {x} outside profile range [{}, {}]",
                self.r[0],
                self.r[n - 1]
            )));
        }
        let i = match self.r.binary_search_by(|a| a.total_cmp(&x)) {
            Ok(i) => return Ok([self.u[i], self.du[i], self.v[i], self.dv[i]]),
            Err(i) => i - 1,
        };
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let s = (x - r0) / (r1 - r0);
        Ok([
            hermite(r0, r1, self.u[i], self.u[i + 1], self.du[i], self.du[i + 1], x),
            self.du[i] + s * (self.du[i + 1] - self.du[i]),
            hermite(r0, r1, self.v[i], self.v[i + 1], self.dv[i], self.dv[i + 1], x),
            self.dv[i] + s * (self.dv[i + 1] - self.dv[i]),
        ])
    }

    /// The part of the profile on (0, R], ending exactly at R.
    pub fn truncated(&self, radius: f64) -> Result<Self> {
        let end = self.state_at(radius)?;
        let keep = self.r.partition_point(|&x| x < radius);
        let mut out = Self {
            r: self.r[..keep].to_vec(),
            u: self.u[..keep].to_vec(),
            du: self.du[..keep].to_vec(),
            v: self.v[..keep].to_vec(),
            dv: self.dv[..keep].to_vec(),
            params: self.params,
            origin: self.origin,
        };
        out.r.push(radius);
        out.u.push(end[0]);
        out.du.push(end[1]);
        out.v.push(end[2]);
        out.dv.push(end[3]);
        if out.r.len() < 2 {
            return Err(Error::Profile("truncation leaves fewer than 2 nodes".into()));
        }
        Ok(out)
    }

    /// ∫₀^R r^{k−1} f(r) dr over the profile, where the part below the first
    /// node uses the value of f there (the integrand extends continuously
    /// to the origin and vanishes there when k > 0).
    pub(crate) fn radial_integral<F>(&self, radius: f64, k: f64, f: F) -> Result<f64>
    where
        F: Fn(&[f64; 4]) -> f64,
    {
        let prof = self.truncated(radius)?;
        let vals: Vec<f64> = (0..prof.len())
            .map(|i| {
                let s = [prof.u[i], prof.du[i], prof.v[i], prof.dv[i]];
                prof.r[i].powf(k - 1.0) * f(&s)
            })
            .collect();
        let r0 = prof.r[0];
        let head = r0.powf(k) / k * f(&[prof.u[0], prof.du[0], prof.v[0], prof.dv[0]]);
        Ok(head + trapezoid(&prof.r, &vals))
    }
}

/// Emden–Fowler image of a radial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedProfile {
    pub chart: ChartKind,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
    pub params: ProblemParams,
}

impl TransformedProfile {
    pub fn new(
        params: ProblemParams,
        chart: ChartKind,
        t: Vec<f64>,
        w: Vec<f64>,
        dw: Vec<f64>,
        z: Vec<f64>,
        dz: Vec<f64>,
    ) -> Result<Self> {
        let n = t.len();
        if n < 2 || [w.len(), dw.len(), z.len(), dz.len()].iter().any(|&m| m != n) {
            return Err(Error::Profile(
                "transformed profile needs ≥ 2 nodes and equal-length samples".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Profile("t nodes not strictly increasing".into()));
        }
        check_chart(&params, chart)?;
        Ok(Self {
            chart,
            t,
            w,
            dw,
            z,
            dz,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

fn check_chart(params: &ProblemParams, chart: ChartKind) -> Result<()> {
    if chart == ChartKind::Exterior && params.alpha != 2.0 {
        return Err(Error::UnsupportedChart(format!(
            "exterior chart requires α = 2 (got α = {})",
            params.alpha
        )));
    }
    Ok(())
}

/// Similarity weights (a, b) with w = r^a u, z = r^b v, and the sign s of
/// dr/dt = s·r for the chart.
pub fn chart_exponents(params: &ProblemParams, chart: ChartKind) -> (f64, f64, f64) {
    match chart {
        ChartKind::Interior => (
            params.interior_w_exponent(),
            params.interior_z_exponent(),
            -1.0,
        ),
        ChartKind::Exterior => {
            let a = 0.5 * (params.dim() - 2.0);
            (a, a, 1.0)
        }
    }
}

/// Maps one physical state (u, u′, v, v′) at radius r into (t, w, ẇ, z, ż).
pub fn state_to_chart(
    params: &ProblemParams,
    chart: ChartKind,
    r: f64,
    s: [f64; 4],
) -> (f64, [f64; 4]) {
    let (a, b, sign) = chart_exponents(params, chart);
    let ra = r.powf(a);
    let rb = r.powf(b);
    let t = sign * r.ln();
    // dw/dt = (dr/dt)·d(r^a u)/dr = sign · r^a (a u + r u′)
    (
        t,
        [
            ra * s[0],
            sign * ra * (a * s[0] + r * s[1]),
            rb * s[2],
            sign * rb * (b * s[2] + r * s[3]),
        ],
    )
}

/// Inverse of [`state_to_chart`].
pub fn state_from_chart(
    params: &ProblemParams,
    chart: ChartKind,
    t: f64,
    x: [f64; 4],
) -> (f64, [f64; 4]) {
    let (a, b, sign) = chart_exponents(params, chart);
    let r = (sign * t).exp();
    let ra = r.powf(-a);
    let rb = r.powf(-b);
    (
        r,
        [
            ra * x[0],
            ra * (sign * x[1] - a * x[0]) / r,
            rb * x[2],
            rb * (sign * x[3] - b * x[2]) / r,
        ],
    )
}

pub fn to_transformed(profile: &RadialProfile, chart: ChartKind) -> Result<TransformedProfile> {
    profile.validate()?;
    let params = profile.params;
    check_chart(&params, chart)?;
    let n = profile.len();
    let mut rows: Vec<(f64, [f64; 4])> = (0..n)
        .map(|i| {
            state_to_chart(
                &params,
                chart,
                profile.r[i],
                [profile.u[i], profile.du[i], profile.v[i], profile.dv[i]],
            )
        })
        .collect();
    if chart == ChartKind::Interior {
        rows.reverse();
    }
    let (t, x): (Vec<f64>, Vec<[f64; 4]>) = rows.into_iter().unzip();
    Ok(TransformedProfile {
        chart,
        t,
        w: x.iter().map(|s| s[0]).collect(),
        dw: x.iter().map(|s| s[1]).collect(),
        z: x.iter().map(|s| s[2]).collect(),
        dz: x.iter().map(|s| s[3]).collect(),
        params,
    })
}

pub fn from_transformed(tp: &TransformedProfile) -> Result<RadialProfile> {
    check_chart(&tp.params, tp.chart)?;
    let mut rows: Vec<(f64, [f64; 4])> = (0..tp.len())
        .map(|i| {
            state_from_chart(
                &tp.params,
                tp.chart,
                tp.t[i],
                [tp.w[i], tp.dw[i], tp.z[i], tp.dz[i]],
            )
        })
        .collect();
    if tp.chart == ChartKind::Interior {
        rows.reverse();
    }
    let (r, s): (Vec<f64>, Vec<[f64; 4]>) = rows.into_iter().unzip();
    RadialProfile::new(
        tp.params,
        r,
        s.iter().map(|x| x[0]).collect(),
        s.iter().map(|x| x[1]).collect(),
        s.iter().map(|x| x[2]).collect(),
        s.iter().map(|x| x[3]).collect(),
        Origin::Transformed,
    )
}

/// ω_N ∫ (w″² + 2δ̃_α w′² + δ_α w²) dt on the interior chart. For w with
/// compact support in the open t-interval this equals ∫|x|^α (Δu)² dx.
pub fn quadratic_form(params: &ProblemParams, tp: &TransformedProfile) -> Result<f64> {
    if tp.chart != ChartKind::Interior {
        return Err(Error::UnsupportedChart(
            "quadratic form is defined on the interior chart".into(),
        ));
    }
    if tp.len() < 5 {
        return Err(Error::Resolution(format!(
            "quadratic form needs ≥ 5 nodes, got {}",
            tp.len()
        )));
    }
    let ga = params.gamma_alpha();
    let delta = ga * ga;
    let a = 0.5 * (params.dim() - 2.0);
    let b = 0.5 * (params.alpha - 2.0);
    let delta_tilde = a * a + b * b;
    let d2w = second_differences(&tp.t, &tp.w);
    let integrand: Vec<f64> = (0..tp.len())
        .map(|i| d2w[i] * d2w[i] + 2.0 * delta_tilde * tp.dw[i] * tp.dw[i] + delta * tp.w[i] * tp.w[i])
        .collect();
    Ok(sphere_area(params.n) * trapezoid(&tp.t, &integrand))
}

/// Second derivative by three-point centred differences, with four-point
/// one-sided stencils at the ends.
fn second_differences(t: &[f64], w: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut d2 = differentiate(t, w, 2, 3);
    let ends = differentiate(&t[..4], &w[..4], 2, 4);
    d2[0] = ends[0];
    let ends = differentiate(&t[n - 4..], &w[n - 4..], 2, 4);
    d2[n - 1] = ends[3];
    d2
}

/// Exponent q_* = (N' + τ) − q(N' − 4)/2 of the weight e^{−q_* t} in the
/// interior-chart form of the weighted L^q norm.
pub fn q_star(params: &ProblemParams, q: f64) -> f64 {
    (params.nprime() + params.tau()) - q * params.interior_w_exponent()
}

/// (ω_N ∫₀^R r^{N+l−1} |u|^q dr)^{1/q}.
pub fn weighted_norm(params: &ProblemParams, profile: &RadialProfile, q: f64, radius: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("norm exponent q = {q} must be ≥ 1")));
    }
    let k = params.dim() + params.l;
    let integral = profile.radial_integral(radius, k, |s| s[0].abs().powf(q))?;
    Ok((sphere_area(params.n) * integral).powf(1.0 / q))
}

/// The same norm evaluated on the interior chart:
/// (ω_N ∫ e^{−q_* t} |w|^q dt)^{1/q}.
pub fn weighted_norm_transformed(params: &ProblemParams, tp: &TransformedProfile, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("norm exponent q = {q} must be ≥ 1")));
    }
    if tp.chart != ChartKind::Interior {
        return Err(Error::UnsupportedChart("expected the interior chart".into()));
    }
    let qs = q_star(params, q);
    let vals: Vec<f64> = tp
        .t
        .iter()
        .zip(&tp.w)
        .map(|(t, w)| (-qs * t).exp() * w.abs().powf(q))
        .collect();
    Ok((sphere_area(params.n) * trapezoid(&tp.t, &vals)).powf(1.0 / q))
}
