//! Radial system
//!
//!   −(r^{N−1} u′)′ = r^{N−α−1} v,   −(r^{N−1} v′)′ = r^{N+l−1} |u|^{p−1} u,
//!
//! integrated in the physical variable r or in an Emden–Fowler chart, with
//! trajectory classification, Navier-ball shooting and Liouville sweeps.

pub mod dopri;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::numerics::expm1_over;
use crate::transform::{state_from_chart, state_to_chart, ChartKind, Origin, RadialProfile};
use dopri::{solve, Run, State};
pub use dopri::{StopPolicy, Tolerances};

/// Coordinate system of an ODE state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeChart {
    /// x = r, state (u, u′, v, v′).
    Physical,
    /// x = t = −ln r, state (w, ẇ, z, ż).
    Interior,
    /// x = t = ln r (α = 2), state (w, ẇ, z, ż).
    Exterior,
}

impl From<ChartKind> for OdeChart {
    fn from(c: ChartKind) -> Self {
        match c {
            ChartKind::Interior => OdeChart::Interior,
            ChartKind::Exterior => OdeChart::Exterior,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    /// r in the physical chart, t in a transformed chart.
    pub x: f64,
    pub y: [f64; 4],
}

/// Right-hand side with all parameter-dependent constants precomputed.
#[derive(Debug, Clone, Copy)]
struct Field {
    chart: OdeChart,
    nm1: f64,
    alpha: f64,
    l: f64,
    p: f64,
    lin: f64,
    am2: f64,
    rate: f64,
}

impl Field {
    fn new(params: &ProblemParams, chart: OdeChart) -> Result<Self> {
        if chart == OdeChart::Exterior && params.alpha != 2.0 {
            return Err(Error::UnsupportedChart(format!(
                "exterior chart requires α = 2 (got α = {})",
                params.alpha
            )));
        }
        let (lin, rate) = match chart {
            OdeChart::Physical => (0.0, 0.0),
            OdeChart::Interior => (params.gamma_alpha(), -params.p_star()),
            OdeChart::Exterior => {
                let a = 0.5 * (params.dim() - 2.0);
                (a * a, params.p_upper_star())
            }
        };
        Ok(Self {
            chart,
            nm1: params.dim() - 1.0,
            alpha: params.alpha,
            l: params.l,
            p: params.p,
            lin,
            am2: params.alpha - 2.0,
            rate,
        })
    }

    #[inline]
    fn power(&self, u: f64) -> f64 {
        u.abs().powf(self.p - 1.0) * u
    }

    #[inline]
    fn eval(&self, x: f64, y: &State) -> State {
        match self.chart {
            OdeChart::Physical => {
                let inv = self.nm1 / x;
                [
                    y[1],
                    -inv * y[1] - x.powf(-self.alpha) * y[2],
                    y[3],
                    -inv * y[3] - x.powf(self.l) * self.power(y[0]),
                ]
            }
            OdeChart::Interior => [
                y[1],
                self.lin * y[0] - self.am2 * y[1] - y[2],
                y[3],
                self.lin * y[2] + self.am2 * y[3] - (self.rate * x).exp() * self.power(y[0]),
            ],
            OdeChart::Exterior => [
                y[1],
                self.lin * y[0] - y[2],
                y[3],
                self.lin * y[2] - (self.rate * x).exp() * self.power(y[0]),
            ],
        }
    }
}

/// Derivative of the state. In the physical chart this is
/// (u′, −((N−1)/r)u′ − r^{−α}v, v′, −((N−1)/r)v′ − r^l|u|^{p−1}u); in the
/// interior chart
///   ẅ = γ_α w − (α−2)ẇ − z,   z̈ = γ_α z + (α−2)ż − e^{−p_* t}|w|^{p−1}w,
/// and in the exterior chart (α = 2, a = (N−2)/2)
///   ẅ = a²w − z,   z̈ = a²z − e^{p^* t}|w|^{p−1}w.
pub fn rhs(params: &ProblemParams, state: &OdeState, chart: OdeChart) -> Result<[f64; 4]> {
    if chart == OdeChart::Physical && !(state.x > 0.0) {
        return Err(Error::Domain(format!("radius r = {} must be positive", state.x)));
    }
    Ok(Field::new(params, chart)?.eval(state.x, &state.y))
}

/// Two-term expansion at a small radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStart {
    pub state: OdeState,
    /// Set when r0 is too large for the expansion to be trusted.
    pub warning: bool,
}

/// Regular expansion about r = 0 with u(0) = a, v(0) = b (α < 2):
///   u ≈ a − b r^{2−α}/((2−α)(N−α)),   v ≈ b − a^p r^{2+l}/((2+l)(N+l)).
/// The neglected terms are O(r^{4+τ}) relative to the retained ones.
pub fn series_start(params: &ProblemParams, a: f64, b: f64, r0: f64) -> Result<SeriesStart> {
    let (n, alpha, l, p) = (params.dim(), params.alpha, params.l, params.p);
    if alpha >= 2.0 {
        return Err(Error::Unsupported(format!(
            "series start needs α < 2 (got α = {alpha}); start from the interior chart instead"
        )));
    }
    if l <= -2.0 {
        return Err(Error::Unsupported(format!(
            "series start needs l > −2 for a finite v(0) (got l = {l})"
        )));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!("start radius r0 = {r0} must be positive")));
    }
    if a < 0.0 {
        return Err(Error::Domain(format!("u(0) = {a} must be non-negative")));
    }
    let s = 2.0 - alpha;
    let ap = a.powf(p);
    let u = a - b * r0.powf(s) / (s * (n - alpha));
    let du = -b * r0.powf(1.0 - alpha) / (n - alpha);
    let v = b - ap * r0.powf(2.0 + l) / ((2.0 + l) * (n + l));
    let dv = -ap * r0.powf(1.0 + l) / (n + l);
    let warning = b != 0.0 && r0.powf(s) > 0.01 * s * (n - alpha) * a / b.abs();
    Ok(SeriesStart {
        state: OdeState {
            x: r0,
            y: [u, du, v, dv],
        },
        warning,
    })
}

/// Radius below which both leading corrections of the expansion are small.
fn natural_scale(params: &ProblemParams, a: f64, b: f64) -> f64 {
    let (n, alpha, l, p) = (params.dim(), params.alpha, params.l, params.p);
    let mut scale: f64 = 1.0;
    if alpha < 2.0 && b != 0.0 {
        let s = 2.0 - alpha;
        let c = (s * (n - alpha) * a / b.abs()).powf(1.0 / s);
        if c > 0.0 {
            scale = scale.min(c);
        }
    }
    if a > 0.0 {
        let c = ((2.0 + l) * (n + l) * b.abs() / a.powf(p)).powf(1.0 / (2.0 + l));
        if c > 0.0 {
            scale = scale.min(c);
        }
    }
    scale
}

/// Default start radius for center data (a, b): small enough that the
/// truncation error O(r0^{4+τ}) is below 1e−14 and that the interior-chart
/// window reaches t ≈ 11.5 on the unit scale.
pub fn auto_start_radius(params: &ProblemParams, a: f64, b: f64) -> f64 {
    let tau = params.tau();
    let base = if params.alpha < 2.0 {
        1e-5f64.min(1e-14f64.powf(1.0 / (4.0 + tau)))
    } else {
        1e-6
    };
    base * natural_scale(params, a, b)
}

/// Interior-chart seed on the decaying modes of the linearization at large
/// t = −ln r0 (any α, used for α ≥ 2):
///   w ≈ e^{−At}(a + b (e^{(α−2)t} − 1)/((α−2)(N−α))),   z ≈ b e^{−Bt},
/// with A = (N′−4)/2, B = (N−α)/2. At α = 2 the bracket becomes a + b t/(N−2).
pub fn stable_seed(params: &ProblemParams, a: f64, b: f64, r0: f64) -> Result<OdeState> {
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("start radius r0 = {r0} must be positive")));
    }
    let t = -r0.ln();
    let big_a = params.interior_w_exponent();
    let big_b = params.interior_z_exponent();
    let x = params.alpha - 2.0;
    let nma = params.dim() - params.alpha;
    let ea = (-big_a * t).exp();
    let em = expm1_over(x, t);
    let w = ea * (a + b * em / nma);
    let dw = ea * (-big_a * a + b * ((x * t).exp() - big_a * em) / nma);
    let eb = (-big_b * t).exp();
    Ok(OdeState {
        x: t,
        y: [w, dw, b * eb, -big_b * b * eb],
    })
}

/// Starting chart and state for center data (a, b).
pub fn center_start(params: &ProblemParams, a: f64, b: f64) -> Result<(OdeChart, OdeState)> {
    if params.l <= -2.0 {
        return Err(Error::Unsupported(format!(
            "center data need l > −2 for a finite v(0) (got l = {})",
            params.l
        )));
    }
    let r0 = auto_start_radius(params, a, b);
    if params.alpha < 2.0 {
        return Ok((OdeChart::Physical, series_start(params, a, b, r0)?.state));
    }
    // Outward integration in the interior chart loses the u′ information to
    // cancellation in ẇ + Aw = −r^{A+1}u′, so hand the seed to the physical
    // chart whenever its physical state is of moderate size.
    let seed = stable_seed(params, a, b, r0)?;
    let (r, s) = physical(params, OdeChart::Interior, seed.x, seed.y);
    if s.iter().all(|v| v.abs() < 1e-3 * Tolerances::default().blowup) {
        Ok((OdeChart::Physical, OdeState { x: r, y: s }))
    } else {
        Ok((OdeChart::Interior, seed))
    }
}

/// Radius of a chart location.
fn radius_of(chart: OdeChart, x: f64) -> f64 {
    match chart {
        OdeChart::Physical => x,
        OdeChart::Interior => (-x).exp(),
        OdeChart::Exterior => x.exp(),
    }
}

/// Chart location of a radius.
fn location_of(chart: OdeChart, r: f64) -> f64 {
    match chart {
        OdeChart::Physical => r,
        OdeChart::Interior => -r.ln(),
        OdeChart::Exterior => r.ln(),
    }
}

fn physical(params: &ProblemParams, chart: OdeChart, x: f64, y: State) -> (f64, State) {
    match chart {
        OdeChart::Physical => (x, y),
        OdeChart::Interior => state_from_chart(params, ChartKind::Interior, x, y),
        OdeChart::Exterior => state_from_chart(params, ChartKind::Exterior, x, y),
    }
}

/// Converts a physical state into the given chart.
pub fn chart_state(params: &ProblemParams, chart: OdeChart, r: f64, s: [f64; 4]) -> OdeState {
    match chart {
        OdeChart::Physical => OdeState { x: r, y: s },
        OdeChart::Interior => {
            let (x, y) = state_to_chart(params, ChartKind::Interior, r, s);
            OdeState { x, y }
        }
        OdeChart::Exterior => {
            let (x, y) = state_to_chart(params, ChartKind::Exterior, r, s);
            OdeState { x, y }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub component: Component,
    pub r: f64,
}

/// Integration output mapped back to physical variables.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub profile: RadialProfile,
    pub crossings: Vec<Crossing>,
    /// Radius where the state exceeded the blow-up threshold.
    pub blowup: Option<f64>,
    /// Dense-output samples (r, u, u′, v, v′) at requested radii.
    pub samples: Vec<(f64, [f64; 4])>,
}

fn tolerances(tol: f64) -> Result<Tolerances> {
    if !(1e-13..=1e-3).contains(&tol) {
        return Err(Error::Domain(format!("tolerance {tol:e} outside [1e-13, 1e-3]")));
    }
    Ok(Tolerances {
        rtol: tol,
        atol: tol * 1e-2,
        ..Tolerances::default()
    })
}

fn run_to_trajectory(params: &ProblemParams, chart: OdeChart, run: Run, origin: Origin) -> Result<Trajectory> {
    let mut rows: Vec<(f64, State)> = run
        .xs
        .iter()
        .zip(&run.ys)
        .map(|(&x, &y)| physical(params, chart, x, y))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows.dedup_by(|a, b| a.0 == b.0);
    if rows.len() < 2 {
        return Err(Error::Profile("integration produced fewer than 2 nodes".into()));
    }
    let profile = RadialProfile::new(
        *params,
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1[0]).collect(),
        rows.iter().map(|r| r.1[1]).collect(),
        rows.iter().map(|r| r.1[2]).collect(),
        rows.iter().map(|r| r.1[3]).collect(),
        origin,
    )?;
    let crossings = run
        .events
        .iter()
        .map(|e| Crossing {
            component: if e.component == 0 { Component::U } else { Component::V },
            r: radius_of(chart, e.x),
        })
        .collect();
    let samples = run
        .samples
        .into_iter()
        .map(|(x, y)| physical(params, chart, x, y))
        .collect();
    Ok(Trajectory {
        profile,
        crossings,
        blowup: run.blowup.map(|(x, _)| radius_of(chart, x)),
        samples,
    })
}

/// Integrates from `init` (located at `span.0`) to `span.1` in the given
/// chart, watching u and v for sign changes. Sample radii must be ordered
/// in the direction of integration.
#[allow(clippy::too_many_arguments)]
pub fn integrate_trajectory(
    params: &ProblemParams,
    init: &OdeState,
    span: (f64, f64),
    tol: &Tolerances,
    chart: OdeChart,
    stop: StopPolicy,
    sample_radii: &[f64],
) -> Result<Trajectory> {
    params.validate()?;
    if init.x != span.0 {
        return Err(Error::Domain(format!(
            "initial state located at {} but span starts at {}",
            init.x, span.0
        )));
    }
    if !(span.1 != span.0) || !span.1.is_finite() {
        return Err(Error::Domain("integration span must have positive length".into()));
    }
    if chart == OdeChart::Physical && (span.0 <= 0.0 || span.1 <= 0.0) {
        return Err(Error::Domain("physical-chart span must lie in r > 0".into()));
    }
    if init.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("initial state is not finite".into()));
    }
    let field = Field::new(params, chart)?;
    let samples: Vec<f64> = sample_radii.iter().map(|&r| location_of(chart, r)).collect();
    let run = solve(
        |x, y| field.eval(x, y),
        span.0,
        init.y,
        span.1,
        tol,
        &[0, 2],
        stop,
        &samples,
    )?;
    run_to_trajectory(params, chart, run, Origin::Shot)
}

/// Adaptive Dormand–Prince integration over `span` (in chart
/// coordinates). The returned profile holds the accepted steps and any
/// sign-change points of u and v, in physical variables.
pub fn integrate(
    params: &ProblemParams,
    init: &OdeState,
    span: (f64, f64),
    tol: f64,
    chart: OdeChart,
) -> Result<RadialProfile> {
    let tol = tolerances(tol)?;
    Ok(integrate_trajectory(params, init, span, &tol, chart, StopPolicy::Never, &[])?.profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    PositiveOnWindow,
    UCrossedZero,
    VCrossedZero,
    BlowUp,
}

impl OutcomeKind {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::PositiveOnWindow => "PositiveOnWindow",
            OutcomeKind::UCrossedZero => "UCrossedZero",
            OutcomeKind::VCrossedZero => "VCrossedZero",
            OutcomeKind::BlowUp => "BlowUp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryOutcome {
    pub kind: OutcomeKind,
    /// Radius of the event; `None` for `PositiveOnWindow`.
    pub location: Option<f64>,
    pub profile: RadialProfile,
}

/// Integrates the entire-space trajectory with u(0) = a, v(0) = b out to
/// `r_max` and reports the first sign change of u or v, or blow-up.
pub fn classify_trajectory(
    params: &ProblemParams,
    a: f64,
    b: f64,
    r_max: f64,
    tol: f64,
) -> Result<TrajectoryOutcome> {
    if a < 0.0 {
        return Err(Error::Domain(format!("u(0) = {a} must be non-negative")));
    }
    let tolr = tolerances(tol)?;
    let (chart, init) = center_start(params, a, b)?;
    let r_start = radius_of(chart, init.x);
    if !(r_max > r_start) {
        return Err(Error::Domain(format!(
            "r_max = {r_max} must exceed the start radius {r_start:e}"
        )));
    }
    let (_, s0) = physical(params, chart, init.x, init.y);
    let at_start = if s0[0] <= 0.0 {
        Some(OutcomeKind::UCrossedZero)
    } else if s0[2] <= 0.0 {
        Some(OutcomeKind::VCrossedZero)
    } else {
        None
    };
    if let Some(kind) = at_start {
        let end = location_of(chart, (2.0 * r_start).min(r_max));
        let traj = integrate_trajectory(params, &init, (init.x, end), &tolr, chart, StopPolicy::Never, &[])?;
        return Ok(TrajectoryOutcome {
            kind,
            location: Some(r_start),
            profile: traj.profile,
        });
    }
    let end = location_of(chart, r_max);
    let traj = integrate_trajectory(params, &init, (init.x, end), &tolr, chart, StopPolicy::FirstEvent, &[])?;
    let (kind, location) = if let Some(c) = traj.crossings.first() {
        let kind = match c.component {
            Component::U => OutcomeKind::UCrossedZero,
            Component::V => OutcomeKind::VCrossedZero,
        };
        (kind, Some(c.r))
    } else if let Some(r) = traj.blowup {
        (OutcomeKind::BlowUp, Some(r))
    } else {
        (OutcomeKind::PositiveOnWindow, None)
    };
    Ok(TrajectoryOutcome {
        kind,
        location,
        profile: traj.profile,
    })
}

/// Knobs of the Navier-ball shooting solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub tol: f64,
    /// Nodes of the returned geometric-in-r profile.
    pub nodes: usize,
    pub b_min: f64,
    pub b_max: f64,
    pub sweep_points: usize,
    /// Outer radius of the search trajectories (normalized frame).
    pub r_search: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            nodes: 4096,
            b_min: 1e-4,
            b_max: 1e4,
            sweep_points: 41,
            r_search: 1e6,
        }
    }
}

/// Positive radial solution of the Navier problem on B_R.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub profile: RadialProfile,
    /// (u(0), v(0)), or the coefficients of the decaying modes when α ≥ 2.
    pub center_values: (f64, f64),
    /// b* = v(0) in the frame normalized by u(0) = 1.
    pub shooting_parameter: f64,
    /// (|u(R)|, |v(R)|).
    pub residuals: (f64, f64),
    /// Common first zero ρ of u and v in the normalized frame.
    pub rho: f64,
    /// Similarity factor λ = ρ/R.
    pub scale: f64,
    /// (b, ρ_u, ρ_v) for every trial of the bracket sweep.
    pub sweep: Vec<(f64, f64, f64)>,
}

fn first_zeros(params: &ProblemParams, b: f64, opts: &ShootOptions, tol: &Tolerances) -> Result<(f64, f64)> {
    let (chart, init) = center_start(params, 1.0, b)?;
    let end = location_of(chart, opts.r_search);
    let traj = integrate_trajectory(params, &init, (init.x, end), tol, chart, StopPolicy::AllComponents, &[])?;
    let find = |c: Component| {
        traj.crossings
            .iter()
            .find(|e| e.component == c)
            .map_or(f64::INFINITY, |e| e.r)
    };
    Ok((find(Component::U), find(Component::V)))
}

/// +1 when v vanishes first, −1 when u vanishes first, 0 when neither does.
fn first_zero_sign(params: &ProblemParams, b: f64, opts: &ShootOptions, tol: &Tolerances) -> Result<i8> {
    let (chart, init) = center_start(params, 1.0, b)?;
    let end = location_of(chart, opts.r_search);
    let traj = integrate_trajectory(params, &init, (init.x, end), tol, chart, StopPolicy::FirstEvent, &[])?;
    Ok(match traj.crossings.first().map(|c| c.component) {
        Some(Component::V) => 1,
        Some(Component::U) => -1,
        None => 0,
    })
}

fn sign_of_gap(ru: f64, rv: f64) -> i8 {
    if ru.is_infinite() && rv.is_infinite() {
        0
    } else if ru > rv {
        1
    } else if ru < rv {
        -1
    } else {
        0
    }
}

/// Solves Δ(|x|^α Δu) = |x|^l u^p on B_R with u = Δu = 0 on ∂B_R by
/// shooting on b = v(0) with u(0) = 1, then rescaling to radius R.
pub fn shoot_navier_ball(params: &ProblemParams, radius: f64, tol: f64) -> Result<BvpSolution> {
    shoot_navier_ball_with(
        params,
        radius,
        &ShootOptions {
            tol,
            ..ShootOptions::default()
        },
    )
}

pub fn shoot_navier_ball_with(params: &ProblemParams, radius: f64, opts: &ShootOptions) -> Result<BvpSolution> {
    params.validate()?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("ball radius R = {radius} must be positive")));
    }
    if params.p >= params.p_s() {
        return Err(Error::Domain(format!(
            "shooting needs p < p_s = {} (got p = {})",
            params.p_s(),
            params.p
        )));
    }
    if opts.nodes < 2 || opts.sweep_points < 2 || !(opts.b_min > 0.0 && opts.b_max > opts.b_min) {
        return Err(Error::Domain("invalid shooting options".into()));
    }
    let tol = tolerances(opts.tol)?;

    let ln_lo = opts.b_min.ln();
    let ln_hi = opts.b_max.ln();
    let bs: Vec<f64> = (0..opts.sweep_points)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (opts.sweep_points - 1) as f64).exp())
        .collect();
    let sweep: Vec<(f64, f64, f64)> = bs
        .par_iter()
        .map(|&b| first_zeros(params, b, opts, &tol).map(|(ru, rv)| (b, ru, rv)))
        .collect::<Result<Vec<_>>>()?;

    let bracket = sweep.windows(2).find_map(|w| {
        let s0 = sign_of_gap(w[0].1, w[0].2);
        let s1 = sign_of_gap(w[1].1, w[1].2);
        (s0 != 0 && s1 != 0 && s0 != s1).then_some((w[0].0, s0, w[1].0))
    });
    let Some((mut lo, s_lo, mut hi)) = bracket else {
        return Err(Error::Shooting {
            reason: "no sign change of ρ_u − ρ_v across the b sweep".into(),
            table: sweep,
        });
    };
    for _ in 0..200 {
        if hi / lo - 1.0 <= 4.0 * f64::EPSILON {
            break;
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let s = first_zero_sign(params, mid, opts, &tol)?;
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b_star = (lo * hi).sqrt();
    let (ru, rv) = first_zeros(params, b_star, opts, &tol)?;
    if !(ru.is_finite() && rv.is_finite()) {
        return Err(Error::Shooting {
            reason: format!("at b* = {b_star:e} the zeros are ρ_u = {ru}, ρ_v = {rv}"),
            table: sweep,
        });
    }
    let rho = 0.5 * (ru + rv);

    let (chart, init) = center_start(params, 1.0, b_star)?;
    let r_start = radius_of(chart, init.x);
    let n = opts.nodes;
    let ratio = (rho / r_start).ln();
    let mut radii: Vec<f64> = (0..n)
        .map(|i| r_start * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect();
    radii[0] = r_start;
    radii[n - 1] = rho;
    let end = location_of(chart, rho);
    let traj = integrate_trajectory(params, &init, (init.x, end), &tol, chart, StopPolicy::Never, &radii)?;
    if traj.samples.len() != n {
        return Err(Error::Shooting {
            reason: format!(
                "profile integration reached {} of {} nodes (blow-up at {:?})",
                traj.samples.len(),
                n,
                traj.blowup
            ),
            table: sweep,
        });
    }

    let lambda = rho / radius;
    let k = params.u_scaling_exponent();
    let cu = lambda.powf(k);
    let cdu = cu * lambda;
    let cv = lambda.powf(k + 2.0 - params.alpha);
    let cdv = cv * lambda;
    let mut r = Vec::with_capacity(n);
    let (mut u, mut du, mut v, mut dv) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for (i, (_, s)) in traj.samples.iter().enumerate() {
        r.push(radii[i] / lambda);
        u.push(cu * s[0]);
        du.push(cdu * s[1]);
        v.push(cv * s[2]);
        dv.push(cdv * s[3]);
    }
    r[n - 1] = radius;
    let residuals = (u[n - 1].abs(), v[n - 1].abs());
    let profile = RadialProfile::new(*params, r, u, du, v, dv, Origin::Shot)?;
    Ok(BvpSolution {
        profile,
        center_values: (cu, cv * b_star),
        shooting_parameter: b_star,
        residuals,
        rho,
        scale: lambda,
        sweep,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub p: f64,
    pub b: f64,
    pub outcome: OutcomeKind,
    pub event_location: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    /// One entry per (p, b), ordered by p index then b index.
    pub entries: Vec<ScanEntry>,
    pub fraction_positive: f64,
    /// Number of `PositiveOnWindow` outcomes with p < p_s.
    pub positive_below_threshold: usize,
    /// True when any sub-critical trajectory stayed positive, which would
    /// contradict the Liouville theorems on the window.
    pub threshold_violation: bool,
}

impl ScanReport {
    /// First-zero radii of the crossing outcomes, in entry order.
    pub fn first_zero_radii(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| matches!(e.outcome, OutcomeKind::UCrossedZero | OutcomeKind::VCrossedZero))
            .filter_map(|e| e.event_location)
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["p", "b", "outcome", "event_location"])?;
        for e in &self.entries {
            wr.write_record([
                crate::io::fmt_f64(e.p),
                crate::io::fmt_f64(e.b),
                e.outcome.name().to_string(),
                e.event_location.map(crate::io::fmt_f64).unwrap_or_default(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Classifies the trajectory u(0) = 1, v(0) = b for every (p, b) pair in
/// parallel, with u(0) = 1 fixed by the similarity scaling.
pub fn liouville_scan(
    params_base: &ProblemParams,
    p_grid: &[f64],
    b_grid: &[f64],
    r_max: f64,
) -> Result<ScanReport> {
    liouville_scan_with_tol(params_base, p_grid, b_grid, r_max, Tolerances::default().rtol)
}

pub fn liouville_scan_with_tol(
    params_base: &ProblemParams,
    p_grid: &[f64],
    b_grid: &[f64],
    r_max: f64,
    tol: f64,
) -> Result<ScanReport> {
    let params: Vec<ProblemParams> = p_grid
        .iter()
        .map(|&p| params_base.with_p(p))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..params.len())
        .flat_map(|i| (0..b_grid.len()).map(move |j| (i, j)))
        .collect();
    let entries: Vec<ScanEntry> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let out = classify_trajectory(&params[i], 1.0, b_grid[j], r_max, tol)?;
            Ok(ScanEntry {
                p: params[i].p,
                b: b_grid[j],
                outcome: out.kind,
                event_location: out.location,
            })
        })
        .collect::<Result<_>>()?;
    let positive = entries
        .iter()
        .filter(|e| e.outcome == OutcomeKind::PositiveOnWindow)
        .count();
    let below = entries
        .iter()
        .zip(&jobs)
        .filter(|(e, &(i, _))| e.outcome == OutcomeKind::PositiveOnWindow && params[i].p < params[i].p_s())
        .count();
    Ok(ScanReport {
        fraction_positive: if entries.is_empty() {
            0.0
        } else {
            positive as f64 / entries.len() as f64
        },
        positive_below_threshold: below,
        threshold_violation: below > 0,
        entries,
    })
}
