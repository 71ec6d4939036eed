//! Dormand–Prince 5(4) pair with Hairer's fourth-order dense output and
//! sign-change event location on selected state components.

use crate::error::{Error, Result};

pub type State = [f64; 4];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Any state component above this magnitude ends the run as blow-up.
    pub blowup: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            blowup: 1e12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopPolicy {
    Never,
    /// Stop at the first sign change of any watched component.
    FirstEvent,
    /// Stop once every watched component has changed sign at least once.
    AllComponents,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit {
    pub component: usize,
    pub x: f64,
    pub y: State,
}

#[derive(Debug, Clone, Default)]
pub struct Run {
    /// Accepted step end points (and the stopping event, if any).
    pub xs: Vec<f64>,
    pub ys: Vec<State>,
    pub events: Vec<EventHit>,
    /// Dense-output values at the requested sample abscissae that were
    /// reached.
    pub samples: Vec<(f64, State)>,
    pub blowup: Option<(f64, State)>,
    pub stopped_on_event: bool,
}

/// Dense output on one accepted step.
struct Dense {
    x0: f64,
    h: f64,
    r: [State; 5],
}

impl Dense {
    fn eval(&self, x: f64) -> State {
        let th = (x - self.x0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            let r = &self.r;
            *o = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }

    fn component(&self, x: f64, c: usize) -> f64 {
        self.eval(x)[c]
    }
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let s: f64 = terms.iter().map(|(c, k)| c * k[i]).sum();
        *o += h * s;
    }
    out
}

fn rms(v: &State, sc: &State) -> f64 {
    (v.iter().zip(sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / 4.0).sqrt()
}

fn initial_step<F>(f: &mut F, x0: f64, y0: &State, f0: &State, dir: f64, span: f64, tol: &Tolerances) -> f64
where
    F: FnMut(f64, &State) -> State,
{
    let sc: State = std::array::from_fn(|i| tol.atol + tol.rtol * y0[i].abs());
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = f(x0 + dir * h0, &y1);
    let diff: State = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&diff, &sc) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Locates the root of component `c` of the dense interpolant in
/// [xa, xb] by the Illinois variant of regula falsi.
fn polish(dense: &Dense, c: usize, mut xa: f64, mut ga: f64, mut xb: f64, mut gb: f64) -> f64 {
    if gb == 0.0 {
        return xb;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let xm = (xa * gb - xb * ga) / (gb - ga);
        let xm = if xm.is_finite() && (xm - xa) * (xm - xb) <= 0.0 {
            xm
        } else {
            0.5 * (xa + xb)
        };
        let gm = dense.component(xm, c);
        if gm == 0.0 {
            return xm;
        }
        if gm.signum() == gb.signum() {
            xb = xm;
            gb = gm;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            xa = xm;
            ga = gm;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
        if (xb - xa).abs() <= 4.0 * f64::EPSILON * xa.abs().max(xb.abs()) {
            break;
        }
    }
    if ga.abs() < gb.abs() {
        xa
    } else {
        xb
    }
}

fn crossed(g0: f64, g1: f64) -> bool {
    (g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0)
}

/// Integrates y′ = f(x, y) from `x0` to `x_end` (either direction).
///
/// `watch` lists the components whose sign changes are reported as events;
/// `samples` are abscissae (ordered in the direction of integration) where
/// dense output is recorded.
#[allow(clippy::too_many_arguments)]
pub fn solve<F>(
    mut f: F,
    x0: f64,
    y0: State,
    x_end: f64,
    tol: &Tolerances,
    watch: &[usize],
    stop: StopPolicy,
    samples: &[f64],
) -> Result<Run>
where
    F: FnMut(f64, &State) -> State,
{
    let mut run = Run {
        xs: vec![x0],
        ys: vec![y0],
        ..Default::default()
    };
    let span = (x_end - x0).abs();
    if span == 0.0 {
        return Ok(run);
    }
    let dir = (x_end - x0).signum();
    let ahead = |a: f64, b: f64| (b - a) * dir;

    let mut next_sample = 0usize;
    while next_sample < samples.len() && ahead(samples[next_sample], x0) >= 0.0 {
        if samples[next_sample] == x0 {
            run.samples.push((x0, y0));
        }
        next_sample += 1;
    }

    let mut fired = vec![false; watch.len()];
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = initial_step(&mut f, x0, &y0, &k1, dir, span, tol);
    let mut last_rejected = false;
    let mut steps = 0usize;

    while ahead(x, x_end) > 0.0 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::Stiffness { x, state: y });
        }
        let remaining = ahead(x, x_end);
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
        }
        if h < 16.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Stiffness { x, state: y });
        }
        let hs = dir * h;
        let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let x1 = if h == remaining { x_end } else { x + hs };
        let k7 = f(x1, &y1);
        let errv: State = std::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let sc: State = std::array::from_fn(|i| tol.atol + tol.rtol * y[i].abs().max(y1[i].abs()));
        let err = rms(&errv, &sc);
        let finite = y1.iter().all(|v| v.is_finite()) && err.is_finite();

        if finite && err <= 1.0 {
            let mut r = [[0.0; 4]; 5];
            for i in 0..4 {
                let ydiff = y1[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - hs * k7[i] - bspl;
                r[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let dense = Dense { x0: x, h: x1 - x, r };

            let mut hits: Vec<EventHit> = Vec::new();
            for (slot, &c) in watch.iter().enumerate() {
                if stop == StopPolicy::AllComponents && fired[slot] {
                    continue;
                }
                if crossed(y[c], y1[c]) {
                    let xr = polish(&dense, c, x, y[c], x1, y1[c]);
                    let mut ys = if xr == x1 { y1 } else { dense.eval(xr) };
                    if xr == x1 {
                        ys[c] = y1[c];
                    }
                    hits.push(EventHit {
                        component: c,
                        x: xr,
                        y: ys,
                    });
                }
            }
            hits.sort_by(|a, b| ahead(b.x, a.x).total_cmp(&0.0).then(a.component.cmp(&b.component)));

            let stop_at = match stop {
                StopPolicy::Never => None,
                StopPolicy::FirstEvent => hits.first().map(|e| e.x),
                StopPolicy::AllComponents => {
                    let mut at = None;
                    for e in &hits {
                        let slot = watch.iter().position(|&c| c == e.component).unwrap();
                        fired[slot] = true;
                        if fired.iter().all(|&b| b) {
                            at = Some(e.x);
                            break;
                        }
                    }
                    at
                }
            };
            if let Some(xs) = stop_at {
                hits.retain(|e| ahead(e.x, xs) >= 0.0);
            }

            let limit = stop_at.unwrap_or(x1);
            while next_sample < samples.len() && ahead(samples[next_sample], limit) >= 0.0 {
                let s = samples[next_sample];
                let v = if s == x1 { y1 } else { dense.eval(s) };
                run.samples.push((s, v));
                next_sample += 1;
            }

            if let Some(xs) = stop_at {
                let ev = *hits.last().unwrap();
                run.events.extend(hits);
                run.xs.push(xs);
                run.ys.push(ev.y);
                run.stopped_on_event = true;
                return Ok(run);
            }
            run.events.extend(hits);

            if y1.iter().any(|v| v.abs() > tol.blowup) {
                run.blowup = Some((x1, y1));
                run.xs.push(x1);
                run.ys.push(y1);
                return Ok(run);
            }

            x = x1;
            y = y1;
            k1 = k7;
            run.xs.push(x);
            run.ys.push(y);

            let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            let fac = if finite {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= fac;
            last_rejected = true;
        }
    }
    Ok(run)
}
