mod common;

use biharm_core::asymptotics::check_bounds;
use biharm_core::exponents::ExactBootstrap;
use biharm_core::identities::{energy, pohozaev_check};
use biharm_core::radial_ode::{
    classify_trajectory, integrate, series_start, shoot_navier_ball_with, chart_state, OdeChart,
    ShootOptions,
};
use biharm_core::transform::q_star;
use biharm_core::*;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ProblemParams> {
    (5u32..=12, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(n, a, t, s)| {
        let nf = n as f64;
        let alpha = (4.0 - nf + 0.02) + a * (2.0 * nf - 4.0 - 0.04);
        let tau = -3.98 + 10.0 * t;
        let base = ProblemParams::new(n, alpha, tau + alpha, 2.0).unwrap();
        let p = 1.01 + s * (2.0 * base.p_s() - 1.01);
        base.with_p(p).unwrap()
    })
}

fn alpha_two_strategy() -> impl Strategy<Value = ProblemParams> {
    (5u32..=12, -1.98f64..8.0, 1.01f64..10.0)
        .prop_map(|(n, l, p)| ProblemParams::new(n, 2.0, l, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exponent_sign_thresholds(params in params_strategy()) {
        prop_assert_eq!(params.p_star() > 0.0, params.p < params.p_s());
        let n = params.dim();
        let upper = (n + 2.0 + 2.0 * params.l) / (n - 2.0);
        prop_assert_eq!(params.p_upper_star() > 0.0, params.p < upper);
    }

    #[test]
    fn alpha_two_thresholds_coincide(params in alpha_two_strategy()) {
        let n = params.dim();
        let upper = (n + 2.0 + 2.0 * params.l) / (n - 2.0);
        prop_assert!((upper - params.p_s()).abs() < 1e-12 * upper);
        let d = derive_exponents(&params).unwrap();
        if (params.p - params.p_s()).abs() > 1e-9 {
            prop_assert_eq!(d.beta > 0.5 * (n - 2.0), params.p < params.p_s());
        }
    }

    #[test]
    fn delta_never_vanishes(params in params_strategy()) {
        let d = derive_exponents(&params).unwrap();
        prop_assert!(d.delta > 0.0);
    }

    #[test]
    fn spectrum_closed_under_negation(params in params_strategy()) {
        let s = linearization_spectrum(&params).unwrap();
        for lam in s.eigenvalues {
            prop_assert!(s.eigenvalues.iter().any(|mu| (mu + lam).abs() <= 1e-15 * lam.abs().max(1.0)));
        }
    }

    #[test]
    fn bootstrap_strictly_increasing(l in -1.9f64..5.0, p in 1.05f64..4.0) {
        let params = ProblemParams::new(6, 0.0, l, p).unwrap();
        let seq = bootstrap_sequences(&params, 20).unwrap();
        for k in 1..20 {
            prop_assert!(seq.sigma[k + 1] > seq.sigma[k]);
            prop_assert!(seq.b[k + 1] > seq.b[k]);
        }
    }

    #[test]
    fn critical_weight_exponent_vanishes(params in params_strategy()) {
        prop_assert!(q_star(&params, params.p_s() + 1.0).abs() < 1e-14 * params.nprime().max(1.0) * 4.0);
    }

    #[test]
    fn pohozaev_lhs_exactly_zero_at_critical(params in params_strategy(), c in 0.1f64..3.0) {
        let crit = params.with_p(params.p_s()).unwrap();
        let prof = RadialProfile::from_fn(crit, common::geom(1e-3, 1.0, 60), |r| [c * (1.0 - r * r), -2.0 * c * r, 1.0, 0.0], Origin::Synthetic).unwrap();
        prop_assert_eq!(pohozaev_check(&crit, &prof, 1.0).unwrap().lhs, 0.0);
    }

    #[test]
    fn quadratic_form_translation_invariant(params in params_strategy(), s in -3.0f64..3.0) {
        let h = 0.01;
        let bump = |t: f64| if (2.0..8.0).contains(&t) { (std::f64::consts::PI * (t - 2.0) / 6.0).sin().powi(4) } else { 0.0 };
        let build = |shift: f64| {
            let t: Vec<f64> = (0..=1400).map(|i| -2.0 + i as f64 * h + shift).collect();
            let w: Vec<f64> = t.iter().map(|x| bump(x - shift)).collect();
            let dw = biharm_core::numerics::differentiate(&t, &w, 1, 5);
            let z = vec![0.0; t.len()];
            TransformedProfile::new(params, ChartKind::Interior, t, w, dw, z.clone(), z).unwrap()
        };
        let a = quadratic_form(&params, &build(0.0)).unwrap();
        let b = quadratic_form(&params, &build(s)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a, "{} {}", a, b);
    }

    #[test]
    fn weighted_norm_homogeneous(params in params_strategy(), lam in 0.01f64..100.0, q in 1.0f64..6.0) {
        let r = common::geom(1e-3, 2.0, 200);
        let f = |k: f64| move |x: f64| [k * (1.0 + x).recip(), -k * (1.0 + x).powi(-2), 0.0, 0.0];
        let p1 = RadialProfile::from_fn(params, r.clone(), f(1.0), Origin::Synthetic).unwrap();
        let p2 = RadialProfile::from_fn(params, r, f(lam), Origin::Synthetic).unwrap();
        let a = weighted_norm(&params, &p1, q, 2.0).unwrap();
        let b = weighted_norm(&params, &p2, q, 2.0).unwrap();
        prop_assert!((b - lam * a).abs() <= 1e-12 * lam * a);
    }

    #[test]
    fn chart_round_trip(params in params_strategy(), c in prop::array::uniform4(-2.0f64..2.0)) {
        let r = common::geom(1e-3, 5.0, 120);
        let prof = RadialProfile::from_fn(params, r, |x| {
            [c[0] + x.sin(), c[1] * x.cos(), c[2] + x * x, c[3] - x]
        }, Origin::Synthetic).unwrap();
        let back = from_transformed(&to_transformed(&prof, ChartKind::Interior).unwrap()).unwrap();
        // Recovering x′ from the chart derivative cancels k·x against r·x′
        // (k the chart exponent), so its rounding scales with k|x|/r.
        let k = params.interior_w_exponent().abs() + params.interior_z_exponent().abs();
        for i in 0..prof.len() {
            let r = prof.r[i];
            prop_assert!((prof.r[i] - back.r[i]).abs() <= 1e-12 * r);
            for (x, dx, bx, bdx) in [(prof.u[i], prof.du[i], back.u[i], back.du[i]), (prof.v[i], prof.dv[i], back.v[i], back.dv[i])] {
                prop_assert!((x - bx).abs() <= 1e-12 * x.abs().max(1.0), "{} {}", x, bx);
                let scale = 1.0 + dx.abs() + k * x.abs() / r;
                prop_assert!((dx - bdx).abs() <= 1e-12 * scale, "{} {}", dx, bdx);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outcome_invariant_under_similarity(b in -2.0f64..3.0, lam in 0.3f64..4.0, p in 1.5f64..8.5) {
        let params = ProblemParams::new(5, 0.0, 0.0, p).unwrap();
        let b = 10f64.powf(b);
        let base = classify_trajectory(&params, 1.0, b, 1e3, 1e-10).unwrap();
        let k = params.u_scaling_exponent();
        let kv = params.v_scaling_exponent();
        let scaled = classify_trajectory(&params, lam.powf(k), lam.powf(kv) * b, 1e3 / lam, 1e-10).unwrap();
        prop_assert_eq!(base.kind, scaled.kind);
    }

    #[test]
    fn bounds_invariant_under_rescaling(lam in 0.2f64..5.0) {
        let params = ProblemParams::new(5, 0.0, 0.0, 9.0).unwrap();
        let k = params.u_scaling_exponent();
        let kv = params.v_scaling_exponent();
        let r = common::geom(1e-3, 100.0, 800);
        let base = RadialProfile::from_fn(params, r.clone(), common::bubble, Origin::Synthetic).unwrap();
        let scaled_r: Vec<f64> = r.iter().map(|x| x / lam).collect();
        let scaled = RadialProfile::from_fn(params, scaled_r, |x| {
            let s = common::bubble(lam * x);
            [lam.powf(k) * s[0], lam.powf(k + 1.0) * s[1], lam.powf(kv) * s[2], lam.powf(kv + 1.0) * s[3]]
        }, Origin::Synthetic).unwrap();
        for (a, b) in check_bounds(&params, &base).iter().zip(check_bounds(&params, &scaled).iter()) {
            prop_assert!((a.sup_constant - b.sup_constant).abs() <= 1e-10 * a.sup_constant);
        }
    }
}

fn shot_matrix() -> Vec<ProblemParams> {
    [(5u32, 0.0, 0.0, 3.0), (6, 1.0, 1.0, 2.0), (7, 0.5, 0.0, 2.5)]
        .iter()
        .map(|&(n, a, l, p)| ProblemParams::new(n, a, l, p).unwrap())
        .collect()
}

#[test]
fn shot_solutions_have_monotone_fluxes_and_integral_identity() {
    for params in shot_matrix() {
        let sol = shoot_navier_ball_with(&params, 1.0, &ShootOptions { nodes: 2048, ..Default::default() }).unwrap();
        let prof = &sol.profile;
        let n = params.dim();
        let flux = |d: &[f64]| -> Vec<f64> { prof.r.iter().zip(d).map(|(r, x)| r.powf(n - 1.0) * x).collect() };
        for f in [flux(&prof.du), flux(&prof.dv)] {
            let scale = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            prop_assert_helper(f.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale), &params);
        }
        // −r^{N−1}u′(r) = ∫₀^r s^{N−α−1} v ds, trapezoid on the profile nodes
        let k = n - params.alpha;
        let m = prof.len();
        let mut integral = prof.r[0].powf(k) / k * prof.v[0];
        let mut worst = 0.0f64;
        let fu = flux(&prof.du);
        for i in 1..m {
            let (ra, rb) = (prof.r[i - 1], prof.r[i]);
            let ga = ra.powf(k - 1.0) * prof.v[i - 1];
            let gb = rb.powf(k - 1.0) * prof.v[i];
            integral += 0.5 * (rb - ra) * (ga + gb);
            worst = worst.max((integral + fu[i]).abs() / fu[m - 1].abs());
        }
        assert!(worst < 1e-4, "{params:?}: {worst}");
    }
}

#[test]
fn entire_positive_trajectory_satisfies_combination_bounds() {
    // The critical bubble is an entire positive solution; on it
    // r u′ + (N−2)u ≥ 0 and r v′ + (N−2)v ≥ 0 everywhere.
    let params = ProblemParams::new(5, 0.0, 0.0, 9.0).unwrap();
    let c = 105f64.powf(0.125);
    let out = classify_trajectory(&params, c, 5.0 * c, 1e3, 1e-10).unwrap();
    assert_eq!(out.kind, biharm_core::radial_ode::OutcomeKind::PositiveOnWindow);
    let rep = biharm_core::asymptotics::monotonicity_report(&params, &out.profile).unwrap();
    assert!(rep.u_combination.value >= 0.0, "{:?}", rep.u_combination);
    assert!(rep.v_combination.value >= 0.0, "{:?}", rep.v_combination);
}

fn prop_assert_helper(cond: bool, params: &ProblemParams) {
    assert!(cond, "flux not monotone for {params:?}");
}

#[test]
fn pohozaev_converges_at_second_order_across_matrix() {
    for params in shot_matrix() {
        let res: Vec<f64> = [1024, 2048, 4096]
            .iter()
            .map(|&nodes| {
                let sol = shoot_navier_ball_with(&params, 1.0, &ShootOptions { nodes, ..Default::default() }).unwrap();
                pohozaev_check(&params, &sol.profile, 1.0).unwrap().relative_residual
            })
            .collect();
        let order = (res[1] / res[2]).log2();
        assert!(order >= 1.9, "{params:?}: {res:?}");
    }
}

#[test]
fn nehari_gap_separates_solutions_from_perturbations() {
    let params = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
    let sol = shoot_navier_ball_with(&params, 1.0, &ShootOptions { nodes: 2048, ..Default::default() }).unwrap();
    let good = energy(&params, &sol.profile, 1.0).unwrap();
    let p = &sol.profile;
    let bent = RadialProfile::new(
        params,
        p.r.clone(),
        p.u.iter().zip(&p.r).map(|(u, r)| u * (1.0 + 0.05 * (1.0 - r * r))).collect(),
        p.du.clone(),
        p.v.clone(),
        p.dv.clone(),
        Origin::Synthetic,
    )
    .unwrap();
    let bad = energy(&params, &bent, 1.0).unwrap();
    assert!(bad.nehari_gap.abs() > 1e3 * good.nehari_gap.abs(), "{} {}", bad.nehari_gap, good.nehari_gap);
}

#[test]
fn physical_and_interior_charts_agree() {
    let params = ProblemParams::new(7, 0.5, 0.3, 2.0).unwrap();
    let s = series_start(&params, 1.0, 3.0, 1e-2).unwrap().state;
    let phys = integrate(&params, &s, (1e-2, 1.0), 1e-12, OdeChart::Physical).unwrap();
    let init = chart_state(&params, OdeChart::Interior, 1e-2, s.y);
    let tr = integrate(&params, &init, (init.x, 0.0), 1e-12, OdeChart::Interior).unwrap();
    let a = phys.state_at(1.0).unwrap();
    let b = tr.state_at(1.0).unwrap();
    for i in 0..4 {
        assert!((a[i] - b[i]).abs() < 1e-8 * (1.0 + a[i].abs()), "{a:?} {b:?}");
    }
}

#[test]
fn rayleigh_grid_convergence_is_second_order() {
    let params = ProblemParams::new(5, 0.0, 0.0, 3.0).unwrap();
    let v: Vec<f64> = [500, 999, 1997]
        .iter()
        .map(|&n| minimize_rayleigh(&params, &Grid1D::for_ball(&params, 1.0, n).unwrap(), 4.0).unwrap().value)
        .collect();
    let order = ((v[0] - v[1]) / (v[1] - v[2])).abs().log2();
    assert!(order >= 1.9, "{v:?} order {order}");
}

#[test]
fn truncation_window_insensitive() {
    let params = ProblemParams::new(6, 1.0, 0.5, 2.0).unwrap();
    let g = Grid1D::for_ball(&params, 1.0, 1001).unwrap();
    let wide = Grid1D::new(g.t_min, g.t_max + 5.0, 1251).unwrap();
    let a = first_eigenpair(&params, &g).unwrap().lambda1;
    let b = first_eigenpair(&params, &wide).unwrap().lambda1;
    assert!((a - b).abs() < 1e-8 * a, "{a} {b}");
    let q = 3.0;
    let a = minimize_rayleigh(&params, &g, q).unwrap().value;
    let b = minimize_rayleigh(&params, &wide, q).unwrap().value;
    assert!((a - b).abs() < 1e-8 * a, "{a} {b}");
}

#[test]
fn first_eigenvalue_decreases_with_radius() {
    let params = ProblemParams::new(5, 0.5, 1.0, 2.0).unwrap();
    let lams: Vec<f64> = [0.5, 1.0, 1.5, 3.0]
        .iter()
        .map(|&r| first_eigenpair(&params, &Grid1D::for_ball(&params, r, 800).unwrap()).unwrap().lambda1)
        .collect();
    assert!(lams.windows(2).all(|w| w[1] < w[0]), "{lams:?}");
}

#[test]
fn exact_bootstrap_matches_closed_form_on_rationals() {
    let l = common::ratio(-2, 3);
    let p = common::ratio(9, 4);
    let seq = ExactBootstrap::recursion(&l, &p, 25);
    for k in 0..=25 {
        assert_eq!(seq.sigma[k], common::sigma_exact(&l, &p, k));
        assert_eq!(seq.b[k], common::b_exact(&l, &p, k));
    }
}
