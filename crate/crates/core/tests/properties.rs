use approx::assert_relative_eq;
use proptest::prelude::*;

use gnlab::control::{integrate, scaled_law, ControlLaw, ControlSystem};
use gnlab::covering::{besicovitch_select, overlap_counts, Ball};
use gnlab::funcspace::{sample, AnalyticFunction, Interval};
use gnlab::gn::{evaluate_generalized, solve_exponent, theta_star_of, GNParams, PartialParams, Rational};
use gnlab::norms::{lebesgue_norm, product_values, lp_norm_of, Exponent, NormSpec};

fn test_function(freq: f64) -> AnalyticFunction {
    AnalyticFunction::sine_bump(freq).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_homogeneous(c in -50.0f64..50.0, p in 1.0f64..8.0, j in 0usize..3, freq in 0.5f64..4.0) {
        let g = sample(&test_function(freq), Interval::UNIT, 513, 2).unwrap();
        let spec = NormSpec::new(Exponent::from_f64(p).unwrap(), j);
        let a = lebesgue_norm(&g, &spec).unwrap();
        let b = lebesgue_norm(&g.scaled(c), &spec).unwrap();
        assert_relative_eq!(b, c.abs() * a, max_relative = 1e-12, epsilon = 1e-300);
    }

    #[test]
    fn holder_for_u_times_derivative(p in 1.1f64..10.0, freq in 0.5f64..4.0) {
        let g = sample(&test_function(freq), Interval::UNIT, 1025, 1).unwrap();
        let conj = p / (p - 1.0);
        let prod = product_values(&g, &[0, 1]).unwrap();
        let lhs = lp_norm_of(&g, &prod, Interval::UNIT, &Exponent::integer(1)).unwrap();
        let a = lebesgue_norm(&g, &NormSpec::new(Exponent::from_f64(p).unwrap(), 0)).unwrap();
        let b = lebesgue_norm(&g, &NormSpec::new(Exponent::from_f64(conj).unwrap(), 1)).unwrap();
        prop_assert!(lhs <= a * b * (1.0 + 1e-9));
    }

    #[test]
    fn theta_star_is_shift_invariant(k in 0usize..3, gap in 0usize..3, extra in 1usize..3, s in 1usize..4) {
        let (j, m) = (k + gap, k + gap + extra);
        let a = theta_star_of(&[k], j, m).unwrap();
        let b = theta_star_of(&[k + s], j + s, m + s).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn solved_tuples_satisfy_the_relation(q in 1u32..6, theta_num in 1i64..6) {
        let theta = Rational::parse(&format!("{}/6", theta_num + 1)).unwrap();
        let partial = PartialParams {
            p: None,
            q: Some(Exponent::integer(q as i64)),
            r: Some(Exponent::Infinite),
            ks: vec![0, 1, 2],
            j: 2,
            m: 3,
            theta: Some(theta),
        };
        if let Ok(params) = solve_exponent(&partial) {
            let res = params.relation_residual().unwrap();
            prop_assert!(res.abs_f64() == 0.0);
        }
    }

    #[test]
    fn ratio_is_invariant_under_scalar_multiples(c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3], freq in 0.5f64..4.0) {
        let p = GNParams::preset("cor7").unwrap();
        let g = sample(&test_function(freq), Interval::UNIT, 1025, 3).unwrap();
        let a = evaluate_generalized(&g, &p).unwrap().ratio.unwrap();
        let b = evaluate_generalized(&g.scaled(c), &p).unwrap().ratio.unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn selection_covers_centers_with_bounded_overlap(
        balls in prop::collection::vec((0.0f64..1.0, 1e-3f64..0.3), 1..60),
        probes in prop::collection::vec(0.0f64..1.0, 1..200),
    ) {
        let balls: Vec<Ball> = balls.into_iter().map(|(center, radius)| Ball { center, radius }).collect();
        let chosen: Vec<Ball> = besicovitch_select(&balls).into_iter().map(|i| balls[i]).collect();
        for b in &balls {
            prop_assert!(chosen.iter().any(|c| c.contains(b.center)));
        }
        let mut probes = probes;
        probes.sort_by(f64::total_cmp);
        prop_assert!(overlap_counts(&chosen, &probes).into_iter().all(|c| c <= 4));
    }

    #[test]
    fn chain_states_are_linear_in_the_control(c in -4.0f64..4.0, eps in 0.05f64..1.0) {
        let sys = ControlSystem::new(5, 1.0).unwrap();
        let law = ControlLaw::bump_triple(AnalyticFunction::bump_chi(), eps, 0.0).unwrap();
        let a = integrate(&sys, &law, 128).unwrap();
        let b = integrate(&sys, &scaled_law(&law, c).unwrap(), 128).unwrap();
        for i in 0..3 {
            let sup = a.states.iter().fold(0.0f64, |m, x| m.max(x[i].abs()));
            for (x, y) in a.states.iter().zip(&b.states) {
                prop_assert!((y[i] - c * x[i]).abs() <= 1e2 * f64::EPSILON * c.abs().max(1.0) * sup);
            }
        }
    }

    #[test]
    fn exponent_text_round_trip(num in 1i64..40, den in 1i64..9) {
        prop_assume!(num >= den);
        let e = Exponent::parse(&format!("{num}/{den}")).unwrap();
        prop_assert_eq!(Exponent::parse(&e.to_string()).unwrap(), e.clone());
        let json = serde_json::to_string(&e).unwrap();
        prop_assert_eq!(serde_json::from_str::<Exponent>(&json).unwrap(), e);
    }
}

#[test]
fn params_json_round_trip() {
    let p = GNParams::preset("cor7").unwrap();
    let text = serde_json::to_string(&p).unwrap();
    assert_eq!(text, r#"{"p":12,"q":2,"r":"inf","ks":[0,1,2],"j":2,"m":3,"theta":0.5}"#);
    assert_eq!(serde_json::from_str::<GNParams>(&text).unwrap(), p);
}
