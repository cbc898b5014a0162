mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqshape::assessment::{pam_value, DEFAULT_COMFORT_CUTOFF, MAX_F};
use reqshape::envs::{random_episode, DiscreteEnvironment, Environment, GridDriveEnv, PointMassEnv};
use reqshape::semantics::{average_satisfaction, holds, robustness_of, sigma_task};
use reqshape::shaping::{bhnr_series, potential_from_scores, RewardVariant};
use reqshape::solvers::{argmax_set, value_iteration, TIE_TOLERANCE};
use reqshape::spec_lang::{enclose, pretty_print};
use reqshape::{
    aggregate, base_reward, bundled, load_task, parse_spec, potential, precedes, score, sigma,
    AssessmentReport, BoundTrace, Category, ComfortRobustness, RequirementClass, Termination, Tier,
    Trace,
};

use common::*;

const CLASSES: [RequirementClass; 4] = [
    RequirementClass::Safety,
    RequirementClass::TargetAchieve,
    RequirementClass::TargetConquer,
    RequirementClass::Comfort,
];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn signal_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![Just(0.0), Just(-1.0), Just(1.0), -3.0..3.0f64],
        1..15,
    )
}

// ---- parsing and signals --------------------------------------------------

#[test]
fn corpus_round_trips_through_the_printer() {
    for (name, text) in bundled::CORPUS
        .iter()
        .chain([("griddrive", bundled::GRIDDRIVE), ("pointmass", bundled::POINTMASS)].iter())
    {
        let draft = parse_spec(text).unwrap_or_else(|d| panic!("{name}: {}", d.render(name)));
        let printed = pretty_print(&draft);
        let again = parse_spec(&printed).unwrap_or_else(|d| panic!("{name}: {}", d.render(name)));
        assert!(draft.same_structure(&again), "{name} changed after printing:\n{printed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_tasks_round_trip(seed in any::<u64>()) {
        let text = random_task_text(&mut rng(seed));
        if let Ok(draft) = parse_spec(&text) {
            let again = parse_spec(&pretty_print(&draft)).expect("printed form parses");
            prop_assert!(draft.same_structure(&again));
        }
    }

    #[test]
    fn parser_is_total_on_arbitrary_input(text in "\\PC{0,200}") {
        let _ = parse_spec(&text);
    }

    #[test]
    fn parser_is_total_on_mangled_corpus(cut in 0usize..2000, junk in "[ -~\\n]{0,12}") {
        let base = bundled::SAFE_DRIVING;
        let at = base.char_indices().map(|(i, _)| i).nth(cut % base.len()).unwrap_or(0);
        let mangled = format!("{}{}{}", &base[..at], junk, &base[at..]);
        let _ = load_task(&mangled);
    }

    #[test]
    fn interval_bounds_enclose_every_state(seed in any::<u64>()) {
        let mut r = rng(seed);
        let task = random_task(&mut r);
        for _ in 0..1000 {
            let s = random_state(&mut r, &task);
            for req in task.requirements() {
                let f = req.signal(&s);
                let hull = enclose(&req.f, task.decls()).unwrap();
                prop_assert!(hull.contains(f), "{} = {f} outside {:?}", req.name, hull);
                prop_assert!(req.bounds.lo <= f && f <= req.bounds.hi);
            }
        }
    }

    #[test]
    fn normalized_signal_agrees_with_the_comparison(
        c in -4.0..4.0f64,
        e in 0.1..2.0f64,
        x in -5.0..5.0f64,
        y in -5.0..5.0f64,
        form in 0usize..6,
    ) {
        let (pred, truth): (String, bool) = match form {
            0 => (format!("x >= {c}"), x >= c),
            1 => (format!("x <= {c}"), x <= c),
            2 => (format!("{c} <= x"), c <= x),
            3 => (format!("|x| <= {}", c.abs() + 0.5), x.abs() <= c.abs() + 0.5),
            4 => (format!("x == {c} tol {e}"), (x - c).abs() <= e),
            _ => (format!("x - y >= {c}"), x - y >= c),
        };
        let text = format!("var x in [-5, 5]\nvar y in [-5, 5]\nachieve \"p\": {pred}\n");
        // a constraint that is always true or always false is rejected by design
        if let Ok(task) = load_task(&text) {
            let f = task.target().signal(&[x, y]);
            if f.abs() > 1e-9 {
                prop_assert_eq!(f >= 0.0, truth, "{} at ({}, {}) gave {}", pred, x, y, f);
            }
        }
    }
}

#[test]
fn griddrive_task_partitions() {
    let task = load_task(bundled::GRIDDRIVE).unwrap();
    assert_eq!(task.safety_count(), 1);
    assert!(task.comfort_count() >= 2);
    assert_eq!(task.target().class, RequirementClass::TargetAchieve);
}

// ---- partial order --------------------------------------------------------

#[test]
fn precedence_is_a_strict_partial_order() {
    for a in CLASSES {
        assert!(!precedes(a.tier(), a.tier()));
        assert_eq!(precedes(a.tier(), a.tier()), oracle_precedes(a, a));
        for b in CLASSES {
            assert_eq!(precedes(a.tier(), b.tier()), oracle_precedes(a, b), "{a:?} {b:?}");
            if precedes(a.tier(), b.tier()) {
                assert!(!precedes(b.tier(), a.tier()));
            }
            for c in CLASSES {
                if precedes(a.tier(), b.tier()) && precedes(b.tier(), c.tier()) {
                    assert!(precedes(a.tier(), c.tier()));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn predecessors_follow_the_order(seed in any::<u64>()) {
        let task = random_task(&mut rng(seed));
        for r in task.requirements() {
            let preds: Vec<&str> = task.predecessors(&r.name).unwrap().iter().map(|p| p.name.as_str()).collect();
            let expected: Vec<&str> = task
                .requirements()
                .iter()
                .filter(|q| oracle_precedes(q.class, r.class))
                .map(|q| q.name.as_str())
                .collect();
            prop_assert_eq!(preds, expected);
        }
    }
}

// ---- semantics ------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn quantifiers_nest(f in signal_strategy()) {
        let ensure = holds(RequirementClass::Safety, &f);
        let conquer = holds(RequirementClass::TargetConquer, &f);
        let achieve = holds(RequirementClass::TargetAchieve, &f);
        prop_assert!(!ensure || conquer);
        prop_assert!(!conquer || achieve);
        prop_assert!(holds(RequirementClass::Comfort, &f));
        prop_assert_eq!(conquer, *f.last().unwrap() >= 0.0);
        for class in CLASSES {
            prop_assert_eq!(holds(class, &f), oracle_sigma(class, &f));
        }
    }

    #[test]
    fn robustness_sign_matches_satisfaction(f in signal_strategy()) {
        for class in [RequirementClass::Safety, RequirementClass::TargetAchieve, RequirementClass::TargetConquer] {
            let rho = robustness_of(class, &f, ComfortRobustness::Min).unwrap();
            let sat = holds(class, &f);
            if rho > 0.0 { prop_assert!(sat); }
            if rho < 0.0 { prop_assert!(!sat); }
        }
        let avg = average_satisfaction(&f).unwrap();
        prop_assert!((0.0..=1.0).contains(&avg));
        if holds(RequirementClass::Safety, &f) {
            prop_assert_eq!(avg, 1.0);
        }
    }
}

#[test]
fn bundled_crash_trace_violates_safety() {
    let task = load_task(bundled::SAFE_DRIVING).unwrap();
    let trace = Trace::read_jsonl(bundled::SAFE_DRIVING_CRASH_TRACE.as_bytes(), None).unwrap();
    let bound = trace.bind_task(&task).unwrap();
    assert_eq!(bound.termination(), Termination::SafetyViolation);
    assert!(!sigma_task(&task, &bound));
    assert!(task.safety().all(|r| !sigma(r, &bound)));
    assert!(reqshape::pam(&task, &bound).f < 1.0);
}

#[test]
fn bundled_grid_trace_potentials() {
    let task = load_task(bundled::GRIDDRIVE).unwrap();
    let trace = Trace::read_jsonl(bundled::GRID_TRACE.as_bytes(), None).unwrap();
    let bound = trace.bind_task(&task).unwrap();
    let values = bound.values();
    for v in values {
        assert!((potential(&task, v) - oracle_potential(&task, v)).abs() < 1e-12);
    }
    // standing still at the start: safe, no progress, too slow
    assert_eq!(potential(&task, &values[0]), 1.0);
    // at the finish at cruising speed every requirement is met
    assert_eq!(potential(&task, values.last().unwrap()), 4.0);
    assert!(sigma_task(&task, &bound));
    assert_eq!(reqshape::pam(&task, &bound).category, Category::TaskSatisfied);
}

#[test]
fn bhnr_matches_a_naive_window() {
    let task = load_task(bundled::SAFE_DRIVING).unwrap();
    let mut r = rng(11);
    let values = random_values(&mut r, &task, 40);
    let series = bhnr_series(&task, &values, 10, ComfortRobustness::Min).unwrap();
    for (t, got) in series.iter().enumerate() {
        let lo = t.saturating_sub(9);
        let mut expected = f64::INFINITY;
        for req in task.requirements() {
            let sig: Vec<f64> = values[lo..=t].iter().map(|v| req.signal(v)).collect();
            let rho = match req.class {
                RequirementClass::TargetAchieve => sig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                RequirementClass::TargetConquer => (0..sig.len())
                    .map(|i| sig[i..].iter().copied().fold(f64::INFINITY, f64::min))
                    .fold(f64::NEG_INFINITY, f64::max),
                _ => sig.iter().copied().fold(f64::INFINITY, f64::min),
            };
            expected = expected.min(rho);
        }
        assert_eq!(*got, expected, "step {t}");
    }
}

// ---- potential ------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn potential_is_bounded_and_gated(seed in any::<u64>()) {
        let mut r = rng(seed);
        let task = random_task(&mut r);
        let s = random_state(&mut r, &task);
        let psi = potential(&task, &s);
        prop_assert!(psi >= 0.0 && psi <= task.len() as f64);
        prop_assert!((psi - oracle_potential(&task, &s)).abs() < 1e-12);
        let scores: Vec<f64> = task.requirements().iter().map(|q| score(q, &s)).collect();
        if let Some(k) = task.requirements().iter().position(|q| q.tier() == Tier::Safety) {
            let mut gated = scores.clone();
            gated[k] = 0.0;
            let safety_sum: f64 = task
                .requirements()
                .iter()
                .zip(&gated)
                .filter(|(q, _)| q.tier() == Tier::Safety)
                .map(|(_, v)| v)
                .sum();
            prop_assert_eq!(potential_from_scores(&task, &gated), safety_sum);
        }
    }

    #[test]
    fn potential_is_monotone_in_scores(seed in any::<u64>(), bump in 0.0..1.0f64) {
        let mut r = rng(seed);
        let task = random_task(&mut r);
        let s = random_state(&mut r, &task);
        let scores: Vec<f64> = task.requirements().iter().map(|q| score(q, &s)).collect();
        let k = r.gen_range(0..scores.len());
        let mut raised = scores.clone();
        raised[k] = if task.requirements()[k].tier() == Tier::Safety {
            1.0
        } else {
            scores[k] + (1.0 - scores[k]) * bump
        };
        prop_assert!(potential_from_scores(&task, &raised) >= potential_from_scores(&task, &scores) - 1e-12);
    }

    #[test]
    fn shaping_telescopes(seed in any::<u64>(), len in 2usize..40) {
        let mut r = rng(seed);
        let task = random_task(&mut r);
        let values = random_values(&mut r, &task, len);
        let mut session = RewardVariant::hprs().session(&task).unwrap();
        session.reset(&values[0]);
        let mut shaped = 0.0;
        let mut base = 0.0;
        for (i, v) in values.iter().enumerate().skip(1) {
            shaped += session.step(v, false, i + 1 == len);
            base += base_reward(&task, v);
        }
        let ends = potential(&task, &values[len - 1]) - potential(&task, &values[0]);
        prop_assert!((shaped - base - ends).abs() < 1e-9);
    }

    #[test]
    fn conquer_base_reward_counts_the_satisfied_suffix(k in 0usize..10, prefix in 1usize..10) {
        let task = load_task(bundled::POINTMASS).unwrap();
        // x y vx vy d_goal d_obstacle
        let far = vec![0.0, -0.8, 0.0, 0.0, 1.6, 0.5];
        let settled = vec![0.0, 0.8, 0.0, 0.0, 0.05, 0.5];
        let mut values = vec![far; prefix];
        values.extend(std::iter::repeat(settled).take(k));
        let total: f64 = values.iter().skip(1).map(|v| base_reward(&task, v)).sum();
        prop_assert_eq!(total, k as f64);
        let bound = BoundTrace::from_values(values, Termination::Timeout).unwrap();
        prop_assert_eq!(sigma(task.target(), &bound), k > 0);
    }
}

// ---- assessment -----------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pam_thresholds_follow_satisfaction(seed in any::<u64>(), len in 1usize..20) {
        let mut r = rng(seed);
        let task = random_task(&mut r);
        let values = random_values(&mut r, &task, len);
        let bound = BoundTrace::from_values(values.clone(), Termination::Running).unwrap();
        let report = reqshape::pam(&task, &bound);
        prop_assert_eq!(report.f >= 1.0, report.sat_safety);
        prop_assert_eq!(report.f >= 1.5, report.sat_safety && report.sat_target);
        prop_assert!(report.f <= MAX_F);
        prop_assert!((report.f - oracle_pam(&task, &values)).abs() < 1e-12);
    }

    #[test]
    fn pam_is_monotone(s in any::<bool>(), t in any::<bool>(), c in 0.0..=1.0f64, d in 0.0..=1.0f64) {
        prop_assert!(pam_value(true, t, c) > pam_value(false, t, c));
        prop_assert!(pam_value(s, true, c) > pam_value(s, false, c));
        let (lo, hi) = if c <= d { (c, d) } else { (d, c) };
        prop_assert!(pam_value(s, t, lo) <= pam_value(s, t, hi));
    }

    #[test]
    fn success_rates_are_nested(flags in prop::collection::vec((any::<bool>(), any::<bool>(), 0.0..=1.0f64), 1..40)) {
        let reports: Vec<AssessmentReport> = flags
            .iter()
            .map(|&(s, t, c)| {
                let f = pam_value(s, t, c);
                AssessmentReport { f, sat_safety: s, sat_target: t, comfort_avg: c, category: Category::from_f(f) }
            })
            .collect();
        let rates = aggregate(&reports, DEFAULT_COMFORT_CUTOFF).unwrap();
        prop_assert!(rates.s >= rates.s_t && rates.s_t >= rates.s_t_c);
        // raising the cutoff can only lower the comfortable fraction
        let strict = aggregate(&reports, 0.9).unwrap();
        prop_assert!(strict.s_t_c <= rates.s_t_c);
    }
}

// ---- environments and episodes --------------------------------------------

#[test]
fn resets_are_deterministic_and_states_stay_in_the_box() {
    let grid_task = load_task(bundled::GRIDDRIVE).unwrap();
    let pm_task = load_task(bundled::POINTMASS).unwrap();
    for seed in 0..100u64 {
        let mut grid = GridDriveEnv::parse(bundled::GRID_TRACK).unwrap();
        assert_eq!(grid.reset(seed), grid.reset(seed));
        let mut pm = PointMassEnv::new(Default::default());
        assert_eq!(pm.reset(seed), pm.reset(seed));

        let mut r = rng(seed);
        for (env, task) in [
            (&mut grid as &mut dyn Environment, &grid_task),
            (&mut pm as &mut dyn Environment, &pm_task),
        ] {
            let ep = random_episode(env, task, seed, &mut r).unwrap();
            assert_eq!(ep.bound.clamped(), 0, "{} left its box", env.name());
            // exactly one terminal verdict, on the last state
            assert!(ep.bound.termination().is_terminal());
            assert!(ep.trace.len() <= env.horizon() + 1);
            let ends_unsafe = ep.bound.termination() == Termination::SafetyViolation;
            let safety_ok = task.safety().all(|q| sigma(q, &ep.bound));
            assert_eq!(ends_unsafe, !safety_ok);
            if ep.bound.termination() == Termination::Timeout {
                assert_eq!(ep.trace.len(), env.horizon() + 1);
            }
        }
    }
}

#[test]
fn sampled_transitions_match_the_exact_model() {
    let mut env = GridDriveEnv::parse(bundled::GRID_CORNER).unwrap();
    let mdp = env.transition_matrix();
    let start = env.reset_index(0);
    let per_action = 20_000;
    for a in 0..env.n_actions() {
        let mut counts = vec![0usize; mdp.n_states];
        for k in 0..per_action {
            env.reset_index(1_000_000 * a as u64 + k as u64);
            counts[env.step_index(a).unwrap()] += 1;
        }
        let row = mdp.row(start, a);
        for (t, &n) in counts.iter().enumerate() {
            let p = row[t];
            let freq = n as f64 / per_action as f64;
            let sd = (p * (1.0 - p) / per_action as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * sd + 1e-12,
                "action {a} successor {t}: {freq} vs {p}"
            );
        }
    }
}

// ---- solvers --------------------------------------------------------------

#[test]
fn value_iteration_residuals_contract() {
    let task = load_task(bundled::GRIDDRIVE).unwrap();
    for (name, text) in bundled::SMALL_GRIDS {
        let mdp = GridDriveEnv::parse(text).unwrap().transition_matrix();
        let values = mdp.bind(&task).unwrap();
        let vi = value_iteration(&mdp, |_, _, t| base_reward(&task, &values[t]), 0.9, 1e-10).unwrap();
        for w in vi.residuals.windows(2) {
            assert!(w[1] <= w[0] * 0.9 + 1e-12, "{name}: {} then {}", w[0], w[1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shaping_preserves_optimal_actions(slip in 0.0..0.5f64, gamma in 0.8..0.99f64, layout in 0usize..3) {
        let task = load_task(bundled::GRIDDRIVE).unwrap();
        let mut env = GridDriveEnv::parse(bundled::SMALL_GRIDS[layout].1).unwrap();
        env.set_slip(slip);
        let mdp = env.transition_matrix();
        let values = mdp.bind(&task).unwrap();
        let psi: Vec<f64> = (0..mdp.n_states)
            .map(|s| if mdp.terminal[s] { 0.0 } else { potential(&task, &values[s]) })
            .collect();
        let plain = value_iteration(&mdp, |_, _, t| base_reward(&task, &values[t]), gamma, 1e-11).unwrap();
        let shaped = value_iteration(
            &mdp,
            |s, _, t| base_reward(&task, &values[t]) + gamma * psi[t] - psi[s],
            gamma,
            1e-11,
        )
        .unwrap();
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                prop_assert!((shaped.policy.q[s][a] - (plain.policy.q[s][a] - psi[s])).abs() < 1e-6);
            }
            prop_assert_eq!(
                argmax_set(&plain.policy.q[s], TIE_TOLERANCE),
                argmax_set(&shaped.policy.q[s], TIE_TOLERANCE)
            );
        }
    }
}
