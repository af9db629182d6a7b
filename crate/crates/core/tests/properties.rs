use occam_hammer::bounds::{
    binomial_cdf, binomial_tail_inverse, hammer_classifier_budget, kl_bernoulli_plus, kl_upper_inverse,
};
use occam_hammer::multitest::{
    bh_baseline, brute_force_sup, by_baseline, step_up, weighted_bonferroni, HypothesisPool,
};
use occam_hammer::priors::{level_function, ComplexityPrior, ContinuousPrior, SizePrior};
use proptest::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

fn p_value() -> impl Strategy<Value = f64> {
    // mass on exact ties and on small values, where the step-up is decided
    prop_oneof![
        3 => 0.0..1.0f64,
        2 => 0.0..0.02f64,
        1 => prop::sample::select(vec![0.0, 0.001, 0.005, 0.01, 0.05, 1.0]),
    ]
}

fn pool(max_m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(p_value(), 1..=max_m)
}

fn weights(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.01..1.0f64], m)
        .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 0.0)
}

#[derive(Debug, Clone)]
enum SizeChoice {
    By,
    Uniform,
    Dirac(usize),
    Custom(Vec<f64>),
}

fn size_prior(m: usize) -> impl Strategy<Value = SizeChoice> {
    prop_oneof![
        Just(SizeChoice::By),
        Just(SizeChoice::Uniform),
        (1..=m).prop_map(SizeChoice::Dirac),
        weights(m).prop_map(SizeChoice::Custom),
    ]
}

fn build_size(choice: &SizeChoice, m: usize) -> SizePrior<f64> {
    match choice {
        SizeChoice::By => SizePrior::benjamini_yekutieli(m),
        SizeChoice::Uniform => SizePrior::uniform(m),
        SizeChoice::Dirac(a) => SizePrior::dirac(*a, m),
        SizeChoice::Custom(w) => SizePrior::custom(w),
    }
    .unwrap()
}

/// p-values, complexity weights and a size prior of matching dimension.
fn instance(max_m: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, SizeChoice, f64)> {
    pool(max_m).prop_flat_map(|p| {
        let m = p.len();
        (Just(p), weights(m), size_prior(m), 0.0..1.0f64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn step_up_equals_brute_force((p, w, size, alpha) in instance(12)) {
        let m = p.len();
        let pool = HypothesisPool::from_p_values(p).unwrap();
        let pi = ComplexityPrior::from_weights(&w).unwrap();
        let gamma = build_size(&size, m);
        let fast = step_up(&pool, &pi, &gamma, alpha).unwrap();
        let slow = brute_force_sup(&pool, &pi, &gamma, alpha).unwrap();
        prop_assert_eq!(&fast.rejected, &slow.rejected);
        prop_assert_eq!(fast.rejected.len(), fast.k_star);
    }

    #[test]
    fn step_up_equals_by((p, alpha) in (pool(200), 0.0..1.0f64)) {
        let m = p.len();
        let pool = HypothesisPool::from_p_values(p).unwrap();
        let pi = ComplexityPrior::uniform(m).unwrap();
        let gamma = SizePrior::benjamini_yekutieli(m).unwrap();
        let ours = step_up(&pool, &pi, &gamma, alpha).unwrap();
        let by = by_baseline(&pool, alpha).unwrap();
        prop_assert_eq!(ours.rejected, by.rejected);
    }

    #[test]
    fn fixpoint_holds((p, w, size, alpha) in instance(60)) {
        let m = p.len();
        let pool = HypothesisPool::from_p_values(p.clone()).unwrap();
        let pi = ComplexityPrior::from_weights(&w).unwrap();
        let gamma = build_size(&size, m);
        let r = step_up(&pool, &pi, &gamma, alpha).unwrap();
        // |S_{k*}| = k*, and no larger k has |S_k| >= k
        let s = |k: usize| {
            (0..m)
                .filter(|&h| {
                    let lvl = alpha * pi.weight(h) * gamma.beta(k);
                    lvl > 0.0 && p[h] <= lvl
                })
                .count()
        };
        prop_assert_eq!(s(r.k_star), r.k_star);
        for k in r.k_star + 1..=m {
            prop_assert!(s(k) < k);
        }
    }

    #[test]
    fn lowering_a_p_value_never_drops_rejections(
        (p, w, size, alpha, pick, shrink) in instance(40)
            .prop_flat_map(|(p, w, s, a)| {
                let m = p.len();
                (Just(p), Just(w), Just(s), Just(a), 0..m, 0.0..1.0f64)
            })
    ) {
        let m = p.len();
        let pool = HypothesisPool::from_p_values(p.clone()).unwrap();
        let pi = ComplexityPrior::from_weights(&w).unwrap();
        let gamma = build_size(&size, m);
        let before = step_up(&pool, &pi, &gamma, alpha).unwrap();
        let lowered = pool.with_p_value(pick, p[pick] * shrink).unwrap();
        let after = step_up(&lowered, &pi, &gamma, alpha).unwrap();
        for h in &before.rejected {
            prop_assert!(after.is_rejected(*h), "lost {h}");
        }
    }

    #[test]
    fn dirac_one_is_weighted_bonferroni((p, w, _size, alpha) in instance(50)) {
        let m = p.len();
        let pool = HypothesisPool::from_p_values(p).unwrap();
        let pi = ComplexityPrior::from_weights(&w).unwrap();
        let gamma = SizePrior::dirac(1, m).unwrap();
        prop_assert_eq!(
            step_up(&pool, &pi, &gamma, alpha).unwrap().rejected,
            weighted_bonferroni(&pool, &pi, alpha).unwrap().rejected
        );
    }

    #[test]
    fn bh_contains_by((p, alpha) in (pool(150), 0.0..1.0f64)) {
        let pool = HypothesisPool::from_p_values(p).unwrap();
        let bh = bh_baseline(&pool, alpha).unwrap();
        let by = by_baseline(&pool, alpha).unwrap();
        for h in &by.rejected {
            prop_assert!(bh.is_rejected(*h));
        }
    }

    #[test]
    fn single_precision_matches_brute_force((p, w, size, alpha) in instance(10)) {
        let m = p.len();
        let to32 = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
        let pool = HypothesisPool::from_p_values(to32(&p)).unwrap();
        let pi = ComplexityPrior::from_weights(&to32(&w)).unwrap();
        let gamma: SizePrior<f32> = match &size {
            SizeChoice::By => SizePrior::benjamini_yekutieli(m),
            SizeChoice::Uniform => SizePrior::uniform(m),
            SizeChoice::Dirac(a) => SizePrior::dirac(*a, m),
            SizeChoice::Custom(c) => SizePrior::custom(&to32(c)),
        }
        .unwrap();
        let alpha = alpha as f32;
        prop_assert_eq!(
            step_up(&pool, &pi, &gamma, alpha).unwrap().rejected,
            brute_force_sup(&pool, &pi, &gamma, alpha).unwrap().rejected
        );
    }

    #[test]
    fn size_prior_partial_sums((size, m) in (1usize..300).prop_flat_map(|m| (size_prior(m), Just(m)))) {
        let gamma = build_size(&size, m);
        let beta = gamma.beta_partial();
        prop_assert_eq!(beta.len(), m);
        for k in 1..=m {
            prop_assert!(beta[k - 1] <= k as f64);
            if k > 1 {
                prop_assert!(beta[k - 1] >= beta[k - 2]);
            }
        }
        prop_assert_eq!(gamma.beta(0), 0.0);
    }

    #[test]
    fn continuous_prior_shape(n in 2u32..40, xs in prop::collection::vec(0.0..1.0f64, 100)) {
        for nu in [ContinuousPrior::power(n).unwrap(), ContinuousPrior::uniform01()] {
            prop_assert_eq!(nu.beta(0.0), 0.0);
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            let mut last = 0.0;
            for &x in &sorted {
                let b = nu.beta(x);
                prop_assert!(b >= last);
                prop_assert!(b <= x + 1e-15);
                last = b;
            }
        }
    }

    #[test]
    fn beta_inverse_roundtrip(n in 2u32..40, xs in prop::collection::vec(1e-6..1.0f64, 100)) {
        let nu = ContinuousPrior::power(n).unwrap();
        for &x in &xs {
            let back = nu.beta_inverse(nu.beta(x)).unwrap();
            prop_assert!((back - x).abs() < 1e-10, "x={x} back={back}");
        }
    }

    #[test]
    fn level_function_monotone(
        d in 0.0..1.0f64, dd in 0.0..1.0f64,
        pi in 0.0..1.0f64, dpi in 0.0..1.0f64,
        b in 0.0..50.0f64, db in 0.0..50.0f64,
    ) {
        let base = level_function(d, pi, b);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(level_function((d + dd).min(1.0), pi, b) >= base);
        prop_assert!(level_function(d, (pi + dpi).min(1.0), b) >= base);
        prop_assert!(level_function(d, pi, b + db) >= base);
    }

    #[test]
    fn kl_roundtrip(q in 0.0..1.0f64, budget in 0.0..5.0f64) {
        let p = kl_upper_inverse(q, budget).unwrap();
        let d = kl_bernoulli_plus(q, p).unwrap();
        let cap = kl_bernoulli_plus(q, 1.0).unwrap();
        prop_assert!(d <= budget);
        if (d - budget.min(cap)).abs() >= 1e-9 {
            // near p = 1 one ulp of p moves D₊ by more than 1e-9: then p
            // must be the last float inside the budget
            let next = f64::from_bits(p.to_bits() + 1);
            prop_assert!(p < 1.0 && kl_bernoulli_plus(q, next).unwrap() > budget,
                "q={q} B={budget} p={p} d={d}");
        }
    }

    #[test]
    fn kl_nondecreasing_in_p(q in 0.0..1.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p1 = q + (1.0 - q) * lo;
        let p2 = q + (1.0 - q) * hi;
        prop_assert!(kl_bernoulli_plus(q, p1).unwrap() <= kl_bernoulli_plus(q, p2).unwrap());
    }

    #[test]
    fn budget_monotone(n in 2u64..5000, d in 1e-6..1.0f64, dd in 0.0..1.0f64, theta in 0.0..1e6f64) {
        let d2 = (d + dd).min(1.0);
        let base = hammer_classifier_budget(n, d, theta).unwrap();
        prop_assert!(hammer_classifier_budget(n, d2, theta).unwrap() <= base);
        prop_assert!(hammer_classifier_budget(n, d, theta * 2.0 + 1.0).unwrap() >= base);
        let small = theta.min(1.0);
        prop_assert!(
            hammer_classifier_budget(n + 1, d, small).unwrap()
                <= hammer_classifier_budget(n, d, small).unwrap()
        );
    }

    #[test]
    fn binomial_cdf_matches_statrs(n in 1u64..400, k_frac in 0.0..1.0f64, p in 0.0..1.0f64) {
        let k = ((n as f64) * k_frac) as u64;
        let ours = binomial_cdf(k, n, p);
        let theirs = Binomial::new(p, n).unwrap().cdf(k);
        prop_assert!((ours - theirs).abs() < 1e-9, "k={k} n={n} p={p}: {ours} vs {theirs}");
    }
}

#[test]
fn by_kappa_identity() {
    for m in [1usize, 2, 7, 100, 1000, 10_000] {
        let gamma = SizePrior::<f64>::benjamini_yekutieli(m).unwrap();
        let kappa = gamma.kappa().unwrap();
        for k in 1..=m {
            assert!((gamma.beta(k) * kappa - k as f64).abs() < 1e-12 * k as f64);
        }
    }
}

#[test]
fn tail_inverse_dominates_mle() {
    for n in [1u64, 2, 5, 10, 37, 100, 500] {
        for k in 0..=n {
            for delta in [1e-6, 0.001, 0.05, 0.2, 0.5] {
                let p = binomial_tail_inverse(k, n, delta).unwrap();
                assert!(p >= k as f64 / n as f64 - 1e-12, "k={k} n={n} δ={delta}: {p}");
                assert!(p <= 1.0);
            }
        }
    }
}

#[test]
fn alpha_edges() {
    for m in [1usize, 5, 40] {
        let pool = HypothesisPool::from_p_values(vec![0.0; m]).unwrap();
        let pi = ComplexityPrior::uniform(m).unwrap();
        for gamma in [
            SizePrior::benjamini_yekutieli(m).unwrap(),
            SizePrior::uniform(m).unwrap(),
            SizePrior::dirac(m, m).unwrap(),
        ] {
            assert!(step_up(&pool, &pi, &gamma, 0.0).unwrap().rejected.is_empty());
            assert_eq!(step_up(&pool, &pi, &gamma, 1.0).unwrap().rejected.len(), m);
        }
    }
}
