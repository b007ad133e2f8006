use ehrelay::analysis::majorizes;
use ehrelay::capacity::ergodic_capacity;
use ehrelay::link::{cdf_gamma_rd, cdf_gamma_sr, outage_probability_auto, EffectiveParams};
use ehrelay::mixture::{characteristic_decomposition, mixture_cdf, DEFAULT_MERGE_TOLERANCE};
use ehrelay::special::QuadratureSettings;
use proptest::prelude::*;

/// Means that are either well separated or exactly repeated.
fn means(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (0.05f64..5.0, prop::collection::vec((1.25f64..4.0, 1usize..=3), 1..=max_len)).prop_map(|(base, levels)| {
        let mut out = Vec::new();
        let mut m = base;
        for (step, reps) in levels {
            for _ in 0..reps {
                out.push(m);
            }
            m *= step;
        }
        out
    })
}

fn link() -> impl Strategy<Value = (f64, f64, Vec<f64>, f64)> {
    (1.0f64..500.0, 0.05f64..20.0, means(3), 0.1f64..20.0).prop_map(|(gh, gg, mu, g)| {
        // Keep every interferer mean away from the first-hop mean.
        let mu = mu.into_iter().map(|m| m.min(0.5 * gh)).collect::<Vec<_>>();
        (gh, gg, mu, g)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_sum_to_one(m in means(4)) {
        let d = characteristic_decomposition(&m, DEFAULT_MERGE_TOLERANCE).unwrap();
        prop_assert!((d.coefficient_sum() - 1.0).abs() < 1e-9);
        let total: f64 = m.iter().sum();
        prop_assert!((d.total_mean() - total).abs() < 1e-9 * total);
    }

    #[test]
    fn mixture_cdf_is_a_cdf(m in means(4), y in 0.0f64..200.0, dy in 0.0f64..50.0) {
        let d = characteristic_decomposition(&m, DEFAULT_MERGE_TOLERANCE).unwrap();
        let (a, b) = (mixture_cdf(&d, y), mixture_cdf(&d, y + dy));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn order_of_interferers_is_irrelevant((gh, gg, mu, g) in link(), seed in any::<u64>()) {
        let mut shuffled = mu.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed as usize).wrapping_add(i * 7919) % (i + 1));
        }
        let p = EffectiveParams::new(gh, gg, &mu).unwrap();
        let s = EffectiveParams::new(gh, gg, &shuffled).unwrap();
        prop_assert!((cdf_gamma_sr(&p, g) - cdf_gamma_sr(&s, g)).abs() < 1e-12);
        prop_assert!((cdf_gamma_rd(&p, g) - cdf_gamma_rd(&s, g)).abs() < 1e-10);
        let (a, _, _) = outage_probability_auto(&p, g).unwrap();
        let (b, _, _) = outage_probability_auto(&s, g).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn outage_grows_with_threshold((gh, gg, mu, g) in link(), factor in 1.0f64..3.0) {
        let p = EffectiveParams::new(gh, gg, &mu).unwrap();
        let (low, _, _) = outage_probability_auto(&p, g).unwrap();
        let (high, _, _) = outage_probability_auto(&p, g * factor).unwrap();
        prop_assert!((0.0..=1.0).contains(&low));
        prop_assert!(high >= low - 1e-9);
        // Outage is at least as likely as either hop failing.
        prop_assert!(low >= cdf_gamma_sr(&p, g) - 1e-9);
    }

    #[test]
    fn hop_cdfs_are_monotone((gh, gg, mu, g) in link(), dg in 0.0f64..30.0) {
        let p = EffectiveParams::new(gh, gg, &mu).unwrap();
        prop_assert!(cdf_gamma_sr(&p, g + dg) >= cdf_gamma_sr(&p, g) - 1e-12);
        prop_assert!(cdf_gamma_rd(&p, g + dg) >= cdf_gamma_rd(&p, g) - 1e-10);
    }

    #[test]
    fn majorization_is_a_preorder(
        x in prop::collection::vec(0.0f64..10.0, 2..6),
        t in 0.0f64..1.0,
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        prop_assume!(x.iter().sum::<f64>() > 0.0);
        let n = x.len();
        let mut reversed = x.clone();
        reversed.reverse();
        prop_assert!(majorizes(&x, &x).unwrap());
        prop_assert!(majorizes(&x, &reversed).unwrap() && majorizes(&reversed, &x).unwrap());
        // A transfer from a larger to a smaller entry yields a majorized vector.
        let (a, b) = (i.index(n), j.index(n));
        let (hi, lo) = if x[a] >= x[b] { (a, b) } else { (b, a) };
        let mut y = x.clone();
        let moved = 0.5 * t * (x[hi] - x[lo]);
        y[hi] -= moved;
        y[lo] += moved;
        prop_assert!(majorizes(&x, &y).unwrap());
        let mean = x.iter().sum::<f64>() / n as f64;
        let flat = vec![mean; n];
        prop_assert!(majorizes(&y, &flat).unwrap());
        prop_assert!(majorizes(&x, &flat).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    // With a second hop 10^4 times stronger it almost never limits the link,
    // and interference only degrades the first hop.
    #[test]
    fn capacity_falls_with_interference_when_second_hop_is_strong(
        gh in 2.0f64..200.0,
        mu in prop::collection::vec(0.1f64..5.0, 1..=2),
        k in any::<prop::sample::Index>(),
    ) {
        let mu: Vec<f64> = mu.iter().enumerate().map(|(i, m)| m * (1.0 + 0.5 * i as f64)).collect();
        let mut bumped = mu.clone();
        bumped[k.index(mu.len())] *= 1.2;
        let q = QuadratureSettings::default();
        let c0 = ergodic_capacity(&EffectiveParams::new(gh, 1e4, &mu).unwrap(), &q).unwrap();
        let c1 = ergodic_capacity(&EffectiveParams::new(gh, 1e4, &bumped).unwrap(), &q).unwrap();
        prop_assert!(c1.value <= c0.value + c0.est_error + c1.est_error, "{} -> {}", c0.value, c1.value);
    }
}

#[test]
fn majorization_rejects_mismatched_input() {
    assert!(majorizes(&[1.0, 0.0], &[1.0]).is_err());
    assert!(majorizes(&[1.0, -1.0], &[0.0, 0.0]).is_err());
    assert!(!majorizes(&[1.0, 1.0], &[3.0, 0.0]).unwrap());
    assert!(!majorizes(&[2.0, 0.0], &[1.5, 0.0]).unwrap());
}
