use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multidm_stats::{
    chi_squared_2x2, mann_whitney, pooled_z, tost, yuen_t, Direction, MannWhitneyMethod, TostData, TostSpec,
};

#[test]
fn z_squared_is_chi_squared_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let (a_n, b_n) = (rng.random_range(5..400u64), rng.random_range(5..400u64));
        let (a, b) = (rng.random_range(0..=a_n), rng.random_range(0..=b_n));
        if a + b == 0 || a + b == a_n + b_n {
            continue;
        }
        let chi = chi_squared_2x2(a, a_n, b, b_n).unwrap().statistic;
        let z = pooled_z(a, a_n, b, b_n, 0.0, Direction::Greater, false).unwrap().statistic;
        assert!((z * z - chi).abs() < 1e-9 * chi.max(1.0), "{a}/{a_n} vs {b}/{b_n}: {} vs {chi}", z * z);
    }
}

/// U of `x` by direct pair counting, ties counted as one half.
fn u_by_pairs(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .flat_map(|a| {
            y.iter().map(move |b| {
                if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                }
            })
        })
        .sum()
}

/// Two-sided p from every reassignment of the pooled values to groups.
fn permutation_p(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (n, k) = (pooled.len(), x.len());
    let mean = (x.len() * y.len()) as f64 / 2.0;
    let observed = (u_by_pairs(x, y) - mean).abs();
    let (mut extreme, mut total) = (0u32, 0u32);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let (gx, gy): (Vec<f64>, Vec<f64>) = {
            let mut gx = Vec::new();
            let mut gy = Vec::new();
            for (i, &v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    gx.push(v)
                } else {
                    gy.push(v)
                }
            }
            (gx, gy)
        };
        total += 1;
        if (u_by_pairs(&gx, &gy) - mean).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

#[test]
fn exact_mann_whitney_matches_permutation_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let nx = rng.random_range(1..=8);
        let ny = rng.random_range(1..=8);
        let draw = |rng: &mut ChaCha8Rng, n| (0..n).map(|_| rng.random_range(1..=6) as f64).collect::<Vec<_>>();
        let (x, y) = (draw(&mut rng, nx), draw(&mut rng, ny));
        let mw = mann_whitney(&x, &y).unwrap();
        assert_eq!(mw.method, MannWhitneyMethod::Exact);
        assert!((mw.u - u_by_pairs(&x, &y)).abs() < 1e-12);
        let p = permutation_p(&x, &y);
        assert!((mw.p - p).abs() < 1e-12, "{x:?} {y:?}: {} vs {p}", mw.p);
    }
}

#[test]
fn mann_whitney_small_cases() {
    let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    assert_eq!(r.u, 0.0);
    assert!((r.p - 0.1).abs() < 1e-12);
    let r = mann_whitney(&[3.0, 3.0], &[3.0, 3.0]).unwrap();
    assert_eq!((r.u, r.p), (2.0, 1.0));
}

#[test]
fn yuen_matches_hand_evaluation() {
    let x = [2.0, 4.0, 4.0, 5.0, 3.0, 6.0, 1.0, 5.0, 4.0, 6.0, 2.0, 5.0];
    let y = [3.0, 2.0, 1.0, 4.0, 2.0, 3.0, 5.0, 1.0, 2.0, 3.0, 6.0, 2.0];
    // 20% trimming of 12 values cuts g = 2 from each tail, keeping h = 8.
    // x sorted: 1 2 2 3 4 4 4 5 5 5 6 6; y sorted: 1 1 2 2 2 2 3 3 3 4 5 6.
    let tx: f64 = (2.0 + 3.0 + 4.0 + 4.0 + 4.0 + 5.0 + 5.0 + 5.0) / 8.0;
    let ty: f64 = (2.0 + 2.0 + 2.0 + 2.0 + 3.0 + 3.0 + 3.0 + 4.0) / 8.0;
    let wx = [2.0, 2.0, 2.0, 3.0, 4.0, 4.0, 4.0, 5.0, 5.0, 5.0, 5.0, 5.0];
    let wy = [2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0];
    let var = |w: &[f64]| {
        let m = w.iter().sum::<f64>() / 12.0;
        w.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 11.0
    };
    let dx = 11.0 * var(&wx) / (8.0 * 7.0);
    let dy = 11.0 * var(&wy) / (8.0 * 7.0);
    let t = (tx - ty) / (dx + dy).sqrt();
    let df = (dx + dy).powi(2) / (dx * dx / 7.0 + dy * dy / 7.0);

    let r = yuen_t(&x, &y, 0.2).unwrap();
    assert!((r.trimmed_mean_x - tx).abs() < 1e-12 && (r.trimmed_mean_y - ty).abs() < 1e-12);
    assert!((r.statistic - t).abs() < 1e-9, "{} vs {t}", r.statistic);
    assert!((r.df - df).abs() < 1e-9, "{} vs {df}", r.df);
    assert!((r.p_greater + r.p_less - 1.0).abs() < 1e-12);
}

fn bernoulli(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    (0..n).filter(|_| rng.random::<f64>() < p).count() as u64
}

fn ratings(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Vec<f64> {
    let weights = [0.05, 0.1, 0.15, 0.3, 0.25, 0.15];
    (0..n)
        .map(|_| {
            let mut u = rng.random::<f64>();
            let mut k = 0;
            while k < 5 && u >= weights[k] {
                u -= weights[k];
                k += 1;
            }
            (k + 1) as f64 + shift
        })
        .collect()
}

/// Fraction of 1000 trials at n = 250 per group declaring equivalence for
/// identical success rates `p`, and for rates `p` and `p - 2 eps`.
fn proportion_rates(rng: &mut ChaCha8Rng, p: f64) -> (f64, f64) {
    let n = 250;
    let spec = TostSpec::proportions();
    let (mut found, mut false_equivalence) = (0, 0);
    for _ in 0..1000 {
        let (a, b) = (bernoulli(rng, n, p), bernoulli(rng, n, p));
        found +=
            tost(&TostData::Proportions { a_succ: a, a_n: n, b_succ: b, b_n: n }, &spec).unwrap().equivalent as u32;
        let far = bernoulli(rng, n, p - 2.0 * spec.epsilon);
        let r = tost(&TostData::Proportions { a_succ: a, a_n: n, b_succ: far, b_n: n }, &spec).unwrap();
        false_equivalence += r.equivalent as u32;
    }
    (found as f64 / 1000.0, false_equivalence as f64 / 1000.0)
}

#[test]
fn tost_power_and_size_on_proportions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [0.9, 0.97] {
        let (power, false_rate) = proportion_rates(&mut rng, p);
        assert!(power >= 0.9, "p = {p}: power {power}");
        assert_eq!(false_rate, 0.0);
    }
    // Below 0.9 the binomial variance grows and the continuity-corrected
    // test at n = 250 has analytic power 0.878 at p = 0.87.
    let (power, false_rate) = proportion_rates(&mut rng, 0.87);
    assert!((power - 0.878).abs() < 0.03, "power {power}");
    assert_eq!(false_rate, 0.0);
}

#[test]
fn tost_power_and_size_on_ratings() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 250;
    let spec = TostSpec::likert();
    let (mut found, mut false_equivalence) = (0, 0);
    for _ in 0..1000 {
        let (x, y) = (ratings(&mut rng, n, 0.0), ratings(&mut rng, n, 0.0));
        found += tost(&TostData::Likert { x: x.clone(), y }, &spec).unwrap().equivalent as u32;
        let far = ratings(&mut rng, n, 2.0 * spec.epsilon);
        false_equivalence += tost(&TostData::Likert { x, y: far }, &spec).unwrap().equivalent as u32;
    }
    assert!(found >= 900, "likert power {found}/1000");
    assert_eq!(false_equivalence, 0);
}

#[test]
fn equivalence_is_monotone_in_the_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let margins = [0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5, 0.8, 1.2];
    for _ in 0..1000 {
        let n = rng.random_range(10..300);
        let (pa, pb) = (rng.random::<f64>(), rng.random::<f64>());
        let data = TostData::Proportions {
            a_succ: bernoulli(&mut rng, n, pa),
            a_n: n,
            b_succ: bernoulli(&mut rng, n, pb),
            b_n: n,
        };
        let shift = rng.random_range(-1.5..1.5);
        let likert =
            TostData::Likert { x: ratings(&mut rng, n as usize, 0.0), y: ratings(&mut rng, n as usize, shift) };
        for (data, base) in [(&data, TostSpec::proportions()), (&likert, TostSpec::likert())] {
            let verdicts: Vec<bool> = margins
                .iter()
                .map(|&e| tost(data, &base.with_epsilon(e)).map(|r| r.equivalent).unwrap_or(false))
                .collect();
            assert!(verdicts.windows(2).all(|w| !w[0] || w[1]), "{verdicts:?}");
        }
    }
}

#[test]
fn tost_is_symmetric_in_argument_order() {
    let ab = TostData::Proportions { a_succ: 214, a_n: 245, b_succ: 213, b_n: 248 };
    let ba = TostData::Proportions { a_succ: 213, a_n: 248, b_succ: 214, b_n: 245 };
    let (r, s) = (tost(&ab, &TostSpec::proportions()).unwrap(), tost(&ba, &TostSpec::proportions()).unwrap());
    assert_eq!(r.equivalent, s.equivalent);
    assert!((r.p_lo - s.p_hi).abs() < 1e-12 && (r.p_hi - s.p_lo).abs() < 1e-12);
    assert!(r.equivalent && r.p_tost < 0.01, "p = {}", r.p_tost);
}
