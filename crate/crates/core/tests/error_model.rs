use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use multidm::acts::{acts_semantically_equal, DialogueAct, UserInputEvent};
use multidm::channel::{corrupt_user_act, dirichlet_draw, sample_confidences, ErrorConfig};
use multidm::domain::{sample_task, Database};

const SAMPLES: usize = 100_000;

fn user_turn(db: &Database, rng: &mut ChaCha8Rng) -> Vec<DialogueAct> {
    let task = sample_task(db, rng);
    let (slot, value) = task.constraints.iter().next().unwrap();
    vec![DialogueAct::inform([(slot.clone(), value.clone())])]
}

#[test]
fn event_categories_follow_the_processing_problem_rates() {
    let db = Database::restaurants();
    let cfg = ErrorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let acts = user_turn(&db, &mut rng);
    let mut counts = [0usize; 3];
    for _ in 0..SAMPLES {
        let i = match corrupt_user_act(&acts, &cfg, &db.ontology, &mut rng) {
            UserInputEvent::PerceptionProblem => 0,
            UserInputEvent::InterpretationProblem => 1,
            UserInputEvent::NBest(_) => 2,
        };
        counts[i] += 1;
    }
    for (count, expected) in counts.iter().zip([0.10, 0.09, 0.81]) {
        let freq = *count as f64 / SAMPLES as f64;
        assert!((freq - expected).abs() < 0.005, "{freq} vs {expected}");
    }
}

#[test]
fn top_hypothesis_is_correct_with_probability_one_minus_e() {
    let db = Database::restaurants();
    for e in [0.2, 0.3] {
        let cfg = ErrorConfig { p_perception: 0.0, p_interpretation: 0.0, ..ErrorConfig::with_error_rate(e) };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut correct = 0;
        for _ in 0..SAMPLES {
            let acts = user_turn(&db, &mut rng);
            let UserInputEvent::NBest(list) = corrupt_user_act(&acts, &cfg, &db.ontology, &mut rng) else {
                panic!("problems are disabled");
            };
            correct += acts_semantically_equal(&list.top().unwrap().acts, &acts) as usize;
        }
        let rate = correct as f64 / SAMPLES as f64;
        assert!((rate - (1.0 - e)).abs() < 0.02, "e = {e}: top correct {rate}");
    }
}

#[test]
fn nbest_lists_are_distinct_sorted_and_normalised() {
    let db = Database::hotels();
    let cfg = ErrorConfig::with_error_rate(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5000 {
        let acts = user_turn(&db, &mut rng);
        if let UserInputEvent::NBest(list) = corrupt_user_act(&acts, &cfg, &db.ontology, &mut rng) {
            let h = list.hypotheses();
            assert!((1..=3).contains(&h.len()));
            assert!((h.iter().map(|x| x.confidence).sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(h.windows(2).all(|w| w[0].confidence >= w[1].confidence));
            for (i, a) in h.iter().enumerate() {
                assert!(h[i + 1..].iter().all(|b| !acts_semantically_equal(&a.acts, &b.acts)));
            }
        }
    }
}

#[test]
fn dirichlet_means_match_the_concentration_ratios() {
    let alpha = [8.0, 3.0, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sums = [0.0; 3];
    for _ in 0..SAMPLES {
        let d = dirichlet_draw(&alpha, &mut rng);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9 && d.iter().all(|&x| x > 0.0));
        for (s, x) in sums.iter_mut().zip(d) {
            *s += x;
        }
    }
    for (s, a) in sums.iter().zip(alpha) {
        let mean = s / SAMPLES as f64;
        assert!((mean - a / 12.0).abs() < 0.005, "{mean} vs {}", a / 12.0);
    }
}

#[test]
fn confidences_for_every_list_length() {
    let cfg = ErrorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 1..=3 {
        for _ in 0..1000 {
            let c = sample_confidences(k, &cfg, &mut rng);
            assert_eq!(c.len(), k);
            assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(c.windows(2).all(|w| w[0] >= w[1]) && c.iter().all(|&x| x > 0.0));
        }
    }
}
