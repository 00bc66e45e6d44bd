//! What the dialogue manager hears: one user turn passed through the
//! simulated error channel at several semantic error rates.
//!
//! ```text
//! cargo run -p multidm --example noisy_channel
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use multidm::acts::{format_acts, CommFunction, DialogueAct, UserInputEvent};
use multidm::channel::{corrupt_user_act, ErrorConfig};
use multidm::domain::Database;

fn main() {
    let db = Database::restaurants();
    let said =
        vec![DialogueAct::bare(CommFunction::Greet), DialogueAct::inform([("cuisine", "thai"), ("area", "centre")])];
    println!("user said: {}\n", format_acts(&said));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for e in [0.0, 0.3, 0.5] {
        println!("error rate {e}:");
        let cfg = ErrorConfig::with_error_rate(e);
        for _ in 0..4 {
            match corrupt_user_act(&said, &cfg, &db.ontology, &mut rng) {
                UserInputEvent::NBest(list) => {
                    for (i, h) in list.hypotheses().iter().enumerate() {
                        let lead = if i == 0 { "  n-best" } else { "        " };
                        println!("{lead} {:.3}  {}", h.confidence, format_acts(&h.acts));
                    }
                }
                problem => println!("  {}", problem.kind()),
            }
        }
        println!();
    }
}
