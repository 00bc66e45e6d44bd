//! Trains a small multi-dimensional manager and prints annotated simulated
//! dialogues: the user's true acts, what reached the manager, and the
//! combined system response with per-turn reward.
//!
//! ```text
//! cargo run --release -p multidm --example simulated_dialogue -- [training dialogues] [dialogues to show]
//! ```

use multidm::acts::format_acts;
use multidm::domain::Database;
use multidm::training::{
    episode_rng, initial_manager, simulate_episode, train_manager, ExperimentConfig, RegimeKind, StreamPurpose,
};

fn main() -> multidm::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n_train = args.next().unwrap_or(60_000);
    let n_show = args.next().unwrap_or(3);
    let cfg = ExperimentConfig::default();
    let db = Database::restaurants();
    let env = cfg.target_environment();

    let mut manager = initial_manager(RegimeKind::MultiDim, &db, None, &cfg.learning)?;
    train_manager(&mut manager, &db, &env, &cfg.learning, n_train, cfg.seed, StreamPurpose::TargetTraining)?;

    for i in 0..n_show {
        let mut rng = episode_rng(cfg.seed, StreamPurpose::Evaluation, i as u64);
        let r = simulate_episode(&manager, &db, &env, 0.0, true, &mut rng);
        println!("task: {:?} requests: {:?}", r.task.constraints, r.task.requests);
        for (t, turn) in r.trace.iter().enumerate() {
            println!("  {:>2} usr {}", t + 1, format_acts(&turn.user_acts));
            if turn.event != "nbest" {
                println!("     ({})", turn.event);
            }
            println!("     sys {}   [{:+}]", format_acts(&turn.system_acts), turn.reward.total());
        }
        println!("  success={} turns={} reward={}\n", r.success, r.turns, r.total_reward);
    }
    Ok(())
}
