//! Typed dialogues through the session service: a trained manager answers
//! a scripted cooperative user, and the first transcript is printed.
//!
//! ```text
//! cargo run --release -p multidm --example text_dialogue -- [training dialogues] [sessions]
//! ```

use multidm::domain::{sample_task, Database};
use multidm::service::{format_transcript, run_scripted_session, DialogueService, ServiceConfig};
use multidm::simulator::SimConfig;
use multidm::training::{episode_rng, train_run, ExperimentConfig, RegimeKind, StreamPurpose};

fn main() -> multidm::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let cfg = ExperimentConfig { dialogues: args.first().copied().unwrap_or(60_000), ..ExperimentConfig::default() };
    let sessions = args.get(1).copied().unwrap_or(200);
    let db = Database::restaurants();
    let trained = train_run(RegimeKind::MultiDim, &db, None, &cfg, 0)?;
    let service = DialogueService::new(db.clone(), vec![trained.manager], ServiceConfig::default())?;

    let mut successes = 0;
    for i in 0..sessions {
        let mut rng = episode_rng(7, StreamPurpose::Evaluation, i as u64);
        let task = sample_task(&db, &mut rng);
        let (log, metrics) = run_scripted_session(&service, &task, &SimConfig::default(), &mut rng)?;
        successes += metrics.objective_success() as usize;
        if i == 0 {
            println!("{}\n{}", log.task_text, format_transcript(&log.turns));
        }
    }
    println!("objective success: {successes}/{sessions}");
    Ok(())
}
