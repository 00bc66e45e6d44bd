//! Trains a source manager on hotels, then the four target regimes on
//! restaurants, and compares them at the target error rate.
//!
//! ```text
//! cargo run --release -p multidm --example transfer_regimes -- [dialogues per run] [evaluation dialogues]
//! ```

use multidm::domain::Database;
use multidm::eval::{eval_simulated, format_summaries};
use multidm::policy::AgentRole;
use multidm::training::{train_run, train_source, ExperimentConfig, RegimeKind};

fn main() -> multidm::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let cfg = ExperimentConfig { dialogues: args.next().unwrap_or(60_000), runs: 1, ..ExperimentConfig::default() };
    let n_eval = args.next().unwrap_or(2000);
    let (target, source) = (Database::restaurants(), Database::hotels());

    let src = train_source(&source, &cfg, 0)?.manager;
    let mut rows = Vec::new();
    for kind in RegimeKind::ALL {
        let run = train_run(kind, &target, kind.uses_transfer().then_some(&src), &cfg, 0)?;
        if kind.uses_transfer() {
            let same = [AgentRole::AutoFeedback, AgentRole::Som]
                .map(|r| run.manager.agent(r).map(|a| &a.policy.weights) == src.agent(r).map(|a| &a.policy.weights));
            println!("{kind}: transferred agents unchanged after training: {same:?}");
        }
        rows.push(eval_simulated(kind.name(), &[run.manager], &target, &cfg.target_environment(), n_eval, cfg.seed).0);
    }
    print!("\n{}", format_summaries(&rows));
    Ok(())
}
