//! Trains the four systems and prints simulated test results at the
//! target error rate.
//!
//! ```text
//! cargo run --release -p multidm --example train_and_evaluate -- [dialogues] [runs] [eval dialogues]
//! ```

use std::time::Instant;

use multidm::domain::Database;
use multidm::eval::{eval_simulated, format_summaries};
use multidm::training::{train_all, ExperimentConfig};

fn main() -> multidm::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let cfg = ExperimentConfig {
        dialogues: args.first().copied().unwrap_or(60_000),
        runs: args.get(1).copied().unwrap_or(5),
        ..ExperimentConfig::default()
    };
    let n_eval = args.get(2).copied().unwrap_or(5_000);
    let target = Database::restaurants();
    let source = Database::hotels();

    let start = Instant::now();
    let out = train_all(&target, &source, &cfg)?;
    println!("trained {} runs x {} dialogues in {:.1?}", cfg.runs, cfg.dialogues, start.elapsed());

    let env = cfg.target_environment();
    let mut rows = Vec::new();
    for regime in &cfg.regimes {
        let pool: Vec<_> = out.runs.iter().filter(|r| r.regime == *regime).map(|r| r.manager.clone()).collect();
        rows.push(eval_simulated(regime.name(), &pool, &target, &env, n_eval, cfg.seed).0);
        if std::env::var_os("PER_RUN").is_some() {
            for (k, m) in pool.iter().enumerate() {
                let name = format!("  run {k}");
                rows.push(eval_simulated(&name, std::slice::from_ref(m), &target, &env, n_eval / 4, cfg.seed).0);
            }
        }
    }
    print!("{}", format_summaries(&rows));
    Ok(())
}
