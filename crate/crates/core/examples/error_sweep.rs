//! Success rate of the four systems as the channel gets noisier.
//!
//! ```text
//! cargo run --release -p multidm --example error_sweep -- [dialogues] [runs] [eval per rate]
//! ```

use multidm::domain::Database;
use multidm::eval::{error_rate_sweep, format_summaries};
use multidm::training::{train_all, ExperimentConfig};

fn main() -> multidm::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let cfg = ExperimentConfig {
        dialogues: args.first().copied().unwrap_or(60_000),
        runs: args.get(1).copied().unwrap_or(3),
        ..ExperimentConfig::default()
    };
    let n = args.get(2).copied().unwrap_or(2_000);
    let target = Database::restaurants();
    let out = train_all(&target, &Database::hotels(), &cfg)?;

    let systems: Vec<_> = cfg
        .regimes
        .iter()
        .map(|k| {
            (k.name().to_string(), out.runs.iter().filter(|r| r.regime == *k).map(|r| r.manager.clone()).collect())
        })
        .collect();
    let rows = error_rate_sweep(&systems, &target, &cfg.target_environment(), &cfg.eval.rates, n, cfg.seed);
    print!("{}", format_summaries(&rows));
    Ok(())
}
