use multidm::domain::Database;
use multidm::error::Error;
use multidm::manager::DialogueManager;
use multidm::policy::{load_policy, AgentRole, LearningConfig};
use multidm::training::{
    initial_manager, load_pool, load_sources, save_outputs, train_run, train_source, ExperimentConfig,
    ExperimentOutput, RegimeKind,
};

const TRANSFERRED: [AgentRole; 2] = [AgentRole::AutoFeedback, AgentRole::Som];

fn config(dialogues: usize) -> ExperimentConfig {
    ExperimentConfig { runs: 1, dialogues, seed: 29, ..ExperimentConfig::default() }
}

fn weights(m: &DialogueManager, role: AgentRole) -> Vec<Vec<u64>> {
    m.agent(role).unwrap().policy.weights.iter().map(|w| w.iter().map(|x| x.to_bits()).collect()).collect()
}

#[test]
fn fixed_transfer_keeps_source_weights_bit_identical() {
    let (hotels, restaurants) = (Database::hotels(), Database::restaurants());
    let cfg = config(600);
    let source = train_source(&hotels, &cfg, 0).unwrap().manager;
    let fixed = train_run(RegimeKind::TransFixed, &restaurants, Some(&source), &cfg, 0).unwrap().manager;
    for role in TRANSFERRED {
        assert_eq!(weights(&fixed, role), weights(&source, role), "{role}");
        assert!(!fixed.agent(role).unwrap().trainable);
    }
    let fresh = initial_manager(RegimeKind::TransFixed, &restaurants, Some(&source), &cfg.learning).unwrap();
    assert_ne!(weights(&fixed, AgentRole::Task), weights(&fresh, AgentRole::Task), "the task agent learns");
}

#[test]
fn adaptive_transfer_starts_from_source_weights_and_moves() {
    let (hotels, restaurants) = (Database::hotels(), Database::restaurants());
    let mut cfg = config(600);
    cfg.learning = LearningConfig { adapt_after: 200, ..cfg.learning };
    let source = train_source(&hotels, &cfg, 0).unwrap().manager;
    let start = initial_manager(RegimeKind::TransAdapt, &restaurants, Some(&source), &cfg.learning).unwrap();
    for role in TRANSFERRED {
        assert_eq!(weights(&start, role), weights(&source, role));
    }
    let adapted = train_run(RegimeKind::TransAdapt, &restaurants, Some(&source), &cfg, 0).unwrap().manager;
    for role in TRANSFERRED {
        assert_ne!(weights(&adapted, role), weights(&source, role), "{role}");
        assert!(adapted.agent(role).unwrap().trainable);
    }
}

#[test]
fn adaptive_transfer_is_frozen_during_warm_up() {
    let (hotels, restaurants) = (Database::hotels(), Database::restaurants());
    let mut cfg = config(300);
    let source = train_source(&hotels, &cfg, 0).unwrap().manager;
    cfg.learning.adapt_after = 300;
    let adapted = train_run(RegimeKind::TransAdapt, &restaurants, Some(&source), &cfg, 0).unwrap().manager;
    for role in TRANSFERRED {
        assert_eq!(weights(&adapted, role), weights(&source, role));
        assert!(adapted.agent(role).unwrap().trainable, "thawed for further training");
    }
}

#[test]
fn transfer_regimes_need_a_source() {
    let restaurants = Database::restaurants();
    let err = train_run(RegimeKind::TransFixed, &restaurants, None, &config(10), 0).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn domain_independent_checkpoints_cross_domains() {
    let dir = tempfile::tempdir().unwrap();
    let (hotels, restaurants) = (Database::hotels(), Database::restaurants());
    let cfg = config(300);
    let source = train_source(&hotels, &cfg, 0).unwrap();
    save_outputs(dir.path(), &ExperimentOutput { sources: vec![source.clone()], runs: Vec::new() }).unwrap();
    let run = dir.path().join("source/run-0");
    for role in TRANSFERRED {
        let loaded = load_policy(run.join(format!("{role}.json")), &restaurants.ontology).unwrap();
        assert_eq!(loaded.policy.weights, source.manager.agent(role).unwrap().policy.weights);
    }
    let task = load_policy(run.join("task.json"), &restaurants.ontology);
    assert!(matches!(task, Err(Error::CatalogueMismatch { .. })), "{task:?}");
    assert!(load_policy(run.join("task.json"), &hotels.ontology).is_ok());

    assert!(matches!(DialogueManager::load(&run, &restaurants.ontology), Err(Error::CatalogueMismatch { .. })));
    assert_eq!(load_sources(dir.path(), 1, &hotels).unwrap()[0], source.manager);
}

#[test]
fn saved_pools_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let restaurants = Database::restaurants();
    let cfg = config(200);
    let runs: Vec<_> = [RegimeKind::OneDim, RegimeKind::MultiDim]
        .into_iter()
        .map(|k| train_run(k, &restaurants, None, &cfg, 0).unwrap())
        .collect();
    save_outputs(dir.path(), &ExperimentOutput { sources: Vec::new(), runs: runs.clone() }).unwrap();
    for r in &runs {
        let pool = load_pool(dir.path(), r.regime, 1, &restaurants).unwrap();
        assert_eq!(pool, vec![r.manager.clone()]);
    }
    let missing = load_pool(dir.path(), RegimeKind::TransAdapt, 1, &restaurants).unwrap_err();
    assert!(matches!(missing, Error::MissingCheckpoint(_)));
    assert!(missing.to_string().contains("trans-adapt"));
}
