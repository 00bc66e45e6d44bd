use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use multidm::acts::{CommFunction, FeedbackAction, SomAction, TaskAction};
use multidm::belief::{init_belief, BeliefState};
use multidm::channel::{corrupt_user_act, ErrorConfig};
use multidm::combiner::combine;
use multidm::domain::{sample_task, Database, TaskSpec};
use multidm::manager::DialogueManager;
use multidm::policy::AgentRole;
use multidm::simulator::{goal_satisfied, init_sim_user, sim_receive, sim_respond, SimConfig, SimUserState};
use multidm::training::{
    episode_rng, simulate_episode, train_run, Environment, ExperimentConfig, RegimeKind, RewardConfig, StreamPurpose,
    TURNS_PER_EXCHANGE,
};

#[test]
fn recorded_rewards_decompose_exactly() {
    let db = Database::restaurants();
    let env = Environment::default();
    let managers = [DialogueManager::multi_dim(&db.ontology), DialogueManager::one_dim(&db.ontology)];
    let cfg = env.reward;
    (0..10_000u64).into_par_iter().for_each(|i| {
        let mut rng = episode_rng(9, StreamPurpose::Evaluation, i);
        let r = simulate_episode(&managers[i as usize % 2], &db, &env, 0.5, true, &mut rng);
        assert_eq!(r.trace.len() as u32, r.exchanges);
        assert_eq!(r.turns, r.exchanges * TURNS_PER_EXCHANGE);
        let mut total = 0.0;
        for (k, t) in r.trace.iter().enumerate() {
            let last = k + 1 == r.trace.len();
            assert_eq!(t.reward.turn, cfg.turn_penalty * TURNS_PER_EXCHANGE as f64);
            let signalled = t.system_acts.iter().any(|a| a.function.is_auto_negative());
            let problem = t.event != "nbest" && !signalled;
            assert_eq!(t.reward.problem, if problem { cfg.unsignalled_problem_penalty } else { 0.0 });
            assert_eq!(t.reward.success, if last && r.success { cfg.success_bonus } else { 0.0 });
            let answered = t.reward.social / cfg.social_bonus;
            assert!(answered.fract() == 0.0 && (0.0..=3.0).contains(&answered));
            total += t.reward.total();
        }
        assert_eq!(total, r.total_reward, "episode {i}");
    });
}

#[test]
fn fifteen_turn_clean_success_scores_sixty_five() {
    let cfg = RewardConfig::default();
    assert_eq!(15.0 * cfg.turn_penalty + cfg.success_bonus, 65.0);
}

fn oracle(b: &BeliefState, user: &SimUserState, db: &Database) -> (TaskAction, FeedbackAction, SomAction) {
    let som = if b.pending_social.contains(&CommFunction::Bye) {
        SomAction::ReturnBye
    } else if b.pending_social.contains(&CommFunction::Greet) {
        SomAction::ReturnGreet
    } else if b.pending_social.contains(&CommFunction::Thank) {
        SomAction::AcceptThank
    } else {
        SomAction::None
    };
    let known = b.top_constraints(&db.ontology);
    let informed = user.goal.task.constraints.iter().all(|(s, v)| known.get(s) == Some(v));
    let task = if !informed {
        TaskAction::InformSearch
    } else if b.offered.is_none() {
        TaskAction::Recommend
    } else if !b.requested.is_empty() {
        TaskAction::InformRequested
    } else {
        TaskAction::InformSearch
    };
    (task, FeedbackAction::AutoPositive, som)
}

/// Plays a noiseless dialogue with the hand-written oracle; returns
/// (success, exchanges, total reward).
fn oracle_dialogue(task: &TaskSpec, db: &Database, sim: &SimConfig, rng: &mut ChaCha8Rng) -> (bool, u32, f64) {
    let env = Environment { error: ErrorConfig::noiseless(), simulator: sim.clone(), ..Environment::default() };
    let mut user = init_sim_user(task, sim, rng);
    let mut b = init_belief(&db.ontology);
    let mut reward = 0.0;
    for exchange in 1..=env.max_exchanges {
        let acts = sim_respond(&mut user, sim, rng);
        let ev = corrupt_user_act(&acts, &env.error, &db.ontology, rng);
        b.apply_event(&ev, &db.ontology);
        let (t, f, s) = oracle(&b, &user, db);
        let response = combine(t, f, s, &b, db);
        b.note_system_response(&response, db);
        sim_receive(&mut user, &response.acts, db, rng);
        reward += env.reward.turn_penalty * TURNS_PER_EXCHANGE as f64;
        if response.ends_dialogue || user.over || user.left || exchange == env.max_exchanges {
            let success = goal_satisfied(&user);
            if success {
                reward += env.reward.success_bonus;
            }
            return (success, exchange, reward);
        }
    }
    unreachable!("the loop always returns on its last exchange")
}

#[test]
fn oracle_policy_solves_noiseless_tasks_quickly() {
    let db = Database::restaurants();
    let sim = SimConfig::default();
    let mut successes = 0;
    for i in 0..1000 {
        let mut rng = episode_rng(21, StreamPurpose::Evaluation, i);
        let task = sample_task(&db, &mut rng);
        let (success, exchanges, _) = oracle_dialogue(&task, &db, &sim, &mut rng);
        let bound = (task.constraints.len() + task.requests.len() + 3) as u32;
        if success && exchanges <= bound {
            successes += 1;
        }
    }
    assert!(successes >= 990, "{successes}/1000");
}

#[test]
fn clean_successes_cost_only_their_turns() {
    let db = Database::hotels();
    let sim = SimConfig::plain();
    for i in 0..300 {
        let mut rng = episode_rng(4, StreamPurpose::Evaluation, i);
        let task = sample_task(&db, &mut rng);
        let (success, exchanges, reward) = oracle_dialogue(&task, &db, &sim, &mut rng);
        assert!(success);
        assert_eq!(reward, 80.0 - (exchanges * TURNS_PER_EXCHANGE) as f64);
    }
}

fn small_config(dialogues: usize) -> ExperimentConfig {
    ExperimentConfig { runs: 1, dialogues, seed: 17, ..ExperimentConfig::default() }
}

#[test]
fn training_is_deterministic_per_seed() {
    let db = Database::restaurants();
    let cfg = small_config(400);
    for kind in [RegimeKind::OneDim, RegimeKind::MultiDim] {
        let a = train_run(kind, &db, None, &cfg, 0).unwrap();
        let b = train_run(kind, &db, None, &cfg, 0).unwrap();
        assert_eq!(a.manager, b.manager);
        assert_eq!(a.curve, b.curve);
        let c = train_run(kind, &db, None, &ExperimentConfig { seed: 18, ..cfg.clone() }, 0).unwrap();
        assert_ne!(a.manager, c.manager);
    }
}

#[test]
fn evaluation_is_deterministic_and_independent_of_thread_scheduling() {
    let db = Database::restaurants();
    let manager = train_run(RegimeKind::MultiDim, &db, None, &small_config(300), 0).unwrap().manager;
    let env = Environment::default();
    let pool = vec![manager];
    let a = multidm::eval::eval_simulated("m", &pool, &db, &env, 200, 3);
    let b = multidm::eval::eval_simulated("m", &pool, &db, &env, 200, 3);
    assert_eq!(a, b);
}

#[test]
fn full_exploration_is_uniform() {
    let db = Database::restaurants();
    let manager = DialogueManager::multi_dim(&db.ontology);
    let one = DialogueManager::one_dim(&db.ontology);
    let b = init_belief(&db.ontology);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let agents = manager.agents.iter().chain(&one.agents);
    for agent in agents {
        let f = agent.features(&b, &db);
        let n = agent.actions().len();
        let mut counts = vec![0usize; n];
        for _ in 0..100_000 {
            counts[agent.select_action(&f, 1.0, &mut rng)] += 1;
        }
        for c in counts {
            let freq = c as f64 / 100_000.0;
            assert!((freq - 1.0 / n as f64).abs() < 0.02, "{:?}: {freq}", agent.role);
        }
        let chosen: BTreeSet<usize> = (0..20).map(|_| agent.select_action(&f, 0.0, &mut rng)).collect();
        assert_eq!(chosen.len(), 1, "greedy selection is deterministic");
    }
    assert_eq!(one.agent(AgentRole::All).unwrap().actions().len(), 70);
}
