use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use multidm::acts::CommFunction;
use multidm::domain::{sample_task, Database};
use multidm::error::Error;
use multidm::manager::DialogueManager;
use multidm::nlg::{realize_acts, user_utterance};
use multidm::nlu::parse_utterance;
use multidm::service::{
    read_turn_log, run_scripted_session, DialogueService, Questionnaire, ServiceConfig, SessionStatus, QUESTIONS,
};
use multidm::simulator::{init_sim_user, sim_respond, SimConfig};

fn service(pool_size: usize, log_dir: Option<std::path::PathBuf>) -> DialogueService {
    let db = Database::restaurants();
    let pool = (0..pool_size).map(|_| DialogueManager::multi_dim(&db.ontology)).collect();
    DialogueService::new(db, pool, ServiceConfig { log_dir, ..ServiceConfig::default() }).unwrap()
}

fn answers(q3: u8) -> Questionnaire {
    Questionnaire { q1_subj_succ: true, q2_voice_int: 5, q3_understand: q3, q4_as_expect: 4, q5_would_use: 5 }
}

#[test]
fn questionnaire_is_gated_validated_and_stored_once() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(1, Some(dir.path().to_path_buf()));
    let id = svc.open().session_id;
    svc.turn(&id, "hello, I want cheap food").unwrap();
    assert!(matches!(svc.submit_questionnaire(&id, answers(3)), Err(Error::SessionActive(_))));
    assert!(svc.turn(&id, "bye").unwrap().finished);
    assert!(matches!(svc.turn(&id, "hello"), Err(Error::SessionFinished(_))));
    assert!(matches!(
        svc.submit_questionnaire(&id, answers(7)),
        Err(Error::RatingOutOfRange { field: "q3", value: 7 })
    ));
    let record = svc.submit_questionnaire(&id, answers(3)).unwrap();
    assert_eq!(record.transcript.len(), 2);
    assert_eq!(record.task, svc.task(&id).unwrap());
    assert!(matches!(svc.submit_questionnaire(&id, answers(3)), Err(Error::DuplicateQuestionnaire(_))));
    let stored = std::fs::read_to_string(dir.path().join("questionnaires.jsonl")).unwrap();
    assert_eq!(stored.lines().count(), 1);
    assert_eq!(svc.log(&id).unwrap().questionnaire, Some(answers(3)));
}

#[test]
fn question_texts() {
    assert_eq!(QUESTIONS.len(), 5);
    assert_eq!(QUESTIONS[0], "Did you find all the information you were looking for?");
    assert!(QUESTIONS[4].ends_with("to find a place to eat."));
}

#[test]
fn logged_acts_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(1, Some(dir.path().to_path_buf()));
    let id = svc.open().session_id;
    for text in ["Hi", "an Indian restaurant in the south", "what is the address", "thanks, goodbye"] {
        svc.turn(&id, text).unwrap();
    }
    let turns = read_turn_log(dir.path().join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(turns, svc.log(&id).unwrap().turns);
    assert_eq!(turns.len(), 4);
    let ont = &svc.database().ontology;
    for t in &turns {
        let acts = t.system_dialogue_acts().unwrap();
        assert_eq!(realize_acts(&acts, ont), t.system_text);
        assert_eq!(t.parsed_dialogue_acts().unwrap(), parse_utterance(&t.user_text, ont));
    }
    assert_eq!(svc.log(&id).unwrap().status, SessionStatus::Finished);
    assert!(svc.log(&id).unwrap().objective.is_some());
}

#[test]
fn unintelligible_input_is_a_processing_problem() {
    let svc = service(1, None);
    let id = svc.open().session_id;
    svc.turn(&id, "blorp zzzt").unwrap();
    svc.turn(&id, "").unwrap();
    let log = svc.log(&id).unwrap();
    assert_eq!(log.turns[0].event_kind, "interpretation_problem");
    assert_eq!(log.turns[1].event_kind, "perception_problem");
}

#[test]
fn sessions_are_distinct_and_spread_over_the_pool() {
    let svc = service(3, None);
    let ids: Vec<String> = (0..6).map(|_| svc.open().session_id).collect();
    let distinct: std::collections::BTreeSet<&String> = ids.iter().collect();
    assert_eq!(distinct.len(), 6);
    let slots: Vec<usize> = ids.iter().map(|id| svc.session_manager(id).unwrap()).collect();
    assert_eq!(slots, [0, 1, 2, 0, 1, 2]);
    assert!(matches!(svc.turn("missing", "hi"), Err(Error::UnknownSession(_))));
}

#[test]
fn empty_pool_is_rejected() {
    let db = Database::restaurants();
    assert!(DialogueService::new(db, Vec::new(), ServiceConfig::default()).is_err());
}

#[test]
fn simulated_user_turns_survive_the_text_round_trip() {
    let db = Database::hotels();
    let sim = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let task = sample_task(&db, &mut rng);
        let mut user = init_sim_user(&task, &sim, &mut rng);
        let acts = sim_respond(&mut user, &sim, &mut rng);
        let parsed = parse_utterance(&user_utterance(&acts, &db.ontology), &db.ontology);
        assert!(multidm::acts::acts_semantically_equal(&parsed, &acts), "{acts:?} -> {parsed:?}");
    }
}

#[test]
fn scripted_sessions_end_and_report_metrics() {
    let svc = service(2, None);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let task = sample_task(svc.database(), &mut rng);
        let (log, _) = run_scripted_session(&svc, &task, &SimConfig::default(), &mut rng).unwrap();
        assert!(!log.turns.is_empty());
        assert!(log.turns.len() as u32 <= svc.config().max_exchanges);
        let last = log.turns.last().unwrap().system_dialogue_acts().unwrap();
        let finished = log.status == SessionStatus::Finished;
        assert!(!finished || log.objective.is_some());
        if last.iter().any(|a| a.function == CommFunction::ReturnBye) {
            assert!(finished);
        }
    }
}
