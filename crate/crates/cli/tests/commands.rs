use std::io::Cursor;
use std::path::Path;

use multidm::eval::{write_samples_csv, EvalSamples};
use multidm_cli::{build_service, chat, eval_sim, stats, train, CliError, Common};

fn common(out: &Path) -> Common {
    Common { out: Some(out.to_path_buf()), runs: Some(1), seed: Some(3), ..Default::default() }
}

fn samples(n: usize, rate: f64) -> EvalSamples {
    let wins = (n as f64 * rate) as usize;
    EvalSamples {
        success: (0..n).map(|i| i < wins).collect(),
        turns: (0..n).map(|i| 10.0 + (i % 7) as f64).collect(),
        reward: (0..n).map(|i| 60.0 + (i % 11) as f64).collect(),
    }
}

#[test]
fn stats_on_identical_files_finds_equivalence_only() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let systems = vec![("multi-dim".to_string(), samples(2000, 0.9))];
    write_samples_csv(&a, &systems).unwrap();
    write_samples_csv(&b, &systems).unwrap();
    let rows = stats(&common(dir.path()), &[a, b], 0.05).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r.delta, 0.0);
        match r.test.as_str() {
            "tost" => assert_eq!(r.verdict, "equivalent"),
            _ => assert_eq!(r.verdict, "no difference detected"),
        }
    }
    assert!(dir.path().join("comparisons.csv").exists());
}

#[test]
fn stats_needs_two_systems() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    write_samples_csv(&a, &[("one-dim".to_string(), samples(50, 0.5))]).unwrap();
    assert!(matches!(stats(&common(dir.path()), &[a], 0.05), Err(CliError::Usage(_))));
}

#[test]
fn transfer_training_names_the_missing_source() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere");
    let c = Common { regime: Some("trans-fixed".into()), dialogues: Some(10), ..common(dir.path()) };
    let err = train(&c, Some(&missing)).unwrap_err().to_string();
    assert!(err.contains("nowhere"), "{err}");
}

#[test]
fn unknown_regime_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let c = Common { regime: Some("two-dim".into()), ..common(dir.path()) };
    assert!(train(&c, None).unwrap_err().to_string().contains("two-dim"));
}

#[test]
fn train_then_evaluate_then_chat() {
    let dir = tempfile::tempdir().unwrap();
    let c = Common { regime: Some("multi-dim".into()), dialogues: Some(300), ..common(dir.path()) };
    let output = train(&c, None).unwrap();
    assert_eq!(output.runs.len(), 1);
    assert!(dir.path().join("multi-dim/run-0/curve.csv").exists());
    assert!(dir.path().join("config.toml").exists());

    let e = Common { dialogues: Some(40), ..c.clone() };
    let table = eval_sim(&e, None).unwrap();
    assert!(table.contains("multi-dim"));
    for file in ["results.csv", "samples.csv", "comparisons.csv"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }

    let service = build_service(&c, None, false).unwrap();
    let mut input = Cursor::new("hello\ngoodbye\ny\n5\n4\n4\n3\n");
    let mut output = Vec::new();
    chat(&service, &mut input, &mut output).unwrap();
    let text = String::from_utf8(output).unwrap();
    assert!(text.starts_with("Scenario: You are looking for"));
    assert!(text.contains("your answers were saved"));
    let logged = std::fs::read_to_string(dir.path().join("logs/questionnaires.jsonl")).unwrap();
    assert_eq!(logged.lines().count(), 1);
}
