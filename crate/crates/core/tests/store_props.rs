//! Persistence round trips: run stores, transcripts, code extraction.

use std::time::Duration;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use typeloop::checker::CheckReport;
use typeloop::corpus::{RunHeader, RunStore};
use typeloop::llm::{extract_code, prompt_digest, LlmResponse, TokenUsage, Transcript};
use typeloop::pipeline::{IterationRecord, PipelineResult, PipelineStatus};
use typeloop::prompt::PromptKind;

fn header(ids: Vec<String>) -> RunHeader {
    RunHeader {
        run_id: "r".into(),
        created_at: Utc.with_ymd_and_hms(2025, 1, 2, 3, 4, 5).unwrap(),
        checker_version: "mypy x".into(),
        model_id: "m".into(),
        snippet_ids: ids,
    }
}

fn result_strategy() -> impl Strategy<Value = PipelineResult> {
    let iteration = (".{0,40}", any::<bool>(), 0u64..5_000_000, proptest::option::of((0u64..9999, 0u64..9999))).prop_map(
        |(code, passed, nanos, usage)| (code, passed, nanos, usage),
    );
    (
        prop::sample::select(PipelineStatus::ALL.to_vec()),
        ".{0,60}",
        prop::collection::vec(iteration, 0..4),
        0u64..10_000_000_000,
        proptest::option::of(".{0,20}"),
    )
        .prop_map(|(status, final_code, its, wall, error)| {
            let history: Vec<IterationRecord> = its
                .into_iter()
                .enumerate()
                .map(|(i, (code, passed, nanos, usage))| {
                    let raw = if passed {
                        "Success: no issues found in 1 source file".to_string()
                    } else {
                        format!("temp_code.py:{}: error: Name \"{code:?}\" is not defined  [name-defined]", i + 1)
                    };
                    IterationRecord {
                        index: i,
                        prompt_kind: if i == 0 { PromptKind::Initial } else { PromptKind::Repair },
                        response: LlmResponse {
                            raw_text: format!("```\n{code}\n```"),
                            extracted_code: code,
                            prompt_id: prompt_digest(&i.to_string()),
                            latency: Duration::from_nanos(nanos),
                            token_usage: usage.map(|(p, c)| TokenUsage {
                                prompt_tokens: p,
                                completion_tokens: c,
                            }),
                        },
                        check: CheckReport::from_output(raw, i32::from(!passed), Duration::from_nanos(nanos * 3), false),
                    }
                })
                .collect();
            PipelineResult {
                snippet_id: String::new(),
                status,
                repair_iterations_used: history.len().saturating_sub(1),
                final_code,
                history,
                wall_time: Duration::from_nanos(wall),
                error,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hundred_results_round_trip(mut results in prop::collection::vec(result_strategy(), 100)) {
        for (i, r) in results.iter_mut().enumerate() {
            r.snippet_id = format!("pkg/m{i:03}.py");
        }
        let dir = tempfile::tempdir().unwrap();
        let ids = results.iter().map(|r| r.snippet_id.clone()).collect();
        let store = RunStore::create(dir.path(), header(ids), false).unwrap();
        for r in &results {
            store.persist(r).unwrap();
        }
        drop(store);
        let reopened = RunStore::open(dir.path()).unwrap();
        prop_assert_eq!(reopened.results(), results);
        prop_assert!(reopened.missing().is_empty());
        prop_assert_eq!(reopened.header(), &header(reopened.header().snippet_ids.clone()));
    }
}

#[test]
fn persisting_twice_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::create(dir.path(), header(vec!["a".into()]), false).unwrap();
    let r = PipelineResult {
        snippet_id: "a".into(),
        status: PipelineStatus::ParseFailed,
        repair_iterations_used: 0,
        final_code: String::new(),
        history: vec![],
        wall_time: Duration::ZERO,
        error: None,
    };
    store.persist(&r).unwrap();
    assert!(matches!(store.persist(&r), Err(typeloop::Error::Conflict(_))));
    assert!(RunStore::create(dir.path(), header(vec![]), false).is_err());
    assert!(RunStore::create(dir.path(), header(vec![]), true).unwrap().is_empty());
}

#[test]
fn fifty_transcript_entries_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let mut t = Transcript::load(&path).unwrap();
    for i in 0..50 {
        t.record(&prompt_digest(&format!("prompt {i}")), &format!("reply {i}")).unwrap();
    }
    // re-recording is a no-op
    t.record(&prompt_digest("prompt 7"), "reply 7").unwrap();
    let back = Transcript::load(&path).unwrap();
    let unique: std::collections::BTreeSet<&String> = back.digests().iter().collect();
    assert_eq!((back.len(), unique.len()), (50, 50));
    assert_eq!(back.get(&prompt_digest("prompt 49")), Some("reply 49"));
}

fn reply() -> impl Strategy<Value = String> {
    let line = prop_oneof![
        Just("```python".to_string()),
        Just("```".to_string()),
        Just(String::new()),
        Just("   ".to_string()),
        "[ a-z:=()]{0,12}",
        Just("Here is the code:".to_string()),
    ];
    prop::collection::vec(line, 0..12).prop_map(|ls| ls.join("\n"))
}

proptest! {
    #[test]
    fn extraction_is_idempotent(raw in reply()) {
        let once = extract_code(&raw);
        prop_assert_eq!(extract_code(&once), once.clone());
        prop_assert!(!once.lines().any(|l| l.trim_start().starts_with("```")));
    }
}
