//! Acceptance checks, one line per criterion.
//!
//! Criterion 8 talks to a real endpoint and runs only when
//! `TYPELOOP_LIVE_ENDPOINT` is set (model from `TYPELOOP_LIVE_MODEL`, key
//! from the variable named by `TYPELOOP_LIVE_KEY_ENV`, default
//! `OPENAI_API_KEY`).

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;
use typeloop::checker::{parse_diagnostics, CheckReport, Category, TypeChecker};
use typeloop::corpus::{load_ground_truth, GroundTruthRecord, SourceSnippet};
use typeloop::cst::{parse_to_cst, DEFAULT_CST_BYTE_BUDGET};
use typeloop::eval::{compute_metrics, extract_annotations, normalize, AnnotationRecord, MetricsOptions, SlotKind, TypeSlot};
use typeloop::llm::{HttpTransport, LlmConfig, LlmGateway};
use typeloop::pipeline::{Annotator, LoopConfig, PipelineStatus};
use typeloop::prompt::PromptSet;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration, detail: String) -> Check {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(format!("{detail} in {took:.2?}"))
}

fn c1_metric_oracle() -> Check {
    let start = Instant::now();
    let truth = load_ground_truth(&common::fixture("metrics3/truth.json")).map_err(|e| e.to_string())?;
    let mut preds = BTreeMap::new();
    for id in truth.keys() {
        let code = fs::read_to_string(common::fixture(&format!("metrics3/pred/{id}"))).map_err(|e| e.to_string())?;
        preds.insert(id.clone(), extract_annotations(&code, id).map_err(|e| e.to_string())?);
    }
    let m = compute_metrics(&preds, &truth, &[], MetricsOptions::default()).map_err(|e| e.to_string())?;

    // brute force: every truth slot against every predicted slot
    let (mut n, mut ex, mut ba) = (0usize, 0usize, 0usize);
    for (id, rec) in &truth {
        for t in &rec.slots {
            let Some(want) = &t.label else { continue };
            n += 1;
            for p in &preds[id].slots {
                if (p.owner.as_str(), p.kind, p.name.as_str()) != (t.owner.as_str(), t.kind, t.name.as_str()) {
                    continue;
                }
                if let Some(got) = &p.label {
                    let (a, b) = (normalize(&got.raw), normalize(&want.raw));
                    ex += usize::from(a == b);
                    ba += usize::from(a.split('[').next() == b.split('[').next());
                }
            }
        }
    }
    ensure!(n == 10, "fixture has {n} slots");
    ensure!(m.exact_match_rate == 0.6, "exact {}", m.exact_match_rate);
    ensure!(m.base_match_rate == 0.8, "base {}", m.base_match_rate);
    ensure!(
        m.exact_match_rate == ex as f64 / n as f64 && m.base_match_rate == ba as f64 / n as f64,
        "brute force says {ex}/{n}, {ba}/{n}"
    );
    ensure!(m.slots_missing_prediction == 1, "missing {}", m.slots_missing_prediction);
    within(start, Duration::from_secs(1), "exact 0.600, base 0.800, brute force agrees".into())
}

fn one_slot(label: &str) -> Vec<TypeSlot> {
    vec![TypeSlot::new("f", SlotKind::Return, "", Some(label))]
}

fn c2_base_rule() -> Check {
    let truth = BTreeMap::from([(
        "s".to_string(),
        GroundTruthRecord {
            snippet_id: "s".into(),
            slots: one_slot("List[str]"),
        },
    )]);
    let preds = BTreeMap::from([(
        "s".to_string(),
        AnnotationRecord {
            snippet_id: "s".into(),
            slots: one_slot("List[int]"),
        },
    )]);
    let m = compute_metrics(&preds, &truth, &[], MetricsOptions::default()).map_err(|e| e.to_string())?;
    ensure!((m.slots_exact, m.slots_base) == (0, 1), "List[int] vs List[str]: exact {} base {}", m.slots_exact, m.slots_base);

    const LABELS: &[&str] = &[
        "int", "str", "None", "List[int]", "list[str]", "Optional[int]", "Optional[str]", "int | None",
        "Union[int, str]", "Union[str, bytes]", "str | int", "Dict[str, int]", "dict", "Tuple[int, ...]", "Any",
    ];
    let case = prop::collection::vec((0..LABELS.len(), proptest::option::of(0..LABELS.len()), any::<bool>()), 1..20);
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(1000)
    });
    let cases = std::cell::Cell::new(0usize);
    runner
        .run(&case, |slots| {
            cases.set(cases.get() + 1);
            let (mut t, mut p) = (Vec::new(), Vec::new());
            for (i, (tl, pl, _)) in slots.iter().enumerate() {
                let name = format!("p{i}");
                t.push(TypeSlot::new("f", SlotKind::Param, &name, Some(LABELS[*tl])));
                if let Some(pl) = pl {
                    p.push(TypeSlot::new("f", SlotKind::Param, &name, Some(LABELS[*pl])));
                }
            }
            let equate = slots[0].2;
            let truth = BTreeMap::from([("s".to_string(), GroundTruthRecord { snippet_id: "s".into(), slots: t })]);
            let preds = BTreeMap::from([("s".to_string(), AnnotationRecord { snippet_id: "s".into(), slots: p })]);
            let m = compute_metrics(&preds, &truth, &[], MetricsOptions { equate_optional: equate }).unwrap();
            prop_assert!(m.base_match_rate >= m.exact_match_rate);
            prop_assert!(m.slots_base >= m.slots_exact);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let cases = cases.get();
    ensure!(cases >= 1000, "only {cases} cases ran");
    Ok(format!("List[int] vs List[str] is base-only; base >= exact on {cases} random label sets"))
}

const SOURCE: &str = "def double(x):\n    return x * 2\n";
const GOOD: &str = "def double(x: int) -> int:\n    return x * 2";
const BAD: &str = "def double(x: int) -> str:\n    return x * 2";

fn c3_loop_bounds() -> Check {
    let start = Instant::now();
    let mypy = common::mypy().ok_or("mypy is not installed")?;
    let cases: [(&str, &[&str], PipelineStatus, usize, usize); 3] = [
        ("first.py", &[GOOD], PipelineStatus::Consistent, 1, 0),
        ("once.py", &[BAD, GOOD], PipelineStatus::Consistent, 2, 1),
        ("never.py", &[BAD], PipelineStatus::Inconsistent, 11, 10),
    ];
    let entries: Vec<(&str, &[&str])> = cases.iter().map(|c| (c.0, c.1)).collect();
    let annotator = common::annotator(common::script(&entries), mypy);
    for (id, _, status, len, repairs) in cases {
        let r = annotator.annotate_snippet(&common::snippet(id, SOURCE));
        ensure!(
            (r.status, r.history.len(), r.repair_iterations_used) == (status, len, repairs),
            "{id}: {:?} with history {} and {} repairs",
            r.status,
            r.history.len(),
            r.repair_iterations_used
        );
    }
    within(start, Duration::from_secs(5), "first pass 1/0, fail-then-pass 2/1, never 11/10".into())
}

fn c4_checker_contract() -> Check {
    let start = Instant::now();
    let mypy = common::mypy().ok_or("mypy is not installed")?;
    let ok = mypy.check("def f(x: int) -> int:\n    return x\n").map_err(|e| e.to_string())?;
    ensure!(ok.passed && ok.exit_code == 0, "well-typed fixture: {}", ok.raw_output);
    let bad = mypy.check("def f(x: int) -> str:\n    return x").map_err(|e| e.to_string())?;
    let first = bad.errors().next().ok_or("no diagnostic for the mismatch")?;
    ensure!(!bad.passed && first.line == 2, "mismatch: {}", bad.raw_output);
    ensure!(first.message.contains("Incompatible return value type"), "message {:?}", first.message);

    let listing = "\
The code has annotation errors:
Found errors in 1 file (checked 1 source file)

temp_code.py:12: error: Not all arguments converted during string formatting  [str-format]

temp_code.py:143: error: Missing return statement  [return]

temp_code.py:123: error: Name \"t\" is not defined  [name-defined]

temp_code.py:24: error: No parent module  cannot perform relative import

temp_code.py:372: error: Name \"root\" already defined on line 370  [no-redef]
";
    let got: Vec<(usize, Category)> = parse_diagnostics(listing).iter().map(|d| (d.line, d.category)).collect();
    let want = vec![
        (12, Category::StrFormat),
        (143, Category::MissingReturn),
        (123, Category::NameUndefined),
        (24, Category::RelativeImport),
        (372, Category::Redefinition),
    ];
    ensure!(got == want, "listing parsed as {got:?}");
    within(start, Duration::from_secs(30), "pass/exit 0, mismatch on line 2, listing categories exact".into())
}

fn c5_prompt_fidelity() -> Check {
    let start = Instant::now();
    let prompts = PromptSet::builtin();
    let snippet = SourceSnippet::new("p.py", "p.py", SOURCE);
    let cst = parse_to_cst(&snippet, DEFAULT_CST_BYTE_BUDGET).map_err(|e| e.to_string())?;
    let initial = prompts.initial_prompt(&snippet, &cst).map_err(|e| e.to_string())?;
    let errors = "temp_code.py:1: error: Function is missing a type annotation  [no-untyped-def]\n\
                  temp_code.py:2: error: Incompatible return value type (got \"int\", expected \"str\")  [return-value]\n\
                  temp_code.py:3: error: Name \"t\" is not defined  [name-defined]";
    let repair = prompts.repair_prompt("p.py", BAD, errors, 1).map_err(|e| e.to_string())?;

    let shared = [
        "You are a Python code analysis assistant.",
        "Ensure the type annotations are precise and conform to Python's type hinting standards.",
        "Identify the types of all variables, function arguments, and return values based on the code and its structure.",
        "I just want you to return me the updated code which should be type annotated. There is no need to return any reasoning for the same or any other comments. Just return the updated code.",
    ];
    for phrase in shared {
        ensure!(initial.body.contains(phrase), "initial prompt lacks {phrase:?}");
        ensure!(repair.body.contains(phrase), "repair prompt lacks {phrase:?}");
    }
    ensure!(
        initial.body.contains("along with its corresponding Concrete Syntax Tree (CST)"),
        "initial prompt lacks the CST sentence"
    );
    ensure!(
        repair.body.contains("which has been generated by checking the given Python code using Mypy"),
        "repair prompt lacks the Mypy sentence"
    );
    ensure!(initial.body.contains(SOURCE.trim_end()) && initial.body.contains(&cst.text), "initial prompt lacks code or CST");
    for line in errors.lines() {
        ensure!(repair.body.contains(line), "repair prompt lacks diagnostic {line:?}");
    }
    ensure!(repair.body.contains(BAD), "repair prompt lacks the candidate");
    within(start, Duration::from_secs(1), "template sentences verbatim in both prompts".into())
}

fn cli(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = typeloop::cli::run(std::iter::once("typeloop").chain(args.iter().copied()), &mut out, &mut err);
    if code != 0 {
        return Err(format!("typeloop {} exited {code}: {}", args.join(" "), String::from_utf8_lossy(&err)));
    }
    Ok(String::from_utf8_lossy(&out).into_owned())
}

/// A stored result line with timing fields blanked.
fn untimed(mut v: Value) -> Value {
    match &mut v {
        Value::Object(map) => {
            for key in ["latency", "duration", "wall_time"] {
                if map.contains_key(key) {
                    map.insert(key.into(), Value::Null);
                }
            }
            for (_, child) in map.iter_mut() {
                *child = untimed(child.take());
            }
        }
        Value::Array(items) => {
            for item in items.iter_mut() {
                *item = untimed(item.take());
            }
        }
        _ => {}
    }
    v
}

fn stored_results(run: &Path) -> Result<Vec<Value>, String> {
    let text = fs::read_to_string(run.join("results.jsonl")).map_err(|e| e.to_string())?;
    let mut rows: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).map(untimed))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    rows.sort_by_key(|r| r["snippet_id"].as_str().unwrap_or_default().to_string());
    Ok(rows)
}

fn c6_bench_determinism() -> Check {
    let start = Instant::now();
    common::mypy().ok_or("mypy is not installed")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |rel: &str| dir.path().join(rel).to_string_lossy().into_owned();
    let corpus = common::fixture("bench20/corpus");
    let (corpus, truth, script) = (
        corpus.to_string_lossy().into_owned(),
        common::fixture("bench20/truth.json").to_string_lossy().into_owned(),
        common::fixture("bench20/script.json").to_string_lossy().into_owned(),
    );
    let transcript = p("transcript.jsonl");
    cli(&["record", "--corpus", &corpus, "--transcript", &transcript, "--script", &script, "--out", &p("recorded")])?;

    let mut docs = Vec::new();
    for run in ["run1", "run2"] {
        let out = cli(&[
            "bench", "--corpus", &corpus, "--truth", &truth, "--out", &p(run), "--transport", "replay", "--transcript",
            &transcript, "--json",
        ])?;
        docs.push(serde_json::from_str::<Value>(&out).map_err(|e| e.to_string())?);
    }
    let (r1, r2) = (dir.path().join("run1"), dir.path().join("run2"));
    ensure!(stored_results(&r1)? == stored_results(&r2)?, "stored results differ between runs");
    for f in ["summary.txt", "annotations.jsonl", "metrics.json"] {
        let (a, b) = (fs::read(r1.join(f)), fs::read(r2.join(f)));
        ensure!(a.is_ok() && a.ok() == b.ok(), "{f} differs between runs");
    }
    ensure!(docs[0] == docs[1], "bench output differs between runs");

    let e = &docs[0]["efficiency"];
    let consistent = e["consistent"].as_u64().unwrap_or(0);
    let total = e["total"].as_u64().unwrap_or(0);
    let mean = e["mean_repairs_among_converged"].as_f64().unwrap_or(-1.0);
    let first = e["first_attempt_rate_among_converged"].as_f64().unwrap_or(-1.0);
    ensure!((consistent, total) == (17, 20), "consistency {consistent}/{total}");
    ensure!(first == 12.0 / 17.0, "first-attempt rate {first}");
    ensure!(mean == 5.0 / 17.0, "mean repairs {mean}");
    within(start, Duration::from_secs(60), format!("17/20 consistent, first-attempt 12/17, mean repairs {mean:.3}, two runs identical"))
}

fn c7_normalization() -> Check {
    use common::typegen::{canonical, render, style, ty};
    ensure!(normalize("typing.List[ str ]") == "List[str]", "typing.List[ str ]");
    ensure!(normalize("dict[str, list[int]]") == "Dict[str,List[int]]", "dict[str, list[int]]");
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(1000)
    });
    let cases = std::cell::Cell::new(0usize);
    runner
        .run(&(ty(), style(), style()), |(t, a, b)| {
            cases.set(cases.get() + 1);
            let (x, y) = (render(&t, a.0, a.1), render(&t, b.0, b.1));
            let (nx, ny) = (normalize(&x), normalize(&y));
            prop_assert_eq!(normalize(&nx), nx.clone(), "not idempotent on {}", x);
            prop_assert_eq!(&nx, &canonical(&t), "{}", x);
            prop_assert_eq!(nx == ny, ny == nx);
            prop_assert_eq!(nx, ny, "{} vs {}", x, y);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let cases = cases.get();
    ensure!(cases >= 1000, "only {cases} cases ran");
    Ok(format!("idempotent and symmetric on {cases} random expressions; documented forms exact"))
}

/// Counts checker invocations.
struct Counting {
    inner: Arc<dyn TypeChecker>,
    calls: AtomicUsize,
}

impl TypeChecker for Counting {
    fn check(&self, code: &str) -> typeloop::Result<CheckReport> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.check(code)
    }
    fn version(&self) -> typeloop::Result<String> {
        self.inner.version()
    }
}

fn c8_live_smoke() -> Outcome {
    let Ok(endpoint) = std::env::var("TYPELOOP_LIVE_ENDPOINT") else {
        return Outcome::Skip("TYPELOOP_LIVE_ENDPOINT not set".into());
    };
    let run = || -> Check {
        let mypy = common::mypy().ok_or("mypy is not installed")?;
        let llm = LlmConfig {
            endpoint_url: endpoint,
            model_id: std::env::var("TYPELOOP_LIVE_MODEL").unwrap_or_else(|_| LlmConfig::default().model_id),
            api_key_env: std::env::var("TYPELOOP_LIVE_KEY_ENV").unwrap_or_else(|_| "OPENAI_API_KEY".into()),
            ..LlmConfig::default()
        };
        let config = LoopConfig {
            llm: llm.clone(),
            ..LoopConfig::default()
        };
        let checker = Arc::new(Counting {
            inner: mypy,
            calls: AtomicUsize::new(0),
        });
        let annotator = Annotator::new(
            LlmGateway::new(Box::new(HttpTransport::new(&llm)), &llm),
            checker.clone(),
            PromptSet::builtin(),
            config,
        );
        let snippets = [
            "def add(a, b):\n    return a + b\n",
            "def greet(name):\n    return 'hi ' + name\n",
            "def count(xs):\n    return len(xs)\n",
            "def first(xs):\n    return xs[0] if xs else None\n",
            "TOTAL = 0\n\n\ndef bump(n):\n    global TOTAL\n    TOTAL += n\n    return TOTAL\n",
        ];
        let mut statuses = Vec::new();
        for (i, code) in snippets.iter().enumerate() {
            let before = checker.calls.load(Ordering::SeqCst);
            let r = annotator.annotate_snippet(&SourceSnippet::new(format!("live{i}.py"), format!("live{i}.py"), *code));
            ensure!(r.status != PipelineStatus::ProviderError, "live{i}: {}", r.error.unwrap_or_default());
            ensure!(!r.final_code.trim().is_empty(), "live{i}: empty final code");
            ensure!(r.history.len() <= 11 && !r.history.is_empty(), "live{i}: history {}", r.history.len());
            ensure!(
                checker.calls.load(Ordering::SeqCst) - before == r.history.len(),
                "live{i}: checker not run once per iteration"
            );
            statuses.push(format!("{:?}/{}", r.status, r.repair_iterations_used));
        }
        Ok(format!("5 snippets: {}", statuses.join(" ")))
    };
    match run() {
        Ok(d) => Outcome::Pass(d),
        Err(e) => Outcome::Fail(e),
    }
}

fn guarded(f: impl FnOnce() -> Check) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Outcome::Pass(detail),
        Ok(Err(e)) => Outcome::Fail(e),
        Err(panic) => Outcome::Fail(
            panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()),
        ),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("metric oracle equivalence", Box::new(|| guarded(c1_metric_oracle))),
        ("base-type rule", Box::new(|| guarded(c2_base_rule))),
        ("loop bound and convergence", Box::new(|| guarded(c3_loop_bounds))),
        ("checker adapter contract", Box::new(|| guarded(c4_checker_contract))),
        ("prompt fidelity", Box::new(|| guarded(c5_prompt_fidelity))),
        ("end-to-end determinism", Box::new(|| guarded(c6_bench_determinism))),
        ("normalization properties", Box::new(|| guarded(c7_normalization))),
        ("live smoke", Box::new(c8_live_smoke)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let line = match check() {
            Outcome::Pass(d) => format!("PASS  criterion {}: {name} ({d})", i + 1),
            Outcome::Skip(d) => format!("SKIP  criterion {}: {name} ({d})", i + 1),
            Outcome::Fail(d) => {
                failed += 1;
                format!("FAIL  criterion {}: {name} ({d})", i + 1)
            }
        };
        println!("{line}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
