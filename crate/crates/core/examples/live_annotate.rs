//! Annotate one file against a live chat-completions endpoint.
//!
//! The API key is read from the environment variable named by
//! `api_key_env` (default `OPENAI_API_KEY`); it is never taken from
//! arguments.
//!
//!     OPENAI_API_KEY=... cargo run --example live_annotate -- file.py [model]

use std::sync::Arc;

use typeloop::checker::{Mypy, MypyConfig};
use typeloop::corpus::SourceSnippet;
use typeloop::llm::{LlmConfig, LlmGateway};
use typeloop::pipeline::{Annotator, LoopConfig};
use typeloop::prompt::PromptSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: live_annotate FILE.py [MODEL]");
        std::process::exit(2);
    };
    let code = std::fs::read_to_string(&path)?;
    let mut llm = LlmConfig::default();
    if let Some(model) = args.next() {
        llm.model_id = model;
    }
    if std::env::var_os(&llm.api_key_env).is_none() {
        eprintln!("{} is not set", llm.api_key_env);
        std::process::exit(2);
    }
    let config = LoopConfig { llm, ..LoopConfig::default() };
    let gateway = LlmGateway::from_config(&config.llm)?;
    let checker = Arc::new(Mypy::new(MypyConfig::default())?);
    let annotator = Annotator::new(gateway, checker, PromptSet::builtin(), config);

    let result = annotator.annotate_snippet(&SourceSnippet::new(path.clone(), path, code));
    eprintln!("{:?}, {} repair(s), {:.1?}", result.status, result.repair_iterations_used, result.wall_time);
    if let Some(e) = &result.error {
        eprintln!("{e}");
    }
    println!("{}", result.final_code);
    Ok(())
}
