//! Show the initial and repair prompts for a small snippet.

use typeloop::corpus::SourceSnippet;
use typeloop::cst::{parse_to_cst, DEFAULT_CST_BYTE_BUDGET};
use typeloop::prompt::PromptSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prompts = PromptSet::builtin();
    let snippet = SourceSnippet::new("greet.py", "greet.py", "def greet(name):\n    return 'hi ' + name\n");
    let cst = parse_to_cst(&snippet, DEFAULT_CST_BYTE_BUDGET)?;

    let initial = prompts.initial_prompt(&snippet, &cst)?;
    println!("===== initial ({} bytes) =====\n{}", initial.body.len(), initial.body);

    let candidate = "def greet(name: str) -> int:\n    return 'hi ' + name";
    let errors = "temp_code.py:2: error: Incompatible return value type (got \"str\", expected \"int\")  [return-value]";
    let repair = prompts.repair_prompt(&snippet.id, candidate, errors, 1)?;
    println!("===== repair ({} bytes) =====\n{}", repair.body.len(), repair.body);
    Ok(())
}
