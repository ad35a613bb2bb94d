//! Print the concrete syntax tree the initial prompt embeds.
//!
//!     cargo run --example cst_dump -- path/to/file.py [--sexpr]

use std::env;
use std::fs;

use typeloop::corpus::SourceSnippet;
use typeloop::cst::{parse_to_cst, render_cst, RenderStyle, DEFAULT_CST_BYTE_BUDGET};

const DEMO: &str = "def area(w, h):\n    return w * h\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let sexpr = args.iter().any(|a| a == "--sexpr");
    let code = match args.iter().find(|a| !a.starts_with("--")) {
        Some(path) => fs::read_to_string(path)?,
        None => DEMO.to_string(),
    };
    let dump = parse_to_cst(&SourceSnippet::new("input.py", "input.py", code), DEFAULT_CST_BYTE_BUDGET)?;
    if sexpr {
        println!("{}", render_cst(&dump, RenderStyle::SExpr));
    } else {
        println!("{}", dump.text);
    }
    eprintln!("{} nodes, truncated: {}", dump.root.count(), dump.truncated);
    Ok(())
}
