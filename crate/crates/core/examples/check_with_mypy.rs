//! Type check a file (or a built-in sample) with mypy and list what it found.

use std::env;
use std::fs;

use typeloop::checker::{Mypy, MypyConfig, TypeChecker};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = match env::args().nth(1) {
        Some(path) => fs::read_to_string(&path)?,
        None => "def half(n: int) -> str:\n    return n // 2\n".to_string(),
    };
    let mypy = Mypy::new(MypyConfig::default())?;
    println!("{}", mypy.version()?);
    let report = mypy.check(&code)?;
    println!("passed: {} (exit {}, {:.2?})", report.passed, report.exit_code, report.duration);
    for d in &report.diagnostics {
        println!("  line {:>4}  {:<14?} {}", d.line, d.category, d.message);
    }
    Ok(())
}
