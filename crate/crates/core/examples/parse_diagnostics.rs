//! Parse captured mypy output without running mypy, and tally categories.

use typeloop::checker::parse_diagnostics;

const OUTPUT: &str = "\
temp_code.py:12: error: Not all arguments converted during string formatting  [str-format]
temp_code.py:143: error: Missing return statement  [return]
temp_code.py:123: error: Name \"t\" is not defined  [name-defined]
temp_code.py:24: error: No parent module -- cannot perform relative import  [misc]
temp_code.py:372: error: Name \"root\" already defined on line 370  [no-redef]
temp_code.py:372: note: See https://mypy.rtfd.io/en/stable/_refs.html
Found 5 errors in 1 file (checked 1 source file)
";

fn main() {
    for d in parse_diagnostics(OUTPUT) {
        println!("{:<5} {:?}/{:?}: {}", d.line, d.severity, d.category, d.message);
    }
}
