//! Normalize type expressions the way the scorer does.
//!
//!     cargo run --example normalize_types -- "typing.Optional[ list[str] ]"

use typeloop::eval::{base_type, normalize};

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = ["list[int]", "typing.Dict[str, Any]", "int | None", "Union[str, int]", "'Tree'"]
            .map(String::from)
            .to_vec();
    }
    for raw in &inputs {
        let n = normalize(raw);
        println!("{raw:<28} -> {n:<24} base {}", base_type(&n));
    }
}
