//! Score annotated files against a ground-truth file.
//!
//!     cargo run --example score_annotations -- truth.json pred_dir/

use std::collections::BTreeMap;
use std::path::PathBuf;

use typeloop::corpus::load_ground_truth;
use typeloop::eval::{compute_metrics, extract_annotations, MetricsOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/metrics3");
    let mut args = std::env::args().skip(1).map(PathBuf::from);
    let truth_path = args.next().unwrap_or_else(|| fixtures.join("truth.json"));
    let pred_dir = args.next().unwrap_or_else(|| fixtures.join("pred"));

    let truth = load_ground_truth(&truth_path)?;
    let mut preds = BTreeMap::new();
    for id in truth.keys() {
        let path = pred_dir.join(id);
        match std::fs::read_to_string(&path) {
            Ok(code) => {
                preds.insert(id.clone(), extract_annotations(&code, id)?);
            }
            Err(_) => eprintln!("no prediction for {id}"),
        }
    }
    let report = compute_metrics(&preds, &truth, &[], MetricsOptions::default())?;
    println!("{}", report.to_table("example"));
    Ok(())
}
