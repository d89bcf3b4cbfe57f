//! Benchmark table over the bundled circuits: mean/std of runtime, empty
//! space and wirelength per (circuit, algorithm) cell.
//!
//! ```bash
//! cargo run --release -p analayout --example benchmark_suite
//! ```

use std::path::Path;

use analayout::io::{parse_circuit, run_benchmark, write_summary_csv, AlgoKind, BenchConfig, BenchModels};

fn main() -> analayout::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut circuits = Vec::new();
    for name in ["ota5", "ota8", "bias11"] {
        let circuit = parse_circuit(&root.join(format!("fixtures/{name}.json")))?;
        circuits.push((name.to_string(), circuit));
    }

    let cfg = BenchConfig {
        algos: vec![AlgoKind::Sa, AlgoKind::Ga, AlgoKind::Pso],
        repeats: 5,
        seed0: 1,
        ..BenchConfig::default()
    };
    let outcome = run_benchmark(&circuits, &cfg, &BenchModels::default());

    println!(
        "{:<8} {:<5} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "circuit", "algo", "empty %", "+-", "hpwl um", "+-", "time s"
    );
    for row in &outcome.summary {
        println!(
            "{:<8} {:<5} {:>12.2} {:>12.2} {:>12.2} {:>12.2} {:>10.3}",
            row.circuit,
            row.algorithm,
            row.empty_space_mean,
            row.empty_space_std,
            row.hpwl_mean,
            row.hpwl_std,
            row.runtime_mean
        );
    }

    let out = std::env::temp_dir().join("analayout-examples");
    std::fs::create_dir_all(&out)?;
    let csv = out.join("benchmark.csv");
    write_summary_csv(&outcome.summary, &csv)?;
    println!("\nwrote {}", csv.display());
    Ok(())
}
