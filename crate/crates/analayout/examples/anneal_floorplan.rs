//! Simulated-annealing floorplan of the bundled 11-device bias circuit,
//! rendered to SVG.
//!
//! ```bash
//! cargo run -p analayout --example anneal_floorplan
//! ```

use std::path::Path;

use analayout::cost::{empty_space, hpwl, CostModel};
use analayout::io::{emit_svg, parse_circuit, SvgOptions};
use analayout::model::fold_symmetry;
use analayout::search::{simulated_annealing, Objective, SaConfig};
use analayout::seqpair::SequencePair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> analayout::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let circuit = parse_circuit(&root.join("fixtures/bias11.json"))?;
    let folded = fold_symmetry(&circuit)?;

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
    let init = SequencePair::random(&folded.circuit.blocks, &mut rng);
    let cfg = SaConfig::new(15.0, 5000);
    let result = simulated_annealing(&mut obj, init, &cfg, &mut rng)?;

    let placement = folded.unfold(&result.best_placement);
    println!(
        "annealed `{}` in {:.2}s over {} evaluations",
        circuit.name, result.wall_time_s, result.evaluations
    );
    println!(
        "  cost {:.4}, area {:.2} um^2, empty space {:.2}%, hpwl {:.2} um",
        result.best_cost,
        placement.area(),
        empty_space(&placement),
        hpwl(&circuit, &placement)?
    );

    let out = std::env::temp_dir().join("analayout-examples");
    std::fs::create_dir_all(&out)?;
    let svg = out.join("bias11_floorplan.svg");
    emit_svg(&placement, &[], &[], &SvgOptions::default(), &svg)?;
    println!("wrote {}", svg.display());
    Ok(())
}
