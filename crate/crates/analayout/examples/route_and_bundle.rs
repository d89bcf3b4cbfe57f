//! Full back half of the pipeline: congestion estimation, block
//! redistribution, per-net Steiner routing, segment decomposition and
//! conduit bundling, with SVG and conduit-file output.
//!
//! ```bash
//! cargo run -p analayout --example route_and_bundle
//! ```

use std::path::Path;

use analayout::cost::CostModel;
use analayout::io::{emit_svg, export_conduits, parse_circuit, SvgOptions};
use analayout::model::fold_symmetry;
use analayout::route::{estimate_congestion, redistribute, route_all, RouteConfig};
use analayout::search::{simulated_annealing, Objective, SaConfig};
use analayout::seqpair::SequencePair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> analayout::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let circuit = parse_circuit(&root.join("fixtures/ota8.json"))?;
    let folded = fold_symmetry(&circuit)?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
    let init = SequencePair::random(&folded.circuit.blocks, &mut rng);
    let result = simulated_annealing(&mut obj, init, &SaConfig::new(15.0, 4000), &mut rng)?;
    let mut placement = folded.unfold(&result.best_placement);
    println!("floorplan: {:.2} x {:.2} um", placement.width, placement.height);

    // Congestion-driven refinement until the map is clean (or we give up).
    let (gx, gy, capacity) = (6, 6, 3);
    for pass in 0..10 {
        let map = estimate_congestion(&circuit, &placement, gx, gy, capacity)?;
        println!(
            "pass {pass}: total demand {}, max overflow {}",
            map.total_demand(),
            map.max_overflow()
        );
        if map.max_overflow() == 0 {
            break;
        }
        let next = redistribute(&placement, &map, 0.5);
        if next == placement {
            break;
        }
        placement = next;
    }

    let routing = route_all(&circuit, &placement, &RouteConfig::default())?;
    let total: f64 = routing.trees.iter().map(|t| t.length).sum();
    println!(
        "routed {} nets: total length {:.2} um, {} segments, {} vias, {} conduits",
        routing.trees.len(),
        total,
        routing.segments.len(),
        routing.vias.len(),
        routing.conduits.len()
    );
    for c in routing.conduits.iter().filter(|c| c.nets.len() > 1) {
        println!(
            "  bundled conduit on layer {} at cross {:.2}: nets {:?}, width {:.2}",
            c.layer, c.cross, c.nets, c.width
        );
    }

    let out = std::env::temp_dir().join("analayout-examples");
    std::fs::create_dir_all(&out)?;
    emit_svg(
        &placement,
        &routing.trees,
        &routing.conduits,
        &SvgOptions::default(),
        &out.join("ota8_routed.svg"),
    )?;
    export_conduits(&routing.conduits, &circuit, &out.join("ota8_conduits.json"))?;
    println!("wrote {}", out.join("ota8_routed.svg").display());
    println!("wrote {}", out.join("ota8_conduits.json").display());
    Ok(())
}
