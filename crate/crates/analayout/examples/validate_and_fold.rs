//! Circuit validation and symmetry folding.
//!
//! Loads the bundled 5-device amplifier, folds its symmetry pair into one
//! mirrored composite block, packs a floorplan and expands it back, showing
//! that the pair ends up mirror-symmetric about the composite's axis.
//!
//! ```bash
//! cargo run -p analayout --example validate_and_fold
//! ```

use std::path::Path;

use analayout::io::parse_circuit;
use analayout::model::{fold_symmetry, validate_circuit};
use analayout::seqpair::{pack, SequencePair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> analayout::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ota5.json");
    let circuit = parse_circuit(&path)?;
    println!(
        "loaded `{}`: {} blocks, {} nets",
        circuit.name,
        circuit.blocks.len(),
        circuit.nets.len()
    );
    let report = validate_circuit(&circuit);
    println!("validation: {}", if report.is_valid() { "clean" } else { "violations!" });

    let folded = fold_symmetry(&circuit)?;
    for fold in &folded.folds {
        let comp = folded.circuit.block(&fold.composite)?;
        println!(
            "folded ({}, {}) -> composite `{}` ({:.2} x {:.2} um)",
            fold.left, fold.right, fold.composite, comp.variants[0].width, comp.variants[0].height
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let placement = loop {
        let sp = SequencePair::random(&folded.circuit.blocks, &mut rng);
        if let Ok(p) = pack(&sp, &folded.circuit) {
            break p;
        }
    };
    let unfolded = folded.unfold(&placement);
    for fold in &folded.folds {
        let comp = &placement.rects[&fold.composite];
        let left = &unfolded.rects[&fold.left];
        let right = &unfolded.rects[&fold.right];
        let axis = comp.x + comp.w / 2.0;
        println!(
            "unfolded: {} at x={:.2}, {} at x={:.2}, mirror axis x={:.2}",
            fold.left, left.x, fold.right, right.x, axis
        );
        let lc = left.x + left.w / 2.0;
        let rc = right.x + right.w / 2.0;
        println!(
            "  center symmetry residual: {:.2e} um",
            (lc + rc - 2.0 * axis).abs()
        );
    }
    Ok(())
}
