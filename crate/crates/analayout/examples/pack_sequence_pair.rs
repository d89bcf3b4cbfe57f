//! Sequence-pair mechanics: relation queries, packing, and the move set.
//!
//! ```bash
//! cargo run -p analayout --example pack_sequence_pair
//! ```

use analayout::model::{Block, Circuit, ShapeVariant};
use analayout::seqpair::{pack, Move, SequencePair};

fn main() -> analayout::Result<()> {
    let blocks = vec![
        Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]).rotatable(true),
        Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
        Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]).rotatable(true),
    ];
    let circuit = Circuit::new("demo", blocks, vec![]);

    // gamma1 = (a, b, c), gamma2 = (c, a, b): c sits below a and b.
    let sp = SequencePair::from_parts(vec![0, 1, 2], vec![2, 0, 1], vec![false; 3], vec![0; 3]);
    for (i, j) in [("a", "b"), ("a", "c"), ("b", "c")] {
        println!("relation({i}, {j}) = {:?}", sp.relation_by_id(&circuit, i, j)?);
    }

    let placement = pack(&sp, &circuit)?;
    println!("\npacked {}x{} (area {}):", placement.width, placement.height, placement.area());
    for (id, r) in &placement.rects {
        println!("  {id}: ({}, {}) {}x{}", r.x, r.y, r.w, r.h);
    }

    // Rotating `c` swaps its footprint in the next packing.
    let rotated = sp.apply(Move::Rotate(2));
    let placement = pack(&rotated, &circuit)?;
    let c = &placement.rects["c"];
    println!("\nafter rotating c: c is {}x{}, area {}", c.w, c.h, placement.area());
    Ok(())
}
