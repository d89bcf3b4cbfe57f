//! Shape-variant enumeration for a device of fixed electrical width.
//!
//! ```bash
//! cargo run -p analayout --example shape_variants
//! ```

use analayout::shapes::{enumerate_shapes, ShapeSpec};

fn main() -> analayout::Result<()> {
    let spec = ShapeSpec {
        total_width: 12.0,
        finger_widths: vec![1.0, 2.0, 3.0],
        fingers: (1, 6),
        multiplicity: (1, 2),
        finger_spacing: 0.2,
        row_height: 1.1,
    };
    println!("legal footprints for total width {} um:", spec.total_width);
    println!("{:>10} {:>8} {:>6} {:>12} {:>12}", "finger um", "fingers", "rows", "width um", "height um");
    for v in enumerate_shapes(&spec)? {
        let p = v.params.unwrap();
        println!(
            "{:>10.2} {:>8} {:>6} {:>12.2} {:>12.2}",
            p.finger_width, p.fingers, p.multiplicity, v.width, v.height
        );
    }

    // An indivisible width has no legal decomposition.
    let bad = ShapeSpec {
        total_width: 7.0,
        finger_widths: vec![2.0],
        fingers: (1, 3),
        multiplicity: (1, 2),
        finger_spacing: 0.0,
        row_height: 1.0,
    };
    println!("\ntotal width 7.0 with 2.0 um fingers: {:?}", enumerate_shapes(&bad).err());
    Ok(())
}
