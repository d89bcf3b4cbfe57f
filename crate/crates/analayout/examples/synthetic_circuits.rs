//! Synthetic training-circuit generation: size sweep and constraint
//! frequency check.
//!
//! ```bash
//! cargo run -p analayout --example synthetic_circuits
//! ```

use analayout::model::validate_circuit;
use analayout::rl::generate_synthetic_circuit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [5, 8, 11, 20] {
        let c = generate_synthetic_circuit(n, &mut rng);
        let pairs = c.constraints.symmetry_pairs.len();
        let aligns = c.constraints.h_align.len() + c.constraints.v_align.len();
        println!(
            "{}: {} blocks, {} nets, {} symmetry pair(s), {} alignment group(s), target ratio {:.2}, valid: {}",
            c.name,
            c.blocks.len(),
            c.nets.len(),
            pairs,
            aligns,
            c.target_aspect_ratio,
            validate_circuit(&c).is_valid()
        );
    }

    let draws = 2000;
    let mut with_pair = 0;
    for _ in 0..draws {
        if !generate_synthetic_circuit(8, &mut rng).constraints.symmetry_pairs.is_empty() {
            with_pair += 1;
        }
    }
    println!(
        "\nsymmetry-pair frequency over {draws} draws: {:.1}%",
        100.0 * with_pair as f64 / draws as f64
    );
}
