//! Random training circuits: blocks with a handful of equal-area shape
//! variants, sparse nets, and optional symmetry/alignment constraints.

use rand::Rng;

use crate::model::{
    fold_symmetry, validate_circuit, Block, Circuit, ConstraintSet, Net, Pin, ShapeVariant,
    Weights,
};

/// Inclusive device-count range the generator accepts.
pub const DEVICE_RANGE: (usize, usize) = (5, 20);

/// Block areas are drawn log-uniformly from this range (µm²).
pub const AREA_RANGE: (f64, f64) = (2.0, 60.0);

fn log_uniform<R: Rng>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Generates one synthetic circuit with `n` devices: 1-4 equal-area shape
/// variants per block, about `1.5 n` random nets of 2-4 pins, a symmetry
/// pair and an alignment group each present with probability one half, and
/// a target aspect ratio uniform in `[0.5, 2]`.
pub fn generate_synthetic_circuit<R: Rng>(n: usize, rng: &mut R) -> Circuit {
    assert!(
        (DEVICE_RANGE.0..=DEVICE_RANGE.1).contains(&n),
        "device count {n} outside {DEVICE_RANGE:?}"
    );
    let tag: u32 = rng.random();

    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let area = log_uniform(AREA_RANGE.0, AREA_RANGE.1, rng);
        let k = rng.random_range(1..=4usize);
        let mut variants = Vec::with_capacity(k);
        for _ in 0..k {
            let ratio = log_uniform(1.0 / 3.0, 3.0, rng);
            let width = (area * ratio).sqrt();
            let height = area / width;
            if !variants
                .iter()
                .any(|v: &ShapeVariant| (v.width - width).abs() < 1e-9)
            {
                variants.push(ShapeVariant::new(width, height));
            }
        }
        blocks.push(Block::new(format!("M{i}"), variants).rotatable(rng.random_bool(0.5)));
    }

    let net_count = (1.5 * n as f64).round() as usize;
    let mut nets = Vec::with_capacity(net_count);
    for i in 0..net_count {
        let pins = rng.random_range(2..=4usize).min(n);
        let mut chosen: Vec<usize> = Vec::with_capacity(pins);
        while chosen.len() < pins {
            let b = rng.random_range(0..n);
            if !chosen.contains(&b) {
                chosen.push(b);
            }
        }
        nets.push(Net::new(
            format!("n{i}"),
            chosen
                .into_iter()
                .map(|b| Pin::center(format!("M{b}")))
                .collect(),
        ));
    }

    let mut constraints = ConstraintSet::default();
    if rng.random_bool(0.5) {
        let a = rng.random_range(0..n);
        let b = {
            let raw = rng.random_range(0..n - 1);
            if raw >= a {
                raw + 1
            } else {
                raw
            }
        };
        // Pair members must share variant dimensions for the fold.
        blocks[b].variants = blocks[a].variants.clone();
        constraints.symmetry_pairs = vec![(format!("M{a}"), format!("M{b}"))];
    }
    if rng.random_bool(0.5) {
        let size = rng.random_range(2..=3usize).min(n);
        let mut members: Vec<usize> = Vec::new();
        while members.len() < size {
            let b = rng.random_range(0..n);
            if !members.contains(&b) {
                members.push(b);
            }
        }
        let group: Vec<String> = members.into_iter().map(|b| format!("M{b}")).collect();
        if rng.random_bool(0.5) {
            constraints.h_align = vec![group];
        } else {
            constraints.v_align = vec![group];
        }
    }

    let mut circuit = Circuit::new(format!("syn{n}-{tag:08x}"), blocks, nets);
    circuit.constraints = constraints;
    circuit.weights = Weights::default();
    circuit.target_aspect_ratio = rng.random_range(0.5..=2.0);
    debug_assert!(validate_circuit(&circuit).is_valid());
    circuit
}

/// Draws circuits until one folds to exactly `n` placeable blocks, so the
/// observation dimension matches a policy trained for `n`.
pub fn synthetic_with_folded_count<R: Rng>(n: usize, rng: &mut R) -> Circuit {
    loop {
        for nominal in [n, n + 1] {
            if !(DEVICE_RANGE.0..=DEVICE_RANGE.1).contains(&nominal) {
                continue;
            }
            let circuit = generate_synthetic_circuit(nominal, rng);
            let folded = fold_symmetry(&circuit).expect("generated pairs always fold");
            if folded.circuit.blocks.len() == n {
                return circuit;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = generate_synthetic_circuit(5, &mut ChaCha8Rng::seed_from_u64(12));
        let b = generate_synthetic_circuit(5, &mut ChaCha8Rng::seed_from_u64(12));
        assert_eq!(a, b);
        assert!(validate_circuit(&a).is_valid());
    }

    #[test]
    fn symmetry_pair_frequency_is_about_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = 1000;
        let with_pair = (0..draws)
            .filter(|_| {
                !generate_synthetic_circuit(8, &mut rng)
                    .constraints
                    .symmetry_pairs
                    .is_empty()
            })
            .count();
        let frac = with_pair as f64 / draws as f64;
        assert!((frac - 0.5).abs() <= 0.05, "pair fraction {frac}");
    }

    #[test]
    fn aspect_targets_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let c = generate_synthetic_circuit(11, &mut rng);
            assert!((0.5..=2.0).contains(&c.target_aspect_ratio));
            assert!((c.nets.len() as f64 - 1.5 * 11.0).abs() < 1.0);
            for b in &c.blocks {
                assert!(!b.variants.is_empty() && b.variants.len() <= 4);
            }
        }
    }

    #[test]
    fn folded_count_helper_hits_the_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let c = synthetic_with_folded_count(6, &mut rng);
            let folded = fold_symmetry(&c).unwrap();
            assert_eq!(folded.circuit.blocks.len(), 6);
        }
    }
}
