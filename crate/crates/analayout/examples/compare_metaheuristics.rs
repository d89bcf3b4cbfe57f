//! Annealing vs genetic search vs particle swarm on the same circuit.
//!
//! ```bash
//! cargo run -p analayout --example compare_metaheuristics
//! ```

use std::path::Path;

use analayout::cost::{empty_space, hpwl, CostModel};
use analayout::io::parse_circuit;
use analayout::model::fold_symmetry;
use analayout::search::{
    genetic_search, particle_swarm, simulated_annealing, GaConfig, Objective, PsoConfig, SaConfig,
};
use analayout::seqpair::SequencePair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> analayout::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let circuit = parse_circuit(&root.join("fixtures/ota5.json"))?;
    let folded = fold_symmetry(&circuit)?;

    println!(
        "{:<6} {:>10} {:>12} {:>12} {:>10}",
        "algo", "cost", "empty %", "hpwl um", "time s"
    );
    for algo in ["sa", "ga", "pso"] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
        let result = match algo {
            "sa" => {
                let init = SequencePair::random(&folded.circuit.blocks, &mut rng);
                simulated_annealing(&mut obj, init, &SaConfig::new(15.0, 5000), &mut rng)?
            }
            "ga" => genetic_search(&mut obj, &GaConfig::default(), &mut rng)?,
            _ => particle_swarm(&mut obj, &PsoConfig::default(), &mut rng)?,
        };
        let placement = folded.unfold(&result.best_placement);
        println!(
            "{:<6} {:>10.4} {:>12.2} {:>12.2} {:>10.3}",
            algo,
            result.best_cost,
            empty_space(&placement),
            hpwl(&circuit, &placement)?,
            result.wall_time_s
        );
    }
    Ok(())
}
