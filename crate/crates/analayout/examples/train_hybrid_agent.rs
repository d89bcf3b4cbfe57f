//! Trains the hybrid proposer (policy perturbs, annealing refines, cyclic
//! episodes) at desk scale, saves the model, and compares inference against
//! plain annealing on fresh circuits.
//!
//! ```bash
//! cargo run --release -p analayout --example train_hybrid_agent
//! ```

use analayout::cost::CostModel;
use analayout::model::fold_symmetry;
use analayout::rl::{
    hybrid_search, synthetic_with_folded_count, train, EnvMode, ModelFile, RewardSpec, TrainConfig,
};
use analayout::search::{simulated_annealing, Objective, SaConfig};
use analayout::seqpair::SequencePair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> analayout::Result<()> {
    let devices = 5;
    let mut cfg = TrainConfig::hybrid();
    cfg.ppo.episodes = 80;
    cfg.refine = SaConfig::new(15.0, 2000);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!("training hybrid proposer for {devices}-device circuits ({} episodes)...", cfg.ppo.episodes);
    let (policy, log) = train(devices, &cfg, &mut rng)?;
    let first = &log.episodes[..5];
    let last = &log.episodes[log.episodes.len() - 5..];
    let mean = |xs: &[analayout::rl::EpisodeLog]| {
        xs.iter().map(|e| e.best_cost).sum::<f64>() / xs.len() as f64
    };
    println!("episode best-cost: first five {:.4}, last five {:.4}", mean(first), mean(last));

    let out = std::env::temp_dir().join("analayout-examples");
    std::fs::create_dir_all(&out)?;
    let model_path = out.join("hybrid_n5.json");
    ModelFile::new(policy.clone(), EnvMode::Hybrid, devices, RewardSpec::default())
        .save(&model_path)?;
    println!("saved {}", model_path.display());

    // Comparable-budget comparison on unseen circuits (three proposal plus
    // refinement rounds vs one long annealing run).
    let mut gen = ChaCha8Rng::seed_from_u64(500);
    let trials = 20;
    let (mut hybrid_sum, mut plain_sum) = (0.0, 0.0);
    for t in 0..trials {
        let circuit = synthetic_with_folded_count(devices, &mut gen);
        let hybrid = hybrid_search(&circuit, &policy, 3, 128, SaConfig::new(15.0, 2000), t)?;
        let folded = fold_symmetry(&circuit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
        let init = SequencePair::random(&folded.circuit.blocks, &mut rng);
        let plain = simulated_annealing(&mut obj, init, &SaConfig::new(15.0, 5000), &mut rng)?;
        hybrid_sum += hybrid.best_cost;
        plain_sum += plain.best_cost;
    }
    println!(
        "mean best cost over {trials} fresh circuits: hybrid {:.4} vs plain annealing {:.4}",
        hybrid_sum / trials as f64,
        plain_sum / trials as f64
    );
    Ok(())
}
