//! Trains the standalone accept/reject policy on a fixed pool of synthetic
//! circuits and evaluates it against its own untrained starting point.
//!
//! ```bash
//! cargo run --release -p analayout --example train_policy
//! ```

use analayout::model::Circuit;
use analayout::rl::{
    desk_accept_reject_ppo, synthetic_with_folded_count, train_on_circuits, EnvConfig,
    FloorplanEnv, PolicyNet, TrainConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean_episode_best(
    pool: &[Circuit],
    policy: &PolicyNet,
    steps: usize,
    episodes: usize,
    seed0: u64,
) -> analayout::Result<f64> {
    let mut cfg = EnvConfig::accept_reject();
    cfg.steps_per_episode = steps;
    let mut total = 0.0;
    for e in 0..episodes {
        let mut env = FloorplanEnv::new(&pool[e % pool.len()], cfg.clone(), seed0 + e as u64)?;
        let mut obs = env.reset()?;
        loop {
            let step = env.step(policy.act_greedy(&obs).0)?;
            obs = step.obs;
            if step.done {
                break;
            }
        }
        total += env.best_cost();
    }
    Ok(total / episodes as f64)
}

fn main() -> analayout::Result<()> {
    let devices = 5;
    let mut cfg = TrainConfig::accept_reject();
    cfg.ppo = desk_accept_reject_ppo(cfg.ppo);
    cfg.ppo.episodes = 30;
    cfg.episodes_per_circuit = 1;
    let steps = cfg.ppo.steps_per_episode;

    let mut gen = ChaCha8Rng::seed_from_u64(1000);
    let pool: Vec<Circuit> = (0..4)
        .map(|_| synthetic_with_folded_count(devices, &mut gen))
        .collect();
    println!(
        "training accept/reject policy on {} fixed circuits ({} episodes x {steps} steps)...",
        pool.len(),
        cfg.ppo.episodes
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut policy = PolicyNet::new(5 + 4 * devices, 2, &mut rng);
    let untrained = policy.clone();
    let log = train_on_circuits(&mut policy, &pool, &cfg, &mut rng)?;
    println!(
        "mean reward per step: first episode {:+.5}, last episode {:+.5}",
        log.episodes.first().unwrap().mean_reward,
        log.episodes.last().unwrap().mean_reward
    );

    let trained_best = mean_episode_best(&pool, &policy, steps, 20, 50_000)?;
    let untrained_best = mean_episode_best(&pool, &untrained, steps, 20, 50_000)?;
    println!(
        "mean episode best-cost over 20 evaluation episodes: trained {trained_best:.4} vs untrained {untrained_best:.4} ({:+.1}%)",
        100.0 * (trained_best - untrained_best) / untrained_best
    );
    Ok(())
}
