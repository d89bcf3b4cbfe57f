use analayout::model::Circuit;
use analayout::rl::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run2(tag: &str, cyclic: bool, epc: usize, lr: f64, ent: f64, vc: f64, steps: usize) {
    let devices = 5;
    let (mut first_total, mut last_total) = (0.0, 0.0);
    for seed in SEED0..SEED0+5 {
        let mut cfg = TrainConfig::accept_reject();
        cfg.ppo.episodes = 30;
        cfg.ppo.steps_per_episode = steps;
        cfg.ppo.epochs_per_update = 10;
        cfg.ppo.learning_rate = lr;
        cfg.ppo.entropy_coeff = ent;
        cfg.ppo.value_coeff = vc;
        cfg.episodes_per_circuit = epc;
        cfg.cyclic = cyclic;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, log) = train(devices, &cfg, &mut rng).unwrap();
        let mean = |xs: &[EpisodeLog]| xs.iter().map(|e| e.best_cost).sum::<f64>() / xs.len() as f64;
        first_total += mean(&log.episodes[..5]);
        last_total += mean(&log.episodes[log.episodes.len()-5..]);
    }
    println!("{tag}: first5 {:.4} last5 {:.4} (delta {:+.4})", first_total/5.0, last_total/5.0, last_total/5.0 - first_total/5.0);
}

fn run(tag: &str, stream: bool, lr: f64, ent: f64, vc: f64, steps: usize) {
    let devices = 5;
    let (mut first_total, mut last_total) = (0.0, 0.0);
    for seed in SEED0..SEED0+5 {
        let mut cfg = TrainConfig::accept_reject();
        cfg.ppo.episodes = 30;
        cfg.ppo.steps_per_episode = steps;
        cfg.ppo.epochs_per_update = 10;
        cfg.ppo.learning_rate = lr;
        cfg.ppo.entropy_coeff = ent;
        cfg.ppo.value_coeff = vc;
        cfg.episodes_per_circuit = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log = if stream {
            let (_, log) = train(devices, &cfg, &mut rng).unwrap();
            log
        } else {
            let mut gen = ChaCha8Rng::seed_from_u64(1000 + seed);
            let pool: Vec<Circuit> = (0..4).map(|_| synthetic_with_folded_count(devices, &mut gen)).collect();
            let mut policy = PolicyNet::new(5 + 4 * devices, 2, &mut rng);
            train_on_circuits(&mut policy, &pool, &cfg, &mut rng).unwrap()
        };
        let mean = |xs: &[EpisodeLog]| xs.iter().map(|e| e.best_cost).sum::<f64>() / xs.len() as f64;
        first_total += mean(&log.episodes[..5]);
        last_total += mean(&log.episodes[log.episodes.len()-5..]);
    }
    println!("{tag}: first5 {:.4} last5 {:.4} (delta {:+.4})", first_total/5.0, last_total/5.0, last_total/5.0 - first_total/5.0);
}

const SEED0: u64 = 10;
fn main() {
    run2("cyclic epc4 default s5", true, 4, 3e-4, 0.01, 0.5, 400);
}
