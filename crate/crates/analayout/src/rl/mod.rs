//! Learning-based floorplanning: the decision-process environments, a
//! from-scratch PPO trainer, synthetic training circuits, model
//! serialization, and inference wrappers that slot into the benchmark
//! runner next to the classic metaheuristics.

pub mod env;
pub mod net;
pub mod ppo;
pub mod synth;

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use env::{
    EnvConfig, EnvMode, FloorplanEnv, RewardSign, RewardSpec, Step, StepInfo, ACTION_ACCEPT,
    ACTION_REJECT,
};
pub use net::{Mlp, PolicyNet};
pub use ppo::{PpoConfig, PpoReport, PpoUpdater, Rollout};
pub use synth::{generate_synthetic_circuit, synthetic_with_folded_count};

use crate::error::{Error, Result};
use crate::model::{fold_symmetry, Circuit};
use crate::search::{SaConfig, SearchResult, TracePoint};

/// Episode counts and environment wiring around the PPO core.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub mode: EnvMode,
    pub ppo: PpoConfig,
    pub reward: RewardSpec,
    /// Fresh synthetic circuit every this many episodes.
    pub episodes_per_circuit: usize,
    pub cyclic: bool,
    pub refine: SaConfig,
}

impl TrainConfig {
    /// Hybrid-mode defaults: short proposal episodes, ten optimization
    /// epochs, cyclic continuation and a 2000-step refinement at 15 degrees.
    pub fn hybrid() -> Self {
        Self {
            mode: EnvMode::Hybrid,
            ppo: PpoConfig {
                steps_per_episode: 128,
                epochs_per_update: 10,
                minibatch: 32,
                episodes: 100,
                ..PpoConfig::default()
            },
            reward: RewardSpec::default(),
            episodes_per_circuit: 4,
            cyclic: true,
            refine: SaConfig::new(15.0, 2000),
        }
    }

    /// Accept/reject-mode defaults: long episodes and a deeper update.
    pub fn accept_reject() -> Self {
        Self {
            mode: EnvMode::AcceptReject,
            ppo: PpoConfig {
                steps_per_episode: 5000,
                epochs_per_update: 50,
                minibatch: 64,
                episodes: 30,
                ..PpoConfig::default()
            },
            reward: RewardSpec::default(),
            episodes_per_circuit: 1,
            cyclic: false,
            refine: SaConfig::new(15.0, 2000),
        }
    }

    pub fn for_mode(mode: EnvMode) -> Self {
        match mode {
            EnvMode::Hybrid => Self::hybrid(),
            EnvMode::AcceptReject => Self::accept_reject(),
        }
    }

    fn env_config(&self) -> EnvConfig {
        EnvConfig {
            mode: self.mode,
            cyclic: self.cyclic,
            steps_per_episode: self.ppo.steps_per_episode,
            reward: self.reward,
            refine: self.refine,
            cost_model: crate::cost::CostModel::Combined,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub circuit: String,
    pub mean_reward: f64,
    pub best_cost: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeLog>,
}

/// How training draws its circuits.
enum CircuitSource<'a> {
    /// Fresh synthetic circuit every `episodes_per_circuit` episodes.
    Stream { devices: usize },
    /// Fixed set visited round-robin.
    Pool(&'a [Circuit]),
}

fn train_loop(
    policy: &mut PolicyNet,
    source: CircuitSource,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainLog> {
    cfg.ppo.validate();
    let mut updater = PpoUpdater::new(policy, &cfg.ppo);
    let mut log = TrainLog::default();

    let mut env: Option<FloorplanEnv> = None;
    for episode in 0..cfg.ppo.episodes {
        let rotate = episode % cfg.episodes_per_circuit.max(1) == 0;
        if rotate || env.is_none() {
            let circuit = match source {
                CircuitSource::Stream { devices } => synthetic_with_folded_count(devices, rng),
                CircuitSource::Pool(pool) => {
                    pool[(episode / cfg.episodes_per_circuit.max(1)) % pool.len()].clone()
                }
            };
            let env_seed = rng.random();
            env = Some(FloorplanEnv::new(&circuit, cfg.env_config(), env_seed)?);
        }
        let env = env.as_mut().expect("created above");
        let mut obs = env.reset()?;
        let mut rollout = Rollout::new();
        let mut reward_sum = 0.0;
        loop {
            let (action, log_prob, value) = policy.act(&obs, rng);
            let step = env.step(action)?;
            reward_sum += step.reward;
            rollout.push(obs, action, log_prob, step.reward, value, step.done);
            obs = step.obs;
            if step.done {
                break;
            }
        }
        let report = updater.update(policy, &rollout, &cfg.ppo, rng)?;
        log.episodes.push(EpisodeLog {
            episode,
            circuit: env.folded().circuit.name.clone(),
            mean_reward: reward_sum / rollout.len() as f64,
            best_cost: env.best_cost(),
            policy_loss: report.policy_loss,
            value_loss: report.value_loss,
            entropy: report.entropy,
        });
    }
    Ok(log)
}

/// Trains one policy for circuits that fold to exactly `devices` blocks,
/// streaming fresh synthetic circuits. Each episode collects one on-policy
/// rollout and applies one PPO update.
pub fn train(
    devices: usize,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(PolicyNet, TrainLog)> {
    let obs_dim = 5 + 4 * devices;
    let mut policy = PolicyNet::new(obs_dim, cfg.mode.action_count(), rng);
    let log = train_loop(&mut policy, CircuitSource::Stream { devices }, cfg, rng)?;
    Ok((policy, log))
}

/// Trains `policy` in place on a fixed circuit set, visiting it round-robin.
/// All circuits must fold to the device count the policy was built for.
pub fn train_on_circuits(
    policy: &mut PolicyNet,
    circuits: &[Circuit],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainLog> {
    assert!(!circuits.is_empty());
    train_loop(policy, CircuitSource::Pool(circuits), cfg, rng)
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

/// On-disk policy format. Version 1: JSON with layer dims and flat
/// parameter vectors for both networks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub mode: EnvMode,
    pub devices: usize,
    pub reward: RewardSpec,
    pub obs_dim: usize,
    pub action_count: usize,
    pub policy: PolicyNet,
}

impl ModelFile {
    pub fn new(policy: PolicyNet, mode: EnvMode, devices: usize, reward: RewardSpec) -> Self {
        Self {
            format_version: 1,
            mode,
            devices,
            reward,
            obs_dim: policy.obs_dim(),
            action_count: policy.action_count(),
            policy,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("model serializes");
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::InputFile {
            path: path.display().to_string(),
            source,
        })?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if file.format_version != 1 {
            return Err(Error::ModelMismatch(format!(
                "unsupported format version {}",
                file.format_version
            )));
        }
        if file.obs_dim != file.policy.obs_dim()
            || file.action_count != file.policy.action_count()
        {
            return Err(Error::ModelMismatch(
                "header dims disagree with stored parameters".to_string(),
            ));
        }
        Ok(file)
    }

    /// Checks the model against a circuit and mode before inference.
    pub fn check(&self, mode: EnvMode, folded_blocks: usize) -> Result<()> {
        if self.mode != mode {
            return Err(Error::ModelMismatch(format!(
                "model trained for {:?}, requested {:?}",
                self.mode, mode
            )));
        }
        let expect = 5 + 4 * folded_blocks;
        if self.obs_dim != expect {
            return Err(Error::ModelMismatch(format!(
                "model expects observation dim {}, circuit folds to {} blocks (dim {})",
                self.obs_dim, folded_blocks, expect
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

/// Hybrid inference: a trained proposer runs `rounds` cyclic episodes, each
/// refined by annealing; the best refined state wins. Proposal actions are
/// sampled from the policy with a seeded stream, as during training.
pub fn hybrid_search(
    circuit: &Circuit,
    policy: &PolicyNet,
    rounds: usize,
    steps_per_episode: usize,
    refine: SaConfig,
    seed: u64,
) -> Result<SearchResult> {
    let start = Instant::now();
    let cfg = EnvConfig {
        mode: EnvMode::Hybrid,
        cyclic: true,
        steps_per_episode,
        reward: RewardSpec::default(),
        refine,
        cost_model: crate::cost::CostModel::Combined,
    };
    let mut env = FloorplanEnv::new(circuit, cfg, seed)?;
    let mut action_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ac71_0b5e_11e5);
    let mut best: Option<(f64, SearchResult)> = None;
    let mut trace = Vec::new();
    for round in 0..rounds.max(1) {
        let mut obs = env.reset()?;
        loop {
            let (action, _, _) = policy.act(&obs, &mut action_rng);
            let step = env.step(action)?;
            obs = step.obs;
            if step.done {
                break;
            }
        }
        let (state, placement) = env.best_state();
        let cost = env.best_cost();
        trace.push(TracePoint {
            step: round,
            current: cost,
            best: best.as_ref().map_or(cost, |(b, _)| cost.min(*b)),
        });
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((
                cost,
                SearchResult {
                    best_state: state.clone(),
                    best_placement: placement.clone(),
                    best_cost: cost,
                    trace: Vec::new(),
                    wall_time_s: 0.0,
                    evaluations: 0,
                },
            ));
        }
    }
    let (_, mut result) = best.expect("at least one round ran");
    result.trace = trace;
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Accept/reject inference: one long greedy episode of the trained policy.
pub fn policy_search(
    circuit: &Circuit,
    policy: &PolicyNet,
    steps: usize,
    seed: u64,
) -> Result<SearchResult> {
    let start = Instant::now();
    let cfg = EnvConfig {
        mode: EnvMode::AcceptReject,
        cyclic: false,
        steps_per_episode: steps,
        reward: RewardSpec::default(),
        refine: SaConfig::new(15.0, 1),
        cost_model: crate::cost::CostModel::Combined,
    };
    let mut env = FloorplanEnv::new(circuit, cfg, seed)?;
    let mut obs = env.reset()?;
    let mut trace = Vec::with_capacity(steps);
    for step_idx in 0..steps {
        let (action, _, _) = policy.act_greedy(&obs);
        let step = env.step(action)?;
        obs = step.obs;
        trace.push(TracePoint {
            step: step_idx,
            current: env.current_cost(),
            best: env.best_cost(),
        });
        if step.done {
            break;
        }
    }
    let (state, placement) = env.best_state();
    Ok(SearchResult {
        best_state: state.clone(),
        best_placement: placement.clone(),
        best_cost: env.best_cost(),
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluations: 0,
    })
}

/// Trains a quick model for `circuit`'s folded device count when no saved
/// model is supplied; used by the CLI and benchmark paths.
pub fn train_for_circuit(
    circuit: &Circuit,
    mode: EnvMode,
    episodes: usize,
    seed: u64,
) -> Result<(PolicyNet, usize)> {
    let folded = fold_symmetry(circuit)?;
    let devices = folded.circuit.blocks.len();
    let mut cfg = TrainConfig::for_mode(mode);
    cfg.ppo.episodes = episodes;
    if mode == EnvMode::AcceptReject {
        // Desk-scale on-the-fly budget; full budgets come from `train`.
        cfg.ppo = desk_accept_reject_ppo(cfg.ppo);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (policy, _) = train(devices, &cfg, &mut rng)?;
    Ok((policy, devices))
}

/// Short-episode accept/reject settings that train stably in tens of
/// episodes: a hotter entropy bonus keeps the policy off the all-reject
/// fixed point and a heavier value loss speeds up credit assignment.
pub fn desk_accept_reject_ppo(base: PpoConfig) -> PpoConfig {
    PpoConfig {
        steps_per_episode: 400,
        epochs_per_update: 10,
        learning_rate: 1e-3,
        entropy_coeff: 0.02,
        value_coeff: 1.0,
        ..base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Circuit, Net, Pin, ShapeVariant};

    fn small_circuit() -> Circuit {
        let blocks: Vec<Block> = (0..5)
            .map(|i| {
                Block::new(
                    format!("M{i}"),
                    vec![
                        ShapeVariant::new(1.0 + 0.4 * i as f64, 2.0),
                        ShapeVariant::new(2.0, 1.0 + 0.4 * i as f64),
                    ],
                )
                .rotatable(true)
            })
            .collect();
        let nets = (0..4)
            .map(|i| {
                Net::new(
                    format!("n{i}"),
                    vec![Pin::center(format!("M{i}")), Pin::center(format!("M{}", i + 1))],
                )
            })
            .collect();
        Circuit::new("small", blocks, nets)
    }

    #[test]
    fn hybrid_training_smoke() {
        let mut cfg = TrainConfig::hybrid();
        cfg.ppo.episodes = 2;
        cfg.ppo.steps_per_episode = 16;
        cfg.refine = SaConfig::new(15.0, 50);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (policy, log) = train(5, &cfg, &mut rng).unwrap();
        assert_eq!(policy.action_count(), 4);
        assert_eq!(policy.obs_dim(), 25);
        assert_eq!(log.episodes.len(), 2);
        assert!(log.episodes.iter().all(|e| e.best_cost.is_finite()));
    }

    #[test]
    fn model_file_round_trip_preserves_log_probs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let policy = PolicyNet::new(25, 2, &mut rng);
        let file = ModelFile::new(policy.clone(), EnvMode::AcceptReject, 5, RewardSpec::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        file.save(&path).unwrap();
        let loaded = ModelFile::load(&path).unwrap();

        use rand::Rng as _;
        for _ in 0..20 {
            let obs: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(policy.log_probs(&obs), loaded.policy.log_probs(&obs));
        }
    }

    #[test]
    fn model_check_rejects_wrong_mode_and_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let policy = PolicyNet::new(25, 2, &mut rng);
        let file = ModelFile::new(policy, EnvMode::AcceptReject, 5, RewardSpec::default());
        assert!(file.check(EnvMode::AcceptReject, 5).is_ok());
        assert!(file.check(EnvMode::Hybrid, 5).is_err());
        assert!(file.check(EnvMode::AcceptReject, 6).is_err());
    }

    #[test]
    fn hybrid_inference_runs_rounds_and_returns_finite_best() {
        let c = small_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let policy = PolicyNet::new(25, 4, &mut rng);
        let res = hybrid_search(&c, &policy, 2, 16, SaConfig::new(15.0, 100), 7).unwrap();
        assert!(res.best_cost.is_finite());
        assert_eq!(res.trace.len(), 2);
        assert!(res.best_placement.non_overlapping());
    }

    #[test]
    fn policy_inference_is_deterministic() {
        let c = small_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let policy = PolicyNet::new(25, 2, &mut rng);
        let a = policy_search(&c, &policy, 120, 9).unwrap();
        let b = policy_search(&c, &policy, 120, 9).unwrap();
        assert_eq!(a.best_cost, b.best_cost);
        assert_eq!(a.best_state, b.best_state);
    }
}
