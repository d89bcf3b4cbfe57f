//! Floorplanning as a Markov decision process, in two flavours.
//!
//! * Hybrid mode: the agent picks a perturbation kind per step and a
//!   configured annealing run refines the episode's final state; the
//!   refinement outcome feeds back as a terminal reward.
//! * Accept/reject mode: the environment samples a neighboring state each
//!   step and the agent decides whether to take it.
//!
//! The observation concatenates four cost statistics (current, episode
//! minimum, episode average, sampled neighbor), a phase scalar that plays
//! the role annealing temperature plays, and normalized per-block geometry
//! of the current packing — `5 + 4n` entries for `n` blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::model::{fold_symmetry, validate_circuit, Circuit, FoldedCircuit};
use crate::search::{simulated_annealing, Objective, SaConfig, SearchResult};
use crate::seqpair::{MoveKind, Placement, SequencePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvMode {
    /// Agent proposes perturbations; annealing refines at episode end.
    Hybrid,
    /// Agent accepts or rejects sampled neighbors.
    AcceptReject,
}

impl EnvMode {
    pub fn action_count(self) -> usize {
        match self {
            EnvMode::Hybrid => 4,
            EnvMode::AcceptReject => 2,
        }
    }
}

/// Sign convention of the reward signals. `Improvement` pays for cost
/// decrease, `cost(s) - cost(s')`; `CostDelta` is the raw difference
/// `cost(s') - cost(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSign {
    #[default]
    Improvement,
    CostDelta,
}

impl RewardSign {
    fn apply(self, before: f64, after: f64) -> f64 {
        match self {
            RewardSign::Improvement => before - after,
            RewardSign::CostDelta => after - before,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RewardSpec {
    pub intermediate: RewardSign,
    pub global: RewardSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub mode: EnvMode,
    /// Keep the optimized state across episode boundaries instead of
    /// resetting to a random one.
    pub cyclic: bool,
    pub steps_per_episode: usize,
    pub reward: RewardSpec,
    /// Annealing refinement appended to hybrid episodes.
    pub refine: SaConfig,
    pub cost_model: CostModel,
}

impl EnvConfig {
    pub fn hybrid() -> Self {
        Self {
            mode: EnvMode::Hybrid,
            cyclic: true,
            steps_per_episode: 128,
            reward: RewardSpec::default(),
            refine: SaConfig::new(15.0, 2000),
            cost_model: CostModel::Combined,
        }
    }

    pub fn accept_reject() -> Self {
        Self {
            mode: EnvMode::AcceptReject,
            cyclic: false,
            steps_per_episode: 5000,
            reward: RewardSpec::default(),
            refine: SaConfig::new(15.0, 2000),
            cost_model: CostModel::Combined,
        }
    }
}

/// Action ids in accept/reject mode.
pub const ACTION_ACCEPT: usize = 0;
pub const ACTION_REJECT: usize = 1;

#[derive(Debug, Clone)]
pub struct StepInfo {
    pub intermediate_reward: f64,
    pub global_reward: Option<f64>,
    /// Recorded cost entering / leaving the terminal refinement.
    pub pre_refine_cost: Option<f64>,
    pub post_refine_cost: Option<f64>,
    pub accepted: Option<bool>,
    pub no_op: bool,
}

#[derive(Debug, Clone)]
pub struct Step {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

struct Neighbor {
    state: SequencePair,
    placement: Placement,
    cost: f64,
}

pub struct FloorplanEnv {
    folded: FoldedCircuit,
    objective: Objective,
    cfg: EnvConfig,
    rng: ChaCha8Rng,
    current: SequencePair,
    current_placement: Placement,
    current_cost: f64,
    initial_cost: f64,
    hist_min: f64,
    hist_sum: f64,
    hist_len: usize,
    best_cost: f64,
    best_state: SequencePair,
    best_placement: Placement,
    neighbor: Option<Neighbor>,
    step_idx: usize,
    finished: bool,
    carry: Option<SequencePair>,
}

impl FloorplanEnv {
    pub fn new(circuit: &Circuit, cfg: EnvConfig, seed: u64) -> Result<Self> {
        validate_circuit(circuit).into_result()?;
        let folded = fold_symmetry(circuit)?;
        let mut objective = Objective::new(&folded.circuit, cfg.cost_model);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, placement, _) = Self::feasible_random(&folded, &mut objective, &mut rng)?;
        // A stable wirelength normalizer keeps within-episode rewards
        // comparable; re-evaluate the start state against it.
        objective.warm_tracker(&placement)?;
        let (placement, cost) = objective
            .probe(&state)?
            .expect("feasible state repacks");
        let mut env = Self {
            folded,
            objective,
            cfg,
            rng,
            best_cost: cost,
            best_state: state.clone(),
            best_placement: placement.clone(),
            current: state,
            current_placement: placement,
            current_cost: cost,
            initial_cost: cost,
            hist_min: cost,
            hist_sum: cost,
            hist_len: 1,
            neighbor: None,
            step_idx: 0,
            finished: false,
            carry: None,
        };
        env.sample_neighbor();
        Ok(env)
    }

    fn feasible_random(
        folded: &FoldedCircuit,
        obj: &mut Objective,
        rng: &mut ChaCha8Rng,
    ) -> Result<(SequencePair, Placement, f64)> {
        for _ in 0..200 {
            let state = SequencePair::random(&folded.circuit.blocks, rng);
            if let Some((placement, cost)) = obj.probe(&state)? {
                return Ok((state, placement, cost));
            }
        }
        Err(Error::AlignmentInfeasible {
            group: "no feasible random state after 200 draws".to_string(),
        })
    }

    pub fn mode(&self) -> EnvMode {
        self.cfg.mode
    }

    pub fn action_count(&self) -> usize {
        self.cfg.mode.action_count()
    }

    pub fn observation_len(&self) -> usize {
        5 + 4 * self.folded.circuit.blocks.len()
    }

    pub fn device_count(&self) -> usize {
        self.folded.circuit.blocks.len()
    }

    pub fn folded(&self) -> &FoldedCircuit {
        &self.folded
    }

    pub fn current_cost(&self) -> f64 {
        self.current_cost
    }

    pub fn best_cost(&self) -> f64 {
        self.best_cost
    }

    pub fn best_state(&self) -> (&SequencePair, &Placement) {
        (&self.best_state, &self.best_placement)
    }

    pub fn steps_per_episode(&self) -> usize {
        self.cfg.steps_per_episode
    }

    /// Starts an episode. Cyclic environments continue from the previous
    /// episode's final state (the refined one in hybrid mode); otherwise a
    /// fresh random state is drawn.
    pub fn reset(&mut self) -> Result<Vec<f64>> {
        let carried = if self.cfg.cyclic { self.carry.take() } else { None };
        self.objective.reset_tracker();
        let (state, placement, _) = match carried {
            Some(state) => {
                let (placement, cost) = self
                    .objective
                    .probe(&state)?
                    .expect("carried state was feasible when recorded");
                (state, placement, cost)
            }
            None => Self::feasible_random(&self.folded, &mut self.objective, &mut self.rng)?,
        };
        self.objective.warm_tracker(&placement)?;
        let (placement, cost) = self
            .objective
            .probe(&state)?
            .expect("feasible state repacks");
        self.current = state;
        self.current_placement = placement;
        self.current_cost = cost;
        self.initial_cost = if cost.abs() > 1e-12 { cost } else { 1.0 };
        self.hist_min = cost;
        self.hist_sum = cost;
        self.hist_len = 1;
        self.best_cost = cost;
        self.best_state = self.current.clone();
        self.best_placement = self.current_placement.clone();
        self.step_idx = 0;
        self.finished = false;
        self.neighbor = None;
        self.sample_neighbor();
        Ok(self.observation())
    }

    /// Draws the next neighbor for accept/reject mode; falls back to the
    /// current state when every sampled perturbation packs infeasibly.
    fn sample_neighbor(&mut self) {
        if self.cfg.mode != EnvMode::AcceptReject {
            return;
        }
        for _ in 0..20 {
            let cand = self
                .current
                .perturb_any(&self.folded.circuit.blocks, &mut self.rng)
                .state;
            if let Ok(Some((placement, cost))) = self.objective.probe(&cand) {
                self.neighbor = Some(Neighbor {
                    state: cand,
                    placement,
                    cost,
                });
                return;
            }
        }
        self.neighbor = Some(Neighbor {
            state: self.current.clone(),
            placement: self.current_placement.clone(),
            cost: self.current_cost,
        });
    }

    fn record_cost(&mut self, cost: f64) {
        self.hist_min = self.hist_min.min(cost);
        self.hist_sum += cost;
        self.hist_len += 1;
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_state = self.current.clone();
            self.best_placement = self.current_placement.clone();
        }
    }

    pub fn observation(&self) -> Vec<f64> {
        let scale = self.initial_cost;
        let neighbor_cost = self
            .neighbor
            .as_ref()
            .map_or(self.current_cost, |n| n.cost);
        let mut obs = Vec::with_capacity(self.observation_len());
        obs.push(self.current_cost / scale);
        obs.push(self.hist_min / scale);
        obs.push(self.hist_sum / self.hist_len as f64 / scale);
        obs.push(neighbor_cost / scale);
        obs.push(self.step_idx as f64 / self.cfg.steps_per_episode as f64);
        let (bw, bh) = (
            self.current_placement.width.max(1e-12),
            self.current_placement.height.max(1e-12),
        );
        for block in &self.folded.circuit.blocks {
            let r = &self.current_placement.rects[&block.id];
            obs.push(r.x / bw);
            obs.push(r.y / bh);
            obs.push(r.w / bw);
            obs.push(r.h / bh);
        }
        obs
    }

    pub fn step(&mut self, action: usize) -> Result<Step> {
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        if action >= self.action_count() {
            return Err(Error::IllegalAction {
                action,
                count: self.action_count(),
            });
        }
        let before = self.current_cost;
        let mut info = StepInfo {
            intermediate_reward: 0.0,
            global_reward: None,
            pre_refine_cost: None,
            post_refine_cost: None,
            accepted: None,
            no_op: false,
        };

        match self.cfg.mode {
            EnvMode::Hybrid => {
                let kind = MoveKind::ALL[action];
                let perturbed = self
                    .current
                    .perturb(kind, &self.folded.circuit.blocks, &mut self.rng);
                match self.objective.probe(&perturbed.state)? {
                    Some((placement, cost)) if perturbed.changed => {
                        self.current = perturbed.state;
                        self.current_placement = placement;
                        self.current_cost = cost;
                    }
                    // Infeasible or no-op perturbations leave the state as is.
                    _ => info.no_op = true,
                }
            }
            EnvMode::AcceptReject => {
                let accepted = action == ACTION_ACCEPT;
                info.accepted = Some(accepted);
                if accepted {
                    let n = self.neighbor.take().expect("neighbor presampled");
                    self.current = n.state;
                    self.current_placement = n.placement;
                    self.current_cost = n.cost;
                }
            }
        }
        info.intermediate_reward = self.cfg.reward.intermediate.apply(before, self.current_cost);
        self.record_cost(self.current_cost);
        self.step_idx += 1;

        let done = self.step_idx >= self.cfg.steps_per_episode;
        let mut reward = info.intermediate_reward;
        if done {
            self.finished = true;
            if self.cfg.mode == EnvMode::Hybrid {
                let pre = self.current_cost;
                let refined = self.refine()?;
                let post = refined.best_cost;
                let g = self.cfg.reward.global.apply(pre, post);
                info.global_reward = Some(g);
                info.pre_refine_cost = Some(pre);
                info.post_refine_cost = Some(post);
                reward += g;
                self.current = refined.best_state;
                self.current_placement = refined.best_placement;
                self.current_cost = post;
                self.record_cost(post);
            }
            self.carry = Some(self.current.clone());
        } else {
            self.sample_neighbor();
        }

        Ok(Step {
            obs: self.observation(),
            reward,
            done,
            info,
        })
    }

    fn refine(&mut self) -> Result<SearchResult> {
        simulated_annealing(
            &mut self.objective,
            self.current.clone(),
            &self.cfg.refine,
            &mut self.rng,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Circuit, Net, Pin, ShapeVariant};

    fn circuit(n: usize) -> Circuit {
        let blocks: Vec<Block> = (0..n)
            .map(|i| {
                Block::new(
                    format!("M{i}"),
                    vec![
                        ShapeVariant::new(1.0 + i as f64 * 0.3, 2.0),
                        ShapeVariant::new(2.0, 1.0 + i as f64 * 0.3),
                    ],
                )
                .rotatable(i % 2 == 0)
            })
            .collect();
        let nets = (0..n - 1)
            .map(|i| {
                Net::new(
                    format!("n{i}"),
                    vec![Pin::center(format!("M{i}")), Pin::center(format!("M{}", i + 1))],
                )
            })
            .collect();
        Circuit::new(format!("t{n}"), blocks, nets)
    }

    #[test]
    fn observation_length_is_five_plus_four_per_block() {
        let env = FloorplanEnv::new(&circuit(11), EnvConfig::accept_reject(), 0).unwrap();
        assert_eq!(env.observation_len(), 49);
        assert_eq!(env.observation().len(), 49);
    }

    #[test]
    fn accept_takes_the_neighbor_cost() {
        let mut cfg = EnvConfig::accept_reject();
        cfg.steps_per_episode = 50;
        let mut env = FloorplanEnv::new(&circuit(5), cfg, 3).unwrap();
        env.reset().unwrap();
        let neighbor_cost = env.neighbor.as_ref().unwrap().cost;
        let before = env.current_cost();
        let step = env.step(ACTION_ACCEPT).unwrap();
        assert_eq!(env.current_cost(), neighbor_cost);
        assert!((step.info.intermediate_reward - (before - neighbor_cost)).abs() < 1e-12);
    }

    #[test]
    fn reject_keeps_state_and_pays_zero() {
        let mut cfg = EnvConfig::accept_reject();
        cfg.steps_per_episode = 50;
        let mut env = FloorplanEnv::new(&circuit(5), cfg, 4).unwrap();
        let obs0 = env.reset().unwrap();
        let before = env.current_cost();
        let state_before = env.current.clone();
        let step = env.step(ACTION_REJECT).unwrap();
        assert_eq!(env.current_cost(), before);
        assert_eq!(env.current, state_before);
        assert_eq!(step.reward, 0.0);
        // Phase advanced.
        assert!(step.obs[4] > obs0[4]);
    }

    #[test]
    fn hybrid_terminal_global_reward_matches_refinement_delta() {
        let mut cfg = EnvConfig::hybrid();
        cfg.steps_per_episode = 8;
        cfg.refine = SaConfig::new(15.0, 200);
        let mut env = FloorplanEnv::new(&circuit(5), cfg, 5).unwrap();
        env.reset().unwrap();
        let mut last = None;
        for step_idx in 0.. {
            let action = step_idx % 4;
            let step = env.step(action).unwrap();
            if step.done {
                last = Some(step);
                break;
            }
        }
        let last = last.unwrap();
        let g = last.info.global_reward.expect("terminal step carries it");
        let pre = last.info.pre_refine_cost.unwrap();
        let post = last.info.post_refine_cost.unwrap();
        assert!((g - (pre - post)).abs() < 1e-12);
        assert!((last.reward - (last.info.intermediate_reward + g)).abs() < 1e-12);
    }

    #[test]
    fn cyclic_reset_continues_from_the_refined_state() {
        let mut cfg = EnvConfig::hybrid();
        cfg.steps_per_episode = 4;
        cfg.refine = SaConfig::new(15.0, 100);
        let mut env = FloorplanEnv::new(&circuit(5), cfg, 6).unwrap();
        env.reset().unwrap();
        loop {
            if env.step(0).unwrap().done {
                break;
            }
        }
        let final_state = env.current.clone();
        env.reset().unwrap();
        assert_eq!(env.current, final_state);
    }

    #[test]
    fn non_cyclic_reset_draws_a_fresh_state() {
        let mut cfg = EnvConfig::accept_reject();
        cfg.steps_per_episode = 3;
        cfg.cyclic = false;
        let mut env = FloorplanEnv::new(&circuit(6), cfg, 7).unwrap();
        env.reset().unwrap();
        for _ in 0..3 {
            let _ = env.step(ACTION_REJECT).unwrap();
        }
        let end_state = env.current.clone();
        env.reset().unwrap();
        assert_ne!(env.current, end_state);
    }

    #[test]
    fn illegal_actions_are_rejected() {
        let mut env = FloorplanEnv::new(&circuit(5), EnvConfig::accept_reject(), 8).unwrap();
        env.reset().unwrap();
        assert!(matches!(
            env.step(2),
            Err(Error::IllegalAction { action: 2, count: 2 })
        ));
    }

    #[test]
    fn cost_statistics_track_the_history() {
        let mut cfg = EnvConfig::accept_reject();
        cfg.steps_per_episode = 200;
        let mut env = FloorplanEnv::new(&circuit(5), cfg, 9).unwrap();
        env.reset().unwrap();
        let mut history = vec![env.current_cost()];
        for i in 0..100 {
            let step = env.step(if i % 3 == 0 { ACTION_REJECT } else { ACTION_ACCEPT }).unwrap();
            history.push(env.current_cost());
            let min = history.iter().copied().fold(f64::INFINITY, f64::min);
            let avg = history.iter().sum::<f64>() / history.len() as f64;
            let obs = &step.obs;
            assert!((obs[1] * env.initial_cost - min).abs() < 1e-9);
            assert!((obs[2] * env.initial_cost - avg).abs() < 1e-9);
            assert!(min <= avg + 1e-12);
            assert!(obs.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn episodes_are_deterministic_under_seed() {
        let run = |seed: u64| -> Vec<f64> {
            let mut cfg = EnvConfig::accept_reject();
            cfg.steps_per_episode = 30;
            let mut env = FloorplanEnv::new(&circuit(5), cfg, seed).unwrap();
            env.reset().unwrap();
            let mut out = Vec::new();
            for i in 0..30 {
                let step = env.step(i % 2).unwrap();
                out.push(step.reward);
                out.extend_from_slice(&step.obs);
            }
            out
        };
        assert_eq!(run(21), run(21));
    }
}
