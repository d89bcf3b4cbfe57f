//! Metaheuristic floorplan search over sequence-pair states: simulated
//! annealing, a genetic algorithm with order crossover, and particle-swarm
//! optimization on a random-keys encoding.

use std::time::Instant;

use rand::Rng;

use crate::cost::{CostModel, Evaluator};
use crate::error::{Error, Result};
use crate::model::Circuit;
use crate::seqpair::{pack_resolved, AlignIndex, MoveKind, Placement, SequencePair};

/// Packs and scores states for one search instance. Owns a copy of the
/// circuit and the cost tracker, so concurrent searches cannot share
/// normalizer state by accident.
pub struct Objective {
    circuit: Circuit,
    align: AlignIndex,
    evaluator: Evaluator,
    evaluations: usize,
}

impl Objective {
    pub fn new(circuit: &Circuit, model: CostModel) -> Self {
        Self {
            align: AlignIndex::resolve(circuit),
            circuit: circuit.clone(),
            evaluator: Evaluator::new(model),
            evaluations: 0,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Clears the wirelength normalizer, as at the start of a fresh run.
    pub fn reset_tracker(&mut self) {
        self.evaluator.tracker = crate::cost::CostTracker::new();
    }

    /// Fills the normalizer window with the placement's wirelength so the
    /// wirelength term starts at one and drifts only slowly afterwards.
    pub fn warm_tracker(&mut self, placement: &Placement) -> Result<()> {
        let wl = crate::cost::hpwl(&self.circuit, placement)?;
        self.evaluator.tracker = crate::cost::CostTracker::new();
        for _ in 0..crate::cost::HPWL_WINDOW {
            self.evaluator.tracker.push(wl);
        }
        Ok(())
    }

    /// Packs and evaluates; `None` marks an alignment-infeasible state,
    /// which searches treat as a rejected move.
    pub fn probe(&mut self, sp: &SequencePair) -> Result<Option<(Placement, f64)>> {
        match pack_resolved(sp, &self.circuit.blocks, &self.align) {
            Ok(placement) => {
                let cost = self.evaluator.evaluate(&self.circuit, &placement)?;
                self.evaluations += 1;
                Ok(Some((placement, cost)))
            }
            Err(Error::AlignmentInfeasible { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub current: f64,
    pub best: f64,
}

/// Draws random states until one packs; alignment-heavy circuits reject a
/// fraction of the uniform state space.
pub fn feasible_random_state<R: Rng>(
    obj: &mut Objective,
    rng: &mut R,
) -> Result<SequencePair> {
    let blocks = obj.circuit().blocks.clone();
    for _ in 0..500 {
        let state = SequencePair::random(&blocks, rng);
        if obj.probe(&state)?.is_some() {
            return Ok(state);
        }
    }
    Err(Error::AlignmentInfeasible {
        group: "no feasible random state after 500 draws".to_string(),
    })
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_state: SequencePair,
    pub best_placement: Placement,
    pub best_cost: f64,
    pub trace: Vec<TracePoint>,
    pub wall_time_s: f64,
    pub evaluations: usize,
}

// ---------------------------------------------------------------------------
// Simulated annealing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaConfig {
    pub t0: f64,
    pub steps: usize,
    /// Geometric temperature ratio applied every step.
    pub cooling: f64,
}

impl SaConfig {
    /// Cooling chosen so the temperature decays from `t0` to 0.01 over the
    /// configured number of steps.
    pub fn new(t0: f64, steps: usize) -> Self {
        assert!(t0 > 0.0 && steps >= 1);
        Self {
            t0,
            steps,
            cooling: (0.01 / t0).powf(1.0 / steps as f64),
        }
    }

    pub fn with_cooling(mut self, cooling: f64) -> Self {
        assert!(cooling > 0.0 && cooling < 1.0);
        self.cooling = cooling;
        self
    }
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig::new(15.0, 5000)
    }
}

/// Metropolis rule: downhill moves always pass, uphill moves pass with
/// probability `exp(-delta / t)`.
pub fn acceptance_probability(delta: f64, t: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else if t <= 0.0 {
        0.0
    } else {
        (-delta / t).exp()
    }
}

pub fn simulated_annealing<R: Rng>(
    obj: &mut Objective,
    init: SequencePair,
    cfg: &SaConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    let start = Instant::now();
    let blocks = obj.circuit().blocks.clone();

    let mut current = init;
    let mut current_cost = f64::INFINITY;
    let mut best: Option<(SequencePair, Placement, f64)> = None;
    if let Some((p, c)) = obj.probe(&current)? {
        current_cost = c;
        best = Some((current.clone(), p, c));
    }

    let mut t = cfg.t0;
    let mut trace = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let kind = MoveKind::ALL[rng.random_range(0..MoveKind::ALL.len())];
        let cand = current.perturb(kind, &blocks, rng).state;
        match obj.probe(&cand)? {
            Some((placement, cost)) => {
                let delta = cost - current_cost;
                if delta <= 0.0 || rng.random::<f64>() < acceptance_probability(delta, t) {
                    current = cand;
                    current_cost = cost;
                    if best.as_ref().is_none_or(|(_, _, b)| cost < *b) {
                        best = Some((current.clone(), placement, cost));
                    }
                }
            }
            // Infeasible packs are rejected moves, except that an infeasible
            // walker keeps wandering until it finds feasible ground.
            None if !current_cost.is_finite() => current = cand,
            None => {}
        }
        t *= cfg.cooling;
        let best_cost = best.as_ref().map_or(f64::INFINITY, |(_, _, b)| *b);
        trace.push(TracePoint {
            step,
            current: current_cost,
            best: best_cost,
        });
    }

    let (best_state, best_placement, best_cost) = best.ok_or(Error::AlignmentInfeasible {
        group: "no feasible state visited".to_string(),
    })?;
    Ok(SearchResult {
        best_state,
        best_placement,
        best_cost,
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluations: obj.evaluations(),
    })
}

// ---------------------------------------------------------------------------
// Genetic algorithm
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub population: usize,
    pub generations: usize,
}

impl Default for GaConfig {
    /// Population and rates sized so one run spends roughly the same number
    /// of cost evaluations as the default annealing budget.
    fn default() -> Self {
        Self {
            mutation_rate: 0.1,
            crossover_rate: 0.9,
            population: 200,
            generations: 25,
        }
    }
}

/// Order crossover on one permutation. The child keeps the first parent's
/// window `[lo, hi]` in place; remaining positions are filled cyclically
/// starting after the window with the second parent's ids in the cyclic
/// order they appear, skipping ids already taken.
pub fn order_crossover(p1: &[usize], p2: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let n = p1.len();
    debug_assert!(lo <= hi && hi < n);
    let mut child = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for i in lo..=hi {
        child[i] = p1[i];
        used[p1[i]] = true;
    }
    let mut fill = (hi + 1) % n;
    for k in 0..n {
        let v = p2[(hi + 1 + k) % n];
        if used[v] {
            continue;
        }
        child[fill] = v;
        used[v] = true;
        fill = (fill + 1) % n;
        while fill >= lo && fill <= hi {
            fill = (fill + 1) % n;
        }
    }
    child
}

struct Individual {
    state: SequencePair,
    cost: f64,
    placement: Option<Placement>,
}

pub fn genetic_search<R: Rng>(
    obj: &mut Objective,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    assert!(cfg.population >= 2);
    let start = Instant::now();
    let blocks = obj.circuit().blocks.clone();
    let n = blocks.len();

    let score = |obj: &mut Objective, state: SequencePair| -> Result<Individual> {
        Ok(match obj.probe(&state)? {
            Some((placement, cost)) => Individual {
                state,
                cost,
                placement: Some(placement),
            },
            None => Individual {
                state,
                cost: f64::INFINITY,
                placement: None,
            },
        })
    };

    let mut population = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let state = SequencePair::random(&blocks, rng);
        population.push(score(obj, state)?);
    }

    let mut best: Option<(SequencePair, Placement, f64)> = None;
    let note_best = |pop: &[Individual], best: &mut Option<(SequencePair, Placement, f64)>| {
        for ind in pop {
            if let Some(p) = &ind.placement {
                if best.as_ref().is_none_or(|(_, _, b)| ind.cost < *b) {
                    *best = Some((ind.state.clone(), p.clone(), ind.cost));
                }
            }
        }
    };
    note_best(&population, &mut best);

    let mut trace = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        let elite_idx = (0..population.len())
            .min_by(|&a, &b| population[a].cost.total_cmp(&population[b].cost))
            .expect("population non-empty");

        let mut next: Vec<Individual> = Vec::with_capacity(cfg.population);
        next.push(Individual {
            state: population[elite_idx].state.clone(),
            cost: population[elite_idx].cost,
            placement: population[elite_idx].placement.clone(),
        });

        let tournament = |rng: &mut R| -> usize {
            let a = rng.random_range(0..cfg.population);
            let b = rng.random_range(0..cfg.population);
            if population[b].cost < population[a].cost {
                b
            } else {
                a
            }
        };

        while next.len() < cfg.population {
            let pa = tournament(rng);
            let pb = tournament(rng);
            let mut child = if rng.random::<f64>() < cfg.crossover_rate {
                let cuts = |rng: &mut R| {
                    let a = rng.random_range(0..n);
                    let b = rng.random_range(0..n);
                    (a.min(b), a.max(b))
                };
                let (lo1, hi1) = cuts(rng);
                let (lo2, hi2) = cuts(rng);
                let gamma1 = order_crossover(
                    &population[pa].state.gamma1,
                    &population[pb].state.gamma1,
                    lo1,
                    hi1,
                );
                let gamma2 = order_crossover(
                    &population[pa].state.gamma2,
                    &population[pb].state.gamma2,
                    lo2,
                    hi2,
                );
                // Crossover recombines the permutations only; orientation and
                // variant genes ride along with the first parent.
                SequencePair::from_parts(
                    gamma1,
                    gamma2,
                    population[pa].state.rotated.clone(),
                    population[pa].state.variant.clone(),
                )
            } else {
                population[pa].state.clone()
            };
            if rng.random::<f64>() < cfg.mutation_rate {
                child = child.perturb_any(&blocks, rng).state;
            }
            next.push(score(obj, child)?);
        }
        population = next;
        note_best(&population, &mut best);

        let generation_best = population
            .iter()
            .map(|i| i.cost)
            .fold(f64::INFINITY, f64::min);
        trace.push(TracePoint {
            step: generation,
            current: generation_best,
            best: best.as_ref().map_or(f64::INFINITY, |(_, _, b)| *b),
        });
    }

    let (best_state, best_placement, best_cost) = best.ok_or(Error::AlignmentInfeasible {
        group: "no feasible state visited".to_string(),
    })?;
    Ok(SearchResult {
        best_state,
        best_placement,
        best_cost,
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluations: obj.evaluations(),
    })
}

// ---------------------------------------------------------------------------
// Particle swarm
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub population: usize,
    pub iterations: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            inertia: 0.8,
            cognitive: 1.49,
            social: 1.49,
            population: 200,
            iterations: 25,
        }
    }
}

/// Random-keys decode: a permutation is the argsort of its key vector.
pub fn decode_permutation(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    order
}

#[derive(Clone)]
struct Particle {
    /// Concatenated keys: gamma1 | gamma2 | rotation | variant.
    pos: Vec<f64>,
    vel: Vec<f64>,
    best_pos: Vec<f64>,
    best_cost: f64,
}

fn decode_state(pos: &[f64], blocks: &[crate::model::Block]) -> SequencePair {
    let n = blocks.len();
    let gamma1 = decode_permutation(&pos[0..n]);
    let gamma2 = decode_permutation(&pos[n..2 * n]);
    let rotated = (0..n)
        .map(|b| blocks[b].rotatable && pos[2 * n + b] > 0.5)
        .collect();
    let variant = (0..n)
        .map(|b| {
            let k = blocks[b].variants.len();
            ((pos[3 * n + b].clamp(0.0, 1.0) * k as f64) as usize).min(k - 1)
        })
        .collect();
    SequencePair::from_parts(gamma1, gamma2, rotated, variant)
}

pub fn particle_swarm<R: Rng>(
    obj: &mut Objective,
    cfg: &PsoConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    assert!(cfg.population >= 2);
    let start = Instant::now();
    let blocks = obj.circuit().blocks.clone();
    let dim = 4 * blocks.len();

    let mut swarm: Vec<Particle> = Vec::with_capacity(cfg.population);
    let mut global: Option<(Vec<f64>, SequencePair, Placement, f64)> = None;
    for _ in 0..cfg.population {
        let pos: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let state = decode_state(&pos, &blocks);
        let cost = match obj.probe(&state)? {
            Some((placement, cost)) => {
                if global.as_ref().is_none_or(|(_, _, _, g)| cost < *g) {
                    global = Some((pos.clone(), state.clone(), placement, cost));
                }
                cost
            }
            None => f64::INFINITY,
        };
        swarm.push(Particle {
            best_pos: pos.clone(),
            best_cost: cost,
            pos,
            vel: vec![0.0; dim],
        });
    }

    let mut trace = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let mut iteration_best = f64::INFINITY;
        for i in 0..swarm.len() {
            let gbest = global
                .as_ref()
                .map(|(p, _, _, _)| p.clone())
                .unwrap_or_else(|| swarm[i].best_pos.clone());
            let p = &mut swarm[i];
            for d in 0..dim {
                let r1 = rng.random::<f64>();
                let r2 = rng.random::<f64>();
                p.vel[d] = cfg.inertia * p.vel[d]
                    + cfg.cognitive * r1 * (p.best_pos[d] - p.pos[d])
                    + cfg.social * r2 * (gbest[d] - p.pos[d]);
                // Keys stay unclamped; the argsort decode tolerates any
                // range and the rotation/variant decode clamps on its own.
                p.pos[d] += p.vel[d];
            }
            let state = decode_state(&p.pos, &blocks);
            if let Some((placement, cost)) = obj.probe(&state)? {
                iteration_best = iteration_best.min(cost);
                if cost < p.best_cost {
                    p.best_cost = cost;
                    p.best_pos = p.pos.clone();
                }
                if global.as_ref().is_none_or(|(_, _, _, g)| cost < *g) {
                    global = Some((p.pos.clone(), state, placement, cost));
                }
            }
        }
        trace.push(TracePoint {
            step: iteration,
            current: iteration_best,
            best: global.as_ref().map_or(f64::INFINITY, |(_, _, _, g)| *g),
        });
    }

    let (_, best_state, best_placement, best_cost) =
        global.ok_or(Error::AlignmentInfeasible {
            group: "no feasible state visited".to_string(),
        })?;
    Ok(SearchResult {
        best_state,
        best_placement,
        best_cost,
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluations: obj.evaluations(),
    })
}
