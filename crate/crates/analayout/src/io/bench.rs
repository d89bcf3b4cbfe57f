//! Benchmark runner: repeated seeded searches per (circuit, algorithm)
//! cell, per-run records, and a mean/std summary table for runtime, empty
//! space and wirelength.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{empty_space, hpwl, CostModel};
use crate::error::{Error, Result};
use crate::model::{fold_symmetry, Circuit};
use crate::rl::{hybrid_search, policy_search, PolicyNet};
use crate::search::{
    genetic_search, particle_swarm, simulated_annealing, GaConfig, Objective, PsoConfig, SaConfig,
    SearchResult,
};
use crate::seqpair::{Placement, SequencePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoKind {
    Sa,
    Ga,
    Pso,
    RlSa,
    Rl,
}

impl AlgoKind {
    pub fn tag(&self) -> &'static str {
        match self {
            AlgoKind::Sa => "sa",
            AlgoKind::Ga => "ga",
            AlgoKind::Pso => "pso",
            AlgoKind::RlSa => "rlsa",
            AlgoKind::Rl => "rl",
        }
    }

    pub fn needs_model(&self) -> bool {
        matches!(self, AlgoKind::RlSa | AlgoKind::Rl)
    }
}

impl std::fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AlgoKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sa" => Ok(AlgoKind::Sa),
            "ga" => Ok(AlgoKind::Ga),
            "pso" => Ok(AlgoKind::Pso),
            "rlsa" => Ok(AlgoKind::RlSa),
            "rl" => Ok(AlgoKind::Rl),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Search budgets used by the runner; the learning-based entries also need
/// a policy per folded device count (see [`BenchModels`]).
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algos: Vec<AlgoKind>,
    pub repeats: usize,
    pub seed0: u64,
    pub sa: SaConfig,
    pub ga: GaConfig,
    pub pso: PsoConfig,
    /// Hybrid inference: proposal steps per round, rounds, refinement.
    pub hybrid_steps: usize,
    pub hybrid_rounds: usize,
    pub hybrid_refine: SaConfig,
    /// Accept/reject inference episode length.
    pub rl_steps: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            algos: vec![AlgoKind::Sa, AlgoKind::Ga, AlgoKind::Pso],
            repeats: 3,
            seed0: 0,
            sa: SaConfig::default(),
            ga: GaConfig::default(),
            pso: PsoConfig::default(),
            hybrid_steps: 128,
            hybrid_rounds: 3,
            hybrid_refine: SaConfig::new(15.0, 2000),
            rl_steps: 5000,
        }
    }
}

/// Trained policies keyed by folded device count.
#[derive(Default)]
pub struct BenchModels {
    pub hybrid: BTreeMap<usize, PolicyNet>,
    pub accept_reject: BTreeMap<usize, PolicyNet>,
}

/// One seeded run; failures are recorded, never dropped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub circuit: String,
    pub devices: usize,
    pub algorithm: String,
    pub seed: u64,
    pub status: String,
    pub runtime_s: f64,
    pub empty_space_pct: f64,
    pub hpwl_um: f64,
    pub cost: f64,
    pub config: serde_json::Value,
    pub placement: Option<Placement>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub circuit: String,
    pub devices: usize,
    pub algorithm: String,
    pub runs_ok: usize,
    pub runs_failed: usize,
    pub runtime_mean: f64,
    pub runtime_std: f64,
    pub empty_space_mean: f64,
    pub empty_space_std: f64,
    pub hpwl_mean: f64,
    pub hpwl_std: f64,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-run seed from the base seed and the cell coordinates.
pub fn run_seed(seed0: u64, circuit_idx: usize, algo_idx: usize, repeat: usize) -> u64 {
    splitmix64(
        seed0
            .wrapping_mul(0x100_0003)
            .wrapping_add((circuit_idx as u64) << 40)
            .wrapping_add((algo_idx as u64) << 20)
            .wrapping_add(repeat as u64),
    )
}

/// Runs one algorithm on one circuit with one seed and reports the metrics
/// on the unfolded placement.
pub fn run_one(
    circuit: &Circuit,
    algo: AlgoKind,
    seed: u64,
    cfg: &BenchConfig,
    models: &BenchModels,
) -> Result<(SearchResult, Placement, f64, f64)> {
    let folded = fold_symmetry(circuit)?;
    let devices = folded.circuit.blocks.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = match algo {
        AlgoKind::Sa => {
            let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
            let init = SequencePair::random(&folded.circuit.blocks, &mut rng);
            simulated_annealing(&mut obj, init, &cfg.sa, &mut rng)?
        }
        AlgoKind::Ga => {
            let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
            genetic_search(&mut obj, &cfg.ga, &mut rng)?
        }
        AlgoKind::Pso => {
            let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
            particle_swarm(&mut obj, &cfg.pso, &mut rng)?
        }
        AlgoKind::RlSa => {
            let policy = models.hybrid.get(&devices).ok_or_else(|| {
                Error::ModelMismatch(format!("no hybrid model for {devices} devices"))
            })?;
            hybrid_search(
                circuit,
                policy,
                cfg.hybrid_rounds,
                cfg.hybrid_steps,
                cfg.hybrid_refine,
                seed,
            )?
        }
        AlgoKind::Rl => {
            let policy = models.accept_reject.get(&devices).ok_or_else(|| {
                Error::ModelMismatch(format!("no accept/reject model for {devices} devices"))
            })?;
            policy_search(circuit, policy, cfg.rl_steps, seed)?
        }
    };
    let unfolded = folded.unfold(&result.best_placement);
    let wl = hpwl(circuit, &unfolded)?;
    let es = empty_space(&unfolded);
    Ok((result, unfolded, wl, es))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

pub fn run_benchmark(
    circuits: &[(String, Circuit)],
    cfg: &BenchConfig,
    models: &BenchModels,
) -> BenchOutcome {
    assert!(cfg.repeats >= 1);
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (ci, (name, circuit)) in circuits.iter().enumerate() {
        let devices = circuit.blocks.len();
        for (ai, &algo) in cfg.algos.iter().enumerate() {
            let mut runtimes = Vec::new();
            let mut spaces = Vec::new();
            let mut wirelengths = Vec::new();
            let mut failed = 0usize;
            for rep in 0..cfg.repeats {
                let seed = run_seed(cfg.seed0, ci, ai, rep);
                let config_echo = serde_json::json!({
                    "algorithm": algo.tag(),
                    "seed": seed,
                });
                match run_one(circuit, algo, seed, cfg, models) {
                    Ok((result, placement, wl, es)) => {
                        runtimes.push(result.wall_time_s);
                        spaces.push(es);
                        wirelengths.push(wl);
                        records.push(RunRecord {
                            circuit: name.clone(),
                            devices,
                            algorithm: algo.tag().to_string(),
                            seed,
                            status: "ok".to_string(),
                            runtime_s: result.wall_time_s,
                            empty_space_pct: es,
                            hpwl_um: wl,
                            cost: result.best_cost,
                            config: config_echo,
                            placement: Some(placement),
                        });
                    }
                    Err(e) => {
                        failed += 1;
                        records.push(RunRecord {
                            circuit: name.clone(),
                            devices,
                            algorithm: algo.tag().to_string(),
                            seed,
                            status: format!("error: {e}"),
                            runtime_s: f64::NAN,
                            empty_space_pct: f64::NAN,
                            hpwl_um: f64::NAN,
                            cost: f64::NAN,
                            config: config_echo,
                            placement: None,
                        });
                    }
                }
            }
            let (rt_mean, rt_std) = mean_std(&runtimes);
            let (es_mean, es_std) = mean_std(&spaces);
            let (wl_mean, wl_std) = mean_std(&wirelengths);
            let mut notes = Vec::new();
            if cfg.repeats == 1 {
                notes.push("std_undefined_single_run");
            }
            if failed > 0 {
                notes.push("has_failures");
            }
            summary.push(SummaryRow {
                circuit: name.clone(),
                devices,
                algorithm: algo.tag().to_string(),
                runs_ok: cfg.repeats - failed,
                runs_failed: failed,
                runtime_mean: rt_mean,
                runtime_std: rt_std,
                empty_space_mean: es_mean,
                empty_space_std: es_std,
                hpwl_mean: wl_mean,
                hpwl_std: wl_std,
                note: notes.join(";"),
            });
        }
    }
    BenchOutcome { records, summary }
}

pub fn write_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = String::from(
        "circuit,devices,algorithm,runs_ok,runs_failed,runtime_mean_s,runtime_std_s,empty_space_mean_pct,empty_space_std_pct,hpwl_mean_um,hpwl_std_um,note\n",
    );
    for r in summary {
        out.push_str(&format!(
            "{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}\n",
            r.circuit,
            r.devices,
            r.algorithm,
            r.runs_ok,
            r.runs_failed,
            r.runtime_mean,
            r.runtime_std,
            r.empty_space_mean,
            r.empty_space_std,
            r.hpwl_mean,
            r.hpwl_std,
            r.note
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_records(records: &[RunRecord], path: &Path) -> Result<()> {
    std::fs::write(
        path,
        serde_json::to_string_pretty(records).expect("records serialize"),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Net, Pin, ShapeVariant};

    fn tiny_circuit() -> Circuit {
        Circuit::new(
            "tiny",
            vec![
                Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]).rotatable(true),
                Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
                Block::new("c", vec![ShapeVariant::new(1.0, 2.0)]),
            ],
            vec![Net::new("n", vec![Pin::center("a"), Pin::center("b"), Pin::center("c")])],
        )
    }

    fn quick_cfg() -> BenchConfig {
        BenchConfig {
            repeats: 3,
            sa: SaConfig::new(15.0, 200),
            ga: GaConfig {
                population: 10,
                generations: 5,
                ..GaConfig::default()
            },
            pso: PsoConfig {
                population: 10,
                iterations: 5,
                ..PsoConfig::default()
            },
            ..BenchConfig::default()
        }
    }

    #[test]
    fn three_repeats_give_three_records_and_one_row() {
        let cfg = BenchConfig {
            algos: vec![AlgoKind::Sa],
            ..quick_cfg()
        };
        let out = run_benchmark(
            &[("tiny".to_string(), tiny_circuit())],
            &cfg,
            &BenchModels::default(),
        );
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.summary.len(), 1);
        assert_eq!(out.summary[0].runs_ok, 3);
    }

    #[test]
    fn single_repeat_flags_the_degenerate_std() {
        let cfg = BenchConfig {
            algos: vec![AlgoKind::Sa],
            repeats: 1,
            ..quick_cfg()
        };
        let out = run_benchmark(
            &[("tiny".to_string(), tiny_circuit())],
            &cfg,
            &BenchModels::default(),
        );
        assert_eq!(out.summary[0].runtime_std, 0.0);
        assert!(out.summary[0].note.contains("std_undefined_single_run"));
    }

    #[test]
    fn summary_means_match_recomputation_from_records() {
        let cfg = quick_cfg();
        let out = run_benchmark(
            &[("tiny".to_string(), tiny_circuit())],
            &cfg,
            &BenchModels::default(),
        );
        for row in &out.summary {
            let cell: Vec<&RunRecord> = out
                .records
                .iter()
                .filter(|r| r.circuit == row.circuit && r.algorithm == row.algorithm)
                .collect();
            let mean =
                cell.iter().map(|r| r.empty_space_pct).sum::<f64>() / cell.len() as f64;
            assert!((mean - row.empty_space_mean).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_model_is_a_failure_row_not_a_crash() {
        let cfg = BenchConfig {
            algos: vec![AlgoKind::RlSa],
            repeats: 1,
            ..quick_cfg()
        };
        let out = run_benchmark(
            &[("tiny".to_string(), tiny_circuit())],
            &cfg,
            &BenchModels::default(),
        );
        assert_eq!(out.summary[0].runs_failed, 1);
        assert!(out.records[0].status.starts_with("error:"));
    }

    #[test]
    fn record_metrics_recompute_from_the_stored_placement() {
        let cfg = BenchConfig {
            algos: vec![AlgoKind::Sa, AlgoKind::Pso],
            repeats: 2,
            ..quick_cfg()
        };
        let circuit = tiny_circuit();
        let out = run_benchmark(
            &[("tiny".to_string(), circuit.clone())],
            &cfg,
            &BenchModels::default(),
        );
        for r in &out.records {
            let p = r.placement.as_ref().unwrap();
            assert!((crate::cost::empty_space(p) - r.empty_space_pct).abs() < 1e-9);
            assert!((crate::cost::hpwl(&circuit, p).unwrap() - r.hpwl_um).abs() < 1e-9);
        }
    }
}
