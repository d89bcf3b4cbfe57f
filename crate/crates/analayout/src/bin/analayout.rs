//! Command-line front end: `floorplan`, `route`, `bench` and `train`
//! subcommands over the library pipeline.
//!
//! Exit codes: 0 success, 2 input error, 3 unroutable/infeasible,
//! 4 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use analayout::cost::{combined_cost, empty_space, hpwl, CostModel, CostTracker};
use analayout::error::Error;
use analayout::io::{
    emit_svg, export_conduits, load_placement, parse_circuit, run_benchmark, save_placement,
    write_records, write_summary_csv, write_trace_csv, AlgoKind, BenchConfig, BenchModels,
    PlacementFile, PlacementMetrics, SvgOptions,
};
use analayout::model::{fold_symmetry, Circuit};
use analayout::rl::{
    hybrid_search, policy_search, train, train_for_circuit, EnvMode, ModelFile, RewardSpec,
    TrainConfig,
};
use analayout::route::{estimate_congestion, redistribute, route_all, RouteConfig};
use analayout::search::{
    genetic_search, particle_swarm, simulated_annealing, GaConfig, Objective, PsoConfig, SaConfig,
    SearchResult,
};
use analayout::seqpair::SequencePair;

#[derive(Parser)]
#[command(name = "analayout", version, about = "Analog floorplan and routing template engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a floorplan for a circuit file.
    Floorplan(FloorplanArgs),
    /// Route a placement: congestion refinement, Steiner trees, conduits.
    Route(RouteArgs),
    /// Benchmark algorithms over a directory of circuits.
    Bench(BenchArgs),
    /// Train a floorplanning policy on synthetic circuits.
    Train(TrainArgs),
}

#[derive(Args)]
struct FloorplanArgs {
    /// Circuit file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// One of: sa, ga, pso, rlsa, rl.
    #[arg(long)]
    algo: AlgoKind,
    #[arg(long)]
    seed: u64,
    /// Step budget: annealing steps / generations / iterations / episode steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Initial annealing temperature.
    #[arg(long)]
    t0: Option<f64>,
    /// Area-term weight override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Wirelength-term weight override.
    #[arg(long)]
    beta: Option<f64>,
    /// Target aspect ratio override.
    #[arg(long)]
    aspect: Option<f64>,
    /// Trained model file for rlsa/rl; trained on the fly when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Cyclic proposal/refinement rounds in rlsa mode.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RouteArgs {
    /// Placement file produced by `floorplan`.
    #[arg(long)]
    placement: PathBuf,
    /// Circuit file the placement belongs to.
    #[arg(long)]
    circuit: PathBuf,
    /// Congestion grid as GXxGY.
    #[arg(long, default_value = "8x8")]
    grid: String,
    /// Track capacity per grid edge.
    #[arg(long, default_value_t = 4)]
    capacity: u32,
    /// Redistribution iterations (0 disables).
    #[arg(long, default_value_t = 10)]
    max_redistribute: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of circuit JSON files.
    #[arg(long)]
    circuits: PathBuf,
    /// Comma-separated algorithms, e.g. sa,ga,pso.
    #[arg(long, value_delimiter = ',')]
    algos: Vec<AlgoKind>,
    #[arg(long)]
    repeats: usize,
    #[arg(long)]
    seed0: u64,
    /// Summary CSV path; records land next to it.
    #[arg(long)]
    out: PathBuf,
    /// Directory of model files named {algo}_n{devices}.json.
    #[arg(long)]
    model_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// rlsa or pure.
    #[arg(long)]
    mode: String,
    /// Folded device count the model is trained for.
    #[arg(long)]
    devices: usize,
    #[arg(long)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps per episode override.
    #[arg(long)]
    steps: Option<usize>,
    /// Optimization epochs per update override.
    #[arg(long)]
    epochs: Option<usize>,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidCircuit(_)
        | Error::Parse { .. }
        | Error::ModelMismatch(_)
        | Error::InputFile { .. } => 2,
        Error::UnknownBlock(_)
        | Error::SymmetryMismatch(..)
        | Error::AlignmentInfeasible { .. }
        | Error::NoLegalShape { .. }
        | Error::UnroutableTerminal { .. }
        | Error::UnroutableNet { .. }
        | Error::UnplacedBlock { .. } => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Floorplan(args) => cmd_floorplan(args),
        Command::Route(args) => cmd_route(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Train(args) => cmd_train(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn mode_of(tag: &str) -> Result<EnvMode, Error> {
    match tag {
        "rlsa" => Ok(EnvMode::Hybrid),
        "pure" => Ok(EnvMode::AcceptReject),
        other => Err(Error::ModelMismatch(format!(
            "unknown mode `{other}` (expected rlsa or pure)"
        ))),
    }
}

fn load_or_train_model(
    path: Option<&Path>,
    circuit: &Circuit,
    mode: EnvMode,
    seed: u64,
) -> Result<analayout::rl::PolicyNet, Error> {
    match path {
        Some(p) => {
            let file = ModelFile::load(p)?;
            let folded = fold_symmetry(circuit)?;
            file.check(mode, folded.circuit.blocks.len())?;
            Ok(file.policy)
        }
        None => {
            let episodes = match mode {
                EnvMode::Hybrid => 60,
                EnvMode::AcceptReject => 20,
            };
            eprintln!("no --model given; training a desk-scale policy ({episodes} episodes)");
            let (policy, _) = train_for_circuit(circuit, mode, episodes, seed)?;
            Ok(policy)
        }
    }
}

fn cmd_floorplan(args: FloorplanArgs) -> Result<(), Error> {
    let mut circuit = parse_circuit(&args.input)?;
    if let Some(a) = args.alpha {
        circuit.weights.alpha = a;
    }
    if let Some(b) = args.beta {
        circuit.weights.beta = b;
    }
    if let Some(r) = args.aspect {
        circuit.target_aspect_ratio = r;
    }
    analayout::model::validate_circuit(&circuit).into_result()?;
    std::fs::create_dir_all(&args.out)?;

    let folded = fold_symmetry(&circuit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let t0 = args.t0.unwrap_or(15.0);
    let result: SearchResult = match args.algo {
        AlgoKind::Sa => {
            let cfg = SaConfig::new(t0, args.steps.unwrap_or(5000));
            let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
            let init = SequencePair::random(&folded.circuit.blocks, &mut rng);
            simulated_annealing(&mut obj, init, &cfg, &mut rng)?
        }
        AlgoKind::Ga => {
            let cfg = GaConfig {
                generations: args.steps.unwrap_or(25),
                ..GaConfig::default()
            };
            let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
            genetic_search(&mut obj, &cfg, &mut rng)?
        }
        AlgoKind::Pso => {
            let cfg = PsoConfig {
                iterations: args.steps.unwrap_or(25),
                ..PsoConfig::default()
            };
            let mut obj = Objective::new(&folded.circuit, CostModel::Combined);
            particle_swarm(&mut obj, &cfg, &mut rng)?
        }
        AlgoKind::RlSa => {
            let policy =
                load_or_train_model(args.model.as_deref(), &circuit, EnvMode::Hybrid, args.seed)?;
            hybrid_search(
                &circuit,
                &policy,
                args.rounds,
                128,
                SaConfig::new(t0, args.steps.unwrap_or(2000)),
                args.seed,
            )?
        }
        AlgoKind::Rl => {
            let policy = load_or_train_model(
                args.model.as_deref(),
                &circuit,
                EnvMode::AcceptReject,
                args.seed,
            )?;
            policy_search(&circuit, &policy, args.steps.unwrap_or(5000), args.seed)?
        }
    };

    let placement = folded.unfold(&result.best_placement);
    let wl = hpwl(&circuit, &placement)?;
    let es = empty_space(&placement);
    let mut tracker = CostTracker::new();
    tracker.push(wl);
    let breakdown = combined_cost(&circuit, &placement, &mut tracker)?;
    let file = PlacementFile {
        format_version: PlacementFile::VERSION,
        circuit: circuit.name.clone(),
        algorithm: args.algo.tag().to_string(),
        seed: args.seed,
        placement: placement.clone(),
        metrics: PlacementMetrics {
            cost: result.best_cost,
            hpwl: wl,
            empty_space_pct: es,
            area: placement.area(),
        },
        config: serde_json::json!({
            "algo": args.algo.tag(),
            "seed": args.seed,
            "steps": args.steps,
            "t0": args.t0,
            "alpha": circuit.weights.alpha,
            "beta": circuit.weights.beta,
            "aspect": circuit.target_aspect_ratio,
        }),
    };
    save_placement(&file, &args.out.join("placement.json"))?;
    write_trace_csv(&result.trace, &args.out.join("trace.csv"))?;
    emit_svg(
        &placement,
        &[],
        &[],
        &SvgOptions::default(),
        &args.out.join("floorplan.svg"),
    )?;
    println!(
        "floorplan: cost {:.6}, area {:.3} um^2, empty space {:.2}%, hpwl {:.3} um, aspect {:.3} (runtime {:.2}s)",
        result.best_cost,
        placement.area(),
        es,
        wl,
        breakdown.aspect_ratio,
        result.wall_time_s
    );
    println!("wrote placement.json, trace.csv, floorplan.svg to {}", args.out.display());
    Ok(())
}

fn parse_grid(text: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = text.split('x').collect();
    let bad = || Error::Parse {
        line: 0,
        column: 0,
        message: format!("grid `{text}` is not of the form GXxGY"),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let gx = parts[0].parse().map_err(|_| bad())?;
    let gy = parts[1].parse().map_err(|_| bad())?;
    if gx < 2 || gy < 2 {
        return Err(bad());
    }
    Ok((gx, gy))
}

fn cmd_route(args: RouteArgs) -> Result<(), Error> {
    let circuit = parse_circuit(&args.circuit)?;
    let file = load_placement(&args.placement)?;
    let (gx, gy) = parse_grid(&args.grid)?;
    std::fs::create_dir_all(&args.out)?;

    let mut placement = file.placement;
    let mut iterations = 0usize;
    let mut overflow = estimate_congestion(&circuit, &placement, gx, gy, args.capacity)?;
    while overflow.max_overflow() > 0 && iterations < args.max_redistribute {
        let next = redistribute(&placement, &overflow, 0.5);
        if next == placement {
            break;
        }
        placement = next;
        let recomputed = estimate_congestion(&circuit, &placement, gx, gy, args.capacity)?;
        iterations += 1;
        if recomputed.max_overflow() >= overflow.max_overflow() {
            overflow = recomputed;
            break;
        }
        overflow = recomputed;
    }

    let routing = route_all(&circuit, &placement, &RouteConfig::default())?;
    let total_length: f64 = routing.trees.iter().map(|t| t.length).sum();

    export_conduits(&routing.conduits, &circuit, &args.out.join("conduits.json"))?;
    emit_svg(
        &placement,
        &routing.trees,
        &routing.conduits,
        &SvgOptions::default(),
        &args.out.join("routed.svg"),
    )?;
    // Congestion dump: one row per edge with demand.
    let mut csv = String::from("kind,col,row,demand,capacity\n");
    for row in 0..overflow.gy {
        for col in 0..overflow.gx - 1 {
            csv.push_str(&format!(
                "v,{},{},{},{}\n",
                col,
                row,
                overflow.v_demand[row * (overflow.gx - 1) + col],
                overflow.capacity
            ));
        }
    }
    for row in 0..overflow.gy - 1 {
        for col in 0..overflow.gx {
            csv.push_str(&format!(
                "h,{},{},{},{}\n",
                col,
                row,
                overflow.h_demand[row * overflow.gx + col],
                overflow.capacity
            ));
        }
    }
    std::fs::write(args.out.join("congestion.csv"), csv)?;
    let routed_placement = PlacementFile {
        placement: placement.clone(),
        metrics: PlacementMetrics {
            cost: file.metrics.cost,
            hpwl: hpwl(&circuit, &placement)?,
            empty_space_pct: empty_space(&placement),
            area: placement.area(),
        },
        ..file
    };
    save_placement(&routed_placement, &args.out.join("placement_routed.json"))?;

    println!(
        "route: {} nets, total tree length {:.3} um, {} conduits, max overflow {} after {} redistribution pass(es)",
        routing.trees.len(),
        total_length,
        routing.conduits.len(),
        overflow.max_overflow(),
        iterations
    );
    println!(
        "wrote conduits.json, routed.svg, congestion.csv, placement_routed.json to {}",
        args.out.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let mut circuits = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.circuits)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let circuit = parse_circuit(&path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| circuit.name.clone());
        circuits.push((name, circuit));
    }
    if circuits.is_empty() {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            message: format!("no .json circuits in {}", args.circuits.display()),
        });
    }

    let cfg = BenchConfig {
        algos: args.algos.clone(),
        repeats: args.repeats,
        seed0: args.seed0,
        ..BenchConfig::default()
    };

    // Learning-based entries need one model per folded device count.
    let mut models = BenchModels::default();
    for (_, circuit) in &circuits {
        let folded = fold_symmetry(circuit)?;
        let devices = folded.circuit.blocks.len();
        for algo in &args.algos {
            if !algo.needs_model() {
                continue;
            }
            let (mode, store) = match algo {
                AlgoKind::RlSa => (EnvMode::Hybrid, &mut models.hybrid),
                AlgoKind::Rl => (EnvMode::AcceptReject, &mut models.accept_reject),
                _ => unreachable!(),
            };
            if store.contains_key(&devices) {
                continue;
            }
            let from_dir = args.model_dir.as_ref().and_then(|dir| {
                let p = dir.join(format!("{}_n{}.json", algo.tag(), devices));
                p.exists().then_some(p)
            });
            let policy = load_or_train_model(
                from_dir.as_deref(),
                circuit,
                mode,
                args.seed0 ^ devices as u64,
            )?;
            store.insert(devices, policy);
        }
    }

    let outcome = run_benchmark(&circuits, &cfg, &models);
    write_summary_csv(&outcome.summary, &args.out)?;
    let records_path = args.out.with_extension("records.json");
    write_records(&outcome.records, &records_path)?;
    println!(
        "bench: {} circuits x {} algorithms x {} repeats -> {} and {}",
        circuits.len(),
        args.algos.len(),
        args.repeats,
        args.out.display(),
        records_path.display()
    );
    for row in &outcome.summary {
        println!(
            "  {:<10} {:<5} empty {:6.2}% +- {:5.2}  hpwl {:8.2} +- {:6.2}  runtime {:6.3}s",
            row.circuit,
            row.algorithm,
            row.empty_space_mean,
            row.empty_space_std,
            row.hpwl_mean,
            row.hpwl_std,
            row.runtime_mean
        );
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let mode = mode_of(&args.mode)?;
    let mut cfg = TrainConfig::for_mode(mode);
    cfg.ppo.episodes = args.episodes;
    if let Some(s) = args.steps {
        cfg.ppo.steps_per_episode = s;
    }
    if let Some(e) = args.epochs {
        cfg.ppo.epochs_per_update = e;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (policy, log) = train(args.devices, &cfg, &mut rng)?;
    let file = ModelFile::new(policy, mode, args.devices, RewardSpec::default());
    file.save(&args.out)?;
    let log_path = args.out.with_extension("log.json");
    std::fs::write(
        &log_path,
        serde_json::to_string_pretty(&log).expect("log serializes"),
    )?;
    let first = log.episodes.first().map(|e| e.best_cost).unwrap_or(f64::NAN);
    let last = log.episodes.last().map(|e| e.best_cost).unwrap_or(f64::NAN);
    println!(
        "train: {} episodes ({} devices, mode {}), episode best-cost {:.4} -> {:.4}",
        args.episodes, args.devices, args.mode, first, last
    );
    println!("wrote {} and {}", args.out.display(), log_path.display());
    Ok(())
}

