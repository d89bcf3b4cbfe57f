//! Analog-IC layout template engine.
//!
//! The crate covers the early physical-design steps for small analog blocks:
//!
//! * a circuit model with per-device shape variants, nets, symmetry pairs and
//!   alignment groups ([`model`], [`shapes`]);
//! * floorplanning on the sequence-pair representation, packed through
//!   constraint-graph longest paths ([`seqpair`]), scored by area / HPWL /
//!   aspect-ratio cost ([`cost`]);
//! * simulated annealing, a genetic algorithm and particle-swarm search over
//!   that space ([`search`]), plus two reinforcement-learning floorplanners
//!   trained with an in-repo PPO implementation ([`rl`]);
//! * global routing as obstacle-avoiding rectilinear Steiner trees with
//!   segment/conduit extraction and congestion-driven block redistribution
//!   ([`route`]);
//! * JSON file formats, SVG rendering and a benchmark runner ([`io`]).
//!
//! Every major capability has a runnable demo under `examples/`; the
//! `analayout` binary exposes the same pipeline as `floorplan`, `route`,
//! `bench` and `train` subcommands.

pub mod cost;
pub mod error;
pub mod io;
pub mod model;
pub mod rl;
pub mod route;
pub mod search;
pub mod seqpair;
pub mod shapes;

pub use error::{Error, Result};
