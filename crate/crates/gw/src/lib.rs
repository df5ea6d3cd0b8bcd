//! A desk-scale engine for studying broadcast architectures built from
//! mathematically explicit parts: finite coalgebras for process behaviour,
//! totally asynchronous fixed-point iteration, tabular Q-learning, partition
//! models of who-knows-what, a three-tier network economy solved as a
//! variational inequality, and the internal logic of finite presheaf toposes.
//!
//! The crate is organised as a library with one thin command-line binary.
//! Each module stands alone; the [`workspace`] module wires several of them
//! into a discrete-event simulation in which agents bid chunks into a
//! capacity-limited buffer, a market equilibrium decides what is broadcast,
//! and the winners' realized utilities feed back into per-agent learning.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! cargo run --example bisimulation        # functor grammar, quotients, homomorphisms
//! cargo run --example async_fixed_point   # stale schedules vs. synchronous Jacobi
//! cargo run --example q_learning          # asynchronous Q-learning on small MDPs
//! cargo run --example measurability       # information fields and policy measurability
//! cargo run --example market_equilibrium  # three-tier economy as a VI
//! cargo run --example stochastic_vi       # two-step stochastic projection method
//! cargo run --example forcing             # Kripke-Joyal semantics in presheaves
//! cargo run --example workspace_run       # end-to-end simulation and replay
//! ```

#![forbid(unsafe_code)]

pub mod asyncfix;
pub mod canon;
pub mod cli;
pub mod coalgebra;
pub mod economy;
pub mod fields;
pub mod mumble;
pub mod url;
pub mod vi;
pub mod workspace;
