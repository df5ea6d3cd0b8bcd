//! Discrete-event Global Workspace simulation.
//!
//! Process agents evolve private Markov decision processes and emit
//! valued chunks at seeded random local times. Every few emits the
//! workspace runs an auction: bidder valuations become demand-price
//! intercepts of a network economy, the economy is solved as a
//! variational inequality, the top equilibrium flows occupy the bounded
//! short-term memory slots, winners are broadcast, and every bidder
//! consolidates with a Q-learning batch rewarded by its realized
//! producer utility.
//!
//! The simulation is event-sourced: a single `apply_event` fold advances
//! the state both during simulation and during replay, so a log replays
//! to the exact final state and any prefix replays to the matching
//! intermediate state. Records carry only per-agent local clocks; no
//! global time exists anywhere in the log.

use std::collections::BTreeMap;
use std::io::{BufRead, Write as IoWrite};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canon;
use crate::economy::{self, Caps, Coefficients, MarketState, NetworkEconomy};
use crate::fields::Partition;
use crate::url::{FiniteMdp, QFunction};
use crate::vi::{self, SolveStatus};

/// Local-clock owner for auction, post, and broadcast records.
pub const STM_NAME: &str = "@stm";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("config: {0}")]
    BadConfig(String),
    #[error("agent `{0}` declared twice")]
    DuplicateAgent(String),
    #[error("agent `{agent}`: {message}")]
    BadAgent { agent: String, message: String },
    #[error("log header does not match this config (expected {expected}, found {found})")]
    ConfigMismatch { expected: String, found: String },
    #[error("event {index}: {message}")]
    CorruptLog { index: usize, message: String },
    #[error("capacity {capacity} exceeded by {got} slots")]
    CapacityExceeded { capacity: usize, got: usize },
    #[error(transparent)]
    Mdp(#[from] crate::url::MdpError),
    #[error(transparent)]
    Economy(#[from] economy::EconomyError),
    #[error(transparent)]
    Vi(#[from] vi::ViError),
    #[error(transparent)]
    Fields(#[from] crate::fields::FieldsError),
    #[error("malformed log: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_alpha() -> f64 {
    0.2
}

fn default_solver_max_iter() -> u64 {
    50_000
}

fn default_solver_tol() -> f64 {
    1e-10
}

/// One process agent: a private MDP, a chunk per state, and an optional
/// information field over its states that the chunk map must respect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    pub name: String,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub gamma: f64,
    /// `"state,action"` to a distribution over successor states.
    pub transitions: BTreeMap<String, Vec<(String, f64)>>,
    #[serde(default)]
    pub rewards: BTreeMap<String, f64>,
    pub initial_state: String,
    /// state to (payload tag, private valuation >= 0).
    pub chunks: BTreeMap<String, (String, f64)>,
    /// Optional information field: blocks of indistinguishable states.
    /// The chunk map must be constant on each block.
    #[serde(default)]
    pub info: Option<Vec<Vec<String>>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkspaceConfig {
    pub capacity: usize,
    pub emits_per_auction: u64,
    pub total_emits: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub economy: Coefficients,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default = "default_solver_max_iter")]
    pub solver_max_iter: u64,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    pub agents: Vec<AgentConfig>,
}

impl WorkspaceConfig {
    pub fn from_toml(text: &str) -> Result<WorkspaceConfig, WorkspaceError> {
        toml::from_str(text).map_err(|e| WorkspaceError::BadConfig(e.to_string()))
    }

    /// Hash of the canonical JSON form: the identity a log is bound to.
    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

fn split_pair(key: &str) -> Result<(String, String), WorkspaceError> {
    let mut parts = key.splitn(2, ',');
    match (parts.next(), parts.next()) {
        (Some(s), Some(a)) => Ok((s.to_string(), a.to_string())),
        _ => Err(WorkspaceError::BadConfig(format!(
            "key `{key}` is not of the form `state,action`"
        ))),
    }
}

/// A validated simulation instance: parsed agents and solver settings.
#[derive(Debug)]
pub struct Instance {
    config: WorkspaceConfig,
    names: Vec<String>,
    mdps: BTreeMap<String, FiniteMdp>,
}

impl Instance {
    pub fn new(config: WorkspaceConfig) -> Result<Instance, WorkspaceError> {
        if config.capacity == 0 {
            return Err(WorkspaceError::BadConfig("capacity must be positive".into()));
        }
        if config.emits_per_auction == 0 {
            return Err(WorkspaceError::BadConfig(
                "emits_per_auction must be positive".into(),
            ));
        }
        if config.agents.is_empty() {
            return Err(WorkspaceError::BadConfig("no agents declared".into()));
        }
        let mut names = Vec::new();
        let mut mdps = BTreeMap::new();
        for agent in &config.agents {
            if agent.name.starts_with('@') {
                return Err(WorkspaceError::BadAgent {
                    agent: agent.name.clone(),
                    message: "names starting with `@` are reserved".into(),
                });
            }
            if mdps.contains_key(&agent.name) {
                return Err(WorkspaceError::DuplicateAgent(agent.name.clone()));
            }
            let mut transitions = BTreeMap::new();
            for (key, dist) in &agent.transitions {
                transitions.insert(split_pair(key)?, dist.clone());
            }
            let mut rewards = BTreeMap::new();
            for (key, r) in &agent.rewards {
                rewards.insert(split_pair(key)?, *r);
            }
            let mdp = FiniteMdp::new(
                agent.states.clone(),
                agent.actions.clone(),
                agent.gamma,
                &transitions,
                &rewards,
            )?;
            mdp.state_index(&agent.initial_state)?;
            for state in &agent.states {
                let (_, valuation) = agent.chunks.get(state).ok_or_else(|| {
                    WorkspaceError::BadAgent {
                        agent: agent.name.clone(),
                        message: format!("state `{state}` has no chunk"),
                    }
                })?;
                if !valuation.is_finite() || *valuation < 0.0 {
                    return Err(WorkspaceError::BadAgent {
                        agent: agent.name.clone(),
                        message: format!("valuation at `{state}` must be finite and nonnegative"),
                    });
                }
            }
            if !(agent.alpha > 0.0 && agent.alpha <= 1.0) {
                return Err(WorkspaceError::BadAgent {
                    agent: agent.name.clone(),
                    message: "alpha must lie in (0, 1]".into(),
                });
            }
            if let Some(blocks) = &agent.info {
                let ground: std::collections::BTreeSet<String> =
                    agent.states.iter().cloned().collect();
                let partition = Partition::new(
                    blocks
                        .iter()
                        .map(|b| b.iter().cloned().collect())
                        .collect(),
                    &ground,
                    &agent.name,
                )?;
                for block in partition.blocks() {
                    let mut seen: Option<&(String, f64)> = None;
                    for state in block {
                        let chunk = &agent.chunks[state];
                        match seen {
                            None => seen = Some(chunk),
                            Some(first) if first != chunk => {
                                return Err(WorkspaceError::BadAgent {
                                    agent: agent.name.clone(),
                                    message: format!(
                                        "chunk map is not measurable: states in one \
                                         information block emit different chunks ({state})"
                                    ),
                                });
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
            names.push(agent.name.clone());
            mdps.insert(agent.name.clone(), mdp);
        }
        names.sort();
        Ok(Instance { config, names, mdps })
    }

    pub fn config(&self) -> &WorkspaceConfig {
        &self.config
    }

    pub fn mdp(&self, agent: &str) -> &FiniteMdp {
        &self.mdps[agent]
    }

    fn agent_config(&self, name: &str) -> &AgentConfig {
        self.config
            .agents
            .iter()
            .find(|a| a.name == name)
            .expect("validated agent")
    }

    pub fn initial_state(&self) -> WorkspaceState {
        let agents = self
            .names
            .iter()
            .map(|name| {
                let mdp = &self.mdps[name];
                let initial = mdp
                    .state_index(&self.agent_config(name).initial_state)
                    .expect("validated");
                (
                    name.clone(),
                    AgentRuntime {
                        local_state: initial,
                        clock: 0,
                        q: QFunction::zeros(mdp),
                        latest_bid: None,
                        pending: Vec::new(),
                        slot_epochs: 0,
                        cumulative_utility: 0.0,
                        broadcasts_seen: 0,
                    },
                )
            })
            .collect();
        WorkspaceState {
            agents,
            buffer: Vec::new(),
            stm_clock: 0,
            emits: 0,
            epochs: 0,
            posted_epochs: 0,
        }
    }
}

/// A posted short-term-memory slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub agent: String,
    pub tag: String,
    /// Equilibrium flow, 17-significant-digit decimal.
    pub flow: String,
}

/// One record of the event log. Every float travels as a
/// 17-significant-digit decimal string so logs are byte-stable; every
/// time stamp is the local clock of the agent it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Emit {
        agent: String,
        clock: u64,
        state: String,
        action: String,
        next_state: String,
        tag: String,
        valuation: String,
    },
    Auction {
        clock: u64,
        epoch: u64,
        bidders: Vec<String>,
        solved: bool,
        gap: String,
    },
    Post {
        clock: u64,
        epoch: u64,
        slots: Vec<Slot>,
    },
    Broadcast {
        clock: u64,
        tags: Vec<String>,
        received: BTreeMap<String, u64>,
    },
    Learn {
        agent: String,
        clock: u64,
        reward: String,
        updates: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub version: String,
    pub config_sha256: String,
}

/// JSON-lines event log: one header line, then one line per event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub header: LogHeader,
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn write_jsonl(&self, out: &mut impl IoWrite) -> std::io::Result<()> {
        writeln!(
            out,
            "{}",
            serde_json::to_string(&self.header).expect("header serializes")
        )?;
        for event in &self.events {
            writeln!(
                out,
                "{}",
                serde_json::to_string(event).expect("event serializes")
            )?;
        }
        Ok(())
    }

    pub fn read_jsonl(input: &mut impl BufRead) -> Result<EventLog, WorkspaceError> {
        let mut lines = input.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| WorkspaceError::Format("empty log".into()))??;
        let header: LogHeader = serde_json::from_str(&header_line)
            .map_err(|e| WorkspaceError::Format(format!("header: {e}")))?;
        let mut events = Vec::new();
        for (index, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(&line).map_err(|e| {
                WorkspaceError::CorruptLog {
                    index,
                    message: e.to_string(),
                }
            })?;
            events.push(event);
        }
        Ok(EventLog { header, events })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRuntime {
    pub local_state: usize,
    pub clock: u64,
    pub q: QFunction,
    pub latest_bid: Option<(String, f64)>,
    /// Transitions taken since the last consolidation.
    pub pending: Vec<(usize, usize, usize)>,
    pub slot_epochs: u64,
    pub cumulative_utility: f64,
    pub broadcasts_seen: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostedSlot {
    pub agent: String,
    pub tag: String,
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceState {
    pub agents: BTreeMap<String, AgentRuntime>,
    pub buffer: Vec<PostedSlot>,
    pub stm_clock: u64,
    pub emits: u64,
    pub epochs: u64,
    pub posted_epochs: u64,
}

fn parse_float(text: &str, what: &str, index: usize) -> Result<f64, WorkspaceError> {
    text.parse().map_err(|_| WorkspaceError::CorruptLog {
        index,
        message: format!("{what} `{text}` is not a number"),
    })
}

impl Instance {
    fn corrupt(index: usize, message: impl Into<String>) -> WorkspaceError {
        WorkspaceError::CorruptLog {
            index,
            message: message.into(),
        }
    }

    fn tick(
        clock: &mut u64,
        recorded: u64,
        owner: &str,
        index: usize,
    ) -> Result<(), WorkspaceError> {
        if recorded != *clock + 1 {
            return Err(Self::corrupt(
                index,
                format!(
                    "local time of {owner} jumps from {} to {recorded}",
                    *clock
                ),
            ));
        }
        *clock = recorded;
        Ok(())
    }

    /// The single state-transition fold: applied by the simulator as it
    /// generates events and by `replay` as it reads them back.
    pub fn apply_event(
        &self,
        state: &mut WorkspaceState,
        event: &Event,
        index: usize,
    ) -> Result<(), WorkspaceError> {
        match event {
            Event::Emit {
                agent,
                clock,
                state: from,
                action,
                next_state,
                tag,
                valuation,
            } => {
                let mdp = self
                    .mdps
                    .get(agent)
                    .ok_or_else(|| Self::corrupt(index, format!("unknown agent `{agent}`")))?;
                let runtime = state.agents.get_mut(agent).expect("runtime exists");
                Self::tick(&mut runtime.clock, *clock, agent, index)?;
                let s = mdp
                    .state_index(from)
                    .map_err(|e| Self::corrupt(index, e.to_string()))?;
                if s != runtime.local_state {
                    return Err(Self::corrupt(
                        index,
                        format!("emit from `{from}` but agent is elsewhere"),
                    ));
                }
                let a = mdp
                    .action_index(action)
                    .map_err(|e| Self::corrupt(index, e.to_string()))?;
                let t = mdp
                    .state_index(next_state)
                    .map_err(|e| Self::corrupt(index, e.to_string()))?;
                runtime.pending.push((s, a, t));
                runtime.local_state = t;
                runtime.latest_bid =
                    Some((tag.clone(), parse_float(valuation, "valuation", index)?));
                state.emits += 1;
                Ok(())
            }
            Event::Auction { clock, epoch, .. } => {
                Self::tick(&mut state.stm_clock, *clock, STM_NAME, index)?;
                if *epoch != state.epochs + 1 {
                    return Err(Self::corrupt(index, "epoch out of order"));
                }
                state.epochs = *epoch;
                Ok(())
            }
            Event::Post { clock, slots, .. } => {
                Self::tick(&mut state.stm_clock, *clock, STM_NAME, index)?;
                if slots.len() > self.config.capacity {
                    return Err(WorkspaceError::CapacityExceeded {
                        capacity: self.config.capacity,
                        got: slots.len(),
                    });
                }
                let mut posted = Vec::with_capacity(slots.len());
                for slot in slots {
                    let flow = parse_float(&slot.flow, "flow", index)?;
                    if flow < 0.0 {
                        return Err(Self::corrupt(index, "negative posted flow"));
                    }
                    let runtime = state
                        .agents
                        .get_mut(&slot.agent)
                        .ok_or_else(|| Self::corrupt(index, "slot for unknown agent"))?;
                    runtime.slot_epochs += 1;
                    posted.push(PostedSlot {
                        agent: slot.agent.clone(),
                        tag: slot.tag.clone(),
                        flow,
                    });
                }
                state.buffer = posted;
                state.posted_epochs += 1;
                Ok(())
            }
            Event::Broadcast { clock, received, .. } => {
                Self::tick(&mut state.stm_clock, *clock, STM_NAME, index)?;
                for (agent, recorded) in received {
                    let runtime = state
                        .agents
                        .get_mut(agent)
                        .ok_or_else(|| Self::corrupt(index, "broadcast to unknown agent"))?;
                    Self::tick(&mut runtime.clock, *recorded, agent, index)?;
                    runtime.broadcasts_seen += 1;
                }
                Ok(())
            }
            Event::Learn {
                agent,
                clock,
                reward,
                updates,
            } => {
                let mdp = self
                    .mdps
                    .get(agent)
                    .ok_or_else(|| Self::corrupt(index, format!("unknown agent `{agent}`")))?;
                let alpha = self.agent_config(agent).alpha;
                let gamma = mdp.gamma();
                let runtime = state.agents.get_mut(agent).expect("runtime exists");
                Self::tick(&mut runtime.clock, *clock, agent, index)?;
                if *updates != runtime.pending.len() as u64 {
                    return Err(Self::corrupt(index, "learn batch size mismatch"));
                }
                let r = parse_float(reward, "reward", index)?;
                for (s, a, t) in std::mem::take(&mut runtime.pending) {
                    let target = r + gamma * runtime.q.max_over_actions(t);
                    let old = runtime.q.get(s, a);
                    runtime.q.set(s, a, (1.0 - alpha) * old + alpha * target);
                }
                runtime.cumulative_utility += r;
                Ok(())
            }
        }
    }

    /// Runs the discrete-event loop to the configured emit budget.
    pub fn run_simulation(&self) -> Result<(EventLog, WorkspaceState), WorkspaceError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut state = self.initial_state();
        let mut events = Vec::new();
        let push = |state: &mut WorkspaceState,
                        events: &mut Vec<Event>,
                        event: Event|
         -> Result<(), WorkspaceError> {
            self.apply_event(state, &event, events.len())?;
            events.push(event);
            Ok(())
        };

        for step in 1..=self.config.total_emits {
            let name = &self.names[rng.gen_range(0..self.names.len())];
            let mdp = &self.mdps[name];
            let runtime = &state.agents[name];
            let s = runtime.local_state;
            let a = rng.gen_range(0..mdp.actions().len());
            let t = mdp.sample_next(s, a, &mut rng);
            let agent_config = self.agent_config(name);
            let (tag, valuation) = &agent_config.chunks[&mdp.states()[s]];
            let event = Event::Emit {
                agent: name.clone(),
                clock: runtime.clock + 1,
                state: mdp.states()[s].clone(),
                action: mdp.actions()[a].clone(),
                next_state: mdp.states()[t].clone(),
                tag: tag.clone(),
                valuation: canon::float17(*valuation),
            };
            push(&mut state, &mut events, event)?;

            if step % self.config.emits_per_auction == 0 {
                self.auction_epoch(&mut state, &mut events)?;
            }
        }
        let header = LogHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: self.config.sha256(),
        };
        Ok((EventLog { header, events }, state))
    }

    fn auction_epoch(
        &self,
        state: &mut WorkspaceState,
        events: &mut Vec<Event>,
    ) -> Result<(), WorkspaceError> {
        let bidders: Vec<(String, String, f64)> = state
            .agents
            .iter()
            .filter_map(|(name, rt)| {
                rt.latest_bid
                    .as_ref()
                    .map(|(tag, v)| (name.clone(), tag.clone(), *v))
            })
            .collect();
        if bidders.is_empty() {
            return Ok(());
        }
        let push = |state: &mut WorkspaceState,
                        events: &mut Vec<Event>,
                        event: Event|
         -> Result<(), WorkspaceError> {
            self.apply_event(state, &event, events.len())?;
            events.push(event);
            Ok(())
        };

        let mut econ =
            NetworkEconomy::new(bidders.len(), 1, 1, &self.config.economy, &self.config.caps)?;
        econ.set_demand_intercepts(bidders.iter().map(|(_, _, v)| 1.0 + v).collect())?;
        let alpha = economy::safe_step(&econ);
        let vi_problem = economy::to_vi(&econ)?;
        let x0 = vec![0.0; econ.dim()];
        let solve = vi::solve_projection(
            &vi_problem,
            alpha,
            self.config.solver_tol,
            self.config.solver_max_iter,
            &x0,
            self.config.solver_max_iter + 1,
        );
        let epoch = state.epochs + 1;
        let (solved, gap, market) = match solve {
            Ok((x, trace)) => {
                let gap = vi::gap_residual(&vi_problem, &x)?;
                match trace.status {
                    SolveStatus::Converged { .. } => {
                        (true, gap, Some(MarketState::from_stacked(&econ, &x)?))
                    }
                    SolveStatus::BudgetExhausted { .. } => {
                        log::warn!("auction solve exhausted its budget at gap {gap:e}; epoch skipped");
                        (false, gap, None)
                    }
                }
            }
            Err(err) => {
                log::warn!("auction solve failed ({err}); epoch skipped");
                (false, f64::NAN, None)
            }
        };
        push(
            state,
            events,
            Event::Auction {
                clock: state.stm_clock + 1,
                epoch,
                bidders: bidders.iter().map(|(n, _, _)| n.clone()).collect(),
                solved,
                gap: canon::float17(gap),
            },
        )?;
        let Some(market) = market else {
            return Ok(());
        };

        let mut flows: Vec<(usize, &(String, String, f64))> = bidders.iter().enumerate().collect();
        flows.sort_by(|(i, (na, _, _)), (j, (nb, _, _))| {
            market.flows[*j]
                .partial_cmp(&market.flows[*i])
                .expect("finite flows")
                .then_with(|| na.cmp(nb))
        });
        let slots: Vec<Slot> = flows
            .iter()
            .filter(|(i, _)| market.flows[*i] > 0.0)
            .take(self.config.capacity)
            .map(|(i, (name, tag, _))| Slot {
                agent: name.clone(),
                tag: tag.clone(),
                flow: canon::float17(market.flows[*i]),
            })
            .collect();
        push(
            state,
            events,
            Event::Post {
                clock: state.stm_clock + 1,
                epoch,
                slots: slots.clone(),
            },
        )?;

        let received: BTreeMap<String, u64> = state
            .agents
            .iter()
            .map(|(name, rt)| (name.clone(), rt.clock + 1))
            .collect();
        push(
            state,
            events,
            Event::Broadcast {
                clock: state.stm_clock + 1,
                tags: slots.iter().map(|s| s.tag.clone()).collect(),
                received,
            },
        )?;

        for (i, (name, _, _)) in bidders.iter().enumerate() {
            let reward = economy::producer_utility(&econ, i, &market)?;
            let runtime = &state.agents[name];
            if runtime.pending.is_empty() {
                continue;
            }
            let event = Event::Learn {
                agent: name.clone(),
                clock: runtime.clock + 1,
                reward: canon::float17(reward),
                updates: runtime.pending.len() as u64,
            };
            push(state, events, event)?;
        }
        Ok(())
    }

    /// Replays a log against this instance; the header hash must match.
    pub fn replay(&self, log: &EventLog) -> Result<WorkspaceState, WorkspaceError> {
        let expected = self.config.sha256();
        if log.header.config_sha256 != expected {
            return Err(WorkspaceError::ConfigMismatch {
                expected,
                found: log.header.config_sha256.clone(),
            });
        }
        self.replay_events(&log.events)
    }

    /// Folds a sequence of events (any prefix of a valid log) from the
    /// initial state.
    pub fn replay_events(&self, events: &[Event]) -> Result<WorkspaceState, WorkspaceError> {
        let mut state = self.initial_state();
        for (index, event) in events.iter().enumerate() {
            self.apply_event(&mut state, event, index)?;
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentSummary {
    pub occupancy_fraction: String,
    pub cumulative_utility: String,
    pub broadcasts_seen: u64,
    pub q: BTreeMap<String, String>,
}

/// End-of-run report: occupancy fractions, cumulative utilities, and
/// Q-table snapshots, all floats as 17-significant-digit decimals.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub emits: u64,
    pub epochs: u64,
    pub posted_epochs: u64,
    pub agents: BTreeMap<String, AgentSummary>,
}

pub fn summarize(instance: &Instance, state: &WorkspaceState) -> RunSummary {
    let agents = state
        .agents
        .iter()
        .map(|(name, rt)| {
            let fraction = if state.posted_epochs == 0 {
                0.0
            } else {
                rt.slot_epochs as f64 / state.posted_epochs as f64
            };
            (
                name.clone(),
                AgentSummary {
                    occupancy_fraction: canon::float17(fraction),
                    cumulative_utility: canon::float17(rt.cumulative_utility),
                    broadcasts_seen: rt.broadcasts_seen,
                    q: rt
                        .q
                        .to_named(instance.mdp(name))
                        .into_iter()
                        .map(|(k, v)| (k, canon::float17(v)))
                        .collect(),
                },
            )
        })
        .collect();
    RunSummary {
        emits: state.emits,
        epochs: state.epochs,
        posted_epochs: state.posted_epochs,
        agents,
    }
}
