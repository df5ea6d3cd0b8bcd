//! Totally asynchronous fixed-point iteration.
//!
//! A map `F` on a product space is given as block components `f_i`. An
//! explicit schedule says at which steps each component recomputes and how
//! stale each of its reads is: at step `t` in `T^i`,
//!
//! ```text
//! x_i(t+1) = f_i(x_1(tau^i_1(t)), ..., x_n(tau^i_n(t)))
//! ```
//!
//! and `x_i(t+1) = x_i(t)` otherwise. Update spacing is bounded by `B1`,
//! staleness `t - tau^i_j(t)` by `B2`. Asynchrony is simulated
//! deterministically: given the same map, schedule, and start, a run is
//! reproducible bit for bit. `run_parallel` offers a real-thread variant of
//! the same contract for contractions; correctness testing uses the
//! simulated mode.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::float17;

#[derive(Debug, Error)]
pub enum AsyncFixError {
    #[error("map must have at least one component")]
    EmptyMap,
    #[error("component {component} has dimension 0")]
    EmptyComponent { component: usize },
    #[error("component {component} returned {got} values, expected {expected}")]
    WrongArity { component: usize, expected: usize, got: usize },
    #[error("initial point has length {got}, expected {expected}")]
    WrongStart { expected: usize, got: usize },
    #[error("schedule is for {schedule} components, map has {map}")]
    ComponentMismatch { schedule: usize, map: usize },
    #[error("infeasible schedule bounds: {reason}")]
    InfeasibleBounds { reason: String },
    #[error("schedule invalid: {reason}")]
    InvalidSchedule { reason: String },
    #[error("non-finite value detected at step {t}")]
    Diverged { t: u64 },
    #[error("contraction check needs at least one usable sample pair")]
    NoSamples,
    #[error("malformed schedule file: {0}")]
    Format(String),
}

type Component = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A self-map of `R^(d_1) x ... x R^(d_n)` presented componentwise. Every
/// component reads the full stacked vector and returns its own block.
pub struct DecomposedMap {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    components: Vec<Component>,
}

impl DecomposedMap {
    pub fn new(dims: Vec<usize>, components: Vec<Component>) -> Result<Self, AsyncFixError> {
        if dims.is_empty() || components.len() != dims.len() {
            return Err(AsyncFixError::EmptyMap);
        }
        if let Some(i) = dims.iter().position(|&d| d == 0) {
            return Err(AsyncFixError::EmptyComponent { component: i });
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for d in &dims {
            offsets.push(acc);
            acc += d;
        }
        Ok(DecomposedMap { dims, offsets, components })
    }

    /// One scalar component per coordinate.
    pub fn from_scalar_fns(
        fns: Vec<Box<dyn Fn(&[f64]) -> f64 + Send + Sync>>,
    ) -> Result<Self, AsyncFixError> {
        let dims = vec![1; fns.len()];
        let components = fns
            .into_iter()
            .map(|f| Box::new(move |x: &[f64]| vec![f(x)]) as Component)
            .collect();
        Self::new(dims, components)
    }

    /// The affine map `F(x) = A x + b`, split into blocks of the given
    /// dimensions. This is the map family the command-line `fix run` accepts.
    pub fn affine(
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        dims: Vec<usize>,
    ) -> Result<Self, AsyncFixError> {
        let total: usize = dims.iter().sum();
        if matrix.len() != total
            || matrix.iter().any(|row| row.len() != total)
            || offset.len() != total
        {
            return Err(AsyncFixError::WrongStart { expected: total, got: offset.len() });
        }
        let matrix = Arc::new(matrix);
        let offset = Arc::new(offset);
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let components = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let matrix = Arc::clone(&matrix);
                let offset = Arc::clone(&offset);
                let start = offsets[i];
                Box::new(move |x: &[f64]| {
                    (start..start + d)
                        .map(|r| {
                            offset[r]
                                + matrix[r].iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
                        })
                        .collect()
                }) as Component
            })
            .collect();
        Self::new(dims, components)
    }

    pub fn n_components(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.dims[i]
    }

    pub fn eval_component(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, AsyncFixError> {
        let out = (self.components[i])(x);
        if out.len() != self.dims[i] {
            return Err(AsyncFixError::WrongArity {
                component: i,
                expected: self.dims[i],
                got: out.len(),
            });
        }
        Ok(out)
    }

    pub fn eval_full(&self, x: &[f64]) -> Result<Vec<f64>, AsyncFixError> {
        let mut out = Vec::with_capacity(self.total_dim());
        for i in 0..self.n_components() {
            out.extend(self.eval_component(i, x)?);
        }
        Ok(out)
    }

    /// Max-norm residual of the full map at `x`.
    pub fn residual(&self, x: &[f64]) -> Result<f64, AsyncFixError> {
        let fx = self.eval_full(x)?;
        Ok(fx
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// Component `t mod n` updates at step `t`; reads are current.
    RoundRobin,
    /// Seeded random update steps with gaps in `1..=B1` and random read
    /// staleness in `0..=B2`.
    Random,
    /// Every component updates every step and every read is exactly `B2`
    /// steps stale once `t >= B2`.
    AdversarialStale,
    /// Every component updates every step with current reads; this is
    /// synchronous Jacobi iteration.
    Synchronous,
}

/// An explicit update/staleness schedule over a finite horizon. Schedules
/// are value-reproducible: all update sets and read times are derived
/// deterministically from `(kind, n, horizon, b1, b2, seed)`, which is also
/// the JSON form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ScheduleParams", into = "ScheduleParams")]
pub struct StaleSchedule {
    kind: ScheduleKind,
    n: usize,
    horizon: u64,
    b1: u64,
    b2: u64,
    seed: u64,
    #[serde(skip)]
    update_steps: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScheduleParams {
    kind: ScheduleKind,
    n: usize,
    horizon: u64,
    b1: u64,
    b2: u64,
    seed: u64,
}

impl TryFrom<ScheduleParams> for StaleSchedule {
    type Error = AsyncFixError;
    fn try_from(p: ScheduleParams) -> Result<Self, AsyncFixError> {
        make_schedule(p.kind, p.n, p.horizon, p.b1, p.b2, p.seed)
    }
}

impl From<StaleSchedule> for ScheduleParams {
    fn from(s: StaleSchedule) -> ScheduleParams {
        ScheduleParams { kind: s.kind, n: s.n, horizon: s.horizon, b1: s.b1, b2: s.b2, seed: s.seed }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Builds a schedule of the requested kind. `b1` bounds the gap between
/// consecutive updates of any component, `b2` bounds read staleness.
pub fn make_schedule(
    kind: ScheduleKind,
    n: usize,
    horizon: u64,
    b1: u64,
    b2: u64,
    seed: u64,
) -> Result<StaleSchedule, AsyncFixError> {
    if n == 0 {
        return Err(AsyncFixError::EmptyMap);
    }
    if b1 == 0 || b1 > horizon {
        return Err(AsyncFixError::InfeasibleBounds {
            reason: format!("need 1 <= b1 <= horizon, got b1={b1}, horizon={horizon}"),
        });
    }
    if kind == ScheduleKind::RoundRobin && (n as u64) > b1 {
        return Err(AsyncFixError::InfeasibleBounds {
            reason: format!("round-robin spacing is n={n}, which exceeds b1={b1}"),
        });
    }
    let update_steps: Vec<Vec<u64>> = match kind {
        ScheduleKind::RoundRobin => (0..n)
            .map(|i| (i as u64..horizon).step_by(n).collect())
            .collect(),
        ScheduleKind::Synchronous | ScheduleKind::AdversarialStale => {
            (0..n).map(|_| (0..horizon).collect()).collect()
        }
        ScheduleKind::Random => (0..n)
            .map(|i| {
                let mut steps = Vec::new();
                let mut t = splitmix(seed ^ splitmix(i as u64)) % b1;
                let mut k = 0u64;
                while t < horizon {
                    steps.push(t);
                    k += 1;
                    let gap = 1 + splitmix(seed ^ splitmix(i as u64) ^ splitmix(k)) % b1;
                    t += gap;
                }
                steps
            })
            .collect(),
    };
    let schedule = StaleSchedule { kind, n, horizon, b1, b2, seed, update_steps };
    schedule.validate()?;
    Ok(schedule)
}

impl StaleSchedule {
    /// A zero-staleness schedule on which the runner coincides with
    /// synchronous Jacobi iteration.
    pub fn synchronous(n: usize, horizon: u64) -> Self {
        make_schedule(ScheduleKind::Synchronous, n, horizon.max(1), 1, 0, 0)
            .expect("synchronous schedule is always feasible")
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n_components(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn staleness_bound(&self) -> u64 {
        self.b2
    }

    pub fn update_steps(&self, i: usize) -> &[u64] {
        &self.update_steps[i]
    }

    /// The read time `tau^i_j(t)`; callers only consult it for `t` in
    /// `T^i`. Always in `[max(0, t - b2), t]`.
    pub fn read_time(&self, i: usize, j: usize, t: u64) -> u64 {
        match self.kind {
            ScheduleKind::RoundRobin | ScheduleKind::Synchronous => t,
            ScheduleKind::AdversarialStale => t.saturating_sub(self.b2),
            ScheduleKind::Random => {
                let window = self.b2.min(t) + 1;
                let lag = splitmix(
                    self.seed
                        ^ splitmix(0x5eed ^ i as u64)
                        ^ splitmix(j as u64).rotate_left(17)
                        ^ splitmix(t),
                ) % window;
                t - lag
            }
        }
    }

    /// Checks the schedule contract: every component updates at least once,
    /// spacing between consecutive updates (and before the first) is at most
    /// `b1`, and read times stay within the staleness bound.
    pub fn validate(&self) -> Result<(), AsyncFixError> {
        for (i, steps) in self.update_steps.iter().enumerate() {
            if steps.is_empty() {
                return Err(AsyncFixError::InvalidSchedule {
                    reason: format!("component {i} never updates"),
                });
            }
            let mut prev = None;
            for &t in steps {
                if t >= self.horizon {
                    return Err(AsyncFixError::InvalidSchedule {
                        reason: format!("component {i} scheduled past the horizon"),
                    });
                }
                let gap = match prev {
                    None => t + 1,
                    Some(p) => t - p,
                };
                if gap > self.b1 {
                    return Err(AsyncFixError::InvalidSchedule {
                        reason: format!("component {i} waits {gap} > b1 = {}", self.b1),
                    });
                }
                prev = Some(t);
            }
            for &t in steps {
                for j in 0..self.n {
                    let tau = self.read_time(i, j, t);
                    if tau > t || t - tau > self.b2 {
                        return Err(AsyncFixError::InvalidSchedule {
                            reason: format!(
                                "read time tau^{i}_{j}({t}) = {tau} violates staleness bound {}",
                                self.b2
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, AsyncFixError> {
        serde_json::from_str(text).map_err(|e| AsyncFixError::Format(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    /// Updated component; `None` for the initial residual row.
    pub component: Option<usize>,
    /// The block value written (the full start vector on the initial row).
    pub value: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged { steps: u64 },
    HorizonExhausted { residual: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    pub status: RunStatus,
}

impl IterationTrace {
    /// Writes `t,component,residual,value...` rows; floats carry 17
    /// significant digits.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "t,component,residual,value")?;
        for r in &self.records {
            let comp = r.component.map(|c| c.to_string()).unwrap_or_default();
            let value: Vec<String> = r.value.iter().map(|v| float17(*v)).collect();
            writeln!(out, "{},{},{},{}", r.t, comp, float17(r.residual), value.join(","))?;
        }
        Ok(())
    }
}

/// Runs the asynchronous iteration from `x0` until the max-norm residual
/// drops to `tol` or the schedule horizon is exhausted. The residual is
/// evaluated on the freshest iterate after every step that wrote anything,
/// and one trace record is appended per component written.
pub fn run_async(
    map: &DecomposedMap,
    schedule: &StaleSchedule,
    x0: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, IterationTrace), AsyncFixError> {
    if schedule.n_components() != map.n_components() {
        return Err(AsyncFixError::ComponentMismatch {
            schedule: schedule.n_components(),
            map: map.n_components(),
        });
    }
    if x0.len() != map.total_dim() {
        return Err(AsyncFixError::WrongStart { expected: map.total_dim(), got: x0.len() });
    }
    let n = map.n_components();
    // Reads reach back at most min(b2, horizon) steps, so a ring buffer of
    // that many snapshots plus the live and next slots suffices.
    let window = schedule.b2.min(schedule.horizon()) as usize + 2;
    let mut history: Vec<Vec<f64>> = vec![x0.to_vec(); window];

    let initial_residual = map.residual(x0)?;
    if !initial_residual.is_finite() {
        return Err(AsyncFixError::Diverged { t: 0 });
    }
    let mut records = vec![TraceRecord {
        t: 0,
        component: None,
        value: x0.to_vec(),
        residual: initial_residual,
    }];
    if initial_residual <= tol {
        return Ok((
            x0.to_vec(),
            IterationTrace { records, status: RunStatus::Converged { steps: 0 } },
        ));
    }

    let mut cursors = vec![0usize; n];
    let mut stale_read = vec![0.0f64; map.total_dim()];
    for t in 0..schedule.horizon() {
        let slot = (t % window as u64) as usize;
        let next_slot = ((t + 1) % window as u64) as usize;
        let mut new_x = history[slot].clone();
        let mut written: Vec<(usize, Vec<f64>)> = Vec::new();
        for i in 0..n {
            let steps = schedule.update_steps(i);
            if cursors[i] < steps.len() && steps[cursors[i]] == t {
                cursors[i] += 1;
                for j in 0..n {
                    let tau = schedule.read_time(i, j, t);
                    let src = &history[(tau % window as u64) as usize];
                    let range = map.block_range(j);
                    stale_read[range.clone()].copy_from_slice(&src[range]);
                }
                let value = map.eval_component(i, &stale_read)?;
                new_x[map.block_range(i)].copy_from_slice(&value);
                written.push((i, value));
            }
        }
        history[next_slot] = new_x;
        if written.is_empty() {
            continue;
        }
        let current = &history[next_slot];
        if current.iter().any(|v| !v.is_finite()) {
            return Err(AsyncFixError::Diverged { t: t + 1 });
        }
        let residual = map.residual(current)?;
        if !residual.is_finite() {
            return Err(AsyncFixError::Diverged { t: t + 1 });
        }
        for (i, value) in written {
            records.push(TraceRecord { t, component: Some(i), value, residual });
        }
        if residual <= tol {
            return Ok((
                current.clone(),
                IterationTrace { records, status: RunStatus::Converged { steps: t + 1 } },
            ));
        }
    }
    let last_slot = (schedule.horizon() % window as u64) as usize;
    let x = history[last_slot].clone();
    let residual = map.residual(&x)?;
    Ok((x, IterationTrace { records, status: RunStatus::HorizonExhausted { residual } }))
}

/// Estimate of the max-norm Lipschitz modulus from sampled pairs.
#[derive(Debug, Clone, Copy)]
pub struct ContractionEstimate {
    pub max_ratio: f64,
    pub pairs_used: usize,
}

/// Samples pairs uniformly from `[-10, 10]^d` and reports the largest
/// observed ratio `|F(x)-F(y)| / |x-y|` in the max norm. A sampled lower
/// bound on the true modulus, sufficient to flag expansive maps.
pub fn check_contraction(
    map: &DecomposedMap,
    samples: usize,
    seed: u64,
) -> Result<ContractionEstimate, AsyncFixError> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let d = map.total_dim();
    let mut max_ratio: f64 = 0.0;
    let mut pairs_used = 0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let dist = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dist < 1e-12 {
            continue;
        }
        let fx = map.eval_full(&x)?;
        let fy = map.eval_full(&y)?;
        let fdist = fx
            .iter()
            .zip(&fy)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        max_ratio = max_ratio.max(fdist / dist);
        pairs_used += 1;
    }
    if pairs_used == 0 {
        return Err(AsyncFixError::NoSamples);
    }
    Ok(ContractionEstimate { max_ratio, pairs_used })
}

/// Real-thread variant: each component loops on its own thread, reading a
/// shared vector of block cells and writing its block atomically (under a
/// lock, so no torn reads). Stops once a consistent snapshot has residual at
/// most `tol` or any thread has performed `max_updates_per_component`
/// updates. Convergence for contractions matches the simulated mode; the
/// exact iterate sequence is timing-dependent, so tests treat this as a
/// smoke-level interface.
pub fn run_parallel(
    map: Arc<DecomposedMap>,
    x0: &[f64],
    tol: f64,
    max_updates_per_component: u64,
) -> Result<Vec<f64>, AsyncFixError> {
    if x0.len() != map.total_dim() {
        return Err(AsyncFixError::WrongStart { expected: map.total_dim(), got: x0.len() });
    }
    let shared = Arc::new(RwLock::new(x0.to_vec()));
    let stop = Arc::new(RwLock::new(false));
    let mut handles = Vec::new();
    for i in 0..map.n_components() {
        let map = Arc::clone(&map);
        let shared = Arc::clone(&shared);
        let stop = Arc::clone(&stop);
        handles.push(std::thread::spawn(move || -> Result<(), AsyncFixError> {
            for _ in 0..max_updates_per_component {
                if *stop.read().expect("lock poisoned") {
                    return Ok(());
                }
                let snapshot = shared.read().expect("lock poisoned").clone();
                let value = map.eval_component(i, &snapshot)?;
                if value.iter().any(|v| !v.is_finite()) {
                    return Err(AsyncFixError::Diverged { t: 0 });
                }
                let mut guard = shared.write().expect("lock poisoned");
                guard[map.block_range(i)].copy_from_slice(&value);
                let fresh = guard.clone();
                drop(guard);
                if map.residual(&fresh)? <= tol {
                    *stop.write().expect("lock poisoned") = true;
                    return Ok(());
                }
                std::thread::yield_now();
            }
            Ok(())
        }));
    }
    let mut first_err = None;
    for h in handles {
        match h.join() {
            Ok(Ok(())) => {}
            Ok(Err(e)) => first_err = first_err.or(Some(e)),
            Err(_) => {
                first_err =
                    first_err.or(Some(AsyncFixError::InvalidSchedule {
                        reason: "worker thread panicked".to_string(),
                    }))
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    let out = shared.read().expect("lock poisoned").clone();
    Ok(out)
}

/// Distinct update steps across all components, mostly useful for tests and
/// diagnostics.
pub fn all_update_steps(schedule: &StaleSchedule) -> BTreeSet<u64> {
    (0..schedule.n_components())
        .flat_map(|i| schedule.update_steps(i).iter().copied())
        .collect()
}
