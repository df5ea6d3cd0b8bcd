//! Variational inequalities over products of simple convex factors.
//!
//! A problem asks for `x* in K` with `<F(x*), y - x*> >= 0` for all `y in K`,
//! where `K = K_1 x ... x K_m` is an ordered product of boxes, capped
//! nonnegative orthants, and simplices. Solutions are certified through the
//! natural residual `|x - P_K(x - F(x))|_2`, which vanishes exactly at
//! solutions of continuous problems.
//!
//! Two solvers are provided. The deterministic one iterates
//! `x <- P_K(x - alpha F(x))`. The stochastic one runs the incremental
//! two-step recursion
//!
//! ```text
//! z_k     = x_k - alpha_k F_w(x_k, v_k)
//! x_{k+1} = z_k - beta_k (z_k - P_{w_k} z_k)
//! ```
//!
//! where `F_w` is a sampled, unbiased estimate of `F` and `P_{w_k}` projects
//! only the sampled factor's coordinates. Iterates may leave `K` mid-run;
//! the final report projects onto the full product and records both raw and
//! projected gaps. With a noiseless sampler, a single factor, and
//! `beta == 1` the recursion reproduces the deterministic iterates bit for
//! bit.

use std::io::Write as IoWrite;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::float17;

const DIVERGENCE_GUARD: f64 = 1e12;

#[derive(Debug, Error)]
pub enum ViError {
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid factor: {0}")]
    BadFactor(String),
    #[error("invalid step schedule: {0}")]
    BadSchedule(String),
    #[error("factor sampling weights invalid: {0}")]
    BadFactorProbs(String),
    #[error("iterate escaped past {DIVERGENCE_GUARD:e} at iteration {k}")]
    Diverged { k: u64 },
    #[error("non-finite iterate at iteration {k}")]
    NonFinite { k: u64 },
    #[error("mapping returned {got} values, expected {expected}")]
    WrongArity { expected: usize, got: usize },
    #[error("no usable sample pairs")]
    NoSamples,
}

/// One factor of the constraint product, with its Euclidean projection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Factor {
    /// `[lower_i, upper_i]` per coordinate; bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `[0, cap_i]` per coordinate.
    OrthantCap { cap: Vec<f64> },
    /// `{ x >= 0, sum x = mass }`.
    Simplex { dim: usize, mass: f64 },
}

impl Factor {
    pub fn validate(&self) -> Result<(), ViError> {
        match self {
            Factor::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(ViError::BadFactor("box bound lengths differ".to_string()));
                }
                for (l, u) in lower.iter().zip(upper) {
                    if l.is_nan() || u.is_nan() || l > u {
                        return Err(ViError::BadFactor(format!("bad bound pair ({l}, {u})")));
                    }
                }
                Ok(())
            }
            Factor::OrthantCap { cap } => {
                if cap.is_empty() || cap.iter().any(|c| !c.is_finite() || *c <= 0.0) {
                    return Err(ViError::BadFactor("caps must be positive".to_string()));
                }
                Ok(())
            }
            Factor::Simplex { dim, mass } => {
                if *dim == 0 || !mass.is_finite() || *mass <= 0.0 {
                    return Err(ViError::BadFactor(format!(
                        "simplex needs dim >= 1 and finite positive mass, got dim {dim}, mass {mass}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Box { lower, .. } => lower.len(),
            Factor::OrthantCap { cap } => cap.len(),
            Factor::Simplex { dim, .. } => *dim,
        }
    }

    /// Euclidean projection onto the factor.
    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>, ViError> {
        if point.len() != self.dim() {
            return Err(ViError::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(match self {
            Factor::Box { lower, upper } => point
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| x.max(*l).min(*u))
                .collect(),
            Factor::OrthantCap { cap } => point
                .iter()
                .zip(cap)
                .map(|(x, c)| x.max(0.0).min(*c))
                .collect(),
            Factor::Simplex { mass, .. } => project_simplex(point, *mass),
        })
    }

    /// Membership up to `tol` in the max norm (mass checked to `tol` too).
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        match self.project(point) {
            Ok(p) => p
                .iter()
                .zip(point)
                .all(|(a, b)| (a - b).abs() <= tol),
            Err(_) => false,
        }
    }
}

/// Sort-based projection onto `{ x >= 0, sum x = mass }`.
fn project_simplex(point: &[f64], mass: f64) -> Vec<f64> {
    let mut sorted: Vec<f64> = point.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        acc += u;
        let candidate = (acc - mass) / (j as f64 + 1.0);
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    point.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// A deterministic VI over a product of factors.
pub struct VIProblem {
    n: usize,
    mapping: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    factors: Vec<Factor>,
}

impl VIProblem {
    pub fn new(
        mapping: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        factors: Vec<Factor>,
    ) -> Result<Self, ViError> {
        if factors.is_empty() {
            return Err(ViError::BadFactor("factor list is empty".to_string()));
        }
        for f in &factors {
            f.validate()?;
        }
        let n = factors.iter().map(Factor::dim).sum();
        Ok(VIProblem { n, mapping: Box::new(mapping), factors })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Coordinate range of factor `i` within the stacked vector.
    pub fn factor_range(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.factors[..i].iter().map(Factor::dim).sum();
        start..start + self.factors[i].dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, ViError> {
        if x.len() != self.n {
            return Err(ViError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let out = (self.mapping)(x);
        if out.len() != self.n {
            return Err(ViError::WrongArity { expected: self.n, got: out.len() });
        }
        Ok(out)
    }

    /// Projection onto the full product `K`.
    pub fn project_full(&self, x: &[f64]) -> Result<Vec<f64>, ViError> {
        if x.len() != self.n {
            return Err(ViError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut out = Vec::with_capacity(self.n);
        for (i, f) in self.factors.iter().enumerate() {
            out.extend(f.project(&x[self.factor_range(i)])?);
        }
        Ok(out)
    }

    /// Draws a point uniformly from `K` (boxes must be bounded for this).
    pub fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, ViError> {
        let mut out = Vec::with_capacity(self.n);
        for f in &self.factors {
            match f {
                Factor::Box { lower, upper } => {
                    for (l, u) in lower.iter().zip(upper) {
                        if !l.is_finite() || !u.is_finite() {
                            return Err(ViError::BadFactor(
                                "cannot sample from an unbounded box".to_string(),
                            ));
                        }
                        out.push(if l == u { *l } else { rng.gen_range(*l..*u) });
                    }
                }
                Factor::OrthantCap { cap } => {
                    for c in cap {
                        out.push(rng.gen_range(0.0..*c));
                    }
                }
                Factor::Simplex { dim, mass } => {
                    let exps: Vec<f64> =
                        (0..*dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                    let total: f64 = exps.iter().sum();
                    out.extend(exps.iter().map(|e| mass * e / total));
                }
            }
        }
        Ok(out)
    }
}

impl std::fmt::Debug for VIProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VIProblem")
            .field("n", &self.n)
            .field("factors", &self.factors)
            .finish_non_exhaustive()
    }
}

/// The natural residual `|x - P_K(x - F(x))|_2`; zero exactly at solutions.
pub fn gap_residual(vi: &VIProblem, x: &[f64]) -> Result<f64, ViError> {
    let fx = vi.eval(x)?;
    let step: Vec<f64> = x.iter().zip(&fx).map(|(a, b)| a - b).collect();
    let proj = vi.project_full(&step)?;
    Ok(x.iter()
        .zip(&proj)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged { iters: u64 },
    BudgetExhausted { gap: f64 },
}

/// One recorded solver step. For the deterministic method the raw and
/// projected gaps coincide and `beta` is reported as 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRow {
    pub k: u64,
    pub alpha: f64,
    pub beta: f64,
    pub raw_gap: f64,
    pub projected_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub rows: Vec<SolveRow>,
    pub status: SolveStatus,
}

impl SolveTrace {
    /// Writes `k,alpha,beta,raw_gap,projected_gap` rows with 17 significant
    /// digits.
    pub fn write_csv(&self, out: &mut impl IoWrite) -> std::io::Result<()> {
        writeln!(out, "k,alpha,beta,raw_gap,projected_gap")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.k,
                float17(r.alpha),
                float17(r.beta),
                float17(r.raw_gap),
                float17(r.projected_gap)
            )?;
        }
        Ok(())
    }
}

/// Projected-gradient-style iteration `x <- P_K(x - alpha F(x))`, stopping
/// once the natural residual drops to `tol`. Records a trace row every
/// `stride` iterations plus the final state.
pub fn solve_projection(
    vi: &VIProblem,
    alpha: f64,
    tol: f64,
    max_iter: u64,
    x0: &[f64],
    stride: u64,
) -> Result<(Vec<f64>, SolveTrace), ViError> {
    if !(alpha > 0.0) {
        return Err(ViError::BadSchedule(format!("alpha {alpha} must be positive")));
    }
    let stride = stride.max(1);
    let mut x = vi.project_full(x0)?;
    let mut rows = Vec::new();
    for k in 0..max_iter {
        let gap = gap_residual(vi, &x)?;
        if k % stride == 0 {
            rows.push(SolveRow { k, alpha, beta: 1.0, raw_gap: gap, projected_gap: gap });
        }
        if gap <= tol {
            let trace = SolveTrace { rows, status: SolveStatus::Converged { iters: k } };
            return Ok((x, trace));
        }
        let fx = vi.eval(&x)?;
        let z: Vec<f64> = x.iter().zip(&fx).map(|(a, b)| a - alpha * b).collect();
        x = vi.project_full(&z)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ViError::NonFinite { k });
        }
        if x.iter().any(|v| v.abs() > DIVERGENCE_GUARD) {
            return Err(ViError::Diverged { k });
        }
    }
    let gap = gap_residual(vi, &x)?;
    rows.push(SolveRow { k: max_iter, alpha, beta: 1.0, raw_gap: gap, projected_gap: gap });
    let status = if gap <= tol {
        SolveStatus::Converged { iters: max_iter }
    } else {
        SolveStatus::BudgetExhausted { gap }
    };
    Ok((x, SolveTrace { rows, status }))
}

/// A VI with a sampled mapping and a sampled constraint factor. The sampler
/// draws all of its randomness from the generator it is handed, so runs are
/// deterministic given a seed. The sampled mapping is expected to be
/// unbiased for the base mapping; that contract is the caller's to honor.
pub struct StochasticVIProblem {
    base: VIProblem,
    noisy: Box<dyn Fn(&[f64], &mut ChaCha8Rng) -> Vec<f64> + Send + Sync>,
    factor_probs: Vec<f64>,
}

impl StochasticVIProblem {
    /// Uniform factor sampling (every factor has probability `1/m`).
    pub fn new(
        base: VIProblem,
        noisy: impl Fn(&[f64], &mut ChaCha8Rng) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let m = base.factors().len();
        StochasticVIProblem {
            base,
            noisy: Box::new(noisy),
            factor_probs: vec![1.0 / m as f64; m],
        }
    }

    /// Custom factor-sampling weights; all must be positive so every factor
    /// is sampled often enough.
    pub fn with_factor_probs(
        base: VIProblem,
        noisy: impl Fn(&[f64], &mut ChaCha8Rng) -> Vec<f64> + Send + Sync + 'static,
        probs: Vec<f64>,
    ) -> Result<Self, ViError> {
        if probs.len() != base.factors().len() {
            return Err(ViError::BadFactorProbs(format!(
                "{} weights for {} factors",
                probs.len(),
                base.factors().len()
            )));
        }
        if probs.iter().any(|p| !(*p > 0.0)) {
            return Err(ViError::BadFactorProbs("all weights must be positive".to_string()));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(ViError::BadFactorProbs(format!("weights sum to {mass}")));
        }
        Ok(StochasticVIProblem { base, noisy: Box::new(noisy), factor_probs: probs })
    }

    pub fn base(&self) -> &VIProblem {
        &self.base
    }

    fn eval_noisy(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>, ViError> {
        let out = (self.noisy)(x, rng);
        if out.len() != self.base.dim() {
            return Err(ViError::WrongArity { expected: self.base.dim(), got: out.len() });
        }
        Ok(out)
    }

    fn sample_factor(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.factor_probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.factor_probs.len() - 1
    }
}

impl std::fmt::Debug for StochasticVIProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StochasticVIProblem")
            .field("base", &self.base)
            .field("factor_probs", &self.factor_probs)
            .finish_non_exhaustive()
    }
}

/// Step-size families for the two-step method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateRule {
    Constant { value: f64 },
    /// `c / (k + k0)`.
    Harmonic { c: f64, k0: f64 },
}

impl RateRule {
    pub fn value(&self, k: u64) -> f64 {
        match self {
            RateRule::Constant { value } => *value,
            RateRule::Harmonic { c, k0 } => c / (k as f64 + k0),
        }
    }

    /// Divergent sum with summable squares.
    pub fn robbins_monro(&self) -> bool {
        matches!(self, RateRule::Harmonic { .. })
    }

    fn positive(&self) -> bool {
        match self {
            RateRule::Constant { value } => *value > 0.0,
            RateRule::Harmonic { c, k0 } => *c > 0.0 && *k0 > 0.0,
        }
    }

    fn within(&self, lo: f64, hi: f64) -> bool {
        match self {
            RateRule::Constant { value } => *value > lo && *value < hi,
            RateRule::Harmonic { c, k0 } => *c / *k0 > lo && *c / *k0 < hi && *c > 0.0,
        }
    }
}

/// Paired step rules: `alpha_k` for the operator step and
/// `beta_k in (0, 2)` for the relaxed projection, with
/// `gamma_k = beta_k (2 - beta_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub alpha: RateRule,
    pub beta: RateRule,
}

impl StepSchedule {
    pub fn validate(&self) -> Result<(), ViError> {
        if !self.alpha.positive() {
            return Err(ViError::BadSchedule("alpha must be positive".to_string()));
        }
        if !self.beta.within(0.0, 2.0) {
            return Err(ViError::BadSchedule(
                "beta must stay strictly inside (0, 2)".to_string(),
            ));
        }
        Ok(())
    }

    pub fn gamma(&self, k: u64) -> f64 {
        let b = self.beta.value(k);
        b * (2.0 - b)
    }

    /// Whether the family satisfies the convergence conditions
    /// `sum alpha = inf`, `sum alpha^2 < inf`, `sum alpha^2 / gamma < inf`
    /// by construction: harmonic `alpha` paired with constant `beta` (which
    /// keeps `gamma` bounded away from zero).
    pub fn meets_assumptions(&self) -> bool {
        self.alpha.robbins_monro() && matches!(self.beta, RateRule::Constant { .. })
    }
}

/// Runs the two-step recursion for exactly `iters` iterations (there is no
/// residual-based stop: gap evaluations on noisy iterates are diagnostics,
/// recorded every `stride` steps). Returns the final iterate projected onto
/// the full constraint set.
pub fn solve_two_step_stochastic(
    svi: &StochasticVIProblem,
    sched: &StepSchedule,
    iters: u64,
    seed: u64,
    x0: &[f64],
    stride: u64,
) -> Result<(Vec<f64>, SolveTrace), ViError> {
    sched.validate()?;
    if iters == 0 {
        return Err(ViError::BadSchedule("iters must be at least 1".to_string()));
    }
    let stride = stride.max(1);
    let base = &svi.base;
    if x0.len() != base.dim() {
        return Err(ViError::DimensionMismatch { expected: base.dim(), got: x0.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = x0.to_vec();
    let mut rows = Vec::new();
    for k in 0..iters {
        let fx = svi.eval_noisy(&x, &mut rng)?;
        let alpha = sched.alpha.value(k);
        let beta = sched.beta.value(k);
        let z: Vec<f64> = x.iter().zip(&fx).map(|(a, b)| a - alpha * b).collect();
        let w = svi.sample_factor(&mut rng);
        let range = base.factor_range(w);
        let pz = base.factors()[w].project(&z[range.clone()])?;
        let mut next = z.clone();
        if beta == 1.0 {
            next[range.clone()].copy_from_slice(&pz);
        } else {
            for (slot, p) in next[range.clone()].iter_mut().zip(&pz) {
                *slot -= beta * (*slot - p);
            }
        }
        x = next;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ViError::NonFinite { k });
        }
        if x.iter().any(|v| v.abs() > DIVERGENCE_GUARD) {
            return Err(ViError::Diverged { k });
        }
        if (k + 1) % stride == 0 && k + 1 < iters {
            let raw = gap_residual(base, &x)?;
            let projected = gap_residual(base, &base.project_full(&x)?)?;
            rows.push(SolveRow { k: k + 1, alpha, beta, raw_gap: raw, projected_gap: projected });
        }
    }
    let raw = gap_residual(base, &x)?;
    let solution = base.project_full(&x)?;
    let projected = gap_residual(base, &solution)?;
    rows.push(SolveRow {
        k: iters,
        alpha: sched.alpha.value(iters - 1),
        beta: sched.beta.value(iters - 1),
        raw_gap: raw,
        projected_gap: projected,
    });
    let trace = SolveTrace { rows, status: SolveStatus::BudgetExhausted { gap: projected } };
    Ok((solution, trace))
}

/// Empirical monotonicity certificate from sampled feasible pairs:
/// the smallest observed `<F(x)-F(y), x-y> / |x-y|^2` (fitted strong-
/// monotonicity modulus) and the largest observed `|F(x)-F(y)| / |x-y|`
/// (fitted Lipschitz constant). These are necessary-condition checks; they
/// can refute monotonicity but only suggest it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCertificate {
    pub monotone: bool,
    pub strongly_monotone: bool,
    pub mu: f64,
    pub lipschitz: f64,
    pub pairs_used: usize,
}

pub fn certify_monotone(
    vi: &VIProblem,
    samples: usize,
    seed: u64,
) -> Result<MonotoneCertificate, ViError> {
    if samples < 2 {
        return Err(ViError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mu = f64::INFINITY;
    let mut lipschitz: f64 = 0.0;
    let mut pairs_used = 0;
    for _ in 0..samples {
        let x = vi.sample_feasible(&mut rng)?;
        let y = vi.sample_feasible(&mut rng)?;
        let dist2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist2 < 1e-24 {
            continue;
        }
        let fx = vi.eval(&x)?;
        let fy = vi.eval(&y)?;
        let inner: f64 = fx
            .iter()
            .zip(&fy)
            .zip(x.iter().zip(&y))
            .map(|((fa, fb), (a, b))| (fa - fb) * (a - b))
            .sum();
        let fdist2: f64 = fx.iter().zip(&fy).map(|(a, b)| (a - b) * (a - b)).sum();
        mu = mu.min(inner / dist2);
        lipschitz = lipschitz.max((fdist2 / dist2).sqrt());
        pairs_used += 1;
    }
    if pairs_used == 0 {
        return Err(ViError::NoSamples);
    }
    Ok(MonotoneCertificate {
        monotone: mu >= -1e-9,
        strongly_monotone: mu > 1e-9,
        mu,
        lipschitz,
        pairs_used,
    })
}
