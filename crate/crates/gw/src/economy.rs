//! A three-tier network economy: producers ship flows through transporters
//! to consumers, transporters set qualities and prices, and consumers are
//! represented by linear demand-price functions.
//!
//! Variables are indexed by (producer i, transporter j, consumer k) and
//! stacked `[Q | q | pi]`, i-major then j then k within each block:
//! flows `Q_ijk`, qualities `q_ijk`, and prices `pi_ijk`, each confined to
//! `[0, cap]`.
//!
//! Functional forms are linear-quadratic with configurable coefficients:
//!
//! * demand price `rho_ijk = a_ijk - b_own Q_ijk - b_cross T_ijk + g q_ijk`
//!   where `T_ijk` sums the flows of all *other* (producer, transporter)
//!   pairs serving consumer k;
//! * production cost `c_i/2 S_i^2 + d_i S_i` with `S_i` producer i's total
//!   shipment;
//! * delivery cost `e_ijk/2 q^2 + h_ijk q Q + w_ijk q`;
//! * opportunity cost `u_ijk/2 pi^2`;
//! * transfer payments `p pi Q` (producers pay, transporters earn).
//!
//! Producer i maximizes `U1_i = sum_jk rho Q - production cost - p sum_jk pi Q`;
//! transporter j maximizes `U2_j = p sum_ik pi Q - sum_ik (delivery + opportunity)`.
//! Simultaneous best responses are encoded as a variational inequality whose
//! mapping stacks each agent's negative own-gradient; the default coefficient
//! instance is strongly monotone (checked empirically by
//! [`crate::vi::certify_monotone`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vi::{Factor, SolveTrace, VIProblem};

#[derive(Debug, Error)]
pub enum EconomyError {
    #[error("tier sizes must all be at least 1")]
    EmptyTier,
    #[error("{name} has {got} entries, expected {expected} (or a scalar)")]
    BadLength { name: String, expected: usize, got: usize },
    #[error("{name} must be {requirement}, got {value}")]
    BadCoefficient { name: String, requirement: &'static str, value: f64 },
    #[error("producer index {0} out of range")]
    BadProducer(usize),
    #[error("transporter index {0} out of range")]
    BadTransporter(usize),
    #[error("state has {got} coordinates, expected {expected}")]
    BadState { expected: usize, got: usize },
    #[error("malformed economy config: {0}")]
    Format(String),
    #[error(transparent)]
    Vi(#[from] crate::vi::ViError),
}

/// Tier sizes plus every coefficient array, validated at construction.
/// Per-pair coefficients (`a`, `e`, `h`, `w`, `u`, caps) have length
/// `m*n*o`; per-producer coefficients (`c`, `d`) have length `m`.
#[derive(Debug, Clone)]
pub struct NetworkEconomy {
    m: usize,
    n: usize,
    o: usize,
    a: Vec<f64>,
    b_own: f64,
    b_cross: f64,
    g: f64,
    c: Vec<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
    h: Vec<f64>,
    w: Vec<f64>,
    u: Vec<f64>,
    p: f64,
    cap_flow: Vec<f64>,
    cap_quality: Vec<f64>,
    cap_price: Vec<f64>,
}

/// Coefficient bundle accepted by [`NetworkEconomy::new`]; every per-pair or
/// per-producer entry may be given as a scalar to broadcast.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Coefficients {
    pub a: ScalarOrVec,
    pub b_own: f64,
    pub b_cross: f64,
    pub g: f64,
    pub c: ScalarOrVec,
    pub d: ScalarOrVec,
    pub e: ScalarOrVec,
    pub h: ScalarOrVec,
    pub w: ScalarOrVec,
    pub u: ScalarOrVec,
    /// Transfer-price weight on the bilinear `pi * Q` payments.
    pub p: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients {
            a: ScalarOrVec::Scalar(2.0),
            b_own: 1.5,
            b_cross: 0.25,
            g: 0.2,
            c: ScalarOrVec::Scalar(0.5),
            d: ScalarOrVec::Scalar(0.1),
            e: ScalarOrVec::Scalar(1.0),
            h: ScalarOrVec::Scalar(0.1),
            w: ScalarOrVec::Scalar(-1.0),
            u: ScalarOrVec::Scalar(1.0),
            p: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

impl ScalarOrVec {
    fn broadcast(&self, name: &str, len: usize) -> Result<Vec<f64>, EconomyError> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(vec![*v; len]),
            ScalarOrVec::Vec(v) if v.len() == len => Ok(v.clone()),
            ScalarOrVec::Vec(v) => Err(EconomyError::BadLength {
                name: name.to_string(),
                expected: len,
                got: v.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub flow: ScalarOrVec,
    pub quality: ScalarOrVec,
    pub price: ScalarOrVec,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            flow: ScalarOrVec::Scalar(2.0),
            quality: ScalarOrVec::Scalar(2.0),
            price: ScalarOrVec::Scalar(2.0),
        }
    }
}

#[derive(Debug, Deserialize)]
struct EconomyFile {
    m: usize,
    n: usize,
    o: usize,
    #[serde(default)]
    coefficients: Coefficients,
    #[serde(default)]
    caps: Caps,
}

impl NetworkEconomy {
    pub fn new(
        m: usize,
        n: usize,
        o: usize,
        coefficients: &Coefficients,
        caps: &Caps,
    ) -> Result<Self, EconomyError> {
        if m == 0 || n == 0 || o == 0 {
            return Err(EconomyError::EmptyTier);
        }
        let mno = m * n * o;
        let econ = NetworkEconomy {
            m,
            n,
            o,
            a: coefficients.a.broadcast("a", mno)?,
            b_own: coefficients.b_own,
            b_cross: coefficients.b_cross,
            g: coefficients.g,
            c: coefficients.c.broadcast("c", m)?,
            d: coefficients.d.broadcast("d", m)?,
            e: coefficients.e.broadcast("e", mno)?,
            h: coefficients.h.broadcast("h", mno)?,
            w: coefficients.w.broadcast("w", mno)?,
            u: coefficients.u.broadcast("u", mno)?,
            p: coefficients.p,
            cap_flow: caps.flow.broadcast("flow cap", mno)?,
            cap_quality: caps.quality.broadcast("quality cap", mno)?,
            cap_price: caps.price.broadcast("price cap", mno)?,
        };
        econ.validate()?;
        Ok(econ)
    }

    /// The pinned default coefficient instance, which is strongly monotone.
    pub fn default_instance(m: usize, n: usize, o: usize) -> Result<Self, EconomyError> {
        NetworkEconomy::new(m, n, o, &Coefficients::default(), &Caps::default())
    }

    pub fn from_toml(text: &str) -> Result<Self, EconomyError> {
        let file: EconomyFile =
            toml::from_str(text).map_err(|e| EconomyError::Format(e.to_string()))?;
        NetworkEconomy::new(file.m, file.n, file.o, &file.coefficients, &file.caps)
    }

    fn validate(&self) -> Result<(), EconomyError> {
        let finite = |name: &str, vals: &[f64]| -> Result<(), EconomyError> {
            for v in vals {
                if !v.is_finite() {
                    return Err(EconomyError::BadCoefficient {
                        name: name.to_string(),
                        requirement: "finite",
                        value: *v,
                    });
                }
            }
            Ok(())
        };
        finite("a", &self.a)?;
        finite("b_own", &[self.b_own])?;
        finite("b_cross", &[self.b_cross])?;
        finite("g", &[self.g])?;
        finite("c", &self.c)?;
        finite("d", &self.d)?;
        finite("e", &self.e)?;
        finite("h", &self.h)?;
        finite("w", &self.w)?;
        finite("u", &self.u)?;
        finite("p", &[self.p])?;
        let nonneg = |name: &str, vals: &[f64]| -> Result<(), EconomyError> {
            for v in vals {
                if *v < 0.0 {
                    return Err(EconomyError::BadCoefficient {
                        name: name.to_string(),
                        requirement: "nonnegative",
                        value: *v,
                    });
                }
            }
            Ok(())
        };
        nonneg("b_own", &[self.b_own])?;
        nonneg("b_cross", &[self.b_cross])?;
        nonneg("c", &self.c)?;
        nonneg("e", &self.e)?;
        nonneg("u", &self.u)?;
        nonneg("p", &[self.p])?;
        for (name, caps) in [
            ("flow cap", &self.cap_flow),
            ("quality cap", &self.cap_quality),
            ("price cap", &self.cap_price),
        ] {
            for v in caps.iter() {
                if !(*v > 0.0) || !v.is_finite() {
                    return Err(EconomyError::BadCoefficient {
                        name: name.to_string(),
                        requirement: "positive and finite",
                        value: *v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn tiers(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.o)
    }

    /// Number of (i, j, k) cells per variable block.
    pub fn cells(&self) -> usize {
        self.m * self.n * self.o
    }

    /// Total stacked dimension `3 m n o`.
    pub fn dim(&self) -> usize {
        3 * self.cells()
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.m && j < self.n && k < self.o);
        (i * self.n + j) * self.o + k
    }

    pub fn caps(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.cap_flow, &self.cap_quality, &self.cap_price)
    }

    pub fn demand_intercepts(&self) -> &[f64] {
        &self.a
    }

    /// Overwrites the demand intercepts (used when bidders' valuations set
    /// the demand side of an auction round).
    pub fn set_demand_intercepts(&mut self, a: Vec<f64>) -> Result<(), EconomyError> {
        if a.len() != self.cells() {
            return Err(EconomyError::BadLength {
                name: "a".to_string(),
                expected: self.cells(),
                got: a.len(),
            });
        }
        for v in &a {
            if !v.is_finite() {
                return Err(EconomyError::BadCoefficient {
                    name: "a".to_string(),
                    requirement: "finite",
                    value: *v,
                });
            }
        }
        self.a = a;
        Ok(())
    }

    /// Demand price seen by cell (i, j, k) at the given state.
    pub fn demand_price(&self, state: &MarketState, i: usize, j: usize, k: usize) -> f64 {
        let x = self.idx(i, j, k);
        let mut others = 0.0;
        for i2 in 0..self.m {
            for j2 in 0..self.n {
                if (i2, j2) != (i, j) {
                    others += state.flows[self.idx(i2, j2, k)];
                }
            }
        }
        self.a[x] - self.b_own * state.flows[x] - self.b_cross * others
            + self.g * state.qualities[x]
    }
}

/// Stacked market variables; `flows`, `qualities`, and `prices` each hold
/// `m*n*o` entries in (i, j, k) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub flows: Vec<f64>,
    pub qualities: Vec<f64>,
    pub prices: Vec<f64>,
}

impl MarketState {
    pub fn zeros(econ: &NetworkEconomy) -> Self {
        let cells = econ.cells();
        MarketState {
            flows: vec![0.0; cells],
            qualities: vec![0.0; cells],
            prices: vec![0.0; cells],
        }
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.flows.len());
        out.extend_from_slice(&self.flows);
        out.extend_from_slice(&self.qualities);
        out.extend_from_slice(&self.prices);
        out
    }

    pub fn from_stacked(econ: &NetworkEconomy, x: &[f64]) -> Result<Self, EconomyError> {
        if x.len() != econ.dim() {
            return Err(EconomyError::BadState { expected: econ.dim(), got: x.len() });
        }
        let cells = econ.cells();
        Ok(MarketState {
            flows: x[..cells].to_vec(),
            qualities: x[cells..2 * cells].to_vec(),
            prices: x[2 * cells..].to_vec(),
        })
    }

    pub fn feasible(&self, econ: &NetworkEconomy, tol: f64) -> bool {
        let within = |vals: &[f64], caps: &[f64]| {
            vals.len() == caps.len()
                && vals
                    .iter()
                    .zip(caps)
                    .all(|(v, c)| *v >= -tol && *v <= c + tol)
        };
        within(&self.flows, &econ.cap_flow)
            && within(&self.qualities, &econ.cap_quality)
            && within(&self.prices, &econ.cap_price)
    }
}

/// Producer i's utility: demand revenue minus production cost minus
/// transport payments.
pub fn producer_utility(
    econ: &NetworkEconomy,
    i: usize,
    state: &MarketState,
) -> Result<f64, EconomyError> {
    if i >= econ.m {
        return Err(EconomyError::BadProducer(i));
    }
    check_state(econ, state)?;
    let mut revenue = 0.0;
    let mut payments = 0.0;
    let mut shipped = 0.0;
    for j in 0..econ.n {
        for k in 0..econ.o {
            let x = econ.idx(i, j, k);
            let flow = state.flows[x];
            revenue += econ.demand_price(state, i, j, k) * flow;
            payments += econ.p * state.prices[x] * flow;
            shipped += flow;
        }
    }
    let production = econ.c[i] / 2.0 * shipped * shipped + econ.d[i] * shipped;
    Ok(revenue - production - payments)
}

/// Transporter j's utility: price income minus delivery and opportunity
/// costs.
pub fn transporter_utility(
    econ: &NetworkEconomy,
    j: usize,
    state: &MarketState,
) -> Result<f64, EconomyError> {
    if j >= econ.n {
        return Err(EconomyError::BadTransporter(j));
    }
    check_state(econ, state)?;
    let mut income = 0.0;
    let mut costs = 0.0;
    for i in 0..econ.m {
        for k in 0..econ.o {
            let x = econ.idx(i, j, k);
            let (flow, quality, price) = (state.flows[x], state.qualities[x], state.prices[x]);
            income += econ.p * price * flow;
            costs += econ.e[x] / 2.0 * quality * quality
                + econ.h[x] * quality * flow
                + econ.w[x] * quality
                + econ.u[x] / 2.0 * price * price;
        }
    }
    Ok(income - costs)
}

fn check_state(econ: &NetworkEconomy, state: &MarketState) -> Result<(), EconomyError> {
    let cells = econ.cells();
    for block in [&state.flows, &state.qualities, &state.prices] {
        if block.len() != cells {
            return Err(EconomyError::BadState { expected: cells, got: block.len() });
        }
    }
    Ok(())
}

/// The stacked equilibrium mapping: each coordinate is the owning agent's
/// negative marginal utility, so zeros of the projected residual are
/// simultaneous best responses.
pub fn equilibrium_mapping(econ: &NetworkEconomy, x: &[f64]) -> Result<Vec<f64>, EconomyError> {
    let state = MarketState::from_stacked(econ, x)?;
    let cells = econ.cells();
    let mut out = vec![0.0; 3 * cells];
    let mut shipped = vec![0.0; econ.m];
    let mut consumer_total = vec![0.0; econ.o];
    let mut producer_consumer = vec![0.0; econ.m * econ.o];
    for i in 0..econ.m {
        for j in 0..econ.n {
            for k in 0..econ.o {
                let flow = state.flows[econ.idx(i, j, k)];
                shipped[i] += flow;
                consumer_total[k] += flow;
                producer_consumer[i * econ.o + k] += flow;
            }
        }
    }
    for i in 0..econ.m {
        for j in 0..econ.n {
            for k in 0..econ.o {
                let x0 = econ.idx(i, j, k);
                let flow = state.flows[x0];
                let rho = econ.a[x0] - econ.b_own * flow
                    - econ.b_cross * (consumer_total[k] - flow)
                    + econ.g * state.qualities[x0];
                let siblings = producer_consumer[i * econ.o + k] - flow;
                out[x0] = -rho
                    + econ.b_own * flow
                    + econ.b_cross * siblings
                    + econ.c[i] * shipped[i]
                    + econ.d[i]
                    + econ.p * state.prices[x0];
                out[cells + x0] =
                    econ.e[x0] * state.qualities[x0] + econ.h[x0] * flow + econ.w[x0];
                out[2 * cells + x0] = econ.u[x0] * state.prices[x0] - econ.p * flow;
            }
        }
    }
    Ok(out)
}

/// Assembles the Nash-equilibrium VI: the closed-form stacked mapping over
/// one `[0, cap]` factor per coordinate.
pub fn to_vi(econ: &NetworkEconomy) -> Result<VIProblem, EconomyError> {
    let owned = econ.clone();
    let mapping = move |x: &[f64]| {
        equilibrium_mapping(&owned, x).expect("dimension fixed by the VI wrapper")
    };
    let caps = econ
        .cap_flow
        .iter()
        .chain(&econ.cap_quality)
        .chain(&econ.cap_price);
    let factors: Vec<Factor> = caps.map(|c| Factor::OrthantCap { cap: vec![*c] }).collect();
    Ok(VIProblem::new(mapping, factors)?)
}

/// Solves the equilibrium VI with the deterministic projection method from
/// an all-zero start.
pub fn solve_equilibrium(
    econ: &NetworkEconomy,
    alpha: f64,
    tol: f64,
    max_iter: u64,
) -> Result<(MarketState, SolveTrace), EconomyError> {
    let vi = to_vi(econ)?;
    let x0 = vec![0.0; econ.dim()];
    let (x, trace) = crate::vi::solve_projection(&vi, alpha, tol, max_iter, &x0, max_iter / 100 + 1)?;
    Ok((MarketState::from_stacked(econ, &x)?, trace))
}

/// A conservative safe step for the deterministic solver: `mu / L^2` from
/// Gershgorin-style bounds on the stacked Jacobian.
pub fn safe_step(econ: &NetworkEconomy) -> f64 {
    let cmax = econ.c.iter().cloned().fold(0.0, f64::max);
    let emax = econ.e.iter().cloned().fold(0.0, f64::max);
    let umax = econ.u.iter().cloned().fold(0.0, f64::max);
    let hmax = econ.h.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let row = 2.0 * econ.b_own
        + econ.b_cross * ((econ.m * econ.n) as f64)
        + cmax * ((econ.n * econ.o) as f64)
        + hmax
        + 1.0
        + emax
        + umax
        + econ.g.abs();
    1.0 / (row * row)
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentImprovement {
    pub agent: String,
    pub current_utility: f64,
    pub best_utility: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestResponseReport {
    pub agents: Vec<AgentImprovement>,
    pub max_improvement: f64,
    pub equilibrium: bool,
}

/// For each agent, maximizes its own utility over its own coordinates with
/// the others frozen (projected gradient ascent followed by coordinatewise
/// golden-section refinement) and reports the attainable improvement. The
/// state is an equilibrium exactly when no agent can improve by more than
/// `eps`.
pub fn best_response_check(
    econ: &NetworkEconomy,
    state: &MarketState,
    eps: f64,
) -> Result<BestResponseReport, EconomyError> {
    check_state(econ, state)?;
    let mut agents = Vec::new();
    for i in 0..econ.m {
        let coords: Vec<usize> = (0..econ.n)
            .flat_map(|j| (0..econ.o).map(move |k| (j, k)))
            .map(|(j, k)| econ.idx(i, j, k))
            .collect();
        let caps: Vec<f64> = coords.iter().map(|&x| econ.cap_flow[x]).collect();
        let objective = |own: &[f64]| {
            let mut s = state.clone();
            for (slot, v) in coords.iter().zip(own) {
                s.flows[*slot] = *v;
            }
            producer_utility(econ, i, &s).expect("indices are in range")
        };
        let start: Vec<f64> = coords.iter().map(|&x| state.flows[x]).collect();
        let (_, best_val) = maximize_concave(&objective, &start, &caps);
        let current = objective(&start);
        agents.push(AgentImprovement {
            agent: format!("producer {i}"),
            current_utility: current,
            best_utility: best_val,
            improvement: (best_val - current).max(0.0),
        });
    }
    for j in 0..econ.n {
        let coords: Vec<usize> = (0..econ.m)
            .flat_map(|i| (0..econ.o).map(move |k| (i, k)))
            .map(|(i, k)| econ.idx(i, j, k))
            .collect();
        let mut caps: Vec<f64> = coords.iter().map(|&x| econ.cap_quality[x]).collect();
        caps.extend(coords.iter().map(|&x| econ.cap_price[x]));
        let objective = |own: &[f64]| {
            let mut s = state.clone();
            for (slot, v) in coords.iter().zip(own) {
                s.qualities[*slot] = *v;
            }
            for (slot, v) in coords.iter().zip(&own[coords.len()..]) {
                s.prices[*slot] = *v;
            }
            transporter_utility(econ, j, &s).expect("indices are in range")
        };
        let mut start: Vec<f64> = coords.iter().map(|&x| state.qualities[x]).collect();
        start.extend(coords.iter().map(|&x| state.prices[x]));
        let (_, best_val) = maximize_concave(&objective, &start, &caps);
        let current = objective(&start);
        agents.push(AgentImprovement {
            agent: format!("transporter {j}"),
            current_utility: current,
            best_utility: best_val,
            improvement: (best_val - current).max(0.0),
        });
    }
    let max_improvement = agents
        .iter()
        .map(|a| a.improvement)
        .fold(0.0, f64::max);
    Ok(BestResponseReport { agents, max_improvement, equilibrium: max_improvement <= eps })
}

/// Maximizes a smooth concave objective over a box `[0, cap]` by projected
/// gradient ascent (central-difference gradients) followed by cyclic
/// golden-section refinement of each coordinate.
fn maximize_concave(
    objective: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    caps: &[f64],
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let clamp = |v: f64, c: f64| v.max(0.0).min(c);
    let mut x: Vec<f64> = start.iter().zip(caps).map(|(v, c)| clamp(*v, *c)).collect();
    let fd = 1e-6;
    let mut step = 0.25;
    let mut fx = objective(&x);
    for _ in 0..400 {
        let mut grad = vec![0.0; dim];
        for t in 0..dim {
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[t] += fd;
            lo[t] -= fd;
            grad[t] = (objective(&hi) - objective(&lo)) / (2.0 * fd);
        }
        let candidate: Vec<f64> = x
            .iter()
            .zip(&grad)
            .zip(caps)
            .map(|((v, g), c)| clamp(v + step * g, *c))
            .collect();
        let fc = objective(&candidate);
        if fc > fx {
            x = candidate;
            fx = fc;
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    // Golden-section sweeps pin each coordinate to machine precision.
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..4 {
        for t in 0..dim {
            let mut lo = 0.0;
            let mut hi = caps[t];
            let section = |v: f64, x: &[f64]| {
                let mut y = x.to_vec();
                y[t] = v;
                objective(&y)
            };
            let mut p = hi - phi * (hi - lo);
            let mut q = lo + phi * (hi - lo);
            let mut fp = section(p, &x);
            let mut fq = section(q, &x);
            for _ in 0..80 {
                if fp < fq {
                    lo = p;
                    p = q;
                    fp = fq;
                    q = lo + phi * (hi - lo);
                    fq = section(q, &x);
                } else {
                    hi = q;
                    q = p;
                    fq = fp;
                    p = hi - phi * (hi - lo);
                    fp = section(p, &x);
                }
            }
            let mid = (lo + hi) / 2.0;
            let fm = section(mid, &x);
            if fm > fx {
                x[t] = mid;
                fx = fm;
            }
        }
    }
    (x, fx)
}

/// Equilibrium report: the state, each agent's utility, the VI residual,
/// and the best-response slack.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub state: MarketState,
    pub producer_utilities: Vec<f64>,
    pub transporter_utilities: Vec<f64>,
    pub gap: f64,
    pub best_response: BestResponseReport,
}

pub fn equilibrium_report(
    econ: &NetworkEconomy,
    state: &MarketState,
    eps: f64,
) -> Result<EquilibriumReport, EconomyError> {
    let vi = to_vi(econ)?;
    let gap = crate::vi::gap_residual(&vi, &state.stacked())?;
    let producer_utilities = (0..econ.m)
        .map(|i| producer_utility(econ, i, state))
        .collect::<Result<_, _>>()?;
    let transporter_utilities = (0..econ.n)
        .map(|j| transporter_utility(econ, j, state))
        .collect::<Result<_, _>>()?;
    let best_response = best_response_check(econ, state, eps)?;
    Ok(EquilibriumReport {
        state: state.clone(),
        producer_utilities,
        transporter_utilities,
        gap,
        best_response,
    })
}
