//! Statistical machinery of the sliced (path-integral) target
//! distribution
//!
//! ```text
//! q_{M,beta}(s, t) ~ exp( beta F0(s) + gamma(t) F1(s) )
//! F0(s) = (1/M) sum_k sum_(i,j) J_ij s_ik s_jk
//! F1(s) = sum_k sum_i s_ik s_i,k+1          (slice M + 1 wraps to 1)
//! gamma(t) = (1/2) ln coth( beta Gamma(t) / M )
//! ```
//!
//! Note the sign convention: the exponent carries `+J`, opposite to the
//! optimization Hamiltonian. [`convention_energy`] bridges the two.
//!
//! The module provides exact sampling of the `t`-free distribution (its
//! slices are independent), the single-flip Metropolis chain for the
//! `t`-dependent one, the slice-sum statistic and its normality check,
//! and the transfer-matrix partition identity in [`transfer`].

pub mod transfer;

use crate::error::{Error, Result};
use crate::ising::IsingInstance;
use crate::sqa::PathIntegralState;
use crate::stats;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Enumeration guard for exact path-state computations (`2^(b M)` states).
pub const EXACT_PATH_BITS: usize = 20;
/// Per-slice exact sampling cap.
pub const SAMPLE_B_CAP: usize = 4;

/// Maximum change of `F1` under a single spin flip: two imaginary-time
/// bonds move by 2 each.
pub fn default_l1m_singleflip() -> f64 {
    4.0
}

/// `gamma(t) = (1/2) ln coth(beta Gamma / M)`; requires `Gamma > 0`.
pub fn gamma_coupling(beta: f64, gamma_t: f64, m: usize) -> Result<f64> {
    if gamma_t <= 0.0 {
        return Err(Error::Domain(format!(
            "transverse strength must be positive, got {gamma_t}"
        )));
    }
    let x = beta * gamma_t / m as f64;
    Ok(0.5 * (1.0 / x.tanh()).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AcceptanceKind {
    /// `g(u) = min(1, u)`
    Metropolis,
    /// `g(u) = u / (1 + u)`
    Barker,
}

impl AcceptanceKind {
    fn probability(self, log_ratio: f64) -> f64 {
        match self {
            AcceptanceKind::Metropolis => {
                if log_ratio >= 0.0 {
                    1.0
                } else {
                    log_ratio.exp()
                }
            }
            AcceptanceKind::Barker => {
                let u = log_ratio.exp();
                u / (1.0 + u)
            }
        }
    }
}

/// Transverse-strength schedule for the inhomogeneous chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GammaSchedule {
    Constant(f64),
    /// `Gamma(t) = factor * floor(t)`, admissible for `factor >= 1`.
    FloorMultiple(f64),
    /// `Gamma(t) = start * (1 + t / ramp)`: admissible whenever `start`
    /// clears the `t = 0` floor, and drives the slice coupling to zero,
    /// the regime in which the sliced marginal converges to the free
    /// single-slice law.
    Ramp { start: f64, ramp: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub beta: f64,
    /// Slice count `M`.
    pub slices: usize,
    pub gamma: GammaSchedule,
    /// Transition-diameter parameter; defaults to `b * M`, the single-flip
    /// upper bound, when absent. A larger value only raises the floor.
    pub r_diameter: Option<usize>,
    /// Maximum single-move jump of `F1`.
    pub l1m: f64,
    pub acceptance: AcceptanceKind,
}

impl TheoryParams {
    pub fn new(beta: f64, slices: usize, gamma: GammaSchedule) -> Result<Self> {
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        if slices < 2 {
            return Err(Error::Config(format!(
                "slice count must be at least 2, got {slices}"
            )));
        }
        Ok(Self {
            beta,
            slices,
            gamma,
            r_diameter: None,
            l1m: default_l1m_singleflip(),
            acceptance: AcceptanceKind::Metropolis,
        })
    }

    fn r_for(&self, b: usize) -> usize {
        self.r_diameter.unwrap_or(b * self.slices)
    }

    /// Admissibility floor at step `t`:
    /// `(M / beta) atanh( (t + 2)^(-2 / (R L1M)) )`.
    pub fn schedule_floor(&self, t: f64, b: usize) -> f64 {
        let exponent = -2.0 / (self.r_for(b) as f64 * self.l1m);
        let x = (t + 2.0).powf(exponent);
        (self.slices as f64 / self.beta) * x.atanh()
    }

    /// Transverse strength at step `t`.
    pub fn gamma_strength(&self, t: f64, b: usize) -> f64 {
        match self.gamma {
            GammaSchedule::Constant(g) => g,
            GammaSchedule::FloorMultiple(f) => f * self.schedule_floor(t, b),
            GammaSchedule::Ramp { start, ramp } => start * (1.0 + t / ramp),
        }
    }

    /// Time coupling `gamma(t)` of the target distribution.
    pub fn gamma_at(&self, t: f64, b: usize) -> Result<f64> {
        gamma_coupling(self.beta, self.gamma_strength(t, b), self.slices)
    }

    fn check_admissible(&self, t: f64, b: usize) -> Result<()> {
        let floor = self.schedule_floor(t, b);
        if self.gamma_strength(t, b) + 1e-12 < floor {
            return Err(Error::Config(format!(
                "Gamma({t}) = {} below the admissibility floor {floor}",
                self.gamma_strength(t, b)
            )));
        }
        Ok(())
    }
}

fn require_field_free(inst: &IsingInstance) -> Result<()> {
    if inst.has_fields() {
        return Err(Error::Config(
            "the sliced distribution is defined for field-free instances (h = 0)".into(),
        ));
    }
    Ok(())
}

/// `+J` single-slice energy `E0(s) = sum_(i,j) J_ij s_i s_j` for every
/// configuration index; note the sign is opposite to the optimization
/// Hamiltonian.
fn slice_weights_exponent(inst: &IsingInstance) -> Vec<f64> {
    let b = inst.b();
    let dim = 1usize << b;
    let mut out = vec![0.0; dim];
    for (idx, e) in out.iter_mut().enumerate() {
        for edge in inst.edges() {
            let si = if idx >> (b - 1 - edge.i as usize) & 1 == 0 { 1.0 } else { -1.0 };
            let sj = if idx >> (b - 1 - edge.j as usize) & 1 == 0 { 1.0 } else { -1.0 };
            *e += edge.coupling * si * sj;
        }
    }
    out
}

/// Bridge between the `+J` convention of this module and the optimization
/// energy: `convention_energy(s) = -H_I(s)` for field-free instances.
pub fn convention_energy(inst: &IsingInstance, config_index: usize) -> f64 {
    slice_weights_exponent(inst)[config_index]
}

/// Draw one path state from the `t`-free distribution
/// `q_{M,beta}(s) ~ exp(beta F0(s))`: every slice is an independent
/// single-slice Boltzmann draw at inverse temperature `beta / M` because
/// `F0` factorizes across slices. One uniform draw per slice.
pub fn sample_q_fixed(
    params: &TheoryParams,
    inst: &IsingInstance,
    rng: &mut impl Rng,
) -> Result<PathIntegralState> {
    require_field_free(inst)?;
    if inst.b() > SAMPLE_B_CAP {
        return Err(Error::Capability {
            what: "exact per-slice sampling (2^b table)",
            requested: inst.b(),
            limit: SAMPLE_B_CAP,
        });
    }
    let b = inst.b();
    let scale = params.beta / params.slices as f64;
    let exponents = slice_weights_exponent(inst);
    let max_e = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut cdf: Vec<f64> = exponents
        .iter()
        .map(|e| (scale * (e - max_e)).exp())
        .collect();
    let total: f64 = cdf.iter().sum();
    let mut acc = 0.0;
    for w in cdf.iter_mut() {
        acc += *w / total;
        *w = acc;
    }

    let mut spins = Vec::with_capacity(params.slices * b);
    for _ in 0..params.slices {
        let r: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= r).min((1 << b) - 1);
        for j in 0..b {
            spins.push(if idx >> (b - 1 - j) & 1 == 0 { 1 } else { -1 });
        }
    }
    PathIntegralState::new(params.slices, b, spins)
}

/// The normalized slice sum `X_M = (1/sqrt(M)) sum_k sum_(i,j) J_ij s_ik s_jk`.
pub fn clt_statistic(state: &PathIntegralState, inst: &IsingInstance) -> Result<f64> {
    if state.b() != inst.b() {
        return Err(Error::DimensionMismatch(format!(
            "path state has {} sites, instance has {}",
            state.b(),
            inst.b()
        )));
    }
    let mut sum = 0.0;
    for k in 0..state.tau() {
        for edge in inst.edges() {
            sum += edge.coupling
                * f64::from(state.get(k, edge.i as usize) * state.get(k, edge.j as usize));
        }
    }
    Ok(sum / (state.tau() as f64).sqrt())
}

/// `F1(s)`: sum of imaginary-time bond products with periodic boundary.
pub fn time_bond_sum(state: &PathIntegralState) -> f64 {
    let (tau, b) = (state.tau(), state.b());
    let mut sum = 0i64;
    for k in 0..tau {
        let next = (k + 1) % tau;
        for i in 0..b {
            sum += i64::from(state.get(k, i) * state.get(next, i));
        }
    }
    sum as f64
}

/// Single-flip Metropolis chain targeting `q_{M,beta}(s, t)`. One step is
/// one proposed flip, drawn uniformly over the `b * M` positions (the
/// generation probability is symmetric, normalized, self-move-free, and
/// irreducible); accepted with `g(q(y,t) / q(x,t))`. Each [`McmcChain::step`]
/// advances `t` by one.
pub struct McmcChain<'a> {
    params: &'a TheoryParams,
    inst: &'a IsingInstance,
    state: PathIntegralState,
    t: u64,
}

impl<'a> McmcChain<'a> {
    /// Build a chain with a random start. Admissibility of the schedule is
    /// enforced per inhomogeneous [`McmcChain::step`]; frozen-`t` stepping
    /// is a diagnostic and accepts any positive transverse strength.
    pub fn new(
        params: &'a TheoryParams,
        inst: &'a IsingInstance,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        require_field_free(inst)?;
        let state = PathIntegralState::random(params.slices, inst.b(), rng)?;
        Ok(Self {
            params,
            inst,
            state,
            t: 0,
        })
    }

    pub fn state(&self) -> &PathIntegralState {
        &self.state
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    fn log_ratio(&self, site: usize, slice: usize, gamma: f64) -> f64 {
        let mut field = 0.0;
        for &(j, coupling) in self.inst.adjacency(site) {
            field += coupling * f64::from(self.state.get(slice, j as usize));
        }
        let tau = self.params.slices;
        let up = (slice + 1) % tau;
        let down = (slice + tau - 1) % tau;
        let s = f64::from(self.state.get(slice, site));
        let time_term = f64::from(self.state.get(down, site) + self.state.get(up, site));
        // delta of beta F0 + gamma F1 under the flip
        -2.0 * s
            * (self.params.beta / tau as f64 * field + gamma * time_term)
    }

    fn propose(&mut self, gamma: f64, rng: &mut impl Rng) {
        let positions = self.params.slices * self.inst.b();
        let pick = rng.random_range(0..positions);
        let (slice, site) = (pick / self.inst.b(), pick % self.inst.b());
        let p = self
            .params
            .acceptance
            .probability(self.log_ratio(site, slice, gamma));
        let r: f64 = rng.random();
        if r < p {
            self.state.flip(slice, site);
        }
    }

    /// One inhomogeneous step at the current `t`, then advance `t`.
    pub fn step(&mut self, rng: &mut impl Rng) -> Result<()> {
        self.params.check_admissible(self.t as f64, self.inst.b())?;
        let gamma = self.params.gamma_at(self.t as f64, self.inst.b())?;
        self.propose(gamma, rng);
        self.t += 1;
        Ok(())
    }

    /// One homogeneous step with `t` frozen at the given value.
    pub fn step_frozen(&mut self, t: f64, rng: &mut impl Rng) -> Result<()> {
        let gamma = self.params.gamma_at(t, self.inst.b())?;
        self.propose(gamma, rng);
        Ok(())
    }
}

/// Run the inhomogeneous chain for `steps` proposals from a random start.
pub fn mcmc_q_t(
    params: &TheoryParams,
    inst: &IsingInstance,
    steps: u64,
    rng: &mut impl Rng,
) -> Result<PathIntegralState> {
    let mut chain = McmcChain::new(params, inst, rng)?;
    for _ in 0..steps {
        chain.step(rng)?;
    }
    Ok(chain.state.clone())
}

/// Path-state index in slice-major bit order (slice 0 site 0 is the most
/// significant bit; bit 0 means spin up).
pub fn path_state_to_index(state: &PathIntegralState) -> usize {
    let mut idx = 0usize;
    for &s in state.spins() {
        idx = (idx << 1) | usize::from(s < 0);
    }
    idx
}

pub fn path_state_from_index(index: usize, tau: usize, b: usize) -> PathIntegralState {
    let bits = tau * b;
    let spins = (0..bits)
        .map(|p| if index >> (bits - 1 - p) & 1 == 0 { 1i8 } else { -1 })
        .collect();
    PathIntegralState::new(tau, b, spins).expect("bits are +-1")
}

/// Exact `q_{M,beta}(., t)` by enumeration (requires `b * M <= 20` bits).
pub fn exact_q_t(params: &TheoryParams, inst: &IsingInstance, t: f64) -> Result<Vec<f64>> {
    require_field_free(inst)?;
    let bits = params.slices * inst.b();
    if bits > EXACT_PATH_BITS {
        return Err(Error::Capability {
            what: "exact sliced distribution (2^(b M) enumeration)",
            requested: bits,
            limit: EXACT_PATH_BITS,
        });
    }
    let gamma = params.gamma_at(t, inst.b())?;
    let dim = 1usize << bits;
    let mut log_w = Vec::with_capacity(dim);
    for idx in 0..dim {
        let state = path_state_from_index(idx, params.slices, inst.b());
        let f0: f64 = (0..params.slices)
            .map(|k| {
                inst.edges()
                    .iter()
                    .map(|e| {
                        e.coupling
                            * f64::from(
                                state.get(k, e.i as usize) * state.get(k, e.j as usize),
                            )
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / params.slices as f64;
        log_w.push(params.beta * f0 + gamma * time_bond_sum(&state));
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    Ok(probs)
}

/// Verify the four conditions on the uniform single-flip generation
/// probability by exhaustive construction (requires `b * M <= 8` bits):
/// symmetry, row normalization, no self-moves, irreducibility.
pub fn check_generation_conditions(b: usize, slices: usize) -> Result<()> {
    let bits = b * slices;
    if bits > 8 {
        return Err(Error::Capability {
            what: "exhaustive generation-probability check",
            requested: bits,
            limit: 8,
        });
    }
    let dim = 1usize << bits;
    let p = |y: usize, x: usize| -> f64 {
        if (y ^ x).count_ones() == 1 {
            1.0 / bits as f64
        } else {
            0.0
        }
    };
    for x in 0..dim {
        if p(x, x) != 0.0 {
            return Err(Error::Domain("self-move has positive probability".into()));
        }
        let mut row = 0.0;
        for y in 0..dim {
            if (p(y, x) - p(x, y)).abs() > 1e-15 {
                return Err(Error::Domain(format!("asymmetric at ({y}, {x})")));
            }
            row += p(y, x);
        }
        if (row - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("row {x} sums to {row}")));
        }
    }
    // irreducibility: breadth-first search over positive transitions
    let mut seen = vec![false; dim];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for bit in 0..bits {
            let y = x ^ (1 << bit);
            if !seen[y] {
                seen[y] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    if count != dim {
        return Err(Error::Domain("generation graph is not irreducible".into()));
    }
    Ok(())
}

/// Exact distribution evolution of the inhomogeneous chain: push the full
/// `2^(b M)` law through `G(., .; t)` step by step and report the total
/// variation between the slice-0 marginal and the free single-slice
/// Boltzmann law `q_{1, beta/M}` at each checkpoint.
pub fn lemma1_marginal_tv(
    params: &TheoryParams,
    inst: &IsingInstance,
    checkpoints: &[u64],
) -> Result<Vec<f64>> {
    require_field_free(inst)?;
    let b = inst.b();
    let bits = params.slices * b;
    if bits > 16 {
        return Err(Error::Capability {
            what: "exact chain evolution (2^(b M) states)",
            requested: bits,
            limit: 16,
        });
    }
    params.check_admissible(0.0, b)?;
    let dim = 1usize << bits;
    let scale = params.beta / params.slices as f64;
    let exponents = slice_weights_exponent(inst);
    let max_e = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|e| (scale * (e - max_e)).exp()).collect();
    let z1: f64 = weights.iter().sum();
    let q1: Vec<f64> = weights.iter().map(|w| w / z1).collect();

    // log target exponents per state, reused with the step's gamma
    let mut f0 = vec![0.0f64; dim];
    let mut f1 = vec![0.0f64; dim];
    for idx in 0..dim {
        let state = path_state_from_index(idx, params.slices, b);
        f0[idx] = (0..params.slices)
            .map(|k| {
                inst.edges()
                    .iter()
                    .map(|e| {
                        e.coupling
                            * f64::from(state.get(k, e.i as usize) * state.get(k, e.j as usize))
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / params.slices as f64;
        f1[idx] = time_bond_sum(&state);
    }

    let mut law = vec![1.0 / dim as f64; dim];
    let mut next = vec![0.0f64; dim];
    let mut out = Vec::with_capacity(checkpoints.len());
    let max_t = checkpoints.iter().copied().max().unwrap_or(0);
    let gen = 1.0 / bits as f64;

    let record = |law: &[f64], out: &mut Vec<f64>| {
        let mut marginal = vec![0.0f64; 1 << b];
        for (idx, &p) in law.iter().enumerate() {
            marginal[idx >> (bits - b)] += p;
        }
        let tv: f64 = marginal
            .iter()
            .zip(&q1)
            .map(|(m, q)| (m - q).abs())
            .sum::<f64>()
            / 2.0;
        out.push(tv);
    };

    let mut checkpoint_iter = checkpoints.iter().peekable();
    for t in 0..=max_t {
        while checkpoint_iter.peek() == Some(&&t) {
            record(&law, &mut out);
            checkpoint_iter.next();
        }
        if t == max_t {
            break;
        }
        params.check_admissible(t as f64, b)?;
        let gamma = params.gamma_at(t as f64, b)?;
        next.iter_mut().for_each(|p| *p = 0.0);
        for x in 0..dim {
            let px = law[x];
            if px == 0.0 {
                continue;
            }
            let log_qx = params.beta * f0[x] + gamma * f1[x];
            let mut stay = 1.0;
            for bit in 0..bits {
                let y = x ^ (1 << bit);
                let log_qy = params.beta * f0[y] + gamma * f1[y];
                let a = params.acceptance.probability(log_qy - log_qx);
                let flow = gen * a;
                next[y] += px * flow;
                stay -= flow;
            }
            next[x] += px * stay;
        }
        std::mem::swap(&mut law, &mut next);
    }
    Ok(out)
}

/// Report of the slice-sum normality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    /// `(M, KS distance to N(0, sum J^2))` per slice count.
    pub per_m: Vec<(usize, f64)>,
    pub ks_critical: f64,
    pub mean_at_largest: f64,
    pub variance_at_largest: f64,
    /// True when the KS distance shrinks from the first to the last `M`.
    pub decreasing: bool,
    /// True when the largest `M` passes the 0.01-level KS test.
    pub passes_ks_at_largest: bool,
    pub n_samples: usize,
}

/// Draw `n_samples` independent values of the slice sum at each `M` and
/// compare against the limiting normal law `N(0, sum J^2)`.
pub fn clt_convergence_test(
    inst: &IsingInstance,
    beta: f64,
    ms: &[usize],
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<CltReport> {
    if n_samples < 1000 {
        return Err(Error::Config(format!(
            "need at least 10^3 samples, got {n_samples}"
        )));
    }
    if ms.is_empty() {
        return Err(Error::Config("empty slice-count list".into()));
    }
    let var: f64 = inst.edges().iter().map(|e| e.coupling * e.coupling).sum();
    let mut per_m = Vec::with_capacity(ms.len());
    let mut mean_at_largest = 0.0;
    let mut variance_at_largest = 0.0;
    for (mi, &m) in ms.iter().enumerate() {
        let params = TheoryParams::new(beta, m, GammaSchedule::Constant(1.0))?;
        let mut samples = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let state = sample_q_fixed(&params, inst, rng)?;
            samples.push(clt_statistic(&state, inst)?);
        }
        let ks = if var == 0.0 {
            // degenerate: X is identically zero and so is the limit law
            if samples.iter().any(|&x| x != 0.0) {
                return Err(Error::Domain(
                    "zero-coupling instance produced a nonzero slice sum".into(),
                ));
            }
            0.0
        } else {
            let sd = var.sqrt();
            stats::ks_statistic(&samples, |x| stats::normal_cdf(x, 0.0, sd))?
        };
        if mi == ms.len() - 1 {
            mean_at_largest = stats::mean(&samples);
            variance_at_largest = if samples.len() > 1 {
                stats::variance(&samples)
            } else {
                0.0
            };
        }
        per_m.push((m, ks));
    }
    let ks_critical = stats::ks_critical(n_samples, 0.01);
    let decreasing = per_m.first().map(|f| f.1).unwrap_or(0.0)
        > per_m.last().map(|l| l.1).unwrap_or(0.0)
        || per_m.len() == 1
        || var == 0.0;
    let passes = per_m.last().map(|l| l.1).unwrap_or(0.0) <= ks_critical;
    Ok(CltReport {
        per_m,
        ks_critical,
        mean_at_largest,
        variance_at_largest,
        decreasing,
        passes_ks_at_largest: passes,
        n_samples,
    })
}
