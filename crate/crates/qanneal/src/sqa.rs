//! Simulated quantum annealing: path-integral Monte Carlo on the
//! (2+1)-dimensional anisotropic Ising model obtained by Trotterizing the
//! transverse-field Hamiltonian.
//!
//! A path state is a stack of `tau` replicas ("slices") of the spin system,
//! periodic in the slice index. Each sweep makes one pass of local moves
//! (every spin of every slice) followed by one pass of global moves (every
//! replica column), both Metropolis with effective temperature `tau * T`.
//!
//! RNG contract: one uniform `f64` draw per proposal, consumed whether or
//! not the move is downhill; initialization draws one uniform per entry in
//! slice-major order. Runs replay bit-exactly from their seed.

use crate::error::{Error, Result};
use crate::ising::{IsingInstance, SpinConfiguration};
use crate::sa::SaRunResult;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default clamp applied to the transverse amplitude before the log-tanh
/// transform; keeps the imaginary-time coupling finite once the schedule
/// reaches zero, which freezes the replicas together as intended.
pub const DEFAULT_EPS_A: f64 = 1e-12;

/// `tau x b` array of +-1 spins with periodic imaginary-time boundary
/// (slice `tau - 1` couples back to slice 0). Stored slice-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathIntegralState {
    tau: usize,
    b: usize,
    spins: Vec<i8>,
}

impl PathIntegralState {
    pub fn new(tau: usize, b: usize, spins: Vec<i8>) -> Result<Self> {
        if tau < 2 {
            return Err(Error::Config(format!("tau must be at least 2, got {tau}")));
        }
        if spins.len() != tau * b {
            return Err(Error::DimensionMismatch(format!(
                "{} spins for tau = {tau}, b = {b}",
                spins.len()
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("path spins must be +-1".into()));
        }
        Ok(Self { tau, b, spins })
    }

    /// Random +-1 fill, one uniform draw per entry, slice-major.
    pub fn random(tau: usize, b: usize, rng: &mut impl Rng) -> Result<Self> {
        let spins = (0..tau * b)
            .map(|_| if rng.random::<f64>() < 0.5 { 1i8 } else { -1 })
            .collect();
        Self::new(tau, b, spins)
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn b(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn get(&self, slice: usize, site: usize) -> i8 {
        self.spins[slice * self.b + site]
    }

    pub fn flip(&mut self, slice: usize, site: usize) {
        self.spins[slice * self.b + site] *= -1;
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Copy of one Trotter slice as a spin configuration.
    pub fn slice(&self, l: usize) -> SpinConfiguration {
        SpinConfiguration::new(self.spins[l * self.b..(l + 1) * self.b].to_vec())
            .expect("entries are +-1")
    }
}

/// Control functions for one anneal: transverse amplitude `A`, Ising
/// amplitude `B` on normalized time `[0, 1]`, physical temperature, and
/// the clamp for `A` near zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqaSchedule {
    pub shape: ScheduleShape,
    pub temperature: f64,
    pub eps_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScheduleShape {
    /// Piecewise-quadratic pair patterned on the published device curves:
    /// `A(t) = 8t^2 - 9.6t + 2.88` up to `t = 0.6` then zero, and
    /// `B(t) = 5.2t^2 + 0.2t`.
    DwDefault,
    /// `A(t) = a0 (1 - t)`, `B(t) = b1 t`.
    Linear { a0: f64, b1: f64 },
    /// Frozen amplitudes; useful for stationarity diagnostics. Does not
    /// satisfy the annealing endpoint conditions, so `sqa_run` rejects it.
    Const { a: f64, b: f64 },
}

impl SqaSchedule {
    /// The default schedule at temperature 0.1.
    pub fn dw_default() -> Self {
        Self {
            shape: ScheduleShape::DwDefault,
            temperature: 0.1,
            eps_a: DEFAULT_EPS_A,
        }
    }

    pub fn linear(a0: f64, b1: f64, temperature: f64) -> Self {
        Self {
            shape: ScheduleShape::Linear { a0, b1 },
            temperature,
            eps_a: DEFAULT_EPS_A,
        }
    }

    pub fn constant(a: f64, b: f64, temperature: f64) -> Self {
        Self {
            shape: ScheduleShape::Const { a, b },
            temperature,
            eps_a: DEFAULT_EPS_A,
        }
    }

    /// Transverse amplitude `A(t)`, `t` in `[0, 1]`.
    pub fn transverse(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::DwDefault => {
                if t <= 0.6 {
                    8.0 * t * t - 9.6 * t + 2.88
                } else {
                    0.0
                }
            }
            ScheduleShape::Linear { a0, .. } => a0 * (1.0 - t),
            ScheduleShape::Const { a, .. } => a,
        }
    }

    /// Ising amplitude `B(t)`.
    pub fn ising(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::DwDefault => 5.2 * t * t + 0.2 * t,
            ScheduleShape::Linear { b1, .. } => b1 * t,
            ScheduleShape::Const { b, .. } => b,
        }
    }

    /// `dA/dt` on normalized time (closed form, used by the exact-dynamics
    /// module; the annealers never need it).
    pub fn transverse_deriv(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::DwDefault => {
                if t <= 0.6 {
                    16.0 * t - 9.6
                } else {
                    0.0
                }
            }
            ScheduleShape::Linear { a0, .. } => -a0,
            ScheduleShape::Const { .. } => 0.0,
        }
    }

    /// `dB/dt` on normalized time.
    pub fn ising_deriv(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::DwDefault => 10.4 * t + 0.2,
            ScheduleShape::Linear { b1, .. } => b1,
            ScheduleShape::Const { .. } => 0.0,
        }
    }

    /// Endpoint and monotonicity conditions required of an annealing
    /// schedule: `A(1) = 0`, `B(0) = 0`, `A` non-increasing, `B`
    /// non-decreasing, positive temperature.
    pub fn validate_for_annealing(&self) -> Result<()> {
        if self.temperature <= 0.0 || !self.temperature.is_finite() {
            return Err(Error::Config(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.eps_a <= 0.0 {
            return Err(Error::Config("eps_a must be positive".into()));
        }
        if self.transverse(1.0).abs() > 1e-12 || self.ising(0.0).abs() > 1e-12 {
            return Err(Error::Config(
                "annealing schedule needs A(1) = 0 and B(0) = 0".into(),
            ));
        }
        let grid = 1000;
        for k in 0..grid {
            let t0 = k as f64 / grid as f64;
            let t1 = (k + 1) as f64 / grid as f64;
            if self.transverse(t1) > self.transverse(t0) + 1e-12 {
                return Err(Error::Config(format!(
                    "A(t) increases between {t0} and {t1}"
                )));
            }
            if self.ising(t1) + 1e-12 < self.ising(t0) {
                return Err(Error::Config(format!(
                    "B(t) decreases between {t0} and {t1}"
                )));
            }
        }
        Ok(())
    }

    /// Imaginary-time coupling at normalized time `t` for `tau` slices.
    pub fn time_coupling(&self, t: f64, tau: usize) -> f64 {
        imaginary_time_coupling(self.transverse(t), tau, self.temperature, self.eps_a)
    }
}

/// `J(t) = -(tau T / 2) ln tanh(A(t) / (tau T))`, with `A` clamped below at
/// `eps_a`. Strictly positive, and grows without bound as `A` heads to 0.
pub fn imaginary_time_coupling(a_t: f64, tau: usize, temperature: f64, eps_a: f64) -> f64 {
    let tau_t = tau as f64 * temperature;
    let a = a_t.max(eps_a);
    -(tau_t / 2.0) * (a / tau_t).tanh().ln()
}

/// Direct evaluation of the anisotropic path Hamiltonian
/// `-sum_l [ b_weight * sum_(i,j) J_ij s_il s_jl + j_weight * sum_i s_il s_i,l+1 ]`
/// with the periodic slice boundary. This is the oracle the move deltas are
/// tested against; keep it a plain double loop.
pub fn anisotropic_energy(
    inst: &IsingInstance,
    state: &PathIntegralState,
    b_weight: f64,
    j_weight: f64,
) -> Result<f64> {
    if state.b() != inst.b() {
        return Err(Error::DimensionMismatch(format!(
            "path state has {} sites, instance has {}",
            state.b(),
            inst.b()
        )));
    }
    let tau = state.tau();
    let mut e = 0.0;
    for l in 0..tau {
        for edge in inst.edges() {
            e -= b_weight
                * edge.coupling
                * f64::from(state.get(l, edge.i as usize) * state.get(l, edge.j as usize));
        }
        let next = (l + 1) % tau;
        for i in 0..inst.b() {
            e -= j_weight * f64::from(state.get(l, i) * state.get(next, i));
        }
    }
    Ok(e)
}

/// Energy change from flipping the single entry `(site, slice)`:
/// `2 s_il [ B(t) sum_j J_ij s_jl + J(t) (s_i,l-1 + s_i,l+1) ]`.
pub fn local_flip_delta(
    inst: &IsingInstance,
    state: &PathIntegralState,
    b_weight: f64,
    j_weight: f64,
    site: usize,
    slice: usize,
) -> f64 {
    let tau = state.tau();
    let up = (slice + 1) % tau;
    let down = (slice + tau - 1) % tau;
    let mut field = 0.0;
    for &(j, coupling) in inst.adjacency(site) {
        field += coupling * f64::from(state.get(slice, j as usize));
    }
    let time_term = f64::from(state.get(down, site) + state.get(up, site));
    2.0 * f64::from(state.get(slice, site)) * (b_weight * field + j_weight * time_term)
}

/// Energy change from flipping the whole replica column at `site`:
/// `2 B(t) sum_l s_il sum_j J_ij s_jl`. The imaginary-time bonds cancel
/// because every product in the column is preserved.
pub fn global_flip_delta(
    inst: &IsingInstance,
    state: &PathIntegralState,
    b_weight: f64,
    site: usize,
) -> f64 {
    let mut acc = 0.0;
    for l in 0..state.tau() {
        let mut field = 0.0;
        for &(j, coupling) in inst.adjacency(site) {
            field += coupling * f64::from(state.get(l, j as usize));
        }
        acc += f64::from(state.get(l, site)) * field;
    }
    2.0 * b_weight * acc
}

/// One local sweep at normalized time `t_k`: visit `(slice, site)` in
/// slice-major order and Metropolis-accept single-entry flips at effective
/// temperature `tau * T`.
pub fn local_sweep(
    inst: &IsingInstance,
    state: &mut PathIntegralState,
    sched: &SqaSchedule,
    t_k: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    check_time(t_k)?;
    let kernel = SqaKernel::new(inst, state.tau(), sched)?;
    kernel.local_sweep(state, t_k, rng);
    Ok(())
}

/// One global sweep at normalized time `t_k`: visit sites in order and
/// Metropolis-accept whole-column flips at effective temperature `tau * T`.
pub fn global_sweep(
    inst: &IsingInstance,
    state: &mut PathIntegralState,
    sched: &SqaSchedule,
    t_k: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    check_time(t_k)?;
    let kernel = SqaKernel::new(inst, state.tau(), sched)?;
    kernel.global_sweep(state, t_k, rng);
    Ok(())
}

fn check_time(t_k: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t_k) {
        return Err(Error::Domain(format!("t_k must lie in [0, 1], got {t_k}")));
    }
    Ok(())
}

/// Full simulated-quantum-annealing run. Random initialization of all
/// `tau * b` entries from `seed`; sweep `k` of `R` runs one local then one
/// global pass at `t_k = k / R`; the reported energy is the plain Ising
/// energy of the first Trotter slice after the last sweep. Instances with
/// nonzero fields are rejected: the path Hamiltonian carries no field term.
pub fn sqa_run(
    inst: &IsingInstance,
    sched: &SqaSchedule,
    tau: usize,
    sweeps: usize,
    seed: u64,
) -> Result<SaRunResult> {
    if sweeps == 0 {
        return Err(Error::Config("sweeps must be at least 1".into()));
    }
    if inst.has_fields() {
        return Err(Error::Config(
            "path-integral annealing is defined for field-free instances (h = 0)".into(),
        ));
    }
    sched.validate_for_annealing()?;
    let kernel = SqaKernel::new(inst, tau, sched)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PathIntegralState::random(tau, inst.b(), &mut rng)?;
    let mut best = f64::INFINITY;
    let total = sweeps as f64;
    for k in 1..=sweeps {
        let t_k = k as f64 / total;
        kernel.local_sweep(&mut state, t_k, &mut rng);
        kernel.global_sweep(&mut state, t_k, &mut rng);
        best = best.min(inst.energy_unchecked(&state.spins()[..inst.b()]));
    }
    let final_config = state.slice(0);
    let final_energy = inst.energy(&final_config)?;
    Ok(SaRunResult {
        final_config,
        final_energy,
        best_energy: best.min(final_energy),
        sweeps,
        seed,
    })
}

/// Shared sweep machinery. For unit (+-1) couplings the local field is a
/// small integer, so per-sweep acceptance probabilities are cached in a
/// table indexed by `(s*field, s*(s_down + s_up))`. The table stores the
/// probabilities as 53-bit integer thresholds: with `r` the raw `u64`
/// draw, `(r >> 11) < ceil(p * 2^53)` accepts exactly the same draws as
/// comparing `random::<f64>() < p`, so the cached path makes bit-identical
/// decisions to the plain `exp` path (a probability of 1 accepts every
/// draw because `r >> 11` never reaches `2^53`).
struct SqaKernel<'a> {
    inst: &'a IsingInstance,
    sched: &'a SqaSchedule,
    tau: usize,
    inv_eff_t: f64,
    unit: bool,
    // CSR adjacency; couplings quantized on the unit path.
    offsets: Vec<u32>,
    packed_adj: Vec<(u32, i32)>,
    max_field: usize,
}

/// Threshold such that `(draw >> 11) < threshold` accepts with probability
/// `min(1, p)` and reproduces the `f64` comparison bit for bit.
#[inline]
fn accept_threshold(p: f64) -> u64 {
    const SCALE: f64 = (1u64 << 53) as f64;
    (p * SCALE).min(SCALE).ceil() as u64
}

impl<'a> SqaKernel<'a> {
    fn new(inst: &'a IsingInstance, tau: usize, sched: &'a SqaSchedule) -> Result<Self> {
        if tau < 2 {
            return Err(Error::Config(format!("tau must be at least 2, got {tau}")));
        }
        if sched.temperature <= 0.0 {
            return Err(Error::Config("temperature must be positive".into()));
        }
        let unit = inst
            .edges()
            .iter()
            .all(|e| e.coupling == 1.0 || e.coupling == -1.0)
            && !inst.has_fields();
        let b = inst.b();
        let mut offsets = Vec::with_capacity(b + 1);
        let mut packed_adj = Vec::new();
        let mut max_deg = 0usize;
        offsets.push(0);
        for i in 0..b {
            let adj = inst.adjacency(i);
            max_deg = max_deg.max(adj.len());
            for &(j, c) in adj {
                packed_adj.push((j, c as i32));
            }
            offsets.push(packed_adj.len() as u32);
        }
        Ok(Self {
            inst,
            sched,
            tau,
            inv_eff_t: 1.0 / (tau as f64 * sched.temperature),
            unit,
            offsets,
            packed_adj,
            max_field: max_deg,
        })
    }

    fn local_sweep(&self, state: &mut PathIntegralState, t_k: f64, rng: &mut impl Rng) {
        let bt = self.sched.ising(t_k);
        let jt = self.sched.time_coupling(t_k, self.tau);
        if self.unit {
            self.local_sweep_unit(state, bt, jt, rng);
        } else {
            self.local_sweep_general(state, bt, jt, rng);
        }
    }

    fn local_sweep_general(
        &self,
        state: &mut PathIntegralState,
        bt: f64,
        jt: f64,
        rng: &mut impl Rng,
    ) {
        let (tau, b) = (state.tau, state.b);
        for l in 0..tau {
            let up = (l + 1) % tau;
            let down = (l + tau - 1) % tau;
            for i in 0..b {
                let mut field = 0.0;
                for &(j, c) in self.inst.adjacency(i) {
                    field += c * f64::from(state.spins[l * b + j as usize]);
                }
                let s = f64::from(state.spins[l * b + i]);
                let time_term = f64::from(state.spins[down * b + i] + state.spins[up * b + i]);
                let de = 2.0 * s * (bt * field + jt * time_term);
                let r: f64 = rng.random();
                if de <= 0.0 || r < (-de * self.inv_eff_t).exp() {
                    state.spins[l * b + i] = -state.spins[l * b + i];
                }
            }
        }
    }

    fn local_sweep_unit(
        &self,
        state: &mut PathIntegralState,
        bt: f64,
        jt: f64,
        rng: &mut impl Rng,
    ) {
        // accept[(a + w) * 3 + (c + 2) / 2] holds the threshold for
        // min(1, exp(-2 (bt a + jt c) / tau T)), where a = s * field in
        // [-w, w] and c = s * (s_down + s_up) in {-2, 0, 2}.
        let w = self.max_field as i32;
        let mut accept = vec![0u64; (2 * w as usize + 1) * 3];
        for a in -w..=w {
            for (ci, c) in [-2i32, 0, 2].iter().enumerate() {
                let de = 2.0 * (bt * f64::from(a) + jt * f64::from(*c));
                let p = if de <= 0.0 {
                    1.0
                } else {
                    (-de * self.inv_eff_t).exp()
                };
                accept[((a + w) as usize) * 3 + ci] = accept_threshold(p);
            }
        }
        let (tau, b) = (state.tau, state.b);
        let spins = &mut state.spins;
        debug_assert_eq!(spins.len(), tau * b);
        debug_assert!(self.packed_adj.iter().all(|&(j, _)| (j as usize) < b));
        for l in 0..tau {
            let up = (l + 1) % tau;
            let down = (l + tau - 1) % tau;
            let row = l * b;
            for i in 0..b {
                let start = self.offsets[i] as usize;
                let end = self.offsets[i + 1] as usize;
                // indices are validated at kernel construction
                unsafe {
                    let mut field = 0i32;
                    for k in start..end {
                        let (j, c) = *self.packed_adj.get_unchecked(k);
                        field += c * i32::from(*spins.get_unchecked(row + j as usize));
                    }
                    let s = i32::from(*spins.get_unchecked(row + i));
                    let c = s
                        * i32::from(
                            *spins.get_unchecked(down * b + i)
                                + *spins.get_unchecked(up * b + i),
                        );
                    let a = s * field;
                    let r = rng.next_u64() >> 11;
                    let take =
                        r < *accept.get_unchecked(((a + w) as usize) * 3 + ((c + 2) / 2) as usize);
                    let cell = spins.get_unchecked_mut(row + i);
                    *cell = if take { -*cell } else { *cell };
                }
            }
        }
    }

    fn global_sweep(&self, state: &mut PathIntegralState, t_k: f64, rng: &mut impl Rng) {
        let bt = self.sched.ising(t_k);
        let (tau, b) = (state.tau, state.b);
        for i in 0..b {
            let de = if self.unit {
                let start = self.offsets[i] as usize;
                let end = self.offsets[i + 1] as usize;
                let spins = &state.spins;
                debug_assert_eq!(spins.len(), tau * b);
                let mut acc = 0i32;
                // indices are validated at kernel construction
                unsafe {
                    for l in 0..tau {
                        let row = l * b;
                        let mut field = 0i32;
                        for k in start..end {
                            let (j, c) = *self.packed_adj.get_unchecked(k);
                            field += c * i32::from(*spins.get_unchecked(row + j as usize));
                        }
                        acc += i32::from(*spins.get_unchecked(row + i)) * field;
                    }
                }
                2.0 * bt * f64::from(acc)
            } else {
                global_flip_delta(self.inst, state, bt, i)
            };
            let r: f64 = rng.random();
            if de <= 0.0 || r < (-de * self.inv_eff_t).exp() {
                for l in 0..tau {
                    state.spins[l * b + i] = -state.spins[l * b + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::RngCore;

    fn ferro_pair() -> IsingInstance {
        IsingInstance::new(2, &[(0, 1, 1.0)], None, "pair").unwrap()
    }

    fn random_state(tau: usize, b: usize, seed: u64) -> PathIntegralState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PathIntegralState::random(tau, b, &mut rng).unwrap()
    }

    struct CountingRng {
        inner: ChaCha8Rng,
        u64_draws: usize,
    }

    impl RngCore for CountingRng {
        fn next_u32(&mut self) -> u32 {
            self.inner.next_u32()
        }
        fn next_u64(&mut self) -> u64 {
            self.u64_draws += 1;
            self.inner.next_u64()
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            self.inner.fill_bytes(dest)
        }
    }

    #[test]
    fn default_schedule_values() {
        let s = SqaSchedule::dw_default();
        assert_eq!(s.transverse(0.0), 2.88);
        assert!(s.transverse(0.6).abs() < 1e-14);
        assert_eq!(s.transverse(0.8), 0.0);
        assert_relative_eq!(s.ising(1.0), 5.4);
        assert_eq!(s.ising(0.0), 0.0);
        assert_eq!(s.temperature, 0.1);
        s.validate_for_annealing().unwrap();
    }

    #[test]
    fn schedule_validation() {
        assert!(SqaSchedule::constant(1.0, 0.0, 0.1)
            .validate_for_annealing()
            .is_err());
        SqaSchedule::linear(2.0, 6.0, 0.5)
            .validate_for_annealing()
            .unwrap();
        let mut bad = SqaSchedule::dw_default();
        bad.temperature = 0.0;
        assert!(bad.validate_for_annealing().is_err());
    }

    #[test]
    fn time_coupling_frozen_values() {
        // high-precision oracle evaluations of -(tau T / 2) ln tanh(A / tau T)
        let j = imaginary_time_coupling(2.88, 30, 0.1, DEFAULT_EPS_A);
        assert_relative_eq!(j, 0.443013269734057602, epsilon = 1e-13);
        // inverse relation: A = tau T atanh(e^{-1}) gives J = tau T / 2
        let tau_t = 3.0f64;
        let a = tau_t * (1.0f64 / std::f64::consts::E).atanh();
        assert_relative_eq!(
            imaginary_time_coupling(a, 30, 0.1, DEFAULT_EPS_A),
            tau_t / 2.0,
            epsilon = 1e-12
        );
        // clamp keeps J finite and large once A reaches zero
        let j0 = imaginary_time_coupling(0.0, 30, 0.1, DEFAULT_EPS_A);
        assert_relative_eq!(j0, 43.0944501068949868, epsilon = 1e-12);
        assert!(j0 >= 10.0);
        // monotone: J grows as A shrinks
        let mut last = imaginary_time_coupling(2.88, 30, 0.1, DEFAULT_EPS_A);
        for a in [2.0, 1.0, 0.5, 0.1, 0.01] {
            let j = imaginary_time_coupling(a, 30, 0.1, DEFAULT_EPS_A);
            assert!(j > last);
            last = j;
        }
    }

    #[test]
    fn local_delta_matches_direct_energy() {
        // isolated spin: only the time bonds move
        let single = IsingInstance::new(1, &[], None, "one").unwrap();
        let sched = SqaSchedule::dw_default();
        for seed in 0..20 {
            let state = random_state(5, 1, seed);
            let (bt, jt) = (sched.ising(0.4), sched.time_coupling(0.4, 5));
            let base = anisotropic_energy(&single, &state, bt, jt).unwrap();
            for l in 0..5 {
                let mut flipped = state.clone();
                flipped.flip(l, 0);
                let direct = anisotropic_energy(&single, &flipped, bt, jt).unwrap() - base;
                let delta = local_flip_delta(&single, &state, bt, jt, 0, l);
                assert_relative_eq!(delta, direct, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn deltas_match_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..30 {
            let b = 2 + (trial % 5);
            let mut edges = Vec::new();
            for i in 0..b {
                for j in (i + 1)..b {
                    if rng.random::<f64>() < 0.6 {
                        edges.push((i, j, rng.random_range(-1.5..1.5f64)));
                    }
                }
            }
            let inst = IsingInstance::new(b, &edges, None, "rnd").unwrap();
            let tau = 2 + (trial % 7);
            let state = random_state(tau, b, trial as u64);
            let (bt, jt) = (0.7, 0.9);
            let base = anisotropic_energy(&inst, &state, bt, jt).unwrap();
            for l in 0..tau {
                for i in 0..b {
                    let mut flipped = state.clone();
                    flipped.flip(l, i);
                    let direct = anisotropic_energy(&inst, &flipped, bt, jt).unwrap() - base;
                    assert_relative_eq!(
                        local_flip_delta(&inst, &state, bt, jt, i, l),
                        direct,
                        epsilon = 1e-10
                    );
                }
            }
            for i in 0..b {
                let mut flipped = state.clone();
                for l in 0..tau {
                    flipped.flip(l, i);
                }
                let direct = anisotropic_energy(&inst, &flipped, bt, jt).unwrap() - base;
                assert_relative_eq!(
                    global_flip_delta(&inst, &state, bt, i),
                    direct,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn aligned_flip_breaks_two_time_bonds() {
        // B = 0, all slices aligned: any single flip costs 4 J
        let inst = ferro_pair();
        let state = PathIntegralState::new(4, 2, vec![1; 8]).unwrap();
        let jt = 1.3;
        for l in 0..4 {
            for i in 0..2 {
                assert_relative_eq!(local_flip_delta(&inst, &state, 0.0, jt, i, l), 4.0 * jt);
            }
        }
    }

    #[test]
    fn global_delta_examples() {
        // isolated site: no coupler term, always dE = 0
        let single = IsingInstance::new(1, &[], None, "one").unwrap();
        let state = random_state(6, 1, 4);
        assert_eq!(global_flip_delta(&single, &state, 0.7, 0), 0.0);

        // aligned ferromagnetic pair: flipping one column costs 2 tau B J
        let inst = ferro_pair();
        let tau = 5;
        let aligned = PathIntegralState::new(tau, 2, vec![1; 2 * tau]).unwrap();
        let bt = 0.8;
        assert_relative_eq!(
            global_flip_delta(&inst, &aligned, bt, 0),
            2.0 * tau as f64 * bt * 1.0
        );
    }

    #[test]
    fn tau_two_is_legal_and_double_counts() {
        // with tau = 2 the periodic sum walks both directions of the single
        // bond pair, so an aligned column pair contributes 2 J per site
        let single = IsingInstance::new(1, &[], None, "one").unwrap();
        let state = PathIntegralState::new(2, 1, vec![1, 1]).unwrap();
        let e = anisotropic_energy(&single, &state, 0.0, 1.0).unwrap();
        assert_eq!(e, -2.0);
        let inst = ferro_pair();
        let sched = SqaSchedule::dw_default();
        sqa_run(&inst, &sched, 2, 10, 0).unwrap();
    }

    #[test]
    fn run_rejects_fields_and_bad_schedules() {
        let with_field = IsingInstance::new(2, &[(0, 1, 1.0)], Some(vec![0.5, 0.0]), "hf").unwrap();
        let sched = SqaSchedule::dw_default();
        assert!(matches!(
            sqa_run(&with_field, &sched, 4, 10, 0),
            Err(Error::Config(_))
        ));
        let frozen = SqaSchedule::constant(1.0, 1.0, 0.1);
        assert!(sqa_run(&ferro_pair(), &frozen, 4, 10, 0).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let inst = ferro_pair();
        let sched = SqaSchedule::dw_default();
        let a = sqa_run(&inst, &sched, 6, 200, 5).unwrap();
        let b = sqa_run(&inst, &sched, 6, 200, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_kernel_matches_general_kernel() {
        // +-1 couplings take the table path; forcing the general path by a
        // non-unit coupling scale of 1.0 epsilon away would change physics,
        // so instead replay the table decisions against the plain sweep fns.
        let inst = IsingInstance::new(
            4,
            &[(0, 1, 1.0), (1, 2, -1.0), (2, 3, 1.0), (0, 3, -1.0)],
            None,
            "ring",
        )
        .unwrap();
        let sched = SqaSchedule::dw_default();
        let tau = 5;
        let mut fast = random_state(tau, 4, 8);
        let mut slow = fast.clone();
        let kernel = SqaKernel::new(&inst, tau, &sched).unwrap();
        assert!(kernel.unit);
        let mut rng_fast = ChaCha8Rng::seed_from_u64(77);
        let mut rng_slow = ChaCha8Rng::seed_from_u64(77);
        for k in 1..=50 {
            let t_k = k as f64 / 50.0;
            kernel.local_sweep(&mut fast, t_k, &mut rng_fast);
            kernel.global_sweep(&mut fast, t_k, &mut rng_fast);
            let (bt, jt) = (sched.ising(t_k), sched.time_coupling(t_k, tau));
            kernel.local_sweep_general(&mut slow, bt, jt, &mut rng_slow);
            // general global path
            for i in 0..4 {
                let de = global_flip_delta(&inst, &slow, bt, i);
                let r: f64 = rng_slow.random();
                if de <= 0.0 || r < (-de * kernel.inv_eff_t).exp() {
                    for l in 0..tau {
                        slow.flip(l, i);
                    }
                }
            }
            assert_eq!(fast, slow, "diverged at sweep {k}");
        }
    }

    #[test]
    fn draw_counts_per_sweep() {
        let inst = ferro_pair();
        let sched = SqaSchedule::dw_default();
        let mut state = random_state(4, 2, 3);
        let mut rng = CountingRng {
            inner: ChaCha8Rng::seed_from_u64(11),
            u64_draws: 0,
        };
        local_sweep(&inst, &mut state, &sched, 0.5, &mut rng).unwrap();
        assert_eq!(rng.u64_draws, 4 * 2);
        rng.u64_draws = 0;
        global_sweep(&inst, &mut state, &sched, 0.5, &mut rng).unwrap();
        assert_eq!(rng.u64_draws, 2);
    }

    #[test]
    fn finds_chain_ground_state_majority() {
        let edges: Vec<_> = (0..3).map(|i| (i, i + 1, 1.0)).collect();
        let inst = IsingInstance::new(4, &edges, None, "chain").unwrap();
        let sched = SqaSchedule::dw_default();
        let mut hits = 0;
        let runs = 200;
        for seed in 0..runs {
            let r = sqa_run(&inst, &sched, 8, 10_000, seed).unwrap();
            if r.final_energy == -3.0 {
                hits += 1;
            }
        }
        assert!(hits * 2 > runs, "only {hits}/{runs} runs reached -3");
    }
}
