//! Named verification checks at configurable scale, shared by the
//! `verify` CLI subcommand (fast/full levels) and the acceptance suite.
//! Every check reports its statistic, its threshold, and a pass flag;
//! failures are enumerated, never short-circuited.

use super::{run_experiment, ExperimentConfig, GroundTruth, Method};
use crate::error::Result;
use crate::ising::{IsingInstance, SpinConfiguration};
use crate::quantum::{self, bound::theorem2_bound};
use crate::sa::{self, sa_ground_truth, CoolingSchedule};
use crate::seeding;
use crate::sqa::{
    anisotropic_energy, global_flip_delta, global_sweep, local_flip_delta, local_sweep,
    sqa_run, PathIntegralState, SqaSchedule,
};
use crate::stats;
use crate::topology::{chimera_graph, random_instance, ChimeraSpec};
use crate::trotter::{self, GammaSchedule, TheoryParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, statistic: f64, threshold: f64, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            threshold,
            pass,
            detail,
        }
    }

    pub fn render(&self) -> String {
        format!(
            "{} {:<34} statistic {:>12.6} threshold {:>12.6}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyLevel {
    /// Desk-scale caps: `b <= 4`, `M <= 32`, reduced sampling.
    Fast,
    /// Acceptance-criteria sizes.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub level: VerifyLevel,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.render());
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {}/{} checks passed\n",
            if self.passed { "OK" } else { "FAILED" },
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len()
        ));
        out
    }
}

fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive df")
        .inverse_cdf(1.0 - alpha)
}

fn random_pm1_instance_with_fields(b: usize, seed: u64) -> IsingInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..b {
        for j in (i + 1)..b {
            if rng.random::<f64>() < 0.6 {
                let c = if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
                edges.push((i, j, c));
            }
        }
    }
    let h: Vec<f64> = (0..b).map(|_| rng.random_range(-1.0..1.0)).collect();
    IsingInstance::new(b, &edges, Some(h), format!("spec-{b}-{seed}")).unwrap()
}

/// Sorted spectrum of the quantum Ising operator equals the classical
/// energy multiset, and the Gibbs diagonal equals the Boltzmann law.
pub fn check_spectrum_equivalence(bs: &[usize], per_b: usize, seed: u64) -> CheckResult {
    let mut failures = 0usize;
    let mut total = 0usize;
    for &b in bs {
        for k in 0..per_b {
            let inst = random_pm1_instance_with_fields(b, seeding::mix(seed, &[b as u64, k as u64]));
            total += 1;
            match quantum::spectrum_equivalence_check(&inst) {
                Ok(true) => {}
                _ => failures += 1,
            }
        }
    }
    CheckResult::new(
        "spectrum-equivalence",
        failures as f64,
        0.0,
        failures == 0,
        format!("{total} random instances over b = {bs:?}, tolerance 1e-10"),
    )
}

/// Unique-ground-state instances used by the bound checks.
pub fn bound_test_instances() -> Vec<IsingInstance> {
    vec![
        IsingInstance::new(1, &[], Some(vec![1.0]), "bound-b1").unwrap(),
        IsingInstance::new(2, &[(0, 1, 1.0)], Some(vec![0.3, 0.2]), "bound-b2").unwrap(),
        IsingInstance::new(
            3,
            &[(0, 1, 1.0), (1, 2, 1.0)],
            Some(vec![0.2, 0.1, 0.3]),
            "bound-b3",
        )
        .unwrap(),
    ]
}

/// One bound evaluation per `(instance, t_f)` pair, for the structured
/// verify output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub instance: String,
    pub t_f: f64,
    pub report: crate::quantum::bound::BoundReport,
}

/// Evaluate the bound over the standard instances and anneal times.
pub fn bound_report_sweep(
    t_fs: &[f64],
    u_grid: usize,
) -> (Vec<BoundEntry>, Vec<String>) {
    let sched = SqaSchedule::dw_default();
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for inst in bound_test_instances() {
        for &t_f in t_fs {
            match theorem2_bound(&inst, &sched, t_f, u_grid) {
                Ok(report) => entries.push(BoundEntry {
                    instance: inst.id().to_string(),
                    t_f,
                    report,
                }),
                Err(e) => errors.push(format!("{}: {e}", inst.id())),
            }
        }
    }
    (entries, errors)
}

/// Success-probability lower bound: `true_success >= lower_bound` whenever
/// the bound is positive, plus the adiabatic trend in `t_f` (one inversion
/// up to 0.01 allowed).
pub fn check_bound_inequality(t_fs: &[f64], u_grid: usize) -> Vec<CheckResult> {
    let (entries, errors) = bound_report_sweep(t_fs, u_grid);
    let mut worst_margin = f64::INFINITY;
    let mut positive_cases = 0usize;
    let mut violations = 0usize;
    let mut inversions = 0usize;
    let mut by_instance: std::collections::BTreeMap<&str, Vec<&BoundEntry>> = Default::default();
    for e in &entries {
        by_instance.entry(e.instance.as_str()).or_default().push(e);
    }
    for group in by_instance.values() {
        let mut last = -1.0f64;
        for e in group.iter() {
            let r = &e.report;
            if r.lower_bound > 0.0 {
                positive_cases += 1;
                worst_margin = worst_margin.min(r.true_success - r.lower_bound);
                if r.true_success < r.lower_bound {
                    violations += 1;
                }
            }
            if r.true_success < last - 0.01 {
                inversions += 1;
            }
            last = r.true_success;
        }
    }
    let ineq_pass = violations == 0 && errors.is_empty() && positive_cases > 0;
    vec![
        CheckResult::new(
            "bound-inequality",
            if worst_margin.is_finite() { worst_margin } else { -1.0 },
            0.0,
            ineq_pass,
            format!(
                "{positive_cases} positive-bound cases, {violations} violations{}",
                if errors.is_empty() {
                    String::new()
                } else {
                    format!(", errors: {errors:?}")
                }
            ),
        ),
        CheckResult::new(
            "bound-adiabatic-trend",
            inversions as f64,
            0.0,
            inversions == 0 && errors.is_empty(),
            format!("success non-decreasing over t_f = {t_fs:?} (0.01 slack)"),
        ),
    ]
}

/// Single-flip and path-move energy deltas against direct re-evaluation.
pub fn check_delta_oracles(pairs: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let sched = SqaSchedule::dw_default();
    for trial in 0..pairs {
        let b = 2 + trial % 5; // up to 6 sites
        let tau = 2 + trial % 7; // up to 8 slices
        let mut edges = Vec::new();
        for i in 0..b {
            for j in (i + 1)..b {
                if rng.random::<f64>() < 0.6 {
                    edges.push((i, j, rng.random_range(-1.5..1.5f64)));
                }
            }
        }
        let with_fields: Vec<f64> = (0..b).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sa_inst =
            IsingInstance::new(b, &edges, Some(with_fields), "delta-sa").unwrap();
        let cfg = sa::random_configuration(b, &mut rng);
        let site = rng.random_range(0..b);
        let direct = sa_inst.energy(&cfg.flipped(site)).unwrap() - sa_inst.energy(&cfg).unwrap();
        let delta = sa_inst.delta_energy_flip(&cfg, site).unwrap();
        worst = worst.max((delta - direct).abs());

        let path_inst = IsingInstance::new(b, &edges, None, "delta-sqa").unwrap();
        let state = PathIntegralState::random(tau, b, &mut rng).unwrap();
        let t_k: f64 = rng.random();
        let (bt, jt) = (sched.ising(t_k), sched.time_coupling(t_k, tau));
        let base = anisotropic_energy(&path_inst, &state, bt, jt).unwrap();
        let slice = rng.random_range(0..tau);
        let mut flipped = state.clone();
        flipped.flip(slice, site);
        let direct = anisotropic_energy(&path_inst, &flipped, bt, jt).unwrap() - base;
        worst = worst.max((local_flip_delta(&path_inst, &state, bt, jt, site, slice) - direct).abs());

        let mut column = state.clone();
        for l in 0..tau {
            column.flip(l, site);
        }
        let direct = anisotropic_energy(&path_inst, &column, bt, jt).unwrap() - base;
        worst = worst.max((global_flip_delta(&path_inst, &state, bt, site) - direct).abs());
    }
    CheckResult::new(
        "delta-oracle-equivalence",
        worst,
        1e-10,
        worst <= 1e-10,
        format!("{pairs} randomized (state, move) pairs, b <= 6, tau <= 8"),
    )
}

/// Fixed-temperature single-flip chain against the exact Boltzmann law.
pub fn check_sa_detailed_balance(samples: usize, seed: u64) -> CheckResult {
    let inst = IsingInstance::new(2, &[(0, 1, 1.0)], None, "db-sa").unwrap();
    let beta = 1.0;
    let target: Vec<f64> = (0..4)
        .map(|i| {
            inst.boltzmann_probability(&SpinConfiguration::from_index(i, 2), beta)
                .unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = sa::random_configuration(2, &mut rng);
    for _ in 0..1_000 {
        sa::sa_sweep(&inst, &mut config, 1.0 / beta, &mut rng).unwrap();
    }
    let mut counts = [0u64; 4];
    for _ in 0..samples {
        for _ in 0..3 {
            sa::sa_sweep(&inst, &mut config, 1.0 / beta, &mut rng).unwrap();
        }
        counts[config.to_index()] += 1;
    }
    let (stat, df) = stats::chi_square_statistic(&counts, &target).unwrap();
    let critical = chi2_critical(df, 0.01);
    CheckResult::new(
        "sa-detailed-balance",
        stat,
        critical,
        stat <= critical,
        format!("chi-square df {df} over {samples} thinned samples at T = 1"),
    )
}

/// Frozen-schedule path chain (local + global sweeps) against the
/// Boltzmann law of the anisotropic path Hamiltonian at `tau * T`.
pub fn check_sqa_detailed_balance(samples: usize, seed: u64) -> CheckResult {
    let inst = IsingInstance::new(2, &[(0, 1, 1.0)], None, "db-sqa").unwrap();
    let tau = 3usize;
    let sched = SqaSchedule::constant(1.0, 1.0, 1.0);
    let t_frozen = 0.5;
    let (bt, jt) = (sched.ising(t_frozen), sched.time_coupling(t_frozen, tau));
    let eff_t = tau as f64 * sched.temperature;

    let dim = 1usize << (tau * 2);
    let mut weights = Vec::with_capacity(dim);
    for idx in 0..dim {
        let state = trotter::path_state_from_index(idx, tau, 2);
        let e = anisotropic_energy(&inst, &state, bt, jt).unwrap();
        weights.push(-e / eff_t);
    }
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = weights.iter().map(|w| (w - max).exp()).sum();
    let target: Vec<f64> = weights.iter().map(|w| (w - max).exp() / z).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PathIntegralState::random(tau, 2, &mut rng).unwrap();
    for _ in 0..2_000 {
        local_sweep(&inst, &mut state, &sched, t_frozen, &mut rng).unwrap();
        global_sweep(&inst, &mut state, &sched, t_frozen, &mut rng).unwrap();
    }
    let mut counts = vec![0u64; dim];
    for _ in 0..samples {
        for _ in 0..2 {
            local_sweep(&inst, &mut state, &sched, t_frozen, &mut rng).unwrap();
            global_sweep(&inst, &mut state, &sched, t_frozen, &mut rng).unwrap();
        }
        counts[trotter::path_state_to_index(&state)] += 1;
    }
    let (stat, df) = stats::chi_square_statistic(&counts, &target).unwrap();
    let critical = chi2_critical(df, 0.01);
    CheckResult::new(
        "sqa-detailed-balance",
        stat,
        critical,
        stat <= critical,
        format!("chi-square df {df}, b = 2, tau = 3, frozen schedule, {samples} samples"),
    )
}

/// Frozen-`t` theory chain against the exact sliced target.
pub fn check_theory_chain_stationarity(samples: usize, seed: u64) -> CheckResult {
    let inst = IsingInstance::new(2, &[(0, 1, 1.0)], None, "db-q").unwrap();
    let params = TheoryParams::new(1.0, 3, GammaSchedule::Constant(2.0)).unwrap();
    let t = 3.0;
    let target = trotter::exact_q_t(&params, &inst, t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = trotter::McmcChain::new(&params, &inst, &mut rng).unwrap();
    for _ in 0..5_000 {
        chain.step_frozen(t, &mut rng).unwrap();
    }
    let mut counts = vec![0u64; target.len()];
    for _ in 0..samples {
        for _ in 0..12 {
            chain.step_frozen(t, &mut rng).unwrap();
        }
        counts[trotter::path_state_to_index(chain.state())] += 1;
    }
    let (stat, df) = stats::chi_square_statistic(&counts, &target).unwrap();
    let critical = chi2_critical(df, 0.01);
    CheckResult::new(
        "theory-chain-stationarity",
        stat,
        critical,
        stat <= critical,
        format!("chi-square df {df}, b = 2, M = 3, frozen t, {samples} samples"),
    )
}

/// Trotter partition error: quadratic decay of the prefactored
/// transfer-matrix value against the exact trace.
pub fn check_lemma2_slope(ms: &[usize]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for b in [1usize, 2] {
        let inst = if b == 1 {
            IsingInstance::new(1, &[], None, "site").unwrap()
        } else {
            IsingInstance::new(2, &[(0, 1, 1.0)], None, "edge").unwrap()
        };
        match trotter::transfer::error_slope(&inst, 1.0, 1.0, ms) {
            Ok((errors, slope)) => match slope {
                Some(s) => out.push(CheckResult::new(
                    &format!("trotter-error-slope-b{b}"),
                    s,
                    -1.8,
                    s <= -1.8,
                    format!("errors {errors:?} over M = {ms:?}"),
                )),
                None => out.push(CheckResult::new(
                    &format!("trotter-error-slope-b{b}"),
                    f64::NEG_INFINITY,
                    -1.8,
                    true,
                    "identity exact to machine precision (no noncommuting pair)".into(),
                )),
            },
            Err(e) => out.push(CheckResult::new(
                &format!("trotter-error-slope-b{b}"),
                f64::NAN,
                -1.8,
                false,
                format!("error: {e}"),
            )),
        }
    }
    out
}

/// Slice-sum normality: KS distance shrinks with M, passes the 0.01 KS
/// test at the largest M, and the sample variance matches the limit law.
/// The 0.01-level KS assertion is pinned to the full-scale slice counts;
/// with `assert_ks_level` off (the fast tier, M capped at 32) the distance
/// is reported without being judged.
pub fn check_clt(
    ms: &[usize],
    n_samples: usize,
    seed: u64,
    assert_ks_level: bool,
) -> Vec<CheckResult> {
    let inst = IsingInstance::new(2, &[(0, 1, 1.0)], None, "clt").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match trotter::clt_convergence_test(&inst, 1.0, ms, n_samples, &mut rng) {
        Ok(report) => {
            let last = report.per_m.last().copied().unwrap_or((0, f64::NAN));
            let mut out = vec![CheckResult::new(
                "clt-ks-decreasing",
                report.per_m.first().map(|f| f.1).unwrap_or(f64::NAN) - last.1,
                0.0,
                report.decreasing,
                format!("KS per M: {:?}", report.per_m),
            )];
            if assert_ks_level {
                out.push(CheckResult::new(
                    "clt-ks-at-largest-m",
                    last.1,
                    report.ks_critical,
                    report.passes_ks_at_largest,
                    format!(
                        "KS({}) vs 0.01-level critical for n = {}",
                        last.0, report.n_samples
                    ),
                ));
            } else {
                out.push(CheckResult::new(
                    "clt-ks-at-largest-m",
                    last.1,
                    f64::INFINITY,
                    true,
                    format!(
                        "informational at reduced M = {}: distance {:.4} (0.01-level critical {:.4} applies to the full tier)",
                        last.0, last.1, report.ks_critical
                    ),
                ));
            }
            out.push(CheckResult::new(
                "clt-variance",
                report.variance_at_largest,
                1.03,
                (0.97..=1.03).contains(&report.variance_at_largest),
                format!(
                    "sample variance at M = {} (want [0.97, 1.03]); mean {:.5}",
                    last.0, report.mean_at_largest
                ),
            ));
            out
        }
        Err(e) => vec![CheckResult::new(
            "clt-ks-decreasing",
            f64::NAN,
            0.0,
            false,
            format!("error: {e}"),
        )],
    }
}

/// Mean ground-state hit rate of SA on small complete-bipartite cells.
pub fn check_sa_solve_quality(
    instances: usize,
    runs: usize,
    sweeps: usize,
    seed: u64,
) -> CheckResult {
    let g = chimera_graph(&ChimeraSpec::new(1, 1, 8)).unwrap();
    let batch: Vec<IsingInstance> = (0..instances)
        .map(|i| random_instance(g.b, &g.edges, seeding::instance_seed(seed, i as u64)).unwrap())
        .collect();
    let mut cfg = ExperimentConfig::new(Method::Sa);
    cfg.runs_per_instance = runs;
    cfg.sweeps = sweeps;
    cfg.cooling = CoolingSchedule::inverse_log_k(sa::DEFAULT_COOLING_SCALE);
    cfg.master_seed = seed;
    cfg.ground_truth = GroundTruth::BruteForce;
    match run_experiment(&cfg, &batch) {
        Ok(report) => {
            let mean = stats::mean(&report.success_probs());
            CheckResult::new(
                "sa-solve-quality",
                mean,
                0.95,
                mean >= 0.95,
                format!(
                    "b = {} cells, {} instances x {} runs x {} sweeps",
                    g.b, instances, runs, sweeps
                ),
            )
        }
        Err(e) => CheckResult::new("sa-solve-quality", f64::NAN, 0.95, false, format!("error: {e}")),
    }
}

/// Scale parameters of the path-annealer trend check.
#[derive(Debug, Clone)]
pub struct TrendScale {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
    pub instances: usize,
    pub runs: usize,
    pub sweeps: (usize, usize),
    pub taus: (usize, usize),
    pub temperature: f64,
    pub gt_grid: Vec<usize>,
    pub gt_repeats: usize,
    pub sa_flag_runs: usize,
    pub master_seed: u64,
    pub verbose: bool,
}

impl TrendScale {
    /// The full-scale configuration: 72-site grid, 50 instances, 500 runs.
    pub fn full() -> Self {
        Self {
            rows: 3,
            cols: 3,
            shore: 4,
            instances: 50,
            runs: 500,
            sweeps: (10_000, 20_000),
            taus: (30, 60),
            temperature: 0.1,
            gt_grid: vec![30_000, 100_000, 300_000],
            gt_repeats: 12,
            sa_flag_runs: 100,
            master_seed: 0x5157_4131,
            verbose: false,
        }
    }

    /// A minutes-scale smoke configuration (single cell).
    pub fn smoke() -> Self {
        Self {
            rows: 1,
            cols: 2,
            shore: 4,
            instances: 12,
            runs: 60,
            sweeps: (1_000, 2_000),
            taus: (6, 12),
            temperature: 0.1,
            gt_grid: vec![5_000],
            gt_repeats: 6,
            sa_flag_runs: 30,
            master_seed: 0x5157_4131,
            verbose: false,
        }
    }
}

/// Mean-success trends of the path annealer: non-decreasing in sweeps,
/// non-increasing in slice count (paired one-sided sign tests), plus the
/// informational SA-versus-SQA mean comparison (flagged, never failed).
pub fn check_sqa_trends(scale: &TrendScale) -> Vec<CheckResult> {
    let run = || -> Result<Vec<CheckResult>> {
        let g = chimera_graph(&ChimeraSpec::new(scale.rows, scale.cols, scale.shore))?;
        let batch: Vec<IsingInstance> = (0..scale.instances)
            .map(|i| {
                random_instance(
                    g.b,
                    &g.edges,
                    seeding::instance_seed(scale.master_seed, i as u64),
                )
            })
            .collect::<Result<_>>()?;

        // resolve ground truths once and share them across configurations
        let cooling = CoolingSchedule::inverse_log_k(sa::DEFAULT_COOLING_SCALE);
        let mut provided = std::collections::HashMap::new();
        for (i, inst) in batch.iter().enumerate() {
            let e = sa_ground_truth(
                inst,
                &cooling,
                &scale.gt_grid,
                scale.gt_repeats,
                seeding::ground_truth_seed(scale.master_seed, i as u64),
            )?;
            provided.insert(inst.id().to_string(), e);
            if scale.verbose {
                eprintln!("[trend] ground truth {}/{}: {e}", i + 1, batch.len());
            }
        }

        let mut sched = SqaSchedule::dw_default();
        sched.temperature = scale.temperature;
        let run_cfg = |sweeps: usize, tau: usize, salt: u64| -> Result<Vec<f64>> {
            let mut cfg = ExperimentConfig::new(Method::Sqa);
            cfg.runs_per_instance = scale.runs;
            cfg.sweeps = sweeps;
            cfg.tau = tau;
            cfg.schedule = sched.clone();
            cfg.master_seed = seeding::mix(scale.master_seed, &[salt]);
            cfg.ground_truth = GroundTruth::Provided(provided.clone());
            let report = run_experiment(&cfg, &batch)?;
            if scale.verbose {
                eprintln!(
                    "[trend] sqa sweeps={sweeps} tau={tau}: mean success {:.4}",
                    stats::mean(&report.success_probs())
                );
            }
            Ok(report.success_probs())
        };

        let (sw_lo, sw_hi) = scale.sweeps;
        let (tau_lo, tau_hi) = scale.taus;
        let p_base = run_cfg(sw_lo, tau_lo, 1)?;
        let p_more_sweeps = run_cfg(sw_hi, tau_lo, 2)?;
        let p_more_slices = run_cfg(sw_lo, tau_hi, 3)?;

        let signed = |hi: &[f64], lo: &[f64]| {
            let mut pos = 0u64;
            let mut neg = 0u64;
            for (a, b) in hi.iter().zip(lo) {
                if a > b {
                    pos += 1;
                } else if a < b {
                    neg += 1;
                }
            }
            (pos, neg, stats::sign_test_pvalue(pos, neg))
        };
        let (sp, sn, sweep_p) = signed(&p_more_sweeps, &p_base);
        let (tp, tn, tau_p) = signed(&p_base, &p_more_slices);

        // informational: SA at matched sweeps against the SQA means
        let mut sa_cfg = ExperimentConfig::new(Method::Sa);
        sa_cfg.runs_per_instance = scale.sa_flag_runs;
        sa_cfg.sweeps = sw_lo;
        sa_cfg.cooling = cooling.clone();
        sa_cfg.master_seed = seeding::mix(scale.master_seed, &[4]);
        sa_cfg.ground_truth = GroundTruth::Provided(provided.clone());
        let sa_mean = stats::mean(&run_experiment(&sa_cfg, &batch)?.success_probs());
        let sqa_mean = stats::mean(&p_base);
        if scale.verbose {
            eprintln!("[trend] sa mean {sa_mean:.4} vs sqa mean {sqa_mean:.4}");
        }

        Ok(vec![
            CheckResult::new(
                "sqa-trend-sweeps",
                sweep_p,
                0.05,
                sweep_p < 0.05,
                format!(
                    "success({sw_hi}) >= success({sw_lo}) at tau = {tau_lo}: {sp} up, {sn} down over {} instances",
                    scale.instances
                ),
            ),
            CheckResult::new(
                "sqa-trend-slices",
                tau_p,
                0.05,
                tau_p < 0.05,
                format!(
                    "success(tau {tau_lo}) >= success(tau {tau_hi}) at {sw_lo} sweeps: {tp} up, {tn} down"
                ),
            ),
            CheckResult::new(
                "sa-vs-sqa-ordering",
                sa_mean - sqa_mean,
                0.0,
                true,
                format!(
                    "informational flag: SA mean {sa_mean:.4} vs SQA mean {sqa_mean:.4}{}",
                    if sa_mean >= sqa_mean { "" } else { " (reversed)" }
                ),
            ),
        ])
    };
    run().unwrap_or_else(|e| {
        vec![CheckResult::new(
            "sqa-trend-sweeps",
            f64::NAN,
            0.05,
            false,
            format!("error: {e}"),
        )]
    })
}

/// Byte-identical reports across worker-pool sizes.
pub fn check_determinism(worker_counts: &[usize], seed: u64) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let g = chimera_graph(&ChimeraSpec::new(1, 2, 4))?;
        let batch: Vec<IsingInstance> = (0..6)
            .map(|i| random_instance(g.b, &g.edges, seeding::instance_seed(seed, i)))
            .collect::<Result<_>>()?;
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 60;
        cfg.sweeps = 400;
        cfg.master_seed = seed;
        let mut outputs = Vec::new();
        for &w in worker_counts {
            let report = super::experiment::run_experiment_with_workers(&cfg, &batch, w)?;
            outputs.push(report.to_csv());
        }
        let identical = outputs.windows(2).all(|w| w[0] == w[1]);
        Ok((identical, format!("worker counts {worker_counts:?}")))
    };
    match run() {
        Ok((identical, detail)) => CheckResult::new(
            "determinism-across-workers",
            if identical { 0.0 } else { 1.0 },
            0.0,
            identical,
            detail,
        ),
        Err(e) => CheckResult::new(
            "determinism-across-workers",
            f64::NAN,
            0.0,
            false,
            format!("error: {e}"),
        ),
    }
}

/// Fast path annealer sanity at frozen desk scale: a 4-site chain solved
/// by the path annealer most of the time.
pub fn check_sqa_small_solve(seed: u64) -> CheckResult {
    let edges: Vec<_> = (0..3).map(|i| (i, i + 1, 1.0)).collect();
    let inst = IsingInstance::new(4, &edges, None, "chain4").unwrap();
    let sched = SqaSchedule::dw_default();
    let runs = 200;
    let mut hits = 0;
    for r in 0..runs {
        let result = sqa_run(&inst, &sched, 8, 5_000, seeding::mix(seed, &[r])).unwrap();
        if result.final_energy == -3.0 {
            hits += 1;
        }
    }
    let rate = hits as f64 / runs as f64;
    CheckResult::new(
        "sqa-small-solve",
        rate,
        0.5,
        rate > 0.5,
        format!("4-site chain, tau = 8, 5000 sweeps, {runs} runs"),
    )
}

/// Run the named suites. `Fast` caps sizes at `b <= 4`, `M <= 32` and
/// reduced sampling; `Full` uses the acceptance-criteria sizes.
pub fn verify_all(level: VerifyLevel, seed: u64) -> VerificationReport {
    let mut checks = Vec::new();
    match level {
        VerifyLevel::Fast => {
            checks.push(check_spectrum_equivalence(&[2, 3, 4], 10, seed));
            checks.extend(check_bound_inequality(&[1.0, 10.0, 100.0], 32));
            checks.push(check_delta_oracles(200, seed));
            checks.push(check_sa_detailed_balance(100_000, seed));
            checks.push(check_sqa_detailed_balance(100_000, seed));
            checks.push(check_theory_chain_stationarity(100_000, seed));
            checks.extend(check_lemma2_slope(&[4, 8, 16, 32]));
            checks.extend(check_clt(&[8, 32], 20_000, seed, false));
            checks.push(check_sqa_small_solve(seed));
            checks.push(check_determinism(&[1, 4], seed));
        }
        VerifyLevel::Full => {
            checks.push(check_spectrum_equivalence(&[2, 3, 4, 5, 6, 7, 8], 100, seed));
            checks.extend(check_bound_inequality(&[1.0, 10.0, 100.0], 256));
            checks.push(check_delta_oracles(1_000, seed));
            checks.push(check_sa_detailed_balance(1_000_000, seed));
            checks.push(check_sqa_detailed_balance(1_000_000, seed));
            checks.push(check_theory_chain_stationarity(1_000_000, seed));
            checks.extend(check_lemma2_slope(&[4, 8, 16, 32]));
            checks.extend(check_clt(&[8, 64, 256], 100_000, seed, true));
            checks.push(check_sa_solve_quality(20, 1_000, 10_000, seed));
            checks.extend(check_sqa_trends(&TrendScale::full()));
            checks.push(check_determinism(&[1, 4, 16], seed));
        }
    }
    let passed = checks.iter().all(|c| c.pass);
    VerificationReport {
        level,
        checks,
        passed,
    }
}
