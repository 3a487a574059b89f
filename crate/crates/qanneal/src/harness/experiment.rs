//! The experiment driver: resolve ground truths, dispatch seeded runs
//! across a worker pool, and aggregate order-independently so reports are
//! byte-identical at any worker count.

use super::{histogram, GroundTruth, Histogram, Method};
use crate::error::{Error, Result};
use crate::ising::IsingInstance;
use crate::quantum;
use crate::sa::{sa_ground_truth, sa_run, CoolingSchedule};
use crate::seeding;
use crate::sqa::{sqa_run, SqaSchedule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tolerance used to compare energies of non-integral instances; integral
/// instances compare exactly.
const REAL_ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub runs_per_instance: usize,
    /// Sweep count per run (SA and SQA).
    pub sweeps: usize,
    /// Trotter slices (SQA only).
    pub tau: usize,
    /// Annealing schedule (SQA and exact dynamics).
    pub schedule: SqaSchedule,
    /// Cooling schedule (SA only).
    pub cooling: CoolingSchedule,
    /// Total anneal time and integration steps (exact dynamics only).
    pub t_f: f64,
    pub steps: usize,
    pub master_seed: u64,
    pub ground_truth: GroundTruth,
    pub histogram_bins: usize,
}

impl ExperimentConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            runs_per_instance: 100,
            sweeps: 10_000,
            tau: 30,
            schedule: SqaSchedule::dw_default(),
            cooling: CoolingSchedule::inverse_log_k(crate::sa::DEFAULT_COOLING_SCALE),
            t_f: 10.0,
            steps: 4_000,
            master_seed: 0,
            ground_truth: GroundTruth::BruteForce,
            histogram_bins: 10,
        }
    }

    fn validate(&self, instances: &[IsingInstance]) -> Result<()> {
        if instances.is_empty() {
            return Err(Error::Config("no instances supplied".into()));
        }
        let b = instances[0].b();
        if instances.iter().any(|i| i.b() != b) {
            return Err(Error::Config(
                "mixed vertex counts in one batch; split experiments per b".into(),
            ));
        }
        if self.method != Method::ExactQa {
            if self.runs_per_instance == 0 {
                return Err(Error::Config("runs_per_instance must be at least 1".into()));
            }
            if self.sweeps == 0 {
                return Err(Error::Config("sweeps must be at least 1".into()));
            }
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram_bins must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance_id: String,
    pub b: usize,
    pub tau: usize,
    pub sweeps: usize,
    pub runs: usize,
    pub hits: usize,
    pub success_prob: f64,
    pub ground_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub instances: Vec<InstanceRecord>,
    pub histogram: Histogram,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    /// Fixed-order CSV: instance_id, method, b, tau, sweeps, runs, hits,
    /// success_prob, ground_energy. Float fields use shortest round-trip
    /// formatting, so equal runs produce byte-equal files.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("instance_id,method,b,tau,sweeps,runs,hits,success_prob,ground_energy\n");
        for r in &self.instances {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.instance_id,
                self.config.method.label(),
                r.b,
                r.tau,
                r.sweeps,
                r.runs,
                r.hits,
                r.success_prob,
                r.ground_energy
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialization failed: {e}")))
    }

    pub fn success_probs(&self) -> Vec<f64> {
        self.instances.iter().map(|r| r.success_prob).collect()
    }
}

fn energies_equal(a: f64, b: f64, integral: bool) -> bool {
    if integral {
        a == b
    } else {
        (a - b).abs() <= REAL_ENERGY_TOL
    }
}

fn resolve_ground(
    cfg: &ExperimentConfig,
    index: usize,
    inst: &IsingInstance,
) -> Result<f64> {
    match &cfg.ground_truth {
        GroundTruth::BruteForce => {
            let (e, _) = inst.brute_force_ground()?;
            Ok(e)
        }
        GroundTruth::SaProtocol { grid, repeats } => sa_ground_truth(
            inst,
            &cfg.cooling,
            grid,
            *repeats,
            seeding::ground_truth_seed(cfg.master_seed, index as u64),
        ),
        GroundTruth::Provided(map) => map.get(inst.id()).copied().ok_or_else(|| {
            Error::Config(format!("no provided ground energy for `{}`", inst.id()))
        }),
    }
}

/// Run the configured experiment over an instance batch. Work items are
/// `(instance, run)` pairs with seeds derived from the master seed, so the
/// outcome is independent of the worker pool's size and scheduling.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    instances: &[IsingInstance],
) -> Result<ExperimentReport> {
    let started = std::time::Instant::now();
    cfg.validate(instances)?;

    let grounds: Vec<f64> = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| resolve_ground(cfg, i, inst))
        .collect::<Result<_>>()?;

    let records: Vec<InstanceRecord> = match cfg.method {
        Method::ExactQa => instances
            .iter()
            .zip(&grounds)
            .map(|(inst, &ground)| {
                if inst.b() > quantum::EVOLVE_CAP {
                    return Err(Error::Capability {
                        what: "exact annealing dynamics",
                        requested: inst.b(),
                        limit: quantum::EVOLVE_CAP,
                    });
                }
                let psi = quantum::evolve::evolve(inst, &cfg.schedule, cfg.t_f, cfg.steps)?;
                let p = quantum::success_probability(inst, &psi)?;
                // analytic probability: runs and hits stay zero
                Ok(InstanceRecord {
                    instance_id: inst.id().to_string(),
                    b: inst.b(),
                    tau: 0,
                    sweeps: 0,
                    runs: 0,
                    hits: 0,
                    success_prob: p,
                    ground_energy: ground,
                })
            })
            .collect::<Result<_>>()?,
        Method::Sa | Method::Sqa => {
            let work: Vec<(usize, usize)> = (0..instances.len())
                .flat_map(|i| (0..cfg.runs_per_instance).map(move |r| (i, r)))
                .collect();
            let finals: Vec<f64> = work
                .par_iter()
                .map(|&(i, r)| {
                    let seed = seeding::run_seed(cfg.master_seed, i as u64, r as u64);
                    let result = match cfg.method {
                        Method::Sa => sa_run(&instances[i], &cfg.cooling, cfg.sweeps, seed),
                        Method::Sqa => {
                            sqa_run(&instances[i], &cfg.schedule, cfg.tau, cfg.sweeps, seed)
                        }
                        Method::ExactQa => unreachable!(),
                    };
                    result.map(|r| r.final_energy)
                })
                .collect::<Result<_>>()?;

            instances
                .iter()
                .enumerate()
                .map(|(i, inst)| {
                    let integral = inst.is_integral();
                    let ground = grounds[i];
                    let mine = &finals[i * cfg.runs_per_instance..(i + 1) * cfg.runs_per_instance];
                    if let Some(lower) = mine
                        .iter()
                        .find(|&&e| e < ground - REAL_ENERGY_TOL)
                    {
                        return Err(Error::Config(format!(
                            "run energy {lower} undercuts resolved ground {ground} for `{}`; \
                             strengthen the ground-truth protocol",
                            inst.id()
                        )));
                    }
                    let hits = mine
                        .iter()
                        .filter(|&&e| energies_equal(e, ground, integral))
                        .count();
                    Ok(InstanceRecord {
                        instance_id: inst.id().to_string(),
                        b: inst.b(),
                        tau: if cfg.method == Method::Sqa { cfg.tau } else { 0 },
                        sweeps: cfg.sweeps,
                        runs: cfg.runs_per_instance,
                        hits,
                        success_prob: hits as f64 / cfg.runs_per_instance as f64,
                        ground_energy: ground,
                    })
                })
                .collect::<Result<_>>()?
        }
    };

    let histogram = histogram(&records.iter().map(|r| r.success_prob).collect::<Vec<_>>(),
        cfg.histogram_bins)?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        instances: records,
        histogram,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Run the experiment inside a dedicated worker pool of the given size.
pub fn run_experiment_with_workers(
    cfg: &ExperimentConfig,
    instances: &[IsingInstance],
    workers: usize,
) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| run_experiment(cfg, instances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::ENUM_CAP;
    use crate::topology::{chimera_graph, random_instance, ChimeraSpec};

    fn tiny_batch(n: usize) -> Vec<IsingInstance> {
        let g = chimera_graph(&ChimeraSpec::new(1, 1, 2)).unwrap();
        (0..n)
            .map(|i| random_instance(g.b, &g.edges, i as u64).unwrap())
            .collect()
    }

    #[test]
    fn sa_experiment_counts_hits() {
        let instances = tiny_batch(4);
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 50;
        cfg.sweeps = 500;
        let report = run_experiment(&cfg, &instances).unwrap();
        assert_eq!(report.instances.len(), 4);
        for r in &report.instances {
            assert!(r.hits <= r.runs);
            assert_eq!(r.success_prob, r.hits as f64 / r.runs as f64);
            assert!(r.success_prob > 0.5, "4-site cell should mostly solve");
        }
        assert_eq!(
            report.histogram.counts.iter().sum::<u64>(),
            report.instances.len() as u64
        );
    }

    #[test]
    fn flat_landscape_always_succeeds() {
        let inst =
            IsingInstance::new(3, &[(0, 1, 0.0), (1, 2, 0.0)], None, "flat").unwrap();
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 20;
        cfg.sweeps = 10;
        let report = run_experiment(&cfg, &[inst.clone()]).unwrap();
        assert_eq!(report.instances[0].success_prob, 1.0);

        let mut cfg = ExperimentConfig::new(Method::Sqa);
        cfg.runs_per_instance = 20;
        cfg.sweeps = 10;
        cfg.tau = 4;
        let report = run_experiment(&cfg, &[inst]).unwrap();
        assert_eq!(report.instances[0].success_prob, 1.0);
    }

    #[test]
    fn ratio_is_exact() {
        // 3000 runs with about half hits: probability is hits / runs exactly
        let instances = tiny_batch(1);
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 100;
        cfg.sweeps = 3;
        cfg.cooling = CoolingSchedule::inverse_k(5.0);
        let report = run_experiment(&cfg, &instances).unwrap();
        let r = &report.instances[0];
        assert_eq!(r.success_prob, r.hits as f64 / 100.0);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let instances = tiny_batch(3);
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 40;
        cfg.sweeps = 200;
        let mut outputs = Vec::new();
        for workers in [1usize, 4, 16] {
            let report = run_experiment_with_workers(&cfg, &instances, workers).unwrap();
            outputs.push(report.to_csv());
        }
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[1], outputs[2]);
    }

    #[test]
    fn provided_and_missing_ground_truth() {
        let instances = tiny_batch(1);
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 5;
        cfg.sweeps = 100;
        let (e, _) = instances[0].brute_force_ground().unwrap();
        let mut map = std::collections::HashMap::new();
        map.insert(instances[0].id().to_string(), e);
        cfg.ground_truth = GroundTruth::Provided(map);
        run_experiment(&cfg, &instances).unwrap();

        cfg.ground_truth = GroundTruth::Provided(Default::default());
        assert!(matches!(
            run_experiment(&cfg, &instances),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn undercut_ground_truth_is_detected() {
        let instances = tiny_batch(1);
        let mut cfg = ExperimentConfig::new(Method::Sa);
        cfg.runs_per_instance = 50;
        cfg.sweeps = 2000;
        let mut map = std::collections::HashMap::new();
        // claim a ground energy that is too high: some run will beat it
        map.insert(instances[0].id().to_string(), 100.0);
        cfg.ground_truth = GroundTruth::Provided(map);
        assert!(matches!(
            run_experiment(&cfg, &instances),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mixed_b_rejected() {
        let mut instances = tiny_batch(1);
        instances.push(IsingInstance::new(2, &[(0, 1, 1.0)], None, "odd").unwrap());
        let cfg = ExperimentConfig::new(Method::Sa);
        assert!(matches!(
            run_experiment(&cfg, &instances),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn exact_qa_reports_analytic_probability() {
        let inst = IsingInstance::new(1, &[], Some(vec![1.0]), "one").unwrap();
        let mut cfg = ExperimentConfig::new(Method::ExactQa);
        cfg.t_f = 50.0;
        cfg.steps = 10_000;
        let report = run_experiment(&cfg, &[inst]).unwrap();
        let r = &report.instances[0];
        assert_eq!(r.runs, 0);
        assert_eq!(r.hits, 0);
        assert!(r.success_prob > 0.99);
        assert_eq!(r.ground_energy, -1.0);
    }

    #[test]
    fn csv_has_fixed_schema() {
        let instances = tiny_batch(1);
        let mut cfg = ExperimentConfig::new(Method::Sqa);
        cfg.runs_per_instance = 5;
        cfg.sweeps = 50;
        cfg.tau = 4;
        let report = run_experiment(&cfg, &instances).unwrap();
        let csv = report.to_csv();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "instance_id,method,b,tau,sweeps,runs,hits,success_prob,ground_energy"
        );
        let probs = super::super::success_probs_from_csv(&csv).unwrap();
        assert_eq!(probs, report.success_probs());
        let json = report.to_json().unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.instances, report.instances);
    }

    #[test]
    fn brute_force_cap_respected() {
        let inst = IsingInstance::new(ENUM_CAP + 1, &[(0, 1, 1.0)], None, "big").unwrap();
        let cfg = ExperimentConfig::new(Method::Sa);
        assert!(matches!(
            run_experiment(&cfg, &[inst]),
            Err(Error::Capability { .. })
        ));
    }
}
