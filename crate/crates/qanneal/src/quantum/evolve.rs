//! Norm-preserving Schrodinger propagation under the annealing
//! Hamiltonian `H(t) = A(t/t_f) H_X + B(t/t_f) H_I`.
//!
//! Each step applies the exact unitary `exp(-i H_mid dt)` of the midpoint
//! Hamiltonian, built by eigendecomposition, so the norm is conserved to
//! rounding; the step count controls only the time-ordering error.

use super::{
    build_quantum_ising, build_transverse, check_cap, eig_hermitian, uniform_superposition,
    DenseHamiltonian, EVOLVE_CAP,
};
use crate::error::{Error, Result};
use crate::ising::IsingInstance;
use crate::sqa::SqaSchedule;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

const NORM_DRIFT_TOL: f64 = 1e-9;

/// Evolve `|v_+>` from `t = 0` to `t = t_f` and return the final state.
pub fn evolve(
    inst: &IsingInstance,
    sched: &SqaSchedule,
    t_f: f64,
    steps: usize,
) -> Result<DVector<Complex64>> {
    let traj = evolve_recorded(inst, sched, t_f, steps, steps)?;
    Ok(traj.into_iter().next_back().expect("at least one state"))
}

/// Evolve and record the state at `steps / record_every + 1` evenly spaced
/// times (including both endpoints). `record_every` must divide `steps`.
pub fn evolve_recorded(
    inst: &IsingInstance,
    sched: &SqaSchedule,
    t_f: f64,
    steps: usize,
    record_every: usize,
) -> Result<Vec<DVector<Complex64>>> {
    check_cap(inst.b(), EVOLVE_CAP, "Schrodinger propagation")?;
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if t_f <= 0.0 || !t_f.is_finite() {
        return Err(Error::Domain(format!("t_f must be positive, got {t_f}")));
    }
    if record_every == 0 || steps % record_every != 0 {
        return Err(Error::Config(format!(
            "record_every = {record_every} must divide steps = {steps}"
        )));
    }
    let hx = build_transverse(inst.b())?;
    let hi = build_quantum_ising(inst)?;
    let dim = hx.dim();
    let dt = t_f / steps as f64;

    let mut psi = uniform_superposition(inst.b());
    let mut recorded = Vec::with_capacity(steps / record_every + 1);
    recorded.push(psi.clone());
    let mut ham = DMatrix::<Complex64>::zeros(dim, dim);
    for step in 0..steps {
        let u_mid = (step as f64 + 0.5) * dt / t_f;
        ham.copy_from(hx.matrix());
        ham *= Complex64::new(sched.transverse(u_mid), 0.0);
        ham += hi.matrix() * Complex64::new(sched.ising(u_mid), 0.0);
        let (values, vectors) = eig_hermitian(&ham);
        // psi <- V exp(-i E dt) V^dagger psi
        let mut coeffs = vectors.adjoint() * &psi;
        for k in 0..dim {
            coeffs[k] *= Complex64::new(0.0, -values[k] * dt).exp();
        }
        psi = &vectors * coeffs;

        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::Convergence(format!(
                "norm drifted to {norm} at step {step}"
            )));
        }
        psi /= Complex64::new(norm, 0.0);
        if (step + 1) % record_every == 0 {
            recorded.push(psi.clone());
        }
    }
    Ok(recorded)
}

/// Instantaneous Hamiltonian on normalized time, shared with the bound
/// computation.
pub(crate) fn hamiltonian_at(
    hx: &DenseHamiltonian,
    hi: &DenseHamiltonian,
    sched: &SqaSchedule,
    u: f64,
) -> DMatrix<Complex64> {
    hx.matrix() * Complex64::new(sched.transverse(u), 0.0)
        + hi.matrix() * Complex64::new(sched.ising(u), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stationary_in_constant_transverse_field() {
        // H = -sum sigma^x: |v_+> is an eigenstate, so only a global phase
        // accumulates
        let inst = IsingInstance::new(2, &[(0, 1, 1.0)], None, "pair").unwrap();
        let sched = SqaSchedule::constant(1.0, 0.0, 0.1);
        for t_f in [1.0, 7.3] {
            let psi = evolve(&inst, &sched, t_f, 400).unwrap();
            let overlap = uniform_superposition(2).dotc(&psi).norm();
            assert!((overlap - 1.0).abs() < 1e-8, "overlap {overlap}");
        }
    }

    #[test]
    fn slow_anneal_reaches_ground_state() {
        let inst = IsingInstance::new(1, &[], Some(vec![1.0]), "one").unwrap();
        let sched = SqaSchedule::dw_default();
        let psi = evolve(&inst, &sched, 100.0, 20_000).unwrap();
        // ground state of the final Hamiltonian is |0> (spin up)
        let overlap2 = psi[0].norm_sqr();
        assert!(overlap2 >= 0.99, "ground overlap^2 = {overlap2}");
        // reference integration at 10x resolution agrees
        let reference = evolve(&inst, &sched, 100.0, 200_000).unwrap();
        assert!((reference[0].norm_sqr() - overlap2).abs() < 1e-5);
    }

    #[test]
    fn step_halving_self_convergence() {
        let inst = IsingInstance::new(2, &[(0, 1, 1.0)], None, "pair").unwrap();
        let sched = SqaSchedule::dw_default();
        let coarse = evolve(&inst, &sched, 10.0, 20_000).unwrap();
        let fine = evolve(&inst, &sched, 10.0, 40_000).unwrap();
        let max_diff = coarse
            .iter()
            .zip(fine.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_diff < 1e-6, "amplitude drift {max_diff}");
    }

    #[test]
    fn norm_is_preserved() {
        let inst = IsingInstance::new(2, &[(0, 1, -1.0)], None, "afp").unwrap();
        let sched = SqaSchedule::dw_default();
        let states = evolve_recorded(&inst, &sched, 5.0, 1000, 100).unwrap();
        assert_eq!(states.len(), 11);
        for s in &states {
            assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn argument_validation() {
        let inst = IsingInstance::new(1, &[], Some(vec![1.0]), "one").unwrap();
        let sched = SqaSchedule::dw_default();
        assert!(evolve(&inst, &sched, 1.0, 0).is_err());
        assert!(evolve(&inst, &sched, -1.0, 10).is_err());
        assert!(evolve_recorded(&inst, &sched, 1.0, 10, 3).is_err());
        let big = IsingInstance::new(11, &[], None, "big").unwrap();
        assert!(matches!(
            evolve(&big, &sched, 1.0, 10),
            Err(Error::Capability { .. })
        ));
    }
}
