//! Success-probability lower bound for a finite-time anneal.
//!
//! For the instantaneous family `H(u) = A(u) H_X + B(u) H_I` on `u` in
//! `[0, 1]`, the bound combines four ingredients evaluated on a `u`-grid:
//!
//! - `zeta`: ground-state degeneracy of the final Hamiltonian;
//! - `Pi`: the worst squared ratio `|<0|dH/du|j>| / (lambda_j - lambda_0)`
//!   over grid points, tracked ground vectors, and excited states;
//! - `p0`: the minimum population the evolved state keeps in the tracked
//!   ground frame along the way;
//! - `xi`: a geometric term from the rotation rate of the degenerate
//!   ground frame (identically zero when the ground state is unique).
//!
//! The reported bound is `exp(-xi) - 2^b zeta Pi exp(2 xi) (1 - p0)`,
//! which reduces to `1 - 2^b Pi (1 - p0)` for a unique ground state.
//!
//! Ground vectors are made comparable across grid points by discrete
//! parallel transport: each frame is matched to its predecessor by
//! maximal overlap and re-phased so the matched overlap is real positive.
//! A matched overlap below 0.5 signals an unresolved crossing and aborts
//! with a resolution error.

use super::evolve::{evolve_recorded, hamiltonian_at};
use super::{
    build_quantum_ising, build_transverse, check_cap, eig_hermitian, success_probability,
    BOUND_CAP,
};
use crate::error::{Error, Result};
use crate::ising::IsingInstance;
use crate::sqa::SqaSchedule;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Ground-state count of the final Hamiltonian.
    pub zeta: usize,
    /// Minimum ground-frame population of the evolved state.
    pub p0: f64,
    /// Worst squared transition ratio over the grid.
    pub pi: f64,
    /// Frame-rotation term; zero when `zeta == 1`, infinite when the
    /// geometric series behind it diverges.
    pub xi: f64,
    /// The assembled lower bound (`-inf` when `xi` is infinite).
    pub lower_bound: f64,
    /// Exact success probability of the evolved final state.
    pub true_success: f64,
    /// Grid resolution used.
    pub u_grid: usize,
}

/// Degeneracy tolerance for counting ground states.
fn degeneracy_tol(lambda0: f64) -> f64 {
    1e-8 * lambda0.abs().max(1.0)
}

/// Evaluate the bound on a `u_grid + 1`-point grid. The propagation uses
/// `max(8, ceil(40 t_f / u_grid))` unitary steps per grid cell.
pub fn theorem2_bound(
    inst: &IsingInstance,
    sched: &SqaSchedule,
    t_f: f64,
    u_grid: usize,
) -> Result<BoundReport> {
    check_cap(inst.b(), BOUND_CAP, "success-bound evaluation")?;
    if u_grid < 16 {
        return Err(Error::Config(format!(
            "u_grid must be at least 16, got {u_grid}"
        )));
    }
    let b = inst.b();
    let dim = 1usize << b;
    let hx = build_transverse(b)?;
    let hi = build_quantum_ising(inst)?;

    // zeta from the final Hamiltonian's spectrum
    let (final_values, _) = eig_hermitian(&hamiltonian_at(&hx, &hi, sched, 1.0));
    let lambda0 = final_values[0];
    let tol = degeneracy_tol(lambda0);
    let zeta = (0..dim)
        .take_while(|&k| final_values[k] <= lambda0 + tol)
        .count();

    // evolved states at every grid point
    let steps_per_cell = 8.max((40.0 * t_f / u_grid as f64).ceil() as usize);
    let states = evolve_recorded(inst, sched, t_f, u_grid * steps_per_cell, steps_per_cell)?;
    debug_assert_eq!(states.len(), u_grid + 1);

    let du = 1.0 / u_grid as f64;
    let mut pi = 0.0f64;
    let mut p0 = f64::INFINITY;
    let mut frames: Vec<DMatrix<Complex64>> = Vec::with_capacity(u_grid + 1);

    for m in 0..=u_grid {
        let u = m as f64 / u_grid as f64;
        let ham = hamiltonian_at(&hx, &hi, sched, u);
        let (values, vectors) = eig_hermitian(&ham);
        let mut frame = vectors.columns(0, zeta).into_owned();
        if let Some(prev) = frames.last() {
            frame = transport_frame(prev, &frame, u)?;
        }

        // Pi over excited states against the tracked frame
        let dham = hx.matrix() * Complex64::new(sched.transverse_deriv(u), 0.0)
            + hi.matrix() * Complex64::new(sched.ising_deriv(u), 0.0);
        let lam0 = values[0];
        for j in zeta..dim {
            let gap = values[j] - lam0;
            let dh_j = &dham * vectors.column(j);
            for l in 0..zeta {
                let amp = frame.column(l).dotc(&dh_j).norm();
                let ratio = (amp / gap).powi(2);
                if ratio > pi {
                    pi = ratio;
                }
            }
        }

        // ground-frame population of the evolved state
        let pop: f64 = (0..zeta)
            .map(|l| frame.column(l).dotc(&states[m]).norm_sqr())
            .sum();
        p0 = p0.min(pop);
        frames.push(frame);
    }

    // xi: zero for a unique ground state, otherwise from the rotation
    // rate of the transported frame
    let xi = if zeta == 1 {
        0.0
    } else {
        let mut norms = Vec::with_capacity(u_grid + 1);
        for m in 0..=u_grid {
            let deriv_of = |l: usize| -> DVector<Complex64> {
                if m == 0 {
                    (frames[1].column(l) - frames[0].column(l)) / Complex64::new(du, 0.0)
                } else if m == u_grid {
                    (frames[m].column(l) - frames[m - 1].column(l)) / Complex64::new(du, 0.0)
                } else {
                    (frames[m + 1].column(l) - frames[m - 1].column(l))
                        / Complex64::new(2.0 * du, 0.0)
                }
            };
            let mut a = DMatrix::<Complex64>::zeros(zeta, zeta);
            for l in 0..zeta {
                let dl = deriv_of(l);
                for ell in 0..zeta {
                    if ell != l {
                        a[(ell, l)] = -Complex64::i() * frames[m].column(ell).dotc(&dl);
                    }
                }
            }
            norms.push(spectral_norm(&a));
        }
        let mut integral = 0.0;
        for m in 0..u_grid {
            integral += 0.5 * (norms[m] + norms[m + 1]) * du;
        }
        if integral >= std::f64::consts::PI {
            f64::INFINITY
        } else {
            integral / (1.0 - integral / std::f64::consts::PI)
        }
    };

    let true_success = success_probability(inst, states.last().expect("states"))?;
    let lower_bound = if xi.is_infinite() {
        f64::NEG_INFINITY
    } else {
        (-xi).exp() - (dim as f64) * zeta as f64 * pi * (2.0 * xi).exp() * (1.0 - p0)
    };
    Ok(BoundReport {
        zeta,
        p0,
        pi,
        xi,
        lower_bound,
        true_success,
        u_grid,
    })
}

/// Match `frame` against `prev` column by column (greedy maximal
/// overlap), re-phasing each matched column so its overlap with the
/// predecessor is real positive.
fn transport_frame(
    prev: &DMatrix<Complex64>,
    frame: &DMatrix<Complex64>,
    u: f64,
) -> Result<DMatrix<Complex64>> {
    let zeta = frame.ncols();
    let mut out = DMatrix::<Complex64>::zeros(frame.nrows(), zeta);
    let mut used = vec![false; zeta];
    for l in 0..zeta {
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for k in 0..zeta {
            if used[k] {
                continue;
            }
            let mag = prev.column(l).dotc(&frame.column(k)).norm();
            if mag > best_mag {
                best_mag = mag;
                best = k;
            }
        }
        if best_mag < 0.5 {
            return Err(Error::Resolution(format!(
                "ground-frame overlap {best_mag:.3} between adjacent grid points at u = {u:.4}"
            )));
        }
        used[best] = true;
        let overlap = prev.column(l).dotc(&frame.column(best));
        let phase = overlap / Complex64::new(overlap.norm(), 0.0);
        out.set_column(l, &(frame.column(best) * phase.conj()));
    }
    Ok(out)
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}
