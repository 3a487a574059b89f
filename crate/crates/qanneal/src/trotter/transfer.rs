//! Transfer-matrix evaluation of the sliced partition function and its
//! comparison with the exact operator trace.
//!
//! The sliced sum `Z_M = sum_s exp(beta F0 + gamma F1)` factorizes over
//! slices into `trace(T^M)` with `T(s, s') = exp((beta/M) E0(s) +
//! gamma <s, s'>)`. Symmetrizing by the diagonal `D^(1/2) K D^(1/2)` keeps
//! the same trace, so large `M` only costs one small eigendecomposition.
//! The exact side is `trace exp(beta sum J sz sz + beta Gamma sum sx)`,
//! with the `+J` sign this module uses throughout.

use super::TheoryParams;
use crate::error::{Error, Result};
use crate::ising::IsingInstance;
use nalgebra::DMatrix;

/// Dense-trace cap.
pub const EXACT_TRACE_B_CAP: usize = 4;

/// Exact `Z_beta = trace exp(beta [sum J sz sz + Gamma sum sx])`.
pub fn exact_partition_trace(
    inst: &IsingInstance,
    beta: f64,
    gamma_strength: f64,
) -> Result<f64> {
    super::require_field_free(inst)?;
    if inst.b() > EXACT_TRACE_B_CAP {
        return Err(Error::Capability {
            what: "dense operator trace (2^b matrix)",
            requested: inst.b(),
            limit: EXACT_TRACE_B_CAP,
        });
    }
    let b = inst.b();
    let dim = 1usize << b;
    let diag = super::slice_weights_exponent(inst);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for idx in 0..dim {
        m[(idx, idx)] = beta * diag[idx];
        for j in 0..b {
            let flipped = idx ^ (1 << (b - 1 - j));
            m[(flipped, idx)] += beta * gamma_strength;
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().map(|l| l.exp()).sum())
}

/// `ln trace(T^M)` through the symmetrized transfer matrix.
pub fn sliced_partition_ln(
    inst: &IsingInstance,
    params: &TheoryParams,
    gamma_strength: f64,
) -> Result<f64> {
    super::require_field_free(inst)?;
    if inst.b() > EXACT_TRACE_B_CAP {
        return Err(Error::Capability {
            what: "transfer matrix (2^b rows)",
            requested: inst.b(),
            limit: EXACT_TRACE_B_CAP,
        });
    }
    let gamma = super::gamma_coupling(params.beta, gamma_strength, params.slices)?;
    let b = inst.b();
    let dim = 1usize << b;
    let e0 = super::slice_weights_exponent(inst);
    let scale = params.beta / params.slices as f64;
    let half: Vec<f64> = e0.iter().map(|e| (0.5 * scale * e).exp()).collect();

    let mut t_sym = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        for sp in 0..dim {
            let overlap = b as i32 - 2 * (s ^ sp).count_ones() as i32;
            t_sym[(s, sp)] = half[s] * (gamma * f64::from(overlap)).exp() * half[sp];
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(t_sym);
    // T_sym = D^(1/2) K D^(1/2) with K positive semidefinite, so the
    // spectrum is nonnegative up to rounding.
    let m = params.slices as i32;
    let lam_max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    if lam_max <= 0.0 {
        return Err(Error::Domain("transfer matrix lost positivity".into()));
    }
    let sum: f64 = eig
        .eigenvalues
        .iter()
        .map(|l| (l.max(0.0) / lam_max).powi(m))
        .sum();
    Ok(m as f64 * lam_max.ln() + sum.ln())
}

/// Brute-force `Z_M` by enumerating all `2^(b M)` path states; the
/// independent oracle for the transfer-matrix route.
pub fn sliced_partition_brute(
    inst: &IsingInstance,
    params: &TheoryParams,
    gamma_strength: f64,
) -> Result<f64> {
    super::require_field_free(inst)?;
    let bits = inst.b() * params.slices;
    if bits > super::EXACT_PATH_BITS {
        return Err(Error::Capability {
            what: "brute-force sliced partition sum (2^(b M) states)",
            requested: bits,
            limit: super::EXACT_PATH_BITS,
        });
    }
    let gamma = super::gamma_coupling(params.beta, gamma_strength, params.slices)?;
    let mut z = 0.0;
    for idx in 0..(1usize << bits) {
        let state = super::path_state_from_index(idx, params.slices, inst.b());
        let mut f0 = 0.0;
        for k in 0..params.slices {
            for e in inst.edges() {
                f0 += e.coupling
                    * f64::from(state.get(k, e.i as usize) * state.get(k, e.j as usize));
            }
        }
        f0 /= params.slices as f64;
        z += (params.beta * f0 + gamma * super::time_bond_sum(&state)).exp();
    }
    Ok(z)
}

/// Compare the prefactored sliced partition function against the exact
/// trace: returns `(Z_exact, prefactored, |difference|)` where
/// `prefactored = (sinh(2 beta Gamma / M) / 2)^(b M / 2) * Z_M`.
pub fn trotter_partition_check(
    inst: &IsingInstance,
    params: &TheoryParams,
    gamma_strength: f64,
) -> Result<(f64, f64, f64)> {
    let z_exact = exact_partition_trace(inst, params.beta, gamma_strength)?;
    let ln_zm = sliced_partition_ln(inst, params, gamma_strength)?;
    let bm = (inst.b() * params.slices) as f64;
    let ln_pref =
        0.5 * bm * (0.5 * (2.0 * params.beta * gamma_strength / params.slices as f64).sinh()).ln();
    let prefactored = (ln_pref + ln_zm).exp();
    Ok((z_exact, prefactored, (prefactored - z_exact).abs()))
}

/// Absolute errors of the prefactored value over a list of slice counts,
/// and the fitted log-log slope of error against `M`. The slope is `None`
/// when every error sits at the floating-point floor (the identity is
/// exact, e.g. for an instance with no couplers, where no noncommuting
/// pair exists).
pub fn error_slope(
    inst: &IsingInstance,
    beta: f64,
    gamma_strength: f64,
    ms: &[usize],
) -> Result<(Vec<f64>, Option<f64>)> {
    if ms.len() < 2 {
        return Err(Error::Config("need at least two slice counts".into()));
    }
    let mut errors = Vec::with_capacity(ms.len());
    let mut z_scale = 1.0f64;
    for &m in ms {
        let params = TheoryParams::new(beta, m, super::GammaSchedule::Constant(gamma_strength))?;
        let (z, _, err) = trotter_partition_check(inst, &params, gamma_strength)?;
        z_scale = z.abs().max(1.0);
        errors.push(err);
    }
    let floor = 1e-12 * z_scale;
    if errors.iter().all(|e| *e <= floor) {
        return Ok((errors, None));
    }
    // least-squares slope of ln(err) on ln(M)
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok((errors, Some(sxy / sxx)))
}
