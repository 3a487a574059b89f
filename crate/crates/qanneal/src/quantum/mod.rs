//! Exact dense quantum mechanics for small instances: Hamiltonian
//! construction in the computational basis, spectrum checks against the
//! classical energies, Schrodinger propagation, and the measurement
//! success probability.
//!
//! Basis convention: basis state `idx` encodes spin `j` in bit `b-1-j`,
//! bit value 0 meaning spin up (+1); see
//! [`crate::ising::SpinConfiguration::from_index`]. All `sigma^z` terms
//! are diagonal in this basis and `sigma^x_j` flips bit `b-1-j`.

pub mod bound;
pub mod evolve;

use crate::error::{Error, Result};
use crate::ising::{IsingInstance, SpinConfiguration};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense construction limit: `2^12 = 4096` rows.
pub const BUILD_CAP: usize = 12;
/// Propagation limit.
pub const EVOLVE_CAP: usize = 10;
/// Spectrum-equivalence limit.
pub const SPECTRUM_CAP: usize = 10;
/// Bound-evaluation limit.
pub const BOUND_CAP: usize = 8;

/// A dense Hermitian operator on the `2^b`-dimensional state space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    matrix: DMatrix<Complex64>,
}

impl DenseHamiltonian {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not a square power-of-two matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let h = Self { matrix };
        if !h.is_hermitian(1e-12) {
            return Err(Error::Domain("matrix is not Hermitian".into()));
        }
        Ok(h)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues ascending with matching eigenvector columns.
    pub fn eigendecompose(&self) -> (DVector<f64>, DMatrix<Complex64>) {
        eig_hermitian(&self.matrix)
    }
}

fn check_cap(b: usize, cap: usize, what: &'static str) -> Result<()> {
    if b > cap {
        return Err(Error::Capability {
            what,
            requested: b,
            limit: cap,
        });
    }
    Ok(())
}

/// Sign of spin `j` in basis state `idx`.
#[inline]
fn z_sign(idx: usize, j: usize, b: usize) -> f64 {
    if idx >> (b - 1 - j) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The diagonal Ising Hamiltonian `-sum J_ij sz_i sz_j - sum h_j sz_j`
/// built from the tensor-product action of the `sigma^z` factors.
pub fn build_quantum_ising(inst: &IsingInstance) -> Result<DenseHamiltonian> {
    check_cap(inst.b(), BUILD_CAP, "dense Ising Hamiltonian")?;
    let b = inst.b();
    let dim = 1usize << b;
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for idx in 0..dim {
        let mut e = 0.0;
        for edge in inst.edges() {
            e -= edge.coupling
                * z_sign(idx, edge.i as usize, b)
                * z_sign(idx, edge.j as usize, b);
        }
        for (j, hj) in inst.fields().iter().enumerate() {
            e -= hj * z_sign(idx, j, b);
        }
        matrix[(idx, idx)] = Complex64::new(e, 0.0);
    }
    Ok(DenseHamiltonian { matrix })
}

/// The transverse-field Hamiltonian `-sum_j sigma^x_j`; its ground state
/// is the uniform superposition with eigenvalue `-b`.
pub fn build_transverse(b: usize) -> Result<DenseHamiltonian> {
    check_cap(b, BUILD_CAP, "dense transverse-field Hamiltonian")?;
    if b == 0 {
        return Err(Error::Config("b must be at least 1".into()));
    }
    let dim = 1usize << b;
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for idx in 0..dim {
        for j in 0..b {
            let flipped = idx ^ (1 << (b - 1 - j));
            matrix[(flipped, idx)] += Complex64::new(-1.0, 0.0);
        }
    }
    Ok(DenseHamiltonian { matrix })
}

/// Instantaneous annealing Hamiltonian `A(t) H_X + B(t) H_I` at normalized
/// time `t` in `[0, 1]`. No clamp is applied to `A` here; the clamp is a
/// path-integral device only.
pub fn annealing_hamiltonian(
    inst: &IsingInstance,
    sched: &crate::sqa::SqaSchedule,
    t: f64,
) -> Result<DenseHamiltonian> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    let hx = build_transverse(inst.b())?;
    let hi = build_quantum_ising(inst)?;
    let matrix = hx.matrix * Complex64::new(sched.transverse(t), 0.0)
        + hi.matrix * Complex64::new(sched.ising(t), 0.0);
    Ok(DenseHamiltonian { matrix })
}

/// The uniform superposition `|v_+>`, the transverse ground state.
pub fn uniform_superposition(b: usize) -> DVector<Complex64> {
    let dim = 1usize << b;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    DVector::from_element(dim, amp)
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eig_hermitian(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::<Complex64>::zeros(m.nrows(), m.ncols());
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `exp(scale * H)` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian(h: &DenseHamiltonian, scale: Complex64) -> DMatrix<Complex64> {
    let (values, vectors) = h.eigendecompose();
    let mut diag = DMatrix::<Complex64>::zeros(h.dim(), h.dim());
    for i in 0..h.dim() {
        diag[(i, i)] = (scale * Complex64::new(values[i], 0.0)).exp();
    }
    &vectors * diag * vectors.adjoint()
}

/// Probability that measuring `psi` yields a configuration whose classical
/// energy equals the brute-force ground energy.
pub fn success_probability(inst: &IsingInstance, psi: &DVector<Complex64>) -> Result<f64> {
    if psi.len() != 1usize << inst.b() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, instance needs {}",
            psi.len(),
            1usize << inst.b()
        )));
    }
    let (_, ground) = inst.ground_indices()?;
    Ok(ground.iter().map(|&i| psi[i].norm_sqr()).sum())
}

/// Verify that the quantum Ising Hamiltonian reproduces the classical
/// model exactly: sorted eigenvalues equal the sorted multiset of
/// classical energies to 1e-10, and the Gibbs-state diagonal at `beta = 1`
/// equals the classical Boltzmann distribution to 1e-10.
pub fn spectrum_equivalence_check(inst: &IsingInstance) -> Result<bool> {
    check_cap(inst.b(), SPECTRUM_CAP, "spectrum equivalence check")?;
    let h = build_quantum_ising(inst)?;
    let (values, vectors) = h.eigendecompose();

    let mut classical = inst.all_energies();
    classical.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
    let spectra_match = values
        .iter()
        .zip(&classical)
        .all(|(qe, ce)| (qe - ce).abs() <= 1e-10);

    // Gibbs diagonal from the decomposition: <e_s| e^{-H} |e_s> / Z
    let beta = 1.0;
    let dim = h.dim();
    let mut diag = vec![0.0f64; dim];
    let mut z = 0.0;
    for s in 0..dim {
        let mut val = 0.0;
        for k in 0..dim {
            val += (-beta * values[k]).exp() * vectors[(s, k)].norm_sqr();
        }
        diag[s] = val;
        z += val;
    }
    let mut gibbs_match = true;
    for s in 0..dim {
        let classical_p =
            inst.boltzmann_probability(&SpinConfiguration::from_index(s, inst.b()), beta)?;
        if (diag[s] / z - classical_p).abs() > 1e-10 {
            gibbs_match = false;
            break;
        }
    }
    Ok(spectra_match && gibbs_match)
}
