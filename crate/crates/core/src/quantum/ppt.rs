//! Partial transposition and random separable states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::sim::{DensityMatrix, StateVector};
use crate::error::{Error, Result};

/// A state is reported PPT when every partial transpose has minimum
/// eigenvalue at least `-PPT_TOLERANCE`.
pub const PPT_TOLERANCE: f64 = 1e-10;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

/// Transposes the qubits whose bits are set in `tau` (site `k` is bit `k - 1`).
pub fn partial_transpose(rho: &DensityMatrix, tau: u32) -> Result<DMatrix<Complex64>> {
    let n = rho.n();
    if u64::from(tau) >> n != 0 {
        return Err(Error::BitsOutOfRange { bits: tau, n });
    }
    let m = rho.matrix();
    let dim = m.nrows();
    let t = tau as usize;
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let (i2, j2) = ((i & !t) | (j & t), (j & !t) | (i & t));
        m[(i2, j2)]
    }))
}

/// Smallest eigenvalue over the partial transposes of every subset of
/// sites, with the subset attaining it.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<(f64, u32)> {
    let n = rho.n();
    let mut best = (f64::INFINITY, 0);
    // τ and its complement give transposed spectra, so half the subsets suffice
    for tau in 1..1u32 << (n - 1) {
        let ev = min_eigenvalue(&partial_transpose(rho, tau)?);
        if ev < best.0 {
            best = (ev, tau);
        }
    }
    if n == 1 {
        best = (min_eigenvalue(&partial_transpose(rho, 1)?), 1);
    }
    Ok(best)
}

pub fn is_ppt(rho: &DensityMatrix) -> Result<bool> {
    Ok(min_partial_transpose_eigenvalue(rho)?.0 >= -PPT_TOLERANCE)
}

fn haar_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    loop {
        let v: [Complex64; 2] = std::array::from_fn(|_| {
            Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
        });
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if norm > 1e-12 {
            return v.map(|z| z / norm);
        }
    }
}

/// A mixture of `terms` Haar-random product states with flat Dirichlet
/// weights.
pub fn sample_separable(n: u32, terms: usize, seed: u64) -> Result<DensityMatrix> {
    if terms == 0 {
        return Err(Error::InvalidDensityMatrix("a mixture needs at least one term".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..terms).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let mut parts = Vec::with_capacity(terms);
    for w in raw {
        let factors: Vec<[Complex64; 2]> = (0..n).map(|_| haar_qubit(&mut rng)).collect();
        parts.push((w / total, StateVector::product(&factors)?));
    }
    DensityMatrix::mixture(&parts)
}
