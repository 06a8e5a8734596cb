//! Operator norm of the Bell operator `B = Σ_s β(s) ⊗_k A_k(s_k)` for qubit
//! observables, by two independent routes.
//!
//! Dense route: build `B` and take its largest singular value.
//! Eigenvalue route: `B = (⊗_k A_k(0)) · Σ_s β(s) Π_k C_k^{s_k}` with the
//! commuting unitaries `C_k = A_k(0) A_k(1)`, so `‖B‖` is the largest modulus
//! of `Σ_s β(s) Π_k λ_k^{s_k}` over all tuples of eigenvalues `λ_k` of `C_k`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sim::{Observable, ObservableSpec};
use crate::error::{Error, Result};
use crate::transform::sites_for_len;

/// Largest allowed difference between the two routes.
pub const NORM_AGREEMENT: f64 = 1e-8;

/// Site limit of the dense route (a `1024 × 1024` matrix).
const DENSE_MAX_SITES: u32 = 10;

fn check(beta: &[f64], obs: &ObservableSpec) -> Result<u32> {
    let n = sites_for_len(beta.len())?;
    if obs.n() != n {
        return Err(Error::DimensionMismatch { expected: n as usize, actual: obs.n() as usize });
    }
    if !(1..=DENSE_MAX_SITES).contains(&n) {
        return Err(Error::SiteCount(n, 1, DENSE_MAX_SITES));
    }
    Ok(n)
}

fn to_dmatrix(o: &Observable) -> DMatrix<Complex64> {
    let m = o.matrix();
    DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

/// The Bell operator as a dense matrix; site 1 acts on the lowest index bit.
pub fn bell_operator_dense(beta: &[f64], obs: &ObservableSpec) -> Result<DMatrix<Complex64>> {
    let n = check(beta, obs)?;
    let mats: Vec<[DMatrix<Complex64>; 2]> =
        obs.sites.iter().map(|[a, b]| [to_dmatrix(a), to_dmatrix(b)]).collect();
    let dim = 1usize << n;
    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for (s, &b) in beta.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let mut term = DMatrix::<Complex64>::identity(1, 1);
        for (k, pair) in mats.iter().enumerate() {
            // later sites occupy higher bits, so they are the left factor
            term = pair[(s >> k) & 1].kronecker(&term);
        }
        total += term * Complex64::new(b, 0.0);
    }
    Ok(total)
}

/// `‖B‖` via the largest singular value of the dense operator.
pub fn bell_operator_norm_dense(beta: &[f64], obs: &ObservableSpec) -> Result<f64> {
    let b = bell_operator_dense(beta, obs)?;
    Ok(b.singular_values().iter().copied().fold(0.0, f64::max))
}

fn unitary_eigenvalues(u: [[Complex64; 2]; 2]) -> [Complex64; 2] {
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

fn mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `‖B‖` from the eigenvalues of `C_k = A_k(0) A_k(1)`.
pub fn norm_by_eigenphases(beta: &[f64], obs: &ObservableSpec) -> Result<f64> {
    let n = check(beta, obs)? as usize;
    let eig: Vec<[Complex64; 2]> =
        obs.sites.iter().map(|[a, b]| unitary_eigenvalues(mul(a.matrix(), b.matrix()))).collect();
    let mut best = 0.0f64;
    for choice in 0..1usize << n {
        let lambda: Vec<Complex64> = (0..n).map(|k| eig[k][(choice >> k) & 1]).collect();
        let value: Complex64 = beta
            .iter()
            .enumerate()
            .map(|(s, &b)| {
                let phase = (0..n).filter(|k| s >> k & 1 == 1).fold(Complex64::new(1.0, 0.0), |acc, k| acc * lambda[k]);
                phase * b
            })
            .sum();
        best = best.max(value.norm());
    }
    Ok(best)
}

/// `‖B‖`, computed by both routes; fails with [`Error::NormMismatch`] if they
/// differ by more than [`NORM_AGREEMENT`].
pub fn bell_operator_norm_exact(beta: &[f64], obs: &ObservableSpec) -> Result<f64> {
    let dense = bell_operator_norm_dense(beta, obs)?;
    let formula = norm_by_eigenphases(beta, obs)?;
    if (dense - formula).abs() > NORM_AGREEMENT {
        return Err(Error::NormMismatch { dense, formula });
    }
    Ok(dense)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::BellTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn chsh_optimal_settings() {
        // A(0) = X, A(1) = Y at both sites
        let obs = ObservableSpec::from_xy_angles(&[[0.0, FRAC_PI_2], [FRAC_PI_2 / 2.0, -FRAC_PI_2 / 2.0]]);
        let beta = BellTable::chsh().to_f64();
        let v = bell_operator_norm_exact(&beta, &obs).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn commuting_settings_are_classical() {
        let obs = ObservableSpec::from_xy_angles(&[[0.0, 0.0], [0.0, 0.0]]);
        let beta = BellTable::chsh().to_f64();
        assert!((norm_by_eigenphases(&beta, &obs).unwrap() - 1.0).abs() < 1e-12);
        assert!((bell_operator_norm_dense(&beta, &obs).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_operator_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obs = ObservableSpec::random(3, &mut rng);
        let beta: Vec<f64> = (0..8).map(|i| (i as f64 - 3.5) / 4.0).collect();
        let b = bell_operator_dense(&beta, &obs).unwrap();
        assert!((&b - b.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn routes_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4u32 {
            for _ in 0..10 {
                let obs = ObservableSpec::random(n, &mut rng);
                let beta: Vec<f64> = (0..1usize << n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
                let a = bell_operator_norm_dense(&beta, &obs).unwrap();
                let b = norm_by_eigenphases(&beta, &obs).unwrap();
                assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn shape_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = ObservableSpec::random(2, &mut rng);
        assert!(bell_operator_dense(&[1.0; 8], &obs).is_err());
        assert!(bell_operator_dense(&[1.0; 3], &obs).is_err());
    }
}
