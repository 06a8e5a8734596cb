//! Dense qubit simulator for correlation cross-checks. Site `k` is qubit
//! `k`, stored in bit `k - 1` of the computational-basis index.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::PhaseVector;
use crate::classical::CorrelationVector;
use crate::error::{Error, Result};

pub const MAX_QUBITS: u32 = 12;

type Gate = [[Complex64; 2]; 2];

fn check_qubits(n: u32) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::SiteCount(n, 1, MAX_QUBITS));
    }
    Ok(())
}

/// A ±1-valued qubit observable `a · σ` with unit Bloch vector `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Observable {
    bloch: [f64; 3],
}

impl TryFrom<[f64; 3]> for Observable {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Observable::new(v)
    }
}

impl From<Observable> for [f64; 3] {
    fn from(o: Observable) -> Self {
        o.bloch
    }
}

impl Observable {
    /// Normalizes `bloch`; rejects the zero vector.
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 1e-12 {
            return Err(Error::Parse(format!("Bloch vector {bloch:?} has no direction")));
        }
        Ok(Self { bloch: bloch.map(|x| x / norm) })
    }

    /// `cos θ σx + sin θ σy`.
    pub fn xy(angle: f64) -> Self {
        Self { bloch: [angle.cos(), angle.sin(), 0.0] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            if let Ok(o) = Self::new(v) {
                return o;
            }
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    /// Angle in the x–y plane, if the observable lies there.
    pub fn xy_angle(&self) -> Option<f64> {
        (self.bloch[2].abs() < 1e-12).then(|| self.bloch[1].atan2(self.bloch[0]))
    }

    pub fn matrix(&self) -> Gate {
        let [x, y, z] = self.bloch;
        [
            [Complex64::new(z, 0.0), Complex64::new(x, -y)],
            [Complex64::new(x, y), Complex64::new(-z, 0.0)],
        ]
    }
}

/// Two observables per site: `sites[k][c]` is `A_{k+1}(c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub sites: Vec<[Observable; 2]>,
}

impl ObservableSpec {
    pub fn n(&self) -> u32 {
        self.sites.len() as u32
    }

    pub fn from_xy_angles(angles: &[[f64; 2]]) -> Self {
        Self { sites: angles.iter().map(|a| [Observable::xy(a[0]), Observable::xy(a[1])]).collect() }
    }

    /// Per-site `[choice 0, choice 1]` angles, when every observable is in the
    /// x–y plane.
    pub fn xy_angles(&self) -> Option<Vec<[f64; 2]>> {
        self.sites.iter().map(|[a, b]| Some([a.xy_angle()?, b.xy_angle()?])).collect()
    }

    pub fn random_xy<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        use std::f64::consts::TAU;
        let angles: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)]).collect();
        Self::from_xy_angles(&angles)
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        Self { sites: (0..n).map(|_| [Observable::random(rng), Observable::random(rng)]).collect() }
    }
}

/// x–y plane observables realizing `cos(φ₀ + Σ φ_k s_k)` on the GHZ state:
/// with `α = φ₀ / n`, choice 0 has angle `α` and choice 1 has `φ_k + α`.
pub fn ghz_observables(phases: &PhaseVector) -> ObservableSpec {
    let n = phases.n().max(1);
    let alpha = phases.phi0 / f64::from(n);
    let angles: Vec<[f64; 2]> = phases.phi.iter().map(|&p| [alpha, p + alpha]).collect();
    ObservableSpec::from_xy_angles(&angles)
}

/// A normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: u32, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, actual: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("state norm² {norm}")));
        }
        Ok(Self { n, amplitudes })
    }

    /// `|0…0⟩`.
    pub fn zero(n: u32) -> Result<Self> {
        check_qubits(n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    /// `⊗_k |ψ_k⟩` with site 1 first.
    pub fn product(factors: &[[Complex64; 2]]) -> Result<Self> {
        let n = factors.len() as u32;
        check_qubits(n)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for f in factors {
            let lo: Vec<Complex64> = amps.iter().map(|a| a * f[0]).collect();
            let hi: Vec<Complex64> = amps.iter().map(|a| a * f[1]).collect();
            amps = lo;
            amps.extend(hi);
        }
        Self::new(n, amps)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: u32) -> Result<StateVector> {
    check_qubits(n)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[(1 << n) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(StateVector { n, amplitudes })
}

/// A validated density operator: Hermitian, unit trace, positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: u32,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(n: u32, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: matrix.nrows() });
        }
        let asym = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {asym:e})")));
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let lowest = super::min_eigenvalue(&matrix);
        if lowest < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {lowest:e} is negative")));
        }
        Ok(Self { n, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self { n: state.n, matrix: &v * v.adjoint() }
    }

    /// Convex combination of pure states; weights must be a distribution.
    pub fn mixture(states: &[(f64, StateVector)]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidDensityMatrix("empty mixture".into()))?;
        let n = first.1.n;
        let dim = 1usize << n;
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, s) in states {
            if s.n != n {
                return Err(Error::DimensionMismatch { expected: n as usize, actual: s.n as usize });
            }
            if w.is_nan() || *w < 0.0 {
                return Err(Error::InvalidDensityMatrix(format!("negative weight {w}")));
            }
            matrix += DensityMatrix::from_pure(s).matrix * Complex64::new(*w, 0.0);
        }
        Self::new(n, matrix)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// A pure or mixed state.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

/// Applies a single-qubit gate to qubit `q` of every length-`2^n` block.
fn apply_gate(data: &mut [Complex64], dim: usize, q: u32, gate: &Gate) {
    let bit = 1usize << q;
    for block in data.chunks_exact_mut(dim) {
        for i in (0..dim).filter(|i| i & bit == 0) {
            let (a, b) = (block[i], block[i | bit]);
            block[i] = gate[0][0] * a + gate[0][1] * b;
            block[i | bit] = gate[1][0] * a + gate[1][1] * b;
        }
    }
}

/// Walks the binary tree of settings, applying `A_k(s_k)` site by site, and
/// records `readout` of the fully transformed data at each leaf.
fn sweep_settings(
    data: Vec<Complex64>,
    dim: usize,
    gates: &[[Gate; 2]],
    site: usize,
    setting: usize,
    readout: &dyn Fn(&[Complex64]) -> f64,
    out: &mut [f64],
) {
    if site == gates.len() {
        out[setting] = readout(&data);
        return;
    }
    for choice in 0..2 {
        let mut next = data.clone();
        apply_gate(&mut next, dim, site as u32, &gates[site][choice]);
        sweep_settings(next, dim, gates, site + 1, setting | choice << site, readout, out);
    }
}

/// `ξ(s) = ⟨⊗_k A_k(s_k)⟩` for every setting `s`.
pub fn simulate_correlations<'a>(state: impl Into<StateRef<'a>>, obs: &ObservableSpec) -> Result<CorrelationVector> {
    let state = state.into();
    let n = match state {
        StateRef::Pure(s) => s.n,
        StateRef::Mixed(m) => m.n,
    };
    if obs.n() != n {
        return Err(Error::DimensionMismatch { expected: n as usize, actual: obs.n() as usize });
    }
    check_qubits(n)?;
    let dim = 1usize << n;
    let gates: Vec<[Gate; 2]> = obs.sites.iter().map(|[a, b]| [a.matrix(), b.matrix()]).collect();
    let mut xi = vec![0.0; dim];
    match state {
        StateRef::Pure(psi) => {
            let amps = psi.amplitudes.clone();
            let readout = |v: &[Complex64]| amps.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
            sweep_settings(psi.amplitudes.clone(), dim, &gates, 0, 0, &readout, &mut xi);
        }
        StateRef::Mixed(rho) => {
            // column-major storage: each column is a contiguous block, so the
            // gates act on the row index, i.e. O·ρ
            let readout = |m: &[Complex64]| (0..dim).map(|i| m[i * dim + i].re).sum::<f64>();
            sweep_settings(rho.matrix.as_slice().to_vec(), dim, &gates, 0, 0, &readout, &mut xi);
        }
    }
    CorrelationVector::new(n, xi)
}
