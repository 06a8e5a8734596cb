//! Maximal quantum violations and the extreme points of the quantum
//! correlation body.
//!
//! For unitary dichotomic observables the largest quantum value of a Bell
//! polynomial is `sup |Σ_s β(s) Π_k e^{iφ_k s_k}|` over one phase per site,
//! and every extreme point `ξ(s) = cos(φ₀ + Σ_k φ_k s_k)` of the quantum body
//! is realized on the GHZ state with observables in the x–y plane.

mod norm;
mod ppt;
mod sim;

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::CorrelationVector;
use crate::inequality::BellTable;

pub use norm::{
    bell_operator_dense, bell_operator_norm_dense, bell_operator_norm_exact, norm_by_eigenphases, NORM_AGREEMENT,
};
pub use ppt::{
    hermitian_eigenvalues, is_ppt, min_eigenvalue, min_partial_transpose_eigenvalue, partial_transpose,
    sample_separable, PPT_TOLERANCE,
};
pub use sim::{
    ghz_observables, ghz_state, simulate_correlations, DensityMatrix, Observable, ObservableSpec, StateRef,
    StateVector, MAX_QUBITS,
};

/// One phase per site plus the global phase `φ₀`; all reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    pub phi0: f64,
    pub phi: Vec<f64>,
}

fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl PhaseVector {
    pub fn new(phi0: f64, phi: Vec<f64>) -> Self {
        Self { phi0: reduce_angle(phi0), phi: phi.into_iter().map(reduce_angle).collect() }
    }

    pub fn zeros(n: u32) -> Self {
        Self::new(0.0, vec![0.0; n as usize])
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        Self::new(rng.gen_range(0.0..TAU), (0..n).map(|_| rng.gen_range(0.0..TAU)).collect())
    }

    pub fn n(&self) -> u32 {
        self.phi.len() as u32
    }
}

/// `Π_k e^{iφ_k s_k}` for every setting `s`.
fn setting_phases(phi: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &p in phi {
        let z = Complex64::from_polar(1.0, p);
        let upper: Vec<Complex64> = out.iter().map(|&w| w * z).collect();
        out.extend(upper);
    }
    out
}

/// `T(φ) = Σ_s β(s) Π_k e^{iφ_k s_k}`.
pub fn trig_polynomial(beta: &[f64], phi: &[f64]) -> Complex64 {
    setting_phases(phi).iter().zip(beta).map(|(&w, &b)| w * b).sum()
}

/// `|T(φ)|²` and its gradient in `φ`.
pub fn squared_modulus_with_gradient(beta: &[f64], phi: &[f64]) -> (f64, Vec<f64>) {
    let w = setting_phases(phi);
    let terms: Vec<Complex64> = w.iter().zip(beta).map(|(&w, &b)| w * b).collect();
    let t: Complex64 = terms.iter().sum();
    let grad = (0..phi.len())
        .map(|k| {
            let partial: Complex64 = terms.iter().enumerate().filter(|(s, _)| (s >> k) & 1 == 1).map(|(_, &x)| x).sum();
            // d|T|²/dφ_k = 2 Re(conj(T) · i · partial)
            -2.0 * (t.conj() * partial).im
        })
        .collect();
    (t.norm_sqr(), grad)
}

/// The quantum value `|Σ_s β(s) Π_k e^{iφ_k s_k}|` at the given phases.
pub fn violation_value(beta: &BellTable, phases: &PhaseVector) -> f64 {
    trig_polynomial(&beta.to_f64(), &phases.phi).norm()
}

/// Overall largest quantum value over all extremal inequalities on `n` sites:
/// `2^((n-1)/2)`.
pub fn mermin_bound(n: u32) -> f64 {
    2f64.powf((f64::from(n) - 1.0) / 2.0)
}

/// `ξ(s) = cos(φ₀ + Σ_k φ_k s_k)`.
pub fn extreme_point_q(phases: &PhaseVector) -> CorrelationVector {
    let n = phases.n();
    let xi = setting_phases(&phases.phi)
        .iter()
        .map(|w| (w * Complex64::from_polar(1.0, phases.phi0)).re)
        .collect();
    CorrelationVector::new(n, xi).expect("cosines lie in [-1, 1]")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub seed: u64,
    /// Random starting points in addition to the grid.
    pub random_starts: usize,
    /// Seed the grid `{0, π/2, π, 3π/2}^n` up to this many sites.
    pub grid_max_sites: u32,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { seed: 0, random_starts: 32, grid_max_sites: 6, max_iterations: 500, gradient_tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationResult {
    pub value: f64,
    pub argmax: PhaseVector,
    /// Whether the best run reached a stationary point.
    pub converged: bool,
    pub starts: usize,
}

/// Gradient norms below this count as stationary once the line search can
/// no longer improve the objective in floating point.
const STALL_GRADIENT: f64 = 1e-7;

struct Ascent {
    phi: Vec<f64>,
    value: f64,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton (BFGS) ascent on `|T|²` with Armijo backtracking.
fn ascend(beta: &[f64], start: Vec<f64>, settings: &OptimizerSettings) -> Ascent {
    let n = start.len();
    let identity = |h: &mut Vec<f64>| {
        h.iter_mut().enumerate().for_each(|(i, x)| *x = if i % (n + 1) == 0 { 1.0 } else { 0.0 });
    };
    let mut h = vec![0.0; n * n];
    identity(&mut h);
    let mut x = start;
    let (mut f, mut g) = squared_modulus_with_gradient(beta, &x);
    let mut converged = false;
    let mut reset = false;

    for _ in 0..settings.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < settings.gradient_tolerance {
            converged = true;
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope <= 0.0 {
            identity(&mut h);
            d = g.clone();
            slope = dot(&g, &d);
        }
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (ft, gt) = squared_modulus_with_gradient(beta, &trial);
            if ft >= f + 1e-4 * t * slope {
                break Some((trial, ft, gt));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((x_new, f_new, g_new)) = accepted else {
            if gnorm < STALL_GRADIENT {
                converged = true;
                break;
            }
            if reset {
                break;
            }
            reset = true;
            identity(&mut h);
            continue;
        };
        reset = false;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // gradient change of the minimized objective -|T|²
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        let stalled = f_new - f <= f64::EPSILON * f.abs();
        x = x_new;
        f = f_new;
        g = g_new;
        if stalled && dot(&g, &g).sqrt() < STALL_GRADIENT {
            converged = true;
            break;
        }
    }
    if !converged && dot(&g, &g).sqrt() < settings.gradient_tolerance {
        converged = true;
    }
    Ascent { phi: x, value: f.sqrt(), converged }
}

/// Starting points: the grid `{0, π/2, π, 3π/2}^n` (for small `n`) followed by
/// uniformly random points from the seeded generator.
fn starting_points(n: u32, settings: &OptimizerSettings) -> Vec<Vec<f64>> {
    let mut starts = Vec::new();
    if n <= settings.grid_max_sites {
        for code in 0..1usize << (2 * n) {
            starts.push((0..n).map(|k| FRAC_PI_2 * ((code >> (2 * k)) & 3) as f64).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..settings.random_starts {
        starts.push((0..n).map(|_| rng.gen_range(0.0..TAU)).collect());
    }
    starts
}

/// Largest quantum value of `beta` by multi-start ascent over the phases.
/// Deterministic given `settings`.
pub fn max_violation(beta: &BellTable, settings: &OptimizerSettings) -> ViolationResult {
    let coefficients = beta.to_f64();
    let starts = starting_points(beta.n(), settings);
    let count = starts.len();
    let best = starts
        .into_iter()
        .map(|s| ascend(&coefficients, s, settings))
        .fold(None::<Ascent>, |best, run| match best {
            Some(b) if b.value >= run.value => Some(b),
            _ => Some(run),
        })
        .expect("at least one start");
    ViolationResult {
        value: best.value,
        argmax: PhaseVector::new(0.0, best.phi),
        converged: best.converged,
        starts: count,
    }
}
