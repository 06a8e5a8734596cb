//! The classical correlation polytope: its `2^(n+1)` vertices, the ℓ¹
//! membership test in spectrum coordinates, maximally violated witnesses,
//! and a linear-programming membership oracle for small `n`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::SignTable;
use crate::transform::{character, check_sites, sites_for_len, walsh_hadamard_in_place, BitString};

/// Slack allowed on `|ξ(s)| ≤ 1` before an entry is rejected; entries inside
/// the slack are clamped.
pub const RANGE_SLACK: f64 = 1e-12;

/// Boundary tolerance of the ℓ¹ membership test.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-10;

/// Largest site count accepted by [`lp_membership`].
pub const LP_MAX_SITES: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Full-correlation expectations `ξ(s)`, one per setting string `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationJson", into = "CorrelationJson")]
pub struct CorrelationVector {
    n: u32,
    xi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CorrelationJson {
    n: u32,
    xi: Vec<f64>,
}

impl TryFrom<CorrelationJson> for CorrelationVector {
    type Error = Error;

    fn try_from(j: CorrelationJson) -> Result<Self> {
        Self::new(j.n, j.xi)
    }
}

impl From<CorrelationVector> for CorrelationJson {
    fn from(c: CorrelationVector) -> Self {
        Self { n: c.n, xi: c.xi }
    }
}

impl CorrelationVector {
    pub fn new(n: u32, mut xi: Vec<f64>) -> Result<Self> {
        check_sites(n)?;
        if xi.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, actual: xi.len() });
        }
        for (index, x) in xi.iter_mut().enumerate() {
            if x.is_nan() || x.abs() > 1.0 + RANGE_SLACK {
                return Err(Error::CorrelationOutOfRange { index, value: *x });
            }
            *x = x.clamp(-1.0, 1.0);
        }
        Ok(Self { n, xi })
    }

    /// Infers `n` from the length.
    pub fn from_values(xi: Vec<f64>) -> Result<Self> {
        let n = sites_for_len(xi.len())?;
        Self::new(n, xi)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.n, self.xi.iter().map(|x| x * lambda).collect())
    }
}

/// One weighted vertex of a classical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelWeight {
    pub r: BitString,
    pub sign: Sign,
    pub weight: f64,
}

/// A probability distribution over the vertices `(r, ±)` of the polytope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalModel {
    n: u32,
    weights: Vec<ModelWeight>,
}

impl ClassicalModel {
    pub fn new(weights: Vec<ModelWeight>) -> Result<Self> {
        let first = weights.first().ok_or_else(|| Error::InvalidModel("no weights".into()))?;
        let n = first.r.n();
        let mut total = 0.0;
        for w in &weights {
            if w.r.n() != n {
                return Err(Error::DimensionMismatch { expected: n as usize, actual: w.r.n() as usize });
            }
            if w.weight.is_nan() || w.weight < 0.0 {
                return Err(Error::InvalidModel(format!("negative weight {}", w.weight)));
            }
            total += w.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("weights sum to {total}")));
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn weights(&self) -> &[ModelWeight] {
        &self.weights
    }
}

/// The deterministic vertex `ξ(s) = sign · (-1)^⟨r,s⟩`.
pub fn extreme_point(r: BitString, sign: Sign) -> CorrelationVector {
    let xi = (0..1usize << r.n())
        .map(|s| (sign.value() * character(r.index(), s)) as f64)
        .collect();
    CorrelationVector { n: r.n(), xi }
}

/// The correlation vector of a classical model.
pub fn mix(model: &ClassicalModel) -> CorrelationVector {
    let mut xi = vec![0.0; 1 << model.n];
    for w in &model.weights {
        let a = w.weight * w.sign.value() as f64;
        for (s, x) in xi.iter_mut().enumerate() {
            *x += a * character(w.r.index(), s) as f64;
        }
    }
    CorrelationVector::new(model.n, xi).expect("convex combination of vertices")
}

/// `ξ̂(r) = 2^{-n} Σ_s (-1)^⟨r,s⟩ ξ(s)`.
pub fn spectrum(xi: &CorrelationVector) -> Vec<f64> {
    let mut v = xi.xi.clone();
    walsh_hadamard_in_place(&mut v).expect("power-of-two table");
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

/// `Σ_r |ξ̂(r)|`; the vector admits a classical model iff this is at most 1.
pub fn l1_margin(xi: &CorrelationVector) -> f64 {
    spectrum(xi).iter().map(|x| x.abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub margin: f64,
    pub member: bool,
}

pub fn membership(xi: &CorrelationVector) -> Membership {
    let margin = l1_margin(xi);
    Membership { margin, member: margin <= 1.0 + MEMBERSHIP_TOLERANCE }
}

/// The inequality most violated by `xi`: `f(r) = sign ξ̂(r)`, with `+1` on
/// zero spectrum entries. Its value on `xi` equals [`l1_margin`].
pub fn witness(xi: &CorrelationVector) -> SignTable {
    let hat = spectrum(xi);
    SignTable::from_fn(xi.n, |r| hat[r] >= 0.0).expect("valid site count")
}

/// Decides by linear feasibility whether `xi` is a convex combination of the
/// `2^(n+1)` vertices. Limited to `n ≤ 4`.
pub fn lp_membership(xi: &CorrelationVector) -> Result<bool> {
    let n = xi.n;
    if n > LP_MAX_SITES {
        return Err(Error::SiteCount(n, 1, LP_MAX_SITES));
    }
    let len = 1usize << n;
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..2 * len).map(|_| problem.add_var(0.0, (0.0, f64::INFINITY))).collect();

    let all: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    problem.add_constraint(&all, ComparisonOp::Eq, 1.0);
    for s in 0..len {
        let row: Vec<_> = (0..2 * len)
            .map(|j| {
                let (r, sign) = (j % len, if j < len { 1.0 } else { -1.0 });
                (vars[j], sign * character(r, s) as f64)
            })
            .collect();
        problem.add_constraint(&row, ComparisonOp::Eq, xi.xi[s]);
    }
    match problem.solve() {
        Ok(_) => Ok(true),
        Err(minilp::Error::Infeasible) => Ok(false),
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}
