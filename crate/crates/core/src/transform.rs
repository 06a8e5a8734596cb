//! Bit strings over ℤ₂ⁿ and the Walsh–Hadamard transform.
//!
//! Site `k` (1-based) lives in bit position `k - 1` of every index, for
//! both setting strings `s` and configuration strings `r`.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of sites.
pub const MAX_SITES: u32 = 31;

/// An `n`-bit string; bit `k - 1` is the entry for site `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitString {
    n: u32,
    bits: u32,
}

impl BitString {
    pub fn new(n: u32, bits: u32) -> Result<Self> {
        check_sites(n)?;
        if u64::from(bits) >> n != 0 {
            return Err(Error::BitsOutOfRange { bits, n });
        }
        Ok(Self { n, bits })
    }

    pub fn zero(n: u32) -> Result<Self> {
        Self::new(n, 0)
    }

    /// Builds a bit string from per-site entries `(s_1, ..., s_n)`.
    pub fn from_sites(sites: &[u8]) -> Result<Self> {
        let n = sites.len() as u32;
        check_sites(n)?;
        let mut bits = 0u32;
        for (k, &b) in sites.iter().enumerate() {
            match b {
                0 => {}
                1 => bits |= 1 << k,
                _ => return Err(Error::BitsOutOfRange { bits: u32::from(b), n: 1 }),
            }
        }
        Ok(Self { n, bits })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Entry for site `k` (1-based).
    pub fn site(&self, k: u32) -> u8 {
        ((self.bits >> (k - 1)) & 1) as u8
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        same_sites(self, other)?;
        Ok(Self { n: self.n, bits: self.bits ^ other.bits })
    }
}

fn same_sites(a: &BitString, b: &BitString) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n as usize, actual: b.n as usize });
    }
    Ok(())
}

pub(crate) fn check_sites(n: u32) -> Result<()> {
    if !(1..=MAX_SITES).contains(&n) {
        return Err(Error::SiteCount(n, 1, MAX_SITES));
    }
    Ok(())
}

/// `⟨r, s⟩ = Σ r_k s_k mod 2`.
pub fn parity_inner(r: &BitString, s: &BitString) -> Result<u8> {
    same_sites(r, s)?;
    Ok(parity(r.bits & s.bits))
}

#[inline]
pub(crate) fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// `(-1)^⟨r, s⟩` on raw indices.
#[inline]
pub(crate) fn character(r: usize, s: usize) -> i64 {
    1 - 2 * i64::from(((r & s).count_ones() & 1) as u8)
}

/// Number of sites for a table of the given length.
pub fn sites_for_len(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// In-place unnormalized Walsh–Hadamard transform:
/// `v[r] <- Σ_s (-1)^⟨r,s⟩ v[s]`.
pub fn walsh_hadamard_in_place<T>(v: &mut [T]) -> Result<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    if !v.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(v.len()));
    }
    let mut half = 1;
    while half < v.len() {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Walsh–Hadamard transform returning a new table.
pub fn walsh_hadamard<T>(v: &[T]) -> Result<Vec<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let mut out = v.to_vec();
    walsh_hadamard_in_place(&mut out)?;
    Ok(out)
}

/// A table of dyadic rationals `numerators[s] / 2^log_denominator`, kept
/// with the smallest possible denominator exponent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicVector {
    n: u32,
    numerators: Vec<i64>,
    log_denominator: u32,
}

impl DyadicVector {
    pub fn new(numerators: Vec<i64>, log_denominator: u32) -> Result<Self> {
        let n = sites_for_len(numerators.len())?;
        if log_denominator > 62 {
            return Err(Error::Overflow("dyadic denominator"));
        }
        let mut v = Self { n, numerators, log_denominator };
        v.reduce();
        Ok(v)
    }

    pub fn zeros(n: u32) -> Result<Self> {
        check_sites(n)?;
        Ok(Self { n, numerators: vec![0; 1 << n], log_denominator: 0 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn log_denominator(&self) -> u32 {
        self.log_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(|&x| x == 0)
    }

    pub fn value(&self, index: usize) -> f64 {
        self.numerators[index] as f64 / (1u64 << self.log_denominator) as f64
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let scale = (1u64 << self.log_denominator) as f64;
        self.numerators.iter().map(|&x| x as f64 / scale).collect()
    }

    fn reduce(&mut self) {
        if self.is_zero() {
            self.log_denominator = 0;
            return;
        }
        let shift = self
            .numerators
            .iter()
            .filter(|&&x| x != 0)
            .map(|x| x.trailing_zeros())
            .min()
            .unwrap_or(0)
            .min(self.log_denominator);
        if shift > 0 {
            for x in &mut self.numerators {
                *x >>= shift;
            }
            self.log_denominator -= shift;
        }
    }
}
