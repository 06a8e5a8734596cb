//! Extremal Bell correlation inequalities: sign tables, dyadic coefficient
//! tables, the integer numbering, evaluation and the polynomial notation.
//!
//! An inequality `Σ_s β(s) ξ(s) ≤ 1` is extremal exactly when the transform
//! `f(r) = Σ_s β(s) (-1)^⟨r,s⟩` takes only the values ±1. The sign table `f`
//! is packed into bits (set bit = -1), and that bit pattern read as a binary
//! number is the inequality's id: bit `r` of the id is the digit for
//! configuration `r`, with 0 meaning `f(r) = +1`.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::classical::CorrelationVector;
use crate::error::{Error, Result};
use crate::transform::{check_sites, walsh_hadamard, walsh_hadamard_in_place, DyadicVector};

/// Site count above which polynomials are printed as `A{k}({s_k})`.
pub const LETTER_SITES: u32 = 26;

/// A table of `2^n` signs `f(r) ∈ {+1, -1}`, packed 64 per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignTable {
    n: u32,
    words: Vec<u64>,
}

fn word_count(n: u32) -> usize {
    (1usize << n).div_ceil(64)
}

/// Mask of the valid bits of a single-word table with `n ≤ 6` sites.
pub(crate) fn low_mask(n: u32) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n)) - 1
    }
}

impl SignTable {
    /// Validates and packs `signs[r]`, which must all be ±1.
    pub fn new(n: u32, signs: &[i64]) -> Result<Self> {
        check_sites(n)?;
        if signs.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, actual: signs.len() });
        }
        let mut words = vec![0u64; word_count(n)];
        for (r, &v) in signs.iter().enumerate() {
            match v {
                1 => {}
                -1 => words[r / 64] |= 1 << (r % 64),
                _ => return Err(Error::InvalidSign { index: r, value: v }),
            }
        }
        Ok(Self { n, words })
    }

    pub fn from_fn(n: u32, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        check_sites(n)?;
        let mut words = vec![0u64; word_count(n)];
        for r in 0..1usize << n {
            if !f(r) {
                words[r / 64] |= 1 << (r % 64);
            }
        }
        Ok(Self { n, words })
    }

    /// All-(+1) table.
    pub fn constant(n: u32) -> Result<Self> {
        Self::from_fn(n, |_| true)
    }

    /// Single-word constructor for `n ≤ 6`; bits above `2^n` are ignored.
    pub fn from_word(n: u32, word: u64) -> Result<Self> {
        if !(1..=6).contains(&n) {
            return Err(Error::SiteCount(n, 1, 6));
        }
        Ok(Self { n, words: vec![word & low_mask(n)] })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `f(r)` as ±1.
    pub fn get(&self, r: usize) -> i64 {
        if (self.words[r / 64] >> (r % 64)) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn signs(&self) -> Vec<i64> {
        (0..self.len()).map(|r| self.get(r)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The packed table for `n ≤ 6`.
    pub fn word(&self) -> Option<u64> {
        (self.n <= 6).then(|| self.words[0])
    }

    pub fn negated(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if self.n < 6 {
            words[0] &= low_mask(self.n);
        }
        Self { n: self.n, words }
    }
}

/// Coefficients `β(s)` of a Bell polynomial, exact dyadic rationals.
///
/// Zero and non-extremal tables are representable; only extremal ones
/// correspond to sign tables and ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BellTableJson", into = "BellTableJson")]
pub struct BellTable {
    coefficients: DyadicVector,
}

#[derive(Serialize, Deserialize)]
struct BellTableJson {
    n: u32,
    log_denominator: u32,
    numerators: Vec<i64>,
}

impl TryFrom<BellTableJson> for BellTable {
    type Error = Error;

    fn try_from(j: BellTableJson) -> Result<Self> {
        check_sites(j.n)?;
        if j.numerators.len() != 1 << j.n {
            return Err(Error::DimensionMismatch { expected: 1 << j.n, actual: j.numerators.len() });
        }
        Ok(Self::new(DyadicVector::new(j.numerators, j.log_denominator)?))
    }
}

impl From<BellTable> for BellTableJson {
    fn from(t: BellTable) -> Self {
        Self {
            n: t.n(),
            log_denominator: t.coefficients.log_denominator(),
            numerators: t.coefficients.numerators().to_vec(),
        }
    }
}

impl BellTable {
    pub fn new(coefficients: DyadicVector) -> Self {
        Self { coefficients }
    }

    pub fn from_numerators(numerators: Vec<i64>, log_denominator: u32) -> Result<Self> {
        Ok(Self::new(DyadicVector::new(numerators, log_denominator)?))
    }

    /// The single-term polynomial `Π_k A_k(s_k)`.
    pub fn monomial(n: u32, s: usize) -> Result<Self> {
        let mut v = vec![0i64; 1 << n];
        *v.get_mut(s).ok_or(Error::DimensionMismatch { expected: 1 << n, actual: s })? = 1;
        Self::from_numerators(v, 0)
    }

    /// The CHSH polynomial `½(a1 b1 + a2 b1 + a1 b2 - a2 b2)`.
    pub fn chsh() -> Self {
        Self::from_numerators(vec![1, 1, 1, -1], 1).expect("static table")
    }

    pub fn n(&self) -> u32 {
        self.coefficients.n()
    }

    pub fn coefficients(&self) -> &DyadicVector {
        &self.coefficients
    }

    pub fn numerators(&self) -> &[i64] {
        self.coefficients.numerators()
    }

    pub fn log_denominator(&self) -> u32 {
        self.coefficients.log_denominator()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients.to_f64()
    }

    pub fn is_extremal(&self) -> bool {
        signs_from_coefficients(self).is_ok()
    }

    pub fn negated(&self) -> Self {
        let nums = self.numerators().iter().map(|x| -x).collect();
        Self::from_numerators(nums, self.log_denominator()).expect("same shape")
    }
}

/// The numbering of an extremal inequality: an integer below `2^(2^n)`.
/// Serialized as `{"n": .., "value": "<decimal>"}` since the value can exceed
/// 64 bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "IdJson", into = "IdJson")]
pub struct InequalityId {
    n: u32,
    value: BigUint,
}

impl InequalityId {
    pub fn new(n: u32, value: BigUint) -> Result<Self> {
        check_sites(n)?;
        if value.bits() > 1u64 << n {
            return Err(Error::IdOutOfRange { n });
        }
        Ok(Self { n, value })
    }

    pub fn from_u64(n: u32, value: u64) -> Result<Self> {
        Self::new(n, BigUint::from(value))
    }

    pub fn parse(n: u32, text: &str) -> Result<Self> {
        let value = text
            .trim()
            .parse::<BigUint>()
            .map_err(|e| Error::Parse(format!("inequality id {text:?}: {e}")))?;
        Self::new(n, value)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// The id as a machine word, when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        let digits = self.value.to_u64_digits();
        match digits.len() {
            0 => Some(0),
            1 => Some(digits[0]),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct IdJson {
    n: u32,
    value: String,
}

impl TryFrom<IdJson> for InequalityId {
    type Error = Error;

    fn try_from(j: IdJson) -> Result<Self> {
        Self::parse(j.n, &j.value)
    }
}

impl From<InequalityId> for IdJson {
    fn from(id: InequalityId) -> Self {
        IdJson { n: id.n, value: id.value.to_string() }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

/// `β(s) = 2^{-n} Σ_r f(r) (-1)^⟨r,s⟩`, exact.
pub fn coefficients_from_signs(f: &SignTable) -> BellTable {
    let v = walsh_hadamard(&f.signs()).expect("power-of-two table");
    BellTable::new(DyadicVector::new(v, f.n()).expect("valid dyadic table"))
}

/// Recovers `f(r) = Σ_s β(s) (-1)^⟨r,s⟩`; fails unless every value is ±1.
pub fn signs_from_coefficients(beta: &BellTable) -> Result<SignTable> {
    let mut v: Vec<i128> = beta.numerators().iter().map(|&x| i128::from(x)).collect();
    walsh_hadamard_in_place(&mut v)?;
    let one = 1i128 << beta.log_denominator();
    let mut signs = Vec::with_capacity(v.len());
    for (r, &x) in v.iter().enumerate() {
        if x == one {
            signs.push(1);
        } else if x == -one {
            signs.push(-1);
        } else {
            return Err(Error::NotExtremal {
                index: r,
                value: format_rational(x, beta.log_denominator()),
            });
        }
    }
    SignTable::new(beta.n(), &signs)
}

pub fn id_to_signs(id: &InequalityId) -> SignTable {
    let n = id.n();
    let mut words = vec![0u64; word_count(n)];
    for (w, d) in words.iter_mut().zip(id.value().to_u64_digits()) {
        *w = d;
    }
    SignTable { n, words }
}

pub fn signs_to_id(f: &SignTable) -> InequalityId {
    let digits: Vec<u32> = f.words().iter().flat_map(|&w| [w as u32, (w >> 32) as u32]).collect();
    InequalityId { n: f.n(), value: BigUint::new(digits) }
}

/// The maximally violated (Mermin) table used as the reference member of the
/// Mermin orbit: `f(r) = +1` iff the weight of `r` is 1 or 2 mod 4.
pub fn mermin_signs(n: u32) -> Result<SignTable> {
    SignTable::from_fn(n, |r| matches!(r.count_ones() % 4, 1 | 2))
}

/// `Σ_s β(s) ξ(s)`.
pub fn evaluate(beta: &BellTable, xi: &CorrelationVector) -> Result<f64> {
    if beta.n() != xi.n() {
        return Err(Error::DimensionMismatch { expected: 1 << beta.n(), actual: xi.len() });
    }
    let scale = (1u64 << beta.log_denominator()) as f64;
    let sum: f64 = beta
        .numerators()
        .iter()
        .zip(xi.values())
        .map(|(&b, &x)| b as f64 * x)
        .sum();
    Ok(sum / scale)
}

fn format_rational(num: i128, log_den: u32) -> String {
    let shift = if num == 0 { log_den } else { num.trailing_zeros().min(log_den) };
    let (p, q) = (num >> shift, 1u128 << (log_den - shift));
    if q == 1 {
        format!("{p}")
    } else {
        format!("{p}/{q}")
    }
}

fn site_factor(n: u32, k: u32, choice: u8) -> String {
    if n <= LETTER_SITES {
        format!("{}{}", (b'a' + (k - 1) as u8) as char, choice + 1)
    } else {
        format!("A{k}({choice})")
    }
}

/// Settings `s` in reading order: lexicographic in `(s_1, ..., s_n)`.
fn reading_order(n: u32) -> impl Iterator<Item = usize> {
    (0..1usize << n).map(move |i| i.reverse_bits() >> (usize::BITS - n))
}

/// Renders `Σ β(s) Π_k x_k(s_k)` with site letters `a, b, c, ...` and
/// subscripts `s_k + 1`; zero terms are dropped.
pub fn polynomial_string(beta: &BellTable) -> String {
    let n = beta.n();
    let d = beta.log_denominator();
    let mut out = String::new();
    for s in reading_order(n) {
        let num = beta.numerators()[s];
        if num == 0 {
            continue;
        }
        let magnitude = format_rational(i128::from(num.abs()), d);
        match (out.is_empty(), num < 0) {
            (true, false) => {}
            (true, true) => out.push('-'),
            (false, false) => out.push_str(" + "),
            (false, true) => out.push_str(" - "),
        }
        if magnitude != "1" {
            out.push_str(&magnitude);
            out.push(' ');
        }
        let factors: Vec<String> =
            (1..=n).map(|k| site_factor(n, k, ((s >> (k - 1)) & 1) as u8)).collect();
        out.push_str(&factors.join(" "));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn parse_factor(n: u32, tok: &str) -> Option<(u32, u8)> {
    if let Some(rest) = tok.strip_prefix('A') {
        let (k, c) = rest.strip_suffix(')')?.split_once('(')?;
        let (k, c) = (k.parse::<u32>().ok()?, c.parse::<u8>().ok()?);
        return (c <= 1 && (1..=n).contains(&k)).then_some((k, c));
    }
    let mut chars = tok.chars();
    let letter = chars.next()?;
    if !letter.is_ascii_lowercase() {
        return None;
    }
    let k = u32::from(letter as u8 - b'a') + 1;
    let c = chars.as_str().parse::<u8>().ok()?;
    ((1..=2).contains(&c) && k <= n).then_some((k, c - 1))
}

fn parse_coefficient(tok: &str) -> Option<(i64, u32)> {
    let (p, q) = match tok.split_once('/') {
        Some((p, q)) => (p.parse::<i64>().ok()?, q.parse::<u64>().ok()?),
        None => (tok.parse::<i64>().ok()?, 1),
    };
    (q.is_power_of_two() && q.trailing_zeros() <= 62).then_some((p, q.trailing_zeros()))
}

/// Parses the notation produced by [`polynomial_string`] (terms may come in
/// any order; repeated settings are summed). Coefficients must be dyadic.
pub fn parse_polynomial(n: u32, text: &str) -> Result<BellTable> {
    check_sites(n)?;
    let err = |m: String| Error::Parse(m);
    let mut terms: Vec<(i64, u32, usize)> = Vec::new();
    let mut sign = 1i64;
    let mut coef: Option<(i64, u32)> = None;
    let mut setting = 0usize;
    let mut seen = 0u32;

    let mut flush = |sign: &mut i64, coef: &mut Option<(i64, u32)>, setting: &mut usize, seen: &mut u32| -> Result<()> {
        if *seen == 0 && coef.is_none() {
            return Ok(());
        }
        let (p, d) = coef.take().unwrap_or((1, 0));
        if *seen == 0 {
            if p != 0 {
                return Err(err(format!("constant term {p} has no observables")));
            }
        } else if seen.count_ones() != n {
            return Err(err(format!("term does not name all {n} sites")));
        } else {
            terms.push((*sign * p, d, *setting));
        }
        *sign = 1;
        *setting = 0;
        *seen = 0;
        Ok(())
    };

    for tok in text.split_whitespace() {
        match tok {
            "+" | "-" => {
                flush(&mut sign, &mut coef, &mut setting, &mut seen)?;
                if tok == "-" {
                    sign = -1;
                }
            }
            _ => {
                let (neg, body) = match tok.strip_prefix('-') {
                    Some(b) if seen == 0 => (true, b),
                    _ => (false, tok),
                };
                if neg && coef.is_some() {
                    return Err(err(format!("unexpected sign in {tok:?}")));
                }
                if neg {
                    sign = -sign;
                }
                if let Some((k, c)) = parse_factor(n, body) {
                    if seen & (1 << (k - 1)) != 0 {
                        return Err(err(format!("site {k} repeated in a term")));
                    }
                    seen |= 1 << (k - 1);
                    setting |= usize::from(c) << (k - 1);
                } else if let Some(c) = parse_coefficient(body) {
                    if coef.is_some() || seen != 0 {
                        return Err(err(format!("misplaced coefficient {tok:?}")));
                    }
                    coef = Some(c);
                } else {
                    return Err(err(format!("unrecognized token {tok:?}")));
                }
            }
        }
    }
    flush(&mut sign, &mut coef, &mut setting, &mut seen)?;

    let d = terms.iter().map(|t| t.1).max().unwrap_or(0);
    let mut nums = vec![0i64; 1 << n];
    for (p, dt, s) in terms {
        let scaled = p.checked_shl(d - dt).filter(|v| v >> (d - dt) == p);
        let scaled = scaled.ok_or(Error::Overflow("polynomial coefficient"))?;
        nums[s] = nums[s].checked_add(scaled).ok_or(Error::Overflow("polynomial coefficient"))?;
    }
    BellTable::from_numerators(nums, d)
}
