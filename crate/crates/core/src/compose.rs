//! Building inequalities by substituting Bell polynomials into the observable
//! slots of another, and the inverse: splitting any extremal inequality into
//! a CHSH polynomial in the last site whose two slots are `(n-1)`-site
//! inequalities.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{signs_from_coefficients, BellTable};
use crate::transform::MAX_SITES;

fn require_extremal(beta: &BellTable) -> Result<()> {
    signs_from_coefficients(beta).map(|_| ())
}

/// Replaces observable `A_k(c)` of `outer` by the polynomial `slots[2k + c]`
/// (0-based `k`) and expands the result into a flat table. Outer site `k`
/// becomes the `k`-th block of consecutive sites in the result; both slots
/// of an outer site must cover the same number of sites.
pub fn substitute(outer: &BellTable, slots: &[BellTable]) -> Result<BellTable> {
    let k_sites = outer.n() as usize;
    if slots.len() != 2 * k_sites {
        return Err(Error::DimensionMismatch { expected: 2 * k_sites, actual: slots.len() });
    }
    require_extremal(outer)?;
    for slot in slots {
        require_extremal(slot)?;
    }

    let mut widths = Vec::with_capacity(k_sites);
    let mut offsets = Vec::with_capacity(k_sites);
    let mut total = 0u32;
    for pair in slots.chunks_exact(2) {
        if pair[0].n() != pair[1].n() {
            return Err(Error::DimensionMismatch { expected: pair[0].n() as usize, actual: pair[1].n() as usize });
        }
        offsets.push(total);
        widths.push(pair[0].n());
        total += pair[0].n();
    }
    if total > MAX_SITES {
        return Err(Error::SiteCount(total, 1, MAX_SITES));
    }

    // Bring both slots of each outer site to a common denominator.
    let mut log_den = outer.log_denominator();
    let mut aligned: Vec<[Vec<i128>; 2]> = Vec::with_capacity(k_sites);
    for pair in slots.chunks_exact(2) {
        let d = pair[0].log_denominator().max(pair[1].log_denominator());
        let scale = |t: &BellTable| -> Vec<i128> {
            t.numerators().iter().map(|&x| i128::from(x) << (d - t.log_denominator())).collect()
        };
        aligned.push([scale(&pair[0]), scale(&pair[1])]);
        log_den += d;
    }
    if log_den > 120 {
        return Err(Error::Overflow("substitution denominator"));
    }

    let outer_terms: Vec<(usize, i128)> = outer
        .numerators()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .map(|(s, &b)| (s, i128::from(b)))
        .collect();
    let mut result = vec![0i128; 1usize << total];
    for (t, out) in result.iter_mut().enumerate() {
        let blocks: Vec<usize> = offsets
            .iter()
            .zip(&widths)
            .map(|(&o, &w)| (t >> o) & ((1usize << w) - 1))
            .collect();
        *out = outer_terms
            .iter()
            .map(|&(s, b)| {
                (0..k_sites).fold(b, |acc, k| {
                    let choice = (s >> k) & 1;
                    if acc == 0 {
                        0
                    } else {
                        acc * aligned[k][choice][blocks[k]]
                    }
                })
            })
            .sum();
    }
    from_wide(result, log_den)
}

/// Reduces a wide dyadic table and narrows it to the stored representation.
fn from_wide(mut nums: Vec<i128>, mut log_den: u32) -> Result<BellTable> {
    let shift = nums
        .iter()
        .filter(|&&x| x != 0)
        .map(|x| x.trailing_zeros())
        .min()
        .unwrap_or(log_den)
        .min(log_den);
    if shift > 0 {
        nums.iter_mut().for_each(|x| *x >>= shift);
        log_den -= shift;
    }
    let narrow = nums
        .into_iter()
        .map(|x| i64::try_from(x).map_err(|_| Error::Overflow("coefficient numerator")))
        .collect::<Result<Vec<_>>>()?;
    BellTable::from_numerators(narrow, log_den)
}

/// The observable `±A(choice)` on a single site.
pub fn single_site(choice: u8, sign: i64) -> BellTable {
    let mut v = vec![0, 0];
    v[usize::from(choice & 1)] = sign.signum();
    BellTable::from_numerators(v, 0).expect("two entries")
}

/// Slot wiring under which `substitute(&BellTable::chsh(), ..)` rebuilds the
/// table that [`chsh_decompose`] split into `(b0, b1)`.
pub fn chsh_shell_slots(b0: &BellTable, b1: &BellTable) -> [BellTable; 4] {
    [b0.clone(), b1.clone(), single_site(0, 1), single_site(1, 1)]
}

/// Splits off the last site:
/// `β₀(s̃) = β(s̃,0) + β(s̃,1)`, `β₁(s̃) = β(s̃,0) - β(s̃,1)`, so that
/// `B = ½ B₀ (A_n(0) + A_n(1)) + ½ B₁ (A_n(0) - A_n(1))`.
pub fn chsh_decompose(beta: &BellTable) -> Result<(BellTable, BellTable)> {
    let n = beta.n();
    if n < 2 {
        return Err(Error::SiteCount(n, 2, MAX_SITES));
    }
    require_extremal(beta)?;
    let half = 1usize << (n - 1);
    let (lo, hi) = beta.numerators().split_at(half);
    let sum = lo.iter().zip(hi).map(|(a, b)| a + b).collect();
    let diff = lo.iter().zip(hi).map(|(a, b)| a - b).collect();
    let d = beta.log_denominator();
    Ok((BellTable::from_numerators(sum, d)?, BellTable::from_numerators(diff, d)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NestOp {
    Chsh,
}

/// A Bell polynomial written as nested CHSH substitutions.
///
/// `Chsh { site, a0, a1 }` stands for `½ a0 (A(0) + A(1)) + ½ a1 (A(0) - A(1))`
/// with `A` the observables of `site`, and `a0`, `a1` polynomials on sites
/// `1..site`. A leaf is the single observable `sign · A_site(choice)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NestingTree {
    Chsh {
        op: NestOp,
        site: u32,
        a0: Box<NestingTree>,
        a1: Box<NestingTree>,
    },
    Leaf {
        site: u32,
        choice: u8,
        sign: i8,
    },
}

impl NestingTree {
    /// Number of sites the polynomial acts on.
    pub fn sites(&self) -> u32 {
        match self {
            NestingTree::Chsh { site, .. } | NestingTree::Leaf { site, .. } => *site,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            NestingTree::Leaf { .. } => 0,
            NestingTree::Chsh { a0, a1, .. } => 1 + a0.depth().max(a1.depth()),
        }
    }

    /// Expands the tree back into a coefficient table by substitution.
    pub fn evaluate(&self) -> Result<BellTable> {
        match self {
            NestingTree::Leaf { site, choice, sign } => {
                if *site != 1 || *choice > 1 || sign.abs() != 1 {
                    return Err(Error::Parse(format!("malformed leaf {self:?}")));
                }
                Ok(single_site(*choice, i64::from(*sign)))
            }
            NestingTree::Chsh { site, a0, a1, .. } => {
                if a0.sites() + 1 != *site || a1.sites() + 1 != *site {
                    return Err(Error::Parse(format!("CHSH node on site {site} has mismatched children")));
                }
                substitute(&BellTable::chsh(), &chsh_shell_slots(&a0.evaluate()?, &a1.evaluate()?))
            }
        }
    }
}

impl fmt::Display for NestingTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NestingTree::Leaf { choice, sign, .. } => {
                write!(f, "{}a{}", if *sign < 0 { "-" } else { "" }, choice + 1)
            }
            NestingTree::Chsh { site, a0, a1, .. } => write!(f, "chsh{site}({a0}, {a1})"),
        }
    }
}

/// Decomposes an extremal table all the way down to single sites.
pub fn full_nesting(beta: &BellTable) -> Result<NestingTree> {
    require_extremal(beta)?;
    nest(beta)
}

fn nest(beta: &BellTable) -> Result<NestingTree> {
    if beta.n() == 1 {
        let (choice, sign) = match beta.numerators() {
            [x, 0] if x.abs() == 1 && beta.log_denominator() == 0 => (0, *x as i8),
            [0, x] if x.abs() == 1 && beta.log_denominator() == 0 => (1, *x as i8),
            _ => unreachable!("extremal single-site table"),
        };
        return Ok(NestingTree::Leaf { site: 1, choice, sign });
    }
    let (b0, b1) = chsh_decompose(beta)?;
    Ok(NestingTree::Chsh {
        op: NestOp::Chsh,
        site: beta.n(),
        a0: Box::new(nest(&b0)?),
        a1: Box::new(nest(&b1)?),
    })
}
