//! The symmetry group of the inequality family and its orbits.
//!
//! A group element relabels the two observables at chosen sites (`r0`),
//! flips the outcome sign of the second observable at chosen sites (`s0`),
//! permutes the sites, and may flip the overall sign. On sign tables it acts
//! as `f'(r) = global · (-1)^⟨s0, P r⟩ · f(P r ⊕ r0)`, where `P` moves the bit
//! of site `k` to the position of site `perm[k]`.

use std::collections::HashSet;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::Sign;
use crate::error::{Error, Result};
use crate::inequality::{id_to_signs, low_mask, InequalityId, SignTable};
use crate::transform::{check_sites, parity};

/// Largest site count for single-table orbit sweeps.
pub const ORBIT_MAX_SITES: u32 = 6;

/// Largest site count for the exhaustive census.
pub const CENSUS_MAX_SITES: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    /// `perm[k]` is the (0-based) image of site `k + 1`.
    pub perm: Vec<usize>,
    /// Observable swaps.
    pub r0: u32,
    /// Outcome sign flips.
    pub s0: u32,
    pub global: Sign,
}

impl GroupElement {
    pub fn new(perm: Vec<usize>, r0: u32, s0: u32, global: Sign) -> Result<Self> {
        let n = perm.len() as u32;
        check_sites(n)?;
        let mut hit = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut hit[p], true) {
                return Err(Error::InvalidPermutation(perm));
            }
        }
        for bits in [r0, s0] {
            if u64::from(bits) >> n != 0 {
                return Err(Error::BitsOutOfRange { bits, n });
            }
        }
        Ok(Self { perm, r0, s0, global })
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::new((0..n as usize).collect(), 0, 0, Sign::Plus)
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n as usize).collect();
        perm.shuffle(rng);
        let mask = ((1u64 << n) - 1) as u32;
        let global = if rng.gen() { Sign::Plus } else { Sign::Minus };
        Self::new(perm, rng.gen::<u32>() & mask, rng.gen::<u32>() & mask, global)
    }

    pub fn n(&self) -> u32 {
        self.perm.len() as u32
    }

    /// `P r`.
    pub fn permute_bits(&self, r: u32) -> u32 {
        self.perm
            .iter()
            .enumerate()
            .filter(|(k, _)| (r >> k) & 1 == 1)
            .fold(0, |acc, (_, &p)| acc | 1 << p)
    }

    pub fn apply(&self, f: &SignTable) -> Result<SignTable> {
        if f.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n() as usize, actual: f.n() as usize });
        }
        let flip = self.global == Sign::Minus;
        SignTable::from_fn(f.n(), |r| {
            let pr = self.permute_bits(r as u32);
            let negative = (f.get((pr ^ self.r0) as usize) < 0) ^ (parity(self.s0 & pr) == 1) ^ flip;
            !negative
        })
    }

    /// The product `self · other`, acting as `other` first, then `self`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n() as usize, actual: other.n() as usize });
        }
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let r0 = other.permute_bits(self.r0) ^ other.r0;
        let s0 = other.permute_bits(self.s0) ^ other.s0;
        let mut global = if self.global == other.global { Sign::Plus } else { Sign::Minus };
        if parity(other.s0 & other.permute_bits(self.r0)) == 1 {
            global = global.flip();
        }
        GroupElement::new(perm, r0, s0, global)
    }

    pub fn inverse(&self) -> GroupElement {
        let mut inv = vec![0; self.perm.len()];
        for (k, &p) in self.perm.iter().enumerate() {
            inv[p] = k;
        }
        let inv_el = GroupElement { perm: inv, r0: 0, s0: 0, global: Sign::Plus };
        let r0 = inv_el.permute_bits(self.r0);
        let s0 = inv_el.permute_bits(self.s0);
        let global = if parity(self.s0 & self.r0) == 1 { self.global.flip() } else { self.global };
        GroupElement { perm: inv_el.perm, r0, s0, global }
    }
}

/// `|G| = n! · 2^(2n+1)`.
pub fn group_order(n: u32) -> BigUint {
    let factorial: BigUint = (1..=u64::from(n)).product();
    factorial << (2 * n as usize + 1)
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

/// Block masks for translating packed tables: bit `r` of `SWAP_MASKS[j]` is
/// set iff bit `j` of `r` is clear.
const SWAP_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// `r ↦ f(r ⊕ 2^j)` on a packed table.
#[inline]
fn translate_bit(word: u64, j: usize) -> u64 {
    let m = SWAP_MASKS[j];
    let w = 1u32 << j;
    ((word & m) << w) | ((word >> w) & m)
}

/// `r ↦ f(P r)` on a packed table.
fn permute_word(n: u32, word: u64, perm: &[usize]) -> u64 {
    let mut out = 0u64;
    for r in 0..1u32 << n {
        let pr = perm.iter().enumerate().filter(|(k, _)| (r >> k) & 1 == 1).fold(0u32, |a, (_, &p)| a | 1 << p);
        out |= ((word >> pr) & 1) << r;
    }
    out
}

/// Packed characters `r ↦ ⟨t, r⟩ mod 2` for every `t`.
fn characters(n: u32) -> Vec<u64> {
    (0..1u32 << n)
        .map(|t| (0..1u32 << n).fold(0u64, |acc, r| acc | u64::from(parity(t & r)) << r))
        .collect()
}

/// Every table symmetric under site permutations, i.e. depending only on the
/// weight of `r`.
fn symmetric_words(n: u32) -> Vec<u64> {
    (0..1u64 << (n + 1))
        .map(|pattern| (0..1u32 << n).fold(0u64, |acc, r| acc | ((pattern >> r.count_ones()) & 1) << r))
        .collect()
}

/// The orbit of a packed table, sorted ascending.
fn orbit_words(n: u32, word: u64) -> Vec<u64> {
    let chars = characters(n);
    let full = low_mask(n);
    let mut seen: HashSet<u64> = HashSet::new();
    for perm in permutations(n as usize) {
        // Every element can be written as f ↦ c ⊕ χ_t ⊕ T_{r0}(f ∘ P).
        let mut w = permute_word(n, word, &perm);
        for step in 0..1u32 << n {
            if step > 0 {
                // Gray-code walk over r0: one bit changes per step.
                w = translate_bit(w, step.trailing_zeros() as usize);
            }
            for &chi in &chars {
                seen.insert(w ^ chi);
                seen.insert(w ^ chi ^ full);
            }
        }
    }
    let mut members: Vec<u64> = seen.into_iter().collect();
    members.sort_unstable();
    members
}

/// All members of one orbit, for `n ≤ 6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    n: u32,
    members: Vec<u64>,
}

impl Orbit {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.members.len() as u64
    }

    /// The smallest id in the orbit.
    pub fn canonical_id(&self) -> InequalityId {
        InequalityId::from_u64(self.n, self.members[0]).expect("in range")
    }

    pub fn contains(&self, f: &SignTable) -> bool {
        f.n() == self.n && f.word().is_some_and(|w| self.members.binary_search(&w).is_ok())
    }

    pub fn members(&self) -> impl Iterator<Item = SignTable> + '_ {
        self.members.iter().map(move |&w| SignTable::from_word(self.n, w).expect("n <= 6"))
    }

    pub fn has_permutation_symmetric_member(&self) -> bool {
        symmetric_words(self.n).iter().any(|w| self.members.binary_search(w).is_ok())
    }
}

/// Sweeps the whole group over `f` (`n ≤ 6`).
pub fn orbit(f: &SignTable) -> Result<Orbit> {
    let n = f.n();
    if n > ORBIT_MAX_SITES {
        return Err(Error::SiteCount(n, 1, ORBIT_MAX_SITES));
    }
    let word = f.word().expect("n <= 6");
    Ok(Orbit { n, members: orbit_words(n, word) })
}

/// Whether `f` is unchanged by every site permutation.
pub fn is_permutation_symmetric(f: &SignTable) -> bool {
    (0..f.len()).all(|r| {
        // the weight-sorted representative of r
        let w = (r as u32).count_ones();
        f.get(r) == f.get(((1u64 << w) - 1) as usize)
    })
}

/// Whether the Bell polynomial of `f` is a product over a nontrivial split
/// of the sites, i.e. `f(r) = f(r_S) f(r_{S^c}) f(0)` for some proper `S`.
pub fn is_factorizing(f: &SignTable) -> bool {
    let n = f.n();
    let all = (1usize << n) - 1;
    // S always contains site 1; S = all sites is excluded.
    (0..1usize << (n - 1)).map(|t| (t << 1) | 1).filter(|&s| s != all).any(|s| {
        (0..f.len()).all(|r| f.get(r) == f.get(r & s) * f.get(r & !s & all) * f.get(0))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub n: u32,
    pub canonical_id: InequalityId,
    pub size: u64,
    pub permutation_invariant: bool,
    pub factorizing: bool,
    /// Maximal quantum violation, when computed.
    pub max_violation: Option<f64>,
}

impl OrbitRecord {
    fn from_orbit(orbit: &Orbit) -> Self {
        let canonical_id = orbit.canonical_id();
        Self {
            n: orbit.n,
            size: orbit.size(),
            permutation_invariant: orbit.has_permutation_symmetric_member(),
            factorizing: is_factorizing(&id_to_signs(&canonical_id)),
            canonical_id,
            max_violation: None,
        }
    }

    /// Flag suffix in the `p`/`f` notation, e.g. `"p,f"`.
    pub fn flag_label(&self) -> String {
        let mut flags = Vec::new();
        if self.permutation_invariant {
            flags.push("p");
        }
        if self.factorizing {
            flags.push("f");
        }
        flags.join(",")
    }
}

/// Summarizes the orbit of a single table.
pub fn orbit_record(f: &SignTable) -> Result<OrbitRecord> {
    Ok(OrbitRecord::from_orbit(&orbit(f)?))
}

/// Partitions all `2^(2^n)` tables into orbits (`n ≤ 4`), sorted by
/// canonical id.
pub fn classify_all(n: u32) -> Result<Vec<OrbitRecord>> {
    check_sites(n)?;
    if n > CENSUS_MAX_SITES {
        return Err(Error::SiteCount(n, 1, CENSUS_MAX_SITES));
    }
    let total = 1usize << (1 << n);
    let mut seen = vec![false; total];
    let mut records = Vec::new();
    for id in 0..total {
        if seen[id] {
            continue;
        }
        let orbit = Orbit { n, members: orbit_words(n, id as u64) };
        for &m in &orbit.members {
            seen[m as usize] = true;
        }
        records.push(OrbitRecord::from_orbit(&orbit));
    }
    Ok(records)
}

/// Whether the orbit of `rec` contains a permutation-symmetric table.
pub fn is_permutation_invariant_orbit(rec: &OrbitRecord) -> Result<bool> {
    Ok(orbit(&id_to_signs(&rec.canonical_id))?.has_permutation_symmetric_member())
}

/// The canonical id of the orbit containing `f`.
pub fn canonical_id(f: &SignTable) -> Result<InequalityId> {
    Ok(orbit(f)?.canonical_id())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn table(n: u32, id: u64) -> SignTable {
        SignTable::from_word(n, id).unwrap()
    }

    /// Orbit by applying every group element explicitly.
    fn brute_orbit(f: &SignTable) -> BTreeSet<u64> {
        let n = f.n();
        let mut out = BTreeSet::new();
        for perm in permutations(n as usize) {
            for r0 in 0..1u32 << n {
                for s0 in 0..1u32 << n {
                    for global in [Sign::Plus, Sign::Minus] {
                        let g = GroupElement::new(perm.clone(), r0, s0, global).unwrap();
                        out.insert(g.apply(f).unwrap().word().unwrap());
                    }
                }
            }
        }
        out
    }

    #[test]
    fn orders() {
        let orders: Vec<u64> = (2..=5).map(|n| group_order(n).try_into().unwrap()).collect();
        assert_eq!(orders, vec![64, 768, 12288, 245760]);
    }

    #[test]
    fn apply_examples() {
        let chsh = SignTable::new(2, &[1, 1, 1, -1]).unwrap();
        assert_eq!(GroupElement::identity(2).unwrap().apply(&chsh).unwrap(), chsh);
        let neg = GroupElement::new(vec![0, 1], 0, 0, Sign::Minus).unwrap();
        assert_eq!(neg.apply(&chsh).unwrap(), chsh.negated());
        let swap = GroupElement::new(vec![0, 1], 0b11, 0, Sign::Plus).unwrap();
        assert_eq!(swap.apply(&chsh).unwrap().signs(), vec![-1, 1, 1, 1]);
        assert!(swap.apply(&table(3, 0)).is_err());
    }

    #[test]
    fn element_validation() {
        assert!(GroupElement::new(vec![0, 0], 0, 0, Sign::Plus).is_err());
        assert!(GroupElement::new(vec![0, 2], 0, 0, Sign::Plus).is_err());
        assert!(GroupElement::new(vec![0, 1], 4, 0, Sign::Plus).is_err());
    }

    #[test]
    fn fast_orbit_matches_brute_force() {
        for (n, ids) in [(2u32, vec![0u64, 1, 7, 9]), (3, vec![0, 1, 3, 6, 23, 200])] {
            for id in ids {
                let f = table(n, id);
                let fast: BTreeSet<u64> = orbit(&f).unwrap().members.into_iter().collect();
                assert_eq!(fast, brute_orbit(&f), "n={n} id={id}");
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let o = orbit(&table(3, 0)).unwrap();
        assert_eq!((o.size(), o.canonical_id().to_u64()), (16, Some(0)));
        assert_eq!(orbit(&table(3, 1)).unwrap().size(), 128);
        let mermin4 = orbit(&table(4, 6014)).unwrap();
        assert_eq!((mermin4.size(), mermin4.canonical_id().to_u64()), (32, Some(6014)));
        assert!(orbit(&SignTable::constant(7).unwrap()).is_err());
    }

    #[test]
    fn census_small() {
        let two = classify_all(2).unwrap();
        assert_eq!(two.iter().map(|r| (r.canonical_id.to_u64().unwrap(), r.size)).collect::<Vec<_>>(), vec![(0, 8), (1, 8)]);
        let three = classify_all(3).unwrap();
        let got: Vec<(u64, u64)> = three.iter().map(|r| (r.canonical_id.to_u64().unwrap(), r.size)).collect();
        assert_eq!(got, vec![(0, 16), (1, 128), (3, 48), (6, 48), (23, 16)]);
        assert!(classify_all(5).is_err());
    }

    #[test]
    fn flags_n3() {
        let three = classify_all(3).unwrap();
        let factorizing: Vec<bool> = three.iter().map(|r| r.factorizing).collect();
        // a1 b1 c1 and CHSH x c1 factorize
        assert_eq!(factorizing, vec![true, false, true, false, false]);
        for r in &three {
            assert_eq!(is_permutation_invariant_orbit(r).unwrap(), r.permutation_invariant);
        }
    }

    #[test]
    fn symmetric_detection() {
        assert!(is_permutation_symmetric(&SignTable::constant(4).unwrap()));
        assert!(!is_permutation_symmetric(&table(3, 1 << 1)));
        assert!(is_permutation_symmetric(&table(3, 0b1000_0001)));
        assert_eq!(symmetric_words(3).len(), 16);
        for w in symmetric_words(3) {
            assert!(is_permutation_symmetric(&table(3, w)));
        }
    }

    #[test]
    fn group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            for _ in 0..50 {
                let g = GroupElement::random(n, &mut rng).unwrap();
                let h = GroupElement::random(n, &mut rng).unwrap();
                let f = SignTable::from_fn(n, |_| rng.gen()).unwrap();
                let gh = g.compose(&h).unwrap();
                assert_eq!(gh.apply(&f).unwrap(), g.apply(&h.apply(&f).unwrap()).unwrap());
                assert_eq!(g.inverse().apply(&g.apply(&f).unwrap()).unwrap(), f);
                assert_eq!(g.apply(&g.inverse().apply(&f).unwrap()).unwrap(), f);
            }
        }
    }

    #[test]
    fn permutation_list() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(6).len(), 720);
    }
}
