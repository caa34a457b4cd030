//! Bit-packed binary hypervectors and the three HDC operations.
//!
//! Logical component `c` lives in word `c / 64`, bit `c % 64`. Bits past the
//! dimension in the last word are always zero, so popcounts and equality can
//! work on whole words.
//!
//! `permute(k)` with positive `k` rotates toward higher indices: component
//! `c` of the input lands at `(c + k) mod D`.

use std::fmt;
use std::ops::BitXor;

use rand::RngCore;

use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 10_000;

#[inline]
fn words_for(dim: usize) -> usize {
    dim.div_ceil(64)
}

#[inline]
fn tail_mask(dim: usize) -> u64 {
    match dim % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    dim: usize,
    words: Vec<u64>,
}

impl Hypervector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "hypervector dimension must be positive");
        Self {
            dim,
            words: vec![0; words_for(dim)],
        }
    }

    pub fn ones(dim: usize) -> Self {
        let mut hv = Self::zeros(dim);
        hv.words.iter_mut().for_each(|w| *w = u64::MAX);
        hv.mask_tail();
        hv
    }

    /// Uniform random vector; every bit is an independent fair coin.
    pub fn random<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut hv = Self::zeros(dim);
        hv.words.iter_mut().for_each(|w| *w = rng.next_u64());
        hv.mask_tail();
        hv
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut hv = Self::zeros(dim);
        for c in 0..dim {
            if f(c) {
                hv.words[c / 64] |= 1 << (c % 64);
            }
        }
        hv
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |c| bits[c])
    }

    /// Builds a vector from packed words; bits beyond `dim` are cleared.
    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if words.len() != words_for(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} words cannot hold a {dim}-bit hypervector",
                words.len()
            )));
        }
        let mut hv = Self { dim, words };
        hv.mask_tail();
        Ok(hv)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn bit(&self, c: usize) -> bool {
        assert!(c < self.dim, "component {c} out of range for dimension {}", self.dim);
        (self.words[c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.dim
    }

    fn mask_tail(&mut self) {
        let mask = tail_mask(self.dim);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    /// Component-wise XOR.
    pub fn bind(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self ^ other)
    }

    pub fn not(&self) -> Self {
        let mut out = self.clone();
        out.words.iter_mut().for_each(|w| *w = !*w);
        out.mask_tail();
        out
    }

    /// Number of disagreeing components.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        self.check_dim(other)?;
        Ok(self.hamming_unchecked(other))
    }

    #[inline]
    pub(crate) fn hamming_unchecked(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Hamming distance divided by the dimension.
    pub fn normalized_hamming(&self, other: &Self) -> Result<f64> {
        Ok(self.hamming(other)? as f64 / self.dim as f64)
    }

    /// Cyclic rotation by `k` positions, taken modulo the dimension.
    pub fn permute(&self, k: i64) -> Self {
        let dim = self.dim as i64;
        let k = k.rem_euclid(dim) as usize;
        if k == 0 {
            return self.clone();
        }
        let mut out = self.shifted_up(k);
        let low = self.shifted_down(self.dim - k);
        out.words.iter_mut().zip(&low.words).for_each(|(o, l)| *o |= l);
        out
    }

    /// Logical shift toward higher indices; components pushed past the end
    /// are dropped.
    fn shifted_up(&self, s: usize) -> Self {
        let n = self.words.len();
        let (ws, bs) = (s / 64, s % 64);
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate().skip(ws) {
            let src = i - ws;
            *o = self.words[src] << bs;
            if bs > 0 && src > 0 {
                *o |= self.words[src - 1] >> (64 - bs);
            }
        }
        let mut hv = Self {
            dim: self.dim,
            words: out,
        };
        hv.mask_tail();
        hv
    }

    /// Logical shift toward lower indices.
    fn shifted_down(&self, s: usize) -> Self {
        let n = self.words.len();
        let (ws, bs) = (s / 64, s % 64);
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate().take(n.saturating_sub(ws)) {
            let src = i + ws;
            let mut w = self.words[src] >> bs;
            if bs > 0 && src + 1 < n {
                w |= self.words[src + 1] << (64 - bs);
            }
            *o = w;
        }
        Self {
            dim: self.dim,
            words: out,
        }
    }

    /// Lowercase hex of `ceil(D/8)` bytes; component 0 is the least
    /// significant bit of the first byte.
    pub fn to_hex(&self) -> String {
        let nbytes = self.dim.div_ceil(8);
        let mut s = String::with_capacity(nbytes * 2);
        for b in 0..nbytes {
            let byte = (self.words[b / 8] >> (8 * (b % 8))) as u8;
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    pub fn from_hex(dim: usize, hex: &str) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let nbytes = dim.div_ceil(8);
        if hex.len() != nbytes * 2 {
            return Err(Error::InvalidHex(format!(
                "expected {} hex digits for dimension {dim}, got {}",
                nbytes * 2,
                hex.len()
            )));
        }
        let mut words = vec![0u64; words_for(dim)];
        for b in 0..nbytes {
            let pair = hex
                .get(2 * b..2 * b + 2)
                .ok_or_else(|| Error::InvalidHex("non-ascii input".into()))?;
            let byte = u8::from_str_radix(pair, 16)
                .map_err(|_| Error::InvalidHex(format!("bad byte {pair:?} at offset {b}")))?;
            words[b / 8] |= (byte as u64) << (8 * (b % 8));
        }
        let hv = Self { dim, words };
        let mut masked = hv.clone();
        masked.mask_tail();
        if masked != hv {
            return Err(Error::InvalidHex(format!("bits set beyond dimension {dim}")));
        }
        Ok(hv)
    }
}

impl BitXor for &Hypervector {
    type Output = Hypervector;

    /// Panics on dimension mismatch; use [`Hypervector::bind`] for a checked
    /// version.
    fn bitxor(self, rhs: &Hypervector) -> Hypervector {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Hypervector {
            dim: self.dim,
            words: self.words.iter().zip(&rhs.words).map(|(a, b)| a ^ b).collect(),
        }
    }
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hex = self.to_hex();
        let head = &hex[..hex.len().min(16)];
        write!(
            f,
            "Hypervector(D={}, ones={}, {}{})",
            self.dim,
            self.count_ones(),
            head,
            if hex.len() > 16 { ".." } else { "" }
        )
    }
}

/// Per-component one-counts over a multiset of hypervectors.
///
/// Counts are stored bit-sliced: plane `p` holds bit `p` of every
/// component's counter, so adding a vector is a ripple-carry over machine
/// words rather than a loop over components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleAccumulator {
    dim: usize,
    nwords: usize,
    planes: Vec<u64>,
    nplanes: usize,
    total: u64,
}

impl BundleAccumulator {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "hypervector dimension must be positive");
        Self {
            dim,
            nwords: words_for(dim),
            planes: Vec::new(),
            nplanes: 0,
            total: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn clear(&mut self) {
        self.planes.iter_mut().for_each(|w| *w = 0);
        self.total = 0;
    }

    fn reserve_for(&mut self, total: u64) {
        let needed = (u64::BITS - total.leading_zeros()) as usize;
        while self.nplanes < needed {
            self.planes.extend(std::iter::repeat_n(0, self.nwords));
            self.nplanes += 1;
        }
    }

    #[inline]
    fn add_word(&mut self, w: usize, mut carry: u64) {
        let mut p = 0;
        while carry != 0 {
            let slot = &mut self.planes[p * self.nwords + w];
            let x = *slot;
            *slot = x ^ carry;
            carry &= x;
            p += 1;
        }
    }

    pub fn add(&mut self, hv: &Hypervector) -> Result<()> {
        if hv.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: hv.dim,
            });
        }
        self.reserve_for(self.total + 1);
        for (w, &x) in hv.words.iter().enumerate() {
            self.add_word(w, x);
        }
        self.total += 1;
        Ok(())
    }

    /// Adds `a XOR b` without materializing it.
    pub fn add_bound(&mut self, a: &Hypervector, b: &Hypervector) -> Result<()> {
        a.check_dim(b)?;
        if a.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: a.dim,
            });
        }
        self.reserve_for(self.total + 1);
        for (w, (&x, &y)) in a.words.iter().zip(&b.words).enumerate() {
            self.add_word(w, x ^ y);
        }
        self.total += 1;
        Ok(())
    }

    /// Adds every count and the total of `other` into `self`.
    pub fn merge(&mut self, other: &BundleAccumulator) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        self.reserve_for(self.total + other.total);
        let nw = self.nwords;
        for w in 0..nw {
            let mut carry = 0u64;
            for p in 0..self.nplanes {
                let y = if p < other.nplanes {
                    other.planes[p * nw + w]
                } else {
                    0
                };
                let x = self.planes[p * nw + w];
                self.planes[p * nw + w] = x ^ y ^ carry;
                carry = (x & y) | (carry & (x ^ y));
            }
            debug_assert_eq!(carry, 0);
        }
        self.total += other.total;
        Ok(())
    }

    pub fn count(&self, c: usize) -> u64 {
        assert!(c < self.dim, "component {c} out of range");
        let (w, b) = (c / 64, c % 64);
        (0..self.nplanes)
            .map(|p| ((self.planes[p * self.nwords + w] >> b) & 1) << p)
            .sum()
    }

    pub fn counts(&self) -> Vec<u64> {
        (0..self.dim).map(|c| self.count(c)).collect()
    }

    /// Majority vote: bit `c` is set iff `2 * count[c] > total`; exact ties
    /// (even totals only) copy the tie-break vector's bit.
    pub fn finalize(&self, tiebreak: &Hypervector) -> Result<Hypervector> {
        if self.total == 0 {
            return Err(Error::EmptyBundle);
        }
        if tiebreak.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: tiebreak.dim,
            });
        }
        let threshold = self.total / 2;
        let even = self.total.is_multiple_of(2);
        let nw = self.nwords;
        let mut words = vec![0u64; nw];
        for (w, out) in words.iter_mut().enumerate() {
            let mut gt = 0u64;
            let mut eq = u64::MAX;
            for p in (0..self.nplanes).rev() {
                let x = self.planes[p * nw + w];
                if (threshold >> p) & 1 == 1 {
                    eq &= x;
                } else {
                    gt |= eq & x;
                    eq &= !x;
                }
            }
            *out = if even {
                gt | (eq & tiebreak.words[w])
            } else {
                gt
            };
        }
        Hypervector::from_words(self.dim, words)
    }
}

/// Majority bundle of `vectors`, ties resolved by `tiebreak`.
pub fn bundle<'a, I>(vectors: I, tiebreak: &Hypervector) -> Result<Hypervector>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut acc = BundleAccumulator::new(tiebreak.dim());
    for hv in vectors {
        acc.add(hv)?;
    }
    acc.finalize(tiebreak)
}
