//! Packed fixed-length bit strings.
//!
//! Bit `i` lives in word `i / 64` at position `63 - i % 64`, so the first bit
//! of the string is the most significant bit of the first word. Unused trailing
//! bits of the last word are always zero, which keeps derived equality and
//! hashing bit-exact.
//!
//! The text form is `<len>:<hex>`: the bit length in decimal, a colon, then the
//! bits packed most-significant-nibble first and zero-padded to a whole nibble.
//! The empty string is `0:`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{PrcError, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        bits.iter().copied().collect()
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut out = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                out.words[i / 64] |= 1 << (63 - i % 64);
            }
        }
        out
    }

    /// `width` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, width: usize) -> Self {
        assert!(width <= 64, "width {width} exceeds 64");
        if width == 0 {
            return Self::zeros(0);
        }
        let masked = if width == 64 {
            value
        } else {
            value & ((1u64 << width) - 1)
        };
        Self {
            len: width,
            words: vec![masked << (64 - width)],
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.gen()).collect();
        mask_tail(&mut words, len);
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let m = 1u64 << (63 - i % 64);
        if bit {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Value of the string read as a big-endian integer. Only for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a {}-bit string", self.len);
        if self.len == 0 {
            0
        } else {
            self.words[0] >> (64 - self.len)
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "and of unequal lengths");
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self {
            len: self.len,
            words: Vec::with_capacity(words_for(self.len + other.len)),
        };
        out.words.extend_from_slice(&self.words);
        out.append(other);
        out
    }

    /// Keep the first `len` bits.
    pub fn truncate(&mut self, len: usize) {
        if len < self.len {
            self.len = len;
            self.words.truncate(words_for(len));
            mask_tail(&mut self.words, len);
        }
    }

    /// In-place `concat`.
    pub fn append(&mut self, other: &Self) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                *self.words.last_mut().expect("nonzero shift implies a word") |= w >> shift;
                self.words.push(w << (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
    }

    /// Bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len, "slice {start}..{end} of {}", self.len);
        let len = end - start;
        let mut words = Vec::with_capacity(words_for(len));
        let (w0, shift) = (start / 64, start % 64);
        for k in 0..words_for(len) {
            let hi = self.words[w0 + k] << shift;
            let lo = if shift == 0 {
                0
            } else {
                self.words.get(w0 + k + 1).map_or(0, |w| w >> (64 - shift))
            };
            words.push(hi | lo);
        }
        mask_tail(&mut words, len);
        Self { len, words }
    }

    /// Bits packed most-significant-nibble first, zero-padded to a whole nibble.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let nibbles = self.len.div_ceil(4);
        let mut s = String::with_capacity(nibbles);
        for k in 0..nibbles {
            let nib = (self.words[k / 16] >> (60 - 4 * (k % 16))) & 0xf;
            s.push(DIGITS[nib as usize] as char);
        }
        s
    }

    /// Inverse of [`to_hex`](Self::to_hex) for a known bit length. Padding bits must be zero.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(PrcError::Parse(format!(
                "{} hex digits cannot hold exactly {len} bits",
                hex.len()
            )));
        }
        let mut words = vec![0u64; words_for(len)];
        for (k, c) in hex.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| PrcError::Parse(format!("bad hex digit {c:?}")))? as u64;
            words[k / 16] |= nib << (60 - 4 * (k % 16));
        }
        let mut checked = words.clone();
        mask_tail(&mut checked, len);
        if checked != words {
            return Err(PrcError::Parse("nonzero padding bits".into()));
        }
        Ok(Self { len, words })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

fn mask_tail(words: &mut [u64], len: usize) {
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= !0u64 << (64 - rem);
        }
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = Self::zeros(0);
        for b in iter {
            if out.len.is_multiple_of(64) {
                out.words.push(0);
            }
            if b {
                out.words[out.len / 64] |= 1 << (63 - out.len % 64);
            }
            out.len += 1;
        }
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.len, self.to_hex())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
            write!(f, "BitString({s})")
        } else {
            write!(f, "BitString({self})")
        }
    }
}

impl FromStr for BitString {
    type Err = PrcError;

    fn from_str(s: &str) -> Result<Self> {
        let (len, hex) = s
            .split_once(':')
            .ok_or_else(|| PrcError::Parse(format!("missing ':' in {s:?}")))?;
        let len: usize = len
            .parse()
            .map_err(|_| PrcError::Parse(format!("bad bit length {len:?}")))?;
        Self::from_hex(hex, len)
    }
}
