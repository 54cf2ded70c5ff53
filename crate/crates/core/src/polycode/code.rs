use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Bit width of tags and codes, 1..=64. Experiments use 32 or 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeWidth(u32);

impl CodeWidth {
    pub const W32: CodeWidth = CodeWidth(32);
    pub const W64: CodeWidth = CodeWidth(64);

    pub fn new(bits: u32) -> Result<Self> {
        if (1..=64).contains(&bits) {
            Ok(CodeWidth(bits))
        } else {
            Err(Error::config("width", format!("must be in 1..=64, got {bits}")))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn mask(self) -> u64 {
        if self.0 == 64 {
            u64::MAX
        } else {
            (1u64 << self.0) - 1
        }
    }

    /// Rotate left by one bit within the width.
    #[inline]
    pub fn rotl1(self, x: u64) -> u64 {
        if self.0 == 64 {
            x.rotate_left(1)
        } else {
            ((x << 1) | (x >> (self.0 - 1))) & self.mask()
        }
    }
}

impl Default for CodeWidth {
    fn default() -> Self {
        CodeWidth::W64
    }
}

impl fmt::Display for CodeWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Folds one pre-synaptic tag into a post-synaptic code: XOR, then rotate
/// left by one. The rotation makes the result depend on arrival order.
#[inline]
pub fn apply_tag(code: u64, tag: u64, width: CodeWidth) -> u64 {
    width.rotl1((code ^ tag) & width.mask())
}

/// Fixed random tag per neuron: nonzero, pairwise distinct, seed-determined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    width: CodeWidth,
    tags: Vec<u64>,
}

impl TagSet {
    pub fn generate(n: usize, width: CodeWidth, seed: u64) -> Result<Self> {
        if (n as u128) >= (1u128 << width.bits()) {
            return Err(Error::config(
                "width",
                format!("{width} bits cannot hold {n} distinct nonzero tags"),
            ));
        }
        // Separate stream from the network RNG so tags don't shift when
        // connectivity parameters change.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x7461_6773);
        let mut seen = HashSet::with_capacity(n);
        let mut tags = Vec::with_capacity(n);
        while tags.len() < n {
            let t = rng.random::<u64>() & width.mask();
            if t != 0 && seen.insert(t) {
                tags.push(t);
            }
        }
        Ok(TagSet { width, tags })
    }

    pub fn from_tags(tags: Vec<u64>, width: CodeWidth) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tags.len());
        for &t in &tags {
            if t == 0 || t & !width.mask() != 0 || !seen.insert(t) {
                return Err(Error::Input(format!("invalid or duplicate tag {t:#x}")));
            }
        }
        Ok(TagSet { width, tags })
    }

    pub fn width(&self) -> CodeWidth {
        self.width
    }

    #[inline]
    pub fn get(&self, neuron: usize) -> u64 {
        self.tags[neuron]
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.tags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_a_fixed_point() {
        assert_eq!(apply_tag(0, 0, CodeWidth::new(8).unwrap()), 0);
    }

    #[test]
    fn rotation_wraps_high_bit() {
        let w8 = CodeWidth::new(8).unwrap();
        assert_eq!(apply_tag(0b1000_0000, 0, w8), 0b0000_0001);
        assert_eq!(apply_tag(1 << 63, 0, CodeWidth::W64), 1);
        assert_eq!(apply_tag(1 << 31, 0, CodeWidth::W32), 1);
    }

    #[test]
    fn two_tags_do_not_commute() {
        let w8 = CodeWidth::new(8).unwrap();
        let (c, a, b) = (0b0001_0001, 0b0000_0011, 0b0000_0101);
        let ab = apply_tag(apply_tag(c, a, w8), b, w8);
        let ba = apply_tag(apply_tag(c, b, w8), a, w8);
        // frozen from a bit-list oracle
        assert_eq!(ab, 0x42);
        assert_eq!(ba, 0x56);
    }

    #[test]
    fn bijective_for_every_width8_tag() {
        let w8 = CodeWidth::new(8).unwrap();
        for tag in 0..=255u64 {
            let mut seen = [false; 256];
            for code in 0..=255u64 {
                let out = apply_tag(code, tag, w8) as usize;
                assert!(!seen[out]);
                seen[out] = true;
                // inverse: rotate right then XOR
                let back = (((out as u64) >> 1) | ((out as u64) << 7)) & 0xFF;
                assert_eq!(back ^ tag, code);
            }
        }
    }

    #[test]
    fn repeated_tag_does_not_cancel_in_width8() {
        let w8 = CodeWidth::new(8).unwrap();
        let mut cancels = 0;
        for c in 0..=255u64 {
            for t in 1..=255u64 {
                if apply_tag(apply_tag(c, t, w8), t, w8) == c {
                    cancels += 1;
                }
            }
        }
        // 508 of 65280 (code, nonzero tag) pairs, counted by a bit-list oracle
        assert_eq!(cancels, 508);
    }

    #[test]
    fn tags_are_distinct_nonzero_and_reproducible() {
        let a = TagSet::generate(320, CodeWidth::W32, 9).unwrap();
        let b = TagSet::generate(320, CodeWidth::W32, 9).unwrap();
        assert_eq!(a, b);
        let set: HashSet<_> = a.as_slice().iter().collect();
        assert_eq!(set.len(), 320);
        assert!(a.as_slice().iter().all(|&t| t != 0 && t <= u32::MAX as u64));
        assert_ne!(a, TagSet::generate(320, CodeWidth::W32, 10).unwrap());
    }

    #[test]
    fn too_many_tags_for_width() {
        assert!(TagSet::generate(256, CodeWidth::new(8).unwrap(), 1).is_err());
        assert!(TagSet::generate(255, CodeWidth::new(8).unwrap(), 1).is_ok());
    }

    #[test]
    fn width_bounds() {
        assert!(CodeWidth::new(0).is_err());
        assert!(CodeWidth::new(65).is_err());
        assert_eq!(CodeWidth::new(64).unwrap().mask(), u64::MAX);
    }
}
