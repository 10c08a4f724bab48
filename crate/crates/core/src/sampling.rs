//! Uniform sampling helpers shared by the field and group types.

use rand::RngCore;

/// Number of bits needed to write any value in `[0, bound)`.
pub(crate) fn bits_below(bound: u64) -> u32 {
    debug_assert!(bound >= 1);
    if bound <= 1 {
        0
    } else {
        64 - (bound - 1).leading_zeros()
    }
}

/// Bytes needed for the fixed-width big-endian encoding of values in `[0, bound)`.
pub(crate) fn bytes_below(bound: u64) -> usize {
    (bits_below(bound).max(1) as usize).div_ceil(8)
}

/// Draws a uniform integer in `[0, bound)` by rejection.
///
/// Each attempt reads the smallest number of bytes covering `bound`, masks the
/// value down to the bit length of `bound - 1` and retries when it lands at or
/// above `bound`. Accepted values are exactly uniform.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound >= 1, "empty sampling range");
    if bound == 1 {
        return 0;
    }
    let bits = bits_below(bound);
    let width = bytes_below(bound);
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut buf = [0u8; 8];
    loop {
        rng.fill_bytes(&mut buf[8 - width..]);
        let candidate = u64::from_be_bytes(buf) & mask;
        if candidate < bound {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn widths() {
        assert_eq!(bits_below(2), 1);
        assert_eq!(bits_below(5), 3);
        assert_eq!(bits_below(256), 8);
        assert_eq!(bits_below(257), 9);
        assert_eq!(bytes_below(2), 1);
        assert_eq!(bytes_below(256), 1);
        assert_eq!(bytes_below(257), 2);
        assert_eq!(bytes_below((1 << 31) - 1), 4);
    }

    #[test]
    fn stays_in_range() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for bound in [1u64, 2, 3, 5, 7, 255, 256, 257, 1 << 40] {
            for _ in 0..200 {
                assert!(uniform_below(&mut rng, bound) < bound);
            }
        }
    }
}
