//! Arithmetic in GF(2^8) with the AES reduction polynomial x^8 + x^4 + x^3 + x + 1.

/// Low byte of the reduction polynomial 0x11B.
const REDUCTION: u8 = 0x1B;

/// Carry-less multiplication modulo the AES polynomial.
pub fn gf256_mul(a: u8, b: u8) -> u8 {
    let mut acc = 0u8;
    let mut a = a;
    let mut b = b;
    for _ in 0..8 {
        if b & 1 != 0 {
            acc ^= a;
        }
        let overflow = a & 0x80 != 0;
        a <<= 1;
        if overflow {
            a ^= REDUCTION;
        }
        b >>= 1;
    }
    acc
}

/// Multiplicative inverse, with the AES convention inv(0) = 0.
///
/// Computed as a^254 by square-and-multiply; the multiplicative group has
/// order 255, so a^254 = a^-1 for every nonzero a.
pub fn gf256_inv(a: u8) -> u8 {
    if a == 0 {
        return 0;
    }
    let mut result = 1u8;
    let mut base = a;
    let mut exp = 254u32;
    while exp > 0 {
        if exp & 1 != 0 {
            result = gf256_mul(result, base);
        }
        base = gf256_mul(base, base);
        exp >>= 1;
    }
    result
}
