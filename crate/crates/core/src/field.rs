//! Arithmetic in a prime field F_q with elements stored as `u64` in `[0, q)`.

use crate::error::{Error, Result};

/// A field element. Always reduced modulo the owning field's modulus.
pub type Symbol = u64;

pub const DEFAULT_MODULUS: u64 = 257;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    pub fn new(modulus: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::InvalidParams(format!("field modulus {modulus} is not prime")));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, a: Symbol) -> bool {
        a < self.modulus
    }

    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(self.contains(a) && self.contains(b));
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(self.contains(a) && self.contains(b));
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    pub fn sum<I: IntoIterator<Item = Symbol>>(&self, items: I) -> Symbol {
        items.into_iter().fold(0, |acc, x| self.add(acc, x))
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { modulus: DEFAULT_MODULUS }
    }
}

/// `(a + b) mod q`.
pub fn field_add(a: Symbol, b: Symbol, q: u64) -> Symbol {
    ((a as u128 + b as u128) % q as u128) as u64
}

/// `(a - b) mod q`, the inverse of [`field_add`].
pub fn field_sub(a: Symbol, b: Symbol, q: u64) -> Symbol {
    ((a as u128 + q as u128 - (b % q) as u128) % q as u128) as u64
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the witness set below is exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_examples() {
        assert_eq!(field_add(3, 4, 5), 2);
        assert_eq!(field_add(0, 6, 7), 6);
        assert_eq!(field_add(256, 1, 257), 0);
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.add(3, 4), 2);
        assert_eq!(f.sub(2, 4), 3);
        assert_eq!(f.sum([1, 2, 3, 4]), 0);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(257));
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(256).is_err());
    }

    proptest! {
        #[test]
        fn sub_inverts_add(q in prop::sample::select(vec![2u64, 5, 257, 65_537, 18_446_744_073_709_551_557]),
                           a in any::<u64>(), b in any::<u64>()) {
            let (a, b) = (a % q, b % q);
            let f = PrimeField::new(q).unwrap();
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
            prop_assert_eq!(field_sub(field_add(a, b, q), b, q), a);
            prop_assert!(f.add(a, b) < q);
        }
    }
}
