use num_bigint::BigInt;
use num_traits::One;

use crate::Rational;

/// `a (a-1) ... (a-k+1) / k!` for rational `a`; 1 when `k = 0`.
///
/// Called with `a = g - 1` this is the coefficient `C(g-1, k)` of the
/// W-privacy level law. Evaluated as an exact product.
pub fn generalized_binomial(a: &Rational, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| {
        acc * (a - Rational::from_integer(i.into())) / Rational::from_integer((i + 1).into())
    })
}

/// Ordinary binomial coefficient; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

pub fn pow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow(base.clone(), exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn examples() {
        assert_eq!(generalized_binomial(&rat(7, 3), 0), rat(1, 1));
        assert_eq!(generalized_binomial(&rat(1, 2), 1), rat(1, 2));
        assert_eq!(generalized_binomial(&rat(3, 1), 2), rat(3, 1));
        // (1/2)(-1/2)/2
        assert_eq!(generalized_binomial(&rat(1, 2), 2), rat(-1, 8));
    }

    #[test]
    fn agrees_with_integer_binomial() {
        for n in 0..12usize {
            for k in 0..=n + 2 {
                assert_eq!(
                    generalized_binomial(&Rational::from_integer(n.into()), k),
                    Rational::from_integer(binomial(n, k)),
                    "C({n},{k})"
                );
            }
        }
    }
}
