//! Dual numbers a + b*eps with eps^2 = 0, over any scalar ring.
//!
//! Used to take exact derivatives of polynomial maps: evaluating a
//! polynomial construction at 1 + eps*X and reading the eps part is the
//! Lie-level differential.

use crate::linalg::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DualNum<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> DualNum<T> {
    pub fn new(re: T, eps: T) -> Self {
        DualNum { re, eps }
    }

    pub fn constant(re: T) -> Self {
        let eps = re.zero_like();
        DualNum { re, eps }
    }
}

impl<T: Scalar> Scalar for DualNum<T> {
    fn zero_like(&self) -> Self {
        DualNum {
            re: self.re.zero_like(),
            eps: self.re.zero_like(),
        }
    }
    fn one_like(&self) -> Self {
        DualNum {
            re: self.re.one_like(),
            eps: self.re.zero_like(),
        }
    }
    fn add(&self, other: &Self) -> Self {
        DualNum {
            re: self.re.add(&other.re),
            eps: self.eps.add(&other.eps),
        }
    }
    fn sub(&self, other: &Self) -> Self {
        DualNum {
            re: self.re.sub(&other.re),
            eps: self.eps.sub(&other.eps),
        }
    }
    fn mul(&self, other: &Self) -> Self {
        DualNum {
            re: self.re.mul(&other.re),
            eps: self.re.mul(&other.eps).add(&self.eps.mul(&other.re)),
        }
    }
    fn neg(&self) -> Self {
        DualNum {
            re: self.re.neg(),
            eps: self.eps.neg(),
        }
    }
    fn inv(&self) -> Option<Self> {
        // (a + b eps)^-1 = a^-1 - a^-2 b eps
        let ainv = self.re.inv()?;
        let eps = ainv.mul(&ainv).mul(&self.eps).neg();
        Some(DualNum { re: ainv, eps })
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
    fn scale_rat(&self, r: &num_rational::BigRational) -> Self {
        DualNum {
            re: self.re.scale_rat(r),
            eps: self.eps.scale_rat(r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::rat;
    use num_rational::BigRational;

    #[test]
    fn derivative_of_square() {
        // (a + eps)^2 = a^2 + 2a eps
        let x = DualNum::new(rat(5), rat(1));
        let sq = x.mul(&x);
        assert_eq!(sq.re, rat(25));
        assert_eq!(sq.eps, rat(10));
    }

    #[test]
    fn inverse() {
        let x = DualNum::new(rat(2), rat(3));
        let inv = x.inv().unwrap();
        let one: DualNum<BigRational> = x.one_like();
        assert_eq!(x.mul(&inv), one);
    }
}
