//! Adjoin a square root of -1 to a scalar ring: elements a + b*i.
//!
//! Over a totally real coefficient field this is always a field, which is
//! all the Hodge-theoretic code needs.

use crate::linalg::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussExt<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> GaussExt<T> {
    pub fn new(re: T, im: T) -> Self {
        GaussExt { re, im }
    }

    pub fn real(re: T) -> Self {
        let im = re.zero_like();
        GaussExt { re, im }
    }

    pub fn i_like(like: &T) -> Self {
        GaussExt {
            re: like.zero_like(),
            im: like.one_like(),
        }
    }

    pub fn conj(&self) -> Self {
        GaussExt {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl<T: Scalar> Scalar for GaussExt<T> {
    fn zero_like(&self) -> Self {
        GaussExt {
            re: self.re.zero_like(),
            im: self.re.zero_like(),
        }
    }
    fn one_like(&self) -> Self {
        GaussExt {
            re: self.re.one_like(),
            im: self.re.zero_like(),
        }
    }
    fn add(&self, other: &Self) -> Self {
        GaussExt {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }
    fn sub(&self, other: &Self) -> Self {
        GaussExt {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }
    fn mul(&self, other: &Self) -> Self {
        GaussExt {
            re: self.re.mul(&other.re).sub(&self.im.mul(&other.im)),
            im: self.re.mul(&other.im).add(&self.im.mul(&other.re)),
        }
    }
    fn neg(&self) -> Self {
        GaussExt {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }
    fn inv(&self) -> Option<Self> {
        let nrm = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        let ninv = nrm.inv()?;
        Some(GaussExt {
            re: self.re.mul(&ninv),
            im: self.im.neg().mul(&ninv),
        })
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn scale_rat(&self, r: &num_rational::BigRational) -> Self {
        GaussExt {
            re: self.re.scale_rat(r),
            im: self.im.scale_rat(r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::rat;

    #[test]
    fn arithmetic_and_inverse() {
        let i = GaussExt::i_like(&rat(1));
        let m1 = i.mul(&i);
        assert_eq!(m1, GaussExt::real(rat(-1)));
        let z = GaussExt::new(rat(3), rat(4));
        let zi = z.inv().unwrap();
        assert_eq!(z.mul(&zi), GaussExt::real(rat(1)));
    }
}
