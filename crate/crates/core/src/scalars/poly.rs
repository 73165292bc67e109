//! Dense univariate polynomials over Q, coefficients in ascending degree.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A polynomial over Q. The coefficient vector never has trailing zeros,
/// except that the zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    pub fn x() -> Self {
        Poly::new(vec![Rat::zero(), Rat::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial gets None.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg(&self) -> usize {
        self.degree().expect("degree of zero polynomial")
    }

    pub fn leading(&self) -> &Rat {
        self.coeffs.last().expect("leading coeff of zero polynomial")
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.leading().is_one()
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = Rat::one() / self.leading().clone();
        self.scale(&inv)
    }

    /// Euclidean division: self = q * div + r with deg r < deg div.
    pub fn div_rem(&self, div: &Poly) -> (Poly, Poly) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.deg();
        let lead_inv = Rat::one() / div.leading().clone();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd || (rem.len() == dd + 1 && dd == 0) {
            if rem.last().map_or(true, |c| c.is_zero()) {
                rem.pop();
                if rem.len() <= dd && dd > 0 {
                    break;
                }
                if dd == 0 && rem.is_empty() {
                    break;
                }
                continue;
            }
            let rdeg = rem.len() - 1;
            if rdeg < dd {
                break;
            }
            let c = rem.last().unwrap() * &lead_inv;
            let shift = rdeg - dd;
            for (i, b) in div.coeffs.iter().enumerate() {
                let idx = shift + i;
                let t = &c * b;
                rem[idx] -= t;
            }
            quo[shift] = c;
            rem.pop();
        }
        (Poly::new(quo), Poly::new(rem))
    }

    pub fn rem(&self, div: &Poly) -> Poly {
        self.div_rem(div).1
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluate at another polynomial (composition self(g)).
    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(c.clone()));
        }
        acc
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Extended gcd: returns (g, s, t) with g = s*self + t*other, g monic (or zero).
    pub fn extended_gcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = Poly::one();
        let mut s1 = Poly::zero();
        let mut t0 = Poly::zero();
        let mut t1 = Poly::one();
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (Poly::zero(), Poly::one(), Poly::zero());
        }
        let inv = Rat::one() / r0.leading().clone();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn squarefree_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.monic();
        }
        self.div_rem(&g).0.monic()
    }

    pub fn pow(&self, mut e: usize) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Clear denominators and content: a primitive integer polynomial with the
    /// same roots, positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        assert!(!self.is_zero());
        let mut den = BigInt::one();
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        let mut ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut content = BigInt::zero();
        for v in &ints {
            content = content.gcd(v);
        }
        if !content.is_zero() && !content.is_one() {
            for v in ints.iter_mut() {
                *v = &*v / &content;
            }
        }
        if ints.last().map_or(false, |c| c.is_negative()) {
            for v in ints.iter_mut() {
                *v = -v.clone();
            }
        }
        ints
    }

    /// Resultant of self and other, computed from the Euclidean remainder
    /// sequence.
    pub fn resultant(&self, other: &Poly) -> Rat {
        let mut a = self.clone();
        let mut b = other.clone();
        if a.is_zero() || b.is_zero() {
            return Rat::zero();
        }
        let mut res = Rat::one();
        loop {
            if b.is_zero() {
                return Rat::zero();
            }
            if b.deg() == 0 {
                res *= b.leading().clone().pow(a.deg() as i32);
                return res;
            }
            let r = a.rem(&b);
            if r.is_zero() {
                return Rat::zero();
            }
            let da = a.deg();
            let db = b.deg();
            let dr = r.deg();
            // res(a,b) = (-1)^{da*db} lc(b)^{da-dr} res(b,r)
            if (da * db) % 2 == 1 {
                res = -res;
            }
            res *= b.leading().clone().pow((da as i32) - (dr as i32));
            a = b;
            b = r;
        }
    }

    pub fn discriminant(&self) -> Rat {
        let n = self.deg();
        let res = self.resultant(&self.derivative());
        let sign = if (n * (n - 1) / 2) % 2 == 1 {
            -Rat::one()
        } else {
            Rat::one()
        };
        sign * res / self.leading().clone()
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = match i {
                0 => format!("{}", c),
                1 => format!("{}*x", c),
                _ => format!("{}*x^{}", c, i),
            };
            terms.push(t);
        }
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn div_rem_roundtrip() {
        let a = Poly::from_i64(&[-1, 0, 0, 2, 1]);
        let b = Poly::from_i64(&[3, 1, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().map_or(true, |d| d < b.deg()));
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = Poly::from_i64(&[1, 0, 1]); // x^2+1
        let b = Poly::from_i64(&[-1, 1]); // x-1
        let (g, s, t) = a.extended_gcd(&b);
        assert_eq!(g, Poly::one());
        assert_eq!(s.mul(&a).add(&t.mul(&b)), Poly::one());
    }

    #[test]
    fn resultant_matches_root_difference_product() {
        // res(x^2-2, x^2-3) = prod (a_i - b_j) over roots = ((2-3))^2 ... direct: 1
        let a = Poly::from_i64(&[-2, 0, 1]);
        let b = Poly::from_i64(&[-3, 0, 1]);
        // roots ±√2, ±√3: ∏(α−β) = ((√2)²−3)((√2)²−3)... evaluate b at roots of a:
        // res = ∏ b(α) = (2−3)(2−3) = 1
        assert_eq!(a.resultant(&b), rat(1));
    }

    #[test]
    fn discriminant_quadratic() {
        // x^2 + px + q has discriminant p^2 - 4q
        let p = 3;
        let q = 5;
        let f = Poly::from_i64(&[q, p, 1]);
        assert_eq!(f.discriminant(), rat(p * p - 4 * q));
    }

    #[test]
    fn squarefree_part_strips_multiplicity() {
        let f = Poly::from_i64(&[-1, 1]); // x-1
        let g = f.pow(3).mul(&Poly::from_i64(&[2, 1]));
        let sf = g.squarefree_part();
        assert_eq!(sf, Poly::from_i64(&[-2, 1, 1]).monic());
    }
}
