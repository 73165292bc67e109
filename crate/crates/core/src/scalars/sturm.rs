//! Sturm chains and exact real-root isolation with rational intervals.

use num_traits::{One, Signed, Zero};

use super::poly::{Poly, Rat};

/// Sturm chain of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(f: &Poly) -> Self {
        let f = f.squarefree_part();
        let mut chain = vec![f.clone()];
        if f.degree().map_or(false, |d| d >= 1) {
            chain.push(f.derivative());
            loop {
                let n = chain.len();
                let r = chain[n - 2].rem(&chain[n - 1]).neg();
                if r.is_zero() {
                    break;
                }
                chain.push(r);
            }
        }
        SturmChain { chain }
    }

    pub fn poly(&self) -> &Poly {
        &self.chain[0]
    }

    fn sign_changes_at(&self, x: &Rat) -> usize {
        let signs: Vec<i8> = self
            .chain
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval (lo, hi].
    pub fn count_roots(&self, lo: &Rat, hi: &Rat) -> usize {
        assert!(lo < hi);
        let a = self.sign_changes_at(lo);
        let b = self.sign_changes_at(hi);
        a - b
    }

    /// Cauchy bound: all real roots lie in (-m, m).
    pub fn root_bound(&self) -> Rat {
        let f = &self.chain[0];
        if f.degree().map_or(true, |d| d == 0) {
            return Rat::one();
        }
        let lead = f.leading().clone();
        let mut m = Rat::zero();
        for c in &f.coeffs {
            let a = (c / &lead).abs();
            if a > m {
                m = a;
            }
        }
        m + Rat::one()
    }

    /// Isolating open intervals for every real root, ordered increasingly.
    /// Neither endpoint of a returned interval is a root.
    pub fn isolate_roots(&self) -> Vec<(Rat, Rat)> {
        let f = self.chain[0].clone();
        let Some(deg) = f.degree() else { return vec![] };
        if deg == 0 {
            return vec![];
        }
        let two = Rat::one() + Rat::one();
        let mut m = self.root_bound();
        while f.eval(&m).is_zero() || f.eval(&(-m.clone())).is_zero() {
            m += Rat::one();
        }
        let mut out = vec![];
        let mut stack = vec![(-m.clone(), m.clone())];
        while let Some((lo, hi)) = stack.pop() {
            let n = self.count_roots(&lo, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 {
                if f.eval(&hi).is_zero() {
                    // the unique root of (lo, hi] is the rational point hi;
                    // widen to an open interval with non-root endpoints
                    let mut d = (&hi - &lo) / &two;
                    loop {
                        let a = &hi - &d;
                        let b = &hi + &d;
                        if !f.eval(&a).is_zero()
                            && !f.eval(&b).is_zero()
                            && self.count_roots(&a, &b) == 1
                        {
                            out.push((a, b));
                            break;
                        }
                        d = &d / &two;
                    }
                } else {
                    out.push((lo, hi));
                }
                continue;
            }
            let mut mid = (&lo + &hi) / &two;
            let mut step = (&hi - &lo) / (&two * &two);
            while f.eval(&mid).is_zero() {
                mid = &mid + &step;
                step = &step / &two;
            }
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    /// Bisect an isolating interval until its width is below `width`.
    /// The input must contain exactly one root, not at an endpoint.
    pub fn refine(&self, lo: &Rat, hi: &Rat, width: &Rat) -> (Rat, Rat) {
        let f = &self.chain[0];
        let mut lo = lo.clone();
        let mut hi = hi.clone();
        let two = Rat::one() + Rat::one();
        debug_assert_eq!(self.count_roots(&lo, &hi), 1);
        while &(&hi - &lo) >= width {
            let mut mid = (&lo + &hi) / &two;
            if f.eval(&mid).is_zero() {
                // rational root dead centre; shift the cut point
                let quarter = (&hi - &lo) / (&two * &two);
                mid = &mid + &quarter;
                if f.eval(&mid).is_zero() {
                    mid = (&lo + &hi) / &two - quarter;
                }
            }
            if self.count_roots(&lo, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }
}

/// Number of real roots of f (counted without multiplicity).
pub fn count_real_roots(f: &Poly) -> usize {
    let sc = SturmChain::new(f);
    if sc.poly().degree().map_or(true, |d| d == 0) {
        return 0;
    }
    let m = sc.root_bound();
    sc.count_roots(&(-m.clone()), &m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::{rat, ratio};

    #[test]
    fn isolates_sqrt2() {
        let f = Poly::from_i64(&[-2, 0, 1]);
        let sc = SturmChain::new(&f);
        let roots = sc.isolate_roots();
        assert_eq!(roots.len(), 2);
        let (lo, hi) = sc.refine(&roots[1].0, &roots[1].1, &ratio(1, 16));
        assert!(lo.clone() * lo.clone() < rat(2));
        assert!(hi.clone() * hi.clone() > rat(2));
    }

    #[test]
    fn no_real_roots_for_x2_plus_1() {
        assert_eq!(count_real_roots(&Poly::from_i64(&[1, 0, 1])), 0);
    }

    #[test]
    fn cubic_has_one_real_root() {
        assert_eq!(count_real_roots(&Poly::from_i64(&[-2, 0, 0, 1])), 1);
    }

    #[test]
    fn rational_roots_get_open_isolating_intervals() {
        // (x-1)(x-2)(x-3)
        let f = Poly::from_i64(&[-6, 11, -6, 1]);
        let sc = SturmChain::new(&f);
        let roots = sc.isolate_roots();
        assert_eq!(roots.len(), 3);
        for (i, r) in [rat(1), rat(2), rat(3)].iter().enumerate() {
            assert!(&roots[i].0 < r && r < &roots[i].1);
            assert!(!f.eval(&roots[i].0).is_zero());
            assert!(!f.eval(&roots[i].1).is_zero());
        }
    }

    #[test]
    fn degree_one() {
        let f = Poly::from_i64(&[0, 1]);
        let sc = SturmChain::new(&f);
        let roots = sc.isolate_roots();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].0 < rat(0) && rat(0) < roots[0].1);
    }
}
