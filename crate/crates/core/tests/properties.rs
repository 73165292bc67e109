//! Randomized invariants over the exact kernels.

use proptest::prelude::*;

use ksw_core::linalg::Mat;
use ksw_core::quadspace::QuadSpace;
use ksw_core::scalars::poly::{rat, Poly};
use ksw_core::scalars::sturm::{count_real_roots, SturmChain};
use ksw_core::scalars::{EtaleAlgebra, NumberField};
use ksw_core::Scalar;

fn small_rat() -> impl Strategy<Value = ksw_core::Rat> {
    (-6i64..=6).prop_map(rat)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_inverse_roundtrip(entries in proptest::collection::vec(small_rat(), 9)) {
        let m = Mat { rows: 3, cols: 3, data: entries };
        if let Some(inv) = m.inverse() {
            prop_assert_eq!(m.matmul(&inv), Mat::identity(3, &rat(1)));
            prop_assert_eq!(inv.matmul(&m), Mat::identity(3, &rat(1)));
        } else {
            prop_assert!(m.det().is_zero());
        }
    }

    #[test]
    fn kernel_vectors_annihilate(entries in proptest::collection::vec(small_rat(), 12)) {
        let m = Mat { rows: 3, cols: 4, data: entries };
        for v in m.kernel() {
            let img = m.mul_vec(&v);
            prop_assert!(img.iter().all(|x| x.is_zero()));
        }
        prop_assert_eq!(m.rank() + m.kernel().len(), 4);
    }

    #[test]
    fn field_arithmetic_in_sqrt2(a in proptest::collection::vec(small_rat(), 2),
                                 b in proptest::collection::vec(small_rat(), 2)) {
        let f = NumberField::quadratic("s2", 2);
        let x = f.element(a);
        let y = f.element(b);
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.add(&y).mul(&x), x.mul(&x).add(&y.mul(&x)));
        if !x.is_zero() {
            prop_assert_eq!(x.mul(&x.inv().unwrap()), f.one());
            // norm is multiplicative
            if !y.is_zero() {
                prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
            }
        }
    }

    #[test]
    fn sturm_counts_match_eval_signs(coeffs in proptest::collection::vec(-5i64..=5, 4)) {
        let p = Poly::from_i64(&coeffs);
        if p.is_zero() || p.deg() == 0 {
            return Ok(());
        }
        let n = count_real_roots(&p);
        let chain = SturmChain::new(&p);
        let intervals = chain.isolate_roots();
        prop_assert_eq!(intervals.len(), n);
        // each isolating interval brackets a sign change of the squarefree part
        let sf = p.squarefree_part();
        for (lo, hi) in intervals {
            let a = sf.eval(&lo);
            let b = sf.eval(&hi);
            prop_assert!(!a.is_zero() && !b.is_zero());
            prop_assert!((a * b) < rat(0));
        }
    }

    #[test]
    fn diagonalization_is_exact(entries in proptest::collection::vec(small_rat(), 6)) {
        // symmetric 3x3 from the upper triangle
        let mut gram = Mat::filled(3, 3, rat(0));
        let mut it = entries.into_iter();
        for i in 0..3 {
            for j in i..3 {
                let v = it.next().unwrap();
                gram[(i, j)] = v.clone();
                gram[(j, i)] = v;
            }
        }
        let e = EtaleAlgebra::rational();
        let g = gram.map(|q| e.from_rat(q.clone()));
        match QuadSpace::symmetric(e, g) {
            Ok(space) => {
                let b = space.orthogonal_basis().unwrap();
                let d = b.transpose().matmul(space.gram()).matmul(&b);
                for r in 0..3 {
                    for c in 0..3 {
                        if r != c {
                            prop_assert!(d.at(r, c).is_zero());
                        } else {
                            prop_assert!(d.at(r, c).is_unit());
                        }
                    }
                }
            }
            Err(_) => {} // degenerate sample
        }
    }
}
