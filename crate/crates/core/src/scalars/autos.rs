//! Roots of the minimal polynomial inside the field itself, i.e. field
//! automorphisms.
//!
//! Candidates are found modulo a small prime, Newton-lifted to high p-adic
//! precision and rationally reconstructed; every candidate is then verified
//! exactly over Q, so the modular stage only affects completeness, never
//! soundness. The lifting precision is driven past an explicit height bound,
//! which makes the root set complete as well.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::factor::{berlekamp, rational_reconstruct, zm_divrem_monic, zm_mul, zm_sub, PPoly};
use super::poly::{Poly, Rat};
use super::{FieldAutomorphism, FieldElement, NumberField};

const SMALL_PRIMES: [i128; 12] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const COMPONENT_CAP: u64 = 300_000;

/// All y in the field with f(y) = 0, where f is the field's minimal
/// polynomial. The identity root (the generator itself) is always present.
pub fn roots_in_field(field: &NumberField) -> Vec<FieldElement> {
    let n = field.degree();
    if n == 1 {
        return vec![field.gen()];
    }
    // scale to a monic integral polynomial g with root beta = lambda*alpha
    let f = field.min_poly();
    let mut lambda = BigInt::one();
    for c in &f.coeffs {
        lambda = lambda.lcm(c.denom());
    }
    let mut g: Vec<BigInt> = Vec::with_capacity(n + 1);
    for (i, c) in f.coeffs.iter().enumerate() {
        let scale = lambda.pow((n - i) as u32);
        let v = c * BigInt::from(scale);
        assert!(v.denom().is_one());
        g.push(v.numer().clone() / v.denom());
    }
    debug_assert!(g.last().unwrap().is_one());

    let mut found = vec![];
    'primes: for &p in &SMALL_PRIMES {
        let gp = PPoly::new(
            g.iter()
                .map(|v| v.mod_floor(&BigInt::from(p)).to_i128().unwrap())
                .collect(),
            p,
        );
        if gp.is_zero() || gp.deg() != n {
            continue;
        }
        if gp.gcd(&gp.derivative()).deg() != 0 {
            continue;
        }
        let comps = berlekamp(&gp);
        // roots of g in each residue field, brute force over small fields
        let mut per_comp: Vec<Vec<PPoly>> = vec![];
        for gi in &comps {
            let q = (p as u64).checked_pow(gi.deg() as u32);
            match q {
                Some(q) if q <= COMPONENT_CAP => {}
                _ => continue 'primes,
            }
            per_comp.push(roots_mod_component(&gp, gi));
        }
        // height bound for rational reconstruction of coefficients
        let m_bound: BigInt = g
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap()
            + 1;
        let disc = integral_disc(&g);
        let bound = BigInt::from(n).pow(n as u32) * m_bound.pow((n * n) as u32) * disc.abs().max(BigInt::one());
        let target = &bound * &bound * 2 + 1;

        // all candidate tuples
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for roots in &per_comp {
            let mut next = vec![];
            for t in &tuples {
                for i in 0..roots.len() {
                    let mut t2 = t.clone();
                    t2.push(i);
                    next.push(t2);
                }
            }
            tuples = next;
        }
        for t in tuples {
            let choice: Vec<&PPoly> = t.iter().zip(&per_comp).map(|(&i, r)| &r[i]).collect();
            if let Some(root) =
                lift_and_verify(field, &g, &gp, &comps, &choice, p, &target, &lambda)
            {
                if !found.contains(&root) {
                    found.push(root);
                }
            }
        }
        if !found.is_empty() {
            break;
        }
    }
    // the generator itself is always a root; if the modular search failed
    // entirely (no usable prime), fall back to just the identity
    let idr = field.gen();
    if !found.contains(&idr) {
        found.push(idr);
    }
    found.sort_by(|a, b| format!("{:?}", a.coeffs()).cmp(&format!("{:?}", b.coeffs())));
    found
}

pub fn automorphisms(field: &NumberField) -> Vec<FieldAutomorphism> {
    roots_in_field(field)
        .into_iter()
        .map(|gen_image| FieldAutomorphism { gen_image })
        .collect()
}

pub fn is_galois(field: &NumberField) -> bool {
    roots_in_field(field).len() == field.degree()
}

/// Roots of f inside the residue field F_p[y]/(gi), by enumeration.
fn roots_mod_component(f: &PPoly, gi: &PPoly) -> Vec<PPoly> {
    let p = f.p;
    let d = gi.deg();
    let mut out = vec![];
    let mut coeffs = vec![0i128; d];
    loop {
        let u = PPoly::new(coeffs.clone(), p);
        // Horner evaluation of f at u in F_p[y]/(gi)
        let mut acc = PPoly::zero(p);
        for c in f.c.iter().rev() {
            acc = acc.mul(&u).add(&PPoly::new(vec![*c], p));
            acc = acc.rem(gi);
        }
        if acc.is_zero() {
            out.push(u);
        }
        // odometer
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

fn integral_disc(g: &[BigInt]) -> BigInt {
    let poly = Poly::new(
        g.iter()
            .map(|v| BigRational::from_integer(v.clone()))
            .collect(),
    );
    let d = poly.discriminant();
    assert!(d.denom().is_one());
    d.numer().clone()
}

/// CRT the chosen component roots into F_p[x]/(g), Newton lift to the target
/// modulus, reconstruct rational coefficients and verify exactly.
#[allow(clippy::too_many_arguments)]
fn lift_and_verify(
    field: &NumberField,
    g: &[BigInt],
    gp: &PPoly,
    comps: &[PPoly],
    choice: &[&PPoly],
    p: i128,
    target: &BigInt,
    lambda: &BigInt,
) -> Option<FieldElement> {
    // CRT: h ≡ choice[i] mod comps[i]
    let mut h = PPoly::zero(p);
    for (i, gi) in comps.iter().enumerate() {
        let mut m_i = PPoly::one(p);
        for (j, gj) in comps.iter().enumerate() {
            if j != i {
                m_i = m_i.mul(gj);
            }
        }
        let (one, s, _) = m_i.rem(gi).extended_gcd(gi);
        if one.is_zero() || one.deg() != 0 {
            return None;
        }
        // term = choice * s * m_i mod g
        let term = choice[i].mul(&s).rem(gi).mul(&m_i).rem(gp);
        h = h.add(&term);
    }
    // Newton iteration in (Z/m)[x]/(g)
    let gprime: Vec<BigInt> = g
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let to_big = |w: &PPoly| -> Vec<BigInt> { w.c.iter().map(|&c| BigInt::from(c)).collect() };
    // initial inverse of g'(h) over F_p
    let gph = eval_poly_mod(&gprime.iter().map(|v| v.mod_floor(&BigInt::from(p)).to_i128().unwrap()).collect::<Vec<_>>(), &h, gp);
    let (one, s, _) = gph.extended_gcd(gp);
    if one.is_zero() || one.deg() != 0 {
        return None;
    }
    let mut y = to_big(&h);
    let mut z = to_big(&s);
    let mut m = BigInt::from(p);
    while &m < target {
        m = &m * &m;
        // y <- y - g(y) * z  (mod g, m)
        let gy = eval_big_poly(g, &y, g, &m);
        let corr = zm_divrem_monic(&zm_mul(&gy, &z, &m), g, &m).1;
        y = zm_sub(&y, &corr, &m);
        // z <- z * (2 - g'(y) z)
        let gpy = eval_big_poly(
            &gprime.iter().map(|v| v.mod_floor(&m)).collect::<Vec<_>>(),
            &y,
            g,
            &m,
        );
        let t = zm_mul(&gpy, &z, &m);
        let two_minus = zm_sub(&[BigInt::from(2)], &t, &m);
        z = zm_divrem_monic(&zm_mul(&z, &two_minus, &m), g, &m).1;
    }
    // reconstruct
    let bound_sqrt = {
        // bound chosen so that 2*bound^2 < m
        let mut b = m.sqrt();
        b = &b / 2;
        b
    };
    let mut coeffs: Vec<Rat> = vec![];
    for i in 0..field.degree() {
        let c = y.get(i).cloned().unwrap_or_else(BigInt::zero);
        let r = rational_reconstruct(&c, &m, &bound_sqrt)?;
        coeffs.push(r);
    }
    // beta = lambda * alpha: translate coefficients and divide the root
    let lam = BigRational::from_integer(lambda.clone());
    let mut alpha_coeffs = vec![];
    let mut pw = BigRational::one();
    for c in coeffs {
        alpha_coeffs.push(c * &pw);
        pw *= &lam;
    }
    let beta_root = field.element(alpha_coeffs);
    let root = beta_root.mul_rat(&(BigRational::one() / lam));
    // exact verification over Q
    let f = field.min_poly();
    if root.eval_poly(f).is_zero() {
        Some(root)
    } else {
        None
    }
}

/// Evaluate a polynomial with F_p coefficients at an element of F_p[x]/(g).
fn eval_poly_mod(coeffs: &[i128], at: &PPoly, g: &PPoly) -> PPoly {
    let p = g.p;
    let mut acc = PPoly::zero(p);
    for &c in coeffs.iter().rev() {
        acc = acc.mul(at).rem(g).add(&PPoly::new(vec![c], p));
    }
    acc.rem(g)
}

/// Evaluate a polynomial with BigInt coefficients at an element of
/// (Z/m)[x]/(g), g monic.
fn eval_big_poly(coeffs: &[BigInt], at: &[BigInt], g: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut acc: Vec<BigInt> = vec![];
    for c in coeffs.iter().rev() {
        acc = zm_mul(&acc, at, m);
        if acc.is_empty() {
            acc = vec![c.mod_floor(m)];
        } else {
            acc[0] = (&acc[0] + c).mod_floor(m);
        }
        acc = zm_divrem_monic(&acc, g, m).1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::Poly;

    #[test]
    fn gaussian_field_has_two_automorphisms() {
        let qi = NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap();
        let autos = automorphisms(&qi);
        assert_eq!(autos.len(), 2);
        let conj = autos.iter().find(|a| !a.is_identity()).unwrap();
        assert_eq!(conj.gen_image, qi.gen().neg());
        assert!(is_galois(&qi));
    }

    #[test]
    fn sqrt2_has_two() {
        let f = NumberField::quadratic("s2", 2);
        assert_eq!(automorphisms(&f).len(), 2);
    }

    #[test]
    fn cyclotomic5_is_cyclic_of_order_4() {
        let f = NumberField::new("z5", Poly::from_i64(&[1, 1, 1, 1, 1])).unwrap();
        let autos = automorphisms(&f);
        assert_eq!(autos.len(), 4);
        // composition closes
        for a in &autos {
            for b in &autos {
                let c = a.compose(b);
                assert!(autos.iter().any(|x| x == &c));
            }
        }
    }

    #[test]
    fn zeta8_is_galois_degree_4() {
        let f = NumberField::new("z8", Poly::from_i64(&[1, 0, 0, 0, 1])).unwrap();
        let autos = automorphisms(&f);
        assert_eq!(autos.len(), 4);
    }

    #[test]
    fn pure_cubic_has_only_identity() {
        let f = NumberField::new("c", Poly::from_i64(&[-2, 0, 0, 1])).unwrap();
        let autos = automorphisms(&f);
        assert_eq!(autos.len(), 1);
        assert!(autos[0].is_identity());
        assert!(!is_galois(&f));
    }

    #[test]
    fn cyclic_cubic_field() {
        // x^3 + x^2 - 2x - 1, the real subfield of the 7th cyclotomic field
        let f = NumberField::new("c7", Poly::from_i64(&[-1, -2, 1, 1])).unwrap();
        assert!(is_galois(&f));
        assert_eq!(automorphisms(&f).len(), 3);
    }
}
