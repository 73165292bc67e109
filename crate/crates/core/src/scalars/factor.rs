//! Factorization of univariate polynomials over Q.
//!
//! The pipeline is classical: squarefree reduction, factorization modulo a
//! small prime (Berlekamp), Hensel lifting to a coefficient bound, and
//! subset recombination. Everything is exact; the mod-p screen alone cannot
//! certify irreducibility of polynomials such as x^4 - 10x^2 + 1 that are
//! reducible modulo every prime, which is why the full lift is kept.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Poly, Rat};

// ---------------------------------------------------------------------------
// Polynomials over F_p, p a small odd prime.
// ---------------------------------------------------------------------------

pub(crate) fn pnorm(mut a: i128, p: i128) -> i128 {
    a %= p;
    if a < 0 {
        a += p;
    }
    a
}

fn pinv(a: i128, p: i128) -> i128 {
    // extended Euclid
    let (mut r0, mut r1) = (p, pnorm(a, p));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        let r = r0 - q * r1;
        r0 = r1;
        r1 = r;
        let t = t0 - q * t1;
        t0 = t1;
        t1 = t;
    }
    assert!(r0 == 1, "element not invertible mod p");
    pnorm(t0, p)
}

/// Dense polynomial over F_p, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PPoly {
    pub c: Vec<i128>,
    pub p: i128,
}

impl PPoly {
    pub fn new(mut c: Vec<i128>, p: i128) -> Self {
        for v in c.iter_mut() {
            *v = pnorm(*v, p);
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        PPoly { c, p }
    }

    pub fn zero(p: i128) -> Self {
        PPoly { c: vec![], p }
    }

    pub fn one(p: i128) -> Self {
        PPoly { c: vec![1], p }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> usize {
        assert!(!self.is_zero());
        self.c.len() - 1
    }

    pub fn lead(&self) -> i128 {
        *self.c.last().unwrap()
    }

    pub fn monic(&self) -> PPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = pinv(self.lead(), self.p);
        PPoly::new(self.c.iter().map(|&v| v * inv).collect(), self.p)
    }

    pub fn add(&self, o: &PPoly) -> PPoly {
        let n = self.c.len().max(o.c.len());
        PPoly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).copied().unwrap_or(0) + o.c.get(i).copied().unwrap_or(0)
                })
                .collect(),
            self.p,
        )
    }

    pub fn sub(&self, o: &PPoly) -> PPoly {
        let n = self.c.len().max(o.c.len());
        PPoly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).copied().unwrap_or(0) - o.c.get(i).copied().unwrap_or(0)
                })
                .collect(),
            self.p,
        )
    }

    pub fn mul(&self, o: &PPoly) -> PPoly {
        if self.is_zero() || o.is_zero() {
            return PPoly::zero(self.p);
        }
        let mut out = vec![0i128; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = pnorm(out[i + j] + a * b, self.p);
            }
        }
        PPoly::new(out, self.p)
    }

    pub fn div_rem(&self, d: &PPoly) -> (PPoly, PPoly) {
        assert!(!d.is_zero());
        let p = self.p;
        let dd = d.deg();
        let linv = pinv(d.lead(), p);
        let mut rem = self.c.clone();
        let mut quo = vec![0i128; rem.len().saturating_sub(dd)];
        while rem.len() > dd {
            let c = pnorm(*rem.last().unwrap() * linv, p);
            let shift = rem.len() - 1 - dd;
            if c != 0 {
                for (i, &b) in d.c.iter().enumerate() {
                    rem[shift + i] = pnorm(rem[shift + i] - c * b, p);
                }
                quo[shift] = c;
            }
            rem.pop();
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        (PPoly::new(quo, p), PPoly::new(rem, p))
    }

    pub fn rem(&self, d: &PPoly) -> PPoly {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &PPoly) -> PPoly {
        let mut a = self.clone();
        let mut b = o.clone();
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

    /// Extended gcd: (g, s, t) with g = s*self + t*other, g monic.
    pub fn extended_gcd(&self, o: &PPoly) -> (PPoly, PPoly, PPoly) {
        let p = self.p;
        let mut r0 = self.clone();
        let mut r1 = o.clone();
        let mut s0 = PPoly::one(p);
        let mut s1 = PPoly::zero(p);
        let mut t0 = PPoly::zero(p);
        let mut t1 = PPoly::one(p);
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
        let inv = pinv(r0.lead(), p);
        let scale = |f: &PPoly| PPoly::new(f.c.iter().map(|&v| v * inv).collect(), p);
        (scale(&r0), scale(&s0), scale(&t0))
    }

    pub fn derivative(&self) -> PPoly {
        if self.c.len() <= 1 {
            return PPoly::zero(self.p);
        }
        PPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * (i as i128))
                .collect(),
            self.p,
        )
    }

    pub fn pow_mod(&self, mut e: u64, m: &PPoly) -> PPoly {
        let mut base = self.rem(m);
        let mut acc = PPoly::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).rem(m);
            }
        }
        acc
    }
}

/// Berlekamp factorization of a monic squarefree polynomial over F_p.
pub(crate) fn berlekamp(f: &PPoly) -> Vec<PPoly> {
    let p = f.p;
    let n = f.deg();
    if n <= 1 {
        return vec![f.clone()];
    }
    // Q matrix: row i = x^{i*p} mod f
    let xp = PPoly::new(vec![0, 1], p).pow_mod(p as u64, f);
    let mut rows: Vec<Vec<i128>> = Vec::with_capacity(n);
    let mut cur = PPoly::one(p);
    for _ in 0..n {
        let mut row = vec![0i128; n];
        for (j, &c) in cur.c.iter().enumerate() {
            row[j] = c;
        }
        rows.push(row);
        cur = cur.mul(&xp).rem(f);
    }
    // kernel of (Q - I)^T: we want polynomials v with v(x)^p = v(x) mod f,
    // i.e. v*Q = v when v is a coefficient row vector. Transpose to solve.
    let mut m = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[j][i] = pnorm(rows[i][j] - if i == j { 1 } else { 0 }, p);
        }
    }
    let kernel = fp_kernel(&m, p);
    let r = kernel.len();
    if r == 1 {
        return vec![f.monic()];
    }
    let mut factors = vec![f.monic()];
    for v in kernel.iter() {
        if factors.len() >= r {
            break;
        }
        let vp = PPoly::new(v.clone(), p);
        if vp.is_zero() || vp.deg() == 0 {
            continue;
        }
        let mut next = vec![];
        for g in factors.into_iter() {
            if g.deg() <= 1 || next.len() + 1 >= r {
                next.push(g);
                continue;
            }
            let mut pieces = vec![];
            let mut rest = g.clone();
            for s in 0..p {
                if rest.deg() == 0 {
                    break;
                }
                let shifted = vp.sub(&PPoly::new(vec![s], p));
                let d = rest.gcd(&shifted);
                if !d.is_zero() && d.deg() > 0 && d.deg() < rest.deg() {
                    rest = rest.div_rem(&d).0;
                    pieces.push(d);
                } else if !d.is_zero() && d.deg() == rest.deg() {
                    // whole thing
                }
            }
            if rest.deg() > 0 {
                pieces.push(rest.monic());
            }
            next.extend(pieces);
        }
        factors = next;
    }
    factors
}

/// Kernel basis of an n x n matrix over F_p (rows of the returned vectors are
/// coefficient vectors).
fn fp_kernel(m: &[Vec<i128>], p: i128) -> Vec<Vec<i128>> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut pivot_col_of_row = vec![];
    let mut row = 0;
    for col in 0..n {
        let mut piv = None;
        for r in row..n {
            if a[r][col] != 0 {
                piv = Some(r);
                break;
            }
        }
        let Some(piv) = piv else { continue };
        a.swap(row, piv);
        let inv = pinv(a[row][col], p);
        for j in 0..n {
            a[row][j] = pnorm(a[row][j] * inv, p);
        }
        for r in 0..n {
            if r != row && a[r][col] != 0 {
                let c = a[r][col];
                for j in 0..n {
                    a[r][j] = pnorm(a[r][j] - c * a[row][j], p);
                }
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == n {
            break;
        }
    }
    let pivots: Vec<usize> = pivot_col_of_row;
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = vec![];
    for &fc in &free {
        let mut v = vec![0i128; n];
        v[fc] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = pnorm(-a[r][fc], p);
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// Hensel lifting over Z/p^k.
// ---------------------------------------------------------------------------

pub(crate) fn zm_norm(c: &mut Vec<BigInt>, m: &BigInt) {
    for v in c.iter_mut() {
        *v = v.mod_floor(m);
    }
    while c.last().map_or(false, |v| v.is_zero()) {
        c.pop();
    }
}

pub(crate) fn zm_mul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    zm_norm(&mut out, m);
    out
}

pub(crate) fn zm_sub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let mut out: Vec<BigInt> = (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(BigInt::zero)
                - b.get(i).cloned().unwrap_or_else(BigInt::zero)
        })
        .collect();
    zm_norm(&mut out, m);
    out
}

pub(crate) fn zm_add(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let mut out: Vec<BigInt> = (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(BigInt::zero)
                + b.get(i).cloned().unwrap_or_else(BigInt::zero)
        })
        .collect();
    zm_norm(&mut out, m);
    out
}

/// Division with remainder by a monic polynomial over Z/m.
pub(crate) fn zm_divrem_monic(a: &[BigInt], d: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
    assert!(d.last().map_or(false, |v| v.is_one()), "divisor must be monic");
    let dd = d.len() - 1;
    let mut rem: Vec<BigInt> = a.to_vec();
    zm_norm(&mut rem, m);
    let mut quo = vec![BigInt::zero(); rem.len().saturating_sub(dd)];
    while rem.len() > dd {
        let c = rem.last().unwrap().clone();
        let shift = rem.len() - 1 - dd;
        if !c.is_zero() {
            for (i, b) in d.iter().enumerate() {
                let t = (&rem[shift + i] - &c * b).mod_floor(m);
                rem[shift + i] = t;
            }
            quo[shift] = c;
        }
        rem.pop();
        while rem.last().map_or(false, |v| v.is_zero()) {
            rem.pop();
        }
    }
    (quo, rem)
}

/// One linear Hensel step: f = g*h mod p^k becomes a factorization mod p^{k+1}.
/// g monic; s*g + t*h = 1 mod p.
#[allow(clippy::too_many_arguments)]
fn hensel_step(
    f: &[BigInt],
    g: &[BigInt],
    h: &[BigInt],
    s: &PPoly,
    t: &PPoly,
    p: i128,
    pk: &BigInt,
    pk1: &BigInt,
) -> (Vec<BigInt>, Vec<BigInt>) {
    // e = (f - g h)/p^k mod p
    let gh = zm_mul(g, h, pk1);
    let diff = zm_sub(f, &gh, pk1);
    let pe: Vec<i128> = diff
        .iter()
        .map(|v| {
            let q = v / pk;
            (q.mod_floor(&BigInt::from(p))).to_i128().unwrap()
        })
        .collect();
    let e = PPoly::new(pe, p);
    if e.is_zero() {
        return (g.to_vec(), h.to_vec());
    }
    // t*e = q*gbar + u  over F_p; then v = s*e + q*h
    let gbar = PPoly::new(
        g.iter()
            .map(|v| v.mod_floor(&BigInt::from(p)).to_i128().unwrap())
            .collect(),
        p,
    );
    let hbar = PPoly::new(
        h.iter()
            .map(|v| v.mod_floor(&BigInt::from(p)).to_i128().unwrap())
            .collect(),
        p,
    );
    let (q, u) = t.mul(&e).div_rem(&gbar);
    let v = s.mul(&e).add(&q.mul(&hbar));
    let lift = |w: &PPoly| -> Vec<BigInt> {
        w.c.iter().map(|&c| BigInt::from(c) * pk).collect::<Vec<_>>()
    };
    let g1 = zm_add(g, &lift(&u), pk1);
    let h1 = zm_add(h, &lift(&v), pk1);
    (g1, h1)
}

/// Lift the factorization f = prod(factors) from mod p to mod p^k (k doublings
/// are not used; we do plain linear steps, which is fast enough here).
fn hensel_lift_tree(
    f: &[BigInt],
    factors: &[PPoly],
    p: i128,
    steps: u32,
) -> Vec<Vec<BigInt>> {
    if factors.len() == 1 {
        // f itself reduced mod p^(steps+1); caller handles content
        let m = BigInt::from(p).pow(steps + 1);
        let mut out = f.to_vec();
        zm_norm(&mut out, &m);
        return vec![out];
    }
    let mid = factors.len() / 2;
    let gs = &factors[..mid];
    let hs = &factors[mid..];
    let gp = gs.iter().fold(PPoly::one(p), |a, b| a.mul(b));
    let hp = hs.iter().fold(PPoly::one(p), |a, b| a.mul(b));
    let (one, s, t) = gp.extended_gcd(&hp);
    assert!(one.deg() == 0, "factors not coprime mod p");
    let mut g: Vec<BigInt> = gp.c.iter().map(|&c| BigInt::from(c)).collect();
    let mut h: Vec<BigInt> = hp.c.iter().map(|&c| BigInt::from(c)).collect();
    let mut pk = BigInt::from(p);
    for _ in 0..steps {
        let pk1 = &pk * p;
        let (g1, h1) = hensel_step(f, &g, &h, &s, &t, p, &pk, &pk1);
        g = g1;
        h = h1;
        pk = pk1;
    }
    let mut out = hensel_lift_tree(&g, gs, p, steps);
    out.extend(hensel_lift_tree(&h, hs, p, steps));
    out
}

// ---------------------------------------------------------------------------
// Zassenhaus driver.
// ---------------------------------------------------------------------------

fn symmetric_rem(v: &BigInt, m: &BigInt) -> BigInt {
    let r = v.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Factor a squarefree primitive integer polynomial (positive leading coeff)
/// into irreducible integer polynomials.
fn factor_squarefree_z(f: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f.to_vec()];
    }
    // choose a prime not dividing lc(f) with f squarefree mod p
    let primes: [i128; 15] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let mut chosen = None;
    for &p in &primes {
        if (f.last().unwrap() % p).is_zero() {
            continue;
        }
        let fp = PPoly::new(
            f.iter()
                .map(|v| v.mod_floor(&BigInt::from(p)).to_i128().unwrap())
                .collect(),
            p,
        )
        .monic();
        if fp.deg() != n {
            continue;
        }
        let g = fp.gcd(&fp.derivative());
        if g.deg() == 0 {
            chosen = Some((p, fp));
            break;
        }
    }
    let (p, fp) = chosen.expect("no good prime below the search bound");
    let modular = berlekamp(&fp);
    if modular.len() == 1 {
        return vec![f.to_vec()];
    }
    // Mignotte-style bound on factor coefficients: 2^n * ||f||_2 * |lc|
    let norm2_sq: BigInt = f.iter().map(|c| c * c).sum();
    let mut norm2 = norm2_sq.sqrt() + 1;
    norm2 *= f.last().unwrap();
    let bound: BigInt = (BigInt::one() << n) * norm2;
    let target = &bound * 2 + 1;
    let mut steps = 0u32;
    let mut pk = BigInt::from(p);
    while pk < target {
        pk *= p;
        steps += 1;
    }
    let mut fmod = f.to_vec();
    zm_norm(&mut fmod, &pk);
    // make f monic mod p^k for the tree (divide by lc inverse)
    let lc = f.last().unwrap().clone();
    let lc_inv = modinv_bigint(&lc, &pk);
    let fmonic: Vec<BigInt> = fmod.iter().map(|c| (c * &lc_inv).mod_floor(&pk)).collect();
    let lifted = hensel_lift_tree(&fmonic, &modular, p, steps);
    // subset recombination
    let mut remaining: Vec<Vec<BigInt>> = lifted;
    let mut current = f.to_vec();
    let mut result = vec![];
    let mut subset_size = 1;
    'outer: while 2 * subset_size <= remaining.len() {
        let idxs: Vec<usize> = (0..remaining.len()).collect();
        for combo in combinations(&idxs, subset_size) {
            let lc_cur = current.last().unwrap().clone();
            let mut cand = vec![lc_cur.clone()];
            for &i in &combo {
                cand = zm_mul(&cand, &remaining[i], &pk);
            }
            let cand_sym: Vec<BigInt> = cand.iter().map(|v| symmetric_rem(v, &pk)).collect();
            let cand_prim = primitive_part(&cand_sym);
            if cand_prim.len() < 2 {
                continue;
            }
            if let Some(quot) = exact_divide_z(&current, &cand_prim) {
                result.push(cand_prim);
                current = quot;
                let combo_set: std::collections::HashSet<usize> = combo.into_iter().collect();
                remaining = remaining
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !combo_set.contains(i))
                    .map(|(_, v)| v)
                    .collect();
                continue 'outer;
            }
        }
        subset_size += 1;
    }
    if current.len() > 1 {
        result.push(primitive_part(&current));
    }
    result
}

pub(crate) fn modinv_bigint(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let n = items.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn primitive_part(f: &[BigInt]) -> Vec<BigInt> {
    let mut c = BigInt::zero();
    for v in f {
        c = c.gcd(v);
    }
    if c.is_zero() {
        return f.to_vec();
    }
    let mut out: Vec<BigInt> = f.iter().map(|v| v / &c).collect();
    if out.last().map_or(false, |v| v.is_negative()) {
        for v in out.iter_mut() {
            *v = -v.clone();
        }
    }
    out
}

/// Exact division in Z[x]; returns None if it does not divide.
fn exact_divide_z(f: &[BigInt], d: &[BigInt]) -> Option<Vec<BigInt>> {
    if d.len() > f.len() {
        return None;
    }
    let mut rem: Vec<BigInt> = f.to_vec();
    let mut quo = vec![BigInt::zero(); f.len() - d.len() + 1];
    let dl = d.last().unwrap();
    while rem.len() >= d.len() {
        let top = rem.last().unwrap();
        if top.is_zero() {
            rem.pop();
            continue;
        }
        let (q, r) = top.div_rem(dl);
        if !r.is_zero() {
            return None;
        }
        let shift = rem.len() - d.len();
        for (i, b) in d.iter().enumerate() {
            let t = &rem[shift + i] - &q * b;
            rem[shift + i] = t;
        }
        quo[shift] = q;
        while rem.last().map_or(false, |v| v.is_zero()) {
            rem.pop();
        }
        if rem.len() < d.len() {
            break;
        }
    }
    if rem.is_empty() {
        Some(quo)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Public interface over Q.
// ---------------------------------------------------------------------------

/// Monic irreducible factors of f over Q with multiplicities.
pub fn factor_over_q(f: &Poly) -> Vec<(Poly, usize)> {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    if f.deg() == 0 {
        return vec![];
    }
    let mut result: Vec<(Poly, usize)> = vec![];
    // squarefree decomposition by repeated gcd
    let mut rest = f.monic();
    let mut mult = 1usize;
    let mut parts: Vec<(Poly, usize)> = vec![];
    loop {
        let sf = rest.squarefree_part();
        parts.push((sf.clone(), mult));
        let quotient = rest.div_rem(&sf).0;
        if quotient.degree() == Some(0) {
            break;
        }
        rest = quotient.monic();
        mult += 1;
    }
    // parts[i] = squarefree poly whose roots have multiplicity >= i+1; convert
    // to exact multiplicity factors
    for i in 0..parts.len() {
        let (cur, m) = parts[i].clone();
        let next = parts.get(i + 1).map(|x| x.0.clone()).unwrap_or_else(Poly::one);
        let exact = cur.div_rem(&next).0;
        if exact.degree() == Some(0) {
            continue;
        }
        let ints = exact.primitive_integer();
        for g in factor_squarefree_z(&ints) {
            let poly = Poly::new(g.iter().map(|v| Rat::from_integer(v.clone())).collect()).monic();
            result.push((poly, m));
        }
    }
    result.sort_by(|a, b| {
        a.0.deg()
            .cmp(&b.0.deg())
            .then_with(|| format!("{:?}", a.0.coeffs).cmp(&format!("{:?}", b.0.coeffs)))
    });
    result
}

pub fn is_irreducible_over_q(f: &Poly) -> bool {
    if f.is_zero() || f.deg() == 0 {
        return false;
    }
    if f.deg() == 1 {
        return true;
    }
    let facs = factor_over_q(f);
    facs.len() == 1 && facs[0].1 == 1 && facs[0].0.deg() == f.deg()
}

/// Rational reconstruction of a residue mod m: find n/d with |n|, d <= bound,
/// n ≡ a*d mod m. Returns None when no such small fraction exists.
pub(crate) fn rational_reconstruct(a: &BigInt, m: &BigInt, bound: &BigInt) -> Option<BigRational> {
    let mut r0 = m.clone();
    let mut r1 = a.mod_floor(m);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while &r1 > bound {
        let q = &r0 / &r1;
        let r = &r0 - &q * &r1;
        r0 = r1;
        r1 = r;
        let t = &t0 - &q * &t1;
        t0 = t1;
        t1 = t;
    }
    if t1.is_zero() || t1.abs() > *bound {
        return None;
    }
    let num = if t1.is_negative() { -&r1 } else { r1.clone() };
    let den = t1.abs();
    if den.is_zero() {
        return None;
    }
    // verify
    let cand = BigRational::new(num, den);
    let check = (cand.numer() - a * cand.denom()).mod_floor(m);
    if check.is_zero() {
        Some(cand)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::rat;

    #[test]
    fn irreducible_quadratics_and_cyclotomics() {
        assert!(is_irreducible_over_q(&Poly::from_i64(&[-2, 0, 1])));
        assert!(is_irreducible_over_q(&Poly::from_i64(&[1, 0, 1])));
        assert!(is_irreducible_over_q(&Poly::from_i64(&[1, 1, 1, 1, 1])));
        assert!(is_irreducible_over_q(&Poly::from_i64(&[1, 0, 0, 0, 1])));
    }

    #[test]
    fn biquadratic_min_poly_is_irreducible() {
        // min poly of sqrt2 + sqrt3; reducible mod every prime
        assert!(is_irreducible_over_q(&Poly::from_i64(&[1, 0, -10, 0, 1])));
    }

    #[test]
    fn splits_products() {
        let f = Poly::from_i64(&[-2, 0, 1]).mul(&Poly::from_i64(&[1, 0, 1]));
        let fac = factor_over_q(&f);
        assert_eq!(fac.len(), 2);
        assert!(fac.iter().all(|(_, m)| *m == 1));
        let g = Poly::from_i64(&[-1, 1]).pow(2).mul(&Poly::from_i64(&[3, 1]));
        let fac = factor_over_q(&g);
        assert_eq!(fac.len(), 2);
        let mult: usize = fac.iter().map(|(_, m)| m).sum();
        assert_eq!(mult, 3);
    }

    #[test]
    fn x4_plus_one_style_composites() {
        // (x^2+1)(x^2-2): both factors recovered
        let f = Poly::from_i64(&[1, 0, 1]).mul(&Poly::from_i64(&[-2, 0, 1]));
        let fac = factor_over_q(&f);
        assert_eq!(fac.len(), 2);
        for (g, _) in &fac {
            assert_eq!(g.deg(), 2);
        }
    }

    #[test]
    fn rational_reconstruction_small_fraction() {
        let m = BigInt::from(1_000_003i64);
        // encode 22/7 mod m
        let seven_inv = super::modinv_bigint(&BigInt::from(7), &m);
        let a = (BigInt::from(22) * seven_inv).mod_floor(&m);
        let got = rational_reconstruct(&a, &m, &BigInt::from(100)).unwrap();
        assert_eq!(got, rat(22) / rat(7));
    }
}
