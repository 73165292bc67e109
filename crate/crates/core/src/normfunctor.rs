//! The norm functor from modules over an etale Q-algebra to Q-vector
//! spaces: carrier construction as a symmetric-power quotient, the normic
//! polynomial map, induced maps on morphisms and algebras, the Lie-level
//! eta homomorphism via dual numbers, and a Galois-descent cross-check.

use std::collections::HashMap;
use std::fmt;

use crate::linalg::{Mat, Scalar};
use crate::quadspace::EAction;
use crate::scalars::autos;
use crate::scalars::dual::DualNum;
use crate::scalars::poly::{rat, Rat};
use crate::scalars::{EtaleAlgebra, FieldElement, NumberField};

#[derive(Debug, Clone, PartialEq)]
pub enum NormError {
    NotFaithful,
    NotELinear,
    NotAssociative,
    TooLarge,
    InconsistentInput,
    Unsupported(String),
}

impl fmt::Display for NormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormError::NotFaithful => write!(f, "module is not faithful; the norm vanishes"),
            NormError::NotELinear => write!(f, "map does not commute with the E-action"),
            NormError::NotAssociative => write!(f, "algebra data is not associative"),
            NormError::TooLarge => write!(f, "desk-scale cap exceeded"),
            NormError::InconsistentInput => write!(f, "inconsistent input"),
            NormError::Unsupported(s) => write!(f, "unsupported: {}", s),
        }
    }
}

impl std::error::Error for NormError {}

// ---------------------------------------------------------------------------
// Multiset bookkeeping for symmetric powers
// ---------------------------------------------------------------------------

fn multisets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![0usize; d];
    loop {
        out.push(cur.clone());
        // next non-decreasing tuple
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < n {
                cur[i] += 1;
                for j in i + 1..d {
                    cur[j] = cur[i];
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

/// Distinct arrangements of a sorted multiset.
fn arrangements(ms: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = ms.to_vec();
    loop {
        out.push(cur.clone());
        // next_permutation
        if cur.len() < 2 {
            return out;
        }
        let mut i = cur.len() - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = cur.len() - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

fn tuple_rank(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &i| acc * n + i)
}

/// Add the pure tensor v_1 x ... x v_d into a tuple-indexed accumulator.
fn expand_pure<T: Scalar>(acc: &mut [T], vecs: &[Vec<T>], n: usize) {
    fn rec<T: Scalar>(
        acc: &mut [T],
        vecs: &[Vec<T>],
        n: usize,
        level: usize,
        idx: usize,
        coeff: &T,
    ) {
        if level == vecs.len() {
            acc[idx] = acc[idx].add(coeff);
            return;
        }
        for (i, c) in vecs[level].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let nc = coeff.mul(c);
            rec(acc, vecs, n, level + 1, idx * n + i, &nc);
        }
    }
    let one = acc[0].one_like();
    rec(acc, vecs, n, 0, 0, &one);
}

/// Read symmetric coordinates (sorted-representative convention) out of a
/// tuple-indexed vector that is known to be symmetric.
fn read_sym<T: Scalar>(acc: &[T], sym_basis: &[Vec<usize>], n: usize) -> Vec<T> {
    sym_basis
        .iter()
        .map(|ms| acc[tuple_rank(ms, n)].clone())
        .collect()
}

// ---------------------------------------------------------------------------
// Modules over an etale algebra
// ---------------------------------------------------------------------------

/// A finite-dimensional Q-space with an action of an etale algebra.
#[derive(Clone, Debug)]
pub struct EModule {
    base: EtaleAlgebra,
    action: EAction,
    q_dim: usize,
    ranks: Vec<usize>,
}

impl EModule {
    pub fn new(base: EtaleAlgebra, action: EAction) -> Result<Self, NormError> {
        if action.algebra != base {
            return Err(NormError::InconsistentInput);
        }
        if !action.is_action() {
            return Err(NormError::InconsistentInput);
        }
        let q_dim = action.matrices[0].rows;
        let mut ranks = vec![];
        for (i, f) in base.factors().iter().enumerate() {
            let proj = action.of(&base.inject(i, f.one()));
            let r = proj.rank();
            if r % f.degree() != 0 {
                return Err(NormError::InconsistentInput);
            }
            ranks.push(r / f.degree());
        }
        Ok(EModule {
            base,
            action,
            q_dim,
            ranks,
        })
    }

    /// The free module E^rank with the regular action on each coordinate.
    pub fn free(base: &EtaleAlgebra, rank: usize) -> Self {
        let deg = base.total_degree();
        let dim = rank * deg;
        let basis = base.q_basis();
        let mut mats = vec![];
        for b in &basis {
            let mut small = Mat::filled(deg, deg, rat(0));
            for (k, bk) in basis.iter().enumerate() {
                let coords = base.q_coords(&b.mul(bk));
                for (l, c) in coords.into_iter().enumerate() {
                    small[(l, k)] = c;
                }
            }
            let mut big = Mat::filled(dim, dim, rat(0));
            for j in 0..rank {
                for r in 0..deg {
                    for c in 0..deg {
                        big[(j * deg + r, j * deg + c)] = small.at(r, c).clone();
                    }
                }
            }
            mats.push(big);
        }
        EModule::new(
            base.clone(),
            EAction {
                algebra: base.clone(),
                matrices: mats,
            },
        )
        .expect("free module action is valid")
    }

    pub fn base(&self) -> &EtaleAlgebra {
        &self.base
    }

    pub fn action(&self) -> &EAction {
        &self.action
    }

    pub fn q_dim(&self) -> usize {
        self.q_dim
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn is_faithful(&self) -> bool {
        self.ranks.iter().all(|&r| r > 0)
    }

    /// Does a Q-matrix commute with the whole E-action?
    pub fn is_e_linear(&self, f: &Mat<Rat>) -> bool {
        self.action
            .matrices
            .iter()
            .all(|m| m.matmul(f) == f.matmul(m))
    }
}

// ---------------------------------------------------------------------------
// The norm module
// ---------------------------------------------------------------------------

/// N(M) = Sym^d(M) tensored over Sym^d(E) with Q via the norm augmentation.
#[derive(Clone, Debug)]
pub struct NormModule {
    module: EModule,
    d: usize,
    sym_basis: Vec<Vec<usize>>,
    /// reduced relation rows over the symmetric basis
    rel_rref: Mat<Rat>,
    pivots: Vec<usize>,
    free_cols: Vec<usize>,
}

impl NormModule {
    pub fn build(module: &EModule) -> Result<Self, NormError> {
        if !module.is_faithful() {
            return Err(NormError::NotFaithful);
        }
        let d = module.base.total_degree();
        // desk-scale cap measured by the actual tensor table size, so the
        // trivial d = 1 case passes through untruncated
        if d > 3 || module.q_dim.pow(d as u32) > 4096 {
            return Err(NormError::TooLarge);
        }
        let n = module.q_dim;
        let sym_basis = multisets(n, d);
        let sdim = sym_basis.len();
        // augmentation character on Sym^d(E)
        let e_sym = multisets(module.base.total_degree(), d);
        let chi = norm_character(&module.base, &e_sym)?;
        // relations: s . x - chi(s) x for s, x over the bases
        let mut rows: Vec<Vec<Rat>> = vec![];
        for (si, s) in e_sym.iter().enumerate() {
            for t in &sym_basis {
                let mut acc = vec![rat(0); n.pow(d as u32)];
                for a in arrangements(s) {
                    for b in arrangements(t) {
                        let vecs: Vec<Vec<Rat>> = (0..d)
                            .map(|i| module.action.matrices[a[i]].col_vec(b[i]))
                            .collect();
                        expand_pure(&mut acc, &vecs, n);
                    }
                }
                let mut row = read_sym(&acc, &sym_basis, n);
                // subtract chi(s) * x; x expands to one coordinate per
                // arrangement and our convention reads one representative,
                // so the coefficient is #arr(s) * chi-weighted... no: the
                // action of e_S on e_T expands with all arrangement pairs,
                // while e_T itself has coefficient 1 on each arrangement.
                // chi(s) e_T therefore subtracts chi(s) at the T coordinate
                // times the number of arrangements of s paired against the
                // fixed readout arrangement; both sides use the same sorted
                // readout, so the factor is exactly chi[s].
                let ti = sym_basis.iter().position(|u| u == t).unwrap();
                row[ti] = row[ti].clone() - &chi[si];
                if row.iter().any(|c| !Scalar::is_zero(c)) {
                    rows.push(row);
                }
            }
        }
        let rel = if rows.is_empty() {
            Mat::filled(1, sdim, rat(0))
        } else {
            Mat::from_rows(rows)
        };
        let (rref, pivots) = rel.rref();
        let free_cols: Vec<usize> = (0..sdim).filter(|c| !pivots.contains(c)).collect();
        Ok(NormModule {
            module: module.clone(),
            d,
            sym_basis,
            rel_rref: rref,
            pivots,
            free_cols,
        })
    }

    pub fn module(&self) -> &EModule {
        &self.module
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.free_cols.len()
    }

    /// Multiset representative of a carrier basis element.
    pub fn basis_multiset(&self, i: usize) -> &[usize] {
        &self.sym_basis[self.free_cols[i]]
    }

    /// Project a symmetric-coordinate vector to carrier coordinates.
    pub fn project<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        let mut out: Vec<T> = self.free_cols.iter().map(|&c| v[c].clone()).collect();
        for (ri, &pc) in self.pivots.iter().enumerate() {
            if v[pc].is_zero() {
                continue;
            }
            for (oi, &fc) in self.free_cols.iter().enumerate() {
                let coeff = self.rel_rref.at(ri, fc);
                if Scalar::is_zero(coeff) {
                    continue;
                }
                let t = v[pc].scale_rat(coeff);
                out[oi] = out[oi].sub(&t);
            }
        }
        out
    }

    /// The normic map: class of the d-th power of a module vector.
    pub fn nu(&self, m: &[Rat]) -> Vec<Rat> {
        self.nu_generic(m)
    }

    /// nu over any coefficient ring extending Q (dual numbers give the
    /// derivative of the normic map).
    pub fn nu_generic<T: Scalar>(&self, m: &[T]) -> Vec<T> {
        assert_eq!(m.len(), self.module.q_dim);
        let n = self.module.q_dim;
        let mut acc = vec![m[0].zero_like(); n.pow(self.d as u32)];
        let vecs: Vec<Vec<T>> = (0..self.d).map(|_| m.to_vec()).collect();
        expand_pure(&mut acc, &vecs, n);
        let sym = read_sym(&acc, &self.sym_basis, n);
        self.project(&sym)
    }

    /// Generic symmetric power of a matrix, restricted to the carrier.
    fn sym_power_on_carrier<T: Scalar>(&self, f: &Mat<T>) -> Mat<T> {
        let n = self.module.q_dim;
        let like = f.at(0, 0).clone();
        let dim = self.dim();
        let mut out = Mat::zero(dim, dim, &like);
        for (ci, &fc) in self.free_cols.iter().enumerate() {
            let t = &self.sym_basis[fc];
            let mut acc = vec![like.zero_like(); n.pow(self.d as u32)];
            for b in arrangements(t) {
                let vecs: Vec<Vec<T>> = (0..self.d).map(|i| f.col_vec(b[i])).collect();
                expand_pure(&mut acc, &vecs, n);
            }
            let sym = read_sym(&acc, &self.sym_basis, n);
            let proj = self.project(&sym);
            for (r, v) in proj.into_iter().enumerate() {
                out[(r, ci)] = v;
            }
        }
        out
    }

    /// The induced map N(f) on the carrier for an E-linear map f.
    pub fn norm_morphism(&self, f: &Mat<Rat>) -> Result<Mat<Rat>, NormError> {
        if !self.module.is_e_linear(f) {
            return Err(NormError::NotELinear);
        }
        Ok(self.sym_power_on_carrier(f))
    }

    /// Lie-level eta: N(1 + eps X) = 1 + eps * eta_lie(X), computed with
    /// dual numbers.
    pub fn eta_lie(&self, x: &Mat<Rat>) -> Result<Mat<Rat>, NormError> {
        if !self.module.is_e_linear(x) {
            return Err(NormError::NotELinear);
        }
        let n = self.module.q_dim;
        let mut f = Mat::filled(n, n, DualNum::constant(rat(0)));
        for r in 0..n {
            for c in 0..n {
                let re = if r == c { rat(1) } else { rat(0) };
                f[(r, c)] = DualNum::new(re, x.at(r, c).clone());
            }
        }
        let nf = self.sym_power_on_carrier(&f);
        let dim = self.dim();
        let mut out = Mat::filled(dim, dim, rat(0));
        for r in 0..dim {
            for c in 0..dim {
                let v = nf.at(r, c);
                let expect = if r == c { rat(1) } else { rat(0) };
                if v.re != expect {
                    return Err(NormError::InconsistentInput);
                }
                out[(r, c)] = v.eps.clone();
            }
        }
        Ok(out)
    }
}

/// The norm character chi on Sym^d(E), determined by chi(e^{(x)d}) = Norm(e).
fn norm_character(e: &EtaleAlgebra, e_sym: &Vec<Vec<usize>>) -> Result<Vec<Rat>, NormError> {
    let deg = e.total_degree();
    let d = deg;
    let dim = e_sym.len();
    let index: HashMap<&[usize], usize> = e_sym
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();
    // sample elements with small integer coordinates until the powers span
    let mut rows: Vec<Vec<Rat>> = vec![];
    let mut rhs: Vec<Rat> = vec![];
    let mut counter = 0u64;
    let mut rank = 0;
    while rank < dim {
        counter += 1;
        if counter > 100_000 {
            return Err(NormError::Unsupported(
                "norm character sampling failed to span".into(),
            ));
        }
        // digits of the counter in base 4, shifted to -1..2
        let mut coords = vec![rat(0); deg];
        let mut c = counter;
        for slot in coords.iter_mut() {
            *slot = rat((c % 4) as i64 - 1);
            c /= 4;
        }
        let elt = e.from_q_coords(&coords);
        // power coordinates: prod over sorted multiset entries
        let mut row = vec![rat(0); dim];
        for (ms, &i) in index.iter() {
            let mut p = rat(1);
            for &k in ms.iter() {
                p *= &coords[k];
            }
            row[i] = p;
        }
        let _ = d;
        let mut trial = rows.clone();
        trial.push(row.clone());
        let r = Mat::from_rows(trial.clone()).rank();
        if r > rank {
            rank = r;
            rows.push(row);
            rhs.push(elt.norm());
        }
    }
    // solve chi from rows * chi = rhs
    let m = Mat::from_rows(rows);
    m.solve(&rhs).ok_or(NormError::InconsistentInput)
}

// ---------------------------------------------------------------------------
// Algebras and their norms
// ---------------------------------------------------------------------------

/// An associative unital E-algebra presented on an EModule: left
/// multiplication matrices for each Q-basis vector, plus the unit.
#[derive(Clone, Debug)]
pub struct EAlgebraData {
    pub module: EModule,
    pub mult: Vec<Mat<Rat>>,
    pub one: Vec<Rat>,
}

impl EAlgebraData {
    pub fn new(module: EModule, mult: Vec<Mat<Rat>>, one: Vec<Rat>) -> Result<Self, NormError> {
        let n = module.q_dim;
        if mult.len() != n || one.len() != n {
            return Err(NormError::InconsistentInput);
        }
        let a = EAlgebraData { module, mult, one };
        if !a.check_associative_unital() {
            return Err(NormError::NotAssociative);
        }
        Ok(a)
    }

    fn left_mult_of(&self, v: &[Rat]) -> Mat<Rat> {
        let n = v.len();
        let mut acc = Mat::filled(n, n, rat(0));
        for (k, c) in v.iter().enumerate() {
            if Scalar::is_zero(c) {
                continue;
            }
            acc = acc.add_mat(&self.mult[k].scale(c));
        }
        acc
    }

    fn check_associative_unital(&self) -> bool {
        let n = self.module.q_dim;
        // unit
        if self.left_mult_of(&self.one) != Mat::identity(n, &rat(1)) {
            return false;
        }
        // associativity: L_{b_i b_j} = L_i L_j
        for i in 0..n {
            for j in 0..n {
                let mut unit = vec![rat(0); n];
                unit[j] = rat(1);
                let bij = self.mult[i].mul_vec(&unit);
                if self.left_mult_of(&bij) != self.mult[i].matmul(&self.mult[j]) {
                    return false;
                }
            }
        }
        // the E-action is central and matches multiplication by e*1
        for m in &self.module.action.matrices {
            let e_one = m.mul_vec(&self.one);
            if self.left_mult_of(&e_one) != *m {
                return false;
            }
            for l in &self.mult {
                if m.matmul(l) != l.matmul(m) {
                    return false;
                }
            }
        }
        true
    }

    pub fn mul_vecs(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        self.left_mult_of(a).mul_vec(b)
    }
}

/// The norm of an algebra: the carrier with its induced multiplication.
#[derive(Clone, Debug)]
pub struct NormAlgebra {
    pub norm: NormModule,
    /// left multiplication matrices for each carrier basis element
    pub mult: Vec<Mat<Rat>>,
    pub one: Vec<Rat>,
}

pub fn norm_algebra(a: &EAlgebraData) -> Result<NormAlgebra, NormError> {
    let norm = NormModule::build(&a.module)?;
    let dim = norm.dim();
    let n = a.module.q_dim;
    let d = norm.d;
    let mut mult = vec![];
    for bi in 0..dim {
        let s = norm.sym_basis[norm.free_cols[bi]].clone();
        let mut m = Mat::filled(dim, dim, rat(0));
        for bj in 0..dim {
            let t = norm.sym_basis[norm.free_cols[bj]].clone();
            let mut acc = vec![rat(0); n.pow(d as u32)];
            for arr_s in arrangements(&s) {
                for arr_t in arrangements(&t) {
                    let vecs: Vec<Vec<Rat>> = (0..d)
                        .map(|i| a.mult[arr_s[i]].col_vec(arr_t[i]))
                        .collect();
                    expand_pure(&mut acc, &vecs, n);
                }
            }
            let sym = read_sym(&acc, &norm.sym_basis, n);
            let col = norm.project(&sym);
            for (r, v) in col.into_iter().enumerate() {
                m[(r, bj)] = v;
            }
        }
        mult.push(m);
    }
    let one = norm.nu(&a.one);
    let alg = NormAlgebra { norm, mult, one };
    // the unit must act as the identity
    if alg.left_mult_of(&alg.one) != Mat::identity(dim, &rat(1)) {
        return Err(NormError::NotAssociative);
    }
    Ok(alg)
}

impl NormAlgebra {
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn left_mult_of(&self, v: &[Rat]) -> Mat<Rat> {
        let dim = self.dim();
        let mut acc = Mat::filled(dim, dim, rat(0));
        for (k, c) in v.iter().enumerate() {
            if Scalar::is_zero(c) {
                continue;
            }
            acc = acc.add_mat(&self.mult[k].scale(c));
        }
        acc
    }

    pub fn mul_vecs(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        self.left_mult_of(a).mul_vec(b)
    }

    /// nu on the underlying algebra, landing in the carrier.
    pub fn nu(&self, a: &[Rat]) -> Vec<Rat> {
        self.norm.nu(a)
    }
}

/// The action of N(A) on N(M) induced by an A-action on M: one carrier
/// matrix per carrier basis element of N(A). The A-action is given by
/// matrices of the Q-basis vectors of A acting on M.
pub fn norm_module_action(
    a: &EAlgebraData,
    n_alg: &NormAlgebra,
    action_on_m: &[Mat<Rat>],
    n_mod: &NormModule,
) -> Result<Vec<Mat<Rat>>, NormError> {
    let na = a.module.q_dim;
    let nm = n_mod.module.q_dim;
    if action_on_m.len() != na {
        return Err(NormError::InconsistentInput);
    }
    // module axioms: action(b_i . b_j) = action(b_i) action(b_j), unit acts
    // as identity, and the central E agrees with M's E-action
    let act_of = |v: &[Rat]| -> Mat<Rat> {
        let mut acc = Mat::filled(nm, nm, rat(0));
        for (k, c) in v.iter().enumerate() {
            if Scalar::is_zero(c) {
                continue;
            }
            acc = acc.add_mat(&action_on_m[k].scale(c));
        }
        acc
    };
    if act_of(&a.one) != Mat::identity(nm, &rat(1)) {
        return Err(NormError::InconsistentInput);
    }
    for i in 0..na {
        for j in 0..na {
            let mut unit = vec![rat(0); na];
            unit[j] = rat(1);
            let bij = a.mult[i].mul_vec(&unit);
            if act_of(&bij) != action_on_m[i].matmul(&action_on_m[j]) {
                return Err(NormError::InconsistentInput);
            }
        }
    }
    for (em_a, em_m) in a
        .module
        .action
        .matrices
        .iter()
        .zip(&n_mod.module.action.matrices)
    {
        let e_in_a = em_a.mul_vec(&a.one);
        if act_of(&e_in_a) != *em_m {
            return Err(NormError::InconsistentInput);
        }
    }
    let d = n_mod.d;
    if d != n_alg.norm.d {
        return Err(NormError::InconsistentInput);
    }
    let mut out = vec![];
    for bi in 0..n_alg.dim() {
        let s = n_alg.norm.sym_basis[n_alg.norm.free_cols[bi]].clone();
        let mut m = Mat::filled(n_mod.dim(), n_mod.dim(), rat(0));
        for bj in 0..n_mod.dim() {
            let t = n_mod.sym_basis[n_mod.free_cols[bj]].clone();
            let mut acc = vec![rat(0); nm.pow(d as u32)];
            for arr_s in arrangements(&s) {
                for arr_t in arrangements(&t) {
                    let vecs: Vec<Vec<Rat>> = (0..d)
                        .map(|i| action_on_m[arr_s[i]].col_vec(arr_t[i]))
                        .collect();
                    expand_pure(&mut acc, &vecs, nm);
                }
            }
            let sym = read_sym(&acc, &n_mod.sym_basis, nm);
            let col = n_mod.project(&sym);
            for (r, v) in col.into_iter().enumerate() {
                m[(r, bj)] = v;
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Expand a matrix over an etale algebra to the rational matrix on the
/// underlying Q-space, with coordinates ordered (module index, E-basis
/// index).
pub fn etale_block_matrix(e: &EtaleAlgebra, m: &Mat<crate::scalars::EtaleElement>) -> Mat<Rat> {
    let deg = e.total_degree();
    let rows = m.rows * deg;
    let cols = m.cols * deg;
    let mut out = Mat::filled(rows, cols, rat(0));
    for r in 0..m.rows {
        for c in 0..m.cols {
            let b = e.mult_matrix(m.at(r, c));
            for i in 0..deg {
                for j in 0..deg {
                    out[(r * deg + i, c * deg + j)] = b.at(i, j).clone();
                }
            }
        }
    }
    out
}

/// The EModule structure of E^rank-shaped coefficient spaces presented over
/// the same coordinate convention as `etale_block_matrix`.
pub fn coefficient_emodule(e: &EtaleAlgebra, rank: usize) -> EModule {
    EModule::free(e, rank)
}

// ---------------------------------------------------------------------------
// Galois descent cross-check
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DescentReport {
    pub tensor_dim_over_l: usize,
    pub invariants_dim_over_q: usize,
    pub carrier_dim: usize,
    pub iso_found: bool,
    pub nu_compatible: bool,
}

/// Build the tensor product of the embeddings' scalar extensions over the
/// splitting field (the field itself, for a Galois base), the isomorphism
/// with the carrier characterized by nu(m) -> (x)_sigma m_sigma, and the
/// Galois-invariant dimension count.
pub fn descent_check(n: &NormModule) -> Result<DescentReport, NormError> {
    let e = n.module.base();
    if !e.is_field() {
        return Err(NormError::Unsupported(
            "descent check is implemented for field bases".into(),
        ));
    }
    let field = e.as_field().clone();
    let d = field.degree();
    let sigmas = autos::automorphisms(&field);
    if sigmas.len() != d {
        return Err(NormError::Unsupported(
            "descent check needs a Galois base field".into(),
        ));
    }
    let qd = n.module.q_dim();
    let rank = n.module.ranks()[0];
    // eigenbasis of the action on M (x) L for each embedding
    let gen_mat = module_gen_matrix(&n.module);
    let gen_l = gen_mat.map(|r| field.from_rat(r.clone()));
    let mut eigen: Vec<Vec<Vec<FieldElement>>> = vec![];
    for s in &sigmas {
        let lam = s.gen_image.clone();
        let shift = gen_l.sub_mat(&Mat::identity(qd, &field.one()).scale(&lam));
        let kern = shift.kernel();
        if kern.len() != rank {
            return Err(NormError::Unsupported(
                "eigenspace dimension mismatch in descent".into(),
            ));
        }
        eigen.push(kern);
    }
    let tensor_dim = rank.pow(d as u32);
    // linear map T: carrier (x) L -> tensor, determined on nu-images
    // sample module vectors until their nu-images span the carrier
    let mut samples: Vec<Vec<Rat>> = vec![];
    let mut nu_rows: Vec<Vec<Rat>> = vec![];
    let mut counter = 0u64;
    while Mat::from_rows(if nu_rows.is_empty() {
        vec![vec![rat(0); n.dim()]]
    } else {
        nu_rows.clone()
    })
    .rank()
        < n.dim()
    {
        counter += 1;
        if counter > 200_000 {
            return Err(NormError::Unsupported("nu images failed to span".into()));
        }
        let mut coords = vec![rat(0); qd];
        let mut c = counter;
        for slot in coords.iter_mut() {
            *slot = rat((c % 3) as i64 - 1);
            c /= 3;
        }
        let img = n.nu(&coords);
        if img.iter().all(|x| Scalar::is_zero(x)) {
            continue;
        }
        let mut trial = nu_rows.clone();
        trial.push(img.clone());
        if Mat::from_rows(trial).rank() > Mat::from_rows(if nu_rows.is_empty() {
            vec![vec![rat(0); n.dim()]]
        } else {
            nu_rows.clone()
        })
        .rank()
        {
            nu_rows.push(img);
            samples.push(coords);
        }
    }
    // tensor coordinates of (x)_sigma m_sigma for each sample
    let mut tensor_cols: Vec<Vec<FieldElement>> = vec![];
    for m in &samples {
        let m_l: Vec<FieldElement> = m.iter().map(|c| field.from_rat(c.clone())).collect();
        // project to each eigenspace: solve coordinates in the eigenbasis
        let mut per_sigma: Vec<Vec<FieldElement>> = vec![];
        for (si, s) in sigmas.iter().enumerate() {
            // projector: product over other embeddings of
            // (gen - sigma'(gen)) / (sigma(gen) - sigma'(gen))
            let mut proj = Mat::identity(qd, &field.one());
            for (ti, t) in sigmas.iter().enumerate() {
                if ti == si {
                    continue;
                }
                let num = gen_l.sub_mat(&Mat::identity(qd, &field.one()).scale(&t.gen_image));
                let den = s.gen_image.sub(&t.gen_image);
                let deninv = den.inv().expect("distinct embedding images");
                proj = proj.matmul(&num.scale(&deninv));
            }
            let pv = proj.mul_vec(&m_l);
            // coordinates in the chosen eigenbasis
            let basis_mat = Mat::from_rows(eigen[si].clone()).transpose();
            let coords = basis_mat
                .solve(&pv)
                .ok_or_else(|| NormError::Unsupported("projection outside eigenspace".into()))?;
            per_sigma.push(coords);
        }
        // tensor product coordinates
        let mut acc = vec![field.zero(); tensor_dim];
        expand_pure(&mut acc, &per_sigma, rank);
        // expand_pure treats vecs as d vectors of length rank; tensor index
        // mixed radix base rank
        tensor_cols.push(acc);
    }
    // solve T from T(nu(m_k)) = tensor_k: unknowns are the carrier-basis
    // images; nu_rows (k x dim) * T^T = tensor matrix (k x tensor_dim)
    let nu_mat = Mat::from_rows(
        nu_rows
            .iter()
            .map(|r| r.iter().map(|c| field.from_rat(c.clone())).collect())
            .collect(),
    );
    let mut t_cols: Vec<Vec<FieldElement>> = vec![];
    for j in 0..tensor_dim {
        let rhs: Vec<FieldElement> = tensor_cols.iter().map(|t| t[j].clone()).collect();
        let col = nu_mat
            .solve(&rhs)
            .ok_or_else(|| NormError::Unsupported("descent system inconsistent".into()))?;
        t_cols.push(col);
    }
    // T as a tensor_dim x dim matrix over L
    let mut t = Mat::filled(tensor_dim, n.dim(), field.zero());
    for (j, col) in t_cols.iter().enumerate() {
        for (c, v) in col.iter().enumerate() {
            t[(j, c)] = v.clone();
        }
    }
    let iso_found = t.rank() == n.dim() && tensor_dim == n.dim();
    // nu-compatibility on fresh samples
    let mut nu_ok = true;
    for extra in 0..10u64 {
        let mut coords = vec![rat(0); qd];
        let mut c = extra + 37;
        for slot in coords.iter_mut() {
            *slot = rat((c % 5) as i64 - 2);
            c /= 5;
        }
        let lhs = {
            let img = n.nu(&coords);
            t.mul_vec(&img.iter().map(|x| field.from_rat(x.clone())).collect::<Vec<_>>())
        };
        let rhs = {
            let m_l: Vec<FieldElement> = coords.iter().map(|x| field.from_rat(x.clone())).collect();
            let mut per_sigma = vec![];
            for (si, s) in sigmas.iter().enumerate() {
                let mut proj = Mat::identity(qd, &field.one());
                for (ti, tau) in sigmas.iter().enumerate() {
                    if ti == si {
                        continue;
                    }
                    let num =
                        gen_l.sub_mat(&Mat::identity(qd, &field.one()).scale(&tau.gen_image));
                    let den = s.gen_image.sub(&tau.gen_image);
                    proj = proj.matmul(&num.scale(&den.inv().unwrap()));
                }
                let pv = proj.mul_vec(&m_l);
                let basis_mat = Mat::from_rows(eigen[si].clone()).transpose();
                per_sigma.push(basis_mat.solve(&pv).unwrap());
            }
            let mut acc = vec![field.zero(); tensor_dim];
            expand_pure(&mut acc, &per_sigma, rank);
            acc
        };
        if lhs != rhs {
            nu_ok = false;
            break;
        }
    }
    // Galois invariants dimension: gamma acts entrywise on coordinates and
    // permutes tensor slots according to gamma . sigma
    let inv_dim = galois_invariants_dim(&field, &sigmas, &eigen, rank, tensor_dim)?;
    Ok(DescentReport {
        tensor_dim_over_l: tensor_dim,
        invariants_dim_over_q: inv_dim,
        carrier_dim: n.dim(),
        iso_found,
        nu_compatible: nu_ok,
    })
}

/// Matrix of the action of the base field generator on the module.
fn module_gen_matrix(m: &EModule) -> Mat<Rat> {
    let e = m.base();
    let field = e.as_field();
    let coords = e.q_coords(&e.from_parts(vec![field.gen()]));
    let dim = m.q_dim();
    let mut acc = Mat::filled(dim, dim, rat(0));
    for (k, c) in coords.iter().zip(&m.action().matrices) {
        acc = acc.add_mat(&c.scale(k));
    }
    acc
}

/// Dimension over Q of the Galois invariants of the tensor product of the
/// eigenspaces, for the semilinear permutation action.
fn galois_invariants_dim(
    field: &NumberField,
    sigmas: &[crate::scalars::FieldAutomorphism],
    eigen: &[Vec<Vec<FieldElement>>],
    rank: usize,
    tensor_dim: usize,
) -> Result<usize, NormError> {
    let deg = field.degree();
    // Q-structure: tensor coordinates are L-valued; a Q-point is a vector of
    // rationals of dimension tensor_dim * deg
    let qdim = tensor_dim * deg;
    // for each generator gamma of the Galois group (all elements, to be
    // safe), build the Q-linear action matrix and intersect fixed spaces
    let mut constraints: Vec<Vec<Rat>> = vec![];
    for gamma in sigmas {
        if gamma.is_identity() {
            continue;
        }
        // permutation on embeddings: gamma sends the sigma-slot content to
        // the (gamma o sigma)-slot
        let perm: Vec<usize> = sigmas
            .iter()
            .map(|s| {
                let comp = gamma.compose(s);
                sigmas
                    .iter()
                    .position(|t| t.gen_image == comp.gen_image)
                    .expect("group closure")
            })
            .collect();
        // change of basis: gamma(eigenbasis of sigma) expressed in the
        // eigenbasis of gamma o sigma
        let mut change: Vec<Mat<FieldElement>> = vec![];
        for (si, basis) in eigen.iter().enumerate() {
            let target = &eigen[perm[si]];
            let tmat = Mat::from_rows(target.clone()).transpose();
            let mut cm = Mat::filled(rank, rank, field.zero());
            for (bi, v) in basis.iter().enumerate() {
                let gv: Vec<FieldElement> = v.iter().map(|x| gamma.apply(x)).collect();
                let coords = tmat
                    .solve(&gv)
                    .ok_or_else(|| NormError::Unsupported("semilinear image escapes eigenspace".into()))?;
                for (r, c) in coords.into_iter().enumerate() {
                    cm[(r, bi)] = c;
                }
            }
            change.push(cm);
        }
        // action on a tensor basis element (i_1,...,i_d):
        // gamma(e_{sigma_1, i_1} (x) ...) = prod change factors placed at
        // permuted slots
        // build the L-matrix of the action, then realize gamma-semilinearity
        // over Q
        let mut l_action = Mat::filled(tensor_dim, tensor_dim, field.zero());
        let tuples: Vec<Vec<usize>> = all_tuples(rank, sigmas.len());
        for (col, tup) in tuples.iter().enumerate() {
            // image = (x)_{tau} w_tau where w_{perm(si)} = change[si] e_{tup[si]}
            // expand into tensor coordinates
            let mut factors: Vec<Vec<FieldElement>> = vec![vec![]; sigmas.len()];
            for si in 0..sigmas.len() {
                factors[perm[si]] = change[si].col_vec(tup[si]);
            }
            let mut acc = vec![field.zero(); tensor_dim];
            expand_pure(&mut acc, &factors, rank);
            for (row, v) in acc.into_iter().enumerate() {
                l_action[(row, col)] = v;
            }
        }
        // Q-linear matrix: x -> l_action * gamma(x), x in L^tensor_dim
        // coordinates over Q: each L-coordinate is a deg-vector
        let gam_mat = gamma.matrix();
        for qrow in 0..qdim {
            // unit vector -> apply -> subtract identity row
            let mut x = vec![rat(0); qdim];
            x[qrow] = rat(1);
            // interpret as L-vector
            let xl: Vec<FieldElement> = (0..tensor_dim)
                .map(|i| {
                    let coeffs = x[i * deg..(i + 1) * deg].to_vec();
                    field.element(coeffs)
                })
                .collect();
            let gx: Vec<FieldElement> = xl
                .iter()
                .map(|v| {
                    let c = gam_mat.mul_vec(&v.coeffs().to_vec());
                    field.element(c)
                })
                .collect();
            let img = l_action.mul_vec(&gx);
            let mut row = vec![rat(0); qdim];
            for (i, v) in img.iter().enumerate() {
                for (k, c) in v.coeffs().iter().enumerate() {
                    row[i * deg + k] = c.clone();
                }
            }
            row[qrow] -= rat(1);
            constraints.push(row);
        }
    }
    if constraints.is_empty() {
        return Ok(tensor_dim);
    }
    let m = Mat::from_rows(constraints);
    Ok(m.kernel().len())
}

fn all_tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = vec![];
        for t in &out {
            for i in 0..n {
                let mut t2 = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::NumberField;

    fn sqrt2() -> EtaleAlgebra {
        EtaleAlgebra::field(NumberField::quadratic("s2", 2))
    }

    #[test]
    fn trivial_base_norm_is_identity() {
        let q = EtaleAlgebra::rational();
        let m = EModule::free(&q, 3);
        let n = NormModule::build(&m).unwrap();
        assert_eq!(n.dim(), 3);
        // nu is the identity for d = 1
        let v = vec![rat(2), rat(-1), rat(5)];
        assert_eq!(n.nu(&v), v);
    }

    #[test]
    fn dimension_law_quadratic() {
        let e = sqrt2();
        for rank in 1..=3usize {
            let m = EModule::free(&e, rank);
            let n = NormModule::build(&m).unwrap();
            assert_eq!(n.dim(), rank.pow(2));
        }
    }

    #[test]
    fn dimension_law_cubic() {
        // cyclic cubic: x^3 + x^2 - 2x - 1
        let f = NumberField::new("c7", crate::Poly::from_i64(&[-1, -2, 1, 1])).unwrap();
        let e = EtaleAlgebra::field(f);
        for rank in 1..=2usize {
            let m = EModule::free(&e, rank);
            let n = NormModule::build(&m).unwrap();
            assert_eq!(n.dim(), rank.pow(3));
        }
    }

    #[test]
    fn dimension_law_etale_product() {
        let e = EtaleAlgebra::new(vec![NumberField::rational(), NumberField::quadratic("s2", 2)]);
        let m = EModule::free(&e, 2);
        let n = NormModule::build(&m).unwrap();
        // 2^1 * 2^2 = 8
        assert_eq!(n.dim(), 8);
    }

    #[test]
    fn nu_law_sqrt2() {
        let e = sqrt2();
        let m = EModule::free(&e, 1);
        let n = NormModule::build(&m).unwrap();
        assert_eq!(n.dim(), 1);
        // nu(sqrt2 * 1) = Norm(sqrt2) * nu(1) = -2 nu(1)
        let one = vec![rat(1), rat(0)];
        let s2 = vec![rat(0), rat(1)];
        let nu_one = n.nu(&one);
        let nu_s2 = n.nu(&s2);
        assert_eq!(nu_s2[0], rat(-2) * &nu_one[0]);
        // zero maps to zero
        assert!(n.nu(&vec![rat(0), rat(0)]).iter().all(|c| Scalar::is_zero(c)));
    }

    #[test]
    fn nu_law_random_samples() {
        let e = sqrt2();
        let m = EModule::free(&e, 2);
        let n = NormModule::build(&m).unwrap();
        let mut counter = 1u64;
        for _ in 0..50 {
            counter = counter.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mut c = counter;
            let mut draw = || {
                let v = rat(((c % 7) as i64) - 3);
                c /= 7;
                v
            };
            let ec = vec![draw(), draw()];
            let elt = e.from_q_coords(&ec);
            let mvec = vec![draw(), draw(), draw(), draw()];
            // e * m via the action
            let act = m.action().of(&elt);
            let em = act.mul_vec(&mvec);
            let lhs = n.nu(&em);
            let nrm = elt.norm();
            let rhs: Vec<Rat> = n.nu(&mvec).iter().map(|x| x * &nrm).collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn morphism_functorial() {
        let e = sqrt2();
        let m = EModule::free(&e, 2);
        let n = NormModule::build(&m).unwrap();
        assert_eq!(
            n.norm_morphism(&Mat::identity(4, &rat(1))).unwrap(),
            Mat::identity(4, &rat(1))
        );
        // multiplication by sqrt2 on M = E: N(f) = multiplication by Norm = -2
        let m1 = EModule::free(&e, 1);
        let n1 = NormModule::build(&m1).unwrap();
        let f = m1.action().of(&e.from_q_coords(&[rat(0), rat(1)]));
        let nf = n1.norm_morphism(&f).unwrap();
        assert_eq!(nf, Mat::identity(1, &rat(1)).scale(&rat(-2)));
        // composition on a pair of sample maps (E-linear: polynomials in the
        // generator action plus module permutations)
        let g1 = m.action().of(&e.from_q_coords(&[rat(1), rat(1)]));
        let swap = {
            let mut s = Mat::filled(4, 4, rat(0));
            // swap the two E-coordinates (blocks of size 2)
            s[(0, 2)] = rat(1);
            s[(1, 3)] = rat(1);
            s[(2, 0)] = rat(1);
            s[(3, 1)] = rat(1);
            s
        };
        let g2 = swap.matmul(&g1);
        let lhs = n.norm_morphism(&g1.matmul(&g2)).unwrap();
        let rhs = n
            .norm_morphism(&g1)
            .unwrap()
            .matmul(&n.norm_morphism(&g2).unwrap());
        assert_eq!(lhs, rhs);
        // non-E-linear map rejected
        let mut bad = Mat::identity(4, &rat(1));
        bad[(0, 1)] = rat(1);
        assert!(matches!(n.norm_morphism(&bad), Err(NormError::NotELinear)));
    }

    #[test]
    fn eta_lie_kernel_and_identity() {
        let e = sqrt2();
        let m = EModule::free(&e, 2);
        let n = NormModule::build(&m).unwrap();
        // X = 0 -> 0
        let z = Mat::filled(4, 4, rat(0));
        assert!(n.eta_lie(&z).unwrap().is_zero_mat());
        // X = identity -> d * identity
        let id = Mat::identity(4, &rat(1));
        assert_eq!(n.eta_lie(&id).unwrap(), Mat::identity(4, &rat(1)).scale(&rat(2)));
        // X = scalar action of trace-zero e: eta_lie = 0
        let s2 = m.action().of(&e.from_q_coords(&[rat(0), rat(1)]));
        assert!(n.eta_lie(&s2).unwrap().is_zero_mat());
        // additivity on samples
        let a = m.action().of(&e.from_q_coords(&[rat(1), rat(2)]));
        let sum = n.eta_lie(&a.add_mat(&id)).unwrap();
        let parts = n.eta_lie(&a).unwrap().add_mat(&n.eta_lie(&id).unwrap());
        assert_eq!(sum, parts);
    }

    #[test]
    fn norm_of_base_algebra_is_q() {
        // A = E itself: N(A) = Q
        let e = sqrt2();
        let m = EModule::free(&e, 1);
        let basis = e.q_basis();
        let mult: Vec<Mat<Rat>> = basis.iter().map(|b| m.action().of(b)).collect();
        let one = e.q_coords(&e.one());
        let a = EAlgebraData::new(m, mult, one).unwrap();
        let na = norm_algebra(&a).unwrap();
        assert_eq!(na.dim(), 1);
        // nu multiplicative on samples
        let x = vec![rat(1), rat(1)];
        let y = vec![rat(2), rat(-1)];
        let xy = a.mul_vecs(&x, &y);
        assert_eq!(na.nu(&xy), na.mul_vecs(&na.nu(&x), &na.nu(&y)));
    }

    #[test]
    fn norm_of_m2_is_sixteen_dimensional() {
        // A = M_2(E), E real quadratic: N(A) is a 16-dim Q-algebra
        let e = sqrt2();
        let m = EModule::free(&e, 4);
        // multiplication: basis of A over Q: E-basis x matrix units;
        // coordinates group as (unit index) x (E-basis index)
        let deg = 2usize;
        let dim = 8usize;
        let basis_mats = m2_basis_mult(&e);
        let mut one = vec![rat(0); dim];
        // 1 = E11 + E22: unit indices 0 and 3, E-basis index 0
        one[0] = rat(1);
        one[3 * deg] = rat(1);
        let a = EAlgebraData::new(m, basis_mats, one).unwrap();
        let na = norm_algebra(&a).unwrap();
        assert_eq!(na.dim(), 16);
        // nu multiplicativity spot-checks
        let mut x = vec![rat(0); dim];
        x[0] = rat(1);
        x[1 * deg] = rat(2); // E11 + 2 E12
        x[3 * deg] = rat(1);
        let mut y = vec![rat(0); dim];
        y[2 * deg] = rat(1); // E21
        y[0] = rat(3);
        y[3 * deg] = rat(3);
        let xy = a.mul_vecs(&x, &y);
        assert_eq!(na.nu(&xy), na.mul_vecs(&na.nu(&x), &na.nu(&y)));
    }

    /// Left multiplication matrices for M_2(E) in the basis
    /// (E11, E12, E21, E22) x (Q-basis of E).
    fn m2_basis_mult(e: &EtaleAlgebra) -> Vec<Mat<Rat>> {
        let deg = e.total_degree();
        let dim = 4 * deg;
        let ebasis = e.q_basis();
        // unit products: E_{ab} E_{cd} = delta_{bc} E_{ad}
        let unit_prod = |u: usize, v: usize| -> Option<usize> {
            let (a, b) = (u / 2, u % 2);
            let (c, dd) = (v / 2, v % 2);
            if b == c {
                Some(a * 2 + dd)
            } else {
                None
            }
        };
        let mut out = vec![];
        for u in 0..4 {
            for bi in 0..deg {
                let mut m = Mat::filled(dim, dim, rat(0));
                for v in 0..4 {
                    for bj in 0..deg {
                        if let Some(w) = unit_prod(u, v) {
                            let prod = ebasis[bi].mul(&ebasis[bj]);
                            let coords = e.q_coords(&prod);
                            for (k, c) in coords.into_iter().enumerate() {
                                m[(w * deg + k, v * deg + bj)] = c;
                            }
                        }
                    }
                }
                out.push(m);
            }
        }
        out
    }

    #[test]
    fn non_faithful_reported() {
        let e = EtaleAlgebra::new(vec![NumberField::rational(), NumberField::rational()]);
        // module where only the first factor acts: rank (1, 0)
        let m1 = Mat::from_rows(vec![vec![rat(1)]]);
        let m0 = Mat::from_rows(vec![vec![rat(0)]]);
        let action = EAction {
            algebra: e.clone(),
            matrices: vec![m1, m0],
        };
        let m = EModule::new(e, action).unwrap();
        assert!(!m.is_faithful());
        assert!(matches!(NormModule::build(&m), Err(NormError::NotFaithful)));
    }

    #[test]
    fn descent_quadratic_rank2() {
        let e = sqrt2();
        let m = EModule::free(&e, 2);
        let n = NormModule::build(&m).unwrap();
        let rep = descent_check(&n).unwrap();
        assert_eq!(rep.tensor_dim_over_l, 4);
        assert_eq!(rep.carrier_dim, 4);
        assert_eq!(rep.invariants_dim_over_q, 4);
        assert!(rep.iso_found);
        assert!(rep.nu_compatible);
    }

    #[test]
    fn descent_trivial_base() {
        let q = EtaleAlgebra::rational();
        let m = EModule::free(&q, 2);
        let n = NormModule::build(&m).unwrap();
        let rep = descent_check(&n).unwrap();
        assert!(rep.iso_found && rep.nu_compatible);
        assert_eq!(rep.invariants_dim_over_q, 2);
    }
}
