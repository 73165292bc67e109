//! Clifford algebras of quadratic spaces over etale algebras: multiplication
//! on subset monomials, the even part, spin and adjoint actions, the Lie
//! algebra spanned by degree-2 monomials and scalars, and the even filtration
//! with its top exterior-power quotient.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{in_span, Mat};
use crate::quadspace::{FormKind, QuadError, QuadSpace};
use crate::scalars::{EtaleAlgebra, EtaleElement};

#[derive(Debug, Clone, PartialEq)]
pub enum CliffordError {
    DegenerateForm,
    TooLarge,
    MixedParents,
    OddElement,
    NotInvertible,
    DoesNotPreserveV,
    EvenRank,
    Unsupported(String),
}

impl fmt::Display for CliffordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliffordError::DegenerateForm => write!(f, "degenerate form"),
            CliffordError::TooLarge => write!(f, "table exceeds the desk-scale cap"),
            CliffordError::MixedParents => write!(f, "elements of different algebras"),
            CliffordError::OddElement => write!(f, "element is not even"),
            CliffordError::NotInvertible => write!(f, "element is not invertible"),
            CliffordError::DoesNotPreserveV => {
                write!(f, "conjugation does not preserve the degree-1 subspace")
            }
            CliffordError::EvenRank => write!(f, "filtration needs odd rank"),
            CliffordError::Unsupported(s) => write!(f, "unsupported: {}", s),
        }
    }
}

impl std::error::Error for CliffordError {}

impl From<QuadError> for CliffordError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::DegenerateForm => CliffordError::DegenerateForm,
            other => CliffordError::Unsupported(other.to_string()),
        }
    }
}

#[derive(Debug)]
struct CliffordInner {
    space: QuadSpace,
    base: EtaleAlgebra,
    rank: usize,
    /// squares of the orthogonal generators
    diag: Vec<EtaleElement>,
    /// change of basis: columns express the orthogonal basis in the
    /// original coordinates
    basis_change: Mat<EtaleElement>,
    basis_change_inv: Mat<EtaleElement>,
    /// all 2^rank subset masks ordered by (cardinality, lexicographic)
    monomials: Vec<u32>,
    index_of_mask: Vec<usize>,
    even_monomials: Vec<u32>,
}

/// A Clifford algebra, cheaply clonable.
#[derive(Clone, Debug)]
pub struct CliffordAlgebra(Arc<CliffordInner>);

impl PartialEq for CliffordAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.0.base == other.0.base && self.0.diag == other.0.diag
    }
}

/// Element as coefficients on all subset monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement {
    alg: CliffordAlgebra,
    coeffs: Vec<EtaleElement>,
}

impl CliffordAlgebra {
    pub fn build(space: &QuadSpace) -> Result<Self, CliffordError> {
        if space.kind() != FormKind::Symmetric {
            return Err(CliffordError::Unsupported("symmetric forms only".into()));
        }
        let rank = space.rank();
        if rank < 1 || rank * space.base().total_degree() > 12 {
            return Err(CliffordError::TooLarge);
        }
        let basis_change = space.orthogonal_basis()?;
        let d = basis_change
            .transpose()
            .matmul(space.gram())
            .matmul(&basis_change);
        let diag: Vec<EtaleElement> = (0..rank).map(|i| d.at(i, i).clone()).collect();
        let basis_change_inv = basis_change
            .inverse()
            .ok_or(CliffordError::DegenerateForm)?;
        let mut monomials: Vec<u32> = (0..(1u32 << rank)).collect();
        monomials.sort_by_key(|m| (m.count_ones(), *m));
        let mut index_of_mask = vec![0usize; 1 << rank];
        for (i, &m) in monomials.iter().enumerate() {
            index_of_mask[m as usize] = i;
        }
        let even_monomials: Vec<u32> = monomials
            .iter()
            .copied()
            .filter(|m| m.count_ones() % 2 == 0)
            .collect();
        Ok(CliffordAlgebra(Arc::new(CliffordInner {
            base: space.base().clone(),
            space: space.clone(),
            rank,
            diag,
            basis_change,
            basis_change_inv,
            monomials,
            index_of_mask,
            even_monomials,
        })))
    }

    pub fn space(&self) -> &QuadSpace {
        &self.0.space
    }

    pub fn base(&self) -> &EtaleAlgebra {
        &self.0.base
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    pub fn dim(&self) -> usize {
        1 << self.0.rank
    }

    pub fn even_dim(&self) -> usize {
        1 << (self.0.rank - 1)
    }

    pub fn diag(&self) -> &[EtaleElement] {
        &self.0.diag
    }

    pub fn monomials(&self) -> &[u32] {
        &self.0.monomials
    }

    pub fn even_monomials(&self) -> &[u32] {
        &self.0.even_monomials
    }

    pub fn zero(&self) -> CliffordElement {
        CliffordElement {
            alg: self.clone(),
            coeffs: vec![self.0.base.zero(); self.dim()],
        }
    }

    pub fn one(&self) -> CliffordElement {
        self.basis_element(0)
    }

    /// The monomial e_S for a subset mask.
    pub fn basis_element(&self, mask: u32) -> CliffordElement {
        assert!((mask as usize) < self.dim());
        let mut z = self.zero();
        z.coeffs[self.0.index_of_mask[mask as usize]] = self.0.base.one();
        z
    }

    /// Generator e_i (in the orthogonal basis).
    pub fn generator(&self, i: usize) -> CliffordElement {
        assert!(i < self.0.rank);
        self.basis_element(1 << i)
    }

    /// Embed a vector given in the original module coordinates.
    pub fn vector(&self, coords: &[EtaleElement]) -> CliffordElement {
        assert_eq!(coords.len(), self.0.rank);
        let f_coords = self.0.basis_change_inv.mul_vec(coords);
        let mut z = self.zero();
        for (i, c) in f_coords.into_iter().enumerate() {
            z.coeffs[self.0.index_of_mask[1 << i]] = c;
        }
        z
    }

    /// Sign and square-scalar for the product of two monomials.
    fn mono_mul(&self, a: u32, b: u32) -> (EtaleElement, u32) {
        // count transpositions needed to interleave b into a
        let mut shifted = a >> 1;
        let mut swaps = 0u32;
        while shifted != 0 {
            swaps += (shifted & b).count_ones();
            shifted >>= 1;
        }
        let mut scalar = if swaps % 2 == 0 {
            self.0.base.one()
        } else {
            self.0.base.one().neg()
        };
        let common = a & b;
        for i in 0..self.0.rank {
            if common >> i & 1 == 1 {
                scalar = scalar.mul(&self.0.diag[i]);
            }
        }
        (scalar, a ^ b)
    }

    pub fn multiply(
        &self,
        x: &CliffordElement,
        y: &CliffordElement,
    ) -> Result<CliffordElement, CliffordError> {
        if x.alg != *self || y.alg != *self {
            return Err(CliffordError::MixedParents);
        }
        let mut out = self.zero();
        for (ia, &ma) in self.0.monomials.iter().enumerate() {
            if x.coeffs[ia].is_zero() {
                continue;
            }
            for (ib, &mb) in self.0.monomials.iter().enumerate() {
                if y.coeffs[ib].is_zero() {
                    continue;
                }
                let (s, m) = self.mono_mul(ma, mb);
                let idx = self.0.index_of_mask[m as usize];
                let term = x.coeffs[ia].mul(&y.coeffs[ib]).mul(&s);
                out.coeffs[idx] = out.coeffs[idx].add(&term);
            }
        }
        Ok(out)
    }

    pub fn add(&self, x: &CliffordElement, y: &CliffordElement) -> CliffordElement {
        assert!(x.alg == *self && y.alg == *self);
        CliffordElement {
            alg: self.clone(),
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, x: &CliffordElement, s: &EtaleElement) -> CliffordElement {
        CliffordElement {
            alg: self.clone(),
            coeffs: x.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    /// Inverse via the left-regular representation on the full algebra.
    pub fn inverse(&self, g: &CliffordElement) -> Result<CliffordElement, CliffordError> {
        let l = self.left_mult_matrix_full(g);
        // solve L_g y = 1 factorwise (the matrix is over the etale algebra)
        let nf = self.0.base.factors().len();
        let dim = self.dim();
        let mut parts_per_coeff: Vec<Vec<crate::scalars::FieldElement>> = vec![vec![]; dim];
        for fidx in 0..nf {
            let lf = l.map(|e| e.part(fidx).clone());
            let field = &self.0.base.factors()[fidx];
            let mut rhs = vec![field.zero(); dim];
            rhs[0] = field.one();
            let sol = lf.solve(&rhs).ok_or(CliffordError::NotInvertible)?;
            for (i, v) in sol.into_iter().enumerate() {
                parts_per_coeff[i].push(v);
            }
        }
        let coeffs = parts_per_coeff
            .into_iter()
            .map(|parts| self.0.base.from_parts(parts))
            .collect();
        let inv = CliffordElement {
            alg: self.clone(),
            coeffs,
        };
        let check = self.multiply(g, &inv)?;
        if check != self.one() {
            return Err(CliffordError::NotInvertible);
        }
        Ok(inv)
    }

    /// Left multiplication matrix on the full algebra (columns = monomials).
    pub fn left_mult_matrix_full(&self, x: &CliffordElement) -> Mat<EtaleElement> {
        let dim = self.dim();
        let mut m = Mat::filled(dim, dim, self.0.base.zero());
        for (ib, &mb) in self.0.monomials.iter().enumerate() {
            let col = self
                .multiply(x, &self.basis_element(mb))
                .expect("same parent");
            for r in 0..dim {
                m[(r, ib)] = col.coeffs[r].clone();
            }
        }
        m
    }

    /// Matrix of left multiplication by an even element on the even part.
    pub fn rho_spin_matrix(&self, x: &CliffordElement) -> Result<Mat<EtaleElement>, CliffordError> {
        if !self.is_even(x) {
            return Err(CliffordError::OddElement);
        }
        let ed = self.even_dim();
        let mut m = Mat::filled(ed, ed, self.0.base.zero());
        for (ib, &mb) in self.0.even_monomials.iter().enumerate() {
            let col = self.multiply(x, &self.basis_element(mb))?;
            for (r, &mr) in self.0.even_monomials.iter().enumerate() {
                m[(r, ib)] = col.coeffs[self.0.index_of_mask[mr as usize]].clone();
            }
        }
        Ok(m)
    }

    /// Right multiplication matrix on the even part.
    pub fn right_mult_matrix_even(
        &self,
        x: &CliffordElement,
    ) -> Result<Mat<EtaleElement>, CliffordError> {
        if !self.is_even(x) {
            return Err(CliffordError::OddElement);
        }
        let ed = self.even_dim();
        let mut m = Mat::filled(ed, ed, self.0.base.zero());
        for (ib, &mb) in self.0.even_monomials.iter().enumerate() {
            let col = self.multiply(&self.basis_element(mb), x)?;
            for (r, &mr) in self.0.even_monomials.iter().enumerate() {
                m[(r, ib)] = col.coeffs[self.0.index_of_mask[mr as usize]].clone();
            }
        }
        Ok(m)
    }

    pub fn is_even(&self, x: &CliffordElement) -> bool {
        self.0
            .monomials
            .iter()
            .enumerate()
            .all(|(i, m)| m.count_ones() % 2 == 0 || x.coeffs[i].is_zero())
    }

    /// Extract the even-part coefficient vector of an even element.
    pub fn even_coords(&self, x: &CliffordElement) -> Vec<EtaleElement> {
        self.0
            .even_monomials
            .iter()
            .map(|&m| x.coeffs[self.0.index_of_mask[m as usize]].clone())
            .collect()
    }

    pub fn from_even_coords(&self, coords: &[EtaleElement]) -> CliffordElement {
        assert_eq!(coords.len(), self.even_dim());
        let mut z = self.zero();
        for (i, &m) in self.0.even_monomials.iter().enumerate() {
            z.coeffs[self.0.index_of_mask[m as usize]] = coords[i].clone();
        }
        z
    }

    /// Conjugation by an invertible even element, restricted to the even
    /// part, after checking that conjugation preserves the degree-1 space.
    pub fn rho_ad_matrix(&self, g: &CliffordElement) -> Result<Mat<EtaleElement>, CliffordError> {
        let ginv = self.inverse(g)?;
        // check g V g^-1 = V
        for i in 0..self.0.rank {
            let c = self
                .multiply(&self.multiply(g, &self.generator(i))?, &ginv)?;
            for (idx, &m) in self.0.monomials.iter().enumerate() {
                if m.count_ones() != 1 && !c.coeffs[idx].is_zero() {
                    return Err(CliffordError::DoesNotPreserveV);
                }
            }
        }
        let ed = self.even_dim();
        let mut out = Mat::filled(ed, ed, self.0.base.zero());
        for (ib, &mb) in self.0.even_monomials.iter().enumerate() {
            let c = self
                .multiply(&self.multiply(g, &self.basis_element(mb))?, &ginv)?;
            for (r, &mr) in self.0.even_monomials.iter().enumerate() {
                out[(r, ib)] = c.coeffs[self.0.index_of_mask[mr as usize]].clone();
            }
        }
        Ok(out)
    }

    /// Basis of the Lie algebra spanned by the scalars and the degree-2
    /// monomials: the Lie algebra of the even invertible elements whose
    /// conjugation preserves V.
    pub fn cspin_lie(&self) -> Vec<CliffordElement> {
        let mut out = vec![self.one()];
        for i in 0..self.0.rank {
            for j in i + 1..self.0.rank {
                out.push(self.basis_element((1 << i) | (1 << j)));
            }
        }
        out
    }

    /// The adjoint action of an even element on the degree-1 space:
    /// v -> x v - v x, as a matrix in the orthogonal basis. Errors if the
    /// bracket does not preserve V.
    pub fn ad_on_v(&self, x: &CliffordElement) -> Result<Mat<EtaleElement>, CliffordError> {
        let r = self.0.rank;
        let mut m = Mat::filled(r, r, self.0.base.zero());
        for j in 0..r {
            let v = self.generator(j);
            let b = self
                .multiply(x, &v)?
                .sub_in(self, &self.multiply(&v, x)?);
            for (idx, &mask) in self.0.monomials.iter().enumerate() {
                if b.coeffs[idx].is_zero() {
                    continue;
                }
                if mask.count_ones() != 1 {
                    return Err(CliffordError::DoesNotPreserveV);
                }
                let row = mask.trailing_zeros() as usize;
                m[(row, j)] = b.coeffs[idx].clone();
            }
        }
        Ok(m)
    }

    /// Derivation extension of an infinitesimal isometry X (matrix in the
    /// original coordinates, skew for the form) to the Clifford algebra.
    /// Returns the matrix on the even part.
    pub fn derivation_even(&self, x_original: &Mat<EtaleElement>) -> Mat<EtaleElement> {
        let xf = self
            .0
            .basis_change_inv
            .matmul(x_original)
            .matmul(&self.0.basis_change);
        let ed = self.even_dim();
        let mut out = Mat::filled(ed, ed, self.0.base.zero());
        for (ib, &mb) in self.0.even_monomials.iter().enumerate() {
            let img = self.derive_monomial(&xf, mb);
            for (r, &mr) in self.0.even_monomials.iter().enumerate() {
                out[(r, ib)] = img.coeffs[self.0.index_of_mask[mr as usize]].clone();
            }
        }
        out
    }

    /// Apply the derivation attached to X (in the orthogonal basis) to a
    /// monomial: sum over positions, replacing one generator by its image.
    fn derive_monomial(&self, xf: &Mat<EtaleElement>, mask: u32) -> CliffordElement {
        let mut acc = self.zero();
        let bits: Vec<usize> = (0..self.0.rank).filter(|i| mask >> i & 1 == 1).collect();
        for (pos, &i) in bits.iter().enumerate() {
            // prefix = generators before position, suffix = after
            let prefix_mask: u32 = bits[..pos].iter().fold(0, |m, &b| m | (1 << b));
            let suffix_mask: u32 = bits[pos + 1..].iter().fold(0, |m, &b| m | (1 << b));
            let prefix = self.basis_element(prefix_mask);
            let suffix = self.basis_element(suffix_mask);
            // X f_i = sum_l xf[l][i] f_l
            for l in 0..self.0.rank {
                let c = xf.at(l, i);
                if c.is_zero() {
                    continue;
                }
                let mid = self.scale(&self.generator(l), c);
                let term = self
                    .multiply(&self.multiply(&prefix, &mid).unwrap(), &suffix)
                    .unwrap();
                acc = self.add(&acc, &term);
            }
        }
        acc
    }

    /// The filtration of the even part by total degree, with the top
    /// quotient identified with the top exterior power.
    pub fn filtration(&self) -> Result<CliffordFiltration, CliffordError> {
        let r = self.0.rank;
        if r % 2 == 0 {
            return Err(CliffordError::EvenRank);
        }
        let m = (r - 1) / 2;
        let mut level_dims = vec![];
        let mut levels = vec![];
        for i in 0..=m {
            let masks: Vec<u32> = self
                .0
                .even_monomials
                .iter()
                .copied()
                .filter(|s| s.count_ones() as usize <= 2 * i)
                .collect();
            level_dims.push(masks.len());
            levels.push(masks);
        }
        Ok(CliffordFiltration {
            algebra: self.clone(),
            m,
            levels,
            level_dims,
        })
    }
}

impl CliffordElement {
    pub fn algebra(&self) -> &CliffordAlgebra {
        &self.alg
    }

    pub fn coeffs(&self) -> &[EtaleElement] {
        &self.coeffs
    }

    pub fn coeff_of_mask(&self, mask: u32) -> &EtaleElement {
        &self.coeffs[self.alg.0.index_of_mask[mask as usize]]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn sub_in(&self, alg: &CliffordAlgebra, other: &CliffordElement) -> CliffordElement {
        CliffordElement {
            alg: alg.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &CliffordElement) -> CliffordElement {
        assert!(self.alg == other.alg);
        self.sub_in(&self.alg.clone(), other)
    }
}

/// Ascending filtration F_0 c F_1 c ... c F_m of the even part.
#[derive(Clone, Debug)]
pub struct CliffordFiltration {
    algebra: CliffordAlgebra,
    pub m: usize,
    /// masks spanning each level
    levels: Vec<Vec<u32>>,
    pub level_dims: Vec<usize>,
}

impl CliffordFiltration {
    pub fn top_quotient_dim(&self) -> usize {
        self.level_dims[self.m] - self.level_dims[self.m - 1]
    }

    pub fn level_masks(&self, i: usize) -> &[u32] {
        &self.levels[i]
    }

    /// Verify that the derivation action of so(V) preserves every level and
    /// that the top quotient, with the monomial-to-wedge identification, is
    /// equivariantly the top exterior power of V. Returns the quotient
    /// action matrices (clifford side, wedge side) per generator.
    pub fn equivariance_certificate(
        &self,
        so_basis: &[Mat<EtaleElement>],
    ) -> Result<Vec<(Mat<EtaleElement>, Mat<EtaleElement>)>, CliffordError> {
        let alg = &self.algebra;
        let r = alg.rank();
        let top: Vec<u32> = alg
            .even_monomials()
            .iter()
            .copied()
            .filter(|s| s.count_ones() as usize == 2 * self.m)
            .collect();
        let lower: Vec<u32> = alg
            .even_monomials()
            .iter()
            .copied()
            .filter(|s| (s.count_ones() as usize) < 2 * self.m)
            .collect();
        let mut out = vec![];
        for x in so_basis {
            let xf = alg
                .0
                .basis_change_inv
                .matmul(x)
                .matmul(&alg.0.basis_change);
            // filtration preservation: derivation of a monomial stays within
            // its level
            let full = alg.derivation_even(x);
            for (ib, &mb) in alg.even_monomials().iter().enumerate() {
                let deg = mb.count_ones();
                for (ra, &ma) in alg.even_monomials().iter().enumerate() {
                    if ma.count_ones() > deg && !full.at(ra, ib).is_zero() {
                        return Err(CliffordError::Unsupported(
                            "derivation does not preserve the filtration".into(),
                        ));
                    }
                }
            }
            // clifford-side quotient matrix on top-degree monomials
            let zero = alg.base().zero();
            let mut cq = Mat::filled(top.len(), top.len(), zero.clone());
            for (ib, &mb) in top.iter().enumerate() {
                let img = alg.derive_monomial(&xf, mb);
                for (ra, &ma) in top.iter().enumerate() {
                    cq[(ra, ib)] = img.coeff_of_mask(ma).clone();
                }
                // everything else must be lower filtration
                for (idx, &mask) in alg.0.monomials.iter().enumerate() {
                    if mask.count_ones() as usize == 2 * self.m || img.coeffs[idx].is_zero() {
                        continue;
                    }
                    if !lower.contains(&mask) {
                        return Err(CliffordError::Unsupported(
                            "quotient action leaks outside the filtration".into(),
                        ));
                    }
                }
            }
            // wedge-side derivation on the top exterior power of the
            // orthogonal basis: same index set of masks
            let mut wq = Mat::filled(top.len(), top.len(), zero);
            for (ib, &mb) in top.iter().enumerate() {
                let bits: Vec<usize> = (0..r).filter(|i| mb >> i & 1 == 1).collect();
                for (pos, &i) in bits.iter().enumerate() {
                    for l in 0..r {
                        let c = xf.at(l, i);
                        if c.is_zero() {
                            continue;
                        }
                        if mb >> l & 1 == 1 && l != i {
                            continue; // repeated wedge factor
                        }
                        let new_mask = (mb & !(1 << i)) | (1 << l);
                        // sign: move f_l into sorted position
                        let others = mb & !(1 << i);
                        let below_old = (others & ((1u32 << i) - 1)).count_ones();
                        let below_new = (others & ((1u32 << l) - 1)).count_ones();
                        let swaps = (pos as i64 - below_old as i64).abs()
                            + (below_new as i64 - below_new as i64);
                        let _ = swaps;
                        // position of f_i among bits is pos; after replacing
                        // by f_l the reordering sign is (-1)^(distance)
                        let sign_swaps = (below_new as i64 - below_old as i64).unsigned_abs();
                        let mut term = c.clone();
                        if sign_swaps % 2 == 1 {
                            term = term.neg();
                        }
                        if let Some(ra) = top.iter().position(|&t| t == new_mask) {
                            wq[(ra, ib)] = wq.at(ra, ib).add(&term);
                        }
                    }
                }
            }
            if cq != wq {
                return Err(CliffordError::Unsupported(
                    "top quotient is not equivariantly the exterior power".into(),
                ));
            }
            out.push((cq, wq));
        }
        Ok(out)
    }
}

/// so(V, form): basis of matrices X with form(Xv, w) + form(v, Xw) = 0,
/// over the etale base, computed factorwise and recombined.
pub fn so_basis(space: &QuadSpace) -> Vec<Mat<EtaleElement>> {
    let n = space.rank();
    let e = space.base();
    let nf = e.factors().len();
    // factorwise kernels of X^T G + G X = 0
    let mut per_factor: Vec<Vec<Mat<crate::scalars::FieldElement>>> = vec![];
    for fi in 0..nf {
        let g = space.gram_factor(fi);
        let field = &e.factors()[fi];
        let zero = field.zero();
        // unknowns: n x n entries
        let mut rows = vec![];
        for r in 0..n {
            for c in 0..n {
                let mut row = vec![zero.clone(); n * n];
                // (X^T G)[r][c] = sum_k X[k][r] G[k][c]
                for k in 0..n {
                    row[k * n + r] = row[k * n + r].add(g.at(k, c));
                }
                // (G X)[r][c] = sum_k G[r][k] X[k][c]
                for k in 0..n {
                    row[k * n + c] = row[k * n + c].add(g.at(r, k));
                }
                rows.push(row);
            }
        }
        let m = Mat::from_rows(rows);
        let kern = m.kernel();
        per_factor.push(
            kern.into_iter()
                .map(|v| {
                    let mut x = Mat::filled(n, n, zero.clone());
                    for r in 0..n {
                        for c in 0..n {
                            x[(r, c)] = v[r * n + c].clone();
                        }
                    }
                    x
                })
                .collect(),
        );
    }
    // per-factor solutions over the field, times the factor's power basis,
    // give a Q-basis; assemble as etale matrices supported on one factor
    let mut out = vec![];
    for (fi, mats) in per_factor.iter().enumerate() {
        let field = &e.factors()[fi];
        for base_pow in 0..field.degree() {
            let mut coeffs = vec![crate::scalars::poly::Rat::from_integer(0.into()); field.degree()];
            coeffs[base_pow] = crate::scalars::poly::Rat::from_integer(1.into());
            let scalar = field.element(coeffs);
            for x in mats {
                let ex = x.map(|v| e.inject(fi, v.mul(&scalar)));
                out.push(ex);
            }
        }
    }
    out
}

/// Check skewness of X for the form of the space.
pub fn is_skew(space: &QuadSpace, x: &Mat<EtaleElement>) -> bool {
    let g = space.gram();
    let xt_g = x.transpose().matmul(g);
    let g_x = g.matmul(x);
    xt_g.add_mat(&g_x).is_zero_mat()
}

/// Verify the commutant statement: right multiplications commute with left
/// multiplications, and conjugation by g matches the induced action on the
/// spin module. Exact matrix identities on the even part.
pub fn rho_ad_matches_end_d(
    alg: &CliffordAlgebra,
    g: &CliffordElement,
) -> Result<bool, CliffordError> {
    let rho_g = alg.rho_spin_matrix(&conj_as_element(alg, g)?)?;
    let _ = rho_g;
    let ad = alg.rho_ad_matrix(g)?;
    let spin_g = alg.rho_spin_matrix(g)?;
    let spin_g_inv = invert_etale_matrix(alg.base(), &spin_g).ok_or(CliffordError::NotInvertible)?;
    // L_{g c g^-1} = rho_spin(g) L_c rho_spin(g)^-1 for c over the even basis
    for &mc in alg.even_monomials() {
        let c = alg.basis_element(mc);
        let img_coords = ad.mul_vec(&alg.even_coords(&c));
        let img = alg.from_even_coords(&img_coords);
        let lhs = alg.rho_spin_matrix(&img)?;
        let rhs = spin_g.matmul(&alg.rho_spin_matrix(&c)?).matmul(&spin_g_inv);
        if lhs != rhs {
            return Ok(false);
        }
        // right multiplications commute with all left multiplications
        let rc = alg.right_mult_matrix_even(&c)?;
        for &md in alg.even_monomials() {
            let ld = alg.rho_spin_matrix(&alg.basis_element(md))?;
            if rc.matmul(&ld) != ld.matmul(&rc) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn conj_as_element(
    alg: &CliffordAlgebra,
    g: &CliffordElement,
) -> Result<CliffordElement, CliffordError> {
    if !alg.is_even(g) {
        return Err(CliffordError::OddElement);
    }
    Ok(g.clone())
}

/// Invert a square matrix over an etale algebra factorwise.
pub fn invert_etale_matrix(e: &EtaleAlgebra, m: &Mat<EtaleElement>) -> Option<Mat<EtaleElement>> {
    let nf = e.factors().len();
    let n = m.rows;
    let mut per: Vec<Mat<crate::scalars::FieldElement>> = vec![];
    for fi in 0..nf {
        per.push(m.map(|x| x.part(fi).clone()).inverse()?);
    }
    let mut out = Mat::filled(n, n, e.zero());
    for r in 0..n {
        for c in 0..n {
            let parts = (0..nf).map(|fi| per[fi].at(r, c).clone()).collect();
            out[(r, c)] = e.from_parts(parts);
        }
    }
    Some(out)
}

/// Membership of a matrix in the span of a list of matrices (flattened).
pub fn matrix_in_span(span: &[Mat<EtaleElement>], m: &Mat<EtaleElement>) -> bool {
    let vecs: Vec<Vec<EtaleElement>> = span.iter().map(|x| x.data.clone()).collect();
    in_span(&vecs, &m.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadspace::QuadSpace;
    use crate::scalars::NumberField;

    fn rank3_alg() -> CliffordAlgebra {
        let s = QuadSpace::diagonal_rational(&[1, 1, -1]);
        CliffordAlgebra::build(&s).unwrap()
    }

    #[test]
    fn dims_and_relations() {
        let alg = rank3_alg();
        assert_eq!(alg.dim(), 8);
        assert_eq!(alg.even_dim(), 4);
        // defining relations on all basis pairs
        for i in 0..3 {
            for j in 0..3 {
                let ei = alg.generator(i);
                let ej = alg.generator(j);
                let anti = alg
                    .add(
                        &alg.multiply(&ei, &ej).unwrap(),
                        &alg.multiply(&ej, &ei).unwrap(),
                    );
                if i == j {
                    let expect = alg.scale(&alg.one(), &alg.diag()[i].mul_rat(&crate::scalars::poly::rat(2)));
                    assert_eq!(anti, expect);
                } else {
                    assert!(anti.is_zero());
                }
            }
        }
    }

    #[test]
    fn rank1_unit_square() {
        let s = QuadSpace::diagonal_rational(&[1]);
        let alg = CliffordAlgebra::build(&s).unwrap();
        assert_eq!(alg.dim(), 2);
        let e1 = alg.generator(0);
        assert_eq!(alg.multiply(&e1, &e1).unwrap(), alg.one());
    }

    #[test]
    fn e12_squares_to_minus_one() {
        let alg = rank3_alg();
        let e12 = alg.basis_element(0b011);
        let sq = alg.multiply(&e12, &e12).unwrap();
        let minus_one = alg.scale(&alg.one(), &alg.base().from_i64(-1));
        assert_eq!(sq, minus_one);
        // spin matrix squares to -I
        let m = alg.rho_spin_matrix(&e12).unwrap();
        let m2 = m.matmul(&m);
        let neg_id = Mat::identity(4, &alg.base().one()).scale(&alg.base().from_i64(-1));
        assert_eq!(m2, neg_id);
    }

    #[test]
    fn table_rewrites() {
        let alg = rank3_alg();
        let e1 = alg.generator(0);
        let e2 = alg.generator(1);
        let e12 = alg.multiply(&e1, &e2).unwrap();
        // (e1 e2) e1 = -e2
        let p = alg.multiply(&e12, &e1).unwrap();
        let expect = alg.scale(&alg.generator(1), &alg.base().from_i64(-1));
        assert_eq!(p, expect);
        // (e1 e2)(e1 e3) = -e2 e3
        let e13 = alg.basis_element(0b101);
        let q = alg.multiply(&e12, &e13).unwrap();
        let e23 = alg.basis_element(0b110);
        assert_eq!(q, alg.scale(&e23, &alg.base().from_i64(-1)));
    }

    #[test]
    fn sqrt2_gram_relation() {
        let f = NumberField::quadratic("s2", 2);
        let g = f.gen();
        let s = QuadSpace::diagonal(f.clone(), vec![f.one(), g.clone()]).unwrap();
        let alg = CliffordAlgebra::build(&s).unwrap();
        let e2 = alg.generator(1);
        let sq = alg.multiply(&e2, &e2).unwrap();
        let expect = alg.scale(&alg.one(), &alg.base().from_parts(vec![g]));
        assert_eq!(sq, expect);
    }

    #[test]
    fn spin_multiplicative_and_faithful() {
        let alg = rank3_alg();
        assert_eq!(
            alg.rho_spin_matrix(&alg.one()).unwrap(),
            Mat::identity(4, &alg.base().one())
        );
        // multiplicativity on even basis pairs
        for &ma in alg.even_monomials() {
            for &mb in alg.even_monomials() {
                let a = alg.basis_element(ma);
                let b = alg.basis_element(mb);
                let ab = alg.multiply(&a, &b).unwrap();
                assert_eq!(
                    alg.rho_spin_matrix(&ab).unwrap(),
                    alg.rho_spin_matrix(&a)
                        .unwrap()
                        .matmul(&alg.rho_spin_matrix(&b).unwrap())
                );
            }
        }
        // faithfulness: rho_spin(x) = 0 iff x = 0 on a sample
        let x = alg.basis_element(0b011);
        assert!(!alg.rho_spin_matrix(&x).unwrap().is_zero_mat());
    }

    #[test]
    fn rho_ad_rotation() {
        let alg = rank3_alg();
        let g = alg.basis_element(0b011); // e1 e2, invertible since square -1
        let ad = alg.rho_ad_matrix(&g).unwrap();
        // identity: fixes 1 and e1e2
        let one = alg.even_coords(&alg.one());
        assert_eq!(ad.mul_vec(&one), one);
        let e12 = alg.even_coords(&alg.basis_element(0b011));
        assert_eq!(ad.mul_vec(&e12), e12);
        // algebra automorphism on even basis pairs
        for &ma in alg.even_monomials() {
            for &mb in alg.even_monomials() {
                let a = alg.basis_element(ma);
                let b = alg.basis_element(mb);
                let lhs = {
                    let ab = alg.multiply(&a, &b).unwrap();
                    ad.mul_vec(&alg.even_coords(&ab))
                };
                let rhs = {
                    let ia = alg.from_even_coords(&ad.mul_vec(&alg.even_coords(&a)));
                    let ib = alg.from_even_coords(&ad.mul_vec(&alg.even_coords(&b)));
                    alg.even_coords(&alg.multiply(&ia, &ib).unwrap())
                };
                assert_eq!(lhs, rhs);
            }
        }
        assert_eq!(alg.rho_ad_matrix(&alg.one()).unwrap(), Mat::identity(4, &alg.base().one()));
    }

    #[test]
    fn cspin_lie_closed_and_skew() {
        let alg = rank3_alg();
        let lie = alg.cspin_lie();
        assert_eq!(lie.len(), 4); // 1 + three e_i e_j
        // brackets of degree-2 part land in the span
        let vecs: Vec<Vec<EtaleElement>> = lie.iter().map(|x| x.coeffs().to_vec()).collect();
        for a in &lie {
            for b in &lie {
                let br = alg
                    .multiply(a, b)
                    .unwrap()
                    .sub(&alg.multiply(b, a).unwrap());
                assert!(in_span(&vecs, br.coeffs()));
            }
        }
        // adjoint images are skew
        for x in lie.iter().skip(1) {
            let m = alg.ad_on_v(x).unwrap();
            // express in original coordinates for the skewness test
            let b = &alg.0.basis_change;
            let binv = &alg.0.basis_change_inv;
            let orig = b.matmul(&m).matmul(binv);
            assert!(is_skew(alg.space(), &orig));
        }
    }

    #[test]
    fn so_basis_dimension() {
        let s = QuadSpace::diagonal_rational(&[1, 1, -1]);
        let so = so_basis(&s);
        assert_eq!(so.len(), 3);
        for x in &so {
            assert!(is_skew(&s, x));
        }
    }

    #[test]
    fn filtration_dims_rank3() {
        let alg = rank3_alg();
        let filt = alg.filtration().unwrap();
        assert_eq!(filt.level_dims, vec![1, 4]);
        assert_eq!(filt.top_quotient_dim(), 3);
        let so = so_basis(alg.space());
        let certs = filt.equivariance_certificate(&so).unwrap();
        assert_eq!(certs.len(), 3);
    }

    #[test]
    fn filtration_dims_rank5() {
        let s = QuadSpace::diagonal_rational(&[1, 1, 1, 1, -1]);
        let alg = CliffordAlgebra::build(&s).unwrap();
        let filt = alg.filtration().unwrap();
        assert_eq!(filt.level_dims, vec![1, 11, 16]);
        assert_eq!(filt.top_quotient_dim(), 5);
        let so = so_basis(alg.space());
        assert_eq!(so.len(), 10);
        let certs = filt.equivariance_certificate(&so).unwrap();
        assert_eq!(certs.len(), 10);
    }

    #[test]
    fn even_rank_rejected_for_filtration() {
        let s = QuadSpace::diagonal_rational(&[1, 1]);
        let alg = CliffordAlgebra::build(&s).unwrap();
        assert!(matches!(alg.filtration(), Err(CliffordError::EvenRank)));
    }

    #[test]
    fn commutant_contains_right_multiplications() {
        let alg = rank3_alg();
        let g = alg.basis_element(0b011);
        assert!(rho_ad_matches_end_d(&alg, &g).unwrap());
    }

    #[test]
    fn vector_squares_to_form_value() {
        // non-diagonal input gram: vectors embed through the basis change
        let q = NumberField::rational();
        let e = EtaleAlgebra::field(q.clone());
        let mut gram = Mat::filled(2, 2, e.zero());
        gram[(0, 1)] = e.one();
        gram[(1, 0)] = e.one();
        let s = QuadSpace::symmetric(e.clone(), gram).unwrap();
        let alg = CliffordAlgebra::build(&s).unwrap();
        let v = vec![e.from_i64(1), e.from_i64(2)];
        let elt = alg.vector(&v);
        let sq = alg.multiply(&elt, &elt).unwrap();
        let qv = s.form(&v, &v);
        assert_eq!(sq, alg.scale(&alg.one(), &qv));
    }
}
