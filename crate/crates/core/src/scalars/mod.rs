//! Exact arithmetic in number fields and etale Q-algebras, with real
//! embedding isolation and sign evaluation.

pub mod autos;
pub mod dual;
pub mod factor;
pub mod gauss;
pub mod poly;
pub mod sturm;

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::linalg::{Mat, Scalar};
use poly::{Poly, Rat};
use sturm::{count_real_roots, SturmChain};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    NonMonic,
    ReduciblePolynomial,
    /// Desk-scale cap or otherwise unsupported input.
    Unsupported(String),
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::NonMonic => write!(f, "minimal polynomial is not monic"),
            ScalarError::ReduciblePolynomial => {
                write!(f, "polynomial is reducible over Q")
            }
            ScalarError::Unsupported(s) => write!(f, "unsupported: {}", s),
        }
    }
}

impl std::error::Error for ScalarError {}

// ---------------------------------------------------------------------------
// Number fields
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct NumberFieldInner {
    name: String,
    min_poly: Poly,
    degree: usize,
}

/// A number field Q[x]/(f) with f monic irreducible. Cheap to clone.
#[derive(Clone, Debug)]
pub struct NumberField(Arc<NumberFieldInner>);

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.0.min_poly == other.0.min_poly
    }
}
impl Eq for NumberField {}

impl NumberField {
    /// Build a field from a monic irreducible polynomial; irreducibility is
    /// certified by complete factorization over Q.
    pub fn new(name: &str, min_poly: Poly) -> Result<Self, ScalarError> {
        if min_poly.is_zero() || !min_poly.is_monic() {
            return Err(ScalarError::NonMonic);
        }
        if min_poly.deg() < 1 {
            return Err(ScalarError::NonMonic);
        }
        if min_poly.deg() > 1 && !factor::is_irreducible_over_q(&min_poly) {
            return Err(ScalarError::ReduciblePolynomial);
        }
        let degree = min_poly.deg();
        Ok(NumberField(Arc::new(NumberFieldInner {
            name: name.to_string(),
            min_poly,
            degree,
        })))
    }

    /// The rational field presented as Q[x]/(x).
    pub fn rational() -> Self {
        NumberField::new("q", Poly::x()).unwrap()
    }

    pub fn quadratic(name: &str, d: i64) -> Self {
        NumberField::new(name, Poly::from_i64(&[-d, 0, 1])).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn min_poly(&self) -> &Poly {
        &self.0.min_poly
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn is_rational(&self) -> bool {
        self.0.degree == 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coeffs: vec![Rat::zero(); self.degree()],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_rat(Rat::one())
    }

    pub fn from_rat(&self, r: Rat) -> FieldElement {
        let mut coeffs = vec![Rat::zero(); self.degree()];
        if self.degree() == 1 {
            // generator is the root of the degree-1 min poly
            // element r = r * 1
            coeffs[0] = r;
        } else {
            coeffs[0] = r;
        }
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        self.from_rat(poly::rat(n))
    }

    pub fn gen(&self) -> FieldElement {
        if self.degree() == 1 {
            // x - a: generator equals the rational root a
            let a = -self.min_poly().coeff(0);
            return self.from_rat(a);
        }
        let mut coeffs = vec![Rat::zero(); self.degree()];
        coeffs[1] = Rat::one();
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    pub fn element(&self, coeffs: Vec<Rat>) -> FieldElement {
        assert!(coeffs.len() <= self.degree() || self.degree() == 1);
        let mut c = coeffs;
        if self.degree() == 1 {
            // reduce any higher powers at the rational root
            let root = -self.min_poly().coeff(0);
            let val = Poly::new(c).eval(&root);
            return self.from_rat(val);
        }
        c.resize(self.degree(), Rat::zero());
        FieldElement {
            field: self.clone(),
            coeffs: c,
        }
    }

    /// Reduce an arbitrary polynomial in the generator.
    pub fn element_from_poly(&self, p: &Poly) -> FieldElement {
        if self.degree() == 1 {
            let root = -self.min_poly().coeff(0);
            return self.from_rat(p.eval(&root));
        }
        let r = p.rem(self.min_poly());
        let mut coeffs = r.coeffs;
        coeffs.resize(self.degree(), Rat::zero());
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// One embedding per real root of the minimal polynomial.
    pub fn real_embeddings(&self) -> Vec<RealEmbedding> {
        let chain = SturmChain::new(self.min_poly());
        chain
            .isolate_roots()
            .into_iter()
            .map(|(lo, hi)| RealEmbedding {
                field: self.clone(),
                lo,
                hi,
            })
            .collect()
    }

    pub fn signature(&self) -> (usize, usize) {
        let r = count_real_roots(self.min_poly());
        (r, (self.degree() - r) / 2)
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q({})", self.0.name)
    }
}

/// An element of a number field, as a polynomial in the generator.
#[derive(Clone, Debug)]
pub struct FieldElement {
    field: NumberField,
    coeffs: Vec<Rat>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}
impl Eq for FieldElement {}

impl FieldElement {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn to_poly(&self) -> Poly {
        Poly::new(self.coeffs.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| Zero::is_zero(c))
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| Zero::is_zero(c))
    }

    pub fn rational_part(&self) -> Rat {
        self.coeffs[0].clone()
    }

    /// The rational value of a rational element; panics otherwise.
    pub fn expect_rational(&self) -> Rat {
        assert!(self.is_rational(), "element is not rational");
        self.coeffs[0].clone()
    }

    fn assert_same_field(&self, other: &Self) {
        assert!(
            self.field == other.field,
            "elements of different fields: {} vs {}",
            self.field,
            other.field
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        FieldElement {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        FieldElement {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        let prod = self.to_poly().mul(&other.to_poly());
        self.field.element_from_poly(&prod)
    }

    pub fn mul_rat(&self, r: &Rat) -> Self {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|a| a * r).collect(),
        }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.field.degree() == 1 {
            return Some(self.field.from_rat(Rat::one() / self.coeffs[0].clone()));
        }
        let (g, s, _) = self.to_poly().extended_gcd(self.field.min_poly());
        if g.degree() != Some(0) {
            return None;
        }
        Some(self.field.element_from_poly(&s))
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.one();
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

    /// Matrix of multiplication by this element in the power basis.
    pub fn mult_matrix(&self) -> Mat<Rat> {
        let n = self.field.degree();
        let mut rows = vec![];
        for i in 0..n {
            let mut basis_poly = vec![Rat::zero(); i + 1];
            basis_poly[i] = Rat::one();
            let col = self
                .field
                .element_from_poly(&self.to_poly().mul(&Poly::new(basis_poly)));
            rows.push(col.coeffs);
        }
        // rows[i] = coords of elt * x^i; transpose to act on column vectors
        Mat::from_rows(rows).transpose()
    }

    pub fn trace(&self) -> Rat {
        self.mult_matrix().trace()
    }

    pub fn norm(&self) -> Rat {
        self.mult_matrix().det()
    }

    /// Minimal polynomial over Q via linear algebra on powers.
    pub fn min_poly_over_q(&self) -> Poly {
        let n = self.field.degree();
        let mut powers: Vec<Vec<Rat>> = vec![];
        let mut cur = self.field.one();
        for k in 0..=n {
            powers.push(cur.coeffs.clone());
            // find a monic dependence among powers[0..=k]
            let m = Mat::from_rows(powers.clone()).transpose();
            let kern = m.kernel();
            if let Some(v) = kern.iter().find(|v| !Zero::is_zero(&v[k])) {
                let inv = Rat::one() / v[k].clone();
                let coeffs: Vec<Rat> = v.iter().map(|c| c * &inv).collect();
                return Poly::new(coeffs);
            }
            cur = cur.mul(self);
        }
        unreachable!("element of a degree-n field has a minimal polynomial of degree <= n");
    }

    /// Substitute this element into a rational polynomial.
    pub fn eval_poly(&self, p: &Poly) -> FieldElement {
        let mut acc = self.field.zero();
        for c in p.coeffs.iter().rev() {
            acc = acc.mul(self).add(&self.field.from_rat(c.clone()));
        }
        acc
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.field.name().to_string();
        let mut terms = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            terms.push(match i {
                0 => format!("{}", c),
                1 => format!("{}*{}", c, name),
                _ => format!("{}*{}^{}", c, name, i),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Scalar for FieldElement {
    fn zero_like(&self) -> Self {
        self.field.zero()
    }
    fn one_like(&self) -> Self {
        self.field.one()
    }
    fn add(&self, other: &Self) -> Self {
        FieldElement::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        FieldElement::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        FieldElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        FieldElement::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        FieldElement::inv(self)
    }
    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }
    fn scale_rat(&self, r: &Rat) -> Self {
        self.mul_rat(r)
    }
}

// ---------------------------------------------------------------------------
// Real embeddings and sign evaluation
// ---------------------------------------------------------------------------

/// A real embedding of a number field, given by an isolating interval for
/// one real root of the minimal polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RealEmbedding {
    field: NumberField,
    lo: Rat,
    hi: Rat,
}

impl RealEmbedding {
    pub fn new(field: NumberField, lo: Rat, hi: Rat) -> Result<Self, ScalarError> {
        let chain = SturmChain::new(field.min_poly());
        if lo >= hi
            || chain.count_roots(&lo, &hi) != 1
            || Zero::is_zero(&field.min_poly().eval(&lo))
            || Zero::is_zero(&field.min_poly().eval(&hi))
        {
            return Err(ScalarError::Unsupported(
                "interval does not isolate one real root".into(),
            ));
        }
        Ok(RealEmbedding { field, lo, hi })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn interval(&self) -> (Rat, Rat) {
        (self.lo.clone(), self.hi.clone())
    }

    /// Shrink the isolating interval below the requested width.
    pub fn refined(&self, width: &Rat) -> RealEmbedding {
        let chain = SturmChain::new(self.field.min_poly());
        let (lo, hi) = chain.refine(&self.lo, &self.hi, width);
        RealEmbedding {
            field: self.field.clone(),
            lo,
            hi,
        }
    }

    /// Exact sign of the image of `a` under this embedding.
    pub fn sign_at(&self, a: &FieldElement) -> i8 {
        assert!(a.field() == &self.field, "element of the wrong field");
        if a.is_zero() {
            return 0;
        }
        let f = self.field.min_poly().clone();
        if self.field.degree() == 1 {
            let root = -f.coeff(0);
            let v = a.to_poly().eval(&root);
            return if Zero::is_zero(&v) {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            };
        }
        let g = a.to_poly();
        let d = f.gcd(&g);
        if d.degree().map_or(false, |deg| deg >= 1) {
            let dchain = SturmChain::new(&d);
            // endpoints are non-roots of f, hence of d
            if dchain.count_roots(&self.lo, &self.hi) == 1 {
                return 0;
            }
        }
        // g has no root at the embedded generator; shrink until the interval
        // is free of roots of g, then read the sign at the midpoint
        let gchain = SturmChain::new(&g);
        let fchain = SturmChain::new(&f);
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        let two = Rat::one() + Rat::one();
        loop {
            let g_lo = g.eval(&lo);
            let g_hi = g.eval(&hi);
            let interior = if !Zero::is_zero(&g_lo) && !Zero::is_zero(&g_hi) {
                gchain.count_roots(&lo, &hi) == 0
            } else {
                false
            };
            if interior {
                let mid = (&lo + &hi) / &two;
                let v = g.eval(&mid);
                debug_assert!(!Zero::is_zero(&v));
                return if v.is_positive() { 1 } else { -1 };
            }
            let w = (&hi - &lo) / &two;
            let (nlo, nhi) = fchain.refine(&lo, &hi, &w);
            lo = nlo;
            hi = nhi;
        }
    }

    /// Convenience: exact comparison of the embedded element with a rational.
    pub fn cmp_rat(&self, a: &FieldElement, r: &Rat) -> i8 {
        let shifted = a.sub(&a.field().from_rat(r.clone()));
        self.sign_at(&shifted)
    }
}

// ---------------------------------------------------------------------------
// Etale algebras: finite products of number fields
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct EtaleAlgebra {
    factors: Vec<NumberField>,
}

impl EtaleAlgebra {
    pub fn new(factors: Vec<NumberField>) -> Self {
        assert!(!factors.is_empty(), "etale algebra needs at least one factor");
        EtaleAlgebra { factors }
    }

    pub fn field(f: NumberField) -> Self {
        EtaleAlgebra { factors: vec![f] }
    }

    pub fn rational() -> Self {
        Self::field(NumberField::rational())
    }

    pub fn factors(&self) -> &[NumberField] {
        &self.factors
    }

    pub fn total_degree(&self) -> usize {
        self.factors.iter().map(|f| f.degree()).sum()
    }

    pub fn is_field(&self) -> bool {
        self.factors.len() == 1
    }

    pub fn as_field(&self) -> &NumberField {
        assert!(self.is_field(), "etale algebra is not a field");
        &self.factors[0]
    }

    pub fn zero(&self) -> EtaleElement {
        EtaleElement {
            algebra: self.clone(),
            parts: self.factors.iter().map(|f| f.zero()).collect(),
        }
    }

    pub fn one(&self) -> EtaleElement {
        EtaleElement {
            algebra: self.clone(),
            parts: self.factors.iter().map(|f| f.one()).collect(),
        }
    }

    pub fn from_rat(&self, r: Rat) -> EtaleElement {
        EtaleElement {
            algebra: self.clone(),
            parts: self.factors.iter().map(|f| f.from_rat(r.clone())).collect(),
        }
    }

    pub fn from_i64(&self, n: i64) -> EtaleElement {
        self.from_rat(poly::rat(n))
    }

    pub fn from_parts(&self, parts: Vec<FieldElement>) -> EtaleElement {
        assert_eq!(parts.len(), self.factors.len());
        for (p, f) in parts.iter().zip(&self.factors) {
            assert!(p.field() == f, "component in the wrong factor");
        }
        EtaleElement {
            algebra: self.clone(),
            parts,
        }
    }

    /// Element supported on one factor.
    pub fn inject(&self, idx: usize, v: FieldElement) -> EtaleElement {
        let mut parts: Vec<FieldElement> = self.factors.iter().map(|f| f.zero()).collect();
        assert!(v.field() == &self.factors[idx]);
        parts[idx] = v;
        EtaleElement {
            algebra: self.clone(),
            parts,
        }
    }

    /// The canonical Q-basis: per factor, powers of its generator.
    pub fn q_basis(&self) -> Vec<EtaleElement> {
        let mut out = vec![];
        for (k, f) in self.factors.iter().enumerate() {
            for i in 0..f.degree() {
                let mut coeffs = vec![Rat::zero(); f.degree()];
                coeffs[i] = Rat::one();
                out.push(self.inject(k, f.element(coeffs)));
            }
        }
        out
    }

    /// Coordinates of an element in the canonical Q-basis.
    pub fn q_coords(&self, e: &EtaleElement) -> Vec<Rat> {
        assert!(e.algebra() == self);
        let mut out = vec![];
        for p in &e.parts {
            out.extend(p.coeffs().to_vec());
        }
        out
    }

    /// Matrix of multiplication by an element in the canonical Q-basis.
    pub fn mult_matrix(&self, e: &EtaleElement) -> Mat<Rat> {
        let basis = self.q_basis();
        let deg = self.total_degree();
        let mut m = Mat::filled(deg, deg, Rat::from_integer(0.into()));
        for (c, b) in basis.iter().enumerate() {
            let coords = self.q_coords(&e.mul(b));
            for (r, v) in coords.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn from_q_coords(&self, coords: &[Rat]) -> EtaleElement {
        assert_eq!(coords.len(), self.total_degree());
        let mut parts = vec![];
        let mut off = 0;
        for f in &self.factors {
            parts.push(f.element(coords[off..off + f.degree()].to_vec()));
            off += f.degree();
        }
        EtaleElement {
            algebra: self.clone(),
            parts,
        }
    }
}

impl fmt::Display for EtaleAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", names.join(" x "))
    }
}

/// An element of an etale algebra; arithmetic is componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaleElement {
    algebra: EtaleAlgebra,
    parts: Vec<FieldElement>,
}

impl EtaleElement {
    pub fn algebra(&self) -> &EtaleAlgebra {
        &self.algebra
    }

    pub fn parts(&self) -> &[FieldElement] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &FieldElement {
        &self.parts[i]
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        self.parts.iter().all(|p| !p.is_zero())
    }

    fn zip(&self, other: &Self, f: impl Fn(&FieldElement, &FieldElement) -> FieldElement) -> Self {
        assert!(self.algebra == other.algebra, "different etale algebras");
        EtaleElement {
            algebra: self.algebra.clone(),
            parts: self
                .parts
                .iter()
                .zip(&other.parts)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        EtaleElement {
            algebra: self.algebra.clone(),
            parts: self.parts.iter().map(|p| p.neg()).collect(),
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> Self {
        EtaleElement {
            algebra: self.algebra.clone(),
            parts: self.parts.iter().map(|p| p.mul_rat(r)).collect(),
        }
    }

    pub fn inv(&self) -> Option<Self> {
        let parts: Option<Vec<FieldElement>> = self.parts.iter().map(|p| p.inv()).collect();
        parts.map(|parts| EtaleElement {
            algebra: self.algebra.clone(),
            parts,
        })
    }

    pub fn trace(&self) -> Rat {
        self.parts.iter().map(|p| p.trace()).sum()
    }

    pub fn norm(&self) -> Rat {
        self.parts.iter().map(|p| p.norm()).product()
    }
}

impl fmt::Display for EtaleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.algebra.is_field() {
            return write!(f, "{}", self.parts[0]);
        }
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(", "))
    }
}

impl Scalar for EtaleElement {
    fn zero_like(&self) -> Self {
        self.algebra.zero()
    }
    fn one_like(&self) -> Self {
        self.algebra.one()
    }
    fn add(&self, other: &Self) -> Self {
        EtaleElement::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        EtaleElement::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        EtaleElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        EtaleElement::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        EtaleElement::inv(self)
    }
    fn is_zero(&self) -> bool {
        EtaleElement::is_zero(self)
    }
    fn scale_rat(&self, r: &Rat) -> Self {
        self.mul_rat(r)
    }
}

// ---------------------------------------------------------------------------
// Field classification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum FieldClass {
    TotallyReal,
    /// CM field: totally imaginary quadratic extension of a totally real
    /// subfield. Carries the subfield's minimal polynomial, a generator of
    /// the subfield inside the big field, and complex conjugation.
    Cm {
        real_subfield_poly: Poly,
        real_subfield_gen: FieldElement,
        conjugation: FieldAutomorphism,
    },
    Neither,
}

/// A field automorphism, stored as the image of the generator.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldAutomorphism {
    pub gen_image: FieldElement,
}

impl FieldAutomorphism {
    pub fn identity(f: &NumberField) -> Self {
        FieldAutomorphism { gen_image: f.gen() }
    }

    pub fn apply(&self, a: &FieldElement) -> FieldElement {
        self.gen_image.eval_poly(&a.to_poly())
    }

    pub fn compose(&self, other: &Self) -> Self {
        // (self ∘ other)(x) = self(other(x))
        FieldAutomorphism {
            gen_image: self.apply(&other.gen_image),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.gen_image == self.gen_image.field().gen()
    }

    /// Matrix in the power basis acting on coefficient vectors.
    pub fn matrix(&self) -> Mat<Rat> {
        let n = self.gen_image.field().degree();
        let mut rows = vec![];
        let mut pow = self.gen_image.field().one();
        for _ in 0..n {
            rows.push(pow.coeffs().to_vec());
            pow = pow.mul(&self.gen_image);
        }
        Mat::from_rows(rows).transpose()
    }
}

/// Classify a number field as totally real, CM, or neither.
pub fn classify_field(field: &NumberField) -> FieldClass {
    let n = field.degree();
    let (real, _) = field.signature();
    if real == n {
        return FieldClass::TotallyReal;
    }
    if real > 0 || n % 2 != 0 {
        return FieldClass::Neither;
    }
    // totally imaginary of even degree: look for a conjugation
    let autos = autos::automorphisms(field);
    for c in &autos {
        if c.is_identity() {
            continue;
        }
        if !c.compose(c).is_identity() {
            continue;
        }
        // fixed subfield must have degree n/2 and be totally real
        let m = c.matrix();
        let idm = Mat::identity(n, &Rat::one());
        let fixed = m.sub_mat(&idm).kernel();
        if fixed.len() != n / 2 {
            continue;
        }
        if let Some((gen, g)) = primitive_element_of_subspace(field, &fixed) {
            if g.deg() == n / 2 && count_real_roots(&g) == g.deg() {
                return FieldClass::Cm {
                    real_subfield_poly: g,
                    real_subfield_gen: gen,
                    conjugation: c.clone(),
                };
            }
        }
    }
    FieldClass::Neither
}

/// Find an element generating the subfield spanned (as a Q-space) by the
/// given coefficient vectors; returns the element and its minimal polynomial.
fn primitive_element_of_subspace(
    field: &NumberField,
    basis: &[Vec<Rat>],
) -> Option<(FieldElement, Poly)> {
    let dim = basis.len();
    for t in 0..64i64 {
        let mut coeffs = vec![Rat::zero(); field.degree()];
        let mut w = Rat::one();
        for b in basis {
            for (i, c) in b.iter().enumerate() {
                coeffs[i] += c * &w;
            }
            w *= poly::rat(t);
        }
        let cand = field.element(coeffs);
        let g = cand.min_poly_over_q();
        if g.deg() == dim {
            return Some((cand, g));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use poly::{rat, ratio};

    #[test]
    fn rational_field_identity_case() {
        let q = NumberField::rational();
        assert_eq!(q.degree(), 1);
        let embs = q.real_embeddings();
        assert_eq!(embs.len(), 1);
        let two = q.from_i64(2);
        let half = two.inv().unwrap();
        assert_eq!(half.rational_part(), ratio(1, 2));
    }

    #[test]
    fn sqrt2_field() {
        let f = NumberField::quadratic("s2", 2);
        assert_eq!(f.degree(), 2);
        let g = f.gen();
        assert_eq!(g.mul(&g), f.from_i64(2));
        assert_eq!(f.real_embeddings().len(), 2);
    }

    #[test]
    fn golden_ratio_inverse() {
        // x^2 - x - 1: generator inverse is generator - 1
        let f = NumberField::new("phi", Poly::from_i64(&[-1, -1, 1])).unwrap();
        let g = f.gen();
        let inv = g.inv().unwrap();
        assert_eq!(inv, g.sub(&f.one()));
        assert_eq!(g.mul(&inv), f.one());
    }

    #[test]
    fn reducible_poly_rejected() {
        let err = NumberField::new("bad", Poly::from_i64(&[-1, 0, 1])).unwrap_err();
        assert_eq!(err, ScalarError::ReduciblePolynomial);
        let err = NumberField::new("bad", Poly::from_i64(&[1, 0, 2])).unwrap_err();
        assert_eq!(err, ScalarError::NonMonic);
    }

    #[test]
    fn embeddings_count_matches_signature() {
        for (poly, real) in [
            (Poly::from_i64(&[-2, 0, 1]), 2),
            (Poly::from_i64(&[1, 0, 1]), 0),
            (Poly::from_i64(&[-2, 0, 0, 1]), 1),
        ] {
            let f = NumberField::new("t", poly).unwrap();
            assert_eq!(f.real_embeddings().len(), real);
            let (r, c) = f.signature();
            assert_eq!(r + 2 * c, f.degree());
        }
    }

    #[test]
    fn sign_at_sqrt2() {
        let f = NumberField::quadratic("s2", 2);
        let embs = f.real_embeddings();
        // embs sorted increasingly: embs[0] is the negative root
        let g = f.gen();
        assert_eq!(embs[0].sign_at(&g), -1);
        assert_eq!(embs[1].sign_at(&g), 1);
        // sqrt2 - 1 > 0 at the positive embedding
        let gm1 = g.sub(&f.one());
        assert_eq!(embs[1].sign_at(&gm1), 1);
        assert_eq!(embs[0].sign_at(&gm1), -1);
        assert_eq!(embs[1].sign_at(&f.zero()), 0);
    }

    #[test]
    fn sign_multiplicative() {
        let f = NumberField::quadratic("s2", 2);
        let embs = f.real_embeddings();
        let samples = [
            f.element(vec![rat(1), rat(1)]),
            f.element(vec![rat(-3), rat(2)]),
            f.element(vec![rat(0), rat(-1)]),
            f.element(vec![ratio(1, 2), ratio(-5, 3)]),
        ];
        for e in &embs {
            for a in &samples {
                for b in &samples {
                    assert_eq!(e.sign_at(&a.mul(b)), e.sign_at(a) * e.sign_at(b));
                }
            }
        }
    }

    #[test]
    fn classify_basic_fields() {
        assert_eq!(
            classify_field(&NumberField::quadratic("s2", 2)),
            FieldClass::TotallyReal
        );
        let qi = NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap();
        match classify_field(&qi) {
            FieldClass::Cm {
                real_subfield_poly,
                conjugation,
                ..
            } => {
                assert_eq!(real_subfield_poly.deg(), 1);
                // conjugation sends i to -i
                assert_eq!(conjugation.gen_image, qi.gen().neg());
            }
            other => panic!("expected CM, got {:?}", other),
        }
        let cubic = NumberField::new("c", Poly::from_i64(&[-2, 0, 0, 1])).unwrap();
        assert_eq!(classify_field(&cubic), FieldClass::Neither);
    }

    #[test]
    fn trace_and_norm() {
        let f = NumberField::quadratic("s2", 2);
        let g = f.gen();
        assert_eq!(g.trace(), rat(0));
        assert_eq!(g.norm(), rat(-2));
        let a = f.element(vec![rat(1), rat(1)]); // 1 + sqrt2
        assert_eq!(a.trace(), rat(2));
        assert_eq!(a.norm(), rat(-1));
    }

    #[test]
    fn etale_componentwise() {
        let e = EtaleAlgebra::new(vec![NumberField::rational(), NumberField::quadratic("s2", 2)]);
        assert_eq!(e.total_degree(), 3);
        let one = e.one();
        assert!(one.is_unit());
        let z = e.inject(0, NumberField::rational().one());
        assert!(!z.is_unit()); // zero on the second factor
        assert!(z.mul(&z) == z);
        assert_eq!(e.q_basis().len(), 3);
    }
}
