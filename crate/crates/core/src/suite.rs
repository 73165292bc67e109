//! The property-suite runner: every module's invariants executed against a
//! seeded deterministic sampler, producing a canonical report. Identical
//! (suite, seed) inputs produce identical reports; timing is kept out of
//! the canonical payload.

use serde_json::{json, Value};

use crate::clifford::{rho_ad_matches_end_d, so_basis, CliffordAlgebra};
use crate::hodge;
use crate::kugasatake;
use crate::linalg::{in_span, Mat, Scalar};
use crate::normfunctor::{descent_check, EModule, NormModule};
use crate::par::{map_items, Parallelism};
use crate::quadspace::{unitary_generation, Involution, QuadSpace};
use crate::reptheory;
use crate::sampler::Sampler;
use crate::scalars::poly::{rat, Poly, Rat};
use crate::scalars::{classify_field, EtaleAlgebra, FieldClass, NumberField};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub witness: Value,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub checks: Vec<CheckResult>,
    pub elapsed_ms: u64,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Canonical JSON: checks sorted by name, timing zeroed so identical
    /// inputs give byte-identical output.
    pub fn canonical_json(&self) -> Value {
        let mut checks = self.checks.clone();
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "pass": c.pass,
                "witness": c.witness,
            })).collect::<Vec<_>>(),
            "elapsed_ms": 0,
        })
    }

    /// Human-readable summary with real timing.
    pub fn text(&self) -> String {
        let mut out = String::new();
        let mut checks = self.checks.clone();
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        for c in &checks {
            out.push_str(&format!(
                "{} {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name
            ));
            if !c.pass {
                out.push_str(&format!("  witness: {}\n", c.witness));
            }
        }
        out.push_str(&format!(
            "{}: {}/{} checks passed ({} ms)\n",
            self.command,
            checks.iter().filter(|c| c.pass).count(),
            checks.len(),
            self.elapsed_ms
        ));
        out
    }
}

type Item = (String, Box<dyn Fn(u64) -> (bool, Value) + Send + Sync>);

fn item(
    name: &str,
    f: impl Fn(u64) -> (bool, Value) + Send + Sync + 'static,
) -> Item {
    (name.to_string(), Box::new(f))
}

fn ok() -> (bool, Value) {
    (true, Value::Null)
}

fn fail(witness: Value) -> (bool, Value) {
    (false, witness)
}

fn check(cond: bool, witness: impl Fn() -> Value) -> (bool, Value) {
    if cond {
        ok()
    } else {
        fail(witness())
    }
}

pub const SUITES: [&str; 9] = [
    "scalars", "forms", "clifford", "norm", "rep", "hodge", "ks", "so4", "all",
];

/// Run one property suite with the given seed.
pub fn run_suite(name: &str, seed: u64, mode: Parallelism) -> Result<RunReport, String> {
    let start = std::time::Instant::now();
    let items: Vec<Item> = match name {
        "scalars" => scalars_items(),
        "forms" => forms_items(),
        "clifford" => clifford_items(),
        "norm" => norm_items(),
        "rep" => rep_items(),
        "hodge" => hodge_items(),
        "ks" => ks_items(),
        "so4" => so4_items(),
        "all" => {
            let mut all = scalars_items();
            all.extend(forms_items());
            all.extend(clifford_items());
            all.extend(norm_items());
            all.extend(rep_items());
            all.extend(hodge_items());
            all.extend(ks_items());
            all.extend(so4_items());
            all
        }
        other => return Err(format!("unknown suite {:?}", other)),
    };
    let checks: Vec<CheckResult> = map_items(mode, items, |(name, f)| {
        let (pass, witness) = f(seed);
        CheckResult {
            name,
            pass,
            witness,
        }
    });
    let mut checks = checks;
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(RunReport {
        command: format!("check --suite {}", name),
        inputs: json!({ "suite": name, "seed": seed }),
        checks,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

// ---------------------------------------------------------------------------
// sample fields shared across the suites
// ---------------------------------------------------------------------------

fn sample_fields() -> Vec<NumberField> {
    vec![
        NumberField::rational(),
        NumberField::quadratic("s2", 2),
        NumberField::quadratic("s5", 5),
        NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap(),
    ]
}

fn cyclic_cubic() -> NumberField {
    NumberField::new("c7", Poly::from_i64(&[-1, -2, 1, 1])).unwrap()
}

// ---------------------------------------------------------------------------
// scalars
// ---------------------------------------------------------------------------

fn scalars_items() -> Vec<Item> {
    vec![
        item("scalars/signature-counts", |_| {
            for f in sample_fields().iter().chain([&cyclic_cubic()]) {
                let (r, c) = f.signature();
                if r + 2 * c != f.degree() || f.real_embeddings().len() != r {
                    return fail(json!({"field": f.min_poly().to_string()}));
                }
            }
            ok()
        }),
        item("scalars/ring-axioms-and-inverses", |seed| {
            let mut s = Sampler::new(seed ^ 0x01);
            for f in sample_fields() {
                for _ in 0..12 {
                    let a = f.element(s.rat_vec(f.degree(), 5));
                    let b = f.element(s.rat_vec(f.degree(), 5));
                    let c = f.element(s.rat_vec(f.degree(), 5));
                    let assoc = a.mul(&b).mul(&c) == a.mul(&b.mul(&c));
                    let distr = a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c));
                    if !assoc || !distr {
                        return fail(json!({"field": f.min_poly().to_string()}));
                    }
                    if !a.is_zero() {
                        let inv = a.inv().unwrap();
                        if a.mul(&inv) != f.one() {
                            return fail(json!({"inverse": a.to_string()}));
                        }
                    }
                }
            }
            ok()
        }),
        item("scalars/sign-multiplicative", |seed| {
            let mut s = Sampler::new(seed ^ 0x02);
            let f = NumberField::quadratic("s2", 2);
            let embs = f.real_embeddings();
            for _ in 0..20 {
                let a = f.element(s.rat_vec(2, 4));
                let b = f.element(s.rat_vec(2, 4));
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                for e in &embs {
                    if e.sign_at(&a.mul(&b)) != e.sign_at(&a) * e.sign_at(&b) {
                        return fail(json!({"a": a.to_string(), "b": b.to_string()}));
                    }
                }
            }
            ok()
        }),
        item("scalars/classification", |_| {
            let cases = [
                (Poly::from_i64(&[-2, 0, 1]), "totally_real"),
                (Poly::from_i64(&[1, 0, 1]), "cm"),
                (Poly::from_i64(&[-2, 0, 0, 1]), "neither"),
                (Poly::from_i64(&[1, 1, 1, 1, 1]), "cm"),
            ];
            for (p, want) in cases {
                let f = NumberField::new("t", p.clone()).unwrap();
                let got = match classify_field(&f) {
                    FieldClass::TotallyReal => "totally_real",
                    FieldClass::Cm { .. } => "cm",
                    FieldClass::Neither => "neither",
                };
                if got != want {
                    return fail(json!({"poly": p.to_string(), "got": got, "want": want}));
                }
            }
            ok()
        }),
        item("scalars/cm-conjugation-order-two", |_| {
            let qi = NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap();
            let FieldClass::Cm { conjugation, real_subfield_poly, .. } = classify_field(&qi)
            else {
                return fail(json!("expected CM"));
            };
            let sq = conjugation.compose(&conjugation);
            check(
                sq.is_identity() && !conjugation.is_identity() && real_subfield_poly.deg() == 1,
                || json!("conjugation is not an involution"),
            )
        }),
    ]
}

// ---------------------------------------------------------------------------
// forms
// ---------------------------------------------------------------------------

fn sample_space(s: &mut Sampler, f: &NumberField, rank: usize, hermitian: bool) -> QuadSpace {
    let e = EtaleAlgebra::field(f.clone());
    loop {
        let mut gram = Mat::filled(rank, rank, e.zero());
        for i in 0..rank {
            for j in i..rank {
                let coeffs = s.rat_vec(f.degree(), 2);
                let v = e.from_parts(vec![f.element(coeffs)]);
                if hermitian && i == j {
                    // hermitian diagonal entries are conjugation-fixed:
                    // use a rational entry
                    let d = e.from_rat(s.rat(3));
                    gram[(i, i)] = d;
                    continue;
                }
                gram[(i, j)] = v.clone();
                if i != j {
                    gram[(j, i)] = if hermitian {
                        // set below via conjugation
                        v
                    } else {
                        v.clone()
                    };
                }
            }
        }
        if hermitian {
            let FieldClass::Cm { conjugation, .. } = classify_field(f) else {
                panic!("hermitian sampling needs a CM field")
            };
            for i in 0..rank {
                for j in i + 1..rank {
                    let v = gram.at(i, j).clone();
                    let parts = vec![conjugation.apply(v.part(0))];
                    gram[(j, i)] = e.from_parts(parts);
                }
            }
            if let Ok(space) = QuadSpace::hermitian(e.clone(), gram) {
                return space;
            }
        } else if let Ok(space) = QuadSpace::symmetric(e.clone(), gram) {
            return space;
        }
    }
}

fn forms_items() -> Vec<Item> {
    vec![
        item("forms/tr-lift-roundtrip-real", |seed| {
            let mut s = Sampler::new(seed ^ 0x11);
            let fields = [
                NumberField::rational(),
                NumberField::quadratic("s2", 2),
                NumberField::quadratic("s5", 5),
            ];
            let mut count = 0;
            for f in &fields {
                for rank in 1..=4usize {
                    for _ in 0..2 {
                        let space = sample_space(&mut s, f, rank, false);
                        let t = space.transfer();
                        if t.dim != space.underlying_q_dim() || !t.is_symmetric() {
                            return fail(json!({"field": f.min_poly().to_string(), "rank": rank}));
                        }
                        let back = match t.bilinear_lift() {
                            Ok(b) => b,
                            Err(e) => {
                                return fail(json!({"lift_error": e.to_string(), "rank": rank}))
                            }
                        };
                        if back.gram() != space.gram() {
                            return fail(json!({"roundtrip": false, "rank": rank}));
                        }
                        count += 1;
                    }
                }
            }
            check(count >= 20, || json!({"samples": count}))
        }),
        item("forms/tr-lift-roundtrip-hermitian", |seed| {
            let mut s = Sampler::new(seed ^ 0x12);
            let qi = NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap();
            for rank in 1..=3usize {
                for _ in 0..2 {
                    let space = sample_space(&mut s, &qi, rank, true);
                    let t = space.transfer();
                    if !t.is_symmetric() {
                        return fail(json!({"transfer_not_symmetric": rank}));
                    }
                    let back = match t.hermitian_lift() {
                        Ok(b) => b,
                        Err(e) => return fail(json!({"lift_error": e.to_string()})),
                    };
                    if back.gram() != space.gram() {
                        return fail(json!({"roundtrip": false, "rank": rank}));
                    }
                }
            }
            ok()
        }),
        item("forms/orthogonal-basis-exact", |seed| {
            let mut s = Sampler::new(seed ^ 0x13);
            for f in [NumberField::rational(), NumberField::quadratic("s2", 2)] {
                for rank in 2..=3usize {
                    let space = sample_space(&mut s, &f, rank, false);
                    let b = match space.orthogonal_basis() {
                        Ok(b) => b,
                        Err(e) => return fail(json!({"error": e.to_string()})),
                    };
                    let d = b.transpose().matmul(space.gram()).matmul(&b);
                    for r in 0..rank {
                        for c in 0..rank {
                            if r != c && !d.at(r, c).is_zero() {
                                return fail(json!({"off_diagonal": [r, c]}));
                            }
                            if r == c && !d.at(r, c).is_unit() {
                                return fail(json!({"zero_diagonal": r}));
                            }
                        }
                    }
                }
            }
            ok()
        }),
        item("forms/signature-example", |_| {
            let f = NumberField::quadratic("s2", 2);
            let g = f.gen();
            let space = QuadSpace::diagonal(
                f.clone(),
                vec![f.one(), f.one(), g.sub(&f.from_i64(2))],
            )
            .unwrap();
            for emb in f.real_embeddings() {
                if space.signature_at(&emb).unwrap() != (2, 1) {
                    return fail(json!("signature mismatch"));
                }
            }
            ok()
        }),
        item("forms/signature-automorphism-invariance", |_| {
            // applying a base-field automorphism to the gram entries
            // permutes the per-embedding signatures
            let f = NumberField::quadratic("s2", 2);
            let g = f.gen();
            let space = QuadSpace::diagonal(
                f.clone(),
                vec![f.one(), g.clone(), g.sub(&f.from_i64(2))],
            )
            .unwrap();
            let conj = crate::scalars::autos::automorphisms(&f)
                .into_iter()
                .find(|a| !a.is_identity())
                .unwrap();
            let e = space.base().clone();
            let gram2 = space.gram().map(|x| e.from_parts(vec![conj.apply(x.part(0))]));
            let space2 = QuadSpace::symmetric(e, gram2).unwrap();
            let sigs = |s: &QuadSpace| -> Vec<(usize, usize)> {
                let mut v: Vec<(usize, usize)> = f
                    .real_embeddings()
                    .iter()
                    .map(|emb| s.signature_at(emb).unwrap())
                    .collect();
                v.sort_unstable();
                v
            };
            check(sigs(&space) == sigs(&space2), || json!("signature multiset changed"))
        }),
        item("forms/unitary-generation", |_| {
            let cases = [
                (1, Involution::Transpose, 1),
                (2, Involution::Transpose, 4),
                (3, Involution::Transpose, 9),
                (2, Involution::Adjoint, 8),
                (2, Involution::Swap, 8),
            ];
            for (n, inv, want) in cases {
                match unitary_generation(n, inv) {
                    Ok(rep) => {
                        if !rep.certified || rep.span_rank != want {
                            return fail(json!({"n": n, "rank": rep.span_rank}));
                        }
                    }
                    Err(e) => return fail(json!({"n": n, "error": e.to_string()})),
                }
            }
            ok()
        }),
    ]
}

// ---------------------------------------------------------------------------
// clifford
// ---------------------------------------------------------------------------

fn clifford_items() -> Vec<Item> {
    vec![
        item("clifford/dims-and-relations-over-q", |_| {
            for rank in 1..=6usize {
                let entries: Vec<i64> = (0..rank).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
                let space = QuadSpace::diagonal_rational(&entries);
                let alg = CliffordAlgebra::build(&space).unwrap();
                if alg.dim() != 1 << rank || alg.even_dim() != 1 << (rank - 1) {
                    return fail(json!({"rank": rank}));
                }
                for i in 0..rank {
                    for j in 0..rank {
                        let ei = alg.generator(i);
                        let ej = alg.generator(j);
                        let anti = alg.add(
                            &alg.multiply(&ei, &ej).unwrap(),
                            &alg.multiply(&ej, &ei).unwrap(),
                        );
                        let expect = if i == j {
                            alg.scale(&alg.one(), &alg.diag()[i].mul_rat(&rat(2)))
                        } else {
                            alg.zero()
                        };
                        if anti != expect {
                            return fail(json!({"rank": rank, "pair": [i, j]}));
                        }
                    }
                }
            }
            ok()
        }),
        item("clifford/dims-and-relations-quadratic-base", |_| {
            let f = NumberField::quadratic("s2", 2);
            for rank in 1..=3usize {
                let entries: Vec<_> = (0..rank)
                    .map(|i| if i == rank - 1 { f.gen() } else { f.one() })
                    .collect();
                let space = QuadSpace::diagonal(f.clone(), entries).unwrap();
                let alg = CliffordAlgebra::build(&space).unwrap();
                if alg.dim() != 1 << rank {
                    return fail(json!({"rank": rank}));
                }
                let last = alg.generator(rank - 1);
                let sq = alg.multiply(&last, &last).unwrap();
                let expect = alg.scale(
                    &alg.one(),
                    &alg.base().from_parts(vec![f.gen()]),
                );
                if sq != expect {
                    return fail(json!({"square_relation": rank}));
                }
            }
            ok()
        }),
        item("clifford/spin-faithful-multiplicative", |seed| {
            let mut s = Sampler::new(seed ^ 0x21);
            let space = QuadSpace::diagonal_rational(&[1, 1, -1]);
            let alg = CliffordAlgebra::build(&space).unwrap();
            for _ in 0..10 {
                let mut a = alg.zero();
                let mut b = alg.zero();
                for &m in alg.even_monomials() {
                    a = alg.add(&a, &alg.scale(&alg.basis_element(m), &alg.base().from_rat(s.rat(3))));
                    b = alg.add(&b, &alg.scale(&alg.basis_element(m), &alg.base().from_rat(s.rat(3))));
                }
                let ab = alg.multiply(&a, &b).unwrap();
                if alg.rho_spin_matrix(&ab).unwrap()
                    != alg
                        .rho_spin_matrix(&a)
                        .unwrap()
                        .matmul(&alg.rho_spin_matrix(&b).unwrap())
                {
                    return fail(json!("spin not multiplicative"));
                }
                if !a.is_zero() && alg.rho_spin_matrix(&a).unwrap().is_zero_mat() {
                    return fail(json!("spin not faithful"));
                }
            }
            ok()
        }),
        item("clifford/filtration-top-quotient", |_| {
            for (rank, want_dims, want_top) in
                [(3usize, vec![1usize, 4], 3usize), (5, vec![1, 11, 16], 5)]
            {
                let entries: Vec<i64> = (0..rank).map(|i| if i == rank - 1 { -1 } else { 1 }).collect();
                let space = QuadSpace::diagonal_rational(&entries);
                let alg = CliffordAlgebra::build(&space).unwrap();
                let filt = alg.filtration().unwrap();
                if filt.level_dims != want_dims || filt.top_quotient_dim() != want_top {
                    return fail(json!({"rank": rank, "dims": filt.level_dims}));
                }
                let so = so_basis(alg.space());
                if filt.equivariance_certificate(&so).is_err() {
                    return fail(json!({"equivariance": rank}));
                }
            }
            ok()
        }),
        item("clifford/rho-ad-matches-end-d", |_| {
            let space = QuadSpace::diagonal_rational(&[1, 1, -1]);
            let alg = CliffordAlgebra::build(&space).unwrap();
            for mask in [0b011u32, 0b101, 0b110] {
                let g = alg.basis_element(mask);
                match rho_ad_matches_end_d(&alg, &g) {
                    Ok(true) => {}
                    other => return fail(json!({"mask": mask, "got": format!("{:?}", other)})),
                }
            }
            ok()
        }),
    ]
}

// ---------------------------------------------------------------------------
// norm
// ---------------------------------------------------------------------------

fn norm_items() -> Vec<Item> {
    vec![
        item("norm/dimension-law", |_| {
            let bases = [
                EtaleAlgebra::rational(),
                EtaleAlgebra::field(NumberField::quadratic("s2", 2)),
                EtaleAlgebra::field(cyclic_cubic()),
                EtaleAlgebra::new(vec![NumberField::rational(), NumberField::quadratic("s5", 5)]),
            ];
            for e in &bases {
                let max_rank = if e.total_degree() >= 3 { 2 } else { 3 };
                for rank in 1..=max_rank {
                    let m = EModule::free(e, rank);
                    let n = match NormModule::build(&m) {
                        Ok(n) => n,
                        Err(err) => return fail(json!({"error": err.to_string()})),
                    };
                    let want: usize = e
                        .factors()
                        .iter()
                        .map(|f| rank.pow(f.degree() as u32))
                        .product();
                    if n.dim() != want {
                        return fail(json!({"base": e.to_string(), "rank": rank, "dim": n.dim()}));
                    }
                }
            }
            ok()
        }),
        item("norm/nu-law", |seed| {
            let mut s = Sampler::new(seed ^ 0x31);
            for e in [
                EtaleAlgebra::field(NumberField::quadratic("s2", 2)),
                EtaleAlgebra::field(cyclic_cubic()),
            ] {
                let rank = if e.total_degree() >= 3 { 1 } else { 2 };
                let m = EModule::free(&e, rank);
                let n = NormModule::build(&m).unwrap();
                for _ in 0..50 {
                    let ec = s.rat_vec(e.total_degree(), 3);
                    let elt = e.from_q_coords(&ec);
                    let mv = s.rat_vec(m.q_dim(), 3);
                    let em = m.action().of(&elt).mul_vec(&mv);
                    let lhs = n.nu(&em);
                    let nrm = elt.norm();
                    let rhs: Vec<Rat> = n.nu(&mv).iter().map(|x| x * &nrm).collect();
                    if lhs != rhs {
                        return fail(json!({"base": e.to_string()}));
                    }
                }
            }
            ok()
        }),
        item("norm/descent-invariants", |_| {
            for e in [
                EtaleAlgebra::rational(),
                EtaleAlgebra::field(NumberField::quadratic("s2", 2)),
                EtaleAlgebra::field(cyclic_cubic()),
            ] {
                let rank = if e.total_degree() >= 3 { 1 } else { 2 };
                let m = EModule::free(&e, rank);
                let n = NormModule::build(&m).unwrap();
                let rep = match descent_check(&n) {
                    Ok(r) => r,
                    Err(err) => return fail(json!({"error": err.to_string()})),
                };
                if !rep.iso_found
                    || !rep.nu_compatible
                    || rep.invariants_dim_over_q != rep.carrier_dim
                {
                    return fail(json!({
                        "base": e.to_string(),
                        "invariants": rep.invariants_dim_over_q,
                        "carrier": rep.carrier_dim,
                    }));
                }
            }
            ok()
        }),
        item("norm/eta-kernel-is-trace-zero", |seed| {
            let mut s = Sampler::new(seed ^ 0x32);
            let e = EtaleAlgebra::field(NumberField::quadratic("s2", 2));
            let m = EModule::free(&e, 2);
            let n = NormModule::build(&m).unwrap();
            for _ in 0..8 {
                let coeffs = s.rat_vec(2, 4);
                let elt = e.from_q_coords(&coeffs);
                let x = m.action().of(&elt);
                let eta = n.eta_lie(&x).unwrap();
                let tr = elt.trace();
                // eta of a scalar action is Tr(e) times the identity
                let want = Mat::identity(n.dim(), &rat(1)).scale(&tr);
                if eta != want {
                    return fail(json!({"elt": elt.to_string()}));
                }
            }
            ok()
        }),
        item("norm/hom-and-monoidal-dims", |_| {
            let e = EtaleAlgebra::field(NumberField::quadratic("s2", 2));
            for (r1, r2) in [(1usize, 2usize), (2, 2)] {
                let n1 = NormModule::build(&EModule::free(&e, r1)).unwrap();
                let n2 = NormModule::build(&EModule::free(&e, r2)).unwrap();
                let hom = NormModule::build(&EModule::free(&e, r1 * r2)).unwrap();
                if hom.dim() != n1.dim() * n2.dim() {
                    return fail(json!({"r1": r1, "r2": r2}));
                }
            }
            ok()
        }),
        item("norm/invariants-lemma", |_| {
            // h = nilpotent E-linear endo on E^2; N(ker h) equals the
            // eta_lie(h)-kernel inside N(V)
            let e = EtaleAlgebra::field(NumberField::quadratic("s2", 2));
            let m = EModule::free(&e, 2);
            let n = NormModule::build(&m).unwrap();
            let deg = 2;
            let dim = m.q_dim();
            // X: e2 -> e1 (as E-modules), zero on e1
            let mut x = Mat::filled(dim, dim, rat(0));
            for k in 0..deg {
                x[(k, deg + k)] = rat(1);
            }
            let eta = n.eta_lie(&x).unwrap();
            let eta_kernel = eta.kernel();
            // nu-span of the fixed submodule E e1
            let mut nu_span = vec![];
            for a in -2..=2i64 {
                for b in -2..=2i64 {
                    let mut v = vec![rat(0); dim];
                    v[0] = rat(a);
                    v[1] = rat(b);
                    nu_span.push(n.nu(&v));
                }
            }
            let span_dim = crate::linalg::span_rank(&nu_span);
            let kern_dim = crate::linalg::span_rank(&eta_kernel);
            if span_dim != kern_dim {
                return fail(json!({"nu_span": span_dim, "eta_kernel": kern_dim}));
            }
            for v in &nu_span {
                if !in_span(&eta_kernel, v) {
                    return fail(json!("nu image escapes the eta kernel"));
                }
            }
            ok()
        }),
        item("norm/full-commutant-is-scalars", |_| {
            // eta images of all E-linear endomorphisms have scalar commutant
            let e = EtaleAlgebra::field(NumberField::quadratic("s2", 2));
            let m = EModule::free(&e, 2);
            let n = NormModule::build(&m).unwrap();
            let deg = 2;
            let dim = m.q_dim();
            let mut etas = vec![];
            for slot_r in 0..2usize {
                for slot_c in 0..2usize {
                    for k in 0..deg {
                        // E-linear map sending e_{slot_c} to b_k e_{slot_r}
                        let mut x = Mat::filled(dim, dim, rat(0));
                        let basis_mat = m.action().matrices[k].clone();
                        for rr in 0..deg {
                            for cc in 0..deg {
                                x[(slot_r * deg + rr, slot_c * deg + cc)] =
                                    basis_mat.at(rr, cc).clone();
                            }
                        }
                        etas.push(n.eta_lie(&x).unwrap());
                    }
                }
            }
            let comm = reptheory::commutant_of(&etas, n.dim());
            check(comm.len() == 1, || json!({"commutant_dim": comm.len()}))
        }),
    ]
}

// ---------------------------------------------------------------------------
// rep
// ---------------------------------------------------------------------------

fn rep_items() -> Vec<Item> {
    vec![
        item("rep/grading-orthogonality", |_| {
            let eye = Mat::identity(3, &rat(1));
            let mu = reptheory::Cocharacter {
                eigenbasis: eye,
                weights: vec![-1, 0, 1],
            };
            let gram = Mat::from_rows(vec![
                vec![rat(0), rat(0), rat(1)],
                vec![rat(0), rat(1), rat(0)],
                vec![rat(1), rat(0), rat(0)],
            ]);
            check(
                mu.graded_orthogonality(&gram).unwrap() && mu.is_k3_type(&gram).unwrap(),
                || json!("grading incompatibility"),
            )
        }),
        item("rep/isotypic-examples", |_| {
            // trivial rep
            let rep = reptheory::LieAlgebraRep::zero_algebra(3);
            let form = crate::quadspace::QForm::plain(Mat::identity(3, &rat(1)));
            let dec = reptheory::isotypic_decompose(&rep, &form).unwrap();
            if dec.summands.len() != 1 {
                return fail(json!("trivial rep should be one invariants block"));
            }
            // rotation plane: second kind
            let j = Mat::from_rows(vec![vec![rat(0), rat(-1)], vec![rat(1), rat(0)]]);
            let rep = reptheory::LieAlgebraRep::new(2, vec![j]).unwrap();
            let form = crate::quadspace::QForm::plain(Mat::identity(2, &rat(1)));
            let dec = reptheory::isotypic_decompose(&rep, &form).unwrap();
            match &dec.summands[0].kind {
                reptheory::SummandKind::SecondKind { split, .. } if !split => {}
                other => return fail(json!({"got": format!("{:?}", other)})),
            }
            ok()
        }),
        item("rep/doubling-identity", |_| {
            for (entries, lhs) in [(vec![1i64], 4usize), (vec![1, -1], 8)] {
                let u = QuadSpace::diagonal_rational(&entries);
                let rep = reptheory::doubling_check(&u).unwrap();
                if rep.lhs_dim != lhs || rep.rhs_dim != lhs || !rep.iso_found {
                    return fail(json!({"rank": entries.len(), "lhs": rep.lhs_dim}));
                }
            }
            let f = NumberField::quadratic("s2", 2);
            let u = QuadSpace::diagonal(f.clone(), vec![f.one()]).unwrap();
            let rep = reptheory::doubling_check(&u).unwrap();
            check(
                rep.lhs_dim == 16 && rep.copies == 4 && rep.iso_found,
                || json!({"lhs": rep.lhs_dim, "copies": rep.copies}),
            )
        }),
        item("rep/commutant-is-unital-algebra", |_| {
            let rep = reptheory::LieAlgebraRep::new(3, reptheory::so3_standard()).unwrap();
            let c = rep.commutant();
            let vecs: Vec<Vec<Rat>> = c.iter().map(|m| m.data.clone()).collect();
            let id = Mat::identity(3, &rat(1));
            if !in_span(&vecs, &id.data) {
                return fail(json!("identity missing from the commutant"));
            }
            for a in &c {
                for b in &c {
                    if !in_span(&vecs, &a.matmul(b).data) {
                        return fail(json!("commutant not closed under products"));
                    }
                }
            }
            ok()
        }),
        item("rep/sl2-fullness", |_| {
            let z = Mat::filled(2, 2, rat(0));
            let mut tuples = vec![];
            for x in reptheory::sl2_basis() {
                tuples.push(vec![x.clone(), z.clone()]);
                tuples.push(vec![z.clone(), x.clone()]);
            }
            let full = reptheory::product_sl2_fullness(&tuples).unwrap();
            if !full.full {
                return fail(json!("product should be full"));
            }
            let diag: Vec<Vec<Mat<Rat>>> = reptheory::sl2_basis()
                .into_iter()
                .map(|x| vec![x.clone(), x])
                .collect();
            let d = reptheory::product_sl2_fullness(&diag).unwrap();
            if d.full {
                return fail(json!("diagonal should not be full"));
            }
            let h = reptheory::sl2_basis()[2].clone();
            let cartan = vec![vec![h, z.clone()]];
            let c = reptheory::product_sl2_fullness(&cartan).unwrap();
            check(!c.full, || json!("cartan line should not be full"))
        }),
    ]
}

// ---------------------------------------------------------------------------
// hodge
// ---------------------------------------------------------------------------

fn rank3_rational_datum() -> hodge::PeriodDatum {
    let q = NumberField::rational();
    let emb = q.real_embeddings().remove(0);
    hodge::PeriodDatum {
        form: Mat::from_rows(vec![
            vec![rat(1), rat(0), rat(0)],
            vec![rat(0), rat(1), rat(0)],
            vec![rat(0), rat(0), rat(-1)],
        ]),
        coeff_field: q.clone(),
        embedding: emb,
        x: vec![q.one(), q.zero(), q.zero()],
        y: vec![q.zero(), q.one(), q.zero()],
        e_structure: None,
    }
}

fn biquadratic_datum() -> hodge::PeriodDatum {
    let f = NumberField::new("w", Poly::from_i64(&[1, 0, -10, 0, 1])).unwrap();
    let eta = f.gen();
    let sqrt2 = eta.pow(3).sub(&eta.mul_rat(&rat(9))).mul_rat(&Rat::new(1.into(), 2.into()));
    let sqrt3 = eta.mul_rat(&rat(11)).sub(&eta.pow(3)).mul_rat(&Rat::new(1.into(), 2.into()));
    let emb = f.real_embeddings().pop().unwrap();
    hodge::PeriodDatum {
        form: Mat::from_rows(vec![
            vec![rat(1), rat(0), rat(0)],
            vec![rat(0), rat(1), rat(0)],
            vec![rat(0), rat(0), rat(-1)],
        ]),
        coeff_field: f.clone(),
        embedding: emb,
        x: vec![f.from_i64(2), f.zero(), sqrt2.clone()],
        y: vec![f.one(), sqrt3, sqrt2],
        e_structure: None,
    }
}

fn hodge_items() -> Vec<Item> {
    vec![
        item("hodge/decomposition-dims", |_| {
            for p in [rank3_rational_datum(), biquadratic_datum()] {
                let dec = match p.hodge_decomposition() {
                    Ok(d) => d,
                    Err(e) => return fail(json!({"error": e.to_string()})),
                };
                if dec.v00.len() != p.dim() - 2 {
                    return fail(json!({"v00": dec.v00.len()}));
                }
            }
            ok()
        }),
        item("hodge/zarhin-three-cases", |_| {
            let z = hodge::zarhin_classify(&biquadratic_datum()).unwrap();
            if z.kind != hodge::MumfordTateKind::SpecialOrthogonal
                || z.end_dim != 1
                || z.mt_dim != 3
                || !z.weil_operator_inside
            {
                return fail(json!({"case": "generic", "mt": z.mt_dim}));
            }
            let z = hodge::zarhin_classify(&rank3_rational_datum()).unwrap();
            if z.kind != hodge::MumfordTateKind::Unitary
                || z.trans_dim != 2
                || z.mt_dim != 1
                || !z.weil_operator_inside
            {
                return fail(json!({"case": "rational-plane", "mt": z.mt_dim}));
            }
            let f = NumberField::quadratic("s2", 2);
            let s = QuadSpace::diagonal(f.clone(), vec![f.one(), f.one(), f.from_i64(-1)])
                .unwrap();
            let emb = f.real_embeddings().pop().unwrap();
            let rm = hodge::rm_period(&s, &emb).unwrap();
            let z = hodge::zarhin_classify(&rm.datum).unwrap();
            check(
                z.kind == hodge::MumfordTateKind::SpecialOrthogonal
                    && z.end_field_poly.deg() == 2
                    && z.mt_dim == 6
                    && z.weil_operator_inside,
                || json!({"case": "rm", "mt": z.mt_dim}),
            )
        }),
        item("hodge/norm-hodge-numbers", |_| {
            let table: hodge::HodgeNumbers = vec![
                vec![((1, -1), 1), ((0, 0), 1), ((-1, 1), 1)],
                vec![((0, 0), 3)],
            ];
            let out = hodge::norm_hodge_numbers(&table).unwrap();
            let get = |i: i64, j: i64| {
                out.iter()
                    .find(|((a, b), _)| *a == i && *b == j)
                    .map(|(_, d)| *d)
                    .unwrap_or(0)
            };
            let total: usize = out.iter().map(|(_, d)| d).sum();
            check(
                get(1, -1) == 3 && get(0, 0) == 3 && get(-1, 1) == 3 && total == 9,
                || json!({"total": total}),
            )
        }),
        item("hodge/cm-types", |_| {
            let qi = NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap();
            let cm = hodge::select_cm_type(&qi).unwrap();
            if !cm.primitive || cm.phi.contains(&cm.tau_index()) {
                return fail(json!("gaussian type wrong"));
            }
            let z5 = NumberField::new("z5", Poly::from_i64(&[1, 1, 1, 1, 1])).unwrap();
            let cm = hodge::select_cm_type(&z5).unwrap();
            if !cm.primitive {
                return fail(json!("cyclotomic-5 type should be primitive"));
            }
            let z8 = NumberField::new("z8", Poly::from_i64(&[1, 0, 0, 0, 1])).unwrap();
            match hodge::select_cm_type(&z8) {
                Err(hodge::HodgeError::NoPrimitiveType(_)) => ok(),
                other => fail(json!({"got": format!("{:?}", other)})),
            }
        }),
        item("hodge/half-twist", |_| {
            let q = NumberField::rational();
            let emb = q.real_embeddings().remove(0);
            let gram = Mat::from_rows(vec![
                vec![rat(1), rat(0), rat(0), rat(0)],
                vec![rat(0), rat(1), rat(0), rat(0)],
                vec![rat(0), rat(0), rat(-1), rat(0)],
                vec![rat(0), rat(0), rat(0), rat(-1)],
            ]);
            let j = Mat::from_rows(vec![
                vec![rat(0), rat(-1), rat(0), rat(0)],
                vec![rat(1), rat(0), rat(0), rat(0)],
                vec![rat(0), rat(0), rat(0), rat(-1)],
                vec![rat(0), rat(0), rat(1), rat(0)],
            ]);
            let qi = NumberField::new("i", Poly::from_i64(&[1, 0, 1])).unwrap();
            let p = hodge::PeriodDatum {
                form: gram,
                coeff_field: q.clone(),
                embedding: emb,
                x: vec![q.one(), q.zero(), q.zero(), q.zero()],
                y: vec![q.zero(), q.one(), q.zero(), q.zero()],
                e_structure: Some(hodge::EStructure {
                    field: qi.clone(),
                    gen_action: j.clone(),
                    sigma0_image: crate::scalars::gauss::GaussExt::i_like(&q.one()).neg(),
                }),
            };
            let cm = hodge::select_cm_type(&qi).unwrap();
            let tw = match hodge::half_twist(&p, &cm) {
                Ok(t) => t,
                Err(e) => return fail(json!({"error": e.to_string()})),
            };
            if tw.h10.len() != 2 || !tw.purity_certified || !tw.transfer_skew_ok {
                return fail(json!({"h10": tw.h10.len()}));
            }
            let mut bad = cm.clone();
            bad.phi = vec![bad.tau_index()];
            match hodge::half_twist(&p, &bad) {
                Err(hodge::HodgeError::TauInPhi) => ok(),
                other => fail(json!({"tau_in_phi": format!("{:?}", other)})),
            }
        }),
    ]
}

// ---------------------------------------------------------------------------
// ks
// ---------------------------------------------------------------------------

fn ks_items() -> Vec<Item> {
    vec![
        item("ks/rank3-worked-example", |_| {
            let p = rank3_rational_datum();
            let ks = kugasatake::kuga_satake(&p).unwrap();
            if ks.dim != 4 || ks.h10.len() != 2 || ks.h01.len() != 2 {
                return fail(json!({"dim": ks.dim}));
            }
            let v = kugasatake::verify_u(&ks).unwrap();
            check(
                v.end_d_dim == 4
                    && v.left_regular_injective
                    && v.algebra_map
                    && v.graded_dims_end == (1, 2, 1)
                    && v.gradings_match
                    && v.weight_additivity,
                || json!({"graded": format!("{:?}", v.graded_dims_end)}),
            )
        }),
        item("ks/scaling-invariance", |_| {
            let p = rank3_rational_datum();
            let ks1 = kugasatake::kuga_satake(&p).unwrap();
            let mut p2 = p.clone();
            p2.x = p2.x.iter().map(|v| v.mul_rat(&rat(2))).collect();
            p2.y = p2.y.iter().map(|v| v.mul_rat(&rat(2))).collect();
            let ks2 = kugasatake::kuga_satake(&p2).unwrap();
            check(ks1.j_mat == ks2.j_mat, || json!("J changed under scaling"))
        }),
        item("ks/rm-sqrt2-sixteen", |_| {
            let f = NumberField::quadratic("s2", 2);
            let s = QuadSpace::diagonal(f.clone(), vec![f.one(), f.one(), f.from_i64(-1)])
                .unwrap();
            let emb = f.real_embeddings().pop().unwrap();
            let rm = hodge::rm_period(&s, &emb).unwrap();
            let ks = kugasatake::kuga_satake(&rm.datum).unwrap();
            if ks.dim != 16 || ks.h10.len() != 8 {
                return fail(json!({"dim": ks.dim}));
            }
            let v = kugasatake::verify_u(&ks).unwrap();
            check(
                v.graded_dims_ad.0 == v.graded_dims_ad.2 && v.gradings_match,
                || json!({"graded": format!("{:?}", v.graded_dims_ad)}),
            )
        }),
        item("ks/doubling", |_| {
            let q = NumberField::rational();
            let emb = q.real_embeddings().remove(0);
            let p = hodge::PeriodDatum {
                form: Mat::identity(2, &rat(1)),
                coeff_field: q.clone(),
                embedding: emb,
                x: vec![q.one(), q.zero()],
                y: vec![q.zero(), q.one()],
                e_structure: None,
            };
            let rep = kugasatake::ks_double(&p).unwrap();
            check(
                rep.sharp_rank == 3 && rep.ks_on_sharp == Some(4) && rep.doubling.iso_found,
                || json!({"sharp": rep.sharp_rank}),
            )
        }),
    ]
}

// ---------------------------------------------------------------------------
// so4
// ---------------------------------------------------------------------------

fn so4_items() -> Vec<Item> {
    vec![
        item("so4/split-and-ideals", |_| {
            let e = EtaleAlgebra::rational();
            let space = crate::so4quat::det_form_space(&e);
            let model = crate::so4quat::split_so4(&space).unwrap();
            if model.verify_ideals().is_err() {
                return fail(json!("ideal verification failed"));
            }
            let bad = QuadSpace::diagonal_rational(&[1, 1, 1, 1]);
            match crate::so4quat::split_so4(&bad) {
                Err(crate::so4quat::So4Error::NotSplit(_)) => ok(),
                other => fail(json!({"got": format!("{:?}", other)})),
            }
        }),
        item("so4/deltas", |_| {
            let e = EtaleAlgebra::rational();
            let space = crate::so4quat::det_form_space(&e);
            let model = crate::so4quat::split_so4(&space).unwrap();
            let rep = crate::so4quat::delta_algebras(&model).unwrap();
            check(
                rep.mutual_commutants && rep.nrd_matches_det,
                || json!("delta algebra checks failed"),
            )
        }),
        item("so4/cspin-identity", |_| {
            let e = EtaleAlgebra::rational();
            let space = crate::so4quat::det_form_space(&e);
            let model = crate::so4quat::split_so4(&space).unwrap();
            let rep = crate::so4quat::cspin4_check(&model).unwrap();
            check(
                rep.lie_dim_each_side == 7
                    && rep.bracket_preserved
                    && rep.scalars_map_to_zero
                    && rep.iso_bijective,
                || json!("cspin identity failed"),
            )
        }),
        item("so4/epsilon-q", |_| {
            let e = EtaleAlgebra::rational();
            let space = crate::so4quat::det_form_space(&e);
            let model = crate::so4quat::split_so4(&space).unwrap();
            let rep = crate::so4quat::epsilon_check(&model).unwrap();
            check(
                rep.d_dim == 4
                    && rep.nv_dim == 4
                    && rep.epsilon_bijective
                    && rep.epsilon_d_linear
                    && rep.lie_equivariant,
                || json!({"dims": [rep.d_dim, rep.nv_dim]}),
            )
        }),
        item("so4/epsilon-sqrt2", |_| {
            let f = NumberField::quadratic("s2", 2);
            let e = EtaleAlgebra::field(f);
            let space = crate::so4quat::det_form_space(&e);
            let model = crate::so4quat::split_so4(&space).unwrap();
            let rep = crate::so4quat::epsilon_check(&model).unwrap();
            check(
                rep.d_dim == 16
                    && rep.nv_dim == 16
                    && rep.epsilon_bijective
                    && rep.epsilon_d_linear
                    && rep.lie_equivariant,
                || json!({"dims": [rep.d_dim, rep.nv_dim]}),
            )
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_of_reports() {
        let a = run_suite("scalars", 0, Parallelism::Sequential).unwrap();
        let b = run_suite("scalars", 0, Parallelism::auto()).unwrap();
        assert_eq!(
            serde_json::to_string(&a.canonical_json()).unwrap(),
            serde_json::to_string(&b.canonical_json()).unwrap()
        );
        assert!(a.all_pass());
    }

    #[test]
    fn rep_suite_passes() {
        let r = run_suite("rep", 1, Parallelism::auto()).unwrap();
        assert!(r.all_pass(), "{}", r.text());
    }
}
