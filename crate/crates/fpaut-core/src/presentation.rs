//! Generators and relations of the pure symmetric outer automorphism group,
//! and the stabilizer presentations of the fundamental domain vertices.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::factor_systems::{Elem, FactorAut, FactorSystem};
use crate::splittings::{apply_outer, LabelledVertex, PureAut, Shape, ShapeCatalog, ShapeInstance};
use crate::whitehead_moves::outer_equal;

/// A letter of a word in the presentation generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    /// f_{i_j}(g): conjugates G_j by g⁻¹, with g ∈ G_i.
    F { i: usize, j: usize, g: Elem },
    /// An element of Φ = ∏ Aut(G_k).
    Phi(Vec<FactorAut>),
}

impl Letter {
    pub fn f(i: usize, j: usize, g: Elem) -> Self {
        Letter::F { i, j, g }
    }

    /// φ acting on one factor only.
    pub fn phi_on(fs: &FactorSystem, k: usize, aut: FactorAut) -> Self {
        let mut phis: Vec<FactorAut> = fs.factors().iter().map(FactorAut::identity).collect();
        phis[k] = aut;
        Letter::Phi(phis)
    }

    /// ad_{G_i}(g) as an element of Φ.
    pub fn ad(fs: &FactorSystem, i: usize, g: Elem) -> Self {
        Letter::phi_on(fs, i, FactorAut::inner(fs.factor(i), g))
    }

    pub fn validate(&self, fs: &FactorSystem) -> Result<()> {
        match self {
            Letter::F { i, j, g } => {
                if *i >= fs.n() || *j >= fs.n() {
                    return Err(Error::FactorIndex((*i).max(*j)));
                }
                if i == j {
                    return invalid("f_{i_j} needs i != j");
                }
                fs.check_syllable(*i, *g)
            }
            Letter::Phi(phis) => {
                if phis.len() != fs.n() {
                    return invalid("factor automorphism needs one entry per factor");
                }
                for (k, p) in phis.iter().enumerate() {
                    p.validate(fs.factor(k))?;
                }
                Ok(())
            }
        }
    }

    pub fn inverse(&self, fs: &FactorSystem) -> Letter {
        match self {
            Letter::F { i, j, g } => Letter::F {
                i: *i,
                j: *j,
                g: fs.factor(*i).inv(*g),
            },
            Letter::Phi(phis) => Letter::Phi(
                phis.iter()
                    .enumerate()
                    .map(|(k, p)| p.inverse(fs.factor(k)))
                    .collect(),
            ),
        }
    }

    pub fn to_aut(&self, fs: &FactorSystem) -> PureAut {
        match self {
            Letter::F { i, j, g } => PureAut::whitehead_letter(fs, *i, *j, *g),
            Letter::Phi(phis) => PureAut::factor_aut(fs, phis.clone()),
        }
    }
}

pub type GeneratorWord = Vec<Letter>;

/// Canonical automorphism of a word read left to right.
pub fn eval_generator_word(fs: &FactorSystem, w: &[Letter]) -> Result<PureAut> {
    let mut acc = PureAut::identity(fs);
    for l in w {
        l.validate(fs)?;
        acc = acc.then(fs, &l.to_aut(fs));
    }
    Ok(acc.canonical(fs))
}

pub fn inverse_word(fs: &FactorSystem, w: &[Letter]) -> GeneratorWord {
    w.iter().rev().map(|l| l.inverse(fs)).collect()
}

/// a⁻¹ b⁻¹ a b
pub fn commutator(fs: &FactorSystem, a: &[Letter], b: &[Letter]) -> GeneratorWord {
    let mut w = inverse_word(fs, a);
    w.extend(inverse_word(fs, b));
    w.extend_from_slice(a);
    w.extend_from_slice(b);
    w
}

/// Result of checking one relation instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub id: String,
    pub params: String,
    pub pass: bool,
    pub witness: Option<(PureAut, PureAut)>,
}

impl RelationReport {
    fn equality(fs: &FactorSystem, id: String, params: String, lhs: &[Letter], rhs: &[Letter]) -> Self {
        let a = eval_generator_word(fs, lhs).expect("sampled letters are valid");
        let b = eval_generator_word(fs, rhs).expect("sampled letters are valid");
        let pass = outer_equal(fs, &a, &b);
        RelationReport {
            id,
            params,
            pass,
            witness: if pass { None } else { Some((a, b)) },
        }
    }

    fn fixes(id: String, params: String, pass: bool, witness: Option<(PureAut, PureAut)>) -> Self {
        RelationReport {
            id,
            params,
            pass,
            witness,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationCase {
    /// The presentation for n ≥ 5.
    N5,
    N4,
    N3,
}

impl RelationCase {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "n5" | "n>=5" => Some(RelationCase::N5),
            "n4" => Some(RelationCase::N4),
            "n3" => Some(RelationCase::N3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationCase::N5 => "n5",
            RelationCase::N4 => "n4",
            RelationCase::N3 => "n3",
        }
    }

    pub fn for_n(n: usize) -> Self {
        match n {
            3 => RelationCase::N3,
            4 => RelationCase::N4,
            _ => RelationCase::N5,
        }
    }
}

/// Non-identity elements of a finite factor, or exponents ±1, ±2 of Z.
pub fn sample_elements(fs: &FactorSystem, k: usize) -> Vec<Elem> {
    fs.factor(k)
        .sample_elements()
        .into_iter()
        .filter(|&e| e != 0)
        .collect()
}

/// Every automorphism of a single factor, placed in Φ, excluding the identity.
pub fn sample_phis(fs: &FactorSystem) -> Result<Vec<(usize, Letter)>> {
    let mut out = Vec::new();
    for k in 0..fs.n() {
        for a in FactorAut::all(fs.factor(k))? {
            if !a.is_identity() {
                out.push((k, Letter::phi_on(fs, k, a)));
            }
        }
    }
    Ok(out)
}

fn phi_images(fs: &FactorSystem, phi: &Letter, i: usize, g: Elem) -> Elem {
    match phi {
        Letter::Phi(phis) => phis[i].apply(fs.factor(i), g),
        Letter::F { .. } => unreachable!("sampled automorphism is a factor automorphism"),
    }
}

/// Diagonal block f_{i_{v1}}(g) ... f_{i_{vk}}(g).
pub fn block(i: usize, leaves: &[usize], g: Elem) -> GeneratorWord {
    leaves.iter().map(|&v| Letter::f(i, v, g)).collect()
}

fn others(n: usize, skip: &[usize]) -> Vec<usize> {
    (0..n).filter(|v| !skip.contains(v)).collect()
}

/// Checks every sampled instance of the presentation's relations.
pub fn check_relations(fs: &FactorSystem, case: RelationCase) -> Result<Vec<RelationReport>> {
    let n = fs.n();
    match case {
        RelationCase::N5 if n < 5 => return invalid("case n5 needs at least 5 factors"),
        RelationCase::N4 if n != 4 => return invalid("case n4 needs exactly 4 factors"),
        RelationCase::N3 if n != 3 => return invalid("case n3 needs exactly 3 factors"),
        _ => {}
    }
    let tag = case.name();
    let id = |r: usize| format!("{tag}.R{r}");
    let phis = sample_phis(fs)?;
    let mut out = Vec::new();
    // Same operating factor: [f_{i_j}(g), f_{i_k}(h)] = 1.
    for i in 0..n {
        for j in others(n, &[i]) {
            for k in others(n, &[i, j]) {
                for &g in &sample_elements(fs, i) {
                    for &h in &sample_elements(fs, i) {
                        let w = commutator(fs, &[Letter::f(i, j, g)], &[Letter::f(i, k, h)]);
                        out.push(RelationReport::equality(
                            fs,
                            id(1),
                            format!("i={} j={} k={} g={g} h={h}", i + 1, j + 1, k + 1),
                            &w,
                            &[],
                        ));
                    }
                }
            }
        }
    }
    let mut next = 2;
    if case != RelationCase::N3 {
        // Disjoint indices: [f_{i_j}(g), f_{k_l}(h)] = 1.
        for i in 0..n {
            for j in others(n, &[i]) {
                for k in others(n, &[i, j]) {
                    for l in others(n, &[i, j, k]) {
                        for &g in &sample_elements(fs, i) {
                            for &h in &sample_elements(fs, k) {
                                let w =
                                    commutator(fs, &[Letter::f(i, j, g)], &[Letter::f(k, l, h)]);
                                out.push(RelationReport::equality(
                                    fs,
                                    id(2),
                                    format!(
                                        "i={} j={} k={} l={} g={g} h={h}",
                                        i + 1,
                                        j + 1,
                                        k + 1,
                                        l + 1
                                    ),
                                    &w,
                                    &[],
                                ));
                            }
                        }
                    }
                }
            }
        }
        next = 3;
    }
    if case == RelationCase::N5 {
        // [f_{j_k}(g), f_{i_j}(h) f_{i_k}(h)] = 1.
        for i in 0..n {
            for j in others(n, &[i]) {
                for k in others(n, &[i, j]) {
                    for &g in &sample_elements(fs, j) {
                        for &h in &sample_elements(fs, i) {
                            let w = commutator(fs, &[Letter::f(j, k, g)], &block(i, &[j, k], h));
                            out.push(RelationReport::equality(
                                fs,
                                id(3),
                                format!("i={} j={} k={} g={g} h={h}", i + 1, j + 1, k + 1),
                                &w,
                                &[],
                            ));
                        }
                    }
                }
            }
        }
        next = 4;
    }
    // Product over all other factors is ad_{G_i}(g).
    for i in 0..n {
        for &g in &sample_elements(fs, i) {
            let lhs = block(i, &others(n, &[i]), g);
            out.push(RelationReport::equality(
                fs,
                id(next),
                format!("i={} g={g}", i + 1),
                &lhs,
                &[Letter::ad(fs, i, g)],
            ));
        }
    }
    // φ⁻¹ f_{i_j}(g) φ = f_{i_j}(φ(g)).
    for (_, phi) in &phis {
        for i in 0..n {
            for j in others(n, &[i]) {
                for &g in &sample_elements(fs, i) {
                    let lhs = vec![phi.inverse(fs), Letter::f(i, j, g), phi.clone()];
                    let rhs = vec![Letter::f(i, j, phi_images(fs, phi, i, g))];
                    out.push(RelationReport::equality(
                        fs,
                        id(next + 1),
                        format!("i={} j={} g={g} phi={:?}", i + 1, j + 1, phi),
                        &lhs,
                        &rhs,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// A family of stabilizer generators: diagonal blocks f_{op_{leaves}}(g), g ∈ G_op.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorFamily {
    pub name: String,
    pub op: usize,
    pub leaves: Vec<usize>,
}

impl GeneratorFamily {
    fn new(op: usize, leaves: Vec<usize>) -> Self {
        let name = format!(
            "{}_{}",
            op + 1,
            leaves
                .iter()
                .map(|v| (v + 1).to_string())
                .collect::<Vec<_>>()
                .join("")
        );
        GeneratorFamily { name, op, leaves }
    }

    pub fn word(&self, g: Elem) -> GeneratorWord {
        block(self.op, &self.leaves, g)
    }
}

/// Non-Φ generator families of the stabilizer of a shape, split into the
/// blocks around the central vertex i and the extra single twists a_b.
pub fn stabilizer_families(
    n: usize,
    inst: &ShapeInstance,
) -> (Vec<GeneratorFamily>, Vec<GeneratorFamily>) {
    let idx = &inst.indices;
    let g = GeneratorFamily::new;
    match inst.shape {
        Shape::Alpha | Shape::Rho => (vec![], vec![]),
        Shape::Beta | Shape::Tau => (vec![], vec![g(idx[0], vec![idx[1]])]),
        Shape::Epsilon => (
            vec![],
            vec![g(idx[0], vec![idx[1]]), g(idx[2], vec![idx[3]])],
        ),
        Shape::A => {
            let i = idx[0];
            (others(n, &[i]).into_iter().map(|v| g(i, vec![v])).collect(), vec![])
        }
        Shape::Gamma => {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let mut blocks = vec![g(i, vec![j, k])];
            blocks.extend(others(n, &[i, j, k]).into_iter().map(|v| g(i, vec![v])));
            (blocks, vec![])
        }
        Shape::Sigma => {
            let i = idx[0];
            let mut blocks = vec![g(i, vec![idx[1], idx[2]]), g(i, vec![idx[3], idx[4]])];
            blocks.extend(others(n, idx).into_iter().map(|v| g(i, vec![v])));
            (blocks, vec![])
        }
        Shape::B => {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let mut blocks = vec![g(i, vec![j, k])];
            blocks.extend(others(n, &[i, j, k]).into_iter().map(|v| g(i, vec![v])));
            (blocks, vec![g(j, vec![k])])
        }
        Shape::Delta => {
            let i = idx[0];
            let mut blocks = vec![g(i, vec![idx[1], idx[2]]), g(i, vec![idx[3], idx[4]])];
            blocks.extend(others(n, idx).into_iter().map(|v| g(i, vec![v])));
            (blocks, vec![g(idx[1], vec![idx[2]])])
        }
        Shape::C => {
            let i = idx[0];
            let mut blocks = vec![g(i, vec![idx[1], idx[2]]), g(i, vec![idx[3], idx[4]])];
            blocks.extend(others(n, idx).into_iter().map(|v| g(i, vec![v])));
            (
                blocks,
                vec![g(idx[1], vec![idx[2]]), g(idx[3], vec![idx[4]])],
            )
        }
    }
}

/// Whether `psi` fixes the base labelling of `inst`.
pub fn fixes_vertex(fs: &FactorSystem, catalog: &ShapeCatalog, inst: &ShapeInstance, psi: &PureAut) -> Result<bool> {
    let v = LabelledVertex::base(catalog, inst)?;
    apply_outer(fs, &v, psi).equivalent(&v, fs)
}

/// Checks that the listed stabilizer generators fix the vertex and that the
/// listed relations hold.
pub fn check_stabilizer(
    fs: &FactorSystem,
    catalog: &ShapeCatalog,
    inst: &ShapeInstance,
) -> Result<Vec<RelationReport>> {
    let inst = catalog.canonical(inst)?;
    let n = fs.n();
    let name = inst.to_string();
    let (blocks, twists) = stabilizer_families(n, &inst);
    let phis = sample_phis(fs)?;
    let mut out = Vec::new();
    let fix_report = |label: String, word: &[Letter], out: &mut Vec<RelationReport>| -> Result<()> {
        let psi = eval_generator_word(fs, word)?;
        let pass = fixes_vertex(fs, catalog, &inst, &psi)?;
        let witness = if pass {
            None
        } else {
            Some((psi, PureAut::identity(fs)))
        };
        out.push(RelationReport::fixes(format!("{name}.fix"), label, pass, witness));
        Ok(())
    };
    for (k, phi) in &phis {
        fix_report(format!("phi on factor {}", k + 1), std::slice::from_ref(phi), &mut out)?;
    }
    for fam in blocks.iter().chain(&twists) {
        for &g in &sample_elements(fs, fam.op) {
            fix_report(format!("{} g={g}", fam.name), &fam.word(g), &mut out)?;
        }
    }
    if let Some(first) = blocks.first() {
        let i = first.op;
        // Product of all blocks is ad_{G_i}(g).
        for &g in &sample_elements(fs, i) {
            let lhs: GeneratorWord = blocks.iter().flat_map(|b| b.word(g)).collect();
            out.push(RelationReport::equality(
                fs,
                format!("{name}.diag"),
                format!("g={g}"),
                &lhs,
                &[Letter::ad(fs, i, g)],
            ));
        }
        // The blocks commute with each other.
        for (p, a) in blocks.iter().enumerate() {
            for b in &blocks[p + 1..] {
                for &g in &sample_elements(fs, i) {
                    for &h in &sample_elements(fs, i) {
                        let w = commutator(fs, &a.word(g), &b.word(h));
                        out.push(RelationReport::equality(
                            fs,
                            format!("{name}.blocks"),
                            format!("{} {} g={g} h={h}", a.name, b.name),
                            &w,
                            &[],
                        ));
                    }
                }
            }
        }
    }
    // Extra twists commute with the blocks and with each other.
    let mut pairs: Vec<(&GeneratorFamily, &GeneratorFamily)> = Vec::new();
    for t in &twists {
        for b in &blocks {
            pairs.push((t, b));
        }
    }
    for (p, a) in twists.iter().enumerate() {
        for b in &twists[p + 1..] {
            pairs.push((a, b));
        }
    }
    for (a, b) in pairs {
        for &g in &sample_elements(fs, a.op) {
            for &h in &sample_elements(fs, b.op) {
                let w = commutator(fs, &a.word(g), &b.word(h));
                out.push(RelationReport::equality(
                    fs,
                    format!("{name}.commute"),
                    format!("{} {} g={g} h={h}", a.name, b.name),
                    &w,
                    &[],
                ));
            }
        }
    }
    // Φ acts on every family through its operating factor.
    for (_, phi) in &phis {
        for fam in blocks.iter().chain(&twists) {
            for &g in &sample_elements(fs, fam.op) {
                let mut lhs = vec![phi.inverse(fs)];
                lhs.extend(fam.word(g));
                lhs.push(phi.clone());
                let rhs = fam.word(phi_images(fs, phi, fam.op, g));
                out.push(RelationReport::equality(
                    fs,
                    format!("{name}.phi"),
                    format!("{} g={g} phi={:?}", fam.name, phi),
                    &lhs,
                    &rhs,
                ));
            }
        }
    }
    Ok(out)
}

/// Normal form in (G_{1_2} * G_{2_3} * G_{3_1}) ⋊ Φ for n = 3: a reduced word
/// of (operating factor, element) syllables followed by a factor automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemidirectForm {
    pub word: Vec<(usize, Elem)>,
    pub phi: Vec<FactorAut>,
}

impl SemidirectForm {
    pub fn to_word(&self) -> GeneratorWord {
        let mut w: GeneratorWord = self
            .word
            .iter()
            .map(|&(i, g)| Letter::f(i, (i + 1) % 3, g))
            .collect();
        w.push(Letter::Phi(self.phi.clone()));
        w
    }
}

/// Rewrites a word for n = 3 into the semidirect normal form using
/// f_{i_k}(g) = f_{i_j}(g⁻¹) ad_{G_i}(g) and φ f(h) = f(φ⁻¹(h)) φ.
pub fn semidirect_normal_form(fs: &FactorSystem, w: &[Letter]) -> Result<SemidirectForm> {
    if fs.n() != 3 {
        return invalid("the semidirect normal form needs exactly 3 factors");
    }
    let mut word: Vec<(usize, Elem)> = Vec::new();
    let mut phi: Vec<FactorAut> = fs.factors().iter().map(FactorAut::identity).collect();
    let push = |word: &mut Vec<(usize, Elem)>, i: usize, g: Elem| {
        if g == 0 {
            return;
        }
        if let Some(last) = word.last_mut() {
            if last.0 == i {
                last.1 = fs.factor(i).mul(last.1, g);
                if last.1 == 0 {
                    word.pop();
                }
                return;
            }
        }
        word.push((i, g));
    };
    let compose_phi = |phi: &mut Vec<FactorAut>, next: &[FactorAut]| {
        for k in 0..3 {
            phi[k] = phi[k].then(fs.factor(k), &next[k]);
        }
    };
    for l in w {
        l.validate(fs)?;
        match l {
            Letter::F { i, j, g } => {
                // Move the letter left past the accumulated φ: φ f(h) = f(φ⁻¹(h)) φ.
                let h = phi[*i].inverse(fs.factor(*i)).apply(fs.factor(*i), *g);
                if *j == (*i + 1) % 3 {
                    push(&mut word, *i, h);
                } else {
                    // f_{i_k}(h) = f_{i_j}(h⁻¹) ad(h), and ad(h) ∈ Φ is then
                    // carried to the right where it meets the accumulated φ.
                    push(&mut word, *i, fs.factor(*i).inv(h));
                    let mut ad: Vec<FactorAut> =
                        fs.factors().iter().map(FactorAut::identity).collect();
                    ad[*i] = FactorAut::inner(fs.factor(*i), h);
                    // The word so far is u·f·ad·φ; record ad·φ.
                    let mut next = ad;
                    compose_phi(&mut next, &phi);
                    phi = next;
                }
            }
            Letter::Phi(p) => compose_phi(&mut phi, p),
        }
    }
    Ok(SemidirectForm { word, phi })
}

/// Report of the n = 3 semidirect product check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemidirectReport {
    pub random_words: usize,
    pub normal_forms: usize,
    pub failures: Vec<RelationReport>,
}

impl SemidirectReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that normal forms evaluate like the words they came from, that
/// Φ-conjugation acts as in the presentation, and that distinct normal forms
/// up to `max_len` syllables give distinct outer automorphisms.
pub fn semidirect_check_n3<R: Rng>(
    fs: &FactorSystem,
    rng: &mut R,
    random_words: usize,
    max_len: usize,
) -> Result<SemidirectReport> {
    if fs.n() != 3 || !fs.is_finite() {
        return invalid("semidirect check needs 3 finite factors");
    }
    let mut failures = Vec::new();
    let phis: Vec<Vec<FactorAut>> = all_phis(fs)?;
    for t in 0..random_words {
        let len = rng.gen_range(0..=6);
        let mut w = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.gen_bool(0.2) {
                w.push(Letter::Phi(phis[rng.gen_range(0..phis.len())].clone()));
            } else {
                let i = rng.gen_range(0..3);
                let j = (i + rng.gen_range(1..3)) % 3;
                let els = sample_elements(fs, i);
                w.push(Letter::f(i, j, els[rng.gen_range(0..els.len())]));
            }
        }
        let nf = semidirect_normal_form(fs, &w)?;
        let direct = eval_generator_word(fs, &w)?;
        let via = eval_generator_word(fs, &nf.to_word())?;
        if direct != via {
            failures.push(RelationReport {
                id: "n3.semidirect.eval".into(),
                params: format!("word {t}: {w:?}"),
                pass: false,
                witness: Some((direct, via)),
            });
        }
    }
    for phi in &phis {
        for i in 0..3 {
            for &g in &sample_elements(fs, i) {
                let j = (i + 1) % 3;
                let w = vec![
                    Letter::Phi(phi.iter().enumerate().map(|(k, p)| p.inverse(fs.factor(k))).collect()),
                    Letter::f(i, j, g),
                    Letter::Phi(phi.clone()),
                ];
                let nf = semidirect_normal_form(fs, &w)?;
                let expected = SemidirectForm {
                    word: vec![(i, phi[i].apply(fs.factor(i), g))],
                    phi: fs.factors().iter().map(FactorAut::identity).collect(),
                };
                if nf != expected {
                    failures.push(RelationReport {
                        id: "n3.semidirect.phi".into(),
                        params: format!("i={} g={g} phi={phi:?}", i + 1),
                        pass: false,
                        witness: None,
                    });
                }
            }
        }
    }
    // Injectivity of the normal form on a finite ball.
    let mut seen: HashMap<PureAut, SemidirectForm> = HashMap::new();
    let mut count = 0;
    for word in reduced_words(fs, max_len) {
        for phi in &phis {
            let nf = SemidirectForm {
                word: word.clone(),
                phi: phi.clone(),
            };
            let aut = eval_generator_word(fs, &nf.to_word())?;
            count += 1;
            if let Some(prev) = seen.insert(aut.clone(), nf.clone()) {
                failures.push(RelationReport {
                    id: "n3.semidirect.unique".into(),
                    params: format!("{prev:?} and {nf:?} coincide"),
                    pass: false,
                    witness: Some((aut.clone(), aut)),
                });
            }
        }
    }
    Ok(SemidirectReport {
        random_words,
        normal_forms: count,
        failures,
    })
}

/// Every element of Φ.
pub fn all_phis(fs: &FactorSystem) -> Result<Vec<Vec<FactorAut>>> {
    let mut out: Vec<Vec<FactorAut>> = vec![Vec::new()];
    for k in 0..fs.n() {
        let auts = FactorAut::all(fs.factor(k))?;
        out = out
            .into_iter()
            .flat_map(|prefix| {
                auts.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect();
    }
    Ok(out)
}

fn reduced_words(fs: &FactorSystem, max_len: usize) -> Vec<Vec<(usize, Elem)>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<(usize, Elem)>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 0..3 {
                if w.last().map(|s| s.0) == Some(i) {
                    continue;
                }
                for &g in &sample_elements(fs, i) {
                    let mut v = w.clone();
                    v.push((i, g));
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Summary of report lists, grouped by relation id.
pub fn summarize(reports: &[RelationReport]) -> BTreeMap<String, (usize, usize)> {
    let mut m: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in reports {
        let e = m.entry(r.id.clone()).or_default();
        e.0 += 1;
        if !r.pass {
            e.1 += 1;
        }
    }
    m
}

/// Families that must not fix the vertex, used as a sanity check of the labelling test.
pub fn non_stabilizing_letters(n: usize, inst: &ShapeInstance) -> Vec<(usize, usize)> {
    let (blocks, twists) = stabilizer_families(n, inst);
    let allowed: BTreeSet<(usize, usize)> = blocks
        .iter()
        .chain(&twists)
        .filter(|f| f.leaves.len() == 1)
        .map(|f| (f.op, f.leaves[0]))
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in others(n, &[i]) {
            if !allowed.contains(&(i, j)) {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_systems::FactorGroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_word_is_identity() {
        let fs = FactorSystem::cyclic(&[2, 2, 2]).unwrap();
        assert_eq!(eval_generator_word(&fs, &[]).unwrap(), PureAut::identity(&fs));
    }

    #[test]
    fn relation_four_for_central_elements_is_trivial() {
        let fs = FactorSystem::new(vec![
            FactorGroup::cyclic(4).unwrap(),
            FactorGroup::cyclic(2).unwrap(),
            FactorGroup::cyclic(3).unwrap(),
            FactorGroup::cyclic(2).unwrap(),
            FactorGroup::cyclic(2).unwrap(),
        ])
        .unwrap();
        let w = block(0, &[1, 2, 3, 4], 1);
        assert!(eval_generator_word(&fs, &w).unwrap().is_outer_trivial(&fs));
    }

    #[test]
    fn n3_relations_hold() {
        let fs = FactorSystem::cyclic(&[2, 3, 4]).unwrap();
        let reports = check_relations(&fs, RelationCase::N3).unwrap();
        assert!(!reports.is_empty());
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn wrong_relation_is_caught() {
        let fs = FactorSystem::new(vec![
            FactorGroup::s3(),
            FactorGroup::cyclic(2).unwrap(),
            FactorGroup::cyclic(2).unwrap(),
        ])
        .unwrap();
        // [f_{1_2}(g), f_{1_2}(h)] is f([g,h]), not trivial in S3.
        let w = commutator(&fs, &[Letter::f(0, 1, 1)], &[Letter::f(0, 1, 2)]);
        assert!(!eval_generator_word(&fs, &w).unwrap().is_outer_trivial(&fs));
    }

    #[test]
    fn stabilizer_of_beta_rejects_other_letters() {
        let fs = FactorSystem::cyclic(&[2, 2, 2, 2, 2]).unwrap();
        let cat = ShapeCatalog::new(5).unwrap();
        let beta = ShapeInstance::new(Shape::Beta, vec![0, 1]);
        for (i, j) in non_stabilizing_letters(5, &beta) {
            let psi = Letter::f(i, j, 1).to_aut(&fs);
            assert!(!fixes_vertex(&fs, &cat, &beta, &psi).unwrap(), "f_{i}_{j}");
        }
    }

    #[test]
    fn semidirect_examples() {
        let fs = FactorSystem::cyclic(&[2, 3, 4]).unwrap();
        let nf = semidirect_normal_form(&fs, &[]).unwrap();
        assert!(nf.word.is_empty() && nf.phi.iter().all(|p| p.is_identity()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = semidirect_check_n3(&fs, &mut rng, 50, 2).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures);
    }
}
