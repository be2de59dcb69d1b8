//! Tree shapes of the fundamental domain, labellings by conjugates of the
//! factor groups, and pure symmetric automorphisms acting on them.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::factor_systems::{Elem, FactorAut, FactorSystem, GWord};

/// The eleven vertex families of the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Rho,
    Sigma,
    Tau,
    Alpha,
    Beta,
    Gamma,
    Delta,
    Epsilon,
    A,
    B,
    C,
}

impl Shape {
    /// Enumeration order; the first tuple found for a tree is its canonical name.
    pub const ALL: [Shape; 11] = [
        Shape::Rho,
        Shape::Sigma,
        Shape::Tau,
        Shape::Alpha,
        Shape::Beta,
        Shape::Gamma,
        Shape::Delta,
        Shape::Epsilon,
        Shape::A,
        Shape::B,
        Shape::C,
    ];

    pub fn arity(self) -> usize {
        match self {
            Shape::Alpha => 0,
            Shape::A => 1,
            Shape::Rho | Shape::Beta => 2,
            Shape::Gamma | Shape::B => 3,
            Shape::Tau | Shape::Epsilon => 4,
            Shape::Sigma | Shape::Delta | Shape::C => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Rho => "rho",
            Shape::Sigma => "sigma",
            Shape::Tau => "tau",
            Shape::Alpha => "alpha",
            Shape::Beta => "beta",
            Shape::Gamma => "gamma",
            Shape::Delta => "delta",
            Shape::Epsilon => "epsilon",
            Shape::A => "A",
            Shape::B => "B",
            Shape::C => "C",
        }
    }

    pub fn from_name(s: &str) -> Option<Shape> {
        let shape = match s {
            "rho" | "ρ" => Shape::Rho,
            "sigma" | "σ" => Shape::Sigma,
            "tau" | "τ" => Shape::Tau,
            "alpha" | "α" => Shape::Alpha,
            "beta" | "β" => Shape::Beta,
            "gamma" | "γ" => Shape::Gamma,
            "delta" | "δ" => Shape::Delta,
            "epsilon" | "ε" => Shape::Epsilon,
            "A" => Shape::A,
            "B" => Shape::B,
            "C" => Shape::C,
            _ => return None,
        };
        Some(shape)
    }
}

/// A vertex of the fundamental domain: a shape with its (0-based) index tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeInstance {
    pub shape: Shape,
    pub indices: Vec<usize>,
}

impl ShapeInstance {
    pub fn new(shape: Shape, indices: Vec<usize>) -> Self {
        ShapeInstance { shape, indices }
    }

    pub fn alpha() -> Self {
        ShapeInstance::new(Shape::Alpha, Vec::new())
    }
}

impl fmt::Display for ShapeInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        if idx.is_empty() {
            write!(f, "{}", self.shape.name())
        } else {
            write!(f, "{}[{}]", self.shape.name(), idx.join(","))
        }
    }
}

/// A finite tree whose vertices are either trivial or carry a factor index.
/// Vertex 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeTree {
    pub labels: Vec<Option<usize>>,
    pub parent: Vec<Option<usize>>,
}

impl ShapeTree {
    fn with_root(label: Option<usize>) -> Self {
        ShapeTree {
            labels: vec![label],
            parent: vec![None],
        }
    }

    fn add(&mut self, parent: usize, label: Option<usize>) -> usize {
        self.labels.push(label);
        self.parent.push(Some(parent));
        self.labels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (p, v)))
            .collect()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (p, v) in self.edges() {
            ch[p].push(v);
        }
        ch
    }

    fn degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.len()];
        for (p, v) in self.edges() {
            deg[p] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Every trivial vertex has valency at least three.
    pub fn is_admissible(&self) -> bool {
        let deg = self.degree();
        self.labels
            .iter()
            .zip(deg)
            .all(|(l, d)| l.is_some() || d >= 3)
    }

    /// Vertex carrying the factor index `k`.
    pub fn vertex_of(&self, k: usize) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(k))
    }

    /// Label-respecting isomorphism invariant of the unrooted tree.
    pub fn code(&self) -> String {
        let adj = adjacency(self.len(), &self.edges());
        let root = self.vertex_of(0).expect("every tree carries factor 0");
        rooted_code(&self.labels, &adj, root, usize::MAX)
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn rooted_code(labels: &[Option<usize>], adj: &[Vec<usize>], v: usize, from: usize) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| w != from)
        .map(|&w| rooted_code(labels, adj, w, v))
        .collect();
    kids.sort();
    let label = labels[v].map_or_else(|| "*".to_string(), |k| k.to_string());
    format!("({}{})", label, kids.concat())
}

/// Builds the template tree of a shape. Indices not named by the tuple hang off the root.
pub fn template(n: usize, inst: &ShapeInstance) -> Result<ShapeTree> {
    let idx = &inst.indices;
    if idx.len() != inst.shape.arity() {
        return invalid(format!(
            "shape {} takes {} indices, got {}",
            inst.shape.name(),
            inst.shape.arity(),
            idx.len()
        ));
    }
    let distinct: BTreeSet<usize> = idx.iter().copied().collect();
    if distinct.len() != idx.len() || idx.iter().any(|&k| k >= n) {
        return invalid(format!("shape indices must be distinct and below {n}"));
    }
    let named_root = matches!(
        inst.shape,
        Shape::A | Shape::Gamma | Shape::Sigma | Shape::Delta | Shape::B | Shape::C
    );
    let mut t = ShapeTree::with_root(if named_root { Some(idx[0]) } else { None });
    let pair = |t: &mut ShapeTree, a: usize, b: usize| {
        let p = t.add(0, None);
        t.add(p, Some(a));
        t.add(p, Some(b));
    };
    let chain = |t: &mut ShapeTree, a: usize, b: usize| {
        let p = t.add(0, Some(a));
        t.add(p, Some(b));
    };
    match inst.shape {
        Shape::Alpha | Shape::A => {}
        Shape::Rho => pair(&mut t, idx[0], idx[1]),
        Shape::Beta => chain(&mut t, idx[0], idx[1]),
        Shape::Gamma => pair(&mut t, idx[1], idx[2]),
        Shape::Sigma => {
            pair(&mut t, idx[1], idx[2]);
            pair(&mut t, idx[3], idx[4]);
        }
        Shape::Tau => {
            chain(&mut t, idx[0], idx[1]);
            pair(&mut t, idx[2], idx[3]);
        }
        Shape::Delta => {
            chain(&mut t, idx[1], idx[2]);
            pair(&mut t, idx[3], idx[4]);
        }
        Shape::Epsilon => {
            chain(&mut t, idx[0], idx[1]);
            chain(&mut t, idx[2], idx[3]);
        }
        Shape::B => chain(&mut t, idx[1], idx[2]),
        Shape::C => {
            chain(&mut t, idx[1], idx[2]);
            chain(&mut t, idx[3], idx[4]);
        }
    }
    for v in 0..n {
        if !distinct.contains(&v) {
            t.add(0, Some(v));
        }
    }
    Ok(t)
}

/// All vertices of the fundamental domain for a fixed n, with the collapse relation.
#[derive(Clone, Debug)]
pub struct ShapeCatalog {
    n: usize,
    shapes: Vec<ShapeInstance>,
    by_code: HashMap<String, usize>,
    collapses: Vec<Vec<usize>>,
}

impl ShapeCatalog {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return invalid(format!("n must be at least 3, got {n}"));
        }
        if n > 7 {
            return invalid(format!("n = {n} exceeds the supported range 3..=7"));
        }
        let mut shapes = Vec::new();
        let mut by_code = HashMap::new();
        for shape in Shape::ALL {
            if shape.arity() > n {
                continue;
            }
            for tuple in ordered_tuples(n, shape.arity()) {
                let inst = ShapeInstance::new(shape, tuple);
                let tree = template(n, &inst)?;
                if !tree.is_admissible() {
                    continue;
                }
                let code = tree.code();
                if let std::collections::hash_map::Entry::Vacant(e) = by_code.entry(code) {
                    e.insert(shapes.len());
                    shapes.push(inst);
                }
            }
        }
        let mut cat = ShapeCatalog {
            n,
            shapes,
            by_code,
            collapses: Vec::new(),
        };
        let mut collapses = Vec::with_capacity(cat.shapes.len());
        for s in 0..cat.shapes.len() {
            collapses.push(cat.compute_collapses(s)?);
        }
        cat.collapses = collapses;
        Ok(cat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shapes(&self) -> &[ShapeInstance] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Position of the canonical form of `inst`.
    pub fn find(&self, inst: &ShapeInstance) -> Result<usize> {
        let tree = template(self.n, inst)?;
        if !tree.is_admissible() {
            return invalid(format!("{inst} has a trivial vertex of valency below three"));
        }
        self.by_code
            .get(&tree.code())
            .copied()
            .ok_or_else(|| Error::Internal(format!("{inst} is missing from the catalogue")))
    }

    pub fn canonical(&self, inst: &ShapeInstance) -> Result<ShapeInstance> {
        Ok(self.shapes[self.find(inst)?].clone())
    }

    pub fn alpha(&self) -> usize {
        self.find(&ShapeInstance::alpha()).expect("alpha is always present")
    }

    /// Indices of all shapes reachable by collapsing one or more edges.
    pub fn collapses_of(&self, s: usize) -> &[usize] {
        &self.collapses[s]
    }

    pub fn collapses(&self, inst: &ShapeInstance) -> Result<Vec<ShapeInstance>> {
        let s = self.find(inst)?;
        Ok(self.collapses[s]
            .iter()
            .map(|&t| self.shapes[t].clone())
            .collect())
    }

    pub fn counts_by_family(&self) -> Vec<(Shape, usize)> {
        Shape::ALL
            .iter()
            .map(|&sh| (sh, self.shapes.iter().filter(|s| s.shape == sh).count()))
            .filter(|&(_, c)| c > 0)
            .collect()
    }

    fn compute_collapses(&self, s: usize) -> Result<Vec<usize>> {
        let tree = template(self.n, &self.shapes[s])?;
        let start = (tree.labels.clone(), tree.edges());
        let mut seen: HashSet<String> = HashSet::new();
        seen.insert(tree.code());
        let mut queue = VecDeque::from([start]);
        let mut out = BTreeSet::new();
        while let Some((labels, edges)) = queue.pop_front() {
            for e in 0..edges.len() {
                let (a, b) = edges[e];
                if labels[a].is_some() && labels[b].is_some() {
                    continue;
                }
                let (gone, keep) = if labels[a].is_none() { (a, b) } else { (b, a) };
                let (nl, ne) = contract(&labels, &edges, gone, keep);
                let adj = adjacency(nl.len(), &ne);
                let root = nl.iter().position(|l| *l == Some(0)).unwrap();
                let code = rooted_code(&nl, &adj, root, usize::MAX);
                if seen.insert(code.clone()) {
                    let idx = self.by_code.get(&code).copied().ok_or_else(|| {
                        Error::Internal(format!(
                            "collapse of {} is not a vertex of the domain",
                            self.shapes[s]
                        ))
                    })?;
                    out.insert(idx);
                    queue.push_back((nl, ne));
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

fn contract(
    labels: &[Option<usize>],
    edges: &[(usize, usize)],
    gone: usize,
    keep: usize,
) -> (Vec<Option<usize>>, Vec<(usize, usize)>) {
    let remap = |v: usize| {
        let v = if v == gone { keep } else { v };
        if v > gone {
            v - 1
        } else {
            v
        }
    };
    let nl: Vec<Option<usize>> = labels
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != gone)
        .map(|(_, l)| *l)
        .collect();
    let ne = edges
        .iter()
        .filter(|&&(a, b)| !((a == gone && b == keep) || (a == keep && b == gone)))
        .map(|&(a, b)| (remap(a), remap(b)))
        .collect();
    (nl, ne)
}

/// All tuples of `k` distinct values below `n`, in lexicographic order.
fn ordered_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

pub fn enumerate_shapes(n: usize) -> Result<Vec<ShapeInstance>> {
    Ok(ShapeCatalog::new(n)?.shapes)
}

/// Normalizes the conjugators of `members` (sorted, all pairwise joined through
/// trivial vertices) up to a common right multiplier and left twists in each
/// member's own factor. Returns the right multiplier that was applied.
pub(crate) fn normalize_group(fs: &FactorSystem, members: &[usize], c: &mut [GWord]) -> GWord {
    for &k in members {
        c[k] = fs.strip_leading(k, &c[k]);
    }
    let last = *members.last().expect("non-empty group");
    let first = members[0];
    let g = fs.inv(&c[last]);
    for &k in members {
        c[k] = fs.strip_leading(k, &fs.mul(&c[k], &g));
    }
    let (_, t) = fs.split_trailing(last, &c[first]);
    let h = GWord::letter(last, fs.factor(last).inv(t));
    for &k in members {
        c[k] = fs.strip_leading(k, &fs.mul(&c[k], &h));
    }
    fs.mul(&g, &h)
}

/// Canonical conjugator tuple of an alpha labelling: the domain key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DomainKey(Vec<GWord>);

impl DomainKey {
    pub fn base(n: usize) -> Self {
        DomainKey(vec![GWord::identity(); n])
    }

    pub fn canonicalize(fs: &FactorSystem, raw: &[GWord]) -> Result<Self> {
        if raw.len() != fs.n() {
            return invalid(format!(
                "domain needs {} conjugators, got {}",
                fs.n(),
                raw.len()
            ));
        }
        for w in raw {
            fs.validate(w)?;
        }
        let mut c = raw.to_vec();
        let members: Vec<usize> = (0..fs.n()).collect();
        normalize_group(fs, &members, &mut c);
        Ok(DomainKey(c))
    }

    /// Canonical form together with the right multiplier g such that entry k
    /// of the result is h_k·raw_k·g for some h_k ∈ G_k.
    pub fn canonicalize_framed(fs: &FactorSystem, raw: &[GWord]) -> Result<(Self, GWord)> {
        if raw.len() != fs.n() {
            return invalid(format!(
                "domain needs {} conjugators, got {}",
                fs.n(),
                raw.len()
            ));
        }
        let mut c = raw.to_vec();
        let members: Vec<usize> = (0..fs.n()).collect();
        let g = normalize_group(fs, &members, &mut c);
        Ok((DomainKey(c), g))
    }

    pub fn conjugators(&self) -> &[GWord] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn is_base(&self) -> bool {
        self.0.iter().all(|w| w.is_identity())
    }

    /// An automorphism carrying the base domain to this one.
    pub fn to_aut(&self, fs: &FactorSystem) -> PureAut {
        PureAut::from_conjugators(fs, self.0.clone())
    }
}

/// Canonical labelling of a shape: per-vertex words that are invariant under
/// equivalence of labellings.
pub fn canonical_labels(fs: &FactorSystem, tree: &ShapeTree, conj: &[GWord]) -> Vec<GWord> {
    let n = fs.n();
    let mut anchor: Vec<Option<usize>> = vec![None; n];
    // Branch identifier: (anchor factor, first vertex below the anchor).
    let mut branch: Vec<Option<(usize, usize)>> = vec![None; n];
    for v in 0..tree.len() {
        let Some(k) = tree.labels[v] else { continue };
        let mut child = v;
        let mut cur = tree.parent[v];
        while let Some(p) = cur {
            if let Some(o) = tree.labels[p] {
                anchor[k] = Some(o);
                branch[k] = Some((o, child));
                break;
            }
            child = p;
            cur = tree.parent[p];
        }
    }
    let mut out = conj.to_vec();
    let top: Vec<usize> = (0..n).filter(|&k| anchor[k].is_none()).collect();
    normalize_group(fs, &top, &mut out);
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for k in 0..n {
        if let Some(b) = branch[k] {
            groups.entry(b).or_default().push(k);
        }
    }
    for ((o, _), members) in groups {
        let co_inv = fs.inv(&conj[o]);
        let mut d: Vec<GWord> = members
            .iter()
            .map(|&t| fs.strip_leading(t, &fs.mul(&conj[t], &co_inv)))
            .collect();
        let (_, tr) = fs.split_trailing(o, &d[0]);
        let s = GWord::letter(o, fs.factor(o).inv(tr));
        for (w, &t) in d.iter_mut().zip(&members) {
            *w = fs.strip_leading(t, &fs.mul(w, &s));
        }
        for (w, &t) in d.into_iter().zip(&members) {
            out[t] = w;
        }
    }
    out
}

/// A shape together with a labelling of its named vertices by conjugates G_k^{g_k}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledVertex {
    pub shape: ShapeInstance,
    pub conjugators: Vec<GWord>,
}

impl LabelledVertex {
    pub fn base(catalog: &ShapeCatalog, shape: &ShapeInstance) -> Result<Self> {
        Ok(LabelledVertex {
            shape: catalog.canonical(shape)?,
            conjugators: vec![GWord::identity(); catalog.n()],
        })
    }

    /// Equivalence-class invariant of the labelling.
    pub fn key(&self, fs: &FactorSystem) -> Result<Vec<GWord>> {
        let tree = template(fs.n(), &self.shape)?;
        Ok(canonical_labels(fs, &tree, &self.conjugators))
    }

    pub fn equivalent(&self, other: &LabelledVertex, fs: &FactorSystem) -> Result<bool> {
        Ok(self.shape == other.shape && self.key(fs)? == other.key(fs)?)
    }
}

/// Right action of a pure symmetric automorphism on a labelled vertex:
/// G_k^{g_k} goes to ψ(G_k^{g_k}) = G_k^{c_k ψ(g_k)}.
pub fn apply_outer(fs: &FactorSystem, v: &LabelledVertex, psi: &PureAut) -> LabelledVertex {
    let conjugators = v
        .conjugators
        .iter()
        .enumerate()
        .map(|(k, g)| fs.mul(&psi.conj[k], &psi.apply_word(fs, g)))
        .collect();
    LabelledVertex {
        shape: v.shape.clone(),
        conjugators,
    }
}

/// Pure symmetric automorphism: on G_k it is x ↦ c_k⁻¹ φ_k(x) c_k.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PureAut {
    pub phis: Vec<FactorAut>,
    pub conj: Vec<GWord>,
}

impl PureAut {
    pub fn identity(fs: &FactorSystem) -> Self {
        PureAut {
            phis: fs.factors().iter().map(FactorAut::identity).collect(),
            conj: vec![GWord::identity(); fs.n()],
        }
    }

    pub fn new(fs: &FactorSystem, phis: Vec<FactorAut>, conj: Vec<GWord>) -> Result<Self> {
        if phis.len() != fs.n() || conj.len() != fs.n() {
            return invalid("automorphism data must have one entry per factor");
        }
        for (k, p) in phis.iter().enumerate() {
            p.validate(fs.factor(k))?;
        }
        for w in &conj {
            fs.validate(w)?;
        }
        Ok(PureAut { phis, conj })
    }

    pub fn from_conjugators(fs: &FactorSystem, conj: Vec<GWord>) -> Self {
        PureAut {
            phis: fs.factors().iter().map(FactorAut::identity).collect(),
            conj,
        }
    }

    pub fn factor_aut(fs: &FactorSystem, phis: Vec<FactorAut>) -> Self {
        PureAut {
            phis,
            conj: vec![GWord::identity(); fs.n()],
        }
    }

    /// Conjugation of the whole group: x ↦ g⁻¹ x g.
    pub fn inner(fs: &FactorSystem, g: &GWord) -> Self {
        PureAut::from_conjugators(fs, vec![g.clone(); fs.n()])
    }

    /// Conjugates every factor in `set` by `x`: y ↦ x⁻¹ y x.
    pub fn conjugating(fs: &FactorSystem, set: &BTreeSet<usize>, x: &GWord) -> Self {
        let conj = (0..fs.n())
            .map(|k| {
                if set.contains(&k) {
                    x.clone()
                } else {
                    GWord::identity()
                }
            })
            .collect();
        PureAut::from_conjugators(fs, conj)
    }

    /// The Whitehead automorphism f_{i_j}(g) = ({G_j}, g⁻¹).
    pub fn whitehead_letter(fs: &FactorSystem, i: usize, j: usize, g: Elem) -> Self {
        let x = GWord::letter(i, fs.factor(i).inv(g));
        PureAut::conjugating(fs, &BTreeSet::from([j]), &x)
    }

    /// ad_{G_i}(g): conjugation by g on G_i, identity on the other factors.
    pub fn ad(fs: &FactorSystem, i: usize, g: Elem) -> Self {
        let mut phis: Vec<FactorAut> = fs.factors().iter().map(FactorAut::identity).collect();
        phis[i] = FactorAut::inner(fs.factor(i), g);
        PureAut::factor_aut(fs, phis)
    }

    pub fn n(&self) -> usize {
        self.conj.len()
    }

    pub fn apply_word(&self, fs: &FactorSystem, w: &GWord) -> GWord {
        let mut out = GWord::identity();
        for &(k, e) in w.syllables() {
            let img = GWord::letter(k, self.phis[k].apply(fs.factor(k), e));
            out = fs.mul_all([&out, &fs.inv(&self.conj[k]), &img, &self.conj[k]]);
        }
        out
    }

    /// `self` first, then `next`.
    pub fn then(&self, fs: &FactorSystem, next: &PureAut) -> PureAut {
        let phis = (0..self.n())
            .map(|k| self.phis[k].then(fs.factor(k), &next.phis[k]))
            .collect();
        let conj = (0..self.n())
            .map(|k| fs.mul(&next.conj[k], &next.apply_word(fs, &self.conj[k])))
            .collect();
        PureAut { phis, conj }
    }

    /// Product of a sequence applied left to right.
    pub fn product<'a>(fs: &FactorSystem, seq: impl IntoIterator<Item = &'a PureAut>) -> PureAut {
        seq.into_iter()
            .fold(PureAut::identity(fs), |acc, a| acc.then(fs, a))
    }

    /// Unique representative of the outer class.
    pub fn canonical(&self, fs: &FactorSystem) -> PureAut {
        let mut c = self.conj.clone();
        let members: Vec<usize> = (0..fs.n()).collect();
        let g = normalize_group(fs, &members, &mut c);
        let phis = (0..fs.n())
            .map(|k| {
                // self.conj[k]·g = s·c[k] with s in G_k.
                let s = fs.mul_all([&self.conj[k], &g, &fs.inv(&c[k])]);
                let s = s
                    .as_factor_elem(k)
                    .expect("normalization only moves factor syllables");
                self.phis[k].then(fs.factor(k), &FactorAut::inner(fs.factor(k), s))
            })
            .collect();
        PureAut { phis, conj: c }
    }

    pub fn is_outer_trivial(&self, fs: &FactorSystem) -> bool {
        let c = self.canonical(fs);
        c.conj.iter().all(|w| w.is_identity()) && c.phis.iter().all(|p| p.is_identity())
    }

    /// Domain key of the image of the base domain.
    pub fn domain(&self, fs: &FactorSystem) -> DomainKey {
        let mut c = self.conj.clone();
        let members: Vec<usize> = (0..fs.n()).collect();
        normalize_group(fs, &members, &mut c);
        DomainKey(c)
    }

    /// Inverse automorphism.
    pub fn inverse(&self, fs: &FactorSystem) -> Result<PureAut> {
        let phi_inv = PureAut::factor_aut(
            fs,
            (0..fs.n())
                .map(|k| self.phis[k].inverse(fs.factor(k)))
                .collect(),
        );
        let conj_inv = invert_conjugation(fs, &self.conj)?;
        Ok(conj_inv.then(fs, &phi_inv))
    }
}

/// One star-reduction move: every point in `set` is multiplied on the right by
/// `shift` = r_i⁻¹·u·r_i, where u ∈ G_op.
pub struct StarStep {
    pub op: usize,
    pub set: BTreeSet<usize>,
    pub u: GWord,
    pub shift: GWord,
}

fn star_budget(r: &[GWord]) -> usize {
    let n = r.len();
    4 * (r.iter().map(|w| w.len()).sum::<usize>() + 4) * n * n
}

/// The next move that pulls the points G_k r_k of the standard tree towards a
/// common centre, or `None` once they form a star.
pub fn star_step(fs: &FactorSystem, r: &[GWord]) -> Option<StarStep> {
    let n = fs.n();
    for i in 0..n {
        let ri_inv = fs.inv(&r[i]);
        let mut labels: Vec<(usize, Elem)> = Vec::new();
        for j in (0..n).filter(|&j| j != i) {
            let w = fs.strip_leading(j, &fs.mul(&r[j], &ri_inv));
            let (_, t) = fs.split_trailing(i, &w);
            labels.push((j, t));
        }
        let t1 = labels[0].1;
        let Some(&(_, t2)) = labels.iter().find(|&&(_, t)| t != t1) else {
            continue;
        };
        let g = fs.factor(i);
        let u = GWord::letter(i, g.mul(g.inv(t1), t2));
        let set: BTreeSet<usize> = labels
            .iter()
            .filter(|&&(_, t)| t == t1)
            .map(|&(j, _)| j)
            .collect();
        let shift = fs.mul_all([&ri_inv, &u, &r[i]]);
        return Some(StarStep { op: i, set, u, shift });
    }
    None
}

/// Raw conjugator tuples visited while reducing `r` to a star, starting with `r`.
pub fn star_path(fs: &FactorSystem, r: &[GWord]) -> Result<Vec<Vec<GWord>>> {
    let mut cur = r.to_vec();
    let mut out = vec![cur.clone()];
    let budget = star_budget(r);
    while let Some(step) = star_step(fs, &cur) {
        for &a in &step.set {
            cur[a] = fs.mul(&cur[a], &step.shift);
        }
        out.push(cur.clone());
        if out.len() > budget {
            return Err(Error::NotADomain(
                "conjugator tuple does not reduce to a star".into(),
            ));
        }
    }
    Ok(out)
}

/// Inverse of x ∈ G_k ↦ r_k⁻¹ x r_k. The tuple is reduced to a star by
/// Whitehead moves around the points G_k r_k of the standard tree.
fn invert_conjugation(fs: &FactorSystem, r: &[GWord]) -> Result<PureAut> {
    let n = fs.n();
    let mut r = r.to_vec();
    let mut moves: Vec<PureAut> = Vec::new();
    let budget = star_budget(&r);
    while let Some(step) = star_step(fs, &r) {
        for &a in &step.set {
            r[a] = fs.mul(&r[a], &step.shift);
        }
        moves.push(PureAut::conjugating(fs, &step.set, &step.u));
        if moves.len() > budget {
            return Err(Error::NotADomain(
                "conjugator tuple does not reduce to a star".into(),
            ));
        }
    }
    // All points now hang off one centre c: r_k = h_k·c with h_k ∈ G_k.
    let last = n - 1;
    let w = fs.strip_leading(last, &r[last]);
    let (_, rest) = fs.split_leading(0, &fs.mul(&r[0], &fs.inv(&w)));
    let s = rest.as_factor_elem(last).ok_or_else(|| {
        Error::NotADomain("conjugates of the factors do not form a free factor system".into())
    })?;
    let c = fs.mul(&GWord::letter(last, s), &w);
    let c_inv = fs.inv(&c);
    let mut tau_inv = Vec::with_capacity(n);
    for k in 0..n {
        let h = fs.mul(&r[k], &c_inv).as_factor_elem(k).ok_or_else(|| {
            Error::NotADomain("conjugates of the factors do not form a free factor system".into())
        })?;
        // τ⁻¹ : g ↦ h g h⁻¹ = inner(h⁻¹).
        tau_inv.push(FactorAut::inner(fs.factor(k), fs.factor(k).inv(h)));
    }
    let mut seq = vec![
        PureAut::inner(fs, &c_inv),
        PureAut::factor_aut(fs, tau_inv),
    ];
    seq.extend(moves.into_iter().rev());
    Ok(PureAut::product(fs, &seq))
}
