//! Geometry of a domain in its Bass–Serre tree: pair distances, geodesic edge
//! paths, subpath counts, heights, and the classification of edges between
//! domains.
//!
//! The tree α̂ of a domain with labelling H_k = G_k^{r_k} is modelled on the
//! standard tree T₀ of G = G_1 * ... * G_n (centres are elements z, leaves are
//! cosets G_k z) with the action twisted by θ = ψ⁻¹, where ψ is the
//! automorphism carrying G_k to H_k. The edge e_k·y of α̂ is the edge of T₀
//! from the centre θ(y) to the leaf G_k θ(y).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::factor_systems::{FactorSystem, GWord};
use crate::splittings::{apply_outer, DomainKey, LabelledVertex, PureAut, Shape, ShapeCatalog};
use crate::whitehead_moves::{type_a_moves, MultiMove};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// From the centre v·z to the leaf H_k·z.
    Forward,
    /// From the leaf H_k·z to the centre v·z.
    Reverse,
}

impl Orientation {
    fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }
}

/// The edge e_leaf·z, traversed in the given direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeEdge {
    pub orientation: Orientation,
    pub leaf: usize,
    pub z: GWord,
}

impl fmt::Display for TreeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bar = if self.orientation == Orientation::Reverse { "~" } else { "" };
        write!(f, "{bar}e{}·{}", self.leaf + 1, self.z)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgePath {
    pub edges: Vec<TreeEdge>,
}

impl EdgePath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks that consecutive edges meet and that the path never backtracks.
    pub fn validate(&self, fs: &FactorSystem, key: &DomainKey) -> Result<()> {
        use Orientation::*;
        let r = key.conjugators();
        for (p, w) in self.edges.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            let ok = match (a.orientation, b.orientation) {
                // Meet at the leaf H_k·z: the translations differ by an element of H_k.
                (Forward, Reverse) => {
                    a.leaf == b.leaf
                        && a.z != b.z
                        && fs.in_conjugate(a.leaf, &r[a.leaf], &fs.mul(&b.z, &fs.inv(&a.z)))
                }
                // Meet at the centre v·z.
                (Reverse, Forward) => a.z == b.z && a.leaf != b.leaf,
                _ => false,
            };
            if !ok {
                return Err(Error::Internal(format!("edges {a} and {b} at {p} do not form a reduced path")));
            }
        }
        Ok(())
    }
}

/// One edge of a pattern; its translation is `offset·y` for a shared y.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PatternEdge {
    orientation: Orientation,
    leaf: usize,
    offset: GWord,
}

/// Subpaths whose occurrences are counted by [`lambda_count`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaPattern {
    /// e_a
    Edge { a: usize },
    /// ē_i e_a
    ThroughCentre { i: usize, a: usize },
    /// (e_i x⁻¹) ē_i e_a with x ∈ H_i
    Backtrack { i: usize, x: GWord, a: usize },
    /// ē_a e_b
    Cross { a: usize, b: usize },
}

impl LambdaPattern {
    fn edges(&self, fs: &FactorSystem) -> Vec<PatternEdge> {
        use Orientation::*;
        let e = |orientation, leaf, offset| PatternEdge {
            orientation,
            leaf,
            offset,
        };
        let one = GWord::identity;
        match self {
            LambdaPattern::Edge { a } => vec![e(Forward, *a, one())],
            LambdaPattern::ThroughCentre { i, a } => {
                vec![e(Reverse, *i, one()), e(Forward, *a, one())]
            }
            LambdaPattern::Backtrack { i, x, a } => vec![
                e(Forward, *i, fs.inv(x)),
                e(Reverse, *i, one()),
                e(Forward, *a, one()),
            ],
            LambdaPattern::Cross { a, b } => vec![e(Reverse, *a, one()), e(Forward, *b, one())],
        }
    }
}

fn matches_at(fs: &FactorSystem, w: &[TreeEdge], pattern: &[PatternEdge]) -> bool {
    if w.len() != pattern.len() {
        return false;
    }
    let y = fs.mul(&fs.inv(&pattern[0].offset), &w[0].z);
    w.iter().zip(pattern).all(|(edge, p)| {
        edge.orientation == p.orientation && edge.leaf == p.leaf && edge.z == fs.mul(&p.offset, &y)
    })
}

/// Number of positions of `w` at which the pattern, a translate of it, or the
/// reverse of a translate occurs. Overlapping occurrences are all counted.
pub fn lambda_count(fs: &FactorSystem, w: &EdgePath, pattern: &LambdaPattern) -> usize {
    let forward = pattern.edges(fs);
    let reverse: Vec<PatternEdge> = forward
        .iter()
        .rev()
        .map(|p| PatternEdge {
            orientation: p.orientation.flip(),
            leaf: p.leaf,
            offset: p.offset.clone(),
        })
        .collect();
    let len = forward.len();
    if w.len() < len {
        return 0;
    }
    (0..=w.len() - len)
        .filter(|&p| {
            let window = &w.edges[p..p + len];
            matches_at(fs, window, &forward) || matches_at(fs, window, &reverse)
        })
        .count()
}

/// Cached tree data of one domain.
#[derive(Clone, Debug)]
pub struct DomainGeometry {
    pub key: DomainKey,
    psi: PureAut,
    /// G_k stabilizes the leaf G_k·e_k of T₀ under the twisted action.
    leaf_reps: Vec<GWord>,
}

impl DomainGeometry {
    pub fn new(fs: &FactorSystem, key: &DomainKey) -> Result<Self> {
        if key.n() != fs.n() {
            return Err(Error::Invalid("domain has the wrong number of conjugators".into()));
        }
        let psi = key.to_aut(fs);
        let theta = psi.inverse(fs)?;
        let leaf_reps = key
            .conjugators()
            .iter()
            .map(|c| theta.apply_word(fs, &fs.inv(c)))
            .collect();
        Ok(DomainGeometry {
            key: key.clone(),
            psi,
            leaf_reps,
        })
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.key.n();
        if i >= n || j >= n {
            return Err(Error::FactorIndex(i.max(j)));
        }
        if i == j {
            return Err(Error::Invalid("a distance needs two distinct factors".into()));
        }
        Ok(())
    }

    /// u = s·core·t with s ∈ G_j, t ∈ G_i, where u = e_j e_i⁻¹.
    fn core(&self, fs: &FactorSystem, i: usize, j: usize) -> (GWord, crate::factor_systems::Elem) {
        let u = fs.mul(&self.leaf_reps[j], &fs.inv(&self.leaf_reps[i]));
        let (_, core, t) = fs.double_coset(j, i, &u);
        (core, t)
    }

    pub fn distance(&self, fs: &FactorSystem, i: usize, j: usize) -> Result<usize> {
        self.check_pair(i, j)?;
        Ok(2 + 2 * self.core(fs, i, j).0.len())
    }

    pub fn geodesic(&self, fs: &FactorSystem, i: usize, j: usize) -> Result<EdgePath> {
        self.check_pair(i, j)?;
        let (core, t) = self.core(fs, i, j);
        let label = |z: &GWord| self.psi.apply_word(fs, z);
        let edge = |orientation, leaf, z: &GWord| TreeEdge {
            orientation,
            leaf,
            z: label(z),
        };
        // Centres visited in T₀: t·e_i, then prefixed by the core syllables from the right.
        let mut centre = fs.mul(&GWord::letter(i, t), &self.leaf_reps[i]);
        let mut edges = vec![edge(Orientation::Reverse, i, &centre)];
        for &(k, s) in core.syllables().iter().rev() {
            edges.push(edge(Orientation::Forward, k, &centre));
            centre = fs.mul(&GWord::letter(k, s), &centre);
            edges.push(edge(Orientation::Reverse, k, &centre));
        }
        edges.push(edge(Orientation::Forward, j, &centre));
        Ok(EdgePath { edges })
    }
}

pub fn tree_distance(fs: &FactorSystem, key: &DomainKey, i: usize, j: usize) -> Result<usize> {
    DomainGeometry::new(fs, key)?.distance(fs, i, j)
}

pub fn geodesic_edges(fs: &FactorSystem, key: &DomainKey, i: usize, j: usize) -> Result<EdgePath> {
    DomainGeometry::new(fs, key)?.geodesic(fs, i, j)
}

/// Distances of all unordered pairs and the height they add up to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightReport {
    pub distances: BTreeMap<(usize, usize), usize>,
    pub height: usize,
}

pub fn height_report(fs: &FactorSystem, key: &DomainKey) -> Result<HeightReport> {
    let geo = DomainGeometry::new(fs, key)?;
    let mut distances = BTreeMap::new();
    let mut height = 0;
    for i in 0..fs.n() {
        for j in i + 1..fs.n() {
            let d = geo.distance(fs, i, j)?;
            height += d - 2;
            distances.insert((i, j), d);
        }
    }
    Ok(HeightReport { distances, height })
}

pub fn height(fs: &FactorSystem, key: &DomainKey) -> Result<usize> {
    Ok(height_report(fs, key)?.height)
}

/// The subpath-count formula for the change in height caused by a move.
///
/// It assumes the reductions at different positions of each geodesic are
/// independent, which fails at the junctions handled by [`junction_correction`].
pub fn subpath_delta(fs: &FactorSystem, key: &DomainKey, m: &MultiMove) -> Result<i64> {
    if &m.base != key {
        return Err(Error::BaseMismatch);
    }
    let geo = DomainGeometry::new(fs, key)?;
    let parts = m.normalized();
    let hat = m.hat();
    let i = m.op;
    let mut total: i64 = 0;
    for (p, q) in pairs(fs.n()) {
        let w = geo.geodesic(fs, p, q)?;
        let count = |pat: LambdaPattern| lambda_count(fs, &w, &pat) as i64;
        for part in &parts {
            for &a in &part.leaves {
                // Twice the summand, so the halved cross term stays integral.
                total += 2 * count(LambdaPattern::Edge { a });
                total -= 2 * count(LambdaPattern::ThroughCentre { i, a });
                total -= 2 * count(LambdaPattern::Backtrack {
                    i,
                    x: part.x.clone(),
                    a,
                });
                for &b in part.leaves.iter().filter(|&&b| b != a) {
                    total -= 2 * count(LambdaPattern::Cross { a, b });
                }
                for &c in hat.iter().filter(|c| !part.leaves.contains(c)) {
                    total -= count(LambdaPattern::Cross { a, b: c });
                }
            }
        }
    }
    Ok(total)
}

/// Adjustment for subpaths ē_c·y e_i·y ē_i·z e_a·z with both c and a moved.
///
/// Both outer edges consume the images of the two middle edges, so neither
/// backtrack reduction counted by [`subpath_delta`] happens there. Instead the
/// leftover images f_i·x_c⁻¹y and f̄_i·x_a⁻¹z cancel when x_c⁻¹y = x_a⁻¹z.
pub fn junction_correction(fs: &FactorSystem, key: &DomainKey, m: &MultiMove) -> Result<i64> {
    use Orientation::*;
    if &m.base != key {
        return Err(Error::BaseMismatch);
    }
    let geo = DomainGeometry::new(fs, key)?;
    let i = m.op;
    let hat = m.hat();
    let x_inv = |a: usize| fs.inv(&m.element_of(a));
    let mut total = 0;
    for (p, q) in pairs(fs.n()) {
        let w = geo.geodesic(fs, p, q)?;
        for win in w.edges.windows(4) {
            let shape = [win[0].orientation, win[1].orientation, win[2].orientation, win[3].orientation];
            if shape != [Reverse, Forward, Reverse, Forward]
                || win[1].leaf != i
                || win[2].leaf != i
                || !hat.contains(&win[0].leaf)
                || !hat.contains(&win[3].leaf)
            {
                continue;
            }
            let (c, a) = (win[0].leaf, win[3].leaf);
            let (y, z) = (&win[1].z, &win[2].z);
            let backtrack_a = *y == fs.mul(&x_inv(a), z);
            let backtrack_c = *z == fs.mul(&x_inv(c), y);
            let merge = fs.mul(&x_inv(c), y) == fs.mul(&x_inv(a), z);
            total += 2 * (backtrack_a as i64) + 2 * (backtrack_c as i64) - 2 * (merge as i64);
        }
    }
    Ok(total)
}

/// Exact change in height caused by a move, computed in the base domain.
pub fn height_delta(fs: &FactorSystem, key: &DomainKey, m: &MultiMove) -> Result<i64> {
    Ok(subpath_delta(fs, key, m)? + junction_correction(fs, key, m)?)
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |p| (p + 1..n).map(move |q| (p, q)))
}

/// How two domains are joined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeType {
    Same,
    /// Related by a move with this operating factor.
    A(usize),
    /// Both contain the vertex B_{i,j,k} of the same orbit.
    B([usize; 3]),
    /// Both contain the vertex C_{i,j,k,l,m} of the same orbit.
    C([usize; 5]),
    None,
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(",");
        match self {
            EdgeType::Same => write!(f, "same"),
            EdgeType::A(i) => write!(f, "A({})", i + 1),
            EdgeType::B(v) => write!(f, "B({})", join(v)),
            EdgeType::C(v) => write!(f, "C({})", join(v)),
            EdgeType::None => write!(f, "none"),
        }
    }
}

/// ρ with α₂ = α₀·ρ·ψ₁, so α₁ and α₂ share the vertex T·ψ₁ iff ρ fixes T.
fn connecting(fs: &FactorSystem, a1: &DomainKey, a2: &DomainKey) -> Result<(PureAut, PureAut)> {
    let psi1 = a1.to_aut(fs);
    let rho = a2.to_aut(fs).then(fs, &psi1.inverse(fs)?).canonical(fs);
    Ok((rho, psi1))
}

fn shared_vertex(
    fs: &FactorSystem,
    catalog: &ShapeCatalog,
    rho: &PureAut,
    shape: Shape,
) -> Result<Option<Vec<usize>>> {
    for inst in catalog.shapes().iter().filter(|s| s.shape == shape) {
        let v = LabelledVertex::base(catalog, inst)?;
        if apply_outer(fs, &v, rho).equivalent(&v, fs)? {
            return Ok(Some(inst.indices.clone()));
        }
    }
    Ok(None)
}

pub fn edge_type_with(
    fs: &FactorSystem,
    catalog: &ShapeCatalog,
    a1: &DomainKey,
    a2: &DomainKey,
) -> Result<EdgeType> {
    if a1 == a2 {
        return Ok(EdgeType::Same);
    }
    if let Some(m) = type_a_moves(fs, a1, a2).first() {
        return Ok(EdgeType::A(m.op));
    }
    let (rho, _) = connecting(fs, a1, a2)?;
    if let Some(v) = shared_vertex(fs, catalog, &rho, Shape::B)? {
        return Ok(EdgeType::B([v[0], v[1], v[2]]));
    }
    if let Some(v) = shared_vertex(fs, catalog, &rho, Shape::C)? {
        return Ok(EdgeType::C([v[0], v[1], v[2], v[3], v[4]]));
    }
    Ok(EdgeType::None)
}

pub fn edge_type(fs: &FactorSystem, a1: &DomainKey, a2: &DomainKey) -> Result<EdgeType> {
    let catalog = ShapeCatalog::new(fs.n())?;
    edge_type_with(fs, &catalog, a1, a2)
}

/// Replaces a Type B or C edge by a path of Type A edges through domains
/// sharing the same vertex.
pub fn retype_to_a(
    fs: &FactorSystem,
    a1: &DomainKey,
    a2: &DomainKey,
    kind: &EdgeType,
) -> Result<Vec<DomainKey>> {
    // Twists (j, k): leaf k is carried by an element of G_j on top of the i-blocks.
    let (i, twists): (usize, Vec<(usize, usize)>) = match kind {
        EdgeType::B([i, j, k]) => (*i, vec![(*j, *k)]),
        EdgeType::C([i, j, k, l, m]) => (*i, vec![(*j, *k), (*l, *m)]),
        other => {
            return Err(Error::Precondition(format!("edge of type {other} needs no retyping")));
        }
    };
    if !type_a_moves(fs, a1, a2).is_empty() {
        return Err(Error::Precondition("the edge is already of Type A".into()));
    }
    let (rho, psi1) = connecting(fs, a1, a2)?;
    let target = rho.domain(fs);
    // Frame in which the centre factor has trivial conjugator.
    let ci_inv = fs.inv(&target.conjugators()[i]);
    let d: Vec<GWord> = target.conjugators().iter().map(|c| fs.mul(c, &ci_inv)).collect();
    // Undo the twists one at a time, last first.
    let mut chain = vec![target];
    let mut cur = d;
    for &(j, k) in twists.iter().rev() {
        cur[k] = fs.split_leading(j, &cur[k]).1;
        chain.push(DomainKey::canonicalize(fs, &cur)?);
    }
    chain.push(DomainKey::base(fs.n()));
    chain.reverse();
    let mut path = Vec::with_capacity(chain.len());
    for key in &chain {
        path.push(key.to_aut(fs).then(fs, &psi1).domain(fs));
    }
    if path.first() != Some(a1) || path.last() != Some(a2) {
        return Err(Error::Internal("retyped path has the wrong endpoints".into()));
    }
    for w in path.windows(2) {
        if w[0] != w[1] && type_a_moves(fs, &w[0], &w[1]).is_empty() {
            return Err(Error::Internal("retyped path contains a non Type A step".into()));
        }
    }
    path.dedup();
    Ok(path)
}
