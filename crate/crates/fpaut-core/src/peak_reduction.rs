//! Peak reduction in the graph of domains: the case rewrites for two-edge
//! peaks, reduction of closed loops to the constant loop, and factorization of
//! domains and automorphisms along height-monotone paths.
//!
//! Every rewrite is built from conjugator tuples written in the frame of the
//! peak's top domain. The resulting domains are then re-checked: each
//! consecutive pair must be joined by a Type A move, and the interior heights
//! must lie strictly below the peak.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::domains_geometry::height;
use crate::error::{invalid, Error, Result};
use crate::factor_systems::{FactorAut, FactorSystem, GWord};
use crate::presentation::{eval_generator_word, GeneratorWord, Letter};
use crate::splittings::{
    apply_outer, star_path, DomainKey, LabelledVertex, PureAut, ShapeCatalog, ShapeInstance,
};
use crate::whitehead_moves::{
    lift, outer_equal, random_domain, random_factor_elem, solve_type_a, type_a_moves, MultiMove,
    Part,
};

/// The case of a peak, after the check for a shared operating factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeakCase {
    SameFactor,
    OneA,
    OneB,
    TwoA,
    TwoB,
    /// The mirror image of case 2; reduced by swapping the two moves.
    Three,
    Four,
}

impl PeakCase {
    pub const ALL: [PeakCase; 7] = [
        PeakCase::SameFactor,
        PeakCase::OneA,
        PeakCase::OneB,
        PeakCase::TwoA,
        PeakCase::TwoB,
        PeakCase::Three,
        PeakCase::Four,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PeakCase::SameFactor => "same-factor",
            PeakCase::OneA => "1a",
            PeakCase::OneB => "1b",
            PeakCase::TwoA => "2a",
            PeakCase::TwoB => "2b",
            PeakCase::Three => "3",
            PeakCase::Four => "4",
        }
    }

    pub fn from_name(s: &str) -> Option<PeakCase> {
        PeakCase::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for PeakCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A path α₁ ← α₂ → α₃ given by two moves based at the top domain α₂.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Peak {
    pub top: DomainKey,
    /// (A, x) with α₁ = α₂·(A, x).
    pub inbound: MultiMove,
    /// (B, y) with α₃ = α₂·(B, y).
    pub outbound: MultiMove,
    pub left: DomainKey,
    pub right: DomainKey,
    /// Heights of α₁, α₂ and α₃.
    pub heights: [usize; 3],
}

impl Peak {
    pub fn new(fs: &FactorSystem, inbound: MultiMove, outbound: MultiMove) -> Result<Self> {
        if inbound.base != outbound.base {
            return Err(Error::BaseMismatch);
        }
        let top = inbound.base.clone();
        let left = inbound.apply(fs);
        let right = outbound.apply(fs);
        let heights = [height(fs, &left)?, height(fs, &top)?, height(fs, &right)?];
        Ok(Peak {
            top,
            inbound,
            outbound,
            left,
            right,
            heights,
        })
    }

    /// Builds the peak through `top` from its two neighbours, using the
    /// smallest-support moves found by the solver.
    pub fn through(
        fs: &FactorSystem,
        left: &DomainKey,
        top: &DomainKey,
        right: &DomainKey,
    ) -> Result<Self> {
        let inbound = first_move(fs, top, left)?;
        let outbound = first_move(fs, top, right)?;
        Peak::new(fs, inbound, outbound)
    }

    /// ‖α₂‖ ≥ max(‖α₁‖, ‖α₃‖) and ‖α₂‖ > min(‖α₁‖, ‖α₃‖).
    pub fn is_peak(&self) -> bool {
        let [l, t, r] = self.heights;
        t >= l.max(r) && t > l.min(r)
    }

    fn mirrored(&self) -> Peak {
        Peak {
            top: self.top.clone(),
            inbound: self.outbound.clone(),
            outbound: self.inbound.clone(),
            left: self.right.clone(),
            right: self.left.clone(),
            heights: [self.heights[2], self.heights[1], self.heights[0]],
        }
    }
}

fn first_move(fs: &FactorSystem, from: &DomainKey, to: &DomainKey) -> Result<MultiMove> {
    type_a_moves(fs, from, to)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("domains are not joined by a Type A edge".into()))
}

/// What happened at one step of a reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// A vertex repeated consecutively was merged.
    Repeat,
    /// A path going out and straight back along one edge was cancelled.
    Backtrack,
    /// A peak was replaced by a lower detour.
    Peak(PeakCase),
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepKind::Repeat => f.write_str("repeat"),
            StepKind::Backtrack => f.write_str("backtrack"),
            StepKind::Peak(c) => write!(f, "peak-{c}"),
        }
    }
}

/// One rewrite inside a path or loop reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub kind: StepKind,
    /// Index of the rewritten vertex in the path before the step.
    pub position: usize,
    /// Heights along the whole path after the step.
    pub heights: Vec<usize>,
}

/// Record of a reduction: the original path, the replacement and the steps
/// in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub original: Vec<DomainKey>,
    pub replacement: Vec<DomainKey>,
    pub steps: Vec<TraceStep>,
    pub heights_before: Vec<usize>,
    pub heights_after: Vec<usize>,
}

impl ReductionTrace {
    pub fn cases(&self) -> Vec<StepKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }
}

/// Decides the case of a peak. The peak inequality is not required.
pub fn classify_case(fs: &FactorSystem, p: &Peak) -> Result<PeakCase> {
    if p.inbound.base != p.top || p.outbound.base != p.top {
        return Err(Error::BaseMismatch);
    }
    let _ = fs;
    let (a, b) = (&p.inbound, &p.outbound);
    if a.op == b.op || a.is_trivial() || b.is_trivial() {
        return Ok(PeakCase::SameFactor);
    }
    let (ahat, bhat) = (a.hat(), b.hat());
    let i_in_b = bhat.contains(&a.op);
    let j_in_a = ahat.contains(&b.op);
    Ok(match (i_in_b, j_in_a) {
        (false, false) => {
            if ahat.is_disjoint(&bhat) {
                PeakCase::OneA
            } else {
                PeakCase::OneB
            }
        }
        (true, false) => {
            if ahat.is_subset(&block_of(b, a.op)) {
                PeakCase::TwoA
            } else {
                PeakCase::TwoB
            }
        }
        (false, true) => PeakCase::Three,
        (true, true) => PeakCase::Four,
    })
}

/// Leaves of the non-trivial block of `m` containing `k`.
fn block_of(m: &MultiMove, k: usize) -> BTreeSet<usize> {
    m.parts
        .iter()
        .filter(|p| !p.x.is_identity())
        .find(|p| p.leaves.contains(&k))
        .map(|p| p.leaves.clone())
        .unwrap_or_default()
}

/// The element of the non-trivial block of `m` containing `k`.
fn elem_of(m: &MultiMove, k: usize) -> GWord {
    m.parts
        .iter()
        .find(|p| p.leaves.contains(&k))
        .map(|p| p.x.clone())
        .unwrap_or_default()
}

/// Conjugator tuple r_k·g_k in the frame of the peak's top domain.
fn shifted(fs: &FactorSystem, top: &DomainKey, g: impl Fn(usize) -> GWord) -> DomainKey {
    let raw: Vec<GWord> = top
        .conjugators()
        .iter()
        .enumerate()
        .map(|(k, r)| fs.mul(r, &g(k)))
        .collect();
    DomainKey::canonicalize(fs, &raw).expect("one conjugator per factor")
}

fn pick(set: &BTreeSet<usize>, k: usize, w: GWord) -> GWord {
    if set.contains(&k) {
        w
    } else {
        GWord::identity()
    }
}

/// Candidate detours α₁ … α₃ for a peak, before validation. Cases 1b and 4
/// also try the mirrored construction; case 3 uses only the mirrored one.
fn candidates(fs: &FactorSystem, p: &Peak, case: PeakCase) -> Result<Vec<Vec<DomainKey>>> {
    Ok(match case {
        PeakCase::OneB | PeakCase::Four => {
            let mut out = direct(fs, p, case);
            out.extend(mirrored(fs, p, case));
            out
        }
        PeakCase::Three => {
            let sub = classify_case(fs, &p.mirrored())?;
            mirrored(fs, p, sub)
        }
        _ => direct(fs, p, case),
    })
}

/// Detours of the mirrored peak, reversed so that they run from α₁ to α₃.
fn mirrored(fs: &FactorSystem, p: &Peak, case: PeakCase) -> Vec<Vec<DomainKey>> {
    let mut found = direct(fs, &p.mirrored(), case);
    for path in &mut found {
        path.reverse();
    }
    found
}

fn direct(fs: &FactorSystem, p: &Peak, case: PeakCase) -> Vec<Vec<DomainKey>> {
    let (a, b) = (&p.inbound, &p.outbound);
    let top = &p.top;
    let (ahat, bhat) = (a.hat(), b.hat());
    let x = |k: usize| elem_of(a, k);
    let y = |k: usize| elem_of(b, k);
    let ends = |mid: Vec<DomainKey>| {
        let mut path = vec![p.left.clone()];
        path.extend(mid);
        path.push(p.right.clone());
        path
    };
    match case {
        PeakCase::SameFactor => {
            if p.left == p.right {
                vec![vec![p.left.clone()]]
            } else {
                vec![vec![p.left.clone(), p.right.clone()]]
            }
        }
        PeakCase::OneA => {
            let a4 = shifted(fs, top, |k| fs.mul(&pick(&ahat, k, x(k)), &pick(&bhat, k, y(k))));
            vec![ends(vec![a4])]
        }
        PeakCase::OneB => {
            let outside: BTreeSet<usize> = ahat.difference(&bhat).copied().collect();
            let a4 = shifted(fs, top, |k| pick(&outside, k, x(k)));
            let a5 = shifted(fs, top, |k| {
                fs.mul(&pick(&outside, k, x(k)), &pick(&bhat, k, y(k)))
            });
            vec![ends(vec![a4, a5])]
        }
        PeakCase::TwoA => {
            let yq = y(a.op);
            let a4 = shifted(fs, top, |k| {
                if ahat.contains(&k) {
                    fs.mul(&x(k), &yq)
                } else {
                    pick(&bhat, k, y(k))
                }
            });
            vec![ends(vec![a4])]
        }
        PeakCase::TwoB => {
            let yq = y(a.op);
            let bq = block_of(b, a.op);
            let inside: BTreeSet<usize> = ahat.intersection(&bq).copied().collect();
            let a4 = shifted(fs, top, |k| pick(&inside, k, x(k)));
            let a5 = shifted(fs, top, |k| {
                if inside.contains(&k) {
                    fs.mul(&x(k), &yq)
                } else {
                    pick(&bhat, k, y(k))
                }
            });
            let a4b = shifted(fs, top, |k| {
                if ahat.contains(&k) {
                    fs.mul(&x(k), &yq)
                } else if bq.contains(&k) {
                    yq.clone()
                } else {
                    pick(&bhat, k, y(k))
                }
            });
            let a5b = shifted(fs, top, |k| {
                if ahat.contains(&k) || bq.contains(&k) {
                    yq.clone()
                } else {
                    pick(&bhat, k, y(k))
                }
            });
            vec![ends(vec![a4, a5]), ends(vec![a4b, a5b])]
        }
        PeakCase::Three => Vec::new(),
        PeakCase::Four => {
            let xp = x(b.op);
            let xp_inv = fs.inv(&xp);
            let yq = y(a.op);
            let ap = block_of(a, b.op);
            let c: BTreeSet<usize> = block_of(b, a.op)
                .into_iter()
                .filter(|k| !ap.contains(k) && *k != a.op)
                .collect();
            let z = |k: usize| fs.mul(&x(k), &xp_inv);
            let a4 = shifted(fs, top, |k| pick(&c, k, z(k)));
            let a5 = shifted(fs, top, |k| {
                if c.contains(&k) {
                    fs.mul(&z(k), &yq)
                } else {
                    pick(&bhat, k, y(k))
                }
            });
            vec![ends(vec![a4, a5])]
        }
    }
}

/// A validated detour: the vertices and the move along each edge.
#[derive(Clone, Debug)]
struct Detour {
    vertices: Vec<DomainKey>,
    heights: Vec<usize>,
}

impl Detour {
    fn interior_max(&self) -> usize {
        let n = self.heights.len();
        if n <= 2 {
            0
        } else {
            self.heights[1..n - 1].iter().copied().max().unwrap_or(0)
        }
    }
}

fn validate_detour(fs: &FactorSystem, p: &Peak, path: Vec<DomainKey>) -> Result<Option<Detour>> {
    let mut vertices: Vec<DomainKey> = Vec::with_capacity(path.len());
    for v in path {
        if vertices.last() != Some(&v) {
            vertices.push(v);
        }
    }
    if vertices.first() != Some(&p.left) || vertices.last() != Some(&p.right) {
        return Err(Error::Internal("peak rewrite changed its endpoints".into()));
    }
    for w in vertices.windows(2) {
        if type_a_moves(fs, &w[0], &w[1]).is_empty() {
            return Ok(None);
        }
    }
    let mut heights = Vec::with_capacity(vertices.len());
    for v in &vertices {
        heights.push(height(fs, v)?);
    }
    let d = Detour { vertices, heights };
    if d.vertices.len() > 2 && d.interior_max() >= p.heights[1] {
        return Ok(None);
    }
    Ok(Some(d))
}

/// Replaces a peak by a path with the same endpoints whose interior lies
/// strictly below the top. Among valid detours the one with the lowest
/// interior maximum is returned, earlier candidates winning ties.
pub fn reduce_peak(fs: &FactorSystem, p: &Peak) -> Result<ReductionTrace> {
    if !p.is_peak() {
        return Err(Error::Precondition(format!(
            "heights {:?} do not form a peak",
            p.heights
        )));
    }
    let case = classify_case(fs, p)?;
    let mut best: Option<Detour> = None;
    for path in candidates(fs, p, case)? {
        if let Some(d) = validate_detour(fs, p, path)? {
            if best.as_ref().is_none_or(|b| d.interior_max() < b.interior_max()) {
                best = Some(d);
            }
        }
    }
    let d = best.ok_or_else(|| {
        Error::Internal(format!("case {case} peak with heights {:?} was not reduced", p.heights))
    })?;
    Ok(ReductionTrace {
        original: vec![p.left.clone(), p.top.clone(), p.right.clone()],
        replacement: d.vertices,
        steps: vec![TraceStep {
            kind: StepKind::Peak(case),
            position: 1,
            heights: d.heights.clone(),
        }],
        heights_before: p.heights.to_vec(),
        heights_after: d.heights,
    })
}

/// Heights sorted in decreasing order; reductions must decrease this
/// sequence lexicographically.
pub fn height_profile(heights: &[usize]) -> Vec<usize> {
    let mut h = heights.to_vec();
    h.sort_unstable_by(|a, b| b.cmp(a));
    h
}

fn heights_of(fs: &FactorSystem, path: &[DomainKey]) -> Result<Vec<usize>> {
    path.iter().map(|v| height(fs, v)).collect()
}

/// Peak-reduces a path with fixed endpoints until no interior vertex is a
/// peak. Repeated vertices and backtracks are removed along the way.
pub fn reduce_path(fs: &FactorSystem, path: &[DomainKey]) -> Result<ReductionTrace> {
    if path.is_empty() {
        return invalid("empty path");
    }
    for w in path.windows(2) {
        if w[0] != w[1] && type_a_moves(fs, &w[0], &w[1]).is_empty() {
            return Err(Error::Precondition(
                "path contains an edge that is not of Type A".into(),
            ));
        }
    }
    let mut cur = path.to_vec();
    let mut h = heights_of(fs, &cur)?;
    let heights_before = h.clone();
    let mut steps = Vec::new();
    loop {
        let before = height_profile(&h);
        let Some((kind, position)) = rewrite_once(fs, &mut cur, &mut h)? else {
            break;
        };
        if height_profile(&h) >= before {
            return Err(Error::Internal(format!(
                "{kind} rewrite at position {position} did not lower the height profile"
            )));
        }
        steps.push(TraceStep {
            kind,
            position,
            heights: h.clone(),
        });
    }
    Ok(ReductionTrace {
        original: path.to_vec(),
        replacement: cur,
        steps,
        heights_before,
        heights_after: h,
    })
}

/// Applies the first available rewrite: a repeat, then a backtrack, then the
/// highest peak.
fn rewrite_once(
    fs: &FactorSystem,
    cur: &mut Vec<DomainKey>,
    h: &mut Vec<usize>,
) -> Result<Option<(StepKind, usize)>> {
    if let Some(k) = (1..cur.len()).find(|&k| cur[k] == cur[k - 1]) {
        cur.remove(k);
        h.remove(k);
        return Ok(Some((StepKind::Repeat, k)));
    }
    if let Some(k) = (1..cur.len().saturating_sub(1)).find(|&k| cur[k - 1] == cur[k + 1]) {
        cur.drain(k..k + 2);
        h.drain(k..k + 2);
        return Ok(Some((StepKind::Backtrack, k)));
    }
    let mut top: Option<usize> = None;
    for k in 1..cur.len().saturating_sub(1) {
        let (l, t, r) = (h[k - 1], h[k], h[k + 1]);
        if t >= l.max(r) && t > l.min(r) && top.is_none_or(|b| t > h[b]) {
            top = Some(k);
        }
    }
    let Some(k) = top else {
        return Ok(None);
    };
    let peak = Peak::through(fs, &cur[k - 1], &cur[k], &cur[k + 1])?;
    let trace = reduce_peak(fs, &peak)?;
    let StepKind::Peak(case) = trace.steps[0].kind else {
        unreachable!("peak reductions record a peak step");
    };
    let interior = &trace.replacement[1..trace.replacement.len().saturating_sub(1)];
    let mut hi = trace.heights_after[1..trace.heights_after.len().saturating_sub(1)].to_vec();
    if trace.replacement.len() == 1 {
        // The detour is the constant path at α₁ = α₃.
        cur.drain(k..k + 2);
        h.drain(k..k + 2);
    } else {
        cur.splice(k..k + 1, interior.iter().cloned());
        h.splice(k..k + 1, hi.drain(..));
    }
    Ok(Some((StepKind::Peak(case), k)))
}

/// Vertices visited by a chain of moves, each based at the previous target.
pub fn path_of_moves(fs: &FactorSystem, moves: &[MultiMove]) -> Result<Vec<DomainKey>> {
    let Some(first) = moves.first() else {
        return Ok(Vec::new());
    };
    let mut out = vec![first.base.clone()];
    for m in moves {
        if out.last() != Some(&m.base) {
            return Err(Error::BaseMismatch);
        }
        out.push(m.apply(fs));
    }
    Ok(out)
}

/// Moves along a path of domains, solved edge by edge.
pub fn moves_along(fs: &FactorSystem, path: &[DomainKey]) -> Result<Vec<MultiMove>> {
    path.windows(2).map(|w| first_move(fs, &w[0], &w[1])).collect()
}

/// Translates a domain by an outer automorphism acting on the right.
pub fn translate(fs: &FactorSystem, key: &DomainKey, by: &PureAut) -> DomainKey {
    key.to_aut(fs).then(fs, by).domain(fs)
}

/// Result of reducing a closed loop.
#[derive(Clone, Debug)]
pub struct LoopReduction {
    /// The loop translated so that its start is the base domain.
    pub trace: ReductionTrace,
    /// The automorphism used for that translation.
    pub translation: PureAut,
}

impl LoopReduction {
    pub fn is_constant(&self) -> bool {
        self.trace.replacement.len() == 1
    }
}

/// Reduces a closed loop of Type A moves to the constant loop. The loop is
/// first translated so that it starts at the base domain, which is the unique
/// domain of height zero.
pub fn reduce_loop(fs: &FactorSystem, moves: &[MultiMove]) -> Result<LoopReduction> {
    let path = path_of_moves(fs, moves)?;
    if path.first() != path.last() {
        return invalid("loop does not close");
    }
    if path.is_empty() {
        return invalid("empty loop");
    }
    let translation = path[0].to_aut(fs).inverse(fs)?;
    let moved: Vec<DomainKey> = path.iter().map(|v| translate(fs, v, &translation)).collect();
    if !moved[0].is_base() {
        return Err(Error::Internal("translation did not reach the base domain".into()));
    }
    let trace = reduce_path(fs, &moved)?;
    if trace.replacement.len() != 1 {
        return Err(Error::Internal(format!(
            "loop stopped at {} vertices with heights {:?}",
            trace.replacement.len(),
            trace.heights_after
        )));
    }
    Ok(LoopReduction { trace, translation })
}

/// Moves from the base domain to `key` along a path whose heights never
/// decrease. The path is obtained by reversing the star reduction of the
/// conjugators of `key` and peak-reducing it with fixed endpoints.
pub fn factorize_domain(fs: &FactorSystem, key: &DomainKey) -> Result<Vec<MultiMove>> {
    if key.n() != fs.n() {
        return invalid("domain key does not match the factor system");
    }
    let raw = star_path(fs, key.conjugators())?;
    let mut path: Vec<DomainKey> = raw
        .iter()
        .rev()
        .map(|c| DomainKey::canonicalize(fs, c))
        .collect::<Result<_>>()?;
    if !path[0].is_base() {
        return Err(Error::NotADomain("star reduction did not reach the base domain".into()));
    }
    path.dedup();
    let trace = reduce_path(fs, &path)?;
    let out = trace.replacement;
    if out.last() != Some(key) {
        return Err(Error::Internal("factorization lost its endpoint".into()));
    }
    if trace.heights_after.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Internal(format!(
            "factorization is not height monotone: {:?}",
            trace.heights_after
        )));
    }
    moves_along(fs, &out)
}

/// A word in the presentation generators whose evaluation is outer-equal to
/// `psi`: the Whitehead letters of a factorization of its domain, followed by
/// one factor automorphism.
pub fn rewrite_in_generators(fs: &FactorSystem, psi: &PureAut) -> Result<GeneratorWord> {
    let key = psi.domain(fs);
    let moves = factorize_domain(fs, &key)?;
    // Walk the path with raw conjugators in one frame. A step multiplies the
    // moved entries by r_i⁻¹·u·r_i with u ∈ G_i, which is the automorphism
    // conjugating those factors by u applied before everything so far.
    let mut raw: Vec<GWord> = vec![GWord::identity(); fs.n()];
    let mut blocks: Vec<Vec<Letter>> = Vec::with_capacity(moves.len());
    for m in &moves {
        let (canon, g) = DomainKey::canonicalize_framed(fs, &raw)?;
        if canon != m.base {
            return Err(Error::Internal("factorization moves do not chain".into()));
        }
        let g_inv = fs.inv(&g);
        let op = m.op;
        let r_op = raw[op].clone();
        let mut letters = Vec::new();
        for part in &m.parts {
            let shift = fs.mul_all([&g, &part.x, &g_inv]);
            let u = fs
                .mul_all([&r_op, &shift, &fs.inv(&r_op)])
                .as_factor_elem(op)
                .ok_or_else(|| Error::Internal("move element left its factor".into()))?;
            for &a in &part.leaves {
                raw[a] = fs.mul(&raw[a], &shift);
                letters.push(Letter::f(op, a, fs.factor(op).inv(u)));
            }
        }
        blocks.push(letters);
    }
    let chi: Vec<Letter> = blocks.into_iter().rev().flatten().collect();
    let chi_aut = eval_generator_word(fs, &chi)?;
    let target = psi.canonical(fs);
    if chi_aut.conj != target.conj {
        return Err(Error::Internal("factorization reached a different domain".into()));
    }
    // psi = φ·χ with φ = φ_psi·φ_chi⁻¹; moving φ past each letter f_{i_j}(g)
    // turns it into f_{i_j}(φ_i⁻¹(g)).
    let phi: Vec<FactorAut> = (0..fs.n())
        .map(|k| {
            let g = fs.factor(k);
            target.phis[k].then(g, &chi_aut.phis[k].inverse(g))
        })
        .collect();
    let mut word: GeneratorWord = chi
        .into_iter()
        .map(|l| match l {
            Letter::F { i, j, g } => Letter::F {
                i,
                j,
                g: phi[i].inverse(fs.factor(i)).apply(fs.factor(i), g),
            },
            other => other,
        })
        .collect();
    if phi.iter().any(|p| !p.is_identity()) {
        word.push(Letter::Phi(phi));
    }
    let check = eval_generator_word(fs, &word)?;
    if !outer_equal(fs, &check, psi) {
        return Err(Error::Internal("rewritten word is not outer-equal to the input".into()));
    }
    Ok(word)
}

/// A move at `base` with operating factor `op` whose blocks are chosen by
/// assigning every other factor to no block or to one of `max_blocks` blocks.
fn random_shaped_move<R: Rng>(
    fs: &FactorSystem,
    rng: &mut R,
    base: &DomainKey,
    op: usize,
    max_blocks: usize,
) -> MultiMove {
    let mut parts: Vec<Part> = Vec::new();
    let elems: Vec<GWord> = (0..max_blocks)
        .map(|_| lift(fs, base, op, random_factor_elem(fs, rng, op)))
        .collect();
    for k in (0..fs.n()).filter(|&k| k != op) {
        let slot = rng.gen_range(0..=max_blocks);
        if slot == 0 {
            continue;
        }
        let x = &elems[slot - 1];
        match parts.iter_mut().find(|p| &p.x == x) {
            Some(p) => {
                p.leaves.insert(k);
            }
            None => parts.push(Part::new([k], x.clone())),
        }
    }
    MultiMove {
        base: base.clone(),
        op,
        parts,
    }
}

/// Samples a peak of the requested case by rejection. Odd attempts climb
/// twice from a random domain and descend along both climbs; even attempts
/// climb once and take a random second move. Returns `None` after
/// `attempts` failures.
pub fn random_peak<R: Rng>(
    fs: &FactorSystem,
    rng: &mut R,
    case: PeakCase,
    depth: usize,
    attempts: usize,
) -> Result<Option<Peak>> {
    let n = fs.n();
    for attempt in 0..attempts {
        let steps = rng.gen_range(0..depth.max(1));
        let low = random_domain(fs, rng, steps);
        let i = rng.gen_range(0..n);
        let j = if case == PeakCase::SameFactor {
            i
        } else {
            (i + rng.gen_range(1..n)) % n
        };
        let first = random_shaped_move(fs, rng, &low, i, 2);
        if first.is_trivial() {
            continue;
        }
        let p = if attempt % 2 == 1 {
            let Some(p) = double_climb(fs, rng, &first, j)? else {
                continue;
            };
            p
        } else {
            let a = first.inverse(fs);
            let b = random_shaped_move(fs, rng, &a.base, j, 2);
            if b.is_trivial() {
                continue;
            }
            Peak::new(fs, a, b)?
        };
        if p.is_peak() && classify_case(fs, &p)? == case {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Climbs by `first` and then by a random move with operating factor `op`,
/// and returns the peak formed by undoing each climb at the top.
fn double_climb<R: Rng>(
    fs: &FactorSystem,
    rng: &mut R,
    first: &MultiMove,
    op: usize,
) -> Result<Option<Peak>> {
    let mid_raw = first.raw_target(fs);
    let (mid, g) = DomainKey::canonicalize_framed(fs, &mid_raw)?;
    let second = random_shaped_move(fs, rng, &mid, op, 2);
    if second.is_trivial() || second.hat().contains(&first.op) {
        return Ok(None);
    }
    let g_inv = fs.inv(&g);
    let mut top_raw = mid_raw;
    for part in &second.parts {
        let y = fs.mul_all([&g, &part.x, &g_inv]);
        for &b in &part.leaves {
            top_raw[b] = fs.mul(&top_raw[b], &y);
        }
    }
    let top = DomainKey::canonicalize(fs, &top_raw)?;
    let mut undo_raw = top_raw;
    for part in &first.parts {
        let x_inv = fs.inv(&part.x);
        for &a in &part.leaves {
            undo_raw[a] = fs.mul(&undo_raw[a], &x_inv);
        }
    }
    let right = DomainKey::canonicalize(fs, &undo_raw)?;
    let Some(outbound) = solve_type_a(fs, &top, &right, first.op) else {
        return Ok(None);
    };
    let inbound = second.inverse(fs);
    if inbound.base != top {
        return Err(Error::Internal("climb frames disagree".into()));
    }
    Ok(Some(Peak::new(fs, inbound, outbound)?))
}

/// A random closed loop of Type A moves with at most `max_len` edges, moved
/// to a random start by a random automorphism. Even draws walk out at random
/// and return along a factorization. Odd draws go round a random peak and
/// back along its reduction.
pub fn random_loop<R: Rng>(fs: &FactorSystem, rng: &mut R, max_len: usize) -> Result<Vec<MultiMove>> {
    loop {
        let path = if rng.gen_bool(0.5) {
            walk_and_return(fs, rng)?
        } else {
            let case = PeakCase::ALL[rng.gen_range(0..PeakCase::ALL.len())];
            let Some(p) = random_peak(fs, rng, case, 4, 200)? else {
                continue;
            };
            let trace = reduce_peak(fs, &p)?;
            let mut path = trace.original.clone();
            path.extend(trace.replacement.iter().rev().skip(1).cloned());
            path
        };
        if path.len() < 2 || path.len() - 1 > max_len {
            continue;
        }
        let shift = random_outer(fs, rng, 3);
        let moved: Vec<DomainKey> = path.iter().map(|v| translate(fs, v, &shift)).collect();
        return moves_along(fs, &moved);
    }
}

fn walk_and_return<R: Rng>(fs: &FactorSystem, rng: &mut R) -> Result<Vec<DomainKey>> {
    let steps = rng.gen_range(1..=3);
    let mut path = vec![DomainKey::base(fs.n())];
    for _ in 0..steps {
        let op = rng.gen_range(0..fs.n());
        let m = random_shaped_move(fs, rng, path.last().expect("non-empty"), op, 2);
        path.push(m.apply(fs));
    }
    let back = factorize_domain(fs, path.last().expect("non-empty"))?;
    let mut back_path = path_of_moves(fs, &back)?;
    back_path.reverse();
    path.extend(back_path.into_iter().skip(1));
    Ok(path)
}

/// A random product of up to `max_letters` Whitehead letters f_{i_j}(g).
pub fn random_generator_word<R: Rng>(fs: &FactorSystem, rng: &mut R, max_letters: usize) -> GeneratorWord {
    let n = fs.n();
    let len = rng.gen_range(0..=max_letters);
    (0..len)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            Letter::f(i, j, random_factor_elem(fs, rng, i))
        })
        .collect()
}

fn random_outer<R: Rng>(fs: &FactorSystem, rng: &mut R, max_letters: usize) -> PureAut {
    let w = random_generator_word(fs, rng, max_letters);
    eval_generator_word(fs, &w).expect("generated letters are valid")
}

/// A vertex of the fundamental domain whose translate into the first domain
/// lies in every listed domain. Such a vertex spans a cell of the space of
/// domains on the list.
pub fn common_vertex(
    fs: &FactorSystem,
    catalog: &ShapeCatalog,
    domains: &[DomainKey],
) -> Result<Option<ShapeInstance>> {
    let Some(first) = domains.first() else {
        return invalid("no domains given");
    };
    let into_first = first.to_aut(fs);
    let back: Vec<PureAut> = domains
        .iter()
        .map(|d| d.to_aut(fs).inverse(fs))
        .collect::<Result<_>>()?;
    for inst in catalog.shapes() {
        let base = LabelledVertex::base(catalog, inst)?;
        let v = apply_outer(fs, &base, &into_first);
        let mut shared = true;
        for inv in &back {
            if !apply_outer(fs, &v, inv).equivalent(&base, fs)? {
                shared = false;
                break;
            }
        }
        if shared {
            return Ok(Some(inst.clone()));
        }
    }
    Ok(None)
}

/// Checks the contractibility witnesses of a peak. A same-factor peak needs a
/// vertex shared by its three domains. A case 1a peak is tiled by the lattice
/// of single-leaf moves, and every square of the lattice needs a shared vertex.
/// Other cases are rejected.
pub fn check_witnesses(fs: &FactorSystem, catalog: &ShapeCatalog, p: &Peak) -> Result<bool> {
    match classify_case(fs, p)? {
        PeakCase::SameFactor => {
            let three = [p.left.clone(), p.top.clone(), p.right.clone()];
            Ok(common_vertex(fs, catalog, &three)?.is_some())
        }
        PeakCase::OneA => {
            let (a, b) = (&p.inbound, &p.outbound);
            let rows: Vec<usize> = a.hat().into_iter().collect();
            let cols: Vec<usize> = b.hat().into_iter().collect();
            let grid = |s: usize, t: usize| {
                shifted(fs, &p.top, |k| {
                    if rows[..s].contains(&k) {
                        elem_of(a, k)
                    } else if cols[..t].contains(&k) {
                        elem_of(b, k)
                    } else {
                        GWord::identity()
                    }
                })
            };
            for s in 0..rows.len() {
                for t in 0..cols.len() {
                    let square = [grid(s, t), grid(s + 1, t), grid(s, t + 1), grid(s + 1, t + 1)];
                    if common_vertex(fs, catalog, &square)?.is_none() {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        other => Err(Error::Precondition(format!(
            "no witness check for case {other} peaks"
        ))),
    }
}
