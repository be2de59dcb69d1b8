//! Factor groups, the free product G = G_1 * ... * G_n and its reduced words.
//!
//! Factor indices are 0-based here; the JSON layer shifts them to 1-based.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{invalid, Error, Result};

/// Element of a factor group. Finite groups use their table position,
/// the infinite cyclic group uses the exponent.
pub type Elem = i64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorGroup {
    Cyclic {
        order: u32,
    },
    Table {
        names: Vec<String>,
        table: Vec<Vec<u32>>,
        inverses: Vec<u32>,
        generators: Vec<u32>,
    },
    Integers,
}

impl FactorGroup {
    pub fn cyclic(order: u32) -> Result<Self> {
        if order < 2 {
            return invalid(format!("cyclic factor of order {order} is trivial"));
        }
        Ok(FactorGroup::Cyclic { order })
    }

    pub fn integers() -> Self {
        FactorGroup::Integers
    }

    /// Builds a finite group from a Cayley table whose row/column 0 is the identity.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<u32>>) -> Result<Self> {
        let n = table.len();
        if n < 2 {
            return invalid("table group must be non-trivial");
        }
        if names.len() != n {
            return invalid("table group: names and table sizes differ");
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&v| v as usize >= n) {
                return invalid("table group: table must be square with entries in range");
            }
        }
        for a in 0..n {
            if table[0][a] as usize != a || table[a][0] as usize != a {
                return invalid("table group: element 0 must be the identity");
            }
        }
        let mut inverses = vec![u32::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if table[a][b] == 0 {
                    if inverses[a] != u32::MAX {
                        return invalid("table group: inverse not unique");
                    }
                    inverses[a] = b as u32;
                }
            }
            if inverses[a] == u32::MAX {
                return invalid(format!("table group: element {a} has no inverse"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b] as usize;
                for c in 0..n {
                    let bc = table[b][c] as usize;
                    if table[ab][c] != table[a][bc] {
                        return invalid(format!("table group: ({a}{b}){c} != {a}({b}{c})"));
                    }
                }
            }
        }
        let generators = greedy_generators(&table);
        Ok(FactorGroup::Table {
            names,
            table,
            inverses,
            generators,
        })
    }

    /// The symmetric group on three letters, as a Cayley table.
    pub fn s3() -> Self {
        // Permutations of {0,1,2} as image lists, identity first.
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap() as u32;
        let table = (0..6)
            .map(|a| {
                (0..6)
                    .map(|b| {
                        // (a*b)(x) = a(b(x)).
                        let p = [
                            perms[a][perms[b][0]],
                            perms[a][perms[b][1]],
                            perms[a][perms[b][2]],
                        ];
                        idx(p)
                    })
                    .collect()
            })
            .collect();
        let names = ["e", "(01)", "(12)", "(02)", "(012)", "(021)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        FactorGroup::from_table(names, table).expect("S3 table is a group")
    }

    pub fn order(&self) -> Option<u64> {
        match self {
            FactorGroup::Cyclic { order } => Some(*order as u64),
            FactorGroup::Table { table, .. } => Some(table.len() as u64),
            FactorGroup::Integers => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    pub fn contains(&self, e: Elem) -> bool {
        match self.order() {
            Some(m) => e >= 0 && (e as u64) < m,
            None => true,
        }
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match self {
            FactorGroup::Cyclic { order } => (a + b) % *order as i64,
            FactorGroup::Table { table, .. } => table[a as usize][b as usize] as Elem,
            FactorGroup::Integers => a
                .checked_add(b)
                .expect("infinite cyclic factor: exponent overflow"),
        }
    }

    pub fn inv(&self, a: Elem) -> Elem {
        match self {
            FactorGroup::Cyclic { order } => (*order as i64 - a) % *order as i64,
            FactorGroup::Table { inverses, .. } => inverses[a as usize] as Elem,
            FactorGroup::Integers => a.checked_neg().expect("infinite cyclic factor: overflow"),
        }
    }

    /// Position in the fixed total order on elements.
    pub fn rank(&self, e: Elem) -> u64 {
        match self {
            FactorGroup::Integers => {
                if e > 0 {
                    2 * e as u64 - 1
                } else {
                    2 * e.unsigned_abs()
                }
            }
            _ => e as u64,
        }
    }

    pub fn elements(&self) -> Option<Vec<Elem>> {
        self.order().map(|m| (0..m as Elem).collect())
    }

    pub fn generators(&self) -> Vec<Elem> {
        match self {
            FactorGroup::Cyclic { .. } | FactorGroup::Integers => vec![1],
            FactorGroup::Table { generators, .. } => generators.iter().map(|&g| g as Elem).collect(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            FactorGroup::Table { table, .. } => {
                (0..table.len()).all(|a| (0..table.len()).all(|b| table[a][b] == table[b][a]))
            }
            _ => true,
        }
    }

    /// Centre of a finite factor; for Z this is all of Z, reported as the generator.
    pub fn centre(&self) -> Vec<Elem> {
        match self.elements() {
            Some(all) => all
                .iter()
                .copied()
                .filter(|&z| all.iter().all(|&x| self.mul(z, x) == self.mul(x, z)))
                .collect(),
            None => vec![0, 1],
        }
    }

    pub fn elem_name(&self, e: Elem) -> String {
        match self {
            FactorGroup::Table { names, .. } => names[e as usize].clone(),
            _ => e.to_string(),
        }
    }

    /// Small sample of elements: all elements when finite, exponents -2..=2 otherwise.
    pub fn sample_elements(&self) -> Vec<Elem> {
        self.elements().unwrap_or_else(|| vec![0, 1, -1, 2, -2])
    }
}

fn greedy_generators(table: &[Vec<u32>]) -> Vec<u32> {
    let n = table.len();
    let mut gens = Vec::new();
    let mut span = vec![false; n];
    span[0] = true;
    for cand in 1..n {
        if span[cand] {
            continue;
        }
        gens.push(cand as u32);
        // Closure under right multiplication by the generators.
        let mut stack: Vec<usize> = (0..n).filter(|&x| span[x]).collect();
        while let Some(x) = stack.pop() {
            for &g in &gens {
                let y = table[x][g as usize] as usize;
                if !span[y] {
                    span[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    gens
}

/// One syllable (factor index, non-identity element).
pub type Syllable = (usize, Elem);

/// Reduced word of G. Adjacent syllables lie in distinct factors and no syllable is trivial.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GWord(pub(crate) Vec<Syllable>);

impl GWord {
    pub fn identity() -> Self {
        GWord(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Syllable> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Syllable> {
        self.0.last().copied()
    }

    /// Single-syllable word; `e` must be a valid non-identity element.
    pub fn letter(k: usize, e: Elem) -> Self {
        if e == 0 {
            GWord::identity()
        } else {
            GWord(vec![(k, e)])
        }
    }

    /// The element if the word lies in the factor `k`.
    pub fn as_factor_elem(&self, k: usize) -> Option<Elem> {
        match self.0.as_slice() {
            [] => Some(0),
            [(f, e)] if *f == k => Some(*e),
            _ => None,
        }
    }
}

impl fmt::Display for GWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(k, e)| format!("g{}^{}", k + 1, e)).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSystem {
    factors: Vec<FactorGroup>,
}

impl FactorSystem {
    pub fn new(factors: Vec<FactorGroup>) -> Result<Self> {
        if factors.len() < 3 {
            return invalid(format!("need at least 3 factors, got {}", factors.len()));
        }
        Ok(FactorSystem { factors })
    }

    pub fn cyclic(orders: &[u32]) -> Result<Self> {
        FactorSystem::new(
            orders
                .iter()
                .map(|&m| FactorGroup::cyclic(m))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, k: usize) -> &FactorGroup {
        &self.factors[k]
    }

    pub fn factors(&self) -> &[FactorGroup] {
        &self.factors
    }

    /// All factors finite.
    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|g| g.is_finite())
    }

    pub fn check_syllable(&self, k: usize, e: Elem) -> Result<()> {
        if k >= self.n() {
            return Err(Error::FactorIndex(k));
        }
        if !self.factors[k].contains(e) {
            return Err(Error::Element { factor: k, elem: e });
        }
        Ok(())
    }

    /// Normal form of an arbitrary syllable sequence.
    pub fn normalize(&self, raw: &[Syllable]) -> Result<GWord> {
        let mut out = Vec::with_capacity(raw.len());
        for &(k, e) in raw {
            self.check_syllable(k, e)?;
            self.push(&mut out, k, e);
        }
        Ok(GWord(out))
    }

    /// Checks the reduced-word invariants without changing the word.
    pub fn validate(&self, w: &GWord) -> Result<()> {
        for (idx, &(k, e)) in w.0.iter().enumerate() {
            self.check_syllable(k, e)?;
            if e == 0 {
                return invalid("word contains an identity syllable");
            }
            if idx > 0 && w.0[idx - 1].0 == k {
                return invalid("word has adjacent syllables in one factor");
            }
        }
        Ok(())
    }

    fn push(&self, out: &mut Vec<Syllable>, k: usize, e: Elem) {
        if e == 0 {
            return;
        }
        if let Some(last) = out.last_mut() {
            if last.0 == k {
                let m = self.factors[k].mul(last.1, e);
                if m == 0 {
                    out.pop();
                } else {
                    last.1 = m;
                }
                return;
            }
        }
        out.push((k, e));
    }

    pub fn mul(&self, u: &GWord, v: &GWord) -> GWord {
        let mut out = u.0.clone();
        for &(k, e) in &v.0 {
            self.push(&mut out, k, e);
        }
        GWord(out)
    }

    pub fn mul_all<'a>(&self, words: impl IntoIterator<Item = &'a GWord>) -> GWord {
        let mut out = Vec::new();
        for w in words {
            for &(k, e) in &w.0 {
                self.push(&mut out, k, e);
            }
        }
        GWord(out)
    }

    pub fn inv(&self, u: &GWord) -> GWord {
        GWord(
            u.0.iter()
                .rev()
                .map(|&(k, e)| (k, self.factors[k].inv(e)))
                .collect(),
        )
    }

    /// g^{-1} x g
    pub fn conj(&self, x: &GWord, g: &GWord) -> GWord {
        self.mul_all([&self.inv(g), x, g])
    }

    pub fn pow(&self, u: &GWord, p: i64) -> GWord {
        let base = if p < 0 { self.inv(u) } else { u.clone() };
        let mut out = GWord::identity();
        for _ in 0..p.unsigned_abs() {
            out = self.mul(&out, &base);
        }
        out
    }

    pub fn syllable_length(&self, u: &GWord) -> usize {
        u.0.len()
    }

    /// Right coset representative for G_k·u: drop a leading G_k syllable.
    pub fn strip_leading(&self, k: usize, u: &GWord) -> GWord {
        match u.0.first() {
            Some(&(f, _)) if f == k => GWord(u.0[1..].to_vec()),
            _ => u.clone(),
        }
    }

    /// Splits u = s·rest with s the leading G_k syllable (or 1).
    pub fn split_leading(&self, k: usize, u: &GWord) -> (Elem, GWord) {
        match u.0.first() {
            Some(&(f, e)) if f == k => (e, GWord(u.0[1..].to_vec())),
            _ => (0, u.clone()),
        }
    }

    /// Splits u = rest·t with t the trailing G_k syllable (or 1).
    pub fn split_trailing(&self, k: usize, u: &GWord) -> (GWord, Elem) {
        match u.0.last() {
            Some(&(f, e)) if f == k => (GWord(u.0[..u.0.len() - 1].to_vec()), e),
            _ => (u.clone(), 0),
        }
    }

    /// Double coset decomposition u = s·core·t with s ∈ G_left, t ∈ G_right and
    /// `core` the unique representative of G_left·u·G_right (left != right).
    pub fn double_coset(&self, left: usize, right: usize, u: &GWord) -> (Elem, GWord, Elem) {
        let (s, rest) = self.split_leading(left, u);
        let (core, t) = self.split_trailing(right, &rest);
        (s, core, t)
    }

    /// Total order on words: syllable length, then syllable-wise (factor, element rank).
    pub fn cmp_words(&self, u: &GWord, v: &GWord) -> Ordering {
        u.0.len().cmp(&v.0.len()).then_with(|| {
            for (a, b) in u.0.iter().zip(v.0.iter()) {
                let c = a.0.cmp(&b.0).then_with(|| {
                    self.factors[a.0]
                        .rank(a.1)
                        .cmp(&self.factors[b.0].rank(b.1))
                });
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }

    pub fn cmp_tuples(&self, a: &[GWord], b: &[GWord]) -> Ordering {
        for (u, v) in a.iter().zip(b.iter()) {
            let c = self.cmp_words(u, v);
            if c != Ordering::Equal {
                return c;
            }
        }
        a.len().cmp(&b.len())
    }

    /// Whether `x` lies in g^{-1} G_k g.
    pub fn in_conjugate(&self, k: usize, g: &GWord, x: &GWord) -> bool {
        let y = self.mul_all([g, x, &self.inv(g)]);
        y.as_factor_elem(k).is_some()
    }
}

/// Automorphism of a single factor group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FactorAut {
    /// x ↦ u·x in Z/m, with u a unit.
    Unit(i64),
    /// Permutation of the elements of a table group.
    Perm(Vec<u32>),
    /// x ↦ ±x in Z.
    Sign(bool),
}

impl FactorAut {
    pub fn identity(g: &FactorGroup) -> Self {
        match g {
            FactorGroup::Cyclic { .. } => FactorAut::Unit(1),
            FactorGroup::Table { table, .. } => FactorAut::Perm((0..table.len() as u32).collect()),
            FactorGroup::Integers => FactorAut::Sign(false),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            FactorAut::Unit(u) => *u == 1,
            FactorAut::Perm(p) => p.iter().enumerate().all(|(i, &v)| i as u32 == v),
            FactorAut::Sign(neg) => !neg,
        }
    }

    pub fn apply(&self, g: &FactorGroup, e: Elem) -> Elem {
        match (self, g) {
            (FactorAut::Unit(u), FactorGroup::Cyclic { order }) => (u * e).rem_euclid(*order as i64),
            (FactorAut::Perm(p), FactorGroup::Table { .. }) => p[e as usize] as Elem,
            (FactorAut::Sign(neg), FactorGroup::Integers) => {
                if *neg {
                    g.inv(e)
                } else {
                    e
                }
            }
            _ => panic!("factor automorphism applied to a group of another kind"),
        }
    }

    /// `self` first, then `then`.
    pub fn then(&self, g: &FactorGroup, then: &FactorAut) -> FactorAut {
        match (self, then) {
            (FactorAut::Unit(a), FactorAut::Unit(b)) => match g {
                FactorGroup::Cyclic { order } => FactorAut::Unit((a * b).rem_euclid(*order as i64)),
                _ => unreachable!(),
            },
            (FactorAut::Perm(p), FactorAut::Perm(q)) => {
                FactorAut::Perm(p.iter().map(|&x| q[x as usize]).collect())
            }
            (FactorAut::Sign(a), FactorAut::Sign(b)) => FactorAut::Sign(a ^ b),
            _ => panic!("composing factor automorphisms of different kinds"),
        }
    }

    pub fn inverse(&self, g: &FactorGroup) -> FactorAut {
        match self {
            FactorAut::Unit(u) => {
                let m = match g {
                    FactorGroup::Cyclic { order } => *order as i64,
                    _ => unreachable!(),
                };
                let inv = (1..m).find(|v| (u * v).rem_euclid(m) == 1).expect("unit");
                FactorAut::Unit(inv)
            }
            FactorAut::Perm(p) => {
                let mut q = vec![0u32; p.len()];
                for (i, &v) in p.iter().enumerate() {
                    q[v as usize] = i as u32;
                }
                FactorAut::Perm(q)
            }
            FactorAut::Sign(neg) => FactorAut::Sign(*neg),
        }
    }

    /// Checks that the data describes an automorphism of `g`.
    pub fn validate(&self, g: &FactorGroup) -> Result<()> {
        match (self, g) {
            (FactorAut::Unit(u), FactorGroup::Cyclic { order }) => {
                let m = *order as i64;
                if *u < 1 || *u >= m || gcd(*u, m) != 1 {
                    return invalid(format!("{u} is not a unit modulo {m}"));
                }
                Ok(())
            }
            (FactorAut::Perm(p), FactorGroup::Table { table, .. }) => {
                let n = table.len();
                let mut seen = vec![false; n];
                if p.len() != n {
                    return invalid("permutation has the wrong length");
                }
                for &v in p {
                    if v as usize >= n || seen[v as usize] {
                        return invalid("factor automorphism is not a bijection");
                    }
                    seen[v as usize] = true;
                }
                for a in 0..n {
                    for b in 0..n {
                        if p[table[a][b] as usize] != table[p[a] as usize][p[b] as usize] {
                            return invalid("factor automorphism is not a homomorphism");
                        }
                    }
                }
                Ok(())
            }
            (FactorAut::Sign(_), FactorGroup::Integers) => Ok(()),
            _ => invalid("factor automorphism kind does not match the factor"),
        }
    }

    /// Inner automorphism x ↦ s⁻¹ x s of `g`.
    pub fn inner(g: &FactorGroup, s: Elem) -> FactorAut {
        match g {
            FactorGroup::Table { table, .. } => FactorAut::Perm(
                (0..table.len() as Elem)
                    .map(|x| g.mul(g.mul(g.inv(s), x), s) as u32)
                    .collect(),
            ),
            _ => FactorAut::identity(g),
        }
    }

    /// Extends generator images to a full automorphism.
    pub fn from_generator_images(g: &FactorGroup, images: &[Elem]) -> Result<FactorAut> {
        let gens = g.generators();
        if images.len() != gens.len() {
            return invalid(format!(
                "expected {} generator images, got {}",
                gens.len(),
                images.len()
            ));
        }
        if images.iter().any(|&e| !g.contains(e)) {
            return invalid("generator image outside the factor");
        }
        let aut = match g {
            FactorGroup::Cyclic { .. } => FactorAut::Unit(images[0]),
            FactorGroup::Integers => match images[0] {
                1 => FactorAut::Sign(false),
                -1 => FactorAut::Sign(true),
                e => return invalid(format!("{e} does not generate Z")),
            },
            FactorGroup::Table { table, .. } => {
                let n = table.len();
                let mut map: Vec<Option<u32>> = vec![None; n];
                map[0] = Some(0);
                let mut stack = vec![0usize];
                while let Some(x) = stack.pop() {
                    let fx = map[x].unwrap() as Elem;
                    for (gi, &gen) in gens.iter().enumerate() {
                        let y = g.mul(x as Elem, gen) as usize;
                        let fy = g.mul(fx, images[gi]) as u32;
                        match map[y] {
                            Some(v) if v != fy => {
                                return invalid("generator images do not extend to a homomorphism")
                            }
                            Some(_) => {}
                            None => {
                                map[y] = Some(fy);
                                stack.push(y);
                            }
                        }
                    }
                }
                FactorAut::Perm(map.into_iter().map(|v| v.unwrap()).collect())
            }
        };
        aut.validate(g)?;
        Ok(aut)
    }

    /// Generator images, the compact serialized form.
    pub fn generator_images(&self, g: &FactorGroup) -> Vec<Elem> {
        g.generators().iter().map(|&x| self.apply(g, x)).collect()
    }

    /// Every automorphism of `g`, identity first.
    pub fn all(g: &FactorGroup) -> Result<Vec<FactorAut>> {
        match g {
            FactorGroup::Cyclic { order } => {
                let m = *order as i64;
                Ok((1..m).filter(|&u| gcd(u, m) == 1).map(FactorAut::Unit).collect())
            }
            FactorGroup::Integers => Ok(vec![FactorAut::Sign(false), FactorAut::Sign(true)]),
            FactorGroup::Table { table, .. } => {
                let n = table.len();
                if n > 24 {
                    return invalid(format!("table group of order {n} exceeds the limit of 24"));
                }
                let gens = g.generators();
                let mut out = Vec::new();
                let mut images = vec![0 as Elem; gens.len()];
                all_images(g, &gens, 0, &mut images, &mut out);
                out.sort_by_key(|a| !a.is_identity());
                Ok(out)
            }
        }
    }
}

fn all_images(
    g: &FactorGroup,
    gens: &[Elem],
    pos: usize,
    images: &mut Vec<Elem>,
    out: &mut Vec<FactorAut>,
) {
    if pos == gens.len() {
        if let Ok(a) = FactorAut::from_generator_images(g, images) {
            out.push(a);
        }
        return;
    }
    for e in 1..g.order().unwrap() as Elem {
        images[pos] = e;
        all_images(g, gens, pos + 1, images, out);
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2z3() -> FactorSystem {
        FactorSystem::cyclic(&[3, 2, 2]).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let fs = FactorSystem::cyclic(&[2, 2, 2]).unwrap();
        assert_eq!(fs.normalize(&[]).unwrap(), GWord::identity());
        assert_eq!(fs.normalize(&[(0, 1), (0, 1)]).unwrap(), GWord::identity());
        let fs = z2z3();
        let w = fs.normalize(&[(0, 1), (1, 1), (1, 1), (0, 1)]).unwrap();
        assert_eq!(w.syllables(), &[(0, 2)]);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        let fs = z2z3();
        assert!(fs.normalize(&[(3, 1)]).is_err());
        assert!(fs.normalize(&[(0, 5)]).is_err());
    }

    #[test]
    fn mul_and_inverse() {
        let fs = FactorSystem::cyclic(&[2, 3, 2]).unwrap();
        let u = fs.normalize(&[(0, 1), (1, 1)]).unwrap();
        let v = fs.normalize(&[(1, 1), (0, 1)]).unwrap();
        assert_eq!(fs.mul(&u, &v).syllables(), &[(0, 1), (1, 2), (0, 1)]);
        assert_eq!(fs.inv(&u).syllables(), &[(1, 2), (0, 1)]);
        assert!(fs.mul(&u, &fs.inv(&u)).is_identity());
        assert_eq!(fs.syllable_length(&fs.mul(&GWord::letter(0, 1), &GWord::letter(1, 1))), 2);
    }

    #[test]
    fn integer_order() {
        let z = FactorGroup::integers();
        let ranks: Vec<u64> = [0, 1, -1, 2, -2].iter().map(|&e| z.rank(e)).collect();
        assert_eq!(ranks, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn s3_is_nonabelian_with_two_generators() {
        let s3 = FactorGroup::s3();
        assert!(!s3.is_abelian());
        assert_eq!(s3.generators().len(), 2);
        assert_eq!(s3.centre(), vec![0]);
    }

    #[test]
    fn table_rejects_non_group() {
        let t = vec![vec![0, 1], vec![1, 1]];
        assert!(FactorGroup::from_table(vec!["e".into(), "a".into()], t).is_err());
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(FactorAut::all(&FactorGroup::cyclic(5).unwrap()).unwrap().len(), 4);
        assert_eq!(FactorAut::all(&FactorGroup::cyclic(2).unwrap()).unwrap().len(), 1);
        assert_eq!(FactorAut::all(&FactorGroup::integers()).unwrap().len(), 2);
        let s3 = FactorGroup::s3();
        let auts = FactorAut::all(&s3).unwrap();
        assert_eq!(auts.len(), 6);
        assert!(auts[0].is_identity());
        for a in &auts {
            a.validate(&s3).unwrap();
            let back = a.then(&s3, &a.inverse(&s3));
            assert!(back.is_identity());
        }
    }

    #[test]
    fn generator_images_round_trip() {
        let s3 = FactorGroup::s3();
        for a in FactorAut::all(&s3).unwrap() {
            let imgs = a.generator_images(&s3);
            assert_eq!(FactorAut::from_generator_images(&s3, &imgs).unwrap(), a);
        }
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn integer_overflow_is_fatal() {
        let z = FactorGroup::integers();
        z.mul(i64::MAX, 1);
    }
}
