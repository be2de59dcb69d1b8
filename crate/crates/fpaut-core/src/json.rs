//! JSON documents for factor systems, words, domains, moves and automorphisms.
//!
//! Factor indices, leaf indices and shape indices are 1-based in every document.
//! Element ids are table positions for table groups, residues for Z/m and
//! exponents for Z. Factor automorphisms are written as generator images.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::factor_systems::{Elem, FactorAut, FactorGroup, FactorSystem, GWord, Syllable};
use crate::presentation::{GeneratorWord, Letter};
use crate::splittings::{DomainKey, LabelledVertex, PureAut, Shape, ShapeInstance};
use crate::whitehead_moves::{MultiMove, Part};

fn schema(e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("schema: {e}"))
}

fn decode<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(schema)
}

fn encode<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("documents serialize to JSON")
}

fn zero_based(i: usize, what: &str) -> Result<usize> {
    i.checked_sub(1)
        .ok_or_else(|| schema(format!("{what} indices start at 1")))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FactorDoc {
    Cyclic { order: u32 },
    Table { elements: Vec<String>, table: Vec<Vec<u32>> },
    Z,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorSystemDoc {
    n: usize,
    factors: Vec<FactorDoc>,
}

pub fn factor_system_from_json(v: &Value) -> Result<FactorSystem> {
    let doc: FactorSystemDoc = decode(v)?;
    if doc.n != doc.factors.len() {
        return Err(schema(format!(
            "n = {} but {} factors listed",
            doc.n,
            doc.factors.len()
        )));
    }
    let factors = doc
        .factors
        .into_iter()
        .map(|f| match f {
            FactorDoc::Cyclic { order } => FactorGroup::cyclic(order),
            FactorDoc::Table { elements, table } => FactorGroup::from_table(elements, table),
            FactorDoc::Z => Ok(FactorGroup::integers()),
        })
        .collect::<Result<Vec<_>>>()?;
    FactorSystem::new(factors)
}

pub fn factor_system_to_json(fs: &FactorSystem) -> Value {
    let factors = fs
        .factors()
        .iter()
        .map(|g| match g {
            FactorGroup::Cyclic { order } => FactorDoc::Cyclic { order: *order },
            FactorGroup::Table { names, table, .. } => FactorDoc::Table {
                elements: names.clone(),
                table: table.clone(),
            },
            FactorGroup::Integers => FactorDoc::Z,
        })
        .collect();
    encode(&FactorSystemDoc { n: fs.n(), factors })
}

type GWordDoc = Vec<(usize, Elem)>;

fn gword_doc(w: &GWord) -> GWordDoc {
    w.syllables().iter().map(|&(k, e)| (k + 1, e)).collect()
}

fn gword_model(fs: &FactorSystem, doc: &GWordDoc) -> Result<GWord> {
    let raw: Vec<Syllable> = doc
        .iter()
        .map(|&(k, e)| Ok((zero_based(k, "factor")?, e)))
        .collect::<Result<_>>()?;
    fs.normalize(&raw)
}

pub fn gword_to_json(w: &GWord) -> Value {
    encode(&gword_doc(w))
}

pub fn gword_from_json(fs: &FactorSystem, v: &Value) -> Result<GWord> {
    gword_model(fs, &decode(v)?)
}

fn conjugators_model(fs: &FactorSystem, docs: &[GWordDoc]) -> Result<Vec<GWord>> {
    if docs.len() != fs.n() {
        return Err(schema(format!(
            "expected {} conjugators, got {}",
            fs.n(),
            docs.len()
        )));
    }
    docs.iter().map(|d| gword_model(fs, d)).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeDoc {
    shape: String,
    #[serde(default)]
    indices: Vec<usize>,
}

fn shape_doc(s: &ShapeInstance) -> ShapeDoc {
    ShapeDoc {
        shape: s.shape.name().to_string(),
        indices: s.indices.iter().map(|i| i + 1).collect(),
    }
}

fn shape_model(n: usize, doc: &ShapeDoc) -> Result<ShapeInstance> {
    let shape =
        Shape::from_name(&doc.shape).ok_or_else(|| schema(format!("unknown shape {}", doc.shape)))?;
    if doc.indices.len() != shape.arity() {
        return Err(schema(format!(
            "shape {} takes {} indices",
            shape.name(),
            shape.arity()
        )));
    }
    let indices = doc
        .indices
        .iter()
        .map(|&i| {
            let k = zero_based(i, "shape")?;
            if k >= n {
                return Err(Error::FactorIndex(k));
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeInstance::new(shape, indices))
}

pub fn shape_to_json(s: &ShapeInstance) -> Value {
    encode(&shape_doc(s))
}

pub fn shape_from_json(n: usize, v: &Value) -> Result<ShapeInstance> {
    shape_model(n, &decode(v)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<ShapeDoc>,
    conjugators: Vec<GWordDoc>,
}

pub fn vertex_to_json(v: &LabelledVertex) -> Value {
    encode(&VertexDoc {
        shape: Some(shape_doc(&v.shape)),
        conjugators: v.conjugators.iter().map(gword_doc).collect(),
    })
}

pub fn vertex_from_json(fs: &FactorSystem, v: &Value) -> Result<LabelledVertex> {
    let doc: VertexDoc = decode(v)?;
    let shape = match &doc.shape {
        Some(s) => shape_model(fs.n(), s)?,
        None => return Err(schema("labelled vertex needs a shape")),
    };
    Ok(LabelledVertex {
        shape,
        conjugators: conjugators_model(fs, &doc.conjugators)?,
    })
}

fn key_doc(key: &DomainKey) -> VertexDoc {
    VertexDoc {
        shape: Some(shape_doc(&ShapeInstance::alpha())),
        conjugators: key.conjugators().iter().map(gword_doc).collect(),
    }
}

/// Canonical key of the document's labelling, and the frame change g from the
/// document's conjugators to the key (y in the document frame is g⁻¹yg in the key frame).
fn key_model(fs: &FactorSystem, doc: &VertexDoc) -> Result<(DomainKey, GWord)> {
    if let Some(s) = &doc.shape {
        if shape_model(fs.n(), s)?.shape != Shape::Alpha {
            return Err(schema("a domain key is an alpha-shaped labelling"));
        }
    }
    DomainKey::canonicalize_framed(fs, &conjugators_model(fs, &doc.conjugators)?)
}

pub fn domain_key_to_json(key: &DomainKey) -> Value {
    encode(&key_doc(key))
}

pub fn domain_key_from_json(fs: &FactorSystem, v: &Value) -> Result<DomainKey> {
    Ok(key_model(fs, &decode(v)?)?.0)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PureAutDoc {
    phis: Vec<Vec<Elem>>,
    conjugators: Vec<GWordDoc>,
}

fn phis_model(fs: &FactorSystem, docs: &[Vec<Elem>]) -> Result<Vec<FactorAut>> {
    if docs.len() != fs.n() {
        return Err(schema(format!(
            "expected {} factor automorphisms, got {}",
            fs.n(),
            docs.len()
        )));
    }
    docs.iter()
        .zip(fs.factors())
        .map(|(imgs, g)| FactorAut::from_generator_images(g, imgs))
        .collect()
}

fn phis_doc(fs: &FactorSystem, phis: &[FactorAut]) -> Vec<Vec<Elem>> {
    phis.iter()
        .zip(fs.factors())
        .map(|(p, g)| p.generator_images(g))
        .collect()
}

pub fn pure_aut_to_json(fs: &FactorSystem, psi: &PureAut) -> Value {
    encode(&PureAutDoc {
        phis: phis_doc(fs, &psi.phis),
        conjugators: psi.conj.iter().map(gword_doc).collect(),
    })
}

pub fn pure_aut_from_json(fs: &FactorSystem, v: &Value) -> Result<PureAut> {
    let doc: PureAutDoc = decode(v)?;
    PureAut::new(
        fs,
        phis_model(fs, &doc.phis)?,
        conjugators_model(fs, &doc.conjugators)?,
    )
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartDoc {
    leaves: Vec<usize>,
    x: GWordDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveDoc {
    base: VertexDoc,
    op_factor: usize,
    parts: Vec<PartDoc>,
}

pub fn move_to_json(m: &MultiMove) -> Value {
    encode(&MoveDoc {
        base: key_doc(&m.base),
        op_factor: m.op + 1,
        parts: m
            .parts
            .iter()
            .map(|p| PartDoc {
                leaves: p.leaves.iter().map(|a| a + 1).collect(),
                x: gword_doc(&p.x),
            })
            .collect(),
    })
}

/// Reads a move. Elements are written relative to the document's base
/// conjugators and are carried over to the canonical key of that base.
pub fn move_from_json(fs: &FactorSystem, v: &Value) -> Result<MultiMove> {
    let doc: MoveDoc = decode(v)?;
    let (base, g) = key_model(fs, &doc.base)?;
    let op = zero_based(doc.op_factor, "factor")?;
    let parts = doc
        .parts
        .iter()
        .map(|p| {
            let leaves = p
                .leaves
                .iter()
                .map(|&a| zero_based(a, "leaf"))
                .collect::<Result<Vec<_>>>()?;
            Ok(Part::new(leaves, gword_model(fs, &p.x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = MultiMove {
        base: base.clone(),
        op,
        parts,
    };
    let m = raw.transport(fs, base.clone(), &g);
    MultiMove::new(fs, base, m.op, m.parts)
}

pub fn moves_to_json(moves: &[MultiMove]) -> Value {
    Value::Array(moves.iter().map(move_to_json).collect())
}

pub fn moves_from_json(fs: &FactorSystem, v: &Value) -> Result<Vec<MultiMove>> {
    let items = v
        .as_array()
        .ok_or_else(|| schema("a move sequence is a JSON array"))?;
    items.iter().map(|m| move_from_json(fs, m)).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum LetterDoc {
    F((usize, usize, Elem)),
    Phi(Vec<Vec<Elem>>),
}

pub fn word_to_json(fs: &FactorSystem, w: &[Letter]) -> Value {
    let docs: Vec<LetterDoc> = w
        .iter()
        .map(|l| match l {
            Letter::F { i, j, g } => LetterDoc::F((i + 1, j + 1, *g)),
            Letter::Phi(phis) => LetterDoc::Phi(phis_doc(fs, phis)),
        })
        .collect();
    encode(&docs)
}

pub fn word_from_json(fs: &FactorSystem, v: &Value) -> Result<GeneratorWord> {
    let docs: Vec<LetterDoc> = decode(v)?;
    docs.iter()
        .map(|d| {
            let letter = match d {
                LetterDoc::F((i, j, g)) => {
                    Letter::f(zero_based(*i, "factor")?, zero_based(*j, "factor")?, *g)
                }
                LetterDoc::Phi(imgs) => Letter::Phi(phis_model(fs, imgs)?),
            };
            letter.validate(fs)?;
            Ok(letter)
        })
        .collect()
}
