//! Deterministic token and phrase embeddings, the summed flat-triple
//! embedding, and cosine similarity.

use std::collections::HashMap;
use std::fs;
use std::ops::{Add, AddAssign};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::format::FlatTriple;
use crate::hash::{fnv1a64, SplitMix64};

pub const DEFAULT_DIM: usize = 64;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot embed an empty token")]
    EmptyToken,
    #[error("token `{0}` is not in the basis vocabulary")]
    UnknownToken(String),
    #[error("vector file line {line}: {message}")]
    BadVectorFile { line: usize, message: String },
    #[error("reading vector file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn from_components(c: Vec<f64>) -> Self {
        Vector(c)
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == 0.0)
    }

    /// Unit vector in the same direction; the zero vector stays zero.
    pub fn normalized(&self) -> Vector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Vector(self.0.iter().map(|x| x / n).collect())
    }

    pub fn scaled(&self, k: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * k).collect())
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

/// Cosine similarity clamped to [-1, 1]; 0 when either side is zero.
pub fn cosine(u: &Vector, v: &Vector) -> f64 {
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (u.dot(v) / denom).clamp(-1.0, 1.0)
}

/// Splits a label on camelCase boundaries, underscores, hyphens and
/// whitespace, lowercasing every token.
pub fn tokenize(label: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = label.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' || c.is_whitespace() {
            flush(&mut current, &mut tokens);
            continue;
        }
        if c.is_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower);
            if boundary {
                flush(&mut current, &mut tokens);
            }
        }
        current.extend(c.to_lowercase());
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

/// Maps tokens to unit vectors of a fixed dimension.
pub trait TokenEmbedder {
    fn dim(&self) -> usize;

    fn embed_token(&self, token: &str) -> Result<Vector, EmbedError>;
}

/// Seeded hash embedder: FNV-1a of the token xor the seed starts a
/// SplitMix64 stream whose outputs fill the components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub seed: u64,
    pub dim: usize,
}

impl HashEmbedder {
    pub fn new(seed: u64, dim: usize) -> Self {
        HashEmbedder { seed, dim }
    }

    fn raw(&self, token: &str) -> Vector {
        let mut rng = SplitMix64::new(fnv1a64(token.as_bytes()) ^ self.seed);
        Vector((0..self.dim).map(|_| rng.next_signed_unit()).collect())
    }
}

impl TokenEmbedder for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_token(&self, token: &str) -> Result<Vector, EmbedError> {
        if token.is_empty() {
            return Err(EmbedError::EmptyToken);
        }
        Ok(self.raw(token).normalized())
    }
}

/// Word vectors loaded from a text file (`[count dim]` header, then
/// `token c1 … cd` per line). Misses fall back to a hash embedder.
#[derive(Debug)]
pub struct FileEmbedder {
    vectors: HashMap<String, Vector>,
    dim: usize,
    fallback: HashEmbedder,
    misses: AtomicU64,
}

impl FileEmbedder {
    pub fn load(path: &Path, fallback_seed: u64) -> Result<Self, EmbedError> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text, fallback_seed)
    }

    pub fn from_text(text: &str, fallback_seed: u64) -> Result<Self, EmbedError> {
        let bad = |line: usize, message: String| EmbedError::BadVectorFile { line, message };
        let mut vectors = HashMap::new();
        let mut dim: Option<usize> = None;
        let mut declared_count: Option<usize> = None;

        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if i == 0 && fields.len() == 2 {
                if let (Ok(n), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    declared_count = Some(n);
                    dim = Some(d);
                    continue;
                }
            }
            let (token, comps) = fields.split_first().expect("non-empty");
            let comps = comps
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| bad(lineno, format!("bad number `{c}`"))))
                .collect::<Result<Vec<f64>, _>>()?;
            if comps.iter().any(|c| !c.is_finite()) {
                return Err(bad(lineno, "non-finite component".into()));
            }
            match dim {
                None if comps.is_empty() => return Err(bad(lineno, "vector has no components".into())),
                None => dim = Some(comps.len()),
                Some(d) if d != comps.len() => {
                    return Err(bad(lineno, format!("expected {d} components, found {}", comps.len())))
                }
                Some(_) => {}
            }
            if vectors.insert(token.to_string(), Vector(comps).normalized()).is_some() {
                return Err(bad(lineno, format!("duplicate token `{token}`")));
            }
        }

        let dim = dim.ok_or_else(|| bad(1, "no vectors found".into()))?;
        if let Some(n) = declared_count {
            if n != vectors.len() {
                return Err(bad(1, format!("header declares {n} vectors, found {}", vectors.len())));
            }
        }
        Ok(FileEmbedder { vectors, dim, fallback: HashEmbedder::new(fallback_seed, dim), misses: AtomicU64::new(0) })
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vectors.len()
    }

    /// Number of lookups served by the hash fallback so far.
    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}

impl TokenEmbedder for FileEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_token(&self, token: &str) -> Result<Vector, EmbedError> {
        if token.is_empty() {
            return Err(EmbedError::EmptyToken);
        }
        match self.vectors.get(token) {
            Some(v) => Ok(v.clone()),
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                self.fallback.embed_token(token)
            }
        }
    }
}

/// Assigns the i-th standard basis vector to the i-th vocabulary token, so
/// distinct tokens are exactly orthonormal.
#[derive(Debug, Clone)]
pub struct BasisEmbedder {
    index: HashMap<String, usize>,
}

impl BasisEmbedder {
    pub fn new<I, S>(vocabulary: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut index = HashMap::new();
        for tok in vocabulary {
            let n = index.len();
            index.entry(tok.into()).or_insert(n);
        }
        BasisEmbedder { index }
    }
}

impl TokenEmbedder for BasisEmbedder {
    fn dim(&self) -> usize {
        self.index.len().max(1)
    }

    fn embed_token(&self, token: &str) -> Result<Vector, EmbedError> {
        if token.is_empty() {
            return Err(EmbedError::EmptyToken);
        }
        let i = *self.index.get(token).ok_or_else(|| EmbedError::UnknownToken(token.to_string()))?;
        let mut v = vec![0.0; self.dim()];
        v[i] = 1.0;
        Ok(Vector(v))
    }
}

/// Normalized sum of the label's token vectors; zero for an empty label.
pub fn embed_phrase(p: &dyn TokenEmbedder, label: &str) -> Result<Vector, EmbedError> {
    let mut acc = Vector::zeros(p.dim());
    for tok in tokenize(label) {
        acc += &p.embed_token(&tok)?;
    }
    Ok(acc.normalized())
}

/// Normalized sum of the phrase vectors of e1, r and e2.
pub fn embed_flat_triple(p: &dyn TokenEmbedder, t: &FlatTriple) -> Result<Vector, EmbedError> {
    let mut acc = embed_phrase(p, &t.e1)?;
    acc += &embed_phrase(p, &t.r)?;
    acc += &embed_phrase(p, &t.e2)?;
    Ok(acc.normalized())
}
