// SPDX-License-Identifier: Apache-2.0

//! Clifford gate-sets generated by breadth-first closure over pulse generators.
//!
//! Elements are deduplicated by their transfer matrix, which is blind to global
//! phase, and each element keeps the first (hence shortest) generator word that
//! reached it. Noisy gate-sets replay these words with perturbed generators.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::channel::{unitary_to_superop, SuperOp, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::noise::{cz_hamiltonian, embed_operator, pulse, replay_word};

/// Transfer-matrix entries rounded to six decimals, column-major.
pub type Key = Box<[i32]>;

pub fn canonical_key(op: &SuperOp) -> Key {
    // `round` maps -0.0 and 0.0 to the same integer
    op.matrix().iter().map(|x| (x * 1e6).round() as i32).collect()
}

/// What a generator does physically; used to build its noisy counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// `P(σ_x, π/2)` on `qubit`.
    X { qubit: usize },
    /// `P(σ_y, π/2)` on `qubit`.
    Y { qubit: usize },
    /// `P(σ_z¹σ_z² − σ_z¹ − σ_z², π/2)`.
    Cz,
    Custom,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub label: String,
    pub kind: GeneratorKind,
    pub unitary: UnitaryMatrix,
    pub op: SuperOp,
}

impl Generator {
    pub fn new(label: impl Into<String>, kind: GeneratorKind, unitary: UnitaryMatrix) -> Result<Self> {
        let op = unitary_to_superop(&unitary)?;
        Ok(Self { label: label.into(), kind, unitary, op })
    }
}

/// `G_x = P(σ_x, π/2)`, `G_y = P(σ_y, π/2)` on each qubit, plus CZ for two qubits.
pub fn standard_generators(dim: usize) -> Result<Vec<Generator>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let p = crate::channel::paulis();
    match dim {
        2 => Ok(vec![
            Generator::new("Gx", GeneratorKind::X { qubit: 0 }, pulse(&p[1], half_pi)?)?,
            Generator::new("Gy", GeneratorKind::Y { qubit: 0 }, pulse(&p[2], half_pi)?)?,
        ]),
        4 => {
            let mut out = Vec::with_capacity(5);
            for q in 0..2 {
                out.push(Generator::new(
                    format!("Gx{}", q + 1),
                    GeneratorKind::X { qubit: q },
                    pulse(&embed_operator(&p[1], q), half_pi)?,
                )?);
                out.push(Generator::new(
                    format!("Gy{}", q + 1),
                    GeneratorKind::Y { qubit: q },
                    pulse(&embed_operator(&p[2], q), half_pi)?,
                )?);
            }
            out.push(Generator::new("CZ", GeneratorKind::Cz, pulse(&cz_hamiltonian(), half_pi)?)?);
            Ok(out)
        }
        d => Err(Error::Dimension(d)),
    }
}

/// Known group order (modulo phases).
pub fn expected_order(dim: usize) -> Option<usize> {
    match dim {
        2 => Some(24),
        4 => Some(11520),
        _ => None,
    }
}

fn closure_cap(dim: usize) -> usize {
    match dim {
        2 => 25,
        _ => 12000,
    }
}

#[derive(Clone, Debug)]
pub struct CliffordElement {
    pub index: usize,
    pub op: SuperOp,
    /// Generator indices in the order they are applied.
    pub word: Vec<usize>,
    pub key: Key,
}

#[derive(Clone, Debug)]
pub struct CliffordGroup {
    dim: usize,
    generators: Vec<Generator>,
    elements: Vec<CliffordElement>,
    inverse_table: Vec<usize>,
    lookup: HashMap<Key, usize>,
}

impl CliffordGroup {
    /// Closure of `generators` under left multiplication, starting from the identity.
    pub fn generate(dim: usize, generators: Vec<Generator>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension(dim));
        }
        if generators.iter().any(|g| g.op.dim() != dim) {
            return Err(Error::Shape("generator dimension differs from group dimension".into()));
        }
        let cap = closure_cap(dim);
        let identity = SuperOp::identity(dim);
        let mut lookup = HashMap::new();
        let mut elements = Vec::new();
        let mut queue = VecDeque::new();

        let key = canonical_key(&identity);
        lookup.insert(key.clone(), 0);
        elements.push(CliffordElement { index: 0, op: identity, word: Vec::new(), key });
        queue.push_back(0);

        while let Some(i) = queue.pop_front() {
            for (gi, g) in generators.iter().enumerate() {
                let op = g.op.compose(&elements[i].op);
                let key = canonical_key(&op);
                if lookup.contains_key(&key) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(Error::ClosureCap { cap });
                }
                let index = elements.len();
                let mut word = elements[i].word.clone();
                word.push(gi);
                lookup.insert(key.clone(), index);
                elements.push(CliffordElement { index, op, word, key });
                queue.push_back(index);
            }
        }
        Self::finish(dim, generators, elements, lookup)
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::generate(dim, standard_generators(dim)?)
    }

    fn finish(
        dim: usize,
        generators: Vec<Generator>,
        elements: Vec<CliffordElement>,
        lookup: HashMap<Key, usize>,
    ) -> Result<Self> {
        let inverse_table = elements
            .iter()
            .map(|e| {
                lookup
                    .get(&canonical_key(&e.op.transpose()))
                    .copied()
                    .ok_or(Error::MissingElement)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, generators, elements, inverse_table, lookup })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn op(&self, index: usize) -> &SuperOp {
        &self.elements[index].op
    }

    pub fn inverse(&self, index: usize) -> usize {
        self.inverse_table[index]
    }

    /// Index of the element whose transfer matrix matches `op`.
    pub fn lookup(&self, op: &SuperOp) -> Option<usize> {
        self.lookup.get(&canonical_key(op)).copied()
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.elements.len())
    }

    /// Ideal generator transfer matrices, index-aligned with `generators()`.
    pub fn generator_ops(&self) -> Vec<SuperOp> {
        self.generators.iter().map(|g| g.op.clone()).collect()
    }

    /// SHA-256 over the generator unitaries, used to key on-disk caches.
    pub fn content_hash(dim: usize, generators: &[Generator]) -> String {
        let mut h = Sha256::new();
        h.update((dim as u64).to_le_bytes());
        for g in generators {
            h.update(g.label.as_bytes());
            for z in g.unitary.matrix().iter() {
                // 1e-12 quantization keeps the hash stable under exp round-off
                h.update(((z.re * 1e12).round() as i64).to_le_bytes());
                h.update(((z.im * 1e12).round() as i64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Write the generator words to a text cache.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "# clifford group cache v1");
        let _ = writeln!(s, "hash {}", Self::content_hash(self.dim, &self.generators));
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "count {}", self.elements.len());
        for e in &self.elements {
            if e.word.is_empty() {
                s.push('-');
            } else {
                let w: Vec<String> = e.word.iter().map(|g| g.to_string()).collect();
                s.push_str(&w.join(" "));
            }
            s.push('\n');
        }
        fs::write(path, s)?;
        Ok(())
    }

    /// Rebuild a group from a cache written by [`save_cache`](Self::save_cache).
    /// Fails if the cache was produced from different generators.
    pub fn load_cache(path: &Path, dim: usize, generators: Vec<Generator>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Cache(format!("missing {name}")))?;
            line.strip_prefix(name)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Cache(format!("expected `{name}`, found `{line}`")))
        };
        let hash = field("hash")?;
        if hash != Self::content_hash(dim, &generators) {
            return Err(Error::Cache("generator hash mismatch".into()));
        }
        let cached_dim: usize = field("dim")?.parse().map_err(|_| Error::Cache("bad dim".into()))?;
        if cached_dim != dim {
            return Err(Error::Cache(format!("cache is for dimension {cached_dim}")));
        }
        let count: usize = field("count")?.parse().map_err(|_| Error::Cache("bad count".into()))?;
        let ops: Vec<SuperOp> = generators.iter().map(|g| g.op.clone()).collect();
        let mut elements = Vec::with_capacity(count);
        let mut lookup = HashMap::with_capacity(count);
        for (index, line) in lines.enumerate() {
            let word = if line.trim() == "-" {
                Vec::new()
            } else {
                line.split_whitespace()
                    .map(|t| match t.parse::<usize>() {
                        Ok(g) if g < ops.len() => Ok(g),
                        _ => Err(Error::Cache(format!("bad generator `{t}` on element {index}"))),
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let op = replay_word(&word, &ops, dim);
            let key = canonical_key(&op);
            if lookup.insert(key.clone(), index).is_some() {
                return Err(Error::Cache(format!("duplicate element {index}")));
            }
            elements.push(CliffordElement { index, op, word, key });
        }
        if elements.len() != count {
            return Err(Error::Cache(format!("expected {count} elements, read {}", elements.len())));
        }
        Self::finish(dim, generators, elements, lookup)
    }

    /// Load from `path` when it holds a matching cache, otherwise generate and write it.
    pub fn standard_cached(dim: usize, path: &Path) -> Result<Self> {
        if path.exists() {
            if let Ok(g) = Self::load_cache(path, dim, standard_generators(dim)?) {
                return Ok(g);
            }
        }
        let g = Self::standard(dim)?;
        g.save_cache(path)?;
        Ok(g)
    }
}
