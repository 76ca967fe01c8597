//! The semi-infinite Cayley tree of order `k` and configurations on finite slices.
//!
//! Vertices of `V_n` (levels `1..=n`, root excluded) are stored level by level;
//! inside a level they are ordered lexicographically by path. The vertex with
//! in-level index `i` at level `l` has parent index `i / k` at level `l - 1`
//! and children `i * k + j`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default bound on the number of configurations an enumeration may visit.
pub const ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TreeCounts {
    pub w: u64,
    pub v: u64,
    pub edges: u64,
}

pub fn tree_counts(k: u32, n: u32) -> TreeCounts {
    let k = k as u64;
    let w = k.pow(n);
    let v: u64 = (1..=n).map(|m| k.pow(m)).sum();
    TreeCounts { w, v, edges: v.saturating_sub(k) }
}

/// A vertex given by its path `(i_1, ..., i_l)` with entries in `1..=k`. The empty path is the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub path: Vec<u32>,
}

impl Vertex {
    pub fn root() -> Self {
        Self { path: Vec::new() }
    }

    pub fn new(path: Vec<u32>) -> Self {
        Self { path }
    }

    pub fn level(&self) -> u32 {
        self.path.len() as u32
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.path.is_empty() {
            None
        } else {
            Some(Vertex { path: self.path[..self.path.len() - 1].to_vec() })
        }
    }

    /// Zero-based position inside its level.
    pub fn index_in_level(&self, k: u32) -> u64 {
        self.path.iter().fold(0u64, |acc, &i| acc * k as u64 + (i as u64 - 1))
    }

    pub fn from_index(level: u32, mut index: u64, k: u32) -> Self {
        let mut path = vec![0u32; level as usize];
        for slot in path.iter_mut().rev() {
            *slot = (index % k as u64) as u32 + 1;
            index /= k as u64;
        }
        Self { path }
    }

    /// Parses `"i1.i2.....il"`.
    pub fn parse(s: &str) -> Option<Self> {
        if s.is_empty() {
            return Some(Self::root());
        }
        s.split('.').map(|part| part.parse::<u32>().ok().filter(|&i| i >= 1)).collect::<Option<Vec<_>>>().map(Self::new)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return write!(f, "(0)");
        }
        let parts: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

pub fn direct_successors(x: &Vertex, k: u32) -> Vec<Vertex> {
    (1..=k)
        .map(|i| {
            let mut path = x.path.clone();
            path.push(i);
            Vertex { path }
        })
        .collect()
}

/// Index arithmetic for the finite slice `V_n` of the order-`k` tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slice {
    pub k: u32,
    pub depth: u32,
}

impl Slice {
    pub fn new(k: u32, depth: u32) -> Self {
        assert!(k >= 1 && depth >= 1, "slice needs k >= 1 and depth >= 1");
        Self { k, depth }
    }

    pub fn level_size(&self, level: u32) -> usize {
        (self.k as usize).pow(level)
    }

    /// Global offset of the first vertex of `level` in the level-ordered layout.
    pub fn level_offset(&self, level: u32) -> usize {
        (1..level).map(|m| self.level_size(m)).sum()
    }

    pub fn volume(&self) -> usize {
        self.level_offset(self.depth + 1)
    }

    pub fn boundary_range(&self) -> std::ops::Range<usize> {
        let start = self.level_offset(self.depth);
        start..start + self.level_size(self.depth)
    }

    /// Global index of `(level, i)`.
    pub fn index(&self, level: u32, i: usize) -> usize {
        self.level_offset(level) + i
    }

    /// Global index of a vertex of `V_n`.
    pub fn index_of(&self, x: &Vertex) -> usize {
        self.index(x.level(), x.index_in_level(self.k) as usize)
    }

    pub fn vertex(&self, global: usize) -> Vertex {
        let mut level = 1;
        let mut rest = global;
        while rest >= self.level_size(level) {
            rest -= self.level_size(level);
            level += 1;
        }
        Vertex::from_index(level, rest as u64, self.k)
    }

    /// Edges `(child, parent)` of `L_n` as global indices, children in layout order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for level in 2..=self.depth {
            for i in 0..self.level_size(level) {
                out.push((self.index(level, i), self.index(level - 1, i / self.k as usize)));
            }
        }
        out
    }
}

/// `(q+1)^sites` as an exact integer.
pub fn configuration_count(q: u32, sites: usize) -> BigUint {
    num_traits::pow(BigUint::from(q + 1), sites)
}

/// Fails with the exact count if `(q+1)^sites` exceeds `cap`.
pub fn check_cap(q: u32, sites: usize, cap: u64) -> Result<u64, Error> {
    let count = configuration_count(q, sites);
    match count.to_u64() {
        Some(c) if c <= cap => Ok(c),
        _ => Err(Error::EnumerationTooLarge { count: count.to_string() }),
    }
}

/// A spin assignment on `V_n` in level-ordered layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub depth: u32,
    pub q: u32,
    pub spins: Vec<u32>,
    #[serde(default = "default_k", skip_serializing_if = "is_binary")]
    pub k: u32,
}

fn default_k() -> u32 {
    2
}

fn is_binary(k: &u32) -> bool {
    *k == 2
}

impl Configuration {
    pub fn new(k: u32, depth: u32, q: u32, spins: Vec<u32>) -> Result<Self, Error> {
        let slice = Slice::new(k, depth);
        if spins.len() != slice.volume() || spins.iter().any(|&s| s > q) {
            return Err(Error::InvalidParams(format!("configuration needs {} spins in 0..={q}", slice.volume())));
        }
        Ok(Self { depth, q, spins, k })
    }

    pub fn constant(k: u32, depth: u32, q: u32, spin: u32) -> Self {
        let slice = Slice::new(k, depth);
        Self { depth, q, spins: vec![spin; slice.volume()], k }
    }

    pub fn slice(&self) -> Slice {
        Slice::new(self.k, self.depth)
    }

    pub fn spin(&self, x: &Vertex) -> u32 {
        self.spins[self.slice().index_of(x)]
    }

    /// Spins on `W_n`.
    pub fn boundary(&self) -> &[u32] {
        &self.spins[self.slice().boundary_range()]
    }

    /// `sigma ∨ omega` on `V_{n+1}`.
    pub fn concat(&self, omega: &[u32]) -> Result<Self, Error> {
        let expected = Slice::new(self.k, self.depth + 1).level_size(self.depth + 1);
        if omega.len() != expected {
            return Err(Error::InvalidParams(format!("boundary part needs {expected} spins")));
        }
        let mut spins = self.spins.clone();
        spins.extend_from_slice(omega);
        Ok(Self { depth: self.depth + 1, q: self.q, spins, k: self.k })
    }

    /// Inverse of [`Configuration::concat`]: `(sigma_{n-1}, omega)`.
    pub fn split(&self) -> Option<(Self, Vec<u32>)> {
        if self.depth < 2 {
            return None;
        }
        let start = self.slice().boundary_range().start;
        let head = Self { depth: self.depth - 1, q: self.q, spins: self.spins[..start].to_vec(), k: self.k };
        Some((head, self.spins[start..].to_vec()))
    }

    /// Number of edges of `L_n` whose endpoints carry equal spins.
    pub fn equal_edges(&self) -> u64 {
        self.slice().edges().iter().filter(|(c, p)| self.spins[*c] == self.spins[*p]).count() as u64
    }

    /// Number of boundary vertices carrying `spin`.
    pub fn boundary_count(&self, spin: u32) -> u64 {
        self.boundary().iter().filter(|&&s| s == spin).count() as u64
    }
}

/// Which vertex set an enumeration ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Levels {
    /// `Omega_{V_n}`.
    Volume,
    /// `Omega_{W_n}`.
    Boundary,
}

/// Odometer over `{0..=q}^len` in lexicographic order (last position fastest).
#[derive(Clone, Debug)]
pub struct Odometer {
    q: u32,
    current: Option<Vec<u32>>,
}

impl Odometer {
    pub fn new(q: u32, len: usize) -> Self {
        Self { q, current: Some(vec![0; len]) }
    }
}

impl Iterator for Odometer {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked");
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            if cur[pos] < self.q {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
        Some(out)
    }
}

/// Spin vectors over `V_n` or `W_n` in lexicographic order.
pub fn enumerate_spins(k: u32, n: u32, q: u32, on: Levels, cap: u64) -> Result<Odometer, Error> {
    let slice = Slice::new(k, n);
    let sites = match on {
        Levels::Volume => slice.volume(),
        Levels::Boundary => slice.level_size(n),
    };
    check_cap(q, sites, cap)?;
    Ok(Odometer::new(q, sites))
}

/// Every configuration on `V_n` exactly once, in lexicographic order.
pub fn enumerate_configurations(k: u32, n: u32, q: u32, cap: u64) -> Result<impl Iterator<Item = Configuration>, Error> {
    let spins = enumerate_spins(k, n, q, Levels::Volume, cap)?;
    Ok(spins.map(move |s| Configuration { depth: n, q, spins: s, k }))
}

/// Decodes the `index`-th spin vector of length `len` in lexicographic order.
pub fn decode_spins(mut index: u64, q: u32, len: usize, out: &mut [u32]) {
    let base = q as u64 + 1;
    for slot in out[..len].iter_mut().rev() {
        *slot = (index % base) as u32;
        index /= base;
    }
}
