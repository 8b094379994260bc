//! Variable identifiers, ordered variable sets and partial configurations.
//!
//! All tables in this crate are dense over binary configurations. A configuration
//! of a variable set `S = [s0 < s1 < ...]` is addressed by an index whose bit `k`
//! holds the value of `s_k`; a configuration of all `D` causes therefore has
//! bit `i` equal to the value of cause `i`. Bitstrings are written little-endian:
//! character `k` is the value of `s_k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a potential cause, `0 <= index < D`. Displayed one-based (`X1`, `X2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }

    fn bit(self) -> usize {
        1 << self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0 + 1)
    }
}

/// A strictly increasing set of variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct VarSet {
    vars: Vec<VarId>,
    mask: usize,
}

impl VarSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from variables that must already be strictly increasing.
    pub fn new(vars: Vec<VarId>) -> Result<Self> {
        if vars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "variable list {} is not strictly increasing",
                display_list(&vars)
            )));
        }
        if vars.iter().any(|v| v.0 >= usize::BITS as usize - 1) {
            return Err(Error::Domain("variable index too large".into()));
        }
        let mask = vars.iter().fold(0, |m, v| m | v.bit());
        Ok(Self { vars, mask })
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(vars: impl IntoIterator<Item = VarId>) -> Self {
        let mut vars: Vec<VarId> = vars.into_iter().collect();
        vars.sort();
        vars.dedup();
        let mask = vars.iter().fold(0, |m, v| m | v.bit());
        Self { vars, mask }
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        Self::from_unsorted(indices.iter().map(|&i| VarId(i)))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn all(n: usize) -> Self {
        Self::from_unsorted((0..n).map(VarId))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().copied()
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.vars
    }

    pub fn mask(&self) -> usize {
        self.mask
    }

    pub fn contains(&self, v: VarId) -> bool {
        v.0 < usize::BITS as usize && self.mask & v.bit() != 0
    }

    pub fn max(&self) -> Option<VarId> {
        self.vars.last().copied()
    }

    /// Number of configurations, `2^len`.
    pub fn n_configs(&self) -> usize {
        1 << self.vars.len()
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.mask & other.mask == 0
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        Self::from_unsorted(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        Self::from_unsorted(self.iter().filter(|v| !other.contains(*v)))
    }

    /// Variables of `{0..n}` not in this set.
    pub fn complement(&self, n: usize) -> VarSet {
        Self::from_unsorted((0..n).map(VarId).filter(|v| !self.contains(*v)))
    }

    /// Position of `v` within the set.
    pub fn position(&self, v: VarId) -> Option<usize> {
        self.vars.binary_search(&v).ok()
    }

    /// Extracts this set's configuration index from a full configuration `x`.
    #[inline]
    pub fn project(&self, x: usize) -> usize {
        let mut out = 0;
        for (k, v) in self.vars.iter().enumerate() {
            out |= ((x >> v.0) & 1) << k;
        }
        out
    }

    /// Scatters a configuration index of this set into full-configuration bit positions.
    #[inline]
    pub fn embed(&self, config: usize) -> usize {
        let mut out = 0;
        for (k, v) in self.vars.iter().enumerate() {
            out |= ((config >> k) & 1) << v.0;
        }
        out
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_list(&self.vars))
    }
}

fn display_list(vars: &[VarId]) -> String {
    let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", names.join(","))
}

/// An assignment of binary values to a set of variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    vars: VarSet,
    index: usize,
}

impl Config {
    pub fn new(vars: VarSet, values: &[u8]) -> Result<Self> {
        if values.len() != vars.len() {
            return Err(Error::Domain(format!(
                "{} values given for {} variables",
                values.len(),
                vars.len()
            )));
        }
        let mut index = 0;
        for (k, &val) in values.iter().enumerate() {
            match val {
                0 => {}
                1 => index |= 1 << k,
                other => return Err(Error::Domain(format!("non-binary value {other}"))),
            }
        }
        Ok(Self { vars, index })
    }

    pub fn from_index(vars: VarSet, index: usize) -> Self {
        debug_assert!(index < vars.n_configs());
        Self { vars, index }
    }

    /// The empty configuration.
    pub fn empty() -> Self {
        Self { vars: VarSet::empty(), index: 0 }
    }

    /// A full configuration of `n` causes from its dense index.
    pub fn full(n: usize, x: usize) -> Self {
        Self::from_index(VarSet::all(n), x)
    }

    pub fn single(v: VarId, value: u8) -> Result<Self> {
        Self::new(VarSet::from_unsorted([v]), &[value])
    }

    pub fn from_bitstring(vars: VarSet, bits: &str) -> Result<Self> {
        let values = parse_bitstring(bits)?;
        Self::new(vars, &values)
    }

    pub fn to_bitstring(&self) -> String {
        index_to_bitstring(self.index, self.vars.len())
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn value_of(&self, v: VarId) -> Option<u8> {
        self.vars.position(v).map(|k| ((self.index >> k) & 1) as u8)
    }

    pub fn values(&self) -> Vec<u8> {
        (0..self.vars.len()).map(|k| ((self.index >> k) & 1) as u8).collect()
    }

    /// This configuration's values at their full-configuration bit positions.
    pub fn full_bits(&self) -> usize {
        self.vars.embed(self.index)
    }

    /// True when the full configuration `x` agrees with this one on its variables.
    #[inline]
    pub fn matches(&self, x: usize) -> bool {
        x & self.vars.mask() == self.full_bits()
    }

    pub fn restrict(&self, subset: &VarSet) -> Result<Config> {
        if !subset.is_subset(&self.vars) {
            return Err(Error::Domain(format!("{subset} is not a subset of {}", self.vars)));
        }
        Ok(Config::from_index(subset.clone(), subset.project(self.full_bits())))
    }

    /// Union of two configurations over disjoint variable sets.
    pub fn merge(&self, other: &Config) -> Result<Config> {
        if !self.vars.is_disjoint(&other.vars) {
            return Err(Error::Domain(format!(
                "cannot merge configurations over overlapping sets {} and {}",
                self.vars, other.vars
            )));
        }
        let vars = self.vars.union(&other.vars);
        let bits = self.full_bits() | other.full_bits();
        Ok(Config::from_index(vars.clone(), vars.project(bits)))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .vars
            .iter()
            .zip(self.values())
            .map(|(v, val)| format!("{v}={val}"))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn parse_bitstring(bits: &str) -> Result<Vec<u8>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!("invalid character {other:?} in bitstring {bits:?}"))),
        })
        .collect()
}

pub fn index_to_bitstring(index: usize, len: usize) -> String {
    (0..len).map(|k| if (index >> k) & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn project_and_embed_roundtrip() {
        let s = VarSet::from_indices(&[0, 2, 3]);
        for c in 0..s.n_configs() {
            assert_eq!(s.project(s.embed(c)), c);
        }
        // x = X0=1, X1=1, X2=0, X3=1
        assert_eq!(s.project(0b1011), 0b101);
    }

    #[test]
    fn bitstring_is_little_endian() {
        let s = VarSet::from_indices(&[0, 2]);
        let c = Config::from_bitstring(s, "10").unwrap();
        assert_eq!(c.value_of(VarId(0)), Some(1));
        assert_eq!(c.value_of(VarId(2)), Some(0));
        assert_eq!(c.index(), 1);
        assert_eq!(c.to_bitstring(), "10");
    }

    #[test]
    fn rejects_unsorted_and_non_binary() {
        assert!(VarSet::new(vec![VarId(2), VarId(1)]).is_err());
        assert!(VarSet::new(vec![VarId(1), VarId(1)]).is_err());
        assert!(Config::new(VarSet::from_indices(&[0]), &[2]).is_err());
        assert!(Config::new(VarSet::from_indices(&[0]), &[1, 0]).is_err());
        assert!(Config::from_bitstring(VarSet::from_indices(&[0]), "x").is_err());
    }

    #[test]
    fn merge_and_restrict() {
        let a = Config::single(VarId(1), 1).unwrap();
        let b = Config::single(VarId(0), 0).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.vars(), &VarSet::from_indices(&[0, 1]));
        assert_eq!(m.values(), vec![0, 1]);
        assert_eq!(m.restrict(&VarSet::from_indices(&[1])).unwrap(), a);
        assert!(a.merge(&a).is_err());
        assert!(m.matches(0b110));
        assert!(!m.matches(0b101));
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(VarId(0).to_string(), "X1");
        assert_eq!(Config::single(VarId(2), 1).unwrap().to_string(), "(X3=1)");
    }
}
