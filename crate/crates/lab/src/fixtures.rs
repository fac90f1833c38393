//! Text form of error chains and syndromes.
//!
//! ```text
//! # comment lines start with '#'
//! kind,syndrome
//! n,4
//! primal,3,17,40
//! dual,5,9
//! ```
//!
//! `kind` is `chain` (face and edge qubit indices) or `syndrome` (primal and
//! dual cube indices). `n` is the RHG size. Missing `primal`/`dual` lines mean
//! empty index lists. A file without any record is the empty syndrome of no
//! particular size.

use std::fmt::Write as _;
use std::path::Path;

use thermal_mbqc::bits::BitSet;
use thermal_mbqc::lattice::{ErrorChain, RhgComplex, Syndrome};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Chain,
    Syndrome,
}

impl FixtureKind {
    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Chain => "chain",
            FixtureKind::Syndrome => "syndrome",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub kind: FixtureKind,
    pub size: Option<usize>,
    pub primal: Vec<usize>,
    pub dual: Vec<usize>,
}

impl Fixture {
    pub fn from_chain(complex: &RhgComplex, chain: &ErrorChain) -> Self {
        Self {
            kind: FixtureKind::Chain,
            size: Some(complex.size()),
            primal: chain.primal.ones().collect(),
            dual: chain.dual.ones().collect(),
        }
    }

    pub fn from_syndrome(complex: &RhgComplex, syndrome: &Syndrome) -> Self {
        Self {
            kind: FixtureKind::Syndrome,
            size: Some(complex.size()),
            primal: syndrome.primal.ones().collect(),
            dual: syndrome.dual.ones().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty() && self.dual.is_empty()
    }

    /// Parse the text form; `path` only labels errors.
    pub fn parse(text: &str, path: &Path) -> LabResult<Self> {
        let mut kind = None;
        let mut size = None;
        let mut primal = None;
        let mut dual = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| LabError::parse(path, format!("line {}: {m}", lineno + 1));
            let mut fields = line.split(',').map(str::trim);
            let key = fields.next().unwrap_or_default();
            let values: Vec<&str> = fields.filter(|f| !f.is_empty()).collect();
            let indices = || -> LabResult<Vec<usize>> {
                values
                    .iter()
                    .map(|v| v.parse::<usize>().map_err(|_| err(format!("invalid index '{v}'"))))
                    .collect()
            };
            let dup = |what: &str| err(format!("duplicate '{what}' record"));
            match key {
                "kind" => {
                    if kind.is_some() {
                        return Err(dup(key));
                    }
                    kind = Some(match values.as_slice() {
                        ["chain"] => FixtureKind::Chain,
                        ["syndrome"] => FixtureKind::Syndrome,
                        _ => return Err(err(format!("kind must be 'chain' or 'syndrome', got '{line}'"))),
                    });
                }
                "n" => {
                    if size.is_some() {
                        return Err(dup(key));
                    }
                    size = match indices()?.as_slice() {
                        [n] => Some(*n),
                        _ => return Err(err("n takes one value".into())),
                    };
                }
                "primal" | "dual" => {
                    let slot = if key == "primal" { &mut primal } else { &mut dual };
                    if slot.is_some() {
                        return Err(dup(key));
                    }
                    *slot = Some(indices()?);
                }
                _ => return Err(err(format!("unknown record '{key}'"))),
            }
        }
        let fixture = Self {
            kind: kind.unwrap_or(FixtureKind::Syndrome),
            size,
            primal: primal.unwrap_or_default(),
            dual: dual.unwrap_or_default(),
        };
        if fixture.size.is_none() && !fixture.is_empty() {
            return Err(LabError::parse(path, "nonempty fixture needs an 'n' record"));
        }
        Ok(fixture)
    }

    pub fn read(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "kind,{}", self.kind.name()).unwrap();
        if let Some(n) = self.size {
            writeln!(out, "n,{n}").unwrap();
        }
        for (name, list) in [("primal", &self.primal), ("dual", &self.dual)] {
            out.push_str(name);
            for i in list {
                write!(out, ",{i}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    fn bitsets(&self, len: usize, path: &Path) -> LabResult<(BitSet, BitSet)> {
        let build = |name: &str, list: &[usize]| -> LabResult<BitSet> {
            let mut set = BitSet::new(len);
            for &i in list {
                if i >= len {
                    return Err(LabError::parse(path, format!("{name} index {i} out of range (< {len})")));
                }
                if set.get(i) {
                    return Err(LabError::parse(path, format!("{name} index {i} listed twice")));
                }
                set.set(i, true);
            }
            Ok(set)
        };
        Ok((build("primal", &self.primal)?, build("dual", &self.dual)?))
    }

    fn check(&self, complex: &RhgComplex, kind: FixtureKind, path: &Path) -> LabResult<()> {
        if self.kind != kind {
            return Err(LabError::parse(path, format!("expected a {} fixture", kind.name())));
        }
        if self.size.is_some_and(|n| n != complex.size()) {
            return Err(LabError::parse(path, format!("fixture size differs from N = {}", complex.size())));
        }
        Ok(())
    }

    pub fn chain(&self, complex: &RhgComplex, path: &Path) -> LabResult<ErrorChain> {
        self.check(complex, FixtureKind::Chain, path)?;
        let (primal, dual) = self.bitsets(complex.num_faces(), path)?;
        Ok(ErrorChain { primal, dual })
    }

    /// The syndrome itself, or the boundary of a chain fixture.
    pub fn syndrome(&self, complex: &RhgComplex, path: &Path) -> LabResult<Syndrome> {
        if self.kind == FixtureKind::Chain {
            return Ok(complex.syndrome(&self.chain(complex, path)?)?);
        }
        self.check(complex, FixtureKind::Syndrome, path)?;
        let (primal, dual) = self.bitsets(complex.num_cubes(), path)?;
        Ok(Syndrome { primal, dual })
    }
}
