//! Extended characters `(m, e_a)` and their cell classification.
//!
//! A character with `m` in the `a`-th first-structure dual part carries the
//! second-structure degree `deg_j = delta(j, a) - <m, n_j>`, which is the
//! unit vector `e_b` of its column.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{generates_full_lattice, Ambient, LatticeMatrix, LatticeVector};
use crate::nef::MirrorPair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharacterError {
    #[error("character {m} in row {} has degree {degree:?}, not a unit vector", .a + 1)]
    NotUnitDegree {
        m: LatticeVector,
        a: usize,
        degree: Vec<BigInt>,
    },
    #[error("column {} holds {got:?} but the dual part has {expected:?}", .b + 1)]
    ClassificationConflict {
        b: usize,
        expected: Vec<LatticeVector>,
        got: Vec<LatticeVector>,
    },
    #[error("pairings of {m} with the translations do not match a cell of row {}", .a + 1)]
    PairingPattern { m: LatticeVector, a: usize },
    #[error("no perfect matching of rows to columns through nonempty cells")]
    Assumption1Failure,
    #[error("character {index} has rank {got}, expected {expected}")]
    RankMismatch { index: usize, expected: usize, got: usize },
    #[error("character {index} has cell ({}, {}) outside 1..={r}", .a + 1, .b + 1)]
    CellOutOfRange { index: usize, a: usize, b: usize, r: usize },
}

/// The two line-bundle structures a character is grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Structure {
    First,
    Second,
}

/// `(m, e_a)` with its cell `(a, b)`; indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedCharacter {
    pub m: LatticeVector,
    pub a: usize,
    pub b: usize,
}

impl ExtendedCharacter {
    /// The fiber part `u = e_a` in `Z^r`.
    pub fn u(&self, r: usize) -> LatticeVector {
        LatticeVector::unit(r, self.a)
    }

    /// `(m, u)` in `M + Z^r`.
    pub fn extended(&self, r: usize) -> LatticeVector {
        self.m.concat(&self.u(r))
    }

    pub fn is_origin(&self) -> bool {
        self.m.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterTable {
    rank: usize,
    translations: Vec<LatticeVector>,
    characters: Vec<ExtendedCharacter>,
}

/// `deg_j(m, e_a) = delta(j, a) - <m, n_j>` for each `j`.
pub fn degree2(m: &LatticeVector, a: usize, translations: &[LatticeVector]) -> Vec<BigInt> {
    translations
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let delta = if j == a { BigInt::one() } else { BigInt::zero() };
            delta - m.dot(n)
        })
        .collect()
}

fn unit_index(v: &[BigInt]) -> Option<usize> {
    let mut found = None;
    for (i, e) in v.iter().enumerate() {
        if e.is_one() {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        } else if !e.is_zero() {
            return None;
        }
    }
    found
}

/// Cell of `m` in row `a` read off from the pairings alone: `b` is the index
/// with `<m, n_b> = -1` when `<m, n_a> = 1` and all other pairings vanish;
/// `b = a` when every pairing is zero.
pub fn classify_by_pairing(
    m: &LatticeVector,
    a: usize,
    translations: &[LatticeVector],
) -> Result<(usize, usize), CharacterError> {
    let bad = || CharacterError::PairingPattern { m: m.clone(), a };
    let pairings: Vec<BigInt> = translations.iter().map(|n| m.dot(n)).collect();
    if pairings.iter().all(Zero::is_zero) {
        return Ok((a, a));
    }
    if a >= pairings.len() || !pairings[a].is_one() {
        return Err(bad());
    }
    let minus_one = -BigInt::one();
    let mut b = None;
    for (j, p) in pairings.iter().enumerate() {
        if j == a {
            continue;
        }
        if *p == minus_one && b.is_none() {
            b = Some(j);
        } else if !p.is_zero() {
            return Err(bad());
        }
    }
    b.map(|b| (a, b)).ok_or_else(bad)
}

/// Basis of the character lattice of the second structure,
/// `{(m, u) : u_j = <m, n_j>}`, one row `(e_i, ((n_j)_i)_j)` per `i`.
pub fn y2_lattice_basis(mp: &MirrorPair) -> LatticeMatrix {
    y2_basis(mp.rank(), mp.translations())
}

pub(crate) fn y2_basis(rank: usize, translations: &[LatticeVector]) -> LatticeMatrix {
    let r = translations.len();
    let rows = (0..rank)
        .map(|i| {
            let u: Vec<BigInt> = translations.iter().map(|n| n.entries()[i].clone()).collect();
            LatticeVector::unit(rank, i).concat(&LatticeVector::new(u))
        })
        .collect();
    LatticeMatrix::new(rows, rank + r).expect("rectangular")
}

impl CharacterTable {
    /// A table from explicit characters, with cells taken as given.
    pub fn from_characters(
        rank: usize,
        translations: Vec<LatticeVector>,
        characters: Vec<ExtendedCharacter>,
    ) -> Result<Self, CharacterError> {
        let r = translations.len();
        for (index, n) in translations.iter().enumerate() {
            if n.rank() != rank {
                return Err(CharacterError::RankMismatch {
                    index,
                    expected: rank,
                    got: n.rank(),
                });
            }
        }
        for (index, c) in characters.iter().enumerate() {
            if c.m.rank() != rank {
                return Err(CharacterError::RankMismatch {
                    index,
                    expected: rank,
                    got: c.m.rank(),
                });
            }
            if c.a >= r || c.b >= r {
                return Err(CharacterError::CellOutOfRange {
                    index,
                    a: c.a,
                    b: c.b,
                    r,
                });
            }
        }
        Ok(CharacterTable {
            rank,
            translations,
            characters,
        })
    }

    /// Every lattice point of every first dual part, classified by the degree
    /// map and cross-checked against the second dual partition.
    pub fn build_xi(mp: &MirrorPair) -> Result<Self, CharacterError> {
        let translations = mp.translations().to_vec();
        let mut characters = Vec::new();
        for (a, part) in mp.delta1().parts().iter().enumerate() {
            for m in part.lattice_points() {
                let degree = degree2(m, a, &translations);
                let b = unit_index(&degree).ok_or_else(|| CharacterError::NotUnitDegree {
                    m: m.clone(),
                    a,
                    degree: degree.clone(),
                })?;
                characters.push(ExtendedCharacter { m: m.clone(), a, b });
            }
        }
        let table = CharacterTable {
            rank: mp.rank(),
            translations,
            characters,
        };
        for (b, part) in mp.delta2().parts().iter().enumerate() {
            let mut got: Vec<LatticeVector> = table.column(b).map(|c| c.m.clone()).collect();
            got.sort();
            if got != part.lattice_points() {
                return Err(CharacterError::ClassificationConflict {
                    b,
                    expected: part.lattice_points().to_vec(),
                    got,
                });
            }
        }
        Ok(table)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of parts `r`.
    pub fn parts(&self) -> usize {
        self.translations.len()
    }

    pub fn translations(&self) -> &[LatticeVector] {
        &self.translations
    }

    /// All characters; a character's index is its coefficient id.
    pub fn characters(&self) -> &[ExtendedCharacter] {
        &self.characters
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn row(&self, a: usize) -> impl Iterator<Item = &ExtendedCharacter> {
        self.characters.iter().filter(move |c| c.a == a)
    }

    pub fn column(&self, b: usize) -> impl Iterator<Item = &ExtendedCharacter> {
        self.characters.iter().filter(move |c| c.b == b)
    }

    /// Coefficient ids in cell `(a, b)`.
    pub fn cell(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.characters.len())
            .filter(|&i| self.characters[i].a == a && self.characters[i].b == b)
            .collect()
    }

    pub fn cell_sizes(&self) -> Vec<Vec<usize>> {
        let r = self.parts();
        let mut sizes = vec![vec![0; r]; r];
        for c in &self.characters {
            sizes[c.a][c.b] += 1;
        }
        sizes
    }

    pub fn row_sizes(&self) -> Vec<usize> {
        self.cell_sizes().iter().map(|row| row.iter().sum()).collect()
    }

    pub fn column_sizes(&self) -> Vec<usize> {
        let sizes = self.cell_sizes();
        (0..self.parts())
            .map(|b| sizes.iter().map(|row| row[b]).sum())
            .collect()
    }

    /// JSON records `{id, m, u, a, b}` with 1-based cells.
    pub fn export(&self) -> Vec<CharacterRecord> {
        let r = self.parts();
        self.characters
            .iter()
            .enumerate()
            .map(|(id, c)| CharacterRecord {
                id,
                m: c.m.clone(),
                u: c.u(r),
                a: c.a + 1,
                b: c.b + 1,
            })
            .collect()
    }

    /// Relabels columns by `perm` (row `k` matched to column `perm[k]`
    /// becomes column `k`).
    pub fn relabel_columns(&self, perm: &[usize]) -> CharacterTable {
        let mut inverse = vec![0; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        let characters = self
            .characters
            .iter()
            .map(|c| ExtendedCharacter {
                m: c.m.clone(),
                a: c.a,
                b: inverse[c.b],
            })
            .collect();
        CharacterTable {
            rank: self.rank,
            translations: self.translations.clone(),
            characters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterRecord {
    pub id: usize,
    pub m: LatticeVector,
    pub u: LatticeVector,
    pub a: usize,
    pub b: usize,
}

/// A permutation `perm` with every cell `(k, perm[k])` nonempty. The
/// identity is returned whenever all diagonal cells are nonempty.
pub fn check_assumption1(ct: &CharacterTable) -> Result<Vec<usize>, CharacterError> {
    let r = ct.parts();
    let sizes = ct.cell_sizes();
    if (0..r).all(|k| sizes[k][k] > 0) {
        return Ok((0..r).collect());
    }
    // Kuhn's augmenting paths; column `k` is tried first for row `k`.
    let mut owner: Vec<Option<usize>> = vec![None; r];
    fn augment(row: usize, sizes: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        let r = sizes.len();
        for step in 0..r {
            let col = (row + step) % r;
            if sizes[row][col] == 0 || seen[col] {
                continue;
            }
            seen[col] = true;
            if owner[col].is_none_or(|other| augment(other, sizes, seen, owner)) {
                owner[col] = Some(row);
                return true;
            }
        }
        false
    }
    for row in 0..r {
        let mut seen = vec![false; r];
        if !augment(row, &sizes, &mut seen, &mut owner) {
            return Err(CharacterError::Assumption1Failure);
        }
    }
    let mut perm = vec![0; r];
    for (col, o) in owner.iter().enumerate() {
        perm[o.expect("perfect matching")] = col;
    }
    Ok(perm)
}

/// Whether the within-group differences of characters generate the character
/// lattice of the chosen structure: `M` for the first, the lattice of
/// [`y2_lattice_basis`] for the second.
pub fn check_assumption2(ct: &CharacterTable, structure: Structure) -> bool {
    let r = ct.parts();
    let mut diffs = Vec::new();
    for k in 0..r {
        let group: Vec<LatticeVector> = match structure {
            Structure::First => ct.row(k).map(|c| c.m.clone()).collect(),
            Structure::Second => ct.column(k).map(|c| c.extended(r)).collect(),
        };
        if let Some((first, rest)) = group.split_first() {
            diffs.extend(rest.iter().map(|v| v - first));
        }
    }
    let ambient = match structure {
        Structure::First => Ambient::Full(ct.rank),
        Structure::Second => Ambient::Sublattice(y2_basis(ct.rank, &ct.translations)),
    };
    generates_full_lattice(&diffs, &ambient).expect("differences lie in the character lattice")
}
