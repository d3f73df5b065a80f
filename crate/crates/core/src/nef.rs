//! Nef-partitions, Borisov duality and multiple-mirror translations.
//!
//! Parts are indexed from 0 in the API; error messages and reports count
//! from 1.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{sum_vectors, LatticeVector};
use crate::polytope::{minkowski_sum_all, LatticePolytope, PolytopeError};

/// Which lattice a partition lives in: `N` (the nabla side) or `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Nabla,
    Delta,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Nabla => Side::Delta,
            Side::Delta => Side::Nabla,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NefError {
    #[error("a nef-partition needs at least one part")]
    NoParts,
    #[error("part {} has rank {got}, expected {expected}", .part + 1)]
    RankMismatch { part: usize, expected: usize, got: usize },
    #[error("part {} does not contain the origin", .part + 1)]
    MissingOrigin { part: usize },
    #[error("part {} is the zero polytope", .part + 1)]
    ZeroPart { part: usize },
    #[error("the Minkowski sum of the parts is not reflexive")]
    NotReflexive,
    #[error("expected {expected} translation vectors, got {got}")]
    TranslationCount { expected: usize, got: usize },
    #[error("translation {} has rank {got}, expected {expected}", .part + 1)]
    TranslationRank { part: usize, expected: usize, got: usize },
    #[error("translations do not sum to zero")]
    TranslationsDoNotSum,
    #[error("-n_{} does not lie in part {}", .part + 1, .part + 1)]
    TranslationOutside { part: usize },
    #[error("all translations are zero")]
    AllTranslationsZero,
    #[error("translated family for {tuple:?} is not a nef-partition: {reason}")]
    TranslatedFamilyInvalid { tuple: Vec<LatticeVector>, reason: String },
    #[error("part {} of the second partition is not a translate of the first", .part + 1)]
    NotTranslates { part: usize },
    #[error("the two partitions have {first} and {second} parts")]
    PartCountMismatch { first: usize, second: usize },
    #[error("Minkowski sums of the two nabla partitions differ")]
    SumMismatch,
    #[error("invalid index classes: {0}")]
    InvalidClasses(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NefPartition {
    rank: usize,
    side: Side,
    parts: Vec<LatticePolytope>,
    sum: LatticePolytope,
}

impl Serialize for NefPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            rank: usize,
            side: Side,
            parts: &'a [LatticePolytope],
        }
        Doc {
            rank: self.rank,
            side: self.side,
            parts: &self.parts,
        }
        .serialize(s)
    }
}

impl NefPartition {
    /// Checks the nef-partition clauses in order: shared rank, origin in
    /// every part, nonzero parts (nabla side only), reflexive sum.
    pub fn validate(parts: Vec<LatticePolytope>, side: Side) -> Result<Self, NefError> {
        Self::build(parts, side, side == Side::Nabla)
    }

    fn build(parts: Vec<LatticePolytope>, side: Side, require_nonzero: bool) -> Result<Self, NefError> {
        let rank = parts.first().ok_or(NefError::NoParts)?.rank();
        for (k, p) in parts.iter().enumerate() {
            if p.rank() != rank {
                return Err(NefError::RankMismatch {
                    part: k,
                    expected: rank,
                    got: p.rank(),
                });
            }
        }
        let origin = LatticeVector::zero(rank);
        for (k, p) in parts.iter().enumerate() {
            if !p.contains(&origin) {
                return Err(NefError::MissingOrigin { part: k });
            }
        }
        if require_nonzero {
            if let Some(k) = parts.iter().position(LatticePolytope::is_origin) {
                return Err(NefError::ZeroPart { part: k });
            }
        }
        let sum = minkowski_sum_all(&parts)?.expect("nonempty");
        if !sum.is_reflexive() {
            return Err(NefError::NotReflexive);
        }
        Ok(NefPartition { rank, side, parts, sum })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[LatticePolytope] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> &LatticePolytope {
        &self.parts[k]
    }

    /// The reflexive Minkowski sum of the parts.
    pub fn sum(&self) -> &LatticePolytope {
        &self.sum
    }

    /// Hull of the union of the parts.
    pub fn hull_of_union(&self) -> LatticePolytope {
        let pts: Vec<LatticeVector> = self.parts.iter().flat_map(|p| p.vertices().iter().cloned()).collect();
        LatticePolytope::hull(&pts).expect("nonempty")
    }
}

/// The Borisov dual partition: part `k` is the set of `m` with
/// `<m, y> >= -delta(k', k)` for every `y` in part `k'`.
///
/// Every dual part sits inside the polar dual of the sum, so the lattice
/// points of that polar dual are filtered and then hulled.
pub fn borisov_dual(p: &NefPartition) -> NefPartition {
    let region = p
        .sum
        .polar_dual()
        .expect("reflexive sum has interior origin")
        .to_lattice()
        .expect("reflexive sum has integral dual");
    let r = p.len();
    let mut buckets: Vec<Vec<LatticeVector>> = vec![Vec::new(); r];
    for m in region.lattice_points() {
        'parts: for (k, bucket) in buckets.iter_mut().enumerate() {
            for (kp, part) in p.parts.iter().enumerate() {
                let bound = if kp == k { -1 } else { 0 };
                if part.vertices().iter().any(|y| m.dot(y) < bound.into()) {
                    continue 'parts;
                }
            }
            bucket.push(m.clone());
        }
    }
    let parts: Vec<LatticePolytope> = buckets
        .iter()
        .map(|b| LatticePolytope::hull(b).expect("dual part contains the origin"))
        .collect();
    NefPartition::build(parts, p.side.flip(), false).expect("Borisov dual of a nef-partition is a nef-partition")
}

/// All multiple-mirror translation tuples `(n_1, ..., n_r)`: not all zero,
/// `-n_k` a lattice point of part `k`, summing to zero.
///
/// Each surviving tuple is re-validated as a nef-partition after
/// translation; a failure there is returned as an error because it would
/// contradict the characterization of translations by those two conditions.
pub fn find_translations(p: &NefPartition) -> Result<Vec<Vec<LatticeVector>>, NefError> {
    let r = p.len();
    if r < 2 {
        return Ok(Vec::new());
    }
    let candidates: Vec<Vec<LatticeVector>> = p
        .parts
        .iter()
        .map(|part| part.lattice_points().iter().map(|y| -y).collect())
        .collect();

    let mut tuples = Vec::new();
    let mut current = Vec::with_capacity(r);
    enumerate_tuples(&candidates, p.rank, &mut current, &mut tuples);

    tuples
        .into_par_iter()
        .map(|tuple| {
            let translated: Vec<LatticePolytope> =
                p.parts.iter().zip(&tuple).map(|(part, n)| part.translate(n)).collect();
            match NefPartition::validate(translated, Side::Nabla) {
                Ok(_) => Ok(tuple),
                Err(e) => Err(NefError::TranslatedFamilyInvalid {
                    tuple,
                    reason: e.to_string(),
                }),
            }
        })
        .collect()
}

fn enumerate_tuples(
    candidates: &[Vec<LatticeVector>],
    rank: usize,
    current: &mut Vec<LatticeVector>,
    out: &mut Vec<Vec<LatticeVector>>,
) {
    let k = current.len();
    if k + 1 == candidates.len() {
        let last = -&sum_vectors(rank, current.iter());
        if candidates[k].contains(&last) {
            current.push(last);
            if current.iter().any(|n| !n.is_zero()) {
                out.push(current.clone());
            }
            current.pop();
        }
        return;
    }
    for n in &candidates[k] {
        current.push(n.clone());
        enumerate_tuples(candidates, rank, current, out);
        current.pop();
    }
}

/// A nabla-side nef-partition with multiple-mirror translations and the
/// derived second partition and both Borisov duals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorPair {
    nabla1: NefPartition,
    translations: Vec<LatticeVector>,
    nabla2: NefPartition,
    delta1: NefPartition,
    delta2: NefPartition,
}

impl MirrorPair {
    /// Validates multiple-mirror data `n_k` for `nabla1`.
    pub fn new(nabla1: NefPartition, translations: Vec<LatticeVector>) -> Result<Self, NefError> {
        if translations.iter().all(LatticeVector::is_zero) {
            return Err(NefError::AllTranslationsZero);
        }
        Self::assemble(nabla1, translations)
    }

    // Everything except the not-all-zero clause.
    fn assemble(nabla1: NefPartition, translations: Vec<LatticeVector>) -> Result<Self, NefError> {
        let r = nabla1.len();
        let rank = nabla1.rank();
        if translations.len() != r {
            return Err(NefError::TranslationCount {
                expected: r,
                got: translations.len(),
            });
        }
        for (k, n) in translations.iter().enumerate() {
            if n.rank() != rank {
                return Err(NefError::TranslationRank {
                    part: k,
                    expected: rank,
                    got: n.rank(),
                });
            }
        }
        if !sum_vectors(rank, &translations).is_zero() {
            return Err(NefError::TranslationsDoNotSum);
        }
        for (k, n) in translations.iter().enumerate() {
            if !nabla1.part(k).contains(&-n) {
                return Err(NefError::TranslationOutside { part: k });
            }
        }
        let moved: Vec<LatticePolytope> = nabla1
            .parts
            .iter()
            .zip(&translations)
            .map(|(p, n)| p.translate(n))
            .collect();
        let nabla2 = NefPartition::build(moved, Side::Nabla, nabla1.parts.iter().all(|p| !p.is_origin()))?;
        if nabla1.sum != nabla2.sum {
            return Err(NefError::SumMismatch);
        }
        let delta1 = borisov_dual(&nabla1);
        let delta2 = borisov_dual(&nabla2);
        Ok(MirrorPair {
            nabla1,
            translations,
            nabla2,
            delta1,
            delta2,
        })
    }

    /// Builds the pair from two delta-side partitions whose Borisov duals
    /// must be translates of each other. Zero translations are allowed here,
    /// so degenerate inputs can still be analyzed.
    pub fn from_deltas(delta1: NefPartition, delta2: NefPartition) -> Result<Self, NefError> {
        if delta1.len() != delta2.len() {
            return Err(NefError::PartCountMismatch {
                first: delta1.len(),
                second: delta2.len(),
            });
        }
        if delta1.rank() != delta2.rank() {
            return Err(NefError::RankMismatch {
                part: 0,
                expected: delta1.rank(),
                got: delta2.rank(),
            });
        }
        let nabla1 = borisov_dual(&delta1);
        let nabla2 = borisov_dual(&delta2);
        let translations = nabla1
            .parts
            .iter()
            .zip(&nabla2.parts)
            .enumerate()
            .map(|(k, (a, b))| translation_between(a, b).ok_or(NefError::NotTranslates { part: k }))
            .collect::<Result<Vec<_>, _>>()?;
        let pair = Self::assemble(nabla1, translations)?;
        debug_assert_eq!(pair.delta1, delta1);
        debug_assert_eq!(pair.delta2, delta2);
        Ok(pair)
    }

    pub fn rank(&self) -> usize {
        self.nabla1.rank()
    }

    /// Number of parts `r`.
    pub fn len(&self) -> usize {
        self.nabla1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nabla1.is_empty()
    }

    pub fn nabla1(&self) -> &NefPartition {
        &self.nabla1
    }

    pub fn nabla2(&self) -> &NefPartition {
        &self.nabla2
    }

    pub fn delta1(&self) -> &NefPartition {
        &self.delta1
    }

    pub fn delta2(&self) -> &NefPartition {
        &self.delta2
    }

    pub fn translations(&self) -> &[LatticeVector] {
        &self.translations
    }

    /// True when every translation vanishes (both mirrors coincide).
    pub fn is_trivial(&self) -> bool {
        self.translations.iter().all(LatticeVector::is_zero)
    }
}

fn translation_between(a: &LatticePolytope, b: &LatticePolytope) -> Option<LatticeVector> {
    if a.vertices().len() != b.vertices().len() {
        return None;
    }
    let t = &b.vertices()[0] - &a.vertices()[0];
    a.vertices()
        .iter()
        .zip(b.vertices())
        .all(|(x, y)| &(x + &t) == y)
        .then_some(t)
}

/// Result of [`coarsen`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coarsening {
    Mirror(MirrorPair),
    /// Every coarse translation vanished; the pair carries zero translations.
    Trivial(MirrorPair),
}

impl Coarsening {
    pub fn pair(&self) -> &MirrorPair {
        match self {
            Coarsening::Mirror(p) | Coarsening::Trivial(p) => p,
        }
    }

    pub fn into_pair(self) -> MirrorPair {
        match self {
            Coarsening::Mirror(p) | Coarsening::Trivial(p) => p,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Coarsening::Trivial(_))
    }
}

/// Merges parts along a set partition of the indices: each class becomes
/// the Minkowski sum of its nabla parts, with the summed translation.
pub fn coarsen(mp: &MirrorPair, classes: &[Vec<usize>]) -> Result<Coarsening, NefError> {
    let r = mp.len();
    let mut seen = vec![false; r];
    for class in classes {
        if class.is_empty() {
            return Err(NefError::InvalidClasses("empty class".into()));
        }
        for &k in class {
            if k >= r {
                return Err(NefError::InvalidClasses(format!(
                    "index {} out of range 1..={}",
                    k + 1,
                    r
                )));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(NefError::InvalidClasses(format!("index {} appears twice", k + 1)));
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(NefError::InvalidClasses(format!("index {} is not covered", k + 1)));
    }

    let rank = mp.rank();
    let mut parts = Vec::with_capacity(classes.len());
    let mut translations = Vec::with_capacity(classes.len());
    for class in classes {
        let sum = minkowski_sum_all(class.iter().map(|&k| mp.nabla1.part(k)))?.expect("nonempty class");
        parts.push(sum);
        translations.push(sum_vectors(rank, class.iter().map(|&k| &mp.translations[k])));
    }
    let nabla = NefPartition::validate(parts, Side::Nabla)?;
    if translations.iter().all(LatticeVector::is_zero) {
        Ok(Coarsening::Trivial(MirrorPair::assemble(nabla, translations)?))
    } else {
        Ok(Coarsening::Mirror(MirrorPair::new(nabla, translations)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(raw: &[&[i64]]) -> LatticePolytope {
        LatticePolytope::from_i64(raw).unwrap()
    }

    fn v(raw: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(raw)
    }

    fn bn51_nabla() -> NefPartition {
        NefPartition::validate(
            vec![poly(&[&[0, 0], &[0, -1]]), poly(&[&[0, 0], &[-1, 1], &[1, 1]])],
            Side::Nabla,
        )
        .unwrap()
    }

    fn bn51() -> MirrorPair {
        MirrorPair::new(bn51_nabla(), vec![v(&[0, 1]), v(&[0, -1])]).unwrap()
    }

    #[test]
    fn validate_bn51_and_square() {
        let p = bn51_nabla();
        assert_eq!(p.len(), 2);
        assert!(p.sum().is_reflexive());
        let sq = NefPartition::validate(vec![poly(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])], Side::Nabla);
        assert!(sq.is_ok());
    }

    #[test]
    fn validate_reports_each_clause() {
        let far = poly(&[&[1, 0], &[2, 0]]);
        let tri = poly(&[&[0, 0], &[-1, 1], &[1, 1]]);
        assert_eq!(
            NefPartition::validate(vec![far, tri.clone()], Side::Nabla),
            Err(NefError::MissingOrigin { part: 0 })
        );
        assert_eq!(
            NefPartition::validate(vec![LatticePolytope::origin(2), tri.clone()], Side::Nabla),
            Err(NefError::ZeroPart { part: 0 })
        );
        assert_eq!(
            NefPartition::validate(vec![tri], Side::Nabla),
            Err(NefError::NotReflexive)
        );
        assert_eq!(NefPartition::validate(vec![], Side::Nabla), Err(NefError::NoParts));
    }

    #[test]
    fn bn51_borisov_dual() {
        let d = borisov_dual(&bn51_nabla());
        assert_eq!(d.side(), Side::Delta);
        assert_eq!(d.part(0), &poly(&[&[0, 0], &[-1, 1], &[1, 1]]));
        assert_eq!(d.part(1), &poly(&[&[-1, 0], &[1, 0], &[0, -1]]));
        assert_eq!(d.part(0).lattice_points().len(), 4);
        assert_eq!(d.part(1).lattice_points().len(), 4);
        assert_eq!(borisov_dual(&d), bn51_nabla());
    }

    #[test]
    fn single_part_dual_is_polar_dual() {
        let sq = NefPartition::validate(vec![poly(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])], Side::Nabla).unwrap();
        let d = borisov_dual(&sq);
        assert_eq!(d.part(0), &poly(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]));
    }

    #[test]
    fn bn51_translations() {
        let t = find_translations(&bn51_nabla()).unwrap();
        assert_eq!(t, vec![vec![v(&[0, 1]), v(&[0, -1])]]);
        let sq = NefPartition::validate(vec![poly(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])], Side::Nabla).unwrap();
        assert!(find_translations(&sq).unwrap().is_empty());
    }

    #[test]
    fn mirror_pair_checks() {
        let p = bn51();
        assert_eq!(p.nabla2().part(0), &poly(&[&[0, 0], &[0, 1]]));
        assert_eq!(p.delta2().part(0).lattice_points().len(), 2);
        assert_eq!(p.delta2().part(1).lattice_points().len(), 6);
        assert_eq!(
            MirrorPair::new(bn51_nabla(), vec![v(&[0, 0]), v(&[0, 0])]),
            Err(NefError::AllTranslationsZero)
        );
        assert_eq!(
            MirrorPair::new(bn51_nabla(), vec![v(&[0, -1]), v(&[0, 1])]),
            Err(NefError::TranslationOutside { part: 0 })
        );
        assert_eq!(
            MirrorPair::new(bn51_nabla(), vec![v(&[0, 1]), v(&[0, 0])]),
            Err(NefError::TranslationsDoNotSum)
        );
    }

    #[test]
    fn from_deltas_recovers_translations() {
        let p = bn51();
        let q = MirrorPair::from_deltas(p.delta1().clone(), p.delta2().clone()).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn coarsen_bn51() {
        let p = bn51();
        let all = coarsen(&p, &[vec![0, 1]]).unwrap();
        assert!(all.is_trivial());
        assert_eq!(all.pair().nabla1().part(0), p.nabla1().sum());
        assert!(all.pair().translations()[0].is_zero());

        let same = coarsen(&p, &[vec![0], vec![1]]).unwrap();
        assert_eq!(same, Coarsening::Mirror(p.clone()));

        assert!(matches!(coarsen(&p, &[vec![0]]), Err(NefError::InvalidClasses(_))));
        assert!(matches!(
            coarsen(&p, &[vec![0, 1], vec![1]]),
            Err(NefError::InvalidClasses(_))
        ));
        assert!(matches!(
            coarsen(&p, &[vec![0, 2], vec![1]]),
            Err(NefError::InvalidClasses(_))
        ));
    }

    #[test]
    fn dual_of_sum_is_hull_of_union() {
        let p = bn51();
        for (nabla, delta) in [(p.nabla1(), p.delta1()), (p.nabla2(), p.delta2())] {
            let pd = nabla.sum().polar_dual().unwrap().to_lattice().unwrap();
            assert_eq!(pd, delta.hull_of_union());
        }
    }
}
