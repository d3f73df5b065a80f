//! Lattice polytopes: hulls, lattice points, Minkowski sums and polar duals.
//!
//! A [`LatticePolytope`] always carries both representations. Facets are
//! stored as `<normal, x> >= -offset` with primitive integer normals, so a
//! reflexive polytope is exactly one whose facets all have offset 1.
//! Polytopes that are not full-dimensional also carry the equations of their
//! affine span; their facet normals are only meaningful on that span.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hull;
use crate::lattice::{hermite_form, integer_kernel, LatticeMatrix, LatticeVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("cannot take the hull of an empty point set")]
    Empty,
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("origin is not an interior point, so the polar dual is unbounded")]
    UnboundedDual,
}

/// `<normal, x> >= -offset` (or `= -offset` for an equation).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Facet {
    pub normal: LatticeVector,
    #[serde(serialize_with = "serialize_int")]
    pub offset: BigInt,
}

fn serialize_int<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

impl Facet {
    /// `<normal, x> + offset`; nonnegative on the polytope.
    pub fn evaluate(&self, x: &LatticeVector) -> BigInt {
        self.normal.dot(x) + &self.offset
    }
}

#[derive(Clone)]
pub struct LatticePolytope {
    rank: usize,
    dim: usize,
    vertices: Vec<LatticeVector>,
    facets: Vec<Facet>,
    equations: Vec<Facet>,
    lattice_points: OnceLock<Vec<LatticeVector>>,
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.vertices == other.vertices
    }
}

impl Eq for LatticePolytope {}

impl fmt::Debug for LatticePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conv{:?}", self.vertices)
    }
}

impl Serialize for LatticePolytope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.vertices.serialize(s)
    }
}

impl LatticePolytope {
    /// Convex hull of a finite point set.
    pub fn hull(points: &[LatticeVector]) -> Result<Self, PolytopeError> {
        let first = points.first().ok_or(PolytopeError::Empty)?;
        let rank = first.rank();
        if let Some(bad) = points.iter().find(|p| p.rank() != rank) {
            return Err(PolytopeError::RankMismatch {
                expected: rank,
                got: bad.rank(),
            });
        }
        let pts: Vec<LatticeVector> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let base = pts[0].clone();
        let diffs: Vec<LatticeVector> = pts.iter().map(|p| p - &base).collect();

        let eq_normals = integer_kernel(&LatticeMatrix::new(diffs.clone(), rank).expect("uniform rank"));
        let equations: Vec<Facet> = eq_normals
            .rows()
            .iter()
            .map(|nrm| Facet {
                offset: -nrm.dot(&base),
                normal: nrm.clone(),
            })
            .collect();
        let dim = rank - eq_normals.nrows();

        if dim == 0 {
            return Ok(LatticePolytope {
                rank,
                dim,
                vertices: vec![base],
                facets: Vec::new(),
                equations,
                lattice_points: OnceLock::new(),
            });
        }

        // Local coordinates on the affine span: with span basis B (dim x rank,
        // saturated), hermite_form(B^T) gives u with u B^T = [I; 0]; the first
        // dim entries of u x^T are then the coordinates of x in B.
        let span = if eq_normals.nrows() == 0 {
            LatticeMatrix::identity(rank)
        } else {
            integer_kernel(&eq_normals)
        };
        let (_, u) = hermite_form(&span.transpose());
        let to_local = |x: &LatticeVector| -> Vec<BigInt> { (0..dim).map(|i| u.row(i).dot(x)).collect() };
        let local: Vec<Vec<BigInt>> = diffs.iter().map(to_local).collect();
        let raw = hull::facets(&local);

        let mut facets = Vec::with_capacity(raw.len());
        let mut tight_normals: Vec<Vec<Vec<BigInt>>> = vec![Vec::new(); pts.len()];
        for f in &raw {
            let mut normal = LatticeVector::zero(rank);
            for (i, a) in f.normal.iter().enumerate() {
                if !a.is_zero() {
                    normal = &normal + &u.row(i).scale(a);
                }
            }
            let offset = &f.offset - normal.dot(&base);
            facets.push(Facet { normal, offset });
            for &i in &f.incident {
                tight_normals[i].push(f.normal.clone());
            }
        }
        facets.sort();

        let vertices: Vec<LatticeVector> = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| crate::lattice::rank_of(tight_normals[*i].clone()) == dim)
            .map(|(_, p)| p.clone())
            .collect();

        Ok(LatticePolytope {
            rank,
            dim,
            vertices,
            facets,
            equations,
            lattice_points: OnceLock::new(),
        })
    }

    pub fn from_i64(points: &[&[i64]]) -> Result<Self, PolytopeError> {
        let pts: Vec<LatticeVector> = points.iter().map(|p| LatticeVector::from_i64(p)).collect();
        Self::hull(&pts)
    }

    /// The one-point polytope `{0}` in `Z^rank`.
    pub fn origin(rank: usize) -> Self {
        Self::hull(&[LatticeVector::zero(rank)]).expect("nonempty")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Affine dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.rank
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[LatticeVector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn equations(&self) -> &[Facet] {
        &self.equations
    }

    pub fn is_origin(&self) -> bool {
        self.vertices.len() == 1 && self.vertices[0].is_zero()
    }

    pub fn contains(&self, x: &LatticeVector) -> bool {
        x.rank() == self.rank
            && self.equations.iter().all(|e| e.evaluate(x).is_zero())
            && self.facets.iter().all(|f| !f.evaluate(x).is_negative())
    }

    /// Whether 0 lies in the relative interior of a full-dimensional polytope.
    pub fn has_interior_origin(&self) -> bool {
        self.is_full_dimensional() && self.facets.iter().all(|f| f.offset.is_positive())
    }

    /// Lattice points in lexicographic order.
    pub fn lattice_points(&self) -> &[LatticeVector] {
        self.lattice_points.get_or_init(|| self.enumerate_points())
    }

    fn enumerate_points(&self) -> Vec<LatticeVector> {
        if self.rank == 0 {
            return self.vertices.clone();
        }
        let lo: Vec<BigInt> = (0..self.rank)
            .map(|i| self.vertices.iter().map(|v| &v.entries()[i]).min().unwrap().clone())
            .collect();
        let hi: Vec<BigInt> = (0..self.rank)
            .map(|i| self.vertices.iter().map(|v| &v.entries()[i]).max().unwrap().clone())
            .collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            let x = LatticeVector::new(cur.clone());
            if self.contains(&x) {
                out.push(x);
            }
            // Odometer with the last coordinate fastest keeps the output sorted.
            let mut i = self.rank;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    cur[i + 1..].clone_from_slice(&lo[i + 1..]);
                    break;
                }
            }
        }
    }

    /// `P + Q`, the hull of all pairwise vertex sums.
    pub fn minkowski_sum(&self, other: &LatticePolytope) -> Result<LatticePolytope, PolytopeError> {
        if self.rank != other.rank {
            return Err(PolytopeError::RankMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        let sums: Vec<LatticeVector> = self
            .vertices
            .iter()
            .flat_map(|a| other.vertices.iter().map(move |b| a + b))
            .collect();
        LatticePolytope::hull(&sums)
    }

    pub fn translate(&self, t: &LatticeVector) -> LatticePolytope {
        let pts: Vec<LatticeVector> = self.vertices.iter().map(|v| v + t).collect();
        LatticePolytope::hull(&pts).expect("nonempty")
    }

    pub fn negate(&self) -> LatticePolytope {
        let pts: Vec<LatticeVector> = self.vertices.iter().map(|v| -v).collect();
        LatticePolytope::hull(&pts).expect("nonempty")
    }

    /// `{w : <w, p> >= -1 for all p}`. Requires 0 in the interior.
    pub fn polar_dual(&self) -> Result<PolarDual, PolytopeError> {
        if !self.has_interior_origin() {
            return Err(PolytopeError::UnboundedDual);
        }
        let mut vertices: Vec<Vec<BigRational>> = self
            .facets
            .iter()
            .map(|f| {
                f.normal
                    .entries()
                    .iter()
                    .map(|a| BigRational::new(a.clone(), f.offset.clone()))
                    .collect()
            })
            .collect();
        vertices.sort();
        let integral = vertices.iter().flatten().all(|q| q.is_integer());
        Ok(PolarDual {
            rank: self.rank,
            vertices,
            integral,
        })
    }

    /// 0 interior and every facet at lattice distance one.
    pub fn is_reflexive(&self) -> bool {
        self.has_interior_origin() && self.facets.iter().all(|f| f.offset.is_one())
    }
}

/// The polar dual of a polytope with interior origin, with exact rational
/// vertices (one per facet of the original).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarDual {
    pub rank: usize,
    pub vertices: Vec<Vec<BigRational>>,
    pub integral: bool,
}

impl PolarDual {
    /// The dual as a lattice polytope, when all its vertices are integral.
    pub fn to_lattice(&self) -> Option<LatticePolytope> {
        if !self.integral {
            return None;
        }
        let pts: Vec<LatticeVector> = self
            .vertices
            .iter()
            .map(|v| LatticeVector::new(v.iter().map(|q| q.to_integer()).collect()))
            .collect();
        Some(LatticePolytope::hull(&pts).expect("a polar dual has vertices"))
    }
}

/// `P_1 + ... + P_k`; `None` for an empty list.
pub fn minkowski_sum_all<'a>(
    parts: impl IntoIterator<Item = &'a LatticePolytope>,
) -> Result<Option<LatticePolytope>, PolytopeError> {
    let mut acc: Option<LatticePolytope> = None;
    for p in parts {
        acc = Some(match acc {
            None => p.clone(),
            Some(a) => a.minkowski_sum(p)?,
        });
    }
    Ok(acc)
}
