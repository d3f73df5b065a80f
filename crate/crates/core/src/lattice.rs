//! Exact integer linear algebra over free abelian groups.
//!
//! Everything here works with arbitrary-precision integers. Matrices are
//! row-major and act on row vectors: a "lattice spanned by a matrix" is the
//! integer row span.
//!
//! # Hermite normal form convention
//!
//! [`hermite_form`] returns `(h, u)` with `u` unimodular and `u * m = h`,
//! where `h` is in row echelon form:
//!
//! * nonzero rows come first, zero rows last;
//! * the leading (pivot) entry of each nonzero row is positive and lies
//!   strictly to the right of the pivot of the row above;
//! * every entry above a pivot lies in `[0, pivot)`.
//!
//! With these rules `h` depends only on the row lattice of `m`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: expected rank {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ragged matrix: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("vector does not lie in the given sublattice")]
    NotInSublattice,
}

/// An element of `Z^k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Vec<BigInt>);

impl LatticeVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        LatticeVector(entries)
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        LatticeVector(entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); rank])
    }

    /// The `i`-th standard basis vector of `Z^rank`.
    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = Self::zero(rank);
        v.0[i] = BigInt::one();
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Standard pairing `sum_i a_i b_i`.
    pub fn dot(&self, other: &LatticeVector) -> BigInt {
        debug_assert_eq!(self.rank(), other.rank());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: &BigInt) -> LatticeVector {
        LatticeVector(self.0.iter().map(|e| e * k).collect())
    }

    /// Gcd of the entries (zero for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, e| g.gcd(e))
    }

    /// The vector divided by its content; zero stays zero.
    pub fn primitive(&self) -> LatticeVector {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        LatticeVector(self.0.iter().map(|e| e / &g).collect())
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// Entries as machine integers, if they fit.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, ")")
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self
            .to_i64()
            .ok_or_else(|| serde::ser::Error::custom("coordinate does not fit in i64"))?;
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d).map_err(D::Error::custom)?;
        Ok(LatticeVector::from_i64(&v))
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        debug_assert_eq!(self.rank(), rhs.rank());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        debug_assert_eq!(self.rank(), rhs.rank());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }
}

/// Sum of a nonempty or empty family of vectors of rank `rank`.
pub fn sum_vectors<'a>(rank: usize, vs: impl IntoIterator<Item = &'a LatticeVector>) -> LatticeVector {
    vs.into_iter().fold(LatticeVector::zero(rank), |acc, v| &acc + v)
}

/// A rectangular integer matrix stored as rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeMatrix {
    rows: Vec<LatticeVector>,
    ncols: usize,
}

impl LatticeMatrix {
    pub fn new(rows: Vec<LatticeVector>, ncols: usize) -> Result<Self, LatticeError> {
        for (i, r) in rows.iter().enumerate() {
            if r.rank() != ncols {
                return Err(LatticeError::Ragged {
                    row: i,
                    expected: ncols,
                    got: r.rank(),
                });
            }
        }
        Ok(LatticeMatrix { rows, ncols })
    }

    /// Builds from rows; the column count is taken from the first row.
    ///
    /// Panics on ragged input, so only use it with literal data.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| LatticeVector::from_i64(r)).collect();
        LatticeMatrix::new(rows, ncols).expect("ragged literal matrix")
    }

    pub fn identity(n: usize) -> Self {
        LatticeMatrix {
            rows: (0..n).map(|i| LatticeVector::unit(n, i)).collect(),
            ncols: n,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        LatticeMatrix {
            rows: vec![LatticeVector::zero(ncols); nrows],
            ncols,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[LatticeVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &LatticeVector {
        &self.rows[i]
    }

    pub fn into_rows(self) -> Vec<LatticeVector> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i].0[j]
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(LatticeVector::is_zero)
    }

    pub fn transpose(&self) -> LatticeMatrix {
        let rows = (0..self.ncols)
            .map(|j| LatticeVector(self.rows.iter().map(|r| r.0[j].clone()).collect()))
            .collect();
        LatticeMatrix {
            rows,
            ncols: self.nrows(),
        }
    }

    pub fn mul(&self, other: &LatticeMatrix) -> LatticeMatrix {
        assert_eq!(self.ncols, other.nrows(), "matrix product shape mismatch");
        let rows = self
            .rows
            .iter()
            .map(|r| {
                LatticeVector(
                    (0..other.ncols)
                        .map(|j| r.0.iter().zip(&other.rows).map(|(a, orow)| a * &orow.0[j]).sum())
                        .collect(),
                )
            })
            .collect();
        LatticeMatrix {
            rows,
            ncols: other.ncols,
        }
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, v: &LatticeVector) -> LatticeVector {
        assert_eq!(v.rank(), self.nrows());
        let mut out = LatticeVector::zero(self.ncols);
        for (c, row) in v.0.iter().zip(&self.rows) {
            if c.is_zero() {
                continue;
            }
            for (o, e) in out.0.iter_mut().zip(&row.0) {
                *o += c * e;
            }
        }
        out
    }

    /// Determinant of a square matrix by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.nrows(), self.ncols, "determinant of non-square matrix");
        let n = self.ncols;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = self.rows.iter().map(|r| r.0.clone()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        rank_of(self.rows.iter().map(|r| r.0.clone()).collect())
    }
}

impl fmt::Debug for LatticeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.iter()).finish()
    }
}

impl Serialize for LatticeMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows.serialize(s)
    }
}

/// Rank over `Q` of a list of integer rows, by fraction-free elimination.
pub(crate) fn rank_of(mut a: Vec<Vec<BigInt>>) -> usize {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..nrows {
            if a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            let piv = a[rank][col].clone();
            for j in col..ncols {
                let v = &a[i][j] * &piv - &f * &a[rank][j];
                a[i][j] = v;
            }
            let g = a[i].iter().fold(BigInt::zero(), |g, e| g.gcd(e));
            if !g.is_zero() && !g.is_one() {
                for e in a[i].iter_mut() {
                    *e /= &g;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Row-style Hermite normal form: returns `(h, u)` with `u * m = h`.
///
/// See the module docs for the normalization. A zero matrix comes back
/// unchanged with `u` the identity.
pub fn hermite_form(m: &LatticeMatrix) -> (LatticeMatrix, LatticeMatrix) {
    let nrows = m.nrows();
    let ncols = m.ncols();
    let mut h: Vec<Vec<BigInt>> = m.rows.iter().map(|r| r.0.clone()).collect();
    let mut u: Vec<Vec<BigInt>> = LatticeMatrix::identity(nrows).rows.into_iter().map(|r| r.0).collect();

    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row == nrows {
            break;
        }
        // Fold every lower row into the pivot row with 2x2 unimodular steps.
        for i in pivot_row + 1..nrows {
            if h[i][col].is_zero() {
                continue;
            }
            let a = h[pivot_row][col].clone();
            let b = h[i][col].clone();
            let eg = a.extended_gcd(&b);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let a_g = &a / &g;
            let b_g = &b / &g;
            combine_rows(&mut h, pivot_row, i, &s, &t, &b_g, &a_g);
            combine_rows(&mut u, pivot_row, i, &s, &t, &b_g, &a_g);
        }
        if h[pivot_row][col].is_zero() {
            continue;
        }
        if h[pivot_row][col].is_negative() {
            negate_row(&mut h[pivot_row]);
            negate_row(&mut u[pivot_row]);
        }
        let piv = h[pivot_row][col].clone();
        for i in 0..pivot_row {
            let q = h[i][col].div_floor(&piv);
            if q.is_zero() {
                continue;
            }
            sub_row_multiple(&mut h, i, pivot_row, &q);
            sub_row_multiple(&mut u, i, pivot_row, &q);
        }
        pivot_row += 1;
    }

    let wrap = |rows: Vec<Vec<BigInt>>, ncols: usize| LatticeMatrix {
        rows: rows.into_iter().map(LatticeVector).collect(),
        ncols,
    };
    (wrap(h, ncols), wrap(u, nrows))
}

// (row_p, row_i) <- (s row_p + t row_i, -b' row_p + a' row_i)
fn combine_rows(m: &mut [Vec<BigInt>], p: usize, i: usize, s: &BigInt, t: &BigInt, b_g: &BigInt, a_g: &BigInt) {
    for j in 0..m[p].len() {
        let x = m[p][j].clone();
        let y = m[i][j].clone();
        m[p][j] = s * &x + t * &y;
        m[i][j] = a_g * &y - b_g * &x;
    }
}

fn negate_row(r: &mut [BigInt]) {
    for e in r.iter_mut() {
        *e = -&*e;
    }
}

fn sub_row_multiple(m: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    for j in 0..m[target].len() {
        let v = q * &m[src][j];
        m[target][j] -= v;
    }
}

/// Basis of the saturated lattice `{v : v . row = 0 for every row of m}`.
///
/// The basis is returned in Hermite normal form, so it is canonical.
pub fn integer_kernel(m: &LatticeMatrix) -> LatticeMatrix {
    let n = m.ncols();
    let (h, u) = hermite_form(&m.transpose());
    let rank = h.rows.iter().take_while(|r| !r.is_zero()).count();
    let basis: Vec<LatticeVector> = u.rows.into_iter().skip(rank).collect();
    if basis.is_empty() {
        return LatticeMatrix::zeros(0, n);
    }
    let k = LatticeMatrix { rows: basis, ncols: n };
    let (hk, _) = hermite_form(&k);
    hk
}

/// Saturated lattice basis of the real span of `vectors` (all of rank `n`).
pub fn saturated_span(vectors: &[LatticeVector], n: usize) -> LatticeMatrix {
    let m = LatticeMatrix {
        rows: vectors.to_vec(),
        ncols: n,
    };
    let equations = integer_kernel(&m);
    if equations.nrows() == 0 {
        return LatticeMatrix::identity(n);
    }
    integer_kernel(&equations)
}

/// Coordinates of `v` in terms of the rows of `basis` (assumed linearly
/// independent), or an error if `v` is not in their integer span.
pub fn lattice_coordinates(basis: &LatticeMatrix, v: &LatticeVector) -> Result<LatticeVector, LatticeError> {
    if v.rank() != basis.ncols() {
        return Err(LatticeError::DimensionMismatch {
            expected: basis.ncols(),
            got: v.rank(),
        });
    }
    let k = basis.nrows();
    // u * basis^T = h, so u * v^T = h * c^T for v = c * basis.
    let (h, u) = hermite_form(&basis.transpose());
    let w: Vec<BigInt> = u.rows.iter().map(|r| r.dot(v)).collect();
    let rank = h.rows.iter().take_while(|r| !r.is_zero()).count();
    if rank < k {
        panic!("lattice_coordinates: basis rows are linearly dependent");
    }
    if w[k..].iter().any(|e| !e.is_zero()) {
        return Err(LatticeError::NotInSublattice);
    }
    // h[..k] is upper triangular with positive diagonal.
    let mut c = vec![BigInt::zero(); k];
    for i in (0..k).rev() {
        let mut rhs = w[i].clone();
        for j in i + 1..k {
            rhs -= &h.rows[i].0[j] * &c[j];
        }
        let d = &h.rows[i].0[i];
        let (q, r) = rhs.div_rem(d);
        if !r.is_zero() {
            return Err(LatticeError::NotInSublattice);
        }
        c[i] = q;
    }
    Ok(LatticeVector(c))
}

/// The lattice that [`generates_full_lattice`] compares against.
#[derive(Debug, Clone)]
pub enum Ambient {
    /// All of `Z^k`.
    Full(usize),
    /// The integer row span of a basis matrix.
    Sublattice(LatticeMatrix),
}

impl Ambient {
    fn vector_rank(&self) -> usize {
        match self {
            Ambient::Full(k) => *k,
            Ambient::Sublattice(b) => b.ncols(),
        }
    }
}

/// Whether `vectors` generate the whole ambient lattice as a group.
pub fn generates_full_lattice(vectors: &[LatticeVector], ambient: &Ambient) -> Result<bool, LatticeError> {
    let n = ambient.vector_rank();
    for v in vectors {
        if v.rank() != n {
            return Err(LatticeError::DimensionMismatch {
                expected: n,
                got: v.rank(),
            });
        }
    }
    let (coords, k) = match ambient {
        Ambient::Full(k) => (vectors.to_vec(), *k),
        Ambient::Sublattice(basis) => {
            let coords = vectors
                .iter()
                .map(|v| lattice_coordinates(basis, v))
                .collect::<Result<Vec<_>, _>>()?;
            (coords, basis.nrows())
        }
    };
    if k == 0 {
        return Ok(true);
    }
    let m = LatticeMatrix { rows: coords, ncols: k };
    let (h, _) = hermite_form(&m);
    if h.nrows() < k {
        return Ok(false);
    }
    // Full rank with unit pivots means the top block is the identity.
    Ok((0..k).all(|i| h.rows[i].0[i].is_one()))
}
