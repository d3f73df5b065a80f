//! Floating-point evaluation of the cell matrix, numeric rank, Perron pairs
//! and the witness point.

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::characters::{ExtendedCharacter, Structure};
use crate::graph::{DGraph, WStructure};
use crate::lattice::LatticeVector;

pub type Complex64 = nalgebra::Complex<f64>;

/// Relative pivot threshold for [`numeric_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Relative residual threshold for membership checks.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
/// Smallest accepted `min |entry| / max |entry|` of a null vector.
pub const NULL_ENTRY_RATIO: f64 = 1e-6;

const PERRON_TOL: f64 = 1e-12;
const PERRON_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("expected {expected} {what}, got {got}")]
    Missing {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a negative entry")]
    Negative,
    #[error("matrix is reducible")]
    Reducible,
    #[error("power iteration did not converge in {iterations} steps")]
    NonConvergence { iterations: usize },
    #[error("block {} has a single character on its diagonal, so the section never vanishes there", .block + 1)]
    DegenerateBlock { block: usize },
    #[error("fiber coordinate {} is zero", .k + 1)]
    ZeroFiber { k: usize },
    #[error("exponent does not fit in i32")]
    ExponentOverflow,
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Nonzero complex values for the `n` coordinates of `M`, the `r` fiber
/// coordinates and one coefficient per character.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusPoint {
    #[serde(serialize_with = "serialize_complex")]
    pub coords: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex")]
    pub fiber: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex")]
    pub coefficients: Vec<Complex64>,
    /// Singleton blocks whose coefficients use the sum-zero repair.
    pub repaired_blocks: Vec<usize>,
}

pub(crate) fn serialize_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl TorusPoint {
    pub fn check(&self, w: &WStructure) -> Result<(), NumericError> {
        let expect = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(NumericError::Missing { what, expected, got })
            }
        };
        expect("coordinates", w.rank(), self.coords.len())?;
        expect("fiber coordinates", w.size(), self.fiber.len())?;
        expect("coefficients", w.characters().len(), self.coefficients.len())
    }

    /// Multiplies the fiber coordinates of block `j` by `lambda[j]`.
    pub fn rescale_blocks(&self, w: &WStructure, lambda: &[Complex64]) -> TorusPoint {
        let mut out = self.clone();
        for (k, x) in out.fiber.iter_mut().enumerate() {
            *x *= lambda[w.block_of(k)];
        }
        out
    }
}

/// `prod coords_i ^ m_i`.
pub fn monomial(coords: &[Complex64], m: &LatticeVector) -> Result<Complex64, NumericError> {
    let mut z = c64(1.0);
    for (x, e) in coords.iter().zip(m.entries()) {
        if e.is_zero() {
            continue;
        }
        let e = e.to_i32().ok_or(NumericError::ExponentOverflow)?;
        z *= x.powi(e);
    }
    Ok(z)
}

fn character_value(c: &ExtendedCharacter, t: &TorusPoint) -> Result<Complex64, NumericError> {
    Ok(monomial(&t.coords, &c.m)? * t.fiber[c.a])
}

/// `(W)` at a point, with its numeric rank and null spaces.
#[derive(Debug, Clone)]
pub struct NumericW {
    pub matrix: DMatrix<Complex64>,
    pub rank: RankInfo,
}

impl NumericW {
    pub fn row_sums(&self) -> Vec<Complex64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<Complex64> {
        self.matrix.column_iter().map(|c| c.sum()).collect()
    }
}

/// Sum of `c * chi(t)` over every cell.
pub fn evaluate_w(w: &WStructure, t: &TorusPoint) -> Result<NumericW, NumericError> {
    t.check(w)?;
    let r = w.size();
    let mut m = DMatrix::from_element(r, r, Complex64::zero());
    for (id, c) in w.characters().iter().enumerate() {
        m[(c.a, c.b)] += t.coefficients[id] * character_value(c, t)?;
    }
    let rank = numeric_rank(&m, DEFAULT_RANK_TOL);
    Ok(NumericW { matrix: m, rank })
}

/// `(W) = diag(x) F1 = F2 diag(x)` with `x_k` the value of `(0, e_k)`.
#[derive(Debug, Clone)]
pub struct Factors {
    pub diagx: Vec<Complex64>,
    pub f1: DMatrix<Complex64>,
    pub f2: DMatrix<Complex64>,
}

pub fn evaluate_factors(w: &WStructure, t: &TorusPoint) -> Result<Factors, NumericError> {
    let wm = evaluate_w(w, t)?.matrix;
    let diagx = t.fiber.clone();
    if let Some(k) = diagx.iter().position(|x| x.is_zero()) {
        return Err(NumericError::ZeroFiber { k });
    }
    let mut f1 = wm.clone();
    let mut f2 = wm;
    for (k, x) in diagx.iter().enumerate() {
        f1.row_mut(k).iter_mut().for_each(|e| *e /= x);
        f2.column_mut(k).iter_mut().for_each(|e| *e /= x);
    }
    Ok(Factors { diagx, f1, f2 })
}

/// `F1` from the `M` coordinates only: entry `(a, b)` is `sum c * t^m`.
pub fn first_factor(
    w: &WStructure,
    coords: &[Complex64],
    coefficients: &[Complex64],
) -> Result<DMatrix<Complex64>, NumericError> {
    factor_from(w, coords, coefficients)
}

/// `F2` from coordinates `z` on the second character lattice: with the basis
/// of `y2_lattice_basis`, `chi / x_b` is `z^m`, so the formula matches `F1`.
pub fn second_factor(
    w: &WStructure,
    z: &[Complex64],
    coefficients: &[Complex64],
) -> Result<DMatrix<Complex64>, NumericError> {
    factor_from(w, z, coefficients)
}

fn factor_from(
    w: &WStructure,
    coords: &[Complex64],
    coefficients: &[Complex64],
) -> Result<DMatrix<Complex64>, NumericError> {
    if coords.len() != w.rank() {
        return Err(NumericError::Missing {
            what: "coordinates",
            expected: w.rank(),
            got: coords.len(),
        });
    }
    if coefficients.len() != w.characters().len() {
        return Err(NumericError::Missing {
            what: "coefficients",
            expected: w.characters().len(),
            got: coefficients.len(),
        });
    }
    let r = w.size();
    let mut m = DMatrix::from_element(r, r, Complex64::zero());
    for (id, c) in w.characters().iter().enumerate() {
        m[(c.a, c.b)] += coefficients[id] * monomial(coords, &c.m)?;
    }
    Ok(m)
}

/// Numeric rank with orthonormal bases of the left (`h m = 0`) and right
/// (`m v = 0`) null spaces.
#[derive(Debug, Clone)]
pub struct RankInfo {
    pub rank: usize,
    pub tol: f64,
    pub left_null: Vec<DVector<Complex64>>,
    pub right_null: Vec<DVector<Complex64>>,
}

/// Complete-pivoting elimination; a pivot counts when it exceeds `tol`
/// times the largest entry of `m`.
pub fn numeric_rank(m: &DMatrix<Complex64>, tol: f64) -> RankInfo {
    numeric_rank_scaled(m, tol, max_norm(m))
}

/// Like [`numeric_rank`] with the threshold `tol * scale` fixed by the caller,
/// so a submatrix can be judged against the matrix it came from.
pub(crate) fn numeric_rank_scaled(m: &DMatrix<Complex64>, tol: f64, scale: f64) -> RankInfo {
    let (rank, right_null) = right_null_space(m, tol * scale);
    let (_, left_null) = right_null_space(&m.transpose(), tol * scale);
    RankInfo {
        rank,
        tol,
        left_null,
        right_null,
    }
}

fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn right_null_space(m: &DMatrix<Complex64>, threshold: f64) -> (usize, Vec<DVector<Complex64>>) {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    if max_norm(m) > 0.0 {
        while rank < rows.min(cols) {
            let mut best = (rank, rank, 0.0);
            for i in rank..rows {
                for j in rank..cols {
                    let v = a[(i, j)].norm();
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 <= threshold {
                break;
            }
            a.swap_rows(rank, best.0);
            a.swap_columns(rank, best.1);
            perm.swap(rank, best.1);
            let pivot = a[(rank, rank)];
            for i in rank + 1..rows {
                let f = a[(i, rank)] / pivot;
                if f.is_zero() {
                    continue;
                }
                for j in rank..cols {
                    let sub = f * a[(rank, j)];
                    a[(i, j)] -= sub;
                }
            }
            rank += 1;
        }
    }
    let mut basis = Vec::with_capacity(cols - rank);
    for free in rank..cols {
        let mut y = DVector::from_element(cols, Complex64::zero());
        y[free] = c64(1.0);
        for i in (0..rank).rev() {
            let mut s = a[(i, free)];
            for j in i + 1..rank {
                s += a[(i, j)] * y[j];
            }
            y[i] = -s / a[(i, i)];
        }
        let mut x = DVector::from_element(cols, Complex64::zero());
        for (pos, &col) in perm.iter().enumerate() {
            x[col] = y[pos];
        }
        basis.push(x);
    }
    (rank, orthonormalize(basis))
}

fn orthonormalize(vs: Vec<DVector<Complex64>>) -> Vec<DVector<Complex64>> {
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for q in &out {
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let n = v.norm();
        if n > 0.0 {
            out.push(v / c64(n));
        }
    }
    out
}

/// Perron root with positive right (`a v = r v`) and left (`h a = r h`)
/// vectors, each normalized to max entry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Perron {
    pub value: f64,
    pub right: DVector<f64>,
    pub left: DVector<f64>,
}

/// Power iteration on `a + I`, which is primitive for irreducible `a`.
pub fn perron(a: &DMatrix<f64>) -> Result<Perron, NumericError> {
    let (rows, cols) = a.shape();
    if rows != cols || rows == 0 {
        return Err(NumericError::NotSquare { rows, cols });
    }
    if a.iter().any(|&x| x < 0.0 || x.is_nan()) {
        return Err(NumericError::Negative);
    }
    let g = DGraph::new(
        (0..rows)
            .map(|i| (0..cols).map(|j| a[(i, j)] > 0.0).collect())
            .collect(),
    );
    if g.strongly_connected_components().len() != 1 {
        return Err(NumericError::Reducible);
    }
    let b = a + DMatrix::identity(rows, cols);
    let (value, right) = power_iteration(&b)?;
    let (_, left) = power_iteration(&b.transpose())?;
    Ok(Perron {
        value: value - 1.0,
        right,
        left,
    })
}

fn power_iteration(b: &DMatrix<f64>) -> Result<(f64, DVector<f64>), NumericError> {
    let n = b.nrows();
    let mut v = DVector::from_element(n, 1.0);
    for _ in 0..PERRON_MAX_ITER {
        let mut next = b * &v;
        let lambda = next.max();
        next /= lambda;
        let delta = (&next - &v).amax();
        v = next;
        if delta < PERRON_TOL {
            let lambda = (b * &v).max();
            return Ok((lambda, v));
        }
    }
    Err(NumericError::NonConvergence {
        iterations: PERRON_MAX_ITER,
    })
}

/// Per-block data behind a witness.
#[derive(Debug, Clone)]
pub struct BlockWitness {
    /// Off-diagonal arrow matrix of the block.
    pub adjacency: DMatrix<f64>,
    /// `None` for singleton blocks.
    pub perron: Option<Perron>,
    pub repaired: bool,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub point: TorusPoint,
    pub blocks: Vec<BlockWitness>,
}

/// A point of both open sets built from the Perron pair of each block.
///
/// Off-diagonal cells get `c = 1/|cell|` and diagonal cells
/// `c = -r_j/|cell|`, so that at the unit point `(W) = A - diag(r_j)`. The
/// coordinates are then chosen so that `(W) = diag(h) (A - r) diag(v)`:
/// fiber `x_k = h_k v_k` and `t_i = prod_j v_j^(-(n_j)_i)`, using that
/// a character in cell `(a, b)` pairs with `n_j` to `delta(j,a) - delta(j,b)`.
///
/// Singleton blocks have `r_j = 0`; their diagonal coefficients become
/// `1, ..., 1, -(s-1)` instead, which needs at least two characters.
pub fn build_witness(w: &WStructure) -> Result<Witness, NumericError> {
    let r = w.size();
    let mut coefficients = vec![Complex64::zero(); w.characters().len()];
    let mut v = vec![1.0; r];
    let mut h = vec![1.0; r];
    let mut repaired_blocks = Vec::new();
    let mut blocks = Vec::with_capacity(w.beta());

    for (j, block) in w.blocks().iter().enumerate() {
        let d = block.len();
        let mut adjacency = DMatrix::zeros(d, d);
        for (p, &a) in block.iter().enumerate() {
            for (q, &b) in block.iter().enumerate() {
                if a != b && !w.cell(a, b).is_empty() {
                    adjacency[(p, q)] = 1.0;
                    let share = 1.0 / w.cell(a, b).len() as f64;
                    for &id in w.cell(a, b) {
                        coefficients[id] = c64(share);
                    }
                }
            }
        }
        if d == 1 {
            let k = block[0];
            let diag = w.cell(k, k);
            if diag.len() < 2 {
                return Err(NumericError::DegenerateBlock { block: j });
            }
            for &id in diag {
                coefficients[id] = c64(1.0);
            }
            coefficients[*diag.last().expect("nonempty")] = c64(-((diag.len() - 1) as f64));
            repaired_blocks.push(j);
            blocks.push(BlockWitness {
                adjacency,
                perron: None,
                repaired: true,
            });
            continue;
        }
        let p = perron(&adjacency)?;
        for (q, &k) in block.iter().enumerate() {
            let diag = w.cell(k, k);
            let share = -p.value / diag.len() as f64;
            for &id in diag {
                coefficients[id] = c64(share);
            }
            v[k] = p.right[q];
            h[k] = p.left[q];
        }
        blocks.push(BlockWitness {
            adjacency,
            perron: Some(p),
            repaired: false,
        });
    }

    let coords = (0..w.rank())
        .map(|i| {
            let log: f64 = w
                .translations()
                .iter()
                .zip(&v)
                .map(|(n, vj)| -n.entries()[i].to_f64().expect("small translation") * vj.ln())
                .sum();
            c64(log.exp())
        })
        .collect();
    let fiber = h.iter().zip(&v).map(|(a, b)| c64(a * b)).collect();
    Ok(Witness {
        point: TorusPoint {
            coords,
            fiber,
            coefficients,
            repaired_blocks,
        },
        blocks,
    })
}

/// Outcome of the three membership conditions for one structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub structure: Structure,
    /// Largest row sum (first structure) or column sum (second), relative to
    /// the largest entry of `(W)`.
    pub max_residual: f64,
    pub residual_tol: f64,
    pub residual_ok: bool,
    pub rank: usize,
    pub expected_rank: usize,
    pub rank_tol: f64,
    pub rank_ok: bool,
    /// Smallest `min |entry| / max |entry|` over the per-block null vectors;
    /// zero when some block lacks a one-dimensional null space.
    pub min_null_ratio: f64,
    pub null_ok: bool,
    pub passes: bool,
}

/// Whether `(W)` kills `(1, ..., 1)`, has rank `r - beta`, and each block has
/// a left null vector with all entries nonzero.
pub fn verify_in_o1(w: &WStructure, t: &TorusPoint, tol: f64) -> Result<MembershipReport, NumericError> {
    let wm = evaluate_w(w, t)?;
    Ok(membership(w, &wm.matrix, Structure::First, tol))
}

/// Column sums, rank, and per-block right null vectors.
pub fn verify_in_o2(w: &WStructure, t: &TorusPoint, tol: f64) -> Result<MembershipReport, NumericError> {
    let wm = evaluate_w(w, t)?;
    Ok(membership(w, &wm.matrix, Structure::Second, tol))
}

pub(crate) fn relative_sums(m: &DMatrix<Complex64>, structure: Structure) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sums: Vec<Complex64> = match structure {
        Structure::First => m.row_iter().map(|r| r.sum()).collect(),
        Structure::Second => m.column_iter().map(|c| c.sum()).collect(),
    };
    let worst = sums.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// The null vector of each diagonal block (left for the first structure,
/// right for the second), when it is one-dimensional.
pub(crate) fn block_null_vectors(
    w: &WStructure,
    m: &DMatrix<Complex64>,
    structure: Structure,
) -> Vec<Option<DVector<Complex64>>> {
    let scale = max_norm(m);
    w.blocks()
        .iter()
        .map(|block| {
            let d = block.len();
            let sub = DMatrix::from_fn(d, d, |p, q| m[(block[p], block[q])]);
            let info = numeric_rank_scaled(&sub, DEFAULT_RANK_TOL, scale);
            let null = match structure {
                Structure::First => info.left_null,
                Structure::Second => info.right_null,
            };
            (null.len() == 1).then(|| null.into_iter().next().expect("one vector"))
        })
        .collect()
}

pub(crate) fn entry_ratio(v: &DVector<Complex64>) -> f64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = v.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        min / max
    } else {
        0.0
    }
}

fn membership(w: &WStructure, m: &DMatrix<Complex64>, structure: Structure, tol: f64) -> MembershipReport {
    let max_residual = relative_sums(m, structure);
    let info = numeric_rank(m, DEFAULT_RANK_TOL);
    let expected_rank = w.size() - w.beta();
    let min_null_ratio = block_null_vectors(w, m, structure)
        .iter()
        .map(|v| v.as_ref().map_or(0.0, entry_ratio))
        .fold(f64::INFINITY, f64::min);
    let residual_ok = max_residual < tol;
    let rank_ok = info.rank == expected_rank;
    let null_ok = min_null_ratio > NULL_ENTRY_RATIO;
    MembershipReport {
        structure,
        max_residual,
        residual_tol: tol,
        residual_ok,
        rank: info.rank,
        expected_rank,
        rank_tol: DEFAULT_RANK_TOL,
        rank_ok,
        min_null_ratio,
        null_ok,
        passes: residual_ok && rank_ok && null_ok,
    }
}
