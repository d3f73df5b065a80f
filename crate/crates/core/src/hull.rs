//! Exact facet enumeration for full-dimensional point sets.
//!
//! Double description: the facets of `conv(P)` in `R^k` are the extreme
//! rays of the cone `{(a, b) : a.p + b >= 0 for all p in P}`. Points are
//! inserted one at a time, each one cutting the current cone; new rays come
//! from adjacent pairs on opposite sides of the cut.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::lattice::{integer_kernel, rank_of, LatticeMatrix, LatticeVector};

/// One facet `a.y + b >= 0`, with the indices of the input points on it.
#[derive(Debug, Clone)]
pub(crate) struct RawFacet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
    pub incident: Vec<usize>,
}

struct Ray {
    coords: Vec<BigInt>,
    // Sorted indices of inserted points that are tight at this ray.
    tight: Vec<usize>,
}

fn homogenize(p: &[BigInt]) -> Vec<BigInt> {
    let mut q = p.to_vec();
    q.push(BigInt::from(1));
    q
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn make_primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    LatticeVector::new(v).primitive().into_entries()
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Facets of the hull of `points` (distinct, affinely spanning `R^k`, k >= 1).
pub(crate) fn facets(points: &[Vec<BigInt>]) -> Vec<RawFacet> {
    let k = points[0].len();
    let hom: Vec<Vec<BigInt>> = points.iter().map(|p| homogenize(p)).collect();

    // Greedily pick k+1 linearly independent homogenized points.
    let mut basis: Vec<usize> = Vec::with_capacity(k + 1);
    for (i, q) in hom.iter().enumerate() {
        let mut rows: Vec<Vec<BigInt>> = basis.iter().map(|&j| hom[j].clone()).collect();
        rows.push(q.clone());
        if rank_of(rows) == basis.len() + 1 {
            basis.push(i);
            if basis.len() == k + 1 {
                break;
            }
        }
    }
    assert_eq!(basis.len(), k + 1, "points do not span the space");

    // Initial simplicial cone: ray j is tight at every basis point except j.
    let mut rays: Vec<Ray> = Vec::with_capacity(k + 1);
    for (jpos, &j) in basis.iter().enumerate() {
        let others: Vec<LatticeVector> = basis
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != jpos)
            .map(|(_, &i)| LatticeVector::new(hom[i].clone()))
            .collect();
        let ker = integer_kernel(&LatticeMatrix::new(others, k + 1).expect("rectangular"));
        debug_assert_eq!(ker.nrows(), 1);
        let mut r = ker.row(0).entries().to_vec();
        if dot(&r, &hom[j]).is_negative() {
            r = r.into_iter().map(|e| -e).collect();
        }
        let mut tight: Vec<usize> = basis.iter().copied().filter(|&i| i != j).collect();
        tight.sort_unstable();
        rays.push(Ray { coords: r, tight });
    }

    let mut inserted: Vec<usize> = basis.clone();
    inserted.sort_unstable();
    for (idx, q) in hom.iter().enumerate() {
        if basis.contains(&idx) {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| dot(&r.coords, q)).collect();
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();

        for &p in &pos {
            for &n in &neg {
                let common = intersect_sorted(&rays[p].tight, &rays[n].tight);
                if common.len() + 1 < k {
                    continue;
                }
                let rows: Vec<Vec<BigInt>> = common.iter().map(|&i| hom[i].clone()).collect();
                if rank_of(rows) != k - 1 {
                    continue;
                }
                let vp = &values[p];
                let vn = &values[n];
                let coords: Vec<BigInt> = rays[n]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(rn, rp)| vp * rn - vn * rp)
                    .collect();
                let mut tight = common;
                tight.push(idx);
                tight.sort_unstable();
                next.push(Ray {
                    coords: make_primitive(coords),
                    tight,
                });
            }
        }
        for (i, mut ray) in rays.into_iter().enumerate() {
            if values[i].is_negative() {
                continue;
            }
            if values[i].is_zero() {
                ray.tight.push(idx);
                ray.tight.sort_unstable();
            }
            next.push(ray);
        }
        rays = next;
        inserted.push(idx);
    }

    rays.into_iter()
        .map(|mut r| {
            let offset = r.coords.pop().expect("homogeneous coordinate");
            RawFacet {
                normal: r.coords,
                offset,
                incident: r.tight,
            }
        })
        .collect()
}
