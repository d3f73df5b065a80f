//! A deterministic corpus of small nef-partitions.
//!
//! Parts are `conv(0, V_k)` for set partitions `V_1, ..., V_r` of the vertices
//! of small reflexive polygons and 3-polytopes; a partition is kept when the
//! Minkowski sum of its parts is reflexive.

#![allow(dead_code)]

use multimirror::{find_translations, LatticePolytope, LatticeVector, MirrorPair, NefPartition, Side};

pub struct CorpusEntry {
    pub name: String,
    pub partition: NefPartition,
    pub translations: Vec<Vec<LatticeVector>>,
}

fn poly(name: &str, raw: &[&[i64]]) -> (String, LatticePolytope) {
    (name.to_string(), LatticePolytope::from_i64(raw).expect("nonempty"))
}

/// Reflexive polygons and 3-polytopes, with polar duals added.
pub fn reflexive_polytopes() -> Vec<(String, LatticePolytope)> {
    let candidates = vec![
        poly("p2", &[&[1, 0], &[0, 1], &[-1, -1]]),
        poly("p1xp1", &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]]),
        poly("dp7", &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1], &[1, 1]]),
        poly("dp6", &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1], &[1, 1], &[-1, -1]]),
        poly("f1", &[&[1, 0], &[0, 1], &[-1, 1], &[0, -1]]),
        poly("bn51-hull", &[&[0, -1], &[-1, 1], &[1, 1]]),
        poly("p112", &[&[1, 0], &[0, 1], &[-1, -2]]),
        poly("simplex-111", &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]]),
        poly("simplex-112", &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -2]]),
        poly(
            "octahedron",
            &[
                &[1, 0, 0],
                &[-1, 0, 0],
                &[0, 1, 0],
                &[0, -1, 0],
                &[0, 0, 1],
                &[0, 0, -1],
            ],
        ),
        poly(
            "p2-prism",
            &[
                &[1, 0, 1],
                &[0, 1, 1],
                &[-1, -1, 1],
                &[1, 0, -1],
                &[0, 1, -1],
                &[-1, -1, -1],
            ],
        ),
        poly(
            "p2-bipyramid",
            &[&[1, 0, 0], &[0, 1, 0], &[-1, -1, 0], &[0, 0, 1], &[0, 0, -1]],
        ),
    ];
    let mut out: Vec<(String, LatticePolytope)> = Vec::new();
    for (name, p) in candidates {
        if !p.is_reflexive() {
            continue;
        }
        let dual = p
            .polar_dual()
            .expect("interior origin")
            .to_lattice()
            .expect("reflexive");
        for (n, q) in [(name.clone(), p), (format!("{name}-dual"), dual)] {
            if !out.iter().any(|(_, e)| *e == q) {
                out.push((n, q));
            }
        }
    }
    out
}

/// Set partitions of `0..n` into exactly `r` nonempty blocks, as restricted
/// growth strings.
pub fn set_partitions(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, r: usize, used: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if used == r {
                out.push(cur.clone());
            }
            return;
        }
        if r - used > n - i {
            return;
        }
        for b in 0..(used + 1).min(r) {
            cur.push(b);
            go(i + 1, n, r, used.max(b + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, 0, &mut Vec::new(), &mut out);
    out
}

/// Nef-partitions `conv(0, V_k)` of `q` with `r` parts.
pub fn vertex_nef_partitions(q: &LatticePolytope, r: usize) -> Vec<NefPartition> {
    let verts = q.vertices();
    let origin = LatticeVector::zero(q.rank());
    set_partitions(verts.len(), r)
        .into_iter()
        .filter_map(|labels| {
            let parts: Vec<LatticePolytope> = (0..r)
                .map(|k| {
                    let mut pts = vec![origin.clone()];
                    pts.extend(
                        labels
                            .iter()
                            .zip(verts)
                            .filter(|(l, _)| **l == k)
                            .map(|(_, v)| v.clone()),
                    );
                    LatticePolytope::hull(&pts).expect("nonempty")
                })
                .collect();
            NefPartition::validate(parts, Side::Nabla).ok()
        })
        .collect()
}

/// At most `per_polytope` partitions for each polytope and part count.
pub fn corpus(per_polytope: usize) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for (name, q) in reflexive_polytopes() {
        let max_r = if q.rank() == 2 { 2 } else { 3 };
        for r in 2..=max_r {
            if q.vertices().len() > 10 {
                continue;
            }
            for (i, partition) in vertex_nef_partitions(&q, r).into_iter().take(per_polytope).enumerate() {
                let translations = find_translations(&partition).expect("translations validate");
                out.push(CorpusEntry {
                    name: format!("{name}/r{r}/{i}"),
                    partition,
                    translations,
                });
            }
        }
    }
    out
}

/// Every multiple-mirror pair of the corpus.
pub fn mirror_pairs(entries: &[CorpusEntry]) -> Vec<(String, MirrorPair)> {
    entries
        .iter()
        .flat_map(|e| {
            e.translations.iter().enumerate().map(move |(i, t)| {
                (
                    format!("{}/t{i}", e.name),
                    MirrorPair::new(e.partition.clone(), t.clone()).expect("found translations are valid"),
                )
            })
        })
        .collect()
}
