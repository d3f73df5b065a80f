//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.

mod common;

use std::time::{Duration, Instant};

use common::{cells, corpus, load, pair, v, MIRROR_FIXTURES};
use multimirror::{
    borisov_dual, build_witness, check_assumption2, classify_by_pairing, coarsen, evaluate_w, hermite_form,
    integer_kernel, perron, roundtrip_check, sample_r_point, BiratError, CharacterTable, Complex64, DGraph,
    ExtendedCharacter, LatticeMatrix, LatticeVector, MirrorPair, NumericError, Structure, WStructure,
};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        ensure!(elapsed < limit, "{detail}; took {elapsed:.2?}, limit {limit:?}");
    }
    Ok(format!("{detail} ({elapsed:.2?})"))
}

fn graph_of(mp: &MirrorPair) -> DGraph {
    let ct = CharacterTable::build_xi(mp).expect("table");
    DGraph::new(
        ct.cell_sizes()
            .iter()
            .map(|row| row.iter().map(|&s| s > 0).collect())
            .collect(),
    )
}

fn corpus_pairs() -> (usize, Vec<(String, MirrorPair)>) {
    let entries = corpus::corpus(usize::MAX);
    let mut pairs = corpus::mirror_pairs(&entries);
    pairs.extend(MIRROR_FIXTURES.iter().map(|n| (n.to_string(), pair(n))));
    (entries.len(), pairs)
}

fn ac1() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        let ct = CharacterTable::build_xi(&pair("bn51")).map_err(|e| e.to_string())?;
        let w = WStructure::build(&ct).map_err(|e| e.to_string())?;
        let g = w.graph();
        let cross = g.arrows().iter().filter(|(a, b)| a != b).count();
        ensure!(ct.len() == 8, "|Xi| = {}", ct.len());
        ensure!(ct.row_sizes() == [4, 4], "row sizes {:?}", ct.row_sizes());
        ensure!(ct.column_sizes() == [2, 6], "column sizes {:?}", ct.column_sizes());
        ensure!(ct.cell_sizes() == [[1, 3], [1, 3]], "cells {:?}", ct.cell_sizes());
        ensure!(
            g.len() == 2 && g.loops().len() == 2 && cross == 2,
            "graph {:?}",
            g.arrows()
        );
        ensure!(w.beta() == 1, "beta {}", w.beta());
        Ok("|Xi|=8, rows (4,4), columns (2,6), cells [[1,3],[1,3]], 2 loops, 2 cross arrows, beta=1".into())
    })
}

fn ac2() -> Outcome {
    let w = cells(&pair("bn51"));
    let wit = build_witness(&w).map_err(|e| e.to_string())?;
    let block = &wit.blocks[0];
    ensure!(
        block.adjacency == DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        "A = {}",
        block.adjacency
    );
    let p = block.perron.as_ref().ok_or("no Perron pair")?;
    ensure!((p.value - 1.0).abs() < 1e-10, "r = {}", p.value);
    let wm = evaluate_w(&w, &wit.point).map_err(|e| e.to_string())?;
    let target = [[-1.0, 1.0], [1.0, -1.0]];
    for a in 0..2 {
        for b in 0..2 {
            let err = (wm.matrix[(a, b)] - Complex64::new(target[a][b], 0.0)).norm();
            ensure!(err < 1e-12, "W[{a}][{b}] = {}", wm.matrix[(a, b)]);
        }
    }
    ensure!(wm.rank.rank == 1, "rank {}", wm.rank.rank);
    for (side, null) in [("left", &wm.rank.left_null), ("right", &wm.rank.right_null)] {
        ensure!(null.len() == 1, "{side} null space dimension {}", null.len());
        let n = &null[0];
        ensure!(
            (n[0] / n[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12,
            "{side} null vector {n}"
        );
    }
    Ok("A=[[0,1],[1,0]], r=1, W=[[-1,1],[1,-1]], rank 1, null vectors (1,1)/(1,1)".into())
}

fn ac3() -> Outcome {
    for name in MIRROR_FIXTURES {
        let mp = pair(name);
        for p in [mp.nabla1(), mp.nabla2(), mp.delta1(), mp.delta2()] {
            ensure!(
                &borisov_dual(&borisov_dual(p)) == p,
                "{name}: dual is not an involution"
            );
        }
        for (nabla, delta) in [(mp.nabla1(), mp.delta1()), (mp.nabla2(), mp.delta2())] {
            let polar = nabla.sum().polar_dual().map_err(|e| e.to_string())?;
            let polar = polar.to_lattice().ok_or("polar is not integral")?;
            ensure!(
                polar == delta.hull_of_union(),
                "{name}: polar of the sum differs from the union hull"
            );
        }
    }
    // Cells of the matrix (W) for the worked example, by row and column.
    let sorted = |raw: &[&[i64]]| -> Vec<LatticeVector> {
        let mut out: Vec<LatticeVector> = raw.iter().map(|m| v(m)).collect();
        out.sort();
        out
    };
    let expected1 = [
        sorted(&[&[0, 0], &[-1, 1], &[0, 1], &[1, 1]]),
        sorted(&[&[0, -1], &[-1, 0], &[1, 0], &[0, 0]]),
    ];
    let expected2 = [
        sorted(&[&[0, 0], &[0, -1]]),
        sorted(&[&[-1, 1], &[0, 1], &[1, 1], &[-1, 0], &[1, 0], &[0, 0]]),
    ];
    let mp = pair("bn51");
    for k in 0..2 {
        ensure!(
            mp.delta1().part(k).lattice_points() == expected1[k],
            "delta1 part {}",
            k + 1
        );
        ensure!(
            mp.delta2().part(k).lattice_points() == expected2[k],
            "delta2 part {}",
            k + 1
        );
    }
    Ok(format!(
        "{} fixtures; BN51 dual parts match the cells of (W)",
        MIRROR_FIXTURES.len()
    ))
}

fn ac4(pairs: &[(String, MirrorPair)], entries: usize, generation: Duration) -> Outcome {
    let limit = Duration::from_secs(60).saturating_sub(generation);
    timed(Some(limit), || {
        ensure!(entries >= 20, "corpus has only {entries} partitions");
        let mut checked = 0usize;
        for (name, mp) in pairs {
            let ct = CharacterTable::build_xi(mp).map_err(|e| format!("{name}: {e}"))?;
            for c in ct.characters() {
                let got = classify_by_pairing(&c.m, c.a, ct.translations()).map_err(|e| format!("{name}: {e}"))?;
                ensure!(
                    got == (c.a, c.b),
                    "{name}: {:?} classified {got:?}, expected {:?}",
                    c.m,
                    (c.a, c.b)
                );
                checked += 1;
            }
        }
        Ok(format!(
            "{entries} partitions, {} pairs, {checked} characters agree, corpus built in {generation:.2?}",
            pairs.len()
        ))
    })
}

fn ac5(pairs: &[(String, MirrorPair)]) -> Outcome {
    let mut components = 0;
    for (name, mp) in pairs {
        let report = cells(mp).verify_connectivity();
        ensure!(report.holds, "{name}: {report:?}");
        components += report.components.len();
    }
    Ok(format!(
        "{} pairs, {components} components, each one looped SCC",
        pairs.len()
    ))
}

fn ac6(pairs: &[(String, MirrorPair)]) -> Outcome {
    let mut blocks = 0;
    for (name, mp) in pairs {
        let sums = cells(mp).block_translation_sums();
        ensure!(sums.iter().all(LatticeVector::is_zero), "{name}: block sums {sums:?}");
        blocks += sums.len();
    }
    Ok(format!("{} pairs, {blocks} block sums all zero", pairs.len()))
}

fn ac7() -> Outcome {
    timed(Some(Duration::from_secs(30)), || {
        let mut details = Vec::new();
        for name in ["bn51", "stacked-2x"] {
            let r = roundtrip_check(&pair(name), 100, 1e-9, 0).map_err(|e| format!("{name}: {e}"))?;
            ensure!(r.sampled == 100, "{name}: only {} samples drawn", r.sampled);
            ensure!(r.passed == r.sampled && r.all_passed, "{name}: {r:?}");
            ensure!(r.retry_rate < 0.1, "{name}: retry rate {}", r.retry_rate);
            let worst = [
                r.max_membership1,
                r.max_membership2,
                r.max_psi_phi,
                r.max_phi_psi,
                r.max_torsor,
            ]
            .into_iter()
            .fold(0.0, f64::max);
            details.push(format!(
                "{name} 100/100, retry {:.2}, max residual {worst:.1e}",
                r.retry_rate
            ));
        }
        Ok(details.join("; "))
    })
}

fn ac8() -> Outcome {
    for name in MIRROR_FIXTURES {
        let mp = pair(name);
        let w = cells(&mp);
        let classes: Vec<Vec<usize>> = w
            .blocks()
            .iter()
            .map(|b| {
                let mut c: Vec<usize> = b.iter().map(|&k| w.labels()[k]).collect();
                c.sort();
                c
            })
            .collect();
        let fine = graph_of(&mp);
        let coarse = coarsen(&mp, &classes).map_err(|e| format!("{name}: {e}"))?;
        let g = graph_of(coarse.pair());
        ensure!(g.is_loop_only(), "{name}: coarse graph {:?}", g.arrows());
        ensure!(g == fine.condensation(), "{name}: coarse graph is not the condensation");
        let singletons: Vec<Vec<usize>> = (0..mp.len()).map(|k| vec![k]).collect();
        let same = coarsen(&mp, &singletons).map_err(|e| format!("{name}: {e}"))?;
        ensure!(same.pair() == &mp, "{name}: singleton coarsening changed the pair");
    }
    Ok(format!("{} fixtures", MIRROR_FIXTURES.len()))
}

// ---- AC9 oracles ----

fn irreducible_oracle(a: &[Vec<u32>]) -> bool {
    let n = a.len();
    // Reachability closure of I + A.
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j || a[i][j] > 0).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                reach[i][j] |= reach[i][k] && reach[k][j];
            }
        }
    }
    reach.iter().all(|row| row.iter().all(|&x| x))
}

/// Largest real root of the characteristic polynomial.
fn spectral_radius_oracle(a: &[Vec<u32>]) -> f64 {
    let f = |i: usize, j: usize| f64::from(a[i][j]);
    if a.len() == 2 {
        let (p, q, r, s) = (f(0, 0), f(0, 1), f(1, 0), f(1, 1));
        return (p + s) / 2.0 + (((p - s) / 2.0).powi(2) + q * r).sqrt();
    }
    let tr = f(0, 0) + f(1, 1) + f(2, 2);
    let minors = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0) + f(0, 0) * f(2, 2) - f(0, 2) * f(2, 0) + f(1, 1) * f(2, 2)
        - f(1, 2) * f(2, 1);
    let det = f(0, 0) * (f(1, 1) * f(2, 2) - f(1, 2) * f(2, 1)) - f(0, 1) * (f(1, 0) * f(2, 2) - f(1, 2) * f(2, 0))
        + f(0, 2) * (f(1, 0) * f(2, 1) - f(1, 1) * f(2, 0));
    let p = |x: f64| ((x - tr) * x + minors) * x - det;
    let dp = |x: f64| (3.0 * x - 2.0 * tr) * x + minors;
    // Newton from above the largest root converges monotonically.
    let mut x = (0..3).map(|i| (0..3).map(|j| f(i, j)).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    for _ in 0..200 {
        let d = dp(x);
        if d == 0.0 {
            break;
        }
        let next = x - p(x) / d;
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

fn perron_oracle_check() -> Result<usize, String> {
    let mut count = 0;
    for n in [2usize, 3] {
        for code in 0..4u64.pow((n * n) as u32) {
            let mut c = code;
            let a: Vec<Vec<u32>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let e = (c % 4) as u32;
                            c /= 4;
                            e
                        })
                        .collect()
                })
                .collect();
            if !irreducible_oracle(&a) {
                continue;
            }
            let m = DMatrix::from_fn(n, n, |i, j| f64::from(a[i][j]));
            let p = perron(&m).map_err(|e| format!("{a:?}: {e}"))?;
            let expected = spectral_radius_oracle(&a);
            ensure!(
                (p.value - expected).abs() < 1e-9,
                "{a:?}: perron {} vs {expected}",
                p.value
            );
            count += 1;
        }
    }
    Ok(count)
}

/// Hermite form by elementary row operations over i128.
fn naive_hermite(mut m: Vec<Vec<i128>>, ncols: usize) -> Vec<Vec<i128>> {
    let rows = m.len();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row == rows {
            break;
        }
        loop {
            let smallest = (pivot_row..rows)
                .filter(|&i| m[i][col] != 0)
                .min_by_key(|&i| m[i][col].abs());
            let Some(s) = smallest else { break };
            m.swap(pivot_row, s);
            let mut done = true;
            for i in pivot_row + 1..rows {
                let q = m[i][col].div_euclid(m[pivot_row][col]);
                if q != 0 {
                    for j in 0..ncols {
                        m[i][j] -= q * m[pivot_row][j];
                    }
                }
                done &= m[i][col] == 0;
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for x in &mut m[pivot_row] {
                *x = -*x;
            }
        }
        let p = m[pivot_row][col];
        for i in 0..pivot_row {
            let q = m[i][col].div_euclid(p);
            for j in 0..ncols {
                m[i][j] -= q * m[pivot_row][j];
            }
        }
        pivot_row += 1;
    }
    m
}

fn to_i128(m: &LatticeMatrix) -> Vec<Vec<i128>> {
    m.rows()
        .iter()
        .map(|r| r.entries().iter().map(|e| e.to_i128().expect("small")).collect())
        .collect()
}

fn from_i128(rows: &[Vec<i128>], ncols: usize) -> LatticeMatrix {
    let rows = rows
        .iter()
        .map(|r| LatticeVector::new(r.iter().map(|&e| BigInt::from(e)).collect()))
        .collect();
    LatticeMatrix::new(rows, ncols).expect("consistent widths")
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> LatticeMatrix {
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-bound..=bound)).collect())
        .collect();
    let refs: Vec<&[i64]> = data.iter().map(Vec::as_slice).collect();
    LatticeMatrix::from_i64(&refs)
}

/// Every annihilator of `m` with entries in `[-bound, bound]`.
fn box_annihilators(m: &[Vec<i128>], ncols: usize, bound: i128) -> Vec<Vec<i128>> {
    let side = (2 * bound + 1) as u64;
    (0..side.pow(ncols as u32))
        .filter_map(|mut code| {
            let x: Vec<i128> = (0..ncols)
                .map(|_| {
                    let e = (code % side) as i128 - bound;
                    code /= side;
                    e
                })
                .collect();
            let zero = m
                .iter()
                .all(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum::<i128>() == 0);
            (zero && x.iter().any(|&e| e != 0)).then_some(x)
        })
        .collect()
}

fn lattice_oracle_check() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let rows = rng.random_range(1..=4);
        let cols = rng.random_range(1..=4);
        let m = random_matrix(&mut rng, rows, cols, 6);
        let (h, _) = hermite_form(&m);
        let expected = from_i128(&naive_hermite(to_i128(&m), cols), cols);
        ensure!(h == expected, "case {case}: hermite form of {m:?}");

        // Small kernels are generated inside a modest box.
        let (kr, kc, bound) = if case % 2 == 0 {
            (rng.random_range(1..=3), rng.random_range(1..=3), 8)
        } else {
            (1, 4, 4)
        };
        let m = random_matrix(&mut rng, kr, kc, 2);
        let k = integer_kernel(&m);
        let ann = box_annihilators(&to_i128(&m), kc, bound);
        let oracle: Vec<Vec<i128>> = naive_hermite(ann, kc)
            .into_iter()
            .filter(|r| r.iter().any(|&e| e != 0))
            .collect();
        ensure!(k == from_i128(&oracle, kc), "case {case}: kernel of {m:?}");
    }
    Ok(200)
}

fn ac9() -> Outcome {
    let perron_count = perron_oracle_check()?;
    let lattice_count = lattice_oracle_check()?;
    Ok(format!(
        "{perron_count} irreducible matrices, {lattice_count} hermite and kernel cases"
    ))
}

fn ac10() -> Outcome {
    let mp = load("degenerate-singleton").mirror_pair().map_err(|e| e.to_string())?;
    let w = cells(&mp);
    match build_witness(&w) {
        Err(NumericError::DegenerateBlock { .. }) => {}
        other => return Err(format!("build_witness gave {other:?}")),
    }
    match sample_r_point(&w, 0) {
        Err(BiratError::SamplingFailure { .. }) => {}
        other => return Err(format!("sample_r_point gave {other:?}")),
    }
    // Rank-2 segment: a single part whose dual is the segment from 0 to e2.
    let segment = CharacterTable::from_characters(
        2,
        vec![v(&[0, 0])],
        vec![
            ExtendedCharacter {
                m: v(&[0, 0]),
                a: 0,
                b: 0,
            },
            ExtendedCharacter {
                m: v(&[0, 1]),
                a: 0,
                b: 0,
            },
        ],
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        !check_assumption2(&segment, Structure::First),
        "segment passes assumption 2"
    );
    Ok("DegenerateBlock, SamplingFailure, assumption 2 fails on the segment".into())
}

fn main() {
    let start = Instant::now();
    let (entries, pairs) = corpus_pairs();
    let generation = start.elapsed();
    let results: Vec<(&str, &str, Outcome)> = vec![
        ("AC1", "worked example structure", ac1()),
        ("AC2", "worked example witness", ac2()),
        ("AC3", "duality", ac3()),
        ("AC4", "pairing classification", ac4(&pairs, entries, generation)),
        ("AC5", "strong connectivity", ac5(&pairs)),
        ("AC6", "block translation sums", ac6(&pairs)),
        ("AC7", "round trip", ac7()),
        ("AC8", "coarsening", ac8()),
        ("AC9", "numeric and lattice oracles", ac9()),
        ("AC10", "error paths", ac10()),
    ];
    let mut failed = 0;
    for (id, title, outcome) in &results {
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.2?})",
        results.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
