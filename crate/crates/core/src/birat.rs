//! Sampling points where both superpotential structures vanish, the
//! gauge-fixed section over each base, and the maps between the two bases.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::characters::{CharacterError, CharacterTable, Structure};
use crate::graph::{GraphError, WStructure};
use crate::lattice::LatticeVector;
use crate::nef::MirrorPair;
use crate::numeric::{
    block_null_vectors, entry_ratio, evaluate_w, first_factor, monomial, numeric_rank, relative_sums, second_factor,
    Complex64, NumericError, TorusPoint, DEFAULT_RANK_TOL, NULL_ENTRY_RATIO,
};

/// Retries allowed per sample before giving up.
pub const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BiratError {
    #[error("no admissible point after {attempts} attempts")]
    SamplingFailure { attempts: u64 },
    #[error("base point is outside the open set: {reason}")]
    NotInOmega { reason: String },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Characters(#[from] CharacterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Coordinates on the base of one structure: `M` for the first, the lattice
/// of `y2_lattice_basis` for the second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasePoint {
    pub structure: Structure,
    #[serde(serialize_with = "crate::numeric::serialize_complex")]
    pub values: Vec<Complex64>,
    #[serde(serialize_with = "crate::numeric::serialize_complex")]
    pub coefficients: Vec<Complex64>,
}

/// A sampled point and the number of draws it took.
#[derive(Debug, Clone, PartialEq)]
pub struct RSample {
    pub point: TorusPoint,
    pub attempts: u64,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    let modulus = 2f64.powf(rng.random_range(-1.0..=1.0));
    Complex64::from_polar(modulus, rng.random_range(0.0..TAU))
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random coordinates, then coefficients solved so that every row and column
/// sum of `(W)` vanishes. Attempt `i` uses seed `seed + i`.
pub fn sample_r_point(w: &WStructure, seed: u64) -> Result<RSample, BiratError> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        if let Some(point) = try_sample(w, &mut rng)? {
            return Ok(RSample {
                point,
                attempts: attempt + 1,
            });
        }
    }
    Err(BiratError::SamplingFailure { attempts: MAX_ATTEMPTS })
}

fn try_sample(w: &WStructure, rng: &mut ChaCha8Rng) -> Result<Option<TorusPoint>, BiratError> {
    let r = w.size();
    let coords: Vec<Complex64> = (0..w.rank()).map(|_| random_unit(rng)).collect();
    let fiber: Vec<Complex64> = (0..r).map(|_| random_unit(rng)).collect();
    let values = w
        .characters()
        .iter()
        .map(|c| Ok(monomial(&coords, &c.m)? * fiber[c.a]))
        .collect::<Result<Vec<_>, NumericError>>()?;

    // One column equation per block is implied by the others.
    let dropped: Vec<usize> = w.blocks().iter().map(|b| *b.last().expect("nonempty block")).collect();
    let columns: Vec<usize> = (0..r).filter(|b| !dropped.contains(b)).collect();
    let n = w.characters().len();
    let mut system = DMatrix::from_element(r + columns.len(), n, Complex64::zero());
    for (id, c) in w.characters().iter().enumerate() {
        system[(c.a, id)] = values[id];
        if let Some(pos) = columns.iter().position(|&b| b == c.b) {
            system[(r + pos, id)] = values[id];
        }
    }
    let null = numeric_rank(&system, DEFAULT_RANK_TOL).right_null;
    if null.is_empty() {
        return Ok(None);
    }
    let mut c = DVector::from_element(n, Complex64::zero());
    for v in &null {
        c += v * gaussian(rng);
    }
    if entry_ratio(&c) <= NULL_ENTRY_RATIO {
        return Ok(None);
    }
    let point = TorusPoint {
        coords,
        fiber,
        coefficients: c.iter().copied().collect(),
        repaired_blocks: Vec::new(),
    };
    let wm = evaluate_w(w, &point)?;
    if wm.rank.rank != r - w.beta() {
        return Ok(None);
    }
    for structure in [Structure::First, Structure::Second] {
        let ok = block_null_vectors(w, &wm.matrix, structure)
            .iter()
            .all(|v| v.as_ref().is_some_and(|v| entry_ratio(v) > NULL_ENTRY_RATIO));
        if !ok {
            return Ok(None);
        }
    }
    Ok(Some(point))
}

/// `((n_j)_i)_j` for each coordinate `i`.
fn fiber_exponents(w: &WStructure) -> Vec<LatticeVector> {
    (0..w.rank())
        .map(|i| LatticeVector::new(w.translations().iter().map(|n| n.entries()[i].clone()).collect()))
        .collect()
}

/// The image of `t` on the base of `structure`.
pub fn project(w: &WStructure, t: &TorusPoint, structure: Structure) -> Result<BasePoint, BiratError> {
    t.check(w)?;
    let values = match structure {
        Structure::First => t.coords.clone(),
        Structure::Second => fiber_exponents(w)
            .iter()
            .zip(&t.coords)
            .map(|(u, ti)| Ok(ti * monomial(&t.fiber, u)?))
            .collect::<Result<Vec<_>, NumericError>>()?,
    };
    Ok(BasePoint {
        structure,
        values,
        coefficients: t.coefficients.clone(),
    })
}

/// The point above `y` whose fiber coordinates are the per-block null vector
/// of the factor matrix, scaled to 1 at the last index of each block.
pub fn gauge_section(w: &WStructure, y: &BasePoint) -> Result<TorusPoint, BiratError> {
    let f = match y.structure {
        Structure::First => first_factor(w, &y.values, &y.coefficients)?,
        Structure::Second => second_factor(w, &y.values, &y.coefficients)?,
    };
    let expected = w.size() - w.beta();
    let rank = numeric_rank(&f, DEFAULT_RANK_TOL).rank;
    if rank != expected {
        return Err(BiratError::NotInOmega {
            reason: format!("factor matrix has rank {rank}, expected {expected}"),
        });
    }
    let mut x = vec![Complex64::zero(); w.size()];
    for (j, (block, v)) in w
        .blocks()
        .iter()
        .zip(block_null_vectors(w, &f, y.structure))
        .enumerate()
    {
        let v = v.ok_or_else(|| BiratError::NotInOmega {
            reason: format!("block {} has no one-dimensional null space", j + 1),
        })?;
        if entry_ratio(&v) <= NULL_ENTRY_RATIO {
            return Err(BiratError::NotInOmega {
                reason: format!("null vector of block {} has a vanishing entry", j + 1),
            });
        }
        let last = v[v.len() - 1];
        for (p, &k) in block.iter().enumerate() {
            x[k] = v[p] / last;
        }
    }
    let coords = match y.structure {
        Structure::First => y.values.clone(),
        Structure::Second => fiber_exponents(w)
            .iter()
            .zip(&y.values)
            .map(|(u, zi)| Ok(zi / monomial(&x, u)?))
            .collect::<Result<Vec<_>, NumericError>>()?,
    };
    Ok(TorusPoint {
        coords,
        fiber: x,
        coefficients: y.coefficients.clone(),
        repaired_blocks: Vec::new(),
    })
}

fn cross(w: &WStructure, y: &BasePoint, from: Structure, to: Structure) -> Result<BasePoint, BiratError> {
    if y.structure != from {
        return Err(BiratError::NotInOmega {
            reason: format!("expected a {from:?} base point"),
        });
    }
    project(w, &gauge_section(w, y)?, to)
}

/// First base to second: gauge-fix, then project.
pub fn phi(w: &WStructure, y1: &BasePoint) -> Result<BasePoint, BiratError> {
    cross(w, y1, Structure::First, Structure::Second)
}

/// Second base to first.
pub fn psi(w: &WStructure, y2: &BasePoint) -> Result<BasePoint, BiratError> {
    cross(w, y2, Structure::Second, Structure::First)
}

/// `max |a_i - b_i| / max |b_i|`.
pub fn relative_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let worst = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Largest relative row sum of `F1` (first) or column sum of `F2` (second).
pub fn membership_residual(w: &WStructure, y: &BasePoint) -> Result<f64, BiratError> {
    let f = match y.structure {
        Structure::First => first_factor(w, &y.values, &y.coefficients)?,
        Structure::Second => second_factor(w, &y.values, &y.coefficients)?,
    };
    Ok(relative_sums(&f, y.structure))
}

/// Residuals for one accepted sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResiduals {
    pub attempts: u64,
    pub membership1: f64,
    pub membership2: f64,
    /// `phi(pi1(t))` against `pi2(t)`.
    pub phi_projection: f64,
    /// `psi(pi2(t))` against `pi1(t)`.
    pub psi_projection: f64,
    pub psi_phi: f64,
    pub phi_psi: f64,
    pub torsor: f64,
}

impl SampleResiduals {
    pub fn max(&self) -> f64 {
        [
            self.membership1,
            self.membership2,
            self.phi_projection,
            self.psi_projection,
            self.psi_phi,
            self.phi_psi,
            self.torsor,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks one sampled point: membership of both projections, both round
/// trips, and that `phi` agrees with projecting a randomly block-rescaled
/// point.
pub fn check_sample(w: &WStructure, sample: &RSample, seed: u64) -> Result<SampleResiduals, BiratError> {
    let t = &sample.point;
    let y1 = project(w, t, Structure::First)?;
    let y2 = project(w, t, Structure::Second)?;
    let z = phi(w, &y1)?;
    let back1 = psi(w, &z)?;
    let y = psi(w, &y2)?;
    let back2 = phi(w, &y)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7035);
    let lambda: Vec<Complex64> = (0..w.beta()).map(|_| random_unit(&mut rng)).collect();
    let moved = project(w, &t.rescale_blocks(w, &lambda), Structure::Second)?;

    Ok(SampleResiduals {
        attempts: sample.attempts,
        membership1: membership_residual(w, &y1)?,
        membership2: membership_residual(w, &y2)?,
        phi_projection: relative_deviation(&z.values, &y2.values),
        psi_projection: relative_deviation(&y.values, &y1.values),
        psi_phi: relative_deviation(&back1.values, &y1.values),
        phi_psi: relative_deviation(&back2.values, &y2.values),
        torsor: relative_deviation(&moved.values, &z.values),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Samples the sampler produced.
    pub sampled: usize,
    /// Sampled points with every residual below `tol`.
    pub passed: usize,
    pub sampling_failures: usize,
    /// Sampled points where a map failed (outside the open set).
    pub map_failures: usize,
    pub total_attempts: u64,
    /// Rejected draws over all draws.
    pub retry_rate: f64,
    pub max_membership1: f64,
    pub max_membership2: f64,
    pub max_phi_projection: f64,
    pub max_psi_projection: f64,
    pub max_psi_phi: f64,
    pub max_phi_psi: f64,
    pub max_torsor: f64,
    pub all_passed: bool,
}

/// Seed of sample `i`.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64) << 32)
}

/// Builds the cell structure and runs [`roundtrip_check_w`].
pub fn roundtrip_check(mp: &MirrorPair, samples: usize, tol: f64, seed: u64) -> Result<RoundTripReport, BiratError> {
    let ct = CharacterTable::build_xi(mp)?;
    let w = WStructure::build(&ct)?;
    Ok(roundtrip_check_w(&w, samples, tol, seed))
}

pub fn roundtrip_check_w(w: &WStructure, samples: usize, tol: f64, seed: u64) -> RoundTripReport {
    let outcomes: Vec<Result<SampleResiduals, BiratError>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i);
            let sample = sample_r_point(w, s)?;
            check_sample(w, &sample, s)
        })
        .collect();

    let mut report = RoundTripReport {
        samples,
        seed,
        tol,
        sampled: 0,
        passed: 0,
        sampling_failures: 0,
        map_failures: 0,
        total_attempts: 0,
        retry_rate: 0.0,
        max_membership1: 0.0,
        max_membership2: 0.0,
        max_phi_projection: 0.0,
        max_psi_projection: 0.0,
        max_psi_phi: 0.0,
        max_phi_psi: 0.0,
        max_torsor: 0.0,
        all_passed: false,
    };
    for outcome in outcomes {
        match outcome {
            Ok(res) => {
                report.sampled += 1;
                report.total_attempts += res.attempts;
                if res.max() < tol {
                    report.passed += 1;
                }
                report.max_membership1 = report.max_membership1.max(res.membership1);
                report.max_membership2 = report.max_membership2.max(res.membership2);
                report.max_phi_projection = report.max_phi_projection.max(res.phi_projection);
                report.max_psi_projection = report.max_psi_projection.max(res.psi_projection);
                report.max_psi_phi = report.max_psi_phi.max(res.psi_phi);
                report.max_phi_psi = report.max_phi_psi.max(res.phi_psi);
                report.max_torsor = report.max_torsor.max(res.torsor);
            }
            Err(BiratError::SamplingFailure { attempts }) => {
                report.sampling_failures += 1;
                report.total_attempts += attempts;
            }
            Err(_) => {
                report.sampled += 1;
                report.map_failures += 1;
            }
        }
    }
    if report.total_attempts > 0 {
        let accepted = (report.sampled) as f64;
        report.retry_rate = 1.0 - accepted / report.total_attempts as f64;
    }
    report.all_passed = samples > 0 && report.passed == samples;
    report
}
