//! JSON input documents and the combined analysis report.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birat::{roundtrip_check_w, RoundTripReport};
use crate::characters::{
    check_assumption1, check_assumption2, classify_by_pairing, CharacterRecord, CharacterTable, Structure,
};
use crate::graph::{BlockReport, ConnectivityReport, WStructure};
use crate::lattice::LatticeVector;
use crate::nef::{find_translations, MirrorPair, NefError, NefPartition, Side};
use crate::numeric::{build_witness, evaluate_w, verify_in_o1, verify_in_o2, Complex64, MembershipReport, TorusPoint};
use crate::polytope::LatticePolytope;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    rank: usize,
    #[serde(alias = "parts")]
    nabla: Option<Vec<Vec<LatticeVector>>>,
    translations: Option<Vec<LatticeVector>>,
    delta1: Option<Vec<Vec<LatticeVector>>>,
    delta2: Option<Vec<Vec<LatticeVector>>>,
}

/// A parsed input document; parts are hulled but not yet validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Input {
    Nabla {
        rank: usize,
        nabla: Vec<LatticePolytope>,
        #[serde(skip_serializing_if = "Option::is_none")]
        translations: Option<Vec<LatticeVector>>,
    },
    Deltas {
        rank: usize,
        delta1: Vec<LatticePolytope>,
        delta2: Vec<LatticePolytope>,
    },
}

fn polytopes(field: &str, rank: usize, raw: Vec<Vec<LatticeVector>>) -> Result<Vec<LatticePolytope>, InputError> {
    if raw.is_empty() {
        return Err(field_error(field, "needs at least one part"));
    }
    raw.into_iter()
        .enumerate()
        .map(|(k, pts)| {
            let name = format!("{field}[{k}]");
            if let Some(p) = pts.iter().find(|p| p.rank() != rank) {
                return Err(field_error(name, format!("point {p} does not have rank {rank}")));
            }
            LatticePolytope::hull(&pts).map_err(|e| field_error(name, e.to_string()))
        })
        .collect()
}

impl Input {
    pub fn parse(text: &str) -> Result<Input, InputError> {
        let raw: RawInput = serde_json::from_str(text)?;
        if raw.rank == 0 {
            return Err(field_error("rank", "must be positive"));
        }
        match (raw.nabla, raw.delta1, raw.delta2) {
            (Some(nabla), None, None) => {
                let nabla = polytopes("nabla", raw.rank, nabla)?;
                if let Some(t) = &raw.translations {
                    if t.len() != nabla.len() {
                        return Err(field_error(
                            "translations",
                            format!("expected {} vectors, got {}", nabla.len(), t.len()),
                        ));
                    }
                    if let Some(n) = t.iter().find(|n| n.rank() != raw.rank) {
                        return Err(field_error(
                            "translations",
                            format!("{n} does not have rank {}", raw.rank),
                        ));
                    }
                }
                Ok(Input::Nabla {
                    rank: raw.rank,
                    nabla,
                    translations: raw.translations,
                })
            }
            (None, Some(d1), Some(d2)) => {
                if raw.translations.is_some() {
                    return Err(field_error("translations", "not allowed with delta1/delta2"));
                }
                let delta1 = polytopes("delta1", raw.rank, d1)?;
                let delta2 = polytopes("delta2", raw.rank, d2)?;
                if delta1.len() != delta2.len() {
                    return Err(field_error("delta2", "must have as many parts as delta1"));
                }
                Ok(Input::Deltas {
                    rank: raw.rank,
                    delta1,
                    delta2,
                })
            }
            (None, None, None) => Err(field_error("nabla", "missing (or give delta1 and delta2)")),
            (Some(_), _, _) => Err(field_error("delta1", "cannot be combined with nabla")),
            (None, Some(_), None) => Err(field_error("delta2", "missing")),
            (None, None, Some(_)) => Err(field_error("delta1", "missing")),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Input::Nabla { rank, .. } | Input::Deltas { rank, .. } => *rank,
        }
    }

    /// The nabla partition, for the nabla form only.
    pub fn nabla_partition(&self) -> Option<Result<NefPartition, NefError>> {
        match self {
            Input::Nabla { nabla, .. } => Some(NefPartition::validate(nabla.clone(), Side::Nabla)),
            Input::Deltas { .. } => None,
        }
    }

    /// The mirror pair described by the input; without explicit translations
    /// the first tuple found is used.
    pub fn mirror_pair(&self) -> Result<MirrorPair, NefError> {
        self.mirror_pair_with_search().map(|(mp, _)| mp)
    }

    fn mirror_pair_with_search(&self) -> Result<(MirrorPair, Option<Vec<Vec<LatticeVector>>>), NefError> {
        match self {
            Input::Nabla {
                nabla, translations, ..
            } => {
                let p = NefPartition::validate(nabla.clone(), Side::Nabla)?;
                match translations {
                    Some(t) => Ok((MirrorPair::new(p, t.clone())?, None)),
                    None => {
                        let found = find_translations(&p)?;
                        let first = found.first().cloned().ok_or(NefError::AllTranslationsZero)?;
                        Ok((MirrorPair::new(p, first)?, Some(found)))
                    }
                }
            }
            Input::Deltas { delta1, delta2, .. } => {
                let d1 = NefPartition::validate(delta1.clone(), Side::Delta)?;
                let d2 = NefPartition::validate(delta2.clone(), Side::Delta)?;
                Ok((MirrorPair::from_deltas(d1, d2)?, None))
            }
        }
    }
}

/// A report section that either ran or was skipped with a reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "result", rename_all = "lowercase")]
pub enum Section<T> {
    Done(T),
    Skipped { reason: String },
}

impl<T> Section<T> {
    pub fn skipped(reason: impl Into<String>) -> Self {
        Section::Skipped { reason: reason.into() }
    }

    pub fn done(&self) -> Option<&T> {
        match self {
            Section::Done(t) => Some(t),
            Section::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionSummary {
    pub rank: usize,
    pub side: Side,
    pub parts: Vec<LatticePolytope>,
    pub lattice_point_counts: Vec<usize>,
    pub sum: LatticePolytope,
}

impl PartitionSummary {
    pub fn of(p: &NefPartition) -> Self {
        PartitionSummary {
            rank: p.rank(),
            side: p.side(),
            parts: p.parts().to_vec(),
            lattice_point_counts: p.parts().iter().map(|q| q.lattice_points().len()).collect(),
            sum: p.sum().clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSummary {
    pub translations: Vec<LatticeVector>,
    /// All tuples found by the search, when the input gave none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<Vec<Vec<LatticeVector>>>,
    pub trivial: bool,
    pub nabla1: PartitionSummary,
    pub nabla2: PartitionSummary,
    pub delta1: PartitionSummary,
    pub delta2: PartitionSummary,
}

impl PairSummary {
    pub fn of(mp: &MirrorPair, found: Option<Vec<Vec<LatticeVector>>>) -> Self {
        PairSummary {
            translations: mp.translations().to_vec(),
            found,
            trivial: mp.is_trivial(),
            nabla1: PartitionSummary::of(mp.nabla1()),
            nabla2: PartitionSummary::of(mp.nabla2()),
            delta1: PartitionSummary::of(mp.delta1()),
            delta2: PartitionSummary::of(mp.delta2()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterSummary {
    pub count: usize,
    pub cell_sizes: Vec<Vec<usize>>,
    pub row_sizes: Vec<usize>,
    pub column_sizes: Vec<usize>,
    /// Whether the pairing rule reproduces every cell.
    pub pairing_agrees: bool,
    pub characters: Vec<CharacterRecord>,
}

impl CharacterSummary {
    pub fn of(ct: &CharacterTable) -> Self {
        let pairing_agrees = ct
            .characters()
            .iter()
            .all(|c| classify_by_pairing(&c.m, c.a, ct.translations()) == Ok((c.a, c.b)));
        CharacterSummary {
            count: ct.len(),
            cell_sizes: ct.cell_sizes(),
            row_sizes: ct.row_sizes(),
            column_sizes: ct.column_sizes(),
            pairing_agrees,
            characters: ct.export(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssumptionSummary {
    /// Column matched to each row, counted from 1.
    pub matching: Vec<usize>,
    pub generates_first: bool,
    pub generates_second: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub blocks: BlockReport,
    pub connectivity: ConnectivityReport,
    pub block_translation_sums: Vec<LatticeVector>,
    pub dot: String,
}

impl GraphSummary {
    pub fn of(w: &WStructure) -> Self {
        GraphSummary {
            blocks: w.block_report(),
            connectivity: w.verify_connectivity(),
            block_translation_sums: w.block_translation_sums(),
            dot: w.to_dot(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSummary {
    /// Perron root of each block's arrow matrix; `None` for singletons.
    pub perron_values: Vec<Option<f64>>,
    /// Singleton blocks using the sum-zero coefficient repair, from 1.
    pub repaired_blocks: Vec<usize>,
    /// Evaluated `(W)` as `[re, im]` pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub rank: usize,
    pub first: MembershipReport,
    pub second: MembershipReport,
    pub point: TorusPoint,
}

fn matrix_pairs(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Builds and verifies the witness point.
pub fn witness_summary(w: &WStructure, tol: f64) -> Result<WitnessSummary, crate::numeric::NumericError> {
    let wit = build_witness(w)?;
    let wm = evaluate_w(w, &wit.point)?;
    Ok(WitnessSummary {
        perron_values: wit.blocks.iter().map(|b| b.perron.as_ref().map(|p| p.value)).collect(),
        repaired_blocks: wit.point.repaired_blocks.iter().map(|j| j + 1).collect(),
        matrix: matrix_pairs(&wm.matrix),
        rank: wm.rank.rank,
        first: verify_in_o1(w, &wit.point, tol)?,
        second: verify_in_o2(w, &wit.point, tol)?,
        point: wit.point,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: Input,
    pub validation: Section<PartitionSummary>,
    pub pair: Section<PairSummary>,
    pub characters: Section<CharacterSummary>,
    pub assumptions: Section<AssumptionSummary>,
    pub graph: Section<GraphSummary>,
    pub witness: Section<WitnessSummary>,
    pub roundtrip: Section<RoundTripReport>,
    /// Whether every section ran and every check held.
    pub ok: bool,
}

/// Settings for the numeric sections of [`analyze`].
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

/// Runs the whole pipeline; a failing stage skips everything after it.
pub fn analyze(input: &Input, opts: AnalysisOptions) -> AnalysisReport {
    let mut report = AnalysisReport {
        input: input.clone(),
        validation: Section::skipped("input is given on the delta side"),
        pair: Section::skipped("validation failed"),
        characters: Section::skipped("no mirror pair"),
        assumptions: Section::skipped("no character table"),
        graph: Section::skipped("no character table"),
        witness: Section::skipped("no cell structure"),
        roundtrip: Section::skipped("no cell structure"),
        ok: false,
    };
    if let Some(v) = input.nabla_partition() {
        match v {
            Ok(p) => report.validation = Section::Done(PartitionSummary::of(&p)),
            Err(e) => {
                report.validation = Section::skipped(e.to_string());
                return report;
            }
        }
    }
    let mp = match input.mirror_pair_with_search() {
        Ok((mp, found)) => {
            report.pair = Section::Done(PairSummary::of(&mp, found));
            mp
        }
        Err(e) => {
            report.pair = Section::skipped(e.to_string());
            return report;
        }
    };
    let ct = match CharacterTable::build_xi(&mp) {
        Ok(ct) => ct,
        Err(e) => {
            report.characters = Section::skipped(e.to_string());
            return report;
        }
    };
    let characters = CharacterSummary::of(&ct);
    let pairing_ok = characters.pairing_agrees;
    report.characters = Section::Done(characters);
    let matching = match check_assumption1(&ct) {
        Ok(m) => m,
        Err(e) => {
            report.assumptions = Section::skipped(e.to_string());
            report.graph = Section::skipped(e.to_string());
            return report;
        }
    };
    let assumptions = AssumptionSummary {
        matching: matching.iter().map(|k| k + 1).collect(),
        generates_first: check_assumption2(&ct, Structure::First),
        generates_second: check_assumption2(&ct, Structure::Second),
    };
    let assumptions_ok = assumptions.generates_first && assumptions.generates_second;
    report.assumptions = Section::Done(assumptions);
    let w = WStructure::build(&ct).expect("matching already found");
    let graph = GraphSummary::of(&w);
    let graph_ok = graph.connectivity.holds && graph.block_translation_sums.iter().all(LatticeVector::is_zero);
    report.graph = Section::Done(graph);

    let witness_ok = match witness_summary(&w, opts.tol) {
        Ok(s) => {
            let ok = s.first.passes && s.second.passes;
            report.witness = Section::Done(s);
            ok
        }
        Err(e) => {
            report.witness = Section::skipped(e.to_string());
            false
        }
    };
    let roundtrip_ok = if opts.samples == 0 {
        report.roundtrip = Section::skipped("no samples requested");
        true
    } else {
        let rt = roundtrip_check_w(&w, opts.samples, opts.tol, opts.seed);
        let ok = rt.all_passed;
        report.roundtrip = Section::Done(rt);
        ok
    };
    report.ok = pairing_ok && assumptions_ok && graph_ok && witness_ok && roundtrip_ok;
    report
}
