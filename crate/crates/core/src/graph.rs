//! The matrix of character lists, the arrow graph `D` and its blocks.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::characters::{check_assumption1, CharacterError, CharacterTable, ExtendedCharacter};
use crate::lattice::LatticeVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Characters(#[from] CharacterError),
    #[error("block selection must be a nonempty proper subset of 1..={beta}")]
    BlockSelection { beta: usize },
    #[error("block index {} out of range 1..={beta}", .block + 1)]
    BlockOutOfRange { block: usize, beta: usize },
}

/// Directed graph on `0..n` given by an adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DGraph {
    adjacency: Vec<Vec<bool>>,
}

impl DGraph {
    pub fn new(adjacency: Vec<Vec<bool>>) -> Self {
        let n = adjacency.len();
        assert!(adjacency.iter().all(|row| row.len() == n), "adjacency must be square");
        DGraph { adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn has_arrow(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn arrows(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.adjacency[a][b])
            .collect()
    }

    pub fn loops(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.adjacency[k][k]).collect()
    }

    /// Strongly connected components (Tarjan), each sorted, listed in order of
    /// their smallest vertex.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        struct State<'a> {
            adj: &'a [Vec<bool>],
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<usize>>,
        }
        fn visit(s: &mut State, v: usize) {
            s.index[v] = Some(s.next);
            s.low[v] = s.next;
            s.next += 1;
            s.stack.push(v);
            s.on_stack[v] = true;
            for w in 0..s.adj.len() {
                if !s.adj[v][w] {
                    continue;
                }
                match s.index[w] {
                    None => {
                        visit(s, w);
                        s.low[v] = s.low[v].min(s.low[w]);
                    }
                    Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(s.low[v]) == s.index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = s.stack.pop().expect("nonempty stack");
                    s.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                s.out.push(comp);
            }
        }
        let n = self.len();
        let mut s = State {
            adj: &self.adjacency,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..n {
            if s.index[v].is_none() {
                visit(&mut s, v);
            }
        }
        let mut out = s.out;
        out.sort_by_key(|c| c[0]);
        out
    }

    /// Weakly connected components, sorted, in order of their smallest vertex.
    pub fn weak_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut label: Vec<Option<usize>> = vec![None; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start].is_some() {
                continue;
            }
            let id = out.len();
            let mut comp = vec![start];
            label[start] = Some(id);
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                for w in 0..n {
                    if (self.adjacency[v][w] || self.adjacency[w][v]) && label[w].is_none() {
                        label[w] = Some(id);
                        comp.push(w);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Quotient by the strongly connected components; a component gets a loop
    /// when it contains an arrow.
    pub fn condensation(&self) -> DGraph {
        self.quotient(&self.strongly_connected_components())
    }

    /// Quotient by an arbitrary partition of the vertices.
    pub fn quotient(&self, classes: &[Vec<usize>]) -> DGraph {
        let mut class_of = vec![0; self.len()];
        for (c, members) in classes.iter().enumerate() {
            for &v in members {
                class_of[v] = c;
            }
        }
        let mut adj = vec![vec![false; classes.len()]; classes.len()];
        for (a, b) in self.arrows() {
            adj[class_of[a]][class_of[b]] = true;
        }
        DGraph::new(adj)
    }

    /// True when every arrow is a loop.
    pub fn is_loop_only(&self) -> bool {
        self.arrows().iter().all(|(a, b)| a == b)
    }

    /// DOT text, vertices labelled from 1 (or by `labels`).
    pub fn to_dot(&self, labels: Option<&[usize]>) -> String {
        let name = |v: usize| labels.map_or(v + 1, |l| l[v] + 1);
        let mut s = String::from("digraph D {\n");
        for v in 0..self.len() {
            let _ = writeln!(s, "  {};", name(v));
        }
        for (a, b) in self.arrows() {
            let _ = writeln!(s, "  {} -> {};", name(a), name(b));
        }
        s.push_str("}\n");
        s
    }
}

/// The `r x r` cell structure reindexed so that blocks are contiguous.
///
/// Vertex `k` of this structure is vertex `labels()[k]` of the input table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WStructure {
    rank: usize,
    translations: Vec<LatticeVector>,
    characters: Vec<ExtendedCharacter>,
    cells: Vec<Vec<Vec<usize>>>,
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    graph: DGraph,
}

impl WStructure {
    /// Applies the matching from the first assumption to the columns, then
    /// orders vertices by weak component (stable inside each block).
    pub fn build(ct: &CharacterTable) -> Result<Self, GraphError> {
        let perm = check_assumption1(ct)?;
        let ct = ct.relabel_columns(&perm);
        let r = ct.parts();
        let sizes = ct.cell_sizes();
        let raw = DGraph::new(sizes.iter().map(|row| row.iter().map(|&s| s > 0).collect()).collect());
        let components = raw.weak_components();
        let labels: Vec<usize> = components.iter().flatten().copied().collect();
        let mut position = vec![0; r];
        for (new, &old) in labels.iter().enumerate() {
            position[old] = new;
        }
        let characters: Vec<ExtendedCharacter> = ct
            .characters()
            .iter()
            .map(|c| ExtendedCharacter {
                m: c.m.clone(),
                a: position[c.a],
                b: position[c.b],
            })
            .collect();
        let translations = labels.iter().map(|&k| ct.translations()[k].clone()).collect();
        Ok(Self::assemble(ct.rank(), translations, characters, labels))
    }

    fn assemble(
        rank: usize,
        translations: Vec<LatticeVector>,
        characters: Vec<ExtendedCharacter>,
        labels: Vec<usize>,
    ) -> Self {
        let r = translations.len();
        let mut cells = vec![vec![Vec::new(); r]; r];
        for (id, c) in characters.iter().enumerate() {
            cells[c.a][c.b].push(id);
        }
        let graph = DGraph::new(
            cells
                .iter()
                .map(|row| row.iter().map(|cell| !cell.is_empty()).collect())
                .collect(),
        );
        let blocks = graph.weak_components();
        let mut block_of = vec![0; r];
        for (j, block) in blocks.iter().enumerate() {
            for &k in block {
                block_of[k] = j;
            }
        }
        WStructure {
            rank,
            translations,
            characters,
            cells,
            labels,
            blocks,
            block_of,
            graph,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of vertices `r`.
    pub fn size(&self) -> usize {
        self.translations.len()
    }

    pub fn translations(&self) -> &[LatticeVector] {
        &self.translations
    }

    /// Characters with cells in the block order; index = coefficient id.
    pub fn characters(&self) -> &[ExtendedCharacter] {
        &self.characters
    }

    pub fn cell(&self, a: usize, b: usize) -> &[usize] {
        &self.cells[a][b]
    }

    pub fn cell_sizes(&self) -> Vec<Vec<usize>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(Vec::len).collect())
            .collect()
    }

    /// Original label of each vertex.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Contiguous vertex ranges, one per block.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, k: usize) -> usize {
        self.block_of[k]
    }

    /// Number of blocks.
    pub fn beta(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn graph(&self) -> &DGraph {
        &self.graph
    }

    /// Coefficient ids on row `a` (the first-structure component `a`).
    pub fn row(&self, a: usize) -> Vec<usize> {
        self.cells[a].iter().flatten().copied().collect()
    }

    /// Coefficient ids on column `b`.
    pub fn column(&self, b: usize) -> Vec<usize> {
        self.cells.iter().flat_map(|row| row[b].iter().copied()).collect()
    }

    /// Sum of translations over each block.
    pub fn block_translation_sums(&self) -> Vec<LatticeVector> {
        self.blocks
            .iter()
            .map(|b| crate::lattice::sum_vectors(self.rank, b.iter().map(|&k| &self.translations[k])))
            .collect()
    }

    /// Keeps only the blocks in `selection` (0-based, nonempty, proper).
    pub fn fano_restrict(&self, selection: &[usize]) -> Result<WStructure, GraphError> {
        let beta = self.beta();
        let mut keep_block = vec![false; beta];
        for &j in selection {
            if j >= beta {
                return Err(GraphError::BlockOutOfRange { block: j, beta });
            }
            keep_block[j] = true;
        }
        let kept = keep_block.iter().filter(|&&k| k).count();
        if kept == 0 || kept == beta {
            return Err(GraphError::BlockSelection { beta });
        }
        let vertices: Vec<usize> = (0..self.size()).filter(|&k| keep_block[self.block_of[k]]).collect();
        let mut position = vec![usize::MAX; self.size()];
        for (new, &old) in vertices.iter().enumerate() {
            position[old] = new;
        }
        let characters = self
            .characters
            .iter()
            .filter(|c| position[c.a] != usize::MAX)
            .map(|c| ExtendedCharacter {
                m: c.m.clone(),
                a: position[c.a],
                b: position[c.b],
            })
            .collect();
        Ok(Self::assemble(
            self.rank,
            vertices.iter().map(|&k| self.translations[k].clone()).collect(),
            characters,
            vertices.iter().map(|&k| self.labels[k]).collect(),
        ))
    }

    pub fn to_dot(&self) -> String {
        self.graph.to_dot(Some(&self.labels))
    }

    pub fn block_report(&self) -> BlockReport {
        BlockReport {
            beta: self.beta(),
            block_sizes: self.block_sizes(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|&k| self.labels[k] + 1).collect())
                .collect(),
            cell_sizes: self.cell_sizes(),
        }
    }

    /// Whether each weak component is one strongly connected component with
    /// a loop at every vertex.
    pub fn verify_connectivity(&self) -> ConnectivityReport {
        let sccs = self.graph.strongly_connected_components();
        let components = self
            .blocks
            .iter()
            .map(|block| {
                let strongly_connected = sccs.iter().any(|s| s == block);
                let all_looped = block.iter().all(|&k| self.graph.has_arrow(k, k));
                ComponentStatus {
                    vertices: block.iter().map(|&k| self.labels[k] + 1).collect(),
                    strongly_connected,
                    all_looped,
                }
            })
            .collect::<Vec<_>>();
        let condensation = self.graph.condensation();
        let holds = components.iter().all(|c| c.strongly_connected && c.all_looped);
        ConnectivityReport {
            holds,
            components,
            missing_loops: (0..self.size())
                .filter(|&k| !self.graph.has_arrow(k, k))
                .map(|k| self.labels[k] + 1)
                .collect(),
            scc_count: sccs.len(),
            condensation_arrows: condensation.arrows().into_iter().map(|(a, b)| (a + 1, b + 1)).collect(),
            condensation_loop_only: condensation.is_loop_only(),
        }
    }
}

/// Blocks with 1-based original labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub beta: usize,
    pub block_sizes: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub cell_sizes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentStatus {
    pub vertices: Vec<usize>,
    pub strongly_connected: bool,
    pub all_looped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub holds: bool,
    pub components: Vec<ComponentStatus>,
    pub missing_loops: Vec<usize>,
    pub scc_count: usize,
    /// Arrows between strongly connected components, numbered from 1.
    pub condensation_arrows: Vec<(usize, usize)>,
    pub condensation_loop_only: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, arrows: &[(usize, usize)]) -> DGraph {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in arrows {
            adj[a][b] = true;
        }
        DGraph::new(adj)
    }

    #[test]
    fn tarjan_on_chain_and_cycle() {
        let g = graph(4, &[(0, 1), (1, 0), (1, 2), (3, 3)]);
        assert_eq!(g.strongly_connected_components(), vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(g.weak_components(), vec![vec![0, 1, 2], vec![3]]);
        let c = g.condensation();
        assert_eq!(c.arrows(), vec![(0, 0), (0, 1), (2, 2)]);
        assert!(!c.is_loop_only());
    }

    #[test]
    fn cycle_is_one_component() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(g.strongly_connected_components(), vec![vec![0, 1, 2]]);
        assert!(g.condensation().is_loop_only());
    }

    #[test]
    fn dot_export() {
        let g = graph(2, &[(0, 1)]);
        assert_eq!(g.to_dot(None), "digraph D {\n  1;\n  2;\n  1 -> 2;\n}\n");
    }

    #[test]
    fn blocks_are_contiguous() {
        let v = |x: i64| LatticeVector::from_i64(&[x]);
        // Vertices 0 and 2 form one component, 1 another.
        let chars = [(0, 0), (0, 2), (2, 0), (2, 2), (1, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| ExtendedCharacter { m: v(0), a, b })
            .collect();
        let ct = CharacterTable::from_characters(1, vec![v(0), v(0), v(0)], chars).unwrap();
        let w = WStructure::build(&ct).unwrap();
        assert_eq!(w.labels(), &[0, 2, 1]);
        assert_eq!(w.blocks(), &[vec![0, 1], vec![2]]);
        assert_eq!(w.cell_sizes(), vec![vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, 2]]);
        assert!(w.verify_connectivity().holds);

        let second = w.fano_restrict(&[1]).unwrap();
        assert_eq!(second.size(), 1);
        assert_eq!(second.labels(), &[1]);
        assert_eq!(second.cell_sizes(), vec![vec![2]]);
        assert!(w.fano_restrict(&[0, 1]).is_err());
        assert!(w.fano_restrict(&[]).is_err());
        assert!(w.fano_restrict(&[5]).is_err());
    }
}
