//! Maximum-weight perfect matching on balanced bipartite graphs.
//!
//! The solver is the shortest-augmenting-path form of the Hungarian method
//! and runs in `O(V^3)`. Missing edges are never relaxed, so an exhausted
//! search tree proves that no perfect matching exists. Among all optimal
//! matchings the solver returns the lexicographically smallest one by
//! left-vertex assignment sequence: after solving, it restricts the graph to
//! edges that are tight under the optimal duals and fixes left vertices one
//! at a time along alternating cycles.

use std::collections::VecDeque;
use std::fmt::Debug;

use num_traits::Signed;
use thiserror::Error;

/// Scalar usable as an edge weight.
///
/// Integer and rational types are exact. Floating-point weights are exact as
/// long as every weight and every partial sum is representable, which holds
/// for the `{0, 1}` graphs the mechanisms build.
pub trait Weight: Copy + PartialOrd + Signed + Debug + Send + Sync {}

impl<T> Weight for T where T: Copy + PartialOrd + Signed + Debug + Send + Sync {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("graph is unbalanced: {left} left vs {right} right vertices")]
    UnbalancedGraph { left: usize, right: usize },
    #[error("unknown vertex {side}#{index}")]
    UnknownVertex { side: &'static str, index: usize },
}

/// Bipartite graph with at most one weighted edge per vertex pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBipartiteGraph<W> {
    left: usize,
    right: usize,
    cells: Vec<Option<W>>,
}

impl<W: Weight> WeightedBipartiteGraph<W> {
    pub fn new(left: usize, right: usize) -> Self {
        WeightedBipartiteGraph {
            left,
            right,
            cells: vec![None; left * right],
        }
    }

    pub fn left_len(&self) -> usize {
        self.left
    }

    pub fn right_len(&self) -> usize {
        self.right
    }

    pub fn is_balanced(&self) -> bool {
        self.left == self.right
    }

    fn check(&self, l: usize, r: usize) -> Result<usize, MatchingError> {
        if l >= self.left {
            return Err(MatchingError::UnknownVertex { side: "left", index: l });
        }
        if r >= self.right {
            return Err(MatchingError::UnknownVertex { side: "right", index: r });
        }
        Ok(l * self.right + r)
    }

    /// Inserts or overwrites the edge `(l, r)`.
    pub fn set_edge(&mut self, l: usize, r: usize, weight: W) -> Result<(), MatchingError> {
        let at = self.check(l, r)?;
        self.cells[at] = Some(weight);
        Ok(())
    }

    pub fn remove_edge(&mut self, l: usize, r: usize) -> Result<Option<W>, MatchingError> {
        let at = self.check(l, r)?;
        Ok(self.cells[at].take())
    }

    pub fn edge(&self, l: usize, r: usize) -> Option<W> {
        if l < self.left && r < self.right {
            self.cells[l * self.right + r]
        } else {
            None
        }
    }

    /// Edges at left vertex `l` in right-vertex order.
    pub fn edges_of(&self, l: usize) -> impl Iterator<Item = (usize, W)> + '_ {
        let row = if l < self.left {
            &self.cells[l * self.right..(l + 1) * self.right]
        } else {
            &self.cells[0..0]
        };
        row.iter().enumerate().filter_map(|(r, w)| w.map(|w| (r, w)))
    }

    /// All edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, W)> + '_ {
        (0..self.left).flat_map(move |l| self.edges_of(l).map(move |(r, w)| (l, r, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Removes every zero-weight edge at left vertex `l`.
    pub fn remove_zero_edges(&mut self, l: usize) -> Result<EdgeDelta<W>, MatchingError> {
        if l >= self.left {
            return Err(MatchingError::UnknownVertex { side: "left", index: l });
        }
        let mut removed = Vec::new();
        for r in 0..self.right {
            let cell = &mut self.cells[l * self.right + r];
            if let Some(w) = *cell {
                if w.is_zero() {
                    removed.push((r, w));
                    *cell = None;
                }
            }
        }
        Ok(EdgeDelta { left: l, removed })
    }

    /// Puts back the edges recorded in `delta`.
    pub fn restore(&mut self, delta: &EdgeDelta<W>) {
        for &(r, w) in &delta.removed {
            self.cells[delta.left * self.right + r] = Some(w);
        }
    }
}

/// Edges removed from one left vertex; [`WeightedBipartiteGraph::restore`]
/// undoes the removal exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDelta<W> {
    pub left: usize,
    pub removed: Vec<(usize, W)>,
}

impl<W> EdgeDelta<W> {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }
}

/// A perfect matching: `partner[l]` is the right vertex matched to `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching<W> {
    partner: Vec<usize>,
    weight: W,
}

impl<W: Copy> Matching<W> {
    pub fn weight(&self) -> W {
        self.weight
    }

    pub fn partner(&self, left: usize) -> usize {
        self.partner[left]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.partner
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner.iter().copied().enumerate()
    }
}

/// Canonical maximum-weight perfect matching, or `None` if the graph has no
/// perfect matching.
pub fn max_weight_perfect_matching<W: Weight>(
    graph: &WeightedBipartiteGraph<W>,
) -> Result<Option<Matching<W>>, MatchingError> {
    if !graph.is_balanced() {
        return Err(MatchingError::UnbalancedGraph {
            left: graph.left,
            right: graph.right,
        });
    }
    let Some(solution) = hungarian(graph) else {
        return Ok(None);
    };
    let partner = lexicographic_minimum(graph, &solution);
    let weight = partner
        .iter()
        .enumerate()
        .fold(W::zero(), |acc, (l, &r)| acc + graph.edge(l, r).expect("matched edge exists"));
    Ok(Some(Matching { partner, weight }))
}

/// Whether any perfect matching exists, ignoring weights.
pub fn has_perfect_matching<W: Weight>(graph: &WeightedBipartiteGraph<W>) -> Result<bool, MatchingError> {
    if !graph.is_balanced() {
        return Err(MatchingError::UnbalancedGraph {
            left: graph.left,
            right: graph.right,
        });
    }
    let n = graph.left;
    let adj: Vec<Vec<usize>> = (0..n).map(|l| graph.edges_of(l).map(|(r, _)| r).collect()).collect();
    Ok(max_cardinality(&adj, n) == n)
}

/// Kuhn's augmenting-path maximum matching on an adjacency list.
pub(crate) fn max_cardinality(adj: &[Vec<usize>], right: usize) -> usize {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if owner[r].is_none_or(|o| augment(o, adj, seen, owner)) {
                owner[r] = Some(l);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    let mut size = 0;
    for l in 0..adj.len() {
        let mut seen = vec![false; right];
        if augment(l, adj, &mut seen, &mut owner) {
            size += 1;
        }
    }
    size
}

struct Solution<W> {
    /// Right vertex matched to each left vertex.
    partner: Vec<usize>,
    /// Row potentials, 1-indexed.
    row: Vec<W>,
    /// Column potentials, 1-indexed.
    col: Vec<W>,
}

/// Minimises the cost `-w` over perfect matchings. Potentials satisfy
/// `-w(i, j) - row[i] - col[j] >= 0` on every edge, with equality on the
/// returned matching.
fn hungarian<W: Weight>(graph: &WeightedBipartiteGraph<W>) -> Option<Solution<W>> {
    let n = graph.left;
    let zero = W::zero();
    let mut row = vec![zero; n + 1];
    let mut col = vec![zero; n + 1];
    // owner[j]: left vertex (1-indexed) holding column j; 0 = free.
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut min_slack: Vec<Option<W>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<W> = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(w) = graph.edge(i0 - 1, j - 1) {
                    let slack = -w - row[i0] - col[j];
                    if min_slack[j].is_none_or(|m| slack < m) {
                        min_slack[j] = Some(slack);
                        way[j] = j0;
                    }
                }
                if let Some(m) = min_slack[j] {
                    if delta.is_none_or(|d| m < d) {
                        delta = Some(m);
                        j1 = j;
                    }
                }
            }
            // Every column reachable from the tree is used: no augmenting path.
            let delta = delta?;
            for j in 0..=n {
                if used[j] {
                    row[owner[j]] = row[owner[j]] + delta;
                    col[j] = col[j] - delta;
                } else if let Some(m) = min_slack[j].as_mut() {
                    *m = *m - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut partner = vec![0usize; n];
    for j in 1..=n {
        partner[owner[j] - 1] = j - 1;
    }
    Some(Solution { partner, row, col })
}

/// Lexicographically smallest perfect matching among those using only edges
/// that are tight under the optimal potentials. Every optimal matching uses
/// only tight edges, and every perfect matching on tight edges is optimal.
fn lexicographic_minimum<W: Weight>(graph: &WeightedBipartiteGraph<W>, solution: &Solution<W>) -> Vec<usize> {
    let n = graph.left;
    let mut partner = solution.partner.clone();
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|l| {
            (0..n)
                .map(|r| match graph.edge(l, r) {
                    Some(w) => partner[l] == r || -w - solution.row[l + 1] - solution.col[r + 1] <= W::zero(),
                    None => false,
                })
                .collect()
        })
        .collect();
    let mut owner = vec![0usize; n];
    for (l, &r) in partner.iter().enumerate() {
        owner[r] = l;
    }
    let mut fixed = vec![false; n];

    for i in 0..n {
        let target = partner[i];
        // next[l] = column that l moves to when the cycle through i is
        // rotated; Some only for free rows that can hand a column to target.
        let mut next: Vec<Option<usize>> = vec![None; n];
        let mut queue = VecDeque::from([target]);
        while let Some(col) = queue.pop_front() {
            for l in 0..n {
                if l != i && !fixed[l] && next[l].is_none() && tight[l][col] {
                    next[l] = Some(col);
                    queue.push_back(partner[l]);
                }
            }
        }
        let better = (0..target).find(|&j| tight[i][j] && next[owner[j]].is_some());
        if let Some(j) = better {
            let mut cur = owner[j];
            partner[i] = j;
            owner[j] = i;
            loop {
                let col = next[cur].expect("row on rotation path");
                let displaced = owner[col];
                partner[cur] = col;
                owner[col] = cur;
                if col == target {
                    break;
                }
                cur = displaced;
            }
        }
        fixed[i] = true;
    }
    partner
}
