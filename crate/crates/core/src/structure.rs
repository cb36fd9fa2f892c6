//! Structural scalability predicates on the nonzero pattern of a square matrix.
//!
//! A nonnegative matrix can be scaled to doubly stochastic form iff it has
//! total support; the symmetric case has the same condition. These checks
//! work on the pattern only, so signed matrices are handled through `|A|`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operator::SparseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub has_support: bool,
    pub has_total_support: bool,
    pub is_irreducible: bool,
}

pub fn structure_report<T: Scalar>(m: &SparseMatrix<T>) -> Result<StructureReport> {
    m.require_square()?;
    Ok(StructureReport {
        has_support: has_support(m),
        has_total_support: has_total_support(m),
        is_irreducible: is_irreducible(m),
    })
}

/// Maximum bipartite matching between rows and columns of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub row_to_col: Vec<Option<usize>>,
    pub col_to_row: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.row_to_col.iter().flatten().count()
    }
}

fn adjacency<T: Scalar>(m: &SparseMatrix<T>) -> Vec<&[usize]> {
    (0..m.nrows()).map(|i| m.row(i).0).collect()
}

/// Hopcroft–Karp maximum matching on the row/column graph of the pattern.
pub fn maximum_matching<T: Scalar>(m: &SparseMatrix<T>) -> Matching {
    HopcroftKarp::new(adjacency(m), m.ncols()).run()
}

struct HopcroftKarp<'a> {
    adj: Vec<&'a [usize]>,
    row_to_col: Vec<Option<usize>>,
    col_to_row: Vec<Option<usize>>,
    dist: Vec<usize>,
}

const INF: usize = usize::MAX;

impl<'a> HopcroftKarp<'a> {
    fn new(adj: Vec<&'a [usize]>, ncols: usize) -> Self {
        let nrows = adj.len();
        Self {
            adj,
            row_to_col: vec![None; nrows],
            col_to_row: vec![None; ncols],
            dist: vec![INF; nrows],
        }
    }

    /// Layers free rows at distance 0; true if some free column is reachable.
    fn bfs(&mut self) -> bool {
        let mut queue = VecDeque::new();
        for (r, d) in self.dist.iter_mut().enumerate() {
            if self.row_to_col[r].is_none() {
                *d = 0;
                queue.push_back(r);
            } else {
                *d = INF;
            }
        }
        let mut found = false;
        while let Some(r) = queue.pop_front() {
            for &c in self.adj[r] {
                match self.col_to_row[c] {
                    None => found = true,
                    Some(r2) if self.dist[r2] == INF => {
                        self.dist[r2] = self.dist[r] + 1;
                        queue.push_back(r2);
                    }
                    Some(_) => {}
                }
            }
        }
        found
    }

    fn dfs(&mut self, r: usize) -> bool {
        for k in 0..self.adj[r].len() {
            let c = self.adj[r][k];
            let ok = match self.col_to_row[c] {
                None => true,
                Some(r2) => self.dist[r2] == self.dist[r] + 1 && self.dfs(r2),
            };
            if ok {
                self.row_to_col[r] = Some(c);
                self.col_to_row[c] = Some(r);
                return true;
            }
        }
        self.dist[r] = INF;
        false
    }

    fn run(mut self) -> Matching {
        while self.bfs() {
            for r in 0..self.adj.len() {
                if self.row_to_col[r].is_none() {
                    self.dfs(r);
                }
            }
        }
        Matching {
            row_to_col: self.row_to_col,
            col_to_row: self.col_to_row,
        }
    }
}

/// True iff some column permutation puts nonzeros on the whole diagonal
/// (structural nonsingularity).
pub fn has_support<T: Scalar>(m: &SparseMatrix<T>) -> bool {
    m.is_square() && maximum_matching(m).size() == m.nrows()
}

/// True iff every nonzero lies on some perfect matching of the pattern.
///
/// Each nonzero `(i, j)` off a fixed perfect matching `M` is tested by asking
/// whether the pattern with row `i` and column `j` deleted still has a perfect
/// matching. Starting from `M` minus its two edges at `i` and `j`, that is a
/// single augmenting path from row `M⁻¹(j)` to column `M(i)` avoiding column
/// `j`. The search from `M⁻¹(j)` depends only on `j`, so one traversal per
/// column answers every nonzero in that column.
pub fn has_total_support<T: Scalar>(m: &SparseMatrix<T>) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    let matching = maximum_matching(m);
    if matching.size() != n {
        return false;
    }
    let row_to_col: Vec<usize> = matching.row_to_col.iter().map(|c| c.unwrap()).collect();
    let col_to_row: Vec<usize> = matching.col_to_row.iter().map(|r| r.unwrap()).collect();

    // rows holding each column's nonzeros
    let t = m.transpose();
    let mut reached_col = vec![usize::MAX; n];
    let mut seen_row = vec![usize::MAX; n];
    let mut queue = VecDeque::new();

    for j in 0..n {
        let start = col_to_row[j];
        // columns reachable from `start` along alternating paths avoiding j
        queue.clear();
        queue.push_back(start);
        seen_row[start] = j;
        while let Some(r) = queue.pop_front() {
            for &c in m.row(r).0 {
                if c == j || reached_col[c] == j {
                    continue;
                }
                reached_col[c] = j;
                let r2 = col_to_row[c];
                if seen_row[r2] != j {
                    seen_row[r2] = j;
                    queue.push_back(r2);
                }
            }
        }
        for &i in t.row(j).0 {
            if row_to_col[i] != j && reached_col[row_to_col[i]] != j {
                return false;
            }
        }
    }
    true
}

/// True iff the directed graph of the pattern is strongly connected.
pub fn is_irreducible<T: Scalar>(m: &SparseMatrix<T>) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    if n <= 1 {
        return true;
    }
    let reaches_all = |g: &SparseMatrix<T>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in g.row(v).0 {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    };
    reaches_all(m) && reaches_all(&m.transpose())
}
