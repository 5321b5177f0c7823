//! Enumeration of candidate 2-cells: the simple chordless cycles of the
//! 1-skeleton up to a maximum number of sides.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::complex::{polygon_order, CellComplex};
use crate::error::{Error, Result};
use crate::incidence::IncidenceMatrix;

pub const DEFAULT_MAX_SIDES: usize = 6;
pub const DEFAULT_MAX_CANDIDATES: usize = 100_000;

/// Chordless cycles in canonical orientation together with their signed
/// edge-incidence columns.
#[derive(Debug, Clone)]
pub struct CandidateCellSet {
    cycles: Vec<Vec<usize>>,
    max_sides: usize,
    columns: IncidenceMatrix,
}

impl CandidateCellSet {
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn max_sides(&self) -> usize {
        self.max_sides
    }

    /// `E x N_c` matrix whose column `n` is the boundary of cycle `n`.
    pub fn columns(&self) -> &IncidenceMatrix {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Keeps only candidates with at most `max_sides` sides.
    pub fn restrict_sides(&self, max_sides: usize) -> CandidateCellSet {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.cycles[i].len() <= max_sides)
            .collect();
        CandidateCellSet {
            cycles: keep.iter().map(|&i| self.cycles[i].clone()).collect(),
            max_sides: max_sides.min(self.max_sides),
            columns: self.columns.select_columns(&keep),
        }
    }
}

/// Enumerates every simple chordless cycle with `3..=max_sides` vertices,
/// sorted by length and then lexicographically.
///
/// Paths are grown from each start vertex `s` through vertices larger than `s`
/// only, and must stay induced: a new vertex may touch the path only at its
/// last vertex, or additionally at `s`, in which case the cycle closes and the
/// path is not extended further. Each cycle is found twice (once per
/// direction); the copy whose second vertex is smaller than its last is kept.
pub fn enumerate_candidates(
    complex: &CellComplex,
    max_sides: usize,
    max_candidates: usize,
) -> Result<CandidateCellSet> {
    if max_sides < 3 {
        return Err(Error::Argument(format!("max_sides must be >= 3, got {max_sides}")));
    }
    let adj = complex.adjacency();
    let n = complex.vertex_count();
    let mut adjacent = vec![false; n * n];
    for (u, list) in adj.iter().enumerate() {
        for &w in list {
            adjacent[u * n + w] = true;
        }
    }

    let found = AtomicUsize::new(0);
    let overflow = AtomicBool::new(false);
    let per_start: Vec<Vec<Vec<usize>>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut search = Search {
                adj: &adj,
                adjacent: &adjacent,
                n,
                max_sides,
                limit: max_candidates,
                found: &found,
                overflow: &overflow,
                path: vec![s],
                out: Vec::new(),
            };
            search.extend();
            search.out
        })
        .collect();
    if overflow.load(Ordering::Relaxed) {
        return Err(Error::TooManyCandidates {
            limit: max_candidates,
        });
    }

    let mut cycles: Vec<Vec<usize>> = per_start.into_iter().flatten().collect();
    cycles.sort_by(|a, b| polygon_order(a, b));
    let columns = cycles
        .iter()
        .map(|c| {
            let mut col = complex.polygon_boundary(c)?;
            col.sort_unstable_by_key(|&(r, _)| r);
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidateCellSet {
        cycles,
        max_sides,
        columns: IncidenceMatrix::from_columns(complex.edge_count(), columns)?,
    })
}

struct Search<'a> {
    adj: &'a [Vec<usize>],
    adjacent: &'a [bool],
    n: usize,
    max_sides: usize,
    limit: usize,
    found: &'a AtomicUsize,
    overflow: &'a AtomicBool,
    path: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacent[a * self.n + b]
    }

    fn extend(&mut self) {
        if self.overflow.load(Ordering::Relaxed) {
            return;
        }
        let start = self.path[0];
        let last = *self.path.last().expect("path is never empty");
        let len = self.path.len();
        for &w in &self.adj[last] {
            if w <= start || self.path.contains(&w) {
                continue;
            }
            // chord to an interior path vertex
            let interior = if len > 2 { &self.path[1..len - 1] } else { &[][..] };
            if interior.iter().any(|&p| self.is_adjacent(p, w)) {
                continue;
            }
            if len >= 2 && self.is_adjacent(start, w) {
                if self.path[1] < w {
                    let mut cycle = self.path.clone();
                    cycle.push(w);
                    if self.found.fetch_add(1, Ordering::Relaxed) >= self.limit {
                        self.overflow.store(true, Ordering::Relaxed);
                        return;
                    }
                    self.out.push(cycle);
                }
                continue;
            }
            if len + 1 < self.max_sides {
                self.path.push(w);
                self.extend();
                self.path.pop();
            }
        }
    }
}
