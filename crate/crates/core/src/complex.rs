//! The combinatorial model of a 2-dimensional cell complex.
//!
//! A [`CellComplex`] holds vertices (implicitly `0..vertex_count`), oriented
//! edges and oriented polygonal 2-cells. All orientations are canonical:
//!
//! * an edge `(u, v)` always has `u < v` and is oriented from `u` to `v`;
//! * a polygon starts at its smallest vertex and walks toward the smaller of
//!   that vertex's two cycle neighbours.
//!
//! Edges keep the order they were given in (the edge order is the row order
//! of `B2` and the column order of `B1`). Polygons are sorted by side count and
//! then lexicographically, which is the column order of `B2`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const HEADER: &str = "cellcomplex v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellComplex {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    polygons: Vec<Vec<usize>>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

/// Rotates and possibly reverses a cyclic vertex sequence into canonical
/// orientation: start at the smallest vertex, then step toward its smaller
/// neighbour on the cycle.
///
/// Sequences shorter than 3 are returned unchanged.
pub fn canonical_polygon(cycle: &[usize]) -> Vec<usize> {
    let len = cycle.len();
    if len < 3 {
        return cycle.to_vec();
    }
    let start = (0..len).min_by_key(|&i| cycle[i]).unwrap_or(0);
    let next = cycle[(start + 1) % len];
    let prev = cycle[(start + len - 1) % len];
    if next <= prev {
        (0..len).map(|k| cycle[(start + k) % len]).collect()
    } else {
        (0..len).map(|k| cycle[(start + len - k) % len]).collect()
    }
}

/// Ordering of polygons used for `B2` columns: fewer sides first, then
/// lexicographic on the canonical vertex sequence.
pub fn polygon_order(a: &[usize], b: &[usize]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl CellComplex {
    /// Builds and validates a complex. Edges are reoriented low-to-high and
    /// polygons are canonicalized and sorted.
    pub fn new<E, P>(vertex_count: usize, edges: E, polygons: P) -> Result<Self>
    where
        E: IntoIterator<Item = (usize, usize)>,
        P: IntoIterator<Item = Vec<usize>>,
    {
        if vertex_count == 0 {
            return Err(Error::InvalidComplex("vertex count must be positive".into()));
        }
        let mut canonical_edges = Vec::new();
        let mut edge_lookup = HashMap::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidComplex(format!("edge ({u}, {v}) is a self-loop")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidComplex(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            let key = (u.min(v), u.max(v));
            if edge_lookup.insert(key, canonical_edges.len()).is_some() {
                return Err(Error::InvalidComplex(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            canonical_edges.push(key);
        }

        let mut complex = CellComplex {
            vertex_count,
            edges: canonical_edges,
            polygons: Vec::new(),
            edge_lookup,
        };
        complex.polygons = complex.validated_polygons(polygons)?;
        Ok(complex)
    }

    /// A complex with no 2-cells.
    pub fn graph<E>(vertex_count: usize, edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(vertex_count, edges, Vec::<Vec<usize>>::new())
    }

    fn validated_polygons<P>(&self, polygons: P) -> Result<Vec<Vec<usize>>>
    where
        P: IntoIterator<Item = Vec<usize>>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for raw in polygons {
            if raw.len() < 3 {
                return Err(Error::InvalidComplex(format!(
                    "polygon {raw:?} has fewer than 3 sides"
                )));
            }
            let mut distinct = HashSet::new();
            for &v in &raw {
                if v >= self.vertex_count {
                    return Err(Error::InvalidComplex(format!(
                        "polygon {raw:?} references vertex {v} outside 0..{}",
                        self.vertex_count
                    )));
                }
                if !distinct.insert(v) {
                    return Err(Error::InvalidComplex(format!(
                        "polygon {raw:?} repeats vertex {v}"
                    )));
                }
            }
            for k in 0..raw.len() {
                let (a, b) = (raw[k], raw[(k + 1) % raw.len()]);
                if self.edge_index(a, b).is_none() {
                    return Err(Error::InvalidComplex(format!(
                        "polygon {raw:?} side ({}, {}) is not an edge",
                        a.min(b),
                        a.max(b)
                    )));
                }
            }
            let canon = canonical_polygon(&raw);
            if !seen.insert(canon.clone()) {
                return Err(Error::InvalidComplex(format!("duplicate polygon {canon:?}")));
            }
            out.push(canon);
        }
        out.sort_by(|a, b| polygon_order(a, b));
        Ok(out)
    }

    /// Same 1-skeleton, different set of 2-cells.
    pub fn with_polygons<P>(&self, polygons: P) -> Result<Self>
    where
        P: IntoIterator<Item = Vec<usize>>,
    {
        let mut out = CellComplex {
            vertex_count: self.vertex_count,
            edges: self.edges.clone(),
            polygons: Vec::new(),
            edge_lookup: self.edge_lookup.clone(),
        };
        out.polygons = out.validated_polygons(polygons)?;
        Ok(out)
    }

    /// Drops every 2-cell.
    pub fn skeleton(&self) -> Self {
        CellComplex {
            polygons: Vec::new(),
            ..self.clone()
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn polygon_count(&self) -> usize {
        self.polygons.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn polygons(&self) -> &[Vec<usize>] {
        &self.polygons
    }

    /// Index of the edge joining `a` and `b`, in either order.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Sorted neighbour lists of the 1-skeleton.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Signed edge traversal of a polygon: `(edge index, +1 | -1)` per side,
    /// `+1` when the walk follows the edge's low-to-high orientation.
    pub fn polygon_boundary(&self, polygon: &[usize]) -> Result<Vec<(usize, i8)>> {
        let len = polygon.len();
        (0..len)
            .map(|k| {
                let (a, b) = (polygon[k], polygon[(k + 1) % len]);
                let e = self.edge_index(a, b).ok_or_else(|| {
                    Error::InvalidComplex(format!(
                        "polygon {polygon:?} side ({}, {}) is not an edge",
                        a.min(b),
                        a.max(b)
                    ))
                })?;
                Ok((e, if a < b { 1 } else { -1 }))
            })
            .collect()
    }

    /// Number of connected components of the 1-skeleton.
    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertex_count];
        let mut count = 0;
        for root in 0..self.vertex_count {
            if seen[root] {
                continue;
            }
            count += 1;
            let mut stack = vec![root];
            seen[root] = true;
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Parses the line-oriented `cellcomplex v1` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header_seen = false;
        let mut vertex_count = None;
        let mut edges = Vec::new();
        let mut polygons = Vec::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            if !header_seen {
                if line.split_whitespace().collect::<Vec<_>>() != ["cellcomplex", "v1"] {
                    return Err(perr(format!("expected header `{HEADER}`, found `{line}`")));
                }
                header_seen = true;
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap_or_default();
            let numbers = tokens
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| perr(format!("`{t}` is not a vertex index")))
                })
                .collect::<Result<Vec<_>>>()?;
            match keyword {
                "vertices" => {
                    if vertex_count.is_some() {
                        return Err(perr("duplicate `vertices` line".into()));
                    }
                    match numbers.as_slice() {
                        [n] => vertex_count = Some(*n),
                        _ => return Err(perr("`vertices` takes exactly one count".into())),
                    }
                }
                "edge" => {
                    if vertex_count.is_none() {
                        return Err(perr("`edge` before `vertices`".into()));
                    }
                    match numbers.as_slice() {
                        [u, v] => edges.push((*u, *v)),
                        _ => return Err(perr("`edge` takes exactly two vertices".into())),
                    }
                }
                "polygon" => {
                    if vertex_count.is_none() {
                        return Err(perr("`polygon` before `vertices`".into()));
                    }
                    polygons.push(numbers);
                }
                other => return Err(perr(format!("unknown keyword `{other}`"))),
            }
        }
        if !header_seen {
            return Err(Error::Parse {
                line: 0,
                message: format!("missing `{HEADER}` header"),
            });
        }
        let vertex_count = vertex_count.ok_or_else(|| Error::Parse {
            line: 0,
            message: "missing `vertices` line".into(),
        })?;
        Self::new(vertex_count, edges, polygons)
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "vertices {}", self.vertex_count);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "edge {u} {v}");
        }
        for poly in &self.polygons {
            let verts: Vec<String> = poly.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "polygon {}", verts.join(" "));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_polygon_rotates_and_reflects() {
        assert_eq!(canonical_polygon(&[2, 3, 0, 1]), vec![0, 1, 2, 3]);
        assert_eq!(canonical_polygon(&[3, 2, 1, 0]), vec![0, 1, 2, 3]);
        assert_eq!(canonical_polygon(&[5, 1, 4]), vec![1, 4, 5]);
        let once = canonical_polygon(&[7, 2, 9, 4]);
        assert_eq!(canonical_polygon(&once), once);
    }

    #[test]
    fn edges_are_reoriented_but_keep_order() {
        let c = CellComplex::graph(4, [(1, 0), (3, 2), (0, 3)]).unwrap();
        assert_eq!(c.edges(), &[(0, 1), (2, 3), (0, 3)]);
        assert_eq!(c.edge_index(3, 0), Some(2));
    }

    #[test]
    fn structural_errors_name_the_edge() {
        let err = CellComplex::graph(3, [(0, 1), (1, 0)]).unwrap_err();
        assert!(err.to_string().contains("(0, 1)"), "{err}");
        let err = CellComplex::graph(3, [(2, 2)]).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
        let err = CellComplex::graph(3, [(0, 5)]).unwrap_err();
        assert!(err.to_string().contains("(0, 5)"), "{err}");
        let err = CellComplex::new(3, [(0, 1), (1, 2)], [vec![0, 1, 2]]).unwrap_err();
        assert!(err.to_string().contains("(0, 2)"), "{err}");
    }

    #[test]
    fn polygon_validation() {
        let edges = [(0, 1), (1, 2), (0, 2), (2, 3), (0, 3)];
        assert!(CellComplex::new(4, edges, [vec![0, 1]]).is_err());
        assert!(CellComplex::new(4, edges, [vec![0, 1, 2, 1]]).is_err());
        assert!(CellComplex::new(4, edges, [vec![0, 1, 2], vec![2, 1, 0]]).is_err());
        let c = CellComplex::new(4, edges, [vec![3, 2, 1, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(c.polygons(), &[vec![0, 1, 2], vec![0, 1, 2, 3]]);
    }

    #[test]
    fn text_format_round_trip() {
        let text = "# a square with one diagonal\ncellcomplex v1\nvertices 4\nedge 0 1\nedge 2 1 # reversed\nedge 2 3\nedge 0 3\nedge 0 2\npolygon 2 1 0\n\npolygon 0 2 3\n";
        let c = CellComplex::parse(text).unwrap();
        assert_eq!(c.edges()[1], (1, 2));
        assert_eq!(c.polygons(), &[vec![0, 1, 2], vec![0, 2, 3]]);
        assert_eq!(CellComplex::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match CellComplex::parse("cellcomplex v1\nvertices 3\nedge 0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(CellComplex::parse("vertices 3\n").is_err());
        assert!(CellComplex::parse("cellcomplex v1\nedge 0 1\n").is_err());
        assert!(CellComplex::parse("cellcomplex v1\nvertices 2\nface 0 1\n").is_err());
    }

    #[test]
    fn components() {
        let c = CellComplex::graph(5, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(c.component_count(), 3);
    }
}
