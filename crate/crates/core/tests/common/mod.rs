//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use cellsp::complex::canonical_polygon;
use cellsp::cycles::enumerate_candidates;
use cellsp::experiments::generate::stream_rng;
use cellsp::CellComplex;
use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;

const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 1_000_000_007];

fn rank_mod(m: &DMatrix<i64>, p: u64) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<u64>> = (0..rows)
        .map(|i| (0..cols).map(|j| m[(i, j)].rem_euclid(p as i64) as u64).collect())
        .collect();
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, pivot);
        let inv = powmod(a[rank][c], p - 2);
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = mulmod(a[r][c], inv);
                for k in c..cols {
                    let sub = mulmod(f, a[rank][k]);
                    a[r][k] = (a[r][k] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals of an integer matrix: elimination modulo two
/// primes, taking the larger (a modular rank never exceeds the true rank).
pub fn exact_rank(m: &DMatrix<i64>) -> usize {
    PRIMES.iter().map(|&p| rank_mod(m, p)).max().unwrap_or(0)
}

pub fn components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut seen = vec![false; n];
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
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

/// All chordless cycles with `3..=max_sides` vertices, found by testing every
/// vertex subset for an induced subgraph that is connected and 2-regular.
pub fn brute_force_chordless(n: usize, edges: &[(usize, usize)], max_sides: usize) -> BTreeSet<Vec<usize>> {
    assert!(n <= 16, "brute force over subsets");
    let set: HashSet<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let adjacent = |a: usize, b: usize| set.contains(&(a.min(b), a.max(b)));
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if verts.len() < 3 || verts.len() > max_sides {
            continue;
        }
        let deg_ok = verts
            .iter()
            .all(|&u| verts.iter().filter(|&&w| w != u && adjacent(u, w)).count() == 2);
        if !deg_ok {
            continue;
        }
        // walk the cycle from the first vertex; it must cover the subset
        let mut order = vec![verts[0]];
        let mut prev = usize::MAX;
        let mut cur = verts[0];
        loop {
            let next = *verts
                .iter()
                .find(|&&w| w != cur && w != prev && adjacent(cur, w))
                .expect("2-regular");
            if next == verts[0] {
                break;
            }
            order.push(next);
            prev = cur;
            cur = next;
        }
        if order.len() == verts.len() {
            out.insert(canonical_polygon(&order));
        }
    }
    out
}

/// Random connected graph: a random tree plus each remaining pair with
/// probability `p`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.insert((j, i));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random::<f64>() < p {
                edges.insert((a, b));
            }
        }
    }
    edges.into_iter().collect()
}

/// Random complex on `n` vertices with a random subset of its chordless
/// cycles of at most `max_sides` sides as polygons.
pub fn random_complex(seed: u64, n: usize, p: f64, max_sides: usize) -> CellComplex {
    let mut rng = stream_rng(seed, 77);
    let edges = random_graph(&mut rng, n, p);
    let graph = CellComplex::graph(n, edges).unwrap();
    let cands = enumerate_candidates(&graph, max_sides, 1_000_000).unwrap();
    let k = if cands.is_empty() { 0 } else { rng.random_range(0..=cands.len()) };
    let chosen = index::sample(&mut rng, cands.len(), k);
    graph
        .with_polygons(chosen.iter().map(|i| cands.cycles()[i].clone()))
        .unwrap()
}

/// Smallest objective over all `q`-subsets and the lexicographically smallest
/// index set attaining it. Sums are taken over ascending values.
pub fn exhaustive_selection(scores: &[f64], q: usize) -> (f64, Vec<usize>) {
    let n = scores.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != q {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut vals: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        vals.sort_by(f64::total_cmp);
        let sum: f64 = vals.iter().sum();
        let better = match &best {
            None => true,
            Some((s, set)) => sum < *s || (sum == *s && idx < *set),
        };
        if better {
            best = Some((sum, idx));
        }
    }
    best.expect("q <= n")
}
