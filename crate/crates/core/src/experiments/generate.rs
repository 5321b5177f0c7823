//! Seeded synthetic complexes and bandlimited edge signals.

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{ExperimentConfig, GeneratorKind};
use crate::complex::CellComplex;
use crate::cycles::enumerate_candidates;
use crate::error::{Error, Result};
use crate::incidence::{build_b1, build_b2};
use crate::signals::EdgeSignalBatch;
use crate::spectral::{build_laplacians, partition_basis, Component, SpectralBasis};

/// Independent generator for `stream` under the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSpec {
    pub generator: GeneratorKind,
    pub vertices: usize,
    /// Ignored by the complete and cycle generators.
    pub edges: usize,
    pub planted: usize,
    pub max_sides: usize,
    pub max_candidates: usize,
}

impl From<&ExperimentConfig> for ComplexSpec {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            generator: c.generator,
            vertices: c.vertices,
            edges: c.edges,
            planted: c.planted,
            max_sides: c.max_sides,
            max_candidates: c.max_candidates,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub b_irr: usize,
    pub b_sol: usize,
    pub b_harm: usize,
    pub noise_variance: f64,
}

impl From<&ExperimentConfig> for SignalSpec {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            b_irr: c.b_irr,
            b_sol: c.b_sol,
            b_harm: c.b_harm,
            noise_variance: c.noise_variance,
        }
    }
}

struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent[ra] = rb;
        ra != rb
    }
}

fn is_connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut uf = Components::new(n);
    let merged = edges.filter(|&(a, b)| uf.union(a, b)).count();
    merged + 1 >= n
}

/// Triangulated grid on the first `vertices` points of a near-square lattice
/// in row-major order, each square split along a random diagonal, then thinned
/// by deleting random non-bridge edges until exactly `edges` remain.
fn mesh_graph(vertices: usize, edges: usize, rng: &mut impl Rng) -> Result<Vec<(usize, usize)>> {
    let cols = (vertices as f64).sqrt().ceil().max(1.0) as usize;
    let rows = vertices.div_ceil(cols);
    let id = |r: usize, c: usize| r * cols + c;
    let mut all = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                all.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                all.push((id(r, c), id(r + 1, c)));
            }
            if r + 1 < rows && c + 1 < cols {
                if rng.random::<bool>() {
                    all.push((id(r, c), id(r + 1, c + 1)));
                } else {
                    all.push((id(r, c + 1), id(r + 1, c)));
                }
            }
        }
    }
    all.retain(|&(a, b)| a < vertices && b < vertices);
    if edges > all.len() {
        return Err(Error::Generation(format!(
            "a mesh on {vertices} vertices has at most {} edges, {edges} requested",
            all.len()
        )));
    }
    if edges + 1 < vertices {
        return Err(Error::Generation(format!(
            "{edges} edges cannot connect {vertices} vertices"
        )));
    }
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.shuffle(rng);
    let mut alive = vec![true; all.len()];
    let mut count = all.len();
    for &i in &order {
        if count == edges {
            break;
        }
        alive[i] = false;
        let live = (0..all.len()).filter(|&j| alive[j]).map(|j| all[j]);
        if is_connected(vertices, live) {
            count -= 1;
        } else {
            alive[i] = true;
        }
    }
    Ok((0..all.len()).filter(|&j| alive[j]).map(|j| all[j]).collect())
}

/// Uniform random spanning tree on a shuffled vertex order plus uniformly
/// chosen extra edges, exactly `edges` in total.
fn erdos_renyi_graph(
    vertices: usize,
    edges: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, usize)>> {
    let max = vertices * vertices.saturating_sub(1) / 2;
    if edges + 1 < vertices || edges > max {
        return Err(Error::Generation(format!(
            "cannot place {edges} edges on {vertices} connected vertices"
        )));
    }
    let mut perm: Vec<usize> = (0..vertices).collect();
    perm.shuffle(rng);
    let mut present = vec![false; vertices * vertices];
    let mut out = Vec::with_capacity(edges);
    for i in 1..vertices {
        let j = rng.random_range(0..i);
        let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
        present[a * vertices + b] = true;
        out.push((a, b));
    }
    let absent: Vec<(usize, usize)> = (0..vertices)
        .flat_map(|a| ((a + 1)..vertices).map(move |b| (a, b)))
        .filter(|&(a, b)| !present[a * vertices + b])
        .collect();
    let extra = edges - out.len();
    for i in index::sample(rng, absent.len(), extra).into_iter() {
        out.push(absent[i]);
    }
    Ok(out)
}

pub fn generate_graph(spec: &ComplexSpec, rng: &mut impl Rng) -> Result<CellComplex> {
    let v = spec.vertices;
    let mut edges = match spec.generator {
        GeneratorKind::Mesh => mesh_graph(v, spec.edges, rng)?,
        GeneratorKind::ErdosRenyi => erdos_renyi_graph(v, spec.edges, rng)?,
        GeneratorKind::Complete => (0..v).flat_map(|a| ((a + 1)..v).map(move |b| (a, b))).collect(),
        GeneratorKind::Cycle => {
            if v < 3 {
                return Err(Error::Generation(format!("a cycle needs >= 3 vertices, got {v}")));
            }
            (0..v).map(|i| (i.min((i + 1) % v), i.max((i + 1) % v))).collect()
        }
    };
    edges.sort_unstable();
    CellComplex::graph(v, edges)
}

/// Random graph with `planted` polygons drawn uniformly without replacement
/// from its chordless cycles of at most `max_sides` sides.
pub fn generate_complex(spec: &ComplexSpec, rng: &mut impl Rng) -> Result<CellComplex> {
    let graph = generate_graph(spec, rng)?;
    let candidates = enumerate_candidates(&graph, spec.max_sides, spec.max_candidates)?;
    if spec.planted > candidates.len() {
        return Err(Error::Generation(format!(
            "cannot plant {} polygons among {} candidates",
            spec.planted,
            candidates.len()
        )));
    }
    let mut chosen = index::sample(rng, candidates.len(), spec.planted).into_vec();
    chosen.sort_unstable();
    graph.with_polygons(chosen.into_iter().map(|i| candidates.cycles()[i].clone()))
}

pub fn complex_basis(complex: &CellComplex) -> Result<SpectralBasis> {
    let b1 = build_b1(complex);
    let b2 = build_b2(complex)?;
    partition_basis(&build_laplacians(&b1, &b2)?, None)
}

/// Noise-free components and noise of a generated batch, each `E x M`.
#[derive(Debug, Clone)]
pub struct SignalParts {
    pub irrotational: DMatrix<f64>,
    pub solenoidal: DMatrix<f64>,
    pub harmonic: DMatrix<f64>,
    pub noise: DMatrix<f64>,
}

impl SignalParts {
    pub fn clean(&self) -> DMatrix<f64> {
        &self.irrotational + &self.solenoidal + &self.harmonic
    }

    pub fn batch(&self) -> EdgeSignalBatch {
        EdgeSignalBatch::new(self.clean() + &self.noise)
    }
}

/// Leading `b` eigenvectors of one component, or an error if there are fewer.
pub fn leading_vectors(basis: &SpectralBasis, component: Component, b: usize) -> Result<DMatrix<f64>> {
    let all = basis.component_vectors(component);
    if b > all.ncols() {
        return Err(Error::Argument(format!(
            "bandwidth {b} exceeds the {:?} subspace dimension {}",
            component,
            all.ncols()
        )));
    }
    Ok(all.columns(0, b).into_owned())
}

/// Columns `U_irr g + U_sol h + U_H k + n` with standard normal `g, h, k`
/// and iid `N(0, sigma^2)` noise `n`.
pub fn generate_signal_parts(
    basis: &SpectralBasis,
    spec: &SignalSpec,
    count: usize,
    rng: &mut impl Rng,
) -> Result<SignalParts> {
    if !(spec.noise_variance >= 0.0) {
        return Err(Error::Argument(format!(
            "noise variance must be >= 0, got {}",
            spec.noise_variance
        )));
    }
    let u_irr = leading_vectors(basis, Component::Irrotational, spec.b_irr)?;
    let u_sol = leading_vectors(basis, Component::Solenoidal, spec.b_sol)?;
    let u_harm = leading_vectors(basis, Component::Harmonic, spec.b_harm)?;
    let e = basis.len();
    let sigma = spec.noise_variance.sqrt();
    let mut draw = |n: usize| DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
    let mut parts = SignalParts {
        irrotational: DMatrix::zeros(e, count),
        solenoidal: DMatrix::zeros(e, count),
        harmonic: DMatrix::zeros(e, count),
        noise: DMatrix::zeros(e, count),
    };
    for j in 0..count {
        parts.irrotational.set_column(j, &(&u_irr * draw(spec.b_irr)));
        parts.solenoidal.set_column(j, &(&u_sol * draw(spec.b_sol)));
        parts.harmonic.set_column(j, &(&u_harm * draw(spec.b_harm)));
        parts.noise.set_column(j, &(draw(e) * sigma));
    }
    Ok(parts)
}

pub fn generate_signals(
    complex: &CellComplex,
    spec: &SignalSpec,
    count: usize,
    rng: &mut impl Rng,
) -> Result<EdgeSignalBatch> {
    let basis = complex_basis(complex)?;
    Ok(generate_signal_parts(&basis, spec, count, rng)?.batch())
}
