//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cellsp::cycles::enumerate_candidates;
use cellsp::experiments::filter::{filter_trial, DesignKind};
use cellsp::experiments::generate::{
    complex_basis, generate_complex, generate_signal_parts, leading_vectors, stream_rng,
    ComplexSpec, SignalSpec,
};
use cellsp::experiments::sample::sample_trial;
use cellsp::experiments::sparsify::sparsify_trial;
use cellsp::experiments::{run_experiment, BasisKind, Experiment, ExperimentConfig, GeneratorKind};
use cellsp::filters::{design_separate, SpectralMask};
use cellsp::inference::infer_b2;
use cellsp::sampling::{maxdet_select, reconstruct_from_samples};
use cellsp::spectral::hodge_decompose;
use cellsp::{build_b1, build_b2, build_laplacians, partition_basis, CellComplex, Component, EdgeSignalBatch};
use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;

use common::{exact_rank, exhaustive_selection, random_complex};

type Outcome = (bool, String);

fn mesh_spec(vertices: usize, edges: usize, planted: usize) -> ComplexSpec {
    ComplexSpec {
        generator: GeneratorKind::Mesh,
        vertices,
        edges,
        planted,
        max_sides: 6,
        max_candidates: 100_000,
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Random generated complex for the structural checks: mesh or random graph
/// with up to `max_v` vertices and a random number of planted polygons.
fn random_generated(rng: &mut impl Rng, max_v: usize) -> CellComplex {
    loop {
        let v = rng.random_range(4..=max_v);
        let mesh = rng.random::<bool>();
        let (generator, max_e) = if mesh {
            (GeneratorKind::Mesh, 3 * v)
        } else {
            (GeneratorKind::ErdosRenyi, 2 * v)
        };
        let e = rng.random_range((v - 1)..=max_e.min(v * (v - 1) / 2));
        let spec = ComplexSpec {
            generator,
            vertices: v,
            edges: e,
            planted: 0,
            max_sides: rng.random_range(3..=6),
            max_candidates: 1_000_000,
        };
        let Ok(graph) = cellsp::experiments::generate::generate_graph(&spec, rng) else {
            continue;
        };
        let cands = enumerate_candidates(&graph, spec.max_sides, spec.max_candidates).unwrap();
        let k = rng.random_range(0..=cands.len());
        let chosen = index::sample(rng, cands.len(), k);
        return graph
            .with_polygons(chosen.iter().map(|i| cands.cycles()[i].clone()))
            .unwrap();
    }
}

fn criterion_1() -> Outcome {
    let mut rng = stream_rng(101, 0);
    let complexes: Vec<CellComplex> = (0..500).map(|_| random_generated(&mut rng, 40)).collect();
    let start = Instant::now();
    let mut bad = 0;
    for c in &complexes {
        let b1 = build_b1(c).to_dense_i64();
        let b2 = build_b2(c).unwrap().to_dense_i64();
        if (b1 * b2).iter().any(|&x| x != 0) {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let polygons: usize = complexes.iter().map(|c| c.polygon_count()).sum();
    (
        bad == 0 && secs < 10.0,
        format!("500 complexes ({polygons} polygons), {bad} with B1 B2 != 0, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let c = CellComplex::new(3, [(0, 1), (1, 2), (0, 2)], [vec![0, 1, 2]]).unwrap();
    let lap = build_laplacians(&build_b1(&c), &build_b2(&c).unwrap()).unwrap();
    let exact = lap.l1 == DMatrix::identity(3, 3) * 3.0;
    let eig = partition_basis(&lap, None).unwrap();
    let err = eig.eigenvalues().iter().map(|l| (l - 3.0).abs()).fold(0.0, f64::max);
    (exact && err <= 1e-10, format!("L1 == 3I: {exact}, max |lambda - 3| = {err:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = stream_rng(303, 0);
    let mut worst_orth = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut dim_mismatch = 0;
    for t in 0..200 {
        let c = if t % 2 == 0 {
            random_generated(&mut rng, 30)
        } else {
            random_complex(t, rng.random_range(3..14), rng.random_range(0.1..0.6), 6)
        };
        let b1 = build_b1(&c);
        let b2 = build_b2(&c).unwrap();
        let s = DVector::from_fn(c.edge_count(), |_, _| rng.random_range(-1.0..1.0));
        let h = hodge_decompose(&b1, &b2, &s).unwrap();
        let n2 = s.norm_squared();
        let orth = [
            h.irrotational.dot(&h.solenoidal),
            h.irrotational.dot(&h.harmonic),
            h.solenoidal.dot(&h.harmonic),
        ]
        .iter()
        .map(|x| x.abs() / n2)
        .fold(0.0, f64::max);
        worst_orth = worst_orth.max(orth);
        worst_sum = worst_sum.max((h.sum() - &s).norm() / s.norm());

        let basis = partition_basis(&build_laplacians(&b1, &b2).unwrap(), None).unwrap();
        let expected = c.edge_count() - exact_rank(&b1.to_dense_i64()) - exact_rank(&b2.to_dense_i64());
        if basis.count(Component::Harmonic) != expected {
            dim_mismatch += 1;
        }
    }
    (
        worst_orth <= 1e-9 && worst_sum <= 1e-9 && dim_mismatch == 0,
        format!(
            "200 complexes: max |<a,b>|/|s|^2 = {worst_orth:.1e}, max sum error = {worst_sum:.1e}, kernel dimension mismatches = {dim_mismatch}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = stream_rng(404, 0);
    let mut batches = 0;
    let mut checks = 0;
    let mut failures = 0;
    let mut seed = 0;
    while batches < 50 {
        seed += 1;
        let c = random_complex(seed, rng.random_range(4..9), rng.random_range(0.2..0.6), 6);
        let g = c.skeleton();
        let cands = enumerate_candidates(&g, 6, 10_000).unwrap();
        if cands.is_empty() || cands.len() > 12 {
            continue;
        }
        batches += 1;
        let b1 = build_b1(&g);
        let m = rng.random_range(1..6);
        // every third batch is harmonic on a subset of cells, giving exact ties at zero
        let data = if batches % 3 == 0 {
            let k = rng.random_range(0..=cands.len());
            let sub = g
                .with_polygons(index::sample(&mut rng, cands.len(), k).iter().map(|i| cands.cycles()[i].clone()))
                .unwrap();
            let basis = complex_basis(&sub).unwrap();
            let u = basis.component_vectors(Component::Harmonic);
            if u.ncols() == 0 {
                DMatrix::from_fn(g.edge_count(), m, |_, _| rng.random_range(-1.0..1.0))
            } else {
                &u * DMatrix::from_fn(u.ncols(), m, |_, _| rng.random_range(-1.0..1.0))
            }
        } else {
            DMatrix::from_fn(g.edge_count(), m, |_, _| rng.random_range(-1.0..1.0))
        };
        let batch = EdgeSignalBatch::new(data);
        for q in 0..=cands.len().min(4) {
            checks += 1;
            let res = infer_b2(&batch, &b1, &cands, q, 0.0).unwrap();
            let (best, set) = exhaustive_selection(&res.scores, q);
            let mut chosen = res.selected.clone();
            chosen.sort_unstable();
            if res.objective() != best || chosen != set {
                failures += 1;
            }
        }
    }
    (
        failures == 0,
        format!("{batches} batches, {checks} (batch, q*) pairs, {failures} differ from exhaustive search"),
    )
}

/// Mesh complex with three planted polygons of each size 3, 4, 5 and 6 and
/// linearly independent boundaries.
fn mixed_planted_complex(seed: u64) -> CellComplex {
    for attempt in 0.. {
        let mut rng = stream_rng(seed, 1000 + attempt);
        let graph = cellsp::experiments::generate::generate_graph(&mesh_spec(30, 48, 0), &mut rng).unwrap();
        let cands = enumerate_candidates(&graph, 6, 100_000).unwrap();
        let mut polys = Vec::new();
        let mut ok = true;
        for sides in 3..=6 {
            let of_size: Vec<&Vec<usize>> = cands.cycles().iter().filter(|c| c.len() == sides).collect();
            if of_size.len() < 3 {
                ok = false;
                break;
            }
            for i in index::sample(&mut rng, of_size.len(), 3) {
                polys.push(of_size[i].clone());
            }
        }
        if !ok {
            continue;
        }
        // planted boundaries must be independent so the solenoidal space has dimension 12
        let c = graph.with_polygons(polys).unwrap();
        if complex_basis(&c).unwrap().count(Component::Solenoidal) == 12 {
            return c;
        }
    }
    unreachable!()
}

fn planted_recovery(seed: u64, spec: &SignalSpec) -> (bool, usize) {
    let c = mixed_planted_complex(seed);
    let basis = complex_basis(&c).unwrap();
    let batch = generate_signal_parts(&basis, spec, 50, &mut stream_rng(seed, 1)).unwrap().batch();
    let g = c.skeleton();
    let cands = enumerate_candidates(&g, 6, 100_000).unwrap();
    let res = infer_b2(&batch, &build_b1(&g), &cands, 12, 0.02).unwrap();
    let inferred = res.inferred_complex(&g, &cands).unwrap();
    let hits = inferred.polygons().iter().filter(|p| c.polygons().contains(p)).count();
    (hits == 12 && inferred.polygon_count() == 12, hits)
}

fn criterion_5() -> Outcome {
    let literal = SignalSpec {
        b_irr: 5,
        b_sol: 12,
        b_harm: 0,
        noise_variance: 0.0,
    };
    let mut exact = 0;
    let mut hits = 0;
    for seed in 0..20 {
        let (ok, h) = planted_recovery(seed, &literal);
        exact += ok as usize;
        hits += h;
    }
    (
        exact == 20,
        format!("irrotational + solenoidal data: exact recovery in {exact}/20 seeds, {hits}/240 planted cells found"),
    )
}

fn companion_5() -> String {
    let mut exact = 0;
    for seed in 0..20 {
        let c = mixed_planted_complex(seed);
        let harm = complex_basis(&c).unwrap().count(Component::Harmonic);
        let smooth = SignalSpec {
            b_irr: 5,
            b_sol: 0,
            b_harm: harm,
            noise_variance: 0.0,
        };
        exact += planted_recovery(seed, &smooth).0 as usize;
    }
    format!("irrotational + harmonic data: exact recovery in {exact}/20 seeds")
}

fn criterion_6() -> Outcome {
    let cfg = ExperimentConfig::defaults(Experiment::Sparsify);
    let trials: Vec<_> = (0..20).map(|t| sparsify_trial(&cfg, t).unwrap()).collect();
    let mean_at = |b: usize, k: usize| trials.iter().map(|t| t.curves[b].1[k].sparsity).sum::<f64>() / 20.0;
    let mut violations = Vec::new();
    let mut gaps = Vec::new();
    for k in 0..cfg.epsilon_points {
        let (cell, simp, graph) = (mean_at(0, k), mean_at(1, k), mean_at(2, k));
        gaps.push(format!("{:.1}/{:.1}/{:.1}", cell, simp, graph));
        if !(cell <= simp && simp <= graph + 1.0) {
            violations.push(k);
        }
    }
    assert_eq!(trials[0].curves[0].0, BasisKind::Cell);
    (
        violations.is_empty(),
        format!(
            "mean sparsity cell/simplicial/graph per epsilon: {}; violations at {:?}",
            gaps.join(" "),
            violations
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for t in 0..100 {
        let c = generate_complex(&mesh_spec(30, 60, 12), &mut stream_rng(700 + t, 0)).unwrap();
        let basis = complex_basis(&c).unwrap();
        let u = DMatrix::from_columns(
            &[
                leading_vectors(&basis, Component::Irrotational, 5).unwrap().column_iter().map(|c| c.into_owned()).collect::<Vec<_>>(),
                leading_vectors(&basis, Component::Solenoidal, 5).unwrap().column_iter().map(|c| c.into_owned()).collect(),
            ]
            .concat(),
        );
        let x = &u * DVector::from_fn(u.ncols(), |i, _| 1.0 + i as f64 * 0.3 - t as f64 * 0.01);
        let s = maxdet_select(&u, u.ncols()).unwrap();
        let values = DVector::from_iterator(s.indices.len(), s.indices.iter().map(|&i| x[i]));
        let rec = reconstruct_from_samples(&s, &values, &u).unwrap();
        worst = worst.max((rec - &x).norm() / x.norm());
    }

    let mut cfg = ExperimentConfig::defaults(Experiment::Sample);
    cfg.noise_variance = 0.01;
    cfg.sample_extra = 10;
    cfg.sample_step = 10;
    cfg.realizations = 20;
    let mut at_f = Vec::new();
    let mut at_f10 = Vec::new();
    for t in 0..100 {
        let trial = sample_trial(&cfg, t).unwrap();
        let f = trial.bandwidth;
        for &(kind, m, mse) in &trial.rows {
            if kind == BasisKind::Cell && m == f {
                at_f.push(mse);
            }
            if kind == BasisKind::Cell && m == f + 10 {
                at_f10.push(mse);
            }
        }
    }
    let (m0, m10) = (median(&at_f), median(&at_f10));
    (
        worst <= 1e-9 && at_f.len() == 100 && at_f10.len() == 100 && m10 < m0,
        format!("noiseless max relative error {worst:.1e}; noisy median MSE {m0:.4e} at m = F, {m10:.4e} at m = F + 10"),
    )
}

fn criterion_8() -> Outcome {
    let hand = SpectralMask::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
    let d = design_separate(&hand, &hand, 1, 1).unwrap();
    let hand_ok = (d.coeffs_sol[0] - 0.6).abs() <= 1e-12 && (d.fit_residual_sol - 5f64.sqrt() / 5.0).abs() <= 1e-12;

    let mut rng = stream_rng(808, 0);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut over: Vec<usize> = Vec::new();
    for _ in 0..300 {
        let n = rng.random_range(1..=6);
        let mut grid: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..10.0)).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let h: Vec<f64> = grid.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let mask = SpectralMask::new(grid.clone(), h).unwrap();
        let k = grid.len() + rng.random_range(0..3);
        let d = design_separate(&mask, &mask, k, k).unwrap();
        worst = worst.max(d.fit_residual_irr).max(d.fit_residual_sol);
        if d.fit_residual_irr.max(d.fit_residual_sol) > 1e-8 {
            over.push(grid.len());
        }
        cases += 1;
    }
    // masks on the distinct nonzero spectra of generated complexes
    for t in 0..40 {
        let c = generate_complex(&mesh_spec(30, 60, 12), &mut stream_rng(880 + t, 0)).unwrap();
        let basis = complex_basis(&c).unwrap();
        let tol = basis.zero_tolerance();
        for values in [basis.upper_eigenvalues(), basis.lower_eigenvalues()] {
            let grid = cellsp::filters::dedup_spectrum(values.as_slice(), tol);
            if grid.len() > 12 {
                continue;
            }
            let h: Vec<f64> = grid.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let mask = SpectralMask::new(grid.clone(), h).unwrap();
            let d = design_separate(&mask, &mask, grid.len(), grid.len()).unwrap();
            worst = worst.max(d.fit_residual_sol);
            if d.fit_residual_sol > 1e-8 {
                over.push(grid.len());
            }
            cases += 1;
        }
    }
    (
        hand_ok && worst <= 1e-8,
        format!(
            "hand K=1 example matches: {hand_ok}; {cases} interpolation cases, max residual {worst:.1e}, \
             {} above 1e-8 (smallest such grid has {} eigenvalues)",
            over.len(),
            over.iter().min().map_or("-".to_string(), |n| n.to_string())
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = ExperimentConfig::defaults(Experiment::Filter);
    let mut runs = 0;
    let mut sep_ge_joint = 0;
    let mut eligible = 0;
    let mut sep_beats_simp = 0;
    let mut joint_beats_simp = 0;
    for t in 0..20 {
        let trial = filter_trial(&cfg, t).unwrap();
        for &ratio in &cfg.bandwidth_ratios {
            let snr = |kind: DesignKind| {
                trial.rows.iter().find(|r| r.0 == ratio && r.1 == kind).map(|r| r.2).unwrap()
            };
            let (s, j, x) = (snr(DesignKind::Separate), snr(DesignKind::Joint), snr(DesignKind::Simplicial));
            runs += 1;
            sep_ge_joint += (s >= j) as usize;
            if trial.has_non_triangular {
                eligible += 1;
                sep_beats_simp += (s > x) as usize;
                joint_beats_simp += (j > x) as usize;
            }
        }
    }
    let frac = |a: usize, b: usize| a as f64 / b.max(1) as f64;
    let pass = frac(sep_ge_joint, runs) >= 0.95
        && eligible > 0
        && frac(sep_beats_simp, eligible) >= 0.9
        && frac(joint_beats_simp, eligible) >= 0.9;
    (
        pass,
        format!(
            "separate >= joint in {sep_ge_joint}/{runs}; with non-triangular cells ({eligible} runs): separate > simplicial in {sep_beats_simp}, joint > simplicial in {joint_beats_simp}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for exp in [Experiment::Gen, Experiment::Infer, Experiment::Sparsify, Experiment::Sample, Experiment::Filter] {
        let run = |tag: &str| {
            let mut cfg = ExperimentConfig::defaults(exp);
            cfg.seed = 1234;
            cfg.trials = 3;
            cfg.realizations = 20;
            cfg.output_dir = dir.path().join(format!("{exp}-{tag}"));
            run_experiment(&cfg).unwrap()
        };
        let a = run("a");
        let b = run("b");
        for f in a.files.iter().filter(|f| f.ends_with(".csv")) {
            files += 1;
            if std::fs::read(a.output_dir.join(f)).unwrap() != std::fs::read(b.output_dir.join(f)).unwrap() {
                differing.push(format!("{exp}/{f}"));
            }
        }
    }
    (
        differing.is_empty() && files > 0,
        format!("{files} CSV files compared across repeated runs, differing: {differing:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("chain identity B1 B2 = 0", criterion_1),
        ("filled triangle spectrum", criterion_2),
        ("Hodge orthogonality and kernel dimension", criterion_3),
        ("inference matches exhaustive search", criterion_4),
        ("noiseless planted recovery", criterion_5),
        ("sparsity ordering cell <= simplicial <= graph + 1", criterion_6),
        ("sampling reconstruction", criterion_7),
        ("filter design exactness", criterion_8),
        ("separate >= joint > simplicial filtering", criterion_9),
        ("byte-identical reruns", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(outcome) => outcome,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += (!pass) as usize;
        println!(
            "criterion {:>2} {}: {name} | {detail} ({:.1} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if i == 4 {
            println!("   info: {}", companion_5());
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
