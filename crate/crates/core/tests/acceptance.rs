//! Acceptance suite. Each criterion runs in sequence inside one test so the
//! timing budgets are not distorted by parallel test threads; one PASS/FAIL
//! line is written per criterion.

mod common;

use common::{brute_edt_squared, oracle_graph, random_points, random_volume, rng, OracleParams};
use detlattice::cellgeom::{aspect_ratios, convex_hull, extract_cells, mesh_volume, TriMesh};
use detlattice::graph::{
    build_graph, hit_fraction, AxialMetric, Axis, BetweenGate, ClusterGate, GraphParams,
};
use detlattice::pipeline::{cmd_generate, cmd_pipeline, sweep_row, Preset, RunConfig};
use detlattice::spatial::PointIndex;
use detlattice::stats::{kde_1d, kde_2d, percentile, summary, Bandwidth, Bandwidth2};
use detlattice::synthgen::{generate_graph_lattice, length_samples, EllipsoidLatticeConfig, GraphLatticeConfig};
use detlattice::vec3::{cross, dot, sub, Point3};
use detlattice::volume::{centroid_table, label_edt_squared, CentroidTable, GridSpec, LabeledVolume};
use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use std::collections::HashSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(line: &str) {
    // Written past the test harness capture so the lines always show.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn axes6() -> [(Axis, &'static str); 6] {
    [
        (Axis::PosX, "+X"),
        (Axis::NegX, "-X"),
        (Axis::PosY, "+Y"),
        (Axis::NegY, "-Y"),
        (Axis::PosZ, "+Z"),
        (Axis::NegZ, "-Z"),
    ]
}

fn table(points: Vec<Point3>) -> CentroidTable {
    let labels = (1..=points.len() as u32).collect();
    CentroidTable::new(points, labels)
}

fn resolution_sweep() -> Check {
    let base = EllipsoidLatticeConfig::default();
    let mut rows = Vec::new();
    for nx in [60, 120, 240, 480] {
        rows.push(sweep_row(&base, nx).map_err(|e| e.to_string())?);
    }
    let errs: Vec<f64> = rows.iter().map(|r| r.mean_error).collect();
    for r in &rows {
        ensure(r.instances == 60, || format!("nx={} has {} instances", r.nx, r.instances))?;
        ensure(r.payload_bytes == r.nx.pow(3) * 4, || format!("payload {}", r.payload_bytes))?;
    }
    ensure(errs.windows(2).all(|w| w[1] < w[0]), || format!("errors not strictly decreasing: {errs:?}"))?;
    ensure(errs[2] <= 5.0, || format!("error at 240 is {:.3}%", errs[2]))?;
    ensure(errs[3] <= 2.0, || format!("error at 480 is {:.3}%", errs[3]))?;
    Ok(format!(
        "mean error % at 60/120/240/480 = {:.3}/{:.3}/{:.3}/{:.3}, 60 instances each",
        errs[0], errs[1], errs[2], errs[3]
    ))
}

fn edt_exactness() -> Check {
    let mut r = rng(2024);
    let mut labels_checked = 0;
    for case in 0..200 {
        let v = random_volume(&mut r, 12);
        for id in v.instance_ids() {
            let fast = label_edt_squared(&v, id).map_err(|e| e.to_string())?;
            let slow = brute_edt_squared(&v, id);
            let mismatch = fast.values().iter().zip(&slow).position(|(a, b)| a.to_bits() != b.to_bits());
            if let Some(idx) = mismatch {
                return Err(format!(
                    "case {case} label {id} voxel {idx}: {} vs oracle {} (dims {:?}, spacing {:?})",
                    fast.values()[idx], slow[idx], v.spec.dims, v.spec.spacing
                ));
            }
            labels_checked += 1;
        }
    }
    Ok(format!("200 grids, {labels_checked} labels bit-identical to brute force"))
}

fn random_graph_params(r: &mut impl Rng, axis: Axis) -> GraphParams {
    let mut p = GraphParams::defaults([0; 3].map(|_| r.random_range(0.3..3.0)), 1.0).ungated();
    p.axis = axis;
    p.max_axial_span = r.random_range(1..=4);
    p.max_lateral_offset = r.random_range(0..=3);
    p.beam_width = r.random_range(1..=6);
    p.max_degree = r.random_range(1..=8);
    p.reverse_pass = r.random_bool(0.5);
    p.axial_metric = if r.random_bool(0.5) { AxialMetric::Continuous } else { AxialMetric::BinUnits };
    p
}

fn algorithm_fidelity() -> Check {
    let mut r = rng(77);
    let axes = axes6();
    for case in 0..50 {
        let n = r.random_range(1..=40);
        let pts = random_points(&mut r, n, 10.0);
        let (axis, name) = axes[case % 6];
        let p = random_graph_params(&mut r, axis);
        let g = build_graph(&table(pts.clone()), None, &p).map_err(|e| e.to_string())?;
        let (want, want_deg) = oracle_graph(
            &pts,
            &OracleParams {
                grids: p.bin_grids,
                axis: name,
                a_max: p.max_axial_span,
                r_side: p.max_lateral_offset,
                k: p.beam_width,
                deg_max: p.max_degree,
                reverse: p.reverse_pass,
                bin_units: p.axial_metric == AxialMetric::BinUnits,
            },
        );
        let got: Vec<(usize, usize, f64)> = g.edges.iter().map(|e| (e.i, e.j, e.length)).collect();
        ensure(got == want, || format!("case {case}: edges differ from literal transcription"))?;
        ensure(g.degree == want_deg, || format!("case {case}: degrees differ"))?;
    }
    let mut max_ratio: f64 = 0.0;
    for case in 0..10_000 {
        let n = r.random_range(1..=40);
        let extent = r.random_range(2.0..20.0);
        let pts = random_points(&mut r, n, extent);
        let axis = axes[r.random_range(0..6)].0;
        let p = random_graph_params(&mut r, axis);
        let t = table(pts);
        let g = build_graph(&t, None, &p).map_err(|e| e.to_string())?;
        let bins = detlattice::graph::bin_coords(&t, p.bin_grids, axis);
        let mut seen = HashSet::new();
        let mut deg = vec![0; n];
        for e in &g.edges {
            ensure(e.i < e.j && seen.insert((e.i, e.j)), || format!("config {case}: duplicate or unordered edge"))?;
            deg[e.i] += 1;
            deg[e.j] += 1;
            let da = bins.axial[e.j] - bins.axial[e.i];
            let lat = (bins.lat_u[e.j] - bins.lat_u[e.i]).abs() + (bins.lat_v[e.j] - bins.lat_v[e.i]).abs();
            ensure(da != 0 && da.abs() <= p.max_axial_span && lat <= p.max_lateral_offset, || {
                format!("config {case}: edge ({}, {}) violates the proposal constraints", e.i, e.j)
            })?;
        }
        ensure(deg == g.degree, || format!("config {case}: degree bookkeeping"))?;
        ensure(deg.iter().all(|&d| d <= p.max_degree), || format!("config {case}: degree cap"))?;
        ensure(2 * g.edges.len() <= n * p.max_degree, || format!("config {case}: edge bound"))?;
        max_ratio = max_ratio.max(g.edges.len() as f64 / n as f64);
    }
    Ok(format!("50 sets match the literal transcription; 10^4 configs hold all invariants (max |E|/N = {max_ratio:.2})"))
}

/// Labelled blobs on a jittered grid, returned with their centroid table.
fn blob_volume(r: &mut impl Rng) -> (LabeledVolume, CentroidTable) {
    let dims = [r.random_range(10..20), r.random_range(10..20), r.random_range(10..20)];
    let spec = GridSpec::new(dims, [1.0, r.random_range(0.8..1.2), 1.0], [0.0; 3]).unwrap();
    let mut v = LabeledVolume::zeros(spec);
    let n = r.random_range(4..14);
    let centers: Vec<Point3> = (0..n).map(|_| [0, 1, 2].map(|a| r.random_range(1.0..(dims[a] - 1) as f64))).collect();
    let radii: Vec<f64> = (0..n).map(|_| r.random_range(1.0..3.0)).collect();
    let [nx, ny, nz] = dims;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = [i as f64, j as f64, k as f64];
                for (b, c) in centers.iter().enumerate() {
                    if detlattice::vec3::dist(p, *c) <= radii[b] {
                        v.set(i, j, k, b as u32 + 1);
                        break;
                    }
                }
            }
        }
    }
    // a few rods so some pairs are bridged
    for _ in 0..r.random_range(0..6) {
        let a = centers[r.random_range(0..n)];
        let b = centers[r.random_range(0..n)];
        for s in 0..=40 {
            let q = detlattice::vec3::lerp(a, b, s as f64 / 40.0).map(|x| x.round() as usize);
            if v.get(q[0], q[1], q[2]) == 0 {
                v.set(q[0], q[1], q[2], r.random_range(1..=n as u32));
            }
        }
    }
    let t = centroid_table(&v).unwrap();
    (v, t)
}

fn edge_set(g: &detlattice::graph::LatticeGraph) -> HashSet<(usize, usize)> {
    g.edges.iter().map(|e| (e.i, e.j)).collect()
}

fn gate_correctness() -> Check {
    let mut r = rng(5);
    // solid block: every sample within one pitch of a labelled voxel
    let spec = GridSpec::new([12, 10, 8], [1.0, 0.5, 2.0], [0.0; 3]).unwrap();
    let block = LabeledVolume::new(spec, vec![1; spec.len()]).unwrap();
    let inside = PointIndex::build(&block.foreground_centers()).unwrap();
    for _ in 0..2000 {
        let p = [r.random_range(0.0..11.0), r.random_range(0.0..4.5), r.random_range(0.0..14.0)];
        let q = [r.random_range(0.0..11.0), r.random_range(0.0..4.5), r.random_range(0.0..14.0)];
        if p == q {
            continue;
        }
        let phi = hit_fraction(p, q, &inside, r.random_range(0.1..2.0), 2.0).map_err(|e| e.to_string())?;
        ensure(phi == 1.0, || format!("embedded segment gave {phi}"))?;
        let far = |x: Point3| [x[0] + 100.0, x[1], x[2]];
        let phi = hit_fraction(far(p), far(q), &inside, r.random_range(0.1..2.0), 2.0).map_err(|e| e.to_string())?;
        ensure(phi == 0.0, || format!("separated segment gave {phi}"))?;
    }

    let mut comparisons = 0;
    for case in 0..60 {
        let (v, t) = blob_volume(&mut r);
        let mut base = GraphParams::defaults([r.random_range(1.0..4.0); 3], 1.0).ungated();
        base.axis = axes6()[case % 6].0;
        base.max_lateral_offset = 3;
        base.beam_width = r.random_range(2..=6);
        base.max_degree = t.len();
        let ungated = edge_set(&build_graph(&t, Some(&v), &base).map_err(|e| e.to_string())?);
        let mut prev: Option<HashSet<(usize, usize)>> = None;
        for phi in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            let mut p = base.clone();
            p.between_gate = Some(BetweenGate { step_vox: 0.5, radius_vox: 1.0, min_hit_fraction: phi });
            let e = edge_set(&build_graph(&t, Some(&v), &p).map_err(|e| e.to_string())?);
            ensure(e.is_subset(&ungated), || format!("case {case}: between gate added an edge"))?;
            if let Some(prev) = &prev {
                ensure(e.is_subset(prev), || format!("case {case}: raising phi_min to {phi} added an edge"))?;
            }
            prev = Some(e);
            comparisons += 1;
        }
        let mut prev: Option<HashSet<(usize, usize)>> = None;
        for tau in [8.0, 4.0, 2.0, 1.0, 0.5] {
            let mut p = base.clone();
            p.cluster_gate = Some(ClusterGate { tau });
            let e = edge_set(&build_graph(&t, Some(&v), &p).map_err(|e| e.to_string())?);
            ensure(e.is_subset(&ungated), || format!("case {case}: cluster gate added an edge"))?;
            if let Some(prev) = &prev {
                ensure(e.is_subset(prev), || format!("case {case}: lowering tau to {tau} added an edge"))?;
            }
            prev = Some(e);
            comparisons += 1;
        }
    }
    Ok(format!("hit fraction exact on 2000 embedded/separated segments; {comparisons} monotone gate settings"))
}

fn recovery_params(pitch: f64) -> GraphParams {
    let mut p = GraphParams::defaults([0.45 * pitch; 3], 1.0);
    p.extra_axes = vec![Axis::PosY, Axis::PosZ];
    p.cluster_gate = Some(ClusterGate { tau: 0.6 * pitch });
    p
}

fn graph_truth_recovery() -> Check {
    let mut lines = Vec::new();
    for cells in [[2, 2, 2], [3, 3, 3], [4, 4, 4], [2, 3, 4]] {
        let cfg = GraphLatticeConfig { cells, ..Default::default() };
        let lat = generate_graph_lattice(&cfg).map_err(|e| e.to_string())?;
        let t = centroid_table(&lat.volume).map_err(|e| e.to_string())?;
        ensure(t.len() == lat.nodes.len(), || format!("{cells:?}: {} centroids", t.len()))?;
        let pitch = cfg.pitch as f64 * cfg.spacing;
        let g = build_graph(&t, Some(&lat.volume), &recovery_params(pitch)).map_err(|e| e.to_string())?;
        let got = edge_set(&g);
        let truth: HashSet<(usize, usize)> = lat.edges.iter().copied().collect();
        let tp = got.intersection(&truth).count();
        ensure(tp == got.len() && tp == truth.len(), || {
            format!("{cells:?}: precision {}/{}, recall {}/{}", tp, got.len(), tp, truth.len())
        })?;
        let found = extract_cells(&g, &lat.volume, 3.0 * cfg.spacing, 6).map_err(|e| e.to_string())?;
        ensure(found.len() == lat.void_count, || {
            format!("{cells:?}: {} cells for {} voids", found.len(), lat.void_count)
        })?;
        for c in &found {
            for (a, l) in c.record.extents.iter().enumerate() {
                ensure((l - pitch).abs() <= 0.5 * cfg.spacing, || {
                    format!("{cells:?}: cell {} extent[{a}] = {l}", c.record.cell_id)
                })?;
            }
        }
        lines.push(format!("{}x{}x{}: {} edges, {} cells", cells[0], cells[1], cells[2], truth.len(), found.len()));
    }
    Ok(format!("precision = recall = 1; {}", lines.join("; ")))
}

fn unit_cube() -> TriMesh {
    let vertices = (0..8).map(|n| [(n & 1) as f64, ((n >> 1) & 1) as f64, ((n >> 2) & 1) as f64]).collect();
    let faces = vec![
        [0, 2, 1], [1, 2, 3], [4, 5, 6], [5, 7, 6], [0, 1, 5], [0, 5, 4],
        [2, 6, 7], [2, 7, 3], [0, 4, 6], [0, 6, 2], [1, 3, 7], [1, 7, 5],
    ];
    TriMesh { vertices, faces }
}

fn contains(planes: &[(Point3, f64)], p: Point3) -> bool {
    planes.iter().all(|(n, d)| dot(*n, p) <= *d)
}

fn mesh_oracles() -> Check {
    let cube = mesh_volume(&unit_cube()).map_err(|e| e.to_string())?;
    ensure((cube - 1.0).abs() <= 1e-12, || format!("cube volume {cube}"))?;
    let tet = TriMesh {
        vertices: vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        faces: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    };
    let tv = mesh_volume(&tet).map_err(|e| e.to_string())?;
    ensure((tv - 1.0 / 6.0).abs() <= 1e-12, || format!("tetrahedron volume {tv}"))?;

    let mut r = rng(31);
    let mut worst: f64 = 0.0;
    for cloud in 0..3 {
        let n = [50, 200, 1000][cloud];
        let pts: Vec<Point3> = (0..n)
            .map(|_| {
                let p: Point3 = [r.random_range(-1.0..1.0), r.random_range(-0.5..2.0), r.random_range(0.0..0.7)];
                if cloud == 1 { [p[0] * p[0], p[1], p[2] + p[0]] } else { p }
            })
            .collect();
        let m = convex_hull(&pts).map_err(|e| e.to_string())?;
        let v = mesh_volume(&m).map_err(|e| e.to_string())?;
        let planes: Vec<(Point3, f64)> = m
            .faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| m.vertices[i]);
                let nrm = cross(sub(b, a), sub(c, a));
                (nrm, dot(nrm, a))
            })
            .collect();
        let (lo, hi) = detlattice::vec3::bounds(&m.vertices).unwrap();
        let box_vol: f64 = (0..3).map(|a| hi[a] - lo[a]).product();
        let samples = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let p = [0, 1, 2].map(|a| r.random_range(lo[a]..hi[a]));
            if contains(&planes, p) {
                hits += 1;
            }
        }
        let mc = box_vol * hits as f64 / samples as f64;
        let rel = (mc - v).abs() / v;
        worst = worst.max(rel);
        ensure(rel < 0.01, || format!("cloud {cloud}: hull {v} vs Monte Carlo {mc}"))?;
    }
    Ok(format!("cube = 1, tetrahedron = 1/6; hull vs 10^6-sample Monte Carlo worst {:.3}%", 100.0 * worst))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn statistics_oracles() -> Check {
    let mut r = rng(11);
    let ln = LogNormal::new(0.0, 0.5).unwrap();
    for trial in 0..50 {
        let xs: Vec<f64> = (0..25).map(|_| ln.sample(&mut r) * 3.0 - 1.0).collect();
        let n = xs.len() as f64;
        let mu = xs.iter().sum::<f64>() / n;
        let sigma = (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0)).sqrt();
        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pct = |p: f64| {
            let h = p / 100.0 * 24.0;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        let s = summary(&xs).map_err(|e| e.to_string())?;
        ensure(
            rel_close(s.mu, mu, 1e-12)
                && rel_close(s.sigma, sigma, 1e-12)
                && rel_close(s.median, sorted[12], 1e-12)
                && rel_close(s.p5, pct(5.0), 1e-12)
                && rel_close(s.p95, pct(95.0), 1e-12)
                && s.n == 25
                && rel_close(s.cv.unwrap(), sigma / mu, 1e-12),
            || format!("trial {trial}: summary differs from direct formulas"),
        )?;
        for p in [0.0, 17.0, 50.0, 83.5, 100.0] {
            ensure(rel_close(percentile(&xs, p).unwrap(), pct(p), 1e-12), || format!("percentile {p}"))?;
        }
        // affine equivariance
        let (a, b) = (r.random_range(0.1..10.0), r.random_range(-5.0..5.0));
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let t = summary(&ys).map_err(|e| e.to_string())?;
        ensure(
            rel_close(t.mu, a * s.mu + b, 1e-12)
                && rel_close(t.sigma, a * s.sigma, 1e-12)
                && rel_close(t.median, a * s.median + b, 1e-12),
            || format!("trial {trial}: affine equivariance"),
        )?;
    }

    let xs: Vec<f64> = (0..25).map(|_| ln.sample(&mut r)).collect();
    let c = kde_1d(&xs, 256, Bandwidth::Auto).map_err(|e| e.to_string())?;
    let h = c.bandwidth;
    let norm = 1.0 / (25.0 * h * (2.0 * std::f64::consts::PI).sqrt());
    let direct: Vec<f64> = c
        .grid
        .iter()
        .map(|&x| xs.iter().map(|s| (-0.5 * ((x - s) / h).powi(2)).exp()).sum::<f64>() * norm)
        .collect();
    let dmax = direct.iter().copied().fold(0.0, f64::max);
    for (k, d) in direct.iter().enumerate() {
        ensure((d / dmax - c.density[k]).abs() <= 1e-10, || format!("1D KDE differs at {k}"))?;
    }
    ensure(c.grid.windows(2).all(|w| w[1] > w[0]), || "1D grid not increasing".into())?;
    let raw: Vec<f64> = c.density.iter().map(|d| d * c.peak).collect();
    let mass: f64 = (1..raw.len()).map(|k| 0.5 * (raw[k] + raw[k - 1]) * (c.grid[k] - c.grid[k - 1])).sum();
    ensure((mass - 1.0).abs() <= 1e-3, || format!("1D KDE mass {mass}"))?;

    let ys: Vec<f64> = (0..25).map(|_| r.random_range(1.0..2.5)).collect();
    let g = kde_2d(&xs, &ys, 128, Bandwidth2::Auto, true).map_err(|e| e.to_string())?;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let (hx, hy) = g.bandwidth;
    let mut direct = Vec::with_capacity(128 * 128);
    for &y in &g.y_grid {
        for &x in &g.x_grid {
            let s: f64 = lx
                .iter()
                .zip(&ys)
                .map(|(a, b)| (-0.5 * (((x - a) / hx).powi(2) + ((y - b) / hy).powi(2))).exp())
                .sum();
            direct.push(s / (25.0 * hx * hy * 2.0 * std::f64::consts::PI));
        }
    }
    let dmax = direct.iter().copied().fold(0.0, f64::max);
    for (k, d) in direct.iter().enumerate() {
        ensure((d / dmax - g.density[k]).abs() <= 1e-10, || format!("2D KDE differs at {k}"))?;
    }

    // every emitted density peaks at exactly one
    let mut curves = 0;
    for trial in 0..40 {
        let n = r.random_range(1..30);
        let a: Vec<f64> = (0..n).map(|_| ln.sample(&mut r)).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let c = kde_1d(&a, r.random_range(2..300), Bandwidth::Auto).map_err(|e| e.to_string())?;
        let g = kde_2d(&a, &b, r.random_range(2..64), Bandwidth2::Auto, trial % 2 == 0).map_err(|e| e.to_string())?;
        let m1 = c.density.iter().copied().fold(f64::MIN, f64::max);
        let m2 = g.density.iter().copied().fold(f64::MIN, f64::max);
        ensure(m1 == 1.0 && m2 == 1.0, || format!("trial {trial}: peaks {m1}, {m2}"))?;
        curves += 2;
    }

    let big = length_samples(10_000, 8.36e-3, 0.16, 3).map_err(|e| e.to_string())?;
    let s = summary(&big).map_err(|e| e.to_string())?;
    let cv = s.cv.unwrap();
    ensure((0.15..=0.17).contains(&cv), || format!("cv {cv}"))?;
    Ok(format!("summary/percentiles within 1e-12, KDEs within 1e-10, {curves} densities peak at 1, mass {mass:.6}, cv {cv:.4}"))
}

fn aspect_ratio_consistency() -> Check {
    let ar = aspect_ratios([8.36e-3, 5.30e-3, 4.82e-3]).map_err(|e| e.to_string())?;
    let want = [1.577, 1.734, 1.100];
    for a in 0..3 {
        ensure((ar[a] - want[a]).abs() <= 1e-3, || format!("AR{} = {}", a + 1, ar[a]))?;
    }
    ensure((1.0..=1.2).contains(&ar[2]), || format!("AR3 = {} outside 1.0-1.2", ar[2]))?;
    Ok(format!("AR1 = {:.4}, AR2 = {:.4}, AR3 = {:.4}", ar[0], ar[1], ar[2]))
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                let mut bytes = std::fs::read(&p).unwrap();
                if rel == "manifest.json" {
                    let mut m: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                    m.as_object_mut().unwrap().remove("created_unix");
                    bytes = serde_json::to_vec(&m).unwrap();
                }
                out.push((rel, bytes));
            }
        }
    }
    out.sort();
    out
}

fn run_once(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut cfg = RunConfig::from_toml(
        "seed = 17\n[generate]\npreset = \"graphlattice\"\n[generate.graphlattice]\ncells = [3, 2, 2]\njitter = 0.1\n\
         [graph]\nextra_axes = [\"+Y\", \"+Z\"]\ngrid = [4.95, 4.95, 4.95]\ntau = 6.6\n[cells]\ntau_cell = 3.0\n",
    )
    .unwrap();
    assert_eq!(cfg.generate.preset, Preset::Graphlattice);
    cfg.output = root.join("gen");
    cmd_generate(&cfg).unwrap();
    cfg.input = Some(root.join("gen/volume"));
    cfg.output = root.join("run");
    cmd_pipeline(&cfg).unwrap();
    let mut files = read_tree(&root.join("gen"));
    files.extend(read_tree(&root.join("run")).into_iter().map(|(n, b)| (format!("run/{n}"), b)));
    files
}

fn determinism() -> Check {
    // Same config, same paths: the second run replaces the first.
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fa = run_once(root.path());
    for d in ["gen", "run"] {
        std::fs::remove_dir_all(root.path().join(d)).map_err(|e| e.to_string())?;
    }
    let fb = run_once(root.path());
    let names: Vec<&String> = fa.iter().map(|(n, _)| n).collect();
    ensure(names == fb.iter().map(|(n, _)| n).collect::<Vec<_>>(), || "artifact sets differ".into())?;
    for ((n, x), (_, y)) in fa.iter().zip(&fb) {
        ensure(x == y, || format!("{n} differs between runs"))?;
    }
    ensure(names.iter().any(|n| n.ends_with("cells.csv")), || "no cells artifact".into())?;
    Ok(format!("{} artifacts byte-identical across two seeded runs", fa.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("1 resolution sweep", Duration::from_secs(120), resolution_sweep),
        ("2 EDT exactness", Duration::from_secs(30), edt_exactness),
        ("3 graph construction fidelity", Duration::from_secs(60), algorithm_fidelity),
        ("4 gate correctness", Duration::from_secs(30), gate_correctness),
        ("5 graph-truth recovery", Duration::from_secs(60), graph_truth_recovery),
        ("6 mesh measurement oracles", Duration::from_secs(30), mesh_oracles),
        ("7 statistics oracles", Duration::from_secs(30), statistics_oracles),
        ("8 aspect-ratio consistency", Duration::from_secs(30), aspect_ratio_consistency),
        ("9 determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = Vec::new();
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > budget => Err(format!("{msg}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => report(&format!("[PASS] criterion {name} ({took:.2?}): {msg}")),
            Err(msg) => {
                report(&format!("[FAIL] criterion {name} ({took:.2?}): {msg}"));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
