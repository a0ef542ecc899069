//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use detlattice::volume::{GridSpec, LabeledVolume};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Literal, unoptimised transcription of the lattice-graph pseudocode with
/// gates off. `axis` is one of "+X", "-X", "+Y", "-Y", "+Z", "-Z".
pub struct OracleParams {
    pub grids: [f64; 3],
    pub axis: &'static str,
    pub a_max: i64,
    pub r_side: i64,
    pub k: usize,
    pub deg_max: usize,
    pub reverse: bool,
    pub bin_units: bool,
}

pub fn oracle_graph(c: &[[f64; 3]], p: &OracleParams) -> (Vec<(usize, usize, f64)>, Vec<usize>) {
    let n = c.len();
    // Map axis → (ax, sgn, u, v)
    let (ax, sgn, u, v) = match p.axis {
        "+X" => (0, 1, 1, 2),
        "-X" => (0, -1, 1, 2),
        "+Y" => (1, 1, 0, 2),
        "-Y" => (1, -1, 0, 2),
        "+Z" => (2, 1, 0, 1),
        "-Z" => (2, -1, 0, 1),
        _ => panic!("axis"),
    };
    let bin = |a: usize, x: f64| {
        let min = c.iter().map(|q| q[a]).fold(f64::INFINITY, f64::min);
        ((x - min) / p.grids[a]).floor() as i64
    };
    let mut ijk = vec![[0i64; 3]; n];
    for i in 0..n {
        for a in 0..3 {
            ijk[i][a] = bin(a, c[i][a]);
        }
    }
    let aa: Vec<i64> = ijk.iter().map(|b| b[ax]).collect();
    let uu: Vec<i64> = ijk.iter().map(|b| b[u]).collect();
    let vv: Vec<i64> = ijk.iter().map(|b| b[v]).collect();

    let mut o_fwd: Vec<usize> = (0..n).collect();
    o_fwd.sort_by_key(|&i| (sgn * aa[i], uu[i], vv[i], i));
    let mut orders = vec![o_fwd];
    if p.reverse {
        let mut o_rev: Vec<usize> = (0..n).collect();
        o_rev.sort_by_key(|&i| (-(sgn * aa[i]), uu[i], vv[i], i));
        orders.push(o_rev);
    }
    let mut deg = vec![0usize; n];
    let mut e: Vec<(usize, usize, f64)> = Vec::new();
    let mut s: Vec<(usize, usize)> = Vec::new();
    for o in &orders {
        for &i in o {
            if deg[i] == p.deg_max {
                continue;
            }
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let da = aa[j] - aa[i];
                if sgn * da <= 0 || da.abs() > p.a_max || (uu[j] - uu[i]).abs() + (vv[j] - vv[i]).abs() > p.r_side {
                    continue;
                }
                let d_ax = if p.bin_units { da.abs() as f64 } else { sgn as f64 * (c[j][ax] - c[i][ax]) };
                let lat = ((c[j][u] - c[i][u]).powi(2) + (c[j][v] - c[i][v]).powi(2)).sqrt();
                cands.push((j, d_ax, lat));
            }
            // stable sort: equal keys keep ascending j
            cands.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.2.partial_cmp(&y.2).unwrap()));
            cands.truncate(p.k);
            for (j, _, _) in cands {
                if deg[i] == p.deg_max || deg[j] == p.deg_max {
                    continue;
                }
                let key = (i.min(j), i.max(j));
                if s.contains(&key) {
                    continue;
                }
                let len = ((c[j][0] - c[i][0]).powi(2) + (c[j][1] - c[i][1]).powi(2) + (c[j][2] - c[i][2]).powi(2)).sqrt();
                e.push((key.0, key.1, len));
                s.push(key);
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }
    (e, deg)
}

/// Weighted squared distance from every voxel of `id` to the nearest voxel
/// (in or beyond the grid) not carrying `id`, by exhaustive search. Terms are
/// summed as `(wx a^2 + wy b^2) + wz c^2`.
pub fn brute_edt_squared(v: &LabeledVolume, id: u32) -> Vec<f64> {
    let [nx, ny, nz] = v.spec.dims;
    let w = v.spec.spacing.map(|s| s * s);
    let q = |w: f64, d: i64| w * ((d as f64) * (d as f64));
    let mut out = vec![0.0; v.spec.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if v.get(i, j, k) != id {
                    continue;
                }
                let mut best = f64::INFINITY;
                // beyond a grid face
                for (a, (c, n)) in [(i, nx), (j, ny), (k, nz)].into_iter().enumerate() {
                    let d = (c as i64 + 1).min((n - c) as i64);
                    let mut t = [0.0; 3];
                    t[a] = q(w[a], d);
                    best = best.min((t[0] + t[1]) + t[2]);
                }
                for kk in 0..nz {
                    for jj in 0..ny {
                        for ii in 0..nx {
                            if v.get(ii, jj, kk) == id {
                                continue;
                            }
                            let d = (q(w[0], ii as i64 - i as i64) + q(w[1], jj as i64 - j as i64))
                                + q(w[2], kk as i64 - k as i64);
                            best = best.min(d);
                        }
                    }
                }
                out[v.spec.index(i, j, k)] = best;
            }
        }
    }
    out
}

/// Random labelled grid with up to `max_dim` voxels per axis.
pub fn random_volume(r: &mut SplitMix64, max_dim: usize) -> LabeledVolume {
    let dims = [0; 3].map(|_| r.random_range(1..=max_dim));
    let spacing = [0; 3].map(|_| if r.random_bool(0.3) { 1.0 } else { r.random_range(0.25..3.0) });
    let spec = GridSpec::new(dims, spacing, [0.0; 3]).unwrap();
    let labels = r.random_range(1..=4u32);
    let fill = r.random_range(0.2..0.95);
    let mut v = LabeledVolume::zeros(spec);
    // blocky regions so labels have interiors
    for l in v.labels_mut() {
        if r.random_bool(fill) {
            *l = r.random_range(1..=labels);
        }
    }
    let [nx, ny, nz] = dims;
    for _ in 0..r.random_range(0..4) {
        let lo = [r.random_range(0..nx), r.random_range(0..ny), r.random_range(0..nz)];
        let hi = [0, 1, 2].map(|a| r.random_range(lo[a]..dims[a]));
        let id = r.random_range(1..=labels);
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    v.set(i, j, k, id);
                }
            }
        }
    }
    v
}

/// Random centroid set with coordinates in `[0, extent)` on each axis.
pub fn random_points(r: &mut SplitMix64, n: usize, extent: f64) -> Vec<[f64; 3]> {
    (0..n).map(|_| [0; 3].map(|_| r.random_range(0.0..extent))).collect()
}
