//! Euclidean distance field over an occupancy grid.
//!
//! Distances are unsigned (distance to the nearest obstacle, zero on occupied
//! voxels) and clamped to a truncation radius. Construction is the exact
//! lower-envelope distance transform run once per axis on squared voxel
//! distances, so the result matches a brute-force nearest-occupied scan
//! bit for bit.

use crate::grid::OccupancyGrid;
use crate::types::Vec3;

/// Unsigned truncated Euclidean distance field (m).
#[derive(Debug, Clone)]
pub struct Esdf {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    truncation: f64,
    distance: Vec<f64>,
}

/// Result of a distance query: trilinear interpolation of the eight
/// surrounding voxel distances. `out_of_bounds` is set when the query point
/// lies outside the grid box and the value comes from the clamped boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSample {
    pub distance: f64,
    pub out_of_bounds: bool,
}

const INF: f64 = f64::INFINITY;

/// 1D squared-distance transform (lower envelope of parabolas).
/// `f` holds squared distances in voxel units; output overwrites `d`.
fn transform_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let fq = f[q];
        if fq == INF && f[v[k]] == INF {
            // Both parabolas are at infinity; keep the envelope unchanged.
            continue;
        }
        let mut s;
        loop {
            let p = v[k];
            s = ((fq + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

impl Esdf {
    /// Build the field from a grid, clamping distances to `truncation` (m).
    pub fn build(grid: &OccupancyGrid, truncation: f64) -> Self {
        let dims = grid.dims();
        let (nx, ny, nz) = (dims[0], dims[1], dims[2]);
        let total = nx * ny * nz;
        // Squared distance in voxel units; occupied voxels seed at zero.
        let mut sq = vec![INF; total];
        for idx in grid.occupied_indices() {
            sq[grid.linear_index(idx)] = 0.0;
        }

        let nmax = nx.max(ny).max(nz);
        let mut f = vec![0.0; nmax];
        let mut d = vec![0.0; nmax];
        let mut v = vec![0usize; nmax];
        let mut z = vec![0.0; nmax + 1];

        let at = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;

        // Pass along x.
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    f[i] = sq[at(i, j, k)];
                }
                transform_1d(&f[..nx], &mut d[..nx], &mut v[..nx], &mut z[..nx + 1]);
                for i in 0..nx {
                    sq[at(i, j, k)] = d[i];
                }
            }
        }
        // Pass along y.
        for k in 0..nz {
            for i in 0..nx {
                for j in 0..ny {
                    f[j] = sq[at(i, j, k)];
                }
                transform_1d(&f[..ny], &mut d[..ny], &mut v[..ny], &mut z[..ny + 1]);
                for j in 0..ny {
                    sq[at(i, j, k)] = d[j];
                }
            }
        }
        // Pass along z.
        for j in 0..ny {
            for i in 0..nx {
                for k in 0..nz {
                    f[k] = sq[at(i, j, k)];
                }
                transform_1d(&f[..nz], &mut d[..nz], &mut v[..nz], &mut z[..nz + 1]);
                for k in 0..nz {
                    sq[at(i, j, k)] = d[k];
                }
            }
        }

        let res = grid.resolution();
        let distance = sq
            .into_iter()
            .map(|s| {
                if s == INF {
                    truncation
                } else {
                    (s.sqrt() * res).min(truncation)
                }
            })
            .collect();

        Self {
            origin: grid.origin(),
            resolution: res,
            dims,
            truncation,
            distance,
        }
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    /// Stored distance at a voxel.
    pub fn voxel_distance(&self, idx: [usize; 3]) -> f64 {
        self.distance[(idx[2] * self.dims[1] + idx[1]) * self.dims[0] + idx[0]]
    }

    /// Lower corner of the field's world box.
    pub fn min_corner(&self) -> Vec3 {
        self.origin
    }

    /// Upper corner of the field's world box.
    pub fn max_corner(&self) -> Vec3 {
        self.origin
            + Vec3::new(
                self.dims[0] as f64 * self.resolution,
                self.dims[1] as f64 * self.resolution,
                self.dims[2] as f64 * self.resolution,
            )
    }

    fn in_bounds(&self, p: Vec3) -> bool {
        let lo = self.min_corner();
        let hi = self.max_corner();
        (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
    }

    /// Per-axis interpolation cell: base voxel index and fraction within it.
    fn cell(&self, p: Vec3) -> ([usize; 3], [f64; 3]) {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let u = (p[a] - self.origin[a]) / self.resolution - 0.5;
            let max_base = self.dims[a].saturating_sub(2);
            if self.dims[a] == 1 {
                base[a] = 0;
                frac[a] = 0.0;
                continue;
            }
            let fl = u.floor();
            let mut b = fl as isize;
            let mut t = u - fl;
            if b < 0 {
                b = 0;
                t = 0.0;
            } else if b as usize > max_base {
                b = max_base as isize;
                t = 1.0;
            }
            base[a] = b as usize;
            frac[a] = t.clamp(0.0, 1.0);
        }
        (base, frac)
    }

    /// Trilinear interpolation of the surrounding voxel distances, clamped to
    /// the boundary outside the grid.
    pub fn sample(&self, p: Vec3) -> DistanceSample {
        let out_of_bounds = !self.in_bounds(p);
        let (b, t) = self.cell(p);
        let d = |di: usize, dj: usize, dk: usize| -> f64 {
            let i = (b[0] + di).min(self.dims[0] - 1);
            let j = (b[1] + dj).min(self.dims[1] - 1);
            let k = (b[2] + dk).min(self.dims[2] - 1);
            self.voxel_distance([i, j, k])
        };
        let lerp = |a: f64, bb: f64, s: f64| a + (bb - a) * s;
        let c00 = lerp(d(0, 0, 0), d(1, 0, 0), t[0]);
        let c10 = lerp(d(0, 1, 0), d(1, 1, 0), t[0]);
        let c01 = lerp(d(0, 0, 1), d(1, 0, 1), t[0]);
        let c11 = lerp(d(0, 1, 1), d(1, 1, 1), t[0]);
        let c0 = lerp(c00, c10, t[1]);
        let c1 = lerp(c01, c11, t[1]);
        DistanceSample {
            distance: lerp(c0, c1, t[2]),
            out_of_bounds,
        }
    }

    /// Analytic spatial gradient of the trilinear interpolant at `p`.
    ///
    /// Exact inside an interpolation cell (the interpolant is multilinear);
    /// used by the collision cost so its gradient matches finite differences
    /// of the cost itself.
    pub fn sample_gradient(&self, p: Vec3) -> Vec3 {
        if !self.in_bounds(p) {
            return Vec3::zeros();
        }
        let (b, t) = self.cell(p);
        let d = |di: usize, dj: usize, dk: usize| -> f64 {
            let i = (b[0] + di).min(self.dims[0] - 1);
            let j = (b[1] + dj).min(self.dims[1] - 1);
            let k = (b[2] + dk).min(self.dims[2] - 1);
            self.voxel_distance([i, j, k])
        };
        let (tx, ty, tz) = (t[0], t[1], t[2]);
        let v000 = d(0, 0, 0);
        let v100 = d(1, 0, 0);
        let v010 = d(0, 1, 0);
        let v110 = d(1, 1, 0);
        let v001 = d(0, 0, 1);
        let v101 = d(1, 0, 1);
        let v011 = d(0, 1, 1);
        let v111 = d(1, 1, 1);
        let gx = (1.0 - ty) * (1.0 - tz) * (v100 - v000)
            + ty * (1.0 - tz) * (v110 - v010)
            + (1.0 - ty) * tz * (v101 - v001)
            + ty * tz * (v111 - v011);
        let gy = (1.0 - tx) * (1.0 - tz) * (v010 - v000)
            + tx * (1.0 - tz) * (v110 - v100)
            + (1.0 - tx) * tz * (v011 - v001)
            + tx * tz * (v111 - v101);
        let gz = (1.0 - tx) * (1.0 - ty) * (v001 - v000)
            + tx * (1.0 - ty) * (v101 - v100)
            + (1.0 - tx) * ty * (v011 - v010)
            + tx * ty * (v111 - v110);
        Vec3::new(gx, gy, gz) / self.resolution
    }
}

/// Build a field straight from a grid with the default 2 m truncation.
pub fn build_esdf(grid: &OccupancyGrid, truncation: f64) -> Esdf {
    Esdf::build(grid, truncation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Vec3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive nearest-occupied scan, the independent oracle.
    fn brute_force(grid: &OccupancyGrid, truncation: f64) -> Vec<f64> {
        let dims = grid.dims();
        let occupied: Vec<[usize; 3]> = grid.occupied_indices().collect();
        let mut out = Vec::with_capacity(grid.voxel_count());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let mut best = f64::INFINITY;
                    for o in &occupied {
                        let dx = i as f64 - o[0] as f64;
                        let dy = j as f64 - o[1] as f64;
                        let dz = k as f64 - o[2] as f64;
                        let sq = dx * dx + dy * dy + dz * dz;
                        if sq < best {
                            best = sq;
                        }
                    }
                    let d = if best.is_finite() {
                        (best.sqrt() * grid.resolution()).min(truncation)
                    } else {
                        truncation
                    };
                    out.push(d);
                }
            }
        }
        out
    }

    fn assert_matches_brute_force(grid: &OccupancyGrid, truncation: f64) {
        let esdf = Esdf::build(grid, truncation);
        let oracle = brute_force(grid, truncation);
        let dims = grid.dims();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let got = esdf.voxel_distance([i, j, k]);
                    let want = oracle[(k * dims[1] + j) * dims[0] + i];
                    assert_eq!(got, want, "voxel ({i},{j},{k})");
                }
            }
        }
    }

    #[test]
    fn all_free_grid_is_truncation() {
        let g = OccupancyGrid::new(Vec3::zeros(), 0.1, [10, 10, 10]).unwrap();
        let e = Esdf::build(&g, 2.0);
        for k in 0..10 {
            for j in 0..10 {
                for i in 0..10 {
                    assert_eq!(e.voxel_distance([i, j, k]), 2.0);
                }
            }
        }
    }

    #[test]
    fn all_occupied_grid_is_zero() {
        let mut g = OccupancyGrid::new(Vec3::zeros(), 0.1, [4, 4, 4]).unwrap();
        for k in 0..4 {
            for j in 0..4 {
                for i in 0..4 {
                    g.set_occupied([i, j, k], true);
                }
            }
        }
        let e = Esdf::build(&g, 2.0);
        assert_eq!(e.voxel_distance([2, 2, 2]), 0.0);
        assert_eq!(e.voxel_distance([0, 0, 0]), 0.0);
    }

    #[test]
    fn single_obstacle_axis_neighbor() {
        let mut g = OccupancyGrid::new(Vec3::zeros(), 0.1, [9, 9, 9]).unwrap();
        g.set_occupied([4, 4, 4], true);
        let e = Esdf::build(&g, 2.0);
        assert!((e.voxel_distance([5, 4, 4]) - 0.1).abs() < 1e-15);
        assert!((e.voxel_distance([4, 3, 4]) - 0.1).abs() < 1e-15);
        assert_eq!(e.voxel_distance([4, 4, 4]), 0.0);
    }

    #[test]
    fn random_grids_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let mut g = OccupancyGrid::new(Vec3::zeros(), 0.1, [16, 16, 16]).unwrap();
            for k in 0..16 {
                for j in 0..16 {
                    for i in 0..16 {
                        if rng.gen_bool(0.1) {
                            g.set_occupied([i, j, k], true);
                        }
                    }
                }
            }
            assert_matches_brute_force(&g, 2.0);
        }
    }

    #[test]
    fn lipschitz_on_adjacent_voxels() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = OccupancyGrid::new(Vec3::zeros(), 0.25, [12, 12, 8]).unwrap();
        for k in 0..8 {
            for j in 0..12 {
                for i in 0..12 {
                    if rng.gen_bool(0.15) {
                        g.set_occupied([i, j, k], true);
                    }
                }
            }
        }
        let e = Esdf::build(&g, 2.0);
        let step = g.resolution();
        for k in 0..8 {
            for j in 0..12 {
                for i in 0..11 {
                    let a = e.voxel_distance([i, j, k]);
                    let b = e.voxel_distance([i + 1, j, k]);
                    assert!((a - b).abs() <= step + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sample_at_voxel_center_is_stored_distance() {
        let mut g = OccupancyGrid::new(Vec3::new(-1.0, -1.0, 0.0), 0.2, [10, 10, 6]).unwrap();
        g.set_occupied([5, 5, 2], true);
        let e = Esdf::build(&g, 2.0);
        for idx in [[2usize, 3usize, 1usize], [7, 1, 4], [5, 5, 2]] {
            let c = Vec3::new(
                -1.0 + (idx[0] as f64 + 0.5) * 0.2,
                -1.0 + (idx[1] as f64 + 0.5) * 0.2,
                (idx[2] as f64 + 0.5) * 0.2,
            );
            let s = e.sample(c);
            assert!(!s.out_of_bounds);
            assert!((s.distance - e.voxel_distance(idx)).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_midpoint_is_average() {
        // Two adjacent voxels with distances 1.0 and 2.0 (planar obstacle far
        // on one side makes the x-gradient uniform in the sampled cell).
        let mut g = OccupancyGrid::new(Vec3::zeros(), 1.0, [8, 3, 3]).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                g.set_occupied([0, j, k], true);
            }
        }
        let e = Esdf::build(&g, 10.0);
        assert_eq!(e.voxel_distance([1, 1, 1]), 1.0);
        assert_eq!(e.voxel_distance([2, 1, 1]), 2.0);
        let mid = Vec3::new(2.0, 1.5, 1.5); // halfway between centers x=1.5 and x=2.5
        let s = e.sample(mid);
        assert!((s.distance - 1.5).abs() < 1e-12);
    }

    #[test]
    fn random_samples_match_scalar_interpolation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut g = OccupancyGrid::new(Vec3::new(-0.5, -0.5, -0.5), 0.25, [12, 10, 8]).unwrap();
        for _ in 0..40 {
            let idx = [
                rng.gen_range(0..12usize),
                rng.gen_range(0..10usize),
                rng.gen_range(0..8usize),
            ];
            g.set_occupied(idx, true);
        }
        let e = Esdf::build(&g, 2.0);

        // Independent scalar trilinear interpolation.
        let oracle = |p: Vec3| -> f64 {
            let mut b = [0usize; 3];
            let mut t = [0.0f64; 3];
            let dims = e.dims();
            for a in 0..3 {
                let u = (p[a] - e.origin()[a]) / e.resolution() - 0.5;
                let fl = u.floor();
                let mut bi = fl as isize;
                let mut tt = u - fl;
                if bi < 0 {
                    bi = 0;
                    tt = 0.0;
                }
                if bi as usize > dims[a] - 2 {
                    bi = (dims[a] - 2) as isize;
                    tt = 1.0;
                }
                b[a] = bi as usize;
                t[a] = tt;
            }
            let mut acc = 0.0;
            for dk in 0..2usize {
                for dj in 0..2usize {
                    for di in 0..2usize {
                        let w = (if di == 1 { t[0] } else { 1.0 - t[0] })
                            * (if dj == 1 { t[1] } else { 1.0 - t[1] })
                            * (if dk == 1 { t[2] } else { 1.0 - t[2] });
                        acc += w * e.voxel_distance([b[0] + di, b[1] + dj, b[2] + dk]);
                    }
                }
            }
            acc
        };

        let lo = e.min_corner();
        let hi = e.max_corner();
        for _ in 0..100 {
            let p = Vec3::new(
                rng.gen_range(lo.x..hi.x),
                rng.gen_range(lo.y..hi.y),
                rng.gen_range(lo.z..hi.z),
            );
            let s = e.sample(p);
            assert!(!s.out_of_bounds);
            assert!((s.distance - oracle(p)).abs() < 1e-12, "at {p:?}");
        }
    }

    #[test]
    fn out_of_bounds_clamps_and_flags() {
        let mut g = OccupancyGrid::new(Vec3::zeros(), 0.5, [6, 6, 4]).unwrap();
        g.set_occupied([3, 3, 1], true);
        let e = Esdf::build(&g, 2.0);
        let s = e.sample(Vec3::new(-5.0, 1.0, 1.0));
        assert!(s.out_of_bounds);
        let edge = e.sample(Vec3::new(0.0, 1.0, 1.0));
        assert!((s.distance - edge.distance).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences_inside_cells() {
        let mut g = OccupancyGrid::new(Vec3::zeros(), 0.25, [12, 12, 8]).unwrap();
        g.fill_box(Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.5, 2.0, 1.0));
        let e = Esdf::build(&g, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            // Sample strictly inside a cell so the interpolant is smooth there.
            let p = Vec3::new(
                rng.gen_range(4..10) as f64 * 0.25 + 0.25 * 0.5 + 0.06,
                rng.gen_range(4..10) as f64 * 0.25 + 0.25 * 0.5 + 0.06,
                rng.gen_range(1..6) as f64 * 0.25 + 0.25 * 0.5 + 0.06,
            );
            let grad = e.sample_gradient(p);
            let h = 1e-7;
            for a in 0..3 {
                let mut pp = p;
                let mut pm = p;
                pp[a] += h;
                pm[a] -= h;
                let fd = (e.sample(pp).distance - e.sample(pm).distance) / (2.0 * h);
                assert!(
                    (grad[a] - fd).abs() < 1e-5,
                    "axis {a} analytic {} fd {fd}",
                    grad[a]
                );
            }
        }
    }
}
