//! Axis-aligned occupancy grid used as the map source for planning.

use crate::types::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {0}x{1}x{2}")]
    EmptyDims(usize, usize, usize),
    #[error("grid resolution must be positive, got {0}")]
    BadResolution(f64),
}

/// Boolean voxel grid. Voxel `(i, j, k)` spans the world-space box
/// `origin + [i, j, k]·res .. origin + [i+1, j+1, k+1]·res`; its center sits
/// at `origin + ([i, j, k] + 0.5)·res`.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    occupancy: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(origin: Vec3, resolution: f64, dims: [usize; 3]) -> Result<Self, GridError> {
        if dims.iter().any(|&d| d == 0) {
            return Err(GridError::EmptyDims(dims[0], dims[1], dims[2]));
        }
        if !(resolution > 0.0) {
            return Err(GridError::BadResolution(resolution));
        }
        Ok(Self {
            origin,
            resolution,
            dims,
            occupancy: vec![false; dims[0] * dims[1] * dims[2]],
        })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_count(&self) -> usize {
        self.occupancy.len()
    }

    #[inline]
    pub fn linear_index(&self, idx: [usize; 3]) -> usize {
        (idx[2] * self.dims[1] + idx[1]) * self.dims[0] + idx[0]
    }

    #[inline]
    pub fn is_occupied(&self, idx: [usize; 3]) -> bool {
        self.occupancy[self.linear_index(idx)]
    }

    pub fn set_occupied(&mut self, idx: [usize; 3], value: bool) {
        let li = self.linear_index(idx);
        self.occupancy[li] = value;
    }

    /// World-space center of a voxel.
    pub fn voxel_center(&self, idx: [usize; 3]) -> Vec3 {
        self.origin
            + Vec3::new(
                (idx[0] as f64 + 0.5) * self.resolution,
                (idx[1] as f64 + 0.5) * self.resolution,
                (idx[2] as f64 + 0.5) * self.resolution,
            )
    }

    /// Voxel containing a world point, or `None` outside the grid box.
    pub fn world_to_voxel(&self, p: Vec3) -> Option<[usize; 3]> {
        let rel = (p - self.origin) / self.resolution;
        let mut idx = [0usize; 3];
        for axis in 0..3 {
            let v = rel[axis];
            if v < 0.0 || v >= self.dims[axis] as f64 {
                return None;
            }
            idx[axis] = v as usize;
        }
        Some(idx)
    }

    /// True when the point lies inside the grid's world-space box.
    pub fn contains(&self, p: Vec3) -> bool {
        self.world_to_voxel(p).is_some()
    }

    /// Lower corner of the grid box.
    pub fn min_corner(&self) -> Vec3 {
        self.origin
    }

    /// Upper corner of the grid box.
    pub fn max_corner(&self) -> Vec3 {
        self.origin
            + Vec3::new(
                self.dims[0] as f64 * self.resolution,
                self.dims[1] as f64 * self.resolution,
                self.dims[2] as f64 * self.resolution,
            )
    }

    /// Mark every voxel whose center falls inside the world-space box.
    pub fn fill_box(&mut self, min: Vec3, max: Vec3) {
        for k in 0..self.dims[2] {
            for j in 0..self.dims[1] {
                for i in 0..self.dims[0] {
                    let c = self.voxel_center([i, j, k]);
                    if c.x >= min.x
                        && c.x <= max.x
                        && c.y >= min.y
                        && c.y <= max.y
                        && c.z >= min.z
                        && c.z <= max.z
                    {
                        self.set_occupied([i, j, k], true);
                    }
                }
            }
        }
    }

    pub fn occupied_indices(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let dims = self.dims;
        (0..self.occupancy.len()).filter_map(move |li| {
            if self.occupancy[li] {
                let i = li % dims[0];
                let j = (li / dims[0]) % dims[1];
                let k = li / (dims[0] * dims[1]);
                Some([i, j, k])
            } else {
                None
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_empty_grid() {
        assert!(OccupancyGrid::new(Vec3::zeros(), 0.1, [0, 4, 4]).is_err());
        assert!(OccupancyGrid::new(Vec3::zeros(), -1.0, [4, 4, 4]).is_err());
    }

    #[test]
    fn voxel_center_roundtrip() {
        let g = OccupancyGrid::new(Vec3::new(-1.0, 2.0, 0.0), 0.25, [8, 6, 4]).unwrap();
        for k in 0..4 {
            for j in 0..6 {
                for i in 0..8 {
                    let c = g.voxel_center([i, j, k]);
                    assert_eq!(g.world_to_voxel(c), Some([i, j, k]));
                }
            }
        }
    }

    #[test]
    fn fill_box_marks_centers() {
        let mut g = OccupancyGrid::new(Vec3::zeros(), 0.5, [4, 4, 4]).unwrap();
        g.fill_box(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0));
        assert!(g.is_occupied([0, 0, 0]));
        assert!(g.is_occupied([1, 1, 1]));
        assert!(!g.is_occupied([3, 3, 3]));
    }

    proptest! {
        #[test]
        fn world_voxel_roundtrip_random(
            i in 0usize..10, j in 0usize..7, k in 0usize..5,
            ox in -5.0f64..5.0, oy in -5.0f64..5.0, oz in -5.0f64..5.0,
        ) {
            let g = OccupancyGrid::new(Vec3::new(ox, oy, oz), 0.2, [10, 7, 5]).unwrap();
            let c = g.voxel_center([i, j, k]);
            prop_assert_eq!(g.world_to_voxel(c), Some([i, j, k]));
        }
    }
}
