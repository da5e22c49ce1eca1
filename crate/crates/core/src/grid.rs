//! Planar geometry and the 100 m coverage grid.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the half-plane membership tests, in meters.
pub const RECT_EPS_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Vec2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A grid cell, addressed by column (x) and row (y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub col: u32,
    pub row: u32,
}

impl CellIndex {
    pub const fn new(col: u32, row: u32) -> Self {
        Self { col, row }
    }
}

/// Rectangular area divided into square cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaMap {
    pub width_m: f64,
    pub height_m: f64,
    pub cell_size_m: f64,
    cols: u32,
    rows: u32,
}

impl Default for AreaMap {
    fn default() -> Self {
        Self::new(6000.0, 6000.0, 100.0).expect("default map is valid")
    }
}

impl AreaMap {
    pub fn new(width_m: f64, height_m: f64, cell_size_m: f64) -> Result<Self> {
        if !(width_m > 0.0 && height_m > 0.0 && cell_size_m > 0.0) {
            return Err(Error::InvalidMap("dimensions must be positive".into()));
        }
        let cols = (width_m / cell_size_m).round();
        let rows = (height_m / cell_size_m).round();
        if (cols * cell_size_m - width_m).abs() > 1e-6 || (rows * cell_size_m - height_m).abs() > 1e-6 {
            return Err(Error::InvalidMap(format!(
                "{width_m} x {height_m} m is not a multiple of the {cell_size_m} m cell"
            )));
        }
        Ok(Self { width_m, height_m, cell_size_m, cols: cols as u32, rows: rows as u32 })
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn n_cells(&self) -> usize {
        (self.cols * self.rows) as usize
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width_m && p.y <= self.height_m
    }

    pub fn in_grid(&self, c: CellIndex) -> bool {
        c.col < self.cols && c.row < self.rows
    }

    /// Row-major linear index.
    pub fn linear(&self, c: CellIndex) -> usize {
        (c.row * self.cols + c.col) as usize
    }

    pub fn from_linear(&self, i: usize) -> CellIndex {
        let i = i as u32;
        CellIndex::new(i % self.cols, i / self.cols)
    }

    pub fn cell_center(&self, c: CellIndex) -> Vec2 {
        Vec2::new(
            (c.col as f64 + 0.5) * self.cell_size_m,
            (c.row as f64 + 0.5) * self.cell_size_m,
        )
    }

    /// Clamps a point into the map rectangle.
    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width_m), p.y.clamp(0.0, self.height_m))
    }

    /// Cell containing `pos`. Points on a shared cell edge go to the lower-index cell.
    pub fn cell_of(&self, pos: Vec2) -> Result<CellIndex> {
        if !self.contains(pos) {
            return Err(Error::OutOfBounds {
                x: pos.x,
                y: pos.y,
                width: self.width_m,
                height: self.height_m,
            });
        }
        Ok(CellIndex::new(
            Self::axis_index(pos.x, self.cell_size_m, self.cols),
            Self::axis_index(pos.y, self.cell_size_m, self.rows),
        ))
    }

    fn axis_index(v: f64, cell: f64, n: u32) -> u32 {
        let k = (v / cell).ceil() as i64 - 1;
        k.clamp(0, n as i64 - 1) as u32
    }

    /// Cells whose centers fall inside the rectangle of extent `long_m` along `axis`
    /// and `short_m` across it, centered at `center`. Clipped to the grid, sorted.
    pub fn cells_in_oriented_rect(
        &self,
        center: Vec2,
        long_m: f64,
        short_m: f64,
        axis: Vec2,
    ) -> Result<Vec<CellIndex>> {
        if !(long_m > 0.0 && short_m > 0.0) {
            return Err(Error::InvalidExtent { long_m, short_m });
        }
        let u = axis.normalized().ok_or(Error::DegenerateAxis)?;
        let w = u.perp();
        let (hl, hs) = (long_m / 2.0, short_m / 2.0);

        // Axis-aligned bounding box of the rotated rectangle.
        let ex = hl * u.x.abs() + hs * w.x.abs();
        let ey = hl * u.y.abs() + hs * w.y.abs();
        let cs = self.cell_size_m;
        let col_range = Self::center_range(center.x - ex, center.x + ex, cs, self.cols);
        let row_range = Self::center_range(center.y - ey, center.y + ey, cs, self.rows);

        let mut cells = Vec::new();
        if let (Some((c0, c1)), Some((r0, r1))) = (col_range, row_range) {
            for col in c0..=c1 {
                for row in r0..=r1 {
                    let c = CellIndex::new(col, row);
                    let d = self.cell_center(c) - center;
                    if d.dot(u).abs() <= hl + RECT_EPS_M && d.dot(w).abs() <= hs + RECT_EPS_M {
                        cells.push(c);
                    }
                }
            }
        }
        Ok(cells)
    }

    /// Inclusive index range of cells whose centers may lie in `[lo, hi]`.
    fn center_range(lo: f64, hi: f64, cs: f64, n: u32) -> Option<(u32, u32)> {
        // center_k = (k + 0.5) cs, so k in [lo/cs - 0.5, hi/cs - 0.5]; widen by one for the eps test.
        let k0 = ((lo / cs) - 0.5).floor() as i64;
        let k1 = ((hi / cs) - 0.5).ceil() as i64;
        let k0 = k0.max(0);
        let k1 = k1.min(n as i64 - 1);
        (k0 <= k1).then_some((k0 as u32, k1 as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> AreaMap {
        AreaMap::default()
    }

    #[test]
    fn default_grid_is_60_by_60() {
        let m = map();
        assert_eq!((m.cols(), m.rows()), (60, 60));
        assert_eq!(m.n_cells(), 3600);
    }

    #[test]
    fn rejects_non_multiple_dimensions() {
        assert!(AreaMap::new(6050.0, 6000.0, 100.0).is_err());
    }

    #[test]
    fn cell_of_examples() {
        let m = map();
        assert_eq!(m.cell_of(Vec2::new(0.0, 0.0)).unwrap(), CellIndex::new(0, 0));
        assert_eq!(m.cell_of(Vec2::new(150.0, 250.0)).unwrap(), CellIndex::new(1, 2));
        assert_eq!(m.cell_of(Vec2::new(5999.9, 5999.9)).unwrap(), CellIndex::new(59, 59));
    }

    #[test]
    fn cell_boundary_goes_to_lower_index() {
        let m = map();
        assert_eq!(m.cell_of(Vec2::new(100.0, 200.0)).unwrap(), CellIndex::new(0, 1));
        assert_eq!(m.cell_of(Vec2::new(6000.0, 6000.0)).unwrap(), CellIndex::new(59, 59));
    }

    #[test]
    fn cell_of_out_of_bounds_names_coordinate() {
        let err = map().cell_of(Vec2::new(-1.0, 10.0)).unwrap_err();
        assert!(err.to_string().contains("-1"), "{err}");
    }

    #[test]
    fn rect_outside_map_is_empty() {
        let cells = map()
            .cells_in_oriented_rect(Vec2::new(-5000.0, -5000.0), 2000.0, 1000.0, Vec2::new(0.0, 1.0))
            .unwrap();
        assert!(cells.is_empty());
    }

    #[test]
    fn rect_zero_axis_errors() {
        let r = map().cells_in_oriented_rect(Vec2::new(3000.0, 3000.0), 2000.0, 1000.0, Vec2::ZERO);
        assert!(matches!(r, Err(Error::DegenerateAxis)));
    }

    #[test]
    fn rect_swapped_axes_agree() {
        let m = map();
        let c = Vec2::new(2345.0, 4100.0);
        let a = m.cells_in_oriented_rect(c, 2000.0, 1000.0, Vec2::new(1.0, 0.0)).unwrap();
        let b = m.cells_in_oriented_rect(c, 1000.0, 2000.0, Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(a, b);
    }
}
