//! Repel-pheromone grid and the route masks laid over it.
//!
//! Stored values are the raw repel map. Masks never touch them; a masked cell
//! simply reads as zero through [`PheromoneField::effective_value`], so removing
//! a mask restores exactly what the raw map holds at that moment.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::{AreaMap, CellIndex, Vec2};
use crate::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskRect {
    pub center: CellIndex,
    /// Unit direction of the long (2L) side.
    pub long_axis: Vec2,
    pub cells: Vec<CellIndex>,
    pub created_at: f64,
}

/// Outcome of [`PheromoneField::apply_mask`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskApplied {
    /// The route axis was degenerate and the owner's heading was used instead.
    pub used_heading_fallback: bool,
    /// An identical mask was already registered.
    pub unchanged: bool,
}

#[derive(Debug, Clone)]
pub struct PheromoneField {
    map: AreaMap,
    values: Vec<f64>,
    masks: BTreeMap<NodeId, MaskRect>,
    mask_cover: Vec<u16>,
    scratch: Vec<f64>,
}

impl PheromoneField {
    pub fn new(map: AreaMap) -> Self {
        let n = map.n_cells();
        Self {
            map,
            values: vec![0.0; n],
            masks: BTreeMap::new(),
            mask_cover: vec![0; n],
            scratch: vec![0.0; n],
        }
    }

    pub fn map(&self) -> &AreaMap {
        &self.map
    }

    fn index(&self, cell: CellIndex) -> Result<usize> {
        if self.map.in_grid(cell) {
            Ok(self.map.linear(cell))
        } else {
            Err(Error::CellOutOfBounds(cell))
        }
    }

    pub fn deposit(&mut self, cell: CellIndex, magnitude: f64) -> Result<()> {
        let i = self.index(cell)?;
        debug_assert!(magnitude > 0.0);
        self.values[i] += magnitude;
        Ok(())
    }

    /// Raw repel value.
    pub fn value(&self, cell: CellIndex) -> Result<f64> {
        Ok(self.values[self.index(cell)?])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// One protocol tick: evaporate every cell by `lambda_evap`, then move a
    /// `psi_diff` share of each cell equally onto its in-grid 4-neighbors.
    pub fn step(&mut self, lambda_evap: f64, psi_diff: f64) {
        let keep = 1.0 - lambda_evap;
        for v in &mut self.values {
            *v *= keep;
        }
        if psi_diff == 0.0 {
            return;
        }
        let (cols, rows) = (self.map.cols() as usize, self.map.rows() as usize);
        let out = &mut self.scratch;
        out.iter_mut().for_each(|o| *o = 0.0);
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                let v = self.values[i];
                if v == 0.0 {
                    continue;
                }
                let deg = usize::from(c > 0) + usize::from(c + 1 < cols) + usize::from(r > 0) + usize::from(r + 1 < rows);
                if deg == 0 {
                    out[i] += v;
                    continue;
                }
                let moved = psi_diff * v;
                let share = moved / deg as f64;
                out[i] += v - moved;
                if c > 0 {
                    out[i - 1] += share;
                }
                if c + 1 < cols {
                    out[i + 1] += share;
                }
                if r > 0 {
                    out[i - cols] += share;
                }
                if r + 1 < rows {
                    out[i + cols] += share;
                }
            }
        }
        std::mem::swap(&mut self.values, &mut self.scratch);
    }

    /// Registers (or replaces) `owner`'s mask: a rectangle of 2L across the
    /// route axis by L along it, centered on the owner's cell.
    pub fn apply_mask(
        &mut self,
        owner: NodeId,
        center_pos: Vec2,
        route_axis: Vec2,
        fallback_heading: f64,
        l_m: f64,
        now: f64,
    ) -> Result<MaskApplied> {
        let (axis, used_heading_fallback) = match route_axis.normalized() {
            Some(a) => (a, false),
            None => (Vec2::from_angle(fallback_heading), true),
        };
        let center = self.map.cell_of(self.map.clamp(center_pos))?;
        let long_axis = axis.perp();
        let cells = self.map.cells_in_oriented_rect(self.map.cell_center(center), 2.0 * l_m, l_m, long_axis)?;

        if let Some(existing) = self.masks.get(&owner) {
            if existing.cells == cells && existing.center == center {
                return Ok(MaskApplied { used_heading_fallback, unchanged: true });
            }
        }
        self.remove_mask(owner);
        for c in &cells {
            self.mask_cover[self.map.linear(*c)] += 1;
        }
        self.masks.insert(owner, MaskRect { center, long_axis, cells, created_at: now });
        Ok(MaskApplied { used_heading_fallback, unchanged: false })
    }

    /// Deregisters `owner`'s mask. Returns whether one existed.
    pub fn remove_mask(&mut self, owner: NodeId) -> bool {
        match self.masks.remove(&owner) {
            Some(mask) => {
                for c in &mask.cells {
                    self.mask_cover[self.map.linear(*c)] -= 1;
                }
                true
            }
            None => false,
        }
    }

    pub fn mask(&self, owner: NodeId) -> Option<&MaskRect> {
        self.masks.get(&owner)
    }

    pub fn masks(&self) -> impl Iterator<Item = (NodeId, &MaskRect)> {
        self.masks.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_masked(&self, cell: CellIndex) -> bool {
        self.map.in_grid(cell) && self.mask_cover[self.map.linear(cell)] > 0
    }

    /// Owners whose mask covers `cell`.
    pub fn mask_owners_at(&self, cell: CellIndex) -> impl Iterator<Item = NodeId> + '_ {
        self.masks
            .iter()
            .filter(move |(_, m)| m.cells.binary_search(&cell).is_ok())
            .map(|(k, _)| *k)
    }

    /// Raw value, or zero inside any registered mask.
    pub fn effective_value(&self, cell: CellIndex) -> Result<f64> {
        let i = self.index(cell)?;
        Ok(if self.mask_cover[i] > 0 { 0.0 } else { self.values[i] })
    }

    /// Raw values of the `(2r+1)^2` patch centered on `cell`, row-major from the
    /// lower-left corner; off-grid cells read as `None`.
    pub fn patch(&self, cell: CellIndex, r: i64) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
        for dr in -r..=r {
            for dc in -r..=r {
                let (c, rr) = (cell.col as i64 + dc, cell.row as i64 + dr);
                if c < 0 || rr < 0 || c >= self.map.cols() as i64 || rr >= self.map.rows() as i64 {
                    out.push(None);
                } else {
                    out.push(Some(self.values[self.map.linear(CellIndex::new(c as u32, rr as u32))]));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> PheromoneField {
        PheromoneField::new(AreaMap::default())
    }

    const C: CellIndex = CellIndex::new(30, 30);

    #[test]
    fn deposit_adds_locally() {
        let mut f = field();
        f.deposit(C, 1.0).unwrap();
        assert_eq!(f.value(C).unwrap(), 1.0);
        f.deposit(C, 1.0).unwrap();
        assert_eq!(f.value(C).unwrap(), 2.0);
        assert_eq!(f.total(), 2.0);
        assert_eq!(f.value(CellIndex::new(31, 30)).unwrap(), 0.0);
    }

    #[test]
    fn deposit_out_of_grid_errors() {
        assert!(field().deposit(CellIndex::new(60, 0), 1.0).is_err());
    }

    #[test]
    fn evaporation_only() {
        let mut f = field();
        f.deposit(C, 1.0).unwrap();
        f.step(0.006, 0.0);
        assert!((f.value(C).unwrap() - 0.994).abs() < 1e-12);
    }

    #[test]
    fn identity_step() {
        let mut f = field();
        f.deposit(C, 3.5).unwrap();
        f.deposit(CellIndex::new(0, 0), 1.25).unwrap();
        let before = f.values().to_vec();
        f.step(0.0, 0.0);
        assert_eq!(f.values(), &before[..]);
    }

    #[test]
    fn interior_diffusion_splits_four_ways() {
        let mut f = field();
        f.deposit(C, 1.0).unwrap();
        f.step(0.0, 0.006);
        assert!((f.value(C).unwrap() - 0.994).abs() < 1e-12);
        for n in [CellIndex::new(29, 30), CellIndex::new(31, 30), CellIndex::new(30, 29), CellIndex::new(30, 31)] {
            assert!((f.value(n).unwrap() - 0.0015).abs() < 1e-12);
        }
        assert!((f.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_diffusion_splits_two_ways() {
        let mut f = field();
        f.deposit(CellIndex::new(0, 0), 1.0).unwrap();
        f.step(0.0, 0.006);
        assert!((f.value(CellIndex::new(1, 0)).unwrap() - 0.003).abs() < 1e-12);
        assert!((f.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mask_zeroes_effective_value_only() {
        let mut f = field();
        f.deposit(C, 5.0).unwrap();
        f.apply_mask(7, f.map().cell_center(C), Vec2::new(1.0, 0.0), 0.0, 1000.0, 0.0).unwrap();
        assert_eq!(f.effective_value(C).unwrap(), 0.0);
        assert_eq!(f.value(C).unwrap(), 5.0);
        assert!(f.remove_mask(7));
        assert_eq!(f.effective_value(C).unwrap(), 5.0);
    }

    #[test]
    fn mask_long_side_is_perpendicular_to_route() {
        let mut f = field();
        f.apply_mask(1, Vec2::new(3050.0, 3050.0), Vec2::new(1.0, 0.0), 0.0, 1000.0, 0.0).unwrap();
        let m = f.mask(1).unwrap();
        let cols: std::collections::BTreeSet<_> = m.cells.iter().map(|c| c.col).collect();
        let rows: std::collections::BTreeSet<_> = m.cells.iter().map(|c| c.row).collect();
        assert_eq!(cols.len(), 11); // 1000 m along the route, cell-center inclusive
        assert_eq!(rows.len(), 21); // 2000 m across it
        assert!(m.long_axis.x.abs() < 1e-12 && (m.long_axis.y.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reapply_is_idempotent() {
        let mut f = field();
        f.deposit(C, 2.0).unwrap();
        let p = f.map().cell_center(C);
        f.apply_mask(3, p, Vec2::new(0.0, 1.0), 0.0, 1000.0, 1.0).unwrap();
        let snapshot: Vec<f64> = (0..3600).map(|i| f.effective_value(f.map().from_linear(i)).unwrap()).collect();
        let out = f.apply_mask(3, p, Vec2::new(0.0, 1.0), 0.0, 1000.0, 2.0).unwrap();
        assert!(out.unchanged);
        let again: Vec<f64> = (0..3600).map(|i| f.effective_value(f.map().from_linear(i)).unwrap()).collect();
        assert_eq!(snapshot, again);
        assert_eq!(f.mask(3).unwrap().created_at, 1.0);
    }

    #[test]
    fn overlapping_masks_stay_zero_and_remove_commutes() {
        let mut a = field();
        a.deposit(C, 4.0).unwrap();
        let p = a.map().cell_center(C);
        a.apply_mask(1, p, Vec2::new(1.0, 0.0), 0.0, 1000.0, 0.0).unwrap();
        a.apply_mask(2, p + Vec2::new(200.0, 0.0), Vec2::new(0.0, 1.0), 0.0, 1000.0, 0.0).unwrap();
        assert_eq!(a.effective_value(C).unwrap(), 0.0);
        let mut b = a.clone();
        a.remove_mask(1);
        assert_eq!(a.effective_value(C).unwrap(), 0.0);
        a.remove_mask(2);
        b.remove_mask(2);
        b.remove_mask(1);
        assert_eq!(a.effective_value(C).unwrap(), 4.0);
        for i in 0..3600 {
            let c = a.map().from_linear(i);
            assert_eq!(a.effective_value(c).unwrap(), b.effective_value(c).unwrap());
        }
    }

    #[test]
    fn degenerate_axis_falls_back_to_heading() {
        let mut f = field();
        let out = f
            .apply_mask(9, Vec2::new(3050.0, 3050.0), Vec2::ZERO, std::f64::consts::FRAC_PI_2, 1000.0, 0.0)
            .unwrap();
        assert!(out.used_heading_fallback);
        // heading north: route axis (0,1), long side along x
        let m = f.mask(9).unwrap();
        assert!((m.long_axis.x.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn remove_absent_is_noop() {
        let mut f = field();
        assert!(!f.remove_mask(42));
    }
}
