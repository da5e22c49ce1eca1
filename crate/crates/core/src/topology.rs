//! Pheromone-mask topology control along active routes.
//!
//! Every non-BS route node whose off-route degree has thinned to `th` or fewer
//! neighbors owns a mask across the route; the mask zeroes pheromone there so
//! searchers are drawn in to thicken the pipe.

use crate::grid::{CellIndex, Vec2};
use crate::pheromone::PheromoneField;
use crate::radio::NeighborTable;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskEventKind {
    Applied,
    Removed,
}

impl MaskEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MaskEventKind::Applied => "applied",
            MaskEventKind::Removed => "removed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskEvent {
    pub t: f64,
    pub owner: NodeId,
    pub center: CellIndex,
    /// Unit vector of the rectangle's long side.
    pub axis: Vec2,
    pub kind: MaskEventKind,
    /// The route axis was degenerate and the owner's heading was used instead.
    pub heading_fallback: bool,
}

/// Off-route degree of `node`: table size minus its route neighbors.
pub fn off_route_degree(table: &NeighborTable, up: Option<NodeId>, down: Option<NodeId>) -> u32 {
    let on_route = [up, down].into_iter().flatten().filter(|&n| table.contains(n)).count();
    (table.len() - on_route) as u32
}

/// Local route axis at position `i`: upstream→downstream for interior nodes;
/// for the source, toward its downstream node's successor (or the downstream
/// node itself on a one-hop route).
pub fn route_axis(route: &[NodeId], i: usize, positions: &[Vec2]) -> Vec2 {
    let p = |k: usize| positions[route[k] as usize];
    if i == 0 {
        let far = if route.len() > 2 { 2 } else { 1 };
        p(far) - p(0)
    } else {
        p(i + 1) - p(i - 1)
    }
}

/// Runs one tick of topology control over a route (source first, BS last).
#[allow(clippy::too_many_arguments)]
pub fn tc_step(
    route: &[NodeId],
    positions: &[Vec2],
    headings: &[f64],
    tables: &[NeighborTable],
    field: &mut PheromoneField,
    th_degree: u32,
    l_m: f64,
    now: f64,
) -> Vec<MaskEvent> {
    let mut events = Vec::new();
    for i in 0..route.len().saturating_sub(1) {
        let n = route[i];
        let up = (i > 0).then(|| route[i - 1]);
        let down = Some(route[i + 1]);
        let d = off_route_degree(&tables[n as usize], up, down);
        let axis = route_axis(route, i, positions);
        events.extend(tc_node(field, n, d, positions[n as usize], axis, headings[n as usize], th_degree, l_m, now));
    }
    events
}

/// Topology control for a flow source that currently has no route: it keeps
/// checking its own degree and masks across the direction to the BS, so the
/// searchers it attracts bridge the gap toward the rest of the swarm.
#[allow(clippy::too_many_arguments)]
pub fn tc_routeless_source(
    source: NodeId,
    bs_pos: Vec2,
    positions: &[Vec2],
    headings: &[f64],
    tables: &[NeighborTable],
    field: &mut PheromoneField,
    th_degree: u32,
    l_m: f64,
    now: f64,
) -> Option<MaskEvent> {
    let s = source as usize;
    let d = off_route_degree(&tables[s], None, None);
    tc_node(field, source, d, positions[s], bs_pos - positions[s], headings[s], th_degree, l_m, now)
}

#[allow(clippy::too_many_arguments)]
fn tc_node(
    field: &mut PheromoneField,
    n: NodeId,
    degree: u32,
    pos: Vec2,
    axis: Vec2,
    heading: f64,
    th_degree: u32,
    l_m: f64,
    now: f64,
) -> Option<MaskEvent> {
    if degree > th_degree {
        return remove(field, n, now);
    }
    let applied = field.apply_mask(n, pos, axis, heading, l_m, now).ok()?;
    if applied.unchanged {
        return None;
    }
    let m = field.mask(n).expect("mask just applied");
    Some(MaskEvent {
        t: now,
        owner: n,
        center: m.center,
        axis: m.long_axis,
        kind: MaskEventKind::Applied,
        heading_fallback: applied.used_heading_fallback,
    })
}

/// Removes `owner`'s mask, returning the event if one existed.
pub fn remove(field: &mut PheromoneField, owner: NodeId, now: f64) -> Option<MaskEvent> {
    let m = field.mask(owner)?.clone();
    field.remove_mask(owner);
    Some(MaskEvent {
        t: now,
        owner,
        center: m.center,
        axis: m.long_axis,
        kind: MaskEventKind::Removed,
        heading_fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AreaMap;
    use crate::radio::NeighborEntry;

    fn table(ids: &[NodeId]) -> NeighborTable {
        let mut t = NeighborTable::new();
        for &id in ids {
            t.upsert(NeighborEntry {
                id,
                pos: Vec2::ZERO,
                velocity: Vec2::ZERO,
                next_waypoint: CellIndex::new(0, 0),
                hops_to_bs: 1,
                en: 100.0,
                il: 0,
                llt_s: 100.0,
                last_heard: 0.0,
                mask_cell: None,
                summary_count: None,
            });
        }
        t
    }

    fn setup(extra: &[NodeId]) -> (Vec<Vec2>, Vec<NeighborTable>) {
        // route 3 -> 2 -> 1 -> 0 along +x toward the BS at the origin side
        let pos = vec![
            Vec2::new(3000.0, 200.0),
            Vec2::new(3000.0, 1000.0),
            Vec2::new(3000.0, 1800.0),
            Vec2::new(3000.0, 2600.0),
            Vec2::new(3500.0, 1800.0),
            Vec2::new(2500.0, 1800.0),
            Vec2::new(3500.0, 2000.0),
        ];
        let mut mid: Vec<NodeId> = vec![1, 3];
        mid.extend_from_slice(extra);
        let tables = vec![table(&[1]), table(&[0, 2]), table(&mid), table(&[2])];
        (pos, tables.into_iter().chain((4..7).map(|_| table(&[]))).collect())
    }

    #[test]
    fn thin_node_gets_mask_across_route() {
        let (pos, tables) = setup(&[]);
        let mut f = PheromoneField::new(AreaMap::default());
        let ev = tc_step(&[3, 2, 1, 0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 5.0);
        assert_eq!(ev.len(), 3);
        let m = f.mask(2).unwrap();
        // route runs along -y, so the long side lies along x
        assert!(m.long_axis.y.abs() < 1e-12 && (m.long_axis.x.abs() - 1.0).abs() < 1e-12);
        assert!(f.mask(0).is_none());
    }

    #[test]
    fn degree_at_threshold_still_masks() {
        let (pos, tables) = setup(&[4, 5]);
        let mut f = PheromoneField::new(AreaMap::default());
        tc_step(&[3, 2, 1, 0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 0.0);
        assert!(f.mask(2).is_some());
    }

    #[test]
    fn thick_node_drops_mask() {
        let (pos, tables) = setup(&[]);
        let mut f = PheromoneField::new(AreaMap::default());
        tc_step(&[3, 2, 1, 0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 0.0);
        let (_, tables) = setup(&[4, 5, 6]);
        let ev = tc_step(&[3, 2, 1, 0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 1.0);
        assert!(f.mask(2).is_none());
        assert_eq!(ev.iter().filter(|e| e.kind == MaskEventKind::Removed).count(), 1);
    }

    #[test]
    fn routeless_source_masks_toward_bs() {
        // node 3 has no route and only one neighbor; the BS lies straight down
        let (pos, tables) = setup(&[]);
        let mut f = PheromoneField::new(AreaMap::default());
        let ev = tc_routeless_source(3, pos[0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 0.0).unwrap();
        assert_eq!((ev.owner, ev.kind), (3, MaskEventKind::Applied));
        let m = f.mask(3).unwrap();
        assert!(m.long_axis.y.abs() < 1e-12);
    }

    #[test]
    fn routeless_source_with_many_neighbors_drops_mask() {
        let (pos, mut tables) = setup(&[]);
        let mut f = PheromoneField::new(AreaMap::default());
        tc_routeless_source(3, pos[0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 0.0);
        tables[3] = table(&[2, 4, 5]);
        let ev = tc_routeless_source(3, pos[0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 1.0).unwrap();
        assert_eq!(ev.kind, MaskEventKind::Removed);
        assert!(f.mask(3).is_none());
    }

    #[test]
    fn repeated_step_is_quiet() {
        let (pos, tables) = setup(&[]);
        let mut f = PheromoneField::new(AreaMap::default());
        tc_step(&[3, 2, 1, 0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 0.0);
        assert!(tc_step(&[3, 2, 1, 0], &pos, &[0.0; 7], &tables, &mut f, 2, 1000.0, 1.0).is_empty());
    }

    #[test]
    fn source_axis_skips_to_successor() {
        let pos = vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 50.0), Vec2::new(200.0, 0.0)];
        assert_eq!(route_axis(&[0, 1, 2], 0, &pos), Vec2::new(200.0, 0.0));
        assert_eq!(route_axis(&[0, 2], 0, &pos), Vec2::new(200.0, 0.0));
        assert_eq!(route_axis(&[0, 1, 2], 1, &pos), Vec2::new(200.0, 0.0));
    }
}
