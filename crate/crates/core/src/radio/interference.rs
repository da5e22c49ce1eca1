use crate::grid::Vec2;
use crate::NodeId;

/// Undirected data-carrying link, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link(pub NodeId, pub NodeId);

impl Link {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Link(a, b)
        } else {
            Link(b, a)
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.0 == n || self.1 == n
    }
}

/// Active links (sorted, deduplicated) along the given routes.
pub fn active_links<'a>(routes: impl IntoIterator<Item = &'a [NodeId]>) -> Vec<Link> {
    let mut links: Vec<Link> = routes
        .into_iter()
        .flat_map(|r| r.windows(2).map(|w| Link::new(w[0], w[1])))
        .collect();
    links.sort_unstable();
    links.dedup();
    links
}

/// Number of active links not incident to `node` with at least one endpoint
/// inside `range_m` of it.
pub fn interfering_links(positions: &[Vec2], node: NodeId, links: &[Link], range_m: f64) -> u32 {
    let p = positions[node as usize];
    let r2 = range_m * range_m;
    let near = |n: NodeId| (positions[n as usize] - p).norm_sq() <= r2;
    links
        .iter()
        .filter(|l| !l.touches(node) && (near(l.0) || near(l.1)))
        .count() as u32
}
