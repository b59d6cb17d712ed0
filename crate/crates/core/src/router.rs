//! Multi-tier placement and routing of coupler graphs.
//!
//! Tier 1 is the qubit grid and carries every short coupler directly. Long
//! couplers are routed on later tiers, each a fresh two-layer occupancy grid
//! with two cells per qubit spacing. Qubits that still have unrouted couplers
//! are replicated onto the next tier through a TSV.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{CouplerClass, CouplerGraph};

pub const PITCH: i64 = 2;
pub const MAX_SWITCHES: usize = 10;
pub const SWITCH_PENALTY: u32 = 3;
const MAX_TIERS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub col: i64,
    pub row: i64,
    pub layer: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Placement {
    pub grid_cols: i64,
    pub grid_rows: i64,
    /// Coupler indices realised directly on tier 1.
    pub direct: Vec<usize>,
    pub deferred: Vec<usize>,
}

pub fn qubit_cell(g: &CouplerGraph, site: usize) -> (i64, i64) {
    let s = site as i64;
    (PITCH * (s % g.width), PITCH * (s / g.width))
}

pub fn place_first_tier(g: &CouplerGraph) -> Placement {
    let (direct, deferred) = (0..g.couplers.len()).partition(|&k| g.couplers[k].class == CouplerClass::Short);
    Placement {
        grid_cols: PITCH * (g.width - 1) + 1,
        grid_rows: PITCH * (g.height - 1) + 1,
        direct,
        deferred,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedPath {
    pub coupler: usize,
    pub tier: usize,
    pub cells: Vec<GridCell>,
    pub bumps: usize,
    /// Share of its endpoints' TSVs.
    pub tsvs: f64,
}

impl RoutedPath {
    pub fn steps(&self) -> usize {
        self.cells.windows(2).filter(|w| w[0].layer == w[1].layer).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingReport {
    pub tiers: usize,
    pub long_couplers: usize,
    /// Mean routed length in qubit spacings.
    pub avg_length: f64,
    pub bumps_per_coupler: f64,
    pub tsvs_per_coupler: f64,
    pub total_tsvs: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Routing {
    pub report: RoutingReport,
    pub placement: Placement,
    pub paths: Vec<RoutedPath>,
    /// Highest tier each site is replicated to (1 = tier 1 only).
    pub site_tier: Vec<usize>,
}

struct Grid {
    cols: i64,
    rows: i64,
    occ: Vec<bool>,
}

impl Grid {
    fn new(cols: i64, rows: i64) -> Self {
        Grid { cols, rows, occ: vec![false; (cols * rows * 2) as usize] }
    }

    fn idx(&self, c: GridCell) -> usize {
        ((c.layer as i64 * self.rows + c.row) * self.cols + c.col) as usize
    }

    fn inside(&self, col: i64, row: i64) -> bool {
        (0..self.cols).contains(&col) && (0..self.rows).contains(&row)
    }
}

/// A* from `a` to `b` (both layer 0) avoiding occupied cells.
fn astar(grid: &Grid, a: (i64, i64), b: (i64, i64)) -> Option<Vec<GridCell>> {
    let start = GridCell { col: a.0, row: a.1, layer: 0 };
    let goal = GridCell { col: b.0, row: b.1, layer: 0 };
    let h = |c: GridCell| ((c.col - goal.col).abs() + (c.row - goal.row).abs()) as u32;
    let key = |c: GridCell, sw: usize| (grid.idx(c), sw);
    let mut best: HashMap<(usize, usize), u32> = HashMap::new();
    let mut parent: HashMap<(usize, usize), (GridCell, usize)> = HashMap::new();
    let mut open = BinaryHeap::new();
    best.insert(key(start, 0), 0);
    open.push(Reverse((h(start), 0u32, start.layer, start.row, start.col, 0usize)));
    while let Some(Reverse((_, g, layer, row, col, sw))) = open.pop() {
        let cur = GridCell { col, row, layer };
        if best.get(&key(cur, sw)).is_some_and(|&b| b < g) {
            continue;
        }
        if cur == goal {
            let mut path = vec![cur];
            let mut k = (cur, sw);
            while let Some(&p) = parent.get(&key(k.0, k.1)) {
                path.push(p.0);
                k = p;
            }
            path.reverse();
            return Some(path);
        }
        let mut next: Vec<(GridCell, usize, u32)> = Vec::with_capacity(5);
        for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nc, nr) = (col + dc, row + dr);
            if grid.inside(nc, nr) {
                next.push((GridCell { col: nc, row: nr, layer }, sw, 1));
            }
        }
        if sw < MAX_SWITCHES {
            next.push((GridCell { col, row, layer: 1 - layer }, sw + 1, SWITCH_PENALTY));
        }
        for (n, nsw, cost) in next {
            if n != goal && grid.occ[grid.idx(n)] {
                continue;
            }
            let ng = g + cost;
            let k = key(n, nsw);
            if best.get(&k).is_none_or(|&b| ng < b) {
                best.insert(k, ng);
                parent.insert(k, (cur, sw));
                open.push(Reverse((ng + h(n), ng, n.layer, n.row, n.col, nsw)));
            }
        }
    }
    None
}

pub fn route_multitier(g: &CouplerGraph, seed: u64) -> Result<Routing> {
    let placement = place_first_tier(g);
    let (cols, rows) = (placement.grid_cols, placement.grid_rows);
    let endpoints = |k: usize| (g.site(g.couplers[k].a), g.site(g.couplers[k].b));

    // Ascending straight-line length; the seed orders equal lengths.
    let mut order = placement.deferred.clone();
    let len2 = |k: usize| {
        let c = &g.couplers[k];
        (c.a.col - c.b.col).pow(2) + (c.a.row - c.b.row).pow(2)
    };
    order.sort_by_key(|&k| (len2(k), k));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = 0;
    while i < order.len() {
        let j = (i..order.len()).find(|&j| len2(order[j]) != len2(order[i])).unwrap_or(order.len());
        order[i..j].shuffle(&mut rng);
        i = j;
    }

    let mut site_tier = vec![1usize; g.num_sites()];
    let mut paths = Vec::new();
    let mut pending = order;
    let mut tier = 1;
    while !pending.is_empty() {
        tier += 1;
        if tier > MAX_TIERS {
            return Err(Error::Routing(format!("{} couplers left after {MAX_TIERS} tiers", pending.len())));
        }
        let mut grid = Grid::new(cols, rows);
        for &k in &pending {
            let (a, b) = endpoints(k);
            for s in [a, b] {
                site_tier[s] = tier;
                let (c, r) = qubit_cell(g, s);
                let idx = grid.idx(GridCell { col: c, row: r, layer: 0 });
                grid.occ[idx] = true;
            }
        }
        let mut deferred = Vec::new();
        let mut routed_here = 0;
        for &k in &pending {
            let (a, b) = endpoints(k);
            match astar(&grid, qubit_cell(g, a), qubit_cell(g, b)) {
                Some(cells) => {
                    for c in &cells[1..cells.len() - 1] {
                        let idx = grid.idx(*c);
                        grid.occ[idx] = true;
                    }
                    let bumps = cells.windows(2).filter(|w| w[0].layer != w[1].layer).count();
                    paths.push(RoutedPath { coupler: k, tier, cells, bumps, tsvs: 0.0 });
                    routed_here += 1;
                }
                None if routed_here == 0 && deferred.is_empty() => {
                    let c = &g.couplers[k];
                    return Err(Error::Routing(format!(
                        "coupler ({},{})-({},{}) cannot be routed on an empty tier",
                        c.a.col, c.a.row, c.b.col, c.b.row
                    )));
                }
                None => deferred.push(k),
            }
        }
        pending = deferred;
    }

    // Each site's TSVs are shared evenly by its long couplers.
    let mut long_deg = vec![0usize; g.num_sites()];
    for &k in &placement.deferred {
        let (a, b) = endpoints(k);
        long_deg[a] += 1;
        long_deg[b] += 1;
    }
    for p in &mut paths {
        let (a, b) = endpoints(p.coupler);
        p.tsvs = [a, b].iter().map(|&s| (site_tier[s] - 1) as f64 / long_deg[s] as f64).sum();
    }
    paths.sort_by_key(|p| p.coupler);
    let n = paths.len();
    let total_tsvs: usize = site_tier.iter().map(|t| t - 1).sum();
    let mean = |f: &dyn Fn(&RoutedPath) -> f64| if n == 0 { 0.0 } else { paths.iter().map(f).sum::<f64>() / n as f64 };
    let report = RoutingReport {
        tiers: tier,
        long_couplers: n,
        avg_length: mean(&|p| p.steps() as f64 / PITCH as f64),
        bumps_per_coupler: mean(&|p| p.bumps as f64),
        tsvs_per_coupler: if n == 0 { 0.0 } else { total_tsvs as f64 / n as f64 },
        total_tsvs,
    };
    Ok(Routing { report, placement, paths, site_tier })
}

/// Independent check of a routing result against its coupler graph.
pub fn validate_routing(g: &CouplerGraph, r: &Routing) -> bool {
    let (cols, rows) = (r.placement.grid_cols, r.placement.grid_rows);
    let mut long: Vec<usize> = g.long_couplers().map(|c| g.couplers.iter().position(|d| d == c).unwrap()).collect();
    long.sort_unstable();
    let mut routed: Vec<usize> = r.paths.iter().map(|p| p.coupler).collect();
    routed.sort_unstable();
    if long != routed {
        return false;
    }
    let mut used: HashMap<(usize, GridCell), usize> = HashMap::new();
    for p in &r.paths {
        if p.cells.len() < 2 || p.tier < 2 {
            return false;
        }
        let c = &g.couplers[p.coupler];
        let (a, b) = (g.site(c.a), g.site(c.b));
        let end = |s: usize| {
            let (col, row) = qubit_cell(g, s);
            GridCell { col, row, layer: 0 }
        };
        if p.cells[0] != end(a) || *p.cells.last().unwrap() != end(b) {
            return false;
        }
        if r.site_tier[a] < p.tier || r.site_tier[b] < p.tier {
            return false;
        }
        let mut switches = 0;
        for w in p.cells.windows(2) {
            let (x, y) = (w[0], w[1]);
            let planar = (x.col - y.col).abs() + (x.row - y.row).abs();
            match (planar, x.layer == y.layer) {
                (1, true) => {}
                (0, false) => switches += 1,
                _ => return false,
            }
        }
        if switches > MAX_SWITCHES || switches != p.bumps {
            return false;
        }
        for c in &p.cells {
            if !(0..cols).contains(&c.col) || !(0..rows).contains(&c.row) || c.layer > 1 {
                return false;
            }
        }
        for c in &p.cells[1..p.cells.len() - 1] {
            if used.insert((p.tier, *c), p.coupler).is_some() {
                return false;
            }
        }
    }
    // Interior cells must avoid every qubit replica present on the tier.
    for s in 0..g.num_sites() {
        let (col, row) = qubit_cell(g, s);
        for t in 2..=r.site_tier[s] {
            if used.contains_key(&(t, GridCell { col, row, layer: 0 })) {
                return false;
            }
        }
    }
    true
}

pub fn path_dump(r: &Routing) -> String {
    let mut out = String::new();
    for p in &r.paths {
        let cells: Vec<String> = p.cells.iter().map(|c| format!("({},{},{})", c.col, c.row, c.layer)).collect();
        out.push_str(&format!("coupler {} tier {}: {} ;\n", p.coupler, p.tier, cells.join(" -> ")));
    }
    out.push_str("Tiers | Length | Bumps | TSVs\n");
    out.push_str(&format!(
        "{} | {:.2} | {:.2} | {:.2}\n",
        r.report.tiers, r.report.avg_length, r.report.bumps_per_coupler, r.report.tsvs_per_coupler
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::GridPos;
    use crate::metrics::Coupler;

    fn coupler(a: (i64, i64), b: (i64, i64), length: i64) -> Coupler {
        Coupler {
            a: GridPos { col: a.0, row: a.1 },
            b: GridPos { col: b.0, row: b.1 },
            length,
            class: if length <= 1 { CouplerClass::Short } else { CouplerClass::Long },
        }
    }

    #[test]
    fn short_only_graph_needs_one_tier() {
        let g = CouplerGraph { width: 4, height: 4, couplers: vec![coupler((0, 0), (1, 0), 1), coupler((0, 0), (0, 1), 1)] };
        let r = route_multitier(&g, 0).unwrap();
        assert_eq!(r.report.tiers, 1);
        assert_eq!((r.report.bumps_per_coupler, r.report.tsvs_per_coupler), (0.0, 0.0));
        assert!(validate_routing(&g, &r));
    }

    #[test]
    fn single_long_coupler_goes_straight() {
        let g = CouplerGraph { width: 6, height: 6, couplers: vec![coupler((0, 0), (3, 0), 3)] };
        let r = route_multitier(&g, 0).unwrap();
        assert_eq!(r.report.tiers, 2);
        assert_eq!(r.paths[0].steps(), 6);
        assert_eq!(r.report.avg_length, 3.0);
        assert_eq!(r.report.total_tsvs, 2);
        assert!(validate_routing(&g, &r));
    }

    #[test]
    fn tampered_paths_fail_validation() {
        let g = CouplerGraph {
            width: 6,
            height: 6,
            couplers: vec![coupler((0, 0), (3, 0), 3), coupler((0, 2), (3, 2), 3)],
        };
        let r = route_multitier(&g, 0).unwrap();
        assert!(validate_routing(&g, &r));
        let mut overlap = r.clone();
        let shared = overlap.paths[0].cells[2];
        overlap.paths[1].cells.insert(1, shared);
        assert!(!validate_routing(&g, &overlap));
        let mut hops = r.clone();
        let p = &mut hops.paths[0];
        let first = p.cells[0];
        let mut cells = vec![first];
        for k in 0..12 {
            cells.push(GridCell { layer: (k % 2 == 0) as u8, ..first });
        }
        cells.extend_from_slice(&p.cells[1..]);
        p.cells = cells;
        p.bumps += 12;
        assert!(!validate_routing(&g, &hops));
    }
}
