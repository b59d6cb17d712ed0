//! Coupler extraction and the degree / interaction-distance statistics.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::code::{partner_role, CodeSpec, GridPos, Role, Vec2};
use crate::error::Result;
use crate::schedule::{Schedule, Scheme};
use crate::tracker::{expand_schedule, AbsentSiteMap, RoundExpansion};

pub type Rational = Ratio<i64>;

/// Renders halves as decimals, other fractions as `p/q`.
pub fn fmt_ratio(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else if *r.denom() == 2 {
        let whole = r.numer().div_euclid(2);
        format!("{whole}.5")
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DistanceMode {
    /// Minimum over periodic images.
    #[default]
    Torus,
    /// Length of the raw displacement accumulated through routing, no wrap.
    Unwrapped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CouplerClass {
    Short,
    Long,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coupler {
    pub a: GridPos,
    pub b: GridPos,
    pub length: i64,
    pub class: CouplerClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplerGraph {
    pub width: i64,
    pub height: i64,
    pub couplers: Vec<Coupler>,
}

impl CouplerGraph {
    pub fn num_sites(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn site(&self, p: GridPos) -> usize {
        (p.row * self.width + p.col) as usize
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_sites()];
        for (k, c) in self.couplers.iter().enumerate() {
            adj[self.site(c.a)].push(k);
            adj[self.site(c.b)].push(k);
        }
        adj
    }

    pub fn long_couplers(&self) -> impl Iterator<Item = &Coupler> {
        self.couplers.iter().filter(|c| c.class == CouplerClass::Long)
    }
}

fn l1(v: Vec2) -> i64 {
    v.0.abs() + v.1.abs()
}

fn coupler_length(code: &CodeSpec, v: Vec2, mode: DistanceMode) -> i64 {
    match mode {
        DistanceMode::Torus => code.torus_len(v),
        DistanceMode::Unwrapped => l1(v),
    }
}

/// Couplers used by one expanded round.
pub fn couplers_of_expansion(code: &CodeSpec, e: &RoundExpansion, mode: DistanceMode) -> CouplerGraph {
    let mut seen: BTreeMap<(usize, usize, Vec2), i64> = BTreeMap::new();
    for layer in &e.layers {
        for g in &layer.gates {
            let (s1, s2, v) = (g.anc_site, g.data_site, g.vector);
            let key = match mode {
                DistanceMode::Torus => (s1.min(s2), s1.max(s2), (0, 0)),
                DistanceMode::Unwrapped => {
                    let fwd = (s1, s2, v);
                    let back = (s2, s1, (-v.0, -v.1));
                    if fwd <= back {
                        fwd
                    } else {
                        back
                    }
                }
            };
            seen.insert(key, coupler_length(code, v, mode));
        }
    }
    let couplers = seen
        .into_iter()
        .map(|((s1, s2, _), length)| Coupler {
            a: code.site_pos(s1),
            b: code.site_pos(s2),
            length,
            class: if length <= 1 { CouplerClass::Short } else { CouplerClass::Long },
        })
        .collect();
    CouplerGraph { width: code.width(), height: code.height(), couplers }
}

pub fn extract_couplers(s: &Schedule, code: &CodeSpec) -> Result<CouplerGraph> {
    extract_couplers_with(s, code, &AbsentSiteMap::none(), DistanceMode::Torus)
}

pub fn extract_couplers_with(
    s: &Schedule,
    code: &CodeSpec,
    absent: &AbsentSiteMap,
    mode: DistanceMode,
) -> Result<CouplerGraph> {
    let e = expand_schedule(code, s, absent)?;
    Ok(couplers_of_expansion(code, &e, mode))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMetrics {
    pub role: Role,
    pub avg_degree: Rational,
    pub avg_total_distance: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub couplers: usize,
    pub avg_degree: Rational,
    pub avg_total_distance: Rational,
    pub max_length: i64,
    /// Keyed by the role whose home corner the site is.
    pub per_role: Vec<RoleMetrics>,
}

fn home_role(p: GridPos) -> Role {
    match (p.col.rem_euclid(2), p.row.rem_euclid(2)) {
        (0, 0) => Role::X,
        (1, 0) => Role::R,
        (0, _) => Role::L,
        _ => Role::Z,
    }
}

pub fn metrics_report(g: &CouplerGraph) -> MetricsReport {
    let n = g.num_sites() as i64;
    let total_len: i64 = g.couplers.iter().map(|c| c.length).sum();
    let (avg_degree, avg_total_distance) = if n == 0 {
        (Rational::from_integer(0), Rational::from_integer(0))
    } else {
        (Rational::new(2 * g.couplers.len() as i64, n), Rational::new(2 * total_len, n))
    };
    let mut per: HashMap<Role, (i64, i64)> = HashMap::new();
    for c in &g.couplers {
        for p in [c.a, c.b] {
            let e = per.entry(home_role(p)).or_default();
            e.0 += 1;
            e.1 += c.length;
        }
    }
    let per_role = Role::ALL
        .iter()
        .map(|&role| {
            let (deg, len) = per.get(&role).copied().unwrap_or_default();
            let count = (n / 4).max(1);
            RoleMetrics { role, avg_degree: Rational::new(deg, count), avg_total_distance: Rational::new(len, count) }
        })
        .collect();
    MetricsReport {
        couplers: g.couplers.len(),
        avg_degree,
        avg_total_distance,
        max_length: g.couplers.iter().map(|c| c.length).max().unwrap_or(0),
        per_role,
    }
}

/// Fast per-unit evaluation from sublattice offsets; returns
/// (degree, distance, coupler orbits counted in halves).
///
/// Couplers fall into translation orbits keyed by the parity corner of the
/// ancilla's site and the displacement modulo the torus; an orbit that maps to
/// itself under reversal holds half as many couplers.
pub fn fast_metrics(code: &CodeSpec, s: &Schedule, mode: DistanceMode) -> (Rational, Rational, i64) {
    let (w, h) = (code.width(), code.height());
    let mut o = [(0i64, 0i64); 4];
    let mut keys: Vec<((i64, i64, i64, i64), i64, bool)> = Vec::with_capacity(2 * s.layers.len());
    let mut step = |o: &mut [Vec2; 4], class: crate::code::Class, t: crate::code::Term, moves: bool, record: bool| {
        let ar = class.role();
        let p = partner_role(class, t.poly);
        let v0 = code.base_vector(class, t);
        let v = (v0.0 + o[p.index()].0 - o[ar.index()].0, v0.1 + o[p.index()].1 - o[ar.index()].1);
        if record {
            let c = ar.corner();
            let px = (c.0 + o[ar.index()].0).rem_euclid(2);
            let py = (c.1 + o[ar.index()].1).rem_euclid(2);
            let (k1, k2) = match mode {
                DistanceMode::Torus => (
                    (px, py, v.0.rem_euclid(w), v.1.rem_euclid(h)),
                    ((px + v.0).rem_euclid(2), (py + v.1).rem_euclid(2), (-v.0).rem_euclid(w), (-v.1).rem_euclid(h)),
                ),
                DistanceMode::Unwrapped => {
                    ((px, py, v.0, v.1), ((px + v.0).rem_euclid(2), (py + v.1).rem_euclid(2), -v.0, -v.1))
                }
            };
            keys.push((k1.min(k2), coupler_length(code, v, mode), k1 == k2));
        }
        if moves {
            o[ar.index()] = (o[ar.index()].0 + v.0, o[ar.index()].1 + v.1);
            o[p.index()] = (o[p.index()].0 - v.0, o[p.index()].1 - v.1);
        }
    };
    for f in &s.init {
        step(&mut o, f.class, f.term, true, false);
    }
    for layer in &s.layers {
        for (class, cell) in layer.cells() {
            step(&mut o, class, cell.term, cell.gate.moves(), true);
        }
    }
    keys.sort_unstable();
    keys.dedup_by(|a, b| a.0 == b.0);
    // Per unit: full orbit contributes one coupler, half orbit one half.
    let mut halves = 0i64;
    let mut len_halves = 0i64;
    for (_, len, half) in &keys {
        let k = if *half { 1 } else { 2 };
        halves += k;
        len_halves += k * len;
    }
    // degree = 2 * couplers / 4 per unit = halves / 4; same for distance.
    (Rational::new(halves, 4), Rational::new(len_halves, 4), halves)
}

pub fn predicted_degree(scheme: Scheme, n_a: usize, n_b: usize) -> Option<Rational> {
    let (a, b) = (n_a as i64, n_b as i64);
    match scheme {
        Scheme::Regular => Some(Rational::from_integer(a + b)),
        Scheme::Louvre7 => Some(Rational::from_integer(a + b) - Rational::new(a.max(b), 2)),
        Scheme::Louvre8 => Some(Rational::new(a + b, 2) + 1),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert_eq!(predicted_degree(Scheme::Louvre7, 3, 3), Some(Rational::new(9, 2)));
        assert_eq!(predicted_degree(Scheme::Louvre7, 2, 6), Some(Rational::from_integer(5)));
        assert_eq!(predicted_degree(Scheme::Louvre8, 4, 4), Some(Rational::from_integer(5)));
        assert_eq!(predicted_degree(Scheme::Louvre7R, 4, 4), None);
    }

    #[test]
    fn empty_graph_is_zero() {
        let g = CouplerGraph { width: 4, height: 4, couplers: Vec::new() };
        let r = metrics_report(&g);
        assert_eq!(r.avg_degree, Rational::from_integer(0));
        assert_eq!(r.avg_total_distance, Rational::from_integer(0));
    }

    #[test]
    fn ratio_text() {
        assert_eq!(fmt_ratio(Rational::new(9, 2)), "4.5");
        assert_eq!(fmt_ratio(Rational::new(12, 1)), "12");
        assert_eq!(fmt_ratio(Rational::new(1, 3)), "1/3");
    }
}
