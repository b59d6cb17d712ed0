//! Configuration tracking: sublattice offsets in the uniform case, explicit
//! per-qubit displacements once absent sites break the uniformity.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::code::{partner_role, Class, CodeSpec, GridPos, QubitId, Role, Vec2};
use crate::error::{Error, Result};
use crate::schedule::{FictionalSwap, GateKind, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// A spare qubit fills the site and is swapped through.
    Padding,
    /// The site is empty; stranded partners stay put and get extra couplers.
    ExtraCouplers,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsentSiteMap {
    pub absent: Vec<QubitId>,
    pub strategy: Strategy,
}

impl AbsentSiteMap {
    pub fn none() -> Self {
        AbsentSiteMap { absent: Vec::new(), strategy: Strategy::Padding }
    }

    pub fn is_empty(&self) -> bool {
        self.absent.is_empty()
    }

    /// Per-qubit flag: true if the qubit belongs to the code.
    pub fn in_code_mask(&self, code: &CodeSpec) -> Result<Vec<bool>> {
        let mut mask = vec![true; code.num_qubits()];
        for q in &self.absent {
            if q.i >= code.m || q.j >= code.l {
                return Err(Error::Absent { qubit: q.to_string(), reason: "outside the torus".into() });
            }
            mask[code.qubit_index(*q)] = false;
        }
        Ok(mask)
    }
}

/// Sublattice offsets in grid steps, indexed by `Role::index`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationState {
    pub offsets: [Vec2; 4],
    /// Per-qubit displacement in absent-site mode; `None` entries have no qubit.
    pub displacements: Option<Vec<Option<Vec2>>>,
}

impl ConfigurationState {
    pub fn offset(&self, r: Role) -> Vec2 {
        self.offsets[r.index()]
    }
}

fn add(a: Vec2, b: Vec2) -> Vec2 {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: Vec2, b: Vec2) -> Vec2 {
    (a.0 - b.0, a.1 - b.1)
}

/// Offset bookkeeping for uniform sublattices. Entry 0 follows the fictional swaps;
/// entry k+1 follows layer k.
pub fn track_configuration(s: &Schedule, code: &CodeSpec) -> Result<Vec<ConfigurationState>> {
    let mut o = [(0i64, 0i64); 4];
    let step = |o: &mut [Vec2; 4], class: Class, f: &FictionalSwap| {
        let p = partner_role(class, f.term.poly);
        let v = add(code.base_vector(class, f.term), sub(o[p.index()], o[class.role().index()]));
        let a = class.role().index();
        o[a] = add(o[a], v);
        o[p.index()] = sub(o[p.index()], v);
    };
    for f in &s.init {
        step(&mut o, f.class, f);
    }
    let mut out = vec![ConfigurationState { offsets: o, displacements: None }];
    for (k, layer) in s.layers.iter().enumerate() {
        if let (Some(x), Some(z)) = (layer.x, layer.z) {
            if partner_role(Class::X, x.term.poly) == partner_role(Class::Z, z.term.poly) {
                return Err(Error::Structural {
                    layer: k,
                    reason: format!(
                        "X cell {} and Z cell {} both address the {} sublattice",
                        x.term,
                        z.term,
                        partner_role(Class::X, x.term.poly)
                    ),
                });
            }
        }
        for (class, cell) in layer.cells() {
            if cell.gate.moves() {
                step(&mut o, class, &FictionalSwap { class, term: cell.term });
            }
        }
        out.push(ConfigurationState { offsets: o, displacements: None });
    }
    Ok(out)
}

/// Physical qubit displacements from home; `None` marks a site with no qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positions {
    pub disp: Vec<Option<Vec2>>,
}

impl Positions {
    pub fn home(code: &CodeSpec, absent: &AbsentSiteMap) -> Result<Self> {
        let mask = absent.in_code_mask(code)?;
        let keep_all = absent.strategy == Strategy::Padding;
        Ok(Positions { disp: mask.iter().map(|&m| (m || keep_all).then_some((0, 0))).collect() })
    }

    pub fn pos(&self, code: &CodeSpec, q: usize) -> Option<GridPos> {
        let d = self.disp[q]?;
        let h = crate::code::qubit_position(code.qubit_at(q));
        Some(code.wrap(GridPos { col: h.col + d.0, row: h.row + d.1 }))
    }

    pub fn site(&self, code: &CodeSpec, q: usize) -> Option<usize> {
        self.pos(code, q).map(|p| code.site_of(p))
    }

    /// Same physical arrangement (displacements agree modulo the torus).
    pub fn same_sites(&self, code: &CodeSpec, other: &Positions) -> bool {
        (0..self.disp.len()).all(|q| self.site(code, q) == other.site(code, q))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhysGate {
    pub kind: GateKind,
    pub class: Class,
    pub ancilla: usize,
    pub data: usize,
    pub anc_site: usize,
    pub data_site: usize,
    /// Raw displacement from ancilla to data, before torus reduction.
    pub vector: Vec2,
    /// One side is not part of the code (padding swap).
    pub padding: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhysLayer {
    pub gates: Vec<PhysGate>,
}

#[derive(Clone, Debug)]
pub struct RoundExpansion {
    pub start: Positions,
    pub layers: Vec<PhysLayer>,
    pub end: Positions,
}

struct Expander<'a> {
    code: &'a CodeSpec,
    in_code: Vec<bool>,
    strategy: Strategy,
}

impl Expander<'_> {
    /// Gate for one ancilla, or None if the adaptation drops it.
    fn gate(&self, pos: &Positions, class: Class, unit: usize, cell: crate::schedule::Cell) -> Option<PhysGate> {
        let code = self.code;
        let a = code.ancilla_index(class, unit);
        let d = code.qubit_index(code.partner(code.qubit_at(a), cell.term));
        let full = self.in_code[a] && self.in_code[d];
        let kind = if full {
            cell.gate
        } else if self.strategy == Strategy::Padding && cell.gate.moves() {
            GateKind::Swap
        } else {
            return None;
        };
        let (da, dd) = (pos.disp[a]?, pos.disp[d]?);
        let vector = add(code.base_vector(class, cell.term), sub(dd, da));
        Some(PhysGate {
            kind,
            class,
            ancilla: a,
            data: d,
            anc_site: pos.site(code, a)?,
            data_site: pos.site(code, d)?,
            vector,
            padding: !full,
        })
    }

    fn apply(pos: &mut Positions, g: &PhysGate) {
        if g.kind.moves() {
            let v = g.vector;
            let a = pos.disp[g.ancilla].as_mut().expect("present");
            *a = add(*a, v);
            let d = pos.disp[g.data].as_mut().expect("present");
            *d = sub(*d, v);
        }
    }

    fn layer(&self, pos: &Positions, cells: &[(Class, crate::schedule::Cell)], k: usize) -> Result<PhysLayer> {
        let mut gates = Vec::new();
        let mut used: HashSet<usize> = HashSet::new();
        for &(class, cell) in cells {
            for u in 0..self.code.units() {
                if let Some(g) = self.gate(pos, class, u, cell) {
                    for q in [g.ancilla, g.data] {
                        if !used.insert(q) {
                            return Err(Error::Structural {
                                layer: k,
                                reason: format!("qubit {} used twice", self.code.qubit_at(q)),
                            });
                        }
                    }
                    gates.push(g);
                }
            }
        }
        Ok(PhysLayer { gates })
    }
}

fn expander<'a>(code: &'a CodeSpec, absent: &AbsentSiteMap) -> Result<Expander<'a>> {
    Ok(Expander { code, in_code: absent.in_code_mask(code)?, strategy: absent.strategy })
}

/// Home layout with the schedule's fictional swaps applied.
pub fn initial_positions(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap) -> Result<Positions> {
    let ex = expander(code, absent)?;
    let mut pos = Positions::home(code, absent)?;
    for f in &s.init {
        let cell = crate::schedule::Cell::new(f.term, GateKind::Swap);
        let layer = ex.layer(&pos, &[(f.class, cell)], 0)?;
        for g in &layer.gates {
            Expander::apply(&mut pos, g);
        }
    }
    Ok(pos)
}

/// Expands one round to per-qubit gates, starting from `start`.
pub fn expand_round(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap, start: &Positions) -> Result<RoundExpansion> {
    let ex = expander(code, absent)?;
    let mut pos = start.clone();
    let mut layers = Vec::with_capacity(s.layers.len());
    for (k, layer) in s.layers.iter().enumerate() {
        let cells: Vec<_> = layer.cells().collect();
        let pl = ex.layer(&pos, &cells, k)?;
        for g in &pl.gates {
            Expander::apply(&mut pos, g);
        }
        layers.push(pl);
    }
    Ok(RoundExpansion { start: start.clone(), layers, end: pos })
}

/// Expands a single round from its own declared starting configuration.
pub fn expand_schedule(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap) -> Result<RoundExpansion> {
    let start = initial_positions(code, s, absent)?;
    expand_round(code, s, absent, &start)
}

/// Per-qubit configuration states, one per layer boundary.
pub fn track_positions(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap) -> Result<Vec<ConfigurationState>> {
    let e = expand_schedule(code, s, absent)?;
    let mut pos = e.start.clone();
    let global = track_configuration(s, code)?;
    let mut out = vec![ConfigurationState { offsets: global[0].offsets, displacements: Some(pos.disp.clone()) }];
    for (k, l) in e.layers.iter().enumerate() {
        for g in &l.gates {
            Expander::apply(&mut pos, g);
        }
        out.push(ConfigurationState { offsets: global[k + 1].offsets, displacements: Some(pos.disp.clone()) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{build_louvre7, build_regular_default, Louvre7Options};

    fn bb18() -> CodeSpec {
        CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap()
    }

    #[test]
    fn regular_never_moves() {
        let code = bb18();
        let states = track_configuration(&build_regular_default(&code), &code).unwrap();
        assert!(states.iter().all(|s| s.offsets == [(0, 0); 4]));
    }

    #[test]
    fn louvre7_corner_swap() {
        let code = bb18();
        let s = build_louvre7(&code, &Louvre7Options::default()).unwrap();
        let states = track_configuration(&s, &code).unwrap();
        let after5 = &states[5];
        assert_eq!(after5.offset(Role::X), (1, 0));
        assert_eq!(after5.offset(Role::R), (-1, 0));
        assert_eq!(after5.offset(Role::Z), (-1, 0));
        assert_eq!(after5.offset(Role::L), (1, 0));
    }

    #[test]
    fn per_qubit_matches_offsets_without_absent_sites() {
        let code = bb18();
        let s = build_louvre7(&code, &Louvre7Options::default()).unwrap();
        let states = track_positions(&code, &s, &AbsentSiteMap::none()).unwrap();
        for st in &states {
            let d = st.displacements.as_ref().unwrap();
            for (q, dq) in d.iter().enumerate() {
                assert_eq!(dq.unwrap(), st.offset(code.qubit_at(q).role));
            }
        }
    }

    #[test]
    fn conflicting_layer_is_structural_error() {
        let code = bb18();
        let s = crate::schedule::from_instruction_table("X | A1\nZ | B1\n").unwrap();
        assert!(matches!(track_configuration(&s, &code), Err(Error::Structural { .. })));
        assert!(matches!(expand_schedule(&code, &s, &AbsentSiteMap::none()), Err(Error::Structural { .. })));
    }
}
