//! Physical multi-round circuits on grid sites.

use crate::code::{Class, CodeSpec};
use crate::error::Result;
use crate::schedule::{reversed_round, GateKind, Schedule};
use crate::tracker::{expand_round, initial_positions, AbsentSiteMap, Positions, RoundExpansion};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Reset(usize),
    H(usize),
    /// Control, target.
    Cnot(usize, usize),
    Swap(usize, usize),
    /// CNOT(control, target) followed by SWAP of the same pair.
    CxSwap(usize, usize),
    /// Z-basis measurement producing the next record.
    Measure(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentKind {
    Reset,
    Hadamard,
    Gates { swap_only: bool },
    Measure,
}

#[derive(Clone, Debug)]
pub struct Moment {
    pub kind: MomentKind,
    pub ops: Vec<Op>,
    /// Round index, and schedule layer for gate moments.
    pub round: usize,
    pub layer: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Record {
    pub round: usize,
    pub class: Class,
    pub unit: usize,
    pub site: usize,
}

#[derive(Clone, Debug)]
pub struct PhysCircuit {
    pub num_sites: usize,
    pub moments: Vec<Moment>,
    pub records: Vec<Record>,
    pub expansions: Vec<RoundExpansion>,
    /// Configuration before round 0 and after each round.
    pub positions: Vec<Positions>,
}

/// Forward then reversed rounds for routing schedules; plain repetition otherwise.
pub fn round_sequence(s: &Schedule, rounds: usize) -> Vec<Schedule> {
    let rev = reversed_round(s);
    (0..rounds).map(|r| if s.has_routing() && r % 2 == 1 { rev.clone() } else { s.clone() }).collect()
}

pub fn gate_op(kind: GateKind, class: Class, anc_site: usize, data_site: usize) -> Op {
    let (c, t) = match class {
        Class::X => (anc_site, data_site),
        Class::Z => (data_site, anc_site),
    };
    match kind {
        GateKind::Cnot => Op::Cnot(c, t),
        GateKind::Swap => Op::Swap(c, t),
        GateKind::CxSwap => Op::CxSwap(c, t),
    }
}

/// Builds `rounds` rounds of syndrome extraction starting from the schedule's
/// declared configuration. All qubits start in |0>.
pub fn build_circuit(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap, rounds: usize) -> Result<PhysCircuit> {
    let in_code = absent.in_code_mask(code)?;
    let mut pos = initial_positions(code, s, absent)?;
    let mut moments = Vec::new();
    let mut records = Vec::new();
    let mut expansions = Vec::new();
    let mut positions = vec![pos.clone()];
    let ancillas: Vec<(Class, usize)> = Class::BOTH
        .into_iter()
        .flat_map(|c| (0..code.units()).map(move |u| (c, u)))
        .filter(|&(c, u)| in_code[code.ancilla_index(c, u)])
        .collect();
    let all_sites: Vec<usize> = (0..code.num_qubits()).filter_map(|q| pos.site(code, q)).collect();
    for (r, sched) in round_sequence(s, rounds).iter().enumerate() {
        let e = expand_round(code, sched, absent, &pos)?;
        let site_of = |p: &Positions, c: Class, u: usize| p.site(code, code.ancilla_index(c, u)).expect("ancilla present");
        let resets: Vec<Op> = if r == 0 {
            let mut v: Vec<usize> = all_sites.clone();
            v.sort_unstable();
            v.into_iter().map(Op::Reset).collect()
        } else {
            ancillas.iter().map(|&(c, u)| Op::Reset(site_of(&e.start, c, u))).collect()
        };
        moments.push(Moment { kind: MomentKind::Reset, ops: resets, round: r, layer: None });
        let hs = |p: &Positions| -> Vec<Op> {
            ancillas.iter().filter(|(c, _)| *c == Class::X).map(|&(c, u)| Op::H(site_of(p, c, u))).collect()
        };
        moments.push(Moment { kind: MomentKind::Hadamard, ops: hs(&e.start), round: r, layer: None });
        for (k, layer) in e.layers.iter().enumerate() {
            let ops: Vec<Op> = layer.gates.iter().map(|g| gate_op(g.kind, g.class, g.anc_site, g.data_site)).collect();
            let swap_only = !ops.is_empty() && layer.gates.iter().all(|g| g.kind == GateKind::Swap);
            moments.push(Moment { kind: MomentKind::Gates { swap_only }, ops, round: r, layer: Some(k) });
        }
        moments.push(Moment { kind: MomentKind::Hadamard, ops: hs(&e.end), round: r, layer: None });
        let mut meas = Vec::new();
        for &(c, u) in &ancillas {
            let site = site_of(&e.end, c, u);
            meas.push(Op::Measure(site));
            records.push(Record { round: r, class: c, unit: u, site });
        }
        moments.push(Moment { kind: MomentKind::Measure, ops: meas, round: r, layer: None });
        pos = e.end.clone();
        positions.push(pos.clone());
        expansions.push(e);
    }
    Ok(PhysCircuit { num_sites: code.num_sites(), moments, records, expansions, positions })
}

impl PhysCircuit {
    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.moments.iter().flat_map(|m| m.ops.iter())
    }

    /// Record index of (round, class, unit).
    pub fn record_index(&self) -> std::collections::HashMap<(usize, Class, usize), usize> {
        self.records.iter().enumerate().map(|(k, r)| ((r.round, r.class, r.unit), k)).collect()
    }
}
