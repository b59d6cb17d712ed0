//! Schedule verification: commutation, syndrome determinism, single-fault
//! detection, logical preservation and configuration restoration.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_circuit, round_sequence, Op, PhysCircuit};
use crate::code::{check_matrices, Class, CodeSpec};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, RowSpace};
use crate::schedule::{reversed_round, Schedule};
use crate::tableau::{Frame, Tableau};
use crate::tracker::{expand_round, initial_positions, AbsentSiteMap, Positions, RoundExpansion};

/// The code actually realised once absent qubits are removed.
///
/// Checks restricted to the remaining data generally stop commuting; the
/// measured operators then form a gauge group and the stabilizers are the
/// products of checks (`*_combos`, rows over the present checks of that type)
/// that commute with every check of the other type.
#[derive(Clone, Debug)]
pub struct ActiveCode {
    pub n: usize,
    pub data_active: Vec<bool>,
    pub x_checks: Vec<usize>,
    pub z_checks: Vec<usize>,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    pub x_combos: BitMatrix,
    pub z_combos: BitMatrix,
}

impl ActiveCode {
    pub fn new(code: &CodeSpec, absent: &AbsentSiteMap) -> Result<Self> {
        let mask = absent.in_code_mask(code)?;
        let n = code.n();
        let h = check_matrices(code);
        let data_active: Vec<bool> = mask[..n].to_vec();
        let restrict = |class: Class, full: &BitMatrix| -> Result<(Vec<usize>, BitMatrix)> {
            let units: Vec<usize> = (0..code.units()).filter(|&u| mask[code.ancilla_index(class, u)]).collect();
            let mut m = BitMatrix::zeros(0, n);
            for &u in &units {
                let ones: Vec<usize> = full.row_ones(u).into_iter().filter(|&q| data_active[q]).collect();
                if ones.is_empty() {
                    let q = code.qubit_at(code.ancilla_index(class, u));
                    return Err(Error::Absent { qubit: q.to_string(), reason: "check has no data qubits left".into() });
                }
                m.push_row(&ones);
            }
            Ok((units, m))
        };
        let (x_checks, hx) = restrict(Class::X, &h.hx)?;
        let (z_checks, hz) = restrict(Class::Z, &h.hz)?;
        let overlap = hx.mul_transpose(&hz);
        let x_combos = overlap.transpose().kernel();
        let z_combos = overlap.kernel();
        Ok(ActiveCode { n, data_active, x_checks, z_checks, hx, hz, x_combos, z_combos })
    }

    pub fn checks(&self, class: Class) -> &[usize] {
        match class {
            Class::X => &self.x_checks,
            Class::Z => &self.z_checks,
        }
    }

    pub fn combos(&self, class: Class) -> &BitMatrix {
        match class {
            Class::X => &self.x_combos,
            Class::Z => &self.z_combos,
        }
    }

    pub fn h(&self, class: Class) -> &BitMatrix {
        match class {
            Class::X => &self.hx,
            Class::Z => &self.hz,
        }
    }

    /// Logical operators of type `class` (Z-type commute with all X checks),
    /// as data bit vectors, independent modulo the same-type checks.
    pub fn logicals(&self, class: Class) -> Vec<Vec<usize>> {
        let (commute_with, same) = match class {
            Class::Z => (&self.hx, &self.hz),
            Class::X => (&self.hz, &self.hx),
        };
        let inactive: Vec<usize> = (0..self.n).filter(|&q| !self.data_active[q]).collect();
        let mut cons = commute_with.clone();
        for &q in &inactive {
            cons.push_row(&[q]);
        }
        let ker = cons.kernel();
        let mut space = RowSpace::from_matrix(same);
        let mut out = Vec::new();
        for r in 0..ker.rows() {
            if space.insert(ker.row(r).to_vec()) {
                out.push(ker.row_ones(r));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub check: String,
    pub round: Option<usize>,
    pub layer: Option<usize>,
    pub qubits: Vec<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub commutation_ok: bool,
    pub syndromes_deterministic: bool,
    pub single_fault_detection_ok: bool,
    pub restoration_ok: bool,
    pub logicals_preserved: bool,
    pub rounds: usize,
    pub detectors: usize,
    pub logical_qubits: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.commutation_ok
            && self.syndromes_deterministic
            && self.single_fault_detection_ok
            && self.restoration_ok
            && self.logicals_preserved
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub rounds: usize,
    /// Resolves random tableau outcomes.
    pub seed: u64,
    /// Run the CHP tableau in addition to the frame analysis.
    pub tableau: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { rounds: 3, seed: 0, tableau: true }
    }
}

/// A parity of measurement records expected to be zero without noise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detector {
    pub round: usize,
    pub class: Class,
    pub records: Vec<usize>,
}

/// Round 0 compares Z stabilizers against the |0> preparation; later rounds
/// compare every stabilizer against the previous round.
pub fn detectors(active: &ActiveCode, circ: &PhysCircuit) -> Vec<Detector> {
    let idx = circ.record_index();
    let rounds = circ.expansions.len();
    let mut out = Vec::new();
    for r in 0..rounds {
        for class in [Class::Z, Class::X] {
            if r == 0 && class == Class::X {
                continue;
            }
            let checks = active.checks(class);
            let combos = active.combos(class);
            for c in 0..combos.rows() {
                let mut records = Vec::new();
                for k in combos.row_ones(c) {
                    let u = checks[k];
                    records.push(idx[&(r, class, u)]);
                    if r > 0 {
                        records.push(idx[&(r - 1, class, u)]);
                    }
                }
                records.sort_unstable();
                out.push(Detector { round: r, class, records });
            }
        }
    }
    out
}

fn qname(code: &CodeSpec, q: usize) -> String {
    code.qubit_at(q).to_string()
}

/// Interaction layer of every (ancilla, data) pair in one expanded round.
fn interaction_times(e: &RoundExpansion) -> HashMap<(usize, usize), usize> {
    let mut t = HashMap::new();
    for (k, layer) in e.layers.iter().enumerate() {
        for g in &layer.gates {
            if g.kind.interacts() && !g.padding {
                t.insert((g.ancilla, g.data), k);
            }
        }
    }
    t
}

/// Even-overlap rule: a stabilizer and a check of the other type commute in
/// time iff the X side acts first on an even number of their shared qubits.
/// Without absent sites the stabilizers are the checks themselves.
fn commutation_of_round(
    code: &CodeSpec,
    active: &ActiveCode,
    e: &RoundExpansion,
    round: usize,
    diags: &mut Vec<Diagnostic>,
) -> bool {
    let t = interaction_times(e);
    let mut ok = true;
    let mut x_of: Vec<Vec<usize>> = vec![Vec::new(); active.n];
    let mut z_of: Vec<Vec<usize>> = vec![Vec::new(); active.n];
    for class in Class::BOTH {
        let h = active.h(class);
        for (row, &u) in active.checks(class).iter().enumerate() {
            let a = code.ancilla_index(class, u);
            for q in h.row_ones(row) {
                if !t.contains_key(&(a, q)) {
                    ok = false;
                    diags.push(Diagnostic {
                        check: "commutation".into(),
                        round: Some(round),
                        layer: None,
                        qubits: vec![qname(code, a), qname(code, q)],
                        message: "check never interacts with a qubit of its support".into(),
                    });
                    continue;
                }
                match class {
                    Class::X => x_of[q].push(row),
                    Class::Z => z_of[q].push(row),
                }
            }
        }
    }
    let xa = |row: usize| code.ancilla_index(Class::X, active.x_checks[row]);
    let za = |row: usize| code.ancilla_index(Class::Z, active.z_checks[row]);
    // Parity of x-first qubits per (X row, Z row), and the latest such layer.
    let mut first = BitMatrix::zeros(active.x_checks.len(), active.z_checks.len());
    let mut latest: HashMap<(usize, usize), usize> = HashMap::new();
    for q in 0..active.n {
        for &x in &x_of[q] {
            for &z in &z_of[q] {
                let (tx, tz) = (t[&(xa(x), q)], t[&(za(z), q)]);
                if tx < tz {
                    first.toggle(x, z);
                    let l = latest.entry((x, z)).or_insert(0);
                    *l = (*l).max(tz);
                }
            }
        }
    }
    let mut bad = Vec::new();
    let xs = active.x_combos.mul_transpose(&first.transpose());
    for c in 0..xs.rows() {
        for z in xs.row_ones(c) {
            let members = active.x_combos.row_ones(c);
            let layer = members.iter().filter_map(|&x| latest.get(&(x, z)).copied()).max();
            let mut qubits: Vec<String> = members.iter().map(|&x| qname(code, xa(x))).collect();
            qubits.push(qname(code, za(z)));
            bad.push((layer, qubits));
        }
    }
    let zs = active.z_combos.mul_transpose(&first);
    for c in 0..zs.rows() {
        for x in zs.row_ones(c) {
            let members = active.z_combos.row_ones(c);
            // A lone Z check against a lone X check repeats a pair already reported.
            if members.len() == 1 && active.x_combos.rows() == active.x_checks.len() {
                continue;
            }
            let layer = members.iter().filter_map(|&z| latest.get(&(x, z)).copied()).max();
            let mut qubits: Vec<String> = members.iter().map(|&z| qname(code, za(z))).collect();
            qubits.push(qname(code, xa(x)));
            bad.push((layer, qubits));
        }
    }
    bad.sort();
    for (layer, qubits) in bad {
        ok = false;
        diags.push(Diagnostic {
            check: "commutation".into(),
            round: Some(round),
            layer,
            qubits,
            message: "X side acts first on an odd number of shared qubits".into(),
        });
    }
    ok
}

/// Combinatorial commutation verdict for every distinct round type.
pub fn verify_commutation(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap) -> Result<(bool, Vec<Diagnostic>)> {
    let active = ActiveCode::new(code, absent)?;
    let mut pos = initial_positions(code, s, absent)?;
    let mut diags = Vec::new();
    let mut ok = true;
    let n_rounds = if s.has_routing() { 2 } else { 1 };
    for (r, sched) in round_sequence(s, n_rounds).iter().enumerate() {
        let e = expand_round(code, sched, absent, &pos)?;
        ok &= commutation_of_round(code, &active, &e, r, &mut diags);
        pos = e.end;
    }
    Ok((ok, diags))
}

/// Backward frame analysis: lane mask of detectors whose value is not fixed.
fn nondeterministic_detectors(circ: &PhysCircuit, dets: &[Detector]) -> Vec<bool> {
    let ops: Vec<Op> = circ.ops().copied().collect();
    let mut out = vec![false; dets.len()];
    for (chunk_no, chunk) in dets.chunks(64).enumerate() {
        let mut rec_mask = vec![0u64; circ.records.len()];
        for (lane, d) in chunk.iter().enumerate() {
            for &k in &d.records {
                rec_mask[k] ^= 1 << lane;
            }
        }
        let mut f = Frame::new(circ.num_sites);
        let mut nondet = 0u64;
        let mut rec = circ.records.len();
        for op in ops.iter().rev() {
            match *op {
                Op::Measure(s) => {
                    rec -= 1;
                    nondet |= f.x[s];
                    f.z[s] ^= rec_mask[rec];
                }
                Op::Reset(s) => {
                    nondet |= f.x[s];
                    f.reset(s);
                }
                Op::H(s) => f.h(s),
                Op::Cnot(c, t) => f.cnot(c, t),
                Op::Swap(a, b) => f.swap(a, b),
                Op::CxSwap(c, t) => {
                    f.swap(c, t);
                    f.cnot(c, t);
                }
            }
        }
        for x in &f.x {
            nondet |= x;
        }
        for lane in 0..chunk.len() {
            out[chunk_no * 64 + lane] = nondet >> lane & 1 == 1;
        }
    }
    out
}

pub struct TableauRun {
    pub values: Vec<bool>,
    pub deterministic: Vec<bool>,
}

pub fn run_tableau(circ: &PhysCircuit, seed: u64) -> TableauRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tableau::new(circ.num_sites);
    let mut values = Vec::with_capacity(circ.records.len());
    let mut deterministic = Vec::with_capacity(circ.records.len());
    for op in circ.ops() {
        match *op {
            Op::Reset(s) => t.reset(s),
            Op::H(s) => t.h(s),
            Op::Cnot(c, tg) => t.cnot(c, tg),
            Op::Swap(a, b) => t.swap(a, b),
            Op::CxSwap(c, tg) => {
                t.cnot(c, tg);
                t.swap(c, tg);
            }
            Op::Measure(s) => {
                let o = t.measure(s, rng.gen());
                values.push(o.value);
                deterministic.push(o.deterministic);
            }
        }
    }
    TableauRun { values, deterministic }
}

fn propagate_forward(f: &mut Frame, op: Op) {
    match op {
        Op::Reset(s) => f.reset(s),
        Op::H(s) => f.h(s),
        Op::Cnot(c, t) => f.cnot(c, t),
        Op::Swap(a, b) => f.swap(a, b),
        Op::CxSwap(c, t) => {
            f.cnot(c, t);
            f.swap(c, t);
        }
        Op::Measure(_) => {}
    }
}

/// Single data faults between rounds 0 and 1; each must flip exactly the
/// stabilizers whose support contains the qubit.
fn single_faults(code: &CodeSpec, active: &ActiveCode, circ: &PhysCircuit, diags: &mut Vec<Diagnostic>) -> bool {
    if circ.expansions.len() < 2 {
        return true;
    }
    let pos = &circ.positions[1];
    let faults: Vec<(usize, Class)> = (0..active.n)
        .filter(|&q| active.data_active[q])
        .flat_map(|q| [(q, Class::X), (q, Class::Z)])
        .collect();
    let start = circ.moments.iter().position(|m| m.round == 1).expect("round 1");
    let first_rec = circ.records.iter().position(|r| r.round == 1).expect("round 1 records");
    let idx = circ.record_index();
    let mut ok = true;
    for chunk in faults.chunks(64) {
        let mut f = Frame::new(circ.num_sites);
        for (lane, &(q, kind)) in chunk.iter().enumerate() {
            let s = pos.site(code, q).expect("data present");
            match kind {
                Class::X => f.x[s] |= 1 << lane,
                Class::Z => f.z[s] |= 1 << lane,
            }
        }
        let mut flips = vec![0u64; circ.records.len()];
        let mut rec = first_rec;
        for m in circ.moments[start..].iter().take_while(|m| m.round == 1) {
            for &op in &m.ops {
                if let Op::Measure(s) = op {
                    flips[rec] = f.x[s];
                    rec += 1;
                } else {
                    propagate_forward(&mut f, op);
                }
            }
        }
        for (lane, &(q, kind)) in chunk.iter().enumerate() {
            // An X fault shows up in Z stabilizers and vice versa.
            let det_class = match kind {
                Class::X => Class::Z,
                Class::Z => Class::X,
            };
            let mut any = false;
            for class in Class::BOTH {
                let combos = active.combos(class);
                let h = active.h(class);
                let checks = active.checks(class);
                for c in 0..combos.rows() {
                    let mut got = false;
                    let mut want = false;
                    for k in combos.row_ones(c) {
                        got ^= flips[idx[&(1, class, checks[k])]] >> lane & 1 == 1;
                        want ^= class == det_class && h.get(k, q);
                    }
                    any |= got;
                    if got != want {
                        ok = false;
                        diags.push(Diagnostic {
                            check: "single_fault".into(),
                            round: Some(1),
                            layer: None,
                            qubits: vec![qname(code, q)],
                            message: format!("{kind} fault: stabilizer {class}{c} flip {got}, expected {want}"),
                        });
                    }
                }
            }
            if !any && active.x_combos.rows() == active.x_checks.len() && active.z_combos.rows() == active.z_checks.len()
            {
                ok = false;
                diags.push(Diagnostic {
                    check: "single_fault".into(),
                    round: Some(1),
                    layer: None,
                    qubits: vec![qname(code, q)],
                    message: format!("{kind} fault flips nothing"),
                });
            }
        }
    }
    ok
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SiteKind {
    Data(usize),
    XAnc,
    ZAnc,
    Padding,
}

fn site_kinds(code: &CodeSpec, pos: &Positions, mask: &[bool]) -> Vec<Option<SiteKind>> {
    let mut out = vec![None; code.num_sites()];
    for q in 0..code.num_qubits() {
        if let Some(s) = pos.site(code, q) {
            out[s] = Some(if !mask[q] {
                SiteKind::Padding
            } else if q < code.n() {
                SiteKind::Data(q)
            } else if q >= code.ancilla_index(Class::Z, 0) {
                SiteKind::ZAnc
            } else {
                SiteKind::XAnc
            });
        }
    }
    out
}

/// Back-propagates every logical through each distinct round type. A Z logical
/// must come back as itself times Z stabilizers, possibly picking up Z on
/// Z-ancillas and padding qubits (which hold |0>), and never touching an
/// X-ancilla. X logicals likewise with the roles swapped.
fn logicals_preserved(
    code: &CodeSpec,
    active: &ActiveCode,
    absent: &AbsentSiteMap,
    circ: &PhysCircuit,
    diags: &mut Vec<Diagnostic>,
) -> Result<(bool, usize)> {
    let mask = absent.in_code_mask(code)?;
    let n_types = if circ.expansions.len() > 1 && round_types(circ) == 2 { 2 } else { 1 };
    let mut ok = true;
    let mut k_total = 0;
    for class in Class::BOTH {
        let logicals = active.logicals(class);
        k_total = logicals.len();
        let same = RowSpace::from_matrix(active.h(class));
        for r in 0..n_types.min(circ.expansions.len()) {
            let ops: Vec<Op> = circ
                .moments
                .iter()
                .filter(|m| m.round == r && matches!(m.kind, crate::circuit::MomentKind::Gates { .. }))
                .flat_map(|m| m.ops.iter().copied())
                .collect();
            let end_kinds = &circ.positions[r + 1];
            let start = site_kinds(code, &circ.positions[r], &mask);
            for (chunk_no, chunk) in logicals.chunks(64).enumerate() {
                let mut f = Frame::new(circ.num_sites);
                for (lane, v) in chunk.iter().enumerate() {
                    for &q in v {
                        let s = end_kinds.site(code, q).expect("data present");
                        match class {
                            Class::Z => f.z[s] |= 1 << lane,
                            Class::X => f.x[s] |= 1 << lane,
                        }
                    }
                }
                for &op in ops.iter().rev() {
                    match op {
                        Op::CxSwap(c, t) => {
                            f.swap(c, t);
                            f.cnot(c, t);
                        }
                        op => propagate_forward(&mut f, op),
                    }
                }
                for (lane, v) in chunk.iter().enumerate() {
                    let bit = |w: u64| w >> lane & 1 == 1;
                    let mut data = vec![false; active.n];
                    let mut fail = None;
                    for (s, kind) in start.iter().enumerate() {
                        let (own, other) = match class {
                            Class::Z => (bit(f.z[s]), bit(f.x[s])),
                            Class::X => (bit(f.x[s]), bit(f.z[s])),
                        };
                        if !own && !other {
                            continue;
                        }
                        match kind {
                            Some(SiteKind::Data(q)) if !other => data[*q] = own,
                            Some(SiteKind::ZAnc) if class == Class::Z && !other => {}
                            Some(SiteKind::XAnc) if class == Class::X && !other => {}
                            Some(SiteKind::Padding) if class == Class::Z && !other => {}
                            _ => fail = Some(s),
                        }
                    }
                    for &q in v {
                        data[q] ^= true;
                    }
                    let in_span = same.contains(&crate::gf2::pack(&data));
                    if fail.is_some() || !in_span {
                        ok = false;
                        diags.push(Diagnostic {
                            check: "logicals".into(),
                            round: Some(r),
                            layer: None,
                            qubits: Vec::new(),
                            message: format!(
                                "{class} logical {} is not preserved{}",
                                chunk_no * 64 + lane,
                                fail.map(|s| format!(" (leaks onto site {s})")).unwrap_or_default()
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok((ok, k_total))
}

fn round_types(circ: &PhysCircuit) -> usize {
    if circ.expansions.len() > 1 && circ.expansions[0].layers != circ.expansions[1].layers {
        2
    } else {
        1
    }
}

/// Forward then reversed round returns every qubit to its starting site, and the
/// reversed round's declared start matches where the forward round ends.
pub fn verify_restoration(
    code: &CodeSpec,
    forward: &Schedule,
    reversed: &Schedule,
    absent: &AbsentSiteMap,
) -> Result<(bool, Vec<Diagnostic>)> {
    let start = initial_positions(code, forward, absent)?;
    let e1 = expand_round(code, forward, absent, &start)?;
    let declared = initial_positions(code, reversed, absent)?;
    let e2 = expand_round(code, reversed, absent, &e1.end)?;
    let mut diags = Vec::new();
    let mut check = |a: &Positions, b: &Positions, what: &str| {
        let moved: Vec<String> =
            (0..code.num_qubits()).filter(|&q| a.site(code, q) != b.site(code, q)).map(|q| qname(code, q)).collect();
        if !moved.is_empty() {
            diags.push(Diagnostic {
                check: "restoration".into(),
                round: None,
                layer: None,
                message: format!("{what}: {} qubits differ", moved.len()),
                qubits: moved.into_iter().take(8).collect(),
            });
        }
    };
    check(&declared, &e1.end, "reversed round start differs from forward round end");
    check(&start, &e2.end, "forward + reversed round does not restore the layout");
    Ok((diags.is_empty(), diags))
}

pub fn verify(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap, opts: &VerifyOptions) -> Result<VerificationReport> {
    s.validate(code)?;
    let active = ActiveCode::new(code, absent)?;
    let rounds = opts.rounds.max(2);
    let circ = build_circuit(code, s, absent, rounds)?;
    let mut diags = Vec::new();

    let (commutation_ok, cd) = verify_commutation(code, s, absent)?;
    diags.extend(cd);

    let dets = detectors(&active, &circ);
    let nondet = nondeterministic_detectors(&circ, &dets);
    let mut syndromes_deterministic = true;
    let mut first_bad: Option<usize> = None;
    for (k, d) in dets.iter().enumerate() {
        if nondet[k] {
            syndromes_deterministic = false;
            first_bad.get_or_insert(k);
            if diags.iter().filter(|x| x.check == "determinism").count() < 16 {
                diags.push(Diagnostic {
                    check: "determinism".into(),
                    round: Some(d.round),
                    layer: None,
                    qubits: d.records.iter().map(|&r| qname(code, code.ancilla_index(circ.records[r].class, circ.records[r].unit))).collect(),
                    message: format!("{} detector is not deterministic", d.class),
                });
            }
        }
    }
    if opts.tableau {
        let run = run_tableau(&circ, opts.seed);
        for (k, d) in dets.iter().enumerate() {
            let parity = d.records.iter().fold(false, |p, &r| p ^ run.values[r]);
            if !nondet[k] && parity {
                syndromes_deterministic = false;
                diags.push(Diagnostic {
                    check: "determinism".into(),
                    round: Some(d.round),
                    layer: None,
                    qubits: Vec::new(),
                    message: format!("{} detector {k} fires without noise", d.class),
                });
            }
        }
        // With no gauge freedom every individual check must be deterministic too.
        if absent.is_empty() {
            let tab_ok = circ
                .records
                .iter()
                .zip(&run.deterministic)
                .all(|(r, &det)| det || (r.round == 0 && r.class == Class::X));
            if tab_ok != syndromes_deterministic {
                diags.push(Diagnostic {
                    check: "determinism".into(),
                    round: None,
                    layer: None,
                    qubits: Vec::new(),
                    message: "tableau and frame analysis disagree".into(),
                });
                syndromes_deterministic = false;
            }
        }
    }

    let single_fault_detection_ok = single_faults(code, &active, &circ, &mut diags);
    let (logicals_ok, k) = logicals_preserved(code, &active, absent, &circ, &mut diags)?;
    let restoration_ok = if s.has_routing() {
        let (ok, rd) = verify_restoration(code, s, &reversed_round(s), absent)?;
        diags.extend(rd);
        ok
    } else {
        let start = initial_positions(code, s, absent)?;
        let e = expand_round(code, s, absent, &start)?;
        let ok = e.end.same_sites(code, &start);
        if !ok {
            diags.push(Diagnostic {
                check: "restoration".into(),
                round: Some(0),
                layer: None,
                qubits: Vec::new(),
                message: "round moves qubits but declares no routing".into(),
            });
        }
        ok
    };

    Ok(VerificationReport {
        commutation_ok,
        syndromes_deterministic,
        single_fault_detection_ok,
        restoration_ok,
        logicals_preserved: logicals_ok,
        rounds,
        detectors: dets.len(),
        logical_qubits: k,
        diagnostics: diags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{compute_k, QubitId, Role};
    use crate::schedule::{build_louvre7, build_louvre8, build_regular_default, Louvre7Options, Louvre8Options};
    use crate::tracker::Strategy;

    fn bb18() -> CodeSpec {
        CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap()
    }

    #[test]
    fn builders_verify_on_bb18() {
        let code = bb18();
        for s in [
            build_regular_default(&code),
            build_louvre7(&code, &Louvre7Options::default()).unwrap(),
            build_louvre8(&code, &Louvre8Options::default()).unwrap(),
        ] {
            let r = verify(&code, &s, &AbsentSiteMap::none(), &VerifyOptions::default()).unwrap();
            assert!(r.passed(), "{:?}\n{:#?}", s.scheme, r.diagnostics);
            assert_eq!(r.logical_qubits, compute_k(&code));
            assert_eq!(r.detectors, 9 + 18 + 18);
        }
    }

    #[test]
    fn swapped_order_breaks_commutation() {
        let code = bb18();
        let mut s = build_regular_default(&code);
        let x1 = s.layers[1].x;
        s.layers[1].x = s.layers[5].x;
        s.layers[5].x = x1;
        let r = verify(&code, &s, &AbsentSiteMap::none(), &VerifyOptions::default()).unwrap();
        assert!(!r.commutation_ok);
        assert!(!r.syndromes_deterministic);
        assert!(r.diagnostics.iter().any(|d| d.check == "commutation" && d.layer.is_some()));
    }

    // Dropping a data qubit turns the checks touching it into gauge operators.
    // A three-phase round meets the qubit with X in phases 1 and 3 and with Z
    // in phase 2, so one X product straddles the Z interactions and is not
    // measured deterministically; everything else holds.
    #[test]
    fn absent_data_qubit_leaves_one_straddling_product() {
        let code = bb18();
        let s = build_louvre7(&code, &Louvre7Options::default()).unwrap();
        for strategy in [Strategy::Padding, Strategy::ExtraCouplers] {
            let absent = AbsentSiteMap { absent: vec![QubitId::new(1, 1, Role::L)], strategy };
            let r = verify(&code, &s, &absent, &VerifyOptions::default()).unwrap();
            assert!(r.single_fault_detection_ok && r.logicals_preserved && r.restoration_ok, "{:#?}", r.diagnostics);
            assert_eq!(r.commutation_ok, r.syndromes_deterministic);
            assert!(!r.syndromes_deterministic);
            let bad: Vec<_> = r.diagnostics.iter().filter(|d| d.check == "determinism").collect();
            assert_eq!(bad.len(), 2, "one X product, flagged in rounds 1 and 2");
        }
    }

    #[test]
    fn check_with_no_data_is_rejected() {
        let code = CodeSpec::from_text(3, 3, "1", "1").unwrap();
        let absent = AbsentSiteMap {
            absent: vec![QubitId::new(0, 0, Role::L), QubitId::new(0, 0, Role::R)],
            strategy: Strategy::Padding,
        };
        assert!(matches!(ActiveCode::new(&code, &absent), Err(Error::Absent { .. })));
    }
}
