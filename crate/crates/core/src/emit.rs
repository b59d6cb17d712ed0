//! Noise-annotated circuit text and a noiseless replay checker.
//!
//! Noise follows SI1000 (Gidney, Newman, McEwen 2022): two-qubit gates
//! DEPOLARIZE2(p), single-qubit gates DEPOLARIZE1(p/10), resets X_ERROR(2p),
//! measurements X_ERROR(5p), idling DEPOLARIZE1(p/10) during gate layers and
//! DEPOLARIZE1(2p) during reset and measurement layers. SWAP layers use
//! DEPOLARIZE2(swap_factor * p).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_circuit, MomentKind, Op};
use crate::code::{Class, CodeSpec};
use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::tableau::Tableau;
use crate::tracker::AbsentSiteMap;
use crate::verify::{detectors, verify, ActiveCode, VerifyOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub swap_factor: f64,
}

impl NoiseParams {
    pub fn new(p: f64, swap_factor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || swap_factor < 1.0 || swap_factor * p > 1.0 {
            return Err(Error::Usage(format!("noise p={p} swap_factor={swap_factor} out of range")));
        }
        Ok(NoiseParams { p, swap_factor })
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { p: 0.001, swap_factor: 1.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitDocument {
    pub text: String,
    pub num_qubits: usize,
    pub measurements: usize,
    pub detectors: usize,
    pub observables: usize,
}

struct Writer {
    out: String,
    noise: NoiseParams,
}

impl Writer {
    fn line(&mut self, name: &str, targets: &[usize]) {
        if targets.is_empty() {
            return;
        }
        let t: Vec<String> = targets.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(self.out, "{name} {}", t.join(" "));
    }

    fn noise(&mut self, name: &str, prob: f64, targets: &[usize]) {
        if prob > 0.0 && !targets.is_empty() {
            let t: Vec<String> = targets.iter().map(|q| q.to_string()).collect();
            let _ = writeln!(self.out, "{name}({prob}) {}", t.join(" "));
        }
    }
}

fn flat_pairs(pairs: &[(usize, usize)]) -> Vec<usize> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

/// Emits `rounds` rounds (forward and reversed alternating for routed
/// schedules) followed by a final data measurement. Refuses schedules that
/// fail verification.
pub fn emit_circuit(
    code: &CodeSpec,
    s: &Schedule,
    absent: &AbsentSiteMap,
    rounds: usize,
    noise: NoiseParams,
) -> Result<CircuitDocument> {
    if rounds == 0 {
        return Err(Error::Usage("rounds must be at least 1".into()));
    }
    let report = verify(code, s, absent, &VerifyOptions { rounds: rounds.max(2), seed: 0, tableau: false })?;
    if !report.passed() {
        let msgs: Vec<String> = report.diagnostics.iter().take(5).map(|d| format!("{}: {}", d.check, d.message)).collect();
        return Err(Error::Verification(format!("refusing to emit an unverified schedule; {}", msgs.join("; "))));
    }
    let active = ActiveCode::new(code, absent)?;
    let circ = build_circuit(code, s, absent, rounds)?;

    // Dense qubit indices over occupied sites.
    let occupied: BTreeSet<usize> = (0..code.num_qubits()).filter_map(|q| circ.positions[0].site(code, q)).collect();
    let mut dense = vec![usize::MAX; code.num_sites()];
    for (k, &s) in occupied.iter().enumerate() {
        dense[s] = k;
    }
    let all: Vec<usize> = (0..occupied.len()).collect();
    let p = noise.p;
    let mut w = Writer { out: String::new(), noise };
    let _ = writeln!(w.out, "# schema=1");
    let _ = writeln!(w.out, "# code l={} m={} A={} B={}", code.l, code.m, code.a, code.b);
    let _ = writeln!(w.out, "# scheme={} rounds={rounds} p={p} swap_factor={}", s.scheme.cli_name(), noise.swap_factor);
    for &site in &occupied {
        let pos = code.site_pos(site);
        let _ = writeln!(w.out, "QUBIT_COORDS({},{}) {}", pos.col, pos.row, dense[site]);
    }

    let dets = detectors(&active, &circ);
    let mut det_iter = dets.iter().peekable();
    let mut measured = 0usize;
    let mut n_det = 0usize;
    let idle = |busy: &[usize]| -> Vec<usize> {
        let set: BTreeSet<usize> = busy.iter().copied().collect();
        all.iter().copied().filter(|q| !set.contains(q)).collect()
    };
    for m in &circ.moments {
        match m.kind {
            MomentKind::Reset => {
                let t: Vec<usize> = m.ops.iter().map(|op| if let Op::Reset(s) = op { dense[*s] } else { unreachable!() }).collect();
                w.line("R", &t);
                w.noise("X_ERROR", 2.0 * p, &t);
                w.noise("DEPOLARIZE1", 2.0 * p, &idle(&t));
            }
            MomentKind::Hadamard => {
                let t: Vec<usize> = m.ops.iter().map(|op| if let Op::H(s) = op { dense[*s] } else { unreachable!() }).collect();
                w.line("H", &t);
                w.noise("DEPOLARIZE1", p / 10.0, &t);
                w.noise("DEPOLARIZE1", p / 10.0, &idle(&t));
            }
            MomentKind::Gates { .. } => {
                let (mut cx, mut sw, mut cxsw) = (Vec::new(), Vec::new(), Vec::new());
                for op in &m.ops {
                    match *op {
                        Op::Cnot(c, t) => cx.push((dense[c], dense[t])),
                        Op::Swap(a, b) => sw.push((dense[a], dense[b])),
                        Op::CxSwap(c, t) => cxsw.push((dense[c], dense[t])),
                        _ => unreachable!(),
                    }
                }
                w.line("CX", &flat_pairs(&cx));
                w.line("SWAP", &flat_pairs(&sw));
                w.line("CX[CXSWAP]", &flat_pairs(&cxsw));
                w.line("SWAP[CXSWAP]", &flat_pairs(&cxsw));
                let two: Vec<usize> = flat_pairs(&cx).into_iter().chain(flat_pairs(&cxsw)).collect();
                w.noise("DEPOLARIZE2", p, &two);
                w.noise("DEPOLARIZE2", w.noise.swap_factor * p, &flat_pairs(&sw));
                let busy: Vec<usize> = two.iter().copied().chain(flat_pairs(&sw)).collect();
                w.noise("DEPOLARIZE1", p / 10.0, &idle(&busy));
            }
            MomentKind::Measure => {
                let t: Vec<usize> = m.ops.iter().map(|op| if let Op::Measure(s) = op { dense[*s] } else { unreachable!() }).collect();
                w.noise("X_ERROR", 5.0 * p, &t);
                w.line("M", &t);
                w.noise("DEPOLARIZE1", 2.0 * p, &idle(&t));
                measured += t.len();
                while let Some(d) = det_iter.next_if(|d| d.round == m.round) {
                    let first = circ.records[d.records[0]];
                    let pos = code.site_pos(first.site);
                    let recs: Vec<String> = d.records.iter().map(|&r| format!("rec[-{}]", measured - r)).collect();
                    let _ = writeln!(w.out, "DETECTOR({},{},{}) {}", pos.col, pos.row, m.round, recs.join(" "));
                    n_det += 1;
                }
            }
        }
        w.out.push_str("TICK\n");
    }

    // Final data readout against the last Z stabilizers and the Z logicals.
    let last = circ.positions.last().expect("positions");
    let data: Vec<usize> = (0..code.n()).filter(|&q| active.data_active[q]).collect();
    let data_sites: Vec<usize> = data.iter().map(|&q| dense[last.site(code, q).expect("data present")]).collect();
    w.noise("X_ERROR", 5.0 * p, &data_sites);
    w.line("M", &data_sites);
    let rec_of_data = |q: usize| -> usize { data.iter().position(|&d| d == q).expect("active") };
    let final_base = measured;
    measured += data.len();
    let idx = circ.record_index();
    let last_round = rounds - 1;
    for c in 0..active.z_combos.rows() {
        let mut recs: Vec<usize> = Vec::new();
        let mut support = vec![false; code.n()];
        for k in active.z_combos.row_ones(c) {
            recs.push(idx[&(last_round, Class::Z, active.z_checks[k])]);
            for q in active.hz.row_ones(k) {
                support[q] ^= true;
            }
        }
        recs.extend((0..code.n()).filter(|&q| support[q]).map(|q| final_base + rec_of_data(q)));
        let first = circ.records[recs[0]];
        let pos = code.site_pos(first.site);
        let txt: Vec<String> = recs.iter().map(|&r| format!("rec[-{}]", measured - r)).collect();
        let _ = writeln!(w.out, "DETECTOR({},{},{}) {}", pos.col, pos.row, rounds, txt.join(" "));
        n_det += 1;
    }
    let logicals = active.logicals(Class::Z);
    for (k, l) in logicals.iter().enumerate() {
        let txt: Vec<String> = l.iter().map(|&q| format!("rec[-{}]", measured - (final_base + rec_of_data(q)))).collect();
        let _ = writeln!(w.out, "OBSERVABLE_INCLUDE({k}) {}", txt.join(" "));
    }
    Ok(CircuitDocument {
        text: w.out,
        num_qubits: occupied.len(),
        measurements: measured,
        detectors: n_det,
        observables: logicals.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub detectors: Vec<bool>,
    pub observables: Vec<bool>,
    /// Detectors whose value changed between two random resolutions.
    pub unstable: usize,
}

fn parse_targets(rest: &str) -> Result<Vec<usize>> {
    rest.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| Error::parse(t, "expected a qubit index"))).collect()
}

fn parse_recs(rest: &str) -> Result<Vec<usize>> {
    rest.split_whitespace()
        .map(|t| {
            t.strip_prefix("rec[-")
                .and_then(|s| s.strip_suffix(']'))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(t, "expected rec[-k]"))
        })
        .collect()
}

fn run_document(text: &str, rng: &mut ChaCha8Rng) -> Result<(Vec<bool>, Vec<bool>)> {
    let n = text
        .lines()
        .filter(|l| l.starts_with("QUBIT_COORDS"))
        .count();
    let mut t = Tableau::new(n);
    let mut recs: Vec<bool> = Vec::new();
    let mut dets = Vec::new();
    let mut obs: Vec<bool> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "TICK" {
            continue;
        }
        let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
        let name = head.split(['(', '[']).next().unwrap_or(head);
        let pairs = |v: Vec<usize>| -> Vec<(usize, usize)> { v.chunks(2).map(|c| (c[0], c[1])).collect() };
        match name {
            "QUBIT_COORDS" | "DEPOLARIZE1" | "DEPOLARIZE2" | "X_ERROR" => {}
            "R" => parse_targets(rest)?.into_iter().for_each(|q| t.reset(q)),
            "H" => parse_targets(rest)?.into_iter().for_each(|q| t.h(q)),
            "CX" => pairs(parse_targets(rest)?).into_iter().for_each(|(c, q)| t.cnot(c, q)),
            "SWAP" => pairs(parse_targets(rest)?).into_iter().for_each(|(a, b)| t.swap(a, b)),
            "M" => {
                for q in parse_targets(rest)? {
                    recs.push(t.measure(q, rng.gen()).value);
                }
            }
            "DETECTOR" => {
                let v = parse_recs(rest)?.into_iter().fold(false, |acc, k| acc ^ recs[recs.len() - k]);
                dets.push(v);
            }
            "OBSERVABLE_INCLUDE" => {
                let v = parse_recs(rest)?.into_iter().fold(false, |acc, k| acc ^ recs[recs.len() - k]);
                obs.push(v);
            }
            other => return Err(Error::parse(other, "unknown instruction")),
        }
    }
    Ok((dets, obs))
}

/// Noiseless replay of a circuit document with the tableau simulator, twice
/// with different resolutions of random outcomes.
pub fn replay_noiseless(text: &str, seed: u64) -> Result<Replay> {
    let mut r1 = ChaCha8Rng::seed_from_u64(seed);
    let mut r2 = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let (d1, o1) = run_document(text, &mut r1)?;
    let (d2, _) = run_document(text, &mut r2)?;
    let unstable = d1.iter().zip(&d2).filter(|(a, b)| a != b).count();
    Ok(Replay { detectors: d1, observables: o1, unstable })
}
