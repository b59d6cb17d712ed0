//! Search over routed orderings (Louvre-7R, Louvre-8R, CXSWAP-only).
//!
//! A candidate fixes the Z-ancilla sequence over the split polynomial with a
//! CXSWAP flag per cell and a cut into Phases 1 and 3; the X-ancilla mirrors it
//! (X Phase 1 is Z Phase 3 reversed and vice versa). Phase 2 runs the middle
//! polynomial with identical X and Z cells. Phase-1 routing is compensated by
//! fictional swaps, optionally preceded by extra fictional swaps.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{Class, CodeSpec, Poly, Term};
use crate::error::{Error, Result};
use crate::metrics::{fast_metrics, DistanceMode, Rational};
use crate::schedule::{Cell, FictionalSwap, GateKind, Layer, Partition, Schedule, Scheme};
use crate::tracker::AbsentSiteMap;
use crate::verify::{verify, VerifyOptions};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Candidate evaluations across both stages.
    pub max_evaluations: u64,
    pub time_limit: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_evaluations: 2_000_000, time_limit: Duration::from_secs(60) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub schedule: Schedule,
    pub avg_degree: Rational,
    pub avg_total_distance: Rational,
    pub evaluations: u64,
    pub exhaustive: bool,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Halving {
    /// Section `[start, end)` of CNOT cells in the middle sequence.
    start: usize,
    end: usize,
    /// Bit i set: section cell i goes to G_x.
    mask: u64,
    /// Index of the split-polynomial term swapped between the halves.
    swap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Candidate {
    split: Poly,
    z_seq: Vec<(usize, bool)>,
    cut: usize,
    mid: Vec<(usize, bool)>,
    halving: Option<Halving>,
    prefix: Vec<FictionalSwap>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    distance: Rational,
    halves: i64,
}

fn gate(cx: bool) -> GateKind {
    if cx {
        GateKind::CxSwap
    } else {
        GateKind::Cnot
    }
}

fn cells(p: Poly, seq: &[(usize, bool)]) -> Vec<Cell> {
    seq.iter().map(|&(i, cx)| Cell::new(Term { poly: p, index: i }, gate(cx))).collect()
}

fn build(scheme: Scheme, c: &Candidate) -> Schedule {
    let s = c.split;
    let m = s.other();
    let z1 = cells(s, &c.z_seq[..c.cut]);
    let z3 = cells(s, &c.z_seq[c.cut..]);
    let x1: Vec<Cell> = z3.iter().rev().copied().collect();
    let mut x3: Vec<Cell> = z1.iter().rev().copied().collect();
    let mut z3 = z3;
    let mut layers = Vec::new();
    let n1 = x1.len().max(z1.len());
    for i in 0..n1 {
        let z = (i + z1.len()).checked_sub(n1).and_then(|k| z1.get(k).copied());
        layers.push(Layer { x: x1.get(i).copied(), z, phase: 1 });
    }
    let mid = cells(m, &c.mid);
    let both = |cell: Cell| Layer { x: Some(cell), z: Some(cell), phase: 2 };
    let mut partition =
        Partition { split: s, f_x: x1.iter().map(|c| c.term).collect(), f_z: z1.iter().map(|c| c.term).collect(), g_x: Vec::new(), g_z: Vec::new(), a1: None, b1: None };
    match &c.halving {
        None => layers.extend(mid.iter().map(|&cell| both(cell))),
        Some(h) => {
            layers.extend(mid[..h.start].iter().map(|&cell| both(cell)));
            let sec = &mid[h.start..h.end];
            let gx: Vec<Cell> = sec.iter().enumerate().filter(|(i, _)| h.mask >> i & 1 == 1).map(|(_, c)| *c).collect();
            let gz: Vec<Cell> = sec.iter().enumerate().filter(|(i, _)| h.mask >> i & 1 == 0).map(|(_, c)| *c).collect();
            let n = gx.len().max(gz.len());
            for i in 0..n {
                layers.push(Layer { x: gx.get(i).copied(), z: gz.get(i).copied(), phase: 2 });
            }
            let a1 = Term { poly: s, index: h.swap };
            layers.push(both(Cell::new(a1, GateKind::Swap)));
            for i in 0..n {
                layers.push(Layer { x: gz.get(i).copied(), z: gx.get(i).copied(), phase: 2 });
            }
            layers.extend(mid[h.end..].iter().map(|&cell| both(cell)));
            // Undo the odd SWAP, merged into a leading Phase-3 cell on that term.
            let restore = |seq: &mut Vec<Cell>| -> Cell {
                match seq.first().copied() {
                    Some(first) if first.term == a1 => {
                        seq.remove(0);
                        let g = if first.gate == GateKind::Cnot { GateKind::CxSwap } else { GateKind::Cnot };
                        Cell::new(a1, g)
                    }
                    _ => Cell::new(a1, GateKind::Swap),
                }
            };
            let x = restore(&mut x3);
            let z = restore(&mut z3);
            layers.push(Layer { x: Some(x), z: Some(z), phase: 3 });
            partition.g_x = gx.iter().map(|c| c.term).collect();
            partition.g_z = gz.iter().map(|c| c.term).collect();
            partition.a1 = Some(a1);
        }
    }
    let n3 = x3.len().max(z3.len());
    for i in 0..n3 {
        layers.push(Layer { x: x3.get(i).copied(), z: z3.get(i).copied(), phase: 3 });
    }
    partition.b1 = c.mid.iter().find(|(_, cx)| *cx).map(|&(i, _)| Term { poly: m, index: i });

    let mut init = c.prefix.clone();
    for (class, seq) in [(Class::X, &x1), (Class::Z, &z1)] {
        for cell in seq.iter().rev() {
            if cell.gate.moves() {
                init.push(FictionalSwap { class, term: cell.term });
            }
        }
    }
    let mut sched = Schedule::new(scheme, layers);
    sched.init = init;
    sched.partition = Some(partition);
    if scheme == Scheme::CxSwapOnly {
        sched.default_gate = GateKind::CxSwap;
    }
    sched
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out.sort();
    out
}

/// Flagged sequences; `parity` restricts the number of CXSWAP flags to odd.
fn sequences(n: usize, all_cx: bool, odd: bool) -> Vec<Vec<(usize, bool)>> {
    let mut out = Vec::new();
    for p in permutations(n) {
        if all_cx {
            out.push(p.iter().map(|&i| (i, true)).collect());
            continue;
        }
        for flags in 0u64..(1 << n) {
            if odd && flags.count_ones() % 2 == 0 {
                continue;
            }
            out.push(p.iter().enumerate().map(|(k, &i)| (i, flags >> k & 1 == 1)).collect());
        }
    }
    out
}

fn cnot_sections(mid: &[(usize, bool)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < mid.len() {
        if !mid[i].1 {
            let j = (i..mid.len()).find(|&j| mid[j].1).unwrap_or(mid.len());
            out.push((i, j));
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

struct Space {
    scheme: Scheme,
    splits: Vec<Poly>,
    n: [usize; 2],
}

impl Space {
    fn len_of(&self, p: Poly) -> usize {
        self.n[p as usize]
    }

    fn cuts(&self, p: Poly) -> Vec<usize> {
        let n = self.len_of(p);
        let mut c = vec![n / 2, n.div_ceil(2)];
        c.dedup();
        c
    }

    fn structures_for(&self, split: Poly) -> Vec<Candidate> {
        let all_cx = self.scheme == Scheme::CxSwapOnly;
        let zs = sequences(self.len_of(split), all_cx, false);
        let mids = sequences(self.len_of(split.other()), all_cx, !all_cx);
        let mut out = Vec::new();
        for z in &zs {
            for &cut in &self.cuts(split) {
                for mid in &mids {
                    let base = Candidate {
                        split,
                        z_seq: z.clone(),
                        cut,
                        mid: mid.clone(),
                        halving: None,
                        prefix: Vec::new(),
                    };
                    if self.scheme == Scheme::Louvre8R {
                        for (start, end) in cnot_sections(mid) {
                            for mask in 0..(1u64 << (end - start)) {
                                for swap in 0..self.len_of(split) {
                                    let mut c = base.clone();
                                    c.halving = Some(Halving { start, end, mask, swap });
                                    out.push(c);
                                }
                            }
                        }
                    } else {
                        out.push(base);
                    }
                }
            }
        }
        out
    }

    fn structure_count(&self) -> u64 {
        let fact = |n: usize| (1..=n as u64).product::<u64>();
        self.splits
            .iter()
            .map(|&s| {
                let (ns, nm) = (self.len_of(s) as u64, self.len_of(s.other()) as u64);
                let cx = self.scheme == Scheme::CxSwapOnly;
                let zs = fact(ns as usize) * if cx { 1 } else { 1 << ns };
                let ms = fact(nm as usize) * if cx { 1 } else { 1 << nm.saturating_sub(1) };
                let extra = if self.scheme == Scheme::Louvre8R { ns * (1 << nm) } else { 1 };
                zs * self.cuts(s).len() as u64 * ms * extra
            })
            .sum()
    }
}

fn fictional_options(code: &CodeSpec, max_len: usize) -> Vec<Vec<FictionalSwap>> {
    let singles: Vec<FictionalSwap> = Class::BOTH
        .into_iter()
        .flat_map(|class| {
            code.terms(Poly::A).chain(code.terms(Poly::B)).map(move |term| FictionalSwap { class, term })
        })
        .collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            for &s in &singles {
                let mut q: Vec<FictionalSwap> = p.clone();
                q.push(s);
                next.push(q);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn score(code: &CodeSpec, scheme: Scheme, c: &Candidate) -> Score {
    let (_, distance, halves) = fast_metrics(code, &build(scheme, c), DistanceMode::Torus);
    Score { distance, halves }
}

fn rank(a: &(Score, usize), b: &(Score, usize)) -> Ordering {
    a.cmp(b)
}

/// Neighbour of a structure for local search.
fn mutate(space: &Space, c: &Candidate, rng: &mut ChaCha8Rng) -> Candidate {
    let mut n = c.clone();
    let all_cx = space.scheme == Scheme::CxSwapOnly;
    match rng.gen_range(0..5) {
        0 if n.z_seq.len() > 1 => {
            let (i, j) = (rng.gen_range(0..n.z_seq.len()), rng.gen_range(0..n.z_seq.len()));
            n.z_seq.swap(i, j);
        }
        1 if !all_cx => {
            let i = rng.gen_range(0..n.z_seq.len());
            n.z_seq[i].1 ^= true;
        }
        2 => n.cut = *space.cuts(n.split).choose(rng).expect("cut"),
        3 if n.mid.len() > 1 => {
            let (i, j) = (rng.gen_range(0..n.mid.len()), rng.gen_range(0..n.mid.len()));
            n.mid.swap(i, j);
        }
        _ if !all_cx && n.mid.len() > 1 => {
            // Keep the CXSWAP count odd: move a flag.
            let on: Vec<usize> = (0..n.mid.len()).filter(|&i| n.mid[i].1).collect();
            let off: Vec<usize> = (0..n.mid.len()).filter(|&i| !n.mid[i].1).collect();
            if let (Some(&a), Some(&b)) = (on.choose(rng), off.choose(rng)) {
                n.mid[a].1 = false;
                n.mid[b].1 = true;
            }
        }
        _ => {}
    }
    if space.scheme == Scheme::Louvre8R {
        let secs = cnot_sections(&n.mid);
        if secs.is_empty() {
            return c.clone();
        }
        let (start, end) = *secs.choose(rng).expect("section");
        let keep = n.halving.as_ref().filter(|h| h.start == start && h.end == end).cloned();
        n.halving = Some(keep.unwrap_or_else(|| Halving {
            start,
            end,
            mask: rng.gen_range(0..(1u64 << (end - start))),
            swap: rng.gen_range(0..n.z_seq.len()),
        }));
    }
    n
}

fn random_structure(space: &Space, rng: &mut ChaCha8Rng) -> Candidate {
    let split = *space.splits.choose(rng).expect("split");
    let all_cx = space.scheme == Scheme::CxSwapOnly;
    let mut z: Vec<usize> = (0..space.len_of(split)).collect();
    z.shuffle(rng);
    let mut m: Vec<usize> = (0..space.len_of(split.other())).collect();
    m.shuffle(rng);
    let mut mid: Vec<(usize, bool)> = m.iter().map(|&i| (i, all_cx)).collect();
    if !all_cx {
        let k = rng.gen_range(0..mid.len());
        mid[k].1 = true;
    }
    let mut c = Candidate {
        split,
        z_seq: z.iter().map(|&i| (i, all_cx || rng.gen_bool(0.5))).collect(),
        cut: *space.cuts(split).choose(rng).expect("cut"),
        mid,
        halving: None,
        prefix: Vec::new(),
    };
    if space.scheme == Scheme::Louvre8R {
        c = mutate(space, &c, rng);
    }
    c
}

pub fn optimize_ordering(code: &CodeSpec, scheme: Scheme, budget: &SearchBudget, seed: u64) -> Result<SearchResult> {
    if !matches!(scheme, Scheme::Louvre7R | Scheme::Louvre8R | Scheme::CxSwapOnly) {
        return Err(Error::Usage(format!("no ordering search for {}", scheme.label())));
    }
    let started = Instant::now();
    let out_of_time = || started.elapsed() >= budget.time_limit;
    let (na, nb) = (code.n_a(), code.n_b());
    let splits = match na.cmp(&nb) {
        Ordering::Greater => vec![Poly::A],
        Ordering::Less => vec![Poly::B],
        Ordering::Equal => vec![Poly::A, Poly::B],
    };
    let space = Space { scheme, splits, n: [na, nb] };
    let mut evaluations = 0u64;

    // Stage 1: structures without extra fictional swaps.
    let total = space.structure_count();
    let exhaustive = total <= budget.max_evaluations / 2;
    let mut pool: Vec<(Score, usize, Candidate)> = if exhaustive {
        let cands: Vec<Candidate> = space.splits.iter().flat_map(|&s| space.structures_for(s)).collect();
        evaluations += cands.len() as u64;
        cands.into_par_iter().enumerate().map(|(i, c)| (score(code, scheme, &c), i, c)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut found: Vec<(Score, usize, Candidate)> = Vec::new();
        let limit = budget.max_evaluations / 2;
        let mut idx = 0usize;
        while evaluations < limit && !out_of_time() {
            let mut cur = random_structure(&space, &mut rng);
            let mut cur_s = score(code, scheme, &cur);
            evaluations += 1;
            let mut stale = 0;
            while stale < 200 && evaluations < limit {
                let next = mutate(&space, &cur, &mut rng);
                let s = score(code, scheme, &next);
                evaluations += 1;
                if s <= cur_s {
                    if s < cur_s {
                        stale = 0;
                    } else {
                        stale += 1;
                    }
                    cur = next;
                    cur_s = s;
                } else {
                    stale += 1;
                }
            }
            found.push((cur_s, idx, cur));
            idx += 1;
        }
        found
    };
    pool.sort_by(|a, b| rank(&(a.0, a.1), &(b.0, b.1)));
    pool.dedup_by(|a, b| a.2 == b.2);

    // Stage 2: extra fictional swaps in front of the best structures.
    let full_prefix = scheme == Scheme::CxSwapOnly;
    let prefixes = fictional_options(code, 2);
    let top: Vec<Candidate> = if full_prefix {
        pool.iter().map(|p| p.2.clone()).collect()
    } else {
        pool.iter().take(32).map(|p| p.2.clone()).collect()
    };
    let room = budget.max_evaluations.saturating_sub(evaluations);
    let per = prefixes.len() as u64;
    let take = ((room / per.max(1)) as usize).min(top.len());
    let base = pool.len();
    let staged: Vec<(Score, usize, Candidate)> = if out_of_time() {
        Vec::new()
    } else {
        top[..take]
            .par_iter()
            .enumerate()
            .flat_map_iter(|(ti, c)| {
                prefixes.iter().enumerate().skip(1).map(move |(pi, p)| {
                    let mut c = c.clone();
                    c.prefix = p.clone();
                    (ti, pi, c)
                })
            })
            .map(|(ti, pi, c)| (score(code, scheme, &c), base + ti * prefixes.len() + pi, c))
            .collect()
    };
    evaluations += staged.len() as u64;
    pool.extend(staged);
    pool.sort_by(|a, b| rank(&(a.0, a.1), &(b.0, b.1)));

    // Best candidate that passes the verifier.
    let opts = VerifyOptions { rounds: 3, seed, tableau: false };
    let mut best_gap: Option<String> = None;
    for (s, _, c) in pool.iter().take(256) {
        let sched = build(scheme, c);
        match verify(code, &sched, &AbsentSiteMap::none(), &opts) {
            Ok(r) if r.passed() => {
                let (deg, dist, _) = fast_metrics(code, &sched, DistanceMode::Torus);
                debug_assert_eq!(dist, s.distance);
                return Ok(SearchResult {
                    schedule: sched,
                    avg_degree: deg,
                    avg_total_distance: dist,
                    evaluations,
                    exhaustive,
                    elapsed_ms: started.elapsed().as_millis(),
                });
            }
            Ok(r) => {
                best_gap.get_or_insert_with(|| {
                    let first = r.diagnostics.first().map(|d| d.message.clone()).unwrap_or_default();
                    format!("best candidate (distance {}) fails verification: {first}", s.distance)
                });
            }
            Err(e) => {
                best_gap.get_or_insert_with(|| e.to_string());
            }
        }
    }
    Err(Error::Search(best_gap.unwrap_or_else(|| "no candidates within budget".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_structure_is_valid() {
        let code = CodeSpec::from_text(6, 6, "1+y+y^2", "1+x+x^2").unwrap();
        let c = Candidate {
            split: Poly::A,
            z_seq: vec![(0, false), (1, true), (2, false)],
            cut: 1,
            mid: vec![(0, false), (1, true), (2, false)],
            halving: None,
            prefix: Vec::new(),
        };
        let s = build(Scheme::Louvre7R, &c);
        s.validate(&code).unwrap();
        let r = verify(&code, &s, &AbsentSiteMap::none(), &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.diagnostics);
        let (deg, dist, _) = fast_metrics(&code, &s, DistanceMode::Torus);
        assert_eq!((deg, dist), (Rational::new(7, 2), Rational::new(7, 2)));
    }

    #[test]
    fn sequence_counts() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(sequences(3, false, false).len(), 48);
        assert_eq!(sequences(3, false, true).len(), 24);
        assert_eq!(sequences(3, true, false).len(), 6);
        assert_eq!(fictional_options(&CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap(), 2).len(), 1 + 12 + 144);
    }

    #[test]
    fn sections_are_maximal_cnot_runs() {
        assert_eq!(cnot_sections(&[(0, false), (1, true), (2, false)]), vec![(0, 1), (2, 3)]);
        assert_eq!(cnot_sections(&[(0, false), (1, false), (2, true)]), vec![(0, 2)]);
    }
}
