//! Global gate-instruction tables and the scheme builders.
//!
//! Every cell names a term and a gate kind; the whole ancilla class executes it.
//! Gates act between an ancilla and the data qubit its stabilizer assigns to the
//! term, wherever the two currently sit. SWAP and CXSWAP cells exchange the two.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::code::{Class, CodeSpec, Poly, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Cnot,
    Swap,
    CxSwap,
}

impl GateKind {
    /// Has a CNOT component.
    pub fn interacts(self) -> bool {
        self != GateKind::Swap
    }

    /// Exchanges the two qubits.
    pub fn moves(self) -> bool {
        self != GateKind::Cnot
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::CxSwap => "CXSWAP",
        }
    }

    pub fn from_name(s: &str) -> Option<GateKind> {
        match s {
            "CNOT" | "CX" => Some(GateKind::Cnot),
            "SWAP" => Some(GateKind::Swap),
            "CXSWAP" => Some(GateKind::CxSwap),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub term: Term,
    pub gate: GateKind,
}

impl Cell {
    pub fn new(term: Term, gate: GateKind) -> Self {
        Cell { term, gate }
    }

    pub fn cnot(term: Term) -> Self {
        Cell { term, gate: GateKind::Cnot }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Layer {
    pub x: Option<Cell>,
    pub z: Option<Cell>,
    /// Phase label for display; 0 when unspecified.
    pub phase: u8,
}

impl Layer {
    pub fn cell(&self, class: Class) -> Option<Cell> {
        match class {
            Class::X => self.x,
            Class::Z => self.z,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (Class, Cell)> + '_ {
        Class::BOTH.into_iter().filter_map(move |c| self.cell(c).map(|cell| (c, cell)))
    }
}

/// Bookkeeping exchange applied to the starting configuration; no gate is run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FictionalSwap {
    pub class: Class,
    pub term: Term,
}

impl fmt::Display for FictionalSwap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.class, self.term)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Regular,
    Louvre7,
    Louvre7R,
    Louvre8,
    Louvre8R,
    CxSwapOnly,
    Custom,
}

impl Scheme {
    pub fn from_cli(s: &str) -> Option<Scheme> {
        Some(match s {
            "regular" => Scheme::Regular,
            "l7" => Scheme::Louvre7,
            "l7r" => Scheme::Louvre7R,
            "l8" => Scheme::Louvre8,
            "l8r" => Scheme::Louvre8R,
            "cxswap-only" => Scheme::CxSwapOnly,
            _ => return None,
        })
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Scheme::Regular => "regular",
            Scheme::Louvre7 => "l7",
            Scheme::Louvre7R => "l7r",
            Scheme::Louvre8 => "l8",
            Scheme::Louvre8R => "l8r",
            Scheme::CxSwapOnly => "cxswap-only",
            Scheme::Custom => "custom",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Regular => "Regular",
            Scheme::Louvre7 => "Louvre-7",
            Scheme::Louvre7R => "Louvre-7R",
            Scheme::Louvre8 => "Louvre-8",
            Scheme::Louvre8R => "Louvre-8R",
            Scheme::CxSwapOnly => "CXSWAP-only",
            Scheme::Custom => "Custom",
        }
    }
}

/// Which terms went where when a builder laid out the round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// Polynomial bisected across Phases 1 and 3.
    pub split: Poly,
    pub f_x: Vec<Term>,
    pub f_z: Vec<Term>,
    pub g_x: Vec<Term>,
    pub g_z: Vec<Term>,
    /// SWAP term of the split polynomial (Louvre-8).
    pub a1: Option<Term>,
    /// Routing term of the middle polynomial.
    pub b1: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub scheme: Scheme,
    pub layers: Vec<Layer>,
    pub init: Vec<FictionalSwap>,
    /// Gate implied by a bare cell in the text form.
    pub default_gate: GateKind,
    pub partition: Option<Partition>,
}

impl Schedule {
    pub fn new(scheme: Scheme, layers: Vec<Layer>) -> Self {
        Schedule { scheme, layers, init: Vec::new(), default_gate: GateKind::Cnot, partition: None }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn has_routing(&self) -> bool {
        !self.init.is_empty() || self.layers.iter().any(|l| l.cells().any(|(_, c)| c.gate.moves()))
    }

    /// Moving cells in execution order, as exchanges.
    pub fn routing_cells(&self) -> Vec<FictionalSwap> {
        let mut out = Vec::new();
        for l in &self.layers {
            for (class, cell) in l.cells() {
                if cell.gate.moves() {
                    out.push(FictionalSwap { class, term: cell.term });
                }
            }
        }
        out
    }

    /// Checks term labels against the code and that each class meets every term once.
    pub fn validate(&self, code: &CodeSpec) -> Result<()> {
        let check_term = |t: Term| -> Result<()> {
            if t.index >= code.poly(t.poly).len() {
                return Err(Error::Schedule(format!("term {t} does not exist in this code")));
            }
            Ok(())
        };
        for f in &self.init {
            check_term(f.term)?;
        }
        for class in Class::BOTH {
            let mut seen_a = vec![0usize; code.n_a()];
            let mut seen_b = vec![0usize; code.n_b()];
            for layer in &self.layers {
                if let Some(c) = layer.cell(class) {
                    check_term(c.term)?;
                    if c.gate.interacts() {
                        match c.term.poly {
                            Poly::A => seen_a[c.term.index] += 1,
                            Poly::B => seen_b[c.term.index] += 1,
                        }
                    }
                }
            }
            for (p, seen) in [(Poly::A, &seen_a), (Poly::B, &seen_b)] {
                for (index, &n) in seen.iter().enumerate() {
                    if n != 1 {
                        let t = Term { poly: p, index };
                        return Err(Error::Schedule(format!(
                            "{class}-ancillas interact with {t} {n} times; expected once"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_table(&self) -> String {
        write_table(self)
    }

    pub fn from_table(text: &str) -> Result<Schedule> {
        from_instruction_table(text)
    }
}

/// Layers replayed backwards from the forward round's final configuration.
pub fn reversed_round(s: &Schedule) -> Schedule {
    let mut init = s.init.clone();
    init.extend(s.routing_cells());
    Schedule {
        scheme: s.scheme,
        layers: s.layers.iter().rev().copied().collect(),
        init,
        default_gate: s.default_gate,
        partition: s.partition.clone(),
    }
}

/// Sum of torus lengths of a polynomial's couplers for one ancilla class.
pub fn poly_length(code: &CodeSpec, p: Poly) -> i64 {
    code.terms(p).map(|t| code.torus_len(code.base_vector(Class::Z, t))).sum()
}

/// Polynomial split across Phases 1 and 3: more terms, then longer couplers, then A.
pub fn split_poly(code: &CodeSpec) -> Poly {
    let (na, nb) = (code.n_a(), code.n_b());
    if na != nb {
        return if na > nb { Poly::A } else { Poly::B };
    }
    if poly_length(code, Poly::B) > poly_length(code, Poly::A) {
        Poly::B
    } else {
        Poly::A
    }
}

/// Shortest term of a polynomial, earliest on ties.
pub fn shortest_term(code: &CodeSpec, p: Poly) -> Term {
    code.terms(p)
        .min_by_key(|&t| (code.torus_len(code.base_vector(Class::Z, t)), t.index))
        .expect("non-empty polynomial")
}

fn default_fx(code: &CodeSpec, p: Poly) -> Vec<Term> {
    let n = code.poly(p).len();
    code.terms(p).take(n.div_ceil(2)).collect()
}

fn check_partition(code: &CodeSpec, p: Poly, f_x: &[Term], f_z: &[Term]) -> Result<()> {
    let mut seen = vec![0; code.poly(p).len()];
    for t in f_x.iter().chain(f_z) {
        if t.poly != p || t.index >= seen.len() {
            return Err(Error::Schedule(format!("{t} is not a term of {p}")));
        }
        seen[t.index] += 1;
    }
    if seen.iter().any(|&n| n != 1) {
        return Err(Error::Schedule(format!("F_x and F_z must partition the terms of {p}")));
    }
    Ok(())
}

/// Phase 1 with X left-aligned and Z right-aligned.
fn phase1(x: &[Cell], z: &[Cell]) -> Vec<Layer> {
    let n = x.len().max(z.len());
    (0..n)
        .map(|i| Layer {
            x: x.get(i).copied(),
            z: (i + z.len()).checked_sub(n).and_then(|k| z.get(k).copied()),
            phase: 1,
        })
        .collect()
}

fn left_aligned(x: &[Cell], z: &[Cell], phase: u8) -> Vec<Layer> {
    let n = x.len().max(z.len());
    (0..n).map(|i| Layer { x: x.get(i).copied(), z: z.get(i).copied(), phase }).collect()
}

fn both(cell: Cell, phase: u8) -> Layer {
    Layer { x: Some(cell), z: Some(cell), phase }
}

fn reversed(cells: &[Cell]) -> Vec<Cell> {
    cells.iter().rev().copied().collect()
}

pub fn build_regular(code: &CodeSpec, f_x: &[Term], f_z: &[Term]) -> Result<Schedule> {
    check_partition(code, Poly::A, f_x, f_z)?;
    let x1: Vec<Cell> = f_x.iter().map(|&t| Cell::cnot(t)).collect();
    let z1: Vec<Cell> = f_z.iter().map(|&t| Cell::cnot(t)).collect();
    let mut layers = phase1(&x1, &z1);
    layers.extend(code.terms(Poly::B).map(|t| both(Cell::cnot(t), 2)));
    layers.extend(left_aligned(&reversed(&z1), &reversed(&x1), 3));
    let mut s = Schedule::new(Scheme::Regular, layers);
    s.partition = Some(Partition {
        split: Poly::A,
        f_x: f_x.to_vec(),
        f_z: f_z.to_vec(),
        g_x: Vec::new(),
        g_z: Vec::new(),
        a1: None,
        b1: None,
    });
    Ok(s)
}

pub fn build_regular_default(code: &CodeSpec) -> Schedule {
    let f_x = default_fx(code, Poly::A);
    let f_z: Vec<Term> = code.terms(Poly::A).skip(f_x.len()).collect();
    build_regular(code, &f_x, &f_z).expect("default partition is valid")
}

#[derive(Clone, Debug, Default)]
pub struct Louvre7Options {
    /// Routing term of the middle polynomial; shortest by default.
    pub routing: Option<Term>,
    /// Phase-1 X terms of the split polynomial; first half by default.
    pub f_x: Option<Vec<Term>>,
}

pub fn build_louvre7(code: &CodeSpec, opts: &Louvre7Options) -> Result<Schedule> {
    let s = split_poly(code);
    let mid = s.other();
    let b1 = opts.routing.unwrap_or_else(|| shortest_term(code, mid));
    if b1.poly != mid || b1.index >= code.poly(mid).len() {
        return Err(Error::Schedule(format!("routing term {b1} must be a term of {mid}")));
    }
    let f_x = opts.f_x.clone().unwrap_or_else(|| default_fx(code, s));
    let f_z: Vec<Term> = code.terms(s).filter(|t| !f_x.contains(t)).collect();
    check_partition(code, s, &f_x, &f_z)?;
    let x1: Vec<Cell> = f_x.iter().map(|&t| Cell::cnot(t)).collect();
    let z1: Vec<Cell> = f_z.iter().map(|&t| Cell::cnot(t)).collect();
    let mut layers = phase1(&x1, &z1);
    layers.extend(code.terms(mid).filter(|&t| t != b1).map(|t| both(Cell::cnot(t), 2)));
    layers.push(both(Cell::new(b1, GateKind::CxSwap), 2));
    layers.extend(left_aligned(&reversed(&z1), &reversed(&x1), 3));
    let mut sched = Schedule::new(Scheme::Louvre7, layers);
    sched.partition =
        Some(Partition { split: s, f_x, f_z, g_x: Vec::new(), g_z: Vec::new(), a1: None, b1: Some(b1) });
    Ok(sched)
}

#[derive(Clone, Debug, Default)]
pub struct Louvre8Options {
    pub a1: Option<Term>,
    pub b1: Option<Term>,
    pub f_x: Option<Vec<Term>>,
    pub g_x: Option<Vec<Term>>,
}

pub fn build_louvre8(code: &CodeSpec, opts: &Louvre8Options) -> Result<Schedule> {
    let s = split_poly(code);
    let mid = s.other();
    let a1 = opts.a1.unwrap_or_else(|| shortest_term(code, s));
    let b1 = opts.b1.unwrap_or_else(|| shortest_term(code, mid));
    if a1.poly != s || a1.index >= code.poly(s).len() {
        return Err(Error::Schedule(format!("swap term {a1} must be a term of {s}")));
    }
    if b1.poly != mid || b1.index >= code.poly(mid).len() {
        return Err(Error::Schedule(format!("routing term {b1} must be a term of {mid}")));
    }
    let f_x = opts.f_x.clone().unwrap_or_else(|| default_fx(code, s));
    let f_z: Vec<Term> = code.terms(s).filter(|t| !f_x.contains(t)).collect();
    check_partition(code, s, &f_x, &f_z)?;
    let rest: Vec<Term> = code.terms(mid).filter(|&t| t != b1).collect();
    let g_x = opts.g_x.clone().unwrap_or_else(|| rest.iter().copied().take(rest.len().div_ceil(2)).collect());
    if g_x.iter().any(|t| !rest.contains(t)) {
        return Err(Error::Schedule("G_x must be drawn from the middle terms other than the routing term".into()));
    }
    let g_z: Vec<Term> = rest.iter().copied().filter(|t| !g_x.contains(t)).collect();

    let a1_last = |f: &[Term]| -> Vec<Cell> {
        let mut v: Vec<Cell> = f.iter().filter(|&&t| t != a1).map(|&t| Cell::cnot(t)).collect();
        if f.contains(&a1) {
            v.push(Cell::cnot(a1));
        }
        v
    };
    let x1 = a1_last(&f_x);
    let z1 = a1_last(&f_z);
    let mut layers = phase1(&x1, &z1);
    let gx: Vec<Cell> = g_x.iter().map(|&t| Cell::cnot(t)).collect();
    let gz: Vec<Cell> = g_z.iter().map(|&t| Cell::cnot(t)).collect();
    layers.extend(left_aligned(&gx, &gz, 2));
    layers.push(both(Cell::new(a1, GateKind::Swap), 2));
    layers.extend(left_aligned(&gz, &gx, 2));
    layers.push(both(Cell::new(b1, GateKind::CxSwap), 2));

    let mut x3 = reversed(&z1);
    let mut z3 = reversed(&x1);
    let restore = |seq: &mut Vec<Cell>| -> Cell {
        if seq.first().map(|c| c.term) == Some(a1) {
            seq.remove(0);
            Cell::new(a1, GateKind::CxSwap)
        } else {
            Cell::new(a1, GateKind::Swap)
        }
    };
    let first = Layer { x: Some(restore(&mut x3)), z: Some(restore(&mut z3)), phase: 3 };
    layers.push(first);
    layers.extend(left_aligned(&x3, &z3, 3));
    let mut sched = Schedule::new(Scheme::Louvre8, layers);
    sched.partition = Some(Partition { split: s, f_x, f_z, g_x, g_z, a1: Some(a1), b1: Some(b1) });
    Ok(sched)
}

fn cell_text(c: Option<Cell>, default: GateKind) -> String {
    match c {
        None => "-".to_string(),
        Some(c) if c.gate == default => c.term.to_string(),
        Some(c) => format!("{}:{}", c.term, c.gate.name()),
    }
}

fn write_table(s: &Schedule) -> String {
    let mut rows: Vec<(String, Vec<String>)> = Vec::new();
    if s.layers.iter().any(|l| l.phase != 0) {
        rows.push(("Phase".into(), s.layers.iter().map(|l| l.phase.to_string()).collect()));
    }
    for class in Class::BOTH {
        rows.push((class.to_string(), s.layers.iter().map(|l| cell_text(l.cell(class), s.default_gate)).collect()));
    }
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let ncol = s.layers.len();
    let widths: Vec<usize> = (0..ncol).map(|c| rows.iter().map(|r| r.1[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    if s.default_gate != GateKind::Cnot {
        out.push_str(&format!("default: {}\n", s.default_gate.name()));
    }
    for (label, cells) in &rows {
        let mut line = format!("{label:<label_w$}");
        for (c, cell) in cells.iter().enumerate() {
            line.push_str(" | ");
            if c + 1 == ncol {
                line.push_str(cell);
            } else {
                line.push_str(&format!("{cell:<w$}", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    if !s.init.is_empty() {
        let items: Vec<String> = s.init.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!("init: {}\n", items.join(", ")));
    }
    out
}

fn parse_term(tok: &str) -> Result<Term> {
    let mut chars = tok.chars();
    let poly = match chars.next() {
        Some('A') => Poly::A,
        Some('B') => Poly::B,
        _ => return Err(Error::parse(tok, "unknown term label")),
    };
    let digits: String = chars.collect();
    let k: usize = digits.parse().map_err(|_| Error::parse(tok, "unknown term label"))?;
    if k == 0 {
        return Err(Error::parse(tok, "term labels start at 1"));
    }
    Ok(Term { poly, index: k - 1 })
}

fn parse_cell(tok: &str, default: GateKind) -> Result<Option<Cell>> {
    if tok == "-" || tok.is_empty() {
        return Ok(None);
    }
    let (t, gate) = match tok.split_once(':') {
        Some((t, g)) => (t, GateKind::from_name(g).ok_or_else(|| Error::parse(tok, "unknown gate"))?),
        None => (tok, default),
    };
    Ok(Some(Cell { term: parse_term(t)?, gate }))
}

fn parse_class(tok: &str) -> Result<Class> {
    match tok {
        "X" => Ok(Class::X),
        "Z" => Ok(Class::Z),
        _ => Err(Error::parse(tok, "expected X or Z")),
    }
}

/// Parses the `|`-separated table text; term ranges are checked later by `validate`.
pub fn from_instruction_table(text: &str) -> Result<Schedule> {
    let mut default_gate = GateKind::Cnot;
    let mut phase: Option<Vec<u8>> = None;
    let mut x: Option<Vec<String>> = None;
    let mut z: Option<Vec<String>> = None;
    let mut init = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("default:") {
            default_gate = GateKind::from_name(rest.trim()).ok_or_else(|| Error::parse(rest.trim(), "unknown gate"))?;
            continue;
        }
        if let Some(rest) = line.strip_prefix("init:") {
            for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (c, t) = item.split_once(':').ok_or_else(|| Error::parse(item, "expected CLASS:TERM"))?;
                init.push(FictionalSwap { class: parse_class(c.trim())?, term: parse_term(t.trim())? });
            }
            continue;
        }
        let mut fields = line.split('|').map(str::trim);
        let label = fields.next().unwrap_or("");
        let cells: Vec<String> = fields.map(str::to_string).collect();
        let slot = match label {
            "Phase" => {
                let p = cells
                    .iter()
                    .map(|c| c.parse::<u8>().map_err(|_| Error::parse(c.as_str(), "phase must be a number")))
                    .collect::<Result<Vec<u8>>>()?;
                if phase.replace(p).is_some() {
                    return Err(Error::parse(label, "duplicate row"));
                }
                continue;
            }
            "X" => &mut x,
            "Z" => &mut z,
            other => return Err(Error::parse(other, "unknown row label")),
        };
        if slot.replace(cells).is_some() {
            return Err(Error::parse(label, "duplicate row"));
        }
    }
    let x = x.ok_or_else(|| Error::parse("X", "missing row"))?;
    let z = z.ok_or_else(|| Error::parse("Z", "missing row"))?;
    if x.len() != z.len() || phase.as_ref().is_some_and(|p| p.len() != x.len()) {
        return Err(Error::parse("|", "ragged rows"));
    }
    let mut layers = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        layers.push(Layer {
            x: parse_cell(&x[k], default_gate)?,
            z: parse_cell(&z[k], default_gate)?,
            phase: phase.as_ref().map_or(0, |p| p[k]),
        });
    }
    Ok(Schedule { scheme: Scheme::Custom, layers, init, default_gate, partition: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb18() -> CodeSpec {
        CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap()
    }

    #[test]
    fn regular_matches_table_one_pattern() {
        let s = build_regular_default(&bb18());
        let text = s.to_table();
        let expected = "\
Phase | 1  | 1  | 2  | 2  | 2  | 3  | 3
X     | A1 | A2 | B1 | B2 | B3 | A3 | -
Z     | -  | A3 | B1 | B2 | B3 | A2 | A1
";
        assert_eq!(text, expected);
        s.validate(&bb18()).unwrap();
    }

    #[test]
    fn invalid_partition_rejected() {
        let code = bb18();
        assert!(build_regular(&code, &[Term::a(0)], &[Term::a(1)]).is_err());
        assert!(build_regular(&code, &[Term::a(0), Term::a(1)], &[Term::a(1), Term::a(2)]).is_err());
        let bad = Louvre7Options { routing: Some(Term::a(0)), f_x: None };
        assert!(build_louvre7(&code, &bad).is_err());
    }

    #[test]
    fn toric_regular_has_four_interaction_layers() {
        let code = CodeSpec::from_text(3, 3, "1+y", "1+x").unwrap();
        let s = build_regular(&code, &[Term::a(0)], &[Term::a(1)]).unwrap();
        assert_eq!(s.depth(), 4);
        s.validate(&code).unwrap();
    }

    #[test]
    fn table_parse_errors() {
        assert!(from_instruction_table("X | A1 | A2\nZ | A1\n").is_err());
        assert!(from_instruction_table("X | C1\nZ | A1\n").is_err());
        assert!(from_instruction_table("X | A1:FOO\nZ | A1\n").is_err());
        assert!(from_instruction_table("X | A1\n").is_err());
        let s = from_instruction_table("X | A4\nZ | A1\n").unwrap();
        assert!(s.validate(&bb18()).is_err());
    }

    #[test]
    fn reversed_round_reverses_layers() {
        let s = build_regular_default(&bb18());
        let r = reversed_round(&s);
        assert_eq!(r.layers.first(), s.layers.last());
        assert!(r.init.is_empty());
        let l7 = build_louvre7(&bb18(), &Louvre7Options::default()).unwrap();
        assert_eq!(reversed_round(&l7).init.len(), 2);
    }
}
