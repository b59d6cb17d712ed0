//! Generalized bicycle codes on a torus of basic units.
//!
//! Unit `(i, j)` sits at column `i` (0..m) and row `j` (0..l). Its four qubits
//! occupy a 2x2 block of the doubled grid: X bottom-left, R bottom-right,
//! L top-left, Z top-right. `x` steps one unit column, `y` one unit row.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Displacement on the doubled grid, in grid steps.
pub type Vec2 = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        match self.a {
            0 => {}
            1 => s.push('x'),
            a => s.push_str(&format!("x^{a}")),
        }
        match self.b {
            0 => {}
            1 => s.push('y'),
            b => s.push_str(&format!("y^{b}")),
        }
        if s.is_empty() {
            s.push('1');
        }
        f.write_str(&s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::parse("", "polynomial has no terms"));
        }
        for (k, t) in terms.iter().enumerate() {
            if terms[..k].contains(t) {
                return Err(Error::parse(t.to_string(), "duplicate term"));
            }
        }
        Ok(Polynomial { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

fn parse_exponent(chars: &[char], pos: &mut usize, token: &str) -> Result<u64> {
    if *pos >= chars.len() || chars[*pos] != '^' {
        return Ok(1);
    }
    *pos += 1;
    let braced = *pos < chars.len() && chars[*pos] == '{';
    if braced {
        *pos += 1;
    }
    let start = *pos;
    while *pos < chars.len() && chars[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::parse(token, "missing exponent after '^'"));
    }
    let digits: String = chars[start..*pos].iter().collect();
    let e = digits.parse::<u64>().map_err(|_| Error::parse(token, "exponent out of range"))?;
    if braced {
        if *pos >= chars.len() || chars[*pos] != '}' {
            return Err(Error::parse(token, "unclosed '{'"));
        }
        *pos += 1;
    }
    Ok(e)
}

fn parse_monomial(token: &str, l: u32, m: u32) -> Result<Monomial> {
    if token.is_empty() {
        return Err(Error::parse(token, "empty term"));
    }
    if token == "1" {
        return Ok(Monomial { a: 0, b: 0 });
    }
    let chars: Vec<char> = token.chars().collect();
    let mut pos = 0;
    let (mut a, mut b) = (None, None);
    while pos < chars.len() {
        let c = chars[pos];
        pos += 1;
        let slot = match c {
            'x' => &mut a,
            'y' => &mut b,
            _ => return Err(Error::parse(token, format!("unexpected character '{c}'"))),
        };
        if slot.is_some() {
            return Err(Error::parse(token, format!("symbol '{c}' repeated")));
        }
        *slot = Some(parse_exponent(&chars, &mut pos, token)?);
    }
    Ok(Monomial {
        a: (a.unwrap_or(0) % m as u64) as u32,
        b: (b.unwrap_or(0) % l as u64) as u32,
    })
}

/// Parses `1+y+xy`-style text; exponents reduce mod m (x) and l (y).
pub fn parse_polynomial(text: &str, l: u32, m: u32) -> Result<Polynomial> {
    if l == 0 || m == 0 {
        return Err(Error::InvalidCode("torus dimensions must be positive".into()));
    }
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::parse(text, "empty polynomial"));
    }
    let mut terms: Vec<Monomial> = Vec::new();
    for token in cleaned.split('+') {
        let t = parse_monomial(token, l, m)?;
        if terms.contains(&t) {
            return Err(Error::parse(token, "duplicate term after reduction"));
        }
        terms.push(t);
    }
    Polynomial::new(terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    L,
    R,
    X,
    Z,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::L, Role::R, Role::X, Role::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Corner of the basic unit, as (column, row) offset.
    pub fn corner(self) -> Vec2 {
        match self {
            Role::X => (0, 0),
            Role::R => (1, 0),
            Role::L => (0, 1),
            Role::Z => (1, 1),
        }
    }

    pub fn is_data(self) -> bool {
        matches!(self, Role::L | Role::R)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::L => "L",
            Role::R => "R",
            Role::X => "X",
            Role::Z => "Z",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitId {
    pub i: u32,
    pub j: u32,
    pub role: Role,
}

impl QubitId {
    pub fn new(i: u32, j: u32, role: Role) -> Self {
        QubitId { i, j, role }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.role, self.i, self.j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub col: i64,
    pub row: i64,
}

pub fn qubit_position(q: QubitId) -> GridPos {
    let (dc, dr) = q.role.corner();
    GridPos { col: 2 * q.i as i64 + dc, row: 2 * q.j as i64 + dr }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Poly {
    A,
    B,
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Poly::A => "A",
            Poly::B => "B",
        })
    }
}

impl Poly {
    pub fn other(self) -> Poly {
        match self {
            Poly::A => Poly::B,
            Poly::B => Poly::A,
        }
    }
}

/// A term of A or B; `index` is 0-based, printed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub poly: Poly,
    pub index: usize,
}

impl Term {
    pub fn a(index: usize) -> Self {
        Term { poly: Poly::A, index }
    }

    pub fn b(index: usize) -> Self {
        Term { poly: Poly::B, index }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.poly, self.index + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    X,
    Z,
}

impl Class {
    pub const BOTH: [Class; 2] = [Class::X, Class::Z];

    pub fn role(self) -> Role {
        match self {
            Class::X => Role::X,
            Class::Z => Role::Z,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::X => "X",
            Class::Z => "Z",
        })
    }
}

/// Data sublattice an ancilla class meets through a given polynomial.
pub fn partner_role(class: Class, poly: Poly) -> Role {
    match (class, poly) {
        (Class::Z, Poly::A) | (Class::X, Poly::B) => Role::R,
        (Class::Z, Poly::B) | (Class::X, Poly::A) => Role::L,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub l: u32,
    pub m: u32,
    pub a: Polynomial,
    pub b: Polynomial,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckMatrices {
    pub hx: BitMatrix,
    pub hz: BitMatrix,
}

impl CodeSpec {
    /// Any positive torus is accepted; a 1-wide torus still has a 2-wide grid.
    pub fn new(l: u32, m: u32, a: Polynomial, b: Polynomial) -> Result<Self> {
        if l == 0 || m == 0 {
            return Err(Error::InvalidCode(format!("torus {l}x{m} is empty")));
        }
        for (name, p) in [("A", &a), ("B", &b)] {
            for t in p.terms() {
                if t.a >= m || t.b >= l {
                    return Err(Error::InvalidCode(format!("{name} term {t} not reduced")));
                }
            }
        }
        Ok(CodeSpec { l, m, a, b, boundary: Boundary::Periodic })
    }

    pub fn from_text(l: u32, m: u32, a: &str, b: &str) -> Result<Self> {
        CodeSpec::new(l, m, parse_polynomial(a, l, m)?, parse_polynomial(b, l, m)?)
    }

    pub fn poly(&self, p: Poly) -> &Polynomial {
        match p {
            Poly::A => &self.a,
            Poly::B => &self.b,
        }
    }

    pub fn terms(&self, p: Poly) -> impl Iterator<Item = Term> + '_ {
        (0..self.poly(p).len()).map(move |index| Term { poly: p, index })
    }

    pub fn monomial(&self, t: Term) -> Monomial {
        self.poly(t.poly).terms()[t.index]
    }

    pub fn n_a(&self) -> usize {
        self.a.len()
    }

    pub fn n_b(&self) -> usize {
        self.b.len()
    }

    pub fn units(&self) -> usize {
        (self.l * self.m) as usize
    }

    /// Data-qubit count n.
    pub fn n(&self) -> usize {
        2 * self.units()
    }

    pub fn num_qubits(&self) -> usize {
        4 * self.units()
    }

    pub fn width(&self) -> i64 {
        2 * self.m as i64
    }

    pub fn height(&self) -> i64 {
        2 * self.l as i64
    }

    pub fn unit_index(&self, i: u32, j: u32) -> usize {
        (j * self.m + i) as usize
    }

    /// Dense qubit index: L units, then R, X, Z. Data qubits map to check-matrix columns.
    pub fn qubit_index(&self, q: QubitId) -> usize {
        q.role.index() * self.units() + self.unit_index(q.i, q.j)
    }

    pub fn qubit_at(&self, idx: usize) -> QubitId {
        let u = self.units();
        let role = Role::ALL[idx / u];
        let r = (idx % u) as u32;
        QubitId { i: r % self.m, j: r / self.m, role }
    }

    pub fn ancilla_index(&self, class: Class, unit: usize) -> usize {
        class.role().index() * self.units() + unit
    }

    pub fn wrap(&self, p: GridPos) -> GridPos {
        GridPos { col: p.col.rem_euclid(self.width()), row: p.row.rem_euclid(self.height()) }
    }

    pub fn site_of(&self, p: GridPos) -> usize {
        let w = self.wrap(p);
        (w.row * self.width() + w.col) as usize
    }

    pub fn site_pos(&self, site: usize) -> GridPos {
        let w = self.width() as usize;
        GridPos { col: (site % w) as i64, row: (site / w) as i64 }
    }

    pub fn num_sites(&self) -> usize {
        (self.width() * self.height()) as usize
    }

    /// Torus-minimized L1 length of a displacement.
    pub fn torus_len(&self, v: Vec2) -> i64 {
        let (w, h) = (self.width(), self.height());
        let dx = v.0.rem_euclid(w);
        let dy = v.1.rem_euclid(h);
        dx.min(w - dx) + dy.min(h - dy)
    }

    pub fn torus_l1(&self, p: GridPos, q: GridPos) -> i64 {
        self.torus_len((q.col - p.col, q.row - p.row))
    }

    /// Data qubit reached by `anc` through term `t`.
    pub fn partner(&self, anc: QubitId, t: Term) -> QubitId {
        let mono = self.monomial(t);
        let role = match anc.role {
            Role::X => partner_role(Class::X, t.poly),
            _ => partner_role(Class::Z, t.poly),
        };
        let (m, l) = (self.m as i64, self.l as i64);
        let (da, db) = if anc.role == Role::X { (-(mono.a as i64), -(mono.b as i64)) } else { (mono.a as i64, mono.b as i64) };
        QubitId {
            i: (anc.i as i64 + da).rem_euclid(m) as u32,
            j: (anc.j as i64 + db).rem_euclid(l) as u32,
            role,
        }
    }

    /// Grid vector from an ancilla of `class` at home to its term-`t` partner at home.
    pub fn base_vector(&self, class: Class, t: Term) -> Vec2 {
        let mono = self.monomial(t);
        let (a, b) = (mono.a as i64, mono.b as i64);
        match (class, t.poly) {
            (Class::Z, Poly::A) => (2 * a, 2 * b - 1),
            (Class::Z, Poly::B) => (2 * a - 1, 2 * b),
            (Class::X, Poly::A) => (-2 * a, -2 * b + 1),
            (Class::X, Poly::B) => (-2 * a + 1, -2 * b),
        }
    }

    pub fn parse_file(text: &str) -> Result<Self> {
        let mut kv = std::collections::BTreeMap::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(line, "expected key=value"))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::parse(k, "duplicate key"));
            }
        }
        let num = |k: &str| -> Result<u32> {
            let v = kv.get(k).ok_or_else(|| Error::parse(k, "missing key"))?;
            v.parse::<u32>().map_err(|_| Error::parse(v.clone(), format!("{k} must be a positive integer")))
        };
        let (l, m) = (num("l")?, num("m")?);
        let poly = |k: &str| -> Result<&String> { kv.get(k).ok_or_else(|| Error::parse(k, "missing key")) };
        let mut code = CodeSpec::from_text(l, m, poly("A")?, poly("B")?)?;
        if let Some(b) = kv.get("boundary") {
            code.boundary = match b.as_str() {
                "periodic" => Boundary::Periodic,
                "open" => Boundary::Open,
                other => return Err(Error::parse(other, "boundary must be periodic or open")),
            };
        }
        for k in kv.keys() {
            if !["l", "m", "A", "B", "boundary"].contains(&k.as_str()) {
                return Err(Error::parse(k.clone(), "unknown key"));
            }
        }
        Ok(code)
    }

    pub fn to_file_string(&self) -> String {
        let mut s = format!("l={}\nm={}\nA={}\nB={}\n", self.l, self.m, self.a, self.b);
        if self.boundary == Boundary::Open {
            s.push_str("boundary=open\n");
        }
        s
    }
}

pub fn stabilizer_support(code: &CodeSpec, ancilla: QubitId) -> Result<Vec<QubitId>> {
    if ancilla.role.is_data() {
        return Err(Error::Usage(format!("{ancilla} is a data qubit, not an ancilla")));
    }
    Ok(code.terms(Poly::A).chain(code.terms(Poly::B)).map(|t| code.partner(ancilla, t)).collect())
}

pub fn check_matrices(code: &CodeSpec) -> CheckMatrices {
    let u = code.units();
    let mut hx = BitMatrix::zeros(u, code.n());
    let mut hz = BitMatrix::zeros(u, code.n());
    for r in 0..u {
        let x = code.qubit_at(code.ancilla_index(Class::X, r));
        let z = code.qubit_at(code.ancilla_index(Class::Z, r));
        for q in stabilizer_support(code, x).expect("ancilla") {
            hx.toggle(r, code.qubit_index(q));
        }
        for q in stabilizer_support(code, z).expect("ancilla") {
            hz.toggle(r, code.qubit_index(q));
        }
    }
    CheckMatrices { hx, hz }
}

pub fn compute_k(code: &CodeSpec) -> usize {
    let h = check_matrices(code);
    code.n() - h.hx.rank() - h.hz.rank()
}

/// Parameters of the hypergraph product of a classical `[n1, k1]` seed with itself.
///
/// Open boundary: `n1^2 + (n1-k1)^2`, `k1^2`. Periodic (cyclic seed with a square
/// circulant check matrix): `2 n1^2`, `2 k1^2`.
pub fn hypergraph_product_params(seed_n: i64, seed_k: i64, boundary: Boundary) -> Result<(i64, i64)> {
    if seed_n <= 0 || seed_k <= 0 || seed_k > seed_n {
        return Err(Error::Usage(format!("seed [{seed_n},{seed_k}] is not a valid classical code")));
    }
    Ok(match boundary {
        Boundary::Open => (seed_n * seed_n + (seed_n - seed_k) * (seed_n - seed_k), seed_k * seed_k),
        Boundary::Periodic => (2 * seed_n * seed_n, 2 * seed_k * seed_k),
    })
}

/// Seed `[n1, k1]` when the code has La-Cross shape `A = h(y)`, `B = h(x)` on a square torus.
pub fn la_cross_seed(code: &CodeSpec) -> Option<(i64, i64)> {
    if code.l != code.m || code.a.len() != code.b.len() {
        return None;
    }
    let mut ya: Vec<u32> = Vec::new();
    let mut xb: Vec<u32> = Vec::new();
    for t in code.a.terms() {
        if t.a != 0 {
            return None;
        }
        ya.push(t.b);
    }
    for t in code.b.terms() {
        if t.b != 0 {
            return None;
        }
        xb.push(t.a);
    }
    ya.sort_unstable();
    xb.sort_unstable();
    if ya != xb || ya[0] != 0 {
        return None;
    }
    let n1 = code.l as i64;
    let k1 = match code.boundary {
        Boundary::Open => *ya.last().unwrap() as i64,
        Boundary::Periodic => {
            // Cyclic code length n1 with check polynomial h: k1 = n1 - rank(circulant).
            let n = code.l as usize;
            let mut c = BitMatrix::zeros(n, n);
            for r in 0..n {
                for &e in &ya {
                    c.toggle(r, (r + e as usize) % n);
                }
            }
            n1 - c.rank() as i64
        }
    };
    Some((n1, k1))
}

/// Exhaustive minimum distance; only for `n <= 20`.
pub fn brute_force_distance(code: &CodeSpec) -> Option<usize> {
    let n = code.n();
    if n > 20 {
        return None;
    }
    let h = check_matrices(code);
    let mask_rows = |m: &BitMatrix| -> Vec<u32> { (0..m.rows()).map(|r| m.row(r)[0] as u32).collect() };
    let (hx, hz) = (mask_rows(&h.hx), mask_rows(&h.hz));
    let span = |rows: &[u32]| -> std::collections::HashSet<u32> {
        let mut s = std::collections::HashSet::from([0u32]);
        for &r in rows {
            let next: Vec<u32> = s.iter().map(|v| v ^ r).collect();
            s.extend(next);
        }
        s
    };
    let (sx, sz) = (span(&hx), span(&hz));
    let mut best = usize::MAX;
    for v in 1u32..(1 << n) {
        let w = v.count_ones() as usize;
        if w >= best {
            continue;
        }
        let commutes = |rows: &[u32]| rows.iter().all(|r| (r & v).count_ones() % 2 == 0);
        if (commutes(&hx) && !sz.contains(&v)) || (commutes(&hz) && !sx.contains(&v)) {
            best = w;
        }
    }
    (best != usize::MAX).then_some(best)
}
