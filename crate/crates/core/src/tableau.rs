//! Bit-packed CHP stabilizer tableau and a 64-lane Pauli frame.

/// Aaronson-Gottesman tableau: rows 0..n destabilizers, n..2n stabilizers,
/// row 2n scratch.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub value: bool,
    pub deterministic: bool,
}

impl Tableau {
    /// All qubits in |0>.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![false; rows] };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    pub fn h(&mut self, a: usize) {
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            let (xb, zb) = (self.x[i] & m != 0, self.z[i] & m != 0);
            if xb && zb {
                self.r[row] ^= true;
            }
            if xb != zb {
                self.x[i] ^= m;
                self.z[i] ^= m;
            }
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let (wc, mc) = (c / 64, 1u64 << (c % 64));
        let (wt, mt) = (t / 64, 1u64 << (t % 64));
        for row in 0..2 * self.n {
            let b = row * self.words;
            let xc = self.x[b + wc] & mc != 0;
            let zc = self.z[b + wc] & mc != 0;
            let xt = self.x[b + wt] & mt != 0;
            let zt = self.z[b + wt] & mt != 0;
            if xc && zt && (xt == zc) {
                self.r[row] ^= true;
            }
            if xc {
                self.x[b + wt] ^= mt;
            }
            if zt {
                self.z[b + wc] ^= mc;
            }
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (wa, ma) = (a / 64, 1u64 << (a % 64));
        let (wb, mb) = (b / 64, 1u64 << (b % 64));
        for row in 0..2 * self.n {
            let base = row * self.words;
            for v in [&mut self.x, &mut self.z] {
                let ba = v[base + wa] & ma != 0;
                let bb = v[base + wb] & mb != 0;
                if ba != bb {
                    v[base + wa] ^= ma;
                    v[base + wb] ^= mb;
                }
            }
        }
    }

    pub fn x_gate(&mut self, a: usize) {
        for row in 0..2 * self.n {
            if Self::bit(&self.z, row, self.words, a) {
                self.r[row] ^= true;
            }
        }
    }

    /// `h <- h * i` with phase tracking.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut sum: i64 = 0;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let plus = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let minus = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            sum += plus.count_ones() as i64 - minus.count_ones() as i64;
        }
        let total = 2 * self.r[h] as i64 + 2 * self.r[i] as i64 + sum;
        self.r[h] = total.rem_euclid(4) == 2;
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].fill(0);
        self.z[row * w..(row + 1) * w].fill(0);
        self.r[row] = false;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    /// Z-basis measurement; random outcomes resolve to `random_value`.
    pub fn measure(&mut self, a: usize, random_value: bool) -> Outcome {
        let n = self.n;
        let w = self.words;
        let p = (n..2 * n).find(|&row| Self::bit(&self.x, row, w, a));
        if let Some(p) = p {
            for row in 0..2 * n {
                if row != p && Self::bit(&self.x, row, w, a) {
                    self.rowsum(row, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            self.z[p * w + a / 64] |= 1 << (a % 64);
            self.r[p] = random_value;
            Outcome { value: random_value, deterministic: false }
        } else {
            let s = 2 * n;
            self.clear_row(s);
            for i in 0..n {
                if Self::bit(&self.x, i, w, a) {
                    self.rowsum(s, i + n);
                }
            }
            Outcome { value: self.r[s], deterministic: true }
        }
    }

    pub fn reset(&mut self, a: usize) {
        if self.measure(a, false).value {
            self.x_gate(a);
        }
    }

    pub fn measure_x(&mut self, a: usize, random_value: bool) -> Outcome {
        self.h(a);
        let o = self.measure(a, random_value);
        self.h(a);
        o
    }
}

/// Pauli frame over 64 independent lanes per qubit.
#[derive(Clone, Debug)]
pub struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl Frame {
    pub fn new(n: usize) -> Self {
        Frame { x: vec![0; n], z: vec![0; n] }
    }

    /// Conjugation by CNOT; the same map serves forward and backward propagation.
    pub fn cnot(&mut self, c: usize, t: usize) {
        self.x[t] ^= self.x[c];
        self.z[c] ^= self.z[t];
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.x.swap(a, b);
        self.z.swap(a, b);
    }

    pub fn h(&mut self, a: usize) {
        std::mem::swap(&mut self.x[a], &mut self.z[a]);
    }

    pub fn reset(&mut self, a: usize) {
        self.x[a] = 0;
        self.z[a] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        let a = t.measure(0, true);
        assert!(!a.deterministic);
        let b = t.measure(1, false);
        assert!(b.deterministic);
        assert_eq!(b.value, a.value);
    }

    #[test]
    fn x_basis_of_plus_is_deterministic() {
        let mut t = Tableau::new(70);
        t.h(65);
        let o = t.measure_x(65, true);
        assert!(o.deterministic && !o.value);
        t.x_gate(3);
        let o = t.measure(3, false);
        assert!(o.deterministic && o.value);
    }

    #[test]
    fn swap_moves_state() {
        let mut t = Tableau::new(3);
        t.x_gate(0);
        t.swap(0, 2);
        assert!(t.measure(2, false).value);
        assert!(!t.measure(0, true).value);
    }

    #[test]
    fn ghz_parity() {
        let mut t = Tableau::new(4);
        t.h(0);
        for k in 1..4 {
            t.cnot(0, k);
        }
        let mut parity = false;
        for k in 0..4 {
            t.h(k);
            parity ^= t.measure(k, k % 2 == 0).value;
        }
        assert!(!parity);
    }
}
