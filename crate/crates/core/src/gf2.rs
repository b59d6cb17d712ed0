//! Dense bit-packed matrices over GF(2).

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

#[inline]
fn words_for(cols: usize) -> usize {
    cols.div_ceil(64)
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vec<usize>]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, ones) in rows.iter().enumerate() {
            for &c in ones {
                m.toggle(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] ^= 1 << (c % 64);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn row_ones(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    pub fn col_ones(&self, c: usize) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.get(r, c)).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words;
        for k in 0..w {
            let v = self.data[src * w + k];
            self.data[dst * w + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// `self * other^T`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                let parity = a.iter().zip(b).fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones());
                if parity & 1 == 1 {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    /// Keeps only the listed columns, in order.
    pub fn select_cols(&self, keep: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, keep.len());
        for r in 0..self.rows {
            for (k, &c) in keep.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, k, true);
                }
            }
        }
        out
    }

    pub fn select_rows(&self, keep: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(keep.len(), self.cols);
        for (k, &r) in keep.iter().enumerate() {
            let w = self.words;
            out.data[k * w..(k + 1) * w].copy_from_slice(self.row(r));
        }
        out
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(p, r);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right null space `{v : self v = 0}`, one vector per row.
    pub fn kernel(&self) -> BitMatrix {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = BitMatrix::zeros(free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            out.set(k, f, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, f) {
                    out.set(k, p, true);
                }
            }
        }
        out
    }

    /// Stacks rows of `other` below `self`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols);
        let mut out = self.clone();
        out.data.extend_from_slice(&other.data);
        out.rows += other.rows;
        out
    }

    pub fn push_row(&mut self, ones: &[usize]) {
        self.data.extend(std::iter::repeat_n(0, self.words));
        self.rows += 1;
        for &c in ones {
            self.toggle(self.rows - 1, c);
        }
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '.' }).collect();
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Incremental echelon basis for membership tests on a row space.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    basis: Vec<(usize, Vec<u64>)>,
}

impl RowSpace {
    pub fn new(cols: usize) -> Self {
        RowSpace { cols, basis: Vec::new() }
    }

    pub fn from_matrix(m: &BitMatrix) -> Self {
        let mut s = RowSpace::new(m.cols());
        for r in 0..m.rows() {
            s.insert(m.row(r).to_vec());
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (p, b) in &self.basis {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= y;
                }
            }
        }
        v
    }

    /// Adds `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: Vec<u64>) -> bool {
        assert_eq!(v.len(), words_for(self.cols));
        let v = self.reduce(v);
        let Some(p) = first_one(&v) else {
            return false;
        };
        for (_, b) in self.basis.iter_mut() {
            if b[p / 64] >> (p % 64) & 1 == 1 {
                for (x, y) in b.iter_mut().zip(&v) {
                    *x ^= y;
                }
            }
        }
        self.basis.push((p, v));
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        first_one(&self.reduce(v.to_vec())).is_none()
    }
}

fn first_one(v: &[u64]) -> Option<usize> {
    v.iter().enumerate().find(|(_, w)| **w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
}

pub fn pack(bits: &[bool]) -> Vec<u64> {
    let mut v = vec![0u64; words_for(bits.len())];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            v[i / 64] |= 1 << (i % 64);
        }
    }
    v
}

pub fn pack_ones(len: usize, ones: &[usize]) -> Vec<u64> {
    let mut v = vec![0u64; words_for(len)];
    for &i in ones {
        v[i / 64] ^= 1 << (i % 64);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity() {
        assert_eq!(BitMatrix::identity(70).rank(), 70);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = BitMatrix::from_rows(5, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
        let k = m.kernel();
        assert_eq!(k.rows(), 5 - m.rank());
        assert!(m.mul_transpose(&k).is_zero());
    }

    #[test]
    fn row_space_membership() {
        let mut s = RowSpace::new(4);
        assert!(s.insert(pack_ones(4, &[0, 1])));
        assert!(s.insert(pack_ones(4, &[1, 2])));
        assert!(!s.insert(pack_ones(4, &[0, 2])));
        assert!(s.contains(&pack_ones(4, &[0, 2])));
        assert!(!s.contains(&pack_ones(4, &[3])));
    }
}
