//! Dense bit-packed vectors and matrices over F2.
//!
//! Rows are stored as `u64` words, least significant bit first. Bits past the
//! logical length are always zero, so word-level popcounts and comparisons
//! are exact.

use std::fmt;

use crate::error::{check_dim, Error, Result};

const W: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(W)
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    #[must_use]
    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: vec![!0; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// Builds a vector with ones at the given positions. Repeated positions cancel.
    ///
    /// # Panics
    ///
    /// Panics if a position is out of range.
    #[must_use]
    pub fn from_support<I: IntoIterator<Item = usize>>(len: usize, support: I) -> Self {
        let mut v = BitVec::zeros(len);
        for i in support {
            v.flip(i);
        }
        v
    }

    #[must_use]
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVec { len, words };
        v.clear_tail();
        v
    }

    /// Parses a string of `0`/`1` characters. Whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::new();
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(Error::Format(format!("unexpected character {c:?} in bit string"))),
            }
        }
        Ok(BitVec::from_bools(&bits))
    }

    fn clear_tail(&mut self) {
        let r = self.len % W;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    #[must_use]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / W] >> (i % W)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % W);
        if value {
            self.words[i / W] |= mask;
        } else {
            self.words[i / W] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / W] ^= 1u64 << (i % W);
    }

    #[must_use]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over F2.
    #[must_use]
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    #[must_use]
    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Positions of the set bits, ascending.
    #[must_use]
    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * W + t)
            })
        })
    }

    /// Copies `len` bits starting at `start` into a new vector.
    #[must_use]
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len);
        let mut out = BitVec::zeros(len);
        for i in self
            .iter_ones()
            .skip_while(|&i| i < start)
            .take_while(|&i| i < start + len)
        {
            out.set(i - start, true);
        }
        out
    }

    /// Concatenation `self ‖ other`.
    #[must_use]
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Applies the index map `i -> perm[i]`.
    #[must_use]
    pub fn permuted(&self, perm: &[usize]) -> BitVec {
        assert_eq!(perm.len(), self.len);
        BitVec::from_support(self.len, self.iter_ones().map(|i| perm[i]))
    }

    #[must_use]
    pub fn to_bitstring(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bitstring())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Dense row-major matrix over F2.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMat {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMat {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMat {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        let mut m = BitMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks the given rows. All rows must share a length, which becomes the
    /// column count (`cols` is used when `rows` is empty).
    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Result<Self> {
        let mut m = BitMat::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            check_dim("row length", cols, r.len())?;
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    #[must_use]
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = BitMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    #[inline]
    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    #[must_use]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / W] >> (j % W)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols);
        let mask = 1u64 << (j % W);
        let w = &mut self.data[i * self.stride + j / W];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, j: usize) {
        assert!(i < self.rows && j < self.cols);
        self.data[i * self.stride + j / W] ^= 1u64 << (j % W);
    }

    #[inline]
    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[must_use]
    pub fn row(&self, i: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(i).to_vec())
    }

    /// Row `dst ^= row src`, touching only words from `from_word` on.
    fn xor_rows(&mut self, src: usize, dst: usize, from_word: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s] as &[u64], &mut lo[dst * s..(dst + 1) * s])
        };
        for k in from_word..s {
            b[k] ^= a[k];
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for k in 0..s {
            self.data.swap(a * s + k, b * s + k);
        }
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `M v`, panicking on a length mismatch. See [`mat_vec`] for the checked form.
    #[must_use]
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        let mut out = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            let ones: u32 = self
                .row_words(i)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    #[must_use]
    pub fn transpose(&self) -> BitMat {
        let mut t = BitMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMat) -> Result<BitMat> {
        check_dim("matrix product", self.cols, other.rows)?;
        let mut out = BitMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in self.row(i).iter_ones() {
                let (src, dst) = (other.row_words(k), i * out.stride);
                for (w, &x) in src.iter().enumerate() {
                    out.data[dst + w] ^= x;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `a ⊗ b`; entry `((i,k),(j,l))` is `a[i][j] b[k][l]`.
    #[must_use]
    pub fn kron(a: &BitMat, b: &BitMat) -> BitMat {
        let mut out = BitMat::zeros(a.rows * b.rows, a.cols * b.cols);
        for i in 0..a.rows {
            for j in a.row(i).iter_ones() {
                for k in 0..b.rows {
                    for l in b.row(k).iter_ones() {
                        out.set(i * b.rows + k, j * b.cols + l, true);
                    }
                }
            }
        }
        out
    }

    /// `[a | b]`.
    pub fn hstack(a: &BitMat, b: &BitMat) -> Result<BitMat> {
        check_dim("hstack rows", a.rows, b.rows)?;
        let mut out = BitMat::zeros(a.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in a.row(i).iter_ones() {
                out.set(i, j, true);
            }
            for j in b.row(i).iter_ones() {
                out.set(i, a.cols + j, true);
            }
        }
        Ok(out)
    }

    /// `[a ; b]`.
    pub fn vstack(a: &BitMat, b: &BitMat) -> Result<BitMat> {
        check_dim("vstack cols", a.cols, b.cols)?;
        let mut out = BitMat::zeros(a.rows + b.rows, a.cols);
        out.data[..a.data.len()].copy_from_slice(&a.data);
        out.data[a.data.len()..].copy_from_slice(&b.data);
        Ok(out)
    }

    #[must_use]
    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| self.row_words(i).iter().map(|w| w.count_ones() as usize).sum())
            .collect()
    }

    #[must_use]
    pub fn col_weights(&self) -> Vec<usize> {
        let mut out = vec![0; self.cols];
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                out[j] += 1;
            }
        }
        out
    }

    /// Maximum row or column weight.
    #[must_use]
    pub fn locality(&self) -> usize {
        let r = self.row_weights().into_iter().max().unwrap_or(0);
        let c = self.col_weights().into_iter().max().unwrap_or(0);
        r.max(c)
    }

    #[must_use]
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        (0..self.rows).map(|i| self.row(i).support()).collect()
    }

    #[must_use]
    pub fn col_supports(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                out[j].push(i);
            }
        }
        out
    }

    /// Rank by forward elimination on a copy.
    #[must_use]
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in rank + 1..m.rows {
                if m.get(r, c) {
                    m.xor_rows(rank, r, c / W);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Reduced row echelon form and its pivot columns.
    #[must_use]
    pub fn rref(&self) -> (BitMat, Vec<usize>) {
        let mut m = self.clone();
        let pivots = rref_in_place(&mut m, None);
        (m, pivots)
    }

    /// Basis of the right kernel `{x : M x = 0}`.
    #[must_use]
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = BitVec::zeros(self.cols);
                x.set(f, true);
                for (row, &p) in pivots.iter().enumerate() {
                    if r.get(row, f) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect()
    }

    /// Some `x` with `M x = b`, or `None` when `b` is outside the column space.
    pub fn solve(&self, b: &BitVec) -> Result<Option<BitVec>> {
        check_dim("solve right-hand side", self.rows, b.len())?;
        Ok(Solver::new(self).solve(b))
    }
}

/// Gauss-Jordan on `m`, mirroring every row operation on `track` when given.
fn rref_in_place(m: &mut BitMat, mut track: Option<&mut BitMat>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..m.cols {
        if rank == m.rows {
            break;
        }
        let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
            continue;
        };
        m.swap_rows(rank, p);
        if let Some(t) = track.as_deref_mut() {
            t.swap_rows(rank, p);
        }
        for r in 0..m.rows {
            if r != rank && m.get(r, c) {
                m.xor_rows(rank, r, c / W);
                if let Some(t) = track.as_deref_mut() {
                    t.xor_rows(rank, r, 0);
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    pivots
}

/// Precomputed elimination for repeated solves against one matrix.
///
/// Stores `T` with `T M = R` in reduced row echelon form, so each solve is a
/// single product `T b`.
#[derive(Clone, Debug)]
pub struct Solver {
    cols: usize,
    transform: BitMat,
    pivots: Vec<usize>,
}

impl Solver {
    #[must_use]
    pub fn new(m: &BitMat) -> Self {
        let mut r = m.clone();
        let mut t = BitMat::identity(m.rows);
        let pivots = rref_in_place(&mut r, Some(&mut t));
        Solver {
            cols: m.cols,
            transform: t,
            pivots,
        }
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// # Panics
    ///
    /// Panics if `b` does not have one entry per matrix row.
    #[must_use]
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        let tb = self.transform.mul_vec(b);
        if tb.iter_ones().any(|r| r >= self.pivots.len()) {
            return None;
        }
        Some(BitVec::from_support(self.cols, tb.iter_ones().map(|r| self.pivots[r])))
    }
}

impl fmt::Debug for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        Ok(())
    }
}

/// Checked `M v`.
pub fn mat_vec(m: &BitMat, v: &BitVec) -> Result<BitVec> {
    check_dim("matrix-vector product", m.cols(), v.len())?;
    Ok(m.mul_vec(v))
}

/// Visits every vector of `span(basis)` in Gray-code order, starting from zero.
///
/// The callback receives the running vector and the index of the basis vector
/// just toggled (`None` for the initial zero vector).
pub fn for_each_in_span(basis: &[BitVec], len: usize, mut f: impl FnMut(&BitVec, Option<usize>)) {
    let mut cur = BitVec::zeros(len);
    f(&cur, None);
    let n = basis.len();
    assert!(n < 64, "span too large to enumerate");
    for step in 1u64..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        cur.xor_assign(&basis[k]);
        f(&cur, Some(k));
    }
}

/// Minimum weight of a nonzero vector in `span(basis)`, or `None` for the zero space.
#[must_use]
pub fn min_span_weight(basis: &[BitVec], len: usize) -> Option<usize> {
    if basis.is_empty() {
        return None;
    }
    let mut best = usize::MAX;
    for_each_in_span(basis, len, |v, k| {
        if k.is_some() {
            let w = v.weight();
            if w > 0 && w < best {
                best = w;
            }
        }
    });
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_mat(max_r: usize, max_c: usize) -> impl Strategy<Value = BitMat> {
        (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c)
                .prop_map(move |bits| BitMat::from_fn(r, c, |i, j| bits[i * c + j]))
        })
    }

    fn arb_vec(len: usize) -> impl Strategy<Value = BitVec> {
        proptest::collection::vec(any::<bool>(), len).prop_map(|b| BitVec::from_bools(&b))
    }

    #[test]
    fn tail_bits_stay_clear() {
        let v = BitVec::ones(70);
        assert_eq!(v.weight(), 70);
        assert_eq!(v.words()[1], (1 << 6) - 1);
    }

    #[test]
    fn rank_of_small_matrices() {
        let m = BitMat::from_fn(3, 3, |i, j| (i + j) % 2 == 0);
        assert_eq!(m.rank(), 2);
        assert_eq!(BitMat::identity(130).rank(), 130);
        assert_eq!(BitMat::zeros(4, 9).rank(), 0);
    }

    #[test]
    fn solve_reports_inconsistency() {
        let m = BitMat::from_fn(2, 2, |_, _| true);
        assert!(m.solve(&BitVec::from_support(2, [0])).unwrap().is_none());
        let x = m.solve(&BitVec::ones(2)).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x), BitVec::ones(2));
    }

    #[test]
    fn mismatched_dimensions_error() {
        let m = BitMat::zeros(3, 4);
        assert!(mat_vec(&m, &BitVec::zeros(3)).is_err());
        assert!(m.solve(&BitVec::zeros(4)).is_err());
    }

    #[test]
    fn gray_code_enumerates_whole_span() {
        let basis = vec![
            BitVec::from_support(5, [0, 1]),
            BitVec::from_support(5, [1, 2]),
            BitVec::from_support(5, [3]),
        ];
        let mut seen = std::collections::HashSet::new();
        for_each_in_span(&basis, 5, |v, _| {
            seen.insert(v.clone());
        });
        assert_eq!(seen.len(), 8);
        assert_eq!(min_span_weight(&basis, 5), Some(1));
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_mat(12, 80)) {
            let kernel = m.kernel_basis();
            prop_assert_eq!(m.rank() + kernel.len(), m.cols());
            for k in &kernel {
                prop_assert!(m.mul_vec(k).is_zero());
            }
            let kb = BitMat::from_rows(m.cols(), &kernel).unwrap();
            prop_assert_eq!(kb.rank(), kernel.len());
        }

        #[test]
        fn rank_is_transpose_invariant(m in arb_mat(20, 20)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn solve_finds_preimages((m, x) in arb_mat(15, 70).prop_flat_map(|m| {
            let c = m.cols();
            (Just(m), arb_vec(c))
        })) {
            let b = m.mul_vec(&x);
            let y = m.solve(&b).unwrap().expect("image vector must be solvable");
            prop_assert_eq!(m.mul_vec(&y), b);
        }

        #[test]
        fn solver_agrees_with_rank_test((m, b) in arb_mat(10, 8).prop_flat_map(|m| {
            let r = m.rows();
            (Just(m), arb_vec(r))
        })) {
            let aug = BitMat::hstack(&m, &BitMat::from_rows(1, &(0..m.rows())
                .map(|i| BitVec::from_bools(&[b.get(i)])).collect::<Vec<_>>()).unwrap()).unwrap();
            let consistent = aug.rank() == m.rank();
            prop_assert_eq!(Solver::new(&m).solve(&b).is_some(), consistent);
        }

        #[test]
        fn product_matches_mat_vec((a, b, v) in (1usize..8, 1usize..70, 1usize..8).prop_flat_map(|(r, k, c)| {
            (
                proptest::collection::vec(any::<bool>(), r * k).prop_map(move |x| BitMat::from_fn(r, k, |i, j| x[i * k + j])),
                proptest::collection::vec(any::<bool>(), k * c).prop_map(move |x| BitMat::from_fn(k, c, |i, j| x[i * c + j])),
                arb_vec(c),
            )
        })) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(ab.mul_vec(&v), a.mul_vec(&b.mul_vec(&v)));
            prop_assert_eq!(ab.transpose(), b.transpose().mul(&a.transpose()).unwrap());
        }

        #[test]
        fn kron_mixed_product(a in arb_mat(4, 4), b in arb_mat(4, 4)) {
            let k = BitMat::kron(&a, &b);
            prop_assert_eq!(k.rank(), a.rank() * b.rank());
            prop_assert_eq!(k.transpose(), BitMat::kron(&a.transpose(), &b.transpose()));
        }
    }
}
