//! Decoders for products of a Tanner complex with the repetition complex.
//!
//! Both the hypergraph product and the lifted product have the form
//! `C₂ -> C₁ = X ⊕ Y -> C₀` with `∂₂ w = (F w, (1+X) w)` and
//! `∂₁(x, y) = (1+X) x + F y`, where `F` commutes with the cyclic shift. For
//! the hypergraph product `F = ∂ ⊗ I`; for the lifted product `F` is the
//! circulant expansion of the ring matrix. A [`Side`] stores `F` sparsely and
//! a noisy-syndrome decoder for it.
//!
//! Vectors are flat `BitVec`s in the module layout of `ring`: block `h`, bit
//! `i` is the coefficient of `α_h X^{-i}`. Algorithms indexed by plain powers
//! `X^p` read storage column `-p mod ℓ`.
//!
//! The `X` side is reduced to the `Z` side of the transposed factor through
//! `Φ(x, y) = (P y, P x)`, where `P` reflects `i -> -i` within each block.

use std::sync::Arc;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{repetition_complex, ChainComplex3};
use crate::error::{check_dim, Error, Result};
use crate::f2::{BitMat, BitVec, Solver};
use crate::flip::{ChainFlipDecoder, CochainFlipDecoder, FlipStats, NoisySyndromeDecoder};
use crate::ring::{repetition_factor_solve, ModuleElement, RingElement, RingMatrix};
use crate::tanner::TannerCode;

pub type SharedDecoder = Arc<dyn NoisySyndromeDecoder + Send + Sync>;

/// Sparse matrix over `R_ℓ`; entry `(g, h)` is the sum of `X^k` over its terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circulant {
    ell: usize,
    rows: usize,
    cols: usize,
    col_terms: Vec<Vec<(usize, usize)>>,
    row_terms: Vec<Vec<(usize, usize)>>,
}

impl Circulant {
    fn from_terms(
        ell: usize,
        rows: usize,
        cols: usize,
        terms: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Self {
        let mut col_terms = vec![Vec::new(); cols];
        let mut row_terms = vec![Vec::new(); rows];
        for (g, h, k) in terms {
            col_terms[h].push((g, k));
            row_terms[g].push((h, k));
        }
        Circulant {
            ell,
            rows,
            cols,
            col_terms,
            row_terms,
        }
    }

    #[must_use]
    pub fn from_ring(m: &RingMatrix) -> Self {
        let mut terms = Vec::new();
        for g in 0..m.rows() {
            for h in 0..m.cols() {
                terms.extend(m.get(g, h).exponents().into_iter().map(|k| (g, h, k)));
            }
        }
        Circulant::from_terms(m.ell(), m.rows(), m.cols(), terms)
    }

    /// `m ⊗ I_ℓ`, i.e. every entry a constant.
    #[must_use]
    pub fn from_bitmat(m: &BitMat, ell: usize) -> Self {
        let terms = m
            .col_supports()
            .into_iter()
            .enumerate()
            .flat_map(|(h, rows)| rows.into_iter().map(move |g| (g, h, 0)));
        Circulant::from_terms(ell, m.rows(), m.cols(), terms)
    }

    /// Ring transpose (no conjugation).
    #[must_use]
    pub fn transpose(&self) -> Self {
        let terms = self
            .col_terms
            .iter()
            .enumerate()
            .flat_map(|(h, ts)| ts.iter().map(move |&(g, k)| (h, g, k)));
        Circulant::from_terms(self.ell, self.cols, self.rows, terms)
    }

    #[must_use]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[must_use]
    pub fn to_ring(&self) -> RingMatrix {
        let mut m = RingMatrix::zeros(self.rows, self.cols, self.ell);
        for (h, ts) in self.col_terms.iter().enumerate() {
            for &(g, k) in ts {
                m.add_to(g, h, &RingElement::monomial(self.ell, k)).expect("same ring");
            }
        }
        m
    }

    /// Entrywise augmentation `ε(F)`: the parity of each entry's term count.
    #[must_use]
    pub fn augmentation(&self) -> BitMat {
        let mut m = BitMat::zeros(self.rows, self.cols);
        for (h, ts) in self.col_terms.iter().enumerate() {
            for &(g, _) in ts {
                m.flip(g, h);
            }
        }
        m
    }

    /// Locality of the F2 expansion.
    #[must_use]
    pub fn locality(&self) -> usize {
        let rows = self.row_terms.iter().map(Vec::len);
        let cols = self.col_terms.iter().map(Vec::len);
        rows.chain(cols).max().unwrap_or(0)
    }

    #[must_use]
    pub fn expand_to_f2(&self) -> BitMat {
        let ell = self.ell;
        let mut m = BitMat::zeros(self.rows * ell, self.cols * ell);
        for (h, ts) in self.col_terms.iter().enumerate() {
            for &(g, k) in ts {
                for i in 0..ell {
                    m.flip(g * ell + i, h * ell + (i + k) % ell);
                }
            }
        }
        m
    }

    /// The expanded matrix times `y`.
    #[must_use]
    pub fn apply(&self, y: &BitVec) -> BitVec {
        let ell = self.ell;
        assert_eq!(y.len(), self.cols * ell, "circulant apply length");
        let mut out = BitVec::zeros(self.rows * ell);
        for p in y.iter_ones() {
            let (h, j) = (p / ell, p % ell);
            for &(g, k) in &self.col_terms[h] {
                out.flip(g * ell + (j + ell - k) % ell);
            }
        }
        out
    }

    /// The transposed expanded matrix times `z`.
    #[must_use]
    pub fn apply_transpose(&self, z: &BitVec) -> BitVec {
        let ell = self.ell;
        assert_eq!(z.len(), self.rows * ell, "circulant transpose length");
        let mut out = BitVec::zeros(self.cols * ell);
        for p in z.iter_ones() {
            let (g, i) = (p / ell, p % ell);
            for &(h, k) in &self.row_terms[g] {
                out.flip(h * ell + (i + k) % ell);
            }
        }
        out
    }
}

/// `X^k v` blockwise: `(h, i) <- (h, i + k)`.
#[must_use]
pub fn shift_blocks(v: &BitVec, ell: usize, k: usize) -> BitVec {
    let k = k % ell;
    let mut out = BitVec::zeros(v.len());
    for p in v.iter_ones() {
        let (h, i) = (p / ell, p % ell);
        out.set(h * ell + (i + ell - k) % ell, true);
    }
    out
}

/// `P v`: `(h, i) -> (h, -i)` in every block.
#[must_use]
pub fn reflect_blocks(v: &BitVec, ell: usize) -> BitVec {
    let mut out = BitVec::zeros(v.len());
    for p in v.iter_ones() {
        let (h, i) = (p / ell, p % ell);
        out.set(h * ell + (ell - i) % ell, true);
    }
    out
}

/// `(1 + X) v` blockwise.
#[must_use]
pub fn one_plus_x(v: &BitVec, ell: usize) -> BitVec {
    v.xor(&shift_blocks(v, ell, 1))
}

/// `Σ_{j<i} X^j v` blockwise.
#[must_use]
pub fn prefix_sum(v: &BitVec, ell: usize, i: usize) -> BitVec {
    let mut acc = BitVec::zeros(v.len());
    for j in 0..i {
        acc.xor_assign(&shift_blocks(v, ell, j));
    }
    acc
}

/// Minimum-weight `x` with `(1 + X) x = r` in every block, or `None`.
#[must_use]
pub fn solve_one_plus_x(r: &BitVec, ell: usize) -> Option<BitVec> {
    let mut out = BitVec::zeros(r.len());
    let mut rows: Vec<usize> = r.iter_ones().map(|p| p / ell).collect();
    rows.dedup();
    for h in rows {
        let block = ModuleElement::from_bits(1, ell, r.slice(h * ell, ell)).expect("block length");
        let chi = repetition_factor_solve(&block.component(0))?;
        let mut m = ModuleElement::zero(1, ell);
        m.set_component(0, &chi).expect("same ring");
        for i in m.bits().iter_ones() {
            out.set(h * ell + i, true);
        }
    }
    Some(out)
}

/// `P ∘ D ∘ P`, a decoder for the reflected factor.
#[derive(Clone, Debug)]
pub struct Reflected<D> {
    inner: D,
    ell: usize,
}

impl<D> Reflected<D> {
    pub fn new(inner: D, ell: usize) -> Self {
        Reflected { inner, ell }
    }
}

impl<D: NoisySyndromeDecoder> NoisySyndromeDecoder for Reflected<D> {
    fn syndrome_len(&self) -> usize {
        self.inner.syndrome_len()
    }

    fn output_len(&self) -> usize {
        self.inner.output_len()
    }

    fn gamma(&self) -> usize {
        self.inner.gamma()
    }

    fn decode_with_stats(&self, s: &BitVec) -> Result<(BitVec, FlipStats)> {
        let (out, stats) = self.inner.decode_with_stats(&reflect_blocks(s, self.ell))?;
        Ok((reflect_blocks(&out, self.ell), stats))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Hgp,
    Lp,
}

/// One CSS side of a product code, written as the `Z` side of `F ⊗ rep`.
#[derive(Clone)]
pub struct Side {
    kind: ProductKind,
    f: Circulant,
    aug: Solver,
    decoder: SharedDecoder,
    locality: usize,
}

impl std::fmt::Debug for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Side")
            .field("kind", &self.kind)
            .field("n0", &self.n0())
            .field("n1", &self.n1())
            .field("ell", &self.ell())
            .finish_non_exhaustive()
    }
}

impl Side {
    /// `locality` is the F2 locality of the factor complex.
    pub fn new(kind: ProductKind, f: Circulant, decoder: SharedDecoder, locality: usize) -> Result<Self> {
        let factor_ell = match kind {
            ProductKind::Hgp => 1,
            ProductKind::Lp => f.ell,
        };
        check_dim("decoder syndrome length", f.rows * factor_ell, decoder.syndrome_len())?;
        check_dim("decoder output length", f.cols * factor_ell, decoder.output_len())?;
        let aug = Solver::new(&f.augmentation());
        Ok(Side {
            kind,
            f,
            aug,
            decoder,
            locality,
        })
    }

    #[must_use]
    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    #[must_use]
    pub fn ell(&self) -> usize {
        self.f.ell
    }

    /// Rank of the syndrome block `X` (and of `C₀`).
    #[must_use]
    pub fn n0(&self) -> usize {
        self.f.rows
    }

    /// Rank of the block `Y` (and of `C₂`).
    #[must_use]
    pub fn n1(&self) -> usize {
        self.f.cols
    }

    /// Number of qubits.
    #[must_use]
    pub fn n(&self) -> usize {
        (self.n0() + self.n1()) * self.ell()
    }

    #[must_use]
    pub fn factor(&self) -> &Circulant {
        &self.f
    }

    #[must_use]
    pub fn decoder(&self) -> &SharedDecoder {
        &self.decoder
    }

    #[must_use]
    pub fn gamma(&self) -> usize {
        self.decoder.gamma()
    }

    #[must_use]
    pub fn factor_locality(&self) -> usize {
        self.locality
    }

    #[must_use]
    pub fn split(&self, c: &BitVec) -> (BitVec, BitVec) {
        let nx = self.n0() * self.ell();
        (c.slice(0, nx), c.slice(nx, c.len() - nx))
    }

    pub fn d1(&self, c: &BitVec) -> Result<BitVec> {
        check_dim("C₁ vector", self.n(), c.len())?;
        let (x, y) = self.split(c);
        let mut s = one_plus_x(&x, self.ell());
        s.xor_assign(&self.f.apply(&y));
        Ok(s)
    }

    pub fn d2(&self, w: &BitVec) -> Result<BitVec> {
        check_dim("C₂ vector", self.n1() * self.ell(), w.len())?;
        Ok(self.f.apply(w).concat(&one_plus_x(w, self.ell())))
    }

    /// `∂₁ᵀ s`, the `X`-type stabilizer generated by `s ∈ C₀`.
    pub fn d1_t(&self, s: &BitVec) -> Result<BitVec> {
        check_dim("C₀ vector", self.n0() * self.ell(), s.len())?;
        let ell = self.ell();
        let x = s.xor(&shift_blocks(s, ell, ell - 1));
        Ok(x.concat(&self.f.apply_transpose(s)))
    }

    /// `∂₂ᵀ c`.
    pub fn d2_t(&self, c: &BitVec) -> Result<BitVec> {
        check_dim("C₁ vector", self.n(), c.len())?;
        let ell = self.ell();
        let (x, y) = self.split(c);
        let mut out = self.f.apply_transpose(&x);
        out.xor_assign(&y);
        out.xor_assign(&shift_blocks(&y, ell, ell - 1));
        Ok(out)
    }

    /// Some `w` with `∂₂ w = z`, or `None` when `z` is not a boundary.
    ///
    /// Writes `w = χ + b ⊗ 𝟙` with `(1+X) χ = z_Y` and solves `ε(F) b` against
    /// the constant rows of `z_X + F χ`.
    pub fn boundary_witness(&self, z: &BitVec) -> Result<Option<BitVec>> {
        check_dim("C₁ vector", self.n(), z.len())?;
        let ell = self.ell();
        let (zx, zy) = self.split(z);
        let Some(chi) = solve_one_plus_x(&zy, ell) else {
            return Ok(None);
        };
        let mut rho = zx;
        rho.xor_assign(&self.f.apply(&chi));
        let mut gamma = BitVec::zeros(self.n0());
        for g in 0..self.n0() {
            match rho.slice(g * ell, ell).weight() {
                0 => {}
                w if w == ell => gamma.set(g, true),
                _ => return Ok(None),
            }
        }
        let Some(b) = self.aug.solve(&gamma) else {
            return Ok(None);
        };
        let mut w = chi;
        for h in b.iter_ones() {
            for i in 0..ell {
                w.flip(h * ell + i);
            }
        }
        debug_assert_eq!(&self.d2(&w)?, z);
        Ok(Some(w))
    }

    fn decode_factor(&self, s: &BitVec) -> Result<BitVec> {
        if s.is_zero() {
            Ok(BitVec::zeros(self.decoder.output_len()))
        } else {
            self.decoder.decode(s)
        }
    }

    fn finish(&self, s: &BitVec, x: BitVec, y: BitVec) -> Result<Option<BitVec>> {
        let c = x.concat(&y);
        if self.d1(&c)? == *s {
            Ok(Some(c))
        } else {
            Err(Error::InvalidParameter(
                "decoder produced an estimate with the wrong syndrome".into(),
            ))
        }
    }

    /// One run of the shifted-prefix decoder for the hypergraph product.
    pub fn dec_hgp(&self, s: &BitVec, j: usize) -> Result<Option<BitVec>> {
        self.require(ProductKind::Hgp)?;
        check_dim("C₀ syndrome", self.n0() * self.ell(), s.len())?;
        let ell = self.ell();
        let j = j % ell;
        let mut cols = vec![Vec::new(); ell];
        for p in s.iter_ones() {
            cols[(ell - p % ell) % ell].push(p / ell);
        }
        let mut acc = BitVec::zeros(self.n0());
        let mut prev = BitVec::zeros(self.n1());
        let mut y = BitVec::zeros(self.n1() * ell);
        for k in 1..=ell {
            let p = (j + k - 1) % ell;
            for &a in &cols[p] {
                acc.flip(a);
            }
            let cur = self.decode_factor(&acc)?;
            let col = (ell - p) % ell;
            for e in cur.xor(&prev).iter_ones() {
                y.set(e * ell + col, true);
            }
            prev = cur;
        }
        let mut r = s.clone();
        r.xor_assign(&self.f.apply(&y));
        match solve_one_plus_x(&r, ell) {
            Some(x) => self.finish(s, x, y),
            None => Ok(None),
        }
    }

    /// Runs every shift and keeps the lightest valid estimate (smallest `j` on ties).
    pub fn hgp_decode_deterministic(&self, s: &BitVec) -> Result<DecodeOutcome> {
        let shifts: Vec<usize> = (0..self.ell()).collect();
        self.hgp_best_of(s, &shifts)
    }

    /// Runs `⌈lg(1/δ)⌉` uniformly random shifts.
    pub fn hgp_decode_randomized<R: Rng + ?Sized>(&self, s: &BitVec, delta: f64, rng: &mut R) -> Result<DecodeOutcome> {
        let k = hgp_repetitions(delta)?;
        let shifts: Vec<usize> = (0..k).map(|_| rng.random_range(0..self.ell())).collect();
        self.hgp_best_of(s, &shifts)
    }

    fn hgp_best_of(&self, s: &BitVec, shifts: &[usize]) -> Result<DecodeOutcome> {
        let mut best: Option<BitVec> = None;
        let mut trace = Vec::with_capacity(shifts.len());
        for (run, &j) in shifts.iter().enumerate() {
            let out = self.dec_hgp(s, j)?;
            trace.push(TraceEntry {
                run,
                shifts: vec![j],
                iterate_weights: Vec::new(),
                weight: out.as_ref().map(BitVec::weight),
            });
            if let Some(c) = out {
                if best.as_ref().is_none_or(|b| c.weight() < b.weight()) {
                    best = Some(c);
                }
            }
        }
        Ok(DecodeOutcome::new(best, self.n(), trace))
    }

    /// Amplifies approximate compatibility of `ỹ` from scale `t/2` to `t`.
    pub fn amp_com<R: Rng + ?Sized>(
        &self,
        s: &BitVec,
        y_tilde: &BitVec,
        t: usize,
        rng: &mut R,
    ) -> Result<(BitVec, usize)> {
        self.require(ProductKind::Lp)?;
        let ell = self.ell();
        if t < 2 || !t.is_multiple_of(2) || !ell.is_multiple_of(t) {
            return Err(Error::InvalidParameter(format!(
                "need 2 | t and t | ℓ, got t={t}, ℓ={ell}"
            )));
        }
        check_dim("C₀ syndrome", self.n0() * ell, s.len())?;
        check_dim("Y estimate", self.n1() * ell, y_tilde.len())?;
        let mut r = s.clone();
        r.xor_assign(&self.f.apply(y_tilde));
        let mut prefix = BitVec::zeros(r.len());
        // a[k] for k in 0..=t; a[0] = D(0) = 0 is never read.
        let mut a = Vec::with_capacity(t + 1);
        a.push(BitVec::zeros(self.n1() * ell));
        for k in 1..=t {
            prefix.xor_assign(&shift_blocks(&r, ell, k - 1));
            a.push(self.decode_factor(&prefix)?);
        }
        let j = rng.random_range(0..t);
        let n1 = self.n1();
        let at = |v: &BitVec, h: usize, i: usize| v.get(h * ell + i % ell);
        let mut z = BitVec::zeros(n1 * ell);
        for h in 0..n1 {
            for m in 0..ell / t {
                let base = j + m * t;
                for i in 1..t {
                    if at(&a[i + 1], h, base) != at(&a[i], h, base) {
                        z.set(h * ell + (base + i) % ell, true);
                    }
                }
            }
        }
        let mut b = a[t].clone();
        b.xor_assign(&prefix_sum(&z, ell, t));
        let mut r_tilde = BitVec::zeros(n1 * ell);
        for h in 0..n1 {
            for m in 0..ell / t {
                let base = j + m * t;
                let ones = (0..t).filter(|&k| at(&b, h, base + ell - k)).count();
                if 2 * ones > t {
                    r_tilde.set(h * ell + base % ell, true);
                }
            }
        }
        let mut out = y_tilde.clone();
        out.xor_assign(&z);
        out.xor_assign(&r_tilde);
        Ok((out, j))
    }

    /// One weak decoding pass: `ỹ` through scales `t = 2, 4, ..., ℓ`, then `x̃`.
    pub fn weak_dec<R: Rng + ?Sized>(&self, s: &BitVec, rng: &mut R) -> Result<(Option<BitVec>, TraceEntry)> {
        self.require(ProductKind::Lp)?;
        let ell = self.ell();
        if !ell.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "lifted-product decoding needs ℓ a power of two, got {ell}"
            )));
        }
        let mut y = BitVec::zeros(self.n1() * ell);
        let mut shifts = Vec::new();
        let mut iterate_weights = Vec::new();
        let mut t = 2;
        while t <= ell {
            let (next, j) = self.amp_com(s, &y, t, rng)?;
            y = next;
            shifts.push(j);
            iterate_weights.push(y.weight());
            t *= 2;
        }
        let mut r = s.clone();
        r.xor_assign(&self.f.apply(&y));
        let out = match solve_one_plus_x(&r, ell) {
            Some(x) => self.finish(s, x, y)?,
            None => None,
        };
        let entry = TraceEntry {
            run: 0,
            shifts,
            iterate_weights,
            weight: out.as_ref().map(BitVec::weight),
        };
        Ok((out, entry))
    }

    /// `K` independent weak passes with child seeds; keeps the lightest valid estimate.
    pub fn lp_decode(&self, s: &BitVec, eps: f64, delta: f64, seed: u64) -> Result<DecodeOutcome> {
        let k = lp_repetitions(self.ell(), eps, delta)?;
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<BitVec> = None;
        let mut trace = Vec::with_capacity(k);
        for run in 0..k {
            let mut child = ChaCha8Rng::seed_from_u64(master.next_u64());
            let (out, mut entry) = self.weak_dec(s, &mut child)?;
            entry.run = run;
            trace.push(entry);
            if let Some(c) = out {
                if best.as_ref().is_none_or(|b| c.weight() < b.weight()) {
                    best = Some(c);
                }
            }
        }
        Ok(DecodeOutcome::new(best, self.n(), trace))
    }

    fn require(&self, kind: ProductKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "operation needs a {kind:?} side, got {:?}",
                self.kind
            )))
        }
    }
}

/// `⌈lg(1/δ)⌉`, at least one.
pub fn hgp_repetitions(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {delta}"
        )));
    }
    Ok(((1.0 / delta).log2() - 1e-9).ceil().max(1.0) as usize)
}

/// `⌈ln δ / ln(1 - (1-ε)^η)⌉` with `ℓ = 2^η`, at least one.
pub fn lp_repetitions(ell: usize, eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1/2], got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {delta}"
        )));
    }
    if !ell.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("ℓ must be a power of two, got {ell}")));
    }
    let eta = ell.trailing_zeros() as i32;
    if eta == 0 {
        return Ok(1);
    }
    let p = (1.0 - eps).powi(eta);
    let k = (delta.ln() / (1.0 - p).ln() - 1e-9).ceil();
    Ok(k.max(1.0) as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub run: usize,
    /// The shift `j` of a prefix-decoder run, or the `AmpCom` shifts in order.
    pub shifts: Vec<usize>,
    /// `|ỹ|` after each amplification step.
    pub iterate_weights: Vec<usize>,
    /// Output weight, `None` on failure.
    pub weight: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: Status,
    /// Zero on failure.
    pub estimate: BitVec,
    pub weight: usize,
    pub trace: Vec<TraceEntry>,
}

impl DecodeOutcome {
    fn new(best: Option<BitVec>, n: usize, trace: Vec<TraceEntry>) -> Self {
        match best {
            Some(c) => DecodeOutcome {
                status: Status::Ok,
                weight: c.weight(),
                estimate: c,
                trace,
            },
            None => DecodeOutcome {
                status: Status::Fail,
                estimate: BitVec::zeros(n),
                weight: 0,
                trace,
            },
        }
    }

    #[must_use]
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    HgpDeterministic,
    HgpRandomized { delta: f64 },
    LpWeak,
    LpAmplified { eps: f64, delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CssSide {
    Z,
    X,
}

/// A product code with both decoding sides.
#[derive(Clone, Debug)]
pub struct ProductCode {
    kind: ProductKind,
    tanner: TannerCode,
    z: Side,
    x: Side,
}

impl ProductCode {
    /// `ell` is the repetition length; for the lifted product it must equal the lift size.
    pub fn new(kind: ProductKind, tanner: TannerCode, ell: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidParameter(format!(
                "repetition length must be >= 2, got {ell}"
            )));
        }
        let w = tanner.complex().locality();
        let chain = ChainFlipDecoder::new(tanner.clone());
        let cochain = CochainFlipDecoder::new(tanner.clone());
        let (fz, fx, dx): (Circulant, Circulant, SharedDecoder) = match kind {
            ProductKind::Hgp => {
                let f = Circulant::from_bitmat(tanner.complex().boundary(), ell);
                let ft = f.transpose();
                (f, ft, Arc::new(cochain))
            }
            ProductKind::Lp => {
                if tanner.ell() != ell {
                    return Err(Error::DimensionMismatch {
                        what: "lifted product ring size vs lift size",
                        expected: tanner.ell(),
                        found: ell,
                    });
                }
                let ring = tanner.complex().ring().expect("tanner complexes carry a ring form");
                let f = Circulant::from_ring(ring);
                let ft = f.transpose();
                (f, ft, Arc::new(Reflected::new(cochain, ell)))
            }
        };
        let z = Side::new(kind, fz, Arc::new(chain), w)?;
        let x = Side::new(kind, fx, dx, w)?;
        Ok(ProductCode { kind, tanner, z, x })
    }

    #[must_use]
    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    #[must_use]
    pub fn tanner(&self) -> &TannerCode {
        &self.tanner
    }

    #[must_use]
    pub fn ell(&self) -> usize {
        self.z.ell()
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.z.n()
    }

    #[must_use]
    pub fn side(&self, which: CssSide) -> &Side {
        match which {
            CssSide::Z => &self.z,
            CssSide::X => &self.x,
        }
    }

    /// `Φ(x, y) = (P y, P x)`, taking `C₁` to the `X` side's `C₁`; an involution.
    #[must_use]
    pub fn relabel(&self, c: &BitVec) -> BitVec {
        let ell = self.ell();
        let nx = self.z.n0() * ell;
        relabel_split(c, nx, ell)
    }

    /// Inverse of [`ProductCode::relabel`].
    #[must_use]
    pub fn unrelabel(&self, c: &BitVec) -> BitVec {
        let ell = self.ell();
        let nx = self.x.n0() * ell;
        relabel_split(c, nx, ell)
    }

    /// Syndrome of `c` on the given side: `∂₁ c` for `Z`, `∂₂ᵀ c` for `X`.
    pub fn syndrome(&self, which: CssSide, c: &BitVec) -> Result<BitVec> {
        match which {
            CssSide::Z => self.z.d1(c),
            CssSide::X => self.z.d2_t(c),
        }
    }

    pub fn decode(&self, which: CssSide, s: &BitVec, method: Method, seed: u64) -> Result<DecodeOutcome> {
        match which {
            CssSide::Z => run_method(&self.z, s, method, seed),
            CssSide::X => self.decode_dual_side(s, method, seed),
        }
    }

    /// Decodes `s² = ∂₂ᵀ c` through the relabeled side and maps the estimate back.
    pub fn decode_dual_side(&self, s2: &BitVec, method: Method, seed: u64) -> Result<DecodeOutcome> {
        let ell = self.ell();
        let sigma = reflect_blocks(s2, ell);
        let mut out = run_method(&self.x, &sigma, method, seed)?;
        if out.is_ok() {
            out.estimate = self.unrelabel(&out.estimate);
            if self.z.d2_t(&out.estimate)? != *s2 {
                return Err(Error::InvalidParameter(
                    "relabeled estimate has the wrong syndrome".into(),
                ));
            }
        } else {
            out.estimate = BitVec::zeros(self.n());
        }
        Ok(out)
    }

    /// Stabilizer witness for `c + ĉ`: `w ∈ C₂` with `∂₂ w = c + ĉ` on the `Z`
    /// side, `w ∈ C₀` with `∂₁ᵀ w = c + ĉ` on the `X` side.
    pub fn coset_witness(&self, which: CssSide, c: &BitVec, estimate: &BitVec) -> Result<Option<BitVec>> {
        check_dim("error length", self.n(), c.len())?;
        check_dim("estimate length", self.n(), estimate.len())?;
        let z = c.xor(estimate);
        match which {
            CssSide::Z => self.z.boundary_witness(&z),
            CssSide::X => {
                let Some(w) = self.x.boundary_witness(&self.relabel(&z))? else {
                    return Ok(None);
                };
                let w = reflect_blocks(&w, self.ell());
                debug_assert_eq!(self.z.d1_t(&w)?, z);
                Ok(Some(w))
            }
        }
    }

    /// Checks a witness from [`ProductCode::coset_witness`] independently.
    pub fn verify_witness(&self, which: CssSide, c: &BitVec, estimate: &BitVec, w: &BitVec) -> Result<bool> {
        let z = c.xor(estimate);
        Ok(match which {
            CssSide::Z => self.z.d2(w)? == z,
            CssSide::X => self.z.d1_t(w)? == z,
        })
    }

    /// `(∂₂, ∂₁)` over `R_ℓ`.
    pub fn ring_forms(&self) -> Result<(RingMatrix, RingMatrix)> {
        let ell = self.ell();
        let f = self.z.f.to_ring();
        let one_x = |rank: usize| RingMatrix::scalar(rank, &RingElement::from_exponents(ell, [0, 1]));
        let d2 = RingMatrix::vstack(&f, &one_x(self.z.n1()))?;
        let d1 = RingMatrix::hstack(&one_x(self.z.n0()), &f)?;
        Ok((d2, d1))
    }

    /// The dense complex, for cross-checks on small instances.
    pub fn dense_complex(&self) -> Result<ChainComplex3> {
        let ell = self.ell();
        let f = self.z.f.expand_to_f2();
        let rep = repetition_complex(ell)?;
        let one_x = |rank: usize| BitMat::kron(&BitMat::identity(rank), rep.boundary());
        let d2 = BitMat::vstack(&f, &one_x(self.z.n1()))?;
        let d1 = BitMat::hstack(&one_x(self.z.n0()), &f)?;
        ChainComplex3::new(d2, d1)
    }
}

fn relabel_split(c: &BitVec, nx: usize, ell: usize) -> BitVec {
    let x = c.slice(0, nx);
    let y = c.slice(nx, c.len() - nx);
    reflect_blocks(&y, ell).concat(&reflect_blocks(&x, ell))
}

fn run_method(side: &Side, s: &BitVec, method: Method, seed: u64) -> Result<DecodeOutcome> {
    match method {
        Method::HgpDeterministic => side.hgp_decode_deterministic(s),
        Method::HgpRandomized { delta } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            side.hgp_decode_randomized(s, delta, &mut rng)
        }
        Method::LpWeak => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (out, entry) = side.weak_dec(s, &mut rng)?;
            Ok(DecodeOutcome::new(out, side.n(), vec![entry]))
        }
        Method::LpAmplified { eps, delta } => side.lp_decode(s, eps, delta, seed),
    }
}

/// Budgets of the factor decoders, as `(noise, error)` pairs per side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusInputs {
    pub e0: usize,
    pub e1: usize,
    pub gamma: usize,
    pub w: usize,
    pub ell: usize,
    pub eps: f64,
    pub distance: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub radius: usize,
    /// Each term of the minimum, by name.
    pub terms: Vec<(String, f64)>,
    pub binding: String,
    pub distance_unbounded: bool,
}

/// The proven decoding radius for the given product kind.
#[must_use]
pub fn theoretical_radius(kind: ProductKind, p: &RadiusInputs) -> RadiusReport {
    let (e0, e1, g, w, ell) = (p.e0 as f64, p.e1 as f64, p.gamma as f64, p.w as f64, p.ell as f64);
    let mut terms: Vec<(String, f64)> = match kind {
        ProductKind::Hgp => vec![("e0".into(), e0), ("e1".into(), e1), ("ell/2".into(), ell / 2.0)],
        ProductKind::Lp => vec![
            ("e0/2".into(), e0 / 2.0),
            ("eps*e1/(48*gamma)".into(), p.eps * e1 / (48.0 * g)),
            ("eps*ell/(12*gamma)".into(), p.eps * ell / (12.0 * g)),
        ],
    };
    if let Some(d) = p.distance {
        let d = d as f64;
        let term = match kind {
            ProductKind::Hgp => ("(d-1)/(2+(w+2)*gamma)", (d - 1.0) / (2.0 + (w + 2.0) * g)),
            ProductKind::Lp => (
                "(d-1)/(2(w+2)gamma/eps+2)",
                (d - 1.0) / (2.0 * (w + 2.0) * g / p.eps + 2.0),
            ),
        };
        terms.push((term.0.into(), term.1));
    }
    let (binding, value) = terms.iter().fold(("".to_string(), f64::INFINITY), |acc, (n, v)| {
        if *v < acc.1 {
            (n.clone(), *v)
        } else {
            acc
        }
    });
    RadiusReport {
        radius: value.max(0.0).floor() as usize,
        terms,
        binding,
        distance_unbounded: p.distance.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{coset_witness, hypergraph_product, lifted_product};
    use crate::tanner::{find_inner_code, lift_graph, random_base_graph};
    use proptest::prelude::*;
    use rand::seq::index::sample;

    fn small_tanner(seed: u64, v0: usize, delta: usize, gamma: usize, ell: usize) -> TannerCode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner = find_inner_code(delta, gamma, 2, &mut rng, 100_000).unwrap();
        loop {
            let g = lift_graph(&random_base_graph(v0, delta, ell, &mut rng).unwrap(), ell).unwrap();
            if let Ok(t) = TannerCode::new(g, inner.clone()) {
                return t;
            }
        }
    }

    fn random_bits(len: usize, weight: usize, rng: &mut ChaCha8Rng) -> BitVec {
        BitVec::from_support(len, sample(rng, len, weight.min(len)))
    }

    #[test]
    fn structured_maps_match_dense_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (kind, ell) in [(ProductKind::Hgp, 3), (ProductKind::Lp, 4), (ProductKind::Hgp, 5)] {
            let lift = if kind == ProductKind::Lp { ell } else { 2 };
            let t = small_tanner(2, 2, 4, 1, lift);
            let code = ProductCode::new(kind, t.clone(), ell).unwrap();
            let rep = repetition_complex(ell).unwrap();
            let dense = match kind {
                ProductKind::Hgp => hypergraph_product(t.complex(), &rep).unwrap(),
                ProductKind::Lp => lifted_product(t.complex(), &rep).unwrap(),
            };
            let mine = code.dense_complex().unwrap();
            assert_eq!((mine.d2(), mine.d1()), (dense.d2(), dense.d1()));
            let (r2, r1) = code.ring_forms().unwrap();
            assert_eq!((&r2.expand_to_f2(), &r1.expand_to_f2()), (dense.d2(), dense.d1()));
            let z = code.side(CssSide::Z);
            for _ in 0..20 {
                let c = random_bits(code.n(), 5, &mut rng);
                assert_eq!(z.d1(&c).unwrap(), dense.d1().mul_vec(&c));
                assert_eq!(z.d2_t(&c).unwrap(), dense.d2().transpose().mul_vec(&c));
                // The relabeled X side is the Z side of the transposed factor.
                let sx = code.side(CssSide::X).d1(&code.relabel(&c)).unwrap();
                assert_eq!(sx, reflect_blocks(&dense.d2().transpose().mul_vec(&c), ell));
                assert_eq!(code.unrelabel(&code.relabel(&c)), c);
                let w = random_bits(z.n1() * ell, 3, &mut rng);
                assert_eq!(z.d2(&w).unwrap(), dense.d2().mul_vec(&w));
                let s = random_bits(z.n0() * ell, 3, &mut rng);
                assert_eq!(z.d1_t(&s).unwrap(), dense.d1().transpose().mul_vec(&s));
            }
        }
    }

    #[test]
    fn structured_witness_agrees_with_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (kind, ell) in [(ProductKind::Hgp, 4), (ProductKind::Lp, 4)] {
            let lift = if kind == ProductKind::Lp { ell } else { 2 };
            let t = small_tanner(4, 2, 4, 1, lift);
            let code = ProductCode::new(kind, t, ell).unwrap();
            let dense = code.dense_complex().unwrap();
            let dual = dense.cochain();
            for trial in 0..60 {
                let c = random_bits(code.n(), 3, &mut rng);
                // Half the estimates differ from c by a stabilizer.
                let est = if trial % 2 == 0 {
                    let w = random_bits(code.side(CssSide::Z).n1() * ell, 2, &mut rng);
                    c.xor(&dense.d2().mul_vec(&w))
                } else {
                    random_bits(code.n(), 3, &mut rng)
                };
                let structured = code.coset_witness(CssSide::Z, &c, &est).unwrap();
                let by_solve = coset_witness(&dense, &c, &est).unwrap();
                assert_eq!(structured.is_some(), by_solve.is_some());
                if let Some(w) = structured {
                    assert!(code.verify_witness(CssSide::Z, &c, &est, &w).unwrap());
                }
                let structured = code.coset_witness(CssSide::X, &c, &est).unwrap();
                let by_solve = coset_witness(&dual, &c, &est).unwrap();
                assert_eq!(structured.is_some(), by_solve.is_some(), "X side, trial {trial}");
                if let Some(w) = structured {
                    assert!(code.verify_witness(CssSide::X, &c, &est, &w).unwrap());
                }
            }
        }
    }

    #[test]
    fn zero_syndrome_decodes_to_zero() {
        let t = small_tanner(5, 4, 4, 1, 8);
        for kind in [ProductKind::Hgp, ProductKind::Lp] {
            let code = ProductCode::new(kind, t.clone(), 8).unwrap();
            let method = match kind {
                ProductKind::Hgp => Method::HgpDeterministic,
                ProductKind::Lp => Method::LpWeak,
            };
            for side in [CssSide::Z, CssSide::X] {
                let len = match side {
                    CssSide::Z => code.side(CssSide::Z).n0() * 8,
                    CssSide::X => code.side(CssSide::Z).n1() * 8,
                };
                let out = code.decode(side, &BitVec::zeros(len), method, 0).unwrap();
                assert!(out.is_ok());
                assert!(out.estimate.is_zero());
            }
        }
    }

    #[test]
    fn toric_code_single_errors_are_corrected_on_both_sides() {
        let code = ProductCode::new(ProductKind::Hgp, TannerCode::repetition(5).unwrap(), 5).unwrap();
        for side in [CssSide::Z, CssSide::X] {
            for q in 0..code.n() {
                let c = BitVec::from_support(code.n(), [q]);
                let s = code.syndrome(side, &c).unwrap();
                let out = code.decode(side, &s, Method::HgpDeterministic, 0).unwrap();
                assert!(out.is_ok());
                assert!(code.coset_witness(side, &c, &out.estimate).unwrap().is_some());
            }
        }
    }

    #[test]
    fn prefix_sums_collapse_when_shift_column_is_clean() {
        // With x_{j-1} = 0, Σ_{i<k} s_{j+i} = x_{j+k-1} + ∂ a_k column by column.
        let t = small_tanner(6, 4, 4, 1, 4);
        let ell = 6;
        let code = ProductCode::new(ProductKind::Hgp, t.clone(), ell).unwrap();
        let z = code.side(CssSide::Z);
        let boundary = t.complex().boundary();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let plain = |v: &BitVec, rank: usize, p: usize| {
            BitVec::from_support(rank, (0..rank).filter(|&a| v.get(a * ell + (ell - p % ell) % ell)))
        };
        for _ in 0..40 {
            let j = rng.random_range(0..ell);
            let mut x = random_bits(z.n0() * ell, 4, &mut rng);
            let clean = (ell - (j + ell - 1) % ell) % ell;
            for a in 0..z.n0() {
                x.set(a * ell + clean, false);
            }
            let y = random_bits(z.n1() * ell, 4, &mut rng);
            let s = z.d1(&x.concat(&y)).unwrap();
            let mut acc = BitVec::zeros(z.n0());
            let mut a_k = BitVec::zeros(z.n1());
            for k in 1..=ell {
                acc.xor_assign(&plain(&s, z.n0(), j + k - 1));
                a_k.xor_assign(&plain(&y, z.n1(), j + k - 1));
                let mut want = plain(&x, z.n0(), j + k - 1);
                want.xor_assign(&boundary.mul_vec(&a_k));
                assert_eq!(acc, want);
            }
        }
    }

    #[test]
    fn repetition_counts() {
        assert_eq!(hgp_repetitions(0.5).unwrap(), 1);
        assert_eq!(hgp_repetitions(2f64.powi(-10)).unwrap(), 10);
        assert_eq!(lp_repetitions(2, 0.5, 0.5).unwrap(), 1);
        for ell in [2, 4, 32, 64, 256] {
            let k = lp_repetitions(ell, 0.5, 1e-3).unwrap();
            assert!(k as f64 <= (ell as f64).powf(1.0) * (1e3f64).ln() + 1.0);
        }
        assert!(lp_repetitions(12, 0.5, 0.1).is_err());
    }

    #[test]
    fn radius_examples() {
        let hgp = theoretical_radius(
            ProductKind::Hgp,
            &RadiusInputs {
                e0: 5,
                e1: 5,
                gamma: 24,
                w: 4,
                ell: 16,
                eps: 0.5,
                distance: Some(4),
            },
        );
        assert_eq!(hgp.radius, 0);
        assert!(!hgp.distance_unbounded);
        let huge = theoretical_radius(
            ProductKind::Hgp,
            &RadiusInputs {
                e0: 1000,
                e1: 1000,
                gamma: 1,
                w: 1,
                ell: 16,
                eps: 0.5,
                distance: None,
            },
        );
        assert_eq!((huge.radius, huge.binding.as_str()), (8, "ell/2"));
        assert!(huge.distance_unbounded);
        let lp = theoretical_radius(
            ProductKind::Lp,
            &RadiusInputs {
                e0: 5,
                e1: 5,
                gamma: 24,
                w: 4,
                ell: 64,
                eps: 0.5,
                distance: None,
            },
        );
        assert_eq!(lp.radius, 0);
        assert_eq!(lp.terms.len(), 3);
    }

    #[test]
    fn amp_com_rejects_bad_scales() {
        let t = small_tanner(8, 4, 4, 1, 8);
        let code = ProductCode::new(ProductKind::Lp, t, 8).unwrap();
        let z = code.side(CssSide::Z);
        let s = BitVec::zeros(z.n0() * 8);
        let y = BitVec::zeros(z.n1() * 8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(z.amp_com(&s, &y, 3, &mut rng).is_err());
        assert!(z.amp_com(&s, &y, 16, &mut rng).is_err());
        let (out, _) = z.amp_com(&s, &y, 4, &mut rng).unwrap();
        assert!(out.is_zero());
    }

    proptest! {
        #[test]
        fn circulant_apply_matches_expansion(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ell = rng.random_range(1..7);
            let (rows, cols) = (rng.random_range(1..4), rng.random_range(1..4));
            let terms: Vec<(usize, usize, usize)> = (0..rng.random_range(0..8))
                .map(|_| (rng.random_range(0..rows), rng.random_range(0..cols), rng.random_range(0..ell)))
                .collect();
            let f = Circulant::from_terms(ell, rows, cols, terms);
            let m = f.expand_to_f2();
            let y = random_bits(cols * ell, rng.random_range(0..cols * ell + 1), &mut rng);
            prop_assert_eq!(f.apply(&y), m.mul_vec(&y));
            let z = random_bits(rows * ell, rng.random_range(0..rows * ell + 1), &mut rng);
            prop_assert_eq!(f.apply_transpose(&z), m.transpose().mul_vec(&z));
            prop_assert_eq!(f.transpose().expand_to_f2(), reflect_mat(&m.transpose(), ell));
        }

        #[test]
        fn solve_one_plus_x_is_minimal(bits in proptest::collection::vec(any::<bool>(), 12)) {
            let r = BitVec::from_bools(&bits);
            let ell = 6;
            match solve_one_plus_x(&r, ell) {
                Some(x) => {
                    prop_assert_eq!(one_plus_x(&x, ell), r.clone());
                    let other = x.xor(&BitVec::ones(12));
                    for h in 0..2 {
                        prop_assert!(x.slice(h * 6, 6).weight() <= other.slice(h * 6, 6).weight());
                    }
                }
                None => prop_assert!((0..2).any(|h| r.slice(h * 6, 6).weight() % 2 == 1)),
            }
        }

        #[test]
        fn approximate_compatibility_bounds_prefix_sums(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ell: usize = 1 << rng.random_range(1..6);
            let t = 1 << rng.random_range(0..=ell.trailing_zeros());
            let len = rng.random_range(1..4) * ell;
            let u = random_bits(len, rng.random_range(0..5), &mut rng);
            let v = random_bits(len, rng.random_range(0..5), &mut rng);
            let d2 = (1..=t).map(|i| prefix_sum(&v, ell, i).weight()).max().unwrap_or(0);
            let diff = one_plus_x(&u, ell).xor(&v);
            for i in 0..=3 * ell {
                prop_assert!(prefix_sum(&diff, ell, i).weight() <= 2 * u.weight() + i.div_ceil(t) * d2);
            }
        }
    }

    fn reflect_mat(m: &BitMat, ell: usize) -> BitMat {
        BitMat::from_fn(m.rows(), m.cols(), |i, j| {
            let ri = i / ell * ell + (ell - i % ell) % ell;
            let rj = j / ell * ell + (ell - j % ell) % ell;
            m.get(ri, rj)
        })
    }
}
