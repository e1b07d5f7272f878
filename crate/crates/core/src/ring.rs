//! The group algebra `R_ℓ = F2[X]/(X^ℓ - 1)` and free modules over it.
//!
//! A [`RingElement`] stores the coefficient of `X^i` at bit `i`.
//!
//! A [`ModuleElement`] of rank `n` is stored as `n` blocks of `ℓ` bits where
//! bit `(h, i)` is the coefficient of `α_h X^{-i}`. With this layout,
//! multiplying by `X^k` reads `(X^k a)_{h,i} = a_{h,i+k}`, and the F2
//! expansion of a ring matrix is compatible with conjugate transposition:
//! `expand(M†) = expand(M)^T`.

use crate::error::{check_dim, Error, Result};
use crate::f2::{BitMat, BitVec};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RingElement {
    ell: usize,
    coeffs: BitVec,
}

fn check_ell(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::RingMismatch { left: a, right: b })
    }
}

impl RingElement {
    #[must_use]
    pub fn zero(ell: usize) -> Self {
        assert!(ell > 0, "ring size must be positive");
        RingElement {
            ell,
            coeffs: BitVec::zeros(ell),
        }
    }

    #[must_use]
    pub fn one(ell: usize) -> Self {
        Self::monomial(ell, 0)
    }

    /// `X^k`, with `k` reduced mod `ℓ`.
    #[must_use]
    pub fn monomial(ell: usize, k: usize) -> Self {
        let mut r = Self::zero(ell);
        r.coeffs.set(k % ell, true);
        r
    }

    /// `Σ X^e` over the given exponents (reduced mod `ℓ`; repeats cancel).
    #[must_use]
    pub fn from_exponents<I: IntoIterator<Item = usize>>(ell: usize, exps: I) -> Self {
        let mut r = Self::zero(ell);
        for e in exps {
            r.coeffs.flip(e % ell);
        }
        r
    }

    pub fn from_coeffs(coeffs: BitVec) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("ring size must be positive".into()));
        }
        Ok(RingElement {
            ell: coeffs.len(),
            coeffs,
        })
    }

    #[must_use]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[must_use]
    pub fn coeffs(&self) -> &BitVec {
        &self.coeffs
    }

    #[must_use]
    pub fn coeff(&self, i: usize) -> bool {
        self.coeffs.get(i % self.ell)
    }

    #[must_use]
    pub fn exponents(&self) -> Vec<usize> {
        self.coeffs.support()
    }

    #[must_use]
    pub fn weight(&self) -> usize {
        self.coeffs.weight()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    /// Image under the augmentation map `R_ℓ -> F2`.
    #[must_use]
    pub fn augmentation(&self) -> bool {
        self.weight() % 2 == 1
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        check_ell(self.ell, other.ell)?;
        Ok(RingElement {
            ell: self.ell,
            coeffs: self.coeffs.xor(&other.coeffs),
        })
    }

    /// Cyclic convolution.
    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        check_ell(self.ell, other.ell)?;
        let mut out = RingElement::zero(self.ell);
        let b = other.exponents();
        for i in self.coeffs.iter_ones() {
            for &j in &b {
                out.coeffs.flip((i + j) % self.ell);
            }
        }
        Ok(out)
    }

    /// `X^k · self`.
    #[must_use]
    pub fn shift(&self, k: usize) -> RingElement {
        RingElement::from_exponents(self.ell, self.coeffs.iter_ones().map(|i| i + k))
    }

    /// The involution `X^i -> X^{-i}`.
    #[must_use]
    pub fn conjugate(&self) -> RingElement {
        RingElement::from_exponents(self.ell, self.coeffs.iter_ones().map(|i| (self.ell - i) % self.ell))
    }
}

/// `Σ_{i<k} X^i` in `R_ℓ`.
#[must_use]
pub fn prefix_multiplier(k: usize, ell: usize) -> RingElement {
    RingElement::from_exponents(ell, 0..k)
}

/// Minimum-weight `χ` with `(1 + X) χ = ζ`, or `None` when `ζ` has odd weight.
///
/// Solutions are `χ_i = χ_0 + Σ_{1≤k≤i} ζ_k`; both choices of `χ_0` are tried
/// and the lighter one kept, preferring `χ_0 = 0` on ties.
#[must_use]
pub fn repetition_factor_solve(zeta: &RingElement) -> Option<RingElement> {
    let ell = zeta.ell;
    let mut best: Option<RingElement> = None;
    for chi0 in [false, true] {
        let mut chi = BitVec::zeros(ell);
        let mut acc = chi0;
        chi.set(0, acc);
        for i in 1..ell {
            acc ^= zeta.coeffs.get(i);
            chi.set(i, acc);
        }
        let chi = RingElement { ell, coeffs: chi };
        let image = chi.add(&chi.shift(1)).expect("same ring");
        if image != *zeta {
            continue;
        }
        if best.as_ref().is_none_or(|b| chi.weight() < b.weight()) {
            best = Some(chi);
        }
    }
    best
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ModuleElement {
    ell: usize,
    rank: usize,
    bits: BitVec,
}

impl ModuleElement {
    #[must_use]
    pub fn zero(rank: usize, ell: usize) -> Self {
        assert!(ell > 0, "ring size must be positive");
        ModuleElement {
            ell,
            rank,
            bits: BitVec::zeros(rank * ell),
        }
    }

    /// Wraps a flat vector of `rank * ℓ` bits laid out as `(h, i) -> h ℓ + i`.
    pub fn from_bits(rank: usize, ell: usize, bits: BitVec) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("ring size must be positive".into()));
        }
        check_dim("module element", rank * ell, bits.len())?;
        Ok(ModuleElement { ell, rank, bits })
    }

    pub fn from_components(ell: usize, comps: &[RingElement]) -> Result<Self> {
        let mut out = ModuleElement::zero(comps.len(), ell);
        for (h, c) in comps.iter().enumerate() {
            out.set_component(h, c)?;
        }
        Ok(out)
    }

    #[must_use]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[must_use]
    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    #[must_use]
    pub fn into_bits(self) -> BitVec {
        self.bits
    }

    #[must_use]
    pub fn weight(&self) -> usize {
        self.bits.weight()
    }

    /// Entry `(h, i)`; the second index is taken mod `ℓ`.
    #[must_use]
    pub fn get(&self, h: usize, i: usize) -> bool {
        self.bits.get(h * self.ell + i % self.ell)
    }

    pub fn set(&mut self, h: usize, i: usize, value: bool) {
        self.bits.set(h * self.ell + i % self.ell, value);
    }

    pub fn flip(&mut self, h: usize, i: usize) {
        self.bits.flip(h * self.ell + i % self.ell);
    }

    /// The ring coordinate `f_h` with `self = Σ α_h f_h`.
    #[must_use]
    pub fn component(&self, h: usize) -> RingElement {
        let ell = self.ell;
        RingElement::from_exponents(ell, (0..ell).filter(|&i| self.get(h, i)).map(|i| (ell - i) % ell))
    }

    pub fn set_component(&mut self, h: usize, f: &RingElement) -> Result<()> {
        check_ell(self.ell, f.ell)?;
        for i in 0..self.ell {
            self.set(h, i, f.coeff((self.ell - i) % self.ell));
        }
        Ok(())
    }

    pub fn add(&self, other: &ModuleElement) -> Result<ModuleElement> {
        check_ell(self.ell, other.ell)?;
        check_dim("module rank", self.rank, other.rank)?;
        Ok(ModuleElement {
            ell: self.ell,
            rank: self.rank,
            bits: self.bits.xor(&other.bits),
        })
    }

    pub fn add_assign(&mut self, other: &ModuleElement) {
        assert_eq!((self.ell, self.rank), (other.ell, other.rank));
        self.bits.xor_assign(&other.bits);
    }

    /// `X^k · self`, i.e. `(h, i) <- (h, i + k)`.
    #[must_use]
    pub fn shift(&self, k: usize) -> ModuleElement {
        let ell = self.ell;
        let k = k % ell;
        let mut out = ModuleElement::zero(self.rank, ell);
        for p in self.bits.iter_ones() {
            let (h, i) = (p / ell, p % ell);
            out.bits.set(h * ell + (i + ell - k) % ell, true);
        }
        out
    }

    /// Scalar multiplication by a ring element.
    pub fn scale(&self, f: &RingElement) -> Result<ModuleElement> {
        check_ell(self.ell, f.ell)?;
        let mut out = ModuleElement::zero(self.rank, self.ell);
        for k in f.coeffs.iter_ones() {
            out.add_assign(&self.shift(k));
        }
        Ok(out)
    }

    /// Componentwise conjugation `X^i -> X^{-i}`, which reflects the second index.
    #[must_use]
    pub fn conjugate(&self) -> ModuleElement {
        let ell = self.ell;
        let mut out = ModuleElement::zero(self.rank, ell);
        for p in self.bits.iter_ones() {
            let (h, i) = (p / ell, p % ell);
            out.bits.set(h * ell + (ell - i) % ell, true);
        }
        out
    }
}

/// Dense matrix with entries in `R_ℓ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RingMatrix {
    ell: usize,
    rows: usize,
    cols: usize,
    entries: Vec<RingElement>,
}

impl RingMatrix {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize, ell: usize) -> Self {
        RingMatrix {
            ell,
            rows,
            cols,
            entries: vec![RingElement::zero(ell); rows * cols],
        }
    }

    #[must_use]
    pub fn identity(n: usize, ell: usize) -> Self {
        Self::scalar(n, &RingElement::one(ell))
    }

    /// `f · I_n`.
    #[must_use]
    pub fn scalar(n: usize, f: &RingElement) -> Self {
        let mut m = RingMatrix::zeros(n, n, f.ell);
        for i in 0..n {
            m.entries[i * n + i] = f.clone();
        }
        m
    }

    /// Row-major entries.
    pub fn from_entries(rows: usize, cols: usize, ell: usize, entries: Vec<RingElement>) -> Result<Self> {
        check_dim("ring matrix entries", rows * cols, entries.len())?;
        for e in &entries {
            check_ell(ell, e.ell)?;
        }
        Ok(RingMatrix {
            ell,
            rows,
            cols,
            entries,
        })
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
    pub fn get(&self, i: usize, j: usize) -> &RingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: RingElement) -> Result<()> {
        check_ell(self.ell, f.ell)?;
        self.entries[i * self.cols + j] = f;
        Ok(())
    }

    /// Adds `f` to entry `(i, j)`.
    pub fn add_to(&mut self, i: usize, j: usize, f: &RingElement) -> Result<()> {
        let e = &mut self.entries[i * self.cols + j];
        *e = e.add(f)?;
        Ok(())
    }

    /// Entrywise augmentation, an F2 matrix.
    #[must_use]
    pub fn augmentation(&self) -> BitMat {
        BitMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).augmentation())
    }

    /// Circulant expansion over F2 in the module basis `α_h X^{-i}`.
    ///
    /// Block `(g, h)` for entry `m` has `B[i][j] = m_{(j - i) mod ℓ}`.
    #[must_use]
    pub fn expand_to_f2(&self) -> BitMat {
        let ell = self.ell;
        let mut out = BitMat::zeros(self.rows * ell, self.cols * ell);
        for g in 0..self.rows {
            for h in 0..self.cols {
                for k in self.get(g, h).coeffs.iter_ones() {
                    for i in 0..ell {
                        out.set(g * ell + i, h * ell + (i + k) % ell, true);
                    }
                }
            }
        }
        out
    }

    #[must_use]
    pub fn transpose(&self) -> RingMatrix {
        let mut out = RingMatrix::zeros(self.cols, self.rows, self.ell);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// `M†`, the transpose with every entry conjugated.
    #[must_use]
    pub fn conjugate_transpose(&self) -> RingMatrix {
        let mut out = self.transpose();
        for e in &mut out.entries {
            *e = e.conjugate();
        }
        out
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix> {
        check_ell(self.ell, other.ell)?;
        check_dim("ring matrix product", self.cols, other.rows)?;
        let mut out = RingMatrix::zeros(self.rows, other.cols, self.ell);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a.mul(other.get(k, j))?;
                    out.add_to(i, j, &p)?;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product over the commutative ring `R_ℓ`.
    pub fn kron(a: &RingMatrix, b: &RingMatrix) -> Result<RingMatrix> {
        check_ell(a.ell, b.ell)?;
        let (rows, cols) = (a.rows * b.rows, a.cols * b.cols);
        let mut out = RingMatrix::zeros(rows, cols, a.ell);
        for i in 0..a.rows {
            for j in 0..a.cols {
                let x = a.get(i, j);
                if x.is_zero() {
                    continue;
                }
                for k in 0..b.rows {
                    for l in 0..b.cols {
                        out.entries[(i * b.rows + k) * cols + j * b.cols + l] = x.mul(b.get(k, l))?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn hstack(a: &RingMatrix, b: &RingMatrix) -> Result<RingMatrix> {
        check_ell(a.ell, b.ell)?;
        check_dim("hstack rows", a.rows, b.rows)?;
        let mut out = RingMatrix::zeros(a.rows, a.cols + b.cols, a.ell);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.entries[i * out.cols + j] = a.get(i, j).clone();
            }
            for j in 0..b.cols {
                out.entries[i * out.cols + a.cols + j] = b.get(i, j).clone();
            }
        }
        Ok(out)
    }

    pub fn vstack(a: &RingMatrix, b: &RingMatrix) -> Result<RingMatrix> {
        check_ell(a.ell, b.ell)?;
        check_dim("vstack cols", a.cols, b.cols)?;
        let mut entries = a.entries.clone();
        entries.extend(b.entries.iter().cloned());
        Ok(RingMatrix {
            ell: a.ell,
            rows: a.rows + b.rows,
            cols: a.cols,
            entries,
        })
    }

    /// `M a` for a module element of rank `cols`.
    pub fn apply(&self, a: &ModuleElement) -> Result<ModuleElement> {
        check_ell(self.ell, a.ell)?;
        check_dim("ring matrix application", self.cols, a.rank)?;
        let comps: Vec<RingElement> = (0..a.rank).map(|h| a.component(h)).collect();
        let mut out = Vec::with_capacity(self.rows);
        for g in 0..self.rows {
            let mut acc = RingElement::zero(self.ell);
            for (h, f) in comps.iter().enumerate() {
                let m = self.get(g, h);
                if !m.is_zero() && !f.is_zero() {
                    acc = acc.add(&m.mul(f)?)?;
                }
            }
            out.push(acc);
        }
        ModuleElement::from_components(self.ell, &out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_ring(ell: usize) -> impl Strategy<Value = RingElement> {
        proptest::collection::vec(any::<bool>(), ell)
            .prop_map(|b| RingElement::from_coeffs(BitVec::from_bools(&b)).unwrap())
    }

    fn arb_ring_matrix(rows: usize, cols: usize, ell: usize) -> impl Strategy<Value = RingMatrix> {
        proptest::collection::vec(arb_ring(ell), rows * cols)
            .prop_map(move |e| RingMatrix::from_entries(rows, cols, ell, e).unwrap())
    }

    fn brute_min_preimage(zeta: &RingElement) -> Option<usize> {
        let ell = zeta.ell();
        let one_plus_x = RingElement::from_exponents(ell, [0, 1]);
        (0u32..1 << ell)
            .map(|m| RingElement::from_exponents(ell, (0..ell).filter(|i| m >> i & 1 == 1)))
            .filter(|chi| one_plus_x.mul(chi).unwrap() == *zeta)
            .map(|chi| chi.weight())
            .min()
    }

    #[test]
    fn prefix_multiplier_telescopes() {
        let p = prefix_multiplier(3, 5);
        let q = p.mul(&RingElement::from_exponents(5, [0, 1])).unwrap();
        assert_eq!(q, RingElement::from_exponents(5, [0, 3]));
        assert!(prefix_multiplier(5, 5)
            .mul(&RingElement::from_exponents(5, [0, 1]))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn repetition_solve_small_cases() {
        let zeta = RingElement::from_exponents(6, [1, 3]);
        let chi = repetition_factor_solve(&zeta).unwrap();
        assert_eq!(chi, RingElement::from_exponents(6, [1, 2]));
        assert!(repetition_factor_solve(&RingElement::from_exponents(6, [2])).is_none());
        let full = RingElement::from_exponents(4, [0, 1, 2, 3]);
        assert_eq!(repetition_factor_solve(&full).unwrap().weight(), 2);
        assert!(repetition_factor_solve(&RingElement::zero(1)).unwrap().is_zero());
    }

    #[test]
    fn repetition_solve_matches_exhaustive_search() {
        for ell in 1..=8 {
            for m in 0u32..1 << ell {
                let zeta = RingElement::from_exponents(ell, (0..ell).filter(|i| m >> i & 1 == 1));
                let got = repetition_factor_solve(&zeta);
                assert_eq!(
                    got.as_ref().map(RingElement::weight),
                    brute_min_preimage(&zeta),
                    "{zeta:?}"
                );
            }
        }
    }

    #[test]
    fn module_shift_reads_ahead() {
        let mut a = ModuleElement::zero(2, 5);
        a.set(1, 3, true);
        let b = a.shift(2);
        assert!(b.get(1, 1));
        assert_eq!(b.weight(), 1);
        assert_eq!(b, a.scale(&RingElement::monomial(5, 2)).unwrap());
    }

    #[test]
    fn repetition_circulant_layout() {
        let m = RingMatrix::scalar(1, &RingElement::from_exponents(4, [0, 1])).expand_to_f2();
        for i in 0..4 {
            let row: Vec<usize> = m.row(i).support();
            let mut want = vec![i, (i + 1) % 4];
            want.sort_unstable();
            assert_eq!(row, want);
        }
    }

    #[test]
    fn mismatched_rings_error() {
        assert!(RingElement::one(3).mul(&RingElement::one(4)).is_err());
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_ring(7), b in arb_ring(7), c in arb_ring(7)) {
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.mul(&b).unwrap().conjugate(), a.conjugate().mul(&b.conjugate()).unwrap());
            prop_assert_eq!(a.conjugate().conjugate(), a);
        }

        #[test]
        fn component_roundtrip(bits in proptest::collection::vec(any::<bool>(), 18)) {
            let a = ModuleElement::from_bits(3, 6, BitVec::from_bools(&bits)).unwrap();
            let comps: Vec<_> = (0..3).map(|h| a.component(h)).collect();
            prop_assert_eq!(ModuleElement::from_components(6, &comps).unwrap(), a);
        }

        #[test]
        fn expansion_is_a_representation(
            m in arb_ring_matrix(2, 3, 5),
            n in arb_ring_matrix(3, 2, 5),
            bits in proptest::collection::vec(any::<bool>(), 15),
        ) {
            let a = ModuleElement::from_bits(3, 5, BitVec::from_bools(&bits)).unwrap();
            prop_assert_eq!(m.expand_to_f2().mul_vec(a.bits()), m.apply(&a).unwrap().into_bits());
            prop_assert_eq!(m.conjugate_transpose().expand_to_f2(), m.expand_to_f2().transpose());
            prop_assert_eq!(
                m.mul(&n).unwrap().expand_to_f2(),
                m.expand_to_f2().mul(&n.expand_to_f2()).unwrap()
            );
        }

        #[test]
        fn one_plus_x_prefix_identity(bits in proptest::collection::vec(any::<bool>(), 12), k in 0usize..30) {
            let x = ModuleElement::from_bits(2, 6, BitVec::from_bools(&bits)).unwrap();
            let one_plus_x = RingElement::from_exponents(6, [0, 1]);
            let lhs = x.scale(&one_plus_x).unwrap().scale(&prefix_multiplier(k, 6)).unwrap();
            let rhs = x.add(&x.shift(k)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
