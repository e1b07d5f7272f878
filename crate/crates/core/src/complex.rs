//! Based chain complexes, products, and exact small-scale oracles.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::f2::{for_each_in_span, BitMat, BitVec};
use crate::ring::{RingElement, RingMatrix};

/// Default enumeration budget (log2) for the exact oracles.
pub const ORACLE_BUDGET_LOG2: usize = 22;

/// A 2-term complex `C₁ --∂--> C₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex2 {
    boundary: BitMat,
    ring: Option<RingMatrix>,
}

impl ChainComplex2 {
    #[must_use]
    pub fn new(boundary: BitMat) -> Self {
        ChainComplex2 { boundary, ring: None }
    }

    #[must_use]
    pub fn from_ring(ring: RingMatrix) -> Self {
        ChainComplex2 {
            boundary: ring.expand_to_f2(),
            ring: Some(ring),
        }
    }

    #[must_use]
    pub fn boundary(&self) -> &BitMat {
        &self.boundary
    }

    #[must_use]
    pub fn ring(&self) -> Option<&RingMatrix> {
        self.ring.as_ref()
    }

    #[must_use]
    pub fn ell(&self) -> Option<usize> {
        self.ring.as_ref().map(RingMatrix::ell)
    }

    /// `dim C₁`.
    #[must_use]
    pub fn n1(&self) -> usize {
        self.boundary.cols()
    }

    /// `dim C₀`.
    #[must_use]
    pub fn n0(&self) -> usize {
        self.boundary.rows()
    }

    #[must_use]
    pub fn locality(&self) -> usize {
        self.boundary.locality()
    }

    /// `(dim H₁, dim H₀)`.
    #[must_use]
    pub fn homology_dims(&self) -> (usize, usize) {
        let r = self.boundary.rank();
        (self.n1() - r, self.n0() - r)
    }

    /// The cochain complex read as a chain complex: transpose, or conjugate
    /// transpose of the ring form.
    #[must_use]
    pub fn cochain(&self) -> ChainComplex2 {
        match &self.ring {
            Some(r) => ChainComplex2::from_ring(r.conjugate_transpose()),
            None => ChainComplex2::new(self.boundary.transpose()),
        }
    }
}

#[must_use]
pub fn cochain2(a: &ChainComplex2) -> ChainComplex2 {
    a.cochain()
}

/// `R_ℓ --(1+X)--> R_ℓ`.
pub fn repetition_complex(ell: usize) -> Result<ChainComplex2> {
    if ell < 2 {
        return Err(Error::InvalidParameter(format!(
            "repetition length must be >= 2, got {ell}"
        )));
    }
    let one_plus_x = RingElement::from_exponents(ell, [0, 1]);
    Ok(ChainComplex2::from_ring(RingMatrix::scalar(1, &one_plus_x)))
}

/// A 3-term complex `C₂ --∂₂--> C₁ --∂₁--> C₀` defining a CSS code on `C₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex3 {
    d2: BitMat,
    d1: BitMat,
    ring_d2: Option<RingMatrix>,
    ring_d1: Option<RingMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub locality: usize,
}

impl ChainComplex3 {
    pub fn new(d2: BitMat, d1: BitMat) -> Result<Self> {
        check_dim("chain complex middle dimension", d1.cols(), d2.rows())?;
        if !d1.mul(&d2)?.is_zero() {
            return Err(Error::NotAComplex);
        }
        Ok(ChainComplex3 {
            d2,
            d1,
            ring_d2: None,
            ring_d1: None,
        })
    }

    pub fn from_ring(r2: RingMatrix, r1: RingMatrix) -> Result<Self> {
        let mut c = ChainComplex3::new(r2.expand_to_f2(), r1.expand_to_f2())?;
        c.ring_d2 = Some(r2);
        c.ring_d1 = Some(r1);
        Ok(c)
    }

    #[must_use]
    pub fn d2(&self) -> &BitMat {
        &self.d2
    }

    #[must_use]
    pub fn d1(&self) -> &BitMat {
        &self.d1
    }

    #[must_use]
    pub fn ring_forms(&self) -> Option<(&RingMatrix, &RingMatrix)> {
        self.ring_d2.as_ref().zip(self.ring_d1.as_ref())
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.d1.cols()
    }

    #[must_use]
    pub fn k(&self) -> usize {
        self.n() - self.d1.rank() - self.d2.rank()
    }

    #[must_use]
    pub fn locality(&self) -> usize {
        self.d1.locality().max(self.d2.locality())
    }

    /// Parameters with `d` left unset; see [`distance_oracle`].
    #[must_use]
    pub fn params(&self) -> CodeParams {
        CodeParams {
            n: self.n(),
            k: self.k(),
            d: None,
            locality: self.locality(),
        }
    }

    /// `C⁰ --δ₀--> C¹ --δ₁--> C²` read as a chain complex.
    #[must_use]
    pub fn cochain(&self) -> ChainComplex3 {
        ChainComplex3 {
            d2: self.d1.transpose(),
            d1: self.d2.transpose(),
            ring_d2: self.ring_d1.as_ref().map(RingMatrix::conjugate_transpose),
            ring_d1: self.ring_d2.as_ref().map(RingMatrix::conjugate_transpose),
        }
    }
}

/// `(A ⊗ B)` over F2 with `C₁ = A₀⊗B₁ ⊕ A₁⊗B₀` in that block order.
pub fn hypergraph_product(a: &ChainComplex2, b: &ChainComplex2) -> Result<ChainComplex3> {
    let (da, db) = (a.boundary(), b.boundary());
    let ia0 = BitMat::identity(a.n0());
    let ia1 = BitMat::identity(a.n1());
    let ib0 = BitMat::identity(b.n0());
    let ib1 = BitMat::identity(b.n1());
    let d2 = BitMat::vstack(&BitMat::kron(da, &ib1), &BitMat::kron(&ia1, db))?;
    let d1 = BitMat::hstack(&BitMat::kron(&ia0, db), &BitMat::kron(da, &ib0))?;
    ChainComplex3::new(d2, d1)
}

/// `(A ⊗_{R_ℓ} B)` with the same block layout as [`hypergraph_product`].
pub fn lifted_product(a: &ChainComplex2, b: &ChainComplex2) -> Result<ChainComplex3> {
    let (Some(ha), Some(hb)) = (a.ring(), b.ring()) else {
        return Err(Error::InvalidParameter(
            "lifted product needs ring forms on both factors".into(),
        ));
    };
    if ha.ell() != hb.ell() {
        return Err(Error::RingMismatch {
            left: ha.ell(),
            right: hb.ell(),
        });
    }
    let ell = ha.ell();
    let id = |n| RingMatrix::identity(n, ell);
    let r2 = RingMatrix::vstack(
        &RingMatrix::kron(ha, &id(hb.cols()))?,
        &RingMatrix::kron(&id(ha.cols()), hb)?,
    )?;
    let r1 = RingMatrix::hstack(
        &RingMatrix::kron(&id(ha.rows()), hb)?,
        &RingMatrix::kron(ha, &id(hb.rows()))?,
    )?;
    ChainComplex3::from_ring(r2, r1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Finite(usize),
    /// `H₁ = 0`: the code has no logical operators.
    NoLogical,
}

impl Distance {
    #[must_use]
    pub fn value(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::NoLogical => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceReport {
    /// `d_Z`: lightest cycle in `ker ∂₁ \ im ∂₂`.
    pub z: Distance,
    /// `d_X`: lightest cocycle in `ker δ₁ \ im δ₀`.
    pub x: Distance,
    pub z_witness: Option<BitVec>,
    pub x_witness: Option<BitVec>,
}

impl DistanceReport {
    #[must_use]
    pub fn distance(&self) -> Distance {
        match (self.z.value(), self.x.value()) {
            (Some(a), Some(b)) => Distance::Finite(a.min(b)),
            _ => Distance::NoLogical,
        }
    }
}

/// Incremental echelon basis keyed by lowest set bit.
struct Echelon {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new() -> Self {
        Echelon {
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Inserts `v`, returning whether it was independent of the current span.
    fn insert(&mut self, v: &BitVec) -> bool {
        let mut v = v.clone();
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(r);
            }
        }
        let lead = v.iter_ones().next();
        match lead {
            Some(p) => {
                for r in &mut self.rows {
                    if r.get(p) {
                        r.xor_assign(&v);
                    }
                }
                self.rows.push(v);
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }
}

/// Lightest vector of `ker d1` outside `im d2`.
fn lightest_nontrivial(d2: &BitMat, d1: &BitMat, budget_log2: usize) -> Result<(Distance, Option<BitVec>)> {
    let n = d1.cols();
    let kernel = d1.kernel_basis();
    if kernel.len() > budget_log2 {
        return Err(Error::BudgetExceeded {
            what: "distance enumeration",
            needed: kernel.len(),
            limit: budget_log2,
        });
    }
    let mut ech = Echelon::new();
    let (image_rows, _) = d2.transpose().rref();
    let mut basis = Vec::new();
    for i in 0..image_rows.rows() {
        let r = image_rows.row(i);
        if !r.is_zero() && ech.insert(&r) {
            basis.push(r);
        }
    }
    let boundary_count = basis.len();
    for k in &kernel {
        if ech.insert(k) {
            basis.push(k.clone());
        }
    }
    if basis.len() == boundary_count {
        return Ok((Distance::NoLogical, None));
    }
    let mut logical_mask = 0u64;
    let mut best: Option<BitVec> = None;
    for_each_in_span(&basis, n, |v, toggled| {
        let Some(t) = toggled else { return };
        if t >= boundary_count {
            logical_mask ^= 1 << (t - boundary_count);
        }
        if logical_mask != 0 && best.as_ref().is_none_or(|b| v.weight() < b.weight()) {
            best = Some(v.clone());
        }
    });
    let best = best.expect("nontrivial homology has a representative");
    Ok((Distance::Finite(best.weight()), Some(best)))
}

/// Exact `d_Z` and `d_X` by enumerating cycles and cocycles.
pub fn distance_oracle(c: &ChainComplex3) -> Result<DistanceReport> {
    distance_oracle_with_budget(c, ORACLE_BUDGET_LOG2)
}

pub fn distance_oracle_with_budget(c: &ChainComplex3, budget_log2: usize) -> Result<DistanceReport> {
    let (z, z_witness) = lightest_nontrivial(&c.d2, &c.d1, budget_log2)?;
    let co = c.cochain();
    let (x, x_witness) = lightest_nontrivial(&co.d2, &co.d1, budget_log2)?;
    Ok(DistanceReport {
        z,
        x,
        z_witness,
        x_witness,
    })
}

/// Some `z` with `∂₂ z = ĉ + c`, or `None` when `ĉ` and `c` differ by more
/// than a boundary.
pub fn coset_witness(c: &ChainComplex3, err: &BitVec, estimate: &BitVec) -> Result<Option<BitVec>> {
    check_dim("coset check error", c.n(), err.len())?;
    check_dim("coset check estimate", c.n(), estimate.len())?;
    c.d2.solve(&err.xor(estimate))
}

pub fn coset_check(c: &ChainComplex3, err: &BitVec, estimate: &BitVec) -> Result<bool> {
    Ok(coset_witness(c, err, estimate)?.is_some())
}

/// Minimum weight of a nonzero vector in `ker m`, or `None` when the kernel is trivial.
pub fn classical_distance(m: &BitMat) -> Result<Option<usize>> {
    let kernel = m.kernel_basis();
    if kernel.len() > ORACLE_BUDGET_LOG2 {
        return Err(Error::BudgetExceeded {
            what: "classical distance",
            needed: kernel.len(),
            limit: ORACLE_BUDGET_LOG2,
        });
    }
    Ok(crate::f2::min_span_weight(&kernel, m.cols()))
}

/// Whether every `c ∈ C₁` with `0 < |c| ≤ α n₁` has `|∂c| ≥ β |c|`.
pub fn expansion_check(a: &ChainComplex2, alpha: f64, beta: f64) -> Result<bool> {
    let n = a.n1();
    let max_w = ((alpha * n as f64).floor().max(0.0) as usize).min(n);
    let count: f64 = (1..=max_w).map(|w| binomial(n, w)).sum();
    if count > (1u64 << ORACLE_BUDGET_LOG2) as f64 {
        return Err(Error::BudgetExceeded {
            what: "expansion enumeration",
            needed: count.log2().ceil() as usize,
            limit: ORACLE_BUDGET_LOG2,
        });
    }
    let cols = a.boundary().col_supports();
    let mut ok = true;
    for w in 1..=max_w {
        for_each_combination(n, w, |support| {
            if !ok {
                return;
            }
            let mut s = BitVec::zeros(a.n0());
            for &j in support {
                for &i in &cols[j] {
                    s.flip(i);
                }
            }
            if (s.weight() as f64) < beta * w as f64 {
                ok = false;
            }
        });
        if !ok {
            break;
        }
    }
    Ok(ok)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
