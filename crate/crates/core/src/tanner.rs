//! Tanner codes on random abelian lifts of small regular multigraphs.
//!
//! Vertex `(w, i)` of an `ℓ`-lift has index `w ℓ + i`. Lifted edge `(e₀, i)`
//! has index `e₀ ℓ + i` and joins `(u, i)` to `(v, i + L)` for base edge
//! `e₀ = (u, v, L)`. Check `g` of vertex `(w, i)` has index `(w Γ + g) ℓ + i`.
//! These layouts coincide with the module layout of `ring`, so the boundary
//! is the circulant expansion of its ring form.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::complex::ChainComplex2;
use crate::error::{Error, Result};
use crate::f2::{min_span_weight, BitMat, BitVec};
use crate::ring::{RingElement, RingMatrix};

/// Largest vertex count accepted by the dense eigensolver.
pub const DENSE_SPECTRUM_LIMIT: usize = 4096;

/// Largest local degree; local views are packed into `u32` masks and the
/// syndrome table enumerates `2^Δ` patterns.
pub const MAX_DELTA: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseEdge {
    pub u: usize,
    pub v: usize,
    /// `L(u, v)`; `L(v, u) = -L(u, v)` is implied.
    pub label: usize,
    pub port_u: usize,
    pub port_v: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseGraph {
    pub v0: usize,
    pub delta: usize,
    pub edges: Vec<BaseEdge>,
}

impl BaseGraph {
    /// Validates regularity and per-vertex port injectivity.
    pub fn new(v0: usize, delta: usize, edges: Vec<BaseEdge>) -> Result<Self> {
        let mut used = vec![false; v0 * delta];
        for e in &edges {
            for (w, r) in [(e.u, e.port_u), (e.v, e.port_v)] {
                if w >= v0 || r >= delta {
                    return Err(Error::InvalidParameter(format!(
                        "edge endpoint ({w}, port {r}) out of range"
                    )));
                }
                if std::mem::replace(&mut used[w * delta + r], true) {
                    return Err(Error::InvalidParameter(format!("port {r} used twice at vertex {w}")));
                }
            }
        }
        if used.iter().any(|&u| !u) {
            return Err(Error::InvalidParameter(format!("graph is not {delta}-regular")));
        }
        Ok(BaseGraph { v0, delta, edges })
    }
}

/// A `Δ`-regular multigraph on `v0` vertices with uniform labels in `Z/ℓ`.
///
/// With `v0` even the graph is a union of `Δ` random perfect matchings and
/// matching `m` uses port `m` at both ends. Otherwise `Δ` must be even and the
/// graph is a union of `Δ/2` random Hamiltonian cycles, cycle `c` using port
/// `2c` towards the successor and `2c + 1` towards the predecessor.
pub fn random_base_graph<R: Rng + ?Sized>(v0: usize, delta: usize, ell: usize, rng: &mut R) -> Result<BaseGraph> {
    if v0 == 0 || delta == 0 || ell == 0 {
        return Err(Error::InvalidParameter("v0, delta and ell must be positive".into()));
    }
    if (v0 * delta) % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "no {delta}-regular graph on {v0} vertices"
        )));
    }
    let mut perm: Vec<usize> = (0..v0).collect();
    let mut edges = Vec::with_capacity(v0 * delta / 2);
    if v0.is_multiple_of(2) {
        for m in 0..delta {
            perm.shuffle(rng);
            for pair in perm.chunks_exact(2) {
                edges.push(BaseEdge {
                    u: pair[0],
                    v: pair[1],
                    label: rng.random_range(0..ell),
                    port_u: m,
                    port_v: m,
                });
            }
        }
    } else {
        for c in 0..delta / 2 {
            perm.shuffle(rng);
            for k in 0..v0 {
                edges.push(BaseEdge {
                    u: perm[k],
                    v: perm[(k + 1) % v0],
                    label: rng.random_range(0..ell),
                    port_u: 2 * c,
                    port_v: 2 * c + 1,
                });
            }
        }
    }
    BaseGraph::new(v0, delta, edges)
}

/// One port of a lifted vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Port {
    pub edge: usize,
    pub neighbor: usize,
    pub neighbor_port: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedGraph {
    ell: usize,
    base: BaseGraph,
    ports: Vec<Port>,
}

pub fn lift_graph(base: &BaseGraph, ell: usize) -> Result<LiftedGraph> {
    if ell == 0 {
        return Err(Error::InvalidParameter("lift size must be positive".into()));
    }
    if let Some(e) = base.edges.iter().find(|e| e.label >= ell) {
        return Err(Error::InvalidParameter(format!("label {} outside Z/{ell}", e.label)));
    }
    let delta = base.delta;
    let dummy = Port {
        edge: usize::MAX,
        neighbor: usize::MAX,
        neighbor_port: usize::MAX,
    };
    let mut ports = vec![dummy; base.v0 * ell * delta];
    for (e0, e) in base.edges.iter().enumerate() {
        for i in 0..ell {
            let a = e.u * ell + i;
            let b = e.v * ell + (i + e.label) % ell;
            let edge = e0 * ell + i;
            ports[a * delta + e.port_u] = Port {
                edge,
                neighbor: b,
                neighbor_port: e.port_v,
            };
            ports[b * delta + e.port_v] = Port {
                edge,
                neighbor: a,
                neighbor_port: e.port_u,
            };
        }
    }
    Ok(LiftedGraph {
        ell,
        base: base.clone(),
        ports,
    })
}

impl LiftedGraph {
    #[must_use]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[must_use]
    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    #[must_use]
    pub fn delta(&self) -> usize {
        self.base.delta
    }

    #[must_use]
    pub fn num_vertices(&self) -> usize {
        self.base.v0 * self.ell
    }

    #[must_use]
    pub fn num_edges(&self) -> usize {
        self.base.edges.len() * self.ell
    }

    /// The `Δ` ports of vertex `v`, indexed by port number.
    #[must_use]
    pub fn ports(&self, v: usize) -> &[Port] {
        let d = self.base.delta;
        &self.ports[v * d..(v + 1) * d]
    }

    /// Endpoints `((u, r_u), (v, r_v))` of lifted edge `e`.
    #[must_use]
    pub fn endpoints(&self, e: usize) -> ((usize, usize), (usize, usize)) {
        let (e0, i) = (e / self.ell, e % self.ell);
        let b = &self.base.edges[e0];
        (
            (b.u * self.ell + i, b.port_u),
            (b.v * self.ell + (i + b.label) % self.ell, b.port_v),
        )
    }

    #[must_use]
    pub fn has_self_loops(&self) -> bool {
        self.base.edges.iter().any(|e| e.u == e.v && e.label == 0)
    }

    /// `W_G(S, S)`: ordered pairs of an edge's endpoints both in `S`.
    #[must_use]
    pub fn internal_weight(&self, in_set: &[bool]) -> usize {
        (0..self.num_vertices())
            .filter(|&v| in_set[v])
            .map(|v| self.ports(v).iter().filter(|p| in_set[p.neighbor]).count())
            .sum()
    }

    /// Dense normalized adjacency matrix `W_G / Δ`.
    #[must_use]
    pub fn normalized_adjacency(&self) -> DMatrix<f64> {
        let n = self.num_vertices();
        let d = self.delta() as f64;
        let mut a = DMatrix::zeros(n, n);
        for v in 0..n {
            for p in self.ports(v) {
                a[(v, p.neighbor)] += 1.0 / d;
            }
        }
        a
    }
}

/// Second-largest absolute eigenvalue of `W_G / Δ`, by dense eigensolve.
pub fn spectral_expansion(g: &LiftedGraph) -> Result<f64> {
    let n = g.num_vertices();
    if n > DENSE_SPECTRUM_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "dense eigensolve",
            needed: n.next_power_of_two().trailing_zeros() as usize,
            limit: DENSE_SPECTRUM_LIMIT.trailing_zeros() as usize,
        });
    }
    let eig = SymmetricEigen::new(g.normalized_adjacency());
    Ok(second_largest_abs(eig.eigenvalues.iter().copied()))
}

/// Same quantity as [`spectral_expansion`], computed block by block.
///
/// The adjacency of an abelian lift commutes with the `Z/ℓ` action, so it
/// splits into `ℓ` Hermitian `v0 × v0` blocks, one per character `i -> ω^{ki}`.
#[must_use]
pub fn lift_spectral_expansion(g: &LiftedGraph) -> f64 {
    let (v0, ell) = (g.base.v0, g.ell);
    let d = g.delta() as f64;
    let mut all = Vec::with_capacity(v0 * ell);
    for k in 0..ell {
        let mut a = DMatrix::<Complex64>::zeros(v0, v0);
        for e in &g.base.edges {
            let theta = 2.0 * std::f64::consts::PI * (k * e.label % ell) as f64 / ell as f64;
            let w = Complex64::from_polar(1.0 / d, theta);
            a[(e.u, e.v)] += w;
            a[(e.v, e.u)] += w.conj();
        }
        let eig = SymmetricEigen::new(a);
        all.extend(eig.eigenvalues.iter().copied());
    }
    second_largest_abs(all.into_iter())
}

fn second_largest_abs(eigs: impl Iterator<Item = f64>) -> f64 {
    let mut abs: Vec<f64> = eigs.map(f64::abs).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    abs.get(1).copied().unwrap_or(0.0).min(1.0)
}

/// Parity-check matrix `Z` of the local code, with both `ker Z` and
/// `im Zᵀ` of verified minimum distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerCode {
    z: BitMat,
    rows: Vec<u32>,
    d_kernel: usize,
    d_dual: usize,
}

impl InnerCode {
    /// Wraps a full-rank `Γ × Δ` matrix and computes both distances exhaustively.
    pub fn new(z: BitMat) -> Result<Self> {
        let (gamma, delta) = (z.rows(), z.cols());
        if gamma == 0 || delta > MAX_DELTA || gamma > delta {
            return Err(Error::InvalidParameter(format!(
                "inner code must have 1 <= gamma <= delta <= {MAX_DELTA}, got {gamma}x{delta}"
            )));
        }
        if z.rank() != gamma {
            return Err(Error::InvalidParameter("inner check matrix is not full rank".into()));
        }
        let rows = (0..gamma).map(|g| row_mask(&z, g)).collect();
        let d_kernel = min_span_weight(&z.kernel_basis(), delta).unwrap_or(usize::MAX);
        let dual: Vec<BitVec> = (0..gamma).map(|g| z.row(g)).collect();
        let d_dual = min_span_weight(&dual, delta).unwrap_or(usize::MAX);
        Ok(InnerCode {
            z,
            rows,
            d_kernel,
            d_dual,
        })
    }

    #[must_use]
    pub fn z(&self) -> &BitMat {
        &self.z
    }

    #[must_use]
    pub fn gamma(&self) -> usize {
        self.z.rows()
    }

    #[must_use]
    pub fn delta(&self) -> usize {
        self.z.cols()
    }

    /// Rows of `Z` as `Δ`-bit masks.
    #[must_use]
    pub fn row_masks(&self) -> &[u32] {
        &self.rows
    }

    /// Minimum distance of `ker Z` (`usize::MAX` when the kernel is trivial).
    #[must_use]
    pub fn d_kernel(&self) -> usize {
        self.d_kernel
    }

    /// Minimum distance of `im Zᵀ`.
    #[must_use]
    pub fn d_dual(&self) -> usize {
        self.d_dual
    }

    /// The verified distance floor `min(d(ker Z), d(im Zᵀ))`.
    #[must_use]
    pub fn d_inner(&self) -> usize {
        self.d_kernel.min(self.d_dual)
    }

    /// `Z x` for a `Δ`-bit mask, as a `Γ`-bit mask.
    #[inline]
    #[must_use]
    pub fn syndrome(&self, x: u32) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |s, (g, &r)| s | (((r & x).count_ones() & 1) << g))
    }

    /// `Zᵀ y` for a `Γ`-bit mask, as a `Δ`-bit mask.
    #[inline]
    #[must_use]
    pub fn transpose_apply(&self, y: u32) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .filter(|(g, _)| y >> g & 1 == 1)
            .fold(0, |acc, (_, &r)| acc ^ r)
    }
}

fn row_mask(m: &BitMat, i: usize) -> u32 {
    m.row(i).iter_ones().fold(0, |acc, j| acc | 1 << j)
}

fn hamming_ball(n: usize, radius: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 0..radius.min(n) {
        term *= (n - i) as f64 / (i + 1) as f64;
        sum += term;
    }
    sum
}

/// Whether an `[n, k, d]` binary code can exist by the sphere-packing and Singleton bounds.
fn code_may_exist(n: usize, k: usize, d: usize) -> bool {
    if d <= 1 || k == 0 {
        return true;
    }
    d <= n - k + 1 && hamming_ball(n, (d - 1) / 2) <= 2f64.powi((n - k) as i32)
}

/// Rejection-samples a full-rank `Γ × Δ` matrix whose kernel and row space
/// both have minimum distance at least `d_min`.
pub fn find_inner_code<R: Rng + ?Sized>(
    delta: usize,
    gamma: usize,
    d_min: usize,
    rng: &mut R,
    max_tries: u64,
) -> Result<InnerCode> {
    if gamma == 0 || gamma > delta || delta > MAX_DELTA {
        return Err(Error::InvalidParameter(format!(
            "inner code needs 1 <= gamma <= delta <= {MAX_DELTA}, got gamma={gamma}, delta={delta}"
        )));
    }
    for k in [delta - gamma, gamma] {
        if !code_may_exist(delta, k, d_min) {
            return Err(Error::InnerCodeInfeasible { delta, k, d_min });
        }
    }
    let full = (1u32 << delta) - 1;
    for _ in 0..max_tries {
        let rows: Vec<u32> = (0..gamma).map(|_| rng.next_u32() & full).collect();
        let cols: Vec<u32> = (0..delta)
            .map(|j| rows.iter().enumerate().fold(0, |c, (g, &r)| c | ((r >> j & 1) << g)))
            .collect();
        // Cheap necessary conditions on the kernel distance.
        if d_min >= 2 && cols.contains(&0) {
            continue;
        }
        if d_min >= 3 {
            let mut sorted = cols.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
        }
        let z = BitMat::from_fn(gamma, delta, |g, j| rows[g] >> j & 1 == 1);
        let Ok(code) = InnerCode::new(z) else { continue };
        if code.d_inner() >= d_min {
            return Ok(code);
        }
    }
    Err(Error::InnerCodeNotFound {
        d_min,
        tries: max_tries,
    })
}

/// Ring form of `∂ = (I ⊗ Z) M` over `R_ℓ`.
///
/// Base edge `(u, v, L)` contributes `Z[g][r_u]` at `(u Γ + g, e₀)` and
/// `Z[g][r_v] X^{-L}` at `(v Γ + g, e₀)`.
fn tanner_ring_form(g: &LiftedGraph, inner: &InnerCode) -> Result<RingMatrix> {
    let (ell, gamma) = (g.ell, inner.gamma());
    let base = &g.base;
    let mut m = RingMatrix::zeros(base.v0 * gamma, base.edges.len(), ell);
    for (e0, e) in base.edges.iter().enumerate() {
        let back = RingElement::monomial(ell, (ell - e.label % ell) % ell);
        for r in 0..gamma {
            if inner.z.get(r, e.port_u) {
                m.add_to(e.u * gamma + r, e0, &RingElement::one(ell))?;
            }
            if inner.z.get(r, e.port_v) {
                m.add_to(e.v * gamma + r, e0, &back)?;
            }
        }
    }
    Ok(m)
}

/// `∂ = (I ⊗ Z) M` built entry by entry from the lifted graph.
#[must_use]
pub fn tanner_boundary_direct(g: &LiftedGraph, inner: &InnerCode) -> BitMat {
    let (ell, gamma) = (g.ell, inner.gamma());
    let mut m = BitMat::zeros(g.num_vertices() * gamma, g.num_edges());
    for e in 0..g.num_edges() {
        let ((a, ra), (b, rb)) = g.endpoints(e);
        for (v, r) in [(a, ra), (b, rb)] {
            let (w, i) = (v / ell, v % ell);
            for c in 0..gamma {
                if inner.z.get(c, r) {
                    m.flip((w * gamma + c) * ell + i, e);
                }
            }
        }
    }
    m
}

pub fn build_tanner_complex(g: &LiftedGraph, inner: &InnerCode) -> Result<ChainComplex2> {
    if g.delta() != inner.delta() {
        return Err(Error::DimensionMismatch {
            what: "graph degree vs inner code length",
            expected: inner.delta(),
            found: g.delta(),
        });
    }
    Ok(ChainComplex2::from_ring(tanner_ring_form(g, inner)?))
}

/// A Tanner complex together with the graph data its decoders need.
#[derive(Clone, Debug)]
pub struct TannerCode {
    graph: LiftedGraph,
    inner: InnerCode,
    complex: ChainComplex2,
}

impl TannerCode {
    pub fn new(graph: LiftedGraph, inner: InnerCode) -> Result<Self> {
        if graph.has_self_loops() {
            return Err(Error::InvalidParameter(
                "lifted graph has self-loops; local flips assume distinct endpoints".into(),
            ));
        }
        let complex = build_tanner_complex(&graph, &inner)?;
        Ok(TannerCode { graph, inner, complex })
    }

    /// The length-`ℓ` cycle with local code `Z = [1 1]`, whose complex is
    /// the repetition complex `1 + X`.
    pub fn repetition(ell: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidParameter(format!(
                "repetition length must be >= 2, got {ell}"
            )));
        }
        let base = BaseGraph::new(
            1,
            2,
            vec![BaseEdge {
                u: 0,
                v: 0,
                label: ell - 1,
                port_u: 0,
                port_v: 1,
            }],
        )?;
        let inner = InnerCode::new(BitMat::from_fn(1, 2, |_, _| true))?;
        TannerCode::new(lift_graph(&base, ell)?, inner)
    }

    #[must_use]
    pub fn graph(&self) -> &LiftedGraph {
        &self.graph
    }

    #[must_use]
    pub fn inner(&self) -> &InnerCode {
        &self.inner
    }

    #[must_use]
    pub fn complex(&self) -> &ChainComplex2 {
        &self.complex
    }

    #[must_use]
    pub fn ell(&self) -> usize {
        self.graph.ell
    }

    /// `Γ |V₀|`, the ring rank of `A₀`.
    #[must_use]
    pub fn n0(&self) -> usize {
        self.graph.base.v0 * self.inner.gamma()
    }

    /// `|E₀|`, the ring rank of `A₁`.
    #[must_use]
    pub fn n1(&self) -> usize {
        self.graph.base.edges.len()
    }

    /// Check index of `(vertex, g)`.
    #[inline]
    #[must_use]
    pub fn check_index(&self, v: usize, g: usize) -> usize {
        let ell = self.graph.ell;
        (v / ell * self.inner.gamma() + g) * ell + v % ell
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TannerParams {
    pub v0: usize,
    pub delta: usize,
    pub gamma: usize,
    pub d_min: usize,
    pub ell: usize,
    pub lambda_target: f64,
    pub lift_retries: usize,
    pub inner_max_tries: u64,
}

/// Default base size `max(8, 2⌈log₂ ℓ⌉)`, which is always even.
#[must_use]
pub fn default_v0(ell: usize) -> usize {
    let lg = ell.max(1).next_power_of_two().trailing_zeros() as usize;
    (2 * lg).max(8)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub lambda: f64,
    pub target_met: bool,
    pub attempts: usize,
}

/// Samples the inner code, then lifts until `λ ≤ λ_target` or the retry cap
/// is hit, keeping the best lift seen.
pub fn sample_tanner_code<R: Rng + ?Sized>(p: &TannerParams, rng: &mut R) -> Result<(TannerCode, LiftReport)> {
    let inner = find_inner_code(p.delta, p.gamma, p.d_min, rng, p.inner_max_tries)?;
    let mut best: Option<(f64, LiftedGraph)> = None;
    let mut attempts = 0;
    for _ in 0..p.lift_retries.max(1) {
        attempts += 1;
        let base = random_base_graph(p.v0, p.delta, p.ell, rng)?;
        let g = lift_graph(&base, p.ell)?;
        if g.has_self_loops() {
            continue;
        }
        let lambda = lift_spectral_expansion(&g);
        if best.as_ref().is_none_or(|(b, _)| lambda < *b) {
            best = Some((lambda, g));
        }
        if lambda <= p.lambda_target {
            break;
        }
    }
    let Some((lambda, g)) = best else {
        return Err(Error::InvalidParameter("every sampled lift had self-loops".into()));
    };
    let code = TannerCode::new(g, inner)?;
    Ok((
        code,
        LiftReport {
            lambda,
            target_met: lambda <= p.lambda_target,
            attempts,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::repetition_complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn complete_graph(n: usize) -> BaseGraph {
        let mut next_port = vec![0; n];
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push(BaseEdge {
                    u,
                    v,
                    label: 0,
                    port_u: next_port[u],
                    port_v: next_port[v],
                });
                next_port[u] += 1;
                next_port[v] += 1;
            }
        }
        BaseGraph::new(n, n - 1, edges).unwrap()
    }

    #[test]
    fn complete_graph_spectrum() {
        for delta in [3, 5, 8] {
            let g = lift_graph(&complete_graph(delta + 1), 1).unwrap();
            let lambda = spectral_expansion(&g).unwrap();
            assert!((lambda - 1.0 / delta as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn cycle_spectrum() {
        for n in [5, 7, 12, 31] {
            let g = TannerCode::repetition(n).unwrap();
            let dense = spectral_expansion(g.graph()).unwrap();
            // Even cycles are bipartite, so -1 is an eigenvalue.
            let want = if n % 2 == 0 {
                1.0
            } else {
                (std::f64::consts::PI / n as f64).cos()
            };
            assert!((dense - want).abs() < 1e-9, "n={n}: {dense} vs {want}");
        }
    }

    #[test]
    fn disconnected_lift_has_unit_expansion() {
        let g = lift_graph(&complete_graph(4), 3).unwrap();
        assert!((spectral_expansion(&g).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_edge_lift_is_one_cycle() {
        let base = BaseGraph::new(
            2,
            2,
            vec![
                BaseEdge {
                    u: 0,
                    v: 1,
                    label: 1,
                    port_u: 0,
                    port_v: 0,
                },
                BaseEdge {
                    u: 0,
                    v: 1,
                    label: 0,
                    port_u: 1,
                    port_v: 1,
                },
            ],
        )
        .unwrap();
        let g = lift_graph(&base, 4).unwrap();
        assert_eq!(g.num_vertices(), 8);
        assert_eq!(g.num_edges(), 8);
        // Walk the cycle from vertex 0.
        let (mut prev, mut cur, mut steps) = (usize::MAX, 0, 0);
        loop {
            let next = g.ports(cur).iter().map(|p| p.neighbor).find(|&n| n != prev).unwrap();
            prev = cur;
            cur = next;
            steps += 1;
            if cur == 0 {
                break;
            }
        }
        assert_eq!(steps, 8);
    }

    #[test]
    fn random_base_graphs_are_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (v0, delta) in [(2, 2), (8, 14), (5, 4), (1, 2), (6, 3)] {
            let g = random_base_graph(v0, delta, 7, &mut rng).unwrap();
            let mut deg = vec![0; v0];
            for e in &g.edges {
                deg[e.u] += 1;
                deg[e.v] += 1;
            }
            assert!(deg.iter().all(|&d| d == delta));
        }
        assert!(random_base_graph(5, 3, 4, &mut rng).is_err());
        let a = random_base_graph(8, 6, 16, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_base_graph(8, 6, 16, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn character_blocks_match_dense_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (v0, delta, ell) in [(4, 3, 5), (6, 4, 8), (3, 4, 6), (8, 6, 16)] {
            let g = lift_graph(&random_base_graph(v0, delta, ell, &mut rng).unwrap(), ell).unwrap();
            let dense = spectral_expansion(&g).unwrap();
            let blocks = lift_spectral_expansion(&g);
            assert!((dense - blocks).abs() < 1e-9, "{dense} vs {blocks}");
        }
    }

    #[test]
    fn expander_mixing_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = lift_graph(&random_base_graph(8, 6, 32, &mut rng).unwrap(), 32).unwrap();
        let lambda = spectral_expansion(&g).unwrap();
        let n = g.num_vertices();
        for _ in 0..100 {
            let p = rng.random_range(0.05..0.6);
            let s: Vec<bool> = (0..n).map(|_| rng.random_bool(p)).collect();
            let size = s.iter().filter(|&&b| b).count() as f64;
            let bound = (lambda + size / n as f64) * 6.0 * size;
            assert!(g.internal_weight(&s) as f64 <= bound + 1e-9);
        }
    }

    #[test]
    fn inner_code_examples() {
        let z = InnerCode::new(BitMat::from_fn(1, 4, |_, _| true)).unwrap();
        assert_eq!((z.d_kernel(), z.d_dual()), (2, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = find_inner_code(4, 1, 2, &mut rng, 1000).unwrap();
        assert!(c.d_inner() >= 2);
        let c = find_inner_code(14, 4, 3, &mut rng, 1_000_000).unwrap();
        assert!(c.d_kernel() >= 3 && c.d_dual() >= 3);
        assert!(matches!(
            find_inner_code(14, 3, 3, &mut rng, 10),
            Err(Error::InnerCodeInfeasible { k: 11, .. })
        ));
    }

    #[test]
    fn syndrome_masks_match_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = find_inner_code(10, 3, 2, &mut rng, 10_000).unwrap();
        for x in [0u32, 1, 0b1011, 0x3ff, 0x155] {
            let v = BitVec::from_support(10, (0..10).filter(|j| x >> j & 1 == 1));
            let s = c.z().mul_vec(&v);
            assert_eq!(c.syndrome(x), s.iter_ones().fold(0, |a, g| a | 1 << g));
        }
        for y in 0u32..8 {
            let v = BitVec::from_support(3, (0..3).filter(|g| y >> g & 1 == 1));
            let t = c.z().transpose().mul_vec(&v);
            assert_eq!(c.transpose_apply(y), t.iter_ones().fold(0, |a, j| a | 1 << j));
        }
    }

    #[test]
    fn ring_form_matches_direct_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (v0, delta, gamma, ell) in [(4, 6, 2, 5), (6, 8, 3, 4), (3, 4, 1, 7)] {
            let inner = find_inner_code(delta, gamma, 2, &mut rng, 100_000).unwrap();
            let g = lift_graph(&random_base_graph(v0, delta, ell, &mut rng).unwrap(), ell).unwrap();
            let c = build_tanner_complex(&g, &inner).unwrap();
            assert_eq!(c.boundary(), &tanner_boundary_direct(&g, &inner));
            assert!(c.locality() <= delta);
            let r = c.ring().unwrap();
            assert_eq!((r.rows(), r.cols()), (gamma * v0, delta * v0 / 2));
        }
    }

    #[test]
    fn repetition_tanner_code_is_repetition_complex() {
        for ell in [2, 3, 8] {
            let t = TannerCode::repetition(ell).unwrap();
            assert_eq!(t.complex(), &repetition_complex(ell).unwrap());
        }
    }

    #[test]
    fn default_base_size() {
        assert_eq!(default_v0(32), 10);
        assert_eq!(default_v0(64), 12);
        assert_eq!(default_v0(4), 8);
    }
}
