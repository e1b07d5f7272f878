//! Local flip decoders for Tanner complexes with a noisy syndrome.
//!
//! Both decoders keep a work list of vertices whose neighbourhood changed and
//! only ever apply strictly improving single-vertex updates, so the number of
//! updates is bounded by the initial potential.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::f2::BitVec;
use crate::tanner::{InnerCode, TannerCode};

/// A decoder `D : A₀ -> A₁` with `|D(a₀ + ∂a₁) - a₁| ≤ γ |a₀|` inside its budget.
pub trait NoisySyndromeDecoder {
    fn syndrome_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn gamma(&self) -> usize;
    fn decode(&self, s: &BitVec) -> Result<BitVec> {
        self.decode_with_stats(s).map(|(x, _)| x)
    }
    fn decode_with_stats(&self, s: &BitVec) -> Result<(BitVec, FlipStats)>;
}

/// Work done by one decode call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipStats {
    pub visits: usize,
    pub flips: usize,
    pub initial_potential: usize,
    pub final_potential: usize,
}

/// Minimum-weight preimages of every local syndrome under `Z`.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    leaders: Vec<u32>,
    kernel: Vec<u32>,
    transpose: Vec<u32>,
}

impl SyndromeTable {
    #[must_use]
    pub fn new(inner: &InnerCode) -> Self {
        let (gamma, delta) = (inner.gamma(), inner.delta());
        let mut leaders = vec![u32::MAX; 1 << gamma];
        let mut kernel = Vec::with_capacity(1 << (delta - gamma));
        for x in 0u32..1 << delta {
            let s = inner.syndrome(x) as usize;
            let cur = leaders[s];
            if cur == u32::MAX || x.count_ones() < cur.count_ones() {
                leaders[s] = x;
            }
            if s == 0 {
                kernel.push(x);
            }
        }
        let transpose = (0u32..1 << gamma).map(|y| inner.transpose_apply(y)).collect();
        SyndromeTable {
            leaders,
            kernel,
            transpose,
        }
    }

    /// Lightest `x` with `Z x = s`, smallest mask on ties.
    #[must_use]
    pub fn leader(&self, s: u32) -> u32 {
        self.leaders[s as usize]
    }

    #[must_use]
    pub fn kernel_words(&self) -> &[u32] {
        &self.kernel
    }

    /// `Zᵀ y` for every `y ∈ F₂^Γ`.
    #[must_use]
    pub fn transpose_table(&self) -> &[u32] {
        &self.transpose
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBudgets {
    /// Syndrome-noise budget for the chain decoder.
    pub e0: usize,
    /// Edge-error budget for the chain decoder.
    pub e1: usize,
    /// Syndrome-noise budget for the cochain decoder.
    pub e1_co: usize,
    /// Vertex-error budget for the cochain decoder.
    pub e0_co: usize,
}

#[must_use]
pub fn error_budgets(num_vertices: usize, delta: usize, lambda: f64) -> ErrorBudgets {
    let lv = lambda.max(0.0) * num_vertices as f64;
    let d1 = (delta + 1) as f64;
    let floor = |x: f64| x.floor() as usize;
    ErrorBudgets {
        e0: floor(lv / (2.0 * d1)),
        e1: floor(lv / (4.0 * d1)),
        e1_co: floor(lv / 2.0),
        e0_co: floor(lv / (2.0 * d1)),
    }
}

#[must_use]
pub fn code_error_budgets(code: &TannerCode, lambda: f64) -> ErrorBudgets {
    error_budgets(code.graph().num_vertices(), code.graph().delta(), lambda)
}

fn local_syndrome(code: &TannerCode, s: &BitVec, v: usize) -> u32 {
    (0..code.inner().gamma()).fold(0, |acc, g| acc | u32::from(s.get(code.check_index(v, g))) << g)
}

struct WorkList {
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

impl WorkList {
    fn empty(n: usize) -> Self {
        WorkList {
            queue: VecDeque::new(),
            queued: vec![false; n],
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let v = self.queue.pop_front()?;
        self.queued[v] = false;
        Some(v)
    }

    fn push(&mut self, v: usize) {
        if !std::mem::replace(&mut self.queued[v], true) {
            self.queue.push_back(v);
        }
    }
}

/// Decoder for the chain complex `A₁ -> A₀` (edges to checks).
#[derive(Clone, Debug)]
pub struct ChainFlipDecoder {
    code: TannerCode,
    table: SyndromeTable,
}

impl ChainFlipDecoder {
    #[must_use]
    pub fn new(code: TannerCode) -> Self {
        let table = SyndromeTable::new(code.inner());
        ChainFlipDecoder { code, table }
    }

    #[must_use]
    pub fn code(&self) -> &TannerCode {
        &self.code
    }

    #[must_use]
    pub fn table(&self) -> &SyndromeTable {
        &self.table
    }

    /// Mismatch mask of `x_v` against the neighbouring views.
    fn mismatch(&self, x: &[u32], v: usize) -> u32 {
        let xv = x[v];
        self.code.graph().ports(v).iter().enumerate().fold(0, |m, (r, p)| {
            let theirs = x[p.neighbor] >> p.neighbor_port & 1;
            m | ((xv >> r & 1) ^ theirs) << r
        })
    }

    /// `|m(x)|`, given every vertex with a nonzero view or a mismatched edge.
    fn potential(&self, x: &[u32], support: &[usize]) -> usize {
        let mut seen = std::collections::HashSet::new();
        for &v in support {
            let m = self.mismatch(x, v);
            for (r, p) in self.code.graph().ports(v).iter().enumerate() {
                if m >> r & 1 == 1 {
                    seen.insert(p.edge);
                }
            }
        }
        seen.len()
    }
}

impl NoisySyndromeDecoder for ChainFlipDecoder {
    fn syndrome_len(&self) -> usize {
        self.code.complex().n0()
    }

    fn output_len(&self) -> usize {
        self.code.complex().n1()
    }

    fn gamma(&self) -> usize {
        2 * self.code.graph().delta()
    }

    fn decode_with_stats(&self, s: &BitVec) -> Result<(BitVec, FlipStats)> {
        check_dim("chain decoder syndrome", self.syndrome_len(), s.len())?;
        let g = self.code.graph();
        let n = g.num_vertices();
        let ell = g.ell();
        let gamma = self.code.inner().gamma();
        let mut x = vec![0u32; n];
        let mut work = WorkList::empty(n);
        // Only vertices touching a nonzero initial view can have a mismatch.
        for pos in s.iter_ones() {
            let v = pos / (gamma * ell) * ell + pos % ell;
            if x[v] != 0 {
                continue;
            }
            x[v] = self.table.leader(local_syndrome(&self.code, s, v));
            work.push(v);
            for p in g.ports(v) {
                work.push(p.neighbor);
            }
        }
        let touched: Vec<usize> = work.queue.iter().copied().collect();
        let mut stats = FlipStats {
            initial_potential: self.potential(&x, &touched),
            ..FlipStats::default()
        };
        while let Some(v) = work.pop() {
            stats.visits += 1;
            let m = self.mismatch(&x, v);
            if m == 0 {
                continue;
            }
            // The best kernel update y minimises |m + y|: the coset leader of m.
            let lead = self.table.leader(self.code.inner().syndrome(m));
            if lead.count_ones() >= m.count_ones() {
                continue;
            }
            let change = m ^ lead;
            x[v] ^= change;
            stats.flips += 1;
            for (r, p) in g.ports(v).iter().enumerate() {
                if change >> r & 1 == 1 {
                    work.push(p.neighbor);
                }
            }
        }
        let mut out = BitVec::zeros(g.num_edges());
        let mut live = Vec::new();
        for (v, &xv) in x.iter().enumerate() {
            if xv == 0 {
                continue;
            }
            live.push(v);
            for (r, p) in g.ports(v).iter().enumerate() {
                if xv >> r & 1 == 1 && x[p.neighbor] >> p.neighbor_port & 1 == 1 {
                    out.set(p.edge, true);
                }
            }
        }
        stats.final_potential = self.potential(&x, &live);
        Ok((out, stats))
    }
}

/// Decoder for the cochain complex `A⁰ -> A¹` (checks to edges).
#[derive(Clone, Debug)]
pub struct CochainFlipDecoder {
    code: TannerCode,
    table: SyndromeTable,
}

impl CochainFlipDecoder {
    #[must_use]
    pub fn new(code: TannerCode) -> Self {
        let table = SyndromeTable::new(code.inner());
        CochainFlipDecoder { code, table }
    }

    #[must_use]
    pub fn code(&self) -> &TannerCode {
        &self.code
    }
}

impl NoisySyndromeDecoder for CochainFlipDecoder {
    fn syndrome_len(&self) -> usize {
        self.code.complex().n1()
    }

    fn output_len(&self) -> usize {
        self.code.complex().n0()
    }

    fn gamma(&self) -> usize {
        4 * self.code.graph().delta()
    }

    fn decode_with_stats(&self, s: &BitVec) -> Result<(BitVec, FlipStats)> {
        check_dim("cochain decoder syndrome", self.syndrome_len(), s.len())?;
        let g = self.code.graph();
        let n = g.num_vertices();
        let gamma = self.code.inner().gamma();
        let zt = self.table.transpose_table();
        let mut residual = s.clone();
        let mut x = vec![0u32; n];
        let mut stats = FlipStats {
            initial_potential: s.weight(),
            ..FlipStats::default()
        };
        let mut work = WorkList::empty(n);
        for e in s.iter_ones() {
            let ((a, _), (b, _)) = g.endpoints(e);
            work.push(a);
            work.push(b);
        }
        while let Some(v) = work.pop() {
            stats.visits += 1;
            let ports = g.ports(v);
            let rho = ports
                .iter()
                .enumerate()
                .fold(0u32, |acc, (r, p)| acc | u32::from(residual.get(p.edge)) << r);
            if rho == 0 {
                continue;
            }
            let mut best = (rho.count_ones(), 0usize);
            for (y, &t) in zt.iter().enumerate().skip(1) {
                let w = (rho ^ t).count_ones();
                if w < best.0 {
                    best = (w, y);
                }
            }
            if best.1 == 0 {
                continue;
            }
            let change = zt[best.1];
            x[v] ^= best.1 as u32;
            stats.flips += 1;
            for (r, p) in ports.iter().enumerate() {
                if change >> r & 1 == 1 {
                    residual.flip(p.edge);
                    work.push(p.neighbor);
                }
            }
        }
        let mut out = BitVec::zeros(n * gamma);
        for (v, &xv) in x.iter().enumerate() {
            for c in 0..gamma {
                if xv >> c & 1 == 1 {
                    out.set(self.code.check_index(v, c), true);
                }
            }
        }
        stats.final_potential = residual.weight();
        Ok((out, stats))
    }
}
