//! JSON code bundles: the construction data plus ring forms for auditing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::{BitMat, BitVec};
use crate::product::{ProductCode, ProductKind};
use crate::ring::{RingElement, RingMatrix};
use crate::tanner::{lift_graph, BaseGraph, InnerCode, LiftReport, TannerCode};

pub const FORMAT_VERSION: u32 = 1;

/// A ring matrix with entries written as exponent lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingMatrixDoc {
    pub modulus: usize,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Vec<usize>>>,
}

impl From<&RingMatrix> for RingMatrixDoc {
    fn from(m: &RingMatrix) -> Self {
        let entries = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j).exponents()).collect())
            .collect();
        RingMatrixDoc {
            modulus: m.ell(),
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }
}

impl RingMatrixDoc {
    pub fn to_matrix(&self) -> Result<RingMatrix> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::Format("ring matrix shape does not match its entries".into()));
        }
        let mut flat = Vec::with_capacity(self.rows * self.cols);
        for row in &self.entries {
            for exps in row {
                if exps.iter().any(|&e| e >= self.modulus) || exps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Format(
                        "exponent lists must be strictly increasing and below the modulus".into(),
                    ));
                }
                flat.push(RingElement::from_exponents(self.modulus, exps.iter().copied()));
            }
        }
        RingMatrix::from_entries(self.rows, self.cols, self.modulus, flat)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TannerDoc {
    pub lift: usize,
    pub base_graph: BaseGraph,
    /// Rows of the inner parity-check matrix as bit strings.
    pub inner_code: Vec<String>,
    pub lambda: f64,
    pub lambda_target_met: bool,
    pub lift_attempts: usize,
    pub boundary: RingMatrixDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeBundle {
    pub format_version: u32,
    pub kind: ProductKind,
    pub ell: usize,
    pub tanner: TannerDoc,
    pub d2: RingMatrixDoc,
    pub d1: RingMatrixDoc,
}

impl CodeBundle {
    pub fn from_code(code: &ProductCode, lift: &LiftReport) -> Result<Self> {
        let t = code.tanner();
        let ring = t.complex().ring().expect("tanner complexes carry a ring form");
        let z = t.inner().z();
        let (d2, d1) = code.ring_forms()?;
        Ok(CodeBundle {
            format_version: FORMAT_VERSION,
            kind: code.kind(),
            ell: code.ell(),
            tanner: TannerDoc {
                lift: t.ell(),
                base_graph: t.graph().base().clone(),
                inner_code: (0..z.rows()).map(|i| z.row(i).to_bitstring()).collect(),
                lambda: lift.lambda,
                lambda_target_met: lift.target_met,
                lift_attempts: lift.attempts,
                boundary: ring.into(),
            },
            d2: (&d2).into(),
            d1: (&d1).into(),
        })
    }

    /// Rebuilds the code and checks every stored ring form against it.
    pub fn to_code(&self) -> Result<ProductCode> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported bundle format version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let doc = &self.tanner;
        let g = &doc.base_graph;
        let base = BaseGraph::new(g.v0, g.delta, g.edges.clone())?;
        let rows = doc
            .inner_code
            .iter()
            .map(|r| BitVec::parse(r))
            .collect::<Result<Vec<_>>>()?;
        let inner = InnerCode::new(BitMat::from_rows(g.delta, &rows)?)?;
        let tanner = TannerCode::new(lift_graph(&base, doc.lift)?, inner)?;
        let ring = tanner.complex().ring().expect("tanner complexes carry a ring form");
        if doc.boundary.to_matrix()? != *ring {
            return Err(Error::Format(
                "stored Tanner boundary does not match the rebuilt graph".into(),
            ));
        }
        let code = ProductCode::new(self.kind, tanner, self.ell)?;
        let (d2, d1) = code.ring_forms()?;
        if self.d2.to_matrix()? != d2 || self.d1.to_matrix()? != d1 {
            return Err(Error::Format(
                "stored product boundaries do not match the rebuilt code".into(),
            ));
        }
        Ok(code)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    #[must_use]
    pub fn lift_report(&self) -> LiftReport {
        LiftReport {
            lambda: self.tanner.lambda,
            target_met: self.tanner.lambda_target_met,
            attempts: self.tanner.lift_attempts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{sample_tanner_code, TannerParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(ell: usize) -> TannerParams {
        TannerParams {
            v0: 4,
            delta: 6,
            gamma: 2,
            d_min: 2,
            ell,
            lambda_target: 0.9,
            lift_retries: 3,
            inner_max_tries: 100_000,
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        for kind in [ProductKind::Hgp, ProductKind::Lp] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let (t, report) = sample_tanner_code(&params(8), &mut rng).unwrap();
            let code = ProductCode::new(kind, t, 8).unwrap();
            let bundle = CodeBundle::from_code(&code, &report).unwrap();
            let json = bundle.to_json().unwrap();
            let back = CodeBundle::from_json(&json).unwrap();
            assert_eq!(back, bundle);
            assert_eq!(back.to_json().unwrap(), json);
            let rebuilt = back.to_code().unwrap();
            assert_eq!(rebuilt.ring_forms().unwrap(), code.ring_forms().unwrap());
        }
    }

    #[test]
    fn tampered_bundles_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (t, report) = sample_tanner_code(&params(4), &mut rng).unwrap();
        let code = ProductCode::new(ProductKind::Lp, t, 4).unwrap();
        let bundle = CodeBundle::from_code(&code, &report).unwrap();

        let mut bad = bundle.clone();
        bad.d1.entries[0][0] = vec![3, 1];
        assert!(matches!(bad.to_code(), Err(Error::Format(_))));

        let mut bad = bundle.clone();
        bad.tanner.base_graph.edges[0].label = (bad.tanner.base_graph.edges[0].label + 1) % 4;
        assert!(bad.to_code().is_err());

        let mut bad = bundle;
        bad.format_version = 99;
        assert!(matches!(bad.to_code(), Err(Error::Format(_))));
    }
}
