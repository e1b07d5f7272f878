//! Experiment configuration, Monte Carlo sweeps, and report files.
//!
//! A sweep builds the code from the config seed, then runs one trial per
//! `(side, weight, index)` plus one per replay case. Trial `i` draws from the
//! ChaCha stream `i + 1` of the config seed, so records do not depend on
//! scheduling. Coset verdicts come from the structured oracle and every
//! success stores its stabilizer witness.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::CodeBundle;
use crate::complex::{distance_oracle, Distance};
use crate::error::{Error, Result};
use crate::f2::BitVec;
use crate::flip::{code_error_budgets, ErrorBudgets};
use crate::product::{
    hgp_repetitions, lp_repetitions, theoretical_radius, CssSide, Method, ProductCode, ProductKind, RadiusInputs,
    RadiusReport, Status,
};
use crate::tanner::{default_v0, sample_tanner_code, LiftReport, TannerCode, TannerParams};

/// Environment variable that overrides the config seed.
pub const SEED_ENV: &str = "QCLDPC_SEED";

/// Largest `n` for which `params` computes `k` from dense ranks.
pub const DENSE_RANK_LIMIT: usize = 20_000;

/// Largest `n` for which `params` attempts the distance oracle.
pub const ORACLE_N_LIMIT: usize = 2_048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    /// Random lifted Tanner code.
    Tanner,
    /// The length-`lift` repetition code; with `mode = hgp` this is the toric code.
    Repetition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderChoice {
    Deterministic,
    Randomized,
    Weak,
    Amplified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: ProductKind,
    pub factor: FactorKind,
    /// Repetition length `ℓ`.
    pub ell: usize,
    /// Lift size of the Tanner graph; defaults to `ℓ` and must equal it for `lp`.
    pub lift: Option<usize>,
    pub v0: Option<usize>,
    pub delta: usize,
    pub gamma_inner: usize,
    pub d_min: usize,
    pub lambda_target: f64,
    pub lift_retries: usize,
    pub inner_max_tries: u64,
    pub eps: f64,
    pub failure_delta: f64,
    /// Defaults to `deterministic` for `hgp` and `amplified` for `lp`.
    pub decoder: Option<DecoderChoice>,
    /// Defaults per side to `0..=` the admissible radius (`0..=2` when it is 0).
    pub error_weights: Option<Vec<usize>>,
    pub sides: Vec<CssSide>,
    pub trials: usize,
    pub seed: u64,
    pub gate_coset: bool,
    pub replay: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 means one per available core.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: ProductKind::Hgp,
            factor: FactorKind::Tanner,
            ell: 32,
            lift: None,
            v0: None,
            delta: 14,
            gamma_inner: 4,
            d_min: 3,
            lambda_target: 0.65,
            lift_retries: 20,
            inner_max_tries: 1_000_000,
            eps: 0.5,
            failure_delta: 1e-3,
            decoder: None,
            error_weights: None,
            sides: vec![CssSide::Z, CssSide::X],
            trials: 100,
            seed: 1,
            gate_coset: true,
            replay: None,
            out_dir: None,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Applies `QCLDPC_SEED` if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(())
    }

    #[must_use]
    pub fn lift(&self) -> usize {
        self.lift.unwrap_or(self.ell)
    }

    #[must_use]
    pub fn decoder(&self) -> DecoderChoice {
        self.decoder.unwrap_or(match self.mode {
            ProductKind::Hgp => DecoderChoice::Deterministic,
            ProductKind::Lp => DecoderChoice::Amplified,
        })
    }

    pub fn method(&self) -> Result<Method> {
        Ok(match (self.mode, self.decoder()) {
            (ProductKind::Hgp, DecoderChoice::Deterministic) => Method::HgpDeterministic,
            (ProductKind::Hgp, DecoderChoice::Randomized) => Method::HgpRandomized {
                delta: self.failure_delta,
            },
            (ProductKind::Lp, DecoderChoice::Weak) => Method::LpWeak,
            (ProductKind::Lp, DecoderChoice::Amplified) => Method::LpAmplified {
                eps: self.eps,
                delta: self.failure_delta,
            },
            (mode, d) => {
                return Err(Error::InvalidParameter(format!(
                    "decoder {d:?} does not apply to mode {mode:?}"
                )));
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.ell < 2 {
            return bad(format!("ell must be >= 2, got {}", self.ell));
        }
        if self.mode == ProductKind::Lp {
            if !self.ell.is_power_of_two() {
                return bad(format!("lp mode needs ell a power of two, got {}", self.ell));
            }
            if self.lift() != self.ell {
                return bad(format!(
                    "lp mode needs lift = ell, got lift {} and ell {}",
                    self.lift(),
                    self.ell
                ));
            }
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.sides.is_empty() {
            return bad("at least one side is required".into());
        }
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return bad(format!("eps must lie in (0, 1/2], got {}", self.eps));
        }
        if !(self.failure_delta > 0.0 && self.failure_delta < 1.0) {
            return bad(format!("failure_delta must lie in (0, 1), got {}", self.failure_delta));
        }
        self.method()?;
        Ok(())
    }

    fn tanner_params(&self) -> TannerParams {
        TannerParams {
            v0: self.v0.unwrap_or_else(|| default_v0(self.lift())),
            delta: self.delta,
            gamma: self.gamma_inner,
            d_min: self.d_min,
            ell: self.lift(),
            lambda_target: self.lambda_target,
            lift_retries: self.lift_retries,
            inner_max_tries: self.inner_max_tries,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltCode {
    pub code: ProductCode,
    pub bundle: CodeBundle,
}

impl BuiltCode {
    pub fn from_bundle(bundle: CodeBundle) -> Result<Self> {
        let code = bundle.to_code().map_err(|e| e.at("load bundle"))?;
        Ok(BuiltCode { code, bundle })
    }

    #[must_use]
    pub fn lift_report(&self) -> LiftReport {
        self.bundle.lift_report()
    }
}

/// Builds the Tanner factor and the product from the config seed.
pub fn build_code(cfg: &ExperimentConfig) -> Result<BuiltCode> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (tanner, report) = match cfg.factor {
        FactorKind::Tanner => sample_tanner_code(&cfg.tanner_params(), &mut rng).map_err(|e| e.at("tanner code"))?,
        FactorKind::Repetition => {
            let t = TannerCode::repetition(cfg.lift()).map_err(|e| e.at("repetition factor"))?;
            let lambda = crate::tanner::lift_spectral_expansion(t.graph());
            let report = LiftReport {
                lambda,
                target_met: lambda <= cfg.lambda_target,
                attempts: 1,
            };
            (t, report)
        }
    };
    let code = ProductCode::new(cfg.mode, tanner, cfg.ell).map_err(|e| e.at("product code"))?;
    let bundle = CodeBundle::from_code(&code, &report).map_err(|e| e.at("bundle"))?;
    Ok(BuiltCode { code, bundle })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub side: CssSide,
    pub gamma: usize,
    /// Syndrome-noise budget of the factor decoder on this side.
    pub noise_budget: usize,
    /// Error budget of the factor decoder on this side.
    pub error_budget: usize,
    pub admissible_radius: usize,
    /// `(w+2)γ+1` for the hypergraph product.
    pub weight_bound_factor: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub mode: ProductKind,
    pub ell: usize,
    pub lift: usize,
    pub v0: usize,
    pub delta: usize,
    pub gamma_inner: usize,
    pub n: usize,
    pub k: Option<usize>,
    pub factor_bits: usize,
    pub factor_checks: usize,
    pub factor_locality: usize,
    pub lambda: f64,
    pub lambda_target_met: bool,
    pub lift_attempts: usize,
    /// Whether `λ < d_min / (16Δ)`, the regime the flip-decoder proofs need.
    pub proven_regime: bool,
    pub budgets: ErrorBudgets,
    pub sides: Vec<SideReport>,
    pub theorem: RadiusReport,
    pub distance: Option<usize>,
    pub distance_status: String,
    /// `K` for the amplified or randomized decoders.
    pub repetitions: Option<usize>,
    /// `(1-ε)^{lg ℓ}` for the weak lifted-product decoder.
    pub weak_success_floor: Option<f64>,
}

impl ParamsReport {
    #[must_use]
    pub fn side(&self, side: CssSide) -> &SideReport {
        self.sides
            .iter()
            .find(|s| s.side == side)
            .expect("both sides are reported")
    }
}

/// Budgets, radii, and (when feasible) `k` and the oracle distance.
pub fn params_report(cfg: &ExperimentConfig, built: &BuiltCode) -> Result<ParamsReport> {
    let code = &built.code;
    let t = code.tanner();
    let lift = built.lift_report();
    let budgets = code_error_budgets(t, lift.lambda);
    let w = t.complex().locality();
    let kind = code.kind();
    let admissible = |noise: usize, error: usize| match kind {
        ProductKind::Hgp => noise.min(error).min(code.ell() / 2),
        ProductKind::Lp => (noise / 2).min(error / 2),
    };
    let mk_side = |side: CssSide, noise: usize, error: usize| {
        let gamma = code.side(side).gamma();
        SideReport {
            side,
            gamma,
            noise_budget: noise,
            error_budget: error,
            admissible_radius: admissible(noise, error),
            weight_bound_factor: (kind == ProductKind::Hgp).then_some((w + 2) * gamma + 1),
        }
    };
    let sides = vec![
        mk_side(CssSide::Z, budgets.e0, budgets.e1),
        mk_side(CssSide::X, budgets.e1_co, budgets.e0_co),
    ];

    let n = code.n();
    let (k, distance, distance_status) = if n <= DENSE_RANK_LIMIT {
        let dense = code.dense_complex()?;
        let k = dense.k();
        if n <= ORACLE_N_LIMIT {
            match distance_oracle(&dense) {
                Ok(r) => match r.distance() {
                    Distance::Finite(d) => (Some(k), Some(d), "exact".to_string()),
                    Distance::NoLogical => (Some(k), None, "no_logical".to_string()),
                },
                Err(Error::BudgetExceeded { .. }) => (Some(k), None, "budget_exceeded".to_string()),
                Err(e) => return Err(e),
            }
        } else {
            (Some(k), None, "skipped".to_string())
        }
    } else if kind == ProductKind::Hgp {
        // Künneth with the repetition complex: k = dim ker ∂ + dim coker ∂.
        let b = t.complex().boundary();
        let r = b.rank();
        (Some(b.rows() + b.cols() - 2 * r), None, "skipped".to_string())
    } else {
        (None, None, "skipped".to_string())
    };

    let theorem = theoretical_radius(
        kind,
        &RadiusInputs {
            e0: budgets.e0.min(budgets.e1_co),
            e1: budgets.e1.min(budgets.e0_co),
            gamma: code.side(CssSide::X).gamma().max(code.side(CssSide::Z).gamma()),
            w,
            ell: code.ell(),
            eps: cfg.eps,
            distance,
        },
    );
    let repetitions = match cfg.method()? {
        Method::HgpRandomized { delta } => Some(hgp_repetitions(delta)?),
        Method::LpAmplified { eps, delta } => Some(lp_repetitions(code.ell(), eps, delta)?),
        _ => None,
    };
    let weak_success_floor =
        (kind == ProductKind::Lp).then(|| (1.0 - cfg.eps).powi(code.ell().trailing_zeros() as i32));
    let base = t.graph().base();
    Ok(ParamsReport {
        mode: kind,
        ell: code.ell(),
        lift: t.ell(),
        v0: base.v0,
        delta: base.delta,
        gamma_inner: t.inner().gamma(),
        n,
        k,
        factor_bits: t.complex().n1(),
        factor_checks: t.complex().n0(),
        factor_locality: w,
        lambda: lift.lambda,
        lambda_target_met: lift.target_met,
        lift_attempts: lift.attempts,
        proven_regime: lift.lambda < t.inner().d_inner() as f64 / (16.0 * base.delta as f64),
        budgets,
        sides,
        theorem,
        distance,
        distance_status,
        repetitions,
        weak_success_floor,
    })
}

/// Uniformly random support of exactly `weight` out of `n`.
pub fn sample_adversarial_error<R: Rng + ?Sized>(n: usize, weight: usize, rng: &mut R) -> Result<BitVec> {
    if weight > n {
        return Err(Error::InvalidParameter(format!(
            "error weight {weight} exceeds length {n}"
        )));
    }
    Ok(BitVec::from_support(n, sample(rng, n, weight)))
}

/// `weight` errors in distinct blocks, all in storage column `column`.
pub fn sample_column_error<R: Rng + ?Sized>(
    blocks: usize,
    ell: usize,
    column: usize,
    weight: usize,
    rng: &mut R,
) -> Result<BitVec> {
    if weight > blocks {
        return Err(Error::InvalidParameter(format!(
            "error weight {weight} exceeds block count {blocks}"
        )));
    }
    let support = sample(rng, blocks, weight).into_iter().map(|h| h * ell + column % ell);
    Ok(BitVec::from_support(blocks * ell, support))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayCase {
    pub side: CssSide,
    pub error: Vec<usize>,
}

/// Reads replay cases, one JSON object per line.
pub fn read_replay(path: &Path) -> Result<Vec<ReplayCase>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialSource {
    Uniform,
    Replay,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub side: CssSide,
    pub source: TrialSource,
    pub error_weight: usize,
    pub error: Vec<usize>,
    /// Seed handed to the decoder.
    pub seed: u64,
    pub status: Status,
    pub output_weight: usize,
    pub runs: usize,
    pub successful_runs: usize,
    pub syndrome_ok: bool,
    pub weight_bound_ok: Option<bool>,
    /// Present iff `status` is ok.
    pub coset: Option<bool>,
    /// Support of `w` with `∂₂ w = c + ĉ` (Z side) or `∂₁ᵀ w = c + ĉ` (X side).
    pub witness: Option<Vec<usize>>,
    pub within_radius: bool,
    pub gate_failure: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub trial: usize,
    pub sample_ns: u64,
    pub decode_ns: u64,
    pub verify_ns: u64,
}

#[derive(Clone, Debug)]
struct TrialSpec {
    side: CssSide,
    weight: usize,
    error: Option<BitVec>,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn elapsed_ns(t: Instant) -> u64 {
    u64::try_from(t.elapsed().as_nanos()).unwrap_or(u64::MAX)
}

/// Samples (or takes) the error, decodes its syndrome, and checks the outcome.
pub fn run_trial(
    cfg: &ExperimentConfig,
    code: &ProductCode,
    params: &ParamsReport,
    trial: usize,
    side: CssSide,
    error: Option<&BitVec>,
    weight: usize,
) -> Result<(TrialRecord, TrialTiming)> {
    let method = cfg.method()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let t0 = Instant::now();
    let (c, source) = match error {
        Some(c) => (c.clone(), TrialSource::Replay),
        None => (
            sample_adversarial_error(code.n(), weight, &mut rng)?,
            TrialSource::Uniform,
        ),
    };
    let sample_ns = elapsed_ns(t0);
    let seed = rng.next_u64();
    let s = code.syndrome(side, &c)?;

    let t1 = Instant::now();
    let out = code.decode(side, &s, method, seed)?;
    let decode_ns = elapsed_ns(t1);

    let t2 = Instant::now();
    let report = params.side(side);
    let within_radius = c.weight() <= report.admissible_radius;
    let ok = out.is_ok();
    let syndrome_ok = !ok || code.syndrome(side, &out.estimate)? == s;
    let weight_bound_ok = match (ok, report.weight_bound_factor) {
        (true, Some(f)) => Some(out.weight <= f * c.weight()),
        _ => None,
    };
    let (coset, witness) = if ok {
        match code.coset_witness(side, &c, &out.estimate)? {
            Some(w) => {
                let verified = code.verify_witness(side, &c, &out.estimate, &w)?;
                (Some(verified), verified.then(|| w.support()))
            }
            None => (Some(false), None),
        }
    } else {
        (None, None)
    };
    let verify_ns = elapsed_ns(t2);

    let gate_failure = if !syndrome_ok {
        Some("syndrome mismatch".to_string())
    } else if within_radius && !ok && cfg.decoder() != DecoderChoice::Weak {
        Some("decoder failure within radius".to_string())
    } else if within_radius && weight_bound_ok == Some(false) {
        Some("output weight bound".to_string())
    } else if within_radius && cfg.gate_coset && coset == Some(false) {
        Some("wrong coset".to_string())
    } else {
        None
    };

    let record = TrialRecord {
        trial,
        side,
        source,
        error_weight: c.weight(),
        error: c.support(),
        seed,
        status: out.status,
        output_weight: out.weight,
        runs: out.trace.len(),
        successful_runs: out.trace.iter().filter(|e| e.weight.is_some()).count(),
        syndrome_ok,
        weight_bound_ok,
        coset,
        witness,
        within_radius,
        gate_failure,
    };
    let timing = TrialTiming {
        trial,
        sample_ns,
        decode_ns,
        verify_ns,
    };
    Ok((record, timing))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub side: CssSide,
    pub source: TrialSource,
    pub weight: usize,
    pub trials: usize,
    pub ok: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_output_weight: f64,
    pub mean_decode_ms: f64,
    pub within_radius: bool,
    pub gate_failures: usize,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub params: ParamsReport,
    pub records: Vec<TrialRecord>,
    pub timings: Vec<TrialTiming>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutput {
    #[must_use]
    pub fn gate_failures(&self) -> usize {
        self.records.iter().filter(|r| r.gate_failure.is_some()).count()
    }
}

fn weights_for(cfg: &ExperimentConfig, side: &SideReport) -> Vec<usize> {
    match &cfg.error_weights {
        Some(w) => w.clone(),
        None => (0..=side.admissible_radius.max(2)).collect(),
    }
}

fn worker_count(cfg: &ExperimentConfig, jobs: usize) -> usize {
    let auto = std::thread::available_parallelism().map_or(1, usize::from);
    let n = if cfg.threads == 0 { auto } else { cfg.threads };
    n.clamp(1, jobs.max(1))
}

/// Builds the code and runs the sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(BuiltCode, SweepOutput)> {
    let built = build_code(cfg)?;
    let out = run_sweep_on(cfg, &built)?;
    Ok((built, out))
}

pub fn run_sweep_on(cfg: &ExperimentConfig, built: &BuiltCode) -> Result<SweepOutput> {
    cfg.validate()?;
    let params = params_report(cfg, built).map_err(|e| e.at("params"))?;
    let mut specs = Vec::new();
    for &side in &cfg.sides {
        for w in weights_for(cfg, params.side(side)) {
            for _ in 0..cfg.trials {
                specs.push(TrialSpec {
                    side,
                    weight: w,
                    error: None,
                });
            }
        }
    }
    if let Some(path) = &cfg.replay {
        for case in read_replay(path).map_err(|e| e.at("replay file"))? {
            let n = built.code.n();
            if case.error.iter().any(|&i| i >= n) {
                return Err(Error::Format(format!("replay error index out of range for n = {n}")).at("replay file"));
            }
            let c = BitVec::from_support(n, case.error.iter().copied());
            specs.push(TrialSpec {
                side: case.side,
                weight: c.weight(),
                error: Some(c),
            });
        }
    }

    let slots: Mutex<Vec<Option<(TrialRecord, TrialTiming)>>> = Mutex::new(vec![None; specs.len()]);
    let first_error: Mutex<Option<Error>> = Mutex::new(None);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..worker_count(cfg, specs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= specs.len() || first_error.lock().expect("poisoned").is_some() {
                    break;
                }
                let spec = &specs[i];
                match run_trial(
                    cfg,
                    &built.code,
                    &params,
                    i,
                    spec.side,
                    spec.error.as_ref(),
                    spec.weight,
                ) {
                    Ok(r) => slots.lock().expect("poisoned")[i] = Some(r),
                    Err(e) => {
                        first_error.lock().expect("poisoned").get_or_insert(e.at("trial"));
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().expect("poisoned") {
        return Err(e);
    }
    let (records, timings): (Vec<_>, Vec<_>) = slots
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|r| r.expect("every trial ran"))
        .unzip();
    let summary = summarize(&records, &timings);
    Ok(SweepOutput {
        params,
        records,
        timings,
        summary,
    })
}

/// One row per `(side, source, weight)`, in first-appearance order.
#[must_use]
pub fn summarize(records: &[TrialRecord], timings: &[TrialTiming]) -> Vec<SummaryRow> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(u8, u8, usize), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let key = (r.side as u8, r.source as u8, r.error_weight);
        let g = groups.entry(key).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(i);
    }
    order
        .into_iter()
        .map(|key| {
            let idx = &groups[&key];
            let first = &records[idx[0]];
            let ok: Vec<&TrialRecord> = idx
                .iter()
                .map(|&i| &records[i])
                .filter(|r| r.status == Status::Ok)
                .collect();
            let successes = idx.iter().filter(|&&i| records[i].coset == Some(true)).count();
            let mean =
                |xs: &mut dyn Iterator<Item = f64>, n: usize| if n == 0 { 0.0 } else { xs.sum::<f64>() / n as f64 };
            SummaryRow {
                side: first.side,
                source: first.source,
                weight: first.error_weight,
                trials: idx.len(),
                ok: ok.len(),
                successes,
                success_rate: successes as f64 / idx.len() as f64,
                mean_output_weight: mean(&mut ok.iter().map(|r| r.output_weight as f64), ok.len()),
                mean_decode_ms: mean(&mut idx.iter().map(|&i| timings[i].decode_ns as f64 / 1e6), idx.len()),
                within_radius: idx.iter().all(|&i| records[i].within_radius),
                gate_failures: idx.iter().filter(|&&i| records[i].gate_failure.is_some()).count(),
            }
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut f, item)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Output file names inside `out_dir`.
pub const BUNDLE_FILE: &str = "bundle.json";
pub const PARAMS_FILE: &str = "params.json";
pub const TRIALS_FILE: &str = "trials.jsonl";
pub const TIMINGS_FILE: &str = "timings.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Writes the bundle, params, trials, timings, and summary.
pub fn write_outputs(dir: &Path, built: &BuiltCode, out: &SweepOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    built.bundle.write(&dir.join(BUNDLE_FILE))?;
    std::fs::write(dir.join(PARAMS_FILE), serde_json::to_string_pretty(&out.params)? + "\n")?;
    write_jsonl(&dir.join(TRIALS_FILE), &out.records)?;
    write_jsonl(&dir.join(TIMINGS_FILE), &out.timings)?;
    write_summary_csv(&dir.join(SUMMARY_FILE), &out.summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn toric(ell: usize) -> ExperimentConfig {
        ExperimentConfig {
            factor: FactorKind::Repetition,
            ell,
            trials: 5,
            threads: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sampler_weights_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_adversarial_error(10, 0, &mut rng).unwrap().is_zero());
        assert_eq!(sample_adversarial_error(10, 10, &mut rng).unwrap(), BitVec::ones(10));
        for _ in 0..1000 {
            assert_eq!(sample_adversarial_error(50, 7, &mut rng).unwrap().weight(), 7);
        }
        assert!(sample_adversarial_error(3, 4, &mut rng).is_err());
        let c = sample_column_error(6, 4, 1, 3, &mut rng).unwrap();
        assert!(c.iter_ones().all(|p| p % 4 == 1));
        assert_eq!(c.weight(), 3);
    }

    #[test]
    fn config_rejects_bad_values() {
        let lp = ExperimentConfig {
            mode: ProductKind::Lp,
            ell: 24,
            ..ExperimentConfig::default()
        };
        assert!(lp.validate().is_err());
        let mismatch = ExperimentConfig {
            mode: ProductKind::Lp,
            lift: Some(16),
            ..ExperimentConfig::default()
        };
        assert!(mismatch.validate().is_err());
        let wrong_decoder = ExperimentConfig {
            decoder: Some(DecoderChoice::Weak),
            ..ExperimentConfig::default()
        };
        assert!(wrong_decoder.validate().is_err());
        let zero = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(zero.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"elll": 4}"#).is_err());
        let partial: ExperimentConfig = serde_json::from_str(r#"{"mode": "lp", "ell": 16}"#).unwrap();
        assert_eq!((partial.mode, partial.ell, partial.delta), (ProductKind::Lp, 16, 14));
    }

    #[test]
    fn weight_zero_trial_is_green() {
        let cfg = ExperimentConfig {
            error_weights: Some(vec![0]),
            trials: 1,
            sides: vec![CssSide::Z],
            ..toric(4)
        };
        let (_, out) = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!((r.status, r.coset, r.output_weight), (Status::Ok, Some(true), 0));
        assert_eq!(out.summary.len(), 1);
        assert_eq!(out.summary[0].success_rate, 1.0);
        assert_eq!(out.gate_failures(), 0);
    }

    #[test]
    fn toric_params_report_distance() {
        let cfg = toric(4);
        let built = build_code(&cfg).unwrap();
        let p = params_report(&cfg, &built).unwrap();
        assert_eq!((p.n, p.k, p.distance), (32, Some(2), Some(4)));
        assert_eq!(p.distance_status, "exact");
    }

    #[test]
    fn summary_counts_match_records() {
        let cfg = ExperimentConfig {
            error_weights: Some(vec![0, 1, 2, 3]),
            ..toric(5)
        };
        let (_, out) = run_sweep(&cfg).unwrap();
        for row in &out.summary {
            let verdicts = out
                .records
                .iter()
                .filter(|r| r.side == row.side && r.error_weight == row.weight && r.coset == Some(true))
                .count();
            assert_eq!(row.successes, verdicts);
        }
        for r in &out.records {
            assert_eq!(r.coset.is_some(), r.status == Status::Ok);
            assert_eq!(r.witness.is_some(), r.coset == Some(true));
        }
    }

    #[test]
    fn records_do_not_depend_on_thread_count() {
        let one = ExperimentConfig {
            threads: 1,
            error_weights: Some(vec![1, 2]),
            ..toric(4)
        };
        let four = ExperimentConfig {
            threads: 4,
            ..one.clone()
        };
        assert_eq!(run_sweep(&one).unwrap().1.records, run_sweep(&four).unwrap().1.records);
    }

    #[test]
    fn build_errors_name_their_stage() {
        let cfg = ExperimentConfig {
            gamma_inner: 3,
            ..ExperimentConfig::default()
        };
        let err = build_code(&cfg).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Stage {
                    stage: "tanner code",
                    ..
                }
            ),
            "{err}"
        );
    }
}
