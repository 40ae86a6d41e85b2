//! Erasure channel simulation and experiment sweeps.
//!
//! Every trial draws a fresh code from its ensemble. Trial `i` of a run with
//! master seed `s` takes its randomness from ChaCha8 seeded with `s` on
//! stream `i`, so results do not depend on scheduling and runs with the same
//! seed and trial count are bit-identical. Trials run on the rayon pool and
//! are reduced in index order.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::band::BandShape;
use crate::codec::{DecodeMode, DecodeOutcome, DecodeStatus, Decoder, OpCounter};
use crate::error::{Error, Result};
use crate::qc::{make_code, CodeShape, Ensemble, QcCode};

/// Environment variable holding the number of worker threads.
pub const THREADS_ENV: &str = "QCBAND_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
/// Returns the thread count in effect.
pub fn init_thread_pool_from_env() -> usize {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // A pool may already exist (tests, repeated calls); keep it then.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

/// Memoryless erasure channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    pub p_loss: f64,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(p_loss: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_loss) {
            return Err(Error::Dimension(format!("loss probability {p_loss} outside [0, 1]")));
        }
        Ok(ChannelSpec { p_loss, seed })
    }
}

/// `true` for every received position; each position is erased
/// independently with probability `p_loss`.
pub fn erasure_mask(n: usize, channel: &ChannelSpec) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(channel.seed);
    (0..n).map(|_| rng.gen::<f64>() >= channel.p_loss).collect()
}

/// Passes `symbols` through the channel, returning the survivors with their
/// indices.
pub fn erase<P: Clone>(symbols: &[P], channel: &ChannelSpec) -> Vec<(usize, P)> {
    erasure_mask(symbols.len(), channel)
        .into_iter()
        .zip(symbols)
        .enumerate()
        .filter(|(_, (kept, _))| *kept)
        .map(|(j, (_, s))| (j, s.clone()))
        .collect()
}

/// A uniformly random transmission order of `n` symbols.
pub fn reception_order<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

fn trial_rng(master_seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial as u64);
    rng
}

/// Structure-only hybrid decode of the first `count` symbols of `order`.
fn decode_prefix(dec: &Decoder<'_>, order: &[usize], count: usize) -> DecodeOutcome<()> {
    dec.decode(order[..count].iter().map(|&j| (j, ())), (), DecodeMode::Hybrid)
        .expect("indices come from a permutation of the code length")
}

/// Result of feeding one code its symbols one at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub k: usize,
    /// Fewest received symbols for which hybrid decoding succeeds.
    pub ml_consumed: Option<usize>,
    /// Fewest received symbols for which peeling alone completes.
    pub it_consumed: Option<usize>,
    /// Counters of the successful decode at `ml_consumed` symbols.
    pub counter: OpCounter,
    /// Residual rows `m'` of that decode (0 when peeling sufficed).
    pub residual_rows: usize,
    /// Band width `q = b(M+1)` of the code.
    pub band_width: usize,
    pub status: DecodeStatus,
}

impl TrialResult {
    pub fn ml_inefficiency(&self) -> Option<f64> {
        self.ml_consumed.map(|c| c as f64 / self.k as f64)
    }

    pub fn it_inefficiency(&self) -> Option<f64> {
        self.it_consumed.map(|c| c as f64 / self.k as f64)
    }
}

/// Receives symbols in random order until decoding completes.
///
/// Peeling runs after every symbol to find where it alone completes. For the
/// hybrid decoder, success is monotone in the received prefix (adding a
/// symbol removes a column from the erased set, which cannot destroy full
/// column rank), so the first decodable prefix is located by bisection
/// between `k - 1` (too few symbols) and the peeling completion point. The
/// counters reported are those of the decode at that prefix.
pub fn inefficiency_trial(code: &QcCode, rng: &mut ChaCha8Rng) -> TrialResult {
    let (k, n) = (code.k(), code.n());
    let dec = Decoder::new(code);
    let order = reception_order(n, rng);
    let band_width = BandShape::new(
        code.base().rows(),
        code.base().cols(),
        code.m(),
        code.base().max_shift(),
    )
    .q();

    let mut state = dec.reception(());
    let mut scratch = OpCounter::default();
    let mut it_consumed = None;
    for (t, &j) in order.iter().enumerate() {
        state.receive(j, ()).expect("index in range");
        dec.it_decode(&mut state, &mut scratch);
        if state.is_complete() {
            it_consumed = Some(t + 1);
            break;
        }
    }
    let Some(it_done) = it_consumed else {
        return TrialResult {
            k,
            ml_consumed: None,
            it_consumed: None,
            counter: OpCounter::default(),
            residual_rows: 0,
            band_width,
            status: DecodeStatus::MlSingular,
        };
    };

    let mut lo = k.saturating_sub(1);
    let mut hi = it_done;
    let mut best = decode_prefix(&dec, &order, hi);
    debug_assert!(best.is_success());
    let mut best_rows = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let out = decode_prefix(&dec, &order, mid);
        if out.is_success() {
            best_rows = residual_rows_at(&dec, &order, mid);
            hi = mid;
            best = out;
        } else {
            lo = mid;
        }
    }
    TrialResult {
        k,
        ml_consumed: Some(hi),
        it_consumed,
        counter: best.counter,
        residual_rows: if best.counter.ml_ops() == 0 { 0 } else { best_rows },
        band_width,
        status: DecodeStatus::Success,
    }
}

fn residual_rows_at(dec: &Decoder<'_>, order: &[usize], count: usize) -> usize {
    let mut state = dec.reception(());
    for &j in &order[..count] {
        state.receive(j, ()).expect("index in range");
    }
    dec.it_decode(&mut state, &mut OpCounter::default());
    dec.build_residual(&state).num_rows()
}

/// Mean and standard error of one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl CurvePoint {
    pub fn from_samples(x: f64, samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = if n == 0 {
            f64::NAN
        } else {
            samples.iter().sum::<f64>() / n as f64
        };
        let stderr = if n < 2 {
            0.0
        } else {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        CurvePoint {
            x,
            mean,
            stderr,
            trials: n,
        }
    }

    /// Normal-approximation 95% confidence interval of the mean.
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.stderr, self.mean + 1.96 * self.stderr)
    }
}

/// Settings shared by all sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub ensemble: Ensemble,
    pub shape: CodeShape,
    pub trials: usize,
    pub master_seed: u64,
}

/// Runs `trials` inefficiency trials at dimension `k`.
pub fn inefficiency_trials(cfg: &SweepConfig, k: usize) -> Result<Vec<TrialResult>> {
    // Validate the dimension once before fanning out.
    make_code(cfg.ensemble, k, cfg.shape, cfg.master_seed)?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.master_seed, i);
            let code = make_code(cfg.ensemble, k, cfg.shape, rng.gen())
                .expect("dimension validated above");
            inefficiency_trial(&code, &mut rng)
        })
        .collect())
}

/// Mean inefficiency curves over `ks`.
#[derive(Clone, Debug, PartialEq)]
pub struct InefficiencyCurves {
    pub ml: Vec<CurvePoint>,
    pub it: Vec<CurvePoint>,
    /// Trials that never completed, per `k`. Excluded from the means.
    pub failures: Vec<usize>,
}

pub fn inefficiency_sweep(cfg: &SweepConfig, ks: &[usize]) -> Result<InefficiencyCurves> {
    let mut curves = InefficiencyCurves {
        ml: Vec::new(),
        it: Vec::new(),
        failures: Vec::new(),
    };
    for &k in ks {
        let results = inefficiency_trials(cfg, k)?;
        let ml: Vec<f64> = results.iter().filter_map(TrialResult::ml_inefficiency).collect();
        let it: Vec<f64> = results.iter().filter_map(TrialResult::it_inefficiency).collect();
        curves.failures.push(results.len() - ml.len());
        curves.ml.push(CurvePoint::from_samples(k as f64, &ml));
        curves.it.push(CurvePoint::from_samples(k as f64, &it));
    }
    Ok(curves)
}

/// Per-trial decodes at each loss rate. The code and the per-symbol channel
/// draws of trial `i` are shared by all loss rates, so a higher loss rate
/// always erases a superset of the symbols erased at a lower one.
fn loss_trials(cfg: &SweepConfig, k: usize, losses: &[f64]) -> Result<Vec<Vec<DecodeOutcome<()>>>> {
    if let Some(&bad) = losses.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Dimension(format!("loss probability {bad} outside [0, 1]")));
    }
    make_code(cfg.ensemble, k, cfg.shape, cfg.master_seed)?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.master_seed, i);
            let code = make_code(cfg.ensemble, k, cfg.shape, rng.gen())
                .expect("dimension validated above");
            let dec = Decoder::new(&code);
            let draws: Vec<f64> = (0..code.n()).map(|_| rng.gen()).collect();
            losses
                .iter()
                .map(|&p| {
                    let received = draws
                        .iter()
                        .enumerate()
                        .filter(|(_, &u)| u >= p)
                        .map(|(j, _)| (j, ()));
                    dec.decode(received, (), DecodeMode::Hybrid)
                        .expect("indices in range")
                })
                .collect()
        })
        .collect())
}

/// Block error rate of hybrid decoding at each loss probability.
pub fn bler_sweep(cfg: &SweepConfig, k: usize, losses: &[f64]) -> Result<Vec<CurvePoint>> {
    let runs = loss_trials(cfg, k, losses)?;
    Ok(losses
        .iter()
        .enumerate()
        .map(|(li, &p)| {
            let fails: Vec<f64> = runs
                .iter()
                .map(|r| if r[li].is_success() { 0.0 } else { 1.0 })
                .collect();
            CurvePoint::from_samples(p, &fails)
        })
        .collect())
}

/// Mean total (peeling + elimination) operations per decode at each loss
/// probability, failed decodes included.
pub fn ops_vs_loss(cfg: &SweepConfig, k: usize, losses: &[f64]) -> Result<Vec<CurvePoint>> {
    let runs = loss_trials(cfg, k, losses)?;
    Ok(losses
        .iter()
        .enumerate()
        .map(|(li, &p)| {
            let ops: Vec<f64> = runs.iter().map(|r| r[li].counter.total() as f64).collect();
            CurvePoint::from_samples(p, &ops)
        })
        .collect())
}

/// Worst-case ML cost against code dimension, with the fitted log-log slope.
#[derive(Clone, Debug, PartialEq)]
pub struct OpsScaling {
    pub points: Vec<CurvePoint>,
    pub slope: f64,
    /// Every trial, grouped by `k`, for per-trial checks.
    pub trials: Vec<Vec<TrialResult>>,
}

/// Mean elimination operations (forward + backward) at the smallest
/// decodable reception, for each `k`.
pub fn ops_vs_k(cfg: &SweepConfig, ks: &[usize]) -> Result<OpsScaling> {
    let mut points = Vec::new();
    let mut trials = Vec::new();
    for &k in ks {
        let results = inefficiency_trials(cfg, k)?;
        let ops: Vec<f64> = results
            .iter()
            .filter(|r| r.ml_consumed.is_some())
            .map(|r| r.counter.ml_ops() as f64)
            .collect();
        points.push(CurvePoint::from_samples(k as f64, &ops));
        trials.push(results);
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.mean)).collect();
    Ok(OpsScaling {
        slope: log_log_slope(&xy),
        points,
        trials,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// One line of experiment output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub experiment: String,
    pub ensemble: String,
    pub k: usize,
    pub rate: f64,
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub master_seed: u64,
}

impl CsvRow {
    pub fn new(experiment: &str, cfg: &SweepConfig, k: usize, point: &CurvePoint) -> Self {
        CsvRow {
            experiment: experiment.to_string(),
            ensemble: cfg.ensemble.name().to_string(),
            k,
            rate: cfg.shape.rate(),
            x: point.x,
            mean: point.mean,
            stderr: point.stderr,
            trials: point.trials,
            master_seed: cfg.master_seed,
        }
    }
}

/// Writes rows with a single header line.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "experiment",
            "ensemble",
            "k",
            "rate",
            "x",
            "mean",
            "stderr",
            "trials",
            "master_seed",
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
