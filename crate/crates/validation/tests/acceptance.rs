//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use qcband::band::{permute_matrix, verify_band, BandShape, QcPermutation};
use qcband::codec::{back_substitute, encode, forward_eliminate, DecodeStatus, Decoder, OpCounter};
use qcband::gf2::oracle::{dense_solve_oracle, rank_oracle, Solve};
use qcband::gf2::SymbolBlock;
use qcband::qc::{make_code, CodeShape, Ensemble};
use qcband::sim::{
    bler_sweep, erase, inefficiency_sweep, ops_vs_k, write_csv, ChannelSpec, CsvRow, OpsScaling,
    SweepConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SHAPE: CodeShape = CodeShape {
    a: 5,
    b: 15,
    src_degree: 5,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn cfg(ensemble: Ensemble, trials: usize, master_seed: u64) -> SweepConfig {
    SweepConfig {
        ensemble,
        shape: SHAPE,
        trials,
        master_seed,
    }
}

fn random_source(k: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<SymbolBlock> {
    (0..k)
        .map(|_| SymbolBlock::new((0..len).map(|_| rng.gen()).collect()))
        .collect()
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let ensembles = [Ensemble::band(), Ensemble::Unconstrained, Ensemble::constant_band()];
    let groups = SHAPE.b - SHAPE.a;
    let mut codes = 0;
    let mut bad = 0;
    for i in 0..60 {
        let e = ensembles[i % 3];
        let z = rng.gen_range(8..=512);
        let code = make_code(e, z * groups, SHAPE, rng.gen()).expect("valid dimension");
        let base = code.base();
        let perm = QcPermutation::new(base.rows(), base.cols(), code.z());
        let shape = BandShape::new(base.rows(), base.cols(), code.m(), base.max_shift());
        let staircase = code.parity_check().get(code.m() - 1, code.n() - 2);
        if !staircase || !verify_band(&permute_matrix(code.parity_check(), &perm).expect("matching dimensions"), &shape) {
            bad += 1;
        }
        codes += 1;
    }
    verdict(bad == 0, format!("{codes} codes, {bad} with band violations"))
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let ensembles = [
        Ensemble::band(),
        Ensemble::Unconstrained,
        Ensemble::constant_band(),
        Ensemble::Protograph,
    ];
    let (mut successes, mut failures, mut mismatches) = (0, 0, 0);
    for t in 0..1000 {
        let k = 10 * rng.gen_range(2..=100);
        let loss = rng.gen_range(0.0..=0.30);
        let code = make_code(ensembles[t % 4], k, SHAPE, rng.gen()).expect("valid dimension");
        let source = random_source(k, 8, &mut rng);
        let cw = encode(&code, &source).expect("encodable");
        let received = erase(cw.symbols(), &ChannelSpec::new(loss, rng.gen()).unwrap());

        let dec = Decoder::new(&code);
        let out = dec.hybrid_decode(received.clone(), 8).expect("valid input");

        let mut state = dec.reception(SymbolBlock::zeroed(8));
        for (j, s) in received {
            state.receive(j, s).expect("valid input");
        }
        let mut counter = OpCounter::default();
        dec.it_decode(&mut state, &mut counter);
        let residual = dec.build_residual(&state);
        let expected = residual.is_empty() || rank_oracle(&residual.matrix) == residual.num_cols();
        let got = dec.ml_decode(&mut state, &mut counter) == DecodeStatus::Success;
        if got != expected || got != out.is_success() {
            mismatches += 1;
        }
        match out.into_complete() {
            Some(symbols) => {
                successes += 1;
                if symbols != cw.symbols() {
                    mismatches += 1;
                }
            }
            None => failures += 1,
        }
    }
    verdict(
        mismatches == 0,
        format!("{successes} decoded, {failures} singular, {mismatches} mismatches"),
    )
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let (mut compared, mut singular, mut mismatches) = (0, 0, 0);
    for t in 0..500 {
        let e = if t % 2 == 0 { Ensemble::band() } else { Ensemble::Protograph };
        let k = 10 * rng.gen_range(2..=6);
        let code = make_code(e, k, SHAPE, rng.gen()).expect("valid dimension");
        let cw = encode(&code, &random_source(k, 4, &mut rng)).expect("encodable");
        let loss = rng.gen_range(0.15..=0.45);
        let dec = Decoder::new(&code);
        let mut state = dec.reception(SymbolBlock::zeroed(4));
        for (j, s) in erase(cw.symbols(), &ChannelSpec::new(loss, rng.gen()).unwrap()) {
            state.receive(j, s).expect("valid input");
        }
        dec.it_decode(&mut state, &mut OpCounter::default());
        let sys = dec.build_residual(&state);
        if sys.is_empty() || sys.num_cols() > 12 {
            continue;
        }
        compared += 1;
        // Fewer equations than unknowns cannot have a unique solution.
        let oracle = if sys.num_rows() < sys.num_cols() {
            Solve::Singular
        } else {
            dense_solve_oracle(&sys.matrix, &sys.rhs).expect("consistent dimensions")
        };
        let ours = forward_eliminate(&sys, &mut OpCounter::default())
            .map(|tri| back_substitute(tri, &mut OpCounter::default()));
        match (ours, oracle) {
            (Ok(x), Solve::Unique(y)) => {
                let truth: Vec<SymbolBlock> = sys.col_map.iter().map(|&j| cw.symbols()[j].clone()).collect();
                if x != y || x != truth {
                    mismatches += 1;
                }
            }
            (Err(_), Solve::Singular) => singular += 1,
            _ => mismatches += 1,
        }
    }
    verdict(
        mismatches == 0 && compared >= 100,
        format!("{compared} residual systems with n' <= 12 ({singular} singular), {mismatches} mismatches"),
    )
}

fn criterion_4() -> Verdict {
    let curves = inefficiency_sweep(&cfg(Ensemble::band(), 200, 0xC4), &[2000]).expect("valid sweep");
    let p = &curves.ml[0];
    verdict(
        p.mean <= 1.01 && p.trials == 200,
        format!("band k=2000 mean ML inefficiency {:.5} over {} trials", p.mean, p.trials),
    )
}

fn criterion_5() -> Verdict {
    let band = inefficiency_sweep(&cfg(Ensemble::band(), 200, 0xC5), &[10_000]).expect("valid sweep");
    let cb = inefficiency_sweep(&cfg(Ensemble::constant_band(), 200, 0xC5), &[10_000]).expect("valid sweep");
    let (b, c) = (&band.ml[0], &cb.ml[0]);
    let (b_lo, b_hi) = b.ci95();
    let (c_lo, c_hi) = c.ci95();
    verdict(
        c.mean > b.mean && c_lo > b_hi && b.trials == 200 && c.trials == 200,
        format!(
            "k=10000 band {:.5} [{b_lo:.5}, {b_hi:.5}], constant-band {:.5} [{c_lo:.5}, {c_hi:.5}]",
            b.mean, c.mean
        ),
    )
}

fn criterion_6() -> (Verdict, OpsScaling) {
    let ks = [1000, 2000, 4000, 8000];
    let targets = [
        (Ensemble::band(), 1.5),
        (Ensemble::Unconstrained, 2.0),
        (Ensemble::Protograph, 2.0),
        (Ensemble::constant_band(), 1.0),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    let mut band = None;
    for (e, target) in targets {
        let s = ops_vs_k(&cfg(e, 100, 0xC6), &ks).expect("valid sweep");
        pass &= (s.slope - target).abs() <= 0.25 && s.points.iter().all(|p| p.trials == 100);
        detail.push(format!("{e} {:.3} (target {target})", s.slope));
        if band.is_none() {
            band = Some(s);
        }
    }
    (verdict(pass, format!("slopes: {}", detail.join(", "))), band.unwrap())
}

fn criterion_7(band: &OpsScaling) -> Verdict {
    let (mut checked, mut worst, mut violations) = (0, 0.0f64, 0);
    for r in band.trials.iter().flatten() {
        let bound = 3 * (2 * r.band_width + SHAPE.b) as u64 * r.residual_rows as u64;
        let ops = r.counter.ml_ops();
        if ops > bound {
            violations += 1;
        }
        if bound > 0 {
            worst = worst.max(ops as f64 / bound as f64);
        }
        checked += 1;
    }
    verdict(
        violations == 0,
        format!("{checked} band trials, {violations} over bound, max ops/bound {worst:.4}"),
    )
}

fn criterion_8() -> Verdict {
    let pts = bler_sweep(&cfg(Ensemble::band(), 500, 0xC8), 2000, &[0.32, 0.34]).expect("valid sweep");
    verdict(
        pts[0].mean <= 0.01 && pts[1].mean >= 0.99,
        format!(
            "band k=2000 BLER {:.3} at 32%, {:.3} at 34% ({} trials each)",
            pts[0].mean, pts[1].mean, pts[0].trials
        ),
    )
}

fn criterion_10() -> Verdict {
    let run = || {
        let mut rows = Vec::new();
        let c = cfg(Ensemble::band(), 50, 0xCA);
        let ineff = inefficiency_sweep(&c, &[1000, 2000]).expect("valid sweep");
        for p in &ineff.ml {
            rows.push(CsvRow::new("ineff", &c, p.x as usize, p));
        }
        for p in bler_sweep(&c, 1000, &[0.28, 0.31, 0.34]).expect("valid sweep") {
            rows.push(CsvRow::new("bler", &c, 1000, &p));
        }
        let mut out = Vec::new();
        write_csv(&rows, &mut out).expect("in-memory write");
        out
    };
    let (first, second) = (run(), run());
    verdict(
        first == second,
        format!("two runs, {} and {} bytes, identical: {}", first.len(), second.len(), first == second),
    )
}

fn main() -> ExitCode {
    qcband::sim::init_thread_pool_from_env();
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |id: &str, v: Verdict, since: Instant| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            failed += 1;
        }
        println!("criterion {id:>2}: {tag}  {}  ({:.1}s)", v.detail, since.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    report("1", criterion_1(), t);
    let t = Instant::now();
    report("2", criterion_2(), t);
    let t = Instant::now();
    report("3", criterion_3(), t);
    let t = Instant::now();
    report("4", criterion_4(), t);
    let t = Instant::now();
    report("5", criterion_5(), t);
    let t = Instant::now();
    let (v6, band) = criterion_6();
    report("6", v6, t);
    let t = Instant::now();
    report("7", criterion_7(&band), t);
    let t = Instant::now();
    report("8", criterion_8(), t);
    println!("criterion  9: SKIP  error floor near 1e-5 needs about 1e6 trials per point; not run");
    let t = Instant::now();
    report("10", criterion_10(), t);

    println!(
        "acceptance: {failed} failed, total {:.1}s",
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

