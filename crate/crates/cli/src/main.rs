//! `qcband` command-line tool.
//!
//! Exit status: 0 on success, 2 for usage or configuration errors, 3 when
//! peeling alone stalls (`decode --it-only`), 4 when elimination finds the
//! residual system singular, 1 for any other failure.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qcband::band::{band_shape, permute_matrix};
use qcband::codec::{encode, DecodeMode, DecodeStatus, Decoder, SymbolFile};
use qcband::gf2::SymbolBlock;
use qcband::qc::{
    expand, make_code, parse_base_file, write_base_file, CodeShape, Ensemble, QcCode,
};
use qcband::sim::{self, ChannelSpec, CsvRow, SweepConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_IT_PARTIAL: u8 = 3;
const EXIT_ML_SINGULAR: u8 = 4;

#[derive(Parser)]
#[command(name = "qcband", version, about = "QC LDPC erasure codes with pseudo-band ML decoding")]
#[command(after_help = "Set QCBAND_THREADS to bound the number of simulation worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a code from an ensemble and write its base-matrix file.
    Gen {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value_t = EnsembleName::Band)]
        ensemble: EnsembleName,
        /// Code seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Base-matrix file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a payload file into a symbol file.
    Encode {
        /// Base-matrix file.
        #[arg(long)]
        code: PathBuf,
        /// Payload, zero-padded to k * symbol-size bytes.
        #[arg(long)]
        input: PathBuf,
        /// Bytes per symbol.
        #[arg(long, default_value_t = 1024)]
        symbol_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop records from a symbol file as a memoryless erasure channel would.
    Channel {
        #[arg(long)]
        input: PathBuf,
        /// Erasure probability per symbol.
        #[arg(long)]
        loss: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the payload from a (possibly incomplete) symbol file.
    Decode {
        /// Base-matrix file.
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Payload file to write on success.
        #[arg(long)]
        out: PathBuf,
        /// Stop after peeling.
        #[arg(long)]
        it_only: bool,
    },
    /// Print the nonzero positions of H, one `i j` pair per line.
    Portrait {
        /// Base-matrix file.
        #[arg(long)]
        code: PathBuf,
        /// Print the pseudo-band permuted matrix instead.
        #[arg(long)]
        permuted: bool,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write CSV.
    Sim {
        #[arg(value_enum)]
        experiment: Experiment,
        #[command(flatten)]
        args: SimArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleName {
    Band,
    Unconstrained,
    ConstantBand,
    Protograph,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    /// Mean inefficiency against k.
    Ineff,
    /// Block error rate against loss probability.
    Bler,
    /// Mean decoding operations against loss probability.
    OpsLoss,
    /// Elimination operations at minimal reception against k, with slope.
    OpsK,
}

#[derive(Args)]
struct CodeArgs {
    /// Number of source symbols; must be a multiple of b - a.
    #[arg(long, default_value_t = 2000)]
    k: usize,
    /// Base matrix rows.
    #[arg(long, default_value_t = 5)]
    a: usize,
    /// Base matrix columns.
    #[arg(long, default_value_t = 15)]
    b: usize,
    /// Ones per source column of the base matrix.
    #[arg(long, default_value_t = 5)]
    src_degree: usize,
    /// Band ensemble constant C in M = floor(C * sqrt(z)).
    #[arg(long, default_value_t = Ensemble::DEFAULT_C)]
    c_const: f64,
    /// Maximum shift of the constant-band ensemble.
    #[arg(long, default_value_t = Ensemble::DEFAULT_M0)]
    m0: usize,
    /// Optional consistency check: rejected unless equal to (b - a) / b.
    /// Accepts a fraction such as 2/3 or a decimal.
    #[arg(long)]
    rate: Option<String>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Ensembles to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "band")]
    ensemble: Vec<EnsembleName>,
    /// Code dimensions for ineff and ops-k, comma separated
    /// (default: --k for ineff, 1000,2000,4000,8000 for ops-k).
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    /// Single loss probability for bler and ops-loss.
    #[arg(long, conflicts_with = "losses")]
    loss: Option<f64>,
    /// Loss range lo:hi:step for bler and ops-loss [default: 0.28:0.36:0.01].
    #[arg(long)]
    losses: Option<String>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A configuration problem, reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Configuration mistakes from the library become usage errors.
fn config_err(e: qcband::Error) -> anyhow::Error {
    use qcband::Error::*;
    match e {
        NotDivisible { .. } | InvalidBase(_) | SourceDegree { .. } | ShiftTooLarge { .. } => usage(e.to_string()),
        other => other.into(),
    }
}

impl CodeArgs {
    fn shape(&self) -> anyhow::Result<CodeShape> {
        if self.a == 0 || self.a >= self.b {
            return Err(usage(format!("need 0 < a < b, got a={} b={}", self.a, self.b)));
        }
        let shape = CodeShape {
            a: self.a,
            b: self.b,
            src_degree: self.src_degree,
        };
        if let Some(text) = &self.rate {
            let rate = parse_rate(text)?;
            if (rate - shape.rate()).abs() > 1e-9 {
                return Err(usage(format!(
                    "--rate {text} does not match (b-a)/b = {}/{}",
                    self.b - self.a,
                    self.b
                )));
            }
        }
        Ok(shape)
    }

    fn ensemble(&self, name: EnsembleName) -> anyhow::Result<Ensemble> {
        let name = match name {
            EnsembleName::Band => "band",
            EnsembleName::Unconstrained => "unconstrained",
            EnsembleName::ConstantBand => "constant-band",
            EnsembleName::Protograph => "protograph",
        };
        Ensemble::from_name(name, self.c_const, self.m0).map_err(config_err)
    }
}

fn parse_rate(text: &str) -> anyhow::Result<f64> {
    let bad = || usage(format!("cannot parse rate {text:?}"));
    match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            Ok(num / den)
        }
        None => text.trim().parse().map_err(|_| bad()),
    }
}

/// Expands `lo:hi:step` into its grid, endpoints included.
fn parse_losses(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--losses expects lo:hi:step, got {text:?}")))?;
    let [lo, hi, step] = parts[..] else {
        return Err(usage(format!("--losses expects lo:hi:step, got {text:?}")));
    };
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi || step.is_nan() || step <= 0.0 {
        return Err(usage(format!("invalid loss range {text:?}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    // Round to 12 decimals so grid points print cleanly.
    Ok((0..=count)
        .map(|i| ((lo + step * i as f64) * 1e12).round() / 1e12)
        .collect())
}

fn check_loss(p: f64) -> anyhow::Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(usage(format!("loss probability {p} outside [0, 1]")))
    }
}

fn load_code(path: &Path) -> anyhow::Result<QcCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (base, spec) = parse_base_file(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(expand(&base, spec)?)
}

fn load_symbols(path: &Path) -> anyhow::Result<SymbolFile> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SymbolFile::read_from(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn save_symbols(file: &SymbolFile, path: &Path) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    file.write_to(BufWriter::new(f))?;
    Ok(())
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(code: &CodeArgs, name: EnsembleName, seed: u64, out: &Path) -> anyhow::Result<u8> {
    let shape = code.shape()?;
    let ensemble = code.ensemble(name)?;
    let qc = make_code(ensemble, code.k, shape, seed).map_err(config_err)?;
    fs::write(out, write_base_file(qc.base(), qc.spec()))
        .with_context(|| format!("writing {}", out.display()))?;
    let max_shift = qc.base().max_shift();
    let (p, q) = band_shape(shape.a, shape.b, max_shift);
    println!(
        "ensemble={ensemble} k={} n={} m={} z={} M={max_shift} p={p} q={q}",
        qc.k(),
        qc.n(),
        qc.m(),
        qc.z()
    );
    Ok(0)
}

fn cmd_encode(code: &Path, input: &Path, symbol_size: usize, out: &Path) -> anyhow::Result<u8> {
    if symbol_size == 0 {
        return Err(usage("--symbol-size must be positive"));
    }
    let qc = load_code(code)?;
    let mut payload = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let capacity = qc.k() * symbol_size;
    if payload.len() > capacity {
        return Err(usage(format!(
            "payload of {} bytes exceeds k * symbol-size = {capacity}",
            payload.len()
        )));
    }
    payload.resize(capacity, 0);
    let source: Vec<SymbolBlock> = payload
        .chunks_exact(symbol_size)
        .map(|c| SymbolBlock::new(c.to_vec()))
        .collect();
    let cw = encode(&qc, &source)?;
    save_symbols(&SymbolFile::from_codeword(&cw, symbol_size), out)?;
    println!("encoded k={} into n={} symbols of {symbol_size} bytes", qc.k(), qc.n());
    Ok(0)
}

fn cmd_channel(input: &Path, loss: f64, seed: u64, out: &Path) -> anyhow::Result<u8> {
    let channel = ChannelSpec::new(check_loss(loss)?, seed)?;
    let mut file = load_symbols(input)?;
    let mask = sim::erasure_mask(file.n, &channel);
    file.records.retain(|(j, _)| mask[*j]);
    save_symbols(&file, out)?;
    println!("kept {} of {} symbols", file.records.len(), file.n);
    Ok(0)
}

fn cmd_decode(code: &Path, input: &Path, out: &Path, it_only: bool) -> anyhow::Result<u8> {
    let qc = load_code(code)?;
    let file = load_symbols(input)?;
    if file.n != qc.n() || file.k != qc.k() {
        bail!(
            "symbol file is for n={} k={}, code has n={} k={}",
            file.n,
            file.k,
            qc.n(),
            qc.k()
        );
    }
    let mode = if it_only { DecodeMode::IterativeOnly } else { DecodeMode::Hybrid };
    let outcome = Decoder::new(&qc).decode(file.records, SymbolBlock::zeroed(file.symbol_len), mode)?;
    let c = outcome.counter;
    let status = match outcome.status {
        DecodeStatus::Success => "success",
        DecodeStatus::ItPartial => "it_partial",
        DecodeStatus::MlSingular => "ml_singular",
    };
    println!("status={status} it_ops={} fe_ops={} bs_ops={}", c.it_ops, c.fe_ops, c.bs_ops);
    match outcome.status {
        DecodeStatus::Success => {
            let symbols = outcome.into_complete().expect("success means complete");
            let mut w = output(Some(out))?;
            for s in &symbols[..qc.k()] {
                w.write_all(s.as_bytes())?;
            }
            w.flush()?;
            Ok(0)
        }
        DecodeStatus::ItPartial => Ok(EXIT_IT_PARTIAL),
        DecodeStatus::MlSingular => Ok(EXIT_ML_SINGULAR),
    }
}

fn cmd_portrait(code: &Path, permuted: bool, out: Option<&Path>) -> anyhow::Result<u8> {
    let qc = load_code(code)?;
    let mut w = output(out)?;
    if permuted {
        let perm = *Decoder::new(&qc).permutation();
        qcband::band::write_portrait(&permute_matrix(qc.parity_check(), &perm)?, &mut w)?;
    } else {
        qcband::band::write_portrait(qc.parity_check(), &mut w)?;
    }
    w.flush()?;
    Ok(0)
}

fn cmd_sim(experiment: Experiment, args: &SimArgs) -> anyhow::Result<u8> {
    let shape = args.code.shape()?;
    if args.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let losses = match (&args.loss, &args.losses) {
        (Some(p), _) => vec![check_loss(*p)?],
        (None, Some(range)) => parse_losses(range)?,
        (None, None) => parse_losses("0.28:0.36:0.01")?,
    };
    let ks = match (&args.ks, experiment) {
        (Some(ks), _) => ks.clone(),
        (None, Experiment::OpsK) => vec![1000, 2000, 4000, 8000],
        (None, _) => vec![args.code.k],
    };
    let groups = shape.b - shape.a;
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k % groups != 0) {
        return Err(usage(format!("k={bad} is not a positive multiple of b-a={groups}")));
    }

    let mut rows = Vec::new();
    for &name in &args.ensemble {
        let cfg = SweepConfig {
            ensemble: args.code.ensemble(name)?,
            shape,
            trials: args.trials,
            master_seed: args.seed,
        };
        match experiment {
            Experiment::Ineff => {
                let curves = sim::inefficiency_sweep(&cfg, &ks).map_err(config_err)?;
                for ((ml, it), fails) in curves.ml.iter().zip(&curves.it).zip(&curves.failures) {
                    let k = ml.x as usize;
                    rows.push(CsvRow::new("ineff-ml", &cfg, k, ml));
                    rows.push(CsvRow::new("ineff-it", &cfg, k, it));
                    if *fails > 0 {
                        eprintln!("{} k={k}: {fails} trials never completed", cfg.ensemble);
                    }
                }
            }
            Experiment::Bler => {
                for p in sim::bler_sweep(&cfg, args.code.k, &losses).map_err(config_err)? {
                    rows.push(CsvRow::new("bler", &cfg, args.code.k, &p));
                }
            }
            Experiment::OpsLoss => {
                for p in sim::ops_vs_loss(&cfg, args.code.k, &losses).map_err(config_err)? {
                    rows.push(CsvRow::new("ops-loss", &cfg, args.code.k, &p));
                }
            }
            Experiment::OpsK => {
                let scaling = sim::ops_vs_k(&cfg, &ks).map_err(config_err)?;
                for p in &scaling.points {
                    rows.push(CsvRow::new("ops-k", &cfg, p.x as usize, p));
                }
                eprintln!("slope {} {:.4}", cfg.ensemble, scaling.slope);
            }
        }
    }
    let mut w = output(args.out.as_deref())?;
    sim::write_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Gen {
            code,
            ensemble,
            seed,
            out,
        } => cmd_gen(code, *ensemble, *seed, out),
        Command::Encode {
            code,
            input,
            symbol_size,
            out,
        } => cmd_encode(code, input, *symbol_size, out),
        Command::Channel {
            input,
            loss,
            seed,
            out,
        } => cmd_channel(input, *loss, *seed, out),
        Command::Decode {
            code,
            input,
            out,
            it_only,
        } => cmd_decode(code, input, out, *it_only),
        Command::Portrait { code, permuted, out } => cmd_portrait(code, *permuted, out.as_deref()),
        Command::Sim { experiment, args } => cmd_sim(*experiment, args),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on its own usage errors.
    let cli = Cli::parse();
    sim::init_thread_pool_from_env();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
