//! `sumdecomp`: command-line front end for the codecs, the decomposition
//! lab, the Ψ plotter and the latent-dimension experiment.
//!
//! Exit codes: 0 on success, 1 on domain errors (and failed checks),
//! 2 on usage errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::Rng;

use sumdecomp::experiment::{
    critical_points, critical_points_chart, critical_points_csv, median, parse_grid, sweep, SweepResult,
    TrainConfig,
};
use sumdecomp::{
    check_sum_decomposition, divergence_witness, format_real, max_collision_adversary, parse_reals,
    CountableUniverse, DomainInterval, ElementMap, Error, ExactRational, Frame, LatentVector, Multiset,
    PowerSumCodec, PsiConfig, Seed, VarSizeCodec,
};

#[derive(Parser)]
#[command(name = "sumdecomp", version, about = "Sum-decomposition of set functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a multiset of size M as its M power sums.
    Encode(EncodeArgs),
    /// Recover a multiset of size M from its power sums.
    Decode(DecodeArgs),
    /// Encode a multiset of size at most M with sentinel padding.
    EncodeVar(EncodeVarArgs),
    /// Recover a multiset of size at most M from its padded encoding.
    DecodeVar(DecodeVarArgs),
    /// Exact encodings of subsets and multisets of a countable universe.
    #[command(subcommand)]
    Countable(CountableCommand),
    /// Build a set with the same coordinate-wise φ-maxima but a different sum.
    Adversary(AdversaryArgs),
    /// Check the power-sum decomposition of a set function on random sets.
    /// Exits 1 if the check fails.
    CheckDecomp(CheckDecompArgs),
    /// Sample Ψ on [0, A] and write `x,psi` CSV.
    Psi(PsiArgs),
    /// Train Deep Sets models over a grid of (M, N) and write `M,N,seed,rmse_final`.
    Experiment(ExperimentArgs),
    /// Extract critical latent dimensions from a sweep CSV.
    CriticalPoints(CriticalArgs),
}

#[derive(Args)]
struct DomainArgs {
    /// Lower end of the element domain.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lo: f64,
    /// Upper end of the element domain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    hi: f64,
}

impl DomainArgs {
    fn domain(&self) -> Result<DomainInterval, Error> {
        DomainInterval::new(self.lo, self.hi)
    }
}

#[derive(Args)]
struct CodecArgs {
    /// Set size M.
    #[arg(long)]
    m: usize,
    #[command(flatten)]
    domain: DomainArgs,
    /// Coordinates of the power sums: `unit` (the literal x ↦ (x, …, x^M) on
    /// [0, 1]) or `centered` (domain mapped to [-1, 1], better conditioned
    /// for large M).
    #[arg(long, default_value = "unit", value_parser = parse_frame)]
    frame: Frame,
}

impl CodecArgs {
    fn codec(&self) -> Result<PowerSumCodec, Error> {
        Ok(PowerSumCodec::new(self.m, self.domain.domain()?)?.with_frame(self.frame))
    }
}

fn parse_frame(s: &str) -> Result<Frame, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    codec: CodecArgs,
    /// Multiset text form, e.g. "{0.25,0.75}".
    #[arg(long)]
    set: String,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    codec: CodecArgs,
    /// Comma-separated latent vector.
    #[arg(long, allow_hyphen_values = true)]
    latent: String,
}

#[derive(Args)]
struct VarArgs {
    /// Maximum set size M.
    #[arg(long)]
    m: usize,
    #[command(flatten)]
    domain: DomainArgs,
    /// Sentinel outside the domain; defaults to lo − 1.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
}

impl VarArgs {
    fn codec(&self) -> Result<VarSizeCodec, Error> {
        let domain = self.domain.domain()?;
        match self.k {
            Some(k) => VarSizeCodec::with_sentinel(self.m, domain, k),
            None => VarSizeCodec::new(self.m, domain),
        }
    }
}

#[derive(Args)]
struct EncodeVarArgs {
    #[command(flatten)]
    var: VarArgs,
    #[arg(long)]
    set: String,
}

#[derive(Args)]
struct DecodeVarArgs {
    #[command(flatten)]
    var: VarArgs,
    #[arg(long, allow_hyphen_values = true)]
    latent: String,
}

#[derive(Subcommand)]
enum CountableCommand {
    /// Subset of indices to the exact rational Σ 4^(−i), printed as num/den.
    Encode(IndexArgs),
    /// Exact rational back to the subset of indices.
    Decode(ValueArgs),
    /// Multiset of indices to the product of their primes.
    PrimeEncode(IndexArgs),
    /// Integer back to the multiset of indices by factorisation.
    PrimeDecode(ValueArgs),
    /// Partial sums showing that a repeated element has an unbounded sum.
    Divergence {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
    },
}

#[derive(Args)]
struct IndexArgs {
    /// Universe size U (indices 0..U).
    #[arg(long)]
    universe: u64,
    /// Comma-separated indices, e.g. "0,2".
    #[arg(long)]
    indices: String,
}

#[derive(Args)]
struct ValueArgs {
    #[arg(long)]
    universe: u64,
    /// `num/den` for decode, an integer for prime-decode.
    #[arg(long)]
    value: String,
}

#[derive(Args)]
struct AdversaryArgs {
    /// Latent dimension N of φ.
    #[arg(long)]
    n: usize,
    /// Set size M; must equal the number of elements in --x.
    #[arg(long)]
    m: usize,
    /// `random:SEED` (small tanh MLP), `identity` (N = 1) or `power` (x, x², …).
    #[arg(long, default_value = "random:0")]
    phi: String,
    /// Distinct elements, e.g. "1,2,3".
    #[arg(long, allow_hyphen_values = true)]
    x: String,
}

#[derive(Args)]
struct CheckDecompArgs {
    /// Set size M.
    #[arg(long)]
    m: usize,
    /// Target set function: max, min, median, sum or mean.
    #[arg(long, default_value = "max")]
    f: String,
    /// Number of random sets drawn uniformly from [0, 1].
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "centered", value_parser = parse_frame)]
    frame: Frame,
}

#[derive(Args)]
struct PsiArgs {
    /// Number of evenly spaced sample points on [0, A].
    #[arg(long, default_value_t = 2001)]
    resolution: usize,
    /// Truncation tolerance of the series.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value = "psi.csv")]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Scale A (irrational); defaults to ln 4.
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value = "M=4,8,16;N=1..24")]
    grid: String,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// key=value file overriding training defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// RMSE-versus-N chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CriticalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Critical-N-versus-M chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

enum Failure {
    Domain(String),
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::UnknownDistribution(_) | Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn write_file(path: &PathBuf, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))
}

fn parse_indices(text: &str) -> Result<Vec<u64>, Failure> {
    let t = text.trim().trim_start_matches('{').trim_end_matches('}');
    if t.trim().is_empty() {
        return Ok(Vec::new());
    }
    t.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid index `{}`", s.trim())))
        })
        .collect()
}

fn join_indices(indices: &[u64]) -> String {
    indices.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn encode(args: &EncodeArgs) -> CliResult {
    let codec = args.codec.codec()?;
    let set = Multiset::parse(&args.set, codec.domain())?;
    println!("{}", codec.encode(&set)?);
    Ok(())
}

fn decode(args: &DecodeArgs) -> CliResult {
    let codec = args.codec.codec()?;
    println!("{}", codec.decode(&LatentVector::parse(&args.latent)?)?);
    Ok(())
}

fn encode_var(args: &EncodeVarArgs) -> CliResult {
    let codec = args.var.codec()?;
    let set = Multiset::parse(&args.set, codec.domain())?;
    println!("{}", codec.encode_var(&set)?);
    Ok(())
}

fn decode_var(args: &DecodeVarArgs) -> CliResult {
    let codec = args.var.codec()?;
    println!("{}", codec.decode_var(&LatentVector::parse(&args.latent)?)?);
    Ok(())
}

fn countable(cmd: &CountableCommand) -> CliResult {
    match cmd {
        CountableCommand::Encode(a) => {
            let u = CountableUniverse::new(a.universe)?;
            println!("{}", u.base4_encode(&parse_indices(&a.indices)?)?);
        }
        CountableCommand::Decode(a) => {
            let u = CountableUniverse::new(a.universe)?;
            println!("{}", join_indices(&u.base4_decode(&ExactRational::parse(&a.value)?)?));
        }
        CountableCommand::PrimeEncode(a) => {
            let u = CountableUniverse::new(a.universe)?;
            println!("{}", u.prime_encode(&parse_indices(&a.indices)?)?);
        }
        CountableCommand::PrimeDecode(a) => {
            let u = CountableUniverse::new(a.universe)?;
            let n: BigUint = a
                .value
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid integer `{}`", a.value)))?;
            println!("{}", join_indices(&u.prime_decode(&n)?));
        }
        CountableCommand::Divergence { a } => {
            let w = divergence_witness(*a)?;
            println!("{}", w.statement());
            println!("n,partial_sum");
            for (n, s) in w.partial_sums.iter().enumerate().take(10) {
                println!("{},{}", n + 1, format_real(*s));
            }
        }
    }
    Ok(())
}

fn element_map(spec: &str, n: usize, domain: DomainInterval) -> Result<ElementMap, Failure> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: Seed = seed.parse()?;
        return Ok(ElementMap::random_mlp(n, 16, domain, seed));
    }
    match spec {
        "identity" if n == 1 => Ok(ElementMap::new(1, domain, |x| vec![x])),
        "identity" => Err(Failure::Usage("--phi identity needs --n 1".into())),
        "power" => Ok(ElementMap::new(n, domain, move |x| {
            (1..=n as i32).map(|q| x.powi(q)).collect()
        })),
        other => Err(Failure::Usage(format!(
            "unknown --phi `{other}`; expected random:SEED, identity or power"
        ))),
    }
}

fn adversary(args: &AdversaryArgs) -> CliResult {
    let xs = parse_reals(args.x.trim().trim_start_matches('{').trim_end_matches('}'))?;
    if xs.len() != args.m {
        return Err(Error::SizeMismatch {
            expected: args.m,
            actual: xs.len(),
        }
        .into());
    }
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let domain = xs
        .iter()
        .fold(DomainInterval::unit(), |d, &x| if x.is_finite() { d.extended_to(x) } else { d });
    let phi = element_map(&args.phi, args.n, domain)?;
    let x = Multiset::canonicalize(xs, domain)?;
    let (tilde, report) = max_collision_adversary(&phi, &x)?;
    println!("x\t{x}");
    println!("x_tilde\t{tilde}");
    print!("{}", report.table());
    println!(
        "certificate\tmaxima_equal={}\tsums_differ={}",
        report.maxima_equal(),
        report.sums_differ()
    );
    Ok(())
}

fn check_decomp(args: &CheckDecompArgs) -> CliResult {
    type SetFn = fn(&Multiset) -> f64;
    let f: SetFn = match args.f.as_str() {
        "max" => |s| s.elements().iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "min" => |s| s.elements().iter().cloned().fold(f64::INFINITY, f64::min),
        "median" => |s| median(s).unwrap_or(f64::NAN),
        "sum" => |s| s.elements().iter().sum(),
        "mean" => |s| s.elements().iter().sum::<f64>() / s.len() as f64,
        other => return Err(Failure::Usage(format!("unknown --f `{other}`"))),
    };
    if args.m == 0 {
        return Err(Failure::Usage("--m must be at least 1".into()));
    }
    let codec = PowerSumCodec::new(args.m, DomainInterval::unit())?.with_frame(args.frame);
    let mut rng = Seed(args.seed).rng();
    let samples: Vec<Multiset> = (0..args.samples)
        .map(|_| Multiset::canonicalize((0..args.m).map(|_| rng.gen()).collect(), DomainInterval::unit()))
        .collect::<Result<_, _>>()?;
    let report = check_sum_decomposition(&codec.element_map(), codec.build_rho(f), f, &samples, args.tol);
    println!("samples\t{}", report.samples);
    println!("worst_residual\t{}", format_real(report.worst_residual));
    if let Some(i) = report.worst_sample {
        println!("worst_sample\t{}", samples[i]);
    }
    println!("decode_errors\t{}", report.errors.len());
    println!("result\t{}", if report.passed { "pass" } else { "fail" });
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("decomposition check failed for f = {}", args.f)))
    }
}

fn psi(args: &PsiArgs) -> CliResult {
    let mut config = PsiConfig::default();
    if let Some(a) = args.scale {
        config = config.with_scale(a)?;
    }
    config.emit_plot(args.resolution, args.tol, &args.out, args.svg.as_deref())?;
    println!("wrote {} samples to {}", args.resolution, args.out.display());
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> CliResult {
    let mut base = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            TrainConfig::parse(&text)?
        }
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        base.seed = Seed(seed);
    }
    let grid = parse_grid(&args.grid)?;
    let result = sweep(&grid, args.repeats, &base)?;
    result.write_csv(&args.out)?;
    if let Some(svg) = &args.svg {
        write_file(svg, &result.rmse_chart().to_svg())?;
    }
    for f in &result.failures {
        eprintln!("run M={} N={} seed={} failed: {}", f.set_size, f.latent_dim, f.seed.0, f.message);
    }
    println!(
        "wrote {} runs to {} ({} failed)",
        result.rows.len(),
        args.out.display(),
        result.failures.len()
    );
    Ok(())
}

fn critical(args: &CriticalArgs) -> CliResult {
    let result = SweepResult::read_csv(&args.input)?;
    let points = critical_points(&result)?;
    let csv = critical_points_csv(&points);
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(svg) = &args.svg {
        write_file(svg, &critical_points_chart(&points).to_svg())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::EncodeVar(a) => encode_var(a),
        Command::DecodeVar(a) => decode_var(a),
        Command::Countable(c) => countable(c),
        Command::Adversary(a) => adversary(a),
        Command::CheckDecomp(a) => check_decomp(a),
        Command::Psi(a) => psi(a),
        Command::Experiment(a) => experiment(a),
        Command::CriticalPoints(a) => critical(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) | Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
