use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use lpirsi::analysis::fixtures::{check_fixture, find_fixture, fixtures, render_table, table_rows};
use lpirsi::analysis::{
    estimate_download_cost, exact_download_cost, grid, joint_leakage_oracle, max_leakage_ratio, sweep_to_csv,
    within_sigma, SweepOptions,
};
use lpirsi::params::{parse_rational, rational_to_f64};
use lpirsi::protocol::dbfile::{load_database, save_database};
use lpirsi::protocol::{run_retrieval, Server, ServerConfig, TcpTransport};
use lpirsi::{Database, Error, PrimeField, Rational, RetrievalRequest, SchemeParams, Variant};

mod exit {
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const TRANSPORT: u8 = 4;
}

#[derive(Parser)]
#[command(name = "lpirsi", version, about = "Leaky private information retrieval with side information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure the download cost of in-process retrievals against the exact value.
    Simulate(SimulateArgs),
    /// Certify the leakage of a scheme by exact enumeration.
    Verify(VerifyArgs),
    /// Print the realizations of the random pattern for a fixed permutation.
    Table(TableArgs),
    /// Cost and leakage over a parameter grid, as CSV.
    Sweep(SweepArgs),
    /// Serve a database over TCP.
    Serve(ServeArgs),
    /// Retrieve a message from running servers.
    Query(QueryArgs),
    /// Write a random database file.
    Gendb(GendbArgs),
}

#[derive(Args)]
struct SchemeArgs {
    /// Number of servers N.
    #[arg(long)]
    n: usize,
    /// Number of messages K.
    #[arg(long)]
    k: usize,
    /// Side-information size M.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[command(flatten)]
    leak: LeakArgs,
    /// `w` or `ws`.
    #[arg(long, default_value = "w")]
    variant: Variant,
    /// Field modulus.
    #[arg(long, default_value_t = 257)]
    q: u64,
}

#[derive(Args)]
#[group(multiple = false)]
struct LeakArgs {
    /// Leakage budget; t = e^-epsilon, rounded to a nearby rational unless 0.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// t = e^-epsilon as an exact rational such as 1/2.
    #[arg(long)]
    t: Option<String>,
}

impl LeakArgs {
    /// Defaults to t = 1; the flag says whether `t` was rounded.
    fn resolve(&self) -> anyhow::Result<(Rational, bool)> {
        match (&self.t, self.epsilon) {
            (Some(t), _) => Ok((parse_rational(t)?, false)),
            (None, Some(eps)) => epsilon_to_t(eps),
            (None, None) => Ok((Rational::one(), false)),
        }
    }
}

const MAX_DENOMINATOR: i64 = 1_000_000;

fn epsilon_to_t(eps: f64) -> anyhow::Result<(Rational, bool)> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParams(format!("epsilon must be finite and non-negative, got {eps}")).into());
    }
    if eps == 0.0 {
        return Ok((Rational::one(), false));
    }
    Ok((limit_denominator((-eps).exp(), MAX_DENOMINATOR), true))
}

/// Best rational approximation of `x` in `(0, 1]` with denominator at most `max_den`.
fn limit_denominator(x: f64, max_den: i64) -> Rational {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    loop {
        let a = v.floor() as i64;
        let q2 = q0 + a * q1;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p0 + a * p1, q2);
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    Rational::new(p1.into(), q1.into())
}

impl SchemeArgs {
    fn params(&self) -> anyhow::Result<(SchemeParams, bool)> {
        let (t, rounded) = self.leak.resolve()?;
        let p = SchemeParams::new(self.n, self.k, self.m, t, PrimeField::new(self.q)?, self.variant)?;
        Ok((p, rounded))
    }
}

fn rounding_note(p: &SchemeParams, rounded: bool) {
    if rounded {
        println!(
            "note: t = e^-epsilon is irrational; using t = {} ({}) and certifying against 1/t",
            p.t(),
            rational_to_f64(p.t())
        );
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Also run the joint query/answer oracle over every database in F_Q (Q <= 3).
    #[arg(long, value_name = "Q")]
    joint: Option<u64>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Permutation as comma-separated values, e.g. 0,1,2.
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<usize>>,
    /// Compare the rows with the embedded reference table.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Server counts: a value, a list `3,4` or a range `3:6`.
    #[arg(long, default_value = "3")]
    n: String,
    #[arg(long, default_value = "3:6")]
    k: String,
    #[arg(long, default_value = "1")]
    m: String,
    /// Comma-separated rationals.
    #[arg(long, default_value = "1/2")]
    t: String,
    #[arg(long, default_value = "w")]
    variant: Variant,
    #[arg(long, default_value_t = 257)]
    q: u64,
    /// Monte Carlo trials per point; 0 skips the measurement.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the exact leakage enumeration.
    #[arg(long)]
    no_certify: bool,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Server endpoints `host:port`, in server order.
    #[arg(long, value_delimiter = ',', required = true)]
    servers: Vec<String>,
    /// Database file the side information is read from.
    #[arg(long)]
    db: PathBuf,
    /// Demand index W (1-based).
    #[arg(long)]
    w: usize,
    /// Side-information indices.
    #[arg(long, value_delimiter = ',')]
    s: Vec<usize>,
    #[command(flatten)]
    leak: LeakArgs,
    #[arg(long, default_value = "w")]
    variant: Variant,
    #[arg(long)]
    seed: Option<u64>,
    /// Socket timeout in seconds.
    #[arg(long, default_value_t = 10)]
    timeout: u64,
}

#[derive(Args)]
struct GendbArgs {
    #[arg(long)]
    k: usize,
    /// Sub-packets per message (N - 1 for N servers).
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 257)]
    q: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

/// A failed self-check or certification, as opposed to an error.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CheckFailed>().is_some() {
        return exit::CHECK_FAILED;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::DecodeMismatch) | Some(Error::ProtocolViolation(_)) => exit::CHECK_FAILED,
        Some(Error::Infeasible { .. }) => exit::INFEASIBLE,
        Some(Error::Transport(_)) | Some(Error::Io(_)) | Some(Error::ServerRejected { .. }) | Some(Error::Wire(_)) => {
            exit::TRANSPORT
        }
        _ => exit::USAGE,
    }
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let (params, _) = args.scheme.params()?;
    let exact = exact_download_cost(&params)?;
    let exact_f = rational_to_f64(&exact);
    println!(
        "N={} K={} M={} t={} variant={}",
        params.servers(),
        params.messages(),
        params.side_info(),
        params.t(),
        params.variant()
    );
    println!("exact cost    = {exact} ({exact_f:.6})");
    if args.trials == 0 {
        return Ok(());
    }
    let est = estimate_download_cost(&params, args.trials, args.seed)?;
    println!("measured cost = {:.6} ± {:.6} over {} retrievals", est.mean, est.stderr, est.trials);
    let agrees = within_sigma(&est, exact_f, 4.0);
    println!("agreement within 4 standard errors: {}", if agrees { "yes" } else { "no" });
    Ok(())
}

fn verify(args: VerifyArgs) -> anyhow::Result<()> {
    let (params, rounded) = args.scheme.params()?;
    rounding_note(&params, rounded);
    let report = max_leakage_ratio(&params)?;
    let allowed = report.allowed_ratio();
    let relation = match &report.max_ratio {
        lpirsi::analysis::Ratio::Finite(r) if *r == allowed => "=",
        lpirsi::analysis::Ratio::Finite(r) if *r < allowed => "<",
        _ => ">",
    };
    let ratios: Vec<String> = report.ratio_set.iter().map(ToString::to_string).collect();
    println!("ratio set = {{{}}}", ratios.join(", "));
    if let Some(w) = &report.witness {
        println!(
            "witness: server {} query {}: P[{}] = {} vs P[{}] = {}",
            w.server, w.outcome, w.numerator, w.numerator_prob, w.denominator, w.denominator_prob
        );
    }
    let certified = report.certified;
    let bound = if relation == "=" { "= e^ε".to_string() } else { format!("{relation} e^ε = {allowed}") };
    let verdict = if certified { "certified" } else { "NOT certified" };
    println!("max ratio = {} {bound}, {verdict}", report.max_ratio);
    if let Some(q) = args.joint {
        let joint = joint_leakage_oracle(&params, q)?;
        let same = joint.max_ratio == report.max_ratio;
        println!(
            "joint (query, answer) max ratio over F_{q} = {}, {}",
            joint.max_ratio,
            if same { "matches" } else { "DIFFERS" }
        );
        if !same {
            return Err(CheckFailed("joint oracle disagrees with the query-only ratio".into()).into());
        }
    }
    if !certified {
        return Err(CheckFailed(format!("max ratio {} exceeds {allowed}", report.max_ratio)).into());
    }
    Ok(())
}

fn table(args: TableArgs) -> anyhow::Result<()> {
    let (params, _) = args.scheme.params()?;
    let perm = args.pi.unwrap_or_else(|| (0..params.servers()).collect());
    let rows = table_rows(&params, &perm)?;
    print!("{}", render_table(&params, &perm, &rows)?);
    println!("{} realizations", rows.len());
    if !args.check {
        return Ok(());
    }
    let identity: Vec<usize> = (0..params.servers()).collect();
    if perm != identity {
        return Err(Error::InvalidParams("--check compares the identity permutation only".into()).into());
    }
    let Some(fixture) = find_fixture(params.servers(), params.messages(), params.side_info(), params.variant()) else {
        let available: Vec<String> = fixtures()
            .iter()
            .map(|f| format!("(N,K,M)=({},{},{}) {}", f.servers, f.messages, f.side_info, f.variant))
            .collect();
        return Err(Error::InvalidParams(format!(
            "no reference table for these parameters; available: {}",
            available.join(", ")
        ))
        .into());
    };
    let check = check_fixture(&fixture, &rows);
    for row in &check.missing {
        println!("missing: {row}");
    }
    for row in &check.extra {
        println!("extra: {row}");
    }
    if !check.passed() {
        return Err(CheckFailed(format!("{} differs from the enumeration", fixture.name)).into());
    }
    if fixture.complete {
        println!("{}: all {} rows match", fixture.name, fixture.rows.len());
    } else {
        println!("{}: all {} listed rows found (partial listing)", fixture.name, fixture.rows.len());
    }
    Ok(())
}

fn parse_range(s: &str, what: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || Error::InvalidParams(format!("cannot parse --{what} {s:?}"));
    if let Some((a, b)) = s.split_once(':') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad().into());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad().into())).collect()
}

fn sweep_cmd(args: SweepArgs) -> anyhow::Result<()> {
    let ns = parse_range(&args.n, "n")?;
    let ks = parse_range(&args.k, "k")?;
    let ms = parse_range(&args.m, "m")?;
    let ts = args.t.split(',').map(parse_rational).collect::<lpirsi::Result<Vec<_>>>()?;
    let points = grid(&ns, &ks, &ms, &ts);
    let opts = SweepOptions { trials: args.trials, seed: args.seed, certify: !args.no_certify };
    let field = PrimeField::new(args.q)?;
    let rows = match &args.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = BufWriter::new(file);
            let rows = sweep_to_csv(&points, args.variant, field, &opts, &mut out)?;
            out.flush()?;
            rows
        }
        None => sweep_to_csv(&points, args.variant, field, &opts, io::stdout().lock())?,
    };
    let failed = rows.iter().filter(|r| !r.errors.is_empty()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points reported errors (see the error column)", rows.len());
    }
    if rows.iter().any(|r| r.certified == Some(false)) {
        return Err(CheckFailed("some grid points exceed their leakage budget".into()).into());
    }
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let config = ServerConfig::load(&args.config)?;
    let db = config.load_database()?;
    let server = Server::bind(config.bind_address(), db)?;
    eprintln!("listening on {}", server.local_addr());
    server.run();
    Ok(())
}

fn query(args: QueryArgs) -> anyhow::Result<()> {
    let db: Database = load_database(&args.db)?;
    let n = args.servers.len();
    if n != db.subpackets() + 1 {
        bail!(Error::InvalidParams(format!(
            "{n} servers given, but the database has {} sub-packets per message (needs N = L + 1)",
            db.subpackets()
        )));
    }
    let (t, rounded) = args.leak.resolve()?;
    let params = SchemeParams::new(n, db.message_count(), args.s.len(), t, db.field(), args.variant)?;
    rounding_note(&params, rounded);
    let req = RetrievalRequest::new(args.w, args.s.iter().copied(), db.message_count())?;
    let mut rng = match args.seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_os_rng(),
    };
    let transport = TcpTransport::new(args.servers.clone()).with_timeout(std::time::Duration::from_secs(args.timeout));
    let outcome = run_retrieval(&params, &req, &db.side_info(&req), &transport, &mut rng)?;
    info!("session {:#x} pattern {:?}", outcome.session_id, outcome.pattern);
    for (i, (q, a)) in outcome.queries.iter().zip(&outcome.answers).enumerate() {
        println!("server {}: query {q} answer {a:?}", i + 1);
    }
    let symbols: Vec<String> = outcome.message.subpackets().iter().map(u64::to_string).collect();
    println!("message {} = [{}]", args.w, symbols.join(", "));
    println!("downloaded {} symbols (cost {})", outcome.symbols, outcome.normalized_cost());
    Ok(())
}

fn gendb(args: GendbArgs) -> anyhow::Result<()> {
    if args.k.is_zero() || args.l.is_zero() {
        bail!(Error::InvalidParams("K and L must be positive".into()));
    }
    let field = PrimeField::new(args.q)?;
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let db = Database::random(args.k, args.l, field, &mut rng);
    save_database(&db, &args.output)?;
    println!("wrote {} messages of {} symbols over F_{} to {}", args.k, args.l, args.q, args.output.display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Table(a) => table(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Serve(a) => serve(a),
        Command::Query(a) => query(a),
        Command::Gendb(a) => gendb(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LPIRSI_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
