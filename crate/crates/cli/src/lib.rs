//! `secnc` command-line front end.
//!
//! Exit codes: 0 success or secure, 1 semantic negative (infeasible code,
//! insecure code, contradiction found), 2 input error, 3 I/O error,
//! 4 enumeration budget exceeded.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use secnc::audit::{
    self, entropy_oracle, is_secure_subset, wiretap_matrices, AuditError, AuditOptions,
    SecurityReport, DEFAULT_ENUMERATION_BUDGET, DEFAULT_SUBSET_BUDGET,
};
use secnc::codec::{decodable, LinearCode};
use secnc::experiments::{self, ExperimentError, TrialOutcome};
use secnc::field::PrimeField;
use secnc::network::{CutCapacities, Network};
use secnc::region::{self, Bound, RatePoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "secnc", version, about = "Secure unicast network coding with a single key node")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the four cut values and the (z, max R) boundary.
    Region(RegionArgs),
    /// Sample a random code on G*, restrict it to G and audit it.
    Construct(ConstructArgs),
    /// Re-propagate a code file and check every wiretap set.
    Audit(AuditArgs),
    /// Run trials at every (R, z) and compare with the predicted region.
    Scan(ScanArgs),
    /// Monte Carlo success rates at one (R, z) against the probability bounds.
    Mc(McArgs),
    /// Rank of A·B for full-row-rank A and uniform B.
    Rankexp(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// write the result here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// refuse to audit more wiretap subsets than this
    #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
    pub budget_subsets: u128,
    /// refuse to enumerate more than this many (M, N) inputs
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget_enum: u128,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, short = 'q', default_value_t = 10007)]
    pub field: u64,
    #[arg(long, env = "SECNC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// worker threads; 0 picks the number of CPUs
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    pub network: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    pub network: PathBuf,
    #[arg(long = "rate", short = 'R')]
    pub rate: usize,
    #[arg(long = "wiretap", short = 'z')]
    pub wiretap: usize,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// stdout format of the verdict summary
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// write the code document (JSON) here
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    pub code: PathBuf,
    /// wiretap budget; defaults to the key dimension of the code
    #[arg(long = "wiretap", short = 'z')]
    pub wiretap: Option<usize>,
    /// count every insecure subset instead of stopping at the first
    #[arg(long)]
    pub exhaustive: bool,
    /// cross-check every subset against the exact mutual-information oracle
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    pub network: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub trials: u64,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    pub network: PathBuf,
    #[arg(long = "rate", short = 'R')]
    pub rate: usize,
    #[arg(long = "wiretap", short = 'z')]
    pub wiretap: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long = "rows", short = 'n')]
    pub n: usize,
    #[arg(long = "cols", short = 'm')]
    pub m: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// enumerate every B instead of sampling
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(String),
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Io(_) => EXIT_IO,
            CliError::Budget(_) => EXIT_BUDGET,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Budget(m) => write!(f, "budget exceeded: {m}"),
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        match e {
            AuditError::SubsetBudget { .. } | AuditError::EnumerationBudget { .. } => {
                CliError::Budget(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Audit(a) => a.into(),
            ExperimentError::EnumerationBudget { .. } => CliError::Budget(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

type CliResult = Result<i32, CliError>;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network, CliError> {
    let text = read_text(path)?;
    Network::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn field(q: u64) -> Result<PrimeField, CliError> {
    PrimeField::new(q).map_err(|e| CliError::Input(e.to_string()))
}

fn emit(out: &OutputArgs, body: &str) -> Result<(), CliError> {
    write_to(out.output.as_deref(), body)
}

fn write_to(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(pool.install(f))
}

fn audit_options(b: &BudgetArgs, exhaustive: bool) -> AuditOptions {
    AuditOptions {
        max_subsets: b.budget_subsets,
        exhaustive,
    }
}

#[derive(Serialize)]
struct RegionDoc {
    caps: CutCapacities,
    boundary: Vec<BoundaryRow>,
}

#[derive(Serialize)]
struct BoundaryRow {
    wiretap: usize,
    max_rate: usize,
}

pub fn cmd_region(args: &RegionArgs) -> CliResult {
    let net = load_network(&args.network)?;
    let caps = net.cut_capacities();
    let boundary: Vec<BoundaryRow> = region::region_boundary(&caps)
        .into_iter()
        .map(|(wiretap, max_rate)| BoundaryRow { wiretap, max_rate })
        .collect();
    let body = match args.out.format {
        Format::Json => to_json(&RegionDoc { caps, boundary }),
        Format::Csv => to_csv(&boundary)?,
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "nodes {}  edges {}", net.node_count(), net.edge_count());
            let _ = writeln!(
                s,
                "C(K-S) = {}  C(K-T) = {}  C(S-T) = {}  C(KS-T) = {}",
                caps.c_ks, caps.c_kt, caps.c_st, caps.c_kst
            );
            if boundary.is_empty() {
                let _ = writeln!(s, "no positive rate is achievable");
            }
            for b in &boundary {
                let _ = writeln!(s, "({},{})", b.wiretap, b.max_rate);
            }
            s
        }
    };
    emit(&args.out, &body)?;
    Ok(EXIT_OK)
}

/// What `construct` writes: the code plus the verdicts it earned.
#[derive(Debug, Serialize)]
pub struct ConstructDoc {
    pub code: LinearCode,
    pub outcome: TrialOutcome,
    pub region_feasible: bool,
    pub violated: Vec<Bound>,
    pub report: SecurityReport,
}

pub fn cmd_construct(args: &ConstructArgs) -> CliResult {
    let net = load_network(&args.network)?;
    let f = field(args.run.field)?;
    let point = RatePoint::new(args.rate, args.wiretap).map_err(|e| CliError::Input(e.to_string()))?;
    let verdict = region::feasible(&net.cut_capacities(), point).map_err(|e| CliError::Input(e.to_string()))?;
    if !verdict.feasible {
        eprintln!(
            "warning: (R={}, z={}) is outside the achievable region (violates {:?}); no code can be feasible",
            args.rate, args.wiretap, verdict.violated
        );
    }
    let opts = audit_options(&args.budget, false);
    let built = with_jobs(args.run.jobs, || {
        experiments::construct(&net, args.rate, args.wiretap, f, args.run.seed, &opts)
    })??;
    let doc = ConstructDoc {
        code: built.code,
        outcome: built.outcome,
        region_feasible: verdict.feasible,
        violated: verdict.violated,
        report: built.report,
    };
    let json = to_json(&doc);
    if let Some(path) = &args.output {
        write_to(Some(path), &json)?;
    }
    let summary = match args.format {
        Format::Json => json,
        Format::Text | Format::Csv => {
            let o = &doc.outcome;
            format!(
                "seed {}\nstar_ok {}\ndecodable {}\nsecure {}\nfeasible {}\n",
                o.seed, o.star_ok, o.decodable, o.secure, o.feasible
            )
        }
    };
    if args.output.is_none() || args.format == Format::Text {
        write_to(None, &summary)?;
    }
    Ok(if doc.outcome.feasible { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Accepts either a `construct` document or a bare code object.
fn parse_code(text: &str) -> Result<LinearCode, serde_json::Error> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(code) = value.get_mut("code") {
        value = code.take();
    }
    serde_json::from_value(value)
}

#[derive(Serialize)]
struct AuditDoc {
    #[serde(flatten)]
    report: SecurityReport,
    decodable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_disagreements: Option<u64>,
}

pub fn cmd_audit(args: &AuditArgs) -> CliResult {
    let text = read_text(&args.code)?;
    let code = parse_code(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.code.display())))?;
    let base = code.restrict_to_base().map_err(|e| CliError::Input(e.to_string()))?;
    let net = base.network();
    let enc = base.propagate();
    let z = args.wiretap.unwrap_or(base.keys());
    let report = audit::audit_all(&enc, net, z, &audit_options(&args.budget, args.exhaustive))?;
    let oracle_disagreements = if args.oracle {
        let mut bad = 0u64;
        let f = base.field();
        let m = net.edge_count();
        let size = z.min(m);
        for subset in combinations(m, size) {
            let wm = wiretap_matrices(&enc, &subset, m)?;
            let leak = entropy_oracle(&enc, &subset, args.budget.budget_enum)?;
            if leak.is_zero() != is_secure_subset(&f, &wm) {
                bad += 1;
            }
        }
        Some(bad)
    } else {
        None
    };
    let doc = AuditDoc {
        decodable: decodable(&enc, net),
        report,
        oracle_disagreements,
    };
    let body = match args.out.format {
        Format::Json | Format::Csv => to_json(&doc),
        Format::Text => {
            let r = &doc.report;
            let mut s = format!(
                "z {}\nsubsets_checked {}\nsecure {}\ndecodable {}\n",
                r.wiretap, r.subsets_checked, r.secure, doc.decodable
            );
            if let Some(v) = &r.first_violation {
                let _ = writeln!(
                    s,
                    "violation edges {:?}: rank[A B] = {} > rank B = {}",
                    v.subset, v.rank_joint, v.rank_key
                );
            }
            if let Some(n) = doc.oracle_disagreements {
                let _ = writeln!(s, "oracle disagreements {n}");
            }
            s
        }
    };
    emit(&args.out, &body)?;
    Ok(if doc.report.secure { EXIT_OK } else { EXIT_NEGATIVE })
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = if k <= n { Some((0..k).collect::<Vec<_>>()) } else { None };
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut c = current.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                next = Some(c);
                break;
            }
        }
        Some(current)
    })
}

pub fn cmd_scan(args: &ScanArgs) -> CliResult {
    let net = load_network(&args.network)?;
    let f = field(args.run.field)?;
    let opts = audit_options(&args.budget, false);
    let scan = with_jobs(args.run.jobs, || {
        experiments::region_scan(&net, f, args.trials, args.run.seed, &opts)
    })??;
    let body = match args.out.format {
        Format::Json => to_json(&scan),
        Format::Csv => to_csv(&scan.rows())?,
        Format::Text => {
            let mut s = String::new();
            let c = scan.caps;
            let _ = writeln!(
                s,
                "C(K-S) = {}  C(K-T) = {}  C(S-T) = {}  C(KS-T) = {}  q = {}  trials/point = {}",
                c.c_ks, c.c_kt, c.c_st, c.c_kst, scan.q, scan.trials_per_point
            );
            for r in scan.rows() {
                let _ = writeln!(
                    s,
                    "R={} z={} region={} successes={}/{} {}{}",
                    r.rate,
                    r.wiretap,
                    if r.region_feasible { "feasible" } else { "infeasible" },
                    r.successes,
                    r.trials,
                    r.status,
                    if r.contradiction { " CONTRADICTION" } else { "" }
                );
            }
            let _ = writeln!(
                s,
                "contradictions {}  unachieved feasible points {}",
                scan.contradictions(),
                scan.unachieved()
            );
            s
        }
    };
    emit(&args.out, &body)?;
    Ok(if scan.contradictions() > 0 { EXIT_NEGATIVE } else { EXIT_OK })
}

pub fn cmd_mc(args: &McArgs) -> CliResult {
    let net = load_network(&args.network)?;
    let f = field(args.run.field)?;
    let opts = audit_options(&args.budget, false);
    let result = with_jobs(args.run.jobs, || {
        experiments::success_rate(&net, args.rate, args.wiretap, f, args.trials, args.run.seed, &opts)
    })??;
    let row = result.row();
    let body = match args.out.format {
        Format::Json => to_json(&result),
        Format::Csv => to_csv(&[row])?,
        Format::Text => {
            let n = result.tally.trials;
            let sig = |k: u64| experiments::sampling_sigma(k, n);
            format!(
                "R={} z={} q={} |E|={} trials={}\n\
                 decodable {:.5} (sigma {:.5})  bound {:.5} {}\n\
                 secure    {:.5} (sigma {:.5})  bound {:.5} {}\n\
                 joint     {:.5} (sigma {:.5})  bound {:.5} {}\n\
                 star_ok {}  restriction violations {}  in region {}\n",
                row.rate,
                row.wiretap,
                row.q,
                row.edges,
                n,
                row.decodable_rate,
                sig(row.decodable),
                row.decodability_bound,
                row.decodability_bound_status,
                row.secure_rate,
                sig(row.secure),
                row.security_bound,
                row.security_bound_status,
                row.joint_rate,
                sig(row.joint),
                row.feasibility_bound,
                row.feasibility_bound_status,
                row.star_ok,
                row.restriction_violations,
                row.region_feasible
            )
        }
    };
    emit(&args.out, &body)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExactRank {
    n: usize,
    m: usize,
    q: u64,
    full_rank: u128,
    total: u128,
    probability: f64,
    bound: f64,
}

pub fn cmd_rankexp(args: &RankArgs) -> CliResult {
    let f = field(args.run.field)?;
    let body = if args.exact {
        let (count, total) =
            experiments::rank_product_exact(args.n, args.m, f, args.run.seed, args.budget.budget_enum)?;
        let doc = ExactRank {
            n: args.n,
            m: args.m,
            q: f.q(),
            full_rank: count,
            total,
            probability: count as f64 / total as f64,
            bound: 1.0 - args.n as f64 / f.q() as f64,
        };
        match args.out.format {
            Format::Json => to_json(&doc),
            Format::Csv => to_csv(&[doc])?,
            Format::Text => format!(
                "n={} m={} q={}: {}/{} = {:.6} (bound {:.6})\n",
                doc.n, doc.m, doc.q, doc.full_rank, doc.total, doc.probability, doc.bound
            ),
        }
    } else {
        let e = with_jobs(args.run.jobs, || {
            experiments::rank_product_experiment(args.n, args.m, f, args.trials, args.run.seed)
        })??;
        match args.out.format {
            Format::Json => to_json(&e),
            Format::Csv => to_csv(&[ExactRank {
                n: e.n,
                m: e.m,
                q: e.q,
                full_rank: e.full_rank as u128,
                total: e.trials as u128,
                probability: e.probability,
                bound: e.bound.value,
            }])?,
            Format::Text => format!(
                "n={} m={} q={} trials={}: Pr[rank(AB) = n] = {:.6} (sigma {:.6}), bound {:.6}\n",
                e.n,
                e.m,
                e.q,
                e.trials,
                e.probability,
                e.sigma(),
                e.bound.value
            ),
        }
    };
    emit(&args.out, &body)?;
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Region(a) => cmd_region(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Rankexp(a) => cmd_rankexp(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("secnc: {e}");
            e.exit_code()
        }
    }
}
