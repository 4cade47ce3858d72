//! Command-line front end: corpus analysis, guess curves, policy arithmetic,
//! bin-assignment experiments, grammar ordering, and long-password scans.
//!
//! Every subcommand is deterministic given its inputs and `--seed`; rerunning
//! produces byte-identical reports. Reports are written whole or not at all —
//! a failed run removes its partial output file and exits non-zero.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use binwise::exact::{log2_biguint, parse_exact_uint, ratio_display, ratio_to_f64};
use binwise::{
    budget_from_rate, build_bin_model, build_hybrid_model, classify, compare_density,
    effective_budget_after_salting, equivalence_check, long_password_substring_share,
    min_length, order_by_preterminal_density, order_by_preterminal_probability,
    parse_universe_spec, search_space_size, simulate_attack, strategy_comparison,
    utilization_report, AssignmentState, BinPattern, Corpus, CorpusFormat, GrammarInstance,
    GuessBlock, Partition, PlanOrder, PolicyParams, StrategyKind,
};

#[derive(Parser)]
#[command(name = "binwise", version, about = "Bin-level password space analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a corpus: totals, bin utilization, densest bins, pattern shares
    Analyze(AnalyzeArgs),
    /// Replay a guessing attack against a test corpus and emit the curve
    Attack(AttackArgs),
    /// Minimum password length that bounds expected attacker success
    Policy(PolicyArgs),
    /// Assign users to bins under a strategy and report the stretch
    Assign(AssignArgs),
    /// Order a grammar instance's guess blocks by probability and by density
    Grammar(GrammarArgs),
    /// Share of long passwords that contain popular passwords as substrings
    Longpass(LongpassArgs),
    /// Utilized vs available bins per length
    Utilization(UtilizationArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusInput {
    /// one password per line
    Raw,
    /// "<count>\t<password>" per line
    Freq,
}

impl From<CorpusInput> for CorpusFormat {
    fn from(value: CorpusInput) -> Self {
        match value {
            CorpusInput::Raw => CorpusFormat::Raw,
            CorpusInput::Freq => CorpusFormat::Freq,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    #[value(name = "round_robin")]
    RoundRobin,
    #[value(name = "density_ordered")]
    DensityOrdered,
    #[value(name = "random")]
    Random,
    #[value(name = "two_choices")]
    TwoChoices,
    /// run every strategy on independent seed streams
    #[value(name = "all")]
    All,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// corpus file
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    corpus_format: CorpusInput,
    /// longest modeled password length
    #[arg(long, default_value_t = 16)]
    lmax: u32,
    /// pattern file, one quantified class pattern per line
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct AttackArgs {
    /// corpus the attacker learns densities from
    #[arg(long)]
    train: PathBuf,
    /// corpus the attack is scored against
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    corpus_format: CorpusInput,
    /// exploration order: density (greedy-optimal) or probability
    #[arg(long, default_value = "density")]
    order: OrderArg,
    /// log2 guess budgets to report, ascending
    #[arg(long, value_delimiter = ',', default_value = "8,16,24,32,40,48,56,64")]
    checkpoints: Vec<f64>,
    /// unit partitions for the k most popular training passwords
    #[arg(short, long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    lmax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Density,
    Probability,
}

impl From<OrderArg> for PlanOrder {
    fn from(value: OrderArg) -> Self {
        match value {
            OrderArg::Density => PlanOrder::Density,
            OrderArg::Probability => PlanOrder::Probability,
        }
    }
}

#[derive(clap::Args)]
struct PolicyArgs {
    /// protected user count φ
    #[arg(long, value_parser = parse_exact_uint)]
    users: BigUint,
    /// attacker guess budget α (exclusive with --rate/--seconds)
    #[arg(long, value_parser = parse_exact_uint, conflicts_with_all = ["rate", "seconds"])]
    budget: Option<BigUint>,
    /// guesses per second, to derive the budget from hardware throughput
    #[arg(long, value_parser = parse_exact_uint, requires = "seconds")]
    rate: Option<BigUint>,
    /// attack duration in seconds
    #[arg(long, value_parser = parse_exact_uint, requires = "rate")]
    seconds: Option<BigUint>,
    /// tolerated expected number of cracked accounts E
    #[arg(long, value_parser = parse_exact_uint)]
    tolerated: BigUint,
    /// alphabet size per password position
    #[arg(long, value_parser = parse_exact_uint, default_value = "95")]
    alphabet: BigUint,
    /// distinct salt values; divides the per-user budget
    #[arg(long, value_parser = parse_exact_uint)]
    salted_users: Option<BigUint>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct AssignArgs {
    /// universe spec: signature lines or `length=L pattern=P` generators
    #[arg(long)]
    universe: PathBuf,
    /// users to assign
    #[arg(long)]
    users: u64,
    /// RNG seed (strategies draw from independent streams)
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "all")]
    strategy: StrategyArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::Args)]
struct GrammarArgs {
    /// grammar instance JSON: pre-terminal counts plus length dictionaries
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct LongpassArgs {
    /// corpus file
    corpus: PathBuf,
    /// popular passwords to scan for, one per line
    popular: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    corpus_format: CorpusInput,
    /// only passwords at least this long qualify
    #[arg(long, default_value_t = 12)]
    min_len: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct UtilizationArgs {
    /// corpus file
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    corpus_format: CorpusInput,
    #[arg(long, default_value_t = 16)]
    lmax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    if let Ok(raw) = std::env::var("BINWISE_THREADS") {
        let threads: usize = raw
            .trim()
            .parse()
            .with_context(|| format!("BINWISE_THREADS={raw:?} is not a thread count"))?;
        ensure!(threads >= 1, "BINWISE_THREADS must be at least 1");
        binwise::limit_threads(threads);
    }
    match Cli::parse().command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Policy(args) => cmd_policy(args),
        Command::Assign(args) => cmd_assign(args),
        Command::Grammar(args) => cmd_grammar(args),
        Command::Longpass(args) => cmd_longpass(args),
        Command::Utilization(args) => cmd_utilization(args),
    }
}

// ---------------------------------------------------------------- plumbing

/// Write the whole report, or nothing: a failed write removes the file.
fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => fs::write(path, content).map_err(|err| {
            let _ = fs::remove_file(path);
            anyhow::Error::new(err).context(format!("writing {}", path.display()))
        }),
    }
}

fn load_corpus(path: &Path, format: CorpusInput) -> Result<Corpus> {
    let corpus = Corpus::ingest_path(path, format.into())
        .with_context(|| format!("reading corpus {}", path.display()))?;
    ensure!(corpus.total() > 0, "corpus {} has no usable passwords", path.display());
    Ok(corpus)
}

fn to_json(value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Exact decimal string plus a log2 summary, the two notations every large
/// quantity is reported in.
#[derive(Serialize)]
struct BigNum {
    exact: String,
    log2: f64,
}

impl BigNum {
    fn uint(n: &BigUint) -> Self {
        BigNum {
            exact: n.to_string(),
            log2: round2(log2_biguint(n)),
        }
    }
}

/// Exact rational plus its float value, for quantities plotted linearly.
#[derive(Serialize)]
struct RatNum {
    exact: String,
    value: f64,
}

impl RatNum {
    fn ratio(r: &BigRational) -> Self {
        RatNum {
            exact: ratio_display(r),
            value: ratio_to_f64(r),
        }
    }
}

// ----------------------------------------------------------------- analyze

const DEFAULT_PATTERNS: [&str; 4] = ["L+", "D+", "L+D+", "U1L+D+"];

#[derive(Serialize)]
struct AnalyzeReport {
    total: u64,
    distinct: usize,
    skipped: SkippedOut,
    l_max: u32,
    search_space: BigNum,
    over_length: OverLengthOut,
    utilization: Vec<UtilizationRowOut>,
    total_utilized: u64,
    top_by_density: Vec<BinRowOut>,
    top_by_count: Vec<BinRowOut>,
    pattern_shares: Vec<PatternShareOut>,
}

#[derive(Serialize)]
struct SkippedOut {
    non_printable: u64,
    empty: u64,
    malformed: u64,
}

#[derive(Serialize)]
struct OverLengthOut {
    mass: u64,
    distinct: usize,
}

#[derive(Serialize)]
struct UtilizationRowOut {
    length: u32,
    available: String,
    utilized: u64,
}

#[derive(Serialize)]
struct BinRowOut {
    signature: String,
    count: String,
    capacity: BigNum,
    density: RatNum,
}

#[derive(Serialize)]
struct PatternShareOut {
    pattern: String,
    mass: u64,
    share: f64,
}

fn bin_row(p: &Partition) -> BinRowOut {
    BinRowOut {
        signature: p.id().to_string(),
        count: p.count().to_string(),
        capacity: BigNum::uint(p.capacity()),
        density: RatNum::ratio(&p.density()),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    if args.format == Format::Csv {
        bail!("analyze emits a JSON report; use --format json");
    }
    let corpus = load_corpus(&args.corpus, args.corpus_format)?;
    let model = build_bin_model(&corpus, args.lmax)?;
    let report = utilization_report(&model);

    let mut by_density: Vec<&Partition> = model.model().partitions().iter().collect();
    by_density.sort_by(|a, b| compare_density(b, a).then_with(|| a.id().cmp(b.id())));
    let mut by_count: Vec<&Partition> = model.model().partitions().iter().collect();
    by_count.sort_by(|a, b| b.count().cmp(a.count()).then_with(|| a.id().cmp(b.id())));

    let patterns = match &args.patterns {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading patterns {}", path.display()))?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect()
        }
        None => DEFAULT_PATTERNS.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    };
    let parsed: Vec<BinPattern> = patterns
        .iter()
        .map(|p| p.parse().with_context(|| format!("pattern {p:?}")))
        .collect::<Result<_>>()?;
    let mut masses = vec![0u64; parsed.len()];
    for (password, count) in corpus.iter() {
        let signature = classify(password).expect("corpus entries are printable");
        for (pattern, mass) in parsed.iter().zip(&mut masses) {
            if pattern.matches(&signature) {
                *mass += count;
            }
        }
    }
    let pattern_shares = patterns
        .iter()
        .zip(&masses)
        .map(|(pattern, &mass)| PatternShareOut {
            pattern: pattern.clone(),
            mass,
            share: mass as f64 / corpus.total() as f64,
        })
        .collect();

    let skipped = corpus.skipped();
    let out = AnalyzeReport {
        total: corpus.total(),
        distinct: corpus.distinct(),
        skipped: SkippedOut {
            non_printable: skipped.non_printable,
            empty: skipped.empty,
            malformed: skipped.malformed,
        },
        l_max: args.lmax,
        search_space: BigNum::uint(&search_space_size(args.lmax).exact),
        over_length: OverLengthOut {
            mass: model.over_length_mass(),
            distinct: model.over_length_distinct(),
        },
        utilization: report
            .rows
            .iter()
            .map(|r| UtilizationRowOut {
                length: r.length,
                available: r.available.to_string(),
                utilized: r.utilized,
            })
            .collect(),
        total_utilized: report.total_utilized,
        top_by_density: by_density.iter().take(20).map(|p| bin_row(p)).collect(),
        top_by_count: by_count.iter().take(20).map(|p| bin_row(p)).collect(),
        pattern_shares,
    };
    emit(args.out.as_deref(), &to_json(&out)?)
}

// ------------------------------------------------------------------ attack

#[derive(Serialize)]
struct AttackReport {
    order: &'static str,
    k: usize,
    l_max: u32,
    test_total: u64,
    test_covered: u64,
    test_over_length: u64,
    points: Vec<AttackPointOut>,
}

#[derive(Serialize)]
struct AttackPointOut {
    log2_budget: f64,
    budget: String,
    expected_cracked: RatNum,
    fraction: RatNum,
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let train = load_corpus(&args.train, args.corpus_format)?;
    let test = load_corpus(&args.test, args.corpus_format)?;
    let model = build_hybrid_model(&train, args.k, args.lmax)?;
    let order: PlanOrder = args.order.into();
    let curve = simulate_attack(&model, &test, order, &args.checkpoints)?;

    let points: Vec<AttackPointOut> = curve
        .points
        .iter()
        .map(|p| AttackPointOut {
            log2_budget: p.log2_budget,
            budget: p.budget.to_string(),
            expected_cracked: RatNum::ratio(&p.cracked),
            fraction: RatNum::ratio(&p.fraction),
        })
        .collect();
    let content = match args.format {
        Format::Csv => {
            let mut text = String::from("log2_budget,budget,expected_cracked_exact,expected_cracked,fraction\n");
            for p in &points {
                writeln!(
                    text,
                    "{},{},{},{},{}",
                    p.log2_budget, p.budget, p.expected_cracked.exact, p.expected_cracked.value,
                    p.fraction.value
                )?;
            }
            text
        }
        Format::Json => to_json(&AttackReport {
            order: match order {
                PlanOrder::Density => "density",
                PlanOrder::Probability => "probability",
            },
            k: args.k,
            l_max: args.lmax,
            test_total: curve.test_total,
            test_covered: curve.test_covered,
            test_over_length: curve.test_over_length,
            points,
        })?,
    };
    emit(args.out.as_deref(), &content)
}

// ------------------------------------------------------------------ policy

#[derive(Serialize)]
struct PolicyReport {
    users: BigNum,
    budget: BigNum,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<RateOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    salted_users: Option<BigNum>,
    effective_budget: BigNum,
    tolerated_success: BigNum,
    alphabet: String,
    min_length: u32,
    witness: WitnessOut,
}

#[derive(Serialize)]
struct RateOut {
    guesses_per_second: String,
    seconds: String,
}

/// The exact inequality pair behind the reported minimum length.
#[derive(Serialize)]
struct WitnessOut {
    /// users · effective budget — what the defense must outweigh
    required: BigNum,
    /// tolerated · alphabet^length, first value to reach `required`
    satisfied_at: BigNum,
    /// tolerated · alphabet^(length−1), still short of `required`
    previous: Option<BigNum>,
}

fn cmd_policy(args: PolicyArgs) -> Result<()> {
    if args.format == Format::Csv {
        bail!("policy emits a JSON report; use --format json");
    }
    let (budget, rate) = match (&args.budget, &args.rate, &args.seconds) {
        (Some(budget), None, None) => (budget.clone(), None),
        (None, Some(rate), Some(seconds)) => {
            let derived = budget_from_rate(rate, seconds);
            (
                derived.budget,
                Some(RateOut {
                    guesses_per_second: rate.to_string(),
                    seconds: seconds.to_string(),
                }),
            )
        }
        _ => bail!("give either --budget or both --rate and --seconds"),
    };
    let effective = match &args.salted_users {
        Some(salt) => effective_budget_after_salting(&budget, salt)?,
        None => budget.clone(),
    };
    let params = PolicyParams {
        users: args.users.clone(),
        budget: effective.clone(),
        tolerated_success: args.tolerated.clone(),
        alphabet: args.alphabet.clone(),
    };
    let bound = min_length(&params)?;
    let report = PolicyReport {
        users: BigNum::uint(&args.users),
        budget: BigNum::uint(&budget),
        rate,
        salted_users: args.salted_users.as_ref().map(BigNum::uint),
        effective_budget: BigNum::uint(&effective),
        tolerated_success: BigNum::uint(&args.tolerated),
        alphabet: args.alphabet.to_string(),
        min_length: bound.length,
        witness: WitnessOut {
            required: BigNum::uint(&bound.required),
            satisfied_at: BigNum::uint(&bound.at_length),
            previous: bound.below.as_ref().map(BigNum::uint),
        },
    };
    emit(args.out.as_deref(), &to_json(&report)?)
}

// ------------------------------------------------------------------ assign

#[derive(Serialize)]
struct AssignRowOut {
    strategy: &'static str,
    users: u64,
    bins: usize,
    min_count: u64,
    max_count: u64,
    expected_density: RatNum,
    max_density: RatNum,
    stretch: f64,
}

fn cmd_assign(args: AssignArgs) -> Result<()> {
    let text = fs::read_to_string(&args.universe)
        .with_context(|| format!("reading universe {}", args.universe.display()))?;
    let universe = parse_universe_spec(&text)?;
    let rows: Vec<AssignRowOut> = match args.strategy {
        StrategyArg::All => strategy_comparison(&universe, args.users, args.seed)?
            .into_iter()
            .map(|row| assign_row(row.strategy, &row.report))
            .collect(),
        single => {
            let kind = match single {
                StrategyArg::RoundRobin => StrategyKind::RoundRobin,
                StrategyArg::DensityOrdered => StrategyKind::DensityOrdered,
                StrategyArg::Random => StrategyKind::Random,
                StrategyArg::TwoChoices => StrategyKind::TwoChoices,
                StrategyArg::All => unreachable!(),
            };
            let mut state = AssignmentState::new(kind, universe, args.seed)?;
            for _ in 0..args.users {
                state.assign_next();
            }
            vec![assign_row(kind, &state.stretch()?)]
        }
    };
    let content = match args.format {
        Format::Csv => {
            let mut text = String::from(
                "strategy,users,bins,min_count,max_count,expected_density,max_density,stretch\n",
            );
            for r in &rows {
                writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    r.strategy, r.users, r.bins, r.min_count, r.max_count,
                    r.expected_density.exact, r.max_density.exact, r.stretch
                )?;
            }
            text
        }
        Format::Json => to_json(&rows)?,
    };
    emit(args.out.as_deref(), &content)
}

fn assign_row(kind: StrategyKind, report: &binwise::StretchReport) -> AssignRowOut {
    AssignRowOut {
        strategy: kind.name(),
        users: report.users,
        bins: report.bins,
        min_count: report.min_count,
        max_count: report.max_count,
        expected_density: RatNum::ratio(&report.expected_density),
        max_density: RatNum::ratio(&report.max_density),
        stretch: report.stretch,
    }
}

// ----------------------------------------------------------------- grammar

#[derive(Serialize)]
struct GrammarReport {
    equivalent: bool,
    probability_order: Vec<BlockOut>,
    density_order: Vec<BlockOut>,
}

#[derive(Serialize)]
struct BlockOut {
    template: String,
    count: u64,
    dictionary_size: usize,
    density: RatNum,
    guesses: Vec<String>,
}

fn block_out(b: GuessBlock) -> BlockOut {
    BlockOut {
        template: b.template,
        count: b.count,
        dictionary_size: b.dictionary_size,
        density: RatNum::ratio(&b.density),
        guesses: b.guesses,
    }
}

fn cmd_grammar(args: GrammarArgs) -> Result<()> {
    let text = fs::read_to_string(&args.instance)
        .with_context(|| format!("reading instance {}", args.instance.display()))?;
    let instance = GrammarInstance::from_json(&text)?;
    let equivalent = equivalence_check(&instance);
    let probability: Vec<BlockOut> = order_by_preterminal_probability(&instance)
        .into_iter()
        .map(block_out)
        .collect();
    let density: Vec<BlockOut> = order_by_preterminal_density(&instance)
        .into_iter()
        .map(block_out)
        .collect();
    let content = match args.format {
        Format::Csv => {
            // tabular summary only; guesses are in the JSON report
            let mut text = String::from(
                "order,rank,template,count,dictionary_size,density_exact,density\n",
            );
            for (order, blocks) in [("probability", &probability), ("density", &density)] {
                for (rank, b) in blocks.iter().enumerate() {
                    writeln!(
                        text,
                        "{},{},{},{},{},{},{}",
                        order, rank + 1, b.template, b.count, b.dictionary_size,
                        b.density.exact, b.density.value
                    )?;
                }
            }
            text
        }
        Format::Json => to_json(&GrammarReport {
            equivalent,
            probability_order: probability,
            density_order: density,
        })?,
    };
    emit(args.out.as_deref(), &content)
}

// ---------------------------------------------------------------- longpass

#[derive(Serialize)]
struct LongpassReport {
    min_length: usize,
    patterns: usize,
    qualifying_mass: u64,
    matching_mass: u64,
    share: f64,
}

fn cmd_longpass(args: LongpassArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus, args.corpus_format)?;
    let text = fs::read_to_string(&args.popular)
        .with_context(|| format!("reading popular passwords {}", args.popular.display()))?;
    let popular: Vec<String> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    let share = long_password_substring_share(&corpus, &popular, args.min_len)?;
    let report = LongpassReport {
        min_length: args.min_len,
        patterns: popular.len(),
        qualifying_mass: share.qualifying_mass,
        matching_mass: share.matching_mass,
        share: share.share(),
    };
    let content = match args.format {
        Format::Csv => {
            let mut text = String::from("min_length,patterns,qualifying_mass,matching_mass,share\n");
            writeln!(
                text,
                "{},{},{},{},{}",
                report.min_length, report.patterns, report.qualifying_mass,
                report.matching_mass, report.share
            )?;
            text
        }
        Format::Json => to_json(&report)?,
    };
    emit(args.out.as_deref(), &content)
}

// ------------------------------------------------------------- utilization

#[derive(Serialize)]
struct UtilizationReportOut {
    l_max: u32,
    rows: Vec<UtilizationCumRowOut>,
    total_utilized: u64,
}

#[derive(Serialize)]
struct UtilizationCumRowOut {
    length: u32,
    available: String,
    utilized: u64,
    cumulative: u64,
}

fn cmd_utilization(args: UtilizationArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus, args.corpus_format)?;
    let model = build_bin_model(&corpus, args.lmax)?;
    let report = utilization_report(&model);
    let mut cumulative = 0u64;
    let rows: Vec<UtilizationCumRowOut> = report
        .rows
        .iter()
        .map(|r| {
            cumulative += r.utilized;
            UtilizationCumRowOut {
                length: r.length,
                available: r.available.to_string(),
                utilized: r.utilized,
                cumulative,
            }
        })
        .collect();
    let content = match args.format {
        Format::Csv => {
            let mut text = String::from("length,available,utilized,cumulative\n");
            for r in &rows {
                writeln!(text, "{},{},{},{}", r.length, r.available, r.utilized, r.cumulative)?;
            }
            text
        }
        Format::Json => to_json(&UtilizationReportOut {
            l_max: args.lmax,
            rows,
            total_utilized: report.total_utilized,
        })?,
    };
    emit(args.out.as_deref(), &content)
}
