mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mechsim::acceptance::{run_criterion, Tolerances, CRITERIA};
use mechsim::auction::{
    ascending_auction, matches_vcg, multi_item_sample_size, multi_unit_auction,
    multi_unit_constant_m, simultaneous_additive, AscendingConfig, BitLedger, MultiUnitConfig,
    SubAuction, ValuationProfile,
};
use mechsim::experiment::run_trials;
use mechsim::facility::{
    approx_median, make_counterexample, sampling_percentile, Instance, SampleSpec,
};
use mechsim::plurality::{
    plurality, plurality_of_sample, plurality_sample_size, social_welfare, SingleMindedProfile,
};
use mechsim::vandermonde::{
    abs_moment, compare, limit_cdf, table_grid, table_rows, CellStatus, TableKind, VandermondeDist,
};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use output::{destination, emit, write_atomic, Format, Table};

const AFTER_HELP: &str = "\
Every CSV starts with a schema comment `# mechsim <kind> schema v1`.

Columns by subcommand:
  median              trial,seed,c,sc,ratio  (ratio = sc / optimal sc)
  percentile          trial,seed,c,sc,ratio  (ratio = sc / full-information sc)
  vandermonde pmf     kappa,rho,i,pmf
  vandermonde cdf     kappa,rho,x,cdf,limit_cdf  (x = i / kappa)
  vandermonde moments kappa,rho,e_abs_rank,limit_abs_moment
  vandermonde tv      kappa,rho,tv,l1  (l1 = sum |p - q| = 2 tv)
  tables b1           kappa,rho,tv,l1,published,abs_diff,status
  tables b2           kappa,rho,e_abs_rank,published,abs_diff,status
  auction single      trial,n,c,rounds,total_bits,bits_per_agent,vcg_match
  auction multi-item  trial,n,m,c,rounds,total_bits,bits_per_agent,vcg_match
  auction multi-unit  trial,n,m,rounds,retries,estimator_bits,agent_bits,bits_per_agent,vcg_match
  plurality           trial,winner,sw,sw_opt,ratio

JSON output holds the same columns per row at full precision.

reproduce-all writes one JSON file per check, the extra CSV tables, and
manifest.json; it exits nonzero if any check fails.";

#[derive(Parser)]
#[command(name = "mechsim", version, about = "Sampling mechanisms and bit-efficient auctions: experiments and tables", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file; stdout when neither this nor the default directory is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Default output directory.
    #[arg(long, env = "MECHSIM_OUT_DIR", global = true, hide_env_values = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled median mechanism.
    Median(MedianArgs),
    /// Sampled percentile mechanism on the line.
    Percentile(PercentileArgs),
    /// Rank distribution of a sample median.
    Vandermonde {
        #[command(subcommand)]
        which: VandermondeCmd,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reference tables, compared with the published values.
    Tables {
        #[arg(value_enum)]
        which: TableChoice,
        /// Compute the mass function with rational arithmetic.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Auction experiments.
    Auction {
        #[command(subcommand)]
        which: AuctionCmd,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sampled plurality with single-minded voters.
    Plurality(PluralityArgs),
    /// Run every check of the experiment suite.
    ReproduceAll(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceChoice {
    Line,
    L1,
    Star,
}

#[derive(Args)]
struct MedianArgs {
    /// JSON instance file; otherwise a random instance is generated.
    #[arg(long, conflicts_with_all = ["n", "space", "dim"])]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 10_001)]
    n: usize,
    #[arg(long, value_enum, default_value_t = SpaceChoice::Line)]
    space: SpaceChoice,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Fixed sample size; otherwise sized from epsilon and delta.
    #[arg(long, conflicts_with_all = ["epsilon", "delta"])]
    c: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PercentileArgs {
    /// JSON line instance; otherwise the two-cluster instance or a random one.
    #[arg(long, conflicts_with_all = ["n", "alpha", "l", "inner"])]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 1_001)]
    n: usize,
    /// Build the two-cluster instance with this fraction on the far cluster.
    #[arg(long)]
    alpha: Option<f64>,
    /// Distance of the far cluster.
    #[arg(long, default_value_t = 1e6, requires = "alpha")]
    l: f64,
    /// Width of each cluster.
    #[arg(long, default_value_t = 1e-4, requires = "alpha")]
    inner: f64,
    /// Strictly increasing 1-based ranks.
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum VandermondeCmd {
    /// Mass function over all ranks.
    Pmf {
        #[arg(long)]
        kappa: u64,
        #[arg(long)]
        rho: u64,
        #[arg(long)]
        exact: bool,
    },
    /// Distribution function at i / kappa, with the limit alongside.
    Cdf {
        #[arg(long)]
        rho: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<u64>,
    },
    /// Expected absolute normalised rank and its limit.
    Moments {
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<u64>,
        #[arg(long)]
        exact: bool,
    },
    /// Distance to the discretised limit.
    Tv {
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<u64>,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableChoice {
    B1,
    B2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubChoice {
    Sealed,
    English,
}

impl From<SubChoice> for SubAuction {
    fn from(s: SubChoice) -> Self {
        match s {
            SubChoice::Sealed => SubAuction::SealedBid,
            SubChoice::English => SubAuction::English,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ValueDist {
    Uniform,
    Zipf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    n: usize,
    /// Bits per value; values lie in [0, 2^k - 1].
    #[arg(long, default_value_t = 16)]
    k: u32,
    #[arg(long, value_enum, default_value_t = ValueDist::Uniform)]
    values: ValueDist,
    /// Zipf exponent.
    #[arg(long, default_value_t = 1.1)]
    zipf_s: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long)]
    seed: u64,
}

impl ProfileArgs {
    fn profile(&self, m: usize, seed: u64) -> mechsim::Result<ValuationProfile> {
        match self.values {
            ValueDist::Uniform => ValuationProfile::uniform(self.n, m, self.k, seed),
            ValueDist::Zipf => ValuationProfile::zipf(self.n, m, self.k, self.zipf_s, seed),
        }
    }
}

#[derive(Subcommand)]
enum AuctionCmd {
    /// Adaptive ascending auction for one item.
    Single {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, conflicts_with = "epsilon")]
        c: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value_t = SubChoice::Sealed)]
        sub: SubChoice,
    },
    /// Simultaneous ascending auctions for additive bidders.
    MultiItem {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, conflicts_with = "delta")]
        c: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value_t = SubChoice::Sealed)]
        sub: SubChoice,
    },
    /// Multi-unit auction for unit-demand bidders.
    MultiUnit {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Number of units.
        #[arg(long, conflicts_with = "gamma", required_unless_present = "gamma")]
        m: Option<usize>,
        /// Units as a fraction of n.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Use the sampled ascending variant for a small constant m.
        #[arg(long, requires = "c")]
        constant_m: bool,
        /// Sample size of the constant-m variant.
        #[arg(long)]
        c: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VoterProfile {
    Uniform,
    NearTie,
}

#[derive(Args)]
struct PluralityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = VoterProfile::Uniform)]
    profile: VoterProfile,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Sample size; defaults to the accuracy rule from epsilon and delta.
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Output directory.
    #[arg(long, env = "MECHSIM_OUT_DIR")]
    out: PathBuf,
    /// JSON file overriding some or all tolerances.
    #[arg(long)]
    tolerances: Option<PathBuf>,
    /// Run only these checks.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Median(a) => {
            let t = median(&a)?;
            finish(t, &a.output, "median")
        }
        Command::Percentile(a) => {
            let t = percentile(&a)?;
            finish(t, &a.output, "percentile")
        }
        Command::Vandermonde { which, output } => {
            finish(vandermonde(&which)?, &output, "vandermonde")
        }
        Command::Tables {
            which,
            exact,
            output,
        } => {
            let (t, name) = tables(which, exact)?;
            finish(t, &output, name)
        }
        Command::Auction { which, output } => {
            let (t, name) = auction(&which)?;
            finish(t, &output, name)
        }
        Command::Plurality(a) => {
            let t = plurality_cmd(&a)?;
            finish(t, &a.output, "plurality")
        }
        Command::ReproduceAll(a) => reproduce_all(&a),
    }
}

fn finish(t: Table, o: &OutputArgs, name: &str) -> Result<ExitCode> {
    let ext = match o.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = destination(o.out.clone(), o.out_dir.clone(), &format!("{name}.{ext}"));
    emit(&t, o.format, path)?;
    Ok(ExitCode::SUCCESS)
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn median(a: &MedianArgs) -> Result<Table> {
    let inst = match &a.instance {
        Some(p) => Instance::from_json(&read(p)?)?,
        None => match a.space {
            SpaceChoice::Line => Instance::random_line(a.n, a.seed)?,
            SpaceChoice::L1 => Instance::random_l1(a.n, a.dim, a.seed)?,
            SpaceChoice::Star => Instance::star(a.n)?,
        },
    };
    let rows = run_trials(a.trials, a.seed, |_, s| {
        let spec = match a.c {
            Some(c) => SampleSpec::fixed(c, s),
            None => SampleSpec::accuracy(a.epsilon, a.delta, s)?,
        };
        let c = spec.resolve(inst.n())?;
        let out = approx_median(&inst, &spec)?;
        Ok((
            s,
            c,
            out.social_cost,
            out.ratio_vs_optimal.unwrap_or(f64::NAN),
        ))
    })
    .into_iter()
    .collect::<mechsim::Result<Vec<_>>>()?;
    let mut t = Table::new("median", &["trial", "seed", "c", "sc", "ratio"]);
    for (i, (s, c, sc, r)) in rows.iter().enumerate() {
        t.rows
            .push(vec![json!(i), json!(s), json!(c), json!(sc), json!(r)]);
    }
    t.summarize("ratio", &rows.iter().map(|r| r.3).collect::<Vec<_>>());
    Ok(t)
}

fn percentile(a: &PercentileArgs) -> Result<Table> {
    let inst = match (&a.instance, a.alpha) {
        (Some(p), _) => Instance::from_json(&read(p)?)?,
        (None, Some(alpha)) => make_counterexample(a.n, alpha, a.l, a.inner)?,
        (None, None) => Instance::random_line(a.n, a.seed)?,
    };
    let rows = run_trials(a.trials, a.seed, |_, s| {
        let out = sampling_percentile(&inst, &a.ranks, a.c, s)?;
        Ok((
            s,
            out.social_cost,
            out.ratio_vs_full_information.unwrap_or(f64::NAN),
        ))
    })
    .into_iter()
    .collect::<mechsim::Result<Vec<_>>>()?;
    let mut t = Table::new("percentile", &["trial", "seed", "c", "sc", "ratio"]);
    for (i, (s, sc, r)) in rows.iter().enumerate() {
        t.rows
            .push(vec![json!(i), json!(s), json!(a.c), json!(sc), json!(r)]);
    }
    t.summarize("ratio", &rows.iter().map(|r| r.2).collect::<Vec<_>>());
    Ok(t)
}

fn grid(kappas: &[u64], rhos: &[u64]) -> Vec<(u64, u64)> {
    rhos.iter()
        .flat_map(|&r| kappas.iter().map(move |&k| (k, r)))
        .collect()
}

fn vandermonde(which: &VandermondeCmd) -> Result<Table> {
    let mut t;
    match which {
        VandermondeCmd::Pmf { kappa, rho, exact } => {
            let d = VandermondeDist::new(*kappa, *rho)?;
            t = Table::new("vandermonde-pmf", &["kappa", "rho", "i", "pmf"]);
            let k = *kappa as i64;
            for i in -k..=k {
                let p = if *exact {
                    d.pmf_exact(i)?.to_f64().unwrap_or(f64::NAN)
                } else {
                    d.pmf(i)?
                };
                t.rows
                    .push(vec![json!(kappa), json!(rho), json!(i), json!(p)]);
            }
        }
        VandermondeCmd::Cdf { rho, kappa } => {
            t = Table::new(
                "vandermonde-cdf",
                &["kappa", "rho", "x", "cdf", "limit_cdf"],
            );
            for &k in kappa {
                let d = VandermondeDist::new(k, *rho)?;
                let ki = k as i64;
                for i in -ki..=ki {
                    let x = i as f64 / k as f64;
                    t.rows.push(vec![
                        json!(k),
                        json!(rho),
                        json!(x),
                        json!(d.cdf(x)),
                        json!(limit_cdf(*rho, x)?),
                    ]);
                }
            }
        }
        VandermondeCmd::Moments { kappa, rho, exact } => {
            t = Table::new(
                "vandermonde-moments",
                &["kappa", "rho", "e_abs_rank", "limit_abs_moment"],
            );
            t.decimals = Some(4);
            for (k, r) in grid(kappa, rho) {
                let d = VandermondeDist::new(k, r)?;
                let e = if *exact {
                    d.expected_abs_rank_exact().to_f64().unwrap_or(f64::NAN)
                } else {
                    d.expected_abs_rank()
                };
                t.rows
                    .push(vec![json!(k), json!(r), json!(e), json!(abs_moment(r, 1)?)]);
            }
        }
        VandermondeCmd::Tv { kappa, rho, exact } => {
            t = Table::new("vandermonde-tv", &["kappa", "rho", "tv", "l1"]);
            t.decimals = Some(4);
            for row in table_rows(&grid(kappa, rho), *exact)? {
                t.rows.push(vec![
                    json!(row.kappa),
                    json!(row.rho),
                    json!(row.tv),
                    json!(row.l1),
                ]);
            }
        }
    }
    Ok(t)
}

fn tables(which: TableChoice, exact: bool) -> Result<(Table, &'static str)> {
    let rows = table_rows(&table_grid(), exact)?;
    let tol = Tolerances::default();
    let (kind, name, cells) = match which {
        TableChoice::B1 => (
            TableKind::B1,
            "tables-b1",
            compare(TableKind::B1, &rows, tol.table1_abs),
        ),
        TableChoice::B2 => (
            TableKind::B2,
            "tables-b2",
            compare(TableKind::B2, &rows, tol.table2_abs),
        ),
    };
    let mut t = match kind {
        TableKind::B1 => Table::new(
            name,
            &[
                "kappa",
                "rho",
                "tv",
                "l1",
                "published",
                "abs_diff",
                "status",
            ],
        ),
        TableKind::B2 => Table::new(
            name,
            &[
                "kappa",
                "rho",
                "e_abs_rank",
                "published",
                "abs_diff",
                "status",
            ],
        ),
    };
    t.decimals = Some(4);
    for c in &cells {
        let r = &c.row;
        let mut row = vec![json!(r.kappa), json!(r.rho)];
        match kind {
            TableKind::B1 => row.extend([json!(r.tv), json!(r.l1)]),
            TableKind::B2 => row.push(json!(r.e_abs_rank)),
        }
        row.extend([
            json!(c.reference),
            json!(c.abs_diff),
            json!(c.status.as_str()),
        ]);
        t.rows.push(row);
    }
    let bad = cells
        .iter()
        .filter(|c| c.status == CellStatus::Fail)
        .count();
    let flagged = cells
        .iter()
        .filter(|c| c.status == CellStatus::Flagged)
        .count();
    t.summary = format!(
        "{} cells, {bad} outside tolerance, {flagged} flagged",
        cells.len()
    );
    Ok((t, name))
}

type AuctionRow = (usize, usize, u64, bool, Vec<Value>);

fn auction(which: &AuctionCmd) -> Result<(Table, &'static str)> {
    match which {
        AuctionCmd::Single {
            profile,
            c,
            epsilon,
            sub,
        } => {
            let cfg = match (c, epsilon) {
                (Some(c), _) => AscendingConfig::new((*sub).into(), *c)?,
                (None, Some(e)) => AscendingConfig::from_epsilon((*sub).into(), *e)?,
                (None, None) => bail!("one of --c or --epsilon is required"),
            };
            let rows = run_trials(
                profile.trials,
                profile.seed,
                |_, s| -> mechsim::Result<AuctionRow> {
                    let p = profile.profile(1, s)?;
                    let mut l = BitLedger::new(p.n());
                    let (out, _) = ascending_auction(&p, &cfg, s, &mut l)?;
                    let ok = matches_vcg(p.item(0), &out.winners, out.payment);
                    Ok((p.n(), out.rounds, l.total(), ok, vec![]))
                },
            )
            .into_iter()
            .collect::<mechsim::Result<Vec<_>>>()?;
            let mut t = Table::new(
                "auction-single",
                &[
                    "trial",
                    "n",
                    "c",
                    "rounds",
                    "total_bits",
                    "bits_per_agent",
                    "vcg_match",
                ],
            );
            let bpa = fill(&mut t, &rows, |_| vec![json!(cfg.c)]);
            t.summarize("bits_per_agent", &bpa);
            Ok((t, "auction-single"))
        }
        AuctionCmd::MultiItem {
            profile,
            m,
            c,
            delta,
            sub,
        } => {
            let c = match (c, delta) {
                (Some(c), _) => *c,
                (None, Some(d)) => multi_item_sample_size(*m, *d)?,
                (None, None) => bail!("one of --c or --delta is required"),
            };
            let cfg = AscendingConfig::new((*sub).into(), c)?;
            let rows = run_trials(
                profile.trials,
                profile.seed,
                |_, s| -> mechsim::Result<AuctionRow> {
                    let p = profile.profile(*m, s)?;
                    let mut l = BitLedger::new(p.n());
                    let out = simultaneous_additive(&p, &cfg, s, &mut l)?;
                    let ok = out
                        .items
                        .iter()
                        .enumerate()
                        .all(|(j, o)| matches_vcg(p.item(j), &o.winners, o.payment));
                    Ok((p.n(), out.rounds, l.total(), ok, vec![]))
                },
            )
            .into_iter()
            .collect::<mechsim::Result<Vec<_>>>()?;
            let mut t = Table::new(
                "auction-multi-item",
                &[
                    "trial",
                    "n",
                    "m",
                    "c",
                    "rounds",
                    "total_bits",
                    "bits_per_agent",
                    "vcg_match",
                ],
            );
            let bpa = fill(&mut t, &rows, |_| vec![json!(m), json!(c)]);
            t.summarize("bits_per_agent", &bpa);
            Ok((t, "auction-multi-item"))
        }
        AuctionCmd::MultiUnit {
            profile,
            m,
            gamma,
            epsilon,
            delta,
            constant_m,
            c,
        } => {
            let units = match (m, gamma) {
                (Some(m), _) => *m,
                (None, Some(g)) if (0.0..=1.0).contains(g) => (g * profile.n as f64) as usize,
                _ => bail!("--gamma must lie in [0, 1]"),
            };
            let cfg = MultiUnitConfig::new(*epsilon, *delta)?;
            let rows = run_trials(
                profile.trials,
                profile.seed,
                |_, s| -> mechsim::Result<AuctionRow> {
                    let p = profile.profile(1, s)?;
                    let mut l = BitLedger::new(p.n());
                    let (out, retries, est, agent) = if *constant_m {
                        let out = multi_unit_constant_m(&p, units, c.unwrap_or(0), s, &mut l)?;
                        (out, 0, 0, l.total())
                    } else {
                        let r = multi_unit_auction(&p, units, &cfg, s, &mut l)?;
                        (r.outcome, r.retries, r.estimator_bits, r.agent_bits)
                    };
                    let ok = out.winners.len() == units
                        && matches_vcg(p.item(0), &out.winners, out.payment);
                    Ok((
                        p.n(),
                        out.rounds,
                        l.total(),
                        ok,
                        vec![json!(retries), json!(est), json!(agent)],
                    ))
                },
            )
            .into_iter()
            .collect::<mechsim::Result<Vec<_>>>()?;
            let mut t = Table::new(
                "auction-multi-unit",
                &[
                    "trial",
                    "n",
                    "m",
                    "rounds",
                    "retries",
                    "estimator_bits",
                    "agent_bits",
                    "bits_per_agent",
                    "vcg_match",
                ],
            );
            for (i, (n, rounds, total, ok, extra)) in rows.iter().enumerate() {
                let mut row = vec![json!(i), json!(n), json!(units), json!(rounds)];
                row.extend(extra.iter().cloned());
                row.extend([json!(*total as f64 / *n as f64), json!(ok)]);
                t.rows.push(row);
            }
            let bpa: Vec<f64> = rows.iter().map(|r| r.2 as f64 / r.0 as f64).collect();
            t.summarize("bits_per_agent", &bpa);
            Ok((t, "auction-multi-unit"))
        }
    }
}

/// Appends `trial,n,<extra>,rounds,total_bits,bits_per_agent,vcg_match` rows
/// and returns bits per agent.
fn fill(t: &mut Table, rows: &[AuctionRow], extra: impl Fn(usize) -> Vec<Value>) -> Vec<f64> {
    let mut bpa = Vec::with_capacity(rows.len());
    for (i, (n, rounds, total, ok, _)) in rows.iter().enumerate() {
        let b = *total as f64 / *n as f64;
        bpa.push(b);
        let mut row = vec![json!(i), json!(n)];
        row.extend(extra(i));
        row.extend([json!(rounds), json!(total), json!(b), json!(ok)]);
        t.rows.push(row);
    }
    bpa
}

fn plurality_cmd(a: &PluralityArgs) -> Result<Table> {
    let profile = match a.profile {
        VoterProfile::Uniform => SingleMindedProfile::uniform(a.n, a.m, a.seed)?,
        VoterProfile::NearTie => SingleMindedProfile::near_tie(a.n, a.m)?,
    };
    let c = match a.c {
        Some(c) => c,
        None => plurality_sample_size(a.m, a.epsilon, a.delta)?,
    };
    let best = plurality(&profile);
    let opt = social_welfare(&profile, best)?;
    let rows = run_trials(a.trials, a.seed, |_, s| {
        let w = plurality_of_sample(&profile, c, true, s)?;
        Ok((w, social_welfare(&profile, w)?))
    })
    .into_iter()
    .collect::<mechsim::Result<Vec<_>>>()?;
    let mut t = Table::new("plurality", &["trial", "winner", "sw", "sw_opt", "ratio"]);
    let mut ratios = Vec::with_capacity(rows.len());
    for (i, (w, sw)) in rows.iter().enumerate() {
        let r = *sw as f64 / opt as f64;
        ratios.push(r);
        t.rows
            .push(vec![json!(i), json!(w), json!(sw), json!(opt), json!(r)]);
    }
    t.summarize("welfare ratio", &ratios);
    Ok(t)
}

fn reproduce_all(a: &ReproduceArgs) -> Result<ExitCode> {
    let tol = match &a.tolerances {
        Some(p) => serde_json::from_str::<Tolerances>(&read(p)?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => Tolerances::default(),
    };
    let ids: Vec<u32> = if a.only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.only.clone()
    };
    let mut entries = Vec::new();
    let mut all_passed = true;
    for id in ids {
        let r = run_criterion(id, &tol)?;
        println!("{}", r.line());
        all_passed &= r.passed;
        let file = format!("criterion-{:02}-{}.json", r.id, r.name);
        let mut files = vec![file.clone()];
        write_atomic(
            &a.out.join(&file),
            &(serde_json::to_string_pretty(&r)? + "\n"),
        )?;
        for (name, body) in &r.artifacts {
            write_atomic(&a.out.join(name), body)?;
            files.push(name.clone());
        }
        entries.push(json!({
            "id": r.id,
            "name": r.name,
            "passed": r.passed,
            "summary": r.summary,
            "files": files,
        }));
    }
    let manifest = json!({
        "schema": "mechsim manifest v1",
        "all_passed": all_passed,
        "tolerances": tol,
        "criteria": entries,
    });
    write_atomic(
        &a.out.join("manifest.json"),
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;
    println!(
        "{} -> {}",
        if all_passed {
            "all checks passed"
        } else {
            "some checks FAILED"
        },
        a.out.join("manifest.json").display()
    );
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
