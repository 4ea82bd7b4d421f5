use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use d4ap::arith::{ramanujan_sum, sieve_divisor_table, theta, DivisorTable};
use d4ap::experiments::{
    self, character_decomposition_check, default_transition, parseval_check, scaling_table, spot_check_deltas,
    variance_theorem1, write_rows, ExperimentConfig, OutputFormat, ResidueProfile,
};
use d4ap::expsums::{h_correlation, r_sum_bruteforce, r_sum_q_divides_d, r_sum_reduced, RSumSpec, BRUTEFORCE_MAX_Q};
use d4ap::kernel::{kernel_trace, make_smooth_weight, w_hat_with, Branch, KernelConfig};
use d4ap::mainterm::{main_term_m, residue_f_fold, DEFAULT_DEGREE};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "d4ap",
    version,
    about = "Divisor function d_4 in arithmetic progressions: sieves, exponential sums and variance experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true)]
    x: Option<u64>,
    #[arg(long, global = true)]
    q: Option<u64>,
    /// Smoothing transition width; defaults to x^(3/4) q^(7/16).
    #[arg(long = "Y", global = true)]
    y: Option<f64>,
    #[arg(long, global = true, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, global = true, default_value_t = 4)]
    k: u32,
    /// Divisor table dump to load instead of sieving.
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve d_k up to --limit (default 2x) and dump it to --out.
    Sieve {
        #[arg(long)]
        limit: Option<u64>,
    },
    /// c_q(n) and θ for n in [from, to].
    Ramanujan {
        #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
        from: i64,
        #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
        to: i64,
    },
    /// R_{a,b,c,d}(h/q) by the reduced formula, with brute force for small q.
    Rsum {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        coeffs: Vec<i64>,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        h: i64,
    },
    /// Σ'_h A_{h/q}(n) conj A_{h/q}(m).
    Acorr {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// U(X) along the vertical line at each point; with --n, ŵ(n) for the weight at (x, Y).
    Kernel {
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        points: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long, value_enum, default_value_t = BranchArg::Auto)]
        branch: BranchArg,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// F_x(1), F_x(q) and M_x(q, a) for every class a.
    Mainterm,
    /// Δ(a/q) for every a, or one a.
    Delta {
        #[arg(long)]
        a: Option<u64>,
        /// Recompute this many random Δ by a direct pass and report the worst gap.
        #[arg(long, default_value_t = 0)]
        spot: usize,
    },
    /// Variance and residual sums for one (x, q, Y).
    Variance,
    /// Relative Parseval gap between residuals and Δ.
    Parseval,
    /// Character decomposition identity gap up to --n.
    Charid {
        #[arg(long = "n")]
        n_max: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        m: i64,
    },
    /// Variance records over a grid, appended to --out as CSV; reruns skip finished rows.
    Scaling {
        #[arg(long, value_delimiter = ',', required = true)]
        xs: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        qs: Vec<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Auto,
    Direct,
    Oscillatory,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Auto => Branch::Auto,
            BranchArg::Direct => Branch::Direct,
            BranchArg::Oscillatory => Branch::Oscillatory,
        }
    }
}

impl Common {
    fn x(&self) -> anyhow::Result<u64> {
        self.x.context("--x is required")
    }

    fn q(&self) -> anyhow::Result<u64> {
        self.q.context("--q is required")
    }

    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let (x, q) = (self.x()?, self.q()?);
        let cfg = ExperimentConfig {
            y: self.y.unwrap_or_else(|| default_transition(x, q)),
            epsilon: self.epsilon,
            output_path: self.out.clone(),
            parallelism: self.jobs,
            seed: self.seed,
            ..ExperimentConfig::new(x, q)
        };
        cfg.validate()?;
        if let Some(w) = cfg.range_warning() {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }

    /// d_4 up to `limit`, from --table when given.
    fn table(&self, limit: u64) -> anyhow::Result<DivisorTable> {
        match &self.table {
            Some(path) => {
                let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let t = DivisorTable::read_from(std::io::BufReader::new(file))?;
                if t.k() != 4 {
                    return Err(d4ap::Error::Precondition(format!("table holds d_{}, need d_4", t.k())).into());
                }
                if t.limit() < limit {
                    return Err(
                        d4ap::Error::Precondition(format!("table limit {} below required {limit}", t.limit())).into()
                    );
                }
                Ok(t)
            }
            None => Ok(sieve_divisor_table(4, limit)?),
        }
    }

    fn emit<T: Serialize>(&self, rows: &[T]) -> anyhow::Result<()> {
        let format = match self.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
        match &self.out {
            Some(path) => write_rows(rows, BufWriter::new(File::create(path)?), format)?,
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                write_rows(rows, &mut lock, format)?;
                lock.flush()?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SieveRow {
    k: u32,
    limit: u64,
    total: u64,
    max: u32,
}

#[derive(Serialize)]
struct RamanujanRow {
    q: u64,
    n: i64,
    c_q: i64,
    theta: String,
}

#[derive(Serialize)]
struct RSumRow {
    q: u64,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
    h: u64,
    re: f64,
    im: f64,
    bruteforce_gap: Option<f64>,
    closed_form: Option<i64>,
}

#[derive(Serialize)]
struct ComplexRow {
    q: u64,
    a: u64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct CorrelationRow {
    q: u64,
    n: u64,
    m: u64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct TransformRow {
    n: u64,
    q: u64,
    big_n: f64,
    value: f64,
    error: f64,
    branch: String,
}

#[derive(Serialize)]
struct MainTermRow {
    x: f64,
    q: u64,
    a: u64,
    f_1: f64,
    f_q: f64,
    m: f64,
}

#[derive(Serialize)]
struct GapRow {
    x: u64,
    q: u64,
    gap: f64,
}

#[derive(Serialize)]
struct CharIdRow {
    q: u64,
    n: u64,
    m: i64,
    gap: f64,
}

fn sieve(common: &Common, limit: Option<u64>) -> anyhow::Result<()> {
    let limit = match (limit, common.x) {
        (Some(l), _) => l,
        (None, Some(x)) => 2 * x,
        (None, None) => bail!("give --limit or --x"),
    };
    let t = sieve_divisor_table(common.k, limit)?;
    let out = common.out.as_deref().context("--out is required for the table dump")?;
    let mut w = BufWriter::new(File::create(out)?);
    t.write_to(&mut w)?;
    w.flush()?;
    let row = SieveRow {
        k: t.k(),
        limit: t.limit(),
        total: t.values().iter().map(|&v| v as u64).sum(),
        max: t.values().iter().copied().max().unwrap_or(0),
    };
    write_rows(&[row], std::io::stdout().lock(), OutputFormat::Csv)?;
    Ok(())
}

fn rsum(common: &Common, coeffs: &[i64], h: i64) -> anyhow::Result<()> {
    let q = common.q()?;
    if coeffs.len() != 4 {
        return Err(d4ap::Error::Precondition(format!("--coeffs takes 4 values, got {}", coeffs.len())).into());
    }
    let spec = RSumSpec::new([coeffs[0], coeffs[1], coeffs[2], coeffs[3]], h, q)?;
    let value = r_sum_reduced(&spec);
    let bruteforce_gap = if q <= BRUTEFORCE_MAX_Q { Some((r_sum_bruteforce(&spec)? - value).norm()) } else { None };
    let [a, b, c, d] = spec.coeffs();
    common.emit(&[RSumRow {
        q,
        a,
        b,
        c,
        d,
        h: spec.h,
        re: value.re,
        im: value.im,
        bruteforce_gap,
        closed_form: r_sum_q_divides_d(&spec),
    }])
}

fn kernel(common: &Common, points: &[f64], ns: &[u64], branch: BranchArg, tolerance: f64) -> anyhow::Result<()> {
    let cfg = KernelConfig { tolerance, ..KernelConfig::default() };
    if ns.is_empty() {
        return common.emit(&kernel_trace(points, &cfg)?);
    }
    let (x, q) = (common.x()?, common.q()?);
    let y = common.y.unwrap_or_else(|| default_transition(x, q));
    let w = make_smooth_weight(x as f64, y)?;
    let rows = ns
        .iter()
        .map(|&n| {
            let v = w_hat_with(n, q, &w, &cfg, branch.into())?;
            Ok(TransformRow {
                n,
                q,
                big_n: v.big_n,
                value: v.value,
                error: v.error,
                branch: format!("{:?}", v.branch).to_lowercase(),
            })
        })
        .collect::<d4ap::Result<Vec<_>>>()?;
    common.emit(&rows)
}

fn mainterm(common: &Common) -> anyhow::Result<()> {
    let (x, q) = (common.x()? as f64, common.q()?);
    let f1 = residue_f_fold(x, 1, common.k, DEFAULT_DEGREE)?.value;
    let fq = residue_f_fold(x, q, common.k, DEFAULT_DEGREE)?.value;
    let rows = (1..=q)
        .map(|a| {
            let m = if common.k == 4 {
                main_term_m(x, q, a)?
            } else {
                (f1 + ramanujan_sum(q, a as i64) as f64 * fq) / q as f64
            };
            Ok(MainTermRow { x, q, a, f_1: f1, f_q: fq, m })
        })
        .collect::<d4ap::Result<Vec<_>>>()?;
    common.emit(&rows)
}

fn delta(common: &Common, a: Option<u64>, spot: usize) -> anyhow::Result<()> {
    let cfg = common.config()?;
    let table = common.table(2 * cfg.x)?;
    let profile = ResidueProfile::new(cfg.x, cfg.q, &table)?;
    let rows: Vec<ComplexRow> = match a {
        Some(a) => {
            let d = profile.delta(a)?;
            vec![ComplexRow { q: cfg.q, a, re: d.re, im: d.im }]
        }
        None => profile.deltas().iter().zip(1..).map(|(d, a)| ComplexRow { q: cfg.q, a, re: d.re, im: d.im }).collect(),
    };
    if spot > 0 {
        let worst = spot_check_deltas(&cfg, &table, spot)?;
        eprintln!("spot check: {spot} values, worst relative gap {worst:.3e}");
    }
    common.emit(&rows)
}

fn scaling(common: &Common, xs: &[u64], qs: &[u64]) -> anyhow::Result<()> {
    let out = common.out.as_deref().context("--out is required for scaling")?;
    let configs: Vec<ExperimentConfig> = xs
        .iter()
        .flat_map(|&x| qs.iter().map(move |&q| (x, q)))
        .map(|(x, q)| ExperimentConfig {
            y: common.y.unwrap_or_else(|| default_transition(x, q)),
            epsilon: common.epsilon,
            output_path: Some(out.to_path_buf()),
            parallelism: common.jobs,
            seed: common.seed,
            ..ExperimentConfig::new(x, q)
        })
        .collect();
    for w in configs.iter().filter_map(|c| c.range_warning()) {
        eprintln!("warning: {w}");
    }
    let limit = 2 * xs.iter().copied().max().unwrap_or(1);
    let table = common.table(limit)?;
    let run = scaling_table(&configs, out, &table)?;
    eprintln!("{} records ({} already present), {} failures", run.records.len(), run.skipped, run.failures.len());
    if !run.failures.is_empty() {
        eprintln!("failures written to {}", experiments::failures_path(out).display());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let common = &cli.common;
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(d4ap::Error::Precondition("--jobs must be at least 1".into()).into());
        }
        // the ambient pool covers routines that do not take a parallelism setting
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Sieve { limit } => sieve(common, *limit),
        Command::Ramanujan { from, to } => {
            let q = common.q()?;
            if q == 0 {
                return Err(d4ap::Error::Precondition("q must be positive".into()).into());
            }
            let rows: Vec<RamanujanRow> = (*from..=*to)
                .map(|n| RamanujanRow { q, n, c_q: ramanujan_sum(q, n), theta: theta(q, n).to_string() })
                .collect();
            common.emit(&rows)
        }
        Command::Rsum { coeffs, h } => rsum(common, coeffs, *h),
        Command::Acorr { n, m } => {
            let q = common.q()?;
            let v = h_correlation(*n, *m, q)?;
            common.emit(&[CorrelationRow { q, n: *n, m: *m, re: v.re, im: v.im }])
        }
        Command::Kernel { points, n, branch, tolerance } => kernel(common, points, n, *branch, *tolerance),
        Command::Mainterm => mainterm(common),
        Command::Delta { a, spot } => delta(common, *a, *spot),
        Command::Variance => {
            let cfg = common.config()?;
            let table = common.table(2 * cfg.x)?;
            common.emit(&[variance_theorem1(&cfg, &table)?])
        }
        Command::Parseval => {
            let cfg = common.config()?;
            let table = common.table(2 * cfg.x)?;
            common.emit(&[GapRow { x: cfg.x, q: cfg.q, gap: parseval_check(cfg.x, cfg.q, &table)? }])
        }
        Command::Charid { n_max, m } => {
            let q = common.q()?;
            let table = common.table(*n_max)?;
            let gap = character_decomposition_check(q, *n_max, *m, &table)?;
            common.emit(&[CharIdRow { q, n: *n_max, m: *m, gap }])
        }
        Command::Scaling { xs, qs } => scaling(common, xs, qs),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain().find_map(|e| e.downcast_ref::<d4ap::Error>()).map_or(1, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["d4ap", "variance", "--x", "1000", "--q", "7", "--Y", "50", "--format", "json"])
            .unwrap();
        assert_eq!(cli.common.x, Some(1000));
        assert_eq!(cli.common.y, Some(50.0));
        assert!(matches!(cli.common.format, Format::Json));
        assert_eq!(cli.common.k, 4);
    }

    #[test]
    fn negative_rsum_coefficients() {
        let cli = Cli::try_parse_from(["d4ap", "rsum", "--q", "5", "--coeffs", "1,-2,3,0", "--h", "-1"]).unwrap();
        match cli.command {
            Command::Rsum { coeffs, h } => {
                assert_eq!(coeffs, vec![1, -2, 3, 0]);
                assert_eq!(h, -1);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn library_errors_keep_their_code() {
        let e: anyhow::Error = d4ap::Error::Accuracy { requested: 1e-9, achieved: 1e-3 }.into();
        assert_eq!(exit_code(&e.context("kernel")), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("missing flag")), 1);
    }
}
