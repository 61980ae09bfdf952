//! Command-line front end. `main.rs` only parses and maps errors to exit codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::altmin::{algorithm2, algorithm2_fixed, AltMinConfig, PenaltySchedule};
use crate::covmodel::{generate_spiked, ComponentSet, MatrixKind, SparsityBudget, SymMatrix};
use crate::error::{Result, SpcaError};
use crate::eval::{allocation_study, deflation_baseline, enumerate_allocations, roc_experiment, RocConfig, RocMethod};
use crate::io::{self, BoundRecord, InstanceRecord, RocSummary, SolutionRecord};
use crate::rank1::Rank1Policy;
use crate::relax::{upper_bound, worst_case_allocation_bound, RelaxationKind};
use crate::rounding::{algorithm1, RoundingOptions};

#[derive(Debug, Parser)]
#[command(name = "spca", version, about = "Sparse PCA with orthogonal components: bounds and solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper bound from a convex relaxation.
    Bound(BoundArgs),
    /// Feasible components with a certified gap.
    Solve(SolveArgs),
    /// Spiked synthetic instance.
    Synth(SynthArgs),
    /// Support-recovery ROC curve.
    Roc(RocArgs),
    /// Bound and solution for every allocation of a total budget.
    Allocs(AllocsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// `pitprops`, `identity:<n>`, or a CSV file.
    #[arg(long)]
    pub data: String,
    /// Treat the CSV as an `n x p` sample matrix and use its correlation matrix.
    #[arg(long)]
    pub samples: bool,
    /// Force the matrix kind instead of detecting a unit diagonal.
    #[arg(long, value_parser = ["covariance", "correlation"])]
    pub matrix_kind: Option<String>,
}

impl DataArgs {
    pub fn load(&self) -> Result<SymMatrix> {
        if self.samples {
            return io::load_dataset(Path::new(&self.data), true);
        }
        let kind = self.matrix_kind.as_deref().map(|k| if k == "covariance" { MatrixKind::Covariance } else { MatrixKind::Correlation });
        io::load_matrix(&self.data, kind)
    }
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Number of components.
    #[arg(long)]
    pub r: Option<usize>,
    /// Total sparsity budget.
    #[arg(long)]
    pub k: Option<usize>,
    /// Per-component budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub kt: Option<Vec<usize>>,
    /// Relaxation kind or `auto`.
    #[arg(long, default_value = "auto")]
    pub kind: String,
}

impl BudgetArgs {
    fn resolve(&self, p: usize) -> Result<(SparsityBudget, usize, RelaxationKind)> {
        let r = match (&self.kt, self.r) {
            (Some(kt), Some(r)) if kt.len() != r => {
                return Err(SpcaError::BudgetIllPosed(format!("--kt has {} entries but --r is {r}", kt.len())));
            }
            (Some(kt), _) => kt.len(),
            (None, Some(r)) => r,
            (None, None) => return Err(SpcaError::InvalidInput("give --r or --kt".into())),
        };
        let budget = match (&self.kt, self.k) {
            (Some(kt), k) => {
                let b = SparsityBudget::per_component(kt.clone());
                if k.is_some_and(|k| k != b.k()) {
                    return Err(SpcaError::BudgetIllPosed("--k differs from the sum of --kt".into()));
                }
                b
            }
            (None, Some(k)) => SparsityBudget::total(k),
            (None, None) => return Err(SpcaError::InvalidInput("give --k or --kt".into())),
        };
        budget.validate(p, r)?;
        Ok((budget, r, parse_kind(&self.kind, p)?))
    }
}

fn parse_kind(s: &str, p: usize) -> Result<RelaxationKind> {
    if s == "auto" {
        Ok(RelaxationKind::auto(p))
    } else {
        s.parse()
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report unnormalized objectives instead of variance fractions.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Bound every allocation of `--k` over `--r` components.
    #[arg(long)]
    pub enumerate_allocations: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Alg1,
    Alg2,
    Alg2Fixed,
    Deflate,
}

#[derive(Debug, Args)]
pub struct AltMinArgs {
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Rank-one subproblem policy.
    #[arg(long, default_value = "auto")]
    pub policy: Rank1Policy,
    /// `stepped`, `linear:<slope>`, or a comma-separated list of penalties.
    #[arg(long, default_value = "stepped")]
    pub schedule: String,
    /// Stop once the components are orthogonal and the supports settle.
    #[arg(long)]
    pub early_stop: bool,
}

impl AltMinArgs {
    fn config(&self, k_list: Vec<usize>) -> Result<AltMinConfig> {
        Ok(AltMinConfig { schedule: parse_schedule(&self.schedule)?, early_stop: self.early_stop, ..AltMinConfig::new(k_list) }
            .with_iterations(self.iterations)
            .with_policy(self.policy))
    }
}

fn parse_schedule(s: &str) -> Result<PenaltySchedule> {
    let bad = || SpcaError::InvalidInput(format!("bad schedule '{s}'"));
    if s == "stepped" {
        return Ok(PenaltySchedule::Stepped);
    }
    if let Some(slope) = s.strip_prefix("linear:") {
        return slope.parse().map(PenaltySchedule::Linear).map_err(|_| bad());
    }
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>().map(PenaltySchedule::Custom)
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long, value_enum, default_value = "alg1")]
    pub method: Method,
    #[command(flatten)]
    pub altmin: AltMinArgs,
    /// Skip the relaxation used to report a gap for `alg2` and `deflate`.
    #[arg(long)]
    pub no_bound: bool,
    /// Disable per-component caps in the rounding step.
    #[arg(long)]
    pub no_caps: bool,
    /// Trace CSV path; defaults to `<out>.trace.csv` when `--out` is given.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 20)]
    pub ktrue: usize,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes `<out>` as JSON and the matrix next to it as `<out>.matrix.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 20)]
    pub ktrue: usize,
    #[arg(long)]
    pub q: f64,
    /// Number of instances.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// First instance seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "alg2")]
    pub method: RocMethod,
    /// Per-component budgets to sweep.
    #[arg(long, value_delimiter = ',')]
    pub k_sweep: Option<Vec<usize>>,
    #[arg(long, default_value = "greedy-swaps")]
    pub policy: Rank1Policy,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Run every sweep to completion instead of stopping early.
    #[arg(long)]
    pub no_early_stop: bool,
    #[arg(long, default_value = "auto")]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AllocsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "auto")]
    pub kind: String,
    #[command(flatten)]
    pub altmin: AltMinArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

fn emit(out: &OutArgs, body: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    Ok(io::to_json(v)?.into_bytes())
}

#[derive(Serialize)]
struct AllocationBound {
    allocation: Vec<usize>,
    upper_bound: f64,
}

#[derive(Serialize)]
struct AllocationTable {
    kind: RelaxationKind,
    k: usize,
    r: usize,
    normalized: bool,
    rows: Vec<AllocationBound>,
    worst: AllocationBound,
}

fn cmd_bound(a: &BoundArgs, stdout: &mut dyn Write) -> Result<()> {
    let sigma = a.data.load()?;
    let p = sigma.dim();
    let scale = if a.out.raw { sigma.trace() } else { 1.0 };
    let (budget, r, kind) = a.budget.resolve(p)?;
    if a.enumerate_allocations {
        if !kind.needs_per_component() {
            return Err(SpcaError::InvalidInput(format!("{kind} does not take per-component budgets")));
        }
        let mut rows = Vec::new();
        for alloc in enumerate_allocations(budget.k(), r, p) {
            let res = upper_bound(sigma.matrix(), &SparsityBudget::per_component(alloc.clone()), r, kind)?;
            rows.push(AllocationBound { allocation: alloc, upper_bound: res.upper_bound * scale });
        }
        let w = rows.iter().enumerate().fold(0, |b, (i, row)| if row.upper_bound > rows[b].upper_bound { i } else { b });
        let worst = AllocationBound { allocation: rows[w].allocation.clone(), upper_bound: rows[w].upper_bound };
        let body = if a.out.format == Some(Format::Csv) {
            let mut s = String::from("allocation,upper_bound\n");
            for row in &rows {
                s += &format!("{},{}\n", join(&row.allocation), row.upper_bound);
            }
            s.into_bytes()
        } else {
            json(&AllocationTable { kind, k: budget.k(), r, normalized: !a.out.raw, rows, worst })?
        };
        return emit(&a.out, &body, stdout);
    }
    let res = if kind.needs_per_component() && budget.per_component.is_none() {
        worst_case_allocation_bound(sigma.matrix(), budget.k(), r, kind)?.1
    } else {
        upper_bound(sigma.matrix(), &budget, r, kind)?
    };
    let mut rec = BoundRecord::new(&res, sigma.trace());
    if a.out.raw {
        rec.upper_bound = rec.raw_bound;
    }
    if a.out.format == Some(Format::Csv) {
        let budget = rec.budget.per_component.as_deref().map(join).unwrap_or_else(|| budget.k().to_string());
        let s = format!(
            "kind,budget,upper_bound,cuts,status,iterations\n{},{},{},{},{},{}\n",
            rec.kind, budget, rec.upper_bound, rec.cuts_added, rec.residuals.status, rec.residuals.iterations
        );
        return emit(&a.out, s.as_bytes(), stdout);
    }
    emit(&a.out, &json(&rec)?, stdout)
}

fn join(v: &[usize]) -> String {
    v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("-")
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<()> {
    let sigma = a.data.load()?;
    let (budget, r, kind) = a.budget.resolve(sigma.dim())?;
    let k_list = || {
        budget.per_component.clone().ok_or_else(|| SpcaError::InvalidInput("this method needs --kt".into()))
    };
    let bound_for = |sol: ComponentSet, name: &str| -> Result<SolutionRecord> {
        let rec = SolutionRecord::new(&sol, name);
        if a.no_bound {
            return Ok(rec);
        }
        let relax = upper_bound(sigma.matrix(), &budget, r, kind)?;
        let gap = (relax.upper_bound - sol.variance_fraction) / relax.upper_bound;
        Ok(rec.with_bound(&relax, gap))
    };
    let mut trace = None;
    let rec = match a.method {
        Method::Alg1 => {
            let opts = RoundingOptions { column_caps: !a.no_caps, ..RoundingOptions::default() };
            let out = algorithm1(sigma.matrix(), &budget, r, kind, opts)?;
            let mut rec = SolutionRecord::new(&out.solution, "alg1").with_bound(&out.relaxation, out.gap);
            rec.notes.push(format!("column caps {}", if out.column_caps { "on" } else { "off" }));
            rec
        }
        Method::Alg2 => {
            let (sol, t) = algorithm2(&sigma, &a.altmin.config(k_list()?)?)?;
            trace = Some(t);
            bound_for(sol, "alg2")?
        }
        Method::Alg2Fixed => {
            let out = algorithm2_fixed(&sigma, &a.altmin.config(k_list()?)?, kind)?;
            let mut rec = SolutionRecord::new(&out.solution, "alg2-fixed").with_bound(&out.relaxation, out.gap);
            rec.notes.push(format!("{} of {} indices survive fixing", out.active.len(), sigma.dim()));
            trace = Some(out.trace);
            rec
        }
        Method::Deflate => bound_for(deflation_baseline(sigma.matrix(), &k_list()?, a.altmin.policy)?, "deflate")?,
    };
    if let Some(t) = &trace {
        if t.degenerate_scaling {
            log::warn!("penalty scaling probe was degenerate");
        }
        let path = a.trace.clone().or_else(|| a.out.out.as_ref().map(|o| sibling(o, "trace.csv")));
        if let Some(path) = path {
            io::write_trace_csv(fs::File::create(path)?, t)?;
        }
    }
    emit(&a.out, &json(&rec)?, stdout)
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_synth(a: &SynthArgs, stdout: &mut dyn Write) -> Result<()> {
    let inst = generate_spiked(a.p, a.sigma, a.ktrue, a.q, a.seed)?;
    match &a.out {
        Some(path) => {
            let mpath = sibling(path, "matrix.csv");
            io::write_matrix_csv(&mpath, inst.matrix.matrix())?;
            let rec = InstanceRecord::new(&inst, Some(&mpath.to_string_lossy()));
            fs::write(path, io::to_json(&rec)?)?;
        }
        None => stdout.write_all(io::to_json(&InstanceRecord::new(&inst, None))?.as_bytes())?,
    }
    Ok(())
}

fn cmd_roc(a: &RocArgs, stdout: &mut dyn Write) -> Result<()> {
    let defaults = RocConfig::standard(a.q);
    let cfg = RocConfig {
        p: a.p,
        sigma: a.sigma,
        k_true: a.ktrue,
        q: a.q,
        k_sweep: a.k_sweep.clone().unwrap_or(defaults.k_sweep),
        n_seeds: a.seeds,
        base_seed: a.seed,
        policy: a.policy,
        iterations: a.iterations,
        early_stop: !a.no_early_stop,
        kind: if a.kind == "auto" { None } else { Some(a.kind.parse()?) },
        jobs: a.jobs,
    };
    let curve = roc_experiment(a.method, &cfg)?;
    let body = if a.out.format == Some(Format::Csv) {
        let mut buf = Vec::new();
        io::write_roc_csv(&mut buf, &curve)?;
        buf
    } else {
        json(&RocSummary::new(&curve))?
    };
    if let Some(path) = &a.out.out {
        // the CSV and the JSON summary always travel together
        let mut other = Vec::new();
        if a.out.format == Some(Format::Csv) {
            other = json(&RocSummary::new(&curve))?;
            fs::write(sibling(path, "json"), other)?;
        } else {
            io::write_roc_csv(&mut other, &curve)?;
            fs::write(sibling(path, "csv"), other)?;
        }
    }
    emit(&a.out, &body, stdout)
}

fn cmd_allocs(a: &AllocsArgs, stdout: &mut dyn Write) -> Result<()> {
    let sigma = a.data.load()?;
    let kind = parse_kind(&a.kind, sigma.dim())?;
    let template = a.altmin.config(vec![1; a.r])?;
    let mut study = allocation_study(&sigma, a.k, a.r, kind, &template, a.jobs)?;
    if a.out.raw {
        for row in &mut study.rows {
            row.objective *= sigma.trace();
            row.upper_bound *= sigma.trace();
        }
    }
    let body = if a.out.format == Some(Format::Json) {
        json(&study)?
    } else {
        let mut buf = Vec::new();
        io::write_study_csv(&mut buf, &study)?;
        buf
    };
    emit(&a.out, &body, stdout)
}

/// Runs one parsed command, writing its report to `stdout` unless `--out` is given.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Bound(a) => cmd_bound(a, stdout),
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Synth(a) => cmd_synth(a, stdout),
        Command::Roc(a) => cmd_roc(a, stdout),
        Command::Allocs(a) => cmd_allocs(a, stdout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("spca").chain(args.iter().copied())).expect("parse");
        let mut buf = Vec::new();
        run(&cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn identity_basic_bound() {
        let s = run_args(&["bound", "--data", "identity:6", "--r", "2", "--k", "4", "--kind", "basic"]).unwrap();
        let rec: BoundRecord = io::from_json(&s).unwrap();
        assert!((rec.upper_bound - 2.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn deflate_on_identity() {
        let s = run_args(&["solve", "--data", "identity:8", "--r", "2", "--kt", "1,1", "--method", "deflate"]).unwrap();
        let rec: SolutionRecord = io::from_json(&s).unwrap();
        assert!((rec.variance_fraction - 0.25).abs() < 1e-9);
        assert_eq!(rec.violation, 0.0);
    }

    #[test]
    fn budget_errors() {
        let e = run_args(&["bound", "--data", "identity:6", "--r", "3", "--kt", "1,1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run_args(&["bound", "--data", "nope.csv", "--r", "2", "--k", "2"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("linear:2").unwrap(), PenaltySchedule::Linear(2.0));
        assert_eq!(parse_schedule("1,2").unwrap(), PenaltySchedule::Custom(vec![1.0, 2.0]));
        assert!(parse_schedule("fast").is_err());
    }
}
