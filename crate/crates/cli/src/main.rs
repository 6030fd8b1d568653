//! Command-line front end for the p-Laplacian spectral toolkit.
//!
//! Exit codes: 0 success, 1 falsified inequality (exact rows only),
//! 2 usage error, 3 regime inapplicable, 4 solver non-convergence.

use clap::{Args, Parser, Subcommand};
use plap_core::audit::{
    audit_lemma2, audit_lemma3_multi, audit_proof_chain, AuditEntry, DISCRETIZATION_ALLOWANCE,
};
use plap_core::bounds::{constants_table, ratio_bound, RatioBound};
use plap_core::error::Error as CoreError;
use plap_core::grid::MeshedDomain;
use plap_core::one_d::{ratio_1d, shoot_eigenvalue, Interval1D};
use plap_core::solver::{
    lambda2_exact_p2, lambda2_upper_via_splitting, principal_eigenpair, write_eigenpair, Eigenpair,
};
use plap_core::ProblemParams;
use serde_json::{json, Value};
use std::fs::File;
use std::io::Write;
use std::process::ExitCode;

const EXIT_FALSIFIED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NO_BOUND: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "plap", about = "p-Laplacian eigenvalue ratios, bounds, and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the regime constants and ratio bounds for (p, N).
    Bound {
        p: f64,
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// 1D shooting spectrum on an interval and the exact 2^p ratio law.
    Solve1d {
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 2)]
        modes: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Principal eigenpair plus a second-eigenvalue reference and verdict.
    Solve(SolveArgs),
    /// Run all inequality audits on a computed eigenpair; emits JSON.
    Audit {
        #[arg(long, default_value = "square")]
        domain: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sweep instances and emit one CSV row each.
    Sweep {
        /// Comma-separated exponents.
        #[arg(long, default_value = "1.5,2,3")]
        p_list: String,
        /// Comma-separated domain labels (interval, square, cube).
        #[arg(long, default_value = "interval,square")]
        domains: String,
        /// Optional dimension filter, comma-separated.
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "square")]
    domain: String,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 128)]
    grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    axis: usize,
    #[arg(long, default_value_t = 20000)]
    max_iter: usize,
    /// Write the eigenpair snapshot to this path.
    #[arg(long)]
    dump: Option<String>,
}

struct CliError {
    code: u8,
    message: String,
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::InvalidParameter(_) | CoreError::InvalidInput(_) => EXIT_USAGE,
            CoreError::NoBoundAvailable { .. } => EXIT_NO_BOUND,
            CoreError::BracketNotFound { .. }
            | CoreError::NonConvergence { .. }
            | CoreError::Internal(_) => EXIT_NO_CONVERGENCE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn fmt12(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{:.11e}", x)
    }
}

fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap()
}

fn opt_fmt12(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum DomainKind {
    Interval,
    Square,
    Cube,
}

impl DomainKind {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "interval" => Ok(DomainKind::Interval),
            "square" => Ok(DomainKind::Square),
            "cube" => Ok(DomainKind::Cube),
            other => Err(CliError {
                code: EXIT_USAGE,
                message: format!("unknown domain '{other}' (expected interval, square, cube)"),
            }),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Square => "square",
            DomainKind::Cube => "cube",
        }
    }

    fn n_dim(&self) -> usize {
        match self {
            DomainKind::Interval => 1,
            DomainKind::Square => 2,
            DomainKind::Cube => 3,
        }
    }

    fn build(&self, grid: usize) -> Result<MeshedDomain, CoreError> {
        match self {
            DomainKind::Interval => MeshedDomain::interval(0.0, 1.0, grid),
            DomainKind::Square => MeshedDomain::unit_square(grid),
            DomainKind::Cube => MeshedDomain::unit_cube(grid),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EstimateKind {
    Exact,
    Upper,
}

impl EstimateKind {
    fn label(&self) -> &'static str {
        match self {
            EstimateKind::Exact => "EXACT",
            EstimateKind::Upper => "UPPER",
        }
    }
}

/// Second-eigenvalue reference for a grid instance: closed form at p = 2,
/// shooting in 1D, splitting upper estimate otherwise.
fn lambda2_reference(
    kind: DomainKind,
    p: f64,
    eig1: &Eigenpair,
    axis: usize,
) -> Result<(f64, EstimateKind, Option<f64>), CoreError> {
    if p == 2.0 {
        return Ok((
            lambda2_exact_p2(&eig1.phi.domain),
            EstimateKind::Exact,
            None,
        ));
    }
    if kind == DomainKind::Interval {
        let iv = Interval1D::new(0.0, 1.0)?;
        let m2 = shoot_eigenvalue(&iv, p, 2, 1e-9)?;
        return Ok((m2.lambda, EstimateKind::Exact, None));
    }
    let est = lambda2_upper_via_splitting(p, eig1, axis)?;
    Ok((est.value, EstimateKind::Upper, Some(est.delta)))
}

fn entry_json(e: &AuditEntry) -> Value {
    json!({
        "name": e.name,
        "lhs": round12(e.lhs),
        "rhs": round12(e.rhs),
        "slack": round12(e.slack),
        "satisfied": e.satisfied,
        "preconditions_met": e.preconditions_met,
    })
}

fn write_output(out: &Option<String>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| CliError {
                code: EXIT_USAGE,
                message: format!("cannot write {path}: {e}"),
            })?;
            f.write_all(content.as_bytes()).map_err(|e| CliError {
                code: EXIT_USAGE,
                message: format!("write failure: {e}"),
            })
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_bound(p: f64, n: usize, json_mode: bool) -> Result<(), CliError> {
    let params = ProblemParams::new(p, n)?;
    let consts = constants_table(&params)?;
    let rb = ratio_bound(&params)?;
    if json_mode {
        let v = json!({
            "p": round12(p),
            "n": n,
            "m": round12(consts.m),
            "m_hat": round12(consts.m_hat),
            "k_hat": round12(consts.k_hat),
            "bound_eq7": rb.ratio_bound_eq7.map(round12),
            "bound_eq9": rb.ratio_bound_eq9.map(round12),
            "best": round12(rb.best),
        });
        println!("{v}");
    } else {
        println!("p = {p}, N = {n}, regime = {}", consts.regime.label());
        println!(
            "m = {}, m_hat = {}, k_hat = {}",
            fmt12(consts.m),
            fmt12(consts.m_hat),
            fmt12(consts.k_hat)
        );
        println!(
            "bound_eq7 = {}, bound_eq9 = {}, best = {}",
            rb.ratio_bound_eq7.map(fmt12).unwrap_or_else(|| "n/a".into()),
            rb.ratio_bound_eq9.map(fmt12).unwrap_or_else(|| "n/a".into()),
            fmt12(rb.best)
        );
    }
    Ok(())
}

fn cmd_solve1d(p: f64, length: f64, modes: usize, tol: f64) -> Result<(), CliError> {
    if modes < 1 {
        return Err(CliError {
            code: EXIT_USAGE,
            message: "modes must be >= 1".into(),
        });
    }
    let iv = Interval1D::new(0.0, length)?;
    let mut lambdas = Vec::with_capacity(modes);
    for n in 1..=modes {
        let m = shoot_eigenvalue(&iv, p, n, tol)?;
        println!(
            "lambda_{n} = {} (interior zeros: {})",
            fmt12(m.lambda),
            m.zeros
        );
        lambdas.push(m.lambda);
    }
    if modes >= 2 {
        let ratio = lambdas[1] / lambdas[0];
        let reference = ratio_1d(p)?;
        let rel = (ratio - reference).abs() / reference;
        println!("ratio lambda_2/lambda_1 = {}", fmt12(ratio));
        println!("2^p reference = {}", fmt12(reference));
        println!("relative error = {:.3e}", rel);
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let kind = DomainKind::parse(&args.domain)?;
    let domain = kind.build(args.grid)?;
    if args.axis >= kind.n_dim() {
        return Err(CliError {
            code: EXIT_USAGE,
            message: format!("axis {} out of range for {}", args.axis, kind.label()),
        });
    }
    let params = ProblemParams::new(args.p, kind.n_dim())?;
    let eig = principal_eigenpair(&domain, args.p, args.tol, args.max_iter)?;
    let (lambda2, est_kind, delta) = lambda2_reference(kind, args.p, &eig, args.axis)?;
    let ratio = lambda2 / eig.lambda;
    println!(
        "p = {}, domain = {} (N = {}), grid = {}",
        args.p,
        kind.label(),
        kind.n_dim(),
        args.grid
    );
    println!(
        "lambda1 = {} (residual {:.3e}, {} iterations)",
        fmt12(eig.lambda),
        eig.residual,
        eig.iterations
    );
    match delta {
        Some(d) => println!(
            "lambda2 ({}) = {} [delta* = {}]",
            est_kind.label(),
            fmt12(lambda2),
            fmt12(d)
        ),
        None => println!("lambda2 ({}) = {}", est_kind.label(), fmt12(lambda2)),
    }
    println!("ratio = {}", fmt12(ratio));
    if let Some(path) = &args.dump {
        let mut f = File::create(path).map_err(|e| CliError {
            code: EXIT_USAGE,
            message: format!("cannot write {path}: {e}"),
        })?;
        write_eigenpair(&eig, args.p, &mut f).map_err(|e| CliError {
            code: EXIT_USAGE,
            message: format!("write failure: {e}"),
        })?;
    }
    match ratio_bound(&params) {
        Ok(rb) => {
            println!(
                "bound_eq7 = {}, bound_eq9 = {}, best = {}",
                rb.ratio_bound_eq7.map(fmt12).unwrap_or_else(|| "n/a".into()),
                rb.ratio_bound_eq9.map(fmt12).unwrap_or_else(|| "n/a".into()),
                fmt12(rb.best)
            );
            let ok = ratio <= rb.best * (1.0 + DISCRETIZATION_ALLOWANCE);
            match (ok, est_kind) {
                (true, _) => println!("verdict: satisfied"),
                (false, EstimateKind::Upper) => println!("verdict: inconclusive"),
                (false, EstimateKind::Exact) => {
                    println!("verdict: falsified");
                    return Err(CliError {
                        code: EXIT_FALSIFIED,
                        message: format!(
                            "exact ratio {} exceeds bound {}",
                            fmt12(ratio),
                            fmt12(rb.best)
                        ),
                    });
                }
            }
            Ok(())
        }
        Err(e @ CoreError::NoBoundAvailable { .. }) => {
            println!("verdict: no bound applicable ({e})");
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_audit(
    domain: &str,
    p: f64,
    grid: usize,
    tol: f64,
    max_iter: usize,
    out: &Option<String>,
) -> Result<(), CliError> {
    let kind = DomainKind::parse(domain)?;
    let dom = kind.build(grid)?;
    let eig = principal_eigenpair(&dom, p, tol, max_iter)?;
    let (lambda2, est_kind, _) = lambda2_reference(kind, p, &eig, 0)?;
    let one_sided = est_kind == EstimateKind::Upper;

    let mut entries = Vec::new();
    entries.push(audit_lemma2(
        &eig,
        p,
        &dom.center(),
        DISCRETIZATION_ALLOWANCE,
    )?);
    entries.extend(audit_lemma3_multi(&eig, p, DISCRETIZATION_ALLOWANCE)?);
    let chain = audit_proof_chain(&eig, lambda2, p, one_sided, DISCRETIZATION_ALLOWANCE)?;
    entries.extend(chain.entries);

    let v = json!({
        "instance": {
            "p": round12(p),
            "n": kind.n_dim(),
            "domain": kind.label(),
            "grid": grid,
            "lambda1": round12(eig.lambda),
            "lambda2": round12(lambda2),
            "estimate_kind": est_kind.label(),
        },
        "entries": entries.iter().map(entry_json).collect::<Vec<_>>(),
    });
    write_output(out, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}

struct SweepRow {
    p: f64,
    n: usize,
    domain: &'static str,
    grid: usize,
    lambda1: f64,
    lambda2: f64,
    estimate_kind: EstimateKind,
    ratio: f64,
    bound_eq7: Option<f64>,
    bound_eq9: Option<f64>,
    best_bound: Option<f64>,
    satisfied: bool,
    inconclusive: bool,
}

impl SweepRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt12(self.p),
            self.n,
            self.domain,
            self.grid,
            fmt12(self.lambda1),
            fmt12(self.lambda2),
            self.estimate_kind.label(),
            fmt12(self.ratio),
            opt_fmt12(self.bound_eq7),
            opt_fmt12(self.bound_eq9),
            opt_fmt12(self.best_bound),
            self.satisfied,
            self.inconclusive
        )
    }
}

const SWEEP_HEADER: &str = "p,n,domain,grid,lambda1,lambda2,estimate_kind,ratio,bound_eq7,bound_eq9,best_bound,satisfied,inconclusive";

fn sweep_instance(
    p: f64,
    kind: DomainKind,
    grid: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SweepRow, CliError> {
    let n = kind.n_dim();
    let params = ProblemParams::new(p, n)?;
    let bounds: Option<RatioBound> = match ratio_bound(&params) {
        Ok(rb) => Some(rb),
        Err(CoreError::NoBoundAvailable { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let (lambda1, lambda2, estimate_kind) = if kind == DomainKind::Interval {
        // 1D spectra are exact via shooting.
        let iv = Interval1D::new(0.0, 1.0)?;
        let m1 = shoot_eigenvalue(&iv, p, 1, 1e-9)?;
        let m2 = shoot_eigenvalue(&iv, p, 2, 1e-9)?;
        (m1.lambda, m2.lambda, EstimateKind::Exact)
    } else {
        let dom = kind.build(grid)?;
        let eig = principal_eigenpair(&dom, p, tol, max_iter)?;
        let (l2, ek, _) = lambda2_reference(kind, p, &eig, 0)?;
        (eig.lambda, l2, ek)
    };
    let ratio = lambda2 / lambda1;

    let (satisfied, inconclusive) = match &bounds {
        Some(rb) => {
            let ok = ratio <= rb.best * (1.0 + DISCRETIZATION_ALLOWANCE);
            match (ok, estimate_kind) {
                (true, _) => (true, false),
                (false, EstimateKind::Upper) => (false, true),
                (false, EstimateKind::Exact) => (false, false),
            }
        }
        None => (false, true),
    };

    Ok(SweepRow {
        p,
        n,
        domain: kind.label(),
        grid,
        lambda1,
        lambda2,
        estimate_kind,
        ratio,
        bound_eq7: bounds.as_ref().and_then(|b| b.ratio_bound_eq7),
        bound_eq9: bounds.as_ref().and_then(|b| b.ratio_bound_eq9),
        best_bound: bounds.as_ref().map(|b| b.best),
        satisfied,
        inconclusive,
    })
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    let items: Result<Vec<T>, _> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError {
            code: EXIT_USAGE,
            message: format!("invalid or empty {what} list: '{s}'"),
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    p_list: &str,
    domains: &str,
    n_list: &Option<String>,
    grid: usize,
    tol: f64,
    max_iter: usize,
    out: &Option<String>,
) -> Result<(), CliError> {
    let mut ps: Vec<f64> = parse_list(p_list, "p")?;
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut kinds = Vec::new();
    for label in domains.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        kinds.push(DomainKind::parse(label)?);
    }
    if kinds.is_empty() {
        return Err(CliError {
            code: EXIT_USAGE,
            message: "empty domain list".into(),
        });
    }
    if let Some(ns) = n_list {
        let filter: Vec<usize> = parse_list(ns, "n")?;
        kinds.retain(|k| filter.contains(&k.n_dim()));
        if kinds.is_empty() {
            return Err(CliError {
                code: EXIT_USAGE,
                message: "n-list filters out every domain".into(),
            });
        }
    }
    // Deterministic lexicographic (p, n, domain) order regardless of input order.
    kinds.sort_by_key(|k| (k.n_dim(), k.label()));
    kinds.dedup();

    let mut rows = Vec::new();
    for &p in &ps {
        for &kind in &kinds {
            rows.push(sweep_instance(p, kind, grid, tol, max_iter)?);
        }
    }

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut falsified = false;
    for row in &rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
        if row.estimate_kind == EstimateKind::Exact && !row.satisfied && !row.inconclusive {
            falsified = true;
        }
    }
    write_output(out, &csv)?;
    if falsified {
        return Err(CliError {
            code: EXIT_FALSIFIED,
            message: "sweep contains a falsifying exact row".into(),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bound { p, n, json } => cmd_bound(p, n, json),
        Command::Solve1d {
            p,
            length,
            modes,
            tol,
        } => cmd_solve1d(p, length, modes, tol),
        Command::Solve(args) => cmd_solve(&args),
        Command::Audit {
            domain,
            p,
            grid,
            tol,
            max_iter,
            out,
        } => cmd_audit(&domain, p, grid, tol, max_iter, &out),
        Command::Sweep {
            p_list,
            domains,
            n_list,
            grid,
            tol,
            max_iter,
            out,
        } => cmd_sweep(&p_list, &domains, &n_list, grid, tol, max_iter, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
