//! `qgamebound` command line: upper bounds, lower bounds, certificates and SDPA export.
//!
//! Exit codes: 0 success, 1 input error, 2 resource cap, 3 numerical failure.
//! The JSON report goes to `--out` (or stdout) on 0 and 2; a human-readable
//! summary goes to stderr.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csep::game_to_csep;
use crate::error::Error;
use crate::gamecore::{Game, Strategy};
use crate::hierarchy::{build, definetti_gap, level_for_epsilon, BuildOptions, GapDims, GapVariant, Method};
use crate::linalg::CMat;
use crate::rounding::{game_lower_bound, LowerOptions};
use crate::sdpsolve::{export_sdpa, solve, Solution, SolveOptions, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CAP: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qgamebound", version, about = "Upper and lower bounds on free non-local games with bounded entanglement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one level of an SDP hierarchy.
    Upper(UpperArgs),
    /// Round a hierarchy solution to a strategy and polish it by see-saw.
    Lower(LowerArgs),
    /// Level needed for a target accuracy; solves both bounds when that level is within caps.
    Certify(CertifyArgs),
    /// Write one hierarchy level as an SDPA sparse file.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    /// Game description (JSON).
    pub game: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct UpperArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value = "sym")]
    pub method: Method,
}

#[derive(Args, Debug)]
pub struct LowerArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value = "sym")]
    pub method: Method,
    /// Conditioning depth; all of 1..n-1 when omitted.
    #[arg(long)]
    pub m: Option<usize>,
    /// See-saw iterations after rounding.
    #[arg(long, default_value_t = 20)]
    pub seesaw: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to dump the final strategy (JSON).
    #[arg(long)]
    pub strategy_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value = "sym")]
    pub method: Method,
    /// Highest level actually solved.
    #[arg(long, default_value_t = 3)]
    pub max_level: usize,
    #[arg(long, default_value_t = 20)]
    pub seesaw: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub game: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value = "sym")]
    pub method: Method,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: Status,
    pub iterations: usize,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub num_vars: usize,
    pub block_sides: Vec<usize>,
    pub num_equalities: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the game file bytes.
    pub game_hash: String,
    pub method: Option<String>,
    pub level: Option<usize>,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    pub definetti_bound: Option<f64>,
    pub required_level: Option<u64>,
    pub solver: Option<SolverStats>,
    pub rounding_m: Option<usize>,
    pub rounded_value: Option<f64>,
    pub strategy_path: Option<String>,
    pub message: Option<String>,
    pub wall_time_s: f64,
}

impl RunReport {
    fn new(command: &str, game_hash: String) -> Self {
        RunReport {
            command: command.into(),
            game_hash,
            method: None,
            level: None,
            upper: None,
            lower: None,
            definetti_bound: None,
            required_level: None,
            solver: None,
            rounding_m: None,
            rounded_value: None,
            strategy_path: None,
            message: None,
            wall_time_s: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Failure of a command: exit code plus, for cap failures, the partial report.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
    pub report: Option<RunReport>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Cap(_) => EXIT_CAP,
        Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { code: exit_code(&error), error, report: None }
    }
}

fn load(path: &Path) -> Result<(Game, String), Failure> {
    let bytes = std::fs::read(path).map_err(Error::from)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::invalid("game file is not UTF-8"))?;
    let game = Game::from_json(&text)?;
    Ok((game, hex::encode(Sha256::digest(&bytes))))
}

fn stats(sol: &Solution, h: &crate::hierarchy::HierarchySdp) -> SolverStats {
    SolverStats {
        status: sol.status,
        iterations: sol.iterations,
        primal_value: sol.primal_value,
        dual_value: sol.dual_value,
        gap: sol.gap,
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        num_vars: h.problem.num_vars,
        block_sides: h.problem.blocks.iter().map(|b| b.side).collect(),
        num_equalities: h.problem.eqs.len(),
    }
}

struct Solved {
    h: crate::hierarchy::HierarchySdp,
    sol: Solution,
}

fn solve_level(game: &Game, n: usize, method: Method, tol: f64, report: &mut RunReport) -> Result<Solved, Failure> {
    if n == 0 {
        return Err(Error::invalid("level must be at least 1").into());
    }
    let p = game_to_csep(game);
    report.method = Some(method.name().into());
    report.level = Some(n);
    let cap_fail = |e: Error, r: &RunReport| Failure { code: exit_code(&e), error: e, report: Some(r.clone()) };
    let h = build(&p, n, method, &BuildOptions::default()).map_err(|e| cap_fail(e, report))?;
    let sol = solve(&h.problem, &SolveOptions::with_tol(tol)).map_err(|e| cap_fail(e, report))?;
    report.solver = Some(stats(&sol, &h));
    if sol.status != Status::Optimal {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            error: Error::numerical(format!("solver finished with status {:?}", sol.status)),
            report: Some(report.clone()),
        });
    }
    // the dual objective is the certified bound
    report.upper = Some(sol.dual_value);
    Ok(Solved { h, sol })
}

fn gap_variant(method: Method) -> GapVariant {
    if method.is_bose() {
        GapVariant::Bose
    } else {
        GapVariant::Game
    }
}

fn gap_dims(game: &Game) -> GapDims {
    GapDims::for_game(game)
}

pub fn cmd_upper(a: &UpperArgs) -> Result<RunReport, Failure> {
    let t = Instant::now();
    let (game, hash) = load(&a.common.game)?;
    let mut report = RunReport::new("upper", hash);
    solve_level(&game, a.level, a.method, a.common.tol, &mut report)?;
    report.definetti_bound = Some(definetti_gap(gap_dims(&game), a.level, gap_variant(a.method)));
    report.wall_time_s = t.elapsed().as_secs_f64();
    Ok(report)
}

fn lower_into(
    game: &Game,
    solved: &Solved,
    opts: &LowerOptions,
    strategy_out: Option<&Path>,
    report: &mut RunReport,
) -> Result<(), Failure> {
    let p = game_to_csep(game);
    let res = game_lower_bound(game, &p, &solved.h, &solved.sol.x, opts).map_err(|e| Failure {
        code: exit_code(&e),
        error: e,
        report: Some(report.clone()),
    })?;
    report.lower = Some(res.lower);
    report.rounding_m = Some(res.m);
    report.rounded_value = Some(res.rounded_value);
    report.definetti_bound = Some(definetti_gap(
        GapDims { d_a: p.dim_a, d_b: p.dim_b, assist: game.n_t },
        solved.h.n,
        GapVariant::Rounding,
    ));
    if let Some(path) = strategy_out {
        std::fs::write(path, serde_json::to_string_pretty(&StrategyDump::from(&res.strategy)).expect("serializes"))
            .map_err(Error::from)?;
        report.strategy_path = Some(path.display().to_string());
    }
    Ok(())
}

pub fn cmd_lower(a: &LowerArgs) -> Result<RunReport, Failure> {
    let t = Instant::now();
    let (game, hash) = load(&a.common.game)?;
    let mut report = RunReport::new("lower", hash);
    let solved = solve_level(&game, a.level, a.method, a.common.tol, &mut report)?;
    let opts = LowerOptions { m: a.m, seesaw_iters: a.seesaw, seed: a.seed, ..Default::default() };
    lower_into(&game, &solved, &opts, a.strategy_out.as_deref(), &mut report)?;
    report.wall_time_s = t.elapsed().as_secs_f64();
    Ok(report)
}

pub fn cmd_certify(a: &CertifyArgs) -> Result<RunReport, Failure> {
    let t = Instant::now();
    if !(a.epsilon > 0.0) || !a.epsilon.is_finite() {
        return Err(Error::invalid("epsilon must be a positive finite number").into());
    }
    let (game, hash) = load(&a.common.game)?;
    let mut report = RunReport::new("certify", hash);
    let required = level_for_epsilon(gap_dims(&game), a.epsilon, gap_variant(a.method));
    report.required_level = Some(required);
    report.method = Some(a.method.name().into());
    if required > a.max_level as u64 {
        report.message = Some(format!("level {required} exceeds the solvable cap of {}; not solved", a.max_level));
        report.wall_time_s = t.elapsed().as_secs_f64();
        return Ok(report);
    }
    let n = required as usize;
    let solved = solve_level(&game, n, a.method, a.common.tol, &mut report)?;
    let opts = LowerOptions { seesaw_iters: a.seesaw, seed: a.seed, ..Default::default() };
    lower_into(&game, &solved, &opts, None, &mut report)?;
    report.definetti_bound = Some(definetti_gap(gap_dims(&game), n, gap_variant(a.method)));
    report.wall_time_s = t.elapsed().as_secs_f64();
    Ok(report)
}

pub fn cmd_export(a: &ExportArgs) -> Result<RunReport, Failure> {
    let t = Instant::now();
    let (game, hash) = load(&a.game)?;
    let mut report = RunReport::new("export", hash);
    if a.level == 0 {
        return Err(Error::invalid("level must be at least 1").into());
    }
    let h = build(&game_to_csep(&game), a.level, a.method, &BuildOptions::default())?;
    export_sdpa(&h.problem, &a.out)?;
    report.method = Some(a.method.name().into());
    report.level = Some(a.level);
    report.message = Some(format!("wrote {}", a.out.display()));
    report.wall_time_s = t.elapsed().as_secs_f64();
    Ok(report)
}

/// Matrices as `[re, im]` pairs, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyDump {
    pub rho: Vec<Vec<[f64; 2]>>,
    pub alice: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
    pub bob: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

fn dump(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl From<&Strategy> for StrategyDump {
    fn from(s: &Strategy) -> Self {
        let fam = |f: &[Vec<CMat>]| f.iter().map(|q| q.iter().map(dump).collect()).collect();
        StrategyDump { rho: dump(&s.rho), alice: fam(&s.alice), bob: fam(&s.bob) }
    }
}

fn summary(r: &RunReport) -> String {
    let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.10}"));
    let mut s = format!("{} [{}]", r.command, &r.game_hash[..12.min(r.game_hash.len())]);
    if let (Some(m), Some(n)) = (&r.method, r.level) {
        s += &format!(" method={m} level={n}");
    }
    if let Some(n) = r.required_level {
        s += &format!(" required_level={n}");
    }
    s += &format!("\n  upper = {}\n  lower = {}\n  de Finetti bound = {}", f(r.upper), f(r.lower), f(r.definetti_bound));
    if let Some(st) = &r.solver {
        s += &format!(
            "\n  solver: {:?} in {} iterations, gap {:.2e}, pinf {:.2e}, dinf {:.2e}",
            st.status, st.iterations, st.gap, st.primal_infeasibility, st.dual_infeasibility
        );
    }
    if let Some(m) = &r.message {
        s += &format!("\n  {m}");
    }
    s
}

fn emit(r: &RunReport, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, r.to_json() + "\n"),
        None => {
            println!("{}", r.to_json());
            Ok(())
        }
    }
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (result, out) = match &cli.command {
        Command::Upper(a) => (cmd_upper(a), a.common.out.clone()),
        Command::Lower(a) => (cmd_lower(a), a.common.out.clone()),
        Command::Certify(a) => (cmd_certify(a), a.common.out.clone()),
        Command::Export(a) => (cmd_export(a), None),
    };
    match result {
        Ok(r) => {
            eprintln!("{}", summary(&r));
            if let Err(e) = emit(&r, out.as_deref()) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.error);
            if f.code == EXIT_CAP {
                if let Some(r) = &f.report {
                    let _ = emit(r, out.as_deref());
                }
            }
            f.code
        }
    }
}

pub fn main() -> i32 {
    run(Cli::parse())
}
