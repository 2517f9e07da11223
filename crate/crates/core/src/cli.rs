//! Command-line front end. [`run`] takes the full argv and returns the exit
//! code: 0 on success, 1 when a check fails or a solve hits its budget, 2 on
//! usage or input errors.

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{approx_ratio, char_poly, gis_bound, graham_bound, max_positive_root, DEFAULT_ROOT_TOL};
use crate::certify::{certify, Status, Verdict};
use crate::error::{Error, Result};
use crate::exact::{opt_bnb, DEFAULT_NODE_BUDGET};
use crate::json;
use crate::lpt::lpt_schedule;
use crate::model::{parse_instance, serialize_instance, Instance, Schedule};
use crate::verify::{self, Level, Outcome};
use crate::worstcase::{generate_gis_instance, search_worst, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Parser)]
#[command(name = "uniform-lpt", version, about = "LPT scheduling on uniform processors")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the LPT schedule and makespan of an instance file ("-" for stdin).
    Lpt { file: PathBuf },
    /// Print the optimal makespan and one optimal schedule.
    Opt {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Print LPT, OPT, their ratio and the reference bounds.
    Ratio {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Print ρ_m to 6 decimals, or a table for m = 2..5 when --m is omitted.
    Rho {
        #[arg(long)]
        m: Option<usize>,
        /// Root-finder tolerance.
        #[arg(long, default_value_t = DEFAULT_ROOT_TOL)]
        tol: f64,
    },
    /// Emit the instance attaining ρ_m.
    GenWorst {
        #[arg(long)]
        m: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hill-climb for instances with a large LPT/OPT ratio.
    Search {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0.25)]
        step_scale: f64,
        #[arg(long, env = "UNIFORM_LPT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Check necessary conditions for the instance to be minimal.
    Certify {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Run the acceptance checks; exits 1 if any fails.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::BudgetExhausted { .. } | Error::EnumerationCap { .. } | Error::MappingCap { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path)?
    };
    parse_instance(&text)
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let fmt = cli.format;
    match &cli.command {
        Command::Lpt { file } => {
            let inst = read_instance(file)?;
            let sched = lpt_schedule(&inst);
            print_schedule(out, fmt, &inst, &sched, None)?;
        }
        Command::Opt { file, budget } => {
            let inst = read_instance(file)?;
            let opt = opt_bnb(&inst, *budget)?;
            print_schedule(out, fmt, &inst, &opt.schedule(&inst), Some(opt.nodes_explored))?;
        }
        Command::Ratio { file, budget } => {
            let inst = read_instance(file)?;
            let rep = approx_ratio(&inst, *budget)?;
            match fmt {
                Format::Json => writeln!(out, "{}", json::to_string(&rep))?,
                Format::Csv => write_csv(out, std::slice::from_ref(&rep))?,
                Format::Text => {
                    writeln!(out, "lpt:    {}", rep.lpt)?;
                    writeln!(out, "opt:    {}", rep.opt)?;
                    writeln!(out, "ratio:  {:.6}", rep.ratio)?;
                    let note = if rep.rho_m_tight { "tight" } else { "lower bound" };
                    writeln!(out, "rho_{}:  {:.6} ({note})", rep.m, rep.rho_m)?;
                    writeln!(out, "2m/(m+1):      {:.6}", rep.gis_bound)?;
                    writeln!(out, "4/3 - 1/(3m):  {:.6} (identical speeds)", rep.graham_bound)?;
                }
            }
        }
        Command::Rho { m, tol } => {
            if tol.is_nan() || *tol <= 0.0 {
                return Err(Error::OutOfRange {
                    what: "tolerance",
                    detail: format!("{tol} is not positive"),
                });
            }
            let ms: Vec<usize> = match m {
                Some(m) => vec![*m],
                None => (2..=5).collect(),
            };
            let rows = ms
                .iter()
                .map(|&m| {
                    let value = if m == 1 { 1.0 } else { max_positive_root(&char_poly(m)?, *tol)? };
                    Ok(RhoRow {
                        m,
                        rho: value,
                        gis_bound: gis_bound(m),
                        graham_bound: graham_bound(m),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match (fmt, m) {
                (Format::Json, Some(_)) => writeln!(out, "{}", json::to_string(&rows[0]))?,
                (Format::Json, None) => writeln!(out, "{}", json::to_string(&rows))?,
                (Format::Csv, _) => write_csv(out, &rows)?,
                (Format::Text, Some(_)) => writeln!(out, "{:.6}", rows[0].rho)?,
                (Format::Text, None) => {
                    writeln!(out, "m  rho_m     2m/(m+1)  4/3-1/(3m)")?;
                    for r in &rows {
                        writeln!(out, "{}  {:.6}  {:.6}  {:.6}", r.m, r.rho, r.gis_bound, r.graham_bound)?;
                    }
                }
            }
        }
        Command::GenWorst { m, output } => {
            let text = serialize_instance(&generate_gis_instance(*m)?);
            match output {
                Some(path) => std::fs::write(path, format!("{text}\n"))?,
                None => writeln!(out, "{text}")?,
            }
        }
        Command::Search {
            m,
            n_max,
            n_min,
            restarts,
            steps,
            step_scale,
            seed,
            budget,
        } => {
            let mut cfg = SearchConfig::new(*m, *n_max);
            if let Some(n) = n_min {
                cfg.n_min = *n;
            }
            cfg.restarts = *restarts;
            cfg.steps_per_restart = *steps;
            cfg.step_scale = *step_scale;
            cfg.seed = *seed;
            cfg.solver_node_budget = *budget;
            let res = search_worst(&cfg)?;
            match fmt {
                Format::Json => writeln!(out, "{}", json::to_string(&res))?,
                Format::Csv => write_csv(
                    out,
                    &[SearchRow {
                        m: *m,
                        best_ratio: res.best_ratio,
                        ratio_bound: res.ratio_bound,
                        exceeded: res.exceeded,
                        instances_evaluated: res.instances_evaluated,
                        candidates_skipped: res.candidates_skipped,
                        best_restart: res.best_restart,
                        best_instance: serialize_instance(&res.best_instance),
                    }],
                )?,
                Format::Text => {
                    writeln!(out, "best ratio:  {:.9}", res.best_ratio)?;
                    writeln!(out, "rho_{}:       {:.9}", m, res.ratio_bound)?;
                    writeln!(out, "exceeded:    {}", res.exceeded)?;
                    writeln!(
                        out,
                        "evaluated:   {} ({} skipped), best from restart {}",
                        res.instances_evaluated, res.candidates_skipped, res.best_restart
                    )?;
                    writeln!(out, "instance:    {}", serialize_instance(&res.best_instance))?;
                }
            }
            if res.exceeded {
                writeln!(err, "search found a ratio above rho_{m}")?;
                return Ok(1);
            }
        }
        Command::Certify { file, budget } => {
            let inst = read_instance(file)?;
            let rep = certify(&inst, *budget)?;
            match fmt {
                Format::Json => writeln!(out, "{}", rep.to_json())?,
                Format::Csv => write_csv(out, &rep.conditions)?,
                Format::Text => {
                    let verdict = match rep.verdict {
                        Verdict::CertifiedNonMinimal => "certified-non-minimal",
                        Verdict::ConsistentWithMinimality => "consistent-with-minimality",
                    };
                    writeln!(out, "verdict: {verdict}")?;
                    writeln!(out, "rho_I:   {:.9}", rep.rho_i)?;
                    for c in &rep.conditions {
                        let status = match c.status {
                            Status::Holds => "holds",
                            Status::Fails => "FAILS",
                            Status::Inapplicable => "n/a",
                        };
                        writeln!(out, "  {:<24} {:<6} {}", c.name, status, c.detail)?;
                    }
                }
            }
        }
        Command::Verify { level } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let outcomes = verify::run(level, |o| {
                if fmt == Format::Text {
                    let _ = writeln!(out, "{}", o.line());
                    let _ = out.flush();
                }
            });
            match fmt {
                Format::Json => writeln!(out, "{}", json::to_string(&outcomes))?,
                Format::Csv => write_csv(out, &outcomes.iter().map(VerifyRow::from).collect::<Vec<_>>())?,
                Format::Text => {}
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                writeln!(err, "{failed} check(s) failed")?;
                return Ok(1);
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct RhoRow {
    m: usize,
    rho: f64,
    gis_bound: f64,
    graham_bound: f64,
}

#[derive(Serialize)]
struct SearchRow {
    m: usize,
    best_ratio: f64,
    ratio_bound: f64,
    exceeded: bool,
    instances_evaluated: u64,
    candidates_skipped: u64,
    best_restart: usize,
    best_instance: String,
}

#[derive(Serialize)]
struct VerifyRow {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed_ms: f64,
}

impl From<&Outcome> for VerifyRow {
    fn from(o: &Outcome) -> Self {
        VerifyRow {
            id: o.id,
            name: o.name,
            passed: o.passed,
            detail: o.detail.clone(),
            elapsed_ms: o.elapsed.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Serialize)]
struct ProcessorRow {
    processor: usize,
    speed: f64,
    tasks: String,
    load: f64,
    finish: f64,
}

#[derive(Serialize)]
struct ScheduleJson<'a> {
    #[serde(flatten)]
    schedule: &'a Schedule,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes_explored: Option<u64>,
}

fn print_schedule(
    out: &mut dyn Write,
    fmt: Format,
    inst: &Instance,
    sched: &Schedule,
    nodes: Option<u64>,
) -> Result<()> {
    let rows: Vec<ProcessorRow> = (0..inst.m())
        .map(|p| ProcessorRow {
            processor: p + 1,
            speed: inst.speeds()[p],
            tasks: sched
                .tasks_on(p)
                .iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(" "),
            load: sched.loads[p],
            finish: sched.finish_times[p],
        })
        .collect();
    match fmt {
        Format::Json => writeln!(
            out,
            "{}",
            json::to_string(&ScheduleJson {
                schedule: sched,
                nodes_explored: nodes,
            })
        )?,
        Format::Csv => write_csv(out, &rows)?,
        Format::Text => {
            if let Some(name) = inst.name() {
                writeln!(out, "instance: {name}")?;
            }
            for r in &rows {
                writeln!(
                    out,
                    "processor {} (speed {}): tasks [{}] load {} finish {}",
                    r.processor, r.speed, r.tasks, r.load, r.finish
                )?;
            }
            writeln!(out, "makespan: {}", sched.makespan)?;
            if let Some(n) = nodes {
                writeln!(out, "nodes explored: {n}")?;
            }
        }
    }
    Ok(())
}

fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
