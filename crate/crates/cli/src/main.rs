//! `xxxdm`: Matsubara data, fermionic bases, `X(n)` tables, `ω` matrices,
//! density matrices and verification runs from the command line.
//!
//! Every file written through `--out` gets a sibling `<file>.manifest.json`
//! recording the command, parameters, input and output digests and wall time.
//! Exit codes: 0 success, 1 a verification failed, 2 any other error.

mod manifest;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use manifest::{digest_file, RunManifest};
use rug::{Float, Rational};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use xxxdm::density::{cft_thermal, efp_asymptotics, WordExpectations};
use xxxdm::fermion_basis::compute_v;
use xxxdm::matsubara::{generate_md, MatsubaraData};
use xxxdm::numerics::Precision;
use xxxdm::omega_exact::{omega_md, omega_zero, OmegaMatrix};
use xxxdm::omega_thermal::{max_temperature, omega_thermal, ThermalConfig};
use xxxdm::operator_space::InvariantOperator;
use xxxdm::pipeline::{self, consistency_finding, parse_rational, Finding};
use xxxdm::xsolver::{published_schedule, solve_x, DTable, Problem, ScheduleMode, MD_RANGE};
use xxxdm::{Error, Exec};

#[derive(Parser)]
#[command(name = "xxxdm", version, about = "Reduced density matrices of the XXX chain through the fermionic basis")]
struct Cli {
    /// Working precision in decimal digits (defaults: 50 at zero temperature, 60 thermal).
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Disable data parallelism.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Inputs {
    /// Interval length.
    #[arg(long)]
    n: usize,
    /// `ω` matrix file written by `omega`.
    #[arg(long)]
    omega: PathBuf,
    /// Directory holding `d_<k>.txt` from `solve-x`.
    #[arg(long, default_value = "tables")]
    tables: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Draw admissible Matsubara data.
    GenMd {
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = MD_RANGE)]
        range: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fermionic pairs of H⁽ⁿ⁾ and the matrix F spanning V⁽ⁿ⁾.
    BuildBasis {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for X(k), k = 2..n, and write the X and word tables.
    SolveX {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Schedule::Auto)]
        schedule: Schedule,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "tables")]
        out_dir: PathBuf,
    },
    /// Taylor matrix of ω for finite Matsubara data, zero or finite temperature.
    Omega {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Matsubara data file (mode md).
        #[arg(long)]
        md: Option<PathBuf>,
        /// Temperature as a rational or decimal (mode thermal).
        #[arg(long = "T")]
        t: Option<String>,
        /// Contour half-width 1 or 2 (mode thermal; default by temperature).
        #[arg(long = "R")]
        r: Option<u32>,
        #[arg(long, default_value_t = 10)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expectation value of an invariant operator.
    Expect {
        #[command(flatten)]
        inputs: Inputs,
        /// Operator file: site count, then `word coefficient` lines.
        #[arg(long)]
        operator: PathBuf,
    },
    /// Spectra of the reduced density matrix, as CSV.
    Density {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entanglement entropy of the reduced density matrix.
    Entropy {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emptiness formation probabilities P(2..n) and the smoothed asymptotic constant.
    Efp {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// s(n,T) − s(n,0) over a grid of nT, with the CFT curve.
    ThermalTable {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "0.05")]
        nt_from: String,
        #[arg(long, default_value = "2.0")]
        nt_to: String,
        #[arg(long, default_value = "0.05")]
        nt_step: String,
        #[arg(long, default_value = "tables")]
        tables: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce published numbers and exact identities.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Largest n for the appendix suite.
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Read word tables from here instead of solving for them.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Auto,
    Published,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Md,
    Zero,
    Thermal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Appendix,
    Thermal,
    Properties,
}

/// Verdict-carrying outcome of a subcommand.
enum Outcome {
    Ok,
    VerificationFailed,
}

struct Ctx {
    exec: Exec,
    prec: Option<u32>,
    command: String,
    argv: Vec<String>,
    started: Instant,
}

impl Ctx {
    fn prec(&self, default: Precision) -> Precision {
        self.prec.map(Precision::new).unwrap_or(default)
    }

    /// Write `text` to `out` with its manifest, or print it.
    fn emit(&self, out: &Option<PathBuf>, text: &str, inputs: &[&Path], seed: Option<u64>) -> Result<(), Error> {
        match out {
            None => print!("{text}"),
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(path, text)?;
                self.manifest(path, &[path.as_path()], inputs, seed)?;
            }
        }
        Ok(())
    }

    fn manifest(&self, at: &Path, outputs: &[&Path], inputs: &[&Path], seed: Option<u64>) -> Result<(), Error> {
        let m = RunManifest {
            command: self.command.clone(),
            arguments: self.argv.iter().skip(1).cloned().collect(),
            seed,
            precision_digits: self.prec,
            inputs: inputs.iter().map(|p| digest_file(p)).collect::<Result<_, _>>()?,
            outputs: outputs.iter().map(|p| digest_file(p)).collect::<Result<_, _>>()?,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        std::fs::write(manifest::path_for(at), m.to_json())?;
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_tables(dir: &Path, n: usize) -> Result<(BTreeMap<usize, DTable>, Vec<PathBuf>), Error> {
    let mut tables = BTreeMap::new();
    let mut files = Vec::new();
    for k in 2..=n {
        let path = dir.join(format!("d_{k}.txt"));
        if !path.exists() {
            return Err(Error::Refused(format!("{} is missing; run `xxxdm solve-x --n {k} --out-dir {}`", path.display(), dir.display())));
        }
        tables.insert(k, DTable::from_text(&read(&path)?)?);
        files.push(path);
    }
    Ok((tables, files))
}

fn load_inputs(inputs: &Inputs) -> Result<(OmegaMatrix, BTreeMap<usize, DTable>, Vec<PathBuf>), Error> {
    let omega = OmegaMatrix::from_text(&read(&inputs.omega)?)?;
    let (tables, mut files) = load_tables(&inputs.tables, inputs.n)?;
    files.push(inputs.omega.clone());
    Ok((omega, tables, files))
}

fn bits_of(omega: &OmegaMatrix, ctx: &Ctx) -> u32 {
    match omega {
        OmegaMatrix::Real { bits, .. } => ctx.prec.map(|d| Precision::new(d).bits()).unwrap_or(*bits),
        OmegaMatrix::Exact(_) => ctx.prec(Precision::ZERO_T_DEFAULT).bits(),
    }
}

fn digits(x: &Float, d: usize) -> String {
    x.to_string_radix(10, Some(d))
}

fn run(cli: Cli, ctx: &Ctx) -> Result<Outcome, Error> {
    let exec = ctx.exec;
    match cli.command {
        Command::GenMd { l, m, seed, range, out } => {
            let md = generate_md(l, m, seed, range)?;
            ctx.emit(&out, &format!("{md}\n"), &[], Some(seed))?;
        }
        Command::BuildBasis { n, out } => {
            let b = compute_v(n);
            eprintln!("dim H = {}, dim V = {}", b.dim_h(), b.dim_v());
            ctx.emit(&out, &b.to_text(), &[], None)?;
        }
        Command::SolveX { n, schedule, seed, out_dir } => {
            let mode = match schedule {
                Schedule::Auto => ScheduleMode::default(),
                Schedule::Published => ScheduleMode::Fixed(published_schedule()),
            };
            std::fs::create_dir_all(&out_dir)?;
            let mut failed = false;
            for k in 2..=n {
                let p = Problem::new(k);
                let x = match solve_x(&p, &mode, seed, exec) {
                    Ok(x) => x,
                    Err(e @ (Error::Inconsistent { .. } | Error::RankDeficient { .. })) => {
                        println!("[FAIL] n={k}: {e}");
                        return Ok(Outcome::VerificationFailed);
                    }
                    Err(e) => return Err(e),
                };
                let xp = out_dir.join(format!("x_{k}.txt"));
                let dp = out_dir.join(format!("d_{k}.txt"));
                std::fs::write(&xp, x.to_text())?;
                std::fs::write(&dp, DTable::build(&p, &x).to_text())?;
                ctx.manifest(&out_dir.join(format!("solve-x_{k}")), &[&xp, &dp], &[], Some(seed))?;
                if k == n {
                    println!("{}", x.report);
                }
                let f = consistency_finding(&x.report);
                println!("{f}");
                failed |= !f.pass;
            }
            if failed {
                return Ok(Outcome::VerificationFailed);
            }
        }
        Command::Omega { mode, md, t, r, order, out } => {
            let (text, inputs) = match mode {
                Mode::Md => {
                    let path = md.ok_or_else(|| Error::Refused("--md FILE is required with --mode md".into()))?;
                    let data: MatsubaraData = read(&path)?.trim().parse()?;
                    (omega_md(&data, order)?.to_text(), vec![path])
                }
                Mode::Zero => (omega_zero(order, ctx.prec(Precision::ZERO_T_DEFAULT)).to_text(), vec![]),
                Mode::Thermal => {
                    let t = parse_rational(t.as_deref().ok_or_else(|| Error::Refused("--T is required with --mode thermal".into()))?)?;
                    let prec = ctx.prec(Precision::THERMAL_DEFAULT);
                    let mut cfg = match r {
                        Some(r) => ThermalConfig::new(t, r, prec),
                        None => ThermalConfig::for_temperature(t, prec),
                    };
                    cfg.order = order;
                    (omega_thermal(&cfg, exec)?.to_text(), vec![])
                }
            };
            let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
            ctx.emit(&out, &text, &refs, None)?;
        }
        Command::Expect { inputs, operator } => {
            let (omega, tables, _) = load_inputs(&inputs)?;
            let op = InvariantOperator::from_text(&read(&operator)?)?;
            if op.n > inputs.n {
                return Err(Error::Refused(format!("operator on {} sites exceeds --n {}", op.n, inputs.n)));
            }
            let bits = bits_of(&omega, ctx);
            let we = WordExpectations::new(op.n.max(2), &tables, &omega, bits, exec)?;
            let mut v = Float::with_val(bits, 0);
            for (w, c) in &op.coeffs {
                v += Float::with_val(bits, c) * we.get(w);
            }
            println!("{}", digits(&v, 30));
        }
        Command::Density { inputs, out } => {
            let (omega, tables, files) = load_inputs(&inputs)?;
            let (_, rep) = pipeline::density_report(inputs.n, &tables, &omega, bits_of(&omega, ctx), exec)?;
            let mut csv = String::from("two_j,multiplicity,index,eigenvalue\n");
            for (j2, ev) in &rep.spectra {
                for (i, l) in ev.iter().enumerate() {
                    writeln!(csv, "{j2},{},{},{}", j2 + 1, i + 1, digits(l, 30)).unwrap();
                }
            }
            let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
            ctx.emit(&out, &csv, &refs, None)?;
        }
        Command::Entropy { inputs, out } => {
            let (omega, tables, files) = load_inputs(&inputs)?;
            let (_, rep) = pipeline::density_report(inputs.n, &tables, &omega, bits_of(&omega, ctx), exec)?;
            println!("{}", digits(&rep.entropy, 30));
            if out.is_some() {
                let csv = format!("n,entropy,efp,trace\n{},{},{},{}\n", rep.n, digits(&rep.entropy, 30), digits(&rep.efp, 30), digits(&rep.trace, 30));
                let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
                ctx.emit(&out, &csv, &refs, None)?;
            }
        }
        Command::Efp { inputs, out } => {
            let (omega, tables, files) = load_inputs(&inputs)?;
            let bits = bits_of(&omega, ctx);
            let mut p = BTreeMap::new();
            for k in 2..=inputs.n {
                let (_, rep) = pipeline::density_report(k, &tables, &omega, bits, exec)?;
                p.insert(k, rep.efp);
            }
            let windows = efp_asymptotics(&p, bits);
            let mut csv = String::from("n,efp,smoothed_constant\n");
            for (k, v) in &p {
                let w = windows.get(k).map(|w| digits(w, 20)).unwrap_or_default();
                writeln!(csv, "{k},{},{w}", digits(v, 25)).unwrap();
            }
            let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
            ctx.emit(&out, &csv, &refs, None)?;
        }
        Command::ThermalTable { n, nt_from, nt_to, nt_step, tables, out } => {
            let (from, to, step) = (parse_rational(&nt_from)?, parse_rational(&nt_to)?, parse_rational(&nt_step)?);
            if step <= 0 || from <= 0 {
                return Err(Error::Refused("the nT grid must be positive and increasing".into()));
            }
            let mut temps = Vec::new();
            let mut x = from;
            while x <= to {
                temps.push(Rational::from(&x / n as u32));
                x += &step;
            }
            if let Some(t) = temps.iter().find(|t| **t > max_temperature()) {
                return Err(Error::Refused(format!("T = {t} exceeds the supported maximum {}", max_temperature())));
            }
            let prec = ctx.prec(Precision::THERMAL_DEFAULT);
            let (tab, files) = load_tables(&tables, n)?;
            let rows = pipeline::thermal_entropy_differences(n, &temps, &tab, prec, exec)?;
            let mut csv = String::from("nT,T,R,s_diff,cft\n");
            for (t, ds, om) in &rows {
                let nt = Rational::from(t * n as u32);
                let x = Float::with_val(prec.bits(), &nt);
                let ntd = nt.to_f64();
                writeln!(csv, "{ntd:.2},{t},{},{},{}", om.meta.half_width, digits(ds, 15), digits(&cft_thermal(&x), 15)).unwrap();
            }
            let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
            ctx.emit(&out, &csv, &refs, None)?;
        }
        Command::Verify { suite, n_max, tables } => {
            let findings: Vec<Finding> = match suite {
                Suite::Appendix => {
                    let tab = match tables {
                        Some(dir) => load_tables(&dir, n_max)?.0,
                        None => pipeline::word_tables(n_max, &ScheduleMode::default(), 1, exec)?.0,
                    };
                    pipeline::appendix_suite(&tab, n_max, ctx.prec(Precision::ZERO_T_DEFAULT), exec)?
                }
                Suite::Thermal => pipeline::thermal_suite(ctx.prec(Precision::THERMAL_DEFAULT), exec)?,
                Suite::Properties => {
                    let mut f = pipeline::property_suite()?;
                    let (_, reports) = pipeline::word_tables(n_max.min(5), &ScheduleMode::default(), 1, exec)?;
                    f.extend(reports.iter().map(consistency_finding));
                    f
                }
            };
            for f in &findings {
                println!("{f}");
            }
            let failed = findings.iter().filter(|f| !f.pass).count();
            println!("{} checks, {failed} failed", findings.len());
            if failed > 0 {
                return Ok(Outcome::VerificationFailed);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Inadmissible(_) => "inadmissible",
        Error::RetryBudget(_) => "retry_budget",
        Error::Pole(_) => "pole",
        Error::Quadrature { .. } => "quadrature",
        Error::Schur(_) => "schur",
        Error::Inconsistent { .. } => "inconsistent",
        Error::RankDeficient { .. } => "rank_deficient",
        Error::Singular(_) => "singular",
        Error::NoConvergence(_) => "no_convergence",
        Error::ThermalCheck(_) => "thermal_check",
        Error::Parse(_) => "parse",
        Error::Refused(_) => "refused",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(j) = cli.jobs {
        xxxdm::exec::set_jobs(j);
    }
    let ctx = Ctx {
        exec: if cli.sequential { Exec::Sequential } else { Exec::Parallel },
        prec: cli.prec,
        command: matches.subcommand_name().unwrap_or_default().to_string(),
        argv: std::env::args().collect(),
        started: Instant::now(),
    };
    match run(cli, &ctx) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", manifest::error_record(error_kind(&e), &e.to_string()));
            ExitCode::from(2)
        }
    }
}
