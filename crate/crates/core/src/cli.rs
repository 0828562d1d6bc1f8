//! The `kal` command line. [`run`] takes the argument list and output
//! streams and returns the exit code, so the whole surface is testable in
//! process.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 malformed
//! input, 3 a numeric domain violation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::ComplexValue;
use crate::characters::DirichletCharacter;
use crate::cusps::{
    cusp_data, equivalence_witness, is_equivalent, parse_fraction, representatives, satisfies_scaling_identities, Cusp,
    ScalingMatrix,
};
use crate::doublecoset::{al_tuples, kloosterman_oracle_al, AlTuple};
use crate::eisenstein::{
    n_support, phi_closed_corrected, phi_closed_reading, phi_direct, phi_direct_batch, EisensteinCoefficient,
    EisensteinConfig, PowerTable, Reading, DEFAULT_L_EPS,
};
use crate::error::Error;
use crate::kloosterman::{theorem_al_pair, ALPairConfig};
use crate::surd::IntMatrix;
use crate::verify::{run_criterion, CriterionReport, GridOptions, Tolerances, CRITERIA};

/// Environment variable holding the default tolerance.
pub const TOL_ENV: &str = "KAL_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Column order of the Eisenstein CSV output.
pub const EISENSTEIN_CSV_COLUMNS: [&str; 8] = ["N", "r", "w", "n", "u", "value_re", "value_im", "bound"];

#[derive(Parser, Debug)]
#[command(name = "kal", version, about = "Kloosterman sums and Eisenstein coefficients at Atkin-Lehner cusps of Gamma_0(N)")]
pub struct Cli {
    /// Worker threads for verification grids (0 = all cores, 1 = sequential).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Tolerance for every numeric check, in (0, 1). Defaults to $KAL_TOL,
    /// then to the per-suite tolerances.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// key=value preset file (keys: jobs, format, tol, n_max, c_max, x).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cusp representatives, equivalence and scaling matrices.
    #[command(subcommand)]
    Cusps(CuspsCmd),
    /// Kloosterman sums at Atkin-Lehner cusp pairs.
    #[command(subcommand)]
    Kloosterman(KloostermanCmd),
    /// Fourier coefficients of Eisenstein series.
    #[command(subcommand)]
    Eisenstein(EisensteinCmd),
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
pub enum CuspsCmd {
    /// Inequivalent cusps 1/w of Gamma_0(N).
    List {
        #[arg(long = "N")]
        level: u64,
    },
    /// Whether two cusps are Gamma_0(N)-equivalent.
    Equiv {
        #[arg(long = "N")]
        level: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Scaling matrix of a cusp; with --r the Atkin-Lehner scaling of 1/r.
    Scaling {
        #[arg(long = "N")]
        level: u64,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "r")]
        cusp: Option<String>,
        #[arg(long)]
        r: Option<u64>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CharArg {
    /// Character as exponents on the unit-group generators, e.g. 0,1
    /// (default: principal).
    #[arg(long, value_delimiter = ',')]
    pub chi: Option<Vec<u64>>,
}

#[derive(Subcommand, Debug)]
pub enum KloostermanCmd {
    /// One sum at modulus c sqrt(uv).
    Eval {
        /// p,q,u,v
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pquv: Vec<u64>,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long)]
        c: u64,
        #[command(flatten)]
        chi: CharArg,
        /// Sum over double-coset representatives instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Closed form and oracle for every tuple of a level and allowed c <= c-max.
    Table {
        #[arg(long = "N")]
        level: u64,
        #[arg(long, default_value_t = 24)]
        c_max: u64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
        m: i64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
        n: i64,
        #[command(flatten)]
        chi: CharArg,
    },
    /// Criteria 1-4 and 9.
    Verify(GridArgs),
}

#[derive(Subcommand, Debug)]
pub enum EisensteinCmd {
    /// One coefficient phi(n, u).
    Phi {
        #[arg(long = "N")]
        level: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        w: u64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long)]
        u_re: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        u_im: f64,
        /// Truncated series instead of the closed form.
        #[arg(long)]
        direct: bool,
        #[arg(long = "X", default_value_t = 100_000)]
        x: u64,
        /// Closed form with exact local factors at primes of s0 f0.
        #[arg(long, conflicts_with = "direct")]
        corrected: bool,
        /// Use w' = w / (f_r f_s) in place of v in the character argument.
        #[arg(long, conflicts_with = "direct")]
        w_prime: bool,
    },
    /// Batch of coefficients over all cusp pairs of levels <= n-max.
    Table {
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 6)]
        n_abs_max: i64,
        #[arg(long, value_delimiter = ',', default_value = "1.5")]
        u: Vec<f64>,
        #[arg(long)]
        direct: bool,
        #[arg(long = "X", default_value_t = 100_000)]
        x: u64,
    },
    /// Criterion 7.
    Verify(GridArgs),
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Every criterion, or the ones listed with --criteria.
    All {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Cap on every level and character modulus in the grids.
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Cap on the integer part of Kloosterman moduli.
    #[arg(long)]
    pub c_max: Option<u64>,
    /// Cutoff of the direct Eisenstein series.
    #[arg(long = "X")]
    pub x: Option<u64>,
}

/// Settings after merging flags, the config file and the environment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub jobs: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
    pub n_max: Option<u64>,
    pub c_max: Option<u64>,
    pub x: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses a `key=value` preset file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let k = k.trim().replace('-', "_");
        if !["jobs", "format", "tol", "n_max", "c_max", "x"].contains(&k.as_str()) {
            return Err(format!("line {}: unknown key '{k}'", i + 1));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("invalid value '{v}' for {key}")))
}

fn resolve(cli: &Cli, grid: Option<&GridArgs>, env_tol: Option<String>) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_config_file(&text).map_err(CliError::Usage)?
        }
        None => BTreeMap::new(),
    };
    let get = |k: &str| file.get(k).map(String::as_str);
    let jobs = match (cli.jobs, get("jobs")) {
        (Some(j), _) => j,
        (None, Some(v)) => parse_value("jobs", v)?,
        (None, None) => 0,
    };
    let format = match (cli.format, get("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => Format::from_str(v, true).map_err(|_| CliError::Usage(format!("invalid format '{v}'")))?,
        (None, None) => Format::Json,
    };
    let tol = match (cli.tol, get("tol"), env_tol) {
        (Some(t), _, _) => Some(t),
        (None, Some(v), _) => Some(parse_value("tol", v)?),
        (None, None, Some(v)) => Some(parse_value(TOL_ENV, &v)?),
        _ => None,
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("tolerance {t} is not in (0, 1)")));
        }
    }
    let pick = |flag: Option<u64>, key: &str| -> Result<Option<u64>, CliError> {
        match (flag, get(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(v)) => Ok(Some(parse_value(key, v)?)),
            _ => Ok(None),
        }
    };
    let n_max = pick(grid.and_then(|g| g.n_max), "n_max")?;
    let c_max = pick(grid.and_then(|g| g.c_max), "c_max")?;
    let x = pick(grid.and_then(|g| g.x), "x")?;
    for (name, v) in [("n-max", n_max), ("c-max", c_max), ("X", x)] {
        if v == Some(0) {
            return Err(CliError::Usage(format!("{name} must be positive")));
        }
    }
    Ok(RunConfig { jobs, format, output: cli.output.clone(), tol, n_max, c_max, x })
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out` (or `--output`); diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_env(args, std::env::var(TOL_ENV).ok(), out, err)
}

/// [`run`] with the tolerance environment variable passed explicitly.
pub fn run_with_env<I, T>(args: I, env_tol: Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, env_tol) {
        Ok((code, text)) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &text).map_err(|e| e.to_string()),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_DOMAIN;
            }
            code
        }
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Domain(m)) => {
            let _ = writeln!(err, "{m}");
            EXIT_DOMAIN
        }
        Err(CliError::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DOMAIN
        }
    }
}

fn grid_args(cli: &Cli) -> Option<&GridArgs> {
    match &cli.command {
        Command::Kloosterman(KloostermanCmd::Verify(g)) | Command::Eisenstein(EisensteinCmd::Verify(g)) => Some(g),
        Command::Verify(VerifyCmd::All { grid, .. }) => Some(grid),
        _ => None,
    }
}

fn execute(cli: &Cli, env_tol: Option<String>) -> Result<(i32, String), CliError> {
    let cfg = resolve(cli, grid_args(cli), env_tol)?;
    match &cli.command {
        Command::Cusps(c) => cusps_cmd(c, &cfg).map(|s| (EXIT_OK, s)),
        Command::Kloosterman(KloostermanCmd::Verify(_)) => verify_cmd("kloosterman verify", &[1, 2, 3, 4, 9], &cfg),
        Command::Kloosterman(k) => kloosterman_cmd(k, &cfg).map(|s| (EXIT_OK, s)),
        Command::Eisenstein(EisensteinCmd::Verify(_)) => verify_cmd("eisenstein verify", &[7], &cfg),
        Command::Eisenstein(e) => eisenstein_cmd(e, &cfg).map(|s| (EXIT_OK, s)),
        Command::Verify(VerifyCmd::All { criteria, .. }) => {
            let list = criteria.clone().unwrap_or_else(|| CRITERIA.to_vec());
            if let Some(bad) = list.iter().find(|k| !CRITERIA.contains(k)) {
                return Err(CliError::Usage(format!("no criterion {bad}")));
            }
            verify_cmd("verify all", &list, &cfg)
        }
    }
}

/// Rounds to 12 decimals so that values which are exactly integers print
/// as such; `-0.0` becomes `0.0`.
fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn complex_json(z: ComplexValue) -> Value {
    json!([tidy(z.re), tidy(z.im)])
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn parse_cusp(s: &str, level: u64) -> Result<Cusp, CliError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s == "1/0" {
        return Ok(Cusp::infinity(level));
    }
    let (p, q) = parse_fraction(s).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Cusp::new(p, q, level)?)
}

fn check_level(level: u64) -> Result<(), CliError> {
    if level == 0 {
        return Err(CliError::Usage("N must be positive".into()));
    }
    Ok(())
}

fn matrix_json(m: &IntMatrix) -> Value {
    json!([[m.a, m.b], [m.c, m.d]])
}

fn cusps_cmd(cmd: &CuspsCmd, cfg: &RunConfig) -> Result<String, CliError> {
    match cmd {
        CuspsCmd::List { level } => {
            check_level(*level)?;
            let reps = representatives(*level);
            let mut rows = Vec::new();
            for c in &reps {
                let d = cusp_data(*level, c.den, None)?;
                rows.push((c.to_string(), d.w, d.f, d.n_dprime));
            }
            match cfg.format {
                Format::Json => to_json(&json!({
                    "level": level,
                    "count": reps.len(),
                    "cusps": rows.iter().map(|(c, w, f, h)| json!({"cusp": c, "w": w, "f": f, "width": h})).collect::<Vec<_>>(),
                })),
                Format::Csv => csv_string(
                    &["N", "cusp", "w", "f", "width"],
                    rows.into_iter()
                        .map(|(c, w, f, h)| vec![level.to_string(), c, w.to_string(), f.to_string(), h.to_string()])
                        .collect(),
                ),
            }
        }
        CuspsCmd::Equiv { level, a, b } => {
            check_level(*level)?;
            let (ca, cb) = (parse_cusp(a, *level)?.normalize(), parse_cusp(b, *level)?.normalize());
            let eq = is_equivalent(*level, ca.den, cb.den);
            let witness = equivalence_witness(*level, ca.den, cb.den);
            match cfg.format {
                Format::Json => to_json(&json!({
                    "level": level,
                    "a": a,
                    "b": b,
                    "a_normal": ca.to_string(),
                    "b_normal": cb.to_string(),
                    "equivalent": eq,
                    "witness_between_normal_forms": witness.as_ref().map(matrix_json),
                })),
                Format::Csv => csv_string(
                    &["N", "a", "b", "a_normal", "b_normal", "equivalent"],
                    vec![vec![level.to_string(), a.clone(), b.clone(), ca.to_string(), cb.to_string(), eq.to_string()]],
                ),
            }
        }
        CuspsCmd::Scaling { level, cusp, r } => {
            check_level(*level)?;
            let sc = match (cusp, r) {
                (_, Some(r)) => ScalingMatrix::atkin_lehner(*level, *r)?,
                (Some(c), None) => {
                    let c = parse_cusp(c, *level)?.normalize();
                    ScalingMatrix::general(*level, c.den)?
                }
                (None, None) => return Err(CliError::Usage("give --cusp or --r".into())),
            };
            let sigma = sc.to_surd();
            let lambda = sc.stabilizer();
            let ok = satisfies_scaling_identities(&sigma, &lambda, &sc.cusp);
            let j = sigma.to_json();
            match cfg.format {
                Format::Json => to_json(&json!({
                    "level": level,
                    "cusp": sc.cusp.to_string(),
                    "tau": matrix_json(&sc.tau),
                    "width": sc.width,
                    "sigma": j,
                    "stabilizer": matrix_json(&lambda),
                    "identities_hold": ok,
                })),
                Format::Csv => {
                    let mut row = vec![level.to_string(), sc.cusp.to_string(), sc.width.to_string()];
                    row.extend(j.entries.iter().cloned());
                    row.push(j.surd.to_string());
                    row.push(ok.to_string());
                    csv_string(&["N", "cusp", "width", "sigma_a", "sigma_b", "sigma_c", "sigma_d", "surd", "identities_hold"], vec![row])
                }
            }
        }
    }
}

fn character(level: u64, arg: &CharArg) -> Result<DirichletCharacter, CliError> {
    Ok(match &arg.chi {
        None => DirichletCharacter::principal(level)?,
        Some(e) => DirichletCharacter::from_exponents(level, e)?,
    })
}

fn tuple_from(pquv: &[u64]) -> Result<AlTuple, CliError> {
    let [p, q, u, v] = pquv else {
        return Err(CliError::Usage("--pquv needs four comma-separated integers".into()));
    };
    Ok(AlTuple::new(*p, *q, *u, *v)?)
}

fn kloosterman_cmd(cmd: &KloostermanCmd, cfg: &RunConfig) -> Result<String, CliError> {
    match cmd {
        KloostermanCmd::Eval { pquv, m, n, c, chi, oracle } => {
            let t = tuple_from(pquv)?;
            let chi = character(t.level(), chi)?;
            if *c == 0 {
                return Err(CliError::Usage("c must be positive".into()));
            }
            let config = ALPairConfig::new(t, chi.clone())?;
            let closed = theorem_al_pair(&config, *m, *n, *c)?;
            let (value, method) = if *oracle {
                (kloosterman_oracle_al(&t, *m, *n, *c, &chi)?, "oracle".to_string())
            } else {
                (closed.value, closed.method.to_string())
            };
            let allowed = t.modulus_set().contains_integer(*c);
            match cfg.format {
                Format::Json => to_json(&json!({
                    "value": complex_json(value),
                    "modulus": {"c": c, "surd": t.u * t.v},
                    "allowed": allowed,
                    "method": method,
                    "tuple": t,
                    "chi": chi.exponents(),
                    "m": m,
                    "n": n,
                })),
                Format::Csv => csv_string(
                    &["N", "p", "q", "u", "v", "c", "surd", "m", "n", "value_re", "value_im", "method"],
                    vec![vec![
                        t.level().to_string(),
                        t.p.to_string(),
                        t.q.to_string(),
                        t.u.to_string(),
                        t.v.to_string(),
                        c.to_string(),
                        (t.u * t.v).to_string(),
                        m.to_string(),
                        n.to_string(),
                        tidy(value.re).to_string(),
                        tidy(value.im).to_string(),
                        method,
                    ]],
                ),
            }
        }
        KloostermanCmd::Table { level, c_max, m, n, chi } => {
            check_level(*level)?;
            let chi = character(*level, chi)?;
            let mut rows = Vec::new();
            for t in al_tuples(*level) {
                let config = ALPairConfig::new(t, chi.clone())?;
                for c in t.modulus_set().members(*c_max) {
                    let closed = theorem_al_pair(&config, *m, *n, c)?.value;
                    let oracle = kloosterman_oracle_al(&t, *m, *n, c, &chi)?;
                    rows.push((t, c, closed, oracle));
                }
            }
            match cfg.format {
                Format::Json => to_json(&json!({
                    "level": level,
                    "chi": chi.exponents(),
                    "m": m,
                    "n": n,
                    "rows": rows.iter().map(|(t, c, a, b)| json!({
                        "tuple": t, "c": c, "surd": t.u * t.v,
                        "closed": complex_json(*a), "oracle": complex_json(*b),
                    })).collect::<Vec<_>>(),
                })),
                Format::Csv => csv_string(
                    &["N", "p", "q", "u", "v", "c", "surd", "m", "n", "closed_re", "closed_im", "oracle_re", "oracle_im"],
                    rows.iter()
                        .map(|(t, c, a, b)| {
                            vec![
                                level.to_string(),
                                t.p.to_string(),
                                t.q.to_string(),
                                t.u.to_string(),
                                t.v.to_string(),
                                c.to_string(),
                                (t.u * t.v).to_string(),
                                m.to_string(),
                                n.to_string(),
                                tidy(a.re).to_string(),
                                tidy(a.im).to_string(),
                                tidy(b.re).to_string(),
                                tidy(b.im).to_string(),
                            ]
                        })
                        .collect(),
                ),
            }
        }
        KloostermanCmd::Verify(_) => unreachable!("handled by execute"),
    }
}

fn fmt_u(u: ComplexValue) -> String {
    if u.im == 0.0 {
        format!("{}", u.re)
    } else {
        format!("{}{:+}i", u.re, u.im)
    }
}

fn eisenstein_row(cfg: &EisensteinConfig, n: i64, c: &EisensteinCoefficient) -> Vec<String> {
    vec![
        cfg.level.to_string(),
        cfg.r.to_string(),
        cfg.w.to_string(),
        n.to_string(),
        fmt_u(cfg.u),
        tidy(c.value.re).to_string(),
        tidy(c.value.im).to_string(),
        format!("{:e}", c.truncation_bound),
    ]
}

fn eisenstein_cmd(cmd: &EisensteinCmd, cfg: &RunConfig) -> Result<String, CliError> {
    match cmd {
        EisensteinCmd::Phi { level, r, w, n, u_re, u_im, direct, x, corrected, w_prime } => {
            check_level(*level)?;
            let config = EisensteinConfig::new(*level, *r, *w, ComplexValue::new(*u_re, *u_im))?;
            let coef = if *direct {
                phi_direct(&config, *n, *x)?
            } else if *corrected {
                phi_closed_corrected(&config, *n)?
            } else {
                let reading = if *w_prime { Reading::WPrime } else { Reading::V };
                phi_closed_reading(&config, *n, reading, DEFAULT_L_EPS)?
            };
            match cfg.format {
                Format::Json => to_json(&json!({
                    "value": complex_json(coef.value),
                    "bound": coef.truncation_bound,
                    "method": coef.method,
                    "N": level, "r": r, "w": w, "n": n,
                    "u": [u_re, u_im],
                })),
                Format::Csv => csv_string(&EISENSTEIN_CSV_COLUMNS, vec![eisenstein_row(&config, *n, &coef)]),
            }
        }
        EisensteinCmd::Table { n_max, n_abs_max, u, direct, x } => {
            if *n_max == 0 || *n_abs_max <= 0 || u.is_empty() {
                return Err(CliError::Usage("n-max, n-abs-max and u must be positive/non-empty".into()));
            }
            let us: Vec<ComplexValue> = u.iter().map(|&v| ComplexValue::new(v, 0.0)).collect();
            let ns: Vec<i64> = (1..=*n_abs_max).flat_map(|k| [k, -k]).collect();
            let mut cells = Vec::new();
            for level in 1..=*n_max {
                for (r, _) in crate::cusps::atkin_lehner_splits(level) {
                    for c in representatives(level) {
                        cells.push(EisensteinConfig::new(level, r, c.den, us[0])?);
                    }
                }
            }
            let powers = direct.then(|| PowerTable::new(&us, *x));
            let sieve = direct.then(|| crate::arith::Sieve::new(*x as usize));
            let results = crate::par::map(cfg.jobs, &cells, |base| -> Result<Vec<Vec<String>>, Error> {
                let mut rows = Vec::new();
                let batch = match (&powers, &sieve) {
                    (Some(p), Some(s)) => Some(phi_direct_batch(base, &ns, p, s)?),
                    _ => None,
                };
                for (j, &uu) in us.iter().enumerate() {
                    let config = base.with_u(uu)?;
                    for (i, &n) in ns.iter().enumerate() {
                        let coef = match &batch {
                            Some(b) => b[j][i],
                            None => {
                                if n_support(&config, n)?.is_none() {
                                    continue;
                                }
                                phi_closed_reading(&config, n, Reading::V, DEFAULT_L_EPS)?
                            }
                        };
                        rows.push(eisenstein_row(&config, n, &coef));
                    }
                }
                Ok(rows)
            });
            let mut rows = Vec::new();
            for r in results {
                rows.extend(r?);
            }
            match cfg.format {
                Format::Csv => csv_string(&EISENSTEIN_CSV_COLUMNS, rows),
                Format::Json => to_json(
                    &rows
                        .iter()
                        .map(|r| {
                            EISENSTEIN_CSV_COLUMNS.iter().zip(r).map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect::<serde_json::Map<_, _>>()
                        })
                        .collect::<Vec<_>>(),
                ),
            }
        }
        EisensteinCmd::Verify(_) => unreachable!("handled by execute"),
    }
}

fn grid_options(cfg: &RunConfig) -> GridOptions {
    let mut opts = GridOptions { jobs: cfg.jobs, ..GridOptions::default() };
    if let Some(t) = cfg.tol {
        opts.tol = Tolerances::uniform(t);
    }
    if let Some(c) = cfg.c_max {
        opts.c_max = c;
        opts.lift_c_max = opts.lift_c_max.min(c);
    }
    if let Some(x) = cfg.x {
        opts.eisenstein_x = x;
    }
    match cfg.n_max {
        Some(n) => opts.capped(n),
        None => opts,
    }
}

fn verify_cmd(command: &str, criteria: &[u8], cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let opts = grid_options(cfg);
    let reports: Vec<CriterionReport> = criteria.iter().filter_map(|&k| run_criterion(k, &opts)).collect();
    let passed = reports.iter().all(CriterionReport::passed);
    let code = if passed { EXIT_OK } else { EXIT_CHECK_FAILED };
    let text = match cfg.format {
        Format::Json => {
            let failures: Vec<Value> = reports
                .iter()
                .flat_map(|r| r.failures.iter().map(move |f| json!({"criterion": r.criterion, "invariant": f.invariant, "identity": f.identity, "detail": f.detail})))
                .collect();
            to_json(&json!({
                "meta": {
                    "tool": "kal",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": command,
                    "parallel_build": crate::par::parallel_enabled(),
                    "options": opts,
                },
                "passed": passed,
                "reports": reports,
                "failures": failures,
            }))?
        }
        Format::Csv => csv_string(
            &["criterion", "status", "checks", "failures", "max_deviation", "tolerance", "title"],
            reports
                .iter()
                .map(|r| {
                    vec![
                        r.criterion.to_string(),
                        if r.passed() { "PASS" } else { "FAIL" }.to_string(),
                        r.checks.to_string(),
                        r.failure_count.to_string(),
                        format!("{:e}", r.max_deviation),
                        r.tolerance.clone(),
                        r.title.clone(),
                    ]
                })
                .collect(),
        )?,
    };
    Ok((code, text))
}
