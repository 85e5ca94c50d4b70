//! Command-line front end: JSON files in, one JSON document on stdout.
//!
//! Exit codes: 0 on success, 1 for invalid input or domain errors (with an
//! `{"error": …}` document on stdout and a message on stderr), 2 when an
//! internal guard trips, such as an exhausted counterexample search or a
//! failing self-test.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::dependence::{self, GapCopulaSpec};
use crate::distortion::{Builtin, DistortionFn};
use crate::error::{Error, Result};
use crate::indexsets::{v_map, ClosedSet, MonoFn};
use crate::spectral::Spectrum;
use crate::{fixtures, oracle, randvar::Plrv};

/// Environment variable holding the default seed.
pub const SEED_VAR: &str = "RISKM_SEED";

#[derive(Debug, Parser)]
#[command(name = "distrisk", version, about = "Exact distortion riskmetrics and partial comonotonicity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the Choquet integral I_h(X).
    Eval {
        #[arg(long)]
        distortion: PathBuf,
        #[arg(long)]
        rv: PathBuf,
        /// Also run the numerical reference integral.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1_000_000)]
        grid: usize,
    },
    /// Left or right quantile at level p.
    Quantile {
        #[arg(long)]
        rv: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "left")]
        side: SideArg,
    },
    /// Decide K-concentration of a vector and emit tail certificates.
    Conc {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        oracle: bool,
        #[arg(required = true)]
        rvs: Vec<PathBuf>,
    },
    /// Decide K-additivity of I_h.
    Kadd {
        #[arg(long)]
        distortion: PathBuf,
        #[arg(long)]
        set: PathBuf,
    },
    /// Minimal index set and accumulation flags for K-additivity of I_h.
    Core {
        #[arg(long)]
        distortion: PathBuf,
    },
    /// ES-mixture decomposition of a step spectrum (null if not a step spectrum).
    Decompose {
        #[arg(long)]
        spectrum: PathBuf,
    },
    /// Reference variable Z of a K-concentrated vector.
    Witness {
        #[arg(long)]
        set: PathBuf,
        #[arg(required = true)]
        rvs: Vec<PathBuf>,
    },
    /// Generate a K-concentrated vector from gap copulas.
    Gen {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Marginal quantile functions, one per component.
        #[arg(long = "marginal")]
        marginals: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// K-concentrated pair on which I_h is not additive.
    Counterexample {
        #[arg(long)]
        distortion: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check the worked-example fixtures.
    Selftest,
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<Plrv>> {
    paths.iter().map(|p| read(p)).collect()
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<String> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path.display().to_string())
}

fn seed_or_env(seed: Option<u64>) -> u64 {
    seed.or_else(|| std::env::var(SEED_VAR).ok().and_then(|s| s.parse().ok())).unwrap_or(0)
}

/// Outcome of a command that ran to completion but failed a guard.
struct Guard(Value);

fn execute(cmd: Command, err: &mut dyn Write) -> Result<std::result::Result<Value, Guard>> {
    let out = match cmd {
        Command::Eval { distortion, rv, oracle: with_oracle, grid } => {
            let h: DistortionFn = read(&distortion)?;
            let x: Plrv = read(&rv)?;
            let value = h.choquet(&x);
            if with_oracle {
                let numeric = oracle::choquet_numeric(&h, &x, grid);
                let agree = (numeric - value).abs() <= 1e-4;
                json!({ "value": value, "oracle": numeric, "agree": agree })
            } else {
                json!({ "value": value })
            }
        }
        Command::Quantile { rv, p, side } => {
            let x: Plrv = read(&rv)?;
            let value = match side {
                SideArg::Left => x.quantile_left(p)?,
                SideArg::Right => x.quantile_right(p)?,
            };
            json!({ "value": value })
        }
        Command::Conc { set, oracle: with_oracle, rvs } => {
            let k: ClosedSet = read(&set)?;
            let xs = read_all(&rvs)?;
            let verdict = dependence::is_k_concentrated(&xs, &k);
            let mut v = serde_json::to_value(&verdict)?;
            if with_oracle {
                v["grid"] = json!(oracle::concentration_grid(&xs, &k, 64));
            }
            v
        }
        Command::Kadd { distortion, set } => {
            let h: DistortionFn = read(&distortion)?;
            let k: ClosedSet = read(&set)?;
            json!({ "additive": h.is_k_additive(&k) })
        }
        Command::Core { distortion } => {
            let h: DistortionFn = read(&distortion)?;
            let (core, flags) = h.additivity_core();
            json!({ "core": core, "flags": flags })
        }
        Command::Decompose { spectrum } => {
            let g: Spectrum = read(&spectrum)?;
            serde_json::to_value(g.es_mixture())?
        }
        Command::Witness { set, rvs } => {
            let k: ClosedSet = read(&set)?;
            let xs = read_all(&rvs)?;
            serde_json::to_value(dependence::witness_z(&xs, &k)?)?
        }
        Command::Gen { set, spec, seed, dim, marginals, out_dir } => {
            let k: ClosedSet = read(&set)?;
            let spec: GapCopulaSpec = read(&spec)?;
            let qs: Vec<MonoFn> = marginals.iter().map(|p| read(p)).collect::<Result<_>>()?;
            let xs = dependence::generate(&k, &spec, &qs, dim, seed_or_env(seed))?;
            let files = xs
                .iter()
                .enumerate()
                .map(|(i, x)| write_json(&out_dir, &format!("x{i}.json"), x))
                .collect::<Result<Vec<_>>>()?;
            json!({ "files": files })
        }
        Command::Counterexample { distortion, set, seed, out_dir } => {
            let h: DistortionFn = read(&distortion)?;
            let k: ClosedSet = read(&set)?;
            match dependence::counterexample(&h, &k, seed_or_env(seed)) {
                Ok(Some((x, y))) => {
                    let gap = h.choquet(&x.add(&y)) - h.choquet(&x) - h.choquet(&y);
                    let files = vec![write_json(&out_dir, "x.json", &x)?, write_json(&out_dir, "y.json", &y)?];
                    json!({ "found": true, "gap": gap, "files": files })
                }
                Ok(None) => json!({ "found": false }),
                Err(Error::SearchExhausted(msg)) => {
                    let _ = writeln!(err, "counterexample search exhausted: {msg}");
                    return Ok(Err(Guard(json!({ "error": msg }))));
                }
                Err(e) => return Err(e),
            }
        }
        Command::Selftest => {
            let checks = selftest_checks();
            let failed = checks.iter().filter(|c| !c.1).count();
            for (name, ok) in &checks {
                let _ = writeln!(err, "{} {name}", if *ok { "PASS" } else { "FAIL" });
            }
            let list: Vec<Value> = checks.iter().map(|(n, ok)| json!({ "name": n, "ok": ok })).collect();
            let v = json!({ "passed": checks.len() - failed, "failed": failed, "checks": list });
            if failed > 0 {
                return Ok(Err(Guard(v)));
            }
            v
        }
    };
    Ok(Ok(out))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

/// Fixture checks run by `selftest`.
pub fn selftest_checks() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let mut check = |name: &str, ok: bool| out.push((name.to_string(), ok));

    let h = fixtures::example_distortion();
    let x = fixtures::paper_x();
    let xy = x.add(&fixtures::paper_y());
    check("weight example: rho(X) = 2.375", close(h.choquet(&x), 2.375));
    check("weight example: rho(X+Y) = 4.125", close(h.choquet(&xy), 4.125));

    let xf = fixtures::x_fix();
    let s1 = fixtures::x1_fix().add(&xf);
    let s2 = fixtures::x2_fix().add(&xf);
    let s3 = fixtures::x3_fix().add(&xf);
    let es = |s: &Plrv, p: f64| s.es(p).unwrap_or(f64::NAN);
    let half = fixtures::half_half_spectrum();
    check("ES_0.9(X1+X) = 5", close(es(&s1, 0.9), 5.0));
    check("ES_0.95(X1+X) = 6", close(es(&s1, 0.95), 6.0));
    check("rho(X1+X) = 5.5", close(half.rho(&s1), 5.5));
    check("ES_0.9(X2+X) = 5", close(es(&s2, 0.9), 5.0));
    check("ES_0.95(X2+X) = 5.25", close(es(&s2, 0.95), 5.25));
    check("ES_0.9(X3+X) = 4.625", close(es(&s3, 0.9), 4.625));
    check("ES_0.95(X3+X) = 6", close(es(&s3, 0.95), 6.0));
    check("2 rho(X) = 5.5", close(2.0 * half.rho(&xf), 5.5));

    let build = |b: Builtin| b.build().expect("valid builtin");
    let mmd = build(Builtin::MeanMedianDev);
    check("mean-median deviation is {0.5}-additive", mmd.is_k_additive(&ClosedSet::point(0.5).expect("point")));
    let var = build(Builtin::Var { p: 0.9 });
    check("VaR_0.9 is not {0.9}-additive", !var.is_k_additive(&ClosedSet::point(0.9).expect("point")));
    let m = half.es_mixture();
    let mixture_ok = m.is_some_and(|m| {
        m.lambda0 == 0.0
            && m.terms.len() == 2
            && close(m.terms[0].alpha, 0.9)
            && close(m.terms[0].lambda, 0.5)
            && close(m.terms[1].alpha, 0.95)
            && close(m.terms[1].lambda, 0.5)
    });
    check("half-half spectrum decomposes into ES_0.9 / ES_0.95", mixture_ok);
    let k = fixtures::k_fix();
    check(
        "(X, X1) is {0.9, 0.95}-concentrated",
        dependence::is_k_concentrated(&[xf.clone(), fixtures::x1_fix()], &k).concentrated
            && dependence::is_g_comonotonic(&[xf, fixtures::x1_fix()], &v_map(&k)),
    );
    out
}

/// Run the command line `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            let _ = writeln!(out, "{}", json!({ "error": e.kind().to_string() }));
            return 1;
        }
    };
    match execute(cli.command, err) {
        Ok(Ok(v)) => {
            let _ = writeln!(out, "{v}");
            0
        }
        Ok(Err(Guard(v))) => {
            let _ = writeln!(out, "{v}");
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let _ = writeln!(out, "{}", json!({ "error": e.to_string() }));
            match e {
                Error::SearchExhausted(_) => 2,
                _ => 1,
            }
        }
    }
}
