mod checks;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use checks::{Check, CheckResult, Context, Status};
use normdist::{load_config, preset, ASymbol, Distribution, FormalProduct, NormSystem, PRESETS};

#[derive(Parser)]
#[command(name = "normdist", version, about = "Universal norm distributions and their group cohomology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the B0 basis of U_z.
    Basis(Target),
    /// Compute H^n(G_z, U_z) (or with Z/M coefficients) in the guaranteed band.
    Cohomology(Target),
    /// Run verification checks; exit 0 if all pass, 1 if any fail.
    Verify {
        #[command(flatten)]
        target: Target,
        /// Comma-separated subset of checks (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<Check>,
        /// Record wall-clock time per check (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// List the preset families.
    Presets {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Target {
    /// Preset name (e.g. cyclotomic:15) or path to a TOML configuration.
    #[arg(long)]
    system: String,
    /// Target product such as "x1^2*x2"; defaults to every prime at its top level.
    #[arg(long)]
    z: Option<String>,
    /// Coefficient modulus M; overrides the configuration.
    #[arg(long)]
    modulus: Option<u64>,
    /// Degrees 0..qmax-1 are computed.
    #[arg(long, default_value_t = 4)]
    qmax: u32,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Failure {
    Config(String),
    Io(String),
}

fn load_system(source: &str) -> Result<NormSystem, Failure> {
    let path = Path::new(source);
    let loaded = if path.is_file() { load_config(path) } else { preset(source) };
    loaded.map_err(|e| Failure::Config(e.to_string()))
}

fn resolve(t: &Target) -> Result<(NormSystem, FormalProduct, Option<u64>), Failure> {
    let sys = load_system(&t.system)?;
    let z = match &t.z {
        Some(text) => sys.parse_product(text).map_err(|e| Failure::Config(e.to_string()))?,
        None => FormalProduct::from_exponents((0..sys.prime_count()).map(|x| sys.tower(x).len() as u32).collect()),
    };
    sys.check_target(&z).map_err(|e| Failure::Config(e.to_string()))?;
    if t.qmax == 0 {
        return Err(Failure::Config("--qmax must be positive".into()));
    }
    let modulus = t.modulus.or(sys.modulus());
    if modulus == Some(0) {
        return Err(Failure::Config("modulus must be positive".into()));
    }
    Ok((sys, z, modulus))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct BasisReport {
    system: String,
    target: String,
    group_order: u64,
    a_size: usize,
    basis: Vec<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    system: String,
    target: String,
    modulus: Option<u64>,
    q_max: u32,
    band: (i64, i64),
    checks: Vec<CheckResult>,
    passed: usize,
    failed: usize,
    skipped: usize,
}

fn run_verify(target: &Target, requested: &[Check], timings: bool) -> Result<bool, Failure> {
    let (sys, z, modulus) = resolve(target)?;
    let mut selected: Vec<Check> = if requested.is_empty() { Check::ALL.to_vec() } else { requested.to_vec() };
    selected.sort();
    selected.dedup();
    let ctx = &Context { sys: &sys, z: &z, modulus, q_max: target.qmax };
    let results: Vec<CheckResult> = std::thread::scope(|s| {
        let handles: Vec<_> = selected.iter().map(|&c| s.spawn(move || checks::run_check(c, ctx, timings))).collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    let count = |st: Status| results.iter().filter(|r| r.status == st).count();
    let report = VerifyReport {
        system: sys.name().to_string(),
        target: sys.display(&z),
        modulus,
        q_max: target.qmax,
        band: (0, target.qmax as i64 - 1),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        checks: results,
    };
    let mut summary = format!(
        "system {}  target {}  modulus {}  band 0..={}\n",
        report.system,
        report.target,
        modulus.map_or("none".to_string(), |m| m.to_string()),
        report.band.1
    );
    for r in &report.checks {
        let _ = write!(summary, "{}  {:<14} {}", r.status.label(), r.name, r.detail);
        if let Some(ms) = r.elapsed_ms {
            let _ = write!(summary, " [{ms} ms]");
        }
        summary.push('\n');
        for d in &r.degrees {
            let m = modulus.filter(|_| r.name == "theorem_a");
            let _ = writeln!(summary, "      H^{}: computed {}  predicted {}", d.degree, group(&d.computed, m), group(&d.predicted, m));
        }
    }
    let _ = writeln!(summary, "{} passed, {} failed, {} skipped", report.passed, report.failed, report.skipped);
    let ok = report.failed == 0;
    match (target.format, &target.out) {
        (Format::Text, out) => emit(&summary, out.as_deref())?,
        (Format::Json, None) => emit(&json(&report), None)?,
        (Format::Json, Some(p)) => {
            emit(&json(&report), Some(p))?;
            print!("{summary}");
        }
    }
    Ok(ok)
}

/// `Z^2 + Z/4`, or `(Z/M)^r + ...` when `free_rank` counts `Z/M` summands.
fn group(g: &normdist::HomologyGroup, modulus: Option<u64>) -> String {
    let mut parts: Vec<String> = Vec::new();
    let base = modulus.map_or("Z".to_string(), |m| format!("(Z/{m})"));
    if g.free_rank > 0 {
        parts.push(if g.free_rank == 1 { base } else { format!("{base}^{}", g.free_rank) });
    }
    parts.extend(g.torsion.iter().map(|d| format!("Z/{d}")));
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// `[(3:1,5:2) 3*5]`: residues of `g` per prime, then the stalk.
fn symbol_label(sys: &NormSystem, a: &ASymbol) -> String {
    let g: Vec<String> = a.g.components.iter().map(|(x, r)| format!("{}:{r}", sys.prime_name(*x))).collect();
    format!("[({}) {}]", g.join(","), sys.display(&a.stalk))
}

fn run_basis(target: &Target) -> Result<(), Failure> {
    let (sys, z, _) = resolve(target)?;
    let dist = Distribution::new(&sys, &z).map_err(|e| Failure::Config(e.to_string()))?;
    let symbols = dist.symbols();
    let report = BasisReport {
        system: sys.name().to_string(),
        target: sys.display(&z),
        group_order: sys.group_order(&z).map_err(|e| Failure::Config(e.to_string()))?,
        a_size: dist.len(),
        basis: dist.b0().iter().map(|&i| symbol_label(&sys, &symbols[i])).collect(),
    };
    let text = match target.format {
        Format::Json => json(&report),
        Format::Text => {
            let mut s = format!(
                "system {}  target {}  |G_z| = {}  |A_z| = {}\n",
                report.system, report.target, report.group_order, report.a_size
            );
            for b in &report.basis {
                let _ = writeln!(s, "{b}");
            }
            s
        }
    };
    emit(&text, target.out.as_deref())
}

fn run_cohomology(target: &Target) -> Result<(), Failure> {
    let (sys, z, modulus) = resolve(target)?;
    let ctx = Context { sys: &sys, z: &z, modulus, q_max: target.qmax };
    let report = checks::cohomology(&ctx).map_err(|e| Failure::Config(e.to_string()))?;
    let text = match target.format {
        Format::Json => json(&report),
        Format::Text => {
            let mut s = format!(
                "H^n(G_z, U_z) over {}  system {}  target {}\n",
                report.coefficients, report.system, report.target
            );
            for d in &report.degrees {
                let shown = group(&d.group(), modulus);
                let _ = writeln!(s, "H^{}: {shown}", d.degree);
                if let Some(l) = &d.lineage {
                    let _ = writeln!(s, "      from {}", l.join(", "));
                }
            }
            s
        }
    };
    emit(&text, target.out.as_deref())
}

fn run_presets(format: Format) {
    match format {
        Format::Json => {
            let list: Vec<_> = PRESETS
                .iter()
                .map(|(name, about)| serde_json::json!({ "name": name, "description": about }))
                .collect();
            print!("{}", json(&list));
        }
        Format::Text => {
            for (name, about) in PRESETS {
                println!("{name:<22} {about}");
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Basis(t) => run_basis(t).map(|_| true),
        Command::Cohomology(t) => run_cohomology(t).map(|_| true),
        Command::Verify { target, checks, timings } => run_verify(target, checks, *timings),
        Command::Presets { format } => {
            run_presets(*format);
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
