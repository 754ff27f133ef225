//! `skolab`: generate paths, compute metrics and integrals, run experiments and
//! reproduce the pinned examples.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use skolab::metrics::{self, BaseMetric, MetricOptions, Mode};
use skolab::montecarlo::{self, Construction, DiagnosticsReport, ExperimentSpec, ReproduceOutcome};
use skolab::processes::Seed;
use skolab::{integrals, StepPath};

#[derive(Parser)]
#[command(name = "skolab", version, about = "Skorokhod-space step paths, integrals and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one realization of a construction.
    Generate {
        construction: String,
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Construction parameters as a JSON object.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Output file for the path (stdout if absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Output file for the integrand, if the construction has one.
        #[arg(long)]
        h_output: Option<PathBuf>,
    },
    /// Distance between two paths.
    Metric {
        metric: MetricKind,
        a: PathBuf,
        b: PathBuf,
        /// Horizon `T` (defaults to the smaller horizon).
        #[arg(long = "T", alias = "t")]
        t: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Use the refinable upper bound instead of the exact algorithm.
        #[arg(long)]
        upper_bound: bool,
        /// Base metric of the half-line distance.
        #[arg(long, value_enum, default_value_t = Base::Uniform)]
        base: Base,
    },
    /// Simple integral `∫_0^t h(s-) dx(s)`.
    Integrate {
        h: PathBuf,
        x: PathBuf,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Run an experiment spec.
    Experiment {
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        table: bool,
    },
    /// Run a pinned reproduction and check it.
    Reproduce {
        id: String,
        /// Override the scale grid.
        #[arg(long, num_args = 1..)]
        n: Vec<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        table: bool,
    },
    /// Check a path file.
    Validate { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    J1,
    M1,
    Uniform,
    Halfline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Uniform,
    J1,
    M1,
}

fn read_path(p: &Path) -> Result<StepPath> {
    let s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    if p.extension().is_some_and(|e| e == "csv") {
        anyhow::bail!("path files are JSON; CSV needs an explicit horizon");
    }
    Ok(StepPath::from_json(&s)?)
}

fn write(p: &Path, body: &str) -> Result<()> {
    std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn report_table(r: &DiagnosticsReport) -> String {
    let mut out = format!("spec {}\n", r.spec_hash);
    out += &format!(
        "{:>8}  {:<22} {:<34} {:>14} {:>14} {:>10}\n",
        "n", "functional", "param", "median", "mean", "prob"
    );
    for c in &r.cells {
        let p = c
            .summary
            .probability
            .map(|p| format!("{:.3}", p.estimate))
            .unwrap_or_default();
        out += &format!(
            "{:>8}  {:<22} {:<34} {:>14.6e} {:>14.6e} {:>10}\n",
            c.n, c.functional, c.param, c.summary.median, c.summary.mean, p
        );
    }
    for f in &r.flags {
        out += &format!("flag: {f}\n");
    }
    out
}

fn outcome_table(o: &ReproduceOutcome) -> String {
    let mut out = format!("{}  spec {}\n", o.id, o.spec_hash);
    out += &format!("{:<34} {:>8} {:>22}  {:<40} {}\n", "check", "n", "value", "expected", "verdict");
    for c in &o.checks {
        out += &format!(
            "{:<34} {:>8} {:>22}  {:<40} {}\n",
            c.name,
            c.n.map(|n| n.to_string()).unwrap_or_default(),
            c.value,
            c.expected,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    out += &format!("all_pass: {}\n", o.all_pass);
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            construction,
            n,
            seed,
            params,
            output,
            h_output,
        } => {
            let params: serde_json::Value = serde_json::from_str(&params).context("--params must be JSON")?;
            let c = Construction::new(&construction, params);
            let r = montecarlo::realize(&c, n, Seed::new(seed), &[])?;
            match output {
                Some(o) => {
                    write(&o, &r.x.to_json())?;
                    if let Some(h) = &r.h {
                        let hp = h_output.unwrap_or_else(|| {
                            let stem = o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                            o.with_file_name(format!("{stem}_h.json"))
                        });
                        write(&hp, &h.to_json())?;
                    }
                }
                None => {
                    let mut v = json!({"x": serde_json::from_str::<serde_json::Value>(&r.x.to_json())?});
                    if let Some(h) = &r.h {
                        v["h"] = serde_json::from_str(&h.to_json())?;
                    }
                    print_json(&v);
                }
            }
        }
        Command::Metric {
            metric,
            a,
            b,
            t,
            tol,
            upper_bound,
            base,
        } => {
            let (x, y) = (read_path(&a)?, read_path(&b)?);
            let t = t.unwrap_or(x.horizon().min(y.horizon()));
            let opts = MetricOptions {
                tolerance: tol,
                mode: if upper_bound { Mode::UpperBound } else { Mode::Exact },
                base: match base {
                    Base::Uniform => BaseMetric::Uniform,
                    Base::J1 => BaseMetric::J1,
                    Base::M1 => BaseMetric::M1,
                },
                ..MetricOptions::default()
            };
            opts.validate()?;
            let (name, d) = match metric {
                MetricKind::Uniform => ("uniform", metrics::uniform_distance(&x, &y, t)?),
                MetricKind::J1 => ("j1", metrics::j1_distance(&x, &y, t, &opts)?),
                MetricKind::M1 => ("m1", metrics::m1_distance(&x, &y, t, &opts)?),
                MetricKind::Halfline => ("halfline", metrics::halfline_distance(&x, &y, &opts)?),
            };
            print_json(&json!({"metric": name, "t": t, "distance": d}));
        }
        Command::Integrate { h, x, t } => {
            let (h, x) = (read_path(&h)?, read_path(&x)?);
            let t = t.unwrap_or(x.horizon());
            let v = integrals::simple_integral(&h, &x, t)?;
            print_json(&json!({"t": t, "integral": v}));
        }
        Command::Experiment { spec, output, csv, table } => {
            let body = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: ExperimentSpec = serde_json::from_str(&body).context("parsing experiment spec")?;
            let report = montecarlo::run_experiment(&spec)?;
            if let Some(p) = csv {
                write(&p, &report.to_csv()?)?;
            }
            match output {
                Some(p) => write(&p, &report.to_json())?,
                None if table => print!("{}", report_table(&report)),
                None => println!("{}", report.to_json()),
            }
        }
        Command::Reproduce {
            id,
            n,
            seed,
            output,
            csv,
            table,
        } => {
            let grid = if n.is_empty() {
                None
            } else {
                let mut g = n.clone();
                g.sort_unstable();
                g.dedup();
                Some(g)
            };
            let o = montecarlo::reproduce(&id, grid.as_deref(), seed)?;
            if let Some(p) = csv {
                write(&p, &o.report.to_csv()?)?;
            }
            let body = serde_json::to_string_pretty(&o)?;
            if let Some(p) = output {
                write(&p, &body)?;
            }
            if table {
                print!("{}", outcome_table(&o));
            } else {
                println!("{body}");
            }
        }
        Command::Validate { path } => {
            let p = read_path(&path)?;
            print_json(&json!({
                "valid": true,
                "dim": p.dim(),
                "horizon": p.horizon(),
                "segments": p.num_segments(),
            }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<skolab::Error>() {
                Some(d) => eprintln!("error: {} ({})", d, d.kind()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
