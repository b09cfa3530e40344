use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use g2moduli::config::{Grid, RunConfig, CONFIG_ENV};
use g2moduli::report::{self, BoundaryReport, RunSummary, ScanRecord};
use g2moduli::{portrait, run, verify};
use g2moduli_core::Family;

#[derive(Parser)]
#[command(name = "g2moduli", version, about = "Invariant G2-instantons on the Bryant-Salamon spinor bundle of S^3")]
struct Cli {
    /// TOML run configuration; defaults are built in.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate r, t, A, B and dr/dt.
    Metric {
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one family member from the singular orbit.
    Integrate {
        #[arg(long)]
        family: Family,
        #[arg(long, allow_negative_numbers = true)]
        param: f64,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a grid of family members and write JSON records.
    Scan {
        #[arg(long)]
        family: Family,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisect for the edge of the bounded part of a family.
    Boundary {
        #[arg(long)]
        family: Family,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        bracket: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the phase portrait, streamlines and T' fan.
    Portrait {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the check suite.
    Verify {
        /// Where to write the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
}

enum Status {
    Ok,
    CheckFailed,
}

fn execute(cli: Cli) -> Result<Status> {
    let mut cfg = RunConfig::resolve(cli.config.as_deref()).map_err(usage)?;
    match cli.command {
        Command::Metric { r_min, r_max, samples, out } => {
            let m = &mut cfg.metric;
            m.r_min = r_min.unwrap_or(m.r_min);
            m.r_max = r_max.unwrap_or(m.r_max);
            m.samples = samples.unwrap_or(m.samples);
            cfg.validate().map_err(usage)?;
            let (rows, speeds) = run::metric_table(cfg.metric.r_min, cfg.metric.r_max, cfg.metric.samples, cfg.metric.quad_tol)?;
            let path = out.unwrap_or_else(|| cfg.output.path(&cfg.output.metric));
            report::write_metric_csv(&path, &rows, &speeds)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Integrate { family, param, t0, t_max, tol, out } => {
            let i = &mut cfg.integrator;
            i.t0 = t0.unwrap_or(i.t0);
            i.t_max = t_max.unwrap_or(i.t_max);
            i.tol = tol.unwrap_or(i.tol);
            cfg.validate().map_err(usage)?;
            let traj = run::integrate_member(&cfg, family, param)?;
            let path = out.unwrap_or_else(|| cfg.output.path(&cfg.output.trajectory));
            report::write_trajectory_csv(&path, &traj.samples)?;
            println!("{}", serde_json::to_string_pretty(&RunSummary::from(&traj))?);
            eprintln!("wrote {}", path.display());
        }
        Command::Scan { family, from, to, step, out } => {
            let g = cfg.scan.grid(family);
            let grid = Grid { from: from.unwrap_or(g.from), to: to.unwrap_or(g.to), step: step.unwrap_or(g.step) };
            match family {
                Family::TPrime => cfg.scan.tprime = grid,
                Family::TGamma => cfg.scan.tgamma = grid,
            }
            cfg.validate().map_err(usage)?;
            let recs = run::scan(&cfg, family, &grid)?;
            let rows: Vec<ScanRecord> = recs.iter().map(ScanRecord::from).collect();
            let path = out.unwrap_or_else(|| cfg.output.path(&cfg.output.scan));
            report::write_json(&path, &rows)?;
            for r in &rows {
                println!("{:>8} {}", r.parameter, r.outcome);
            }
            eprintln!("wrote {} records to {}", rows.len(), path.display());
        }
        Command::Boundary { family, bracket, tol, out } => {
            let (lo, hi) = match bracket.as_deref() {
                Some(&[a, b]) => (a, b),
                _ => cfg.boundary.bracket(family),
            };
            let tol = tol.unwrap_or(cfg.boundary.tol);
            if tol.is_nan() || tol <= 0.0 {
                return Err(UsageError("--tol must be positive".into()).into());
            }
            let rep: BoundaryReport = run::boundary(&cfg, family, (lo, hi), tol)?;
            let path = out.unwrap_or_else(|| cfg.output.path(&cfg.output.boundary));
            report::write_json(&path, &rep)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Portrait { out_dir } => {
            if let Some(d) = out_dir {
                cfg.output.dir = d;
            }
            let summary = portrait::write_all(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Verify { out, json } => {
            let rep = verify::run(&cfg, &verify::Model::default());
            if json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                println!("{rep}");
            }
            let path = out.unwrap_or_else(|| cfg.output.path(&cfg.output.verify));
            report::write_json(&path, &rep)?;
            if !rep.passed {
                return Ok(Status::CheckFailed);
            }
        }
    }
    Ok(Status::Ok)
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: anyhow::Error) -> anyhow::Error {
    UsageError(format!("{e:#}")).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
