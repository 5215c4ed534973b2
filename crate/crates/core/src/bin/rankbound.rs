use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use rankbound::bounds::{asymptotic_bound, minimal_q};
use rankbound::interpolation::{binomial, nonvanishing_with_tol};
use rankbound::kronecker::{span_dimension, verify_decomposition};
use rankbound::monodromy::{run_with, trace_test, MonodromyOptions, StopRule, WitnessSet};
use rankbound::numerics::{gaussian_vector, seeded_rng};
use rankbound::persist::{load_witness_with_tol, save_witness, Config};
use rankbound::segre::{generic_border_rank, secant_dimension_with_tol};
use rankbound::tables::{codim_one_table, higher_codim_table};
use rankbound::{Error, Format};

/// Asymptotic rank bounds from numerically sampled secant varieties.
#[derive(Debug, Parser)]
#[command(name = "rankbound", version)]
struct Cli {
    /// TOML file with [tolerances] and [tracker] overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dimension, codimension and fiber dimension of σ_r.
    Dim {
        #[arg(long, value_parser = parse_sides)]
        format: [usize; 3],
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        r: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generic border rank of the format.
    Gbr {
        #[arg(long, value_parser = parse_sides)]
        format: [usize; 3],
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Degree lower bound of σ_r by monodromy, with a resumable witness file.
    Degree {
        #[arg(long, value_parser = parse_sides)]
        format: [usize; 3],
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        r: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_loops: u64,
        #[arg(long, default_value_t = 10)]
        stall: u64,
        #[arg(long)]
        target: Option<usize>,
        /// Witness file written after every loop.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from the checkpoint instead of seeding.
        #[arg(long)]
        resume: bool,
    },
    /// Bound value r·C(dimL+q−1, q)^(1/q).
    Bound {
        #[arg(long)]
        r: u64,
        #[arg(long = "dimL")]
        dim_l: u64,
        #[arg(long)]
        q: u64,
    },
    /// Smallest q whose bound is below the target.
    Minq {
        #[arg(long)]
        r: u64,
        #[arg(long = "dimL")]
        dim_l: u64,
        #[arg(long)]
        target: f64,
    },
    /// Interpolation rank test on a witness file.
    Interp {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        q: u32,
    },
    /// Trace test on a codimension-1 witness file.
    Trace {
        #[arg(long)]
        witness: PathBuf,
    },
    /// Check the symmetric Kronecker-power decomposition and span dimension.
    VerifyKronecker {
        #[arg(long, value_parser = parse_sides)]
        format: [usize; 3],
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        q: u32,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute the published result tables.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        /// Also rerun monodromy on the rows small enough for a desktop.
        #[arg(long)]
        desk_scale: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_sides(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected A,B,C, got {s:?}"));
    }
    let mut sides = [0usize; 3];
    for (slot, p) in sides.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("invalid side {p:?}"))?;
        if *slot == 0 {
            return Err("sides must be positive".into());
        }
    }
    Ok(sides)
}

/// Round to 15 significant digits.
fn significant(v: f64) -> f64 {
    format!("{v:.14e}").parse().unwrap_or(v)
}

fn emit<T: Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn default_checkpoint(format: &Format, seed: u64) -> PathBuf {
    PathBuf::from(format!(
        "sigma{}_{}x{}x{}_seed{seed}.witness.json",
        format.r, format.a, format.b, format.c
    ))
}

fn degree(
    format: Format,
    seed: u64,
    stop: StopRule,
    checkpoint: &Path,
    resume: bool,
    cfg: &Config,
) -> Result<Value, Error> {
    let opts = MonodromyOptions {
        tracker: cfg.tracker,
        tolerances: cfg.tolerances,
    };
    let ws = if resume {
        let ws = load_witness_with_tol(checkpoint, cfg.tolerances.validation)?;
        if ws.profile.format != format {
            return Err(Error::Schema(format!(
                "checkpoint holds {}, requested {format}",
                ws.profile.format
            )));
        }
        ws
    } else {
        let profile = secant_dimension_with_tol(&format, seed, cfg.tolerances.rank_rel)?;
        WitnessSet::seed_with_profile(profile, seed)?
    };
    let ws = run_with(ws, &opts, &stop, |ws| save_witness(ws, checkpoint))?;
    Ok(json!({
        "a": format.a,
        "b": format.b,
        "c": format.c,
        "r": format.r,
        "dim": ws.profile.dim,
        "codim": ws.profile.codim,
        "fiber_dim": ws.profile.fiber_dim,
        "degree_lower_bound": ws.len(),
        "stop_reason": ws.meta.stop_reason,
        "loops_run": ws.meta.loops_run,
        "paths_failed": ws.meta.paths_failed,
        "fiber_collisions": ws.meta.fiber_collisions,
        "witness": checkpoint,
    }))
}

fn execute(cli: Cli) -> Result<(), Error> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let opts = MonodromyOptions {
        tracker: cfg.tracker,
        tolerances: cfg.tolerances,
    };
    match cli.command {
        Command::Dim { format: [a, b, c], r, seed } => {
            let format = Format::new(a, b, c, r as usize)?;
            let p = secant_dimension_with_tol(&format, seed, cfg.tolerances.rank_rel)?;
            emit(&json!({
                "a": format.a, "b": format.b, "c": format.c, "r": format.r,
                "dim": p.dim, "codim": p.codim, "fiber_dim": p.fiber_dim,
            }))
        }
        Command::Gbr { format: [a, b, c], seed } => {
            let format = Format::new(a, b, c, 1)?;
            let gbr = generic_border_rank(a, b, c, seed)?;
            emit(&json!({ "a": format.a, "b": format.b, "c": format.c, "generic_border_rank": gbr }))
        }
        Command::Degree {
            format: [a, b, c],
            r,
            seed,
            max_loops,
            stall,
            target,
            checkpoint,
            resume,
        } => {
            let format = Format::new(a, b, c, r as usize)?;
            let path = checkpoint.unwrap_or_else(|| default_checkpoint(&format, seed));
            let stop = StopRule {
                stall_limit: stall,
                max_loops,
                target_count: target,
            };
            emit(&degree(format, seed, stop, &path, resume, &cfg)?)
        }
        Command::Bound { r, dim_l, q } => {
            let value = asymptotic_bound(r, dim_l, q)?;
            emit(&json!({ "r": r, "dim_l": dim_l, "q": q, "value": significant(value) }))
        }
        Command::Minq { r, dim_l, target } => {
            let q = minimal_q(r, dim_l, target)?;
            let value = asymptotic_bound(r, dim_l, q)?;
            emit(&json!({ "r": r, "dim_l": dim_l, "target": target, "q": q, "value": significant(value) }))
        }
        Command::Interp { witness, q } => {
            let ws = load_witness_with_tol(&witness, cfg.tolerances.validation)?;
            emit(&nonvanishing_with_tol(&ws, q, cfg.tolerances.rank_rel)?)
        }
        Command::Trace { witness } => {
            let ws = load_witness_with_tol(&witness, cfg.tolerances.validation)?;
            emit(&trace_test(&ws, &opts)?)
        }
        Command::VerifyKronecker {
            format: [a, b, c],
            q,
            samples,
            seed,
        } => {
            let n = a * b * c;
            let expected = binomial((n + q as usize - 1) as u64, q as u64);
            let mut rng = seeded_rng(seed, 0);
            let t = gaussian_vector(&mut rng, n);
            let residual = verify_decomposition(&t, q)?;
            let samples = samples.unwrap_or(expected as usize + 5);
            let span = span_dimension(a, b, c, q, samples, &mut rng)?;
            emit(&json!({
                "a": a, "b": b, "c": c, "q": q,
                "residual": residual,
                "relative_residual": residual / t.norm().powi(q as i32),
                "span_dimension": span,
                "expected_span_dimension": expected as u64,
            }))
        }
        Command::Table { which, desk_scale, seed } => {
            let (rows, mismatches) = if which == 1 {
                let rows = codim_one_table(seed, desk_scale, &opts)?;
                let n = rows.iter().map(|r| r.mismatches.len()).sum::<usize>();
                (serde_json::to_value(rows)?, n)
            } else {
                let rows = higher_codim_table(seed)?;
                let n = rows.iter().map(|r| r.mismatches.len()).sum::<usize>();
                (serde_json::to_value(rows)?, n)
            };
            emit(&json!({ "table": which, "rows": rows, "mismatch_count": mismatches }))
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("RANKBOUND_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
