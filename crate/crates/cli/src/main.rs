use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use eqdc::baire::run_baire;
use eqdc::config::RunConfig;
use eqdc::discrepancy::{profile, summability_report, UniformityBudget};
use eqdc::geometry::{boundary_dimension_estimate, Shape};
use eqdc::io::{load_run, render_pieces, save_run, PieceMap};
use eqdc::lebesgue::run_lebesgue;
use eqdc::matching::Side;
use eqdc::suites::{run_all, run_suite};
use eqdc::{Error, Result};

#[derive(Parser)]
#[command(name = "eqdc", version, about = "Translation-only equidecomposition on lattice windows")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct RunFlags {
    /// Window side L.
    #[arg(long)]
    window: Option<i64>,
    /// Translation radius M.
    #[arg(long)]
    mcap: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discrepancy profiles and boundary dimension of the shapes.
    Audit {
        #[command(flatten)]
        run: RunFlags,
        /// Largest dyadic scale 2^i of the profile.
        #[arg(long)]
        i_max: Option<u32>,
    },
    /// Multi-scale cube pipeline.
    Square {
        #[command(flatten)]
        run: RunFlags,
        /// Comma-separated cube sides N_0 < N_1 < ...
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<i64>>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Greedy net pipeline.
    Baire {
        #[command(flatten)]
        run: RunFlags,
        /// Comma-separated net radii r_1 ≤ r_2 ≤ ...
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<i64>>,
        /// Comma-separated oracle horizons, one per radius.
        #[arg(long, value_delimiter = ',')]
        horizon: Option<Vec<i64>>,
        /// Torus centres drawn per level.
        #[arg(long)]
        candidates: Option<usize>,
    },
    /// Check a stored run.
    Verify { path: PathBuf },
    /// PPM image of one side of a stored piece map.
    Render {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "a")]
        side: SideArg,
        /// Pixels per cell.
        #[arg(long, default_value_t = 1)]
        scale: usize,
    },
    /// Seeded property suites.
    LemmaTests {
        /// Run one suite only.
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

/// A run of the command reached a verdict other than success.
enum Outcome {
    Ok,
    Failed(String),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Json(_) | Error::Degenerate(_) => 2,
        Error::Invariant(_) | Error::Load(_) => 1,
        Error::Resource(_) | Error::Precision(_) | Error::Io(_) => 3,
    }
}

fn demo_shapes() -> (Shape, Shape) {
    let area: f64 = 0.15;
    (
        Shape::disk(vec![0.5, 0.5], (area / std::f64::consts::PI).sqrt()),
        Shape::square(vec![0.1, 0.2], area.sqrt()),
    )
}

fn load_config(common: &Common, run: &RunFlags) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?
        }
        None => {
            let (a, b) = demo_shapes();
            let mut c: RunConfig = serde_json::from_value(json!({ "shape_a": a })).expect("demo config");
            c.shape_b = Some(b);
            c
        }
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    if let Some(w) = run.window {
        cfg.window = w;
    }
    if let Some(m) = run.mcap {
        cfg.m_cap = m;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: Option<&RunConfig>) -> Result<PathBuf> {
    let dir = common.out.clone().or_else(|| cfg.and_then(|c| c.out.clone())).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Config as stored in containers. Thread count and output directory do not affect results.
fn echo(cfg: &RunConfig) -> Result<serde_json::Value> {
    let mut c = cfg.clone();
    c.threads = None;
    c.out = None;
    Ok(serde_json::to_value(&c)?)
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(v)?)?;
    Ok(())
}

fn cmd_audit(common: &Common, run: &RunFlags, i_max: Option<u32>) -> Result<Outcome> {
    let mut cfg = load_config(common, run)?;
    if let Some(i) = i_max {
        cfg.i_max = Some(i);
    }
    if cfg.shape_b.is_none() {
        cfg.shape_b = Some(cfg.shape_a.clone());
    }
    cfg.validate()?;
    let win = cfg.extract()?;
    let i_max = cfg.i_max.unwrap_or_else(|| (63 - (cfg.window as u64).leading_zeros()).saturating_sub(2).max(2));
    let dir = out_dir(common, Some(&cfg))?;
    let mut shapes = json!({});
    for (name, shape, bits) in [("a", &cfg.shape_a, &win.a_bits), ("b", cfg.shape_b()?, &win.b_bits)] {
        let delta = shape.measure();
        let p = profile(bits, delta, &win.window, i_max)?;
        fs::write(dir.join(format!("audit_{name}.csv")), p.to_csv())?;
        let summability = match UniformityBudget::new(delta, p.max_dev.iter().enumerate().map(|(i, v)| v / (1u64 << i) as f64).collect()) {
            Ok(b) => Some(summability_report(&b, cfg.d as u32, i_max)?),
            Err(_) => None,
        };
        let dim = boundary_dimension_estimate(shape, &[0.1, 0.05, 0.025, 0.0125, 0.00625], 200_000, cfg.seed)?;
        println!(
            "shape {name}: density {delta:.6}, exponent {}, boundary dimension {:.3} ± {:.3}",
            p.fitted_exponent.map_or("n/a".into(), |e| format!("{e:.3}")),
            dim.fitted_dimension,
            dim.std_error
        );
        if let Some(s) = &summability {
            println!("  partial sums Ψ: {:?}", s.psi_partial);
        }
        shapes[name] = json!({ "profile": p, "summability": summability, "boundary_dimension": dim });
    }
    write_json(&dir.join("audit.json"), &json!({ "config": cfg, "shapes": shapes }))?;
    Ok(Outcome::Ok)
}

fn cmd_square(common: &Common, run: &RunFlags, ladder: Option<Vec<i64>>, levels: Option<usize>) -> Result<Outcome> {
    let mut cfg = load_config(common, run)?;
    if let Some(l) = ladder {
        cfg.ladder = Some(l);
    }
    if let Some(l) = levels {
        cfg.levels = Some(l);
    }
    cfg.validate()?;
    let params = cfg.lebesgue_params()?;
    let win = cfg.extract()?;
    let run = run_lebesgue(&win, &params, None)?;
    let dir = out_dir(common, Some(&cfg))?;
    for r in &run.reports {
        println!(
            "level {}: unmatched {:.6}, changed {:.6}, cubes {}, dirty {}",
            r.level, r.unmatched_fraction, r.changed.total, r.cubes, r.dirty_cubes
        );
    }
    let reports = serde_json::to_value(&run.reports)?;
    save_run(&dir.join("square.eqdc"), &win, Some(&run.matching), &echo(&cfg)?, &reports)?;
    write_json(&dir.join("square_reports.json"), &reports)?;
    Ok(match run.aborted {
        Some(why) => Outcome::Failed(why),
        None => Outcome::Ok,
    })
}

fn cmd_baire(
    common: &Common,
    run: &RunFlags,
    radii: Option<Vec<i64>>,
    horizon: Option<Vec<i64>>,
    candidates: Option<usize>,
) -> Result<Outcome> {
    let mut cfg = load_config(common, run)?;
    if let Some(r) = radii {
        cfg.radii = Some(r);
    }
    if let Some(h) = horizon {
        cfg.horizons = Some(h);
    }
    if let Some(c) = candidates {
        cfg.candidates = Some(c);
    }
    cfg.validate()?;
    let params = cfg.baire_params()?;
    let win = cfg.extract()?;
    let run = run_baire(&win, &params, None)?;
    let dir = out_dir(common, Some(&cfg))?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    for r in &run.reports {
        println!(
            "level {} ({:?}-net, r = {}, j = {}): {} net cells, {} added, hall {}",
            r.level,
            r.part,
            r.radius,
            r.horizon,
            r.net_cells,
            r.added,
            r.hall.as_ref().map_or("skipped".into(), |h| h.feasible.to_string())
        );
    }
    let reports = json!({ "levels": run.reports, "warnings": run.warnings, "aborted": run.aborted });
    save_run(&dir.join("baire.eqdc"), &win, Some(&run.matching), &echo(&cfg)?, &reports)?;
    write_json(&dir.join("baire_reports.json"), &reports)?;
    let hall_failed = run.reports.iter().any(|r| r.hall.as_ref().is_some_and(|h| !h.feasible));
    Ok(match (run.aborted, hall_failed) {
        (Some(why), _) => Outcome::Failed(why),
        (None, true) => Outcome::Failed("Hall check failed on the core".into()),
        (None, false) => Outcome::Ok,
    })
}

fn cmd_verify(path: &Path) -> Result<Outcome> {
    let stored = load_run(path)?;
    let win = &stored.window;
    let Some(m) = &stored.matching else {
        println!("{}: container intact, no matching stored", path.display());
        return Ok(Outcome::Ok);
    };
    m.validate(&win.a_bits, &win.b_bits)?;
    let pm = PieceMap::from_matching(m);
    pm.check_translation_identity(&pm.b_side()?)?;
    if let Ok(cfg) = serde_json::from_value::<RunConfig>(stored.config.clone()) {
        if cfg.shape_b.is_some() {
            let fresh = cfg.extract()?;
            if fresh.a_bits != win.a_bits || fresh.b_bits != win.b_bits {
                return Ok(Outcome::Failed("stored grids differ from the configuration's window".into()));
            }
        }
    }
    println!("{}: ok ({} edges, M = {})", path.display(), m.size(), m.m_cap());
    Ok(Outcome::Ok)
}

fn cmd_render(common: &Common, path: &Path, side: SideArg, scale: usize) -> Result<Outcome> {
    let stored = load_run(path)?;
    let m = stored.matching.as_ref().ok_or_else(|| Error::InvalidArgument("stored run has no matching".into()))?;
    let (side, name) = match side {
        SideArg::A => (Side::A, "a"),
        SideArg::B => (Side::B, "b"),
    };
    let img = render_pieces(&PieceMap::from_matching(m), &stored.window.a_bits, &stored.window.b_bits, side, scale)?;
    let dir = out_dir(common, None)?;
    let file = dir.join(format!("pieces_{name}.ppm"));
    fs::write(&file, img)?;
    println!("{}", file.display());
    Ok(Outcome::Ok)
}

fn cmd_lemma_tests(common: &Common, suite: Option<&str>) -> Result<Outcome> {
    let seed = common.seed.unwrap_or(0);
    let results = match suite {
        Some(s) => vec![run_suite(s, seed)?],
        None => run_all(seed)?,
    };
    let mut failed = Vec::new();
    for r in &results {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {} cases, {} violations", r.name, r.cases, r.violations);
        if let Some(v) = &r.first_violation {
            println!("  first violation: {v}");
            failed.push(r.name.clone());
        }
    }
    if let Some(o) = &common.out {
        fs::create_dir_all(o)?;
        write_json(&o.join("lemma_tests.json"), &serde_json::to_value(&results)?)?;
    }
    Ok(if failed.is_empty() { Outcome::Ok } else { Outcome::Failed(format!("suites failed: {}", failed.join(", "))) })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let c = &cli.common;
    let res = match &cli.cmd {
        Cmd::Audit { run, i_max } => cmd_audit(c, run, *i_max),
        Cmd::Square { run, ladder, levels } => cmd_square(c, run, ladder.clone(), *levels),
        Cmd::Baire { run, radii, horizon, candidates } => cmd_baire(c, run, radii.clone(), horizon.clone(), *candidates),
        Cmd::Verify { path } => cmd_verify(path),
        Cmd::Render { path, side, scale } => cmd_render(c, path, *side, *scale),
        Cmd::LemmaTests { suite } => cmd_lemma_tests(c, suite.as_deref()),
    };
    match res {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(why)) => {
            eprintln!("failed: {why}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
