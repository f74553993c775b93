use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use cycle_walk::density::{
    parametric_curves, uniform_initial_curves, DensityCurve, Ensemble, LimitLaw, DEFAULT_GRID,
};
use cycle_walk::evolution::{
    position_distribution, required_radius, run_with, scattering_rates, PositionDistribution,
};
use cycle_walk::homology::{homological_projection, LOCALIZATION_TOLERANCE};
use cycle_walk::output::{fmt_f64, write_distributions, write_quantities, write_table};
use cycle_walk::presets::{InitialState, Preset};
use cycle_walk::spectral::{band_lambda, velocity, velocity_derivative, walk_eigenvalue, Branch};
use cycle_walk::state_file::load_state;
use cycle_walk::verify::{verify, VerifyConfig};
use cycle_walk::{ArcSpace, Error, GraphKind};

/// Grover walks on the 4-cycle with tails and on the periodic chain of
/// 4-cycles.
#[derive(Parser, Debug)]
#[command(name = "cycle-walk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the walk and record the position distribution.
    Simulate(SimulateArgs),
    /// Reflection, trapping and transmission rates on the tailed cycle.
    Rates(RatesArgs),
    /// Trapped mass and its cycle-eigenvector overlaps.
    Localize(LocalizeArgs),
    /// Band eigenvalues and group velocities of the periodic chain.
    Spectrum(SpectrumArgs),
    /// Limit density curves and distribution function of X_t / t.
    Density(DensityArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Preset name (case-i, case-ii, fig3a, fig3b, uniform) or state file.
    #[arg(long)]
    initial: String,
    #[arg(long, short = 't', default_value_t = 100)]
    t_max: usize,
    /// Record every n-th step (the last step is always recorded).
    #[arg(long, default_value_t = 1)]
    every: usize,
    /// Window radius; defaults to one large enough for t_max steps.
    #[arg(long)]
    radius: Option<usize>,
    /// CSV `t,j,prob`; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON; stdout (stderr when the CSV goes to stdout) if omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long)]
    initial: String,
    #[arg(long, short = 't', default_value_t = 200)]
    t_max: usize,
    /// CSV `quantity,value`; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LocalizeArgs {
    #[arg(long)]
    initial: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// CSV `k,j,lambda,nu_re,nu_im,x,dxdk`; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// Preset name or state file on the periodic chain.
    #[arg(long, default_value = "uniform")]
    initial: String,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// CSV `branch,k,x,rho` of the sampled curves.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Points at which to evaluate the limit distribution function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    cdf_at: Vec<f64>,
    /// Clip ρ at its 99.9th percentile in the CSV (a note is written next
    /// to it); the density diverges at the support edges.
    #[arg(long)]
    clip: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Criterion keys to run (comma separated); all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Report JSON; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock times in the report (makes it non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Walk(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("verification failed")]
    Failed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed => 1,
            CliError::Walk(
                Error::WindowOverflow { .. }
                | Error::DegeneratePoint { .. }
                | Error::GridTooCoarse { .. },
            ) => 3,
            _ => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> CliResult {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// A preset or a loaded state file, as a weighted ensemble.
struct Initial {
    name: String,
    members: Vec<(f64, InitialState)>,
    declared_radius: usize,
    normalization: f64,
}

impl Initial {
    fn resolve(spec: &str) -> CliResult<Self> {
        if let Ok(p) = spec.parse::<Preset>() {
            return Ok(Initial {
                name: p.name().into(),
                members: p.ensemble(),
                declared_radius: 0,
                normalization: 1.0,
            });
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "{spec:?} is neither a preset nor an existing state file"
            )));
        }
        let loaded = load_state(path)?;
        Ok(Initial {
            name: spec.into(),
            members: vec![(1.0, loaded.state)],
            declared_radius: loaded.radius,
            normalization: loaded.normalization,
        })
    }

    fn kind(&self) -> GraphKind {
        self.members[0].1.kind()
    }

    fn single(&self) -> CliResult<&InitialState> {
        match self.members.as_slice() {
            [(_, s)] => Ok(s),
            _ => Err(CliError::Usage(format!(
                "{} is an ensemble; this command needs a single state",
                self.name
            ))),
        }
    }

    fn ensemble(&self) -> CliResult<Ensemble> {
        if self.kind() != GraphKind::C4Prime {
            return Err(CliError::Usage(
                "the limit law is defined on the periodic chain (c4-prime)".into(),
            ));
        }
        let members = self
            .members
            .iter()
            .map(|(p, s)| Ok((*p, s.cell_state()?)))
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(Ensemble::new(members)?)
    }
}

struct Trajectory {
    recorded: Vec<PositionDistribution>,
    norm_drift: f64,
    max_abs_position: i64,
}

fn simulate_member(
    state: &InitialState,
    space: &ArcSpace,
    t_max: usize,
    every: usize,
) -> Result<Trajectory, Error> {
    let mut traj = Trajectory {
        recorded: Vec::new(),
        norm_drift: 0.0,
        max_abs_position: 0,
    };
    run_with(&state.embed(space)?, t_max, |psi| {
        let d = position_distribution(psi);
        traj.norm_drift = traj.norm_drift.max((psi.norm_sqr() - 1.0).abs());
        traj.max_abs_position = traj.max_abs_position.max(d.max_abs_position(1e-14));
        if psi.time() % every == 0 || psi.time() == t_max {
            traj.recorded.push(d);
        }
    })?;
    Ok(traj)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    if a.every == 0 {
        return Err(CliError::Usage("--every must be positive".into()));
    }
    let init = Initial::resolve(&a.initial)?;
    let support = init
        .members
        .iter()
        .map(|(_, s)| s.support_radius())
        .max()
        .unwrap_or(0);
    let radius = a
        .radius
        .unwrap_or_else(|| required_radius(a.t_max, support).max(init.declared_radius));
    let space = ArcSpace::build(init.kind(), radius)?;
    let runs = init
        .members
        .par_iter()
        .map(|(p, s)| simulate_member(s, &space, a.t_max, a.every).map(|t| (*p, t)))
        .collect::<Result<Vec<_>, Error>>()?;
    let steps = runs[0].1.recorded.len();
    let mixed: Vec<PositionDistribution> = (0..steps)
        .map(|i| {
            PositionDistribution::mixture(runs.iter().map(|(p, t)| (*p, &t.recorded[i])))
                .expect("non-empty ensemble")
        })
        .collect();

    let mut out = output(a.out.as_deref())?;
    write_distributions(&mut out, &mixed)?;
    out.flush()?;
    drop(out);

    let last = mixed.last().expect("t = 0 is always recorded");
    let summary = json!({
        "initial": init.name,
        "graph": init.kind().name(),
        "window_radius": radius,
        "t_max": a.t_max,
        "ensemble_size": init.members.len(),
        "normalization": init.normalization,
        "norm_drift": runs.iter().map(|(_, t)| t.norm_drift).fold(0.0, f64::max),
        "max_abs_position": runs.iter().map(|(_, t)| t.max_abs_position).max(),
        "final": {
            "t": last.time(),
            "mass_at_origin": last.get(0),
            "mass_below": last.mass_below(0),
            "mass_above": last.mass_above(0),
            "total": last.total(),
        },
    });
    match (&a.summary, &a.out) {
        (Some(p), _) => write_json(Some(p), &summary),
        (None, Some(_)) => write_json(None, &summary),
        (None, None) => {
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&summary).map_err(Error::from)?
            );
            Ok(())
        }
    }
}

fn cmd_rates(a: RatesArgs) -> CliResult {
    let init = Initial::resolve(&a.initial)?;
    let state = init.single()?;
    if state.kind() != GraphKind::TildeC4 {
        return Err(CliError::Usage(
            "rates are defined on the tailed cycle (tilde-c4)".into(),
        ));
    }
    let space = state.window(0)?;
    let r = scattering_rates(&state.embed(&space)?, a.t_max)?;
    let mut out = output(a.out.as_deref())?;
    write_quantities(
        &mut out,
        &[
            ("reflected", r.reflected),
            ("origin", r.origin),
            ("transmitted", r.transmitted),
            ("steps", r.steps as f64),
            ("converged", if r.converged { 1.0 } else { 0.0 }),
        ],
    )?;
    out.flush()?;
    Ok(())
}

fn cmd_localize(a: LocalizeArgs) -> CliResult {
    let init = Initial::resolve(&a.initial)?;
    let mut delta = 0.0;
    let mut overlaps = std::collections::BTreeMap::<(i64, u8), f64>::new();
    for (p, s) in &init.members {
        let space = s.window(0)?;
        let proj = homological_projection(&s.embed(&space)?)?;
        delta += p * proj.delta;
        for o in proj.overlaps {
            *overlaps.entry((o.cell, o.m)).or_default() += p * o.weight;
        }
    }
    let overlaps: Vec<_> = overlaps
        .into_iter()
        .map(|((cell, m), weight)| json!({"m": m, "cell": cell, "weight": weight}))
        .collect();
    write_json(
        a.out.as_deref(),
        &json!({"delta": delta, "overlaps": overlaps, "localized": delta > LOCALIZATION_TOLERANCE}),
    )
}

fn cmd_spectrum(a: SpectrumArgs) -> CliResult {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let rows = (0..a.grid).flat_map(|i| {
        let k = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / a.grid as f64;
        (0..3u8).map(move |j| {
            let b = Branch::new(j, 0);
            let nu = walk_eigenvalue(b, k);
            (
                format!("{},{j}", fmt_f64(k)),
                vec![
                    band_lambda(j, k),
                    nu.re,
                    nu.im,
                    velocity(b, k),
                    velocity_derivative(b, k),
                ],
            )
        })
    });
    let mut out = output(a.out.as_deref())?;
    write_table(&mut out, "k,j,lambda,nu_re,nu_im,x,dxdk", rows)?;
    out.flush()?;
    Ok(())
}

fn write_curves(path: &Path, curves: &[&DensityCurve], clip: bool) -> CliResult {
    let cap = if clip {
        let mut all: Vec<f64> = curves
            .iter()
            .flat_map(|c| c.samples.iter().map(|s| s.rho))
            .collect();
        all.sort_by(f64::total_cmp);
        all.get(((all.len() as f64 * 0.999) as usize).min(all.len().saturating_sub(1)))
            .copied()
    } else {
        None
    };
    let mut clipped = 0usize;
    let rows: Vec<(String, Vec<f64>)> = curves
        .iter()
        .flat_map(|c| c.samples.iter().map(move |s| (c.tag.name(), s)))
        .map(|(name, s)| {
            let rho = match cap {
                Some(m) if s.rho > m => {
                    clipped += 1;
                    m
                }
                _ => s.rho,
            };
            (name, vec![s.k, s.x, rho])
        })
        .collect();
    let mut out = output(Some(path))?;
    write_table(&mut out, "branch,k,x,rho", rows)?;
    out.flush()?;
    if let Some(m) = cap {
        let mut note = path.as_os_str().to_owned();
        note.push(".clip.json");
        write_json(
            Some(Path::new(&note)),
            &json!({
                "note": "rho clipped at its 99.9th percentile; the density diverges at the support edges",
                "percentile": 99.9,
                "clip_value": m,
                "clipped_rows": clipped,
            }),
        )?;
    }
    Ok(())
}

fn cmd_density(a: DensityArgs) -> CliResult {
    let init = Initial::resolve(&a.initial)?;
    let ensemble = init.ensemble()?;
    let law = LimitLaw::new(&ensemble, a.grid)?;
    let curves = parametric_curves(&ensemble, a.grid)?;
    let uniform = if a.initial == Preset::Uniform.name() {
        Some(uniform_initial_curves(a.grid)?)
    } else {
        None
    };
    let mut all: Vec<&DensityCurve> = curves.iter().collect();
    if let Some(u) = &uniform {
        all.extend([&u.nu0, &u.nu1]);
    }
    if let Some(path) = &a.out {
        write_curves(path, &all, a.clip)?;
    }
    let masses: serde_json::Map<_, _> = all
        .iter()
        .map(|c| (c.tag.name(), json!(c.mass())))
        .collect();
    let cdf: Vec<_> = a
        .cdf_at
        .iter()
        .map(|&x| json!({"x": x, "value": law.cdf(x)}))
        .collect();
    write_json(
        None,
        &json!({
            "initial": init.name,
            "grid": a.grid,
            "delta": law.delta(),
            "continuous_mass": law.continuous_mass(),
            "curve_masses": masses,
            "cdf": cdf,
        }),
    )
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let config = VerifyConfig {
        seed: a.seed,
        grid: a.grid,
    };
    let report = verify(&config, &a.only)?;
    for c in &report.criteria {
        eprintln!("{}", c.summary_line());
    }
    write_json(a.out.as_deref(), &report.to_json(a.timings))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

fn configure_threads() -> CliResult {
    if let Ok(v) = std::env::var("CYCLE_WALK_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "CYCLE_WALK_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Localize(a) => cmd_localize(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Density(a) => cmd_density(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Failed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
