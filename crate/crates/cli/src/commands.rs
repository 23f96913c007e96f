//! Subcommands. Each builds a [`Table`], runs its self-checks and only then
//! hands the table to the writer.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use locdisc::bounds::{
    chsh_bound_overlap, chsh_from_ps, critical_visibility, energy_alpha, fidelity_bound_delta, fidelity_bound_ps,
    helstrom, inconclusive_local_ps, ps_from_energy, ps_n,
};
use locdisc::discrimination::region_sweep;
use locdisc::ensembles::{axisymmetric_qubit_family, two_state_family};
use locdisc::seesaw::{seesaw_run, ChshTarget, HalfStep, SeesawConfig};

use crate::error::CliError;
use crate::grid::parse_grid;
use crate::output::{resolve_target, write_atomic, Cell, Format, Table, OUT_DIR_ENV};

/// Largest allowed residual of a composition identity in emitted tables.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "locdisc", version, about = "Bounds and optimizations for local discrimination of bipartite ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CHSH bound against local distinguishability over a δ grid.
    Tradeoff(TradeoffArgs),
    /// Local (Gram hierarchy) and global success bounds over an inconclusive-rate grid.
    Region(RegionArgs),
    /// Maximally entangled fidelity bound over a δ grid.
    Fidelity(BoundArgs),
    /// Global energy and the success bound it implies over a δ grid.
    Energy(BoundArgs),
    /// Critical Werner visibility over a δ grid.
    Visibility(VisibilityArgs),
    /// See-saw CHSH optimization with per-restart traces.
    Seesaw(SeesawArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when neither this nor the output directory is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, hide = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "0:0.05:1")]
    pub delta_grid: String,
    /// Add see-saw columns.
    #[arg(long)]
    pub seesaw: bool,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// See-saw convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.8)]
    pub delta: f64,
    /// Inconclusive-rate grid.
    #[arg(long, default_value = "0:0.05:1")]
    pub po_grid: String,
    /// SDP tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "0:0.05:1")]
    pub delta_grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long, default_value = "0:0.05:1")]
    pub delta_grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SeesawArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Convergence tolerance on the value change per sweep.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn params(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn check(what: &str, residual: f64) -> Result<(), CliError> {
    if residual.is_finite() && residual <= IDENTITY_TOL {
        Ok(())
    } else {
        Err(CliError::Check(format!("{what}: residual {residual:e} exceeds {IDENTITY_TOL:e}")))
    }
}

fn check_n(n: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if (lo..=hi).contains(&n) {
        Ok(())
    } else {
        Err(CliError::Config(format!("--n {n} is outside {lo}..={hi}")))
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Config(format!("--{name} {v} is outside [0, 1]")))
    }
}

/// Qubit-local ensemble for `n` preparations and the see-saw step that matches
/// the setting of its CHSH bound.
fn chsh_target(n: usize, delta: f64) -> Result<(ChshTarget<f64>, HalfStep), CliError> {
    Ok(if n == 2 {
        (ChshTarget::from(&two_state_family(delta)?), HalfStep::Spectral)
    } else {
        (ChshTarget::from(&axisymmetric_qubit_family(n, delta)?), HalfStep::Balanced)
    })
}

pub fn tradeoff(a: &TradeoffArgs) -> Result<Table, CliError> {
    check_n(a.n, 2, 4)?;
    let grid = parse_grid(&a.delta_grid)?;
    if a.seesaw && a.restarts == 0 {
        return Err(CliError::Config("--restarts must be at least 1".into()));
    }
    let mut t = Table::new(
        "tradeoff",
        params(&[
            ("n", a.n.to_string()),
            ("delta_grid", a.delta_grid.clone()),
            ("seesaw", a.seesaw.to_string()),
            ("restarts", a.restarts.to_string()),
            ("tol", a.tol.to_string()),
        ]),
        a.seed,
        &["delta", "ps_n", "chsh_bound", "seesaw_value", "seesaw_gap"],
    );
    for &d in &grid {
        let ps = ps_n(a.n, d)?;
        let bound = chsh_bound_overlap(a.n, d)?;
        check("p_win from beta", (bound.p_win_max - (2.0 + bound.beta / 2.0) / 4.0).abs())?;
        if a.n == 2 {
            check("chsh bound from ps", (bound.p_win_max - chsh_from_ps(ps)?).abs())?;
            check("ps_n against helstrom", (ps - helstrom(d)?).abs())?;
        }
        let (value, gap) = if a.seesaw {
            let (target, half_step) = chsh_target(a.n, d)?;
            let cfg = SeesawConfig {
                restarts: a.restarts,
                convergence_tol: a.tol,
                rng_seed: a.seed,
                half_step,
                ..Default::default()
            };
            let r = seesaw_run(&target, &cfg)?;
            (Some(r.best_value), Some(r.best_value - bound.p_win_max))
        } else {
            (None, None)
        };
        t.push(vec![d.into(), ps.into(), bound.p_win_max.into(), value.into(), gap.into()]);
    }
    Ok(t)
}

pub fn region(a: &RegionArgs) -> Result<Table, CliError> {
    check_n(a.n, 2, 6)?;
    check_unit("delta", a.delta)?;
    let grid = parse_grid(&a.po_grid)?;
    if !(a.tol > 0.0 && a.tol < 1.0) {
        return Err(CliError::Config(format!("--tol {} must lie in (0, 1)", a.tol)));
    }
    let mut t = Table::new(
        "region",
        params(&[
            ("n", a.n.to_string()),
            ("delta", a.delta.to_string()),
            ("po_grid", a.po_grid.clone()),
            ("tol", a.tol.to_string()),
        ]),
        0,
        &[
            "N",
            "delta",
            "p_inc",
            "local_bound",
            "global_bound",
            "solver_status",
            "local_minus_global",
            "inconclusive_local_ps",
            "chsh_from_conditional_ps",
        ],
    );
    t.notes.push((
        "chsh_from_conditional_ps".into(),
        "CHSH bound from local_bound / (1 - p_inc) through the two-state success/CHSH trade-off".into(),
    ));
    let rows = region_sweep(a.n, a.delta, &grid, a.tol)?;
    for r in rows {
        let (reference, overlay) = if a.n == 2 {
            let reference = inconclusive_local_ps(a.delta, r.p_inc)?;
            check(
                "inconclusive reference",
                (reference - (1.0 - r.p_inc) * ps_n(2, a.delta)?).abs(),
            )?;
            let conclusive = 1.0 - r.p_inc;
            let overlay = if conclusive > 0.0 {
                chsh_from_ps((r.local_bound / conclusive).clamp(0.5, 1.0)).ok()
            } else {
                None
            };
            (Some(reference), overlay)
        } else {
            (None, None)
        };
        t.push(vec![
            Cell::Int(r.n as i64),
            r.delta.into(),
            r.p_inc.into(),
            r.local_bound.into(),
            r.global_bound.into(),
            Cell::Text(r.solver_status.to_string()),
            (r.local_bound - r.global_bound).into(),
            reference.into(),
            overlay.into(),
        ]);
    }
    Ok(t)
}

pub fn fidelity(a: &BoundArgs) -> Result<Table, CliError> {
    check_n(a.n, 2, 64)?;
    let grid = parse_grid(&a.delta_grid)?;
    let mut t = Table::new(
        "fidelity",
        params(&[("n", a.n.to_string()), ("delta_grid", a.delta_grid.clone())]),
        0,
        &["delta", "ps_n", "fidelity_bound", "fidelity_from_ps", "residual"],
    );
    for &d in &grid {
        let ps = ps_n(a.n, d)?;
        let f = fidelity_bound_delta(a.n, d)?;
        let via = fidelity_bound_ps(a.n, ps)?;
        let res = (f - via).abs();
        check("fidelity composition", res)?;
        t.push(vec![d.into(), ps.into(), f.into(), via.into(), res.into()]);
    }
    Ok(t)
}

pub fn energy(a: &BoundArgs) -> Result<Table, CliError> {
    check_n(a.n, 2, 64)?;
    let grid = parse_grid(&a.delta_grid)?;
    let mut t = Table::new(
        "energy",
        params(&[("n", a.n.to_string()), ("delta_grid", a.delta_grid.clone())]),
        0,
        &["delta", "alpha", "ps_n", "ps_from_energy", "residual"],
    );
    for &d in &grid {
        let alpha = energy_alpha(a.n, d)?;
        let ps = ps_n(a.n, d)?;
        let via = ps_from_energy(a.n, alpha)?;
        let res = (ps - via).abs();
        check("energy composition", res)?;
        t.push(vec![d.into(), alpha.into(), ps.into(), via.into(), res.into()]);
    }
    Ok(t)
}

pub fn visibility(a: &VisibilityArgs) -> Result<Table, CliError> {
    let grid = parse_grid(&a.delta_grid)?;
    let mut t = Table::new(
        "visibility",
        params(&[("delta_grid", a.delta_grid.clone())]),
        0,
        &["delta", "nu_c", "p_inc_threshold", "residual"],
    );
    for &d in &grid {
        let (nu, thr) = critical_visibility(d)?;
        let res = (thr - d * nu).abs() + (nu * nu + thr * thr - 1.0).abs();
        check("visibility identity", res)?;
        t.push(vec![d.into(), nu.into(), thr.into(), res.into()]);
    }
    Ok(t)
}

pub fn seesaw(a: &SeesawArgs) -> Result<Table, CliError> {
    check_n(a.n, 2, 4)?;
    check_unit("delta", a.delta)?;
    if a.restarts == 0 {
        return Err(CliError::Config("--restarts must be at least 1".into()));
    }
    let (target, half_step) = chsh_target(a.n, a.delta)?;
    let cfg = SeesawConfig {
        restarts: a.restarts,
        max_iterations: a.max_iterations,
        convergence_tol: a.tol,
        rng_seed: a.seed,
        half_step,
    };
    let r = seesaw_run(&target, &cfg)?;
    let bound = chsh_bound_overlap(a.n, a.delta)?.p_win_max;
    let best_restart = r
        .restarts
        .iter()
        .position(|x| x.value == r.best_value)
        .expect("best value comes from a restart");
    let mut t = Table::new(
        "seesaw",
        params(&[
            ("n", a.n.to_string()),
            ("delta", a.delta.to_string()),
            ("restarts", a.restarts.to_string()),
            ("tol", a.tol.to_string()),
            ("max_iterations", a.max_iterations.to_string()),
        ]),
        a.seed,
        &["restart", "iteration", "value", "converged", "best"],
    );
    t.notes.push(("best_value".into(), r.best_value.to_string()));
    t.notes.push(("best_restart".into(), best_restart.to_string()));
    t.notes.push(("chsh_bound".into(), bound.to_string()));
    for (k, rs) in r.restarts.iter().enumerate() {
        for (i, v) in rs.trace.iter().enumerate() {
            t.push(vec![
                Cell::Int(k as i64),
                Cell::Int(i as i64 + 1),
                (*v).into(),
                Cell::Int(rs.converged as i64),
                Cell::Int((k == best_restart) as i64),
            ]);
        }
    }
    Ok(t)
}

/// Runs a parsed command and writes its table.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (table, output, name) = match &cli.command {
        Command::Tradeoff(a) => (tradeoff(a)?, &a.output, "tradeoff"),
        Command::Region(a) => (region(a)?, &a.output, "region"),
        Command::Fidelity(a) => (fidelity(a)?, &a.output, "fidelity"),
        Command::Energy(a) => (energy(a)?, &a.output, "energy"),
        Command::Visibility(a) => (visibility(a)?, &a.output, "visibility"),
        Command::Seesaw(a) => (seesaw(a)?, &a.output, "seesaw"),
    };
    let text = table.render(output.format);
    match resolve_target(output.out.as_deref(), output.out_dir.as_deref(), name, output.format) {
        Some(path) => write_atomic(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
