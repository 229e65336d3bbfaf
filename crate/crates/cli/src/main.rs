// SPDX-License-Identifier: Apache-2.0

//! `rbfid`: RB decay parameters, gate-set circuit fidelities and basis
//! corrections from the command line. All outputs are CSV with a `#` header.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rbfid::channel::SuperOp;
use rbfid::clifford::CliffordGroup;
use rbfid::correct::{axis_angle, gateset_fidelity, incoherence_defect, verify_prop1, AscentConfig};
use rbfid::figures::{self, analyze};
use rbfid::noise::{realize_chain, NoiseModel};
use rbfid::rb::{fit_decay, run_rb, FitConfig, RbConfig};
use rbfid::twirl::{fidelity_curve_exact, fidelity_curve_mc};
use rbfid::Error;

use config::RunConfig;
use output::{f, Output};

#[derive(Parser, Debug)]
#[command(name = "rbfid", version, about = "RB decay parameters vs. gate-set circuit fidelity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Hilbert-space dimension: 2 (one qubit) or 4 (two qubits).
    #[arg(long, global = true, value_parser = clap::builder::PossibleValuesParser::new(["2", "4"]))]
    dim: Option<String>,
    /// Enable two-qubit figure variants.
    #[arg(long, global = true)]
    extended: bool,
    /// Cache file for the Clifford group.
    #[arg(long, global = true)]
    group_cache: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Generate the Clifford group and list its elements.
    GenGroup,
    /// Dominant eigenvalue of the twirling superchannel.
    Spectrum,
    /// Exact (and optionally Monte-Carlo) fidelity curves in bases I and U.
    Curve,
    /// Basis correction and envelope check.
    Correct,
    /// Simulated RB experiment with decay fit.
    Rb,
    /// |δ(m, V)| for V = I, U.
    FigDelta,
    /// F(G̃, V G V†, m) for V = I, U, U² with log-linear fits.
    FigPbloch,
    /// Infidelities in bases I and U across a Z-tilt sweep.
    FigBasis,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::GenGroup => "gen-group",
            Command::Spectrum => "spectrum",
            Command::Curve => "curve",
            Command::Correct => "correct",
            Command::Rb => "rb",
            Command::FigDelta => "fig-delta",
            Command::FigPbloch => "fig-pbloch",
            Command::FigBasis => "fig-basis",
        }
    }

    fn is_figure(self) -> bool {
        matches!(self, Command::FigDelta | Command::FigPbloch | Command::FigBasis)
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Regime(String),
    Other(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Regime(_) | Error::Fit(_) => CliError::Regime(e.to_string()),
            Error::Parameter(_)
            | Error::Dimension(_)
            | Error::Shape(_)
            | Error::NotHermitian { .. }
            | Error::NotUnitary { .. } => CliError::Config(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

struct Run {
    cmd: Command,
    cfg: RunConfig,
    dim: usize,
    seed: u64,
    out: Output,
    group: CliffordGroup,
}

impl Run {
    fn ascent(&self) -> AscentConfig {
        AscentConfig { seed: self.seed, ..Default::default() }
    }

    fn model_or(&self, default: NoiseModel) -> NoiseModel {
        self.cfg.model.clone().unwrap_or(default)
    }
}

fn setup(cli: &Cli) -> Result<Run, CliError> {
    let cfg = match &cli.config {
        Some(p) => config::load(p).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    let dim = match (&cli.dim, cfg.dim) {
        (Some(d), _) => d.parse().expect("validated by clap"),
        (None, Some(d)) => d,
        (None, None) if cli.extended && cli.command.is_figure() => 4,
        _ => 2,
    };
    if dim != 2 && dim != 4 {
        return Err(CliError::Config(format!("dim must be 2 or 4, got {dim}")));
    }
    if dim == 4 && cli.command.is_figure() && !cli.extended {
        return Err(CliError::Config("two-qubit figures need --extended".into()));
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let group = match &cli.group_cache {
        Some(p) => CliffordGroup::standard_cached(dim, p)?,
        None => CliffordGroup::standard(dim)?,
    };
    let out = Output::new(&cli.out, cli.command.name(), seed, dim, cli.config.as_deref())?;
    Ok(Run { cmd: cli.command, cfg, dim, seed, out, group })
}

fn gen_group(run: &Run) -> Result<(), CliError> {
    let names: Vec<&str> = run.group.generators().iter().map(|g| g.label.as_str()).collect();
    let rows = run.group.elements().iter().map(|e| {
        let word: Vec<&str> = e.word.iter().map(|&w| names[w]).collect();
        vec![e.index.to_string(), word.join(" "), run.group.inverse(e.index).to_string()]
    });
    run.out.csv(&format!("group_d{}.csv", run.dim), &[("elements", run.group.len().to_string())], &["index", "word", "inverse"], rows)?;
    println!("{} elements", run.group.len());
    Ok(())
}

fn spectrum(run: &Run) -> Result<(), CliError> {
    let model = run.model_or(figures::z_tilt(0.1));
    let an = analyze(&run.group, &model, &run.ascent())?;
    let s = &an.spectral;
    let id = SuperOp::identity(run.dim);
    let rows = vec![
        vec!["p".into(), f(s.p)],
        vec!["one_minus_p".into(), f(1.0 - s.p)],
        vec!["subdominant".into(), s.subdominant.map(f).unwrap_or_default()],
        vec!["dense_p".into(), s.dense_p.map(f).unwrap_or_default()],
        vec!["infidelity_identity".into(), f(1.0 - gateset_fidelity(&run.group, &an.noisy, &id)?)],
        vec!["infidelity_corrected".into(), f(1.0 - gateset_fidelity(&run.group, &an.noisy, &an.basis)?)],
    ];
    run.out.csv(&format!("spectrum_d{}.csv", run.dim), &model_meta(&model), &["quantity", "value"], rows.into_iter())?;
    println!("p = {}", s.p);
    Ok(())
}

fn model_meta(model: &NoiseModel) -> Vec<(&'static str, String)> {
    vec![("model", format!("{model:?}"))]
}

fn curve(run: &Run) -> Result<(), CliError> {
    let model = run.model_or(figures::z_tilt(0.1));
    let an = analyze(&run.group, &model, &run.ascent())?;
    let depths: Vec<usize> = (0..=run.cfg.curve.max_depth).collect();
    let bases = [("I", SuperOp::identity(run.dim)), ("U", an.basis.clone())];
    let mut rows = Vec::new();
    for (tag, v) in &bases {
        let c = fidelity_curve_exact(&an.twirl, &an.spectral, v, tag, &depths);
        for (i, m) in depths.iter().enumerate() {
            rows.push(vec![m.to_string(), f(c.fidelity[i]), f(c.f_tr[i]), f(c.c), f(c.d[i]), f(c.delta[i]), tag.to_string()]);
        }
    }
    let mut meta = model_meta(&model);
    meta.push(("p", f(an.spectral.p)));
    run.out.csv(&format!("curve_d{}.csv", run.dim), &meta, &["m", "F", "f_tr", "C", "D", "delta", "basis"], rows.into_iter())?;
    if let Some(samples) = run.cfg.curve.samples {
        let mut rows = Vec::new();
        for (tag, v) in &bases {
            let c = fidelity_curve_mc(&run.group, &an.noisy, &an.spectral, v, tag, &depths, samples, run.seed)?;
            for (i, m) in depths.iter().enumerate() {
                rows.push(vec![m.to_string(), f(c.fidelity[i]), f(c.std_err[i]), tag.to_string()]);
            }
        }
        meta.push(("samples", samples.to_string()));
        run.out.csv(&format!("curve_mc_d{}.csv", run.dim), &meta, &["m", "F", "std_err", "basis"], rows.into_iter())?;
    }
    Ok(())
}

fn correct(run: &Run) -> Result<(), CliError> {
    let model = run.model_or(figures::z_tilt(0.1));
    let an = analyze(&run.group, &model, &run.ascent())?;
    let depths: Vec<usize> = (1..=run.cfg.correct.max_depth).collect();
    let rep = verify_prop1(&run.group, &an.noisy, &an.basis, &depths)?;
    let mut meta = model_meta(&model);
    meta.extend([
        ("p", f(rep.p)),
        ("corrected_fidelity", f(rep.corrected_fidelity)),
        ("uncorrected_fidelity", f(rep.uncorrected_fidelity)),
        ("incoherence_defect", f(rep.incoherence)),
        ("uncorrected_incoherence_defect", f(incoherence_defect(&an.twirl.order_m_errors(4).right))),
        ("max_residual", f(rep.max_residual)),
        ("envelope", f(rep.envelope)),
        ("within_envelope", rep.within_envelope.to_string()),
    ]);
    if run.dim == 2 {
        let (axis, angle) = axis_angle(&an.basis.bloch_block());
        meta.push(("rotation_axis", format!("{} {} {}", f(axis[0]), f(axis[1]), f(axis[2]))));
        meta.push(("rotation_angle", f(angle)));
    }
    let rows = depths
        .iter()
        .zip(&rep.residuals)
        .map(|(&m, r)| vec![m.to_string(), f(rep.p.powi(m as i32)), f(*r)]);
    run.out.csv(&format!("correct_d{}.csv", run.dim), &meta, &["m", "p_pow_m", "residual"], rows)?;
    println!("corrected fidelity {} (uncorrected {}), within envelope: {}", rep.corrected_fidelity, rep.uncorrected_fidelity, rep.within_envelope);
    Ok(())
}

fn rb(run: &Run) -> Result<(), CliError> {
    let model = run.model_or(figures::z_tilt(0.1));
    let sec = &run.cfg.rb;
    let noisy = rbfid::noise::build_noisy_gateset(&model, &run.group)?;
    let mut cfg = RbConfig::new(run.dim, sec.depths.clone(), sec.sequences, run.seed)?;
    if !sec.prep_noise.is_empty() {
        cfg.prep_noise = Some(realize_chain(&sec.prep_noise, run.dim)?);
    }
    if !sec.meas_noise.is_empty() {
        cfg.meas_noise = Some(realize_chain(&sec.meas_noise, run.dim)?);
    }
    let table = run_rb(&run.group, &noisy, &cfg)?;
    let fit = fit_decay(&table, &FitConfig { resamples: sec.resamples, seed: run.seed, ..Default::default() })?;
    let meta = model_meta(&model);
    let rows = table
        .rows
        .iter()
        .map(|r| vec![r.depth.to_string(), r.sequence.to_string(), f(r.survival)]);
    run.out.csv(&format!("rb_d{}.csv", run.dim), &meta, &["depth", "sequence", "survival"], rows)?;
    let summary = output::FitSummary::from_fit(&fit);
    run.out.toml(&format!("rb_d{}_fit.toml", run.dim), &meta, &summary)?;
    println!("p = {} [{}, {}]", fit.p, fit.ci[2].0, fit.ci[2].1);
    if let Some(flag) = &fit.flag {
        eprintln!("warning: {flag}");
    }
    Ok(())
}

fn fig_delta(run: &Run) -> Result<(), CliError> {
    let model = run.model_or(figures::z_tilt(0.1));
    let fig = figures::fig_delta(&run.group, &model, run.cfg.figures.delta_depth, &run.ascent())?;
    let mut meta = model_meta(&model);
    meta.push(("p", f(fig.p)));
    let rows = (0..fig.depths.len()).map(|i| {
        vec![fig.depths[i].to_string(), f(fig.delta_i[i]), f(fig.delta_u[i]), f(fig.ref_p), f(fig.ref_f)]
    });
    run.out.csv(
        &format!("fig_delta_d{}.csv", run.dim),
        &meta,
        &["m", "delta_I", "delta_U", "one_minus_p_sq", "one_minus_F_sq"],
        rows,
    )?;
    Ok(())
}

fn fig_pbloch(run: &Run) -> Result<(), CliError> {
    let model = run.model_or(figures::over_rotation());
    let sec = &run.cfg.figures;
    if sec.fit_min >= sec.fit_max {
        return Err(CliError::Config("figures.fit_min must be below figures.fit_max".into()));
    }
    let fig = figures::fig_pbloch(&run.group, &model, sec.pbloch_depth, sec.fit_min..=sec.fit_max, &run.ascent())?;
    let mut meta = model_meta(&model);
    meta.push(("p", f(fig.p)));
    meta.push(("fit_range", format!("{}..={}", fig.fit_range.0, fig.fit_range.1)));
    for fit in &fig.fits {
        meta.push(("fit", format!("{} slope={} log_intercept={} intercept={}", fit.tag, f(fit.slope), f(fit.log_intercept), f(fit.intercept))));
    }
    let n = fig.curves[0].depths.len();
    let rows = (0..n).map(|i| {
        let mut r = vec![fig.curves[0].depths[i].to_string()];
        r.extend(fig.curves.iter().map(|c| f(c.fidelity[i])));
        r
    });
    run.out.csv(&format!("fig_pbloch_d{}.csv", run.dim), &meta, &["m", "F_I", "F_U", "F_U2"], rows)?;
    let rows = fig
        .fits
        .iter()
        .map(|fit| vec![fit.tag.clone(), f(fit.slope), f(fit.log_intercept), f(fit.intercept)]);
    run.out.csv(&format!("fig_pbloch_d{}_fits.csv", run.dim), &meta, &["basis", "slope", "log_intercept", "intercept"], rows)?;
    Ok(())
}

fn fig_basis(run: &Run) -> Result<(), CliError> {
    let sec = &run.cfg.figures;
    if run.cfg.model.is_some() {
        return Err(CliError::Config("fig-basis sweeps its own Z-tilt model; remove [model]".into()));
    }
    let thetas = figures::linspace(sec.theta_min, sec.theta_max, sec.theta_steps);
    let pts = figures::fig_basis(&run.group, &thetas, &run.ascent())?;
    let meta = vec![("model", format!("ZTilt sweep theta_z in [{}, {}], {} steps, ideal CZ", sec.theta_min, sec.theta_max, sec.theta_steps))];
    let rows = pts
        .iter()
        .map(|p| vec![f(p.theta_z), f(p.p), f(p.infidelity_i), f(p.infidelity_u), f(p.rb_infidelity)]);
    run.out.csv(
        &format!("fig_basis_d{}.csv", run.dim),
        &meta,
        &["theta_z", "p", "infidelity_I", "infidelity_U", "rb_infidelity"],
        rows,
    )?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let run = setup(cli)?;
    match run.cmd {
        Command::GenGroup => gen_group(&run),
        Command::Spectrum => spectrum(&run),
        Command::Curve => curve(&run),
        Command::Correct => correct(&run),
        Command::Rb => rb(&run),
        Command::FigDelta => fig_delta(&run),
        Command::FigPbloch => fig_pbloch(&run),
        Command::FigBasis => fig_basis(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Regime(m)) => {
            eprintln!("numerical regime error: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
