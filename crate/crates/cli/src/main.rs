mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use config::{Common, Format, RunConfig};
use fsladder::geometry::{
    edge_segments, length_system, write_geometry_csv, write_geometry_json, IfsParams,
};
use fsladder::harmonic::{
    compute_extension_matrices, level_invariance_report, spectral_report, write_harmonic_csv,
    BoundaryData, ExtensionMatrices, HarmonicFunction,
};
use fsladder::ladder::{
    effective_impedance, filter_condition, frequency_sweep, t_grid, write_sweep_csv, Word,
    ZeffOptions,
};
use fsladder::measure::{measure_table, write_measure_csv, BernoulliMeasure, CellMeasure};
use fsladder::singularity::{
    beta_estimate, lyapunov_exponent, nonconstancy_check, BetaOptions, LyapunovReport,
};
use fsladder::verify::{run_verify, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "fsladder",
    version,
    about = "Power dissipation on the Feynman-Sierpinski ladder"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective impedance of the infinite ladder.
    Zeff,
    /// Effective impedance over a uniform grid in t.
    Sweep {
        #[arg(long, default_value_t = 0.5)]
        t_min: f64,
        #[arg(long, default_value_t = 80.0)]
        t_max: f64,
        #[arg(long, default_value_t = 160)]
        points: usize,
    },
    /// Harmonic extension of boundary data to the given cells.
    Harmonic {
        /// Boundary values, `re` or `re:im` separated by commas.
        #[arg(long, default_value = "1,0,0")]
        u: String,
        #[arg(long, default_value = "e,1,12", value_delimiter = ',')]
        words: Vec<String>,
    },
    /// Dissipation measure of the cells at one level.
    Measure {
        #[arg(long, default_value = "1,0,0")]
        u: String,
    },
    /// Monte Carlo Lyapunov exponent of the random cell products.
    Lyapunov {
        #[arg(long, default_value = "1,0,0")]
        u: String,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Edge segments of the planar embedding.
    Geometry,
    /// Runs the acceptance checks.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let out_of_band = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<fsladder::Error>(),
                    Some(fsladder::Error::NonDissipative { .. })
                )
            });
            ExitCode::from(if out_of_band { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let default_level = match cli.command {
        Command::Geometry => 2,
        _ => 3,
    };
    let cfg = cli.common.resolve(default_level)?;
    match cli.command {
        Command::Zeff => cmd_zeff(&cfg),
        Command::Sweep {
            t_min,
            t_max,
            points,
        } => cmd_sweep(&cfg, t_min, t_max, points),
        Command::Harmonic { u, words } => cmd_harmonic(&cfg, &u, &words),
        Command::Measure { u } => cmd_measure(&cfg, &u),
        Command::Lyapunov { u, steps, samples } => cmd_lyapunov(&cfg, &u, steps, samples),
        Command::Geometry => cmd_geometry(&cfg),
        Command::Verify => cmd_verify(&cfg),
    }
}

fn zeff_options(cfg: &RunConfig) -> ZeffOptions {
    ZeffOptions {
        tol: cfg.tol,
        ..ZeffOptions::default()
    }
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => std::io::stdout().write_all(bytes).context("writing stdout"),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn parse_boundary(s: &str) -> Result<BoundaryData> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        bail!("boundary data needs three values, got {s:?}");
    }
    let mut u = [Complex64::new(0.0, 0.0); 3];
    for (slot, p) in u.iter_mut().zip(parts) {
        let (re, im) = p.split_once(':').unwrap_or((p, "0"));
        *slot = Complex64::new(
            re.trim()
                .parse()
                .with_context(|| format!("bad value {p:?}"))?,
            im.trim()
                .parse()
                .with_context(|| format!("bad value {p:?}"))?,
        );
    }
    Ok(BoundaryData::new(u)?)
}

fn matrices(cfg: &RunConfig) -> Result<ExtensionMatrices> {
    let report = effective_impedance(&cfg.params, &zeff_options(cfg))?;
    Ok(compute_extension_matrices(report.zeff, &cfg.params)?)
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

fn cmd_zeff(cfg: &RunConfig) -> Result<ExitCode> {
    let status = filter_condition(&cfg.params);
    let report = effective_impedance(&cfg.params, &zeff_options(cfg))?;
    eprintln!(
        "t = {:.9}  in band: {}  margin {:.6}",
        status.t, status.in_band, status.margin
    );
    eprintln!("Zeff = {}", fmt_c(report.zeff));
    eprintln!(
        "fixed-point residual {:.3e}  path gap {:.3e}",
        report.residual, report.gap
    );
    eprintln!(
        "epsilon path: {} points down to {:.1e}, limit {}",
        report.path.points.len(),
        report.path.points.last().map_or(f64::NAN, |p| p.epsilon),
        fmt_c(report.path.limit)
    );
    let bytes = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "omega", "t", "in_band", "zeff_re", "zeff_im", "residual", "gap",
            ])?;
            w.write_record([
                report.params.omega.to_string(),
                report.t.to_string(),
                report.in_band.to_string(),
                report.zeff.re.to_string(),
                report.zeff.im.to_string(),
                report.residual.to_string(),
                report.gap.to_string(),
            ])?;
            w.into_inner()?
        }
    };
    emit(cfg, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(cfg: &RunConfig, t_min: f64, t_max: f64, points: usize) -> Result<ExitCode> {
    if t_min > t_max {
        bail!("usage: --t-min {t_min} must not exceed --t-max {t_max}");
    }
    let p = cfg.params;
    let grid = t_grid(t_min, t_max, points, p.inductance, p.capacitance)?;
    let rows = frequency_sweep(&grid, p.inductance, p.capacitance, &zeff_options(cfg))?;
    let dissipative = rows.iter().filter(|r| r.zeff.is_some()).count();
    eprintln!("{} rows, {} dissipative", rows.len(), dissipative);
    let bytes = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut v = Vec::new();
            write_sweep_csv(&rows, &mut v)?;
            v
        }
    };
    emit(cfg, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CellRow {
    word: Word,
    values: [Complex64; 3],
}

#[derive(Serialize)]
struct HarmonicOutput {
    zeff: Complex64,
    matrices: Vec<Vec<Vec<Complex64>>>,
    spectral: fsladder::harmonic::SpectralReport,
    dissipation: f64,
    cells: Vec<CellRow>,
    level_invariance: fsladder::harmonic::LevelInvariance,
}

fn cmd_harmonic(cfg: &RunConfig, u: &str, words: &[String]) -> Result<ExitCode> {
    let m = matrices(cfg)?;
    let h = HarmonicFunction::new(parse_boundary(u)?, &m);
    let words = words
        .iter()
        .map(|w| w.parse())
        .collect::<fsladder::Result<Vec<Word>>>()?;
    let spectral = spectral_report(&m)?;
    let table: Vec<Vec<Vec<Complex64>>> = (1..=3u8)
        .map(|j| {
            let a = m.a(j);
            (0..3)
                .map(|r| (0..3).map(|c| a[(r, c)]).collect())
                .collect()
        })
        .collect();
    for (j, a) in table.iter().enumerate() {
        eprintln!("A_{}:", j + 1);
        for row in a {
            eprintln!(
                "  {}",
                row.iter().map(|z| fmt_c(*z)).collect::<Vec<_>>().join("  ")
            );
        }
        eprintln!(
            "  spectrum: {}",
            spectral.spectra[j]
                .iter()
                .map(|z| fmt_c(*z))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let levels = level_invariance_report(&h, cfg.level, &cfg.eps)?;
    eprintln!("dissipation {:.12}", h.dissipation());
    for row in &levels.rows {
        eprintln!("  n={} renormalized {:.12}", row.n, row.renormalized);
    }
    let bytes = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut v = Vec::new();
            write_harmonic_csv(&h, &words, &mut v)?;
            v
        }
        Format::Json => to_json(&HarmonicOutput {
            zeff: m.zeff(),
            matrices: table,
            spectral,
            dissipation: h.dissipation(),
            cells: words
                .iter()
                .map(|w| CellRow {
                    word: w.clone(),
                    values: h.extend_to_cell(w),
                })
                .collect(),
            level_invariance: levels,
        })?,
    };
    emit(cfg, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MeasureOutput {
    level: usize,
    total: f64,
    nu_sum: f64,
    rows: Vec<fsladder::measure::MeasureRow>,
}

fn cmd_measure(cfg: &RunConfig, u: &str) -> Result<ExitCode> {
    let m = matrices(cfg)?;
    let cm = CellMeasure::new(HarmonicFunction::new(parse_boundary(u)?, &m));
    let rows = measure_table(&cm, &BernoulliMeasure::default(), cfg.level);
    let nu_sum: f64 = rows.iter().map(|r| r.nu).sum();
    eprintln!(
        "level {}: {} cells, nu total {:.12}, P[h] {:.12}",
        cfg.level,
        rows.len(),
        nu_sum,
        cm.total()
    );
    let bytes = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut v = Vec::new();
            write_measure_csv(&rows, &mut v)?;
            v
        }
        Format::Json => to_json(&MeasureOutput {
            level: cfg.level,
            total: cm.total(),
            nu_sum,
            rows,
        })?,
    };
    emit(cfg, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct LyapunovOutput {
    lyapunov: LyapunovReport,
    nonconstancy: Vec<fsladder::singularity::NonConstancy>,
    beta: fsladder::singularity::BetaReport,
}

fn cmd_lyapunov(cfg: &RunConfig, u: &str, steps: usize, samples: usize) -> Result<ExitCode> {
    let m = matrices(cfg)?;
    let b = parse_boundary(u)?;
    if b.is_constant() {
        bail!("constant boundary data has no dissipation");
    }
    let u = b.values();
    let (steps, samples) = if cfg.quick {
        (steps.min(2000), samples.min(20))
    } else {
        (steps, samples)
    };
    let est = lyapunov_exponent(&m, &u, steps, samples, cfg.seed)?;
    let beta_opts = BetaOptions {
        seed: cfg.seed,
        ..BetaOptions::default()
    };
    let out = LyapunovOutput {
        lyapunov: LyapunovReport::new(&m, &est, cfg.seed),
        nonconstancy: (1..=3)
            .map(|level| nonconstancy_check(&m, &u, level))
            .collect::<fsladder::Result<_>>()?,
        beta: beta_estimate(&m, 1, &beta_opts)?,
    };
    eprintln!(
        "mean {:.9} +- {:.2e} vs bound {:.9}: {}",
        est.mean,
        est.std_error,
        est.bound,
        if est.pass { "pass" } else { "fail" }
    );
    eprintln!(
        "beta(m=1) {:.15} ({})",
        out.beta.value,
        if out.beta.pass {
            "below bound"
        } else {
            "not below bound"
        }
    );
    let bytes = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let l = &out.lyapunov;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "omega",
                "L",
                "C",
                "n_steps",
                "n_samples",
                "seed",
                "mean",
                "std_error",
                "bound",
                "pass",
                "beta",
            ])?;
            w.write_record([
                l.omega.to_string(),
                l.inductance.to_string(),
                l.capacitance.to_string(),
                l.n_steps.to_string(),
                l.n_samples.to_string(),
                l.seed.to_string(),
                l.mean.to_string(),
                l.std_error.to_string(),
                l.bound.to_string(),
                l.pass.to_string(),
                out.beta.value.to_string(),
            ])?;
            w.into_inner()?
        }
    };
    emit(cfg, &bytes)?;
    Ok(if est.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_geometry(cfg: &RunConfig) -> Result<ExitCode> {
    let g = IfsParams::new(cfg.alpha)?;
    let segments = edge_segments(cfg.level, &g)?;
    let lengths = length_system(cfg.level, &g)?;
    eprintln!(
        "{} segments, total length {:.12}, level ratio {:.6}",
        segments.len(),
        lengths.total,
        lengths.ratio
    );
    let mut v = Vec::new();
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => write_geometry_csv(&segments, &mut v)?,
        Format::Json => write_geometry_json(&segments, &mut v)?,
    }
    emit(cfg, &v)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cfg: &RunConfig) -> Result<ExitCode> {
    let p = cfg.params;
    let vc = VerifyConfig {
        inductance: p.inductance,
        capacitance: p.capacitance,
        seed: cfg.seed,
        tol: cfg.tol,
        quick: cfg.quick,
        override_threshold: std::env::var("FSLADDER_VERIFY_OVERRIDE")
            .ok()
            .map(|s| -> Result<(String, f64)> {
                let (id, v) = s.split_once('=').context("override must be ID=VALUE")?;
                Ok((id.to_string(), v.parse()?))
            })
            .transpose()?,
    };
    let report = run_verify(&vc)?;
    eprint!("{}", report.text());
    let bytes = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "id",
                "name",
                "value",
                "relation",
                "threshold",
                "pass",
                "detail",
            ])?;
            for c in &report.checks {
                w.write_record([
                    c.id.clone(),
                    c.name.clone(),
                    c.value.to_string(),
                    c.relation.clone(),
                    c.threshold.to_string(),
                    c.pass.to_string(),
                    c.detail.clone(),
                ])?;
            }
            w.into_inner()?
        }
    };
    emit(cfg, &bytes)?;
    Ok(if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
