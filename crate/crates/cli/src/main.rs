//! `qsphere` command-line tool.

mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use output::{fmt_f, CsvOut};
use qsphere::analytics::{density_limit, density_radial, kernel_d, kernel_i, kernel_s_integral, kernel_s_sum, rho_n, EnsembleConstants};
use qsphere::harness::{compare_to_theory, radial_histogram, run_batch};
use qsphere::moebius::stereographic;
use qsphere::numerics::quadrature::Tolerance;
use qsphere::sampler::{Beta, EnsembleConfig};
use qsphere::verify::{self, Mutation, VerifyOptions, CHECKS};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "qsphere", version, about = "Real quaternion spherical ensemble: sampling and exact eigenvalue statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw spectra and write samples.csv.
    Sample(SampleArgs),
    /// Tabulate the finite-N density and its large-N form in density.csv.
    Density(DensityArgs),
    /// Evaluate kernel entries at the given points and write kernel.csv.
    Kernel(KernelArgs),
    /// Run the verification checks and write report.json.
    Verify(VerifyArgs),
    /// Radial histogram of a β = 4 batch against the density (hist.csv, report.json).
    Hist(HistArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SampleArgs {
    #[arg(long, default_value_t = 4, value_parser = parse_beta)]
    beta: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e12)]
    cond_limit: f64,
    #[arg(long, default_value_t = 1e-6)]
    pair_tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct DensityArgs {
    #[arg(long)]
    n: usize,
    /// Grid points in (0, 1].
    #[arg(long, default_value_t = 400)]
    grid: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct KernelArgs {
    #[arg(long)]
    n: usize,
    /// Disk points as "re,im;re,im;...".
    #[arg(long)]
    points: String,
    /// Relative tolerance for the integral form of S.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    /// Run only this check (repeatable). Known checks: normalization,
    /// skew-orthogonality, kernel-equivalence, density-normalization,
    /// closed-form-n1, monte-carlo, pairing, pfaffian, spherical-limit,
    /// scaled-limit, gauge-invariance.
    #[arg(long)]
    check: Vec<String>,
    /// Restrict checks that sweep over N to this value.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    /// Inject a known defect to confirm the checks can fail.
    #[arg(long, value_parser = ["cn-sign"], hide = true)]
    inject_bug: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct HistArgs {
    #[arg(long, default_value_t = 4, value_parser = parse_beta)]
    beta: u8,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    #[arg(long, default_value_t = 1e12)]
    cond_limit: f64,
    #[arg(long, default_value_t = 1e-6)]
    pair_tol: f64,
    #[command(flatten)]
    common: Common,
}

fn parse_beta(s: &str) -> std::result::Result<u8, String> {
    match s {
        "1" | "2" | "4" => Ok(s.parse().unwrap()),
        _ => Err(format!("beta must be 1, 2 or 4, got {s}")),
    }
}

fn parse_points(s: &str) -> Result<Vec<Complex64>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (re, im) = p.split_once(',').with_context(|| format!("point {p:?} is not \"re,im\""))?;
            Ok(Complex64::new(re.trim().parse()?, im.trim().parse()?))
        })
        .collect()
}

/// Logs the resolved configuration so a run can be repeated from its log.
fn announce<T: Serialize>(command: &str, cfg: &T) {
    eprintln!("qsphere {command} {}", serde_json::to_string(cfg).unwrap_or_default());
}

fn ensemble(beta: u8, n: usize, count: usize, seed: u64, cond_limit: f64, pair_tol: f64) -> Result<EnsembleConfig> {
    let mut cfg = EnsembleConfig::new(Beta::try_from(beta)?, n, count, seed);
    cfg.cond_limit = cond_limit;
    cfg.pair_tol = pair_tol;
    cfg.validate()?;
    Ok(cfg)
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let cfg = ensemble(a.beta, a.n, a.count, a.seed, a.cond_limit, a.pair_tol)?;
    prepare(&a.common.out)?;
    let batch = run_batch(&cfg)?;
    let path = a.common.out.join("samples.csv");
    let mut out = CsvOut::create(&path)?;
    out.row(["draw_index", "eig_index", "re_lambda", "im_lambda", "re_w", "im_w", "sphere_x", "sphere_y", "sphere_z", "is_real"])?;
    let mut rows = 0;
    for s in &batch.samples {
        for (k, (l, w)) in s.lambdas.iter().zip(&s.ws).enumerate() {
            let p = stereographic(*l);
            let real = if l.im == 0.0 { "1" } else { "0" };
            out.row([
                s.draw_index.to_string(),
                k.to_string(),
                fmt_f(l.re),
                fmt_f(l.im),
                fmt_f(w.re),
                fmt_f(w.im),
                fmt_f(p.x),
                fmt_f(p.y),
                fmt_f(p.z),
                real.to_string(),
            ])?;
            rows += 1;
        }
    }
    out.finish()?;
    eprintln!("wrote {rows} rows to {} ({} failed draws)", path.display(), batch.failures.len());
    Ok(())
}

fn cmd_density(a: &DensityArgs) -> Result<()> {
    if a.grid == 0 {
        bail!("grid must have at least one point");
    }
    let c = EnsembleConstants::new(a.n)?;
    prepare(&a.common.out)?;
    let path = a.common.out.join("density.csv");
    let mut out = CsvOut::create(&path)?;
    out.row(["r", "rho", "rho_over_N", "rho_limit_over_N"])?;
    let nf = a.n as f64;
    for k in 1..=a.grid {
        let r = k as f64 / a.grid as f64;
        let rho = density_radial(r, &c)?;
        let lim = density_limit(Complex64::new(r, 0.0), a.n) / nf;
        out.row([fmt_f(r), fmt_f(rho), fmt_f(rho / nf), fmt_f(lim)])?;
    }
    out.finish()?;
    eprintln!("wrote {} rows to {}", a.grid, path.display());
    Ok(())
}

fn cmd_kernel(a: &KernelArgs) -> Result<()> {
    let points = parse_points(&a.points)?;
    if points.is_empty() {
        bail!("--points needs at least one point");
    }
    let c = EnsembleConstants::new(a.n)?;
    let tol = Tolerance::new(0.0, a.tol);
    prepare(&a.common.out)?;
    let path = a.common.out.join("kernel.csv");
    let mut out = CsvOut::create(&path)?;
    out.row([
        "a", "b", "re_w", "im_w", "re_z", "im_z", "re_s", "im_s", "re_d", "im_d", "re_i", "im_i", "re_s_integral", "im_s_integral",
        "s_rel_delta", "rho_2",
    ])?;
    for (ia, &w) in points.iter().enumerate() {
        for (ib, &z) in points.iter().enumerate().skip(ia) {
            let s = kernel_s_sum(w, z, &c)?;
            let d = kernel_d(w, z, &c)?;
            let i = kernel_i(w, z, &c)?;
            let si = kernel_s_integral(w, z, &c, tol)?;
            let delta = if s == si { 0.0 } else { (s - si).norm() / si.norm() };
            let rho2 = if a.n >= 2 { rho_n(&[w, z], &c)? } else { f64::NAN };
            out.row([
                ia.to_string(),
                ib.to_string(),
                fmt_f(w.re),
                fmt_f(w.im),
                fmt_f(z.re),
                fmt_f(z.im),
                fmt_f(s.re),
                fmt_f(s.im),
                fmt_f(d.re),
                fmt_f(d.im),
                fmt_f(i.re),
                fmt_f(i.im),
                fmt_f(si.re),
                fmt_f(si.im),
                fmt_f(delta),
                fmt_f(rho2),
            ])?;
        }
    }
    out.finish()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: u32,
    command: &'static str,
    config: &'a VerifyArgs,
    all_passed: bool,
    checks: Vec<verify::CheckOutcome>,
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    for name in &a.check {
        if verify::criterion_of(name).is_none() {
            bail!("unknown check {name:?}; known checks: {}", CHECKS.join(", "));
        }
    }
    let opts = VerifyOptions {
        n: a.n,
        seed: a.seed,
        mutation: a.inject_bug.as_deref().map(|_| Mutation::FlipCnSign),
    };
    prepare(&a.common.out)?;
    let names: Vec<&str> = if a.check.is_empty() { CHECKS.to_vec() } else { a.check.iter().map(String::as_str).collect() };
    let mut checks = Vec::new();
    for name in names {
        let o = verify::run_check(name, &opts).expect("name validated above");
        eprintln!(
            "{:<22} {}  measured {:.6e}  ({})",
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.measured,
            o.target
        );
        checks.push(o);
    }
    let all_passed = checks.iter().all(|c| c.passed);
    let path = a.common.out.join("report.json");
    write_json(
        &path,
        &VerifyReport {
            schema_version: SCHEMA_VERSION,
            command: "verify",
            config: a,
            all_passed,
            checks: checks.clone(),
        },
    )?;
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {}", c.name);
    }
    Ok(all_passed)
}

#[derive(Serialize)]
struct HistReport<'a> {
    schema_version: u32,
    command: &'static str,
    config: &'a HistArgs,
    n: usize,
    draws: usize,
    failed_draws: usize,
    total_eigs: u64,
    sup_z: f64,
    frac_within_3se: f64,
    chi2: f64,
    dof: usize,
    chi2_per_dof: f64,
}

fn cmd_hist(a: &HistArgs) -> Result<()> {
    if a.beta != 4 {
        bail!("hist compares against the β = 4 density only; got --beta {}", a.beta);
    }
    let cfg = ensemble(a.beta, a.n, a.count, a.seed, a.cond_limit, a.pair_tol)?;
    prepare(&a.common.out)?;
    let batch = run_batch(&cfg)?;
    let hist = radial_histogram(&batch.samples, a.bins)?;
    let rep = compare_to_theory(&hist, a.n)?;
    let path = a.common.out.join("hist.csv");
    let mut out = CsvOut::create(&path)?;
    out.row(["bin_lo", "bin_hi", "count", "empirical_density_over_N", "theory_density_over_N", "z_score"])?;
    for b in &rep.bins {
        out.row([fmt_f(b.r_lo), fmt_f(b.r_hi), b.count.to_string(), fmt_f(b.empirical), fmt_f(b.theory), fmt_f(b.z_score)])?;
    }
    out.finish()?;
    write_json(
        &a.common.out.join("report.json"),
        &HistReport {
            schema_version: SCHEMA_VERSION,
            command: "hist",
            config: a,
            n: a.n,
            draws: rep.draws,
            failed_draws: batch.failures.len(),
            total_eigs: hist.total_eigs,
            sup_z: rep.sup_z,
            frac_within_3se: rep.frac_within_3se,
            chi2: rep.chi2,
            dof: rep.dof,
            chi2_per_dof: rep.chi2_per_dof(),
        },
    )?;
    eprintln!(
        "{} bins: {:.1}% within 3 SE, sup-z {:.3}, χ²/dof {:.3}",
        rep.bins.len(),
        100.0 * rep.frac_within_3se,
        rep.sup_z,
        rep.chi2_per_dof()
    );
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QSPHERE_THREADS") {
        let n: usize = v.parse().with_context(|| format!("QSPHERE_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        eprintln!("QSPHERE_THREADS={n}");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    match &cli.command {
        Command::Sample(a) => {
            announce("sample", a);
            cmd_sample(a)?;
        }
        Command::Density(a) => {
            announce("density", a);
            cmd_density(a)?;
        }
        Command::Kernel(a) => {
            announce("kernel", a);
            cmd_kernel(a)?;
        }
        Command::Verify(a) => {
            announce("verify", a);
            return cmd_verify(a);
        }
        Command::Hist(a) => {
            announce("hist", a);
            cmd_hist(a)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
