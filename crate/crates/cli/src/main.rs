#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lifshitz_lab::asymptotics::{
    closed_form_corrections, conductivity, entropy_closed_form, exponent_from_lambda, residual_entropy_transition,
    RescaledTemperature, DEFAULT_VALIDITY_THRESHOLD,
};
use lifshitz_lab::config::{parse_config, GapConfiguration};
use lifshitz_lab::harness::{
    fit_expansion, ratio_r, sweep, te_t3_comparison, temperature_grid, write_sweep_csv, write_te_t3_csv, Spacing,
    SweepOptions,
};
use lifshitz_lab::lifshitz::{
    delta_free_energy, entropy_numeric, free_energy_zero_t, sum_minus_integral, EulerMaclaurinOptions,
};
use lifshitz_lab::materials::PermittivityModel;
use lifshitz_lab::reflection::zero_frequency_limits;
use lifshitz_lab::units::{entropy_to_si, free_energy_to_si, separation_to_time};
use lifshitz_lab::Error;

#[derive(Parser, Debug)]
#[command(name = "lifshitz-lab", version, about = "Casimir free energy and entropy between dielectric half-spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// F_total, F_s and F_p at one temperature.
    Freeenergy(Common),
    /// Temperature sweep written as CSV.
    Sweep(Common),
    /// Numerical entropy -dF/dT next to the low-temperature closed form.
    Entropy(Common),
    /// Term-by-term low-temperature corrections for TM and TE.
    Asymptotic(Common),
    /// Residual entropy for a jump of the leading exponent, e.g. --transition -1:0.
    ResidualEntropy(Common),
    /// Leading exponent and zero-frequency reflection limits of the material.
    Limits(Common),
    /// TM ratio R = (ΔF_th - ΔF_num)/ΔF_th over a grid, with the expansion fit.
    VerifyTm(Common),
    /// TE comparison of ΔF_s minus its T² term with the T³ term.
    VerifyTe(Common),
    /// Sum-minus-integral of e^{-tm} against its exact value.
    EmDemo(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write data here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    temperature_k: Option<f64>,
    #[arg(long)]
    separation_nm: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 0.05)]
    t_min: f64,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value = "geometric")]
    spacing: String,
    /// Exponent pair L1:L2 (finite temperature, then zero temperature).
    #[arg(long, allow_hyphen_values = true)]
    transition: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => 3,
            e if e.is_numerical() => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 3, message: format!("i/o error: {e}") }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

type Outcome = Result<(), Failure>;

impl Common {
    fn load(&self) -> Result<GapConfiguration<f64>, Failure> {
        let path = self.config.as_ref().ok_or_else(|| invalid("--config is required for this subcommand"))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure { code: 3, message: format!("cannot read {}: {e}", path.display()) })?;
        let mut cfg = parse_config(&text)?;
        if let Some(t) = self.temperature_k {
            cfg = cfg.with_temperature_k(t);
        }
        if let Some(a) = self.separation_nm {
            cfg.separation = separation_to_time(a);
        }
        if let Some(tol) = self.rel_tol {
            cfg.numerics.rel_tol = tol;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn grid(&self) -> Result<Vec<f64>, Failure> {
        let spacing: Spacing = self.spacing.parse()?;
        Ok(temperature_grid(self.t_min, self.t_max, self.points, spacing)?)
    }

    fn sink(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure { code: 3, message: format!("cannot write {}: {e}", path.display()) })
}

fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn describe(cfg: &GapConfiguration<f64>) -> String {
    format!(
        "a = {} nm, T = {} K, material {}, rel_tol {:e}",
        tidy(cfg.separation_nm()),
        tidy(cfg.temperature_k()),
        cfg.material.name(),
        cfg.numerics.rel_tol
    )
}

fn freeenergy(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let f0 = free_energy_zero_t(&cfg)?;
    let (value, error) = if cfg.temperature > 0.0 {
        let d = delta_free_energy(&cfg)?;
        (
            lifshitz_lab::lifshitz::PolarisationPair::new(f0.value.s + d.value.s, f0.value.p + d.value.p),
            f0.error.total() + d.error.total(),
        )
    } else {
        (f0.value, f0.error.total())
    };
    let mut out = c.sink()?;
    writeln!(out, "quantity,natural_rad3_per_s3,si_J_per_m2")?;
    for (name, v) in [("F_total", value.s + value.p), ("F_s", value.s), ("F_p", value.p)] {
        writeln!(out, "{name},{v:.11e},{:.11e}", free_energy_to_si(v))?;
    }
    out.flush()?;
    eprintln!("{}; error estimate {error:.2e} (natural)", describe(&cfg));
    Ok(())
}

fn sweep_cmd(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let grid = c.grid()?;
    let table = sweep(&cfg, &grid, SweepOptions::default())?;
    let mut out = c.sink()?;
    write_sweep_csv(&table, &mut out)?;
    out.flush()?;
    let failed = table.rows.iter().filter(|r| r.flags.iter().any(|f| f.starts_with("failed"))).count();
    eprintln!("{}; {} rows, {failed} failed", describe(&cfg), table.rows.len());
    if failed > 0 {
        return Err(Failure { code: 2, message: format!("{failed} temperatures did not meet tolerance") });
    }
    Ok(())
}

fn entropy(c: &Common) -> Outcome {
    let cfg = c.load()?;
    if !(cfg.temperature > 0.0) {
        return Err(invalid("entropy needs --temperature-k > 0"));
    }
    let s = entropy_numeric(&cfg, cfg.numerics.diff_step_fraction)?;
    let mut out = c.sink()?;
    writeln!(out, "quantity,natural_per_s2,si_J_per_K_m2")?;
    writeln!(out, "S_num,{:.11e},{:.11e}", s.value, entropy_to_si(s.value))?;
    if let Ok(sigma) = conductivity(&cfg.material) {
        let th = entropy_closed_form(cfg.temperature, sigma, cfg.separation);
        writeln!(out, "S_closed_form,{th:.11e},{:.11e}", entropy_to_si(th))?;
    }
    out.flush()?;
    eprintln!("{}; error estimate {:.2e} (natural)", describe(&cfg), s.error_estimate);
    if s.precision_warning {
        eprintln!("warning: entropy error estimate exceeds 1e-3 relative");
    }
    Ok(())
}

fn asymptotic(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let sigma = conductivity(&cfg.material)?;
    let (te, tm) = closed_form_corrections(&cfg)?;
    let (te_si, tm_si) = (te.to_si(), tm.to_si());
    let mut out = c.sink()?;
    writeln!(out, "polarisation,term,natural_rad3_per_s3,si_J_per_m2")?;
    for (pol, nat, si) in [("p", tm, tm_si), ("s", te, te_si)] {
        for (term, v, w) in [
            ("T2", nat.t2, si.t2),
            ("T5/2", nat.t5_2, si.t5_2),
            ("T3", nat.t3, si.t3),
            ("total", nat.total(), si.total()),
        ] {
            writeln!(out, "{pol},{term},{v:.11e},{w:.11e}")?;
        }
    }
    out.flush()?;
    let r = RescaledTemperature::new(cfg.temperature, sigma, cfg.separation);
    eprintln!("{}; t = {:.3e}, alpha = {:.3e}", describe(&cfg), r.t, r.alpha);
    for w in r.flags(DEFAULT_VALIDITY_THRESHOLD).warnings() {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn parse_transition(text: &str) -> Result<(i32, i32), Failure> {
    let bad = || invalid(format!("--transition expects L1:L2 with integer exponents, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn residual_entropy(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let (l1, l2) = parse_transition(c.transition.as_deref().ok_or_else(|| invalid("--transition L1:L2 is required"))?)?;
    let eps_bar = cfg.material.eps_bar().unwrap_or(f64::NAN);
    let omega_p = match cfg.material {
        PermittivityModel::DrudeMetal { omega_p, .. } | PermittivityModel::Plasma { omega_p } => omega_p,
        _ => f64::NAN,
    };
    if (l1 == 0 || l2 == 0) && eps_bar.is_nan() {
        return Err(invalid("exponent 0 needs a material with eps_bar"));
    }
    if (l1 == -2 || l2 == -2) && omega_p.is_nan() {
        return Err(invalid("exponent -2 needs a material with omega_p_rad_s"));
    }
    let from = exponent_from_lambda(l1, eps_bar, omega_p)?;
    let to = exponent_from_lambda(l2, eps_bar, omega_p)?;
    let a = cfg.separation;
    let s = residual_entropy_transition(from, to, a, &cfg.numerics)?;
    let mut out = c.sink()?;
    writeln!(out, "quantity,natural_per_s2,si_J_per_K_m2")?;
    writeln!(out, "S_residual,{s:.11e},{:.11e}", entropy_to_si(s))?;
    writeln!(out, "16_pi_a2_S,{:.15e},", 16.0 * std::f64::consts::PI * a * a * s)?;
    out.flush()?;
    eprintln!("transition {l1} -> {l2} at a = {} nm", tidy(cfg.separation_nm()));
    Ok(())
}

fn limits(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let exp = cfg.material.classify_exponent();
    let kappa = 1.0 / cfg.separation;
    let r = zero_frequency_limits(&exp, kappa);
    let mut out = c.sink()?;
    writeln!(out, "material,lambda,r_s,r_p")?;
    writeln!(out, "{},{},{},{}", cfg.material.name(), exp.label(), r.r_s, r.r_p)?;
    out.flush()?;
    if matches!(exp.lambda(), Some(-2)) {
        eprintln!("r_s depends on kappa; shown at kappa = 1/a");
    }
    Ok(())
}

fn verify_tm(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let grid = c.grid()?;
    let series = ratio_r(&cfg, &grid)?;
    let mut out = c.sink()?;
    series.write_csv(&mut out)?;
    out.flush()?;
    let rows: Vec<(f64, f64)> = series.rows.iter().map(|r| (r.t_k, r.df_num)).collect();
    let fit = fit_expansion(&rows)?;
    eprintln!(
        "fit: D = {:.6e} ± {:.1e}, D1 = {:.6e} ± {:.1e} /K, D2 = {:.6e} ± {:.1e} /K²",
        fit.d, fit.d_err, fit.d1, fit.d1_err, fit.d2, fit.d2_err
    );
    let rfit = series.fit()?;
    eprintln!(
        "R fit: constant {:.3e} ± {:.1e}, linear {:.3e} ± {:.1e}",
        rfit.coefficients[0], rfit.standard_errors[0], rfit.coefficients[1], rfit.standard_errors[1]
    );
    Ok(())
}

fn verify_te(c: &Common) -> Outcome {
    let cfg = c.load()?;
    let grid = c.grid()?;
    let rows = te_t3_comparison(&cfg, &grid)?;
    let mut out = c.sink()?;
    write_te_t3_csv(&rows, &mut out)?;
    out.flush()?;
    eprintln!("{}; {} rows", describe(&cfg), rows.len());
    Ok(())
}

fn em_demo(c: &Common) -> Outcome {
    let mut out = c.sink()?;
    writeln!(out, "t,sum_minus_integral,exact,abs_error")?;
    for t in [1.0_f64, 0.1, 0.01, 1e-3] {
        let opts = EulerMaclaurinOptions {
            decay_scale: 1.0 / t,
            rel_tol: c.rel_tol.unwrap_or(1e-13),
            ..Default::default()
        };
        let got = sum_minus_integral(|m: f64| Ok([(-t * m).exp()]), &opts)?.value[0];
        let exact = -1.0 / (-t).exp_m1() - 0.5 - 1.0 / t;
        writeln!(out, "{t:e},{got:.15e},{exact:.15e},{:.3e}", (got - exact).abs())?;
    }
    out.flush()?;
    Ok(())
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var("LIFSHITZ_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| invalid(format!("LIFSHITZ_LAB_THREADS must be a non-negative integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| invalid(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Freeenergy(c) => freeenergy(c),
        Command::Sweep(c) => sweep_cmd(c),
        Command::Entropy(c) => entropy(c),
        Command::Asymptotic(c) => asymptotic(c),
        Command::ResidualEntropy(c) => residual_entropy(c),
        Command::Limits(c) => limits(c),
        Command::VerifyTm(c) => verify_tm(c),
        Command::VerifyTe(c) => verify_te(c),
        Command::EmDemo(c) => em_demo(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
