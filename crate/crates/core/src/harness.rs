//! Temperature sweeps, expansion fits and CSV tables for checking the closed forms against
//! direct numerics.

use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::asymptotics::{closed_form_corrections, conductivity, delta_f_te, delta_f_tm, ClosedForm};
use crate::config::GapConfiguration;
use crate::error::{Error, Result};
use crate::lifshitz::{delta_free_energy, entropy_numeric, free_energy_zero_t, Estimate};
use crate::units::{entropy_to_si, free_energy_to_si, kelvin_to_freq};

pub const SWEEP_HEADER: [&str; 12] = [
    "T_K",
    "F_total",
    "F_s",
    "F_p",
    "dF_s_num",
    "dF_p_num",
    "dF_p_th",
    "dF_s_th_T2",
    "dF_s_th_T52",
    "dF_s_th_T3",
    "S_num",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "geometric" => Ok(Spacing::Geometric),
            other => Err(Error::validation("spacing", format!("expected linear or geometric, got {other:?}"))),
        }
    }
}

/// Temperatures in K from `t_min` to `t_max` inclusive.
pub fn temperature_grid(t_min: f64, t_max: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Error::validation("t_min", format!("need 0 < t_min < t_max, got {t_min}, {t_max}")));
    }
    if points < 3 {
        return Err(Error::validation("points", format!("need at least 3 points, got {points}")));
    }
    let last = (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| {
            let f = i as f64 / last;
            match spacing {
                Spacing::Linear => t_min + (t_max - t_min) * f,
                Spacing::Geometric => t_min * (t_max / t_min).powf(f),
            }
        })
        .collect();
    grid[0] = t_min;
    grid[points - 1] = t_max;
    Ok(grid)
}

/// One sweep row. Energies in J/m², entropy in J/(K·m²).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_k: f64,
    pub f_total: f64,
    pub f_s: f64,
    pub f_p: f64,
    pub df_s_num: f64,
    pub df_p_num: f64,
    pub df_p_th: f64,
    pub df_s_th_t2: f64,
    pub df_s_th_t52: f64,
    pub df_s_th_t3: f64,
    pub s_num: f64,
    pub flags: Vec<String>,
}

impl SweepRow {
    fn failed(t_k: f64, reason: &Error) -> Self {
        let kind = match reason {
            Error::Quadrature { .. } => "quadrature",
            Error::Truncation { .. } => "truncation",
            Error::Validation { .. } | Error::Config { .. } => "validation",
            _ => "numerical",
        };
        Self {
            t_k,
            f_total: f64::NAN,
            f_s: f64::NAN,
            f_p: f64::NAN,
            df_s_num: f64::NAN,
            df_p_num: f64::NAN,
            df_p_th: f64::NAN,
            df_s_th_t2: f64::NAN,
            df_s_th_t52: f64::NAN,
            df_s_th_t3: f64::NAN,
            s_num: f64::NAN,
            flags: vec![format!("failed_{kind}")],
        }
    }

    fn values(&self) -> [f64; 11] {
        [
            self.t_k,
            self.f_total,
            self.f_s,
            self.f_p,
            self.df_s_num,
            self.df_p_num,
            self.df_p_th,
            self.df_s_th_t2,
            self.df_s_th_t52,
            self.df_s_th_t3,
            self.s_num,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub entropy: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { entropy: true }
    }
}

/// Evaluates each grid temperature (K). F_total = F(0) + ΔF with F(0) computed once.
pub fn sweep(config: &GapConfiguration<f64>, grid: &[f64], options: SweepOptions) -> Result<SweepTable> {
    config.material.validate()?;
    config.numerics.validate()?;
    let f0 = free_energy_zero_t(config)?;
    let rows = grid
        .par_iter()
        .map(|&t_k| match sweep_row(config, &f0, t_k, options) {
            Ok(row) => row,
            Err(e) => SweepRow::failed(t_k, &e),
        })
        .collect();
    Ok(SweepTable { rows })
}

fn sweep_row(config: &GapConfiguration<f64>, f0: &Estimate<f64>, t_k: f64, options: SweepOptions) -> Result<SweepRow> {
    let cfg = config.with_temperature_k(t_k);
    let delta = delta_free_energy(&cfg)?;
    let mut flags: Vec<String> = Vec::new();
    let f_s = free_energy_to_si(f0.value.s + delta.value.s);
    let f_p = free_energy_to_si(f0.value.p + delta.value.p);
    let (te, tm) = match closed_form_corrections(&cfg) {
        Ok((te, tm)) => {
            flags.extend(te.flags.warnings().into_iter().map(String::from));
            (te.to_si(), tm.to_si())
        }
        Err(_) => {
            flags.push("no_closed_form".into());
            let nan = ClosedForm {
                t2: f64::NAN,
                t5_2: f64::NAN,
                t3: f64::NAN,
                flags: Default::default(),
            };
            (nan, nan)
        }
    };
    let s_num = if options.entropy {
        match entropy_numeric(&cfg, cfg.numerics.diff_step_fraction) {
            Ok(e) => {
                if e.precision_warning {
                    flags.push("entropy_imprecise".into());
                }
                entropy_to_si(e.value)
            }
            Err(e) if e.is_numerical() => {
                flags.push("entropy_failed".into());
                f64::NAN
            }
            Err(e) => return Err(e),
        }
    } else {
        flags.push("entropy_skipped".into());
        f64::NAN
    };
    Ok(SweepRow {
        t_k,
        f_total: f_s + f_p,
        f_s,
        f_p,
        df_s_num: free_energy_to_si(delta.value.s),
        df_p_num: free_energy_to_si(delta.value.p),
        df_p_th: tm.total(),
        df_s_th_t2: te.t2,
        df_s_th_t52: te.t5_2,
        df_s_th_t3: te.t3,
        s_num,
        flags,
    })
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.11e}")
    }
}

fn parse_float(field: &str, column: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Io(format!("line {line}, column {column}: cannot parse {field:?} as a number")))
}

/// Writes the table with 12 significant digits per value.
pub fn write_sweep_csv<W: Write>(table: &SweepTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.values().iter().map(|&v| format_float(v)).collect();
        rec.push(row.flags.join(";"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<SweepTable> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != SWEEP_HEADER {
        return Err(Error::Io(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut v = [0.0; 11];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_float(&rec[k], SWEEP_HEADER[k], line)?;
        }
        let flags = rec[11]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        rows.push(SweepRow {
            t_k: v[0],
            f_total: v[1],
            f_s: v[2],
            f_p: v[3],
            df_s_num: v[4],
            df_p_num: v[5],
            df_p_th: v[6],
            df_s_th_t2: v[7],
            df_s_th_t52: v[8],
            df_s_th_t3: v[9],
            s_num: v[10],
            flags,
        });
    }
    Ok(SweepTable { rows })
}

/// Least-squares polynomial fit with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
}

/// Unweighted fit of y against {1, x, ..., x^degree}.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    let n = x.len();
    let k = degree + 1;
    if n != y.len() {
        return Err(Error::Fit("x and y lengths differ".into()));
    }
    if n <= k {
        return Err(Error::Fit(format!("need more than {k} points for {k} parameters, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite input".into()));
    }
    let design = DMatrix::from_fn(n, k, |i, j| x[i].powi(j as i32));
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Fit(format!(
            "rank-deficient design (condition {:.3e}); use more distinct temperatures or a wider spacing",
            smax / smin
        )));
    }
    let coef = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Fit(format!("least squares failed: {e}")))?;
    let resid = &rhs - &design * &coef;
    let rss = resid.norm_squared();
    let s2 = rss / (n - k) as f64;
    let gram = design.transpose() * &design;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Fit("normal matrix is singular; widen the grid".into()))?;
    let covariance = inv * s2;
    let standard_errors = (0..k).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    Ok(PolyFit {
        coefficients: coef.iter().copied().collect(),
        standard_errors,
        covariance,
        residual_norm: rss.sqrt(),
    })
}

/// -ΔF/T² = D(1 - D1 T + D2 T²).
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_err: f64,
    pub d1_err: f64,
    pub d2_err: f64,
    pub residual_norm: f64,
    pub grid: Vec<f64>,
}

/// Fits (T, ΔF) rows with T in K.
pub fn fit_expansion(rows: &[(f64, f64)]) -> Result<FitResult> {
    if rows.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 rows, got {}", rows.len())));
    }
    if rows.iter().any(|&(t, f)| !(t > 0.0) || !(f < 0.0)) {
        return Err(Error::Fit("rows need T > 0 and ΔF < 0".into()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let y: Vec<f64> = rows.iter().map(|&(t, f)| -f / (t * t)).collect();
    let fit = fit_polynomial(&x, &y, 2)?;
    let (b0, b1, b2) = (fit.coefficients[0], fit.coefficients[1], fit.coefficients[2]);
    let c = &fit.covariance;
    let var = |g: [f64; 3]| {
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += g[i] * c[(i, j)] * g[j];
            }
        }
        v.max(0.0).sqrt()
    };
    Ok(FitResult {
        d: b0,
        d1: -b1 / b0,
        d2: b2 / b0,
        d_err: fit.standard_errors[0],
        d1_err: var([b1 / (b0 * b0), -1.0 / b0, 0.0]),
        d2_err: var([-b2 / (b0 * b0), 0.0, 1.0 / b0]),
        residual_norm: fit.residual_norm,
        grid: x,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub t_k: f64,
    pub df_num: f64,
    pub df_th: f64,
    /// (ΔF_th - ΔF_num)/ΔF_th; NaN when undefined.
    pub r: f64,
    pub defined: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatioSeries {
    pub rows: Vec<RatioRow>,
}

impl RatioSeries {
    /// Builds the series from (T, ΔF_num, ΔF_th); rows with |ΔF_th| ≤ `floor` are undefined.
    pub fn from_values(values: &[(f64, f64, f64)], floor: f64) -> Self {
        let rows = values
            .iter()
            .map(|&(t_k, num, th)| {
                let defined = t_k > 0.0 && th.abs() > floor && th.is_finite() && num.is_finite();
                RatioRow {
                    t_k,
                    df_num: num,
                    df_th: th,
                    r: if defined { (th - num) / th } else { f64::NAN },
                    defined,
                }
            })
            .collect();
        Self { rows }
    }

    /// Quadratic fit R = r0 + r1 T + r2 T² over the defined rows.
    pub fn fit(&self) -> Result<PolyFit> {
        let (x, y): (Vec<f64>, Vec<f64>) = self.rows.iter().filter(|r| r.defined).map(|r| (r.t_k, r.r)).unzip();
        fit_polynomial(&x, &y, 2)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["T_K", "dF_p_num", "dF_p_th", "R", "flags"])?;
        for r in &self.rows {
            w.write_record([
                format_float(r.t_k),
                format_float(r.df_num),
                format_float(r.df_th),
                format_float(r.r),
                if r.defined { String::new() } else { "undefined".into() },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// TM ratio (ΔF_th - ΔF_num)/ΔF_th on a grid of temperatures in K, using the coherent ΔF.
pub fn ratio_r(config: &GapConfiguration<f64>, grid: &[f64]) -> Result<RatioSeries> {
    let sigma = conductivity(&config.material)?;
    let values = grid
        .par_iter()
        .map(|&t_k| {
            let cfg = config.with_temperature_k(t_k);
            let num = delta_free_energy(&cfg)?.value.p;
            let th = delta_f_tm(cfg.temperature, sigma, cfg.separation).total();
            Ok((t_k, num, th))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioSeries::from_values(&values, config.numerics.abs_tol_floor))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeT3Row {
    pub t_k: f64,
    pub df_num: f64,
    pub th_t2: f64,
    /// ΔF_num minus the T² closed-form term.
    pub difference: f64,
    pub t3_term: f64,
    pub t52_term: f64,
    pub ratio: f64,
}

/// Rows from (T in K, numerical ΔF_s, closed form), all in one unit system.
pub fn te_t3_rows(values: &[(f64, f64, ClosedForm<f64>)]) -> Vec<TeT3Row> {
    values
        .iter()
        .map(|&(t_k, num, cf)| {
            let difference = num - cf.t2;
            TeT3Row {
                t_k,
                df_num: num,
                th_t2: cf.t2,
                difference,
                t3_term: cf.t3,
                t52_term: cf.t5_2,
                ratio: difference / cf.t3,
            }
        })
        .collect()
}

/// TE comparison of ΔF_s minus its T² term against the -ζ(3)T³/8π term.
pub fn te_t3_comparison(config: &GapConfiguration<f64>, grid: &[f64]) -> Result<Vec<TeT3Row>> {
    let sigma = conductivity(&config.material)?;
    let values = grid
        .par_iter()
        .map(|&t_k| {
            let temp = kelvin_to_freq(t_k);
            let num = delta_free_energy(&config.with_temperature(temp))?.value.s;
            Ok((t_k, num, delta_f_te(temp, sigma, config.separation)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(te_t3_rows(&values))
}

pub fn write_te_t3_csv<W: Write>(rows: &[TeT3Row], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["T_K", "dF_s_num", "dF_s_th_T2", "difference", "T3_term", "T52_term", "ratio"])?;
    for r in rows {
        w.write_record(
            [r.t_k, r.df_num, r.th_t2, r.difference, r.t3_term, r.t52_term, r.ratio].map(format_float),
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::PermittivityModel;

    #[test]
    fn grids() {
        let g = temperature_grid(0.1, 1.0, 3, Spacing::Geometric).unwrap();
        assert_eq!(g[0], 0.1);
        assert!((g[1] - 0.316_227_766_016_837_94).abs() < 1e-15);
        assert_eq!(g[2], 1.0);
        let l = temperature_grid(0.0625, 0.5, 3, Spacing::Linear).unwrap();
        assert_eq!(l, vec![0.0625, 0.28125, 0.5]);
        assert!(temperature_grid(1.0, 0.5, 5, Spacing::Linear).is_err());
        assert!(temperature_grid(0.1, 0.5, 2, Spacing::Linear).is_err());
        assert_eq!("geometric".parse::<Spacing>().unwrap(), Spacing::Geometric);
        assert!("log".parse::<Spacing>().is_err());
    }

    #[test]
    fn exact_synthetic_fit() {
        let rows: Vec<(f64, f64)> = temperature_grid(0.05, 1.0, 20, Spacing::Geometric)
            .unwrap()
            .into_iter()
            .map(|t| (t, -2.0 * t * t * (1.0 - 0.3 * t + 0.05 * t * t)))
            .collect();
        let f = fit_expansion(&rows).unwrap();
        assert!((f.d / 2.0 - 1.0).abs() < 1e-8);
        assert!((f.d1 / 0.3 - 1.0).abs() < 1e-8);
        assert!((f.d2 / 0.05 - 1.0).abs() < 1e-8);
        // rescaling changes D only
        let scaled: Vec<(f64, f64)> = rows.iter().map(|&(t, v)| (t, 7.5 * v)).collect();
        let g = fit_expansion(&scaled).unwrap();
        assert!((g.d / (7.5 * f.d) - 1.0).abs() < 1e-12);
        assert!((g.d1 / f.d1 - 1.0).abs() < 1e-10);
        assert!((g.d2 / f.d2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_noise_robustness() {
        let grid = temperature_grid(0.05, 1.0, 20, Spacing::Geometric).unwrap();
        let clean: Vec<(f64, f64)> = grid.iter().map(|&t| (t, -2.0 * t * t * (1.0 - 0.3 * t))).collect();
        // deterministic ±1e-10 relative jitter
        let noisy: Vec<(f64, f64)> = clean
            .iter()
            .enumerate()
            .map(|(i, &(t, v))| (t, v * (1.0 + if i % 2 == 0 { 1e-10 } else { -1e-10 })))
            .collect();
        let a = fit_expansion(&clean).unwrap();
        let b = fit_expansion(&noisy).unwrap();
        assert!((a.d / b.d - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rank_deficient_and_bad_rows() {
        let rows = vec![(0.5, -1.0), (0.5, -1.0), (0.5, -1.0), (0.5, -1.0)];
        match fit_expansion(&rows) {
            Err(Error::Fit(msg)) => assert!(msg.contains("wider")),
            other => panic!("{other:?}"),
        }
        assert!(fit_expansion(&[(0.1, -1.0), (0.2, -1.0), (0.3, -1.0)]).is_err());
        assert!(fit_expansion(&[(0.1, 1.0), (0.2, -1.0), (0.3, -1.0), (0.4, -1.0)]).is_err());
    }

    #[test]
    fn ratio_synthetic() {
        let grid = temperature_grid(0.05, 1.0, 20, Spacing::Geometric).unwrap();
        let th = |t: f64| -3.0 * t * t * (1.0 - 0.2 * t);
        let same: Vec<_> = grid.iter().map(|&t| (t, th(t), th(t))).collect();
        let r = RatioSeries::from_values(&same, 0.0);
        assert!(r.rows.iter().all(|row| row.defined && row.r == 0.0));
        // numerics carrying a 1% larger quadratic coefficient
        let off: Vec<_> = grid.iter().map(|&t| (t, th(t) * 1.01, th(t))).collect();
        let fit = RatioSeries::from_values(&off, 0.0).fit().unwrap();
        assert!((fit.coefficients[0] + 0.01).abs() < 1e-12);
        let zero = RatioSeries::from_values(&[(0.0, 1.0, 0.0), (0.1, 1.0, 1e-40)], 1e-30);
        assert!(zero.rows.iter().all(|r| !r.defined && r.r.is_nan()));
    }

    #[test]
    fn te_rows_from_closed_form() {
        let (sigma, a) = (1e12, crate::units::separation_to_time(1000.0));
        let values: Vec<_> = [0.2, 0.5, 1.0]
            .iter()
            .map(|&t_k| {
                let cf = delta_f_te(kelvin_to_freq(t_k), sigma, a);
                (t_k, cf.total(), cf)
            })
            .collect();
        for row in te_t3_rows(&values) {
            let expect = 1.0 + row.t52_term / row.t3_term;
            assert!((row.ratio - expect).abs() < 1e-9);
            assert!(row.t52_term.abs() < 0.1 * row.difference.abs());
        }
    }

    fn sample_table() -> SweepTable {
        SweepTable {
            rows: vec![
                SweepRow {
                    t_k: 0.05,
                    f_total: -1.234_567_890_123_456e-10,
                    f_s: -3.0e-11,
                    f_p: -9.345_678_901_234_56e-11,
                    df_s_num: 1.0e-22,
                    df_p_num: -std::f64::consts::PI * 1e-20,
                    df_p_th: -3.1e-20,
                    df_s_th_t2: 1.1e-22,
                    df_s_th_t52: -1e-26,
                    df_s_th_t3: -2e-24,
                    s_num: f64::NAN,
                    flags: vec!["t_not_small".into(), "entropy_skipped".into()],
                },
                SweepRow::failed(1.0, &Error::Quadrature { estimate: 0.0, error: 1.0 }),
            ],
        }
    }

    #[test]
    fn csv_round_trip() {
        let table = sample_table();
        let mut first = Vec::new();
        write_sweep_csv(&table, &mut first).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.starts_with("T_K,F_total,F_s,F_p,dF_s_num,dF_p_num,dF_p_th,dF_s_th_T2,dF_s_th_T52,dF_s_th_T3,S_num,flags\n"));
        assert!(text.contains("-3.14159265359e-20"));
        assert!(text.contains("t_not_small;entropy_skipped"));
        let parsed = read_sweep_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_sweep_csv(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
        let again = read_sweep_csv(second.as_slice()).unwrap();
        for (a, b) in parsed.rows.iter().zip(&again.rows) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
            assert_eq!(a.flags, b.flags);
        }
        assert_eq!(parsed.rows[1].flags, vec!["failed_quadrature".to_string()]);
        assert!(read_sweep_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn small_sweep_bookkeeping() {
        let cfg = GapConfiguration::new(
            crate::units::separation_to_time(1000.0),
            0.0,
            PermittivityModel::DrudeSemiconductor {
                eps_bar: 11.66,
                omega0: 8e15,
                sigma: 1e12,
            },
        );
        let grid = temperature_grid(0.1, 1.0, 3, Spacing::Geometric).unwrap();
        let t = sweep(&cfg, &grid, SweepOptions { entropy: false }).unwrap();
        assert_eq!(t.rows.len(), 3);
        for (row, &tk) in t.rows.iter().zip(&grid) {
            assert_eq!(row.t_k, tk);
            assert_eq!(row.f_total, row.f_s + row.f_p);
            assert!(row.f_total < 0.0);
            assert!(row.s_num.is_nan());
            assert!(row.flags.iter().any(|f| f == "entropy_skipped"));
        }
        let ideal = cfg.with_material(PermittivityModel::IdealMetal);
        let t = sweep(&ideal, &grid[..1], SweepOptions { entropy: false }).unwrap();
        assert!(t.rows[0].flags.iter().any(|f| f == "no_closed_form"));
        assert!(t.rows[0].df_p_th.is_nan());
    }
}
