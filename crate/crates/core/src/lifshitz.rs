//! Matsubara sums of the Lifshitz integrand for two identical half-spaces.
//!
//! The per-frequency quantity is
//! g_q(ζ) = ∫_ζ^∞ dκ κ ln(1 - r_q² e^{-2κa}),
//! integrated in y = 2κa over a fixed geometric panel grid anchored at y0 = 2ζa. The grid
//! moves smoothly with ζ, so g is a smooth function of the Matsubara index and the
//! sum-minus-integral difference keeps its quadrature errors correlated.

use std::cell::RefCell;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::config::{GapConfiguration, NumericsSettings};
use crate::error::{Error, Result};
use crate::materials::{LeadingExponent, PermittivityModel};
use crate::quadrature::{integrate, kronrod21_multi, GaussLegendre, QuadSettings, Quadrature};
use crate::real::{lit, Real};
use crate::reflection::zero_frequency_limits;
use crate::special::bernoulli;
use crate::summation::NeumaierSum;

/// Smallest geometric panel near the lower limit, in units of y = 2κa.
const BASE_PANEL: f64 = 1e-10;
/// Panels stop doubling at this width.
const MAX_PANEL: f64 = 8.0;
/// Direct terms before the Euler-Maclaurin tail takes over.
pub const DEFAULT_HEAD_TERMS: usize = 128;
const FREE_ENERGY_CHUNK: usize = 256;

/// Any per-polarisation quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarisationPair<T> {
    pub s: T,
    pub p: T,
}

impl<T: Real> PolarisationPair<T> {
    pub fn new(s: T, p: T) -> Self {
        Self { s, p }
    }

    pub fn total(&self) -> T {
        self.s + self.p
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> PolarisationPair<U> {
        PolarisationPair {
            s: f(self.s),
            p: f(self.p),
        }
    }
}

/// One Matsubara term: the κ-integral per polarisation at ζ_m = 2πmT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerm<T> {
    pub m: u64,
    pub zeta_m: T,
    pub value_s: T,
    pub value_p: T,
    pub quadrature_error_estimate: T,
}

/// Finite-temperature free energy per area with its term list.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyResult<T> {
    pub temperature: T,
    pub separation: T,
    /// Natural units, (rad/s)³.
    pub total: T,
    pub per_polarisation: PolarisationPair<T>,
    pub terms: Vec<ModeTerm<T>>,
    /// Geometric estimate of the omitted terms (already scaled by T/2π, not included in `total`).
    pub truncation_tail_estimate: PolarisationPair<T>,
    pub error_estimate: T,
    pub settings: NumericsSettings<T>,
}

impl<T: Real> FreeEnergyResult<T> {
    /// (T/2π)·Σ' over the stored terms, recomputed from the breakdown.
    pub fn breakdown_total(&self) -> PolarisationPair<T> {
        let mut s = NeumaierSum::new();
        let mut p = NeumaierSum::new();
        for t in &self.terms {
            let w = if t.m == 0 { lit::<T>(0.5) } else { T::one() };
            s.add(w * t.value_s);
            p.add(w * t.value_p);
        }
        let pre = self.temperature / T::TAU();
        PolarisationPair::new(pre * s.value(), pre * p.value())
    }
}

impl FreeEnergyResult<f64> {
    pub fn total_si(&self) -> f64 {
        crate::units::free_energy_to_si(self.total)
    }
}

/// Per-polarisation result with error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: PolarisationPair<T>,
    pub error: PolarisationPair<T>,
}

impl<T: Real> Estimate<T> {
    pub fn total(&self) -> T {
        self.value.total()
    }
}

/// Values of g_s and g_p at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeValues<T> {
    pub s: T,
    pub p: T,
    pub error_s: T,
    pub error_p: T,
    pub evaluations: usize,
}

#[inline]
fn log_gap<T: Real>(r2: T, one_minus_r2: T, y: T) -> T {
    let p = r2 * (-y).exp();
    if p < lit(0.5) {
        (-p).ln_1p()
    } else {
        (one_minus_r2 - r2 * (-y).exp_m1()).ln()
    }
}

// (r_s², 1 - r_s², r_p², 1 - r_p²) with the complements formed without cancellation.
#[inline]
fn reflectances<T: Real>(chi: T, kappa: T, zeta: T) -> [T; 4] {
    if chi.is_infinite() {
        return [T::one(), T::zero(), T::one(), T::zero()];
    }
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let ratio = zeta / kappa;
    let x = ratio * ratio * chi;
    let q = (T::one() + x).sqrt();
    let opq = T::one() + q;
    let r_s = -x / (opq * opq);
    let omr2_s = four * q / (opq * opq);
    let d = x / opq;
    let denom = two + chi + d;
    let r_p = (chi - d) / denom;
    let eps = T::one() + chi;
    let omr2_p = four * (q / denom) * (eps / denom);
    [r_s * r_s, omr2_s, r_p * r_p, omr2_p]
}

#[inline]
fn limit_reflectances<T: Real>(exp: &LeadingExponent<T>, kappa: T) -> [T; 4] {
    let r = zero_frequency_limits(exp, kappa);
    let c = |v: T| (T::one() - v) * (T::one() + v);
    [r.r_s * r.r_s, c(r.r_s), r.r_p * r.r_p, c(r.r_p)]
}

/// Break points in y for the integral starting at `y0`.
///
/// Panels double from `BASE_PANEL + y0/8` until they reach `MAX_PANEL`, then continue at
/// fixed width up to `y0 + span`.
fn y_breakpoints<T: Real>(y0: T, span: T) -> Vec<T> {
    let mut u = lit::<T>(BASE_PANEL) + y0 / lit(8.0);
    let max_panel = lit::<T>(MAX_PANEL);
    let mut pts = vec![y0];
    let mut prev = T::zero();
    while u < span {
        pts.push(y0 + u);
        let step = (u - prev).max(u).min(max_panel);
        prev = u;
        u = u + step;
    }
    pts.push(y0 + span);
    pts
}

// Fixed Kronrod panels for all components; components whose estimate misses the tolerance
// are redone adaptively from the same break points.
fn integrate_fixed<T, F, const N: usize>(
    mut f: F,
    points: &[T],
    settings: &QuadSettings<T>,
) -> Result<[Quadrature<T>; N]>
where
    T: Real,
    F: FnMut(T) -> [T; N],
{
    let mut value = [NeumaierSum::<T>::new(); N];
    let mut error = [T::zero(); N];
    let mut abs_value = [T::zero(); N];
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let panel = kronrod21_multi(&mut f, w[0], w[1]);
        evaluations += 21;
        for i in 0..N {
            value[i].add(panel[i].value);
            error[i] = error[i] + panel[i].error;
            abs_value[i] = abs_value[i] + panel[i].abs_value;
        }
    }
    let mut out = [Quadrature {
        value: T::zero(),
        error: T::zero(),
        evaluations,
    }; N];
    for i in 0..N {
        let v = value[i].value();
        let floor = lit::<T>(50.0) * T::epsilon() * abs_value[i];
        let tol = settings.abs_tol.max(settings.rel_tol * v.abs()).max(floor);
        if error[i] <= tol {
            out[i].value = v;
            out[i].error = error[i];
        } else {
            let q = integrate(|y| f(y)[i], points, settings)?;
            out[i] = Quadrature {
                value: q.value,
                error: q.error,
                evaluations: evaluations + q.evaluations,
            };
        }
    }
    Ok(out)
}

fn quad_settings<T: Real>(n: &NumericsSettings<T>) -> QuadSettings<T> {
    QuadSettings {
        rel_tol: n.rel_tol,
        abs_tol: n.abs_tol_floor,
        max_depth: n.quadrature_max_depth,
    }
}

fn y_span<T: Real>(rel_tol: T) -> T {
    lit::<T>(60.0).max((T::one() / rel_tol).ln() + lit(20.0))
}

/// Evaluates g_s and g_p for one material and separation.
#[derive(Debug, Clone, Copy)]
pub struct ModeKernel<T> {
    model: PermittivityModel<T>,
    exponent: LeadingExponent<T>,
    separation: T,
    span: T,
    quad: QuadSettings<T>,
}

impl<T: Real> ModeKernel<T> {
    pub fn new(model: PermittivityModel<T>, separation: T, numerics: &NumericsSettings<T>) -> Self {
        Self {
            model,
            exponent: model.classify_exponent(),
            separation,
            span: y_span(numerics.rel_tol),
            quad: quad_settings(numerics),
        }
    }

    pub fn from_config(config: &GapConfiguration<T>) -> Self {
        Self::new(config.material, config.separation, &config.numerics)
    }

    pub fn separation(&self) -> T {
        self.separation
    }

    /// g_s(ζ), g_p(ζ) in (rad/s)²; ζ = 0 uses the zero-frequency limits.
    pub fn eval(&self, zeta: T) -> Result<ModeValues<T>> {
        if !(zeta >= T::zero()) || !zeta.is_finite() {
            return Err(Error::domain("mode_integral", format!("zeta must be finite and >= 0, got {zeta}")));
        }
        let a = self.separation;
        let two_a = a + a;
        let y0 = two_a * zeta;
        let points = y_breakpoints(y0, self.span);
        let [qs, qp] = if zeta == T::zero() {
            let exp = self.exponent;
            integrate_fixed(
                |y: T| {
                    let [rs2, cs, rp2, cp] = limit_reflectances(&exp, y / two_a);
                    [y * log_gap(rs2, cs, y), y * log_gap(rp2, cp, y)]
                },
                &points,
                &self.quad,
            )?
        } else {
            let chi = self.model.susceptibility(zeta)?;
            integrate_fixed(
                |y: T| {
                    let [rs2, cs, rp2, cp] = reflectances(chi, y / two_a, zeta);
                    [y * log_gap(rs2, cs, y), y * log_gap(rp2, cp, y)]
                },
                &points,
                &self.quad,
            )?
        };
        let scale = T::one() / (lit::<T>(4.0) * a * a);
        let te_vanishes = zeta == T::zero()
            && matches!(self.exponent, LeadingExponent::MinusOne | LeadingExponent::Zero { .. });
        let (s, error_s) = if te_vanishes {
            (T::zero(), T::zero())
        } else {
            (qs.value * scale, qs.error * scale)
        };
        Ok(ModeValues {
            s,
            p: qp.value * scale,
            error_s,
            error_p: qp.error * scale,
            evaluations: qs.evaluations.max(qp.evaluations),
        })
    }
}

/// ∫_ζ^∞ dκ κ ln(1 - r_q² e^{-2κa}) per polarisation.
pub fn mode_integral<T: Real>(
    model: &PermittivityModel<T>,
    separation: T,
    zeta: T,
    settings: &NumericsSettings<T>,
) -> Result<ModeValues<T>> {
    if !(separation > T::zero()) {
        return Err(Error::validation("separation_nm", "must be > 0"));
    }
    ModeKernel::new(*model, separation, settings).eval(zeta)
}

/// ∫_ζ^∞ dκ κ ln(1 - R²(κ) e^{-2κa}) for a caller-supplied reflectance R²(κ) ∈ [0, 1].
pub fn reflectance_integral<T, R>(
    separation: T,
    zeta: T,
    reflectance: R,
    settings: &NumericsSettings<T>,
) -> Result<Quadrature<T>>
where
    T: Real,
    R: Fn(T) -> T,
{
    if !(separation > T::zero()) {
        return Err(Error::validation("separation_nm", "must be > 0"));
    }
    if !(zeta >= T::zero()) {
        return Err(Error::domain("reflectance_integral", "zeta must be >= 0"));
    }
    let two_a = separation + separation;
    let points = y_breakpoints(two_a * zeta, y_span(settings.rel_tol));
    let [q] = integrate_fixed(
        |y: T| {
            let r2 = reflectance(y / two_a);
            [y * log_gap(r2, T::one() - r2, y)]
        },
        &points,
        &quad_settings(settings),
    )?;
    let scale = T::one() / (lit::<T>(4.0) * separation * separation);
    Ok(Quadrature {
        value: q.value * scale,
        error: q.error * scale,
        evaluations: q.evaluations,
    })
}

fn require_temperature<T: Real>(config: &GapConfiguration<T>) -> Result<()> {
    if !(config.temperature > T::zero()) {
        return Err(Error::validation(
            "temperature_k",
            "must be > 0 for a Matsubara sum; use the zero-temperature integral instead",
        ));
    }
    Ok(())
}

// Geometric continuation of the last two terms.
fn geometric_tail<T: Real>(prev: T, last: T) -> T {
    if last == T::zero() {
        return T::zero();
    }
    let q = last / prev;
    if prev != T::zero() && q > T::zero() && q < T::one() {
        last * q / (T::one() - q)
    } else {
        last
    }
}

/// F(T) = (T/2π) Σ'_m Σ_q g_q(ζ_m), summed in ascending m.
///
/// Terms are evaluated in parallel chunks and reduced sequentially. The sum stops once
/// ζ_m > 10/(2a), three consecutive terms each fall below `rel_tol`·|partial sum|, and the
/// geometric tail estimate does too.
pub fn free_energy<T: Real>(config: &GapConfiguration<T>) -> Result<FreeEnergyResult<T>> {
    config.validate()?;
    require_temperature(config)?;
    let kernel = ModeKernel::from_config(config);
    let temp = config.temperature;
    let a = config.separation;
    let rel_tol = config.numerics.rel_tol;
    let max_terms = config.numerics.max_matsubara_terms;
    let step = T::TAU() * temp;
    let zeta_floor = lit::<T>(10.0) / (a + a);

    let mut sum_s = NeumaierSum::new();
    let mut sum_p = NeumaierSum::new();
    let mut quad_err = NeumaierSum::new();
    let mut terms: Vec<ModeTerm<T>> = Vec::new();
    let mut small_run = 0usize;
    let mut start = 0usize;
    loop {
        if start >= max_terms {
            let last = terms.last().map(|t| t.value_s + t.value_p).unwrap_or(T::zero());
            return Err(Error::Truncation {
                terms: terms.len(),
                partial: (temp / T::TAU() * (sum_s.value() + sum_p.value())).to_f64_lossy(),
                tail: (temp / T::TAU() * last).abs().to_f64_lossy() * max_terms as f64,
            });
        }
        let end = (start + FREE_ENERGY_CHUNK).min(max_terms);
        let values: Vec<Result<ModeValues<T>>> = (start..end)
            .into_par_iter()
            .map(|m| kernel.eval(step * lit(m as f64)))
            .collect();
        for (m, v) in (start..end).zip(values) {
            let v = v?;
            let zeta_m = step * lit(m as f64);
            let w = if m == 0 { lit::<T>(0.5) } else { T::one() };
            sum_s.add(w * v.s);
            sum_p.add(w * v.p);
            quad_err.add(w * (v.error_s + v.error_p));
            terms.push(ModeTerm {
                m: m as u64,
                zeta_m,
                value_s: v.s,
                value_p: v.p,
                quadrature_error_estimate: v.error_s + v.error_p,
            });
            let partial = (sum_s.value() + sum_p.value()).abs();
            if (w * (v.s + v.p)).abs() < rel_tol * partial {
                small_run += 1;
            } else {
                small_run = 0;
            }
            if small_run >= 3 && zeta_m > zeta_floor {
                let n = terms.len();
                let (prev, last) = (terms[n - 2], terms[n - 1]);
                let tail = PolarisationPair::new(
                    geometric_tail(prev.value_s, last.value_s),
                    geometric_tail(prev.value_p, last.value_p),
                );
                if tail.total().abs() < rel_tol * partial {
                    let pre = temp / T::TAU();
                    let per = PolarisationPair::new(pre * sum_s.value(), pre * sum_p.value());
                    let tail = tail.map(|x| pre * x);
                    return Ok(FreeEnergyResult {
                        temperature: temp,
                        separation: a,
                        total: per.total(),
                        per_polarisation: per,
                        terms,
                        truncation_tail_estimate: tail,
                        error_estimate: pre * quad_err.value().abs() + tail.s.abs() + tail.p.abs(),
                        settings: config.numerics,
                    });
                }
            }
        }
        start = end;
    }
}

fn capture<T: Real>(slot: &RefCell<Option<Error>>, r: Result<T>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => {
            slot.borrow_mut().get_or_insert(e);
            T::nan()
        }
    }
}

/// F(0) = (1/4π²) ∫_0^∞ dζ Σ_q g_q(ζ), by adaptive quadrature over y0 = 2ζa.
pub fn free_energy_zero_t<T: Real>(config: &GapConfiguration<T>) -> Result<Estimate<T>> {
    if !(config.separation > T::zero()) {
        return Err(Error::validation("separation_nm", "must be > 0"));
    }
    config.material.validate()?;
    config.numerics.validate()?;
    let kernel = ModeKernel::from_config(config);
    let two_a = config.separation + config.separation;
    let top = (T::one() / config.numerics.rel_tol).ln() + lit(40.0);
    let mut points = vec![T::zero()];
    let mut y = lit::<T>(2f64.powi(-36));
    while y < lit(8.0) {
        points.push(y);
        y = y + y;
    }
    let mut y = lit::<T>(16.0);
    while y < top {
        points.push(y);
        y = y + lit(8.0);
    }
    points.push(top);

    let failure = RefCell::new(None);
    let cache: RefCell<HashMap<u64, ModeValues<T>>> = RefCell::new(HashMap::new());
    let eval = |y0: T| -> Result<ModeValues<T>> {
        let key = y0.to_f64_lossy().to_bits();
        if let Some(v) = cache.borrow().get(&key) {
            return Ok(*v);
        }
        let v = kernel.eval(y0 / two_a)?;
        cache.borrow_mut().insert(key, v);
        Ok(v)
    };
    let settings = QuadSettings {
        rel_tol: config.numerics.rel_tol,
        abs_tol: T::zero(),
        max_depth: config.numerics.quadrature_max_depth,
    };
    let qs = integrate(|y| capture(&failure, eval(y).map(|v| v.s)), &points, &settings);
    let qp = integrate(|y| capture(&failure, eval(y).map(|v| v.p)), &points, &settings);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (qs, qp) = (qs?, qp?);
    let pre = T::one() / (lit::<T>(4.0) * T::PI() * T::PI() * two_a);
    Ok(Estimate {
        value: PolarisationPair::new(pre * qs.value, pre * qp.value),
        error: PolarisationPair::new(pre * qs.error, pre * qp.error),
    })
}

/// Settings for [`sum_minus_integral`].
#[derive(Debug, Clone, Copy)]
pub struct EulerMaclaurinOptions<T> {
    /// Length in m over which g decays by a factor e (may be infinite).
    pub decay_scale: T,
    /// Terms summed directly before the asymptotic tail.
    pub head_terms: usize,
    /// Relative tolerance of the ∫_0^{1/2} piece.
    pub rel_tol: T,
    pub max_depth: u32,
}

impl<T: Real> Default for EulerMaclaurinOptions<T> {
    fn default() -> Self {
        Self {
            decay_scale: T::infinity(),
            head_terms: DEFAULT_HEAD_TERMS,
            rel_tol: lit(1e-13),
            max_depth: 60,
        }
    }
}

/// Σ'_{m≥0} g(m) - ∫_0^∞ g(m) dm, componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumMinusIntegral<T, const N: usize> {
    pub value: [T; N],
    pub error: [T; N],
    pub evaluations: usize,
}

const CHEB_NODES: usize = 32;
const GL_BLOCK_ORDER: usize = 20;

fn blocks(head: usize, cap: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut m = 1;
    while m < head {
        let len = if m < 16 { 1 } else { (m / 4).min(cap).max(1) };
        let end = (m + len - 1).min(head - 1);
        out.push((m, end));
        m = end + 1;
    }
    out
}

// r-th derivative of T_k at -1.
fn chebyshev_derivative_at_minus_one(k: usize, r: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..r {
        v *= ((k * k) as f64 - (i * i) as f64) / (2 * i + 1) as f64;
    }
    if (k + r) % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Coherent sum-minus-integral of a smooth function on [0, ∞).
///
/// `½g(0) - ∫_0^{1/2} g` is done adaptively, `g(m) - ∫_{cell} g` by Gauss-Legendre over
/// blocks of cells up to `head_terms`, and the remainder from the Euler-Maclaurin midpoint
/// series with derivatives of a Chebyshev fit at m = head_terms - 1/2.
pub fn sum_minus_integral<T, G, const N: usize>(
    g: G,
    opts: &EulerMaclaurinOptions<T>,
) -> Result<SumMinusIntegral<T, N>>
where
    T: Real,
    G: Fn(T) -> Result<[T; N]> + Sync,
{
    let head = opts.head_terms.max(16);
    let cap = if opts.decay_scale.is_finite() {
        (opts.decay_scale * lit(4.0)).to_f64_lossy().clamp(1.0, 1e9) as usize
    } else {
        usize::MAX
    };
    let cells = blocks(head, cap);
    let rule = GaussLegendre::new(GL_BLOCK_ORDER);
    let half = lit::<T>(0.5);

    let x0 = lit::<T>(head as f64) - half;
    let width = (x0 * half).min(opts.decay_scale * lit(8.0));
    let cheb: Vec<T> = (0..CHEB_NODES)
        .map(|j| {
            let t = -(T::PI() * lit(j as f64) / lit((CHEB_NODES - 1) as f64)).cos();
            x0 + (t + T::one()) * half * width
        })
        .collect();

    let mut abscissae: Vec<T> = (0..head).map(|m| lit(m as f64)).collect();
    for &(lo, hi) in &cells {
        abscissae.extend(rule.abscissae(lit::<T>(lo as f64) - half, lit::<T>(hi as f64) + half));
    }
    abscissae.extend(cheb.iter().copied());
    let samples: Vec<[T; N]> = abscissae
        .par_iter()
        .map(|&m| g(m))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = samples.len();
    let ints = &samples[..head];
    let nodes = &samples[head..head + cells.len() * GL_BLOCK_ORDER];
    let cheb_vals = &samples[head + cells.len() * GL_BLOCK_ORDER..];

    let mut value = [T::zero(); N];
    let mut error = [T::zero(); N];
    let failure = RefCell::new(None);
    let cache: RefCell<HashMap<u64, [T; N]>> = RefCell::new(HashMap::new());
    let eval_cached = |m: T| -> Result<[T; N]> {
        let key = m.to_f64_lossy().to_bits();
        if let Some(v) = cache.borrow().get(&key) {
            return Ok(*v);
        }
        let v = g(m)?;
        cache.borrow_mut().insert(key, v);
        Ok(v)
    };
    let half_points: Vec<T> = [0.0, 2f64.powi(-24), 2f64.powi(-16), 2f64.powi(-10), 2f64.powi(-6), 0.125, 0.5]
        .iter()
        .map(|&x| lit::<T>(x))
        .collect();
    let settings = QuadSettings {
        rel_tol: opts.rel_tol,
        abs_tol: T::zero(),
        max_depth: opts.max_depth,
    };

    for i in 0..N {
        let mut acc = NeumaierSum::new();
        let mut magnitude = NeumaierSum::new();
        acc.add(half * ints[0][i]);
        magnitude.add((half * ints[0][i]).abs());
        for (b, &(lo, hi)) in cells.iter().enumerate() {
            let mut block = NeumaierSum::new();
            for v in &ints[lo..=hi] {
                block.add(v[i]);
                magnitude.add(v[i].abs());
            }
            let block_samples: Vec<T> = nodes[b * GL_BLOCK_ORDER..(b + 1) * GL_BLOCK_ORDER]
                .iter()
                .map(|v| v[i])
                .collect();
            let integral = rule.combine(lit::<T>(lo as f64) - half, lit::<T>(hi as f64) + half, &block_samples);
            block.add(-integral);
            acc.add(block.value());
        }

        let q = integrate(|m| capture(&failure, eval_cached(m).map(|v| v[i])), &half_points, &settings);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let q = q?;
        evaluations += q.evaluations;
        acc.add(-q.value);

        let (tail, tail_err) = em_tail(cheb_vals.iter().map(|v| v[i]), width, magnitude.value())?;
        acc.add(tail);
        value[i] = acc.value();
        error[i] = q.error + tail_err + lit::<T>(8.0) * T::epsilon() * magnitude.value();
    }
    Ok(SumMinusIntegral {
        value,
        error,
        evaluations,
    })
}

// Σ_{m≥M} g(m) - ∫_{M-1/2}^∞ g = -Σ_k B_{2k}(1/2)/(2k)! · g^{(2k-1)}(M - 1/2).
fn em_tail<T: Real>(samples: impl Iterator<Item = T>, width: T, head_magnitude: T) -> Result<(T, T)> {
    let f: Vec<T> = samples.collect();
    let n = f.len();
    let peak = f.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if peak == T::zero() || peak < T::epsilon() * lit(1e-3) * head_magnitude {
        return Ok((T::zero(), peak));
    }
    // Chebyshev-Lobatto coefficients; f[j] sits at t_j = -cos(πj/(n-1)).
    let nm1 = (n - 1) as f64;
    let mut coeffs = vec![T::zero(); n];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut s = NeumaierSum::new();
        for (j, &fj) in f.iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            let basis = sign * (std::f64::consts::PI * (k * j) as f64 / nm1).cos();
            s.add(fj * lit(w * basis));
        }
        let mut v = s.value() * lit(2.0 / nm1);
        if k == 0 || k == n - 1 {
            v = v * lit(0.5);
        }
        *c = v;
    }
    let scale = lit::<T>(2.0) / width;
    let mut tail = NeumaierSum::new();
    let mut last = T::zero();
    for k in 1..=4u32 {
        let r = (2 * k - 1) as usize;
        let mut d = NeumaierSum::new();
        for (idx, &c) in coeffs.iter().enumerate() {
            d.add(c * lit(chebyshev_derivative_at_minus_one(idx, r)));
        }
        let deriv = d.value() * scale.powi(r as i32);
        let b = bernoulli::<T>(2 * k)?;
        let factorial: f64 = (1..=(2 * k) as u64).map(|x| x as f64).product();
        let b_half = (lit::<T>(2f64.powi(1 - 2 * k as i32)) - T::one()) * b / lit(factorial);
        last = -b_half * deriv;
        tail.add(last);
    }
    let resolution = (coeffs[n - 1].abs() + coeffs[n - 2].abs()) * scale * lit(nm1 * nm1 / 24.0);
    Ok((tail.value(), last.abs() + resolution))
}

/// ΔF(T) = F(T) - F(0) per polarisation from the coherent sum-minus-integral.
pub fn delta_free_energy<T: Real>(config: &GapConfiguration<T>) -> Result<Estimate<T>> {
    config.validate()?;
    require_temperature(config)?;
    let kernel = ModeKernel::from_config(config);
    let temp = config.temperature;
    let step = T::TAU() * temp;
    let opts = EulerMaclaurinOptions {
        decay_scale: T::one() / (lit::<T>(2.0) * step * config.separation),
        head_terms: DEFAULT_HEAD_TERMS,
        rel_tol: lit(1e-13),
        max_depth: config.numerics.quadrature_max_depth,
    };
    let r = sum_minus_integral(
        |m: T| kernel.eval(step * m).map(|v| [v.s, v.p]),
        &opts,
    )?;
    let pre = temp / T::TAU();
    Ok(Estimate {
        value: PolarisationPair::new(pre * r.value[0], pre * r.value[1]),
        error: PolarisationPair::new(pre * r.error[0], pre * r.error[1]),
    })
}

/// Central-difference entropy with one Richardson step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate<T> {
    pub temperature: T,
    /// Richardson-extrapolated -dF/dT.
    pub value: T,
    /// Central difference with step h.
    pub raw_h: T,
    /// Central difference with step h/2.
    pub raw_half_h: T,
    pub step: T,
    pub error_estimate: T,
    /// Set when the estimated relative error exceeds 1e-3.
    pub precision_warning: bool,
}

/// -dF/dT at `temperature` from `free_energy(T)` returning (value, error bound).
pub fn entropy_from<T, F>(free_energy: F, temperature: T, step: T) -> Result<EntropyEstimate<T>>
where
    T: Real,
    F: Fn(T) -> Result<(T, T)>,
{
    if !(step > T::zero()) || !(temperature - step > T::zero()) {
        return Err(Error::validation(
            "numerics.diff_step_fraction",
            "step must be positive and smaller than the temperature",
        ));
    }
    let two = lit::<T>(2.0);
    let h2 = step / two;
    let (fp, ep) = free_energy(temperature + step)?;
    let (fm, em) = free_energy(temperature - step)?;
    let (fp2, ep2) = free_energy(temperature + h2)?;
    let (fm2, em2) = free_energy(temperature - h2)?;
    let raw_h = -(fp - fm) / (two * step);
    let raw_half_h = -(fp2 - fm2) / (two * h2);
    let value = (lit::<T>(4.0) * raw_half_h - raw_h) / lit(3.0);
    let noise = (ep + em) / (two * step) + (ep2 + em2) / (two * h2);
    let error_estimate = (value - raw_half_h).abs() + noise;
    Ok(EntropyEstimate {
        temperature,
        value,
        raw_h,
        raw_half_h,
        step,
        error_estimate,
        precision_warning: error_estimate > lit::<T>(1e-3) * value.abs(),
    })
}

/// S = -∂F/∂T, differentiating the coherent ΔF (F(0) does not depend on T).
pub fn entropy_numeric<T: Real>(config: &GapConfiguration<T>, step_fraction: T) -> Result<EntropyEstimate<T>> {
    config.validate()?;
    require_temperature(config)?;
    if !(step_fraction > T::zero() && step_fraction < lit(0.5)) {
        return Err(Error::validation(
            "numerics.diff_step_fraction",
            format!("must satisfy 0 < step < 0.5, got {step_fraction}"),
        ));
    }
    let base = *config;
    entropy_from(
        |t| {
            let d = delta_free_energy(&base.with_temperature(t))?;
            Ok((d.total(), d.error.total()))
        },
        config.temperature,
        config.temperature * step_fraction,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;

    fn semiconductor() -> PermittivityModel<f64> {
        PermittivityModel::DrudeSemiconductor {
            eps_bar: 11.66,
            omega0: 8e15,
            sigma: 1e12,
        }
    }

    fn gap(material: PermittivityModel<f64>, t_k: f64) -> GapConfiguration<f64> {
        GapConfiguration::new(units::separation_to_time(1000.0), units::kelvin_to_freq(t_k), material)
    }

    // Σ_{l≥1} x^l / l³, summed until the terms vanish.
    fn li3_series(x: f64) -> f64 {
        let mut s = 0.0;
        let mut c = 0.0;
        let mut p = 1.0;
        for l in 1..20_000_000u64 {
            p *= x;
            let term = p / (l as f64).powi(3);
            let y = term - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
            if term < 1e-22 {
                break;
            }
        }
        s
    }

    #[test]
    fn constant_reflectance_matches_polylog_series() {
        let settings = NumericsSettings::<f64>::default();
        for &r2 in &[0.1, 0.5, 0.9, 0.999] {
            for &a in &[1.0, 3.3e-15] {
                let q = reflectance_integral(a, 0.0, |_| r2, &settings).unwrap();
                let oracle = -li3_series(r2) / (4.0 * a * a);
                assert!((q.value / oracle - 1.0).abs() < 1e-12, "R²={r2} a={a}: {} vs {oracle}", q.value);
            }
        }
        let half = reflectance_integral(1.0, 0.0, |_| 0.5, &settings).unwrap();
        assert!((half.value + 0.134_303_298_402_01).abs() < 1e-13);
        assert_eq!(reflectance_integral(1.0, 0.0, |_| 0.0, &settings).unwrap().value, 0.0);
    }

    #[test]
    fn ideal_metal_static_term() {
        let a = 2.0;
        let v = mode_integral(&PermittivityModel::IdealMetal, a, 0.0, &NumericsSettings::default()).unwrap();
        let oracle = -crate::special::ZETA_3 / (4.0 * a * a);
        assert!((v.s / oracle - 1.0).abs() < 1e-12);
        assert!((v.p / oracle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn te_static_term_vanishes_for_conductor() {
        let v = mode_integral(&semiconductor(), 3.3e-15, 0.0, &NumericsSettings::default()).unwrap();
        assert_eq!(v.s, 0.0);
        let rp2 = (10.66_f64 / 12.66).powi(2);
        // σ > 0 gives r_p = 1 at zero frequency
        let oracle = -crate::special::ZETA_3 / (4.0 * 3.3e-15 * 3.3e-15);
        assert!((v.p / oracle - 1.0).abs() < 1e-12);
        let diel = PermittivityModel::DrudeSemiconductor {
            eps_bar: 11.66,
            omega0: 8e15,
            sigma: 0.0,
        };
        let v = mode_integral(&diel, 1.0, 0.0, &NumericsSettings::default()).unwrap();
        assert!((v.p / (-li3_series(rp2) / 4.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_values_are_non_positive_and_continuous_at_zero() {
        let k = ModeKernel::new(semiconductor(), units::separation_to_time(1000.0), &NumericsSettings::default());
        let at0 = k.eval(0.0).unwrap();
        let near = k.eval(1e-3).unwrap();
        assert!((near.p / at0.p - 1.0).abs() < 1e-6);
        assert!(near.s.abs() < 1e-6 * at0.p.abs());
        for &z in &[1e9, 1e11, 1e12, 1e13, 1e14, 1e15] {
            let v = k.eval(z).unwrap();
            assert!(v.s <= 0.0 && v.p <= 0.0, "ζ={z}");
        }
        assert!(k.eval(-1.0).is_err());
    }

    #[test]
    fn ideal_metal_zero_temperature() {
        let c = gap(PermittivityModel::IdealMetal, 0.0);
        let f0 = free_energy_zero_t(&c).unwrap();
        let a = c.separation;
        let oracle = -std::f64::consts::PI.powi(4) / 720.0 / a.powi(3) / std::f64::consts::PI.powi(2);
        assert!((f0.total() / oracle - 1.0).abs() < 1e-8, "{} vs {oracle}", f0.total());
        assert!((f0.value.s - f0.value.p).abs() < 1e-12 * oracle.abs());
    }

    #[test]
    fn transparent_medium_has_no_energy() {
        let c = gap(PermittivityModel::ConstantDielectric { eps_bar: 1.0 }, 1.0);
        assert_eq!(free_energy_zero_t(&c).unwrap().total(), 0.0);
        assert_eq!(delta_free_energy(&c).unwrap().total(), 0.0);
    }

    #[test]
    fn geometric_oracle() {
        for &t in &[0.01_f64, 0.1, 1.0] {
            let opts = EulerMaclaurinOptions {
                decay_scale: 1.0 / t,
                ..Default::default()
            };
            let r = sum_minus_integral(|m: f64| Ok([(-m * t).exp()]), &opts).unwrap();
            // 1/(1 - e^{-t}) - 1/2 - 1/t through its Bernoulli series
            let b = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];
            let mut oracle = 0.0;
            let mut fact = 1.0;
            for (k, bk) in b.iter().enumerate() {
                let n = 2 * (k + 1);
                fact *= ((n - 1) * n) as f64;
                oracle += bk * t.powi(n as i32 - 1) / fact;
            }
            if t == 1.0 {
                oracle = 1.0 / (1.0 - (-1.0_f64).exp()) - 1.5;
            }
            assert!((r.value[0] - oracle).abs() < 1e-13, "t={t}: {} vs {oracle}", r.value[0]);
        }
    }

    #[test]
    fn power_law_oracle() {
        // g = 1/(1+m)^3: Σ' g - ∫ g = ζ(3) - 1/2 - 1/2
        let r = sum_minus_integral(|m: f64| Ok([(1.0 + m).powi(-3)]), &EulerMaclaurinOptions::default()).unwrap();
        let oracle = crate::special::ZETA_3 - 0.5 - 0.5;
        assert!((r.value[0] - oracle).abs() < 1e-13, "{} vs {oracle}", r.value[0]);
    }

    #[test]
    fn free_energy_breakdown_consistent_and_negative() {
        let c = gap(semiconductor(), 10.0);
        let f = free_energy(&c).unwrap();
        let b = f.breakdown_total();
        assert!((b.total() / f.total - 1.0).abs() < 1e-12);
        assert!(f.total < 0.0);
        assert!(f.terms.iter().all(|t| t.value_s <= 0.0 && t.value_p <= 0.0));
        assert_eq!(f.terms[0].value_s, 0.0);
        for (i, t) in f.terms.iter().enumerate() {
            assert_eq!(t.m, i as u64);
            assert_eq!(t.zeta_m, std::f64::consts::TAU * c.temperature * i as f64);
        }
        let again = free_energy(&c).unwrap();
        assert_eq!(again.total.to_bits(), f.total.to_bits());
    }

    #[test]
    fn coherent_difference_matches_direct_difference() {
        let c = gap(semiconductor(), 10.0);
        let f = free_energy(&c).unwrap();
        let f0 = free_energy_zero_t(&c).unwrap();
        let d = delta_free_energy(&c).unwrap();
        let direct = f.total - f0.total();
        let budget = f.error_estimate + f0.error.total() + d.error.total() + 1e-9 * f.total.abs();
        assert!((direct - d.total()).abs() < budget, "{direct} vs {}", d.total());
    }

    #[test]
    fn difference_vanishes_as_temperature_drops() {
        let c = gap(semiconductor(), 1.0);
        let f0 = free_energy_zero_t(&c).unwrap().total();
        // t = 2πT/σ = 1e-6
        let t_freq = 1e-6 * 1e12 / std::f64::consts::TAU;
        let d = delta_free_energy(&c.with_temperature(t_freq)).unwrap();
        assert!((d.total() / f0).abs() < 1e-12, "{}", d.total() / f0);
    }

    #[test]
    fn ideal_metal_low_temperature_correction() {
        // perfect reflector: ΔF = -ζ(3)T³/2π + π²aT⁴/45 up to terms of order e^{-π/(aT)}
        let c = gap(PermittivityModel::IdealMetal, 30.0);
        let d = delta_free_energy(&c).unwrap();
        let (t, a) = (c.temperature, c.separation);
        let oracle = -crate::special::ZETA_3 * t.powi(3) / std::f64::consts::TAU
            + std::f64::consts::PI.powi(2) * a * t.powi(4) / 45.0;
        assert!((d.total() / oracle - 1.0).abs() < 1e-9, "{} vs {oracle}", d.total());
    }

    #[test]
    fn entropy_of_polynomial() {
        let e = entropy_from(|t: f64| Ok((-3.0 * t * t, 0.0)), 2.0, 2e-3).unwrap();
        assert!((e.value - 12.0).abs() < 1e-9);
        assert!(!e.precision_warning);
        assert!(entropy_from(|t: f64| Ok((t, 0.0)), 1.0, 2.0).is_err());
    }

    #[test]
    fn breakpoints_cover_span() {
        let p = y_breakpoints(0.0_f64, 60.0);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 60.0);
        assert!(p.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 8.0 + 1e-12));
        let q = y_breakpoints(10.0_f64, 60.0);
        assert_eq!(q[0], 10.0);
        assert_eq!(*q.last().unwrap(), 70.0);
    }
}
