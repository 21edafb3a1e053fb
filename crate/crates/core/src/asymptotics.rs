//! Low-temperature corrections and residual entropies in closed form.
//!
//! With the Matsubara sum written as ΔF_q = T f_q [Σ' g_q(μ_m) - ∫ g_q dμ/t], μ_m = m t and
//! t = 2πT/σ (σ the conductivity over ε0, i.e. 4πσ in Gaussian units), an expansion
//! g = c0 + c1 μ + c_{3/2} μ^{3/2} + c_{2l} μ² ln μ + c2 μ² + c3 μ³ + ... gives
//!
//! ΔF_q = T f_q [ -c1 t/12 + ζ(-3/2) c_{3/2} t^{3/2} + ζ(3) c_{2l} t²/(4π²) + c3 t³/120 ].

use crate::config::{GapConfiguration, NumericsSettings};
use crate::error::{Error, Result};
use crate::lifshitz::reflectance_integral;
use crate::materials::{LeadingExponent, PermittivityModel};
use crate::real::{lit, Real};
use crate::reflection::{tilde_r_s, zero_frequency_limits, ReflectionPair};
use crate::special::{polylog, zeta_minus_three_halves, ZETA_3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarisation {
    /// TE
    S,
    /// TM
    P,
}

/// Small-μ expansion coefficients of g_q(μ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCoefficients<T> {
    pub c0: T,
    pub c1: T,
    pub c_three_halves: T,
    pub c2_log: T,
    pub c2: T,
    pub c3: T,
    pub polarisation: Polarisation,
}

impl<T: Real> AsymptoticCoefficients<T> {
    pub fn zero(polarisation: Polarisation) -> Self {
        Self {
            c0: T::zero(),
            c1: T::zero(),
            c_three_halves: T::zero(),
            c2_log: T::zero(),
            c2: T::zero(),
            c3: T::zero(),
            polarisation,
        }
    }
}

/// Thresholds for the small-parameter checks.
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;

/// Which small-parameter assumptions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidityFlags {
    pub t_small: bool,
    pub alpha_small: bool,
    pub sigma_a_small: bool,
}

impl ValidityFlags {
    pub fn all(&self) -> bool {
        self.t_small && self.alpha_small && self.sigma_a_small
    }

    /// Warning tokens for the assumptions that fail.
    pub fn warnings(&self) -> Vec<&'static str> {
        let mut w = Vec::new();
        if !self.t_small {
            w.push("t_not_small");
        }
        if !self.alpha_small {
            w.push("alpha_not_small");
        }
        if !self.sigma_a_small {
            w.push("sigma_a_not_small");
        }
        w
    }
}

/// t = 2πT/σ and α = 2aσ for conductivity σ (rad/s), temperature T (rad/s), separation a (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledTemperature<T> {
    pub t: T,
    pub alpha: T,
    /// T0 = σ/2π, so that t = T/T0.
    pub t0: T,
    pub sigma_a: T,
}

impl<T: Real> RescaledTemperature<T> {
    pub fn new(temperature: T, sigma: T, separation: T) -> Self {
        let t0 = sigma / T::TAU();
        Self {
            t: temperature / t0,
            alpha: lit::<T>(2.0) * separation * sigma,
            t0,
            sigma_a: sigma * separation,
        }
    }

    pub fn mu_of(&self, m: T) -> T {
        m * self.t
    }

    pub fn flags(&self, threshold: T) -> ValidityFlags {
        ValidityFlags {
            t_small: self.t < threshold,
            alpha_small: self.alpha < threshold,
            sigma_a_small: self.sigma_a < threshold,
        }
    }
}

/// Prefactors f_p = 1/(8πa²) and f_s = σ²/(2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePrefactor<T> {
    pub f_p: T,
    pub f_s: T,
}

impl<T: Real> ModePrefactor<T> {
    pub fn new(sigma: T, separation: T) -> Self {
        Self {
            f_p: T::one() / (lit::<T>(8.0) * T::PI() * separation * separation),
            f_s: sigma * sigma / T::TAU(),
        }
    }

    pub fn get(&self, q: Polarisation) -> T {
        match q {
            Polarisation::S => self.f_s,
            Polarisation::P => self.f_p,
        }
    }
}

/// The four contributions to an assembled correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionTerms<T> {
    pub linear: T,
    pub three_halves: T,
    pub log: T,
    pub cubic: T,
}

impl<T: Real> CorrectionTerms<T> {
    pub fn total(&self) -> T {
        self.linear + self.three_halves + self.log + self.cubic
    }
}

/// T f_q [-c1 t/12 + ζ(-3/2) c_{3/2} t^{3/2} + ζ(3) c_{2l} t²/(4π²) + c3 t³/120]; `prefactor` is T f_q.
pub fn assemble_correction<T: Real>(
    coeffs: &AsymptoticCoefficients<T>,
    t: T,
    prefactor: T,
) -> CorrectionTerms<T> {
    let pi = T::PI();
    CorrectionTerms {
        linear: prefactor * (-coeffs.c1 * t / lit(12.0)),
        three_halves: prefactor * zeta_minus_three_halves::<T>() * coeffs.c_three_halves * t * t.sqrt(),
        log: prefactor * lit::<T>(ZETA_3) * coeffs.c2_log * t * t / (lit::<T>(4.0) * pi * pi),
        cubic: prefactor * coeffs.c3 * t * t * t / lit(120.0),
    }
}

/// TM coefficients to leading order in α: c1 = 2π²/3, c_{2l} = 8. ε̄ drops out at this order.
pub fn tm_coefficients<T: Real>(_alpha: T, _eps_bar: T) -> AsymptoticCoefficients<T> {
    AsymptoticCoefficients {
        c1: lit::<T>(2.0) * T::PI() * T::PI() / lit(3.0),
        c2_log: lit(8.0),
        ..AsymptoticCoefficients::zero(Polarisation::P)
    }
}

/// TE coefficients: c1 = -(2 ln 2 - 1)/4, c_{2l} = -1/4, c_{3/2} = α/12.
///
/// The -ζ(3)T³/8π term of the TE correction is carried by c_{2l}: with f_s = σ²/2π the slot
/// ζ(3) c_{2l} t²/(4π²) times T f_s is exactly -ζ(3)T³/8π, so c3 stays 0.
pub fn te_coefficients<T: Real>(alpha: T) -> AsymptoticCoefficients<T> {
    AsymptoticCoefficients {
        c1: -(lit::<T>(2.0) * T::LN_2() - T::one()) / lit(4.0),
        c_three_halves: alpha / lit(12.0),
        c2_log: lit(-0.25),
        ..AsymptoticCoefficients::zero(Polarisation::S)
    }
}

/// A closed-form correction split by power of T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm<T> {
    pub t2: T,
    pub t5_2: T,
    pub t3: T,
    pub flags: ValidityFlags,
}

impl<T: Real> ClosedForm<T> {
    pub fn total(&self) -> T {
        self.t2 + self.t5_2 + self.t3
    }
}

impl ClosedForm<f64> {
    pub fn to_si(&self) -> ClosedForm<f64> {
        let c = crate::units::free_energy_to_si;
        ClosedForm {
            t2: c(self.t2),
            t5_2: c(self.t5_2),
            t3: c(self.t3),
            flags: self.flags,
        }
    }
}

fn flags<T: Real>(temperature: T, sigma: T, separation: T) -> ValidityFlags {
    RescaledTemperature::new(temperature, sigma, separation).flags(lit(DEFAULT_VALIDITY_THRESHOLD))
}

/// ΔF_p = -π²T²/(72 σ a²) + ζ(3)T³/(π σ² a²).
pub fn delta_f_tm<T: Real>(temperature: T, sigma: T, separation: T) -> ClosedForm<T> {
    let pi = T::PI();
    let a2 = separation * separation;
    let t2 = temperature * temperature;
    ClosedForm {
        t2: -pi * pi * t2 / (lit::<T>(72.0) * sigma * a2),
        t5_2: T::zero(),
        t3: lit::<T>(ZETA_3) * t2 * temperature / (pi * sigma * sigma * a2),
        flags: flags(temperature, sigma, separation),
    }
}

/// ΔF_s = σT²(2 ln 2 - 1)/48 + √(2π) ζ(-3/2) a σ^{3/2} T^{5/2}/6 - ζ(3)T³/(8π).
pub fn delta_f_te<T: Real>(temperature: T, sigma: T, separation: T) -> ClosedForm<T> {
    let pi = T::PI();
    let t2 = temperature * temperature;
    ClosedForm {
        t2: sigma * t2 * (lit::<T>(2.0) * T::LN_2() - T::one()) / lit(48.0),
        t5_2: T::TAU().sqrt() * zeta_minus_three_halves::<T>() * separation * sigma * sigma.sqrt()
            * t2
            * temperature.sqrt()
            / lit(6.0),
        t3: -lit::<T>(ZETA_3) * t2 * temperature / (lit::<T>(8.0) * pi),
        flags: flags(temperature, sigma, separation),
    }
}

/// -∂(ΔF_p + ΔF_s)/∂T from the closed forms.
pub fn entropy_closed_form<T: Real>(temperature: T, sigma: T, separation: T) -> T {
    let tm = delta_f_tm(temperature, sigma, separation);
    let te = delta_f_te(temperature, sigma, separation);
    -(lit::<T>(2.0) * (tm.t2 + te.t2) + lit::<T>(2.5) * te.t5_2 + lit::<T>(3.0) * (tm.t3 + te.t3))
        / temperature
}

/// Conductivity σ/ε0 of a configuration (only the semiconductor model has one).
pub fn conductivity<T: Real>(material: &PermittivityModel<T>) -> Result<T> {
    match *material {
        PermittivityModel::DrudeSemiconductor { sigma, .. } if sigma > T::zero() => Ok(sigma),
        _ => Err(Error::validation(
            "material",
            "closed-form corrections need a drude_semiconductor with sigma_over_eps0_per_s > 0",
        )),
    }
}

/// Both closed forms for a configuration; ε̄ and ω0 are not used.
pub fn closed_form_corrections<T: Real>(config: &GapConfiguration<T>) -> Result<(ClosedForm<T>, ClosedForm<T>)> {
    let sigma = conductivity(&config.material)?;
    Ok((
        delta_f_te(config.temperature, sigma, config.separation),
        delta_f_tm(config.temperature, sigma, config.separation),
    ))
}

/// S = (1/4π) Σ_q ∫_0^∞ dκ κ ln[(1 - R_q²(λ2) e^{-2κa}) / (1 - R_q²(λ1) e^{-2κa})].
pub fn residual_entropy_general<T, F1, F2>(
    from: F1,
    to: F2,
    separation: T,
    settings: &NumericsSettings<T>,
) -> Result<T>
where
    T: Real,
    F1: Fn(T) -> ReflectionPair<T>,
    F2: Fn(T) -> ReflectionPair<T>,
{
    let integral = |f: &dyn Fn(T) -> T| reflectance_integral(separation, T::zero(), f, settings).map(|q| q.value);
    let s2 = integral(&|k| sq(to(k).r_s))?;
    let s1 = integral(&|k| sq(from(k).r_s))?;
    let p2 = integral(&|k| sq(to(k).r_p))?;
    let p1 = integral(&|k| sq(from(k).r_p))?;
    Ok(((s2 - s1) + (p2 - p1)) / (lit::<T>(4.0) * T::PI()))
}

fn sq<T: Real>(x: T) -> T {
    x * x
}

/// S = (1/16πa²) Σ_q [Li3(R_q²(λ1)) - Li3(R_q²(λ2))] for constant limits.
pub fn residual_entropy_closed<T: Real>(
    from: ReflectionPair<T>,
    to: ReflectionPair<T>,
    separation: T,
) -> Result<T> {
    for r in [from.r_s, from.r_p, to.r_s, to.r_p] {
        if !(r.abs() <= T::one()) {
            return Err(Error::domain("residual_entropy_closed", format!("|R| must be <= 1, got {r}")));
        }
    }
    let li = |r: T| polylog(3, r * r);
    let sum = (li(from.r_s)? - li(to.r_s)?) + (li(from.r_p)? - li(to.r_p)?);
    Ok(sum / (lit::<T>(16.0) * T::PI() * separation * separation))
}

/// The modified-ideal-metal entropy -ζ(3)/(16πa²).
pub fn modified_ideal_metal_entropy<T: Real>(separation: T) -> T {
    -lit::<T>(ZETA_3) / (lit::<T>(16.0) * T::PI() * separation * separation)
}

/// Residual entropy of the λ = -1 → -2 transition at ω̃a, relative to its ω̃ → ∞ value.
pub fn mim_limit_check<T: Real>(tilde_omega_times_a: T) -> Result<T> {
    if !(tilde_omega_times_a > T::zero()) {
        return Err(Error::validation("tilde_omega_times_a", "must be > 0"));
    }
    let a = T::one();
    let settings = NumericsSettings::<T> {
        rel_tol: lit(1e-12),
        ..Default::default()
    };
    let s = residual_entropy_general(
        |_| ReflectionPair::new(T::zero(), T::one()),
        |k| ReflectionPair::new(tilde_r_s(k, tilde_omega_times_a), T::one()),
        a,
        &settings,
    )?;
    Ok(s / modified_ideal_metal_entropy(a))
}

/// Zero-frequency class for a leading exponent λ ∈ {0, -1, -2, -3}, with the data it needs.
pub fn exponent_from_lambda<T: Real>(lambda: i32, eps_bar: T, tilde_omega: T) -> Result<LeadingExponent<T>> {
    match lambda {
        0 => Ok(LeadingExponent::Zero { eps_bar_limit: eps_bar }),
        -1 => Ok(LeadingExponent::MinusOne),
        -2 => Ok(LeadingExponent::MinusTwo { tilde_omega }),
        l if l < -2 => Ok(LeadingExponent::BelowMinusTwo),
        l => Err(Error::validation("transition", format!("unsupported exponent {l}; expected 0, -1, -2 or below"))),
    }
}

/// Residual entropy for a jump of the leading exponent from `from` to `to` as T → 0.
pub fn residual_entropy_transition<T: Real>(
    from: LeadingExponent<T>,
    to: LeadingExponent<T>,
    separation: T,
    settings: &NumericsSettings<T>,
) -> Result<T> {
    let constant = |e: &LeadingExponent<T>| !matches!(e, LeadingExponent::MinusTwo { .. });
    if constant(&from) && constant(&to) {
        residual_entropy_closed(
            zero_frequency_limits(&from, T::one()),
            zero_frequency_limits(&to, T::one()),
            separation,
        )
    } else {
        residual_entropy_general(
            |k| zero_frequency_limits(&from, k),
            |k| zero_frequency_limits(&to, k),
            separation,
            settings,
        )
    }
}
