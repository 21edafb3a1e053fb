//! Fresnel coefficients at imaginary frequency and their zero-frequency limits.

use crate::error::{Error, Result};
use crate::materials::{LeadingExponent, PermittivityModel};
use crate::real::{lit, Real};

/// TE (`r_s`) and TM (`r_p`) reflection amplitudes of one vacuum/medium interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair<T> {
    pub r_s: T,
    pub r_p: T,
}

impl<T: Real> ReflectionPair<T> {
    pub const fn new(r_s: T, r_p: T) -> Self {
        Self { r_s, r_p }
    }

    pub fn ideal_metal() -> Self {
        Self::new(-T::one(), T::one())
    }
}

/// Fresnel coefficients for ε(iζ) = `eps` at transverse-plus-frequency momentum κ ≥ ζ > 0.
pub fn fresnel<T: Real>(eps: T, kappa: T, zeta: T) -> Result<ReflectionPair<T>> {
    if !(zeta > T::zero()) {
        return Err(Error::domain("fresnel", format!("zeta must be > 0, got {zeta}")));
    }
    if kappa < zeta || !kappa.is_finite() {
        return Err(Error::domain(
            "fresnel",
            format!("kappa = {kappa} below zeta = {zeta}; kappa^2 = k_perp^2 + zeta^2 forbids it"),
        ));
    }
    if eps.is_nan() || eps < T::one() {
        return Err(Error::domain("fresnel", format!("eps must be >= 1, got {eps}")));
    }
    Ok(fresnel_from_susceptibility(eps - T::one(), kappa, zeta))
}

/// Same as [`fresnel`] with χ = ε - 1 supplied directly; no argument checks.
///
/// κ̃ = κ·q with q = √(1 + (ζ/κ)²χ), so r_s = -(q² - 1)/(1 + q)² and r_p = (ε - q)/(ε + q).
/// Written this way neither coefficient loses digits when χ is tiny or enormous.
#[inline]
pub fn fresnel_from_susceptibility<T: Real>(chi: T, kappa: T, zeta: T) -> ReflectionPair<T> {
    if chi.is_infinite() {
        return ReflectionPair::ideal_metal();
    }
    let ratio = zeta / kappa;
    let x = ratio * ratio * chi;
    let q = (T::one() + x).sqrt();
    let one_plus_q = T::one() + q;
    let r_s = -x / (one_plus_q * one_plus_q);
    let q_minus_one = x / one_plus_q;
    let r_p = (chi - q_minus_one) / (lit::<T>(2.0) + chi + q_minus_one);
    ReflectionPair::new(r_s, r_p)
}

/// The λ = -2 TE limit r̃_s(κ) = -(κ²/ω̃²)(√(1 + ω̃²/κ²) - 1)², evaluated as -1/(v + √(1 + v²))²
/// with v = κ/ω̃.
pub fn tilde_r_s<T: Real>(kappa: T, tilde_omega: T) -> T {
    let v = kappa / tilde_omega;
    let d = v + (T::one() + v * v).sqrt();
    -T::one() / (d * d)
}

/// ζ → 0 limits of the reflection coefficients for a given leading exponent.
pub fn zero_frequency_limits<T: Real>(exp: &LeadingExponent<T>, kappa: T) -> ReflectionPair<T> {
    match *exp {
        LeadingExponent::Zero { eps_bar_limit } => ReflectionPair::new(
            T::zero(),
            (eps_bar_limit - T::one()) / (eps_bar_limit + T::one()),
        ),
        LeadingExponent::MinusOne => ReflectionPair::new(T::zero(), T::one()),
        LeadingExponent::MinusTwo { tilde_omega } => {
            ReflectionPair::new(tilde_r_s(kappa, tilde_omega), T::one())
        }
        LeadingExponent::BelowMinusTwo => ReflectionPair::ideal_metal(),
    }
}

/// Reflection coefficients of a model at (κ, ζ); ζ = 0 routes through the exponent limits.
pub fn model_reflection<T: Real>(
    model: &PermittivityModel<T>,
    kappa: T,
    zeta: T,
) -> Result<ReflectionPair<T>> {
    if zeta == T::zero() {
        return Ok(zero_frequency_limits(&model.classify_exponent(), kappa));
    }
    let chi = model.susceptibility(zeta)?;
    Ok(fresnel_from_susceptibility(chi, kappa, zeta))
}
