//! Permittivity models on the imaginary frequency axis.
//!
//! All frequencies are angular frequencies in rad/s. The semiconductor conductivity is
//! stored as the single number `sigma` = σ^SI/ε0 (which equals 4πσ in Gaussian units), so
//! the conduction term is literally `sigma / ζ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Dielectric response ε(iζ) of a half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PermittivityModel<T> {
    /// ε = 1 + ω_p² / (ζ(ζ + ν))
    DrudeMetal { omega_p: T, nu: T },
    /// ε = 1 + (ε̄ - 1)/(1 + ζ²/ω0²) + sigma/ζ
    DrudeSemiconductor { eps_bar: T, omega0: T, sigma: T },
    ConstantDielectric { eps_bar: T },
    /// ε = 1 + ω_p²/ζ²
    Plasma { omega_p: T },
    /// Perfect reflector: r_p = 1, r_s = -1 at every frequency.
    IdealMetal,
}

/// Leading small-frequency behaviour ε(iζ) ~ ζ^λ, with the data each class needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeadingExponent<T> {
    /// λ = 0: ε → ε̄.
    Zero { eps_bar_limit: T },
    /// λ = -1.
    MinusOne,
    /// λ = -2: ε ~ (ω̃/ζ)².
    MinusTwo { tilde_omega: T },
    /// λ < -2.
    BelowMinusTwo,
}

impl<T: Real> LeadingExponent<T> {
    /// λ as an integer; `None` for the open class λ < -2.
    pub fn lambda(&self) -> Option<i32> {
        match self {
            LeadingExponent::Zero { .. } => Some(0),
            LeadingExponent::MinusOne => Some(-1),
            LeadingExponent::MinusTwo { .. } => Some(-2),
            LeadingExponent::BelowMinusTwo => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LeadingExponent::Zero { .. } => "0",
            LeadingExponent::MinusOne => "-1",
            LeadingExponent::MinusTwo { .. } => "-2",
            LeadingExponent::BelowMinusTwo => "<-2",
        }
    }
}

fn check_nonneg<T: Real>(name: &str, v: T) -> Result<()> {
    if !v.is_finite() || v < T::zero() {
        return Err(Error::validation(name, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl<T: Real> PermittivityModel<T> {
    pub fn name(&self) -> &'static str {
        match self {
            PermittivityModel::DrudeMetal { .. } => "drude_metal",
            PermittivityModel::DrudeSemiconductor { .. } => "drude_semiconductor",
            PermittivityModel::ConstantDielectric { .. } => "constant_dielectric",
            PermittivityModel::Plasma { .. } => "plasma",
            PermittivityModel::IdealMetal => "ideal_metal",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_eps = |v: T| -> Result<()> {
            if !v.is_finite() || v < T::one() {
                return Err(Error::validation("material.eps_bar", format!("must be >= 1, got {v}")));
            }
            Ok(())
        };
        match *self {
            PermittivityModel::DrudeMetal { omega_p, nu } => {
                check_nonneg("material.omega_p_rad_s", omega_p)?;
                check_nonneg("material.nu_rad_s", nu)
            }
            PermittivityModel::DrudeSemiconductor {
                eps_bar,
                omega0,
                sigma,
            } => {
                check_eps(eps_bar)?;
                check_nonneg("material.sigma_over_eps0_per_s", sigma)?;
                check_nonneg("material.omega0_rad_s", omega0)?;
                if omega0 == T::zero() {
                    return Err(Error::validation("material.omega0_rad_s", "must be > 0"));
                }
                Ok(())
            }
            PermittivityModel::ConstantDielectric { eps_bar } => check_eps(eps_bar),
            PermittivityModel::Plasma { omega_p } => check_nonneg("material.omega_p_rad_s", omega_p),
            PermittivityModel::IdealMetal => Ok(()),
        }
    }

    /// ε(iζ) - 1; `+∞` for the ideal metal.
    pub fn susceptibility(&self, zeta: T) -> Result<T> {
        if !(zeta > T::zero()) || !zeta.is_finite() {
            return Err(Error::domain(
                "permittivity",
                format!("frequency must be finite and > 0, got {zeta}"),
            ));
        }
        Ok(match *self {
            PermittivityModel::DrudeMetal { omega_p, nu } => omega_p * omega_p / (zeta * (zeta + nu)),
            PermittivityModel::DrudeSemiconductor {
                eps_bar,
                omega0,
                sigma,
            } => {
                let r = zeta / omega0;
                (eps_bar - T::one()) / (T::one() + r * r) + sigma / zeta
            }
            PermittivityModel::ConstantDielectric { eps_bar } => eps_bar - T::one(),
            PermittivityModel::Plasma { omega_p } => {
                let r = omega_p / zeta;
                r * r
            }
            PermittivityModel::IdealMetal => T::infinity(),
        })
    }

    /// ε(iζ) for ζ > 0.
    pub fn permittivity(&self, zeta: T) -> Result<T> {
        Ok(T::one() + self.susceptibility(zeta)?)
    }

    /// Classifies the ζ → 0 behaviour of ε(iζ).
    pub fn classify_exponent(&self) -> LeadingExponent<T> {
        match *self {
            PermittivityModel::DrudeMetal { omega_p, nu } => {
                if omega_p == T::zero() {
                    LeadingExponent::Zero {
                        eps_bar_limit: T::one(),
                    }
                } else if nu > T::zero() {
                    LeadingExponent::MinusOne
                } else {
                    LeadingExponent::MinusTwo { tilde_omega: omega_p }
                }
            }
            PermittivityModel::DrudeSemiconductor { eps_bar, sigma, .. } => {
                if sigma > T::zero() {
                    LeadingExponent::MinusOne
                } else {
                    LeadingExponent::Zero {
                        eps_bar_limit: eps_bar,
                    }
                }
            }
            PermittivityModel::ConstantDielectric { eps_bar } => LeadingExponent::Zero {
                eps_bar_limit: eps_bar,
            },
            PermittivityModel::Plasma { omega_p } => {
                if omega_p == T::zero() {
                    LeadingExponent::Zero {
                        eps_bar_limit: T::one(),
                    }
                } else {
                    LeadingExponent::MinusTwo { tilde_omega: omega_p }
                }
            }
            PermittivityModel::IdealMetal => LeadingExponent::BelowMinusTwo,
        }
    }

    /// Static dielectric constant ε̄ where the model has one.
    pub fn eps_bar(&self) -> Option<T> {
        match *self {
            PermittivityModel::DrudeSemiconductor { eps_bar, .. }
            | PermittivityModel::ConstantDielectric { eps_bar } => Some(eps_bar),
            _ => None,
        }
    }

    /// Largest intrinsic frequency of the model, used to place quadrature break points.
    pub fn frequency_scale(&self) -> Option<T> {
        match *self {
            PermittivityModel::DrudeMetal { omega_p, nu } => Some(omega_p.max(nu)),
            PermittivityModel::DrudeSemiconductor { omega0, sigma, .. } => Some(omega0.max(sigma)),
            PermittivityModel::Plasma { omega_p } => Some(omega_p),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn semiconductor() -> PermittivityModel<f64> {
        PermittivityModel::DrudeSemiconductor {
            eps_bar: 11.66,
            omega0: 8e15,
            sigma: 1e12,
        }
    }

    fn all_models() -> Vec<PermittivityModel<f64>> {
        vec![
            semiconductor(),
            PermittivityModel::DrudeSemiconductor {
                eps_bar: 11.66,
                omega0: 8e15,
                sigma: 0.0,
            },
            PermittivityModel::DrudeMetal {
                omega_p: 1.37e16,
                nu: 5.3e13,
            },
            PermittivityModel::DrudeMetal {
                omega_p: 1.37e16,
                nu: 0.0,
            },
            PermittivityModel::ConstantDielectric { eps_bar: 2.0 },
            PermittivityModel::Plasma { omega_p: 1.37e16 },
        ]
    }

    #[test]
    fn semiconductor_value_at_sigma() {
        let eps = semiconductor().permittivity(1e12).unwrap();
        let expect = 1.0 + 10.66 / (1.0 + 1e24 / 64e30) + 1.0;
        assert!((eps - expect).abs() < 1e-13);
        assert!((eps - 12.66).abs() < 1e-6);
    }

    #[test]
    fn trivial_values() {
        assert_eq!(
            PermittivityModel::ConstantDielectric { eps_bar: 2.0 }
                .permittivity(123.0)
                .unwrap(),
            2.0
        );
        let omega = 3.0e15_f64;
        let drude = PermittivityModel::DrudeMetal {
            omega_p: omega,
            nu: 0.0,
        };
        assert!((drude.permittivity(omega).unwrap() - 2.0).abs() < 1e-15);
        assert!(PermittivityModel::<f64>::IdealMetal
            .permittivity(1.0)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn nonpositive_frequency_is_a_domain_error() {
        assert!(matches!(
            semiconductor().permittivity(0.0),
            Err(Error::Domain { .. })
        ));
        assert!(semiconductor().permittivity(-1.0).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(semiconductor().classify_exponent(), LeadingExponent::MinusOne);
        assert_eq!(
            PermittivityModel::Plasma { omega_p: 5.0 }.classify_exponent(),
            LeadingExponent::MinusTwo { tilde_omega: 5.0 }
        );
        assert_eq!(
            PermittivityModel::ConstantDielectric { eps_bar: 3.5 }.classify_exponent(),
            LeadingExponent::Zero { eps_bar_limit: 3.5 }
        );
        assert_eq!(
            PermittivityModel::DrudeMetal {
                omega_p: 5.0,
                nu: 0.0
            }
            .classify_exponent(),
            LeadingExponent::MinusTwo { tilde_omega: 5.0 }
        );
        assert_eq!(
            PermittivityModel::<f64>::IdealMetal.classify_exponent(),
            LeadingExponent::BelowMinusTwo
        );
        assert_eq!(
            PermittivityModel::DrudeSemiconductor {
                eps_bar: 4.0,
                omega0: 1.0,
                sigma: 0.0
            }
            .classify_exponent(),
            LeadingExponent::Zero { eps_bar_limit: 4.0 }
        );
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(PermittivityModel::ConstantDielectric { eps_bar: 0.5 }
            .validate()
            .is_err());
        assert!(PermittivityModel::DrudeMetal {
            omega_p: -1.0,
            nu: 0.0
        }
        .validate()
        .is_err());
        assert!(PermittivityModel::DrudeSemiconductor {
            eps_bar: 2.0,
            omega0: 0.0,
            sigma: 1.0
        }
        .validate()
        .is_err());
        for m in all_models() {
            m.validate().unwrap();
        }
    }

    #[test]
    fn monotone_and_at_least_one_on_log_grid() {
        for model in all_models() {
            let mut prev = f64::INFINITY;
            for k in 0..=200 {
                let zeta = 10f64.powf(2.0 + 0.1 * k as f64);
                let eps = model.permittivity(zeta).unwrap();
                assert!(eps >= 1.0, "{model:?} at {zeta}");
                assert!(eps <= prev * (1.0 + 1e-15), "{model:?} not monotone at {zeta}");
                prev = eps;
            }
        }
    }

    #[test]
    fn measured_log_slope_matches_classification() {
        for model in all_models() {
            let lambda = model.classify_exponent().lambda().unwrap() as f64;
            // the frequency below which the leading power takes over
            let reference = match model {
                PermittivityModel::DrudeSemiconductor { sigma, omega0, .. } => {
                    if sigma > 0.0 { sigma } else { omega0 }
                }
                PermittivityModel::DrudeMetal { omega_p, nu } => {
                    if nu > 0.0 { nu } else { omega_p }
                }
                _ => model.frequency_scale().unwrap_or(1.0),
            };
            for k in 6..=9 {
                let z1 = reference * 10f64.powi(-k);
                let z2 = z1 * 1.001;
                let slope = (model.permittivity(z2).unwrap().ln()
                    - model.permittivity(z1).unwrap().ln())
                    / (z2.ln() - z1.ln());
                assert!(
                    (slope - lambda).abs() < 1e-3,
                    "{model:?}: slope {slope} vs λ={lambda} at 1e-{k}"
                );
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let m = PermittivityModel::<f32>::Plasma { omega_p: 2.0 };
        assert!((m.permittivity(1.0).unwrap() - 5.0).abs() < 1e-6);
    }
}
