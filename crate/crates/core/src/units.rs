//! Unit conventions.
//!
//! Internally k_B = ħ = c = 1: every frequency-like quantity (ζ, κ·c, k_B T/ħ, σ/ε0) is an
//! angular frequency in rad/s and the plate separation is carried as its light-travel time
//! a/c in seconds, so 2κa is a product of two stored numbers. Free energies per area then
//! come out in (rad/s)³; [`free_energy_to_si`] restores J/m².

use crate::error::{Error, Result};

/// CODATA exact values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// J/K
    pub boltzmann: f64,
    /// J·s
    pub reduced_planck: f64,
    /// m/s
    pub light_speed: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    boltzmann: 1.380_649e-23,
    reduced_planck: 1.054_571_817e-34,
    light_speed: 2.997_924_58e8,
};

/// Parameters as they appear in an SI-unit description of the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiInputs {
    pub separation_nm: f64,
    pub temperature_k: f64,
    pub sigma_over_eps0_per_s: f64,
    pub eps_bar: f64,
    pub omega0_rad_s: f64,
}

/// The same parameters in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalQuantities {
    /// a/c in seconds.
    pub separation_time: f64,
    /// k_B T/ħ in rad/s.
    pub temperature_freq: f64,
    /// σ^SI/ε0 in rad/s (4πσ in Gaussian units).
    pub sigma_freq: f64,
    pub omega0: f64,
    pub omega_p: f64,
    pub eps_bar: f64,
}

fn check(field: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::validation(field, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

pub fn separation_to_time(separation_nm: f64) -> f64 {
    separation_nm * 1e-9 / CONSTANTS.light_speed
}

pub fn time_to_separation_nm(separation_time: f64) -> f64 {
    separation_time * CONSTANTS.light_speed * 1e9
}

pub fn kelvin_to_freq(temperature_k: f64) -> f64 {
    temperature_k * CONSTANTS.boltzmann / CONSTANTS.reduced_planck
}

pub fn freq_to_kelvin(temperature_freq: f64) -> f64 {
    temperature_freq * CONSTANTS.reduced_planck / CONSTANTS.boltzmann
}

pub fn to_natural(si: &SiInputs) -> Result<NaturalQuantities> {
    check("separation_nm", si.separation_nm)?;
    if si.separation_nm == 0.0 {
        return Err(Error::validation("separation_nm", "must be > 0"));
    }
    check("temperature_k", si.temperature_k)?;
    check("sigma_over_eps0_per_s", si.sigma_over_eps0_per_s)?;
    check("eps_bar", si.eps_bar)?;
    check("omega0_rad_s", si.omega0_rad_s)?;
    Ok(NaturalQuantities {
        separation_time: separation_to_time(si.separation_nm),
        temperature_freq: kelvin_to_freq(si.temperature_k),
        sigma_freq: si.sigma_over_eps0_per_s,
        omega0: si.omega0_rad_s,
        omega_p: 0.0,
        eps_bar: si.eps_bar,
    })
}

pub fn to_si(nat: &NaturalQuantities) -> SiInputs {
    SiInputs {
        separation_nm: time_to_separation_nm(nat.separation_time),
        temperature_k: freq_to_kelvin(nat.temperature_freq),
        sigma_over_eps0_per_s: nat.sigma_freq,
        eps_bar: nat.eps_bar,
        omega0_rad_s: nat.omega0,
    }
}

/// ħ f / c²: free energy per area from (rad/s)³ to J/m².
pub fn free_energy_to_si(f_natural: f64) -> f64 {
    CONSTANTS.reduced_planck / (CONSTANTS.light_speed * CONSTANTS.light_speed) * f_natural
}

/// Entropy per area from (rad/s)² to J/(K·m²): S = -∂F/∂T with T = k_B T_K/ħ.
pub fn entropy_to_si(s_natural: f64) -> f64 {
    CONSTANTS.boltzmann / (CONSTANTS.light_speed * CONSTANTS.light_speed) * s_natural
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn silicon_inputs(t: f64) -> SiInputs {
        SiInputs {
            separation_nm: 1000.0,
            temperature_k: t,
            sigma_over_eps0_per_s: 1e12,
            eps_bar: 11.66,
            omega0_rad_s: 8e15,
        }
    }

    #[test]
    fn separation_and_temperature() {
        let n = to_natural(&silicon_inputs(300.0)).unwrap();
        assert!((n.separation_time - 1e-6 / 2.997_924_58e8).abs() < 1e-27);
        assert!((n.separation_time - 3.335_640_95e-15).abs() < 1e-23);
        let expect = 1.380_649e-23 * 300.0 / 1.054_571_817e-34;
        assert!((n.temperature_freq - expect).abs() < 1e-3);
        assert!((n.temperature_freq / 3.9280e13 - 1.0).abs() < 1e-4);
        assert_eq!(n.sigma_freq, 1e12);
        assert_eq!(to_natural(&silicon_inputs(0.0)).unwrap().temperature_freq, 0.0);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut s = silicon_inputs(1.0);
        s.temperature_k = -1.0;
        match to_natural(&s) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "temperature_k"),
            other => panic!("{other:?}"),
        }
        let mut s = silicon_inputs(1.0);
        s.separation_nm = 0.0;
        assert!(to_natural(&s).is_err());
        let mut s = silicon_inputs(1.0);
        s.eps_bar = f64::NAN;
        assert!(to_natural(&s).is_err());
    }

    #[test]
    fn free_energy_scaling() {
        assert_eq!(free_energy_to_si(0.0), 0.0);
        let unit = free_energy_to_si(1.0);
        let expect = 1.054_571_817e-34 / (2.997_924_58e8_f64 * 2.997_924_58e8);
        assert!((unit - expect).abs() < 1e-64);
        assert!((unit / 1.173_37e-51 - 1.0).abs() < 1e-5);
        // ideal-metal Casimir energy at 1 µm: -π²ħc/(720 a³)
        let a = separation_to_time(1000.0);
        let f_nat = -std::f64::consts::PI.powi(2) / 720.0 / a.powi(3);
        let si = free_energy_to_si(f_nat);
        let direct = -std::f64::consts::PI.powi(2) * 1.054_571_817e-34 * 2.997_924_58e8 / 720.0 / 1e-18;
        assert!((si / direct - 1.0).abs() < 1e-14);
        assert!((si + 4.334e-10).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip(a in 1.0_f64..1e5, t in 0.0_f64..1e3, s in 0.0_f64..1e16,
                      e in 1.0_f64..100.0, w in 0.0_f64..1e17) {
            let si = SiInputs { separation_nm: a, temperature_k: t, sigma_over_eps0_per_s: s,
                                eps_bar: e, omega0_rad_s: w };
            let back = to_si(&to_natural(&si).unwrap());
            let rel = |x: f64, y: f64| if y == 0.0 { x.abs() } else { ((x - y) / y).abs() };
            prop_assert!(rel(back.separation_nm, a) <= 1e-14);
            prop_assert!(rel(back.temperature_k, t) <= 1e-14);
            prop_assert_eq!(back.sigma_over_eps0_per_s, s);
        }

        #[test]
        fn free_energy_conversion_is_linear(x in -1e45_f64..1e45, k in -10.0_f64..10.0) {
            let lhs = free_energy_to_si(k * x);
            let rhs = k * free_energy_to_si(x);
            prop_assert!((lhs - rhs).abs() <= 1e-15 * rhs.abs().max(1e-300));
        }
    }
}
