//! Run configuration and its JSON schema.
//!
//! ```json
//! {"separation_nm": 1000, "temperature_k": 0.5,
//!  "material": {"type": "drude_semiconductor", "eps_bar": 11.66,
//!               "omega0_rad_s": 8e15, "sigma_over_eps0_per_s": 1e12},
//!  "numerics": {"rel_tol": 1e-10}}
//! ```

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::materials::PermittivityModel;
use crate::real::Real;
use crate::units;

pub const SUPPORTED_MATERIALS: [&str; 5] = [
    "drude_semiconductor",
    "drude_metal",
    "constant_dielectric",
    "plasma",
    "ideal_metal",
];

/// Tolerances and limits for the numerics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsSettings<T> {
    pub rel_tol: T,
    /// Absolute quadrature floor, in units of 1/(4a²) (the scale of a κ-integral).
    pub abs_tol_floor: T,
    pub max_matsubara_terms: usize,
    pub quadrature_max_depth: u32,
    /// Finite-difference step for the entropy, as a fraction of T.
    pub diff_step_fraction: T,
}

impl<T: Real> Default for NumericsSettings<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol_floor: T::lit(1e-30),
            max_matsubara_terms: 200_000,
            quadrature_max_depth: 60,
            diff_step_fraction: T::lit(1e-3),
        }
    }
}

impl<T: Real> NumericsSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= T::epsilon() && self.rel_tol < T::lit(1e-2)) {
            return Err(Error::validation(
                "numerics.rel_tol",
                format!("must satisfy machine epsilon <= rel_tol < 1e-2, got {}", self.rel_tol),
            ));
        }
        if !(self.abs_tol_floor >= T::zero()) || !self.abs_tol_floor.is_finite() {
            return Err(Error::validation("numerics.abs_tol_floor", "must be finite and >= 0"));
        }
        if self.max_matsubara_terms < 16 {
            return Err(Error::validation(
                "numerics.max_matsubara_terms",
                format!("must be >= 16, got {}", self.max_matsubara_terms),
            ));
        }
        if self.quadrature_max_depth == 0 {
            return Err(Error::validation("numerics.quadrature_max_depth", "must be >= 1"));
        }
        if !(self.diff_step_fraction > T::zero() && self.diff_step_fraction < T::lit(0.5)) {
            return Err(Error::validation(
                "numerics.diff_step_fraction",
                "must satisfy 0 < diff_step_fraction < 0.5",
            ));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> NumericsSettings<U> {
        NumericsSettings {
            rel_tol: U::lit(self.rel_tol.to_f64_lossy()),
            abs_tol_floor: U::lit(self.abs_tol_floor.to_f64_lossy()),
            max_matsubara_terms: self.max_matsubara_terms,
            quadrature_max_depth: self.quadrature_max_depth,
            diff_step_fraction: U::lit(self.diff_step_fraction.to_f64_lossy()),
        }
    }
}

/// One gap evaluation: two identical half-spaces at separation `a`, temperature `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapConfiguration<T> {
    /// a/c in seconds.
    pub separation: T,
    /// k_B T/ħ in rad/s.
    pub temperature: T,
    pub material: PermittivityModel<T>,
    pub numerics: NumericsSettings<T>,
}

impl<T: Real> GapConfiguration<T> {
    pub fn new(separation: T, temperature: T, material: PermittivityModel<T>) -> Self {
        Self {
            separation,
            temperature,
            material,
            numerics: NumericsSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation > T::zero()) || !self.separation.is_finite() {
            return Err(Error::validation("separation_nm", "must be finite and > 0"));
        }
        if !(self.temperature >= T::zero()) || !self.temperature.is_finite() {
            return Err(Error::validation("temperature_k", "must be finite and >= 0"));
        }
        self.material.validate()?;
        self.numerics.validate()
    }

    pub fn with_temperature(mut self, temperature: T) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_material(mut self, material: PermittivityModel<T>) -> Self {
        self.material = material;
        self
    }
}

impl GapConfiguration<f64> {
    pub fn separation_nm(&self) -> f64 {
        units::time_to_separation_nm(self.separation)
    }

    pub fn temperature_k(&self) -> f64 {
        units::freq_to_kelvin(self.temperature)
    }

    pub fn with_temperature_k(self, temperature_k: f64) -> Self {
        self.with_temperature(units::kelvin_to_freq(temperature_k))
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn schema_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn get_number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(other) => Err(schema_error(
            path,
            format!("expected number, found {}", type_name(other)),
        )),
    }
}

fn get_count(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<u64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => n
            .as_u64()
            .map(Some)
            .ok_or_else(|| schema_error(path, format!("expected non-negative integer, found {n}"))),
        Some(other) => Err(schema_error(
            path,
            format!("expected integer, found {}", type_name(other)),
        )),
    }
}

fn require(v: Option<f64>, path: &str) -> Result<f64> {
    v.ok_or_else(|| schema_error(path, format!("{path} required")))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let path = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}.{key}")
            };
            return Err(schema_error(&path, format!("unknown key; expected one of {allowed:?}")));
        }
    }
    Ok(())
}

fn parse_material(value: &Value) -> Result<PermittivityModel<f64>> {
    let obj = value.as_object().ok_or_else(|| {
        schema_error("material", format!("expected object, found {}", type_name(value)))
    })?;
    reject_unknown(
        obj,
        &[
            "type",
            "eps_bar",
            "omega0_rad_s",
            "sigma_over_eps0_per_s",
            "omega_p_rad_s",
            "nu_rad_s",
        ],
        "material",
    )?;
    let kind = match obj.get("type") {
        None | Some(Value::Null) => return Err(schema_error("material.type", "material.type required")),
        Some(Value::String(s)) => s.as_str(),
        Some(other) => {
            return Err(schema_error(
                "material.type",
                format!("expected string, found {}", type_name(other)),
            ))
        }
    };
    let num = |key: &str| get_number(obj, key, &format!("material.{key}"));
    let req = |key: &str| require(num(key)?, &format!("material.{key}"));
    let model = match kind {
        "drude_semiconductor" => PermittivityModel::DrudeSemiconductor {
            eps_bar: req("eps_bar")?,
            omega0: req("omega0_rad_s")?,
            sigma: req("sigma_over_eps0_per_s")?,
        },
        "drude_metal" => PermittivityModel::DrudeMetal {
            omega_p: req("omega_p_rad_s")?,
            nu: num("nu_rad_s")?.unwrap_or(0.0),
        },
        "constant_dielectric" => PermittivityModel::ConstantDielectric {
            eps_bar: req("eps_bar")?,
        },
        "plasma" => PermittivityModel::Plasma {
            omega_p: req("omega_p_rad_s")?,
        },
        "ideal_metal" => PermittivityModel::IdealMetal,
        other => {
            return Err(schema_error(
                "material.type",
                format!(
                    "unknown material type {other:?}; supported types: {}",
                    SUPPORTED_MATERIALS.join(", ")
                ),
            ))
        }
    };
    model.validate()?;
    Ok(model)
}

fn parse_numerics(value: Option<&Value>) -> Result<NumericsSettings<f64>> {
    let mut settings = NumericsSettings::<f64>::default();
    let obj = match value {
        None | Some(Value::Null) => return Ok(settings),
        Some(Value::Object(o)) => o,
        Some(other) => {
            return Err(schema_error(
                "numerics",
                format!("expected object, found {}", type_name(other)),
            ))
        }
    };
    reject_unknown(
        obj,
        &[
            "rel_tol",
            "abs_tol_floor",
            "max_matsubara_terms",
            "quadrature_max_depth",
            "diff_step_fraction",
        ],
        "numerics",
    )?;
    if let Some(v) = get_number(obj, "rel_tol", "numerics.rel_tol")? {
        settings.rel_tol = v;
    }
    if let Some(v) = get_number(obj, "abs_tol_floor", "numerics.abs_tol_floor")? {
        settings.abs_tol_floor = v;
    }
    if let Some(v) = get_count(obj, "max_matsubara_terms", "numerics.max_matsubara_terms")? {
        settings.max_matsubara_terms = v as usize;
    }
    if let Some(v) = get_count(obj, "quadrature_max_depth", "numerics.quadrature_max_depth")? {
        settings.quadrature_max_depth = u32::try_from(v)
            .map_err(|_| schema_error("numerics.quadrature_max_depth", "value too large"))?;
    }
    if let Some(v) = get_number(obj, "diff_step_fraction", "numerics.diff_step_fraction")? {
        settings.diff_step_fraction = v;
    }
    settings.validate()?;
    Ok(settings)
}

/// Parses the JSON run configuration, applying defaults for absent numerics fields.
pub fn parse_config(text: &str) -> Result<GapConfiguration<f64>> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| schema_error("<document>", format!("invalid JSON: {e}")))?;
    let root = doc.as_object().ok_or_else(|| {
        schema_error("<document>", format!("expected object, found {}", type_name(&doc)))
    })?;
    reject_unknown(root, &["separation_nm", "temperature_k", "material", "numerics"], "")?;
    let separation_nm = require(get_number(root, "separation_nm", "separation_nm")?, "separation_nm")?;
    let temperature_k = require(get_number(root, "temperature_k", "temperature_k")?, "temperature_k")?;
    let material = match root.get("material") {
        None | Some(Value::Null) => return Err(schema_error("material.type", "material.type required")),
        Some(v) => parse_material(v)?,
    };
    let numerics = parse_numerics(root.get("numerics"))?;
    let si = units::SiInputs {
        separation_nm,
        temperature_k,
        sigma_over_eps0_per_s: 0.0,
        eps_bar: 1.0,
        omega0_rad_s: 0.0,
    };
    let natural = units::to_natural(&si)?;
    let config = GapConfiguration {
        separation: natural.separation_time,
        temperature: natural.temperature_freq,
        material,
        numerics,
    };
    config.validate()?;
    Ok(config)
}

/// Serializes a configuration back into the JSON schema.
pub fn config_to_json(config: &GapConfiguration<f64>) -> Value {
    let mut material = Map::new();
    material.insert("type".into(), Value::from(config.material.name()));
    match config.material {
        PermittivityModel::DrudeSemiconductor {
            eps_bar,
            omega0,
            sigma,
        } => {
            material.insert("eps_bar".into(), Value::from(eps_bar));
            material.insert("omega0_rad_s".into(), Value::from(omega0));
            material.insert("sigma_over_eps0_per_s".into(), Value::from(sigma));
        }
        PermittivityModel::DrudeMetal { omega_p, nu } => {
            material.insert("omega_p_rad_s".into(), Value::from(omega_p));
            material.insert("nu_rad_s".into(), Value::from(nu));
        }
        PermittivityModel::ConstantDielectric { eps_bar } => {
            material.insert("eps_bar".into(), Value::from(eps_bar));
        }
        PermittivityModel::Plasma { omega_p } => {
            material.insert("omega_p_rad_s".into(), Value::from(omega_p));
        }
        PermittivityModel::IdealMetal => {}
    }
    let n = &config.numerics;
    serde_json::json!({
        "separation_nm": config.separation_nm(),
        "temperature_k": config.temperature_k(),
        "material": Value::Object(material),
        "numerics": {
            "rel_tol": n.rel_tol,
            "abs_tol_floor": n.abs_tol_floor,
            "max_matsubara_terms": n.max_matsubara_terms,
            "quadrature_max_depth": n.quadrature_max_depth,
            "diff_step_fraction": n.diff_step_fraction,
        }
    })
}
