//! Surface materials and their electromagnetic properties.

use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("material `{name}`: relative permittivity must be >= 1, got {value}")]
    PermittivityTooLow { name: String, value: f64 },
    #[error("material `{name}`: conductivity must be >= 0, got {value}")]
    NegativeConductivity { name: String, value: f64 },
    #[error("duplicate material `{0}`")]
    Duplicate(String),
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse material table: {0}")]
    Json(#[from] serde_json::Error),
}

/// A reflecting surface material: real relative permittivity and conductivity.
/// The complex permittivity at a given wavelength is computed on demand by
/// [`complex_permittivity`].
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub relative_permittivity: f64,
    pub conductivity_s_per_m: f64,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        relative_permittivity: f64,
        conductivity_s_per_m: f64,
    ) -> Result<Self, MaterialError> {
        let name = name.into();
        if relative_permittivity.is_nan() || relative_permittivity < 1.0 {
            return Err(MaterialError::PermittivityTooLow {
                name,
                value: relative_permittivity,
            });
        }
        if conductivity_s_per_m.is_nan() || conductivity_s_per_m < 0.0 {
            return Err(MaterialError::NegativeConductivity {
                name,
                value: conductivity_s_per_m,
            });
        }
        Ok(Self {
            name,
            relative_permittivity,
            conductivity_s_per_m,
        })
    }

    /// Default human-body surface material.
    pub fn human() -> Self {
        Self::new("human", 10.0, 1e-10).unwrap()
    }
}

/// Complex relative permittivity `eps' - j * 60 * lambda * sigma`.
pub fn complex_permittivity(material: &Material, wavelength_m: f64) -> Complex64 {
    Complex64::new(
        material.relative_permittivity,
        -60.0 * wavelength_m * material.conductivity_s_per_m,
    )
}

/// Named material lookup table.
///
/// The default table carries approximate values for seven common indoor
/// materials near 60 GHz plus the human-body default. The furniture values
/// are configuration data sourced from public permittivity references and
/// are meant to be adjusted per deployment, not treated as ground truth.
#[derive(Debug, Clone, Default)]
pub struct MaterialTable {
    materials: BTreeMap<String, Material>,
}

#[derive(Debug, Deserialize)]
struct MaterialTableFile {
    materials: Vec<MaterialFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    name: String,
    relative_permittivity: f64,
    conductivity_s_per_m: f64,
}

impl MaterialTable {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        let mut table = Self::default();
        let defaults = [
            ("plywood", 2.5, 0.4),
            ("polyurethane", 1.25, 0.02),
            ("paperboard", 2.3, 0.2),
            ("ceramic", 6.5, 0.2),
            ("glass", 6.27, 0.57),
            ("concrete", 5.31, 0.9),
            ("leather", 2.95, 0.3),
            ("human", 10.0, 1e-10),
        ];
        for (name, eps, sigma) in defaults {
            table.insert(Material::new(name, eps, sigma).unwrap()).unwrap();
        }
        table
    }

    pub fn insert(&mut self, material: Material) -> Result<(), MaterialError> {
        if self.materials.contains_key(&material.name) {
            return Err(MaterialError::Duplicate(material.name));
        }
        self.materials.insert(material.name.clone(), material);
        Ok(())
    }

    /// Insert or replace, used when a config file overrides a default.
    pub fn upsert(&mut self, material: Material) {
        self.materials.insert(material.name.clone(), material);
    }

    pub fn get(&self, name: &str) -> Option<&Material> {
        self.materials.get(name)
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(|s| s.as_str())
    }

    /// Load a table from JSON, layered on top of the defaults (entries with
    /// the same name replace the default values).
    pub fn from_json_str(text: &str) -> Result<Self, MaterialError> {
        let file: MaterialTableFile = serde_json::from_str(text)?;
        let mut table = Self::with_defaults();
        for m in file.materials {
            table.upsert(Material::new(m.name, m.relative_permittivity, m.conductivity_s_per_m)?);
        }
        Ok(table)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, MaterialError> {
        let text = std::fs::read_to_string(path).map_err(|source| MaterialError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}
