//! Config-file schema: parsing, validation and serialization.
//!
//! Scenarios are described in a flat TOML schema with explicit keys for
//! every model field plus run settings (seed, stopping rule, grid
//! resolution). The two bundled presets `wsn1` and `wsn2` encode the
//! benchmark instances on the 10 x 10 square with twenty APs and one or
//! four FCs.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ValidationError};
use crate::geom::{ConvexPolygon, Point};
use crate::scenario::{Density, Scenario, StyleGroups, TableDensity};

/// Run settings carried next to the scenario in config files.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub grid_resolution: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { seed: 1, epsilon: 1e-5, max_iters: 100, grid_resolution: 512 }
    }
}

/// A parsed and validated config file.
#[derive(Clone, Debug)]
pub struct ParsedConfig {
    pub scenario: Scenario,
    pub run: RunSettings,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    n_aps: usize,
    n_fcs: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    beta: f64,
    // TOML integers are signed 64-bit, so config seeds live in 0..=2^63-1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    /// Receiver power coefficient: accepted for completeness, but it only
    /// adds a constant to the objective, so it is ignored with a log note.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    omega: RawOmega,
    density: RawDensity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    style: Option<RawStyle>,
}

#[derive(Serialize, Deserialize)]
struct RawOmega {
    vertices: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<RawTable>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    resolution: usize,
}

#[derive(Serialize, Deserialize)]
struct RawStyle {
    #[serde(default)]
    strong_aps: Vec<usize>,
    #[serde(default)]
    strong_fcs: Vec<usize>,
}

/// Parses and validates a scenario config from TOML text.
pub fn parse_scenario_str(text: &str) -> Result<ParsedConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

    if let Some(rho) = raw.rho {
        log::info!(
            "config sets rho = {rho}: receiver power adds a constant to the objective and is ignored"
        );
    }

    let verts: Vec<Point> = raw.omega.vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
    let omega = ConvexPolygon::new(verts)?;

    let table = match raw.density.kind.as_str() {
        "uniform" => None,
        "table" => {
            let t = raw.density.table.ok_or_else(|| {
                ConfigError::Parse("density.kind = \"table\" requires a [density.table] section".into())
            })?;
            Some(TableDensity {
                nx: t.nx,
                ny: t.ny,
                values: t.values,
                rect: omega.bounding_box(),
            })
        }
        other => {
            return Err(ConfigError::Parse(format!(
                "density.kind must be \"uniform\" or \"table\", got \"{other}\""
            )))
        }
    };

    let scenario =
        Scenario::new(omega, table, raw.n_aps, raw.n_fcs, raw.a, raw.b, raw.beta)?;

    let scenario = match raw.style {
        None => scenario,
        Some(style) => {
            let to_zero_based = |field: &'static str, xs: &[usize], max: usize| {
                xs.iter()
                    .map(|&i| {
                        if i == 0 || i > max {
                            Err(ConfigError::Parse(format!(
                                "{field} index {i} out of range 1..={max}"
                            )))
                        } else {
                            Ok(i - 1)
                        }
                    })
                    .collect::<Result<Vec<usize>, ConfigError>>()
            };
            let strong_aps = to_zero_based("style.strong_aps", &style.strong_aps, raw.n_aps)?;
            let strong_fcs = to_zero_based("style.strong_fcs", &style.strong_fcs, raw.n_fcs)?;
            scenario.with_style(StyleGroups { strong_aps, strong_fcs })
        }
    };

    let seed = match raw.seed {
        None => 1,
        Some(s) if s >= 0 => s as u64,
        Some(s) => return Err(ConfigError::Parse(format!("seed must be nonnegative, got {s}"))),
    };
    let run = RunSettings {
        seed,
        epsilon: raw.epsilon.unwrap_or(1e-5),
        max_iters: raw.max_iters.unwrap_or(100),
        grid_resolution: raw.grid.map(|g| g.resolution).unwrap_or(512),
    };
    if !(run.epsilon > 0.0) {
        return Err(ValidationError::NonPositiveParam { name: "epsilon", value: run.epsilon }.into());
    }
    if run.max_iters == 0 {
        return Err(ValidationError::NonPositiveCount { field: "max_iters", value: 0 }.into());
    }

    // Uniform densities are normalized by construction; table densities
    // must integrate to one over omega within quadrature tolerance.
    if matches!(scenario.density(), Density::Table(_)) {
        let g = crate::integrate::Integrator::midpoint(run.grid_resolution);
        let mass = crate::integrate::density_mass(&scenario, &g)
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        if (mass - 1.0).abs() > DENSITY_MASS_TOLERANCE {
            return Err(ValidationError::BadDensity(format!(
                "density integrates to {mass} over omega, expected 1 within {DENSITY_MASS_TOLERANCE}"
            ))
            .into());
        }
    }
    Ok(ParsedConfig { scenario, run })
}

/// Accepted deviation of a table density's total mass from one; covers
/// quadrature rasterization error on polygon boundaries.
pub const DENSITY_MASS_TOLERANCE: f64 = 0.02;

/// Serializes a scenario and run settings back to the config schema.
/// Panics if the seed exceeds the TOML integer range (2^63 - 1).
pub fn serialize_scenario(s: &Scenario, run: &RunSettings) -> String {
    let (kind, table) = match s.density() {
        Density::Uniform { .. } => ("uniform".to_string(), None),
        Density::Table(t) => (
            "table".to_string(),
            Some(RawTable { nx: t.nx, ny: t.ny, values: t.values.clone() }),
        ),
    };
    let raw = RawConfig {
        n_aps: s.n_aps(),
        n_fcs: s.n_fcs(),
        a: s.a().to_vec(),
        b: s.b().to_vec(),
        beta: s.beta(),
        seed: Some(i64::try_from(run.seed).expect("seed exceeds the TOML integer range")),
        epsilon: Some(run.epsilon),
        max_iters: Some(run.max_iters),
        rho: None,
        omega: RawOmega {
            vertices: s.omega().vertices().iter().map(|p| [p.x, p.y]).collect(),
        },
        density: RawDensity { kind, table },
        grid: Some(RawGrid { resolution: run.grid_resolution }),
        style: s.style().map(|st| RawStyle {
            strong_aps: st.strong_aps.iter().map(|i| i + 1).collect(),
            strong_fcs: st.strong_fcs.iter().map(|i| i + 1).collect(),
        }),
    };
    toml::to_string(&raw).expect("config serialization cannot fail")
}

pub const PRESET_NAMES: [&str; 2] = ["wsn1", "wsn2"];

/// Raw TOML text of a bundled preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "wsn1" => Some(include_str!("../presets/wsn1.toml")),
        "wsn2" => Some(include_str!("../presets/wsn2.toml")),
        _ => None,
    }
}

/// Loads and validates a bundled preset by name.
pub fn load_preset(name: &str) -> Result<ParsedConfig, ConfigError> {
    let text = preset_text(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    parse_scenario_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wsn1_preset_matches_parameter_table() {
        let cfg = load_preset("wsn1").unwrap();
        let s = &cfg.scenario;
        assert_eq!(s.n_aps(), 20);
        assert_eq!(s.n_fcs(), 1);
        let mut expected_a = vec![1.0; 10];
        expected_a.extend(vec![2.0; 10]);
        assert_eq!(s.a(), expected_a.as_slice());
        for n in 0..4 {
            assert_eq!(s.b_of(n, 0), 1.0);
        }
        for n in 4..20 {
            assert_eq!(s.b_of(n, 0), 2.0);
        }
        assert_relative_eq!(s.beta(), 0.25);
        assert_eq!(s.omega().area(), 100.0);
        assert_eq!(cfg.run.max_iters, 100);
        assert_eq!(cfg.run.grid_resolution, 512);
        let style = s.style().unwrap();
        assert_eq!(style.strong_aps, (0..10).collect::<Vec<_>>());
        assert_eq!(style.strong_fcs, vec![0]);
    }

    #[test]
    fn wsn2_preset_matches_parameter_table() {
        let cfg = load_preset("wsn2").unwrap();
        let s = &cfg.scenario;
        assert_eq!(s.n_aps(), 20);
        assert_eq!(s.n_fcs(), 4);
        for n in 0..4 {
            assert_eq!(s.b_of(n, 0), 1.0);
            assert_eq!(s.b_of(n, 1), 1.0);
            assert_eq!(s.b_of(n, 2), 2.0);
            assert_eq!(s.b_of(n, 3), 2.0);
        }
        for n in 4..20 {
            assert_eq!(s.b_of(n, 0), 2.0);
            assert_eq!(s.b_of(n, 1), 2.0);
            assert_eq!(s.b_of(n, 2), 4.0);
            assert_eq!(s.b_of(n, 3), 4.0);
        }
        assert_eq!(s.style().unwrap().strong_fcs, vec![0, 1]);
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(load_preset("wsn9"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn zero_fcs_is_a_validation_error() {
        let text = r#"
n_aps = 2
n_fcs = 0
a = [1.0, 1.0]
b = []
beta = 0.5
[omega]
vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
[density]
kind = "uniform"
"#;
        match parse_scenario_str(text) {
            Err(ConfigError::Validation(ValidationError::NonPositiveCount {
                field: "n_fcs",
                ..
            })) => {}
            other => panic!("expected n_fcs validation error, got {other:?}"),
        }
    }

    #[test]
    fn negative_beta_is_a_validation_error() {
        let text = r#"
n_aps = 1
n_fcs = 1
a = [1.0]
b = [1.0]
beta = -1.0
[omega]
vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
[density]
kind = "uniform"
"#;
        match parse_scenario_str(text) {
            Err(ConfigError::Validation(ValidationError::NegativeBeta { .. })) => {}
            other => panic!("expected beta validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_names_the_missing_field() {
        let err = parse_scenario_str("n_aps = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_fcs"), "error should name the field: {msg}");
    }

    #[test]
    fn table_density_must_be_normalized() {
        let table_config = |scale: f64| {
            format!(
                r#"
n_aps = 1
n_fcs = 1
a = [1.0]
b = [1.0]
beta = 0.0
[omega]
vertices = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]
[density]
kind = "table"
[density.table]
nx = 2
ny = 2
values = [{v}, {v}, {v}, {v}]
[grid]
resolution = 64
"#,
                v = 0.5 * scale
            )
        };
        assert!(parse_scenario_str(&table_config(1.0)).is_ok());
        match parse_scenario_str(&table_config(3.0)) {
            Err(ConfigError::Validation(ValidationError::BadDensity(msg))) => {
                assert!(msg.contains("integrates"), "{msg}");
            }
            other => panic!("expected density mass error, got {other:?}"),
        }
    }

    #[test]
    fn integer_weights_parse_as_floats() {
        let text = r#"
n_aps = 2
n_fcs = 1
a = [1, 2]
b = [1, 2]
beta = 0
[omega]
vertices = [[0, 0], [1, 0], [1, 1], [0, 1]]
[density]
kind = "uniform"
"#;
        let cfg = parse_scenario_str(text).unwrap();
        assert_eq!(cfg.scenario.a(), &[1.0, 2.0]);
    }

    #[test]
    fn round_trip_preserves_all_fields() {
        for preset in PRESET_NAMES {
            let cfg = load_preset(preset).unwrap();
            let text = serialize_scenario(&cfg.scenario, &cfg.run);
            let back = parse_scenario_str(&text).unwrap();
            assert_eq!(back.scenario.n_aps(), cfg.scenario.n_aps());
            assert_eq!(back.scenario.n_fcs(), cfg.scenario.n_fcs());
            assert_eq!(back.scenario.a(), cfg.scenario.a());
            assert_eq!(back.scenario.b(), cfg.scenario.b());
            assert_eq!(back.scenario.beta(), cfg.scenario.beta());
            assert_eq!(back.scenario.omega().vertices(), cfg.scenario.omega().vertices());
            assert_eq!(back.scenario.style(), cfg.scenario.style());
            assert_eq!(back.run, cfg.run);
        }
    }
}
