use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use rovodef_core::beam::{
    z_for_phase, BeamParameters, EmissionWidth, HistogramSpec, StateSelection, DEFAULT_TIME_STEPS,
};
use rovodef_core::interaction::{ScanSettings, DEFAULT_NONRESONANCE_THRESHOLD};
use rovodef_core::{LaserField, MoleculePair, RovibronicLevel, Wavenumber};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    constants: PathBuf,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    thermal: RawThermal,
    laser: RawLaser,
    #[serde(default)]
    lines: RawLines,
    #[serde(default)]
    scan: RawScan,
    #[serde(default)]
    beam: RawBeam,
    #[serde(default)]
    deflect: RawDeflect,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawThermal {
    #[serde(default = "default_temperature")]
    T_K: f64,
    #[serde(default = "default_max_nu")]
    max_nu: u32,
    #[serde(default = "default_max_j")]
    max_J: u32,
}

impl Default for RawThermal {
    fn default() -> Self {
        RawThermal {
            T_K: default_temperature(),
            max_nu: default_max_nu(),
            max_J: default_max_j(),
        }
    }
}

fn default_temperature() -> f64 {
    1000.0
}
fn default_max_nu() -> u32 {
    10
}
fn default_max_j() -> u32 {
    100
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawLaser {
    omega_cm1: Option<f64>,
    offset_from_E_el_cm1: Option<f64>,
    power_W: f64,
    waist_m: Option<f64>,
    interaction_length_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLines {
    #[serde(default = "default_window")]
    window_cm1: f64,
    #[serde(default = "default_threshold")]
    nonresonance_threshold: f64,
}

impl Default for RawLines {
    fn default() -> Self {
        RawLines {
            window_cm1: default_window(),
            nonresonance_threshold: default_threshold(),
        }
    }
}

fn default_window() -> f64 {
    0.5
}
fn default_threshold() -> f64 {
    DEFAULT_NONRESONANCE_THRESHOLD
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    #[serde(default = "default_scan_start")]
    start_offset_cm1: f64,
    #[serde(default = "default_scan_stop")]
    stop_offset_cm1: f64,
    #[serde(default = "default_scan_points")]
    points: usize,
}

impl Default for RawScan {
    fn default() -> Self {
        RawScan {
            start_offset_cm1: default_scan_start(),
            stop_offset_cm1: default_scan_stop(),
            points: default_scan_points(),
        }
    }
}

fn default_scan_start() -> f64 {
    665.9
}
fn default_scan_stop() -> f64 {
    666.5
}
fn default_scan_points() -> usize {
    2000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    #[serde(default = "default_v0")]
    v0_m_s: f64,
    #[serde(default)]
    sigma_v_rel: f64,
    /// Standing-wave phase 2kz of the beam center.
    #[serde(default = "default_phase")]
    z_phase: f64,
    #[serde(default)]
    delta_z_m: Option<f64>,
    /// Position spread given as 2kΔz.
    #[serde(default)]
    delta_phase: Option<f64>,
    #[serde(default = "default_n_molecules")]
    n_molecules: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_true")]
    spontaneous_emission: bool,
    #[serde(default)]
    diffraction: bool,
    #[serde(default = "default_time_steps")]
    time_steps: usize,
    #[serde(default = "default_selection")]
    selection: String,
    #[serde(default = "default_emission_width")]
    emission_width: String,
    #[serde(default = "default_bins")]
    bins: usize,
    #[serde(default)]
    range_rad: Option<[f64; 2]>,
}

impl Default for RawBeam {
    fn default() -> Self {
        toml::from_str("").expect("all beam keys have defaults")
    }
}

fn default_v0() -> f64 {
    500.0
}
fn default_phase() -> f64 {
    PI / 2.0
}
fn default_n_molecules() -> usize {
    10_000
}
fn default_true() -> bool {
    true
}
fn default_time_steps() -> usize {
    DEFAULT_TIME_STEPS
}
fn default_selection() -> String {
    "participating".into()
}
fn default_emission_width() -> String {
    "upper_total".into()
}
fn default_bins() -> usize {
    200
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeflect {
    #[serde(default)]
    state: Option<[i64; 3]>,
}

/// Fully validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub constants_path: PathBuf,
    pub molecule: MoleculePair,
    pub output_dir: PathBuf,
    pub temperature: f64,
    /// Exclusive level bounds.
    pub max_nu: u32,
    pub max_j: u32,
    pub laser: LaserField,
    pub window: Wavenumber,
    pub threshold: f64,
    pub scan: ScanSettings,
    pub beam: BeamParameters,
    pub selection: StateSelection,
    pub emission_width: EmissionWidth,
    pub histogram: HistogramSpec,
    pub state: RovibronicLevel,
}

fn config_error(path: &Path, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {message}", path.display()))
}

fn positive(path: &Path, name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(config_error(
            path,
            format!("`{name}` must be positive, got {value}"),
        ))
    }
}

/// Parses `nu,J,M`.
pub fn parse_state(text: &str) -> Result<RovibronicLevel, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected nu,J,M, got `{text}`"));
    }
    let nu: u32 = parts[0]
        .parse()
        .map_err(|_| format!("bad nu in `{text}`"))?;
    let j: u32 = parts[1].parse().map_err(|_| format!("bad J in `{text}`"))?;
    let m: i32 = parts[2].parse().map_err(|_| format!("bad M in `{text}`"))?;
    RovibronicLevel::lower(nu, j, m).map_err(|e| e.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(path, e))?;
        Self::from_toml_str(&text, path)
    }

    /// Relative paths inside the document resolve against its directory.
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_error(path, e.message()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let constants_path = base.join(&raw.constants);
        let molecule = MoleculePair::load(&constants_path).map_err(CliError::Core)?;

        let t = positive(path, "thermal.T_K", raw.thermal.T_K)?;
        if raw.thermal.max_nu == 0 || raw.thermal.max_J == 0 {
            return Err(config_error(
                path,
                "`thermal.max_nu` and `thermal.max_J` must be at least 1",
            ));
        }
        if let Some(nu_max) = molecule.lower.nu_max() {
            if raw.thermal.max_nu > nu_max + 1 {
                return Err(config_error(
                    path,
                    format!(
                        "`thermal.max_nu` = {} exceeds the {} bound levels",
                        raw.thermal.max_nu,
                        nu_max + 1
                    ),
                ));
            }
        }

        let e_el = molecule.upper.e_el;
        let omega = match (raw.laser.omega_cm1, raw.laser.offset_from_E_el_cm1) {
            (Some(w), None) => Wavenumber::new(w),
            (None, Some(off)) => e_el + Wavenumber::new(off),
            _ => {
                return Err(config_error(
                    path,
                    "laser needs exactly one of `omega_cm1` and `offset_from_E_el_cm1`",
                ))
            }
        };
        let power = raw.laser.power_W;
        if !(power >= 0.0) || !power.is_finite() {
            return Err(config_error(
                path,
                format!("`laser.power_W` must be non-negative, got {power}"),
            ));
        }
        let laser = match (raw.laser.waist_m, raw.laser.interaction_length_m) {
            (Some(w), None) => LaserField::new(omega, power, positive(path, "laser.waist_m", w)?),
            (None, Some(l)) => LaserField::with_interaction_length(
                omega,
                power,
                positive(path, "laser.interaction_length_m", l)?,
            ),
            _ => {
                return Err(config_error(
                    path,
                    "laser needs exactly one of `waist_m` and `interaction_length_m`",
                ))
            }
        }
        .map_err(|e| config_error(path, e))?;

        let window = Wavenumber::new(positive(path, "lines.window_cm1", raw.lines.window_cm1)?);
        let threshold = positive(
            path,
            "lines.nonresonance_threshold",
            raw.lines.nonresonance_threshold,
        )?;

        if raw.scan.points < 2 {
            return Err(config_error(path, "`scan.points` must be at least 2"));
        }
        if !(raw.scan.stop_offset_cm1 > raw.scan.start_offset_cm1) {
            return Err(config_error(
                path,
                "`scan.stop_offset_cm1` must exceed `scan.start_offset_cm1`",
            ));
        }
        let b = &raw.beam;
        let scan = ScanSettings {
            start: e_el + Wavenumber::new(raw.scan.start_offset_cm1),
            stop: e_el + Wavenumber::new(raw.scan.stop_offset_cm1),
            points: raw.scan.points,
            threshold,
            v_x: positive(path, "beam.v0_m_s", b.v0_m_s)?,
        };

        let delta_z = match (b.delta_z_m, b.delta_phase) {
            (Some(dz), None) => dz,
            (None, Some(p)) => p / (2.0 * laser.wavevector()),
            (None, None) => 0.0,
            _ => {
                return Err(config_error(
                    path,
                    "beam takes at most one of `delta_z_m` and `delta_phase`",
                ))
            }
        };
        let beam = BeamParameters {
            v0: b.v0_m_s,
            sigma_v_rel: b.sigma_v_rel,
            z_center: z_for_phase(&laser, b.z_phase),
            delta_z,
            n_molecules: b.n_molecules,
            rng_seed: b.seed,
            spontaneous_emission: b.spontaneous_emission,
            diffraction: b.diffraction,
            time_steps: b.time_steps,
        };
        beam.validate().map_err(|e| config_error(path, e))?;

        let state = match raw.deflect.state {
            None => RovibronicLevel::lower(0, 0, 0).expect("ground level"),
            Some([nu, j, m]) => {
                let text = format!("{nu},{j},{m}");
                parse_state(&text)
                    .map_err(|e| config_error(path, format!("`deflect.state`: {e}")))?
            }
        };
        let selection =
            match b.selection.as_str() {
                "thermal" => StateSelection::Thermal,
                "participating" => StateSelection::Participating,
                "state" => StateSelection::Single(state),
                other => return Err(config_error(
                    path,
                    format!(
                        "`beam.selection` must be thermal, participating or state, got `{other}`"
                    ),
                )),
            };
        let emission_width = match b.emission_width.as_str() {
            "upper_total" => EmissionWidth::UpperLevelTotal,
            "line" => EmissionWidth::Line,
            other => {
                return Err(config_error(
                    path,
                    format!("`beam.emission_width` must be upper_total or line, got `{other}`"),
                ))
            }
        };
        if b.bins == 0 {
            return Err(config_error(path, "`beam.bins` must be at least 1"));
        }
        let range = match b.range_rad {
            Some([lo, hi]) if hi > lo => Some((lo, hi)),
            Some(_) => {
                return Err(config_error(
                    path,
                    "`beam.range_rad` must be [lo, hi] with hi > lo",
                ))
            }
            None => None,
        };

        let output_dir = raw
            .output_dir
            .map_or_else(|| PathBuf::from("out"), |d| base.join(d));
        Ok(RunConfig {
            constants_path,
            molecule,
            output_dir,
            temperature: t,
            max_nu: raw.thermal.max_nu,
            max_j: raw.thermal.max_J,
            laser,
            window,
            threshold,
            scan,
            beam,
            selection,
            emission_width,
            histogram: HistogramSpec {
                bins: b.bins,
                range,
            },
            state,
        })
    }
}
