//! Command implementations behind the `rovodef` binary.
//!
//! Every command loads and validates the whole configuration, computes its
//! results in memory, stages the output files next to their destination and
//! only then renames them into place.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rovodef_core::beam::{
    coherent_trajectory, simulate_beam, spontaneous_emission_probability, z_for_phase,
    BeamEnsemble, MoleculeSample, StateCoupling, StateSelection, TransitProfile,
};
use rovodef_core::interaction::{
    coupling_g, deflection_angle, min_adjacent_spacing, nearest_neighbor_spacing, scan_frequencies,
    select_dominant_transition, ScanParticipants, Spectrum,
};
use rovodef_core::molecule::{enumerate_levels, thermal_weights, ElectronicState, ThermalEnsemble};
use rovodef_core::units::photon_recoil_velocity;
use rovodef_core::{Error, RovibronicLevel};

mod config;

pub use config::{parse_state, RunConfig};

/// First line of every CSV file written by the CLI.
pub const CSV_VERSION_LINE: &str = "# rovodef-csv v1";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for bad configuration, 3 for violated physics preconditions,
    /// 1 when output cannot be written.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_physics() => 3,
            CliError::Core(_) => 2,
            CliError::Output { .. } => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) if e.is_physics() => write!(f, "physics precondition failed: {e}"),
            CliError::Core(e) => write!(f, "error: {e}"),
            CliError::Output { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Levels,
    Lines,
    Scan,
    Deflect,
    Beam,
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub state: Option<RovibronicLevel>,
    pub seed: Option<u64>,
    pub dump_trajectories: bool,
}

/// Human-readable summary plus the files written.
#[derive(Clone, Debug)]
pub struct Report {
    pub text: String,
    pub files: Vec<PathBuf>,
}

pub fn run(command: Command, config_path: &Path, options: &Options) -> Result<Report, CliError> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(seed) = options.seed {
        config.beam.rng_seed = seed;
    }
    if let Some(state) = options.state {
        config.state = state;
        if command == Command::Beam {
            config.selection = StateSelection::Single(state);
        }
    }
    let out_dir = options
        .out
        .clone()
        .unwrap_or_else(|| config.output_dir.clone());
    let mut staging = Staging::new(&out_dir)?;
    let text = match command {
        Command::Levels => cmd_levels(&config, &mut staging)?,
        Command::Lines => cmd_lines(&config, &mut staging)?,
        Command::Scan => cmd_scan(&config, &mut staging)?,
        Command::Deflect => cmd_deflect(&config, &mut staging)?,
        Command::Beam => cmd_beam(&config, options.dump_trajectories, &mut staging)?,
    };
    let files = staging.commit()?;
    Ok(Report { text, files })
}

/// Output files written to hidden temporaries and renamed together.
struct Staging {
    dir: PathBuf,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl Staging {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Staging {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        })
    }

    fn stage(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let result = (|| {
            let mut w = BufWriter::new(File::create(&tmp)?);
            writeln!(w, "{CSV_VERSION_LINE}")?;
            body(&mut w)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()
        })();
        // registered before checking so Drop cleans up a failed write too
        self.staged.push((tmp, target.clone()));
        result.map_err(|source| CliError::Output {
            path: target,
            source,
        })
    }

    fn commit(mut self) -> Result<Vec<PathBuf>, CliError> {
        let staged = std::mem::take(&mut self.staged);
        let mut done = Vec::new();
        for (i, (tmp, target)) in staged.iter().enumerate() {
            if let Err(source) = fs::rename(tmp, target) {
                for (t, _) in &staged[i..] {
                    let _ = fs::remove_file(t);
                }
                return Err(CliError::Output {
                    path: target.clone(),
                    source,
                });
            }
            done.push(target.clone());
        }
        Ok(done)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
    }
}

pub fn thermal_ensemble(config: &RunConfig) -> Result<ThermalEnsemble, CliError> {
    let levels = enumerate_levels(
        &config.molecule.lower,
        ElectronicState::Lower,
        config.max_nu,
        config.max_j,
    )?;
    Ok(thermal_weights(&levels, config.temperature)?)
}

pub fn spectrum(config: &RunConfig) -> Result<Spectrum, CliError> {
    Ok(Spectrum::new(config.molecule.clone(), config.max_nu - 1)?)
}

fn offset(config: &RunConfig, w: rovodef_core::Wavenumber) -> f64 {
    (w - config.molecule.upper.e_el).cm1()
}

fn cmd_levels(config: &RunConfig, out: &mut Staging) -> Result<String, CliError> {
    let ensemble = thermal_ensemble(config)?;
    out.stage("levels.csv", |w| {
        writeln!(w, "nu,J,M,energy_cm1,weight")?;
        for (l, p) in ensemble.levels.iter().zip(&ensemble.weights) {
            writeln!(
                w,
                "{},{},{},{},{}",
                l.level.nu,
                l.level.j,
                l.level.m,
                l.energy.cm1(),
                p
            )?;
        }
        Ok(())
    })?;
    let ground = RovibronicLevel::lower(0, 0, 0).expect("ground level");
    let mut text = String::new();
    writeln!(text, "levels: {}", ensemble.len()).unwrap();
    writeln!(text, "temperature: {} K", ensemble.temperature).unwrap();
    if let Some(wg) = ensemble.weight_of(&ground) {
        writeln!(text, "ground-state weight: {wg:.6e}").unwrap();
    }
    Ok(text)
}

fn cmd_lines(config: &RunConfig, out: &mut Staging) -> Result<String, CliError> {
    let ensemble = thermal_ensemble(config)?;
    let spectrum = spectrum(config)?;
    let levels: Vec<RovibronicLevel> = ensemble.levels.iter().map(|l| l.level).collect();
    let lines = spectrum.build_line_list(&levels, &config.laser, config.window)?;
    out.stage("lines.csv", |w| {
        writeln!(
            w,
            "lower_nu,lower_J,M,upper_nu,upper_J,frequency_cm1,offset_cm1,gamma_cm1,R,L,S,g_cm1,delta_cm1"
        )?;
        for l in &lines {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                l.lower.nu,
                l.lower.j,
                l.lower.m,
                l.upper.nu,
                l.upper.j,
                l.frequency.cm1(),
                offset(config, l.frequency),
                l.gamma.cm1(),
                l.overlap,
                l.l_factor,
                l.honl_london,
                l.g.cm1(),
                l.detuning.cm1()
            )?;
        }
        Ok(())
    })?;
    out.stage("franck_condon.csv", |w| spectrum.overlaps.write_csv(w))?;

    let mut text = String::new();
    writeln!(
        text,
        "laser: {:.6} cm^-1 (E_el + {:.6})",
        config.laser.frequency.cm1(),
        offset(config, config.laser.frequency)
    )
    .unwrap();
    writeln!(
        text,
        "lines within +/-{} cm^-1: {}",
        config.window.cm1(),
        lines.len()
    )
    .unwrap();
    match min_adjacent_spacing(&lines) {
        Some(s) => writeln!(text, "minimum adjacent spacing: {:.6} cm^-1", s.cm1()).unwrap(),
        None => writeln!(text, "minimum adjacent spacing: n/a").unwrap(),
    }
    let ground = RovibronicLevel::lower(0, 0, 0).expect("ground level");
    if let Some(line) = select_dominant_transition(&ground, &lines).line() {
        writeln!(
            text,
            "ground-state line: {} -> {} at E_el + {:.6} cm^-1",
            line.lower,
            line.upper,
            offset(config, line.frequency)
        )
        .unwrap();
        if let Some(s) = nearest_neighbor_spacing(&lines, line.frequency) {
            writeln!(text, "nearest other line: {:.6} cm^-1 away", s.cm1()).unwrap();
        }
    }
    Ok(text)
}

fn cmd_scan(config: &RunConfig, out: &mut Staging) -> Result<String, CliError> {
    let ensemble = thermal_ensemble(config)?;
    let spectrum = spectrum(config)?;
    let levels: Vec<RovibronicLevel> = ensemble.levels.iter().map(|l| l.level).collect();
    let scan = scan_frequencies(&spectrum, &levels, &config.laser, &config.scan)?;
    let participants = ScanParticipants::new(&spectrum, &levels, &config.laser, &config.scan)?;
    let at_laser = participants.evaluate(
        &config.laser,
        config.laser.frequency,
        &config.scan,
        spectrum.molecule.mass(),
    )?;
    let header =
        "omega_cm1,state_nu,state_J,state_M,alpha_rad,masked,g_cm1,delta_cm1,upper_nu,upper_J";
    let row = |w: &mut BufWriter<File>, p: &rovodef_core::ScanPoint| {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            p.frequency.cm1(),
            p.state.nu,
            p.state.j,
            p.state.m,
            p.alpha,
            u8::from(p.masked),
            p.g.cm1(),
            p.delta.cm1(),
            p.upper_nu,
            p.upper_j
        )
    };
    // M and -M give identical curves.
    out.stage("scan.csv", |w| {
        writeln!(w, "{header}")?;
        for p in scan.points.iter().filter(|p| p.state.m >= 0) {
            row(w, p)?;
        }
        Ok(())
    })?;
    out.stage("scan_at_laser.csv", |w| {
        writeln!(w, "{header}")?;
        for p in &at_laser {
            row(w, p)?;
        }
        Ok(())
    })?;

    let unmasked: Vec<f64> = at_laser
        .iter()
        .filter(|p| !p.masked)
        .map(|p| p.alpha)
        .collect();
    let mut distinct = unmasked.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-12));
    let mut text = String::new();
    writeln!(text, "scan points: {}", scan.frequencies.len()).unwrap();
    writeln!(text, "participating states: {}", scan.states.len()).unwrap();
    writeln!(
        text,
        "at laser (E_el + {:.6} cm^-1): {} unmasked states, {} distinct angles",
        offset(config, config.laser.frequency),
        unmasked.len(),
        distinct.len()
    )
    .unwrap();
    Ok(text)
}

fn cmd_deflect(config: &RunConfig, out: &mut Staging) -> Result<String, CliError> {
    let state = config.state;
    if state.nu >= config.max_nu {
        return Err(CliError::Config(format!(
            "state nu={} is outside the configured thermal.max_nu={}",
            state.nu, config.max_nu
        )));
    }
    let spectrum = spectrum(config)?;
    let laser = &config.laser;
    let mass = spectrum.molecule.mass();
    let v0 = config.beam.v0;
    let lines = spectrum.build_line_list(&[state], laser, config.window)?;
    let v_rec = photon_recoil_velocity(laser.wavelength(), mass)?;
    let mut rows: Vec<(&str, String, &str)> = vec![
        ("state", format!("{},{},{}", state.nu, state.j, state.m), ""),
        (
            "laser_offset",
            format!("{}", offset(config, laser.frequency)),
            "cm^-1",
        ),
        ("recoil_velocity", format!("{v_rec}"), "m/s"),
        ("recoil_angle", format!("{}", v_rec / v0), "rad"),
        ("transit_time", format!("{}", laser.transit_time(v0)), "s"),
        (
            "raman_nath_bound",
            format!("{}", laser.raman_nath_bound()),
            "rad",
        ),
    ];
    let mut text = String::new();
    writeln!(text, "state: {state}").unwrap();
    writeln!(
        text,
        "recoil reference v_rec/v0: {:.2} urad",
        v_rec / v0 * 1e6
    )
    .unwrap();
    writeln!(
        text,
        "transit time l/v0: {:.2} ns",
        laser.transit_time(v0) * 1e9
    )
    .unwrap();
    writeln!(
        text,
        "Raman-Nath bound lambda/l: {:.3e} rad",
        laser.raman_nath_bound()
    )
    .unwrap();

    match select_dominant_transition(&state, &lines).line() {
        None => {
            rows.push(("alpha", "0".into(), "rad"));
            writeln!(
                text,
                "no line within +/-{} cm^-1: state is not deflected",
                config.window.cm1()
            )
            .unwrap();
        }
        Some(line) => {
            let estimate = deflection_angle(line, laser, v0, mass, config.threshold)?;
            let g = coupling_g(line, laser);
            let delta = line.detuning_at(laser.frequency);
            let gamma_upper = spectrum.upper_decay_width(line.upper.nu, line.upper.j)?;
            let z = z_for_phase(laser, std::f64::consts::FRAC_PI_2);
            let profile = TransitProfile::new(laser, v0, z);
            let p_line = spontaneous_emission_probability(g, delta, line.gamma, &profile)?;
            let p_upper = spontaneous_emission_probability(g, delta, gamma_upper, &profile)?;
            let coupling = StateCoupling::new(line, laser, gamma_upper);
            let sample = MoleculeSample {
                v_x: v0,
                z,
                v_z: 0.0,
            };
            let ode = coherent_trajectory(
                state,
                Some(&coupling),
                laser,
                &sample,
                mass,
                config.beam.time_steps,
            )?;
            rows.extend([
                ("upper", format!("{},{}", line.upper.nu, line.upper.j), ""),
                (
                    "line_offset",
                    format!("{}", offset(config, line.frequency)),
                    "cm^-1",
                ),
                ("R", format!("{}", line.overlap), ""),
                ("L", format!("{}", line.l_factor), ""),
                ("gamma_line", format!("{}", line.gamma.cm1()), "cm^-1"),
                (
                    "gamma_upper_total",
                    format!("{}", gamma_upper.cm1()),
                    "cm^-1",
                ),
                ("g", format!("{}", g.cm1()), "cm^-1"),
                ("delta", format!("{}", delta.cm1()), "cm^-1"),
                ("alpha", format!("{}", estimate.angle), "rad"),
                ("alpha_trajectory", format!("{}", ode.angle), "rad"),
                (
                    "raman_nath_ok",
                    format!("{}", u8::from(estimate.raman_nath_ok)),
                    "",
                ),
                ("p_emission_line", format!("{p_line}"), ""),
                ("p_emission_upper_total", format!("{p_upper}"), ""),
            ]);
            writeln!(
                text,
                "dominant line: {} -> {} at E_el + {:.6} cm^-1",
                line.lower,
                line.upper,
                offset(config, line.frequency)
            )
            .unwrap();
            writeln!(
                text,
                "|R|^2 = {:.4}, L = {:.4}",
                line.overlap * line.overlap,
                line.l_factor
            )
            .unwrap();
            writeln!(
                text,
                "Gamma(line) = {:.3e} cm^-1, Gamma(upper total) = {:.3e} cm^-1",
                line.gamma.cm1(),
                gamma_upper.cm1()
            )
            .unwrap();
            writeln!(
                text,
                "g = {:.3e} cm^-1, delta = {:.4e} cm^-1, |delta|/g = {:.1}",
                g.cm1(),
                delta.cm1(),
                delta.cm1().abs() / g.cm1()
            )
            .unwrap();
            writeln!(
                text,
                "alpha (closed form) = {:.2} urad",
                estimate.angle * 1e6
            )
            .unwrap();
            writeln!(
                text,
                "alpha (trajectory, 2kz = pi/2) = {:.2} urad",
                ode.angle * 1e6
            )
            .unwrap();
            writeln!(
                text,
                "Raman-Nath: {}",
                if estimate.raman_nath_ok {
                    "satisfied"
                } else {
                    "VIOLATED"
                }
            )
            .unwrap();
            writeln!(
                text,
                "emission probability: {p_line:.4} (line width), {p_upper:.4} (upper-level width)"
            )
            .unwrap();
        }
    }
    out.stage("deflect.csv", |w| {
        writeln!(w, "quantity,value,unit")?;
        for (k, v, u) in &rows {
            writeln!(w, "{k},\"{v}\",{u}")?;
        }
        Ok(())
    })?;
    Ok(text)
}

fn cmd_beam(config: &RunConfig, dump: bool, out: &mut Staging) -> Result<String, CliError> {
    let ensemble = thermal_ensemble(config)?;
    if let StateSelection::Single(s) = config.selection {
        if s.nu >= config.max_nu {
            return Err(CliError::Config(format!(
                "state nu={} is outside the configured thermal.max_nu={}",
                s.nu, config.max_nu
            )));
        }
    }
    let spectrum = spectrum(config)?;
    let beam_ensemble = BeamEnsemble::prepare(
        &spectrum,
        &ensemble,
        &config.laser,
        config.window,
        config.threshold,
        config.selection,
        config.emission_width,
    )?;
    let run = simulate_beam(
        &beam_ensemble,
        &config.laser,
        &config.beam,
        spectrum.molecule.mass(),
        &config.histogram,
    )?;
    out.stage("histogram.csv", |w| run.histogram.write_csv(w))?;
    if dump {
        out.stage("trajectories.csv", |w| run.write_trajectories_csv(w))?;
    }
    let n = run.trajectories.len();
    let emitted = run.trajectories.iter().filter(|t| t.interrupted).count();
    let mut text = String::new();
    writeln!(text, "molecules: {n}").unwrap();
    writeln!(text, "states in ensemble: {}", beam_ensemble.states.len()).unwrap();
    writeln!(
        text,
        "thermal population covered: {:.4e}",
        beam_ensemble.population_fraction
    )
    .unwrap();
    writeln!(
        text,
        "spontaneous emissions: {emitted} ({:.2}%)",
        100.0 * emitted as f64 / n as f64
    )
    .unwrap();
    let ground = RovibronicLevel::lower(0, 0, 0).expect("ground level");
    let ground_angles: Vec<f64> = run
        .trajectories
        .iter()
        .filter(|t| t.level == ground)
        .map(|t| t.angle)
        .collect();
    if !ground_angles.is_empty() {
        let mean = ground_angles.iter().sum::<f64>() / ground_angles.len() as f64;
        writeln!(
            text,
            "ground state: {} molecules, mean angle {:.2} urad",
            ground_angles.len(),
            mean * 1e6
        )
        .unwrap();
    }
    Ok(text)
}
