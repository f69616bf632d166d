//! Acceptance suite: one line per criterion, nonzero exit if any fails.

#[path = "../../core/tests/support/numerov.rs"]
mod numerov;

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rovodef_cli::RunConfig;
use rovodef_core::beam::{
    coherent_trajectory, simulate_beam, spontaneous_emission_probability, z_for_phase,
    BeamEnsemble, BeamParameters, EmissionWidth, HistogramSpec, MoleculeSample, StateSelection,
    TransitProfile,
};
use rovodef_core::interaction::{
    coupling_g, deflection_angle, dressed_shift, scan_frequencies, select_dominant_transition,
    ScanParticipants, Spectrum,
};
use rovodef_core::molecule::{enumerate_levels, thermal_weights, ElectronicState};
use rovodef_core::rotation::sum_rule_check;
use rovodef_core::units::photon_recoil_velocity;
use rovodef_core::vibration::{MorseWell, OverlapMatrix};
use rovodef_core::{LaserField, RovibronicLevel, ThermalEnsemble, TransitionLine, Wavenumber};

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, fn(&Context) -> Check);

struct Context {
    config: RunConfig,
    spectrum: Spectrum,
    ensemble: ThermalEnsemble,
    ground: RovibronicLevel,
    ground_line: TransitionLine,
}

impl Context {
    fn new() -> Result<Self, String> {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/na2_example.toml");
        let config = RunConfig::load(&path).map_err(|e| e.to_string())?;
        let spectrum =
            Spectrum::new(config.molecule.clone(), config.max_nu - 1).map_err(|e| e.to_string())?;
        let levels = enumerate_levels(
            &config.molecule.lower,
            ElectronicState::Lower,
            config.max_nu,
            config.max_j,
        )
        .map_err(|e| e.to_string())?;
        let ensemble = thermal_weights(&levels, config.temperature).map_err(|e| e.to_string())?;
        let ground = RovibronicLevel::lower(0, 0, 0).unwrap();
        let lines = spectrum
            .build_line_list(&[ground], &config.laser, config.window)
            .map_err(|e| e.to_string())?;
        let ground_line = *select_dominant_transition(&ground, &lines)
            .line()
            .ok_or("ground level has no line near the laser")?;
        Ok(Context {
            config,
            spectrum,
            ensemble,
            ground,
            ground_line,
        })
    }

    fn laser(&self) -> &LaserField {
        &self.config.laser
    }

    fn mass(&self) -> f64 {
        self.spectrum.molecule.mass()
    }

    fn ground_beam(&self, emission: EmissionWidth) -> Result<BeamEnsemble, String> {
        BeamEnsemble::prepare(
            &self.spectrum,
            &self.ensemble,
            self.laser(),
            self.config.window,
            self.config.threshold,
            StateSelection::Single(self.ground),
            emission,
        )
        .map_err(|e| e.to_string())
    }

    fn ground_params(&self, seed: u64) -> BeamParameters {
        let mut p = BeamParameters::new(self.laser());
        p.v0 = self.config.beam.v0;
        p.n_molecules = 10_000;
        p.rng_seed = seed;
        p
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn franck_condon(ctx: &Context) -> Check {
    let r = ctx.spectrum.overlaps.get(0, 6).ok_or("R_0^6 missing")?;
    let fc = r * r;
    let fc_ok = (fc - 0.113).abs() <= 0.02;

    let lower = MorseWell::from_constants(&ctx.config.molecule.lower).map_err(e)?;
    let upper = MorseWell::from_constants(&ctx.config.molecule.upper).map_err(e)?;
    let max_upper = 25;
    let matrix = OverlapMatrix::compute(&lower, &upper, 0..=ctx.config.max_nu - 1, 0..=max_upper)
        .map_err(e)?;
    let grid = numerov::Grid::new(1.8e-10, 9.0e-10, 40_001);
    let wl = numerov::Well::new(&ctx.config.molecule.lower);
    let wu = numerov::Well::new(&ctx.config.molecule.upper);
    let lows: Vec<Vec<f64>> = (0..ctx.config.max_nu as usize)
        .map(|n| numerov::eigenstate(&wl, &grid, n).1)
        .collect();
    let ups: Vec<Vec<f64>> = (0..=max_upper as usize)
        .map(|n| numerov::eigenstate(&wu, &grid, n).1)
        .collect();
    let mut worst = 0.0f64;
    for (nu, a) in lows.iter().enumerate() {
        for (nup, b) in ups.iter().enumerate() {
            let oracle = numerov::overlap(&grid, a, b).abs();
            let ours = matrix
                .get(nu as u32, nup as u32)
                .ok_or("matrix entry missing")?
                .abs();
            worst = worst.max((oracle - ours).abs());
        }
    }
    Ok((
        fc_ok && worst < 1e-4,
        format!(
            "|R_0^6|^2 = {fc:.4} (target 0.113 +/- 0.02); max ||R|-|R_numerov|| = {worst:.2e} over nu<={}, nu'<={max_upper} (tol 1e-4)",
            ctx.config.max_nu - 1
        ),
    ))
}

fn line_width(ctx: &Context) -> Check {
    let gamma = ctx.ground_line.gamma.cm1();
    let rel = gamma / 3.4e-5 - 1.0;
    Ok((
        rel.abs() <= 0.15,
        format!(
            "Gamma f(0,0)->e(6,1) = {gamma:.3e} cm^-1 vs 3.4e-5 ({:+.1}%, tol 15%)",
            rel * 100.0
        ),
    ))
}

fn coupling(ctx: &Context) -> Check {
    let g = coupling_g(&ctx.ground_line, ctx.laser()).cm1();
    let ratio = g / 1.5e-3;
    Ok((
        (0.5..=2.0).contains(&ratio),
        format!(
            "g = {g:.3e} cm^-1 at P = {} W, l = {:.1} um (ratio to 1.5e-3: {ratio:.3}, tol factor 2)",
            ctx.laser().power,
            ctx.laser().interaction_length() * 1e6
        ),
    ))
}

fn deflection(ctx: &Context) -> Check {
    let v0 = ctx.config.beam.v0;
    let est = deflection_angle(
        &ctx.ground_line,
        ctx.laser(),
        v0,
        ctx.mass(),
        ctx.config.threshold,
    )
    .map_err(e)?;
    let delta = ctx.ground_line.detuning_at(ctx.laser().frequency).cm1();
    let alpha = est.angle.abs() * 1e6;
    let recoil =
        photon_recoil_velocity(ctx.laser().wavelength(), ctx.mass()).map_err(e)? / v0 * 1e6;
    Ok((
        (50.0..=200.0).contains(&alpha) && (30.0..=40.0).contains(&recoil) && (delta.abs() - 0.02).abs() < 1e-3,
        format!(
            "|alpha| = {alpha:.1} urad at delta = {delta:+.4} cm^-1 (target 100, factor 2); recoil reference {recoil:.1} urad (window [30,40], quoted 35)"
        ),
    ))
}

fn transit(ctx: &Context) -> Check {
    let t = ctx.laser().transit_time(ctx.config.beam.v0) * 1e9;
    Ok((
        (t / 100.0 - 1.0).abs() <= 0.01,
        format!("l/v0 = {t:.3} ns (target 100 +/- 1%)"),
    ))
}

fn emission(ctx: &Context) -> Check {
    let laser =
        LaserField::with_interaction_length(ctx.laser().frequency, 3e-4, 50e-6).map_err(e)?;
    let z = z_for_phase(&laser, PI / 2.0);
    let profile = TransitProfile::new(&laser, 500.0, z);
    let p_quoted = spontaneous_emission_probability(
        Wavenumber::new(1.5e-3),
        Wavenumber::new(0.02),
        Wavenumber::new(3.4e-5),
        &profile,
    )
    .map_err(e)?;
    let g = coupling_g(&ctx.ground_line, ctx.laser());
    let delta = ctx.ground_line.detuning_at(ctx.laser().frequency);
    let gamma_upper = ctx
        .spectrum
        .upper_decay_width(ctx.ground_line.upper.nu, ctx.ground_line.upper.j)
        .map_err(e)?;
    let p_model = spontaneous_emission_probability(g, delta, gamma_upper, &profile).map_err(e)?;
    Ok((
        p_quoted < 0.1 && p_model < 0.1,
        format!(
            "P(g=1.5e-3, delta=0.02, Gamma=3.4e-5) = {p_quoted:.4}; P(computed g, upper-level width {:.2e} cm^-1) = {p_model:.4} (limit 0.1)",
            gamma_upper.cm1()
        ),
    ))
}

fn scan_structure(ctx: &Context) -> Check {
    let levels: Vec<RovibronicLevel> = ctx.ensemble.levels.iter().map(|l| l.level).collect();
    let settings = &ctx.config.scan;
    let scan = scan_frequencies(&ctx.spectrum, &levels, ctx.laser(), settings).map_err(e)?;

    let mut mask_mismatch = 0usize;
    for p in &scan.points {
        let nonres = p.delta.cm1().abs() > settings.threshold * p.g.cm1();
        if p.masked == nonres {
            mask_mismatch += 1;
        }
    }

    // Within a stretch served by one line on one side of it, |alpha| must
    // grow as the laser approaches the line.
    let mut non_divergent = 0usize;
    for state in &scan.states {
        let curve = scan.curve(state).ok_or("missing curve")?;
        for w in curve.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let same = a.upper_nu == b.upper_nu
                && a.upper_j == b.upper_j
                && a.delta.cm1().signum() == b.delta.cm1().signum();
            if !same || a.alpha.is_nan() || b.alpha.is_nan() {
                continue;
            }
            let closer = b.delta.cm1().abs() < a.delta.cm1().abs();
            let grows = b.alpha.abs() > a.alpha.abs();
            if closer != grows {
                non_divergent += 1;
            }
        }
    }

    let ground = scan
        .curve(&ctx.ground)
        .ok_or("ground state does not participate")?;
    let line = ctx.ground_line.frequency.cm1();
    let below: Vec<_> = ground
        .iter()
        .filter(|p| p.frequency.cm1() < line - 0.03)
        .collect();
    let above: Vec<_> = ground
        .iter()
        .filter(|p| p.frequency.cm1() > line + 0.03)
        .collect();
    let near_masked = ground
        .iter()
        .filter(|p| (p.frequency.cm1() - line).abs() < 0.005)
        .all(|p| p.masked);
    let served = |p: &rovodef_core::ScanPoint| p.upper_nu == 6 && p.upper_j == 1 && !p.masked;
    let sign_below = below
        .iter()
        .rev()
        .find(|p| served(p))
        .map(|p| p.alpha.signum());
    let sign_above = above.iter().find(|p| served(p)).map(|p| p.alpha.signum());
    let flips = matches!((sign_below, sign_above), (Some(a), Some(b)) if a != b);

    let participants =
        ScanParticipants::new(&ctx.spectrum, &levels, ctx.laser(), settings).map_err(e)?;
    let at = participants
        .evaluate(ctx.laser(), ctx.laser().frequency, settings, ctx.mass())
        .map_err(e)?;
    let mut distinct: Vec<f64> = at.iter().filter(|p| !p.masked).map(|p| p.alpha).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-3 * b.abs().max(1e-9));

    Ok((
        mask_mismatch == 0 && non_divergent == 0 && near_masked && flips && distinct.len() >= 4,
        format!(
            "{} states x {} points; mask/predicate mismatches {mask_mismatch}; non-divergent steps {non_divergent}; ground curve masked at line {near_masked}, sign flip {flips}; {} distinct unmasked angles at laser (need >= 4)",
            scan.states.len(),
            scan.frequencies.len(),
            distinct.len()
        ),
    ))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

fn broadening(ctx: &Context) -> Check {
    let ens = ctx.ground_beam(EmissionWidth::UpperLevelTotal)?;
    let hist = HistogramSpec::default();
    let laser = ctx.laser();
    let mass = ctx.mass();

    let base = ctx.ground_params(11);
    let peak = simulate_beam(
        &ens,
        laser,
        &BeamParameters {
            n_molecules: 1,
            ..base
        },
        mass,
        &hist,
    )
    .map_err(e)?
    .trajectories[0]
        .angle;

    let p_v = BeamParameters {
        sigma_v_rel: 0.01,
        ..base
    };
    let a: Vec<f64> = simulate_beam(&ens, laser, &p_v, mass, &hist)
        .map_err(e)?
        .trajectories
        .iter()
        .map(|t| t.angle)
        .collect();
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let sd = (a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (a.len() - 1) as f64).sqrt();
    let rel_v = sd / mean.abs();
    let v_ok = (rel_v / 0.02 - 1.0).abs() <= 0.15;

    let p_z = BeamParameters {
        delta_z: 0.45 / (2.0 * laser.wavevector()),
        rng_seed: 12,
        ..base
    };
    let mut rel: Vec<f64> = simulate_beam(&ens, laser, &p_z, mass, &hist)
        .map_err(e)?
        .trajectories
        .iter()
        .map(|t| t.angle / peak)
        .collect();
    rel.sort_by(f64::total_cmp);
    // width below the peak holding 68.27% of the molecules
    let spread_z = 1.0 - quantile(&rel, 1.0 - 0.6827);
    let z_ok = (spread_z - 0.10).abs() <= 0.03;
    let mean_z = rel.iter().sum::<f64>() / rel.len() as f64;
    let sd_z =
        (rel.iter().map(|x| (x - mean_z).powi(2)).sum::<f64>() / (rel.len() - 1) as f64).sqrt();

    let p_e = BeamParameters {
        spontaneous_emission: true,
        rng_seed: 13,
        ..base
    };
    let run = simulate_beam(&ens, laser, &p_e, mass, &hist).map_err(e)?;
    let n = run.trajectories.len() as f64;
    let between = run
        .trajectories
        .iter()
        .filter(|t| (0.1..=0.9).contains(&(t.angle / peak)))
        .count() as f64
        / n;
    let emitted = run.trajectories.iter().filter(|t| t.interrupted).count() as f64 / n;
    let e_ok = (0.01..=0.15).contains(&between);

    Ok((
        v_ok && z_ok && e_ok,
        format!(
            "N=1e4: sigma_v/v=1% -> sigma_a/<a> = {:.2}% (target 2% +/- 15% rel); 2k dz=0.45 -> spread {:.1}% (target 10 +/- 3; std/mean {:.1}%); emission on -> {:.2}% between 0.1 and 0.9 of peak (window [1,15]%, {:.2}% emitted)",
            rel_v * 100.0,
            spread_z * 100.0,
            sd_z / mean_z * 100.0,
            between * 100.0,
            emitted * 100.0
        ),
    ))
}

fn beam_bytes(ctx: &Context, threads: usize) -> Result<Vec<u8>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(e)?;
    let ens = BeamEnsemble::prepare(
        &ctx.spectrum,
        &ctx.ensemble,
        ctx.laser(),
        ctx.config.window,
        ctx.config.threshold,
        StateSelection::Participating,
        EmissionWidth::UpperLevelTotal,
    )
    .map_err(e)?;
    let mut params = ctx.ground_params(99);
    params.n_molecules = 3000;
    params.sigma_v_rel = 0.05;
    params.delta_z = 0.2 / ctx.laser().wavevector();
    params.diffraction = true;
    params.spontaneous_emission = true;
    let run = pool
        .install(|| {
            simulate_beam(
                &ens,
                ctx.laser(),
                &params,
                ctx.mass(),
                &HistogramSpec::default(),
            )
        })
        .map_err(e)?;
    let mut out = Vec::new();
    run.histogram.write_csv(&mut out).map_err(e)?;
    run.write_trajectories_csv(&mut out).map_err(e)?;
    Ok(out)
}

fn properties(ctx: &Context) -> Check {
    let sum_rule = sum_rule_check(0, 0).map_err(e)?;
    let sum_ok = (sum_rule - 1.0 / 3.0).abs() <= 1e-10;

    let well = MorseWell::from_constants(&ctx.config.molecule.lower).map_err(e)?;
    let id = OverlapMatrix::compute(&well, &well, 0..=9, 0..=9).map_err(e)?;
    let mut id_dev = 0.0f64;
    for i in 0..=9 {
        for j in 0..=9 {
            let target = if i == j { 1.0 } else { 0.0 };
            id_dev = id_dev.max((id.get(i, j).unwrap().abs() - target).abs());
        }
    }
    let id_ok = id_dev <= 1e-6;

    let shift = dressed_shift(Wavenumber::new(3.0), Wavenumber::new(8.0), 1.0)
        .map_err(e)?
        .cm1();
    let shift_ok = (shift - 1.0).abs() <= 1e-12;

    let v0 = ctx.config.beam.v0;
    let closed = deflection_angle(
        &ctx.ground_line,
        ctx.laser(),
        v0,
        ctx.mass(),
        ctx.config.threshold,
    )
    .map_err(e)?
    .angle;
    let ens = ctx.ground_beam(EmissionWidth::UpperLevelTotal)?;
    let coupling = ens.states[0].coupling.ok_or("ground state uncoupled")?;
    let sample = MoleculeSample {
        v_x: v0,
        z: z_for_phase(ctx.laser(), PI / 2.0),
        v_z: 0.0,
    };
    let ode = coherent_trajectory(
        ctx.ground,
        Some(&coupling),
        ctx.laser(),
        &sample,
        ctx.mass(),
        2000,
    )
    .map_err(e)?
    .angle;
    let ode_rel = (ode / closed - 1.0).abs();
    let ode_ok = ode_rel <= 0.30;

    let one = beam_bytes(ctx, 1)?;
    let four = beam_bytes(ctx, 4)?;
    let again = beam_bytes(ctx, 2)?;
    let det_ok = one == four && one == again;

    Ok((
        sum_ok && id_ok && shift_ok && ode_ok && det_ok,
        format!(
            "sum rule J=0: |{sum_rule:.15} - 1/3| <= 1e-10 {sum_ok}; identical-well FC max dev {id_dev:.1e} {id_ok}; shift(3,8) = {shift} {shift_ok}; ODE/closed form = {:.4} {ode_ok}; 1/2/4-thread beam bytes identical {det_ok}",
            ode / closed
        ),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let ctx = match Context::new() {
        Ok(c) => c,
        Err(err) => {
            println!("acceptance setup failed: {err}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: [Criterion; 9] = [
        ("Franck-Condon factor and Numerov oracle", franck_condon),
        ("natural line width", line_width),
        ("coupling constant", coupling),
        ("deflection angle and recoil reference", deflection),
        ("transit time", transit),
        ("spontaneous-emission probability", emission),
        ("frequency-scan structure", scan_structure),
        ("beam broadening", broadening),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match check(&ctx) {
            Ok(r) => r,
            Err(err) => (false, format!("error: {err}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
