//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line and
//! then asserts, so `cargo test --test acceptance -- --nocapture` doubles as a
//! readable report.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use exciton::control::fieldmap::{
    beam_pulse_axial, dc_gradient_pulse, pulse_to_delta_beam, pulse_to_delta_dc, GaussianBeam, Level,
    MolecularConstants,
};
use exciton::control::{
    linear_kick_mask, magic_angle, optimal_lens_gaussian, plane_wave_focus_profile, steering_schedule,
    ControlProtocol, SteeringMode, SteeringPoint,
};
use exciton::coupling::{
    build_hamiltonian, build_periodic_hamiltonian, coupling_element, dispersion_lr, dispersion_nn, CouplingModel,
    FieldOrientation,
};
use exciton::disorder_focus::{
    block_focus_experiment, enhancement_experiment, focus_time_scan, BlockFocusConfig, BlockFocusReport,
    EnhancementConfig, InitialState,
};
use exciton::evolve::{
    apply_phase_mask, propagate_dispersion_1d, propagate_epochs, propagate_pulsed, propagate_pulsed_fixed,
    time_grid, DenseEigen, IntegratorOptions, PropagationOptions, Propagator, PulseProfile, PulseSchedule,
    RecordOptions,
};
use exciton::lattice::{sample_disorder, DisorderRealization, LatticeSpec};
use exciton::wavepacket::{
    k_transform, make_bessel_focus, make_eigenstate, make_gaussian, make_uniform, ExcitonState,
    GaussianPacket,
};

// reference system
const A: f64 = 400e-9;
const ALPHA: f64 = TAU * 22.83e3;
const DELTA_E: f64 = TAU * 12.14e9;
const KV_PER_CM: f64 = 1e5;

// pinned tolerances
const DISPERSION_REL: f64 = 1e-10;
const KICK_REL: f64 = 0.07;
const SHAPE_ABS: f64 = 1e-10;
const BESSEL_MIN: f64 = 0.99;
const LENS_TIME_REL: f64 = 0.15;
const LENS_WIDTH_MAX: f64 = 2.0;
const DIPOLAR_SPEEDUP_MAX: f64 = 2.0;
const PLANE_FOCUS_MIN: f64 = 0.95;
const PROFILE_L2_MAX: f64 = 0.05;
const STARK_REL: f64 = 0.07;
const MAGIC_ABS: f64 = 1e-12;
const CURVE_MIN_TURN: f64 = 0.5;
const CHI_COLLAPSE: f64 = 3.0;
const ORDER_OF_MAGNITUDE: f64 = 3.1622776601683795;
const BLOCK_RATIO_LO: f64 = 0.5;
const BLOCK_RATIO_HI: f64 = 2.0;
const BLOCK_COLLAPSE: f64 = 3.0;
const NORM_DRIFT: f64 = 1e-9;
const SYMMETRY_ABS: f64 = 1e-10;

/// Written to the raw stderr handle so the line survives output capture.
fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {id:>2} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn within_budget(start: Instant, budget: Duration) -> bool {
    start.elapsed() <= budget
}

fn chain(n: usize) -> Arc<DisorderRealization<f64>> {
    Arc::new(DisorderRealization::full(LatticeSpec::chain(n, A).unwrap()))
}

fn nn() -> CouplingModel<f64> {
    CouplingModel::nearest_neighbor(ALPHA, DELTA_E)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn quantized_spectrum(n: usize, e: impl Fn(f64) -> f64) -> Vec<f64> {
    sorted((0..n).map(|nu| e(TAU * nu as f64 / (n as f64 * A))).collect())
}

fn max_rel(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max)
}

#[test]
fn c01_dispersion_oracle() {
    let t0 = Instant::now();
    let spec = LatticeSpec::chain(64, A).unwrap();
    let h = build_periodic_hamiltonian(&nn(), &spec).unwrap();
    let got = sorted(DenseEigen::new(&h).eigenvalues());
    let want = quantized_spectrum(64, |k| dispersion_nn(&nn(), A, k));
    let err_nn = max_rel(&got, &want, DELTA_E);

    // without the site energy the comparison is relative to the band itself
    let mut gauged = nn();
    gauged.gauge_site_energy = true;
    let h = build_periodic_hamiltonian(&gauged, &spec).unwrap();
    let got = sorted(DenseEigen::new(&h).eigenvalues());
    let want = quantized_spectrum(64, |k| dispersion_nn(&gauged, A, k));
    let err_band = max_rel(&got, &want, 2.0 * ALPHA);

    let dip = CouplingModel::dipolar(ALPHA, DELTA_E, FieldOrientation::perpendicular(), Some(10.0));
    let h = build_periodic_hamiltonian(&dip, &spec).unwrap();
    let got = sorted(DenseEigen::new(&h).eigenvalues());
    let want = quantized_spectrum(64, |k| dispersion_lr(&dip, A, k).unwrap());
    let err_lr = max_rel(&got, &want, DELTA_E);

    let fast = within_budget(t0, Duration::from_secs(1));
    let pass = err_nn < DISPERSION_REL && err_band < DISPERSION_REL && err_lr < DISPERSION_REL && fast;
    verdict(
        1,
        "dispersion oracle",
        pass,
        format!("nn {err_nn:.1e}, band {err_band:.1e}, dipolar {err_lr:.1e}, {:.2?}", t0.elapsed()),
    );
    assert!(pass);
}

fn reference_packet(r: &Arc<DisorderRealization<f64>>) -> ExcitonState<f64> {
    make_gaussian(r.clone(), GaussianPacket { center: [100.0, 0.0], width: 10.0, carrier: [0.0; 2] }).unwrap()
}

fn reference_beam() -> GaussianBeam {
    GaussianBeam { peak_intensity: 1e11, waist: 5e-6, wavelength: 1064e-9 }
}

/// k-center shift in units of 1/a produced by a full pulsed run.
fn pulsed_shift(schedule: &PulseSchedule<f64>, r: &Arc<DisorderRealization<f64>>) -> (f64, f64) {
    let h = build_hamiltonian(&nn(), r.clone()).unwrap();
    let psi = reference_packet(r);
    let before = k_transform(&psi).center_ak()[0];
    let (run, _) = propagate_pulsed(
        &h,
        schedule,
        &psi,
        &[schedule.end()],
        &IntegratorOptions::default(),
        RecordOptions::default(),
    )
    .unwrap();
    let after = k_transform(run.final_state()).center_ak()[0];
    (after - before, run.max_norm_drift())
}

#[test]
fn c02_momentum_kick() {
    let t0 = Instant::now();
    let r = chain(201);
    let m = MolecularConstants::lics();
    let beam = reference_beam();
    let duration = 3e-6;
    // array on the beam axis, first molecule 5 μm from the focus
    let schedule = beam_pulse_axial(&m, &beam, &r, 5e-6, 0.0, duration).unwrap();
    let analytic = pulse_to_delta_beam(&m, &beam, duration) * A;
    let (simulated, drift) = pulsed_shift(&schedule, &r);
    let rel = (simulated / analytic - 1.0).abs();

    let psi = reference_packet(&r);
    let kicked = apply_phase_mask(&psi, &linear_kick_mask(r.clone(), [1.29 / A, 0.0])).unwrap();
    let mask_shift = k_transform(&kicked).center_ak()[0] - k_transform(&psi).center_ak()[0];
    let resolution = TAU / 201.0;
    let mask_ok = (mask_shift - 1.29).abs() < resolution;

    let fast = within_budget(t0, Duration::from_secs(10));
    let pass = rel < KICK_REL && mask_ok && drift < NORM_DRIFT && fast;
    verdict(
        2,
        "momentum kick",
        pass,
        format!(
            "pulse a·δ {simulated:.4} vs analytic {analytic:.4} ({:.2}%), mask shift {mask_shift:.4}, {:.2?}",
            100.0 * rel,
            t0.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn c03_kick_shape_preservation() {
    let t0 = Instant::now();
    let n = 128usize;
    let r = chain(n);
    let mut runner = TestRunner::new(Config { cases: 64, ..Config::default() });
    let strategy = (20.0..108.0f64, 2.0..20.0f64, -PI..PI, -(n as i64)..(n as i64));
    let result = runner.run(&strategy, |(center, width, carrier, m)| {
        let psi =
            make_gaussian(r.clone(), GaussianPacket { center: [center, 0.0], width, carrier: [carrier, 0.0] })
                .unwrap();
        let delta = TAU * m as f64 / (n as f64 * A);
        let kicked = apply_phase_mask(&psi, &linear_kick_mask(r.clone(), [delta, 0.0])).unwrap();
        let before = k_transform(&psi);
        let after = k_transform(&kicked);
        let shift = m.rem_euclid(n as i64) as usize;
        for nu in 0..n {
            let d = (after.amplitudes()[(nu + shift) % n].norm() - before.amplitudes()[nu].norm()).abs();
            prop_assert!(d < SHAPE_ABS, "bin {} differs by {:e}", nu, d);
        }
        Ok(())
    });
    let fast = within_budget(t0, Duration::from_secs(1));
    let pass = result.is_ok() && fast;
    verdict(3, "kick shape preservation", pass, format!("64 cases, {:.2?}", t0.elapsed()));
    assert!(pass, "{result:?}");
}

#[test]
fn c04_bessel_focusing() {
    let t0 = Instant::now();
    let r = chain(201);
    let h = build_hamiltonian(&nn(), r.clone()).unwrap();
    let prop = Propagator::new(&h, PropagationOptions::default());
    let mut probs = Vec::new();
    for x in [5.0, 10.0, 20.0] {
        let tau = x / (2.0 * ALPHA);
        let psi = make_bessel_focus(r.clone(), [100, 0], tau, ALPHA).unwrap();
        probs.push(prop.evolve(&psi, tau).unwrap().probability([100, 0]));
    }
    let fast = within_budget(t0, Duration::from_secs(5));
    let pass = probs.iter().all(|&p| p > BESSEL_MIN) && fast;
    verdict(4, "Bessel focusing", pass, format!("target probabilities {probs:.5?}, {:.2?}", t0.elapsed()));
    assert!(pass);
}

/// Time and width of the maximal target probability over `(0, t_max]`.
fn lens_focus(model: &CouplingModel<f64>, sigma: f64, t_max: f64) -> (f64, f64, f64) {
    let r = chain(201);
    let h = build_hamiltonian(model, r.clone()).unwrap();
    let psi = make_gaussian(r.clone(), GaussianPacket { center: [100.0, 0.0], width: sigma, carrier: [0.0; 2] })
        .unwrap();
    let lens = ControlProtocol::QuadraticLens { phi0: optimal_lens_gaussian(sigma), target: [100.0, 0.0] };
    let psi = apply_phase_mask(&psi, &lens.mask(r)).unwrap();
    let prop = Propagator::new(&h, PropagationOptions::default());
    let times = time_grid(t_max / 4000.0, t_max, 4000);
    let rec = RecordOptions { target: Some([100, 0]), snapshot_stride: 0 };
    let run = prop.trajectory(&psi, &times, rec).unwrap();
    let best = run
        .diagnostics
        .iter()
        .max_by(|a, b| a.target_probability.unwrap().total_cmp(&b.target_probability.unwrap()))
        .unwrap();
    (best.time, best.width_sites[0], best.target_probability.unwrap())
}

#[test]
fn c05_gaussian_lens() {
    let t0 = Instant::now();
    let sigma = 10.0;
    let phi0 = optimal_lens_gaussian(sigma);
    let t_star = 1.0 / (4.0 * ALPHA * phi0);
    let (t_nn, width, p_nn) = lens_focus(&nn(), sigma, 2.0 * t_star);
    let dip = CouplingModel::dipolar(ALPHA, DELTA_E, FieldOrientation::perpendicular(), None);
    let (t_dip, _, _) = lens_focus(&dip, sigma, 2.0 * t_star);
    let rel = (t_nn / t_star - 1.0).abs();
    let speedup = t_nn / t_dip;

    let fast = within_budget(t0, Duration::from_secs(30));
    let pass = rel <= LENS_TIME_REL && width <= LENS_WIDTH_MAX && (1.0..=DIPOLAR_SPEEDUP_MAX).contains(&speedup) && fast;
    verdict(
        5,
        "Gaussian lens",
        pass,
        format!(
            "t_max/t* = {:.3}, width {width:.2} sites, p {p_nn:.3}, dipolar speed-up {speedup:.3}, {:.2?}",
            t_nn / t_star,
            t0.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn c06_plane_wave_lens() {
    let t0 = Instant::now();
    let n = 201usize;
    let r = chain(n);
    let centre = [100.0, 0.0];
    // pure quadratic band with the curvature of the nearest-neighbour band at k = 0
    let omega = |ak: f64| -ALPHA * ak * ak;
    let wave = make_eigenstate(r.clone(), [0.0, 0.0]).unwrap();

    let phi0 = PI / n as f64;
    let lensed = apply_phase_mask(&wave, &ControlProtocol::QuadraticLens { phi0, target: centre }.mask(r.clone()))
        .unwrap();
    let focused = propagate_dispersion_1d(&lensed, omega, 1.0 / (4.0 * ALPHA * phi0), 2).unwrap();
    let p_focus = focused.probability([100, 0]);

    let phi0 = 1.0 / (2.0 * n as f64);
    let lensed = apply_phase_mask(&wave, &ControlProtocol::QuadraticLens { phi0, target: centre }.mask(r.clone()))
        .unwrap();
    let focused = propagate_dispersion_1d(&lensed, omega, 1.0 / (4.0 * ALPHA * phi0), 2).unwrap();
    let delta_k = 2.0 * n as f64 * phi0;
    let (mut num, mut den) = (0.0, 0.0);
    for (row, p) in focused.probabilities().iter().enumerate() {
        let want = plane_wave_focus_profile(row as f64 - 100.0, delta_k);
        num += (p - want).powi(2);
        den += want * want;
    }
    let l2 = (num / den).sqrt();

    let fast = within_budget(t0, Duration::from_secs(10));
    let pass = p_focus > PLANE_FOCUS_MIN && l2 < PROFILE_L2_MAX && fast;
    verdict(
        6,
        "plane-wave lens",
        pass,
        format!("focus probability {p_focus:.4}, profile L2 error {:.3}%, {:.2?}", 100.0 * l2, t0.elapsed()),
    );
    assert!(pass);
}

#[test]
fn c07_stark_maps() {
    let t0 = Instant::now();
    let exact = Level::Ground.g_coefficient() == (-1, 3)
        && Level::Excited.g_coefficient() == (1, 5)
        && Level::Ground.f_coefficient() == (-1, 3)
        && Level::Excited.f_coefficient() == (-3, 5);
    let r = chain(201);
    let m = MolecularConstants::lics();
    let (field, gradient, duration) = (KV_PER_CM, 7.434e-4 * KV_PER_CM, 1e-6);
    let schedule = dc_gradient_pulse(&m, &r, field, gradient, 100.0, 0.0, duration).unwrap();
    let (simulated, drift) = pulsed_shift(&schedule, &r);
    let analytic = pulse_to_delta_dc(&m, field, gradient, duration, A) * A;
    // the quoted kick is a magnitude; the sign follows the gradient direction
    let rel_target = (simulated.abs() / FRAC_PI_2 - 1.0).abs();
    let rel_formula = (simulated / analytic - 1.0).abs();

    let fast = within_budget(t0, Duration::from_secs(10));
    let pass = exact && rel_target < STARK_REL && rel_formula < STARK_REL && drift < NORM_DRIFT && fast;
    verdict(
        7,
        "Stark maps",
        pass,
        format!(
            "a·δ {simulated:.4} vs π/2 ({:.2}%), vs formula {analytic:.4} ({:.2}%), {:.2?}",
            100.0 * rel_target,
            100.0 * rel_formula,
            t0.elapsed()
        ),
    );
    assert!(pass);
}

fn center_path(
    model: &CouplingModel<f64>,
    r: Arc<DisorderRealization<f64>>,
    psi: &ExcitonState<f64>,
    points: &[SteeringPoint<f64>],
    end: f64,
    mode: SteeringMode,
    samples: usize,
) -> (Vec<[f64; 2]>, f64) {
    let epochs = steering_schedule(model, r, points, end, mode).unwrap();
    let times = time_grid(end / samples as f64, end, samples);
    let run = propagate_epochs(&epochs, psi, &times, PropagationOptions::default(), RecordOptions::default())
        .unwrap();
    let drift = run.max_norm_drift();
    (run.diagnostics.iter().map(|d| d.center).collect(), drift)
}

#[test]
fn c08_magic_angle_steering() {
    let t0 = Instant::now();
    let dip = CouplingModel::dipolar(ALPHA, DELTA_E, FieldOrientation::perpendicular(), None);
    let theta_m = magic_angle::<f64>();
    let at = |theta: f64| coupling_element(&dip.with_orientation(FieldOrientation::new(theta, 0.0)), [1, 0]).unwrap();
    let crossing = (theta_m - (1.0 / 3f64.sqrt()).acos()).abs() < 1e-15
        && at(theta_m).abs() < MAGIC_ABS * ALPHA
        && at(theta_m - 0.01) < 0.0
        && at(theta_m + 0.01) > 0.0;

    // 1D: a packet moving at maximal group velocity turns back when the field
    // is rotated from perpendicular to along the chain
    let r = chain(201);
    let psi = make_gaussian(r.clone(), GaussianPacket { center: [100.0, 0.0], width: 8.0, carrier: [FRAC_PI_2, 0.0] })
        .unwrap();
    let switch = 40e-6;
    let points = [
        SteeringPoint { time: 0.0, orientation: FieldOrientation::perpendicular() },
        SteeringPoint { time: switch, orientation: FieldOrientation::new(0.0, 0.0) },
    ];
    let (path, drift_1d) = center_path(&dip, r, &psi, &points, 2.0 * switch, SteeringMode::Step, 20);
    let v1 = path[9][0] - 100.0;
    let v2 = path[19][0] - path[9][0];
    let reversed = v1 * v2 < 0.0 && v1.abs() > 3.0 && v2.abs() > 3.0;

    // 2D: sweeping the azimuth of an in-plane field bends the trajectory
    let r = Arc::new(DisorderRealization::full(LatticeSpec::square(41, 41, A).unwrap()));
    let dip2 = CouplingModel::dipolar(ALPHA, DELTA_E, FieldOrientation::new(0.0, 0.0), Some(3.0));
    let psi = make_gaussian(
        r.clone(),
        GaussianPacket { center: [20.0, 20.0], width: 4.0, carrier: [FRAC_PI_2, FRAC_PI_2] },
    )
    .unwrap();
    let sweep = 24e-6;
    let points = [
        SteeringPoint { time: 0.0, orientation: FieldOrientation::new(0.0, 0.0) },
        SteeringPoint { time: sweep, orientation: FieldOrientation::new(0.0, FRAC_PI_2) },
    ];
    let (path, drift_2d) = center_path(&dip2, r, &psi, &points, sweep + 1e-9, SteeringMode::Ramp { slices: 12 }, 12);
    let heading = |p: [f64; 2], q: [f64; 2]| (q[1] - p[1]).atan2(q[0] - p[0]);
    let first = heading([20.0, 20.0], path[2]);
    let last = heading(path[9], path[11]);
    let turn = (last - first + PI).rem_euclid(TAU) - PI;
    let curved = turn.abs() > CURVE_MIN_TURN;

    let fast = within_budget(t0, Duration::from_secs(60));
    let pass = crossing && reversed && curved && drift_1d < NORM_DRIFT && drift_2d < NORM_DRIFT && fast;
    verdict(
        8,
        "magic-angle steering",
        pass,
        format!(
            "α(θm)/α = {:.1e}, 1D displacements {v1:+.1} then {v2:+.1} sites, 2D heading turn {turn:.2} rad, {:.2?}",
            at(theta_m) / ALPHA,
            t0.elapsed()
        ),
    );
    assert!(pass);
}

fn desk_config(vacancy: f64, focus_time: f64) -> EnhancementConfig<f64> {
    let sigma = 10.0;
    EnhancementConfig {
        model: CouplingModel::dipolar(ALPHA, DELTA_E, FieldOrientation::perpendicular(), Some(10.0)),
        spec: LatticeSpec::square(51, 51, A).unwrap(),
        vacancy_fraction: vacancy,
        realizations: 24,
        seed: 2024,
        protocol: ControlProtocol::QuadraticLens { phi0: optimal_lens_gaussian(sigma), target: [25.0, 25.0] },
        initial: InitialState::Gaussian(GaussianPacket { center: [25.0, 25.0], width: sigma, carrier: [0.0; 2] }),
        target: [25, 25],
        focus_time,
        propagation: PropagationOptions::default(),
        chi_cap: 1e6,
    }
}

#[test]
fn c09_vacancy_robustness() {
    let t0 = Instant::now();
    let clean = Arc::new(DisorderRealization::full(LatticeSpec::square(51, 51, A).unwrap()));
    let scan = focus_time_scan(&desk_config(0.0, 0.0), clean, 40e-6, 80).unwrap();
    let low = enhancement_experiment(&desk_config(0.1, scan.time)).unwrap();
    let high = enhancement_experiment(&desk_config(0.3, scan.time)).unwrap();
    let ratio = low.chi.mean / high.chi.mean;
    let eta = low.realizations[0].eta;
    let eta_ok = (10.0 / ORDER_OF_MAGNITUDE..=10.0 * ORDER_OF_MAGNITUDE).contains(&eta);

    let fast = within_budget(t0, Duration::from_secs(600));
    let pass = ratio > CHI_COLLAPSE && eta_ok && fast;
    verdict(
        9,
        "vacancy robustness",
        pass,
        format!(
            "t* {:.2} μs, mean χ {:.2} at 10% vs {:.2} at 30% (ratio {ratio:.2}), single-realization η {eta:.1}, {:.2?}",
            scan.time * 1e6,
            low.chi.mean,
            high.chi.mean,
            t0.elapsed()
        ),
    );
    assert!(pass);
}

fn block_config(vacancy: f64, block: usize, horizon: f64, realizations: usize) -> BlockFocusConfig<f64> {
    BlockFocusConfig {
        model: CouplingModel::dipolar(ALPHA, DELTA_E, FieldOrientation::perpendicular(), Some(10.0)),
        spec: LatticeSpec::square(101, 101, A).unwrap(),
        vacancy_fraction: vacancy,
        realizations,
        seed: 8,
        block_shape: [block, block],
        target: [50, 50],
        horizon,
        initial: InitialState::Uniform,
        propagation: PropagationOptions::default(),
    }
}

fn mean_occupied_blocks(report: &BlockFocusReport) -> f64 {
    report.realizations.iter().map(|o| o.occupied_blocks as f64).sum::<f64>() / report.realizations.len() as f64
}

#[test]
fn c10_block_phase_focusing() {
    let t0 = Instant::now();
    // 13×13-site blocks tile 101×101 into 8×8 = 64 blocks
    let coarse = block_focus_experiment(&block_config(0.6, 13, 3e-3, 4)).unwrap();
    let m = mean_occupied_blocks(&coarse);
    let gain = coarse.gain.mean;
    let ratio_ok = gain >= BLOCK_RATIO_LO * m && gain <= BLOCK_RATIO_HI * m;

    // 7×7-site blocks give 15×15 = 225 blocks
    let fig8 = block_focus_experiment(&block_config(0.6, 7, 3e-3, 4)).unwrap();
    let eta8 = fig8.eta.mean;
    let eta8_ok = (60.0 / ORDER_OF_MAGNITUDE..=60.0 * ORDER_OF_MAGNITUDE).contains(&eta8);

    let scan: Vec<(f64, f64)> = [0.6, 0.7, 0.8]
        .iter()
        .map(|&v| (v, block_focus_experiment(&block_config(v, 7, 4e-3, 4)).unwrap().eta.mean))
        .collect();
    let collapse = scan[2].1 * BLOCK_COLLAPSE < scan[0].1 && scan[1].1 < scan[0].1;
    let reciprocity = coarse
        .realizations
        .iter()
        .chain(&fig8.realizations)
        .map(|o| o.reciprocity_residual)
        .fold(0.0, f64::max);

    let fast = within_budget(t0, Duration::from_secs(1800));
    let pass = ratio_ok && eta8_ok && collapse && reciprocity < SYMMETRY_ABS && fast;
    verdict(
        10,
        "block-phase focusing",
        pass,
        format!(
            "gain {gain:.1} for M = {m:.1}, 225-block η {eta8:.1}, η scan {scan:.1?}, reciprocity {reciprocity:.1e}, {:.2?}",
            t0.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn c11_universal_properties() {
    let t0 = Instant::now();
    let mut worst_drift: f64 = 0.0;
    let mut worst_asym: f64 = 0.0;
    for seed in 0..6u64 {
        let spec = LatticeSpec::square(4 + seed as usize % 3, 5, 1.0).unwrap();
        let r = Arc::new(sample_disorder(&spec, 0.3, seed).unwrap());
        let theta = 0.3 + 0.2 * seed as f64;
        let model = CouplingModel::dipolar(1.0, 0.5, FieldOrientation::new(theta, 0.7 * seed as f64), Some(3.0));
        let h = build_hamiltonian(&model, r.clone()).unwrap();
        let u = DenseEigen::new(&h).evolution_matrix(1.7 + seed as f64);
        worst_asym = worst_asym.max((&u - u.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max));
        let psi = make_uniform(r).unwrap();
        for t in [0.5, 3.0, 20.0] {
            let dense = Propagator::new(&h, PropagationOptions::default()).evolve(&psi, t).unwrap();
            let cheb = Propagator::new(&h, PropagationOptions { dense_limit: 0, ..PropagationOptions::default() })
                .evolve(&psi, t)
                .unwrap();
            worst_drift = worst_drift.max((dense.norm_sqr() - 1.0).abs()).max((cheb.norm_sqr() - 1.0).abs());
        }
    }

    // exponential midpoint: halving the step quarters the error
    let r = Arc::new(DisorderRealization::full(LatticeSpec::chain(10, 1.0).unwrap()));
    let h = build_hamiltonian(&CouplingModel::nearest_neighbor(1.0, 0.0), r.clone()).unwrap();
    let amps: Vec<f64> = (0..10).map(|i| 3.0 * (i as f64 - 4.5) / 4.5).collect();
    let schedule = PulseSchedule::new(0.0, 2.0, PulseProfile::Sin2 { amplitudes: amps }).unwrap();
    let psi = ExcitonState::from_amplitudes(
        r,
        (0..10).map(|i| Complex::from_polar(1.0, 0.4 * i as f64)).collect(),
    )
    .unwrap();
    let reference = propagate_pulsed_fixed(&h, &schedule, &psi, 2.0, 1 << 14).unwrap();
    let err = |steps: usize| {
        let s = propagate_pulsed_fixed(&h, &schedule, &psi, 2.0, steps).unwrap();
        s.amplitudes()
            .iter()
            .zip(reference.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let orders: Vec<f64> = [16usize, 32, 64].iter().map(|&n| (err(n) / err(2 * n)).log2()).collect();
    let order_ok = orders.iter().all(|o| (o - 2.0).abs() < 0.1);
    let (run, _) = propagate_pulsed(
        &h,
        &schedule,
        &psi,
        &[1.0, 2.0, 3.0],
        &IntegratorOptions::default(),
        RecordOptions::default(),
    )
    .unwrap();
    worst_drift = worst_drift.max(run.max_norm_drift());
    let adaptive = run.final_state();
    let fixed = propagate_pulsed_fixed(&h, &schedule, &psi, 2.0, 1 << 14).unwrap();
    let tail = Propagator::new(&h, PropagationOptions::default()).evolve(&fixed, 1.0).unwrap();
    let adaptive_err = adaptive
        .amplitudes()
        .iter()
        .zip(tail.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let pass = worst_drift < NORM_DRIFT && worst_asym < SYMMETRY_ABS && order_ok && adaptive_err < 1e-6;
    verdict(
        11,
        "universal properties",
        pass,
        format!(
            "norm drift {worst_drift:.1e}, U asymmetry {worst_asym:.1e}, observed orders {orders:.3?}, adaptive error {adaptive_err:.1e}, {:.2?}",
            t0.elapsed()
        ),
    );
    assert!(pass);
}
