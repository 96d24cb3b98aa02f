use proptest::prelude::*;
use sharp_interface::fermi::chi;
use sharp_interface::harness::ensembles::noisy_twins;
use sharp_interface::harness::stats::quantile;
use sharp_interface::spde::initial::{c_mu, general_initial, sub_initial, super_initial};
use sharp_interface::spde::{
    default_bump, simulate, step, sup_norm_monitor, GeneralParams, NoiseSpec, SimConfig, Stepper, SuperSubParams,
};
use sharp_interface::{solve_standing_wave, Field, Grid1D, ReactionSpec, RngStream, StandingWaveProfile};

fn cubic_profile() -> StandingWaveProfile {
    solve_standing_wave(&ReactionSpec::cubic(), &Grid1D::with_max_spacing(30.0, 5e-3).unwrap()).unwrap()
}

fn heat_config(grid: Grid1D, dt: f64) -> SimConfig {
    let mut cfg = SimConfig::deterministic(1.0, ReactionSpec::linear(0.0), grid, dt);
    cfg.dt = dt;
    cfg.boundary = Some((0.0, 0.0));
    cfg
}

#[test]
fn heat_mode_decays_at_its_eigenvalue() {
    let l = 1.0;
    let grid = Grid1D::new(l, 200).unwrap();
    let dt = 1e-4;
    let cfg = heat_config(grid, dt);
    let k = std::f64::consts::PI / (2.0 * l);
    let u = Field::from_fn(grid, |x| (k * (x + l)).sin());
    let next = step(&u, &cfg, &Field::zeros(grid)).unwrap();
    let ratio = next.l2_norm() / u.l2_norm();
    let expected = (-k * k * dt).exp();
    assert!((ratio - expected).abs() < 1e-3, "ratio {ratio} vs {expected}");
}

#[test]
fn standing_wave_is_an_equilibrium() {
    let eps = 0.01;
    let profile = cubic_profile();
    let grid = Grid1D::for_eps(3.0, eps).unwrap();
    let u = profile.rescale(&grid, eps, 0.0);
    let cfg = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 1.0);
    let next = step(&u, &cfg, &Field::zeros(grid)).unwrap();
    let change = next.sub(&u).sup_norm();
    let dx = grid.dx();
    assert!(change <= 10.0 * (dx * dx + cfg.dt), "change {change}");
}

#[test]
fn zero_amplitude_noise_matches_deterministic_run() {
    let eps = 0.05;
    let grid = Grid1D::for_eps(2.0, eps).unwrap();
    let u0 = general_initial(&grid, eps, &GeneralParams::default()).unwrap();
    let mut det = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 0.1);
    det.record_times = vec![0.05, 0.1];
    let noisy = det.clone().with_noise(NoiseSpec::new(0.5, Field::zeros(grid)), RngStream::new(3, 0));
    let a = simulate(&det, &u0).unwrap();
    let b = simulate(&noisy, &u0).unwrap();
    assert_eq!(a.fields, b.fields);
}

#[test]
fn same_seed_gives_identical_trajectories() {
    let eps = 0.05;
    let grid = Grid1D::for_eps(2.0, eps).unwrap();
    let u0 = general_initial(&grid, eps, &GeneralParams::default()).unwrap();
    let mut cfg = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 0.1)
        .with_noise(NoiseSpec::new(0.5, default_bump(&grid, 1.0)), RngStream::new(11, 4));
    cfg.record_times = vec![0.02, 0.06, 0.1];
    let a = simulate(&cfg, &u0).unwrap();
    let b = simulate(&cfg, &u0).unwrap();
    assert_eq!(a.times, b.times);
    assert_eq!(a.fields, b.fields);
    let other = simulate(&SimConfig { stream: RngStream::new(11, 5), ..cfg }, &u0).unwrap();
    assert_ne!(a.fields.last(), other.fields.last());
}

#[test]
fn odd_symmetry_under_reflected_noise() {
    let eps = 0.05;
    let grid = Grid1D::for_eps(2.0, eps).unwrap();
    let cfg = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 0.2)
        .with_noise(NoiseSpec::new(0.5, default_bump(&grid, 1.0)), RngStream::new(5, 0));
    let n = grid.len();
    let support = cfg.noise.support();
    assert_eq!(support.start, n - support.end);
    let u0 = Field::from_fn(grid, |x| (3.0 * x).tanh());
    let mut a = u0.values.clone();
    let mut b = u0.values.clone();
    let mut st_a = Stepper::new(&cfg).unwrap();
    let mut st_b = Stepper::new(&cfg).unwrap();
    let mut noise = cfg.stream.generator();
    let sd = (cfg.dt / grid.dx()).sqrt();
    let mut dw = vec![0.0; support.len()];
    for k in 0..cfg.n_steps() {
        noise.fill_normal(&mut dw, sd);
        let reflected: Vec<f64> = dw.iter().rev().map(|v| -v).collect();
        st_a.advance(&mut a, &dw, k as f64).unwrap();
        st_b.advance(&mut b, &reflected, k as f64).unwrap();
    }
    let worst = (0..n).map(|i| (b[i] + a[n - 1 - i]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "worst {worst}");
}

#[test]
fn super_and_sub_data_bracket_the_base() {
    let eps = 0.01;
    let profile = cubic_profile();
    let grid = Grid1D::for_eps(4.0, eps).unwrap();
    let p = SuperSubParams { xi0: 0.0, c: 1.0, c_prime: 1.0, beta_bar: 0.4, kappa: 0.6 };
    let wave = profile.rescale(&grid, eps, 0.0);
    let base = wave.zip_map(&Field::from_fn(grid, |x| (3.0 * x).sin()), |m, s| m + 0.5 * eps.powf(p.kappa) * s);
    let hi = super_initial(&base, &profile, eps, &p).unwrap();
    let lo = sub_initial(&base, &profile, eps, &p).unwrap();
    for i in 0..grid.len() {
        assert!(hi.values[i] >= base.values[i], "super below base at x = {}", grid.x(i));
        assert!(lo.values[i] <= base.values[i], "sub above base at x = {}", grid.x(i));
    }
}

#[test]
fn deterministic_run_stays_below_twice_c0() {
    let eps = 0.02;
    let grid = Grid1D::for_eps(3.0, eps).unwrap();
    let u0 = general_initial(&grid, eps, &GeneralParams { wiggle: 0.03, ..GeneralParams::default() }).unwrap();
    let mut cfg = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 0.2);
    cfg.record_times = (1..=40).map(|k| 0.005 * k as f64).collect();
    let traj = simulate(&cfg, &u0).unwrap();
    assert_eq!(sup_norm_monitor(&traj, 2.0), None);
}

fn twin_ratios(eps: f64, gamma: f64, seed: u64) -> Vec<(f64, f64)> {
    let r = ReactionSpec::cubic();
    let mu = r.constants().unwrap().mu;
    let grid = Grid1D::for_eps(3.0, eps).unwrap();
    let u0 = general_initial(&grid, eps, &GeneralParams::default()).unwrap();
    let t_end = eps * eps.ln().abs() / mu;
    let run = noisy_twins(eps, gamma, &r, &u0, 1.0, t_end, 100, seed).unwrap();
    assert!(run.failures.is_empty());
    run.completed.iter().map(|o| (o.gap, eps.powf(gamma) * o.noise_factor)).collect()
}

#[test]
fn noisy_run_stays_within_noise_envelope_of_its_twin() {
    let gamma = 0.5;
    let coarse = twin_ratios(0.05, gamma, 21);
    let mut ratios: Vec<f64> = coarse.iter().map(|(g, e)| g / e).collect();
    ratios.sort_by(f64::total_cmp);
    let c = quantile(&ratios, 0.95);
    let fine = twin_ratios(0.02, gamma, 22);
    let inside = fine.iter().filter(|(g, e)| *g <= c * e).count() as f64 / fine.len() as f64;
    assert!(inside >= 0.95, "fraction inside {inside}, envelope constant {c}");
}

#[test]
fn right_tail_relaxes_to_the_stable_state() {
    let eps = 0.02;
    let gamma = 0.5;
    let r = ReactionSpec::cubic();
    let mu = r.constants().unwrap().mu;
    let grid = Grid1D::for_eps(4.0, eps).unwrap();
    let p = GeneralParams::default();
    let u0 = general_initial(&grid, eps, &p).unwrap();
    let t = eps * eps.ln().abs() / mu;
    let mut cfg = SimConfig::deterministic(eps, r, grid, t).with_noise(NoiseSpec::new(gamma, default_bump(&grid, 1.0)), RngStream::new(0, 0));
    cfg.record_times = vec![t];
    let kappa = gamma.min(p.kappa);
    let n_paths = 100;
    let mut good = 0;
    for i in 0..n_paths {
        let traj = simulate(&SimConfig { stream: RngStream::new(31, i), ..cfg.clone() }, &u0).unwrap();
        let u = traj.fields.last().unwrap();
        let ok = (0..grid.len()).filter(|&j| grid.x(j) >= 1.0).all(|j| {
            let x = grid.x(j);
            (u.values[j] - 1.0).abs() <= eps.powf(kappa) * (c_mu(mu) * (-mu.sqrt() * x / 2.0).exp() + 1.0)
        });
        good += ok as usize;
    }
    assert!(good as f64 >= 0.95 * n_paths as f64, "{good} of {n_paths}");
}

#[test]
fn step_profile_is_the_sharp_limit() {
    let profile = cubic_profile();
    let mut last = f64::INFINITY;
    for eps in [0.04, 0.01, 0.0025] {
        let grid = Grid1D::for_eps(2.0, eps).unwrap();
        let gap = profile.rescale(&grid, eps, 0.1).sub(&chi(&grid, 0.1)).l2_norm();
        assert!(gap < last);
        last = gap;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn shared_noise_preserves_order(lift in 0.0f64..0.3, shift in 0.0f64..0.3, seed in 0u64..1000) {
        let eps = 0.1;
        let grid = Grid1D::for_eps(2.0, eps).unwrap();
        let base = Field::from_fn(grid, |x| (x / eps.sqrt()).tanh());
        let upper = Field::from_fn(grid, |x| ((x + shift) / eps.sqrt()).tanh() + lift * (1.0 - x * x / 4.0));
        let mut cfg = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 0.2)
            .with_noise(NoiseSpec::new(0.5, default_bump(&grid, 1.0)), RngStream::new(seed, 0));
        cfg.record_times = (1..=10).map(|k| 0.02 * k as f64).collect();
        let lo = simulate(&cfg, &base).unwrap();
        let hi = simulate(&cfg, &upper).unwrap();
        let tol = 10.0 * (grid.dx() * grid.dx() + cfg.dt);
        for (a, b) in lo.fields.iter().zip(&hi.fields) {
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!(x - y <= tol);
            }
        }
    }

    #[test]
    fn general_datum_has_one_sign_change(xi0 in -0.4f64..0.4, wiggle in -0.03f64..0.03) {
        let eps = 0.01;
        let grid = Grid1D::for_eps(3.0, eps).unwrap();
        let u = general_initial(&grid, eps, &GeneralParams { xi0, wiggle, ..GeneralParams::default() }).unwrap();
        let changes = u.values.windows(2).filter(|w| w[0] < 0.0 && w[1] >= 0.0 || w[0] >= 0.0 && w[1] < 0.0).count();
        prop_assert_eq!(changes, 1);
        let i = grid.nearest(xi0);
        prop_assert!(u.values[i].abs() <= u.values[i - 1].abs().max(u.values[i + 1].abs()));
    }
}
