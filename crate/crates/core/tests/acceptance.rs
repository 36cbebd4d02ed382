//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails. Run with `cargo test -p bohmsim-core --test acceptance`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use bohmsim_core::ensemble::{equivariance_distance, evolve_ensemble, sample_equilibrium_1d};
use bohmsim_core::manybody::{
    no_tunneling_suite, run_bec_experiment, run_cm_experiment, sector_starts, BecSpec, CmRun,
    FactorizedNBody, SamplingMode, SubsystemType, SymmetrizedTwoBody,
};
use bohmsim_core::propagator::continuity_residual;
use bohmsim_core::quantum_potential::averaged_quantum_force;
use bohmsim_core::stats::{ks_critical_value, mean, median, sample_std};
use bohmsim_core::trajectories::{crosscheck_in, guidance_in, FieldHistory};
use bohmsim_core::wavefield::{init_gaussian, init_plane_wave};
use bohmsim_core::{
    compute_qfields, evolve, make_grid, Grid, PhysicalParams, PotentialSpec, Wavefunction,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion(number: usize, name: &str, limit: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("error: {msg}"))
        }
    };
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    println!(
        "criterion {number:>2} {:<32} {}  {detail}; {:.2} s (limit {} s)",
        name,
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn natural() -> PhysicalParams {
    PhysicalParams::natural(1)
}

fn wide_grid() -> Grid {
    make_grid(1, -20.0, 20.0, 512).unwrap()
}

fn harmonic() -> PotentialSpec {
    PotentialSpec::Harmonic { omega: vec![1.0] }
}

fn ground_state(g: &Grid) -> Wavefunction {
    init_gaussian(g, &natural(), 0.0, 0.5f64.sqrt(), 0.0).unwrap()
}

fn averaging_identity() -> Outcome {
    let g = wide_grid();
    let p = natural();
    let double = {
        let a = init_gaussian(&g, &p, -2.0, 1.0, 0.5).unwrap();
        let b = init_gaussian(&g, &p, 2.5, 0.8, -1.0).unwrap();
        let amps = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x + y).collect();
        Wavefunction::new(g.clone(), p.clone(), amps).unwrap().normalized().unwrap()
    };
    let suite = vec![
        ("gaussian s=0.7 k=0", init_gaussian(&g, &p, 0.0, 0.7, 0.0).unwrap()),
        ("gaussian s=1.0 k=1.5", init_gaussian(&g, &p, 1.0, 1.0, 1.5).unwrap()),
        ("gaussian s=1.5 k=-2", init_gaussian(&g, &p, -1.0, 1.5, -2.0).unwrap()),
        ("double hump", double),
        ("harmonic ground", ground_state(&g)),
    ];
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut localized = true;
    for (_, wf) in &suite {
        let t = Instant::now();
        let a = averaged_quantum_force(wf);
        slowest = slowest.max(t.elapsed());
        worst = worst.max(a.relative());
        localized &= a.localized;
    }
    outcome(
        worst <= 1e-8 && localized && slowest < Duration::from_secs(1),
        format!(
            "{} packets, max |I|/F_Q_max = {worst:.2e} (bound 1e-8), slowest {:.3} s (limit 1 s)",
            suite.len(),
            slowest.as_secs_f64()
        ),
    )
}

fn guidance_newton_equivalence() -> Outcome {
    let dt = 1e-3;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |label: &str, wf: Wavefunction, pot: PotentialSpec, width: f64, starts: &[f64]| {
        let rec = evolve(&wf, &pot, 2.0, dt, 10).unwrap();
        let history = FieldHistory::with_forces(&rec);
        let dev = starts
            .iter()
            .map(|&x0| crosscheck_in(&history, &[x0], &pot, dt, 2.0).unwrap())
            .fold(0.0, f64::max);
        pass &= dev <= 1e-3 * width;
        lines.push(format!("{label} {:.1e}", dev / width));
    };
    let g = wide_grid();
    check(
        "free",
        init_gaussian(&g, &natural(), 0.0, 1.0, 0.0).unwrap(),
        PotentialSpec::Free,
        1.0,
        &[0.5, 1.0, 2.0],
    );
    let pg = make_grid(1, -4.0 * PI, 4.0 * PI, 256).unwrap();
    check(
        "plane wave",
        init_plane_wave(&pg, &natural(), &[2.0]).unwrap(),
        PotentialSpec::Free,
        1.0,
        &[0.0, 1.0],
    );
    let hg = make_grid(1, -10.0, 10.0, 256).unwrap();
    check("ground", ground_state(&hg), harmonic(), 0.5f64.sqrt(), &[-0.5, 0.3, 1.0]);
    outcome(
        pass,
        format!("max deviation / width: {} (bound 1e-3)", lines.join(", ")),
    )
}

fn stationary_state() -> Outcome {
    let g = make_grid(1, -10.0, 10.0, 256).unwrap();
    let p = natural();
    let wf = ground_state(&g);
    let q = compute_qfields(&wf);
    let v = harmonic().sample(&g, &p);
    let energy_dev = (0..g.len())
        .filter(|&j| q.valid[j])
        .map(|j| (q.q.values[j] + v[j] - 0.5).abs())
        .fold(0.0, f64::max);
    let rec = evolve(&wf, &harmonic(), 5.0, 1e-4, 100).unwrap();
    let history = FieldHistory::guidance(&rec);
    let drift = [-1.0, -0.3, 0.2, 0.8]
        .iter()
        .map(|&x0| {
            guidance_in(&history, &[x0], 1e-2, 5.0)
                .unwrap()
                .states
                .iter()
                .map(|s| (s.position[0] - x0).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    outcome(
        energy_dev <= 1e-6 && drift <= 1e-8,
        format!("|Q+V-1/2| = {energy_dev:.2e} (bound 1e-6), drift over t=5 = {drift:.2e} (bound 1e-8)"),
    )
}

fn free_packet_oracle() -> Outcome {
    let wf = init_gaussian(&wide_grid(), &natural(), 0.0, 1.0, 0.0).unwrap();
    let rec = evolve(&wf, &PotentialSpec::Free, 2.0, 1e-3, 10).unwrap();
    let history = FieldHistory::guidance(&rec);
    let worst = [0.5, 1.0, 2.0]
        .iter()
        .map(|&x0| {
            let end = guidance_in(&history, &[x0], 1e-2, 2.0).unwrap().last().position[0];
            let oracle = x0 * 2f64.sqrt();
            (end - oracle).abs() / oracle
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-4, format!("max relative error at t=2 = {worst:.2e} (bound 1e-4)"))
}

fn equivariance() -> Outcome {
    let wf = init_gaussian(&wide_grid(), &natural(), 0.0, 1.0, 0.0).unwrap();
    let rec = evolve(&wf, &PotentialSpec::Free, 2.0, 1e-2, 10).unwrap();
    let history = FieldHistory::guidance(&rec);
    let m = 10_000;
    let starts: Vec<Vec<f64>> = sample_equilibrium_1d(&wf, m, 2024)
        .unwrap()
        .into_iter()
        .map(|x| vec![x])
        .collect();
    let ens = evolve_ensemble(&history, &starts, 1e-2, 2.0, 50, 32).unwrap();
    let bound = 1.5 * ks_critical_value(m, 1.63);
    let ks0 = equivariance_distance(&ens.positions_at(0), &wf).unwrap();
    let ks2 = equivariance_distance(&ens.positions_at(200), rec.last()).unwrap();
    outcome(
        ks0 < bound && ks2 < bound,
        format!("KS(0) = {ks0:.4}, KS(2) = {ks2:.4} (bound {bound:.4})"),
    )
}

fn cm_spec(count: usize, force: f64) -> FactorizedNBody {
    FactorizedNBody::new(
        make_grid(1, -16.0, 16.0, 256).unwrap(),
        vec![SubsystemType {
            mass: 1.0,
            width: 1.0,
        }],
        count,
        0.0,
        PotentialSpec::Linear { force: vec![force] },
    )
}

fn cm_run(mode: SamplingMode, seed: u64) -> CmRun {
    CmRun {
        t_final: 2.0,
        dt: 1e-2,
        record_dt: 1e-2,
        mode,
        seed,
    }
}

fn cm_newton_law() -> Outcome {
    let seeds = 0..20u64;
    let big = cm_spec(1000, 0.5);
    let runs: Vec<_> = seeds
        .clone()
        .map(|s| run_cm_experiment(&big, &cm_run(SamplingMode::Random, 1000 + s)).unwrap())
        .collect();
    let fitted: Vec<f64> = runs.iter().map(|r| r.fitted_acceleration()).collect();
    let a = mean(&fitted);
    let se = sample_std(&fitted) / (fitted.len() as f64).sqrt();
    let small = cm_spec(10, 0.5);
    let small_fq: Vec<f64> = seeds
        .map(|s| {
            run_cm_experiment(&small, &cm_run(SamplingMode::Random, 5000 + s))
                .unwrap()
                .mean_abs_quantum_force_per_particle()
        })
        .collect();
    let big_fq: Vec<f64> = runs.iter().map(|r| r.mean_abs_quantum_force_per_particle()).collect();
    let ratio = median(&small_fq) / median(&big_fq);
    outcome(
        (a - 0.5).abs() <= 3.0 * se && (5.0..=20.0).contains(&ratio),
        format!(
            "a_cm = {a:.5} +/- {se:.5} (|a - 0.5| <= 3 SE), |F_Q_cm|/N shrink N=10 -> 1000 = {ratio:.2} (in [5, 20])"
        ),
    )
}

fn quantum_force_bound() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [100, 1000, 10_000] {
        let r = run_cm_experiment(&cm_spec(n, 0.0), &cm_run(SamplingMode::Stratified, 0)).unwrap();
        pass &= r.quantum_bound_holds();
        lines.push(format!("N={n} {:.1e}", r.max_abs_quantum_force() / r.force_max));
    }
    outcome(pass, format!("max |sum F_Q| / F_Q_max: {} (bound 1)", lines.join(", ")))
}

fn no_tunneling() -> Outcome {
    let g = make_grid(1, -16.0, 16.0, 128).unwrap();
    let a = init_gaussian(&g, &natural(), -5.0, 1.0, 0.0).unwrap();
    let b = init_gaussian(&g, &natural(), 5.0, 1.0, 0.0).unwrap();
    let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sym = SymmetrizedTwoBody::build(&a, &b, [c, c]).unwrap();
    let [s0, s1] = sector_starts(&sym, 10, 7);
    let starts: Vec<Vec<f64>> = s0.into_iter().chain(s1).collect();
    let reports = no_tunneling_suite(&sym, &starts, &PotentialSpec::Free, 1.0, 1e-2, 1e-2).unwrap();
    let min = reports.iter().map(|r| r.residency).fold(1.0, f64::min);
    let per_sector = [0, 1].map(|s| reports.iter().filter(|r| r.sector == s).count());
    outcome(
        min == 1.0 && per_sector == [10, 10],
        format!(
            "{} + {} starts, min residency = {min} (required 1.0), overlap {:.1e}",
            per_sector[0], per_sector[1], sym.overlap
        ),
    )
}

fn bec_counterexample() -> Outcome {
    let spec = BecSpec {
        grid: make_grid(1, -32.0, 32.0, 512).unwrap(),
        hbar: 1.0,
        mass: 1.0,
        omega: 0.1,
        velocity: 1.0,
        count: 1000,
        mode: SamplingMode::Random,
        seed: 3,
    };
    let r = run_bec_experiment(&spec, 2.0, 1e-2).unwrap();
    let linear = r
        .times
        .iter()
        .zip(&r.x_cm)
        .map(|(t, x)| (x - r.x_cm[0] - t).abs())
        .fold(0.0, f64::max);
    let slope = r.fitted_velocity();
    let ratio = r.quantum_to_classical_ratio();
    outcome(
        linear <= 1e-9 && (slope - 1.0).abs() <= 1e-9 && ratio >= 0.1,
        format!(
            "max |x_cm - v t| = {linear:.1e}, slope - v = {:.1e} (bound 1e-9), F_Q/F_cl = {ratio:.3} (not small)",
            slope - 1.0
        ),
    )
}

fn coherent_state(g: &Grid, a: f64, t: f64) -> Vec<Complex64> {
    let (x0, p0) = (a * t.cos(), -a * t.sin());
    (0..g.len())
        .map(|j| {
            let x = g.point(j)[0];
            let amp = PI.powf(-0.25) * (-(x - x0).powi(2) / 2.0).exp();
            Complex64::from_polar(amp, p0 * x - 0.5 * x0 * p0 - 0.5 * t)
        })
        .collect()
}

fn solver_gates() -> Outcome {
    let p = natural();
    let g = make_grid(1, -10.0, 10.0, 256).unwrap();
    let packet = init_gaussian(&g, &p, 1.0, 1.0, 0.5).unwrap();
    let potentials = [
        PotentialSpec::Free,
        harmonic(),
        PotentialSpec::Linear { force: vec![0.3] },
        PotentialSpec::Barrier {
            height: 2.0,
            center: 0.0,
            width: 0.5,
        },
    ];
    let drift = potentials
        .iter()
        .map(|pot| evolve(&packet, pot, 1.0, 1e-3, 100).unwrap().max_norm_drift())
        .fold(0.0, f64::max);

    let start = Wavefunction::new(g.clone(), p.clone(), coherent_state(&g, 1.0, 0.0)).unwrap();
    let exact = coherent_state(&g, 1.0, 1.0);
    let error = |dt: f64| {
        let rec = evolve(&start, &harmonic(), 1.0, dt, 1_000_000).unwrap();
        let sum: f64 = rec
            .last()
            .amplitudes
            .iter()
            .zip(&exact)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum();
        (sum * g.dx(0)).sqrt()
    };
    let ratio = error(0.02) / error(0.01);

    let free = init_gaussian(&make_grid(1, -20.0, 20.0, 256).unwrap(), &p, 0.0, 1.0, 0.0).unwrap();
    let rec = evolve(&free, &PotentialSpec::Free, 2.0, 1e-3, 1).unwrap();
    let residual = continuity_residual(&rec)
        .unwrap()
        .iter()
        .map(|r| r.max_norm)
        .fold(0.0, f64::max);
    outcome(
        drift < 1e-10 && (3.5..=4.5).contains(&ratio) && residual < 1e-8,
        format!(
            "norm drift/step = {drift:.1e} (bound 1e-10), dt ratio = {ratio:.3} (in [3.5, 4.5]), continuity = {residual:.2e} (bound 1e-8)"
        ),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "averaging identity", secs(5), averaging_identity),
        criterion(2, "guidance/Newton equivalence", secs(10), guidance_newton_equivalence),
        criterion(3, "stationary-state statics", secs(10), stationary_state),
        criterion(4, "free-packet oracle", secs(10), free_packet_oracle),
        criterion(5, "equivariance", secs(60), equivariance),
        criterion(6, "centre-of-mass Newton law", secs(300), cm_newton_law),
        criterion(7, "quantum force sum bound", secs(60), quantum_force_bound),
        criterion(8, "no tunneling between sectors", secs(120), no_tunneling),
        criterion(9, "coherent-phase counterexample", secs(10), bec_counterexample),
        criterion(10, "solver quality gates", secs(60), solver_gates),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
