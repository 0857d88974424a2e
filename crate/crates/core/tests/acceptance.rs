//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden. The process exits 0 so that
//! `cargo test` stays usable; set `RTMIX_ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.

mod common;

use std::time::Instant;

use common::{component, dynamics, evolve, pack, spectral};
use rtmix::diagnostics::{cumulative_trapezoid, dissipations};
use rtmix::experiments::{initial_data, InitialData, MIXING_DELTA};
use rtmix::{
    preset, run, run_ensemble, ExperimentConfig, ExperimentResult, ModelKind, PhysParams,
    RealField, RunStatus, StepController, ViscosityConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Check = fn() -> Outcome;

fn quiet(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.snapshot_times.clear();
    cfg
}

fn operator_exactness() -> Outcome {
    let sp = spectral(32);
    let g = sp.grid();
    let mut worst: f64 = 0.0;
    for k in 1..=8i64 {
        let kf = k as f64;
        let s = RealField::from_fn(g, |x| (kf * x).sin());
        let c = RealField::from_fn(g, |x| (kf * x).cos());
        let rel = |a: &RealField, b: &RealField, scale: f64| a.sub(b).linf() / scale;
        worst = worst.max(rel(&sp.hilbert(&s), &c.scale(-1.0), 1.0));
        worst = worst.max(rel(&sp.hilbert(&c), &s, 1.0));
        for order in [0.5, 1.0, 2.0, 3.0] {
            let m = kf.powf(order);
            worst = worst.max(rel(&sp.lambda_pow(&s, order), &s.scale(m), m));
        }
        worst = worst.max(rel(&sp.derivative(&s, 1), &c.scale(kf), kf));
        worst = worst.max(rel(&sp.derivative(&s, 2), &s.scale(-kf * kf), kf * kf));
        worst = worst.max(rel(
            &sp.derivative(&s, 3),
            &c.scale(-kf.powi(3)),
            kf.powi(3),
        ));
    }
    let sp = spectral(64);
    let g = sp.grid();
    let cut = g.dealias_cutoff();
    let f = sp.project(
        &RealField::from_fn(g, |x| {
            (20.0 * x).cos() + 0.5 * (3.0 * x).sin() - 0.2 * (11.0 * x).cos()
        }),
        cut,
    );
    let h = sp.project(
        &RealField::from_fn(g, |x| {
            (19.0 * x).sin() - (2.0 * x).cos() + 0.3 * (16.0 * x).sin()
        }),
        cut,
    );
    let (hf, hh) = (sp.hilbert(&f), sp.hilbert(&h));
    let lhs = sp.hilbert(
        &sp.pointwise_product(&f, &hh, true)
            .add(&sp.pointwise_product(&h, &hf, true)),
    );
    let rhs = sp
        .pointwise_product(&hf, &hh, true)
        .sub(&sp.pointwise_product(&f, &h, true));
    let tricomi = lhs.sub(&rhs).linf();
    Outcome::new(
        worst <= 1e-12 && tricomi <= 1e-10,
        format!("monomial error {worst:.2e} (tol 1e-12), Tricomi defect {tricomi:.2e} (tol 1e-10)"),
    )
}

fn linear_dispersion() -> Outcome {
    let errs: Vec<f64> = (1..=8)
        .map(|k| common::linear_dispersion_error(k, 1e-6))
        .collect();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Outcome::new(
        worst <= 1e-4,
        format!("k = 1..8, worst relative error {worst:.2e} (tol 1e-4)"),
    )
}

fn conservation() -> Outcome {
    let sp = spectral(128);
    let g = sp.grid();
    let ctrl = StepController::default();

    // h-model with a nonzero vorticity mean, so every mean-dependent term is active
    let phys = PhysParams::new(9.8, 0.0, 1.0, 1.5).unwrap();
    let h0 = RealField::from_fn(g, |x| 0.25 + 0.2 * (3.0 * x).sin());
    let w0 = RealField::from_fn(g, |x| 0.2 - 0.4 * (2.0 * x).cos());
    let d = dynamics(
        ModelKind::HSystem,
        &sp,
        phys,
        ViscosityConfig::none(),
        w0.integral(),
    );
    let samples: Vec<f64> = (1..=10).map(|i| 0.025 * i as f64).collect();
    let traj = evolve(&d, &pack(&[&h0, &w0]), 0.25, &samples, &ctrl);
    let mut w_drift: f64 = 0.0;
    let mut h_drift: f64 = 0.0;
    for y in &traj.states {
        w_drift = w_drift.max((component(g, y, 1).mean() - w0.mean()).abs());
        h_drift = h_drift.max((component(g, y, 0).mean() - h0.mean()).abs());
    }

    // z-model, unstable rocket-rig densities
    let rig = preset("sim5_z").unwrap().phys;
    let dz1 = RealField::from_fn(g, |x| 0.01 * x.sin());
    let z2 = RealField::from_fn(g, |x| 0.01 * (2.0 * x).cos() + 0.3);
    let wz = RealField::from_fn(g, |x| 0.5 + 0.1 * (3.0 * x).sin());
    let dz = dynamics(ModelKind::ZSystem, &sp, rig, ViscosityConfig::none(), 0.0);
    let traj = evolve(&dz, &pack(&[&dz1, &z2, &wz]), 0.05, &[0.025], &ctrl);
    for y in &traj.states {
        w_drift = w_drift.max((component(g, y, 2).mean() - wz.mean()).abs());
    }

    // wave form with moving mean: ⟨h⟩ = ⟨h₀⟩ + ⟨h₁⟩ t
    let cfg = preset("sim4").unwrap();
    let sp4 = spectral(cfg.grid_n);
    let (h0, h1) = initial_data(&cfg, &sp4, 0)
        .unwrap()
        .height_pair(&sp4)
        .unwrap();
    let dw = dynamics(
        ModelKind::HWave,
        &sp4,
        cfg.phys,
        ViscosityConfig::none(),
        0.0,
    );
    let samples: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    let traj = evolve(&dw, &pack(&[&h0, &h1]), 5.0, &samples, &ctrl);
    let mut linear_drift: f64 = 0.0;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let expect = h0.mean() + h1.mean() * t;
        linear_drift = linear_drift.max((component(g, y, 0).mean() - expect).abs());
    }
    let tol = ctrl.abs_tol;
    Outcome::new(
        w_drift <= 1e-10 && h_drift <= tol && linear_drift <= tol,
        format!(
            "vorticity mean drift {w_drift:.2e} (tol 1e-10), height mean drift {h_drift:.2e}, \
             linear mean law error {linear_drift:.2e} (tol {tol:.0e})"
        ),
    )
}

fn energy_law() -> Outcome {
    let mut cfg = quiet(preset("sim4").unwrap());
    cfg.t_end = 1.0;
    cfg.sample_interval = Some(1e-4);
    let res = run(&cfg).unwrap();
    let t = res.times();
    let e1: Vec<f64> = res.samples.iter().map(|s| s.record.e1.unwrap()).collect();
    let d1: Vec<f64> = res.samples.iter().map(|s| s.record.d1.unwrap()).collect();
    let dissipated = cumulative_trapezoid(&t, &d1);
    let residual = e1
        .iter()
        .zip(&dissipated)
        .map(|(e, d)| (e + d - e1[0]).abs())
        .fold(0.0, f64::max);
    let bound = 1e-6 * e1[0];

    let sp = spectral(256);
    let u = |x: f64| -1.0 + 0.3 * x.sin() + 0.2 * (2.0 * x).cos() + 0.1 * (3.0 * x).sin();
    let du = |x: f64| 0.3 * x.cos() - 0.4 * (2.0 * x).sin() + 0.3 * (3.0 * x).cos();
    let d1_spec = dissipations(&sp, &RealField::from_fn(sp.grid(), u), -1.0).d1;
    let d1_oracle = common::d1_double_integral(sp.grid(), u, du, -1.0);
    let cross = (d1_spec - d1_oracle).abs();
    Outcome::new(
        res.status.is_completed() && residual <= bound && cross <= 1e-6,
        format!(
            "residual {residual:.2e} <= {bound:.2e} over t <= {}, D1 {d1_spec:.6} vs oracle {d1_oracle:.6} (diff {cross:.1e})",
            res.last_time()
        ),
    )
}

fn run_all(names: &[&str]) -> Vec<ExperimentResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| s.spawn(move || run(&quiet(preset(n).unwrap())).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn sim1_band() -> Outcome {
    let names = ["sim1", "sim1_eps008", "sim1_n256", "sim1_s2"];
    let runs = run_all(&names);
    let peaks: Vec<f64> = runs
        .iter()
        .map(|r| r.amplitudes().into_iter().fold(0.0, f64::max))
        .collect();
    let finals: Vec<f64> = runs
        .iter()
        .map(|r| r.samples.last().unwrap().record.linf_amplitude)
        .collect();
    let in_band = peaks.iter().all(|p| (3.0..=6.0).contains(p));
    let decayed = runs
        .iter()
        .zip(&finals)
        .all(|(r, a)| r.status.is_completed() && *a < 1.0);
    let mut spread: f64 = 0.0;
    for i in 0..peaks.len() {
        for j in i + 1..peaks.len() {
            spread = spread.max((peaks[i] - peaks[j]).abs() / peaks[i].max(peaks[j]));
        }
    }
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    Outcome::new(
        in_band && decayed && spread <= 0.15,
        format!(
            "peaks {} (want [3, 6]), amplitude at t = 2.64 {} (want < 1), pairwise peak spread {:.1}% (want <= 15%)",
            list(&peaks),
            list(&finals),
            100.0 * spread
        ),
    )
}

fn sim3_blowup() -> Outcome {
    let res = run(&quiet(preset("sim3").unwrap())).unwrap();
    let peak = res.amplitudes().into_iter().fold(0.0, f64::max);
    let blew_up = matches!(res.status, RunStatus::BlowUp { t, .. } if t < 0.5);
    Outcome::new(
        blew_up || peak > 1e3,
        format!(
            "status {} at t = {:.4}, peak amplitude {peak:.3}",
            res.status.label(),
            res.last_time()
        ),
    )
}

fn sim4_asymptotics() -> Outcome {
    let res = run(&quiet(preset("sim4").unwrap())).unwrap();
    let first = res.samples.first().unwrap().record;
    let last = res.samples.last().unwrap().record;
    let (gh0, ght0) = (first.gap_h.unwrap(), first.gap_ht.unwrap());
    let (gh, ght) = (last.gap_h.unwrap(), last.gap_ht.unwrap());
    Outcome::new(
        res.status.is_completed() && last.t >= 20.0 && gh <= gh0 / 100.0 && ght <= ght0 / 100.0,
        format!(
            "t = {}: gap_h {gh0:.2e} -> {gh:.2e}, gap_ht {ght0:.2e} -> {ght:.2e}",
            last.t
        ),
    )
}

fn reached(r: &ExperimentResult, t: f64) -> bool {
    r.last_time() >= t - 1e-12
}

fn rocket_rig_h() -> Outcome {
    let ens = run_ensemble(&quiet(preset("sim5_h").unwrap())).unwrap();
    let ag = ens.runs[0].config.phys.atwood() * ens.runs[0].config.phys.g;
    let mut band_ok = 0;
    let mut dev_ok = 0;
    let mut worst_band: f64 = 0.0;
    let mut devs = Vec::new();
    for r in &ens.runs {
        let mut inside = reached(r, 0.07);
        for s in r.samples.iter().filter(|s| s.record.t <= 0.07 + 1e-12) {
            let (t, w) = (s.record.t, s.record.width);
            let lo = 0.04 * ag * t * t - 0.01;
            let hi = 0.07 * ag * t * t + 0.01;
            let miss = (lo - w).max(w - hi).max(0.0);
            worst_band = worst_band.max(miss);
            inside &= miss == 0.0;
        }
        band_ok += usize::from(inside);
        let dev = r.growth_deviation(0.15);
        devs.push(dev);
        dev_ok += usize::from(reached(r, 0.15) && dev <= 0.02);
    }
    let lifespans: Vec<String> = ens
        .runs
        .iter()
        .map(|r| format!("{:.3}", r.last_time()))
        .collect();
    let n = ens.runs.len();
    Outcome::new(
        band_ok >= 7 && dev_ok >= 7,
        format!(
            "band over t <= 0.07 held for {band_ok}/{n} seeds (worst miss {worst_band:.3}); \
             deviation from {MIXING_DELTA}Agt^2 <= 0.02 over t <= 0.15 for {dev_ok}/{n} seeds \
             (deviations {:.3}..{:.3}); lifespans {}",
            devs.iter().copied().fold(f64::INFINITY, f64::min),
            devs.iter().copied().fold(0.0, f64::max),
            lifespans.join(" ")
        ),
    )
}

fn rocket_rig_z() -> Outcome {
    let (z, h) = std::thread::scope(|s| {
        let z = s.spawn(|| run_ensemble(&quiet(preset("sim5_z").unwrap())).unwrap());
        let h = s.spawn(|| run_ensemble(&quiet(preset("sim5_h_matched").unwrap())).unwrap());
        (z.join().unwrap(), h.join().unwrap())
    });
    let n = z.runs.len();
    let mut small = 0;
    let mut beats = 0;
    let mut rows = Vec::new();
    for (zr, hr) in z.runs.iter().zip(&h.runs) {
        assert_eq!(zr.seed, hr.seed);
        let dz = zr.growth_deviation(0.15);
        let dh = hr.growth_deviation(0.15);
        let ok = reached(zr, 0.15);
        small += usize::from(ok && dz <= 0.05);
        beats += usize::from(ok && dz < dh);
        rows.push(format!(
            "{}:{dz:.3}/{dh:.3}{}",
            zr.seed,
            if ok { "" } else { "*" }
        ));
    }
    Outcome::new(
        small >= 7 && beats >= 7,
        format!(
            "z deviation <= 0.05 for {small}/{n} seeds, below matched h for {beats}/{n}; \
             seed:z/h {} (* = z run ended before t = 0.15)",
            rows.join(" ")
        ),
    )
}

fn kelvin_helmholtz() -> Outcome {
    let cfg = preset("sim7_inviscid").unwrap();
    let sp = spectral(cfg.grid_n);
    let res = run(&cfg).unwrap();
    let InitialData::Curve { omega, .. } = initial_data(&cfg, &sp, 0).unwrap() else {
        return Outcome::new(false, "sim7_inviscid does not start from curve data");
    };
    let n = cfg.grid_n;
    let frozen = res.status.is_completed() && res.final_state[2 * n..3 * n] == *omega.values();

    let visc = run(&preset("sim7").unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = Vec::new();
    for s in &visc.samples {
        if let Some(e) = &s.spectrum {
            checked.push(format!("{}", s.record.t));
            worst = worst.max(e[11..].iter().copied().fold(0.0, f64::max));
        }
    }
    let through = reached(&visc, 0.6) && checked.iter().any(|t| t == "0.6");
    Outcome::new(
        frozen && through && worst <= 1e-4,
        format!(
            "inviscid vorticity bitwise unchanged to t = {}: {frozen}; viscous max E(k > 10) = {worst:.2e} \
             at t = {} (tol 1e-4)",
            res.last_time(),
            checked.join(", ")
        ),
    )
}

fn rkf45_order() -> Outcome {
    let (order, rows) = common::rkf45_observed_order();
    let detail = rows
        .iter()
        .map(|(tol, steps, err)| format!("tol {tol:.0e}: {steps} steps, err {err:.2e}"))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome::new(
        order >= 4.0,
        format!("observed order {order:.2} ({detail})"),
    )
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("operator exactness", operator_exactness),
        ("linear dispersion", linear_dispersion),
        ("conservation of means", conservation),
        ("energy law", energy_law),
        ("sim1 amplitude band", sim1_band),
        ("sim3 blow-up", sim3_blowup),
        ("sim4 asymptotics", sim4_asymptotics),
        ("rocket rig, h-model", rocket_rig_h),
        ("rocket rig, z-model", rocket_rig_z),
        ("Kelvin-Helmholtz spectrum", kelvin_helmholtz),
        ("RKF45 order", rkf45_order),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let secs = start.elapsed().as_secs_f64();
        failed += usize::from(!out.pass);
        println!(
            "{} {:>2} {name}: {} [{secs:.1} s]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var_os("RTMIX_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
