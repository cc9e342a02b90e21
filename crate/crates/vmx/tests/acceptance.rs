//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --release --test acceptance -- --nocapture`.

use std::sync::OnceLock;

use vmx::diagnostics::moment_mk;
use vmx::gs::check_kernel_bounds;
use vmx::kinetic::{
    transport_ensemble, velocity_of_momentum, AnalyticFields, DensitySpec, InitialData, Pusher,
};
use vmx::lemma_lab::{self, SweepSpec};
use vmx::lightcone::LightConeSampler;
use vmx::quadrature::SphereRule;
use vmx::runner::{self, RunArtifacts, RunConfig};
use vmx::spectral::wave_propagate;
use vmx::vec3::Vec3;

fn report(criterion: usize, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:>2}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// The standard verification run: 16^3 cells, (16*2)^3 = 32^3 phase-lattice
/// particles, 200 steps. Shared across criteria 6, 8 and 10.
fn standard_run() -> &'static RunArtifacts {
    static RUN: OnceLock<RunArtifacts> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = RunConfig {
            cells: 16,
            length: 6.0,
            dt: 0.02,
            n_steps: 200,
            cadence: 10,
            nx_particles: 16,
            np_particles: 2,
            amplitude: 0.4,
            rx: 0.6,
            rp: 0.4,
            center: Vec3::new(3.0, 3.0, 3.0),
            ..RunConfig::default()
        };
        runner::run_simulation(&cfg).expect("standard run must execute")
    })
}

fn verdict_of<'a>(artifacts: &'a RunArtifacts, name: &str) -> &'a vmx::diagnostics::Verdict {
    artifacts
        .verdicts
        .iter()
        .find(|v| v.name == name)
        .unwrap_or_else(|| panic!("missing verdict {name}"))
}

#[test]
fn criterion_01_lemma_24c_exactness() {
    let spec = SweepSpec {
        thetas: vec![0.1, 0.3, 0.5, 0.7, 0.9],
        speeds: vec![0.0, 0.3, 0.9, 0.999],
        ..SweepSpec::default()
    };
    let out = lemma_lab::verify_lemma_24c(&spec).expect("campaign");
    report(
        1,
        out.pass,
        &format!(
            "sphere quadrature vs closed form over {} samples: {}",
            out.rows.len(),
            out.notes.join("; ")
        ),
    );
}

#[test]
fn criterion_02_lemma_24ab_envelopes() {
    let a = lemma_lab::run_campaign("2.4a", &SweepSpec::default_for("2.4a").unwrap()).unwrap();
    let b = lemma_lab::run_campaign("2.4b", &SweepSpec::default_for("2.4b").unwrap()).unwrap();
    report(
        2,
        a.pass && b.pass,
        &format!(
            "(a) sup ratio {:.4} refined {:.4}; (b) sup ratio {:.4} refined {:.4} (R up to 300)",
            a.fitted_constant, a.refined_constant, b.fitted_constant, b.refined_constant
        ),
    );
}

#[test]
fn criterion_03_kernel_bounds() {
    let out = check_kernel_bounds(1_000_000, 1e3, 2024);
    let sqrt2 = std::f64::consts::SQRT_2;
    let pass = out.violations == 0 && out.fitted_dt <= sqrt2 + 1e-9;
    report(
        3,
        pass,
        &format!(
            "10^6 samples, |p| <= 10^3: {} violations; fitted DT constant {:.12} (sqrt(2) = {:.12})",
            out.violations, out.fitted_dt, sqrt2
        ),
    );
}

#[test]
fn criterion_04_w_fourier_identity() {
    let spec = SweepSpec { grid_size: 64, t_final: 1.5, ..SweepSpec::default() };
    let out = lemma_lab::verify_w_fourier(&spec).expect("campaign");
    report(4, out.pass, &out.notes.join("; "));
}

#[test]
fn criterion_05_phi_tau_change_of_variables() {
    let spec = SweepSpec { samples: 1_000_000, ..SweepSpec::default() };
    let out = lemma_lab::verify_phi_tau_campaign(&spec).expect("campaign");
    report(5, out.pass, &out.notes.join("; "));
}

#[test]
fn criterion_06_conservation_suite() {
    let artifacts = standard_run();
    let energy = verdict_of(artifacts, "energy_drift");
    let mass = verdict_of(artifacts, "mass_drift");
    let continuity = verdict_of(artifacts, "continuity");
    let div_b = verdict_of(artifacts, "div_b");
    let pass = artifacts.failure.is_none()
        && energy.pass
        && mass.pass
        && continuity.pass
        && div_b.pass;
    report(
        6,
        pass,
        &format!(
            "energy drift {:.3e} (<= 1e-2), weight drift {:.3e} (<= 1e-12), continuity {:.3e} (<= 1e-10), div B {:.3e} (<= 1e-12)",
            energy.fitted_constant, mass.fitted_constant, continuity.fitted_constant, div_b.fitted_constant
        ),
    );
}

#[test]
fn criterion_07_moment_identity_convergence() {
    // particles in a smooth prescribed field: central-difference dm_2/dt
    // matches 2 sum w (1+p^2)^{1/2} (v.E) to O(dt^2), verified by halving dt
    let sampler = AnalyticFields(|t: f64, x: Vec3| {
        (
            Vec3::new(
                0.4 * (0.9 * x.y + 0.3 * t).sin(),
                0.3 * (0.7 * x.z - 0.4 * t).cos(),
                0.2 * (0.8 * x.x).sin(),
            ),
            Vec3::new(0.25 * (0.6 * x.z).cos(), 0.2, 0.3 * (0.5 * x.y + 0.2 * t).sin()),
        )
    });
    let spec = DensitySpec::SeparableBump {
        amplitude: 1.0,
        center: Vec3::default(),
        rx: 1.0,
        rp: 0.6,
    };
    let max_err = |dt: f64| -> f64 {
        let steps = (0.8 / dt) as usize;
        let mut ens = spec.sample_lattice(5, 3);
        let mut m2 = vec![moment_mk(&ens, 2.0)];
        let mut rhs = vec![moment_rhs(&ens, &sampler)];
        for _ in 0..steps {
            transport_ensemble(&mut ens, &sampler, dt, Pusher::Rk4).unwrap();
            m2.push(moment_mk(&ens, 2.0));
            rhs.push(moment_rhs(&ens, &sampler));
        }
        let mut worst = 0.0f64;
        for i in 1..m2.len() - 1 {
            let fd = (m2[i + 1] - m2[i - 1]) / (2.0 * dt);
            worst = worst.max((fd - rhs[i]).abs());
        }
        worst
    };
    let e1 = max_err(0.02);
    let e2 = max_err(0.01);
    let ratio = e1 / e2;
    let pass = (3.0..=5.0).contains(&ratio);
    report(
        7,
        pass,
        &format!("dt-halving error ratio {ratio:.3} (expect 4 +- 25%); errors {e1:.3e} -> {e2:.3e}"),
    );
}

fn moment_rhs(ens: &vmx::kinetic::Ensemble, sampler: &impl vmx::kinetic::FieldSampler) -> f64 {
    ens.particles
        .iter()
        .map(|s| {
            let (e, _) = sampler.sample(ens.t, s.x).unwrap();
            2.0 * s.w * s.gamma() * velocity_of_momentum(s.p).dot(e)
        })
        .sum()
}

#[test]
fn criterion_08_diagnostic_inequalities() {
    let artifacts = standard_run();
    let exact = verdict_of(artifacts, "sigma_le_2I1");
    let support = verdict_of(artifacts, "sigma_support");
    let mut audits_pass = true;
    let mut details = vec![
        format!("sigma <= 2 I_1 worst ratio {:.4} (zero violations)", exact.fitted_constant),
    ];
    for name in [
        "lemma23_a0.2",
        "lemma23_a0.5",
        "lemma51_a1_e0.1",
        "lemma51_a2_e0.05",
        "cor52_a1_e0.1",
        "cor52_a2_e0.05",
    ] {
        let v = verdict_of(artifacts, name);
        audits_pass &= v.pass;
        details.push(format!("{name} fit {:.3e}", v.fitted_constant));
    }
    let pass = exact.pass && support.pass && audits_pass;
    report(8, pass, &details.join("; "));
}

#[test]
fn criterion_09_cross_solver_consistency() {
    // (a) self-consistent run: reconstruction vs grid fields at 10 interior
    // probes after the strong-Huygens clearing time
    let cfg = RunConfig {
        cells: 40,
        length: 6.0,
        dt: 0.08,
        n_steps: 22,
        cadence: 11,
        nx_particles: 12,
        np_particles: 3,
        amplitude: 0.4,
        rx: 0.9,
        rp: 0.25,
        center: Vec3::new(3.0, 3.0, 3.0),
        record_history: true,
        horizon: 1.76,
        ..RunConfig::default()
    };
    let artifacts = runner::run_simulation(&cfg).expect("comparison run");
    assert!(artifacts.failure.is_none());
    let c = cfg.center;
    let offsets = [
        Vec3::new(0.58, 0.0, 0.0),
        Vec3::new(0.0, 0.62, 0.0),
        Vec3::new(0.0, 0.0, -0.66),
        Vec3::new(0.45, 0.45, 0.0),
        Vec3::new(-0.5, 0.25, 0.12),
        Vec3::new(0.3, -0.45, 0.45),
        Vec3::new(0.0, 0.0, 0.85),
        Vec3::new(-0.55, -0.11, -0.22),
        Vec3::new(0.66, 0.11, -0.33),
        Vec3::new(0.12, 0.5, 0.62),
    ];
    let t = cfg.t_end();
    let probes: Vec<(f64, Vec3)> = offsets.iter().map(|o| (t, c + *o)).collect();
    let sampler = LightConeSampler::new(cfg.dt, t).with_angular_resolution(16, 16.0, 64);
    let data_rule = SphereRule::gauss_product(32, 64);
    let rows = runner::fields_compare(&artifacts, &probes, &sampler, &data_rule).unwrap();
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0f64, f64::max);
    let pass_fdtd = worst <= 0.05;

    // (b) vacuum data: reconstruction (data terms alone) vs spectral wave
    // propagation of the same data
    let worst_vac = vacuum_reconstruction_error();
    let pass_vac = worst_vac <= 1e-3;
    report(
        9,
        pass_fdtd && pass_vac,
        &format!(
            "GS vs grid solver at 10 probes: worst {worst:.4} (<= 0.05); vacuum vs spectral: worst {worst_vac:.3e} (<= 1e-3)"
        ),
    );
}

fn vacuum_reconstruction_error() -> f64 {
    let length = 8.0;
    let n = 48usize;
    let h = length / n as f64;
    let c = Vec3::new(4.0, 4.0, 4.0);
    let data = InitialData::vacuum_pulse(0.5, c, 0.6);
    let size = n * n * n;
    let mut components = Vec::new(); // E then B, per Cartesian component
    for pick_b in [false, true] {
        for comp in 0..3 {
            let mut u0 = vec![0.0f64; size];
            let mut v0 = vec![0.0f64; size];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let idx = (i * n + j) * n + k;
                        let x = Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h);
                        let (f, df) = if pick_b {
                            (data.b0.eval(x), data.b_dot0(x))
                        } else {
                            (data.e0.eval(x), data.e_dot0(x))
                        };
                        u0[idx] = f.comp(comp);
                        v0[idx] = df.comp(comp);
                    }
                }
            }
            components.push(u0);
            components.push(v0);
        }
    }
    let t = 1.5;
    let mut propagated = Vec::new();
    for pair in components.chunks(2) {
        propagated.push(wave_propagate(&pair[0], &pair[1], n, length, t));
    }
    let scale = propagated
        .iter()
        .flat_map(|a| a.iter())
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    let rule = SphereRule::gauss_product(64, 128);
    let mut worst = 0.0f64;
    for frac in [
        (0.5, 0.5, 0.5),
        (0.58, 0.46, 0.52),
        (0.42, 0.54, 0.48),
        (0.54, 0.54, 0.58),
        (0.46, 0.46, 0.42),
        (0.5, 0.42, 0.56),
    ] {
        let (pi, pj, pk) = (
            (frac.0 * n as f64) as usize,
            (frac.1 * n as f64) as usize,
            (frac.2 * n as f64) as usize,
        );
        let x = Vec3::new(pi as f64 * h, pj as f64 * h, pk as f64 * h);
        let (e_d, b_d, e_dt, b_dt) = vmx::gs::data_terms(&data, t, x, &rule).unwrap();
        let e_gs = e_d + e_dt;
        let b_gs = b_d + b_dt;
        let idx = (pi * n + pj) * n + pk;
        let e_sp = Vec3::new(propagated[0][idx], propagated[1][idx], propagated[2][idx]);
        let b_sp = Vec3::new(propagated[3][idx], propagated[4][idx], propagated[5][idx]);
        worst = worst.max(((e_gs - e_sp).norm() + (b_gs - b_sp).norm()) / scale);
    }
    worst
}

#[test]
fn criterion_10_criterion_monitor() {
    let artifacts = standard_run();
    let monotone = verdict_of(artifacts, "criterion_monotone");
    let bounded = verdict_of(artifacts, "criterion_bounded");
    let sup = artifacts.series.channel("criterion_sup").unwrap();
    let growth = sup.last().unwrap() / sup.first().unwrap();
    let pass = monotone.pass && bounded.pass;
    report(
        10,
        pass,
        &format!(
            "criterion_sup monotone: {}; small-amplitude growth x{growth:.4} (< 10)",
            monotone.pass
        ),
    );
}
