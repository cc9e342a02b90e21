//! Stand-alone numerical verification campaigns for the analytic lemmas:
//! integration-bound sweeps, kernel-bound sampling, the Fourier identity of
//! the W operator, the light-cone change of variables, moment inequalities
//! on synthetic densities, and an empirical Strichartz ratio.
//!
//! Inequalities whose constants the analysis leaves unspecified are certified
//! by the fitted-constant protocol: the supremum of lhs/envelope over the
//! sweep is reported and must be stable under refinement; campaigns are
//! deterministic given the seed.

use rayon::prelude::*;
use std::path::{Path, PathBuf};

use crate::error::{Result, VmxError};
use crate::gs::check_kernel_bounds;
use crate::io::{format_f64, CsvWriter};
use crate::lightcone::{box_inverse, w_operator, AnalyticSpacetime, LightConeSampler};
use crate::quadrature::{
    adaptive_simpson, ball_weighted_quadrature, gauss_legendre_on, integrate_sphere, SphereRule,
};
use crate::spectral::{sine_integral, sobolev_seminorm, Fft3, k_norm};
use crate::vec3::Vec3;

/// Parameter grid of one verification campaign.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub thetas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub radii: Vec<f64>,
    pub speeds: Vec<f64>,
    pub n_directions: usize,
    /// Base resolution control (radial/angular node counts, shell steps).
    pub resolution: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub box_length: f64,
    pub t_final: f64,
    pub samples: usize,
    pub epsilon: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            thetas: vec![],
            kappas: vec![],
            radii: vec![],
            speeds: vec![],
            n_directions: 20,
            resolution: 24,
            seed: 12345,
            grid_size: 64,
            box_length: 8.0,
            t_final: 1.5,
            samples: 1_000_000,
            epsilon: 0.1,
        }
    }
}

impl SweepSpec {
    pub fn default_for(lemma: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        match lemma {
            "2.4a" => {
                spec.thetas = vec![0.0, 0.5, 1.0, 1.4];
                spec.radii = vec![10.0, 30.0, 100.0, 300.0];
            }
            "2.4b" => {
                spec.thetas = vec![1.0, 3.0, 0.5];
                spec.kappas = vec![1.5, 3.0, 2.0];
                spec.radii = vec![10.0, 30.0, 100.0, 300.0];
            }
            "2.4c" => {
                spec.thetas = vec![0.1, 0.3, 0.5, 0.7, 0.9];
                spec.speeds = vec![0.0, 0.3, 0.9, 0.999];
            }
            "3.1" => {
                spec.samples = 1_000_000;
            }
            "3.3" => {
                spec.grid_size = 64;
                spec.t_final = 1.5;
            }
            "4.2" => {
                spec.samples = 1_000_000;
            }
            "2.2" | "2.3" | "5.1" | "5.2" => {}
            "strichartz" => {
                spec.grid_size = 48;
                spec.t_final = 2.0;
            }
            other => {
                return Err(VmxError::InvalidArgument(format!("unknown lemma id `{other}`")))
            }
        }
        Ok(spec)
    }

    /// Load a campaign spec file (flat `key = value` lines).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VmxError::io(path.display().to_string(), e))?;
        let mut spec = SweepSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| VmxError::Config {
                path: path.display().to_string(),
                line: idx + 1,
                message,
            };
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let list = |v: &str| -> std::result::Result<Vec<f64>, String> {
                v.split(',')
                    .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}`")))
                    .collect()
            };
            match key {
                "thetas" => spec.thetas = list(value).map_err(|m| err(m))?,
                "kappas" => spec.kappas = list(value).map_err(|m| err(m))?,
                "radii" => spec.radii = list(value).map_err(|m| err(m))?,
                "speeds" => spec.speeds = list(value).map_err(|m| err(m))?,
                "directions" => {
                    spec.n_directions =
                        value.parse().map_err(|_| err(format!("bad integer `{value}`")))?
                }
                "resolution" => {
                    spec.resolution =
                        value.parse().map_err(|_| err(format!("bad integer `{value}`")))?
                }
                "seed" => {
                    spec.seed = value.parse().map_err(|_| err(format!("bad integer `{value}`")))?
                }
                "grid_size" => {
                    spec.grid_size =
                        value.parse().map_err(|_| err(format!("bad integer `{value}`")))?
                }
                "box_length" => {
                    spec.box_length =
                        value.parse().map_err(|_| err(format!("bad number `{value}`")))?
                }
                "t_final" => {
                    spec.t_final =
                        value.parse().map_err(|_| err(format!("bad number `{value}`")))?
                }
                "samples" => {
                    spec.samples =
                        value.parse().map_err(|_| err(format!("bad integer `{value}`")))?
                }
                "epsilon" => {
                    spec.epsilon =
                        value.parse().map_err(|_| err(format!("bad number `{value}`")))?
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(spec)
    }
}

/// One sweep sample: parameters, lhs, envelope, and their ratio.
#[derive(Clone, Debug)]
pub struct SampleRow {
    pub label: String,
    pub lhs: f64,
    pub rhs_envelope: f64,
    pub ratio: f64,
}

/// Campaign outcome.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub lemma: String,
    pub rows: Vec<SampleRow>,
    pub fitted_constant: f64,
    pub refined_constant: f64,
    pub refinement_stable: bool,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn from_rows(lemma: &str, rows: Vec<SampleRow>, refined: f64, stability_band: f64) -> Self {
        let fitted = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
        let stable = if refined == 0.0 && fitted == 0.0 {
            true
        } else {
            (fitted / refined).max(refined / fitted) <= stability_band
        };
        let finite = rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0);
        VerificationReport {
            lemma: lemma.to_string(),
            rows,
            fitted_constant: fitted,
            refined_constant: refined,
            refinement_stable: stable,
            pass: stable && finite,
            notes: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("campaign {}\n", self.lemma));
        s.push_str(&format!(
            "  fitted constant {} (refined {}), stable: {}\n",
            format_f64(self.fitted_constant),
            format_f64(self.refined_constant),
            self.refinement_stable
        ));
        s.push_str(&format!("  samples: {}\n", self.rows.len()));
        for note in &self.notes {
            s.push_str(&format!("  note: {note}\n"));
        }
        s.push_str(&format!("  verdict: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        s
    }
}

pub fn emit_campaign_report(report: &VerificationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| VmxError::io(dir.display().to_string(), e))?;
    let mut written = Vec::new();
    let csv_path = dir.join(format!("lemma_{}.csv", report.lemma.replace('.', "_")));
    {
        let mut w = CsvWriter::create(&csv_path, &["label", "lhs", "rhs_envelope", "ratio"])?;
        for row in &report.rows {
            w.write_mixed_row(&[
                row.label.replace(',', ";"),
                format_f64(row.lhs),
                format_f64(row.rhs_envelope),
                format_f64(row.ratio),
            ])?;
        }
        w.flush()?;
    }
    written.push(csv_path);
    let verdict_path = dir.join(format!("lemma_{}_verdict.txt", report.lemma.replace('.', "_")));
    std::fs::write(&verdict_path, report.render())
        .map_err(|e| VmxError::io(verdict_path.display().to_string(), e))?;
    written.push(verdict_path);
    Ok(written)
}

pub fn run_campaign(lemma: &str, spec: &SweepSpec) -> Result<VerificationReport> {
    match lemma {
        "2.4a" => verify_lemma_24a(spec),
        "2.4b" => verify_lemma_24b(spec),
        "2.4c" => verify_lemma_24c(spec),
        "3.1" => verify_kernel_bound_sweep(spec),
        "3.3" => verify_w_fourier(spec),
        "4.2" => verify_phi_tau_campaign(spec),
        "2.2" => verify_moment_inequality(spec),
        "2.3" => verify_sigma_vs_pinf(spec),
        "5.1" => verify_lemma_51(spec),
        "5.2" => verify_cor_52(spec),
        "strichartz" => verify_strichartz_empirical(spec),
        other => Err(VmxError::InvalidArgument(format!("unknown lemma id `{other}`"))),
    }
}

fn seeded_directions(n: usize, seed: u64) -> Vec<Vec3> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            out.push(v / norm);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Lemma 2.4 integration bounds
// ---------------------------------------------------------------------------

fn weighted_ball_sup(
    thetas: &[f64],
    kappa_of: impl Fn(usize) -> f64,
    radii: &[f64],
    directions: &[Vec3],
    envelope: impl Fn(f64, f64, f64) -> f64 + Sync,
    resolution: usize,
) -> Result<Vec<SampleRow>> {
    let mut jobs = Vec::new();
    for (ti, theta) in thetas.iter().enumerate() {
        let kappa = kappa_of(ti);
        for radius in radii {
            for (di, dir) in directions.iter().enumerate() {
                jobs.push((*theta, kappa, *radius, di, *dir));
            }
        }
    }
    jobs.par_iter()
        .map(|(theta, kappa, radius, di, dir)| {
            let g = |p: Vec3| {
                let v = crate::kinetic::velocity_of_momentum(p);
                (1.0 + p.norm_sq()).powf(-theta) * (1.0 + v.dot(*dir)).powf(-kappa)
            };
            let lhs = ball_weighted_quadrature(g, *dir, *radius, resolution, resolution + 8, 4)?;
            let rhs = envelope(*theta, *kappa, *radius);
            Ok(SampleRow {
                label: format!("theta={theta} kappa={kappa} R={radius} dir{di}"),
                lhs,
                rhs_envelope: rhs,
                ratio: lhs / rhs,
            })
        })
        .collect()
}

/// Growth capture: within each exponent setting, the ratio spread over R
/// must stay inside the given factor.
fn growth_spread_ok(rows: &[SampleRow], factor: f64) -> (f64, bool) {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for row in rows {
        let key = row
            .label
            .split(" R=")
            .next()
            .unwrap_or("")
            .to_string();
        let entry = groups.entry(key).or_insert((f64::MAX, f64::MIN));
        entry.0 = entry.0.min(row.ratio);
        entry.1 = entry.1.max(row.ratio);
    }
    let worst = groups
        .values()
        .map(|(lo, hi)| hi / lo)
        .fold(0.0f64, f64::max);
    (worst, worst <= factor)
}

pub fn verify_lemma_24a(spec: &SweepSpec) -> Result<VerificationReport> {
    for theta in &spec.thetas {
        if !(0.0..1.5).contains(theta) {
            return Err(VmxError::HypothesisViolation(format!(
                "2.4a needs theta in [0, 3/2), got {theta}"
            )));
        }
    }
    for radius in &spec.radii {
        if *radius < 10.0 {
            return Err(VmxError::HypothesisViolation(format!(
                "2.4a is stated for R >= 10, got {radius}"
            )));
        }
    }
    let dirs = seeded_directions(spec.n_directions, spec.seed);
    let envelope = |theta: f64, _kappa: f64, radius: f64| radius.ln() * radius.powf(3.0 - 2.0 * theta);
    let rows = weighted_ball_sup(
        &spec.thetas,
        |_| 1.0,
        &spec.radii,
        &dirs,
        envelope,
        spec.resolution,
    )?;
    let refined_rows = weighted_ball_sup(
        &spec.thetas,
        |_| 1.0,
        &spec.radii,
        &dirs[..1.max(dirs.len() / 4)],
        envelope,
        spec.resolution * 2,
    )?;
    let refined = refined_rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    let mut report = VerificationReport::from_rows("2.4a", rows, refined, 1.2);
    let (spread, spread_ok) = growth_spread_ok(&report.rows, 2.0);
    report.notes.push(format!("worst ratio spread across R: {spread:.3} (must be <= 2)"));
    report.pass = report.pass && spread_ok;
    Ok(report)
}

pub fn verify_lemma_24b(spec: &SweepSpec) -> Result<VerificationReport> {
    if spec.thetas.len() != spec.kappas.len() {
        return Err(VmxError::InvalidArgument(
            "2.4b needs paired thetas and kappas".into(),
        ));
    }
    for (theta, kappa) in spec.thetas.iter().zip(&spec.kappas) {
        if !(*kappa > 1.0 && *theta < kappa + 0.5 && *theta >= 0.0) {
            return Err(VmxError::HypothesisViolation(format!(
                "2.4b needs kappa > 1 and theta < kappa + 1/2, got ({theta}, {kappa})"
            )));
        }
    }
    for radius in &spec.radii {
        if *radius < 10.0 {
            return Err(VmxError::HypothesisViolation(format!(
                "2.4b is stated for R >= 10, got {radius}"
            )));
        }
    }
    let dirs = seeded_directions(spec.n_directions, spec.seed);
    let kappas = spec.kappas.clone();
    let envelope =
        |theta: f64, kappa: f64, radius: f64| radius.powf(1.0 + 2.0 * (kappa - theta));
    let rows = weighted_ball_sup(
        &spec.thetas,
        |i| kappas[i],
        &spec.radii,
        &dirs,
        envelope,
        spec.resolution,
    )?;
    let refined_rows = weighted_ball_sup(
        &spec.thetas,
        |i| kappas[i],
        &spec.radii,
        &dirs[..1.max(dirs.len() / 4)],
        envelope,
        spec.resolution * 2,
    )?;
    let refined = refined_rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    let mut report = VerificationReport::from_rows("2.4b", rows, refined, 1.2);
    let (spread, spread_ok) = growth_spread_ok(&report.rows, 4.0);
    report.notes.push(format!("worst ratio spread across R: {spread:.3}"));
    report.pass = report.pass && spread_ok;
    Ok(report)
}

/// Closed form of the angular integral: for |v| > 0 and theta != 1,
/// 2 pi / ((1-theta)|v|) ((1+|v|)^{1-theta} - (1-|v|)^{1-theta}); 4 pi at v = 0.
pub fn sphere_power_closed_form(theta: f64, speed: f64) -> f64 {
    if speed == 0.0 {
        return 4.0 * std::f64::consts::PI;
    }
    2.0 * std::f64::consts::PI / ((1.0 - theta) * speed)
        * ((1.0 + speed).powf(1.0 - theta) - (1.0 - speed).powf(1.0 - theta))
}

pub fn verify_lemma_24c(spec: &SweepSpec) -> Result<VerificationReport> {
    for theta in &spec.thetas {
        if !(0.0..1.0).contains(theta) {
            return Err(VmxError::HypothesisViolation(format!(
                "2.4c needs theta in [0, 1), got {theta}"
            )));
        }
    }
    let dirs = seeded_directions(spec.thetas.len() * spec.speeds.len(), spec.seed);
    let mut rows = Vec::new();
    let mut worst_rel = 0.0f64;
    let mut cap_ok = true;
    let mut idx = 0usize;
    for theta in &spec.thetas {
        for speed in &spec.speeds {
            if !(0.0..1.0).contains(speed) {
                return Err(VmxError::HypothesisViolation(format!("2.4c needs |v| < 1, got {speed}")));
            }
            let dir = dirs[idx];
            idx += 1;
            let v = dir * *speed;
            // the integrand peaks on a cap of width sqrt(1-|v|): the rule is
            // rotated so the peak sits on the polar axis, per the proof's own
            // reduction
            let n_polar = if *speed >= 0.99 { 1024 } else { 256 };
            let rule = SphereRule::gauss_product(n_polar, 16).with_axis(if *speed == 0.0 {
                Vec3::new(0.0, 0.0, 1.0)
            } else {
                dir
            });
            let lhs = integrate_sphere(|w| (1.0 + v.dot(w)).powf(-theta), &rule)?;
            let closed = sphere_power_closed_form(*theta, *speed);
            let cap = 4.0 * std::f64::consts::PI * 2.0f64.powf(1.0 - theta) / (1.0 - theta);
            let rel = ((lhs - closed) / closed).abs();
            worst_rel = worst_rel.max(rel);
            cap_ok &= lhs <= cap + 1e-9;
            rows.push(SampleRow {
                label: format!("theta={theta} v={speed}"),
                lhs,
                rhs_envelope: closed,
                ratio: lhs / closed,
            });
        }
    }
    let mut report = VerificationReport::from_rows("2.4c", rows, 1.0, f64::INFINITY);
    report.refinement_stable = true;
    report.notes.push(format!("worst relative error vs closed form: {worst_rel:.3e}"));
    report.notes.push(format!("uniform cap 4 pi 2^(1-theta)/(1-theta) respected: {cap_ok}"));
    report.pass = worst_rel <= 1e-6 && cap_ok;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Lemma 3.1 kernel bounds
// ---------------------------------------------------------------------------

pub fn verify_kernel_bound_sweep(spec: &SweepSpec) -> Result<VerificationReport> {
    let report = check_kernel_bounds(spec.samples, 1e3, spec.seed);
    let sqrt2 = std::f64::consts::SQRT_2;
    let rows = vec![
        SampleRow {
            label: "DT".into(),
            lhs: report.fitted_dt,
            rhs_envelope: sqrt2,
            ratio: report.fitted_dt / sqrt2,
        },
        SampleRow {
            label: "flat".into(),
            lhs: report.fitted_flat,
            rhs_envelope: sqrt2,
            ratio: report.fitted_flat / sqrt2,
        },
        SampleRow {
            label: "sharp_E".into(),
            lhs: report.fitted_sharp_e,
            rhs_envelope: 4.0,
            ratio: report.fitted_sharp_e / 4.0,
        },
        SampleRow {
            label: "sharp_B".into(),
            lhs: report.fitted_sharp_b,
            rhs_envelope: 3.0,
            ratio: report.fitted_sharp_b / 3.0,
        },
    ];
    let mut out = VerificationReport::from_rows("3.1", rows, 1.0, f64::INFINITY);
    out.refinement_stable = true;
    out.notes.push(format!(
        "{} samples, {} violations of the proof constants",
        report.samples, report.violations
    ));
    out.pass = report.violations == 0 && report.fitted_dt <= sqrt2 + 1e-9;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lemma 3.3: Fourier identity of the W operator
// ---------------------------------------------------------------------------

/// Gaussian test profile g(x) = exp(-|x - c|^2 / (2 width^2)) sampled on the
/// grid, with a smooth time amplitude a(t) = 1 + 0.5 sin(pi t / T).
struct WFourierField {
    center: Vec3,
    width: f64,
    t_final: f64,
}

impl WFourierField {
    fn amplitude(&self, t: f64) -> f64 {
        1.0 + 0.5 * (std::f64::consts::PI * t / self.t_final).sin()
    }

    fn spatial(&self, x: Vec3) -> f64 {
        (-(x - self.center).norm_sq() / (2.0 * self.width * self.width)).exp()
    }

    fn eval(&self, t: f64, x: Vec3) -> f64 {
        self.amplitude(t) * self.spatial(x)
    }

    fn l2_norm(&self, t: f64) -> f64 {
        // || a(t) g ||_L2 with the Gaussian's exact L2 norm
        self.amplitude(t).abs()
            * (std::f64::consts::PI * self.width * self.width).powf(0.75)
    }
}

pub fn verify_w_fourier(spec: &SweepSpec) -> Result<VerificationReport> {
    let n = spec.grid_size;
    let length = spec.box_length;
    let h = length / n as f64;
    let t = spec.t_final;
    let field = WFourierField {
        center: Vec3::new(length / 2.0, length / 2.0, length / 2.0),
        width: 0.5,
        t_final: t,
    };

    // spatial side: light-cone quadrature at every grid node; the resolution
    // is sized for ~1e-5 accuracy, two orders under the 1e-3 target
    let cone = LightConeSampler::new(t / 16.0, t + 1.0).with_angular_resolution(8, 6.0, 24);
    let closure = {
        let f = &field;
        AnalyticSpacetime(move |tau: f64, x: Vec3| f.eval(tau, x))
    };
    let spatial: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let i = idx / (n * n);
            let j = (idx / n) % n;
            let k = idx % n;
            let x = Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h);
            w_operator(&closure, t, x, &cone)
        })
        .collect::<Result<Vec<f64>>>()?;

    // spectral side: hat(W h)(t, xi) = int_0^t sin(s|xi|)/(s|xi|) a(t-s) ds * hat(g)
    let fft = Fft3::new(n);
    let mut ghat = crate::spectral::to_complex(
        &(0..n * n * n)
            .map(|idx| {
                let i = idx / (n * n);
                let j = (idx / n) % n;
                let k = idx % n;
                field.spatial(Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h))
            })
            .collect::<Vec<f64>>(),
    );
    fft.forward(&mut ghat);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = (i * n + j) * n + k;
                let kn = k_norm(i, j, k, n, length);
                let factor = if kn == 0.0 {
                    adaptive_simpson(&|s: f64| field.amplitude(t - s), 0.0, t, 1e-11, 50)
                } else {
                    adaptive_simpson(
                        &|s: f64| {
                            let arg = s * kn;
                            let sinc = if arg.abs() < 1e-8 {
                                1.0 - arg * arg / 6.0
                            } else {
                                arg.sin() / arg
                            };
                            sinc * field.amplitude(t - s)
                        },
                        0.0,
                        t,
                        1e-11,
                        50,
                    )
                };
                ghat[idx] *= factor;
            }
        }
    }
    fft.inverse(&mut ghat);
    let spectral = crate::spectral::to_real(&ghat);

    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in spatial.iter().zip(&spectral) {
        num += (a - b) * (a - b);
        den += b * b;
    }
    let rel_l2 = (num / den).sqrt();

    let mut rows = vec![SampleRow {
        label: format!("rel_L2 at t={t} on {n}^3"),
        lhs: rel_l2,
        rhs_envelope: 1e-3,
        ratio: rel_l2 / 1e-3,
    }];

    // h = 1 closed forms, exact to 1e-10
    let one = AnalyticSpacetime(|_t: f64, _x: Vec3| 1.0);
    let probe = Vec3::new(length / 2.0, length / 2.0, length / 2.0);
    let sampler1 = LightConeSampler::new(0.05, t + 1.0);
    let box_one = box_inverse(&one, t, probe, &sampler1)?;
    let w_one = w_operator(&one, t, probe, &sampler1)?;
    let box_err = (box_one - t * t / 2.0).abs();
    let w_err = (w_one - t).abs();
    rows.push(SampleRow {
        label: "box^-1 of 1 vs t^2/2".into(),
        lhs: box_one,
        rhs_envelope: t * t / 2.0,
        ratio: box_one / (t * t / 2.0),
    });
    rows.push(SampleRow {
        label: "W of 1 vs t".into(),
        lhs: w_one,
        rhs_envelope: t,
        ratio: w_one / t,
    });

    // time-independent variant: the s-integral reduces to Si(t |xi|)/(t |xi|)
    let mut si_err = 0.0f64;
    for kn in [0.7, 1.9, 4.2, 9.5] {
        let quad = adaptive_simpson(
            &|s: f64| {
                let arg = s * kn;
                if arg.abs() < 1e-8 {
                    1.0 - arg * arg / 6.0
                } else {
                    arg.sin() / arg
                }
            },
            0.0,
            t,
            1e-11,
            50,
        );
        let si = sine_integral(t * kn) / kn;
        si_err = si_err.max(((quad - si) / si).abs());
    }

    // Sobolev seminorm bound of the proof's final display, on the spectral
    // side field: ||W h(t)||_{Hdot^{1-eps}} <= 2 int_0^t s^{eps-1} ||h(t-s)||_L2 ds
    let mut sobolev_rows = Vec::new();
    for eps in [1.0, 0.5] {
        let lhs = sobolev_seminorm(&spectral, n, length, 1.0 - eps);
        // head + tail: int_0^delta s^{eps-1} a(t-s) ds ~ a(t) delta^eps/eps
        let delta = 1e-6f64;
        let head = field.l2_norm(t) * delta.powf(eps) / eps;
        let tail = adaptive_simpson(
            &|s: f64| s.powf(eps - 1.0) * field.l2_norm(t - s),
            delta,
            t,
            1e-10,
            50,
        );
        let rhs = 2.0 * (head + tail);
        sobolev_rows.push(SampleRow {
            label: format!("Sobolev bound eps={eps} t={t}"),
            lhs,
            rhs_envelope: rhs,
            ratio: lhs / rhs,
        });
    }
    let sobolev_ok = sobolev_rows.iter().all(|r| r.ratio <= 1.0);
    rows.extend(sobolev_rows);

    let mut report = VerificationReport::from_rows("3.3", rows, 1.0, f64::INFINITY);
    report.refinement_stable = true;
    report.notes.push(format!("spatial vs spectral relative L2: {rel_l2:.3e}"));
    report.notes.push(format!("h=1 closed forms: box err {box_err:.3e}, W err {w_err:.3e}"));
    report.notes.push(format!("sine-integral reduction max rel err: {si_err:.3e}"));
    report.notes.push(format!("Sobolev seminorm bound holds: {sobolev_ok}"));
    report.pass = rel_l2 <= 1e-3 && box_err <= 1e-10 && w_err <= 1e-10 && si_err <= 1e-3 && sobolev_ok;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Eq. (4.2): the light-cone change of variables
// ---------------------------------------------------------------------------

/// Halton radical-inverse sequence (quasi-Monte Carlo), deterministic with a
/// seed-derived offset.
fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// A subluminal path X0(s) with |V0| < 1.
pub enum ConePath {
    Static { x0: Vec3 },
    ConstantVelocity { x0: Vec3, v0: Vec3 },
}

impl ConePath {
    fn position(&self, s: f64) -> Vec3 {
        match self {
            ConePath::Static { x0 } => *x0,
            ConePath::ConstantVelocity { x0, v0 } => *x0 + *v0 * s,
        }
    }

    fn velocity(&self, _s: f64) -> Vec3 {
        match self {
            ConePath::Static { .. } => Vec3::default(),
            ConePath::ConstantVelocity { v0, .. } => *v0,
        }
    }
}

/// Quasi-MC check of
/// int_{M_tau} g(Phi(s,phi,theta)) (1 + V0.omega)(s-tau)^2 sin(theta) =
/// int_{Phi(M_tau)} g(y) dy, the image being the ball around X0(t) of radius
/// t - tau. Returns (lhs, rhs, duplicate count of the injectivity check).
pub fn phi_tau_both_sides(
    path: &ConePath,
    tau: f64,
    t: f64,
    samples: usize,
    seed: u64,
    g: impl Fn(Vec3) -> f64 + Sync,
) -> (f64, f64, usize) {
    let span = t - tau;
    let offset = seed % 65536;
    let total: f64 = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u1 = halton(i + 1 + offset, 2);
            let u2 = halton(i + 1 + offset, 3);
            let u3 = halton(i + 1 + offset, 5);
            let s = tau + span * u1;
            let phi = 2.0 * std::f64::consts::PI * u2;
            let theta = std::f64::consts::PI * u3;
            let omega = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            let y = path.position(s) + omega * (s - tau);
            g(y) * (1.0 + path.velocity(s).dot(omega)) * (s - tau).powi(2) * theta.sin()
        })
        .sum();
    let volume = span * 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    let lhs = total / samples as f64 * volume;

    // image integral: ball around X0(t) of radius span
    let center = path.position(t);
    let rule = SphereRule::gauss_product(32, 64);
    let (rs, ws) = gauss_legendre_on(64, 0.0, span);
    let mut rhs = 0.0;
    for (r, wr) in rs.iter().zip(&ws) {
        let mut shell = 0.0;
        for (node, wo) in rule.nodes.iter().zip(&rule.weights) {
            shell += wo * g(center + *node * *r);
        }
        rhs += wr * r * r * shell;
    }

    // injectivity spot check: quantized images of well-separated parameters
    // must be distinct
    let mut seen = std::collections::HashMap::new();
    let mut duplicates = 0usize;
    let m = 10_000u64;
    for i in 0..m {
        let u1 = halton(i + 1, 2);
        let u2 = halton(i + 1, 3);
        let u3 = halton(i + 1, 5);
        let s = tau + span * u1;
        let theta = std::f64::consts::PI * u3;
        let phi = 2.0 * std::f64::consts::PI * u2;
        let omega = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let y = path.position(s) + omega * (s - tau);
        let q = 1e-7 * span;
        let key = ((y.x / q) as i64, (y.y / q) as i64, (y.z / q) as i64);
        if let Some((ps, pth, pph)) = seen.insert(key, (s, theta, phi)) {
            let dparam: f64 = (ps - s).abs() + (pth - theta).abs() + (pph - phi).abs();
            if dparam > 1e-5 {
                duplicates += 1;
            }
        }
    }
    (lhs, rhs, duplicates)
}

pub fn verify_phi_tau_campaign(spec: &SweepSpec) -> Result<VerificationReport> {
    let t = 1.4;
    let tau = 0.3;
    let paths: Vec<(&str, ConePath)> = vec![
        ("static", ConePath::Static { x0: Vec3::default() }),
        (
            "v=(0.5,0,0)",
            ConePath::ConstantVelocity { x0: Vec3::default(), v0: Vec3::new(0.5, 0.0, 0.0) },
        ),
    ];
    let mut rows = Vec::new();
    let mut duplicates_total = 0;
    for (name, path) in &paths {
        let center = path.position(t);
        let g = |y: Vec3| crate::kinetic::bump((y - center - Vec3::new(0.2, 0.1, -0.1)).norm() / 0.7);
        let (lhs, rhs, dups) = phi_tau_both_sides(path, tau, t, spec.samples, spec.seed, g);
        duplicates_total += dups;
        rows.push(SampleRow {
            label: format!("{name} tau={tau} t={t}"),
            lhs,
            rhs_envelope: rhs,
            ratio: lhs / rhs,
        });
        // g = 0 stays 0 = 0
        let (z_lhs, z_rhs, _) = phi_tau_both_sides(path, tau, t, 1000, spec.seed, |_| 0.0);
        assert_eq!(z_lhs, 0.0);
        assert_eq!(z_rhs, 0.0);
    }
    let worst = rows
        .iter()
        .map(|r| (r.ratio - 1.0).abs())
        .fold(0.0f64, f64::max);
    let mut report = VerificationReport::from_rows("4.2", rows, 1.0, f64::INFINITY);
    report.refinement_stable = true;
    report.notes.push(format!("worst both-sides mismatch: {worst:.3e}"));
    report.notes.push(format!("injectivity duplicates: {duplicates_total}"));
    report.pass = worst <= 1e-2 && duplicates_total == 0;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Lemma 2.2 family: moment inequalities on runs and synthetic densities
// ---------------------------------------------------------------------------

fn small_run_config() -> crate::runner::RunConfig {
    crate::runner::RunConfig {
        cells: 16,
        length: 6.0,
        dt: 0.04,
        n_steps: 100,
        cadence: 5,
        nx_particles: 10,
        np_particles: 2,
        amplitude: 0.4,
        ..Default::default()
    }
}

fn verdict_to_rows(v: &crate::diagnostics::Verdict) -> SampleRow {
    SampleRow {
        label: format!("{}: {}", v.name, v.detail),
        lhs: v.fitted_constant,
        rhs_envelope: 1.0,
        ratio: v.fitted_constant,
    }
}

pub fn verify_moment_inequality(spec: &SweepSpec) -> Result<VerificationReport> {
    let mut rows = Vec::new();
    let mut notes = Vec::new();

    // free streaming: E = 0 keeps m_k exactly constant
    let spec_f0 = crate::kinetic::DensitySpec::SeparableBump {
        amplitude: 1.0,
        center: Vec3::default(),
        rx: 1.0,
        rp: 0.5,
    };
    let mut ens = spec_f0.sample_lattice(6, 2);
    let m2_start = crate::diagnostics::moment_mk(&ens, 2.0);
    let zero = crate::kinetic::UniformFields { e: Vec3::default(), b: Vec3::default() };
    for _ in 0..20 {
        crate::kinetic::transport_ensemble(&mut ens, &zero, 0.05, crate::kinetic::Pusher::Rk4)?;
    }
    let m2_drift = (crate::diagnostics::moment_mk(&ens, 2.0) - m2_start).abs() / m2_start;
    rows.push(SampleRow {
        label: "free streaming m_2 drift".into(),
        lhs: m2_drift,
        rhs_envelope: 1e-12,
        ratio: m2_drift / 1e-12,
    });

    // interpolation step on a synthetic separable Gaussian: k = 2, q = 5/4,
    // || int (1+p^2)^{1/2} f dp ||_{L^q} <= C L^{1/q'} m_{(k+2)q-3}^{1/q}
    let mut interp_ratios = Vec::new();
    for (amp, sx, sp) in [(1.0, 0.8, 0.5), (0.3, 1.4, 0.9), (2.0, 0.5, 1.4)] {
        let ratio = gaussian_interpolation_ratio(amp, sx, sp, spec.resolution);
        let refined = gaussian_interpolation_ratio(amp, sx, sp, spec.resolution * 2);
        interp_ratios.push((ratio, refined));
        rows.push(SampleRow {
            label: format!("interpolation k=2 q=5/4 (A={amp} sx={sx} sp={sp})"),
            lhs: ratio,
            rhs_envelope: 1.0,
            ratio,
        });
    }
    let interp_stable = interp_ratios
        .iter()
        .all(|(a, b)| (a / b).max(b / a) <= 1.05);
    notes.push(format!("interpolation ratios refinement-stable: {interp_stable}"));

    // split-sample audit on a coupled run
    let cfg = small_run_config();
    let artifacts = crate::runner::run_simulation(&cfg)?;
    let lemma22 = artifacts
        .verdicts
        .iter()
        .find(|v| v.name == "lemma22_moment")
        .cloned()
        .ok_or_else(|| VmxError::InvalidArgument("run produced no lemma22 verdict".into()))?;
    rows.push(verdict_to_rows(&lemma22));
    notes.push(format!("run audit: {}", lemma22.detail));

    let mut report = VerificationReport::from_rows("2.2", rows, 1.0, f64::INFINITY);
    report.refinement_stable = interp_stable;
    report.notes = notes;
    report.pass = m2_drift <= 1e-12 && interp_stable && lemma22.pass;
    Ok(report)
}

/// lhs/rhs of the k = 2, q = 5/4 interpolation estimate for the separable
/// density A exp(-|x|^2/(2 sx^2)) exp(-|p|^2/(2 sp^2)).
fn gaussian_interpolation_ratio(amp: f64, sx: f64, sp: f64, resolution: usize) -> f64 {
    let q = 1.25;
    let pi = std::f64::consts::PI;
    // radial momentum integrals by adaptive quadrature over [0, 12 sp]
    let j_weight = |power: f64| {
        adaptive_simpson(
            &|r: f64| {
                4.0 * pi * r * r * (1.0 + r * r).powf(power) * (-r * r / (2.0 * sp * sp)).exp()
            },
            0.0,
            12.0 * sp,
            10f64.powi(-(resolution as i32).min(12)),
            60,
        )
    };
    let j_half = j_weight(0.5); // int (1+p^2)^{1/2} U dp
    let j_two = j_weight(1.0); // int (1+p^2) U dp  ((k+2)q-3 = 2)
    // lhs: (int (A e^{-x^2/(2sx^2)} J)^q dx)^{1/q} = A J (q^{-1/2} ... ) gaussian
    let lhs = amp * j_half * ((2.0 * pi * sx * sx / q).powf(1.5)).powf(1.0 / q);
    // rhs pieces: L(0) = A, m_2 = 1 + A (2 pi sx^2)^{3/2} J_two
    let m2 = 1.0 + amp * (2.0 * pi * sx * sx).powf(1.5) * j_two;
    let rhs = amp.powf(1.0 - 1.0 / q) * m2.powf(1.0 / q);
    lhs / rhs
}

pub fn verify_sigma_vs_pinf(_spec: &SweepSpec) -> Result<VerificationReport> {
    let cfg = small_run_config();
    let artifacts = crate::runner::run_simulation(&cfg)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for v in &artifacts.verdicts {
        if v.name.starts_with("lemma23") {
            rows.push(verdict_to_rows(v));
            pass &= v.pass;
        }
    }
    // stability under doubling the particle count
    let mut cfg2 = cfg.clone();
    cfg2.nx_particles = ((cfg.nx_particles as f64) * 2f64.cbrt()).ceil() as usize;
    let artifacts2 = crate::runner::run_simulation(&cfg2)?;
    let fit = |a: &crate::runner::RunArtifacts, name: &str| {
        a.verdicts.iter().find(|v| v.name == name).map(|v| v.fitted_constant)
    };
    let mut stable = true;
    let mut notes = Vec::new();
    for v in &artifacts.verdicts {
        if v.name.starts_with("lemma23") {
            if let Some(c2) = fit(&artifacts2, &v.name) {
                let band = (v.fitted_constant / c2).max(c2 / v.fitted_constant);
                stable &= band <= 1.3;
                notes.push(format!("{}: fit {} vs doubled-count {} (x{band:.3})", v.name, v.fitted_constant, c2));
            }
        }
    }
    let mut report = VerificationReport::from_rows("2.3", rows, 1.0, f64::INFINITY);
    report.refinement_stable = stable;
    report.notes = notes;
    report.pass = pass && stable;
    Ok(report)
}

pub fn verify_lemma_51(_spec: &SweepSpec) -> Result<VerificationReport> {
    let cfg = small_run_config();
    let artifacts = crate::runner::run_simulation(&cfg)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for v in &artifacts.verdicts {
        if v.name.starts_with("lemma51") || v.name == "sigma_le_2I1" {
            rows.push(verdict_to_rows(v));
            pass &= v.pass;
        }
    }
    let mut report = VerificationReport::from_rows("5.1", rows, 1.0, f64::INFINITY);
    report.refinement_stable = true;
    report.pass = pass;
    Ok(report)
}

pub fn verify_cor_52(_spec: &SweepSpec) -> Result<VerificationReport> {
    let cfg = small_run_config();
    let artifacts = crate::runner::run_simulation(&cfg)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for v in &artifacts.verdicts {
        if v.name.starts_with("cor52") || v.name == "sigma_support" {
            rows.push(verdict_to_rows(v));
            pass &= v.pass;
        }
    }
    let mut report = VerificationReport::from_rows("5.2", rows, 1.0, f64::INFINITY);
    report.refinement_stable = true;
    report.pass = pass;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Strichartz probe (no pass/fail on the constant)
// ---------------------------------------------------------------------------

/// Spectral wave solve u = box^{-1} F for separable F(t,x) = a(t) g(x) on the
/// periodic box, with mixed-norm evaluation; reports the empirical ratio
/// lhs/rhs for gamma = 2(1 - eps)/3.
fn strichartz_ratio(
    n: usize,
    length: f64,
    t_final: f64,
    n_t: usize,
    eps: f64,
    shift: Vec3,
) -> f64 {
    let gamma = 2.0 * (1.0 - eps) / 3.0;
    let h = length / n as f64;
    let center = Vec3::new(length / 2.0, length / 2.0, length / 2.0) + shift;
    let width = length / 14.0;
    let g: Vec<f64> = (0..n * n * n)
        .map(|idx| {
            let i = idx / (n * n);
            let j = (idx / n) % n;
            let k = idx % n;
            let x = Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h);
            (-(x - center).norm_sq() / (2.0 * width * width)).exp()
        })
        .collect();
    let a = |s: f64| ((std::f64::consts::PI * s / t_final).sin()).powi(2);

    let fft = Fft3::new(n);
    let mut ghat = crate::spectral::to_complex(&g);
    fft.forward(&mut ghat);

    let dt = t_final / n_t as f64;
    // incremental Duhamel: u_hat(t) = ghat (sin(tk) Ic - cos(tk) Is)/k
    let mut ic = vec![0.0f64; n * n * n];
    let mut is = vec![0.0f64; n * n * n];
    let mut i0 = 0.0f64; // int a
    let mut i1 = 0.0f64; // int s a
    let q_x = 2.0 / (1.0 - gamma);
    let q_t = 2.0 / gamma;
    let mut time_acc = 0.0;
    for j_t in 1..=n_t {
        let t_prev = (j_t - 1) as f64 * dt;
        let t_cur = j_t as f64 * dt;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = (i * n + j) * n + k;
                    let kn = k_norm(i, j, k, n, length);
                    if kn == 0.0 {
                        continue;
                    }
                    ic[idx] += 0.5 * dt * ((t_prev * kn).cos() * a(t_prev) + (t_cur * kn).cos() * a(t_cur));
                    is[idx] += 0.5 * dt * ((t_prev * kn).sin() * a(t_prev) + (t_cur * kn).sin() * a(t_cur));
                }
            }
        }
        i0 += 0.5 * dt * (a(t_prev) + a(t_cur));
        i1 += 0.5 * dt * (t_prev * a(t_prev) + t_cur * a(t_cur));
        // u(t_cur)
        let mut uhat = vec![crate::spectral::C64::default(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = (i * n + j) * n + k;
                    let kn = k_norm(i, j, k, n, length);
                    let factor = if kn == 0.0 {
                        t_cur * i0 - i1
                    } else {
                        ((t_cur * kn).sin() * ic[idx] - (t_cur * kn).cos() * is[idx]) / kn
                    };
                    uhat[idx] = ghat[idx] * factor;
                }
            }
        }
        fft.inverse(&mut uhat);
        let u = crate::spectral::to_real(&uhat);
        let lx: f64 = crate::spectral::grid_lq_norm(&u, h, q_x);
        time_acc += lx.powf(q_t) * dt;
    }
    let lhs = time_acc.powf(1.0 / q_t);

    // rhs: || F ||_{L_t^{2/(1+gamma)} L_x^{2/(2-gamma)}} for separable F
    let gx = crate::spectral::grid_lq_norm(&g, h, 2.0 / (2.0 - gamma));
    let qt_rhs = 2.0 / (1.0 + gamma);
    let at_norm = adaptive_simpson(&|s: f64| a(s).powf(qt_rhs), 0.0, t_final, 1e-11, 50)
        .powf(1.0 / qt_rhs);
    let rhs = gx * at_norm;
    lhs / rhs
}

pub fn verify_strichartz_empirical(spec: &SweepSpec) -> Result<VerificationReport> {
    let n = spec.grid_size;
    let length = spec.box_length;
    let t = spec.t_final;
    let eps = spec.epsilon;
    let base = strichartz_ratio(n, length, t, 32, eps, Vec3::default());
    let refined = strichartz_ratio(n + n / 2, length, t, 64, eps, Vec3::default());
    let shifted = strichartz_ratio(n, length, t, 32, eps, Vec3::new(0.83, -0.41, 0.57));
    let stability = (base / refined).max(refined / base);
    let translation = (base / shifted).max(shifted / base);
    let rows = vec![
        SampleRow {
            label: format!("C*_gamma (gamma = {})", 2.0 * (1.0 - eps) / 3.0),
            lhs: base,
            rhs_envelope: base,
            ratio: 1.0,
        },
        SampleRow {
            label: "refined grid".into(),
            lhs: refined,
            rhs_envelope: base,
            ratio: refined / base,
        },
        SampleRow {
            label: "translated forcing".into(),
            lhs: shifted,
            rhs_envelope: base,
            ratio: shifted / base,
        },
    ];
    let mut report = VerificationReport::from_rows("strichartz", rows, 1.0, f64::INFINITY);
    report.fitted_constant = base;
    report.refined_constant = refined;
    report.refinement_stable = stability <= 1.3;
    report.notes.push(format!(
        "empirical ratio {base:.6} (refinement x{stability:.3}, translation x{translation:.3}); no pass/fail on the constant itself"
    ));
    report.pass = base.is_finite() && report.refinement_stable && translation <= 1.05;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_value_from_the_proof() {
        // theta = 0.5, |v| = 0.6 evaluates to about 13.245
        let v = sphere_power_closed_form(0.5, 0.6);
        assert!((v - 13.2457).abs() < 1e-3, "{v}");
        // v = 0 gives 4 pi for any theta
        assert_eq!(sphere_power_closed_form(0.3, 0.0), 4.0 * std::f64::consts::PI);
    }

    #[test]
    fn lemma_24c_campaign_passes() {
        let spec = SweepSpec::default_for("2.4c").unwrap();
        let report = verify_lemma_24c(&spec).unwrap();
        assert!(report.pass, "{}", report.render());
    }

    #[test]
    fn lemma_24a_hypothesis_guard() {
        let mut spec = SweepSpec::default_for("2.4a").unwrap();
        spec.radii = vec![5.0];
        assert!(matches!(
            verify_lemma_24a(&spec),
            Err(VmxError::HypothesisViolation(_))
        ));
        let mut spec = SweepSpec::default_for("2.4a").unwrap();
        spec.thetas = vec![1.6];
        assert!(verify_lemma_24a(&spec).is_err());
    }

    #[test]
    fn lemma_24a_small_sweep() {
        let spec = SweepSpec {
            thetas: vec![0.0, 1.0],
            radii: vec![10.0, 100.0],
            n_directions: 4,
            resolution: 20,
            ..SweepSpec::default()
        };
        let report = verify_lemma_24a(&spec).unwrap();
        assert!(report.pass, "{}", report.render());
    }

    #[test]
    fn lemma_24b_small_sweep() {
        let spec = SweepSpec {
            thetas: vec![1.0, 3.0],
            kappas: vec![1.5, 3.0],
            radii: vec![10.0, 100.0],
            n_directions: 4,
            resolution: 20,
            ..SweepSpec::default()
        };
        let report = verify_lemma_24b(&spec).unwrap();
        assert!(report.pass, "{}", report.render());
    }

    #[test]
    fn kernel_bound_campaign() {
        let spec = SweepSpec { samples: 100_000, ..SweepSpec::default() };
        let report = verify_kernel_bound_sweep(&spec).unwrap();
        assert!(report.pass, "{}", report.render());
    }

    #[test]
    fn phi_tau_campaign_small() {
        let spec = SweepSpec { samples: 200_000, ..SweepSpec::default() };
        let report = verify_phi_tau_campaign(&spec).unwrap();
        assert!(report.pass, "{}", report.render());
        // static path matches to 1e-3 (quasi-MC on a smooth bump)
        let static_row = &report.rows[0];
        assert!(
            (static_row.ratio - 1.0).abs() < 1e-3,
            "static mismatch {}",
            static_row.ratio
        );
    }

    #[test]
    fn spec_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.cfg");
        std::fs::write(&path, "thetas = 0.1, 0.5\nradii = 10\nseed = 7\n# comment\n").unwrap();
        let spec = SweepSpec::load(&path).unwrap();
        assert_eq!(spec.thetas, vec![0.1, 0.5]);
        assert_eq!(spec.seed, 7);
        std::fs::write(&path, "nope = 1\n").unwrap();
        assert!(SweepSpec::load(&path).is_err());
    }
}
