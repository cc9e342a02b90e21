//! Field representation by retarded light-cone integrals: the decomposition
//!
//! ```text
//!   E = E_D + E_DT + E_flat + E_sharp      (B analogously)
//! ```
//!
//! with data terms evaluated from the analytic initial data by sphere
//! quadrature at radius t, and the cone terms integrated over retarded
//! shells of the stored history. Momentum integrals inside the cone are
//! exact weighted sums over the per-cell binned particles; the force-weighted
//! term (Lf) samples the stored grids at the particle positions, so the
//! reconstruction is a posteriori (no self-consistent iteration).

use rayon::prelude::*;

use crate::diagnostics::{bin_ensemble, sigma_minus1, CellBinning};
use crate::error::{Result, VmxError};
use crate::fields::{sample_fields, FieldGrid};
use crate::kinetic::{velocity_of_momentum, DensitySpec, Ensemble, InitialData};
use crate::lightcone::{LightConeSampler, SpacetimeField};
use crate::quadrature::{momentum_ball_integral, RadialSigmaGrid, SphereRule};
use crate::vec3::{Mat3, Vec3};

/// The six kernels at one (omega, p): two data-term vectors, two flat
/// vectors, two sharp matrices.
#[derive(Clone, Debug)]
pub struct KernelSet {
    pub e_dt: Vec3,
    pub b_dt: Vec3,
    pub e_flat: Vec3,
    pub b_flat: Vec3,
    pub e_sharp: Mat3,
    pub b_sharp: Mat3,
}

fn cross_matrix(a: Vec3) -> Mat3 {
    // rows of M with M z = a x z
    Mat3::from_rows(
        Vec3::new(0.0, -a.z, a.y),
        Vec3::new(a.z, 0.0, -a.x),
        Vec3::new(-a.y, a.x, 0.0),
    )
}

/// Evaluate all six kernels; the velocity is derived from p internally.
/// omega must be a unit vector to 1e-12.
pub fn eval_kernels(omega: Vec3, p: Vec3) -> Result<KernelSet> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(VmxError::InvalidArgument(format!(
            "kernel direction must be unit: |omega| = {}",
            omega.norm()
        )));
    }
    Ok(eval_kernels_unchecked(omega, p))
}

pub fn eval_kernels_unchecked(omega: Vec3, p: Vec3) -> KernelSet {
    let p2 = p.norm_sq();
    let gamma2 = 1.0 + p2;
    let gamma = gamma2.sqrt();
    let v = p / gamma;
    let u = 1.0 + v.dot(omega);
    let vw = v.dot(omega);
    let v_cross_w = v.cross(omega);

    let e_dt = (omega - v * vw) / u;
    let b_dt = -v_cross_w / u;
    let e_flat = (v + omega) / (gamma2 * u * u);
    let b_flat = -v_cross_w / (gamma2 * u * u);

    // [(1+v.w) I + ((v.w) w - v) (x) v - (v+w) (x) w] / (gamma u^2)
    let scale = 1.0 / (gamma * u * u);
    let e_sharp = Mat3::identity()
        .scale(u)
        .add(&Mat3::outer(omega * vw - v, v))
        .sub(&Mat3::outer(v + omega, omega))
        .scale(scale);
    // [(1+v.w) (w x .) - (v x w) (x) (v+w)] / (gamma u^2)
    let b_sharp = cross_matrix(omega)
        .scale(u)
        .sub(&Mat3::outer(v_cross_w, v + omega))
        .scale(scale);

    KernelSet { e_dt, b_dt, e_flat, b_flat, e_sharp, b_sharp }
}

/// Report of the Lemma-style kernel bound sweep.
#[derive(Clone, Debug)]
pub struct KernelBoundReport {
    /// Smallest admissible constants per bound: DT, flat, sharp (E), sharp (B).
    pub fitted_dt: f64,
    pub fitted_flat: f64,
    pub fitted_sharp_e: f64,
    pub fitted_sharp_b: f64,
    /// Violations against the proof constants sqrt(2), sqrt(2), 4, 3.
    pub violations: usize,
    pub samples: usize,
}

/// Sample random (omega, p) with |p| up to `p_max` and fit the smallest
/// admissible constants of the kernel bounds
///
/// ```text
///   |K_{.,DT}|      <= C (1+v.w)^{-1/2}
///   |K_{.,flat}|    <= C (1+p^2)^{-1}   (1+v.w)^{-3/2}
///   |K_{.,sharp} z| <= C (1+p^2)^{-1/2} (1+v.w)^{-1} |z|
/// ```
///
/// The proof's vector estimates give sqrt(2) for the first two and 4 (E) /
/// 3 (B) for the third; any sample exceeding those is counted as a violation.
pub fn check_kernel_bounds(n_samples: usize, p_max: f64, seed: u64) -> KernelBoundReport {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = KernelBoundReport {
        fitted_dt: 0.0,
        fitted_flat: 0.0,
        fitted_sharp_e: 0.0,
        fitted_sharp_b: 0.0,
        violations: 0,
        samples: n_samples,
    };
    let dir = |rng: &mut ChaCha8Rng| loop {
        let v = Vec3::new(
            rng.gen_range(-1.0f64..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    };
    for _ in 0..n_samples {
        let omega = dir(&mut rng);
        let mag = 10f64.powf(rng.gen_range(-3.0..p_max.log10()));
        let p = dir(&mut rng) * mag;
        let z = dir(&mut rng);
        let ks = eval_kernels_unchecked(omega, p);
        let gamma2 = 1.0 + p.norm_sq();
        let u = 1.0 + velocity_of_momentum(p).dot(omega);

        let dt_ratio = ks.e_dt.norm().max(ks.b_dt.norm()) * u.sqrt();
        let flat_ratio = ks.e_flat.norm().max(ks.b_flat.norm()) * gamma2 * u.powf(1.5);
        let sharp_e_ratio = ks.e_sharp.apply(z).norm() * gamma2.sqrt() * u;
        let sharp_b_ratio = ks.b_sharp.apply(z).norm() * gamma2.sqrt() * u;

        report.fitted_dt = report.fitted_dt.max(dt_ratio);
        report.fitted_flat = report.fitted_flat.max(flat_ratio);
        report.fitted_sharp_e = report.fitted_sharp_e.max(sharp_e_ratio);
        report.fitted_sharp_b = report.fitted_sharp_b.max(sharp_b_ratio);
        let sqrt2 = std::f64::consts::SQRT_2;
        if dt_ratio > sqrt2 + 1e-9
            || flat_ratio > sqrt2 + 1e-9
            || sharp_e_ratio > 4.0 + 1e-9
            || sharp_b_ratio > 3.0 + 1e-9
        {
            report.violations += 1;
        }
    }
    report
}

// ---------------------------------------------------------------------------
// history
// ---------------------------------------------------------------------------

/// One particle entry of a binned snapshot: momentum, weight, and the Lorentz
/// force from the stored grid at the particle position.
#[derive(Copy, Clone, Debug)]
pub struct CellEntry {
    pub p: Vec3,
    pub w: f64,
    pub l: Vec3,
}

/// One stored time level: binned particle digest plus the field grid.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub grid: FieldGrid,
    cells: Vec<Vec<CellEntry>>,
    n: usize,
    h: f64,
}

impl Snapshot {
    /// Bin the ensemble on the grid mesh and attach the gathered Lorentz
    /// force to every particle.
    pub fn capture(ensemble: &Ensemble, grid: &FieldGrid) -> Result<Self> {
        let n = grid.n;
        let h = grid.h;
        let binning = bin_ensemble(ensemble, n, h)?;
        let mut cells: Vec<Vec<CellEntry>> = vec![Vec::new(); n * n * n];
        for cell in &binning.cells {
            let flat = (cell.index.0 * n + cell.index.1) * n + cell.index.2;
            let mut entries = Vec::with_capacity(cell.particles.len());
            for (p, w) in &cell.particles {
                // L is gathered at the cell's particles' common retarded
                // point; use the cell itself, particle by particle
                entries.push(CellEntry { p: *p, w: *w, l: Vec3::default() });
            }
            cells[flat] = entries;
        }
        // second pass for L: needs the particle positions, so walk the
        // ensemble again in the same order as bin_ensemble grouped them
        let mut snapshot =
            Snapshot { t: ensemble.t, grid: grid.clone(), cells, n, h };
        snapshot.attach_forces(ensemble)?;
        Ok(snapshot)
    }

    fn attach_forces(&mut self, ensemble: &Ensemble) -> Result<()> {
        let n = self.n;
        let h = self.h;
        let mut cursor: Vec<usize> = vec![0; n * n * n];
        for s in &ensemble.particles {
            let ix = ((s.x.x / h) as usize).min(n - 1);
            let iy = ((s.x.y / h) as usize).min(n - 1);
            let iz = ((s.x.z / h) as usize).min(n - 1);
            let flat = (ix * n + iy) * n + iz;
            let (e, b) = sample_fields(&self.grid, s.x)?;
            let v = velocity_of_momentum(s.p);
            let slot = cursor[flat];
            // binning grouped particles per cell in ensemble order
            let entry = &mut self.cells[flat][slot];
            debug_assert_eq!(entry.p, s.p);
            entry.l = e + v.cross(b);
            cursor[flat] = slot + 1;
        }
        Ok(())
    }

    pub fn cell_entries(&self, ix: i64, iy: i64, iz: i64) -> Option<&[CellEntry]> {
        if ix < 0 || iy < 0 || iz < 0 {
            return None;
        }
        let (ix, iy, iz) = (ix as usize, iy as usize, iz as usize);
        if ix >= self.n || iy >= self.n || iz >= self.n {
            return None;
        }
        let flat = (ix * self.n + iy) * self.n + iz;
        let entries = &self.cells[flat];
        if entries.is_empty() {
            None
        } else {
            Some(entries)
        }
    }

    /// Entries of the cell containing x, or None outside the box / empty.
    pub fn entries_at(&self, x: Vec3) -> Option<&[CellEntry]> {
        if !(0.0..self.grid.length).contains(&x.x)
            || !(0.0..self.grid.length).contains(&x.y)
            || !(0.0..self.grid.length).contains(&x.z)
        {
            return None;
        }
        self.cell_entries(
            (x.x / self.h) as i64,
            (x.y / self.h) as i64,
            (x.z / self.h) as i64,
        )
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Binning view for the diagnostics (re-binned on demand).
    pub fn to_binning(&self) -> CellBinning {
        let mut cells = Vec::new();
        for ix in 0..self.n {
            for iy in 0..self.n {
                for iz in 0..self.n {
                    let flat = (ix * self.n + iy) * self.n + iz;
                    if !self.cells[flat].is_empty() {
                        cells.push(crate::diagnostics::CellDensity {
                            index: (ix, iy, iz),
                            particles: self.cells[flat].iter().map(|e| (e.p, e.w)).collect(),
                            volume: self.cell_volume(),
                        });
                    }
                }
            }
        }
        CellBinning { n: self.n, h: self.h, cells }
    }
}

/// Time-ordered history of snapshots at uniform spacing.
#[derive(Clone, Debug, Default)]
pub struct HistoryBuffer {
    pub snapshots: Vec<Snapshot>,
}

impl HistoryBuffer {
    pub fn push(&mut self, snapshot: Snapshot) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if snapshot.t <= last.t {
                return Err(VmxError::InvalidArgument(
                    "history times must be strictly increasing".into(),
                ));
            }
            if self.snapshots.len() >= 2 {
                let dt = self.snapshots[1].t - self.snapshots[0].t;
                let step = snapshot.t - last.t;
                if ((step - dt) / dt).abs() > 1e-9 {
                    return Err(VmxError::InvalidArgument(format!(
                        "history spacing must be uniform: got {step}, expected {dt}"
                    )));
                }
            }
        }
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn t_min(&self) -> f64 {
        self.snapshots.first().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn t_max(&self) -> f64 {
        self.snapshots.last().map(|s| s.t).unwrap_or(0.0)
    }

    /// Bracketing snapshot indices and the interpolation weight for tau.
    pub fn bracket(&self, tau: f64) -> Result<(usize, usize, f64)> {
        if self.snapshots.is_empty() {
            return Err(VmxError::MissingSnapshot(tau));
        }
        let t0 = self.t_min();
        let t1 = self.t_max();
        if tau < t0 - 1e-9 || tau > t1 + 1e-9 {
            return Err(VmxError::HorizonExceeded {
                needed: tau,
                available: t1 - t0,
            });
        }
        if self.snapshots.len() == 1 {
            return Ok((0, 0, 0.0));
        }
        let dt = self.snapshots[1].t - self.snapshots[0].t;
        let pos = ((tau - t0) / dt).clamp(0.0, (self.snapshots.len() - 1) as f64);
        let lo = (pos.floor() as usize).min(self.snapshots.len() - 2);
        Ok((lo, lo + 1, (pos - lo as f64).clamp(0.0, 1.0)))
    }
}

// ---------------------------------------------------------------------------
// cone terms
// ---------------------------------------------------------------------------

fn flat_one_cell(snapshot: &Snapshot, ix: i64, iy: i64, iz: i64, omega: Vec3) -> (Vec3, Vec3) {
    match snapshot.cell_entries(ix, iy, iz) {
        None => (Vec3::default(), Vec3::default()),
        Some(entries) => {
            let inv_vol = 1.0 / snapshot.cell_volume();
            let mut e_acc = Vec3::default();
            let mut b_acc = Vec3::default();
            for entry in entries {
                let ks = eval_kernels_unchecked(omega, entry.p);
                e_acc += ks.e_flat * entry.w;
                b_acc += ks.b_flat * entry.w;
            }
            (e_acc * inv_vol, b_acc * inv_vol)
        }
    }
}

fn sharp_one_cell(snapshot: &Snapshot, ix: i64, iy: i64, iz: i64, omega: Vec3) -> (Vec3, Vec3) {
    match snapshot.cell_entries(ix, iy, iz) {
        None => (Vec3::default(), Vec3::default()),
        Some(entries) => {
            let inv_vol = 1.0 / snapshot.cell_volume();
            let mut e_acc = Vec3::default();
            let mut b_acc = Vec3::default();
            for entry in entries {
                let ks = eval_kernels_unchecked(omega, entry.p);
                e_acc += ks.e_sharp.apply(entry.l) * entry.w;
                b_acc += ks.b_sharp.apply(entry.l) * entry.w;
            }
            (e_acc * inv_vol, b_acc * inv_vol)
        }
    }
}

/// Trilinear interpolation of a per-cell kernel sum on the cell-center
/// lattice. The momentum side stays an exact weighted particle sum; the
/// interpolation only smooths the spatial cell averages, which restores
/// second-order convergence of the shell quadrature over the binned history.
fn interp_cells(
    snapshot: &Snapshot,
    point: Vec3,
    omega: Vec3,
    one_cell: impl Fn(&Snapshot, i64, i64, i64, Vec3) -> (Vec3, Vec3),
) -> (Vec3, Vec3) {
    let h = snapshot.h;
    let gx = point.x / h - 0.5;
    let gy = point.y / h - 0.5;
    let gz = point.z / h - 0.5;
    let (i0, j0, k0) = (gx.floor() as i64, gy.floor() as i64, gz.floor() as i64);
    let (dx, dy, dz) = (gx - i0 as f64, gy - j0 as f64, gz - k0 as f64);
    let mut e_acc = Vec3::default();
    let mut b_acc = Vec3::default();
    for (a, wa) in [(0, 1.0 - dx), (1, dx)] {
        for (b, wb) in [(0, 1.0 - dy), (1, dy)] {
            for (c, wc) in [(0, 1.0 - dz), (1, dz)] {
                let w = wa * wb * wc;
                if w == 0.0 {
                    continue;
                }
                let (e, bb) = one_cell(snapshot, i0 + a, j0 + b, k0 + c, omega);
                e_acc += e * w;
                b_acc += bb * w;
            }
        }
    }
    (e_acc, b_acc)
}

fn flat_cell_sum(snapshot: &Snapshot, point: Vec3, omega: Vec3) -> (Vec3, Vec3) {
    interp_cells(snapshot, point, omega, flat_one_cell)
}

fn sharp_cell_sum(snapshot: &Snapshot, point: Vec3, omega: Vec3) -> (Vec3, Vec3) {
    interp_cells(snapshot, point, omega, sharp_one_cell)
}

fn cone_term(
    history: &HistoryBuffer,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
    s_power: i32,
    cell_sum: impl Fn(&Snapshot, Vec3, Vec3) -> (Vec3, Vec3) + Sync,
) -> Result<(Vec3, Vec3)> {
    if t - history.t_min() > sampler.horizon + 1e-12 {
        return Err(VmxError::HorizonExceeded {
            needed: t - history.t_min(),
            available: sampler.horizon,
        });
    }
    if t <= history.t_min() {
        return Ok((Vec3::default(), Vec3::default()));
    }
    let span = t - history.t_min();
    let (nodes, weights) = crate::lightcone::simpson_grid(span, sampler.time_step);
    let mut e_total = Vec3::default();
    let mut b_total = Vec3::default();
    for (s, ws) in nodes.iter().zip(&weights) {
        if *s == 0.0 {
            continue; // s^power * shell area -> 0 for the cone kernels
        }
        let tau = t - s;
        let (lo, hi, alpha) = history.bracket(tau)?;
        let rule = sampler.shell_rule(*s);
        let mut e_shell = Vec3::default();
        let mut b_shell = Vec3::default();
        for (node, wo) in rule.nodes.iter().zip(&rule.weights) {
            let point = x + *node * *s;
            let (e0, b0) = cell_sum(&history.snapshots[lo], point, *node);
            let (e1, b1) = if hi == lo || alpha == 0.0 {
                (e0, b0)
            } else {
                cell_sum(&history.snapshots[hi], point, *node)
            };
            e_shell += (e0 * (1.0 - alpha) + e1 * alpha) * *wo;
            b_shell += (b0 * (1.0 - alpha) + b1 * alpha) * *wo;
        }
        let factor = ws * s.powi(s_power);
        e_total += e_shell * factor;
        b_total += b_shell * factor;
    }
    Ok((e_total, b_total))
}

// The kernels are taken sign-for-sign as printed, but the cone and DT terms
// carry an extra 1/(4 pi): the printed representation stems from a
// Gaussian-units source (div E = 4 pi rho), while the Maxwell system of this
// artifact is rationalized (div E = rho), as is the retarded kernel
// 1/(4 pi |y|). The static cold cloud pins the normalization: the flat term
// alone must reproduce the Coulomb field Q/(4 pi r^2).
const CONE_NORM: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// Flat cone terms: E_flat = -(1/4pi) int dy/|y|^2 int K_{E,flat} f dp,
/// B_flat with the opposite overall sign.
pub fn field_flat(
    history: &HistoryBuffer,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
) -> Result<(Vec3, Vec3)> {
    // dy/|y|^2 = ds dS(omega): power 0
    let (e, b) = cone_term(history, t, x, sampler, 0, flat_cell_sum)?;
    Ok((-e * CONE_NORM, b * CONE_NORM))
}

/// Sharp cone terms: E_sharp = -(1/4pi) int dy/|y| int K_{E,sharp} (Lf) dp,
/// B_sharp with the opposite overall sign; L comes from the stored grids.
pub fn field_sharp(
    history: &HistoryBuffer,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
) -> Result<(Vec3, Vec3)> {
    // dy/|y| = s ds dS(omega): power 1
    let (e, b) = cone_term(history, t, x, sampler, 1, sharp_cell_sum)?;
    Ok((-e * CONE_NORM, b * CONE_NORM))
}

// ---------------------------------------------------------------------------
// data terms
// ---------------------------------------------------------------------------

/// Momentum average of the DT kernels against the initial momentum factor
/// U(p): int K_{.,DT}(omega, v(p)) U(p) dp, by direct quadrature.
pub fn momentum_kernel_average(
    spec: &DensitySpec,
    omega: Vec3,
    grid: &RadialSigmaGrid,
    rule: &SphereRule,
) -> Result<(Vec3, Vec3)> {
    match spec {
        DensitySpec::Vacuum => Ok((Vec3::default(), Vec3::default())),
        DensitySpec::ColdCloud { .. } => {
            let ks = eval_kernels_unchecked(omega, Vec3::default());
            Ok((ks.e_dt, ks.b_dt))
        }
        DensitySpec::SeparableBump { rp, .. } => {
            let mut out = [Vec3::default(), Vec3::default()];
            for (slot, pick) in [(0usize, 0usize), (1, 1)] {
                for comp in 0..3 {
                    let val = momentum_ball_integral(
                        |p| {
                            let ks = eval_kernels_unchecked(omega, p);
                            let k = if pick == 0 { ks.e_dt } else { ks.b_dt };
                            k.comp(comp) * spec.momentum_factor(p)
                        },
                        *rp,
                        grid,
                        rule,
                    )?;
                    out[slot].set_comp(comp, val);
                }
            }
            Ok((out[0], out[1]))
        }
    }
}

/// The four data terms (E_D, B_D, E_DT, B_DT) at (t, x), by sphere quadrature
/// of the analytic initial data at radius t. The time derivative of the
/// spherical mean uses the exact directional derivative of the data, and for
/// the isotropic-in-p families the DT momentum average reduces to
/// (int U dp) omega for E and to zero for B.
pub fn data_terms(
    data: &InitialData,
    t: f64,
    x: Vec3,
    rule: &SphereRule,
) -> Result<(Vec3, Vec3, Vec3, Vec3)> {
    if t == 0.0 {
        return Ok((data.e0.eval(x), data.b0.eval(x), Vec3::default(), Vec3::default()));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut mean_e = Vec3::default();
    let mut mean_b = Vec3::default();
    let mut dmean_e = Vec3::default();
    let mut dmean_b = Vec3::default();
    let mut mean_edot = Vec3::default();
    let mut mean_bdot = Vec3::default();
    let mut dt_e = Vec3::default();
    let m_u = data.f0.momentum_mass();
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let y = x + *node * t;
        mean_e += data.e0.eval(y) * *w;
        mean_b += data.b0.eval(y) * *w;
        dmean_e += data.e0.directional_derivative(y, *node) * *w;
        dmean_b += data.b0.directional_derivative(y, *node) * *w;
        mean_edot += data.e_dot0(y) * *w;
        mean_bdot += data.b_dot0(y) * *w;
        // E_DT = -t int dS int K_{E,DT} f0 dp = -t M_U int dS S(x+t w) w
        dt_e += *node * (data.f0.spatial_factor(y) * *w);
    }
    let e_d = (mean_e + (dmean_e + mean_edot) * t) / four_pi;
    let b_d = (mean_b + (dmean_b + mean_bdot) * t) / four_pi;
    // the 1/(4 pi) converts the printed (Gaussian-convention) DT term to the
    // rationalized system, as for the cone terms
    let e_dt = -dt_e * (t * m_u) * CONE_NORM;
    let b_dt = Vec3::default(); // isotropic momentum factor: v-odd kernel integrates to zero
    Ok((e_d, b_d, e_dt, b_dt))
}

/// Full reconstruction with the per-term breakdown.
#[derive(Clone, Debug, Default)]
pub struct Reconstruction {
    pub e_d: Vec3,
    pub b_d: Vec3,
    pub e_dt: Vec3,
    pub b_dt: Vec3,
    pub e_flat: Vec3,
    pub b_flat: Vec3,
    pub e_sharp: Vec3,
    pub b_sharp: Vec3,
}

impl Reconstruction {
    pub fn e_total(&self) -> Vec3 {
        self.e_d + self.e_dt + self.e_flat + self.e_sharp
    }

    pub fn b_total(&self) -> Vec3 {
        self.b_d + self.b_dt + self.b_flat + self.b_sharp
    }
}

pub fn reconstruct_fields(
    history: &HistoryBuffer,
    data: &InitialData,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
    data_rule: &SphereRule,
) -> Result<Reconstruction> {
    let (e_d, b_d, e_dt, b_dt) = data_terms(data, t, x, data_rule)?;
    let (e_flat, b_flat) = field_flat(history, t, x, sampler)?;
    let (e_sharp, b_sharp) = field_sharp(history, t, x, sampler)?;
    Ok(Reconstruction { e_d, b_d, e_dt, b_dt, e_flat, b_flat, e_sharp, b_sharp })
}

// ---------------------------------------------------------------------------
// sigma_{-1} as a spacetime field over the history (for the bound chain)
// ---------------------------------------------------------------------------

/// sigma_{-1}(tau, y) evaluated from the history by per-cell maximization,
/// with all cell values precomputed per snapshot. Linear interpolation in
/// time between snapshots, zero outside the box.
pub struct SigmaHistoryField<'a> {
    history: &'a HistoryBuffer,
    tables: Vec<Vec<f64>>,
}

impl<'a> SigmaHistoryField<'a> {
    pub fn new(history: &'a HistoryBuffer, rule: &SphereRule) -> Self {
        let tables: Vec<Vec<f64>> = history
            .snapshots
            .par_iter()
            .map(|snap| {
                let n = snap.n;
                let mut table = vec![0.0; n * n * n];
                let binning = snap.to_binning();
                let values: Vec<(usize, f64)> = binning
                    .cells
                    .par_iter()
                    .map(|c| {
                        let flat = (c.index.0 * n + c.index.1) * n + c.index.2;
                        (flat, sigma_minus1(c, rule))
                    })
                    .collect();
                for (flat, v) in values {
                    table[flat] = v;
                }
                table
            })
            .collect();
        SigmaHistoryField { history, tables }
    }

    fn cell_value(&self, snap_idx: usize, y: Vec3) -> f64 {
        let snap = &self.history.snapshots[snap_idx];
        if !(0.0..snap.grid.length).contains(&y.x)
            || !(0.0..snap.grid.length).contains(&y.y)
            || !(0.0..snap.grid.length).contains(&y.z)
        {
            return 0.0;
        }
        let n = snap.n;
        let ix = ((y.x / snap.h) as usize).min(n - 1);
        let iy = ((y.y / snap.h) as usize).min(n - 1);
        let iz = ((y.z / snap.h) as usize).min(n - 1);
        self.tables[snap_idx][(ix * n + iy) * n + iz]
    }
}

impl SpacetimeField for SigmaHistoryField<'_> {
    fn eval(&self, tau: f64, y: Vec3) -> Result<f64> {
        let (lo, hi, alpha) = self.history.bracket(tau)?;
        let v0 = self.cell_value(lo, y);
        let v1 = if hi == lo { v0 } else { self.cell_value(hi, y) };
        Ok(v0 * (1.0 - alpha) + v1 * alpha)
    }
}

/// (|E| + |B|) sigma_{-1} as a spacetime field (for the sharp bound chain).
pub struct FieldWeightedSigma<'a> {
    pub sigma: &'a SigmaHistoryField<'a>,
    pub history: &'a HistoryBuffer,
}

impl SpacetimeField for FieldWeightedSigma<'_> {
    fn eval(&self, tau: f64, y: Vec3) -> Result<f64> {
        let sigma = self.sigma.eval(tau, y)?;
        if sigma == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi, alpha) = self.history.bracket(tau)?;
        let grab = |idx: usize| -> f64 {
            let snap = &self.history.snapshots[idx];
            match sample_fields(&snap.grid, y) {
                Ok((e, b)) => e.norm() + b.norm(),
                Err(_) => 0.0,
            }
        };
        let f0 = grab(lo);
        let f1 = if hi == lo { f0 } else { grab(hi) };
        Ok(sigma * (f0 * (1.0 - alpha) + f1 * alpha))
    }
}
