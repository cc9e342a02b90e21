//! Phase-space data model and characteristic transport.
//!
//! The characteristic system (units c = mass = charge = 1) is
//!
//! ```text
//!   dX/ds = V = P / sqrt(1 + |P|^2),     dP/ds = E + V x B,
//! ```
//!
//! and the density f is constant along its solutions. The ensemble is a
//! deterministic weighted sample of the analytic initial density on a regular
//! phase-space lattice, so moment quadratures converge deterministically.

use rayon::prelude::*;

use crate::error::{Result, VmxError};
use crate::vec3::{Mat3, Vec3};

/// v = p / sqrt(1 + p^2); always |v| < 1 for finite p.
pub fn velocity_of_momentum(p: Vec3) -> Vec3 {
    p / (1.0 + p.norm_sq()).sqrt()
}

/// Inverse map p = v / sqrt(1 - v^2); requires |v| < 1.
pub fn momentum_of_velocity(v: Vec3) -> Vec3 {
    v / (1.0 - v.norm_sq()).sqrt()
}

/// Lorentz factor sqrt(1 + p^2).
pub fn gamma_of_momentum(p: Vec3) -> f64 {
    (1.0 + p.norm_sq()).sqrt()
}

/// Lorentz force E + v x B.
pub fn lorentz_force(e: Vec3, b: Vec3, v: Vec3) -> Vec3 {
    e + v.cross(b)
}

/// One weighted phase-space sample.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub x: Vec3,
    pub p: Vec3,
    pub w: f64,
}

impl ParticleState {
    pub fn velocity(&self) -> Vec3 {
        velocity_of_momentum(self.p)
    }

    pub fn gamma(&self) -> f64 {
        gamma_of_momentum(self.p)
    }
}

/// Weighted particle ensemble representing f(t, x, p).
///
/// `f_sup` is the recorded supremum of the initial density and
/// `support_radius_x` the radius R0 (about `support_center`) outside of which
/// the initial density vanishes; both come from the analytic initial data,
/// not from the samples.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub particles: Vec<ParticleState>,
    pub t: f64,
    pub f_sup: f64,
    pub support_center: Vec3,
    pub support_radius_x: f64,
}

impl Ensemble {
    pub fn total_weight(&self) -> f64 {
        self.particles.iter().map(|s| s.w).sum()
    }

    pub fn max_momentum(&self) -> f64 {
        self.particles.iter().map(|s| s.p.norm()).fold(0.0, f64::max)
    }
}

/// Spacetime field evaluator used by the pusher. Must be callable
/// concurrently from many workers.
pub trait FieldSampler: Sync {
    fn sample(&self, t: f64, x: Vec3) -> Result<(Vec3, Vec3)>;
}

/// Constant fields everywhere.
pub struct UniformFields {
    pub e: Vec3,
    pub b: Vec3,
}

impl FieldSampler for UniformFields {
    fn sample(&self, _t: f64, _x: Vec3) -> Result<(Vec3, Vec3)> {
        Ok((self.e, self.b))
    }
}

/// Closure-backed analytic sampler.
pub struct AnalyticFields<F>(pub F);

impl<F: Fn(f64, Vec3) -> (Vec3, Vec3) + Sync> FieldSampler for AnalyticFields<F> {
    fn sample(&self, t: f64, x: Vec3) -> Result<(Vec3, Vec3)> {
        Ok((self.0)(t, x))
    }
}

/// Characteristic integrator selection.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Pusher {
    /// Fixed-step classical Runge-Kutta; used for verification runs.
    Rk4,
    /// Time-centered Boris-type push; preserves |P| exactly in pure
    /// magnetic fields.
    Boris,
}

fn phase_derivative(sampler: &dyn FieldSampler, t: f64, x: Vec3, p: Vec3) -> Result<(Vec3, Vec3)> {
    let (e, b) = sampler.sample(t, x).map_err(|err| VmxError::RunHalted {
        t,
        reason: format!("characteristic step aborted: {err}"),
    })?;
    let v = velocity_of_momentum(p);
    Ok((v, lorentz_force(e, b, v)))
}

/// Advance one particle by dt with the chosen integrator; the weight is
/// untouched. dt = 0 is the identity map and dt < 0 integrates backwards.
pub fn push_characteristic(
    s: &ParticleState,
    sampler: &dyn FieldSampler,
    t: f64,
    dt: f64,
    pusher: Pusher,
) -> Result<ParticleState> {
    if !dt.is_finite() {
        return Err(VmxError::InvalidArgument("dt must be finite".into()));
    }
    if dt == 0.0 {
        return Ok(*s);
    }
    match pusher {
        Pusher::Rk4 => push_rk4(s, sampler, t, dt),
        Pusher::Boris => push_boris(s, sampler, t, dt),
    }
}

fn push_rk4(s: &ParticleState, sampler: &dyn FieldSampler, t: f64, dt: f64) -> Result<ParticleState> {
    let (k1x, k1p) = phase_derivative(sampler, t, s.x, s.p)?;
    let (k2x, k2p) =
        phase_derivative(sampler, t + 0.5 * dt, s.x + k1x * (0.5 * dt), s.p + k1p * (0.5 * dt))?;
    let (k3x, k3p) =
        phase_derivative(sampler, t + 0.5 * dt, s.x + k2x * (0.5 * dt), s.p + k2p * (0.5 * dt))?;
    let (k4x, k4p) = phase_derivative(sampler, t + dt, s.x + k3x * dt, s.p + k3p * dt)?;
    Ok(ParticleState {
        x: s.x + (k1x + (k2x + k3x) * 2.0 + k4x) * (dt / 6.0),
        p: s.p + (k1p + (k2p + k3p) * 2.0 + k4p) * (dt / 6.0),
        w: s.w,
    })
}

fn push_boris(s: &ParticleState, sampler: &dyn FieldSampler, t: f64, dt: f64) -> Result<ParticleState> {
    let x_mid = s.x + velocity_of_momentum(s.p) * (0.5 * dt);
    let (e, b) = sampler.sample(t + 0.5 * dt, x_mid).map_err(|err| VmxError::RunHalted {
        t,
        reason: format!("characteristic step aborted: {err}"),
    })?;
    let p_minus = s.p + e * (0.5 * dt);
    let gamma = gamma_of_momentum(p_minus);
    let t_vec = b * (0.5 * dt / gamma);
    let s_vec = t_vec * (2.0 / (1.0 + t_vec.norm_sq()));
    let p_prime = p_minus + p_minus.cross(t_vec);
    let p_plus = p_minus + p_prime.cross(s_vec);
    let p_new = p_plus + e * (0.5 * dt);
    Ok(ParticleState { x: x_mid + velocity_of_momentum(p_new) * (0.5 * dt), p: p_new, w: s.w })
}

/// Advance every particle of the ensemble; weights, f_sup and the support
/// record are unchanged, t is incremented. The update is all-or-nothing: a
/// sampler failure at any stage point leaves the ensemble untouched.
pub fn transport_ensemble(
    e: &mut Ensemble,
    sampler: &(dyn FieldSampler + Sync),
    dt: f64,
    pusher: Pusher,
) -> Result<()> {
    let t = e.t;
    let advanced: Result<Vec<ParticleState>> = e
        .particles
        .par_iter()
        .map(|s| push_characteristic(s, sampler, t, dt, pusher))
        .collect();
    e.particles = advanced?;
    e.t += dt;
    Ok(())
}

// ---------------------------------------------------------------------------
// analytic initial data
// ---------------------------------------------------------------------------

/// C-infinity bump: exp(1 - 1/(1-u^2)) for |u| < 1, zero outside.
/// Normalized so bump(0) = 1; all derivatives vanish at |u| = 1.
pub fn bump(u: f64) -> f64 {
    let d = 1.0 - u * u;
    if d < 1.5e-3 {
        return 0.0; // value below e^-665, indistinguishable from zero
    }
    (1.0 - 1.0 / d).exp()
}

/// First derivative of [`bump`].
pub fn bump_d1(u: f64) -> f64 {
    let d = 1.0 - u * u;
    if d < 1.5e-3 {
        return 0.0;
    }
    bump(u) * (-2.0 * u / (d * d))
}

/// Second derivative of [`bump`].
pub fn bump_d2(u: f64) -> f64 {
    let d = 1.0 - u * u;
    if d < 1.5e-3 {
        return 0.0;
    }
    let f1 = -2.0 * u / (d * d);
    let f2 = -2.0 / (d * d) - 8.0 * u * u / (d * d * d);
    bump(u) * (f1 * f1 + f2)
}

/// Integral of bump(|q|) over the unit ball of q (a fixed constant,
/// evaluated once per call by adaptive quadrature).
pub fn bump_ball_mass() -> f64 {
    4.0 * std::f64::consts::PI
        * crate::quadrature::adaptive_simpson(&|u: f64| u * u * bump(u), 0.0, 1.0, 1e-13, 50)
}

/// Analytic specification of the initial density f^(0).
#[derive(Clone, Debug)]
pub enum DensitySpec {
    /// f^(0) = 0.
    Vacuum,
    /// amplitude * bump(|x-center|/rx) * bump(|p|/rp)
    SeparableBump { amplitude: f64, center: Vec3, rx: f64, rp: f64 },
    /// amplitude * bump(|x-center|/rx) * delta(p): all samples carry p = 0.
    ColdCloud { amplitude: f64, center: Vec3, rx: f64 },
}

impl DensitySpec {
    /// Recorded supremum L(0) of the initial density (ColdCloud: supremum of
    /// the spatial factor, the momentum direction being singular).
    pub fn f_sup(&self) -> f64 {
        match self {
            DensitySpec::Vacuum => 0.0,
            DensitySpec::SeparableBump { amplitude, .. } => *amplitude,
            DensitySpec::ColdCloud { amplitude, .. } => *amplitude,
        }
    }

    pub fn support_center(&self) -> Vec3 {
        match self {
            DensitySpec::Vacuum => Vec3::default(),
            DensitySpec::SeparableBump { center, .. } => *center,
            DensitySpec::ColdCloud { center, .. } => *center,
        }
    }

    pub fn support_radius_x(&self) -> f64 {
        match self {
            DensitySpec::Vacuum => 0.0,
            DensitySpec::SeparableBump { rx, .. } => *rx,
            DensitySpec::ColdCloud { rx, .. } => *rx,
        }
    }

    pub fn momentum_radius(&self) -> f64 {
        match self {
            DensitySpec::Vacuum | DensitySpec::ColdCloud { .. } => 0.0,
            DensitySpec::SeparableBump { rp, .. } => *rp,
        }
    }

    /// Spatial factor S(x) with f^(0)(x, p) = S(x) U(p).
    pub fn spatial_factor(&self, x: Vec3) -> f64 {
        match self {
            DensitySpec::Vacuum => 0.0,
            DensitySpec::SeparableBump { amplitude, center, rx, .. }
            | DensitySpec::ColdCloud { amplitude, center, rx } => {
                amplitude * bump((x - *center).norm() / rx)
            }
        }
    }

    /// Momentum factor U(p); for ColdCloud this is the singular direction and
    /// callers must use the dedicated p = 0 path.
    pub fn momentum_factor(&self, p: Vec3) -> f64 {
        match self {
            DensitySpec::Vacuum => 0.0,
            DensitySpec::SeparableBump { rp, .. } => bump(p.norm() / rp),
            DensitySpec::ColdCloud { .. } => {
                if p.norm_sq() == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Mass of the momentum factor (integral dp of U).
    pub fn momentum_mass(&self) -> f64 {
        match self {
            DensitySpec::Vacuum => 0.0,
            DensitySpec::SeparableBump { rp, .. } => rp.powi(3) * bump_ball_mass(),
            DensitySpec::ColdCloud { .. } => 1.0,
        }
    }

    /// Initial charge density rho^(0)(x).
    pub fn rho0(&self, x: Vec3) -> f64 {
        self.spatial_factor(x) * self.momentum_mass()
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, DensitySpec::Vacuum)
    }

    /// Deterministic lattice sampling: cell-centered nodes in x over the
    /// support cube and (for non-cold data) in p over the momentum cube;
    /// weights are f^(0) times the phase-cell volume. Zero-weight nodes are
    /// dropped.
    pub fn sample_lattice(&self, nx: usize, np: usize) -> Ensemble {
        let mut particles = Vec::new();
        match self {
            DensitySpec::Vacuum => {}
            DensitySpec::ColdCloud { amplitude, center, rx } => {
                let dx = 2.0 * rx / nx as f64;
                for ix in 0..nx {
                    for iy in 0..nx {
                        for iz in 0..nx {
                            let x = Vec3::new(
                                center.x - rx + (ix as f64 + 0.5) * dx,
                                center.y - rx + (iy as f64 + 0.5) * dx,
                                center.z - rx + (iz as f64 + 0.5) * dx,
                            );
                            let w = amplitude * bump((x - *center).norm() / rx) * dx.powi(3);
                            if w > 0.0 {
                                particles.push(ParticleState { x, p: Vec3::default(), w });
                            }
                        }
                    }
                }
            }
            DensitySpec::SeparableBump { amplitude, center, rx, rp } => {
                let dx = 2.0 * rx / nx as f64;
                let dp = 2.0 * rp / np as f64;
                let mut p_nodes = Vec::new();
                for jx in 0..np {
                    for jy in 0..np {
                        for jz in 0..np {
                            let p = Vec3::new(
                                -rp + (jx as f64 + 0.5) * dp,
                                -rp + (jy as f64 + 0.5) * dp,
                                -rp + (jz as f64 + 0.5) * dp,
                            );
                            let up = bump(p.norm() / rp);
                            if up > 0.0 {
                                p_nodes.push((p, up));
                            }
                        }
                    }
                }
                for ix in 0..nx {
                    for iy in 0..nx {
                        for iz in 0..nx {
                            let x = Vec3::new(
                                center.x - rx + (ix as f64 + 0.5) * dx,
                                center.y - rx + (iy as f64 + 0.5) * dx,
                                center.z - rx + (iz as f64 + 0.5) * dx,
                            );
                            let sx = amplitude * bump((x - *center).norm() / rx);
                            if sx <= 0.0 {
                                continue;
                            }
                            for (p, up) in &p_nodes {
                                particles.push(ParticleState {
                                    x,
                                    p: *p,
                                    w: sx * up * dx.powi(3) * dp.powi(3),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ensemble {
            particles,
            t: 0.0,
            f_sup: self.f_sup(),
            support_center: self.support_center(),
            support_radius_x: self.support_radius_x(),
        }
    }
}

/// Analytic field specification with exact derivatives, used both to fill
/// grids and to evaluate the Glassey-Strauss data terms.
#[derive(Clone, Debug)]
pub enum FieldSpec {
    Zero,
    Uniform(Vec3),
    /// Radial electrostatic field of the initial charge density of `rho`:
    /// E(x) = Q(r) rhat / (4 pi r^2) with Q(r) the enclosed charge. Curl-free
    /// and satisfying div E = rho^(0) exactly.
    CoulombOfDensity { rho: Box<DensitySpec> },
    /// curl(amplitude * bump(|x-center|/radius) * axis): divergence-free and
    /// compactly supported.
    DivFreeBump { amplitude: f64, center: Vec3, radius: f64, axis: Vec3 },
    /// curl(amplitude * exp(-|x-center|^2/(2 width^2)) * axis): divergence
    /// free with a Gaussian envelope. Not compactly supported, but entire,
    /// so spectral oracles see it without the Gevrey-edge aliasing of the
    /// bump profile.
    DivFreeGaussian { amplitude: f64, center: Vec3, width: f64, axis: Vec3 },
}

impl FieldSpec {
    pub fn eval(&self, x: Vec3) -> Vec3 {
        match self {
            FieldSpec::Zero => Vec3::default(),
            FieldSpec::Uniform(v) => *v,
            FieldSpec::CoulombOfDensity { rho } => {
                let c = rho.support_center();
                let r_vec = x - c;
                let r = r_vec.norm();
                r_vec * coulomb_g(rho, r)
            }
            FieldSpec::DivFreeBump { amplitude, center, radius, axis } => {
                let rv = x - *center;
                let r = rv.norm();
                if r == 0.0 {
                    return Vec3::default();
                }
                let c = amplitude * bump_d1(r / radius) / (radius * r);
                rv.cross(*axis) * c
            }
            FieldSpec::DivFreeGaussian { amplitude, center, width, axis } => {
                let rv = x - *center;
                // grad psi x a with psi = A exp(-r^2/(2w^2)): c(r) = -psi/w^2
                let c = -amplitude * (-rv.norm_sq() / (2.0 * width * width)).exp()
                    / (width * width);
                rv.cross(*axis) * c
            }
        }
    }

    /// Jacobian d field_i / d x_j.
    pub fn jacobian(&self, x: Vec3) -> Mat3 {
        match self {
            FieldSpec::Zero | FieldSpec::Uniform(_) => Mat3::default(),
            FieldSpec::CoulombOfDensity { rho } => {
                let c = rho.support_center();
                let rv = x - c;
                let r = rv.norm();
                let g = coulomb_g(rho, r);
                let gp = coulomb_g_prime(rho, r);
                if r == 0.0 {
                    return Mat3::identity().scale(g);
                }
                Mat3::outer(rv, rv).scale(gp / r).add(&Mat3::identity().scale(g))
            }
            FieldSpec::DivFreeBump { amplitude, center, radius, axis } => {
                let rv = x - *center;
                let r = rv.norm();
                if r == 0.0 {
                    // c(r) -> A b''(0)/R^2 * ... finite limit; the cross
                    // structure gives J_ij = c(0) eps_ijm a_m with
                    // c(0) = A b''(0) / R^2 ... b'(u)/u -> b''(0) as u -> 0
                    let c0 = amplitude * bump_d2(0.0) / (radius * radius);
                    return eps_contract(*axis).scale(c0);
                }
                let u = r / radius;
                let c = amplitude * bump_d1(u) / (radius * r);
                let cp = amplitude * (bump_d2(u) / (radius * radius * r)
                    - bump_d1(u) / (radius * r * r));
                let cross = rv.cross(*axis);
                Mat3::outer(cross, rv).scale(cp / r).add(&eps_contract(*axis).scale(c))
            }
            FieldSpec::DivFreeGaussian { amplitude, center, width, axis } => {
                let rv = x - *center;
                let w2 = width * width;
                let psi = (-rv.norm_sq() / (2.0 * w2)).exp();
                let c = -amplitude * psi / w2;
                // c'(r)/r = A psi / w^4 (independent of the r in c'(r) = A r psi / w^4)
                let cp_over_r = amplitude * psi / (w2 * w2);
                let cross = rv.cross(*axis);
                Mat3::outer(cross, rv).scale(cp_over_r).add(&eps_contract(*axis).scale(c))
            }
        }
    }

    pub fn curl(&self, x: Vec3) -> Vec3 {
        match self {
            FieldSpec::Zero | FieldSpec::Uniform(_) => Vec3::default(),
            // gradient-type radial field: curl-free
            FieldSpec::CoulombOfDensity { .. } => Vec3::default(),
            FieldSpec::DivFreeBump { amplitude, center, radius, axis } => {
                // curl curl (psi a) = grad(a . grad psi) - (lap psi) a with
                // radial psi(r) = bump(r/radius):
                //   = (psi'' - psi'/r)(a.rhat) rhat - (psi'' + psi'/r) a
                let rv = x - *center;
                let r = rv.norm();
                let u = r / radius;
                let psi2 = bump_d2(u) / (radius * radius);
                if r == 0.0 {
                    return *axis * (-2.0 * amplitude * psi2);
                }
                let psi1_over_r = bump_d1(u) / (radius * r);
                let rhat = rv / r;
                (rhat * ((psi2 - psi1_over_r) * axis.dot(rhat)) - *axis * (psi2 + psi1_over_r))
                    * *amplitude
            }
            FieldSpec::DivFreeGaussian { amplitude, center, width, axis } => {
                // same structure with psi = exp(-r^2/(2w^2)):
                //   psi'/r = -psi/w^2,  psi'' = (r^2/w^4 - 1/w^2) psi
                let rv = x - *center;
                let r2 = rv.norm_sq();
                let w2 = width * width;
                let psi = (-r2 / (2.0 * w2)).exp();
                let psi1_over_r = -psi / w2;
                let psi2 = (r2 / (w2 * w2) - 1.0 / w2) * psi;
                if r2 == 0.0 {
                    return *axis * (-2.0 * amplitude * psi2);
                }
                let rhat = rv / r2.sqrt();
                (rhat * ((psi2 - psi1_over_r) * axis.dot(rhat)) - *axis * (psi2 + psi1_over_r))
                    * *amplitude
            }
        }
    }

    /// Directional derivative (omega . grad) field at x.
    pub fn directional_derivative(&self, x: Vec3, omega: Vec3) -> Vec3 {
        self.jacobian(x).apply(omega)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldSpec::Zero)
    }
}

/// The matrix M_ij = eps_ijm a_m (so that M x = -a cross x ... check sign:
/// (x cross a)_i = eps_ilm x_l a_m, d/dx_j -> eps_ijm a_m).
fn eps_contract(a: Vec3) -> Mat3 {
    Mat3::from_rows(
        Vec3::new(0.0, a.z, -a.y),
        Vec3::new(-a.z, 0.0, a.x),
        Vec3::new(a.y, -a.x, 0.0),
    )
}

fn coulomb_g(rho: &DensitySpec, r: f64) -> f64 {
    // E(x) = g(r) (x - c), g = Q(r) / (4 pi r^3); smooth through r = 0
    let rx = rho.support_radius_x();
    if rx == 0.0 {
        return 0.0;
    }
    let amp = rho.f_sup() * rho.momentum_mass();
    let u = (r / rx).min(1.0);
    if u < 1e-6 {
        return amp / 3.0; // Q ~ (4 pi /3) rho(0) r^3
    }
    // Q(r) = 4 pi amp rx^3 int_0^u s^2 bump(s) ds
    let q_frac = crate::quadrature::adaptive_simpson(&|s: f64| s * s * bump(s), 0.0, u, 1e-12, 50);
    amp * rx.powi(3) * q_frac / r.powi(3)
}

fn coulomb_g_prime(rho: &DensitySpec, r: f64) -> f64 {
    // g' = rho(r)/r - 3 Q/(4 pi r^4) = (rho(r) - 3 g(r)) / r
    let rx = rho.support_radius_x();
    if rx == 0.0 || r < 1e-6 * rx {
        return 0.0;
    }
    let rho_r = rho.f_sup() * rho.momentum_mass() * bump(r / rx);
    (rho_r - 3.0 * coulomb_g(rho, r)) / r
}

/// Analytic initial data: density plus initial fields, with the constraint
/// div E^(0) = rho^(0), div B^(0) = 0 to the declared tolerance of each
/// field family.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub f0: DensitySpec,
    pub e0: FieldSpec,
    pub b0: FieldSpec,
}

impl InitialData {
    /// Vacuum wave packet: divergence-free Gaussian-envelope E and B. The
    /// Gaussian profile keeps spectral oracles alias-free.
    pub fn vacuum_pulse(amplitude: f64, center: Vec3, width: f64) -> Self {
        InitialData {
            f0: DensitySpec::Vacuum,
            e0: FieldSpec::DivFreeGaussian {
                amplitude,
                center,
                width,
                axis: Vec3::new(1.0, 0.0, 0.0),
            },
            b0: FieldSpec::DivFreeGaussian {
                amplitude,
                center,
                width,
                axis: Vec3::new(0.0, 0.0, 1.0),
            },
        }
    }

    pub fn thermal_cloud(amplitude: f64, center: Vec3, rx: f64, rp: f64) -> Self {
        let f0 = DensitySpec::SeparableBump { amplitude, center, rx, rp };
        let e0 = FieldSpec::CoulombOfDensity { rho: Box::new(f0.clone()) };
        InitialData { f0, e0, b0: FieldSpec::Zero }
    }

    pub fn cold_cloud(amplitude: f64, center: Vec3, rx: f64) -> Self {
        let f0 = DensitySpec::ColdCloud { amplitude, center, rx };
        let e0 = FieldSpec::CoulombOfDensity { rho: Box::new(f0.clone()) };
        InitialData { f0, e0, b0: FieldSpec::Zero }
    }

    /// d/dt E at t = 0 from the Maxwell system: curl B^(0) - j^(0).
    /// The built-in density families are isotropic in p, so j^(0) = 0.
    pub fn e_dot0(&self, x: Vec3) -> Vec3 {
        self.b0.curl(x)
    }

    /// d/dt B at t = 0: -curl E^(0).
    pub fn b_dot0(&self, x: Vec3) -> Vec3 {
        -self.e0.curl(x)
    }
}
