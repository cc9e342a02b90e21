//! Integration machinery: Gauss-Legendre rules, quadrature on the unit
//! sphere, momentum-ball integrals in the sigma-substituted radial variable,
//! and small 1D utilities (adaptive Simpson, golden-section maximization).
//!
//! The momentum radial substitution is
//!
//! ```text
//!   sigma = r / sqrt(1 + r^2),   r = sigma / sqrt(1 - sigma^2),
//!   dp    = sigma^2 (1 - sigma^2)^{-5/2} dsigma dS
//! ```
//!
//! which maps the ball |p| <= R onto sigma in [0, R_flat] with
//! R_flat = R / sqrt(1 + R^2). Integrands carrying a (1 + v.omega)^{-kappa}
//! factor are additionally handled in a frame rotated so that the reference
//! direction is the polar axis, substituting u = 1 + sigma s for the polar
//! cosine s; this removes the cancellation near u = 0 that defeats naive
//! product rules once R is large.

use crate::error::{Result, VmxError};
use crate::vec3::{Mat3, Vec3};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

/// Quadrature rule on the unit sphere |omega| = 1.
///
/// Product rule: Gauss-Legendre in the polar cosine times a uniform
/// (trapezoidal, hence spectrally accurate for periodic integrands) rule in
/// azimuth. Weights sum to 4 pi. `declared_order` is the polynomial degree
/// integrated exactly.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub declared_order: usize,
    n_polar: usize,
    n_azimuth: usize,
}

impl SphereRule {
    /// Product Gauss-Legendre(cos theta) x uniform(phi) rule with polar axis +z.
    pub fn gauss_product(n_polar: usize, n_azimuth: usize) -> Self {
        assert!(n_polar >= 1 && n_azimuth >= 1);
        let (cs, cw) = gauss_legendre(n_polar);
        let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (c, wc) in cs.iter().zip(&cw) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for j in 0..n_azimuth {
                let phi = dphi * j as f64;
                nodes.push(Vec3::new(s * phi.cos(), s * phi.sin(), *c));
                weights.push(wc * dphi);
            }
        }
        SphereRule {
            nodes,
            weights,
            declared_order: (2 * n_polar - 1).min(n_azimuth - 1),
            n_polar,
            n_azimuth,
        }
    }

    /// Default rule for verification-grade angular integrals.
    pub fn verification_default() -> Self {
        SphereRule::gauss_product(64, 128)
    }

    /// Coarse rule used inside the sigma_{-1} maximization loop.
    pub fn maximization_default() -> Self {
        SphereRule::gauss_product(8, 16)
    }

    /// Same rule rotated so its polar axis becomes `axis` (unit vector).
    pub fn with_axis(&self, axis: Vec3) -> Self {
        let rot = Mat3::rotation_between(Vec3::new(0.0, 0.0, 1.0), axis.normalized());
        SphereRule {
            nodes: self.nodes.iter().map(|n| rot.apply(*n)).collect(),
            weights: self.weights.clone(),
            declared_order: self.declared_order,
            n_polar: self.n_polar,
            n_azimuth: self.n_azimuth,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_polar(&self) -> usize {
        self.n_polar
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }
}

/// Integral of `g` over the unit sphere with the given rule.
///
/// A non-finite value of `g` at a node is reported together with the node.
pub fn integrate_sphere(g: impl Fn(Vec3) -> f64, rule: &SphereRule) -> Result<f64> {
    let mut sum = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let val = g(*node);
        if !val.is_finite() {
            return Err(VmxError::Quadrature(format!(
                "integrand non-finite at sphere node ({}, {}, {})",
                node.x, node.y, node.z
            )));
        }
        sum += w * val;
    }
    Ok(sum)
}

/// Radial rule in the substituted variable sigma over [0, R_flat].
///
/// Weights are plain quadrature weights for d sigma; the ball measure factor
/// sigma^2 (1-sigma^2)^{-5/2} is applied by the integral routines.
#[derive(Clone, Debug)]
pub struct RadialSigmaGrid {
    pub sigma_nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub radius: f64,
}

impl RadialSigmaGrid {
    pub fn new(radius: f64, n: usize) -> Self {
        assert!(radius >= 0.0);
        let r_flat = sigma_of_r(radius);
        let (nodes, weights) = gauss_legendre_on(n, 0.0, r_flat);
        RadialSigmaGrid { sigma_nodes: nodes, weights, radius }
    }

    pub fn r_flat(&self) -> f64 {
        sigma_of_r(self.radius)
    }
}

/// sigma = r / sqrt(1 + r^2)
pub fn sigma_of_r(r: f64) -> f64 {
    r / (1.0 + r * r).sqrt()
}

/// r = sigma / sqrt(1 - sigma^2)
pub fn r_of_sigma(sigma: f64) -> f64 {
    sigma / (1.0 - sigma * sigma).sqrt()
}

/// Integral of `g` over the momentum ball |p| <= R in (sigma, angle)
/// coordinates with measure sigma^2 (1-sigma^2)^{-5/2} dsigma dS.
pub fn momentum_ball_integral(
    g: impl Fn(Vec3) -> f64,
    radius: f64,
    grid: &RadialSigmaGrid,
    rule: &SphereRule,
) -> Result<f64> {
    if radius < 0.0 {
        return Err(VmxError::InvalidArgument("ball radius must be >= 0".into()));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (sigma, ws) in grid.sigma_nodes.iter().zip(&grid.weights) {
        let r = r_of_sigma(*sigma);
        let measure = sigma * sigma * (1.0 - sigma * sigma).powf(-2.5);
        let mut shell = 0.0;
        for (node, wo) in rule.nodes.iter().zip(&rule.weights) {
            let p = *node * r;
            let val = g(p);
            if !val.is_finite() {
                return Err(VmxError::Quadrature(format!(
                    "integrand non-finite at p=({}, {}, {}) (sigma={sigma})",
                    p.x, p.y, p.z
                )));
            }
            shell += wo * val;
        }
        total += ws * measure * shell;
    }
    Ok(total)
}

/// Momentum-ball integral for integrands whose sharp factor depends on
/// u = 1 + v.omega0 for a fixed direction omega0.
///
/// The frame is rotated so omega0 is the polar axis and the polar cosine is
/// substituted by u in [1 - sigma, 1 + sigma]; u-nodes are Gauss-Legendre in
/// log u, which resolves kernels like u^{-kappa} down to u = 1 - |v| without
/// cancellation. The integrand is still evaluated as a function of the actual
/// momentum vector.
pub fn ball_weighted_quadrature(
    g: impl Fn(Vec3) -> f64,
    omega0: Vec3,
    radius: f64,
    n_radial: usize,
    n_u: usize,
    n_phi: usize,
) -> Result<f64> {
    if radius <= 0.0 {
        return Ok(0.0);
    }
    let rot = Mat3::rotation_between(Vec3::new(0.0, 0.0, 1.0), omega0.normalized());
    // geometric radial panels: [0,1], [1,2], [2,4], ... up to R
    let mut panels = vec![0.0];
    let mut edge: f64 = 1.0;
    while edge < radius {
        panels.push(edge.min(radius));
        edge *= 2.0;
    }
    panels.push(radius);
    panels.dedup_by(|a, b| (*a - *b).abs() < 1e-300);

    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for win in panels.windows(2) {
        let (rs, rw) = gauss_legendre_on(n_radial, win[0], win[1]);
        for (r, wr) in rs.iter().zip(&rw) {
            let sigma = sigma_of_r(*r);
            if sigma == 0.0 {
                continue;
            }
            let s_perp = |s: f64| (1.0f64 - s * s).max(0.0).sqrt();
            // u = 1 + sigma s, ds = du / sigma; GL in w = ln u
            let (wn, ww) = gauss_legendre_on(n_u, (1.0 - sigma).ln(), (1.0 + sigma).ln());
            let mut angular = 0.0;
            for (w, wu) in wn.iter().zip(&ww) {
                let u = w.exp();
                let s = (u - 1.0) / sigma;
                let sp = s_perp(s);
                let mut phi_sum = 0.0;
                for j in 0..n_phi {
                    let phi = dphi * (j as f64 + 0.5);
                    let dir_local = Vec3::new(sp * phi.cos(), sp * phi.sin(), s);
                    let p = rot.apply(dir_local) * *r;
                    let val = g(p);
                    if !val.is_finite() {
                        return Err(VmxError::Quadrature(format!(
                            "integrand non-finite at p=({}, {}, {})",
                            p.x, p.y, p.z
                        )));
                    }
                    phi_sum += val;
                }
                // du = u dw; ds dphi measure = (du/sigma) dphi
                angular += wu * u / sigma * dphi * phi_sum;
            }
            total += wr * r * r * angular;
        }
    }
    Ok(total)
}

/// Semi-analytic evaluation of
/// `I(theta, kappa, R) = int_{|p|<=R} (1+p^2)^{-theta} (1+v.omega)^{-kappa} dp`
/// using the exact angular integral in u = 1 + sigma s and adaptive radial
/// quadrature. Used as the independent reference for the weighted ball rules.
pub fn weighted_ball_reduced(theta: f64, kappa: f64, radius: f64, rel_tol: f64) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    let integrand = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let sigma = sigma_of_r(r);
        r * r * (1.0 + r * r).powf(-theta) * angular_power_integral(sigma, kappa)
    };
    2.0 * std::f64::consts::PI * adaptive_simpson(&integrand, 0.0, radius, rel_tol, 60)
}

/// `int_{-1}^{1} (1 + sigma s)^{-kappa} ds` in closed form.
pub fn angular_power_integral(sigma: f64, kappa: f64) -> f64 {
    if sigma == 0.0 {
        return 2.0;
    }
    if (kappa - 1.0).abs() < 1e-12 {
        ((1.0 + sigma) / (1.0 - sigma)).ln() / sigma
    } else {
        ((1.0 + sigma).powf(1.0 - kappa) - (1.0 - sigma).powf(1.0 - kappa))
            / (sigma * (1.0 - kappa))
    }
}

/// Adaptive Simpson quadrature with relative tolerance and depth cap.
///
/// The error scale is estimated from a coarse scan of the integrand, not
/// from the three endpoint/midpoint values alone — otherwise an integrand
/// whose mass lies between those points (a narrow bump) would be resolved
/// against a near-zero tolerance and the recursion would never terminate.
pub fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: usize,
) -> f64 {
    let mut peak = 0.0f64;
    let scan = 24;
    for i in 0..=scan {
        let x = a + (b - a) * i as f64 / scan as f64;
        peak = peak.max(f(x).abs());
    }
    let scale = (peak * (b - a).abs()).max(1e-300);
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth.min(44))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * abs_tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, abs_tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, abs_tol / 2.0, depth - 1)
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::velocity_of_momentum;

    const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

    #[test]
    fn gl_exactness() {
        let (xs, ws) = gauss_legendre(8);
        // degree-15 monomial integrated exactly
        let val: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((val - 2.0 / 15.0).abs() < 1e-14);
        let odd: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(15)).sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn sphere_rule_invariants() {
        for rule in [SphereRule::gauss_product(8, 16), SphereRule::verification_default()] {
            for n in &rule.nodes {
                assert!((n.norm() - 1.0).abs() < 1e-14);
            }
            let total: f64 = rule.weights.iter().sum();
            assert!((total - FOUR_PI).abs() < 1e-12);
            assert!(rule.weights.iter().all(|w| *w > 0.0));
        }
    }

    /// Real spherical harmonics integrate to zero (l >= 1) and to unit L2
    /// norm, up to the declared order of the rule.
    #[test]
    fn sphere_rule_harmonic_exactness() {
        let rule = SphereRule::gauss_product(8, 16); // declared order 15
        assert_eq!(rule.declared_order, 15);
        for l in 1..=rule.declared_order {
            for m in 0..=l {
                let int = integrate_sphere(|w| real_sph_harm(l, m as i32, w), &rule).unwrap();
                assert!(int.abs() < 1e-10, "Y_{l}^{m} integral {int}");
            }
        }
        for l in 0..=rule.declared_order / 2 {
            let norm =
                integrate_sphere(|w| real_sph_harm(l, (l as i32).min(1), w).powi(2), &rule)
                    .unwrap();
            assert!((norm - 1.0).abs() < 1e-10, "|Y_{l}|^2 integral {norm}");
        }
    }

    #[test]
    fn sphere_constant_is_4pi() {
        let rule = SphereRule::maximization_default();
        let val = integrate_sphere(|_| 1.0, &rule).unwrap();
        assert!((val - FOUR_PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_integrand_constant_for_zero_velocity() {
        // (1 + v.omega)^{-theta} with v = 0 is identically 1
        let rule = SphereRule::gauss_product(16, 32);
        for theta in [0.25, 0.5, 1.3] {
            let val = integrate_sphere(|w| (1.0 + Vec3::default().dot(w)).powf(-theta), &rule)
                .unwrap();
            assert!((val - FOUR_PI).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_closed_form_theta_half() {
        // closed form 2 pi / ((1-theta) |v|) ((1+|v|)^{1-theta} - (1-|v|)^{1-theta})
        let speed: f64 = 0.6;
        let theta = 0.5;
        let expected = 2.0 * std::f64::consts::PI / ((1.0 - theta) * speed)
            * ((1.0f64 + speed).powf(1.0 - theta) - (1.0f64 - speed).powf(1.0 - theta));
        assert!((expected - 13.2457).abs() < 1e-3);
        let v = Vec3::new(0.0, 0.0, speed);
        let rule = SphereRule::gauss_product(64, 8);
        let val = integrate_sphere(|w| (1.0 + v.dot(w)).powf(-theta), &rule).unwrap();
        assert!(
            ((val - expected) / expected).abs() < 1e-8,
            "quadrature {val} vs closed form {expected}"
        );
        // same answer when v points somewhere generic and the rule is rotated
        let dir = Vec3::new(0.48, -0.6, 0.64).normalized();
        let rot = rule.with_axis(dir);
        let v2 = dir * speed;
        let val2 = integrate_sphere(|w| (1.0 + v2.dot(w)).powf(-theta), &rot).unwrap();
        assert!(((val2 - expected) / expected).abs() < 1e-8);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let rule = SphereRule::gauss_product(4, 8);
        let err = integrate_sphere(|w| 1.0 / (w.z - w.z), &rule).unwrap_err();
        assert!(err.to_string().contains("sphere node"));
    }

    #[test]
    fn ball_volume() {
        let grid = RadialSigmaGrid::new(1.0, 32);
        let rule = SphereRule::gauss_product(8, 16);
        let val = momentum_ball_integral(|_| 1.0, 1.0, &grid, &rule).unwrap();
        let expected = FOUR_PI / 3.0;
        assert!(((val - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn ball_gaussian_matches_radial_reduction() {
        // int exp(-p^2) over |p|<=R equals 4 pi int_0^R r^2 exp(-r^2) dr
        let radius = 3.0;
        let grid = RadialSigmaGrid::new(radius, 48);
        let rule = SphereRule::gauss_product(8, 16);
        let val = momentum_ball_integral(|p| (-p.norm_sq()).exp(), radius, &grid, &rule).unwrap();
        let expected =
            FOUR_PI * adaptive_simpson(&|r: f64| r * r * (-r * r).exp(), 0.0, radius, 1e-13, 50);
        assert!(((val - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn weighted_ball_generic_vs_reduced_small_r() {
        // kappa = 3 integrand at R = 10: product rule in the rotated frame
        // against the adaptive 1D reduction
        let radius = 10.0;
        let omega0 = Vec3::new(0.30, -0.55, 0.78).normalized();
        let g = |p: Vec3| {
            let v = velocity_of_momentum(p);
            (1.0 + p.norm_sq()).powi(-3) * (1.0 + v.dot(omega0)).powi(-3)
        };
        let val = ball_weighted_quadrature(g, omega0, radius, 24, 32, 4).unwrap();
        let reference = weighted_ball_reduced(3.0, 3.0, radius, 1e-12);
        assert!(
            ((val - reference) / reference).abs() < 1e-8,
            "rotated-frame {val} vs reduced {reference}"
        );
    }

    #[test]
    fn near_singular_cap_region_scales_linearly_in_epsilon() {
        // J(eps) = int_{|p|<=R, 1+v.omega0 <= eps} sqrt(1+p^2) dp grows
        // linearly in eps once eps clears the kinematic floor 1 - R_flat;
        // successive slope ratios approach 2 per doubling
        let radius = 10.0;
        let j_eps = |eps: f64| {
            // reduced form: the angular indicator length is
            // max(0, (eps - (1 - sigma)) / sigma), exactly
            let integrand = |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                let sigma = sigma_of_r(r);
                let len = ((eps - (1.0 - sigma)) / sigma).max(0.0).min(2.0);
                2.0 * std::f64::consts::PI * r * r * (1.0 + r * r).sqrt() * len
            };
            adaptive_simpson(&integrand, 0.0, radius, 1e-11, 50)
        };
        let eps0 = 0.16;
        let j: Vec<f64> = [eps0, eps0 / 2.0, eps0 / 4.0, eps0 / 8.0]
            .iter()
            .map(|e| j_eps(*e))
            .collect();
        let s1 = (j[0] - j[1]) / (eps0 / 2.0);
        let s2 = (j[1] - j[2]) / (eps0 / 4.0);
        let s3 = (j[2] - j[3]) / (eps0 / 8.0);
        assert!(
            (s1 / s2 - 1.0).abs() < 0.05 && (s2 / s3 - 1.0).abs() < 0.05,
            "slopes not stabilizing: {s1} {s2} {s3}"
        );
        // and the direct 3D cap-region quadrature agrees with the reduction
        let omega0 = Vec3::new(0.36, -0.48, 0.8).normalized();
        let eps = 0.08;
        let direct = ball_weighted_quadrature(
            |p| {
                let v = crate::kinetic::velocity_of_momentum(p);
                if 1.0 + v.dot(omega0) <= eps {
                    (1.0 + p.norm_sq()).sqrt()
                } else {
                    0.0
                }
            },
            omega0,
            radius,
            32,
            160,
            4,
        )
        .unwrap();
        let reduced = j_eps(eps);
        assert!(
            ((direct - reduced) / reduced).abs() < 5e-3,
            "direct {direct} vs reduced {reduced}"
        );
    }

    #[test]
    fn weighted_ball_reduced_is_rotation_invariant_numerically() {
        let radius = 100.0;
        for seed_dir in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-0.3, 0.4, 0.87)] {
            let omega0 = seed_dir.normalized();
            let g = |p: Vec3| {
                let v = velocity_of_momentum(p);
                (1.0 + p.norm_sq()).powf(-1.0) * (1.0 + v.dot(omega0)).powf(-1.5)
            };
            let val = ball_weighted_quadrature(g, omega0, radius, 24, 32, 4).unwrap();
            let reference = weighted_ball_reduced(1.0, 1.5, radius, 1e-12);
            assert!(((val - reference) / reference).abs() < 1e-8);
        }
    }

    #[test]
    fn adaptive_simpson_basics() {
        let val = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 50);
        assert!((val - 2.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_simpson_interior_bump_terminates() {
        // the integrand's mass lies away from the endpoints and the global
        // midpoint; the tolerance must be scaled against the scanned peak
        let sp = 1.4f64;
        let f = |r: f64| {
            4.0 * std::f64::consts::PI * r * r * (1.0 + r * r).sqrt()
                * (-r * r / (2.0 * sp * sp)).exp()
        };
        let start = std::time::Instant::now();
        let val = adaptive_simpson(&f, 0.0, 12.0 * sp, 1e-12, 60);
        assert!(start.elapsed().as_secs_f64() < 1.0, "quadrature too slow");
        // cross-check against a fixed dense Simpson grid
        let n = 20_000;
        let hstep = 12.0 * sp / n as f64;
        let mut reference = f(0.0) + f(12.0 * sp);
        for i in 1..n {
            reference += f(i as f64 * hstep) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        reference *= hstep / 3.0;
        assert!(((val - reference) / reference).abs() < 1e-10, "{val} vs {reference}");
    }

    #[test]
    fn golden_finds_max() {
        let (x, fx) = golden_max(|x: f64| -(x - 0.3).powi(2), -1.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx.abs() < 1e-17);
    }

    // --- real spherical harmonics for the exactness test ---

    fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
        // P_m^m through the standard recurrence
        let mut pmm = 1.0;
        if m > 0 {
            let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
            let mut fact = 1.0;
            for _ in 0..m {
                pmm *= -fact * somx2;
                fact += 2.0;
            }
        }
        if l == m {
            return pmm;
        }
        let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
        if l == m + 1 {
            return pmmp1;
        }
        let mut pll = 0.0;
        for ll in (m + 2)..=l {
            let llf = ll as f64;
            let mf = m as f64;
            pll = ((2.0 * llf - 1.0) * x * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
            pmm = pmmp1;
            pmmp1 = pll;
        }
        pll
    }

    fn real_sph_harm(l: usize, m: i32, w: Vec3) -> f64 {
        let phi = w.y.atan2(w.x);
        let ct = w.z;
        let ma = m.unsigned_abs() as usize;
        let mut norm = (2.0 * l as f64 + 1.0) / FOUR_PI;
        for k in (l - ma + 1)..=(l + ma) {
            norm /= k as f64;
        }
        let base = norm.sqrt() * assoc_legendre(l, ma, ct);
        if m == 0 {
            base
        } else if m > 0 {
            std::f64::consts::SQRT_2 * base * (ma as f64 * phi).cos()
        } else {
            std::f64::consts::SQRT_2 * base * (ma as f64 * phi).sin()
        }
    }
}
