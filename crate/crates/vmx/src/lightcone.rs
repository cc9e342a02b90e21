//! Retarded light-cone operators.
//!
//! For scalar histories h(t, x),
//!
//! ```text
//!   (box^{-1} h)(t, x) = int_{|y|<=t} h(t-|y|, x+y) / (4 pi |y|)   dy
//!   (W h)(t, x)        = int_{|y|<=t} h(t-|y|, x+y) / (4 pi |y|^2) dy
//! ```
//!
//! Both reduce to an integral over retarded shells |y| = s of the spherical
//! mean of h, weighted by s (box^{-1}) or 1 (W). The s-integral uses
//! composite Simpson on nodes spaced by the sampler's `time_step`, so both
//! operators are exact for integrands quadratic in s (h = 1 and h = t land
//! in that class).

use crate::error::{Result, VmxError};
use crate::quadrature::SphereRule;
use crate::vec3::Vec3;

/// A scalar field over spacetime, queryable within the sampler's horizon.
pub trait SpacetimeField: Sync {
    fn eval(&self, t: f64, x: Vec3) -> Result<f64>;
}

/// Closure-backed analytic field.
pub struct AnalyticSpacetime<F>(pub F);

impl<F: Fn(f64, Vec3) -> f64 + Sync> SpacetimeField for AnalyticSpacetime<F> {
    fn eval(&self, t: f64, x: Vec3) -> Result<f64> {
        Ok((self.0)(t, x))
    }
}

/// Discretization of the backward light cone: shell spacing, per-shell
/// angular rules, and the maximum look-back time.
#[derive(Clone, Debug)]
pub struct LightConeSampler {
    /// Spacing of retarded shells (the s-grid).
    pub time_step: f64,
    /// Maximum look-back time covered by the history.
    pub horizon: f64,
    /// Polar node count of the shell rule at unit radius (scaled with s).
    pub base_polar: usize,
    /// Extra polar nodes per unit of shell radius.
    pub polar_per_radius: f64,
    /// Cap on the polar node count.
    pub max_polar: usize,
}

impl LightConeSampler {
    pub fn new(time_step: f64, horizon: f64) -> Self {
        LightConeSampler {
            time_step,
            horizon,
            base_polar: 12,
            polar_per_radius: 8.0,
            max_polar: 48,
        }
    }

    pub fn with_angular_resolution(mut self, base_polar: usize, per_radius: f64, max_polar: usize) -> Self {
        self.base_polar = base_polar;
        self.polar_per_radius = per_radius;
        self.max_polar = max_polar;
        self
    }

    /// Angular rule for the shell of radius s: larger shells get more nodes.
    pub fn shell_rule(&self, s: f64) -> SphereRule {
        let n_polar = (self.base_polar + (self.polar_per_radius * s).ceil() as usize)
            .clamp(4, self.max_polar);
        SphereRule::gauss_product(n_polar, 2 * n_polar)
    }

    /// Composite-Simpson nodes and weights for int_0^t ds.
    pub fn simpson_grid(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        simpson_grid(t, self.time_step)
    }

    fn check_horizon(&self, t: f64) -> Result<()> {
        if t > self.horizon + 1e-12 {
            return Err(VmxError::HorizonExceeded { needed: t, available: self.horizon });
        }
        Ok(())
    }
}

/// Simpson nodes/weights on [0, t] with spacing at most `step`
/// (an even number of intervals, at least two).
pub fn simpson_grid(t: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(t > 0.0 && step > 0.0);
    let mut n = (t / step).ceil() as usize;
    n = n.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let d = t / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|k| k as f64 * d).collect();
    let mut weights = vec![0.0; n + 1];
    for k in 0..=n {
        let c = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weights[k] = c * d / 3.0;
    }
    (nodes, weights)
}

fn cone_integral(
    h: &dyn SpacetimeField,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
    s_power: u32,
) -> Result<f64> {
    if t < 0.0 {
        return Err(VmxError::InvalidArgument("cone integral needs t >= 0".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    sampler.check_horizon(t)?;
    let (nodes, weights) = sampler.simpson_grid(t);
    let mut total = 0.0;
    for (s, ws) in nodes.iter().zip(&weights) {
        let mean = if *s == 0.0 {
            if s_power > 0 {
                0.0
            } else {
                h.eval(t, x)?
            }
        } else {
            let rule = sampler.shell_rule(*s);
            let tau = t - s;
            let mut acc = 0.0;
            for (node, wo) in rule.nodes.iter().zip(&rule.weights) {
                acc += wo * h.eval(tau, x + *node * *s)?;
            }
            acc / (4.0 * std::f64::consts::PI)
        };
        total += ws * s.powi(s_power as i32) * mean;
    }
    Ok(total)
}

/// (box^{-1} h)(t, x): retarded solution of the wave equation with source h
/// and zero data.
pub fn box_inverse(
    h: &dyn SpacetimeField,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
) -> Result<f64> {
    cone_integral(h, t, x, sampler, 1)
}

/// (W h)(t, x): the light-cone operator with kernel 1/(4 pi |y|^2), i.e. the
/// integral over s of the shell mean of h.
pub fn w_operator(
    h: &dyn SpacetimeField,
    t: f64,
    x: Vec3,
    sampler: &LightConeSampler,
) -> Result<f64> {
    cone_integral(h, t, x, sampler, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sampler() -> LightConeSampler {
        LightConeSampler::new(0.05, 10.0)
    }

    #[test]
    fn constant_source_closed_forms() {
        let h = AnalyticSpacetime(|_t: f64, _x: Vec3| 1.0);
        let x = Vec3::new(0.3, -0.2, 0.9);
        for t in [0.4, 1.0, 2.7] {
            let b = box_inverse(&h, t, x, &sampler()).unwrap();
            assert!((b - t * t / 2.0).abs() < 1e-12, "box of 1 at t={t}: {b}");
            let w = w_operator(&h, t, x, &sampler()).unwrap();
            assert!((w - t).abs() < 1e-12, "W of 1 at t={t}: {w}");
        }
    }

    #[test]
    fn zero_source() {
        let h = AnalyticSpacetime(|_t: f64, _x: Vec3| 0.0);
        assert_eq!(box_inverse(&h, 1.5, Vec3::default(), &sampler()).unwrap(), 0.0);
        assert_eq!(w_operator(&h, 1.5, Vec3::default(), &sampler()).unwrap(), 0.0);
    }

    #[test]
    fn linear_in_time_source() {
        // h(t, x) = t gives box^{-1} h = int_0^t s (t - s) ds = t^3/6
        let h = AnalyticSpacetime(|t: f64, _x: Vec3| t);
        for t in [0.5, 1.0, 2.0] {
            let b = box_inverse(&h, t, Vec3::default(), &sampler()).unwrap();
            let expect = t * t * t / 6.0;
            assert!(
                ((b - expect) / expect).abs() < 1e-8,
                "box of t at t={t}: {b} vs {expect}"
            );
        }
    }

    #[test]
    fn linearity_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let c1 = rng.gen_range(0.2..1.5);
            let c2 = rng.gen_range(0.2..1.5);
            let h1 = AnalyticSpacetime(move |t: f64, x: Vec3| (c1 * t + x.x * 0.3).cos());
            let h2 = AnalyticSpacetime(move |t: f64, x: Vec3| (c2 * t - x.y * 0.2).sin());
            let hc = AnalyticSpacetime(move |t: f64, x: Vec3| {
                a * (c1 * t + x.x * 0.3).cos() + b * (c2 * t - x.y * 0.2).sin()
            });
            let x = Vec3::new(0.1, 0.4, -0.3);
            let t = 1.3;
            let lhs = box_inverse(&hc, t, x, &sampler()).unwrap();
            let rhs = a * box_inverse(&h1, t, x, &sampler()).unwrap()
                + b * box_inverse(&h2, t, x, &sampler()).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
        // monotone: h >= 0 pointwise implies result >= 0
        let h = AnalyticSpacetime(|t: f64, x: Vec3| (t * x.x).cos().powi(2));
        assert!(box_inverse(&h, 2.0, Vec3::new(0.5, 0.0, 0.0), &sampler()).unwrap() >= 0.0);
    }

    #[test]
    fn kernel_domination_w_vs_box() {
        // for h >= 0 and all contributing radii <= 1, 1/|y|^2 >= 1/|y|
        let h = AnalyticSpacetime(|_t: f64, x: Vec3| (1.0 - x.norm_sq()).max(0.0));
        for t in [0.3, 0.7, 1.0] {
            let w = w_operator(&h, t, Vec3::default(), &sampler()).unwrap();
            let b = box_inverse(&h, t, Vec3::default(), &sampler()).unwrap();
            assert!(w >= b - 1e-12, "t={t}: W {w} < box {b}");
        }
    }

    #[test]
    fn horizon_is_enforced() {
        let h = AnalyticSpacetime(|_t: f64, _x: Vec3| 1.0);
        let s = LightConeSampler::new(0.1, 1.0);
        let err = box_inverse(&h, 1.5, Vec3::default(), &s).unwrap_err();
        assert!(matches!(err, VmxError::HorizonExceeded { .. }));
    }

    #[test]
    fn gaussian_cross_check_against_radial_reduction() {
        // W of a static gaussian: shell mean of exp(-|y|^2/(2 s2)) about x has
        // the exact 1D form (integrate over the sphere analytically)
        let s2 = 0.18;
        let h = AnalyticSpacetime(move |_t: f64, x: Vec3| (-x.norm_sq() / (2.0 * s2)).exp());
        let x0 = Vec3::new(0.4, 0.1, -0.2);
        let r = x0.norm();
        let t = 1.1;
        let exact_mean = |s: f64| {
            if s == 0.0 {
                return (-r * r / (2.0 * s2)).exp();
            }
            // (1/(4pi)) int exp(-|x+s w|^2/(2s2)) dS(w)
            //   = exp(-(r^2+s^2)/(2 s2)) sinh(r s / s2) s2/(r s)
            (-(r * r + s * s) / (2.0 * s2)).exp() * (r * s / s2).sinh() * s2 / (r * s)
        };
        let expect =
            crate::quadrature::adaptive_simpson(&|s: f64| exact_mean(s), 0.0, t, 1e-12, 50);
        let got = w_operator(&h, t, x0, &sampler()).unwrap();
        assert!(
            ((got - expect) / expect).abs() < 1e-6,
            "W gaussian {got} vs radial {expect}"
        );
    }
}
