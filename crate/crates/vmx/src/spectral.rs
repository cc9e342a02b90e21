//! Periodic spectral utilities backing the oracles and initializers: 3D FFT,
//! discrete Poisson solves consistent with the staggered mesh, free wave
//! propagation with exact trigonometric symbols, and homogeneous Sobolev
//! seminorms.
//!
//! All routines act on scalar node fields of size n^3 stored with index
//! (i*n + j)*n + k over a cube of side length L (spacing h = L/n).

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub type C64 = Complex<f64>;

/// Cached 1D plans applied along the three axes of a cube.
pub struct Fft3 {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn apply(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        // axis 2 (contiguous)
        for line in data.chunks_exact_mut(n) {
            plan.process(line);
        }
        // axes 0 and 1 via strided gather/scatter
        let mut scratch = vec![C64::default(); n];
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    scratch[i] = data[(i * n + j) * n + k];
                }
                plan.process(&mut scratch);
                for i in 0..n {
                    data[(i * n + j) * n + k] = scratch[i];
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    scratch[j] = data[(i * n + j) * n + k];
                }
                plan.process(&mut scratch);
                for j in 0..n {
                    data[(i * n + j) * n + k] = scratch[j];
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.apply(data, &self.fwd);
    }

    /// Inverse transform including the 1/n^3 normalization.
    pub fn inverse(&self, data: &mut [C64]) {
        self.apply(data, &self.inv);
        let scale = 1.0 / (self.n as f64).powi(3);
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Signed integer mode index for slot m of an n-point transform.
pub fn mode_index(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Angular wavenumber of mode slot m: 2 pi mode / L.
pub fn wavenumber(m: usize, n: usize, length: f64) -> f64 {
    2.0 * std::f64::consts::PI * mode_index(m, n) as f64 / length
}

/// |k| over the 3D mode (i, j, k).
pub fn k_norm(i: usize, j: usize, k: usize, n: usize, length: f64) -> f64 {
    let kx = wavenumber(i, n, length);
    let ky = wavenumber(j, n, length);
    let kz = wavenumber(k, n, length);
    (kx * kx + ky * ky + kz * kz).sqrt()
}

pub fn to_complex(data: &[f64]) -> Vec<C64> {
    data.iter().map(|&v| C64::new(v, 0.0)).collect()
}

pub fn to_real(data: &[C64]) -> Vec<f64> {
    data.iter().map(|v| v.re).collect()
}

/// Node potential solving the mean-free discrete Poisson problem
/// lap_h phi = -(rho - mean rho) where lap_h is the staggered
/// divergence-of-gradient (symbol -(4/h^2) sum_a sin^2(k_a h/2)).
/// E = -grad_h phi then satisfies div_h E = rho - mean rho to roundoff.
pub fn poisson_staggered_potential(rho: &[f64], n: usize, h: f64) -> Vec<f64> {
    let fft = Fft3::new(n);
    let mut data = to_complex(rho);
    fft.forward(&mut data);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = (i * n + j) * n + k;
                if i == 0 && j == 0 && k == 0 {
                    data[idx] = C64::default();
                    continue;
                }
                let s = |m: usize| {
                    let arg = std::f64::consts::PI * mode_index(m, n) as f64 / n as f64;
                    (2.0 * arg.sin() / h).powi(2)
                };
                let k2 = s(i) + s(j) + s(k);
                data[idx] /= k2;
            }
        }
    }
    fft.inverse(&mut data);
    to_real(&data)
}

/// Free-space (exact-symbol) Poisson potential on the periodic box:
/// phi_hat = rho_hat / |k|^2, zero mean. The node field E = -grad phi has a
/// divergence that matches rho only to O(h^2) when measured with the
/// staggered finite-difference divergence, which is the order-of-accuracy
/// oracle for the constraint residual.
pub fn poisson_exact_symbol_potential(rho: &[f64], n: usize, length: f64) -> Vec<f64> {
    let fft = Fft3::new(n);
    let mut data = to_complex(rho);
    fft.forward(&mut data);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = (i * n + j) * n + k;
                let kn = k_norm(i, j, k, n, length);
                if kn == 0.0 {
                    data[idx] = C64::default();
                } else {
                    data[idx] /= kn * kn;
                }
            }
        }
    }
    fft.inverse(&mut data);
    to_real(&data)
}

/// Propagate a scalar component of the homogeneous wave equation:
/// u_hat(t) = cos(|k| t) u0_hat + sin(|k| t)/|k| v0_hat.
pub fn wave_propagate(u0: &[f64], v0: &[f64], n: usize, length: f64, t: f64) -> Vec<f64> {
    let fft = Fft3::new(n);
    let mut a = to_complex(u0);
    let mut b = to_complex(v0);
    fft.forward(&mut a);
    fft.forward(&mut b);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = (i * n + j) * n + k;
                let kn = k_norm(i, j, k, n, length);
                let (c, s_over_k) = if kn == 0.0 {
                    (1.0, t)
                } else {
                    ((kn * t).cos(), (kn * t).sin() / kn)
                };
                a[idx] = a[idx] * c + b[idx] * s_over_k;
            }
        }
    }
    fft.inverse(&mut a);
    to_real(&a)
}

/// Homogeneous Sobolev seminorm ||f||_{Hdot^s} of a node field (continuum
/// Fourier convention; the k = 0 mode is excluded).
pub fn sobolev_seminorm(f: &[f64], n: usize, length: f64, s: f64) -> f64 {
    let fft = Fft3::new(n);
    let mut data = to_complex(f);
    fft.forward(&mut data);
    let h = length / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let kn = k_norm(i, j, k, n, length);
                let idx = (i * n + j) * n + k;
                acc += kn.powf(2.0 * s) * data[idx].norm_sqr();
            }
        }
    }
    (acc * h.powi(6) / length.powi(3)).sqrt()
}

/// Grid L^q norm (sum |f|^q h^3)^(1/q) of a node field.
pub fn grid_lq_norm(f: &[f64], h: f64, q: f64) -> f64 {
    let acc: f64 = f.iter().map(|v| v.abs().powf(q)).sum();
    (acc * h.powi(3)).powf(1.0 / q)
}

/// Sine integral Si(x) = int_0^x sin(u)/u du by adaptive quadrature.
pub fn sine_integral(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let f = |u: f64| if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
    crate::quadrature::adaptive_simpson(&f, 0.0, x, 1e-12, 50)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip() {
        let n = 8;
        let mut data: Vec<C64> = (0..n * n * n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let orig = data.clone();
        let fft = Fft3::new(n);
        fft.forward(&mut data);
        fft.inverse(&mut data);
        let err: f64 = data
            .iter()
            .zip(&orig)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn fft_of_plane_wave_is_delta() {
        let n = 16;
        let length = 2.0;
        let h = length / n as f64;
        let mut data = vec![C64::default(); n * n * n];
        let kx = wavenumber(3, n, length);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = i as f64 * h;
                    data[(i * n + j) * n + k] = C64::new((kx * x).cos(), 0.0);
                }
            }
        }
        let fft = Fft3::new(n);
        fft.forward(&mut data);
        // energy concentrated in modes (3,0,0) and (n-3,0,0)
        let idx_p = (3 * n) * n;
        let idx_m = ((n - 3) * n) * n;
        let total: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let peak = data[idx_p].norm_sqr() + data[idx_m].norm_sqr();
        assert!(peak / total > 1.0 - 1e-12);
    }

    #[test]
    fn wave_propagation_standing_mode() {
        // u(t) = cos(|k| t) cos(k.x) solves the wave equation with v0 = 0
        let n = 16;
        let length = 2.0;
        let h = length / n as f64;
        let kx = wavenumber(2, n, length);
        let u0: Vec<f64> = (0..n * n * n)
            .map(|idx| {
                let i = idx / (n * n);
                (kx * i as f64 * h).cos()
            })
            .collect();
        let v0 = vec![0.0; n * n * n];
        let t = 0.37;
        let ut = wave_propagate(&u0, &v0, n, length, t);
        let expect: Vec<f64> = u0.iter().map(|v| v * (kx * t).cos()).collect();
        let err = ut
            .iter()
            .zip(&expect)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "standing mode error {err}");
    }

    #[test]
    fn sobolev_seminorm_single_mode() {
        // f = cos(k x): ||f||_{Hdot^s}^2 = |k|^{2s} * L^3 / 2
        let n = 16;
        let length = 4.0;
        let h = length / n as f64;
        let kx = wavenumber(1, n, length);
        let f: Vec<f64> = (0..n * n * n)
            .map(|idx| {
                let i = idx / (n * n);
                (kx * i as f64 * h).cos()
            })
            .collect();
        for s in [0.0, 0.5, 1.0] {
            let got = sobolev_seminorm(&f, n, length, s);
            let expect = (kx.powf(2.0 * s) * length.powi(3) / 2.0).sqrt();
            assert!(
                ((got - expect) / expect).abs() < 1e-12,
                "s={s}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn sine_integral_values() {
        // Si(pi) = 1.851937051982...
        assert!((sine_integral(std::f64::consts::PI) - 1.8519370519824662).abs() < 1e-10);
        assert!((sine_integral(1.0) - 0.9460830703671830).abs() < 1e-10);
        assert_eq!(sine_integral(0.0), 0.0);
    }
}
