//! Test functions: Schwartz functions specified through compactly supported
//! Fourier data, plateau cutoffs, and energy-window bumps.

use num_complex::Complex64;

use crate::quad;

/// Smooth bump profile on (-1, 1), equal to 1 at 0.
fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Window shapes for Fourier data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShape {
    Bump,
    /// Raised cosine (Hann) taper.
    Hann,
}

/// A test function f given by its Fourier transform: fhat is a real window
/// centered at `center` with the given halfwidth, and
/// f(s) = (1/2pi) int fhat(t) exp(i s t) dt.
///
/// The compact support of fhat is enforced by construction. The transform
/// convention matches fhat(t) = int exp(-i E t) f(E) dE.
#[derive(Debug, Clone)]
pub struct FourierWindow {
    pub center: f64,
    pub halfwidth: f64,
    pub shape: WindowShape,
    /// Precomputed quadrature: (t_i, w_i * fhat(t_i)).
    table: Vec<(f64, f64)>,
}

impl FourierWindow {
    pub fn new(center: f64, halfwidth: f64, shape: WindowShape) -> Self {
        let mut w = Self {
            center,
            halfwidth,
            shape,
            table: Vec::new(),
        };
        let (xs, ws) = quad::gauss_legendre(128);
        let table = xs
            .iter()
            .zip(&ws)
            .map(|(x, wq)| {
                let t = center + halfwidth * x;
                (t, wq * halfwidth * w.f_hat(t))
            })
            .collect();
        w.table = table;
        w
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }

    /// The Fourier-side window.
    pub fn f_hat(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.halfwidth;
        match self.shape {
            WindowShape::Bump => bump(u),
            WindowShape::Hann => {
                if u.abs() < 1.0 {
                    0.5 * (1.0 + (std::f64::consts::PI * u).cos())
                } else {
                    0.0
                }
            }
        }
    }

    /// f(s) by inverse transform over the compact support.
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, wf) in &self.table {
            acc += Complex64::from_polar(*wf, s * t);
        }
        acc / (2.0 * std::f64::consts::PI)
    }
}

/// Smooth cutoff equal to 1 on [center - inner, center + inner] and supported
/// in [center - outer, center + outer].
#[derive(Debug, Clone)]
pub struct PlateauCutoff {
    pub center: f64,
    pub inner: f64,
    pub outer: f64,
}

impl PlateauCutoff {
    pub fn new(center: f64, inner: f64, outer: f64) -> Self {
        assert!(outer > inner && inner > 0.0);
        Self {
            center,
            inner,
            outer,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.outer, self.center + self.outer)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let d = (lambda - self.center).abs();
        if d <= self.inner {
            return 1.0;
        }
        if d >= self.outer {
            return 0.0;
        }
        let u = (self.outer - d) / (self.outer - self.inner);
        // smoothstep built from exp(-1/u): C-infinity partition of unity
        let b = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
        b(u) / (b(u) + b(1.0 - u))
    }
}

/// A compactly supported smooth bump in the energy variable, used for
/// eigenvalue-count traces.
#[derive(Debug, Clone)]
pub struct EnergyBump {
    pub center: f64,
    pub halfwidth: f64,
}

impl EnergyBump {
    pub fn new(center: f64, halfwidth: f64) -> Self {
        assert!(halfwidth > 0.0);
        Self { center, halfwidth }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }

    pub fn eval(&self, e: f64) -> f64 {
        bump((e - self.center) / self.halfwidth)
    }

    /// int f(E) E^k dE over the support.
    pub fn moment(&self, k: u32) -> f64 {
        let (lo, hi) = self.support();
        quad::integrate(|e| self.eval(e) * e.powi(k as i32), lo, hi, 256)
    }
}
