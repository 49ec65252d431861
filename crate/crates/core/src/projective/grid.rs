use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of P^1(C) stored on the unit sphere with its first nonzero
/// coordinate real and positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    z0: Complex64,
    z1: Complex64,
}

impl ProjectivePoint {
    pub fn new(z0: Complex64, z1: Complex64) -> Result<Self> {
        let r = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::ZeroPoint);
        }
        let lead = if z0 != Complex64::new(0.0, 0.0) { z0 } else { z1 };
        let phase = lead.conj() / lead.norm();
        let scale = phase / r;
        let mut p = Self {
            z0: z0 * scale,
            z1: z1 * scale,
        };
        // the leading coordinate is real by construction; drop rounding noise
        if z0 != Complex64::new(0.0, 0.0) {
            p.z0 = Complex64::new(p.z0.norm(), 0.0);
        } else {
            p.z1 = Complex64::new(p.z1.norm(), 0.0);
        }
        Ok(p)
    }

    pub fn real(x0: f64, x1: f64) -> Result<Self> {
        Self::new(Complex64::new(x0, 0.0), Complex64::new(x1, 0.0))
    }

    /// `[1 : t]`.
    pub fn from_chart(t: Complex64) -> Self {
        Self::new(Complex64::new(1.0, 0.0), t).expect("chart point is never zero")
    }

    /// `[0 : 1]`.
    pub fn infinity() -> Self {
        Self {
            z0: Complex64::new(0.0, 0.0),
            z1: Complex64::new(1.0, 0.0),
        }
    }

    /// Point with `u = |z1|^2` and longitude `theta = arg(z1 * conj(z0))`.
    pub fn from_u_theta(u: f64, theta: f64) -> Self {
        let u = u.clamp(0.0, 1.0);
        if u >= 1.0 {
            return Self::infinity();
        }
        Self {
            z0: Complex64::new((1.0 - u).sqrt(), 0.0),
            z1: Complex64::from_polar(u.sqrt(), theta),
        }
    }

    /// Polar angle on the round sphere: `cos(vartheta) = 1 - 2u`.
    pub fn from_polar_angles(vartheta: f64, theta: f64) -> Self {
        let half = 0.5 * vartheta.clamp(0.0, std::f64::consts::PI);
        let (s, c) = half.sin_cos();
        if c <= 0.0 {
            return Self::infinity();
        }
        Self {
            z0: Complex64::new(c, 0.0),
            z1: Complex64::from_polar(s, theta),
        }
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn z1(&self) -> Complex64 {
        self.z1
    }

    pub fn u(&self) -> f64 {
        self.z1.norm_sqr()
    }

    pub fn theta(&self) -> f64 {
        let w = self.z1 * self.z0.conj();
        if w == Complex64::new(0.0, 0.0) {
            0.0
        } else {
            w.arg()
        }
    }

    pub fn vartheta(&self) -> f64 {
        (1.0 - 2.0 * self.u()).clamp(-1.0, 1.0).acos()
    }

    pub fn conj(&self) -> Self {
        Self {
            z0: self.z0.conj(),
            z1: self.z1.conj(),
        }
    }

    /// Great-circle distance on the unit sphere.
    pub fn sphere_distance(&self, other: &Self) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }

    fn unit_vector(&self) -> [f64; 3] {
        let w = self.z1 * self.z0.conj();
        let z = 1.0 - 2.0 * self.u();
        [2.0 * w.re, 2.0 * w.im, z]
    }
}

/// Equal-weight Fibonacci point set on the sphere, closed under conjugation.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    points: Vec<ProjectivePoint>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub const DEFAULT_SIZE: usize = 100_000;

    /// `size / 2` Fibonacci points in `(u, theta)` plus their conjugates,
    /// interleaved so that point `2j + 1` is the mirror of point `2j`.
    pub fn fibonacci(size: usize) -> Result<Self> {
        let m = size / 2;
        if m == 0 {
            return Err(Error::InvalidGrid(format!("size {size} too small")));
        }
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let mut points = Vec::with_capacity(2 * m);
        for j in 0..m {
            let u = (j as f64 + 0.5) / m as f64;
            let theta = (j as f64 * golden).rem_euclid(std::f64::consts::TAU);
            let p = ProjectivePoint::from_u_theta(u, theta);
            points.push(p);
            points.push(p.conj());
        }
        let w = 1.0 / (2 * m) as f64;
        Ok(Self {
            weights: vec![w; points.len()],
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Typical spacing between neighbouring points on the unit sphere.
    pub fn spacing(&self) -> f64 {
        (4.0 * std::f64::consts::PI / self.len() as f64).sqrt()
    }

    /// Weighted sum of `f(index, point)` in grid order, Neumaier-compensated.
    pub fn integrate(&self, mut f: impl FnMut(usize, &ProjectivePoint) -> f64) -> f64 {
        let (mut acc, mut comp) = (0.0f64, 0.0f64);
        for (i, (p, w)) in self.points.iter().zip(&self.weights).enumerate() {
            let x = w * f(i, p);
            let t = acc + x;
            comp += if acc.abs() >= x.abs() {
                (acc - t) + x
            } else {
                (x - t) + acc
            };
            acc = t;
        }
        acc + comp
    }
}
