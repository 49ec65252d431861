use serde::{Deserialize, Serialize};

use super::grid::{ProjectivePoint, QuadratureGrid};
use crate::error::{Error, Result};

/// Margin below which the curvature density counts as non-positive.
pub const CURVATURE_MARGIN: f64 = 1e-6;

/// One basis function `coef * u^a * (1-u)^b * cos(c * theta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTerm {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub coef: f64,
}

impl PerturbationTerm {
    pub fn new(a: u32, b: u32, c: u32, coef: f64) -> Result<Self> {
        let t = Self { a, b, c, coef };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if !self.c.is_multiple_of(2) {
            return Err(Error::InvalidPerturbation(format!(
                "angular frequency {} must be even",
                self.c
            )));
        }
        if self.a + self.b > 4 {
            return Err(Error::InvalidPerturbation(format!(
                "a + b = {} exceeds 4",
                self.a + self.b
            )));
        }
        // smooth at the poles only if the angular factor is damped there
        if 2 * self.a < self.c || 2 * self.b < self.c {
            return Err(Error::InvalidPerturbation(format!(
                "term u^{} (1-u)^{} cos({} theta) is not smooth at the poles",
                self.a, self.b, self.c
            )));
        }
        if !self.coef.is_finite() {
            return Err(Error::InvalidPerturbation("non-finite coefficient".into()));
        }
        Ok(())
    }

    fn radial(&self, u: f64) -> f64 {
        powi0(u, self.a) * powi0(1.0 - u, self.b)
    }

    pub fn value(&self, u: f64, theta: f64) -> f64 {
        let ang = if self.c == 0 {
            1.0
        } else {
            (self.c as f64 * theta).cos()
        };
        self.coef * self.radial(u) * ang
    }

    /// Round-sphere Laplacian of the term.
    pub fn laplacian(&self, u: f64, theta: f64) -> f64 {
        let (a, b, c) = (self.a as f64, self.b as f64, self.c as f64);
        let v = 1.0 - u;
        let mut radial = -(a * (b + 1.0) + b * (a + 1.0)) * powi0(u, self.a) * powi0(v, self.b);
        if self.a > 0 {
            radial += a * a * powi0(u, self.a - 1) * powi0(v, self.b + 1);
        }
        if self.b > 0 {
            radial += b * b * powi0(u, self.a + 1) * powi0(v, self.b - 1);
        }
        let mut total = radial;
        if self.c > 0 {
            // a, b >= c/2 >= 1 here
            total -= 0.25 * c * c * powi0(u, self.a - 1) * powi0(v, self.b - 1);
            total *= (c * theta).cos();
        }
        self.coef * total
    }

    /// Upper bound of `max_theta term` on the latitude `u`.
    fn latitude_bound(&self, u: f64) -> f64 {
        let r = self.coef * self.radial(u);
        if self.c == 0 {
            r
        } else {
            r.abs()
        }
    }

    /// `|coef| * max_u u^a (1-u)^b`.
    fn global_bound(&self) -> f64 {
        let (a, b) = (self.a as f64, self.b as f64);
        if self.a + self.b == 0 {
            return self.coef.abs();
        }
        let s = a + b;
        let m = pow0(a / s, a) * pow0(b / s, b);
        self.coef.abs() * m
    }
}

fn powi0(x: f64, e: u32) -> f64 {
    if e == 0 {
        1.0
    } else {
        x.powi(e as i32)
    }
}

fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// Fubini–Study weight times `exp(-phi)` per unit degree, with a global
/// per-degree rescaling `exp(-twist * n)`.
///
/// `|| s(x) || = |s(z)| * exp(-n phi(x) / 2) * exp(-twist n) / |z|^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricData {
    terms: Vec<PerturbationTerm>,
    twist: f64,
}

impl MetricData {
    pub fn fubini_study() -> Self {
        Self {
            terms: Vec::new(),
            twist: 0.0,
        }
    }

    pub fn twisted(twist: f64) -> Self {
        Self {
            terms: Vec::new(),
            twist,
        }
    }

    /// Checked constructor: terms must be admissible and the curvature
    /// density positive at every grid point.
    pub fn new(terms: Vec<PerturbationTerm>, twist: f64, grid: &QuadratureGrid) -> Result<Self> {
        let m = Self::without_positivity_check(terms, twist)?;
        if let Some((index, density)) = m.first_curvature_violation(grid) {
            return Err(Error::NonPositiveCurvature { index, density });
        }
        Ok(m)
    }

    /// Validates the terms and the twist but not the curvature sign.
    pub fn without_positivity_check(terms: Vec<PerturbationTerm>, twist: f64) -> Result<Self> {
        for t in &terms {
            t.validate()?;
        }
        if !(twist >= 0.0 && twist.is_finite()) {
            return Err(Error::InvalidArgument(format!("twist {twist} must be >= 0")));
        }
        Ok(Self { terms, twist })
    }

    pub fn with_twist(&self, twist: f64) -> Self {
        Self {
            terms: self.terms.clone(),
            twist,
        }
    }

    pub fn terms(&self) -> &[PerturbationTerm] {
        &self.terms
    }

    pub fn twist(&self) -> f64 {
        self.twist
    }

    pub fn is_unperturbed(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn phi_ut(&self, u: f64, theta: f64) -> f64 {
        self.terms.iter().map(|t| t.value(u, theta)).sum()
    }

    pub fn phi(&self, x: &ProjectivePoint) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        self.phi_ut(x.u(), x.theta())
    }

    pub fn laplacian_phi(&self, x: &ProjectivePoint) -> f64 {
        let (u, theta) = (x.u(), x.theta());
        self.terms.iter().map(|t| t.laplacian(u, theta)).sum()
    }

    /// Density of `c_1` per unit degree against the mass-one FS measure.
    pub fn curvature_density(&self, x: &ProjectivePoint) -> f64 {
        if self.terms.is_empty() {
            return 1.0;
        }
        1.0 + self.laplacian_phi(x)
    }

    pub fn first_curvature_violation(&self, grid: &QuadratureGrid) -> Option<(usize, f64)> {
        grid.points()
            .iter()
            .enumerate()
            .map(|(i, p)| (i, self.curvature_density(p)))
            .find(|(_, d)| *d <= CURVATURE_MARGIN)
    }

    pub fn min_curvature_density(&self, grid: &QuadratureGrid) -> f64 {
        grid.points()
            .iter()
            .map(|p| self.curvature_density(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Provable upper bound of `max_theta phi(u, theta)`.
    pub fn phi_latitude_bound(&self, u: f64) -> f64 {
        self.terms.iter().map(|t| t.latitude_bound(u)).sum()
    }

    /// Provable upper bound of `sup |phi|`.
    pub fn phi_global_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.global_bound()).sum()
    }

    /// Parses `a,b,c,coef; a,b,c,coef; ...`.
    pub fn parse_terms(text: &str) -> Result<Vec<PerturbationTerm>> {
        let mut out = Vec::new();
        for chunk in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = chunk.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Error::Parse(format!("perturbation term '{chunk}' needs a,b,c,coef")));
            }
            let int = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent '{s}'")))
            };
            let coef = parts[3]
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coefficient '{}'", parts[3])))?;
            out.push(PerturbationTerm::new(
                int(parts[0])?,
                int(parts[1])?,
                int(parts[2])?,
                coef,
            )?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn flat_laplacian(m: &MetricData, t: Complex64) -> f64 {
        // Delta_{S^2} = (1 + |t|^2)^2 / 4 * Delta_flat in the chart z0 = 1
        let h = 1e-4;
        let f = |z: Complex64| m.phi(&ProjectivePoint::from_chart(z));
        let c = f(t);
        let lap =
            (f(t + h) + f(t - h) + f(t + Complex64::new(0.0, h)) + f(t - Complex64::new(0.0, h)) - 4.0 * c) / (h * h);
        (1.0 + t.norm_sqr()).powi(2) / 4.0 * lap
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let terms = vec![
            PerturbationTerm::new(1, 0, 0, 0.3).unwrap(),
            PerturbationTerm::new(2, 1, 0, -0.2).unwrap(),
            PerturbationTerm::new(1, 1, 2, 0.15).unwrap(),
            PerturbationTerm::new(2, 2, 4, 0.4).unwrap(),
            PerturbationTerm::new(1, 3, 2, -0.1).unwrap(),
        ];
        let m = MetricData::without_positivity_check(terms, 0.0).unwrap();
        for &(re, im) in &[(0.3, 0.2), (-0.7, 1.1), (1.9, -0.4), (0.05, 0.6)] {
            let t = Complex64::new(re, im);
            let exact = m.laplacian_phi(&ProjectivePoint::from_chart(t));
            let fd = flat_laplacian(&m, t);
            assert!((exact - fd).abs() < 1e-5, "{exact} vs {fd} at {t}");
        }
    }

    #[test]
    fn term_validation() {
        assert!(PerturbationTerm::new(1, 1, 1, 0.1).is_err());
        assert!(PerturbationTerm::new(3, 2, 0, 0.1).is_err());
        assert!(PerturbationTerm::new(0, 2, 2, 0.1).is_err());
        assert!(PerturbationTerm::new(2, 2, 4, 0.1).is_ok());
    }

    #[test]
    fn conjugation_invariance() {
        let m = MetricData::without_positivity_check(vec![PerturbationTerm::new(1, 1, 2, 0.2).unwrap()], 0.0).unwrap();
        let x = ProjectivePoint::from_chart(Complex64::new(0.4, 0.9));
        assert_eq!(m.phi(&x), m.phi(&x.conj()));
    }

    #[test]
    fn latitude_bound_dominates() {
        let m = MetricData::without_positivity_check(
            vec![
                PerturbationTerm::new(1, 1, 2, -0.3).unwrap(),
                PerturbationTerm::new(0, 2, 0, 0.2).unwrap(),
            ],
            0.0,
        )
        .unwrap();
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            let b = m.phi_latitude_bound(u);
            for j in 0..64 {
                let th = j as f64 * 0.1;
                assert!(m.phi_ut(u, th) <= b + 1e-15);
                assert!(m.phi_ut(u, th).abs() <= m.phi_global_bound() + 1e-15);
            }
        }
    }

    #[test]
    fn parse_terms_round_trip() {
        let t = MetricData::parse_terms("1,1,2,0.05; 1,0,0,-0.1").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0], PerturbationTerm::new(1, 1, 2, 0.05).unwrap());
        assert!(MetricData::parse_terms("1,1,0").is_err());
    }
}
