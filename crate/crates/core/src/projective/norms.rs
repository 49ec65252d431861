use num_complex::Complex64;

use super::grid::{ProjectivePoint, QuadratureGrid};
use super::metric::MetricData;
use crate::error::{Error, Result};
use crate::form::{ComplexForm, IntForm, RealForm};

/// Per-point floor applied to `log ||f||` before integrating.
pub const LOG_FLOOR: f64 = -1e6;

const GOLDEN_ITERATIONS: usize = 32;
const REFINE_ROUNDS: usize = 12;
const REFINE_STARTS: usize = 3;

/// Anything that can be evaluated as a section of `O(n)`.
pub trait AsSection {
    fn section_eval(&self) -> SectionEval;
}

impl AsSection for ComplexForm {
    fn section_eval(&self) -> SectionEval {
        SectionEval::new(self.coeffs().to_vec(), 0.0)
    }
}

impl AsSection for RealForm {
    fn section_eval(&self) -> SectionEval {
        SectionEval::new(self.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect(), 0.0)
    }
}

impl AsSection for IntForm {
    fn section_eval(&self) -> SectionEval {
        let (f, offset) = self.to_complex_scaled();
        SectionEval::new(f.into_coeffs(), offset)
    }
}

impl AsSection for SectionEval {
    fn section_eval(&self) -> SectionEval {
        self.clone()
    }
}

/// Pointwise evaluator of `log |f(z)|` and its phase on the unit sphere.
///
/// Dense forms use Horner in whichever affine coordinate has modulus at most
/// one; forms with few nonzero terms are evaluated term by term in log space.
#[derive(Clone, Debug)]
pub struct SectionEval {
    coeffs: Vec<Complex64>,
    log_offset: f64,
    sparse: Option<Vec<(usize, f64, Complex64)>>,
}

impl SectionEval {
    pub fn new(coeffs: Vec<Complex64>, log_offset: f64) -> Self {
        let nonzero: Vec<(usize, f64, Complex64)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, c)| (k, c.norm().ln(), *c / c.norm()))
            .collect();
        let sparse = (nonzero.len() <= 3).then_some(nonzero);
        Self {
            coeffs,
            log_offset,
            sparse,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// `(log |f(z)|, f(z) / |f(z)|)` at a unit-norm representative.
    pub fn log_abs_phase(&self, x: &ProjectivePoint) -> (f64, Complex64) {
        let n = self.degree();
        let (z0, z1) = (x.z0(), x.z1());
        if let Some(terms) = &self.sparse {
            return self.sparse_eval(terms, z0, z1);
        }
        let one = Complex64::new(1.0, 0.0);
        if z0.norm() >= z1.norm() {
            let w = z1 / z0;
            let mut acc = self.coeffs[0];
            for c in &self.coeffs[1..] {
                acc = acc * w + c;
            }
            let a = acc.norm();
            if a == 0.0 {
                return (f64::NEG_INFINITY, one);
            }
            let zphase = z0 / z0.norm();
            (
                n as f64 * z0.norm().ln() + a.ln() + self.log_offset,
                zphase.powu(n as u32) * (acc / a),
            )
        } else {
            let v = z0 / z1;
            let mut acc = self.coeffs[n];
            for c in self.coeffs[..n].iter().rev() {
                acc = acc * v + c;
            }
            let a = acc.norm();
            if a == 0.0 {
                return (f64::NEG_INFINITY, one);
            }
            let zphase = z1 / z1.norm();
            (
                n as f64 * z1.norm().ln() + a.ln() + self.log_offset,
                zphase.powu(n as u32) * (acc / a),
            )
        }
    }

    fn sparse_eval(&self, terms: &[(usize, f64, Complex64)], z0: Complex64, z1: Complex64) -> (f64, Complex64) {
        let n = self.degree();
        let one = Complex64::new(1.0, 0.0);
        let (l0, l1) = (z0.norm().ln(), z1.norm().ln());
        let (p0, p1) = (unit(z0), unit(z1));
        let mut logs = [(0.0, one); 3];
        let mut count = 0;
        for &(k, lc, ph) in terms {
            let mut l = lc;
            let mut phase = ph;
            if k > 0 {
                l += k as f64 * l0;
                phase *= p0.powu(k as u32);
            }
            if n - k > 0 {
                l += (n - k) as f64 * l1;
                phase *= p1.powu((n - k) as u32);
            }
            if l > f64::NEG_INFINITY {
                logs[count] = (l, phase);
                count += 1;
            }
        }
        if count == 0 {
            return (f64::NEG_INFINITY, one);
        }
        let lmax = logs[..count].iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let mut s = Complex64::new(0.0, 0.0);
        for &(l, ph) in &logs[..count] {
            s += ph * (l - lmax).exp();
        }
        let a = s.norm();
        if a == 0.0 {
            return (f64::NEG_INFINITY, one);
        }
        (lmax + a.ln() + self.log_offset, s / a)
    }

    /// `log || f(x) ||` under the metric, given `phi(x)`.
    pub fn log_norm_with_phi(&self, x: &ProjectivePoint, phi: f64, twist: f64) -> f64 {
        let n = self.degree() as f64;
        self.log_abs_phase(x).0 - n * (0.5 * phi + twist)
    }

    pub fn log_norm(&self, x: &ProjectivePoint, m: &MetricData) -> f64 {
        self.log_norm_with_phi(x, m.phi(x), m.twist())
    }

    /// Metric value `f(x) * exp(-n phi / 2 - n twist)` as a complex number.
    pub fn value(&self, x: &ProjectivePoint, m: &MetricData) -> Complex64 {
        let n = self.degree() as f64;
        let (l, ph) = self.log_abs_phase(x);
        ph * (l - n * (0.5 * m.phi(x) + m.twist())).exp()
    }
}

fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// `phi` at every grid point, in grid order.
pub fn metric_phis(m: &MetricData, g: &QuadratureGrid) -> Vec<f64> {
    if m.terms().is_empty() {
        return vec![0.0; g.len()];
    }
    g.points().iter().map(|p| m.phi(p)).collect()
}

/// `log ||f||` at every grid point.
pub fn log_norms_on_grid<F: AsSection + ?Sized>(f: &F, m: &MetricData, g: &QuadratureGrid) -> Vec<f64> {
    let e = f.section_eval();
    let phis = metric_phis(m, g);
    g.points()
        .iter()
        .zip(&phis)
        .map(|(p, &phi)| e.log_norm_with_phi(p, phi, m.twist()))
        .collect()
}

/// `|| f(x) ||`.
pub fn point_norm<F: AsSection + ?Sized>(f: &F, x: &ProjectivePoint, m: &MetricData) -> f64 {
    let e = f.section_eval();
    if e.is_zero() {
        return 0.0;
    }
    e.log_norm(x, m).exp()
}

/// Quadrature value of the L^2 pairing against the mass-one measure.
pub fn l2_inner<F: AsSection + ?Sized, G: AsSection + ?Sized>(
    f: &F,
    g: &G,
    m: &MetricData,
    q: &QuadratureGrid,
) -> Result<Complex64> {
    let (ef, eg) = (f.section_eval(), g.section_eval());
    if ef.degree() != eg.degree() {
        return Err(Error::DegreeMismatch {
            left: ef.degree(),
            right: eg.degree(),
        });
    }
    let phis = metric_phis(m, q);
    let mut acc = Complex64::new(0.0, 0.0);
    for ((p, &w), &phi) in q.points().iter().zip(q.weights()).zip(&phis) {
        let vf = metric_value(&ef, p, phi, m.twist());
        let vg = metric_value(&eg, p, phi, m.twist());
        acc += (vf * vg.conj()) * w;
    }
    Ok(acc)
}

fn metric_value(e: &SectionEval, p: &ProjectivePoint, phi: f64, twist: f64) -> Complex64 {
    let (l, ph) = e.log_abs_phase(p);
    ph * (l - e.degree() as f64 * (0.5 * phi + twist)).exp()
}

/// `integral |log ||f|| |` with the per-point floor [`LOG_FLOOR`].
pub fn l1_log_norm<F: AsSection + ?Sized>(f: &F, m: &MetricData, q: &QuadratureGrid) -> Result<f64> {
    l1_log_norm_scaled(f, m, q, 1.0)
}

/// `integral |scale * log ||f|| |`, e.g. `scale = 1/n`.
pub fn l1_log_norm_scaled<F: AsSection + ?Sized>(f: &F, m: &MetricData, q: &QuadratureGrid, scale: f64) -> Result<f64> {
    let e = f.section_eval();
    if e.is_zero() {
        return Err(Error::ZeroForm("l1_log_norm"));
    }
    let logs = log_norms_on_grid(&e, m, q);
    Ok(weighted_l1(q, &logs, scale))
}

pub(crate) fn weighted_l1(q: &QuadratureGrid, logs: &[f64], scale: f64) -> f64 {
    q.integrate(|i, _| (scale * logs[i].max(LOG_FLOOR)).abs())
}

/// Measure of `{ x : |log ||f(x)|| / n| > eps }`.
pub fn measure_exceed<F: AsSection + ?Sized>(
    f: &F,
    m: &MetricData,
    q: &QuadratureGrid,
    n: usize,
    eps: f64,
) -> Result<f64> {
    let e = f.section_eval();
    if e.is_zero() {
        return Err(Error::ZeroForm("measure_exceed"));
    }
    if n == 0 || !(eps > 0.0) {
        return Err(Error::InvalidArgument("measure_exceed needs n >= 1 and eps > 0".into()));
    }
    let logs = log_norms_on_grid(&e, m, q);
    Ok(weighted_exceed(q, &logs, 1.0 / n as f64, eps))
}

pub(crate) fn weighted_exceed(q: &QuadratureGrid, logs: &[f64], scale: f64, eps: f64) -> f64 {
    q.integrate(|i, _| {
        if (scale * logs[i].max(LOG_FLOOR)).abs() > eps {
            1.0
        } else {
            0.0
        }
    })
}

/// Quadrature value of `integral c_1(O(bundle_degree))`.
pub fn curvature_mass(m: &MetricData, bundle_degree: u32, q: &QuadratureGrid) -> f64 {
    bundle_degree as f64 * q.integrate(|_, p| m.curvature_density(p))
}

/// Sup-norm estimate: grid maximum, then golden-section polish.
pub fn sup_norm<F: AsSection + ?Sized>(f: &F, m: &MetricData, g: &QuadratureGrid) -> Result<f64> {
    Ok(sup_log_norm(f, m, g)?.0.exp())
}

/// `(log sup ||f||, argmax)`.
pub fn sup_log_norm<F: AsSection + ?Sized>(
    f: &F,
    m: &MetricData,
    g: &QuadratureGrid,
) -> Result<(f64, ProjectivePoint)> {
    let e = f.section_eval();
    if e.is_zero() {
        return Err(Error::ZeroSupNorm);
    }
    let logs = log_norms_on_grid(&e, m, g);
    Ok(refine_sup(&e, m, g, &logs))
}

/// Polishes the grid maximum of precomputed `logs`.
pub(crate) fn refine_sup(e: &SectionEval, m: &MetricData, g: &QuadratureGrid, logs: &[f64]) -> (f64, ProjectivePoint) {
    let f = |x: &ProjectivePoint| e.log_norm(x, m);
    refine_max(f, g, logs)
}

pub(crate) fn refine_max(
    f: impl Fn(&ProjectivePoint) -> f64,
    g: &QuadratureGrid,
    logs: &[f64],
) -> (f64, ProjectivePoint) {
    let pts = g.points();
    let half_width = 2.5 * g.spacing();
    let starts = separated_top(logs, pts, REFINE_STARTS, 2.0 * half_width);
    let mut best = (logs[starts[0]], pts[starts[0]]);
    for &s in &starts {
        let (v, p) = polish(&f, pts[s], logs[s], half_width);
        if v > best.0 {
            best = (v, p);
        }
    }
    best
}

fn separated_top(logs: &[f64], pts: &[ProjectivePoint], k: usize, sep: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..logs.len()).collect();
    let pool = 64.min(idx.len());
    let cmp = |a: &usize, b: &usize| logs[*b].total_cmp(&logs[*a]).then(a.cmp(b));
    if pool < idx.len() {
        idx.select_nth_unstable_by(pool - 1, cmp);
        idx.truncate(pool);
    }
    idx.sort_by(cmp);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for i in idx {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&c| pts[c].sphere_distance(&pts[i]) > sep) {
            chosen.push(i);
        }
    }
    chosen
}

fn polish(
    f: &impl Fn(&ProjectivePoint) -> f64,
    start: ProjectivePoint,
    start_value: f64,
    half_width: f64,
) -> (f64, ProjectivePoint) {
    use std::f64::consts::PI;
    let mut vt = start.vartheta();
    let mut th = start.theta();
    let mut best = start_value;
    let mut best_point = start;
    for _ in 0..REFINE_ROUNDS {
        let before = best;
        let lo = (vt - half_width).max(0.0);
        let hi = (vt + half_width).min(PI);
        let (x, v) = golden_max(|s| f(&ProjectivePoint::from_polar_angles(s, th)), lo, hi);
        if v > best {
            best = v;
            vt = x;
            best_point = ProjectivePoint::from_polar_angles(vt, th);
        }
        let s = vt.sin();
        if s > 1e-12 {
            let w = (half_width / s).min(PI);
            let (x, v) = golden_max(|t| f(&ProjectivePoint::from_polar_angles(vt, t)), th - w, th + w);
            if v > best {
                best = v;
                th = x;
                best_point = ProjectivePoint::from_polar_angles(vt, th);
            }
        }
        if best - before < 1e-14 {
            break;
        }
    }
    (best, best_point)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// FS sup-norm of `z0^k z1^(n-k)`: `sqrt(k^k (n-k)^(n-k) / n^n)`.
pub fn fs_monomial_sup(n: usize, k: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let xlogx = |x: usize| if x == 0 { 0.0 } else { x as f64 * (x as f64).ln() };
    (0.5 * (xlogx(k) + xlogx(n - k) - xlogx(n))).exp()
}

/// Sup-norm of `z0^k z1^(n-k)` under `m`.
pub fn monomial_sup_norm(n: usize, k: usize, m: &MetricData, g: &QuadratureGrid) -> f64 {
    if m.is_unperturbed() {
        return fs_monomial_sup(n, k) * (-m.twist() * n as f64).exp();
    }
    let f = ComplexForm::monomial(n, k, Complex64::new(1.0, 0.0));
    sup_norm(&f, m, g).expect("monomial is nonzero")
}
