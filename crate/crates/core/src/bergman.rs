//! Orthonormal bases, Bergman kernels and the power-sum approximation
//! scheme that turns a positive metric into a sequence of sections whose
//! normalized logarithms converge to zero.

use std::time::Instant;

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{rational_from_f64, ComplexForm, HomogeneousForm, RealForm};
use crate::projective::{
    log_norms_on_grid, metric_phis, refine_sup, sup_norm, weighted_exceed, weighted_l1, MetricData, ProjectivePoint,
    QuadratureGrid, SectionEval,
};

pub const GRAM_TOLERANCE: f64 = 1e-8;
pub const POWER_SUM_BOUND: f64 = 1e300;
pub const EXACT_POWER_SUM_MAX_DEGREE: usize = 24;

/// `L^2`-orthonormal basis of degree-`n` forms.
///
/// Internally each section is stored in the basis
/// `v_k = sqrt((n+1) C(n,k)) e^(twist n) z0^k z1^(n-k)`, which is exactly
/// orthonormal for the unperturbed metric.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    degree: usize,
    metric: MetricData,
    transform: Vec<Vec<Complex64>>,
    sections: Vec<ComplexForm>,
    gram_residual: f64,
}

impl OrthonormalBasis {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn sections(&self) -> &[ComplexForm] {
        &self.sections
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    /// Metric values `sigma_i(x) * exp(-n phi / 2 - n twist)`.
    pub fn values_at(&self, x: &ProjectivePoint, phi: f64) -> Vec<Complex64> {
        let v = scaled_monomials(self.degree, x, phi);
        self.transform
            .iter()
            .map(|a| a.iter().zip(&v).map(|(c, vk)| c * vk).sum())
            .collect()
    }

    /// `(log b_n, log u_n)` at every grid point.
    pub fn log_kernels_on_grid(&self, q: &QuadratureGrid) -> (Vec<f64>, Vec<f64>) {
        let phis = metric_phis(&self.metric, q);
        let mut logb = Vec::with_capacity(q.len());
        let mut logu = Vec::with_capacity(q.len());
        for (p, &phi) in q.points().iter().zip(&phis) {
            let vals = self.values_at(p, phi);
            let sq = vals.iter().map(|v| v.norm_sqr());
            let (sum, max) = sq.fold((0.0, 0.0f64), |(s, m), x| (s + x, m.max(x)));
            logb.push(sum.ln());
            logu.push(max.ln());
        }
        (logb, logu)
    }
}

fn log_binomials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + ((n - k + 1) as f64 / k as f64).ln();
    }
    out
}

/// `sqrt((n+1) C(n,k)) z0^k z1^(n-k) exp(-n phi / 2)` for `k = 0..=n`.
fn scaled_monomials(n: usize, x: &ProjectivePoint, phi: f64) -> Vec<Complex64> {
    let lb = log_binomials(n);
    let (z0, z1) = (x.z0(), x.z1());
    let (r0, r1) = (z0.norm(), z1.norm());
    let (l0, l1) = (r0.ln(), r1.ln());
    let p0 = if r0 > 0.0 { z0 / r0 } else { Complex64::new(1.0, 0.0) };
    let p1 = if r1 > 0.0 { z1 / r1 } else { Complex64::new(1.0, 0.0) };
    let base = 0.5 * ((n + 1) as f64).ln() - 0.5 * n as f64 * phi;
    let mut p0pow = vec![Complex64::new(1.0, 0.0); n + 1];
    let mut p1pow = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        p0pow[k] = p0pow[k - 1] * p0;
        p1pow[k] = p1pow[k - 1] * p1;
    }
    (0..=n)
        .map(|k| {
            if (k > 0 && r0 == 0.0) || (n - k > 0 && r1 == 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let mut l = base + 0.5 * lb[k];
            if k > 0 {
                l += k as f64 * l0;
            }
            if n > k {
                l += (n - k) as f64 * l1;
            }
            p0pow[k] * p1pow[n - k] * l.exp()
        })
        .collect()
}

fn gram_matrix(n: usize, m: &MetricData, q: &QuadratureGrid) -> Vec<Complex64> {
    let d = n + 1;
    let phis = metric_phis(m, q);
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];
    for ((p, &w), &phi) in q.points().iter().zip(q.weights()).zip(&phis) {
        let v = scaled_monomials(n, p, phi);
        for j in 0..d {
            let vj = v[j] * w;
            let row = &mut g[j * d..(j + 1) * d];
            for k in j..d {
                row[k] += vj * v[k].conj();
            }
        }
    }
    for j in 0..d {
        for k in 0..j {
            g[j * d + k] = g[k * d + j].conj();
        }
    }
    g
}

fn gram_inner(g: &[Complex64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let d = a.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        if a[j] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..d {
            row += g[j * d + k] * b[k].conj();
        }
        acc += a[j] * row;
    }
    acc
}

/// Modified Gram–Schmidt with one reorthogonalization pass on the monomials.
///
/// Each `sigma_i` only involves monomials `0..=i`, and its own monomial
/// coefficient is real and positive.
pub fn orthonormalize(n: usize, m: &MetricData, q: &QuadratureGrid) -> Result<OrthonormalBasis> {
    let d = n + 1;
    let g = gram_matrix(n, m, q);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut a = vec![Complex64::new(0.0, 0.0); d];
        a[i] = Complex64::new(1.0, 0.0);
        let start = gram_inner(&g, &a, &a).re;
        for _pass in 0..2 {
            for b in &basis {
                let r = gram_inner(&g, &a, b);
                for (x, y) in a.iter_mut().zip(b) {
                    *x -= r * y;
                }
            }
        }
        let nrm2 = gram_inner(&g, &a, &a).re;
        if !(nrm2 > 1e-14 * start) {
            return Err(Error::OrthonormalizationFailed { residual: nrm2 / start });
        }
        let inv = 1.0 / nrm2.sqrt();
        for x in a.iter_mut() {
            *x *= inv;
        }
        // kill the rounding phase on the diagonal coefficient
        let diag = a[i];
        if diag.im != 0.0 {
            let ph = diag.conj() / diag.norm();
            for x in a.iter_mut() {
                *x *= ph;
            }
            a[i] = Complex64::new(a[i].norm(), 0.0);
        }
        basis.push(a);
    }
    let mut residual: f64 = 0.0;
    for i in 0..d {
        for l in i..d {
            let v = gram_inner(&g, &basis[i], &basis[l]);
            let target = if i == l { 1.0 } else { 0.0 };
            residual = residual.max((v - target).norm());
        }
    }
    if !(residual <= GRAM_TOLERANCE) {
        return Err(Error::OrthonormalizationFailed { residual });
    }
    let lb = log_binomials(n);
    let scale: Vec<f64> = (0..d)
        .map(|k| (0.5 * (((n + 1) as f64).ln() + lb[k]) + m.twist() * n as f64).exp())
        .collect();
    let sections = basis
        .iter()
        .map(|a| HomogeneousForm::new(a.iter().zip(&scale).map(|(c, s)| c * s).collect()))
        .collect();
    Ok(OrthonormalBasis {
        degree: n,
        metric: m.clone(),
        transform: basis,
        sections,
        gram_residual: residual,
    })
}

/// `b_n(x) = sum_i ||sigma_i(x)||^2`.
pub fn bergman_kernel(b: &OrthonormalBasis, x: &ProjectivePoint, m: &MetricData) -> f64 {
    b.values_at(x, m.phi(x)).iter().map(|v| v.norm_sqr()).sum()
}

/// `u_n(x) = max_i ||sigma_i(x)||^2`.
pub fn max_kernel(b: &OrthonormalBasis, x: &ProjectivePoint, m: &MetricData) -> f64 {
    b.values_at(x, m.phi(x))
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max)
}

/// `s_{n,l} = sum_i sigma_i^l` in double precision.
pub fn power_sum_section(b: &OrthonormalBasis, ell: u32) -> Result<ComplexForm> {
    if ell == 0 {
        return Err(Error::InvalidArgument("power sum needs ell >= 1".into()));
    }
    let mut acc = ComplexForm::zero(b.degree * ell as usize);
    for s in &b.sections {
        acc = acc.try_add(&s.power(ell))?;
        if !(acc.max_abs() <= POWER_SUM_BOUND) {
            return Err(Error::PowerSumOverflow);
        }
    }
    Ok(acc)
}

/// Same as [`power_sum_section`] but exponentiates the (exactly converted)
/// f64 coefficients in rational arithmetic. Limited to `n * ell <= 24`.
pub fn power_sum_section_exact(b: &OrthonormalBasis, ell: u32) -> Result<ComplexForm> {
    let total = b.degree * ell as usize;
    if ell == 0 || total > EXACT_POWER_SUM_MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "exact power sums need 1 <= ell and n * ell <= {EXACT_POWER_SUM_MAX_DEGREE}"
        )));
    }
    type Q = Complex<BigRational>;
    let mut acc: HomogeneousForm<Q> = HomogeneousForm::zero(total);
    for s in &b.sections {
        let exact: HomogeneousForm<Q> = s.map(|c| Complex::new(rational_from_f64(c.re), rational_from_f64(c.im)));
        acc = acc.try_add(&exact.power(ell))?;
    }
    Ok(acc.map(|c| Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))))
}

pub fn conjugate_form(f: &ComplexForm) -> ComplexForm {
    f.conj()
}

/// `f * conj(f)`, a real form of twice the degree.
pub fn realify(f: &ComplexForm) -> Result<RealForm> {
    if f.is_zero() {
        return Err(Error::ZeroForm("realify"));
    }
    Ok(f.product(&f.conj()).map(|c| c.re))
}

/// Real form attached to a complex section: the real part when the
/// imaginary parts are rounding noise, otherwise [`realify`].
pub fn real_section(f: &ComplexForm) -> Result<RealForm> {
    if f.is_zero() {
        return Err(Error::ZeroForm("real_section"));
    }
    let scale = f.max_abs();
    let imag = f.coeffs().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag <= 1e-12 * scale {
        Ok(f.map(|c| c.re))
    } else {
        realify(f)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub tolerances: Vec<f64>,
    pub n_max: usize,
    pub ell_max: u32,
    /// Threshold in `measure{ |log ||s|| / deg| > eps }`.
    pub measure_eps: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            tolerances: vec![0.2, 0.1, 0.05],
            n_max: 64,
            ell_max: 64,
            measure_eps: 0.05,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemaillyStage {
    pub index: usize,
    pub tolerance: f64,
    pub n: usize,
    pub ell: u32,
    /// Normalized to sup-norm one.
    #[serde(skip)]
    pub section: Option<ComplexForm>,
    pub sup_norm_value: f64,
    /// `integral |log ||s|| / (n ell)|`.
    pub l1_value: f64,
    pub measure_value: f64,
    /// `integral |log u_n / (2n)|` at the chosen `n`.
    pub kernel_l1: f64,
    /// `integral |log ||s_{n,l}|| / (n l) - log u_n / (2n)|` before normalization.
    pub power_gap: f64,
    pub wall_time_ms: u128,
}

impl DemaillyStage {
    pub fn degree(&self) -> usize {
        self.n * self.ell as usize
    }

    pub fn section(&self) -> &ComplexForm {
        self.section.as_ref().expect("stage section present")
    }
}

#[derive(Clone, Debug, Default)]
pub struct DemaillySequence {
    pub stages: Vec<DemaillyStage>,
}

/// Ladder of candidate `n`: 1, 2, ..., 8, 10, 12, 15, 18, 22, 27, ...
pub fn next_n(n: usize) -> usize {
    n + (n / 4).max(1)
}

struct KernelState {
    basis: OrthonormalBasis,
    logu: Vec<f64>,
    l1: f64,
}

fn kernel_state(n: usize, m: &MetricData, q: &QuadratureGrid) -> Result<KernelState> {
    let basis = orthonormalize(n, m, q)?;
    let (_, logu) = basis.log_kernels_on_grid(q);
    let l1 = weighted_l1(q, &logu, 0.5 / n as f64);
    Ok(KernelState { basis, logu, l1 })
}

/// Explicit search for the approximating sequence.
///
/// For each tolerance: raise `n` along [`next_n`] until
/// `|| log u_n / (2n) ||_1 <= tol / 2`, then raise `ell` until the power sum
/// tracks the max-kernel within `tol / 4` in `L^1`, then normalize.
pub fn demailly_schedule(m: &MetricData, q: &QuadratureGrid, cfg: &ScheduleConfig) -> Result<DemaillySequence> {
    if cfg.tolerances.windows(2).any(|w| !(w[1] < w[0])) || cfg.tolerances.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument(
            "tolerance schedule must be positive and strictly decreasing".into(),
        ));
    }
    if cfg.n_max == 0 || cfg.ell_max == 0 {
        return Err(Error::InvalidArgument("caps must be positive".into()));
    }
    let mut seq = DemaillySequence::default();
    let exhausted = |seq: &DemaillySequence, reason: String| Error::ScheduleExhausted {
        reason,
        best: seq.stages.last().cloned().map(Box::new),
    };
    let mut n = 1;
    let mut state = kernel_state(n, m, q)?;
    for (index, &tol) in cfg.tolerances.iter().enumerate() {
        let started = Instant::now();
        while state.l1 > 0.5 * tol {
            n = next_n(n);
            if n > cfg.n_max {
                return Err(exhausted(
                    &seq,
                    format!("n cap {} reached at tolerance {tol}", cfg.n_max),
                ));
            }
            state = kernel_state(n, m, q)?;
        }
        let mut ell = 1u32;
        let (section, logs, gap) = loop {
            let s = power_sum_section(&state.basis, ell)?;
            let logs = log_norms_on_grid(&s, m, q);
            let inv = 1.0 / (n as f64 * ell as f64);
            let half = 0.5 / n as f64;
            let gap = q.integrate(|i, _| (inv * logs[i] - half * state.logu[i]).abs());
            if gap <= 0.25 * tol {
                break (s, logs, gap);
            }
            ell += 1;
            if ell > cfg.ell_max {
                return Err(exhausted(
                    &seq,
                    format!("ell cap {} reached at n = {n}, tolerance {tol}", cfg.ell_max),
                ));
            }
        };
        let eval = SectionEval::new(section.coeffs().to_vec(), 0.0);
        let (lsup, _) = refine_sup(&eval, m, q, &logs);
        let normalized = section.scale(&Complex64::new((-lsup).exp(), 0.0));
        let logs: Vec<f64> = logs.iter().map(|l| l - lsup).collect();
        let sup_after = sup_norm(&normalized, m, q)?;
        let inv = 1.0 / (n as f64 * ell as f64);
        seq.stages.push(DemaillyStage {
            index,
            tolerance: tol,
            n,
            ell,
            section: Some(normalized),
            sup_norm_value: sup_after,
            l1_value: weighted_l1(q, &logs, inv),
            measure_value: weighted_exceed(q, &logs, inv, cfg.measure_eps),
            kernel_l1: state.l1,
            power_gap: gap,
            wall_time_ms: started.elapsed().as_millis(),
        });
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_monomials_at_poles() {
        let v = scaled_monomials(3, &ProjectivePoint::infinity(), 0.0);
        // only z1^3 survives at [0:1], with weight sqrt(4 * 1)
        assert!((v[0].norm() - 2.0).abs() < 1e-14);
        assert!(v[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn ladder() {
        let mut n = 1;
        let mut seen = vec![n];
        while n < 60 {
            n = next_n(n);
            seen.push(n);
        }
        assert_eq!(
            seen,
            vec![1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 15, 18, 22, 27, 33, 41, 51, 63]
        );
    }

    #[test]
    fn real_section_keeps_real_input() {
        let f = ComplexForm::new(vec![Complex64::new(2.0, 0.0), Complex64::new(-1.0, 1e-20)]);
        assert_eq!(real_section(&f).unwrap(), RealForm::new(vec![2.0, -1.0]));
        let g = ComplexForm::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0)]);
        assert_eq!(real_section(&g).unwrap().degree(), 2);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(realify(&ComplexForm::zero(2)).is_err());
    }
}
