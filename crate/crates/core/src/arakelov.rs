//! Heights of closed points, divisors of integral sections, and arithmetic
//! intersection numbers computed from a section.
//!
//! A closed point of the generic fiber is a primitive irreducible integer
//! form `g` of degree `d`. Its height for a Hermitian `O(D)` is
//!
//! ```text
//! h(x) = D/d * [ log|a| + sum_j ( log(1 + |alpha_j|^2) / 2 + phi(alpha_j) / 2 ) ] + D * twist
//! ```
//!
//! where `a` is the leading coefficient of `g(1, t)` and `alpha_j` its roots.
//! The point `[0:1]` of `z0` is handled in the other chart.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{factor_form, factor_integer, is_irreducible};
use crate::form::IntForm;
use crate::projective::{curvature_mass, log_norms_on_grid, sup_log_norm, MetricData, ProjectivePoint, QuadratureGrid};
use crate::roots::polynomial_roots;
use crate::zpoly;

/// A metrized `O(degree)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBundle {
    pub metric: MetricData,
    pub degree: u32,
}

impl HermitianBundle {
    pub fn new(metric: MetricData, degree: u32) -> Self {
        Self { metric, degree }
    }

    /// `O(1)` with the Fubini–Study metric.
    pub fn fubini_study() -> Self {
        Self::new(MetricData::fubini_study(), 1)
    }

    pub fn twisted(eps: f64) -> Self {
        Self::new(MetricData::twisted(eps), 1)
    }
}

/// Natural log of `|x|` for arbitrarily large integers.
pub fn log_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 900;
    (x.abs() >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedPoint {
    form: IntForm,
    roots: Vec<ProjectivePoint>,
}

impl ClosedPoint {
    /// Checked constructor: `form` must be primitive and irreducible.
    pub fn new(form: IntForm) -> Result<Self> {
        if form.degree() == 0 || form.is_zero() {
            return Err(Error::InvalidArgument(
                "a closed point needs a form of positive degree".into(),
            ));
        }
        if !form.content().is_one() || !is_irreducible(&form)? {
            return Err(Error::InvalidArgument(format!("{form} is not primitive irreducible")));
        }
        Self::from_irreducible(form)
    }

    /// Skips the irreducibility check; used on certified factors.
    pub(crate) fn from_irreducible(form: IntForm) -> Result<Self> {
        let form = form.sign_normalized();
        let roots = if form.z0_multiplicity() > 0 {
            vec![ProjectivePoint::infinity()]
        } else {
            let g = zpoly::trimmed(form.dehomogenize());
            polynomial_roots(&zpoly::to_f64_scaled(&g))?
                .into_iter()
                .map(ProjectivePoint::from_chart)
                .collect()
        };
        Ok(Self { form, roots })
    }

    /// The rational point `[x0 : x1]`.
    pub fn rational(x0: i64, x1: i64) -> Result<Self> {
        if x0 == 0 && x1 == 0 {
            return Err(Error::ZeroPoint);
        }
        let g = x0.gcd(&x1);
        // x1 z0 - x0 z1 vanishes at [x0 : x1]
        Self::from_irreducible(IntForm::from_i64(&[-x0 / g, x1 / g]))
    }

    pub fn form(&self) -> &IntForm {
        &self.form
    }

    pub fn degree(&self) -> usize {
        self.form.degree()
    }

    pub fn roots(&self) -> &[ProjectivePoint] {
        &self.roots
    }

    /// `[x0 : x1]` when the point is rational.
    pub fn as_rational(&self) -> Option<(BigInt, BigInt)> {
        if self.degree() != 1 {
            return None;
        }
        let c = self.form.coeffs();
        Some((-c[0].clone(), c[1].clone()))
    }

    /// Whether `s` vanishes at this point, decided exactly.
    pub fn is_zero_of(&self, s: &IntForm) -> bool {
        if s.is_zero() {
            return true;
        }
        if let Some((a, b)) = self.as_rational() {
            return s.eval(&a, &b).is_zero();
        }
        let g = zpoly::trimmed(self.form.dehomogenize());
        let f = zpoly::primitive_part(&s.dehomogenize());
        zpoly::exact_div(&f, &g).is_some()
    }

    /// Root residual `max_j |g(alpha_j)| / sum_k |g_k| |alpha_j|^k`.
    pub fn root_residual(&self) -> f64 {
        if self.form.z0_multiplicity() > 0 {
            return 0.0;
        }
        let c: Vec<Complex64> = zpoly::to_f64_scaled(&self.form.dehomogenize())
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        let alphas: Vec<Complex64> = self.roots.iter().map(|p| p.z1() / p.z0()).collect();
        crate::roots::max_residual(&c, &alphas)
    }
}

/// Height of `x` for the bundle.
pub fn height_of_point(x: &ClosedPoint, bundle: &HermitianBundle) -> f64 {
    let d = x.degree() as f64;
    let m = &bundle.metric;
    let c = x.form.coeffs();
    let (lead, chart_sum) = if x.form.z0_multiplicity() > 0 {
        // x = [0:1]; chart z0/z1, root 0, leading coefficient c_1 = 1
        (log_abs(&c[1]), 0.5 * m.phi(&ProjectivePoint::infinity()))
    } else {
        let s: f64 = x
            .roots
            .iter()
            .map(|p| {
                let alpha = p.z1() / p.z0();
                0.5 * alpha.norm_sqr().ln_1p() + 0.5 * m.phi(p)
            })
            .sum();
        (log_abs(&c[0]), s)
    };
    bundle.degree as f64 * ((lead + chart_sum) / d + m.twist())
}

/// Independent height of a rational point from the product formula, one
/// place at a time, using the section `z0` (or `z1` when `x0 = 0`).
pub fn rational_point_height(x0: &BigInt, x1: &BigInt, bundle: &HermitianBundle) -> Result<f64> {
    if x0.is_zero() && x1.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let use_z0 = !x0.is_zero();
    let s_val = if use_z0 { x0 } else { x1 };
    let mut primes: Vec<BigInt> = factor_integer(x0).into_iter().map(|(p, _)| p).collect();
    primes.extend(factor_integer(x1).into_iter().map(|(p, _)| p));
    primes.sort();
    primes.dedup();
    let valuation = |v: &BigInt, p: &BigInt| -> i64 {
        if v.is_zero() {
            return i64::MAX;
        }
        let mut v = v.clone();
        let mut e = 0;
        while (&v % p).is_zero() {
            v /= p;
            e += 1;
        }
        e
    };
    // -log ||s(x)||_p = log(max(|x0|_p, |x1|_p) / |s(x)|_p) = (v_p(s) - min v_p) log p
    let mut finite = 0.0;
    for p in &primes {
        let vs = valuation(s_val, p);
        let vmin = valuation(x0, p).min(valuation(x1, p));
        finite += (vs - vmin) as f64 * log_abs(p);
    }
    let (f0, f1) = (x0.to_f64().unwrap_or(f64::MAX), x1.to_f64().unwrap_or(f64::MAX));
    let pt = ProjectivePoint::real(f0, f1)?;
    let m = &bundle.metric;
    // -log ||s(x)||_inf = log|x| - log|s| + phi/2 + twist
    let arch = 0.5 * (f0 * f0 + f1 * f1).ln() - log_abs(s_val) + 0.5 * m.phi(&pt) + m.twist();
    Ok(bundle.degree as f64 * (finite + arch))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalComponent {
    pub point: ClosedPoint,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticDivisor {
    /// Content primes with multiplicity.
    pub vertical: BTreeMap<BigInt, u32>,
    pub horizontal: Vec<HorizontalComponent>,
    /// Degree of the section the divisor came from.
    pub degree: usize,
}

impl ArithmeticDivisor {
    pub fn horizontal_degree(&self) -> usize {
        self.horizontal
            .iter()
            .map(|c| c.multiplicity as usize * c.point.degree())
            .sum()
    }

    pub fn has_vertical(&self) -> bool {
        !self.vertical.is_empty()
    }
}

pub fn decompose_divisor(f: &IntForm) -> Result<ArithmeticDivisor> {
    if f.is_zero() {
        return Err(Error::ZeroForm("decompose_divisor"));
    }
    let fac = factor_form(f)?;
    let vertical = factor_integer(&fac.unit).into_iter().collect();
    let horizontal = fac
        .factors
        .into_iter()
        .map(|(g, m)| {
            Ok(HorizontalComponent {
                point: ClosedPoint::from_irreducible(g)?,
                multiplicity: m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = ArithmeticDivisor {
        vertical,
        horizontal,
        degree: f.degree(),
    };
    debug_assert_eq!(out.horizontal_degree(), f.degree());
    Ok(out)
}

/// `sum_i m_i d_i h(x_i)`, plus `sum_p mult_p * D * log p` when requested.
pub fn degree_on_divisor(d: &ArithmeticDivisor, bundle: &HermitianBundle, include_vertical: bool) -> Result<f64> {
    if d.has_vertical() && !include_vertical {
        return Err(Error::VerticalComponentsPresent);
    }
    let horizontal: f64 = d
        .horizontal
        .iter()
        .map(|c| c.multiplicity as f64 * c.point.degree() as f64 * height_of_point(&c.point, bundle))
        .sum();
    let vertical: f64 = d
        .vertical
        .iter()
        .map(|(p, m)| *m as f64 * bundle.degree as f64 * log_abs(p))
        .sum();
    Ok(horizontal + if include_vertical { vertical } else { 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionBreakdown {
    /// Multiple `k` with `deg s = k * deg L`.
    pub multiple: usize,
    pub num_factors: usize,
    /// `sum_i m_i d_i h_N(x_i)`.
    pub deg_term: f64,
    /// `integral log ||s||_L c_1(N)`.
    pub archimedean_term: f64,
    /// `(deg_term - archimedean_term) / k`.
    pub value: f64,
}

/// `L . N` computed from one integral section `s` of `k L`.
pub fn intersection_via_section(
    l: &HermitianBundle,
    n: &HermitianBundle,
    s: &IntForm,
    q: &QuadratureGrid,
) -> Result<IntersectionBreakdown> {
    if s.is_zero() {
        return Err(Error::ZeroForm("intersection_via_section"));
    }
    if !s.content().is_one() {
        return Err(Error::SectionHasVerticalComponents);
    }
    let ld = l.degree as usize;
    if ld == 0 || !s.degree().is_multiple_of(ld) || s.degree() == 0 {
        return Err(Error::NotAMultiple {
            degree: s.degree(),
            bundle: l.degree,
        });
    }
    let k = s.degree() / ld;
    let div = decompose_divisor(s)?;
    let deg_term = degree_on_divisor(&div, n, false)?;
    let archimedean_term = archimedean_term(s, l, n, q);
    Ok(IntersectionBreakdown {
        multiple: k,
        num_factors: div.horizontal.len(),
        deg_term,
        archimedean_term,
        value: (deg_term - archimedean_term) / k as f64,
    })
}

/// `integral log ||s||_L c_1(N)` by quadrature.
pub fn archimedean_term(s: &IntForm, l: &HermitianBundle, n: &HermitianBundle, q: &QuadratureGrid) -> f64 {
    let logs = log_norms_on_grid(s, &l.metric, q);
    let nd = n.degree as f64;
    q.integrate(|i, p| logs[i].max(crate::projective::LOG_FLOOR) * nd * n.metric.curvature_density(p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplenessReport {
    pub min_curvature_density: f64,
    pub generic_degree: u32,
    pub curvature_mass: f64,
    pub min_sample_height: f64,
    pub vertically_positive: bool,
    pub horizontally_strict: bool,
    pub flags: Vec<String>,
}

impl AmplenessReport {
    pub fn is_ample(&self) -> bool {
        self.vertically_positive && self.horizontally_strict && self.generic_degree > 0
    }
}

/// Curvature sign, generic degree and a sampled horizontal positivity proxy.
pub fn ampleness_diagnostics(bundle: &HermitianBundle, q: &QuadratureGrid, samples: &[ClosedPoint]) -> AmplenessReport {
    let min_c = bundle.metric.min_curvature_density(q);
    let min_h = samples
        .iter()
        .map(|x| height_of_point(x, bundle))
        .fold(f64::INFINITY, f64::min);
    let mut flags = Vec::new();
    let vertically_positive = min_c > 0.0;
    if !vertically_positive {
        flags.push(format!("curvature density reaches {min_c:.6e}"));
    }
    let horizontally_strict = min_h > 0.0;
    if !horizontally_strict {
        flags.push(format!("not horizontally strict: sampled height {min_h:.6e}"));
    }
    if bundle.degree == 0 {
        flags.push("generic degree is zero".into());
    }
    AmplenessReport {
        min_curvature_density: min_c,
        generic_degree: bundle.degree,
        curvature_mass: curvature_mass(&bundle.metric, bundle.degree, q),
        min_sample_height: min_h,
        vertically_positive,
        horizontally_strict,
        flags,
    }
}

/// Small rational and quadratic points for diagnostics.
pub fn sample_points() -> Vec<ClosedPoint> {
    let mut out = Vec::new();
    for (a, b) in [
        (1, 0),
        (0, 1),
        (1, 1),
        (1, -1),
        (2, 1),
        (1, 2),
        (2, -1),
        (3, 1),
        (1, 3),
        (3, 2),
    ] {
        out.push(ClosedPoint::rational(a, b).expect("nonzero"));
    }
    for c in [[1i64, 0, 1], [1, 1, 1], [-2, 0, 1], [2, 0, 1], [1, -1, 1]] {
        out.push(ClosedPoint::from_irreducible(IntForm::from_i64(&c)).expect("irreducible quadratic"));
    }
    out
}

/// `B = deg(L|C) + deg(C) log(A + 1)`: sections of `nL` with sup-norm at
/// most `A^n` that do not vanish on `C` have content primes `p <= e^(nB)`.
pub fn horizontal_curve_bound(c: &ClosedPoint, l: &HermitianBundle, a: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return Err(Error::InvalidArgument(format!("A = {a} must be >= 1")));
    }
    let d = c.degree() as f64;
    Ok(d * height_of_point(c, l) + d * a.ln_1p())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerticalPrimeCheck {
    pub n: usize,
    pub witness: String,
    pub a: f64,
    pub bound: f64,
    pub primes: Vec<String>,
    pub violations: usize,
}

/// First small rational point where `s` does not vanish.
pub fn choose_witness(s: &IntForm) -> ClosedPoint {
    for x0 in 0..64i64 {
        for x1 in [1i64, -1] {
            if x0 == 0 && x1 == -1 {
                continue;
            }
            let p = if x0 == 0 {
                ClosedPoint::rational(1, 0)
            } else {
                ClosedPoint::rational(x1, x0)
            }
            .expect("nonzero");
            if !p.is_zero_of(s) {
                return p;
            }
        }
    }
    unreachable!("a nonzero form has at most deg s rational zeros")
}

/// Checks `log p <= n B + 1e-6` for every content prime of `s`.
pub fn vertical_prime_check(s: &IntForm, l: &HermitianBundle, q: &QuadratureGrid) -> Result<VerticalPrimeCheck> {
    let n = s.degree();
    let witness = choose_witness(s);
    let (log_sup, _) = sup_log_norm(s, &l.metric, q)?;
    let a = if n == 0 {
        1.0
    } else {
        (log_sup / n as f64).exp().max(1.0)
    };
    let b = horizontal_curve_bound(&witness, l, a)?;
    let bound = n as f64 * b;
    let primes = factor_integer(&s.content());
    let violations = primes.iter().filter(|(p, _)| log_abs(p) > bound + 1e-6).count();
    Ok(VerticalPrimeCheck {
        n,
        witness: witness.form().to_string(),
        a,
        bound,
        primes: primes.iter().map(|(p, _)| p.to_string()).collect(),
        violations,
    })
}
