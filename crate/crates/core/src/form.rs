//! Binary forms over the supported coefficient domains.
//!
//! A degree-`n` form is stored as `n + 1` coefficients where index `k`
//! multiplies the monomial `z0^k * z1^(n-k)`. Dehomogenizing at `z0 = 1`
//! with `t = z1 / z0` therefore reads the coefficient vector backwards:
//! `f(1, t) = sum_k c[k] * t^(n-k)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousForm<C> {
    coeffs: Vec<C>,
}

pub type IntForm = HomogeneousForm<BigInt>;
pub type RatForm = HomogeneousForm<BigRational>;
pub type RealForm = HomogeneousForm<f64>;
pub type ComplexForm = HomogeneousForm<Complex64>;

impl<C> HomogeneousForm<C> {
    /// Panics on an empty coefficient list; every form has degree >= 0.
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a form needs at least one coefficient");
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn map<D>(&self, f: impl FnMut(&C) -> D) -> HomogeneousForm<D> {
        HomogeneousForm::new(self.coeffs.iter().map(f).collect())
    }

    fn check_degree<D>(&self, other: &HomogeneousForm<D>) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(())
    }
}

impl<C: Zero + Clone> HomogeneousForm<C> {
    pub fn zero(n: usize) -> Self {
        Self::new(vec![C::zero(); n + 1])
    }

    /// `c * z0^k * z1^(n-k)`.
    pub fn monomial(n: usize, k: usize, c: C) -> Self {
        assert!(k <= n);
        let mut coeffs = vec![C::zero(); n + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Multiplicity of the point `[0:1]`, i.e. the largest `a` with `z0^a | f`.
    pub fn z0_multiplicity(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(self.degree())
    }

    /// Multiplicity of the point `[1:0]`, i.e. the largest `b` with `z1^b | f`.
    pub fn z1_multiplicity(&self) -> usize {
        match self.coeffs.iter().rposition(|c| !c.is_zero()) {
            Some(k) => self.degree() - k,
            None => self.degree(),
        }
    }
}

impl<C> HomogeneousForm<C>
where
    C: Clone + Zero + Add<Output = C> + Sub<Output = C> + Mul<Output = C>,
{
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        ))
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|a| a.clone() * c.clone())
    }

    /// Product of forms; degrees add.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = vec![C::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn power(&self, e: u32) -> Self
    where
        C: One,
    {
        let mut result = Self::new(vec![C::one()]);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        result
    }
}

impl<C: Clone + Neg<Output = C>> Neg for &HomogeneousForm<C> {
    type Output = HomogeneousForm<C>;
    fn neg(self) -> Self::Output {
        self.map(|c| -c.clone())
    }
}

impl ComplexForm {
    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl RealForm {
    pub fn to_complex(&self) -> ComplexForm {
        self.map(|&c| Complex64::new(c, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

impl IntForm {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Nearest f64 per coefficient; may overflow to infinity for huge entries.
    pub fn to_real(&self) -> RealForm {
        self.map(|c| c.to_f64().unwrap_or(f64::NAN))
    }

    /// Complex coefficients scaled by `2^-shift`, returned with `shift * ln 2`
    /// so that `log|f| = log|scaled| + offset`. Keeps huge integers finite.
    pub fn to_complex_scaled(&self) -> (ComplexForm, f64) {
        let bits = self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0);
        let shift = bits.saturating_sub(960);
        let form = self.map(|c| {
            let v = if shift > 0 {
                (c >> shift as usize).to_f64().unwrap_or(0.0)
            } else {
                c.to_f64().unwrap_or(0.0)
            };
            Complex64::new(v, 0.0)
        });
        (form, shift as f64 * std::f64::consts::LN_2)
    }

    /// Gcd of the coefficients, nonnegative; zero only for the zero form.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// The form divided by its content, sign untouched.
    pub fn primitive_part(&self) -> Self {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            return self.clone();
        }
        self.map(|a| a / &c)
    }

    /// Flips the sign so the first nonzero coefficient is positive.
    pub fn sign_normalized(&self) -> Self {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(c) if c.is_negative() => -self,
            _ => self.clone(),
        }
    }

    /// Exact value `f(a, b)`.
    pub fn eval(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let n = self.degree();
        let mut apow = vec![BigInt::one(); n + 1];
        let mut bpow = vec![BigInt::one(); n + 1];
        for k in 1..=n {
            apow[k] = &apow[k - 1] * a;
            bpow[k] = &bpow[k - 1] * b;
        }
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * &apow[k] * &bpow[n - k])
            .sum()
    }

    /// Dehomogenized polynomial in `t = z1/z0`, ascending powers.
    pub fn dehomogenize(&self) -> Vec<BigInt> {
        self.coeffs.iter().rev().cloned().collect()
    }

    /// Inverse of [`dehomogenize`](Self::dehomogenize) at a fixed degree.
    pub fn homogenize(poly: &[BigInt], n: usize) -> Self {
        assert!(poly.len() <= n + 1);
        let mut coeffs = vec![BigInt::zero(); n + 1];
        for (j, c) in poly.iter().enumerate() {
            coeffs[n - j] = c.clone();
        }
        Self::new(coeffs)
    }
}

impl RatForm {
    /// `Some` when every coefficient is an integer.
    pub fn to_integer(&self) -> Option<IntForm> {
        if self.coeffs.iter().all(|c| c.is_integer()) {
            Some(self.map(|c| c.to_integer()))
        } else {
            None
        }
    }

    pub fn to_real(&self) -> RealForm {
        self.map(|c| c.to_f64().unwrap_or(f64::NAN))
    }
}

impl std::str::FromStr for RatForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_form(s)
    }
}

/// Parses section literals such as `3*z0^2 - z0*z1 + 0.5*z1^2`.
///
/// Terms are `c*z0^j*z1^k` with any factor optional; all terms must share one
/// total degree. Coefficients are integers or decimals and are kept exact.
pub fn parse_form(input: &str) -> Result<RatForm> {
    let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty section literal".into()));
    }
    let mut terms: Vec<(BigRational, usize, usize)> = Vec::new();
    let mut rest = compact.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let (negative, body) = match rest.as_bytes()[0] {
            b'+' => (false, &rest[1..]),
            b'-' => (true, &rest[1..]),
            _ if first => (false, rest),
            _ => return Err(Error::Parse(format!("expected '+' or '-' before '{rest}'"))),
        };
        first = false;
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let (term, tail) = body.split_at(end);
        let (mut c, j, k) = parse_term(term)?;
        if negative {
            c = -c;
        }
        terms.push((c, j, k));
        rest = tail;
    }
    let n = terms[0].1 + terms[0].2;
    let mut coeffs = vec![BigRational::zero(); n + 1];
    for (c, j, k) in terms {
        if j + k != n {
            return Err(Error::Parse(format!(
                "mixed degrees in section literal: {} and {n}",
                j + k
            )));
        }
        coeffs[j] += c;
    }
    Ok(HomogeneousForm::new(coeffs))
}

fn parse_term(term: &str) -> Result<(BigRational, usize, usize)> {
    if term.is_empty() {
        return Err(Error::Parse("empty term".into()));
    }
    let mut coeff = BigRational::one();
    let (mut j, mut k) = (0usize, 0usize);
    let mut saw_factor = false;
    for factor in term.split('*') {
        if factor.is_empty() {
            return Err(Error::Parse(format!("dangling '*' in '{term}'")));
        }
        saw_factor = true;
        if let Some(var) = factor.strip_prefix('z') {
            let (idx, exp) = match var.split_once('^') {
                Some((i, e)) => (
                    i,
                    e.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad exponent in '{factor}'")))?,
                ),
                None => (var, 1),
            };
            match idx {
                "0" => j += exp,
                "1" => k += exp,
                _ => return Err(Error::Parse(format!("unknown variable '{factor}'"))),
            }
        } else {
            coeff *= parse_decimal(factor)?;
        }
    }
    if !saw_factor {
        return Err(Error::Parse("empty term".into()));
    }
    Ok((coeff, j, k))
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad coefficient '{s}'"));
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Ok(BigRational::new(num, den))
}

/// Exact rational from an f64, used by the exact power-sum mode.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap_or_else(BigRational::zero)
}

fn fmt_terms<C>(
    f: &mut fmt::Formatter<'_>,
    coeffs: &[C],
    is_zero: impl Fn(&C) -> bool,
    is_negative: impl Fn(&C) -> bool,
    abs_str: impl Fn(&C) -> String,
) -> fmt::Result {
    let n = coeffs.len() - 1;
    let mut wrote = false;
    for k in (0..=n).rev() {
        let c = &coeffs[k];
        if is_zero(c) {
            continue;
        }
        let neg = is_negative(c);
        if wrote {
            f.write_str(if neg { " - " } else { " + " })?;
        } else if neg {
            f.write_str("-")?;
        }
        let mut parts = Vec::new();
        let a = abs_str(c);
        if a != "1" || n == 0 {
            parts.push(a);
        }
        match k {
            0 => {}
            1 => parts.push("z0".into()),
            _ => parts.push(format!("z0^{k}")),
        }
        match n - k {
            0 => {}
            1 => parts.push("z1".into()),
            e => parts.push(format!("z1^{e}")),
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        f.write_str(&parts.join("*"))?;
        wrote = true;
    }
    if !wrote {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for IntForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, &self.coeffs, Zero::is_zero, Signed::is_negative, |c| {
            c.abs().to_string()
        })
    }
}

impl fmt::Display for RealForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, &self.coeffs, |c| *c == 0.0, |c| *c < 0.0, |c| format!("{}", c.abs()))
    }
}
