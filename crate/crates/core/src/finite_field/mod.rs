//! Binary forms over prime fields: smoothness of divisors, exhaustive and
//! sampled densities, and the zeta function of the projective line.

mod poly;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use poly::{inv_mod, pow_mod, FpPoly};

use crate::error::{Error, Result};
use crate::form::IntForm;

pub const MAX_FIELD_PRIME: u64 = 10_000;
pub const EXHAUSTIVE_BUDGET: u64 = 100_000_000;

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes `>= start`, ascending.
pub fn primes_from(start: u64) -> impl Iterator<Item = u64> {
    (start.max(2)..).filter(|&n| is_prime_u64(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_FIELD_PRIME {
            return Err(Error::PrimeTooLarge(p));
        }
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
}

/// Binary form over `F_p`, same indexing as [`HomogeneousForm`](crate::form::HomogeneousForm).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpForm {
    field: PrimeField,
    coeffs: Vec<u64>,
}

impl FpForm {
    pub fn new(field: PrimeField, coeffs: Vec<u64>) -> Self {
        assert!(!coeffs.is_empty());
        let p = field.p;
        Self {
            field,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        }
    }

    pub fn from_i64(field: PrimeField, coeffs: &[i64]) -> Self {
        let p = field.p as i64;
        Self::new(field, coeffs.iter().map(|c| c.rem_euclid(p) as u64).collect())
    }

    /// Reduction of an integer form mod `p` (may be zero).
    pub fn reduce(f: &IntForm, field: PrimeField) -> Self {
        let p = BigInt::from(field.p);
        Self::new(
            field,
            f.coeffs()
                .iter()
                .map(|c| c.mod_floor(&p).to_u64().expect("residue fits"))
                .collect(),
        )
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `f(1, t)`, ascending in `t`.
    pub fn dehomogenize(&self) -> FpPoly {
        FpPoly::new(self.field.p, self.coeffs.iter().rev().copied().collect())
    }

    /// Multiplicity of `[0:1]`: the smallest `k` with a nonzero coefficient.
    pub fn infinity_multiplicity(&self) -> usize {
        self.coeffs.iter().position(|&c| c != 0).unwrap_or(self.degree())
    }

    /// `f(a z0 + b z1, c z0 + d z1)`.
    pub fn substitute(&self, m: [u64; 4]) -> Self {
        let p = self.field.p;
        let n = self.degree();
        let lin0 = FpPoly::new(p, vec![m[1], m[0]]); // a z0 + b z1, index = power of z0
        let lin1 = FpPoly::new(p, vec![m[3], m[2]]);
        let mut pow0 = vec![FpPoly::new(p, vec![1])];
        let mut pow1 = vec![FpPoly::new(p, vec![1])];
        for k in 1..=n {
            pow0.push(pow0[k - 1].mul(&lin0));
            pow1.push(pow1[k - 1].mul(&lin1));
        }
        let mut acc = FpPoly::zero(p);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc = acc.add(&pow0[k].mul(&pow1[n - k]).scale(c));
            }
        }
        let mut coeffs = acc.coeffs().to_vec();
        coeffs.resize(n + 1, 0);
        Self::new(self.field, coeffs)
    }
}

/// Squarefreeness of the divisor over the algebraic closure.
///
/// The point `[0:1]` may occur at most once, and `f(1, t)` must be coprime
/// to its derivative. A vanishing derivative means `f(1, t)` is a `p`-th
/// power, which the gcd test rejects automatically.
pub fn is_smooth_divisor(f: &FpForm) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::ZeroForm("is_smooth_divisor"));
    }
    if f.infinity_multiplicity() > 1 {
        return Ok(false);
    }
    Ok(f.dehomogenize().is_squarefree())
}

/// Brute-force oracle: no square of a monic polynomial of degree
/// `1..=deg/2` divides `f(1, t)`.
pub fn is_smooth_divisor_naive(f: &FpForm) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::ZeroForm("is_smooth_divisor_naive"));
    }
    if f.infinity_multiplicity() > 1 {
        return Ok(false);
    }
    let p = f.field.p;
    let g = f.dehomogenize();
    let dg = g.degree().unwrap_or(0);
    for e in 1..=dg / 2 {
        let count = p.pow(e as u32);
        for idx in 0..count {
            let mut coeffs = Vec::with_capacity(e + 1);
            let mut r = idx;
            for _ in 0..e {
                coeffs.push(r % p);
                r /= p;
            }
            coeffs.push(1);
            let h = FpPoly::new(p, coeffs);
            if g.rem(&h.mul(&h)).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `zeta_{P^1 / F_p}(s)^{-1} = (1 - p^-s)(1 - p^(1-s))`.
pub fn zeta_inverse(p: u64, s: i64) -> Result<f64> {
    if s <= 1 {
        return Err(Error::ZetaPole(s));
    }
    let p = p as f64;
    Ok((1.0 - p.powi(-s as i32)) * (1.0 - p.powi(1 - s as i32)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMode {
    Exhaustive,
    Sampled,
}

impl std::fmt::Display for DensityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Sampled => "sampled",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub p: u64,
    pub n: usize,
    pub total: u64,
    pub hits: u64,
    /// `hits / total` in lowest terms.
    pub density_num: u64,
    pub density_den: u64,
    pub reference: f64,
    pub mode: DensityMode,
    pub seed: Option<u64>,
}

impl DensityReport {
    fn new(p: u64, n: usize, total: u64, hits: u64, mode: DensityMode, seed: Option<u64>) -> Result<Self> {
        let g = hits.gcd(&total).max(1);
        Ok(Self {
            p,
            n,
            total,
            hits,
            density_num: hits / g,
            density_den: total / g,
            reference: zeta_inverse(p, 2)?,
            mode,
            seed,
        })
    }

    pub fn density(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

/// Calls `visit` on every nonzero form of degree `n` over `F_p`.
pub fn for_each_nonzero_form(field: PrimeField, n: usize, mut visit: impl FnMut(&FpForm)) {
    let p = field.p;
    let mut coeffs = vec![0u64; n + 1];
    loop {
        // odometer increment
        let mut i = 0;
        loop {
            if i > n {
                return;
            }
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        visit(&FpForm {
            field,
            coeffs: coeffs.clone(),
        });
    }
}

fn exhaustive_count(p: u64, n: usize) -> Result<Option<u64>> {
    Ok((p as u128)
        .checked_pow(n as u32 + 1)
        .and_then(|c| (c <= EXHAUSTIVE_BUDGET as u128).then_some(c as u64)))
}

/// Exact density of smooth divisors among nonzero degree-`n` forms.
pub fn smooth_divisor_density(p: u64, n: usize) -> Result<DensityReport> {
    let field = PrimeField::new(p)?;
    let all = exhaustive_count(p, n)?.ok_or(Error::BudgetExceeded {
        estimate: (p as f64).powi(n as i32 + 1),
    })?;
    let mut hits = 0u64;
    let mut err = None;
    for_each_nonzero_form(field, n, |f| match is_smooth_divisor(f) {
        Ok(true) => hits += 1,
        Ok(false) => {}
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    DensityReport::new(p, n, all - 1, hits, DensityMode::Exhaustive, None)
}

/// Density estimate from `samples` uniform nonzero forms.
pub fn smooth_divisor_density_sampled(p: u64, n: usize, samples: u64, seed: u64) -> Result<DensityReport> {
    let field = PrimeField::new(p)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    let mut drawn = 0;
    while drawn < samples {
        let coeffs: Vec<u64> = (0..=n).map(|_| rng.random_range(0..p)).collect();
        let f = FpForm::new(field, coeffs);
        if f.is_zero() {
            continue;
        }
        drawn += 1;
        if is_smooth_divisor(&f)? {
            hits += 1;
        }
    }
    DensityReport::new(p, n, samples, hits, DensityMode::Sampled, Some(seed))
}

/// `p`-adic valuation of the content and the reduction of `f / p^v`.
pub fn content_and_reduction(f: &IntForm, p: u64) -> Result<(u32, FpForm)> {
    if f.is_zero() {
        return Err(Error::ZeroForm("content_and_reduction"));
    }
    let field = PrimeField::new(p)?;
    let pb = BigInt::from(p);
    let mut content = f.content();
    let mut v = 0;
    while (&content % &pb).is_zero() {
        content /= &pb;
        v += 1;
    }
    let scale = num_traits::pow(pb, v as usize);
    let g = f.map(|c| c / &scale);
    Ok((v, FpForm::reduce(&g, field)))
}
