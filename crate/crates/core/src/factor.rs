//! Factorization of integer binary forms into primitive irreducibles.
//!
//! Irreducibility is certified by intersecting the possible factor degrees
//! seen modulo many primes; when that does not settle it, candidate factors
//! are rebuilt from clusters of numerical roots and confirmed by exact
//! division.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::finite_field::primes_from;
use crate::form::IntForm;
use crate::roots::polynomial_roots;
use crate::zpoly::{self, ZPoly};

const PATTERN_PRIMES: usize = 60;
const PATTERN_STALL: usize = 12;
const SUBSET_BUDGET: usize = 200_000;
const MAX_LEAD_DIVISORS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    /// Signed content, so that `f = unit * prod factor^mult`.
    pub unit: BigInt,
    /// Primitive irreducible forms, first nonzero coefficient positive,
    /// sorted by degree then coefficients.
    pub factors: Vec<(IntForm, u32)>,
}

impl Factorization {
    pub fn expand(&self, n: usize) -> IntForm {
        let mut acc = IntForm::new(vec![self.unit.clone()]);
        for (f, m) in &self.factors {
            acc = acc.product(&f.power(*m));
        }
        assert_eq!(acc.degree(), n);
        acc
    }
}

/// Prime factorization of `|n|`, `n != 0`, ascending.
pub fn factor_integer(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut m = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    if m.is_zero() {
        return out;
    }
    let mut d = 2u64;
    while d < 10_000 {
        let db = BigInt::from(d);
        if &db * &db > m {
            break;
        }
        let mut e = 0;
        while (&m % &db).is_zero() {
            m /= &db;
            e += 1;
        }
        if e > 0 {
            out.push((db, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !m.is_one() {
        let mut big = Vec::new();
        split_large(m, &mut big);
        big.sort();
        for p in big {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

fn split_large(m: BigInt, out: &mut Vec<BigInt>) {
    if m.is_one() {
        return;
    }
    if is_probable_prime(&m) {
        out.push(m);
        return;
    }
    let mut c = BigInt::one();
    loop {
        if let Some(d) = pollard_brent(&m, &c) {
            split_large(d.clone(), out);
            split_large(&m / d, out);
            return;
        }
        c += 1;
    }
}

/// Miller–Rabin with the first twelve prime bases.
pub fn is_probable_prime(n: &BigInt) -> bool {
    let two = BigInt::from(2);
    if n < &two {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let pb = BigInt::from(p);
        if n == &pb {
            return true;
        }
        if (n % &pb).is_zero() {
            return false;
        }
    }
    let nm1: BigInt = n - 1;
    let mut d = nm1.clone();
    let mut s = 0;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigInt, c: &BigInt) -> Option<BigInt> {
    let f = |x: &BigInt| (x * x + c) % n;
    let (mut y, mut r, mut q) = (BigInt::from(2), 1u64, BigInt::one());
    let mut g = BigInt::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..(r - k).min(128) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += 128;
        }
        r *= 2;
        if r > 1 << 24 {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Factor degrees compatible with every reduction tried: the intersection
/// over primes of the subset sums of the mod-`p` factor degrees.
pub fn degree_pattern(g: &[BigInt]) -> Vec<bool> {
    let d = zpoly::degree(g).unwrap_or(0);
    let mut allowed = vec![true; d + 1];
    let mut used = 0;
    let mut stall = 0;
    for p in primes_from(3).take(20 * PATTERN_PRIMES) {
        if used >= PATTERN_PRIMES || stall >= PATTERN_STALL {
            break;
        }
        let gp = zpoly::to_fp(g, p);
        if gp.degree() != Some(d) || !gp.is_squarefree() {
            continue;
        }
        used += 1;
        let mut sums = vec![false; d + 1];
        sums[0] = true;
        for e in gp.factor_degrees() {
            for s in (e..=d).rev() {
                if sums[s - e] {
                    sums[s] = true;
                }
            }
        }
        let before = allowed.iter().filter(|&&b| b).count();
        for (a, s) in allowed.iter_mut().zip(&sums) {
            *a &= *s;
        }
        let after = allowed.iter().filter(|&&b| b).count();
        if after <= 2 {
            break;
        }
        stall = if after < before { 0 } else { stall + 1 };
    }
    allowed
}

/// Certified irreducible factors of a primitive squarefree polynomial with
/// nonzero constant term.
fn factor_squarefree(g: &[BigInt]) -> Result<Vec<ZPoly>> {
    let d = zpoly::degree(g).unwrap_or(0);
    if d <= 1 {
        return Ok(vec![g.to_vec()]);
    }
    let allowed = degree_pattern(g);
    let sizes: Vec<usize> = (1..=d / 2).filter(|&e| allowed[e]).collect();
    if sizes.is_empty() {
        return Ok(vec![g.to_vec()]);
    }
    let roots = polynomial_roots(&zpoly::to_f64_scaled(g))?;
    let units = conjugate_units(&roots);
    let leads = lead_candidates(&g[d]);
    let mut budget = SUBSET_BUDGET;
    for e in sizes {
        if let Some(h) = search_factor(g, &units, e, &leads, &mut budget)? {
            let q = zpoly::exact_div(g, &h).expect("verified factor");
            let mut out = factor_squarefree(&h)?;
            out.extend(factor_squarefree(&zpoly::primitive_part(&q))?);
            return Ok(out);
        }
    }
    Ok(vec![g.to_vec()])
}

/// Real roots and conjugate pairs, each as one unit.
fn conjugate_units(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let tol = |z: Complex64| 1e-7 * z.norm().max(1.0);
    let mut used = vec![false; roots.len()];
    let mut units = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = roots[i];
        if z.im.abs() <= tol(z) {
            units.push(vec![Complex64::new(z.re, 0.0)]);
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (roots[a] - z.conj()).norm().total_cmp(&(roots[b] - z.conj()).norm()));
        match partner {
            Some(j) => {
                used[j] = true;
                units.push(vec![z, z.conj()]);
            }
            None => units.push(vec![z]),
        }
    }
    units
}

fn lead_candidates(lc: &BigInt) -> Vec<BigInt> {
    let mut divs = vec![BigInt::one()];
    for (p, e) in factor_integer(lc) {
        let mut next = Vec::new();
        for d in &divs {
            let mut pe = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pe);
                pe *= &p;
            }
        }
        divs = next;
        divs.sort();
        divs.truncate(4 * MAX_LEAD_DIVISORS);
    }
    divs.sort();
    divs.truncate(MAX_LEAD_DIVISORS);
    divs
}

fn near_integer(x: f64) -> Option<BigInt> {
    let r = x.round();
    if (x - r).abs() <= 1e-6 * r.abs().max(1.0) {
        num_traits::FromPrimitive::from_f64(r)
    } else {
        None
    }
}

fn search_factor(
    g: &[BigInt],
    units: &[Vec<Complex64>],
    size: usize,
    leads: &[BigInt],
    budget: &mut usize,
) -> Result<Option<ZPoly>> {
    let mut chosen: Vec<usize> = Vec::new();
    let d = zpoly::degree(g).unwrap_or(0);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &[BigInt],
        units: &[Vec<Complex64>],
        start: usize,
        remaining: usize,
        chosen: &mut Vec<usize>,
        leads: &[BigInt],
        budget: &mut usize,
        d: usize,
    ) -> Result<Option<ZPoly>> {
        if remaining == 0 {
            if *budget == 0 {
                return Err(Error::FactorizationUnverified { degree: d });
            }
            *budget -= 1;
            return Ok(try_candidate(g, units, chosen, leads));
        }
        for i in start..units.len() {
            let s = units[i].len();
            if s > remaining {
                continue;
            }
            chosen.push(i);
            if let Some(h) = rec(g, units, i + 1, remaining - s, chosen, leads, budget, d)? {
                return Ok(Some(h));
            }
            chosen.pop();
        }
        Ok(None)
    }
    rec(g, units, 0, size, &mut chosen, leads, budget, d)
}

fn try_candidate(g: &[BigInt], units: &[Vec<Complex64>], chosen: &[usize], leads: &[BigInt]) -> Option<ZPoly> {
    let roots: Vec<Complex64> = chosen.iter().flat_map(|&i| units[i].iter().copied()).collect();
    let trace: f64 = roots.iter().map(|z| z.re).sum();
    // monic product, ascending
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &r in &roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        poly = next;
    }
    for lc in leads {
        let l = lc.to_f64()?;
        if near_integer(l * trace).is_none() {
            continue;
        }
        let coeffs: Option<ZPoly> = poly.iter().map(|c| near_integer(l * c.re)).collect();
        let Some(h) = coeffs else { continue };
        let h = zpoly::primitive_part(&h);
        if zpoly::exact_div(g, &h).is_some() {
            return Some(h);
        }
    }
    None
}

/// Squarefreeness of the divisor of `f` over `Q`-bar.
pub fn is_squarefree_form(f: &IntForm) -> bool {
    if f.is_zero() || f.z0_multiplicity() > 1 {
        return false;
    }
    zpoly::is_squarefree(&zpoly::trimmed(f.dehomogenize()))
}

/// Complete factorization with an exact reconstruction check.
pub fn factor_form(f: &IntForm) -> Result<Factorization> {
    if f.is_zero() {
        return Err(Error::ZeroForm("factor_form"));
    }
    let n = f.degree();
    let first = f.coeffs().iter().find(|c| !c.is_zero()).expect("nonzero");
    let content = f.content();
    let unit = if first.is_negative() { -content } else { content };
    let prim = f.map(|c| c / &unit);
    let a = prim.z0_multiplicity();
    let b = prim.z1_multiplicity();
    let mut factors: Vec<(IntForm, u32)> = Vec::new();
    if a > 0 {
        factors.push((IntForm::from_i64(&[0, 1]), a as u32));
    }
    if b > 0 {
        factors.push((IntForm::from_i64(&[1, 0]), b as u32));
    }
    let core: ZPoly = prim.coeffs()[a..=n - b].iter().rev().cloned().collect();
    if zpoly::degree(&core).unwrap_or(0) > 0 {
        let parts = if zpoly::is_squarefree(&core) {
            vec![(zpoly::primitive_part(&core), 1)]
        } else {
            zpoly::squarefree_decomposition(&core)
        };
        for (part, mult) in parts {
            for h in factor_squarefree(&part)? {
                let dh = zpoly::degree(&h).unwrap_or(0);
                factors.push((IntForm::homogenize(&h, dh).sign_normalized(), mult));
            }
        }
    }
    factors.sort_by(|(x, _), (y, _)| x.degree().cmp(&y.degree()).then_with(|| x.coeffs().cmp(y.coeffs())));
    let out = Factorization { unit, factors };
    if &out.expand(n) != f {
        return Err(Error::FactorizationUnverified { degree: n });
    }
    Ok(out)
}

/// Certificate that a primitive form is irreducible over `Q`.
pub fn is_irreducible(f: &IntForm) -> Result<bool> {
    let fac = factor_form(f)?;
    Ok(fac.unit.abs().is_one() && fac.factors.len() == 1 && fac.factors[0].1 == 1)
}
