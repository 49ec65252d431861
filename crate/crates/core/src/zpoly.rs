//! Univariate integer polynomials, ascending powers, used by the
//! factorization and squarefreeness routines.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::finite_field::FpPoly;

pub type ZPoly = Vec<BigInt>;

pub fn trim(a: &mut ZPoly) {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
}

pub fn trimmed(mut a: ZPoly) -> ZPoly {
    trim(&mut a);
    a
}

/// `None` for the zero polynomial.
pub fn degree(a: &[BigInt]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

pub fn derivative(a: &[BigInt]) -> ZPoly {
    trimmed(a.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
}

pub fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Divides by the content and makes the leading coefficient positive.
pub fn primitive_part(a: &[BigInt]) -> ZPoly {
    let mut a = trimmed(a.to_vec());
    let c = content(&a);
    if c.is_zero() {
        return a;
    }
    let c = if a.last().is_some_and(Signed::is_negative) {
        -c
    } else {
        c
    };
    for x in a.iter_mut() {
        *x = &*x / &c;
    }
    a
}

pub fn sub(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let n = a.len().max(b.len());
    trimmed(
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_default();
                let y = b.get(i).cloned().unwrap_or_default();
                x - y
            })
            .collect(),
    )
}

pub fn mul(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trimmed(out)
}

/// Exact quotient `a / b` in `Z[t]`, or `None` if `b` does not divide `a`.
pub fn exact_div(a: &[BigInt], b: &[BigInt]) -> Option<ZPoly> {
    let db = degree(b)?;
    let mut r = trimmed(a.to_vec());
    let Some(da) = degree(&r) else {
        return Some(Vec::new());
    };
    if da < db {
        return None;
    }
    let lb = &b[db];
    let mut q = vec![BigInt::zero(); da - db + 1];
    for i in (db..=da).rev() {
        if r[i].is_zero() {
            continue;
        }
        let (coef, rem) = r[i].div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i - db + j] -= &coef * bj;
        }
        q[i - db] = coef;
    }
    if r.iter().any(|c| !c.is_zero()) {
        return None;
    }
    Some(trimmed(q))
}

/// Pseudo-remainder `lc(b)^(da-db+1) a mod b`.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let db = degree(b).expect("nonzero divisor");
    let lb = b[db].clone();
    let mut r = trimmed(a.to_vec());
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        for x in r.iter_mut() {
            *x *= &lb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[dr - db + j] -= &lr * bj;
        }
        trim(&mut r);
    }
    r
}

/// Primitive gcd with positive leading coefficient (primitive PRS).
pub fn gcd(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let mut x = primitive_part(a);
    let mut y = primitive_part(b);
    if degree(&x) < degree(&y) {
        std::mem::swap(&mut x, &mut y);
    }
    while degree(&y).is_some() {
        let r = pseudo_rem(&x, &y);
        x = y;
        y = primitive_part(&r);
    }
    x
}

/// Yun's squarefree decomposition of a primitive polynomial:
/// `a = +-prod a_i^i` with each `a_i` primitive and squarefree.
pub fn squarefree_decomposition(a: &[BigInt]) -> Vec<(ZPoly, u32)> {
    let a = primitive_part(a);
    if degree(&a).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let da = derivative(&a);
    let g = gcd(&a, &da);
    let mut b = exact_div(&a, &g).expect("gcd divides");
    let c = exact_div(&da, &g).expect("gcd divides derivative");
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while degree(&b).unwrap_or(0) > 0 {
        let ai = if degree(&d).is_none() { b.clone() } else { gcd(&b, &d) };
        b = exact_div(&b, &ai).expect("factor divides");
        if degree(&ai).unwrap_or(0) > 0 {
            out.push((ai.clone(), i));
        }
        if degree(&b).unwrap_or(0) == 0 {
            break;
        }
        let c = exact_div(&d, &ai).expect("factor divides");
        d = sub(&c, &derivative(&b));
        i += 1;
    }
    out
}

pub fn to_fp(a: &[BigInt], p: u64) -> FpPoly {
    let pb = BigInt::from(p);
    FpPoly::new(
        p,
        a.iter()
            .map(|c| c.mod_floor(&pb).to_u64().expect("residue fits"))
            .collect(),
    )
}

/// f64 coefficients scaled by a common power of two so the largest fits.
pub fn to_f64_scaled(a: &[BigInt]) -> Vec<f64> {
    let bits = a.iter().map(|c| c.bits()).max().unwrap_or(0);
    let shift = bits.saturating_sub(960) as usize;
    a.iter()
        .map(|c| {
            if shift > 0 {
                (c >> shift).to_f64().unwrap_or(0.0)
            } else {
                c.to_f64().unwrap_or(0.0)
            }
        })
        .collect()
}

/// Squarefree over `Q`: first by reduction modulo small primes not dividing
/// the leading coefficient, then by an exact gcd.
pub fn is_squarefree(a: &[BigInt]) -> bool {
    let a = trimmed(a.to_vec());
    let Some(d) = degree(&a) else {
        return false;
    };
    if d == 0 {
        return true;
    }
    for p in crate::finite_field::primes_from(3).take(12) {
        let ap = to_fp(&a, p);
        if ap.degree() == Some(d) && ap.is_squarefree() {
            return true;
        }
    }
    degree(&gcd(&a, &derivative(&a))) == Some(0)
}

pub fn one() -> ZPoly {
    vec![BigInt::one()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> ZPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn exact_division() {
        let a = mul(&z(&[1, 1]), &z(&[-2, 0, 3]));
        assert_eq!(exact_div(&a, &z(&[1, 1])), Some(z(&[-2, 0, 3])));
        assert_eq!(exact_div(&a, &z(&[1, 2])), None);
    }

    #[test]
    fn gcd_of_products() {
        let f = z(&[1, 1]);
        let a = mul(&f, &z(&[3, 0, 1]));
        let b = mul(&f, &z(&[-5, 2]));
        assert_eq!(gcd(&a, &b), f);
    }

    #[test]
    fn yun_splits_multiplicities() {
        // (t + 1) (t - 2)^2 (t^2 + 1)^3
        let a = mul(
            &mul(&z(&[1, 1]), &mul(&z(&[-2, 1]), &z(&[-2, 1]))),
            &mul(&z(&[1, 0, 1]), &mul(&z(&[1, 0, 1]), &z(&[1, 0, 1]))),
        );
        let dec = squarefree_decomposition(&a);
        assert_eq!(dec, vec![(z(&[1, 1]), 1), (z(&[-2, 1]), 2), (z(&[1, 0, 1]), 3)]);
        assert!(!is_squarefree(&a));
        assert!(is_squarefree(&z(&[1, 0, 1])));
    }
}
