//! Simultaneous polynomial root finding (Aberth–Ehrlich) with a
//! Newton-polygon start and a backward-residual certificate.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative residual accepted by [`certify`].
pub const ROOT_RESIDUAL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 800;

/// Roots of `sum_k c[k] t^k` (ascending, leading coefficient nonzero).
pub fn polynomial_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let cc: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    complex_polynomial_roots(&cc)
}

pub fn complex_polynomial_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    assert!(c[d].norm() != 0.0, "leading coefficient must be nonzero");
    // zero roots are split off exactly
    let zeros = c.iter().position(|x| x.norm() != 0.0).unwrap_or(0);
    let core = &c[zeros..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let e = core.len() - 1;
    if e == 1 {
        roots.push(-core[0] / core[1]);
    } else if e > 1 {
        roots.extend(aberth(core));
    }
    let residual = max_residual(c, &roots);
    if !(residual <= ROOT_RESIDUAL) {
        return Err(Error::RootsUncertified { residual });
    }
    Ok(roots)
}

/// `max_j |p(a_j)| / sum_k |c_k| |a_j|^k`, evaluated in the reversed
/// polynomial outside the unit disc.
pub fn max_residual(c: &[Complex64], roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&z| {
            let (v, s) = if z.norm() <= 1.0 {
                horner_abs(c.iter().rev(), z)
            } else {
                horner_abs(c.iter(), z.inv())
            };
            if s == 0.0 {
                0.0
            } else {
                v / s
            }
        })
        .fold(0.0, f64::max)
}

fn horner_abs<'a>(coeffs: impl Iterator<Item = &'a Complex64>, z: Complex64) -> (f64, f64) {
    let r = z.norm();
    let mut v = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    for c in coeffs {
        v = v * z + c;
        s = s * r + c.norm();
    }
    (v.norm(), s)
}

/// Newton correction `p / p'` at `z`.
fn newton_ratio(c: &[Complex64], z: Complex64) -> Complex64 {
    let d = c.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = c[d];
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..d).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
        }
        p / dp
    } else {
        // p(z) = z^d r(w), w = 1/z, r(w) = sum c_k w^(d-k)
        let w = z.inv();
        let mut r = c[0];
        let mut dr = Complex64::new(0.0, 0.0);
        for &ck in &c[1..=d] {
            dr = dr * w + r;
            r = r * w + ck;
        }
        let denom = w * (d as f64 - w * dr / r);
        denom.inv()
    }
}

fn initial_guesses(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| x.norm() != 0.0)
        .map(|(k, x)| (k, x.norm().ln()))
        .collect();
    // upper convex hull of (k, log|c_k|)
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(d);
    let tau = std::f64::consts::TAU;
    for (e, win) in hull.windows(2).enumerate() {
        let (i, li) = win[0];
        let (j, lj) = win[1];
        let m = j - i;
        let r = ((li - lj) / m as f64).exp();
        for s in 0..m {
            let ang = tau * s as f64 / m as f64 + 0.7 + 0.37 * e as f64;
            out.push(Complex64::from_polar(r, ang));
        }
    }
    out
}

fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let mut z = initial_guesses(c);
    let d = z.len();
    let mut done = vec![false; d];
    for _ in 0..MAX_ITERATIONS {
        let mut all = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let n = newton_ratio(c, z[i]);
            if !n.re.is_finite() || !n.im.is_finite() {
                done[i] = true;
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = n / (Complex64::new(1.0, 0.0) - n * s);
            z[i] -= w;
            if w.norm() <= 1e-15 * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    // a few plain Newton steps
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let n = newton_ratio(c, *zi);
            if n.re.is_finite() && n.im.is_finite() {
                *zi -= n;
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn quadratic_roots() {
        let r = sorted(polynomial_roots(&[1.0, 0.0, 1.0]).unwrap());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn wide_dynamic_range() {
        // (t - 1e-6)(t - 1)(t - 1e6)
        let c = [-1.0, 1e6 + 1.0 + 1e-6, -(1e6 + 1.0 + 1e-6), 1.0];
        let r = sorted(polynomial_roots(&c).unwrap());
        assert!((r[0].re - 1e-6).abs() < 1e-15);
        assert!((r[1].re - 1.0).abs() < 1e-12);
        assert!((r[2].re - 1e6).abs() < 1e-6);
    }

    #[test]
    fn cyclotomic_degree_forty() {
        let mut c = vec![0.0; 41];
        c[0] = -1.0;
        c[40] = 1.0;
        let r = polynomial_roots(&c).unwrap();
        assert_eq!(r.len(), 40);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.powu(40) - 1.0).norm() < 1e-10);
        }
    }
}
