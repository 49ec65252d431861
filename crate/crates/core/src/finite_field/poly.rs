//! Dense univariate polynomials over a prime field, ascending powers.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut out = Self {
            p,
            c: coeffs.into_iter().map(|x| x % p).collect(),
        };
        out.trim();
        out
    }

    pub fn from_i64(p: u64, coeffs: &[i64]) -> Self {
        Self::new(p, coeffs.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
    }

    pub fn zero(p: u64) -> Self {
        Self { p, c: Vec::new() }
    }

    pub fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        *self.c.last().unwrap_or(&0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = o.c.get(i).copied().unwrap_or(0);
                (a + b) % self.p
            })
            .collect();
        Self::new(self.p, v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = o.c.get(i).copied().unwrap_or(0);
                (a + self.p - b) % self.p
            })
            .collect();
        Self::new(self.p, v)
    }

    pub fn scale(&self, k: u64) -> Self {
        Self::new(self.p, self.c.iter().map(|&a| mulmod(a, k, self.p)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let p = self.p;
        let mut acc = vec![0u128; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                acc[i + j] += a as u128 * b as u128;
            }
            // keep headroom: reduce every row
            if i % 64 == 63 {
                for x in acc.iter_mut() {
                    *x %= p as u128;
                }
            }
        }
        Self::new(p, acc.into_iter().map(|x| (x % p as u128) as u64).collect())
    }

    /// `(quotient, remainder)`; panics on division by zero.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let p = self.p;
        let inv = inv_mod(d.lead(), p);
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Self::zero(p), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let coef = mulmod(r[i], inv, p);
            if coef == 0 {
                continue;
            }
            q[i - dd] = coef;
            for (j, &b) in d.c.iter().enumerate() {
                let idx = i - dd + j;
                r[idx] = (r[idx] + p - mulmod(coef, b, p)) % p;
            }
        }
        r.truncate(dd);
        (Self::new(p, q), Self::new(p, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.lead(), self.p))
    }

    /// Monic gcd (zero when both inputs vanish).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let p = self.p;
        Self::new(
            p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &a)| mulmod(a, i as u64 % p, p))
                .collect(),
        )
    }

    /// `base^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Self {
        let mut result = Self::new(self.p, vec![1]).rem(m);
        let mut b = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&b).rem(m);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b).rem(m);
            }
        }
        result
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c
            .iter()
            .rev()
            .fold(0, |acc, &a| (mulmod(acc, x, self.p) + a) % self.p)
    }

    /// Squarefree over the algebraic closure (nonzero input).
    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None => false,
            Some(0) => true,
            Some(_) => self.gcd(&self.derivative()).degree() == Some(0),
        }
    }

    /// Degrees of the irreducible factors of a squarefree polynomial, by
    /// distinct-degree factorization with a precomputed Frobenius matrix.
    pub fn factor_degrees(&self) -> Vec<usize> {
        let f = self.monic();
        let d = match f.degree() {
            None | Some(0) => return Vec::new(),
            Some(d) => d,
        };
        let p = self.p;
        let x = Self::x(p);
        let xp = x.pow_mod(p, &f);
        let mut rows: Vec<Self> = Vec::with_capacity(d);
        rows.push(Self::new(p, vec![1]));
        for i in 1..d {
            rows.push(rows[i - 1].mul(&xp).rem(&f));
        }
        let frob = |h: &Self| -> Self {
            let mut acc = vec![0u128; d];
            for (j, &hj) in h.c.iter().enumerate() {
                if hj == 0 {
                    continue;
                }
                for (k, &r) in rows[j].c.iter().enumerate() {
                    acc[k] += hj as u128 * r as u128;
                }
                if j % 64 == 63 {
                    for a in acc.iter_mut() {
                        *a %= p as u128;
                    }
                }
            }
            Self::new(p, acc.into_iter().map(|a| (a % p as u128) as u64).collect())
        };
        let mut out = Vec::new();
        let mut rest = f.clone();
        let mut h = x.rem(&f);
        let mut i = 1;
        while let Some(rd) = rest.degree() {
            if 2 * i > rd {
                if rd > 0 {
                    out.push(rd);
                }
                break;
            }
            h = frob(&h);
            let g = rest.gcd(&h.sub(&x));
            let gd = g.degree().unwrap_or(0);
            if gd > 0 {
                out.extend(std::iter::repeat_n(i, gd / i));
                rest = rest.divrem(&g).0;
            }
            i += 1;
        }
        out
    }
}
