//! The lattice of integral sections of `O(n)` under a metric sup-norm:
//! rounding, successive minima and exhaustive ball counting.
//!
//! Enumeration is exhaustive by construction. For each latitude `u0` the
//! circle average of `|f|^2 / |z|^(2n)` equals `sum_k |c_k|^2 (1-u0)^k u0^(n-k)`
//! and is bounded by the squared sup-norm, so every latitude gives an
//! ellipsoid containing the ball. A depth-first search over coefficients
//! keeps the remaining capacity of each ellipsoid and only the surviving
//! leaves are tested against the actual sup-norm.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_field::{FpForm, PrimeField};
use crate::form::{IntForm, RealForm};
use crate::projective::{
    metric_phis, monomial_sup_norm, refine_sup, AsSection, MetricData, QuadratureGrid, SectionEval,
};

pub const COARSE_GRID_SIZE: usize = 4096;
pub const MAX_EXHAUSTIVE_DEGREE: usize = 8;
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;
/// Relative slack of the leaf test `sup <= R (1 + LEAF_SLACK)`.
pub const LEAF_SLACK: f64 = 1e-9;

pub struct SectionLattice {
    degree: usize,
    metric: MetricData,
    grid: QuadratureGrid,
    monomial_sups: Vec<f64>,
    /// Row-major `grid.len() x (n+1)` table of metric-weighted monomials,
    /// rows in `order` so that early rows are spread over the sphere.
    table: Vec<Complex64>,
    order: Vec<usize>,
    /// Grid maxima below `limit * accept` are certified without polishing.
    accept: f64,
}

/// Conservative covering radius of the Fibonacci grid, `C / sqrt(N)`
/// (measured about 3.44 / sqrt(N), padded by 25%).
/// Grid rows used to bound the last coefficient during enumeration.
const PROBE_ROWS: usize = 256;

const COVERING_CONSTANT: f64 = 4.3;

impl fmt::Debug for SectionLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SectionLattice")
            .field("degree", &self.degree)
            .field("metric", &self.metric)
            .field("grid", &self.grid.len())
            .finish()
    }
}

impl SectionLattice {
    pub fn new(degree: usize, metric: MetricData) -> Result<Self> {
        Self::with_grid(degree, metric, COARSE_GRID_SIZE)
    }

    pub fn with_grid(degree: usize, metric: MetricData, grid_size: usize) -> Result<Self> {
        let grid = QuadratureGrid::fibonacci(grid_size)?;
        let n = degree;
        let monomial_sups = (0..=n).map(|k| monomial_sup_norm(n, k, &metric, &grid)).collect();
        let phis = metric_phis(&metric, &grid);
        let len = grid.len();
        let step = stride(len);
        let order: Vec<usize> = (0..len).map(|i| (i * step) % len).collect();
        let mut table = Vec::with_capacity(len * (n + 1));
        for &i in &order {
            let p = &grid.points()[i];
            let w = (-(n as f64) * (0.5 * phis[i] + metric.twist())).exp();
            let (z0, z1) = (p.z0(), p.z1());
            for k in 0..=n {
                table.push(z0.powu(k as u32) * z1.powu((n - k) as u32) * w);
            }
        }
        // |s|^2 / |z|^(2n) restricted to a great circle is a trigonometric
        // polynomial of degree n, so its maximum is at most the value at
        // distance r divided by cos(n r).
        let r = COVERING_CONSTANT / (len as f64).sqrt();
        let accept = if metric.is_unperturbed() && (n as f64) * r < 1.2 {
            ((n as f64) * r).cos().sqrt()
        } else {
            0.0
        };
        Ok(Self {
            degree,
            metric,
            grid,
            monomial_sups,
            table,
            order,
            accept,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.degree + 1
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// `|| z0^k z1^(n-k) ||_inf` for every `k`.
    pub fn monomial_sups(&self) -> &[f64] {
        &self.monomial_sups
    }

    pub fn sup_norm<F: AsSection + ?Sized>(&self, f: &F) -> Result<f64> {
        let e = f.section_eval();
        if e.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: e.degree(),
                right: self.degree,
            });
        }
        crate::projective::sup_norm(&e, &self.metric, &self.grid)
    }

    /// Sup-norm of real coefficients, or `None` as soon as some grid value
    /// exceeds `limit`. Without `precise`, maxima well inside the ball are
    /// returned as the grid maximum (a lower estimate).
    fn bounded_sup(&self, c: &[f64], limit: f64, precise: bool) -> Option<f64> {
        let m = self.degree + 1;
        let mut vals = Vec::with_capacity(self.grid.len());
        let mut gmax = 0.0f64;
        for row in self.table.chunks_exact(m) {
            let (mut re, mut im) = (0.0, 0.0);
            for (b, &x) in row.iter().zip(c) {
                re += b.re * x;
                im += b.im * x;
            }
            let a = (re * re + im * im).sqrt();
            if a > limit {
                return None;
            }
            gmax = gmax.max(a);
            vals.push(a);
        }
        if gmax == 0.0 {
            return Some(0.0);
        }
        if !precise && gmax <= limit * self.accept {
            return Some(gmax);
        }
        let mut logs = vec![f64::NEG_INFINITY; vals.len()];
        for (&i, a) in self.order.iter().zip(&vals) {
            if *a > 0.0 {
                logs[i] = a.ln();
            }
        }
        let e = SectionEval::new(c.iter().map(|&x| Complex64::new(x, 0.0)).collect(), 0.0);
        let (l, _) = refine_sup(&e, &self.metric, &self.grid, &logs);
        let s = l.exp().max(gmax);
        (s <= limit).then_some(s)
    }

    /// Values `t` of the last coefficient delta with `|sum + t b_i| <= limit`
    /// at the first `PROBE_ROWS` grid rows, given the other deltas.
    fn last_coefficient_interval(&self, delta: &[f64], limit: f64) -> Option<(f64, f64)> {
        let m = self.degree + 1;
        let l2 = limit * limit * (1.0 + 1e-9);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for row in self.table.chunks_exact(m).take(PROBE_ROWS) {
            let (mut re, mut im) = (0.0, 0.0);
            for (b, &x) in row[..m - 1].iter().zip(delta) {
                re += b.re * x;
                im += b.im * x;
            }
            let bl = row[m - 1];
            let bb = bl.norm_sqr();
            let aa = re * re + im * im;
            if bb < 1e-300 {
                if aa > l2 {
                    return None;
                }
                continue;
            }
            let ab = re * bl.re + im * bl.im;
            let disc = ab * ab - bb * (aa - l2);
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let pad = 1e-9 * (sq.abs() + ab.abs()) / bb + 1e-12;
            lo = lo.max((-ab - sq) / bb - pad);
            hi = hi.min((-ab + sq) / bb + pad);
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    fn precise_sup(&self, c: &[i64]) -> f64 {
        let d: Vec<f64> = c.iter().map(|&x| x as f64).collect();
        self.bounded_sup(&d, f64::INFINITY, true).expect("no limit")
    }

    /// Per-coefficient box `|delta_k| <= R e^(twist n) e^(n max phi / 2) / ||m_k||_FS`.
    pub fn coefficient_box(&self, radius: f64) -> Vec<f64> {
        let n = self.degree;
        let scale = radius * ((self.metric.twist() + 0.5 * self.metric.phi_global_bound()) * n as f64).exp();
        (0..=n)
            .map(|k| scale / crate::projective::fs_monomial_sup(n, k))
            .collect()
    }
}

/// Calls `visit(coeffs, norm)` for every integer form with
/// `|| f - center || <= radius`; returns the number of such forms.
/// Without `precise` the reported norm may be a grid lower estimate for
/// points that are certified to lie inside the ball.
pub fn enumerate_ball(
    lat: &SectionLattice,
    center: &RealForm,
    radius: f64,
    budget: u64,
    precise: bool,
    mut visit: impl FnMut(&[i64], f64),
) -> Result<u64> {
    let n = lat.degree;
    if center.degree() != n {
        return Err(Error::DegreeMismatch {
            left: center.degree(),
            right: n,
        });
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} must be finite and >= 0"
        )));
    }
    let boxb = lat.coefficient_box(radius);
    // latitudes k/n and midpoints
    let lats: Vec<f64> = (0..=2 * n).map(|j| j as f64 / (2 * n).max(1) as f64).collect();
    let m = &lat.metric;
    let caps: Vec<f64> = lats
        .iter()
        .map(|&u| {
            let r = radius * ((m.twist() + 0.5 * m.phi_latitude_bound(u)) * n as f64).exp();
            r * r * (1.0 + 1e-9) + 1e-12
        })
        .collect();
    let w: Vec<Vec<f64>> = lats
        .iter()
        .map(|&u| {
            (0..=n)
                .map(|k| (1.0 - u).powi(k as i32) * u.powi((n - k) as i32))
                .collect()
        })
        .collect();
    let estimate: f64 = boxb.iter().map(|b| 2.0 * b + 1.0).product();
    let center_c = center.coeffs().to_vec();
    let limit = radius * (1.0 + LEAF_SLACK);
    let mut used = vec![0.0; lats.len()];
    let mut cur = vec![0i64; n + 1];
    let mut delta = vec![0.0; n + 1];
    let mut nodes = 0u64;
    let mut count = 0u64;

    struct Ctx<'a> {
        lat: &'a SectionLattice,
        boxb: &'a [f64],
        caps: &'a [f64],
        w: &'a [Vec<f64>],
        center: &'a [f64],
        limit: f64,
        budget: u64,
        estimate: f64,
        precise: bool,
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        ctx: &Ctx,
        k: usize,
        used: &mut [f64],
        cur: &mut [i64],
        delta: &mut [f64],
        nodes: &mut u64,
        count: &mut u64,
        visit: &mut dyn FnMut(&[i64], f64),
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > ctx.budget {
            return Err(Error::BudgetExceeded { estimate: ctx.estimate });
        }
        let n1 = cur.len();
        if k == n1 {
            if let Some(s) = ctx.lat.bounded_sup(delta, ctx.limit, ctx.precise) {
                *count += 1;
                visit(cur, s);
            }
            return Ok(());
        }
        let mut b = ctx.boxb[k];
        for (j, wj) in ctx.w.iter().enumerate() {
            if wj[k] > 0.0 {
                let rem = (ctx.caps[j] - used[j]).max(0.0);
                b = b.min((rem / wj[k]).sqrt());
            }
        }
        b += 1e-9 * b.max(1.0);
        let c = ctx.center[k];
        let (mut tlo, mut thi) = (-b, b);
        if k + 1 == n1 {
            // the last coefficient enters each point value affinely
            match ctx.lat.last_coefficient_interval(delta, ctx.limit) {
                Some((a, z)) => {
                    tlo = tlo.max(a);
                    thi = thi.min(z);
                }
                None => return Ok(()),
            }
        }
        let lo = (c + tlo).ceil() as i64;
        let hi = (c + thi).floor() as i64;
        for v in lo..=hi {
            let d = v as f64 - c;
            cur[k] = v;
            delta[k] = d;
            for (j, wj) in ctx.w.iter().enumerate() {
                used[j] += d * d * wj[k];
            }
            let r = rec(ctx, k + 1, used, cur, delta, nodes, count, visit);
            for (j, wj) in ctx.w.iter().enumerate() {
                used[j] -= d * d * wj[k];
            }
            r?;
        }
        delta[k] = 0.0;
        Ok(())
    }

    let ctx = Ctx {
        lat,
        boxb: &boxb,
        caps: &caps,
        w: &w,
        center: &center_c,
        limit,
        budget,
        estimate,
        precise,
    };
    rec(
        &ctx, 0, &mut used, &mut cur, &mut delta, &mut nodes, &mut count, &mut visit,
    )?;
    Ok(count)
}

/// Multiplier coprime to `len` near `len / golden ratio`.
fn stride(len: usize) -> usize {
    let mut s = ((len as f64) * 0.618_033_988_7) as usize | 1;
    while num_integer::gcd(s, len) != 1 {
        s += 2;
    }
    s.max(1)
}

fn check_exhaustive(lat: &SectionLattice) -> Result<()> {
    if lat.degree > MAX_EXHAUSTIVE_DEGREE {
        return Err(Error::DimensionTooLarge(lat.degree));
    }
    Ok(())
}

/// Ball points sorted by `(norm, coefficients)`.
pub fn ball_points(lat: &SectionLattice, center: &RealForm, radius: f64) -> Result<Vec<(IntForm, f64)>> {
    check_exhaustive(lat)?;
    let mut pts: Vec<(Vec<i64>, f64)> = Vec::new();
    enumerate_ball(lat, center, radius, DEFAULT_NODE_BUDGET, true, |c, s| {
        pts.push((c.to_vec(), s))
    })?;
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(pts.into_iter().map(|(c, s)| (IntForm::from_i64(&c), s)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallCount {
    pub center: Vec<f64>,
    pub radius: f64,
    pub count: u64,
    pub enumerated: bool,
}

pub fn ball_count(lat: &SectionLattice, center: &RealForm, radius: f64) -> Result<BallCount> {
    check_exhaustive(lat)?;
    let count = enumerate_ball(lat, center, radius, DEFAULT_NODE_BUDGET, false, |_, _| {})?;
    Ok(BallCount {
        center: center.coeffs().to_vec(),
        radius,
        count,
        enumerated: true,
    })
}

/// `(count(radius + delta) - count(radius)) / count(radius)`.
pub fn ball_growth_ratio(lat: &SectionLattice, center: &RealForm, radius: f64, delta: f64) -> Result<f64> {
    let a = ball_count(lat, center, radius)?.count;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let b = ball_count(lat, center, radius + delta)?.count;
    if a == 0 {
        return Err(Error::InvalidArgument("empty inner ball".into()));
    }
    Ok((b as f64 - a as f64) / a as f64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `f(x0, x1) = 0`.
    VanishAt(i64, i64),
    /// `f in p * lattice`.
    DivisibleBy(u64),
}

impl Constraint {
    pub fn holds(&self, c: &[i64]) -> bool {
        match *self {
            Constraint::VanishAt(a, b) => {
                let f = IntForm::from_i64(c);
                f.eval(&BigInt::from(a), &BigInt::from(b)).is_zero()
            }
            Constraint::DivisibleBy(p) => c.iter().all(|&x| x.rem_euclid(p as i64) == 0),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::VanishAt(a, b) => write!(f, "vanish[{a}:{b}]"),
            Constraint::DivisibleBy(p) => write!(f, "divisible{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelDensity {
    pub hits: u64,
    pub total: u64,
    pub density: f64,
}

pub fn restriction_kernel_density(
    lat: &SectionLattice,
    constraint: &Constraint,
    center: &RealForm,
    radius: f64,
) -> Result<KernelDensity> {
    check_exhaustive(lat)?;
    let mut hits = 0;
    let total = enumerate_ball(lat, center, radius, DEFAULT_NODE_BUDGET, false, |c, _| {
        if constraint.holds(c) {
            hits += 1;
        }
    })?;
    Ok(KernelDensity {
        hits,
        total,
        density: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
    })
}

/// `(upstairs, downstairs)`: the predicate's frequency on reductions of ball
/// points, and on all `p^(n+1)` forms over `F_p` (zero included).
pub fn density_transfer_check(
    lat: &SectionLattice,
    p: u64,
    predicate: impl Fn(&FpForm) -> bool,
    center: &RealForm,
    radius: f64,
) -> Result<(f64, f64)> {
    check_exhaustive(lat)?;
    let field = PrimeField::new(p)?;
    let mut up_hits = 0u64;
    let total = enumerate_ball(lat, center, radius, DEFAULT_NODE_BUDGET, false, |c, _| {
        if predicate(&FpForm::from_i64(field, c)) {
            up_hits += 1;
        }
    })?;
    let n = lat.degree;
    let mut down_hits = u64::from(predicate(&FpForm::new(field, vec![0; n + 1])));
    let mut down_total = 1u64;
    crate::finite_field::for_each_nonzero_form(field, n, |f| {
        down_total += 1;
        if predicate(f) {
            down_hits += 1;
        }
    });
    let up = if total == 0 { 0.0 } else { up_hits as f64 / total as f64 };
    Ok((up, down_hits as f64 / down_total as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallSections {
    pub n: usize,
    pub count: u64,
    /// `log count`, the zero section included.
    pub h0: f64,
}

/// Integer forms with sup-norm at most one.
pub fn count_small_sections(lat: &SectionLattice) -> Result<SmallSections> {
    let center = RealForm::zero(lat.degree);
    let count = ball_count(lat, &center, 1.0)?.count;
    Ok(SmallSections {
        n: lat.degree,
        count,
        h0: (count as f64).ln(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumePoint {
    pub n: usize,
    pub count: u64,
    pub h0: f64,
    /// `h0 / (n^2 / 2)`.
    pub normalized: f64,
}

pub fn volume_estimate(m: &MetricData, n_list: &[usize]) -> Result<Vec<VolumePoint>> {
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidArgument("volume normalization needs n >= 1".into()));
            }
            let lat = SectionLattice::new(n, m.clone())?;
            let s = count_small_sections(&lat)?;
            Ok(VolumePoint {
                n,
                count: s.count,
                h0: s.h0,
                normalized: s.h0 / (n as f64 * n as f64 / 2.0),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MinimaMode {
    Exhaustive,
    Reduction,
}

#[derive(Clone, Debug, PartialEq)]
struct Candidate {
    norm: f64,
    coeffs: Vec<i64>,
    precise: bool,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.norm
            .total_cmp(&other.norm)
            .then_with(|| self.coeffs.cmp(&other.coeffs))
            .then_with(|| self.precise.cmp(&other.precise))
    }
}

/// Exact integer echelon form used for rank tests.
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[i64]) -> Vec<i128> {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (p, row) in &self.rows {
            if v[*p] != 0 {
                let (a, b) = (row[*p], v[*p]);
                for (x, r) in v.iter_mut().zip(row) {
                    *x = *x * a - r * b;
                }
                normalize(&mut v);
            }
        }
        v
    }

    fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Inserts `v` when it is independent of the current rows.
    fn insert(&mut self, v: &[i64]) -> bool {
        let v = self.reduce(v);
        match v.iter().position(|&x| x != 0) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

fn normalize(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
}

/// The `n + 1` successive minima (exhaustive) or upper bounds from a
/// pairwise-reduced basis (reduction). Nondecreasing.
pub fn successive_minima_estimate(lat: &SectionLattice, mode: MinimaMode) -> Result<Vec<f64>> {
    let n = lat.degree;
    match mode {
        MinimaMode::Exhaustive => {
            check_exhaustive(lat)?;
            // the monomials are a basis, so the largest monomial norm bounds
            // every minimum
            let radius = lat.monomial_sups.iter().cloned().fold(0.0, f64::max);
            let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
            enumerate_ball(lat, &RealForm::zero(n), radius, DEFAULT_NODE_BUDGET, false, |c, s| {
                if c.iter().any(|&x| x != 0) {
                    heap.push(Reverse(Candidate {
                        norm: s,
                        coeffs: c.to_vec(),
                        precise: false,
                    }));
                }
            })?;
            // lazily polish lower estimates, skipping vectors already spanned
            let mut ech = Echelon::new();
            let mut out = Vec::with_capacity(n + 1);
            while let Some(Reverse(mut cand)) = heap.pop() {
                if ech.contains(&cand.coeffs) {
                    continue;
                }
                if !cand.precise {
                    cand.norm = cand.norm.max(lat.precise_sup(&cand.coeffs));
                    cand.precise = true;
                    heap.push(Reverse(cand));
                    continue;
                }
                ech.insert(&cand.coeffs);
                out.push(cand.norm);
                if ech.rank() == n + 1 {
                    break;
                }
            }
            debug_assert_eq!(out.len(), n + 1);
            Ok(out)
        }
        MinimaMode::Reduction => {
            let mut basis: Vec<Vec<i64>> = (0..=n)
                .map(|k| {
                    let mut v = vec![0; n + 1];
                    v[k] = 1;
                    v
                })
                .collect();
            let norm = |v: &[i64]| -> Result<f64> { lat.sup_norm(&IntForm::from_i64(v)) };
            let mut norms: Vec<f64> = basis.iter().map(|v| norm(v)).collect::<Result<_>>()?;
            let mut improved = true;
            let mut rounds = 0;
            while improved && rounds < 50 {
                improved = false;
                rounds += 1;
                for i in 0..=n {
                    for j in 0..=n {
                        if i == j {
                            continue;
                        }
                        for sign in [1i64, -1] {
                            let cand: Vec<i64> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + sign * b).collect();
                            let s = norm(&cand)?;
                            if s < norms[i] * (1.0 - 1e-12) {
                                basis[i] = cand;
                                norms[i] = s;
                                improved = true;
                            }
                        }
                    }
                }
            }
            norms.sort_by(f64::total_cmp);
            Ok(norms)
        }
    }
}

/// Nearest integer with halves rounded toward zero.
pub fn round_coefficient(x: f64) -> BigInt {
    let t = x.trunc();
    let r = if (x - t).abs() == 0.5 { t } else { x.round() };
    BigInt::from_f64(r).unwrap_or_default()
}

/// `(1/2) sum_k ||z0^k z1^(n-k)||_inf`.
pub fn rounding_bound(lat: &SectionLattice) -> f64 {
    0.5 * lat.monomial_sups.iter().sum::<f64>()
}

/// Coefficientwise rounding and the achieved distance `||s - s'||_inf`.
pub fn round_to_integral(s: &RealForm, lat: &SectionLattice) -> Result<(IntForm, f64)> {
    if s.degree() != lat.degree {
        return Err(Error::DegreeMismatch {
            left: s.degree(),
            right: lat.degree,
        });
    }
    let r = s.map(|&x| round_coefficient(x));
    let diff: RealForm = RealForm::new(
        s.coeffs()
            .iter()
            .zip(r.coeffs())
            .map(|(x, y)| x - y.to_f64().unwrap_or(0.0))
            .collect(),
    );
    let d = if diff.is_zero() { 0.0 } else { lat.sup_norm(&diff)? };
    Ok((r, d))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledDensity {
    pub samples: u64,
    pub accepted: u64,
    pub hits: u64,
    pub density: f64,
    /// Binomial 95% half-width.
    pub ci_halfwidth: f64,
    pub seed: u64,
}

/// Rejection sampling inside the coefficient box, for degrees past
/// exhaustion.
pub fn sampled_kernel_density(
    lat: &SectionLattice,
    constraint: &Constraint,
    center: &RealForm,
    radius: f64,
    samples: u64,
    seed: u64,
) -> Result<SampledDensity> {
    let boxb = lat.coefficient_box(radius);
    let c = center.coeffs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = radius * (1.0 + LEAF_SLACK);
    let (mut accepted, mut hits) = (0u64, 0u64);
    let mut v = vec![0i64; lat.degree + 1];
    let mut d = vec![0.0; lat.degree + 1];
    for _ in 0..samples {
        for k in 0..=lat.degree {
            let lo = (c[k] - boxb[k]).ceil() as i64;
            let hi = (c[k] + boxb[k]).floor() as i64;
            v[k] = rng.random_range(lo..=hi);
            d[k] = v[k] as f64 - c[k];
        }
        if lat.bounded_sup(&d, limit, false).is_some() {
            accepted += 1;
            if constraint.holds(&v) {
                hits += 1;
            }
        }
    }
    let density = if accepted == 0 {
        0.0
    } else {
        hits as f64 / accepted as f64
    };
    let ci = if accepted == 0 {
        1.0
    } else {
        1.96 * (density * (1.0 - density) / accepted as f64).sqrt()
    };
    Ok(SampledDensity {
        samples,
        accepted,
        hits,
        density,
        ci_halfwidth: ci,
        seed,
    })
}
