//! End-to-end compositions: good-section search around rounded stage
//! sections, minimum-height points of divisors, and the essential-minimum
//! experiment that compares divisor heights with an intersection number.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::arakelov::{
    decompose_divisor, height_of_point, intersection_via_section, vertical_prime_check, ArithmeticDivisor, ClosedPoint,
    HermitianBundle, VerticalPrimeCheck,
};
use crate::bergman::{demailly_schedule, real_section, DemaillyStage, ScheduleConfig};
use crate::error::{Error, Result};
use crate::factor::is_squarefree_form;
use crate::form::{IntForm, RealForm};
use crate::lattice::{ball_points, round_to_integral, SectionLattice, MAX_EXHAUSTIVE_DEGREE};
use crate::projective::{AsSection, QuadratureGrid};

/// Heights closer than this are ties.
pub const HEIGHT_TIE: f64 = 1e-12;

#[derive(Clone, Debug, Default)]
pub struct GoodSectionCriteria {
    /// Closed points the divisor must avoid.
    pub avoid_set: Vec<ClosedPoint>,
    pub require_generically_smooth: bool,
    pub require_no_vertical: bool,
    pub ball_radius: f64,
}

impl GoodSectionCriteria {
    pub fn all(avoid_set: Vec<ClosedPoint>, ball_radius: f64) -> Self {
        Self {
            avoid_set,
            require_generically_smooth: true,
            require_no_vertical: true,
            ball_radius,
        }
    }

    pub fn avoids(&self, f: &IntForm) -> bool {
        self.avoid_set.iter().all(|x| !x.is_zero_of(f))
    }

    /// All enabled predicates, evaluated independently of the search.
    pub fn accepts(&self, f: &IntForm) -> bool {
        !f.is_zero()
            && self.avoids(f)
            && (!self.require_generically_smooth || is_squarefree_form(f))
            && (!self.require_no_vertical || f.content().is_one())
    }
}

/// How many examined candidates passed each predicate.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PassRates {
    pub candidates: u64,
    pub avoid: u64,
    pub smooth: u64,
    pub content: u64,
    pub all: u64,
}

impl PassRates {
    fn rate(&self, k: u64) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            k as f64 / self.candidates as f64
        }
    }
}

impl fmt::Display for PassRates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} candidates; avoid {:.3}, smooth {:.3}, content {:.3}, all {:.3}",
            self.candidates,
            self.rate(self.avoid),
            self.rate(self.smooth),
            self.rate(self.content),
            self.rate(self.all)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodSection {
    pub section: IntForm,
    /// `|| section - center ||_inf`.
    pub distance: f64,
    pub rates: PassRates,
}

/// Nearest lattice point to `center` (within the ball) passing every
/// enabled predicate. Exhaustive in distance order up to degree 8; beyond
/// that the candidates are `center`, then `center +- m_k`, then
/// `center +- m_j +- m_k`, each layer in distance order.
pub fn good_section_search(center: &IntForm, lat: &SectionLattice, crit: &GoodSectionCriteria) -> Result<GoodSection> {
    good_section_search_with(center, lat, crit, |_| true)
}

/// As [`good_section_search`], with an extra acceptance hook (e.g. a
/// certified factorization) that does not enter the pass rates.
pub fn good_section_search_with(
    center: &IntForm,
    lat: &SectionLattice,
    crit: &GoodSectionCriteria,
    mut extra: impl FnMut(&IntForm) -> bool,
) -> Result<GoodSection> {
    let mut rates = PassRates::default();
    let mut test = |f: &IntForm, d: f64, rates: &mut PassRates| -> Option<GoodSection> {
        rates.candidates += 1;
        let a = !f.is_zero() && crit.avoids(f);
        let s = is_squarefree_form(f);
        let c = f.content().is_one();
        rates.avoid += a as u64;
        rates.smooth += s as u64;
        rates.content += c as u64;
        let ok = a && (s || !crit.require_generically_smooth) && (c || !crit.require_no_vertical);
        rates.all += ok as u64;
        (ok && extra(f)).then(|| GoodSection {
            section: f.clone(),
            distance: d,
            rates: PassRates::default(),
        })
    };
    let finish = |mut g: GoodSection, rates: PassRates| {
        g.rates = rates;
        Ok(g)
    };
    let n = lat.degree();
    if n <= MAX_EXHAUSTIVE_DEGREE {
        let c = center.to_real();
        for (f, d) in ball_points(lat, &c, crit.ball_radius)? {
            if let Some(g) = test(&f, d, &mut rates) {
                return finish(g, rates);
            }
        }
        return Err(Error::NoGoodSection(rates));
    }
    if let Some(g) = test(center, 0.0, &mut rates) {
        return finish(g, rates);
    }
    let sups = lat.monomial_sups();
    let one = BigInt::one();
    let shifted = |moves: &[(usize, bool)]| -> IntForm {
        let mut c = center.coeffs().to_vec();
        for &(k, plus) in moves {
            if plus {
                c[k] += &one;
            } else {
                c[k] -= &one;
            }
        }
        IntForm::new(c)
    };
    // layer 1
    let mut layer: Vec<(f64, Vec<(usize, bool)>)> = Vec::new();
    for (k, &s) in sups.iter().enumerate().take(n + 1) {
        if s <= crit.ball_radius {
            layer.push((s, vec![(k, true)]));
            layer.push((s, vec![(k, false)]));
        }
    }
    layer.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    for (d, mv) in &layer {
        if let Some(g) = test(&shifted(mv), *d, &mut rates) {
            return finish(g, rates);
        }
    }
    // layer 2, distances measured exactly on the two-term difference
    let mut layer: Vec<(f64, Vec<(usize, bool)>)> = Vec::new();
    for j in 0..=n {
        for k in j + 1..=n {
            if sups[j].min(sups[k]) > crit.ball_radius {
                continue;
            }
            for (pj, pk) in [(true, true), (true, false), (false, true), (false, false)] {
                let mut diff = RealForm::zero(n).into_coeffs();
                diff[j] = if pj { 1.0 } else { -1.0 };
                diff[k] = if pk { 1.0 } else { -1.0 };
                let d = lat.sup_norm(&RealForm::new(diff))?;
                if d <= crit.ball_radius {
                    layer.push((d, vec![(j, pj), (k, pk)]));
                }
            }
        }
    }
    layer.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    for (d, mv) in &layer {
        if let Some(g) = test(&shifted(mv), *d, &mut rates) {
            return finish(g, rates);
        }
    }
    Err(Error::NoGoodSection(rates))
}

/// Tie-break: smaller degree, then lexicographically smaller form.
fn point_order(a: &ClosedPoint, b: &ClosedPoint) -> std::cmp::Ordering {
    a.degree()
        .cmp(&b.degree())
        .then_with(|| a.form().coeffs().cmp(b.form().coeffs()))
}

/// Horizontal component of smallest height.
pub fn min_height_point(d: &ArithmeticDivisor, bundle: &HermitianBundle) -> Result<(ClosedPoint, f64)> {
    let mut best: Option<(ClosedPoint, f64)> = None;
    for c in &d.horizontal {
        let h = height_of_point(&c.point, bundle);
        let better = match &best {
            None => true,
            Some((p, bh)) => h < bh - HEIGHT_TIE || ((h - bh).abs() <= HEIGHT_TIE && point_order(&c.point, p).is_lt()),
        };
        if better {
            best = Some((c.point.clone(), h));
        }
    }
    best.ok_or(Error::EmptyDivisor)
}

/// `sup_Y inf_{x not in Y} h(x)` over the empty set and the given avoid
/// sets; sets that exclude every point carry no information and are skipped.
pub fn ess_sup_inf_estimate(points: &[(ClosedPoint, f64)], avoid_history: &[Vec<ClosedPoint>]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points".into()));
    }
    let inf_outside = |y: &[ClosedPoint]| -> Option<f64> {
        points
            .iter()
            .filter(|(x, _)| !y.iter().any(|z| z.form() == x.form()))
            .map(|(_, h)| *h)
            .min_by(f64::total_cmp)
    };
    let mut best = inf_outside(&[]).expect("nonempty");
    for y in avoid_history {
        if let Some(v) = inf_outside(y) {
            best = best.max(v);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct EssMinConfig {
    pub l: HermitianBundle,
    pub n: HermitianBundle,
    pub schedule: ScheduleConfig,
    pub criteria: GoodSectionCriteria,
    /// Trailing stages entering the liminf estimate.
    pub window: usize,
    /// Points of height and degree at most these join the avoid family.
    pub family_height: f64,
    pub family_degree: usize,
    pub tolerance: f64,
}

impl EssMinConfig {
    pub fn new(l: HermitianBundle, n: HermitianBundle) -> Self {
        Self {
            l,
            n,
            schedule: ScheduleConfig::default(),
            criteria: GoodSectionCriteria::all(Vec::new(), 1.0),
            window: 3,
            family_height: 0.3,
            family_degree: 2,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EssMinStage {
    pub index: usize,
    /// `(n_1, ..., n_d)`; a single entry in relative dimension one.
    pub stage_path: Vec<usize>,
    pub n: usize,
    pub ell: u32,
    pub degree: usize,
    pub section_id: String,
    #[serde(skip)]
    pub section: IntForm,
    pub rounding_distance: f64,
    pub search_distance: f64,
    pub pass_rates: PassRates,
    pub num_points: usize,
    pub min_height_point: String,
    pub min_height_degree: usize,
    pub min_height: f64,
    /// This stage's `L . N / deg L`.
    pub stage_rhs: f64,
    pub defect: f64,
    /// `(1/deg s) integral log ||s||_L c_1(N)`.
    pub archimedean_remainder: f64,
    pub vertical: VerticalPrimeCheck,
    pub wall_time_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct EssMinReport {
    pub stages: Vec<EssMinStage>,
    pub demailly: Vec<DemaillyStage>,
    pub rhs: f64,
    pub liminf_estimate: f64,
    pub ess_estimate: f64,
    pub window: usize,
    pub tolerance: f64,
    pub inequality_holds: bool,
}

/// Short stable identifier of an integer form.
pub fn section_id(f: &IntForm) -> String {
    // FNV-1a over the decimal coefficients
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in f.coeffs() {
        for b in c.to_string().bytes().chain(*b";") {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("s{}-{:016x}", f.degree(), h)
}

pub fn essmin_experiment(cfg: &EssMinConfig, q: &QuadratureGrid) -> Result<EssMinReport> {
    if cfg.l.degree != 1 {
        return Err(Error::InvalidArgument("the section pipeline runs on O(1)".into()));
    }
    if cfg.window == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let seq = demailly_schedule(&cfg.l.metric, q, &cfg.schedule)?;
    let mut stages = Vec::new();
    let mut family: Vec<ClosedPoint> = Vec::new();
    let mut avoid_history: Vec<Vec<ClosedPoint>> = Vec::new();
    let mut all_points: Vec<(ClosedPoint, f64)> = Vec::new();
    let mut last_rhs = f64::NAN;
    for st in &seq.stages {
        let started = Instant::now();
        let real = real_section(st.section())?;
        let lat = SectionLattice::new(real.degree(), cfg.l.metric.clone())?;
        let (rounded, rounding_distance) = round_to_integral(&real, &lat)?;
        let mut div = None;
        let good = good_section_search_with(&rounded, &lat, &cfg.criteria, |f| match decompose_divisor(f) {
            Ok(d) => {
                div = Some(d);
                true
            }
            Err(Error::FactorizationUnverified { .. }) => false,
            Err(_) => false,
        })?;
        let div = div.expect("set by the accepting hook");
        let (pt, h) = min_height_point(&div, &cfg.n)?;
        let inter = intersection_via_section(&cfg.l, &cfg.n, &good.section, q)?;
        let stage_rhs = inter.value / cfg.l.degree as f64;
        last_rhs = stage_rhs;
        for c in &div.horizontal {
            let hc = height_of_point(&c.point, &cfg.n);
            if c.point.degree() <= cfg.family_degree
                && hc <= cfg.family_height
                && !family.iter().any(|x| x.form() == c.point.form())
            {
                family.push(c.point.clone());
            }
            all_points.push((c.point.clone(), hc));
        }
        avoid_history.push(family.clone());
        let vertical = vertical_prime_check(&good.section, &cfg.l, q)?;
        let degree = good.section.section_eval().degree();
        stages.push(EssMinStage {
            index: st.index,
            stage_path: vec![degree],
            n: st.n,
            ell: st.ell,
            degree,
            section_id: section_id(&good.section),
            section: good.section.clone(),
            rounding_distance,
            search_distance: good.distance,
            pass_rates: good.rates.clone(),
            num_points: div.horizontal.len(),
            min_height_point: pt.form().to_string(),
            min_height_degree: pt.degree(),
            min_height: h,
            stage_rhs,
            defect: stage_rhs - h,
            archimedean_remainder: inter.archimedean_term / degree as f64,
            vertical,
            wall_time_ms: started.elapsed().as_millis(),
        });
    }
    let k = cfg.window.min(stages.len());
    let liminf_estimate = stages[stages.len() - k..]
        .iter()
        .map(|s| s.min_height)
        .fold(f64::INFINITY, f64::min);
    let ess_estimate = ess_sup_inf_estimate(&all_points, &avoid_history)?;
    Ok(EssMinReport {
        stages,
        demailly: seq.stages,
        rhs: last_rhs,
        liminf_estimate,
        ess_estimate,
        window: cfg.window,
        tolerance: cfg.tolerance,
        inequality_holds: liminf_estimate <= last_rhs + cfg.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_ids_are_stable_and_distinct() {
        let a = IntForm::from_i64(&[1, 2, 3]);
        let b = IntForm::from_i64(&[1, 2, 4]);
        assert_eq!(section_id(&a), section_id(&a.clone()));
        assert_ne!(section_id(&a), section_id(&b));
    }

    #[test]
    fn pass_rates_display() {
        let r = PassRates {
            candidates: 4,
            avoid: 2,
            smooth: 4,
            content: 1,
            all: 1,
        };
        assert_eq!(
            r.to_string(),
            "4 candidates; avoid 0.500, smooth 1.000, content 0.250, all 0.250"
        );
    }
}
