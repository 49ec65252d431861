//! Batch runner behind the `demailly-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Signed};
use serde::Serialize;
use serde_json::json;

use crate::arakelov::{decompose_divisor, height_of_point, intersection_via_section, HermitianBundle};
use crate::bergman::{bergman_kernel, demailly_schedule, orthonormalize, ScheduleConfig};
use crate::error::{Error, Result};
use crate::experiments::{essmin_experiment, section_id, EssMinConfig};
use crate::factor::factor_integer;
use crate::finite_field::{smooth_divisor_density, smooth_divisor_density_sampled, EXHAUSTIVE_BUDGET};
use crate::form::{parse_form, IntForm, RealForm};
use crate::lattice::{
    ball_count, restriction_kernel_density, sampled_kernel_density, Constraint, SectionLattice, MAX_EXHAUSTIVE_DEGREE,
};
use crate::projective::{MetricData, QuadratureGrid};
use crate::report::{num, timestamp, to_json, write_report, CsvTable};
use crate::verify::invariant_suite;

pub const OUT_DIR_ENV: &str = "DEMAILLY_OUT_DIR";
pub const MIN_GRID_SIZE: usize = 1000;

const CONVENTIONS: &str =
    "FS measure has mass 1; twist eps scales degree-n norms by exp(-eps n) and adds eps to heights";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Resolved configuration: defaults, then the config file, then flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid_size: usize,
    pub epsilon: f64,
    /// `a,b,c,coef; ...` terms added to the Fubini–Study potential.
    pub perturbation: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
    // bergman
    pub degrees: Vec<usize>,
    pub kernel_tolerance: f64,
    // demailly and essmin
    pub tolerances: Vec<f64>,
    pub n_max: usize,
    pub ell_max: u32,
    pub measure_eps: f64,
    pub measure_max: f64,
    // lattice and density
    pub degree: Option<usize>,
    pub radius: f64,
    pub constraint: String,
    pub samples: u64,
    pub sampled: bool,
    pub prime: u64,
    pub density_tolerance: f64,
    // height, intersect, essmin
    pub section: Option<String>,
    /// Twist of the second bundle `N`.
    pub n_epsilon: Option<f64>,
    pub expect: Option<f64>,
    pub expect_tolerance: f64,
    pub window: usize,
    pub essmin_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let out_dir = std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("reports"));
        Self {
            grid_size: QuadratureGrid::DEFAULT_SIZE,
            epsilon: 0.0,
            perturbation: String::new(),
            seed: 0,
            out_dir,
            format: Format::Csv,
            degrees: vec![2, 5, 10, 20],
            kernel_tolerance: 1e-3,
            tolerances: vec![0.2, 0.1, 0.05],
            n_max: 64,
            ell_max: 64,
            measure_eps: 0.05,
            measure_max: 0.2,
            degree: None,
            radius: 1.0,
            constraint: "none".into(),
            samples: 1_000_000,
            sampled: false,
            prime: 3,
            density_tolerance: 0.1,
            section: None,
            n_epsilon: None,
            expect: None,
            expect_tolerance: 1e-3,
            window: 3,
            essmin_tolerance: 0.05,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value '{value}' for '{key}'"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl RunConfig {
    /// Sets one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "grid_size" => self.grid_size = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "perturbation" => self.perturbation = value.to_string(),
            "seed" => self.seed = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "format" => self.format = Format::from_str(value, true).map_err(|_| format!("invalid format '{value}'"))?,
            "degrees" => self.degrees = parse_list(key, value)?,
            "kernel_tolerance" => self.kernel_tolerance = parse_value(key, value)?,
            "tolerances" => self.tolerances = parse_list(key, value)?,
            "n_max" => self.n_max = parse_value(key, value)?,
            "ell_max" => self.ell_max = parse_value(key, value)?,
            "measure_eps" => self.measure_eps = parse_value(key, value)?,
            "measure_max" => self.measure_max = parse_value(key, value)?,
            "degree" => self.degree = Some(parse_value(key, value)?),
            "radius" => self.radius = parse_value(key, value)?,
            "constraint" => self.constraint = value.to_string(),
            "samples" => self.samples = parse_value(key, value)?,
            "sampled" => self.sampled = parse_value(key, value)?,
            "prime" => self.prime = parse_value(key, value)?,
            "density_tolerance" => self.density_tolerance = parse_value(key, value)?,
            "section" => self.section = Some(value.to_string()),
            "n_epsilon" => self.n_epsilon = Some(parse_value(key, value)?),
            "expect" => self.expect = Some(parse_value(key, value)?),
            "expect_tolerance" => self.expect_tolerance = parse_value(key, value)?,
            "window" => self.window = parse_value(key, value)?,
            "essmin_tolerance" => self.essmin_tolerance = parse_value(key, value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < MIN_GRID_SIZE {
            return Err(Error::InvalidArgument(format!(
                "grid_size must be at least {MIN_GRID_SIZE}, got {}",
                self.grid_size
            )));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if let Some(e) = self.n_epsilon {
            if !(e >= 0.0) {
                return Err(Error::InvalidArgument(format!("n_epsilon must be >= 0, got {e}")));
            }
        }
        Ok(())
    }

    /// Metric for the configured perturbation and twist `eps`.
    pub fn metric(&self, eps: f64, q: &QuadratureGrid) -> Result<MetricData> {
        let terms = MetricData::parse_terms(&self.perturbation)?;
        MetricData::new(terms, eps, q)
    }
}

/// Parses `key = value` text on top of `base`. Blank lines and `#` comments
/// are skipped.
pub fn parse_config(text: &str, base: RunConfig) -> Result<RunConfig> {
    let mut cfg = base;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Config { line: i + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        cfg.set(key.trim(), value.trim()).map_err(err)?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text, RunConfig::default())
}

#[derive(Debug, Parser)]
#[command(
    name = "demailly-lab",
    version,
    about = "Arakelov / Demailly experiments on P1 over the integers"
)]
pub struct Cli {
    /// `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub grid_size: Option<usize>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Potential perturbation terms `a,b,c,coef; ...`.
    #[arg(long, global = true)]
    pub perturbation: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bergman kernel balance check.
    Bergman(BergmanArgs),
    /// Complex approximating sequence.
    Demailly(DemaillyArgs),
    /// Lattice ball counts and restriction densities.
    Lattice(LatticeArgs),
    /// Smooth divisor density over a prime field.
    Density(DensityArgs),
    /// Heights of the points of a section's divisor.
    Height(SectionArgs),
    /// Arithmetic intersection number via a section.
    Intersect(SectionArgs),
    /// Essential-minimum inequality experiment.
    Essmin(EssminArgs),
    /// Invariant suite.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bergman(_) => "bergman",
            Command::Demailly(_) => "demailly",
            Command::Lattice(_) => "lattice",
            Command::Density(_) => "density",
            Command::Height(_) => "height",
            Command::Intersect(_) => "intersect",
            Command::Essmin(_) => "essmin",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Args)]
pub struct BergmanArgs {
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<usize>>,
    #[arg(long)]
    pub kernel_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DemaillyArgs {
    #[arg(long, value_delimiter = ',')]
    pub tolerances: Option<Vec<f64>>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub ell_max: Option<u32>,
    #[arg(long)]
    pub measure_eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// `none`, `vanish:a:b` or `div:p`.
    #[arg(long)]
    pub constraint: Option<String>,
    #[arg(long)]
    pub sampled: bool,
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub prime: Option<u64>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub sampled: bool,
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SectionArgs {
    /// Section literal such as `z0^2 + z1^2`.
    #[arg(long, allow_hyphen_values = true)]
    pub section: Option<String>,
    #[arg(long)]
    pub n_epsilon: Option<f64>,
    /// Expected value; the run fails its threshold when off by more than `expect_tolerance`.
    #[arg(long, allow_hyphen_values = true)]
    pub expect: Option<f64>,
    #[arg(long)]
    pub expect_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EssminArgs {
    #[arg(long)]
    pub n_epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub tolerances: Option<Vec<f64>>,
    #[arg(long)]
    pub window: Option<usize>,
}

fn put<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        put(&mut c.grid_size, self.grid_size);
        put(&mut c.epsilon, self.epsilon);
        put(&mut c.perturbation, self.perturbation.clone());
        put(&mut c.seed, self.seed);
        put(&mut c.out_dir, self.out_dir.clone());
        put(&mut c.format, self.format);
        match &self.command {
            Command::Bergman(a) => {
                put(&mut c.degrees, a.degrees.clone());
                put(&mut c.kernel_tolerance, a.kernel_tolerance);
            }
            Command::Demailly(a) => {
                put(&mut c.tolerances, a.tolerances.clone());
                put(&mut c.n_max, a.n_max);
                put(&mut c.ell_max, a.ell_max);
                put(&mut c.measure_eps, a.measure_eps);
            }
            Command::Lattice(a) => {
                if a.degree.is_some() {
                    c.degree = a.degree;
                }
                put(&mut c.radius, a.radius);
                put(&mut c.constraint, a.constraint.clone());
                put(&mut c.samples, a.samples);
                c.sampled |= a.sampled;
            }
            Command::Density(a) => {
                put(&mut c.prime, a.prime);
                if a.degree.is_some() {
                    c.degree = a.degree;
                }
                put(&mut c.samples, a.samples);
                c.sampled |= a.sampled;
            }
            Command::Height(a) | Command::Intersect(a) => {
                if a.section.is_some() {
                    c.section = a.section.clone();
                }
                if a.n_epsilon.is_some() {
                    c.n_epsilon = a.n_epsilon;
                }
                if a.expect.is_some() {
                    c.expect = a.expect;
                }
                put(&mut c.expect_tolerance, a.expect_tolerance);
            }
            Command::Essmin(a) => {
                if a.n_epsilon.is_some() {
                    c.n_epsilon = a.n_epsilon;
                }
                put(&mut c.tolerances, a.tolerances.clone());
                put(&mut c.window, a.window);
            }
            Command::Verify => {}
        }
        c.validate()?;
        Ok(c)
    }
}

/// Result of one subcommand before it is written out.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub pass: bool,
    pub table: CsvTable,
    pub result: serde_json::Value,
}

fn check_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".demailly-write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

fn parse_integral_section(s: &str) -> Result<IntForm> {
    parse_form(s)?
        .to_integer()
        .ok_or_else(|| Error::Parse(format!("section '{s}' has non-integral coefficients")))
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_bergman(c: &RunConfig, q: &QuadratureGrid) -> Result<Outcome> {
    let m = c.metric(c.epsilon, q)?;
    let mut t = CsvTable::new(&["n", "max_deviation", "gram_residual", "grid_size"]);
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for &n in &c.degrees {
        let b = orthonormalize(n, &m, q)?;
        let dev = q
            .points()
            .iter()
            .map(|x| (bergman_kernel(&b, x, &m) / (n + 1) as f64 - 1.0).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
        t.push(vec![
            n.to_string(),
            num(dev),
            num(b.gram_residual()),
            q.len().to_string(),
        ]);
        rows.push(json!({"n": n, "max_deviation": dev, "gram_residual": b.gram_residual()}));
    }
    let pass = worst <= c.kernel_tolerance;
    Ok(Outcome {
        summary: format!(
            "max |b_n/(n+1) - 1| = {} (tolerance {})",
            num(worst),
            c.kernel_tolerance
        ),
        pass,
        table: t,
        result: json!({"degrees": rows, "max_deviation": worst}),
    })
}

fn run_demailly(c: &RunConfig, q: &QuadratureGrid) -> Result<Outcome> {
    let m = c.metric(c.epsilon, q)?;
    let cfg = ScheduleConfig {
        tolerances: c.tolerances.clone(),
        n_max: c.n_max,
        ell_max: c.ell_max,
        measure_eps: c.measure_eps,
    };
    let seq = demailly_schedule(&m, q, &cfg)?;
    let mut t = CsvTable::new(&["stage_index", "n", "ell", "sup_norm", "l1_log", "measure_exceed_eps"]);
    for s in &seq.stages {
        t.push(vec![
            s.index.to_string(),
            s.n.to_string(),
            s.ell.to_string(),
            num(s.sup_norm_value),
            num(s.l1_value),
            num(s.measure_value),
        ]);
        t.comment(format!("stage {} wall_time_ms = {}", s.index, s.wall_time_ms));
    }
    let last = seq
        .stages
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty schedule".into()))?;
    let pass = (last.sup_norm_value - 1.0).abs() <= 1e-9
        && last.l1_value <= last.tolerance
        && last.measure_value <= c.measure_max;
    Ok(Outcome {
        summary: format!(
            "final stage n = {}, ell = {}: sup = {}, l1 = {}, measure = {}",
            last.n,
            last.ell,
            num(last.sup_norm_value),
            num(last.l1_value),
            num(last.measure_value)
        ),
        pass,
        table: t,
        result: serde_json::to_value(&seq.stages)?,
    })
}

pub fn parse_constraint(s: &str) -> Result<Option<Constraint>> {
    let bad = || Error::Parse(format!("constraint '{s}': expected none, vanish:a:b or div:p"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["none"] => Ok(None),
        ["vanish", a, b] => Ok(Some(Constraint::VanishAt(
            a.parse().map_err(|_| bad())?,
            b.parse().map_err(|_| bad())?,
        ))),
        ["div", p] => {
            let p: u64 = p.parse().map_err(|_| bad())?;
            if p < 2 {
                return Err(bad());
            }
            Ok(Some(Constraint::DivisibleBy(p)))
        }
        _ => Err(bad()),
    }
}

fn run_lattice(c: &RunConfig, q: &QuadratureGrid) -> Result<Outcome> {
    let n = c.degree.unwrap_or(1);
    let m = c.metric(c.epsilon, q)?;
    let constraint = parse_constraint(&c.constraint)?;
    let lat = SectionLattice::new(n, m)?;
    let center = RealForm::zero(n);
    let label = constraint.as_ref().map_or("none".to_string(), |k| k.to_string());
    let mut t = CsvTable::new(&["n", "radius", "count", "constraint", "density", "mode", "ci_halfwidth"]);
    let sampled = c.sampled || n > MAX_EXHAUSTIVE_DEGREE;
    let (count, density, ci, mode) = if sampled {
        // the trivial constraint makes every accepted sample a hit
        let k = constraint.clone().unwrap_or(Constraint::DivisibleBy(1));
        let s = sampled_kernel_density(&lat, &k, &center, c.radius, c.samples, c.seed)?;
        (s.accepted, s.density, s.ci_halfwidth, "sampled")
    } else {
        match &constraint {
            None => (ball_count(&lat, &center, c.radius)?.count, 1.0, 0.0, "exhaustive"),
            Some(k) => {
                let d = restriction_kernel_density(&lat, k, &center, c.radius)?;
                (d.total, d.density, 0.0, "exhaustive")
            }
        }
    };
    t.push(vec![
        n.to_string(),
        num(c.radius),
        count.to_string(),
        label.clone(),
        num(density),
        mode.to_string(),
        num(ci),
    ]);
    Ok(Outcome {
        summary: format!(
            "n = {n}, radius {}: count {count}, {label} density {}",
            c.radius,
            num(density)
        ),
        pass: true,
        table: t,
        result: json!({"n": n, "radius": c.radius, "count": count, "constraint": label,
                       "density": density, "mode": mode, "ci_halfwidth": ci}),
    })
}

fn run_density(c: &RunConfig) -> Result<Outcome> {
    let n = c.degree.unwrap_or(4);
    let exhaustive_size = (c.prime as f64).powi(n as i32 + 1);
    let r = if c.sampled || exhaustive_size > EXHAUSTIVE_BUDGET as f64 {
        smooth_divisor_density_sampled(c.prime, n, c.samples, c.seed)?
    } else {
        smooth_divisor_density(c.prime, n)?
    };
    let mut t = CsvTable::new(&[
        "p",
        "n",
        "total",
        "hits",
        "density_num",
        "density_den",
        "zeta_ref",
        "mode",
        "seed",
    ]);
    t.push(vec![
        r.p.to_string(),
        r.n.to_string(),
        r.total.to_string(),
        r.hits.to_string(),
        r.density_num.to_string(),
        r.density_den.to_string(),
        num(r.reference),
        r.mode.to_string(),
        r.seed.unwrap_or(c.seed).to_string(),
    ]);
    let gap = (r.density() - r.reference).abs();
    Ok(Outcome {
        summary: format!(
            "p = {}, n = {}: density {}/{} vs zeta reference {} (gap {})",
            r.p,
            r.n,
            r.density_num,
            r.density_den,
            num(r.reference),
            num(gap)
        ),
        pass: gap <= c.density_tolerance,
        table: t,
        result: serde_json::to_value(&r)?,
    })
}

fn expectation(c: &RunConfig, value: f64) -> bool {
    c.expect.is_none_or(|e| (value - e).abs() <= c.expect_tolerance)
}

fn run_height(c: &RunConfig, q: &QuadratureGrid) -> Result<Outcome> {
    let lit = c.section.clone().unwrap_or_else(|| "z0^2 + z1^2".into());
    let s = parse_integral_section(&lit)?;
    let bundle = HermitianBundle::new(c.metric(c.epsilon, q)?, 1);
    let div = decompose_divisor(&s)?;
    let mut t = CsvTable::new(&["point", "degree", "multiplicity", "height"]);
    let mut rows = Vec::new();
    let mut min_h = f64::INFINITY;
    for comp in &div.horizontal {
        let h = height_of_point(&comp.point, &bundle);
        min_h = min_h.min(h);
        let name = comp.point.form().to_string();
        t.push(vec![
            name.clone(),
            comp.point.degree().to_string(),
            comp.multiplicity.to_string(),
            num(h),
        ]);
        rows.push(json!({"point": name, "degree": comp.point.degree(),
                         "multiplicity": comp.multiplicity, "height": h}));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDivisor);
    }
    Ok(Outcome {
        summary: format!("min height {} over {} point(s)", num(min_h), rows.len()),
        pass: expectation(c, min_h),
        table: t,
        result: json!({"section": lit, "points": rows, "min_height": min_h}),
    })
}

fn run_intersect(c: &RunConfig, q: &QuadratureGrid) -> Result<Outcome> {
    let lit = c.section.clone().unwrap_or_else(|| "z0".into());
    let s = parse_integral_section(&lit)?;
    let l = HermitianBundle::new(c.metric(c.epsilon, q)?, 1);
    let n = HermitianBundle::new(c.metric(c.n_epsilon.unwrap_or(c.epsilon), q)?, 1);
    // Vertical fibres contribute sum v_p log p = log|content| to the degree
    // term and the same amount to the archimedean term, so they cancel.
    let content = s.content();
    let primes: Vec<String> = if content.is_one() {
        Vec::new()
    } else {
        factor_integer(&content.abs())
            .iter()
            .map(|(p, _)| p.to_string())
            .collect()
    };
    let b = intersection_via_section(&l, &n, &s.primitive_part(), q)?;
    let mut t = CsvTable::new(&[
        "section_id",
        "degree",
        "content_primes",
        "num_factors",
        "deg_term",
        "archimedean_term",
        "intersection_value",
        "grid_size",
    ]);
    t.push(vec![
        section_id(&s),
        s.degree().to_string(),
        primes.join(";"),
        b.num_factors.to_string(),
        num(b.deg_term),
        num(b.archimedean_term),
        num(b.value),
        q.len().to_string(),
    ]);
    Ok(Outcome {
        summary: format!("intersection {}", num(b.value)),
        pass: expectation(c, b.value),
        table: t,
        result: json!({"section": lit, "section_id": section_id(&s), "content_primes": primes,
                       "breakdown": b}),
    })
}

fn run_essmin(c: &RunConfig, q: &QuadratureGrid) -> Result<Outcome> {
    let l = HermitianBundle::new(c.metric(c.epsilon, q)?, 1);
    let n = HermitianBundle::new(c.metric(c.n_epsilon.unwrap_or(0.0), q)?, 1);
    let mut cfg = EssMinConfig::new(l, n);
    cfg.schedule.tolerances = c.tolerances.clone();
    cfg.schedule.n_max = c.n_max;
    cfg.schedule.ell_max = c.ell_max;
    cfg.schedule.measure_eps = c.measure_eps;
    cfg.window = c.window;
    cfg.tolerance = c.essmin_tolerance;
    let r = essmin_experiment(&cfg, q)?;
    let mut t = CsvTable::new(&[
        "stage_index",
        "n",
        "ell",
        "degree",
        "section_id",
        "rounding_distance",
        "min_height",
        "stage_rhs",
        "defect",
        "archimedean_remainder",
        "content_primes",
        "vertical_violations",
    ]);
    for s in &r.stages {
        t.push(vec![
            s.index.to_string(),
            s.n.to_string(),
            s.ell.to_string(),
            s.degree.to_string(),
            s.section_id.clone(),
            num(s.rounding_distance),
            num(s.min_height),
            num(s.stage_rhs),
            num(s.defect),
            num(s.archimedean_remainder),
            s.vertical.primes.join(";"),
            s.vertical.violations.to_string(),
        ]);
        t.comment(format!("stage {} wall_time_ms = {}", s.index, s.wall_time_ms));
    }
    let remainder = r.stages.last().map_or(f64::INFINITY, |s| s.archimedean_remainder.abs());
    let pass = r.inequality_holds && remainder <= c.essmin_tolerance;
    Ok(Outcome {
        summary: format!(
            "liminf {} vs rhs {} (ess {}), final remainder {}",
            num(r.liminf_estimate),
            num(r.rhs),
            num(r.ess_estimate),
            num(remainder)
        ),
        pass,
        table: t,
        result: serde_json::to_value(&r)?,
    })
}

fn run_verify(q: &QuadratureGrid) -> Result<Outcome> {
    let checks = invariant_suite(q)?;
    let mut t = CsvTable::new(&["check", "value", "expected", "tolerance", "pass"]);
    for k in &checks {
        t.push(vec![
            k.name.to_string(),
            num(k.value),
            num(k.expected),
            num(k.tolerance),
            k.pass.to_string(),
        ]);
    }
    let failed: Vec<&str> = checks.iter().filter(|k| !k.pass).map(|k| k.name).collect();
    Ok(Outcome {
        summary: if failed.is_empty() {
            format!("{} checks passed", checks.len())
        } else {
            format!(
                "{} of {} checks failed: {}",
                failed.len(),
                checks.len(),
                failed.join(", ")
            )
        },
        pass: failed.is_empty(),
        table: t,
        result: serde_json::to_value(&checks)?,
    })
}

/// Runs `cmd` and returns the outcome without writing anything.
pub fn execute(cmd: &Command, c: &RunConfig) -> Result<Outcome> {
    if let Command::Density(_) = cmd {
        return run_density(c);
    }
    let q = QuadratureGrid::fibonacci(c.grid_size)?;
    match cmd {
        Command::Bergman(_) => run_bergman(c, &q),
        Command::Demailly(_) => run_demailly(c, &q),
        Command::Lattice(_) => run_lattice(c, &q),
        Command::Density(_) => unreachable!(),
        Command::Height(_) => run_height(c, &q),
        Command::Intersect(_) => run_intersect(c, &q),
        Command::Essmin(_) => run_essmin(c, &q),
        Command::Verify => run_verify(&q),
    }
}

/// Runs a parsed command line, writes its report and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_inner(cli: &Cli) -> Result<bool> {
    let c = cli.resolve()?;
    check_writable(&c.out_dir)?;
    let sub = cli.command.name();
    let started = Instant::now();
    let out = execute(&cli.command, &c)?;
    let wall = started.elapsed().as_millis();
    let stamp = timestamp();
    let config = serde_json::to_value(&c)?;
    let (ext, content) = match c.format {
        Format::Csv => {
            let mut t = out.table;
            let mut header = vec![
                format!("demailly-lab {sub}"),
                format!("timestamp = {stamp}"),
                format!("conventions: {CONVENTIONS}"),
            ];
            if let serde_json::Value::Object(map) = &config {
                for (k, v) in map {
                    header.push(format!("{k} = {v}"));
                }
            }
            header.push(format!("wall_time_ms = {wall}"));
            header.append(&mut t.comments);
            t.comments = header;
            ("csv", t.render())
        }
        Format::Json => (
            "json",
            to_json(&json!({
                "subcommand": sub,
                "timestamp": stamp,
                "conventions": CONVENTIONS,
                "config": config,
                "seed": c.seed,
                "grid_size": c.grid_size,
                "wall_time_ms": wall,
                "pass": out.pass,
                "result": out.result,
            }))?,
        ),
    };
    let path = write_report(&c.out_dir, sub, &stamp, c.seed, ext, &content)?;
    println!("{sub}: {} [{}] -> {}", out.summary, pass_word(out.pass), path.display());
    Ok(out.pass)
}

/// Parses `args` and runs; clap usage errors map to exit code 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
