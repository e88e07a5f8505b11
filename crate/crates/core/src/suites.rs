//! Seeded property suites and the JSON report they produce.
//!
//! Trial `k` of a suite draws from its own ChaCha stream, addressed by the run
//! seed, the suite name and `k`, so any trial can be replayed in isolation and
//! the report does not depend on scheduling.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    lamperti_functional, linfty_separation, orbit_class, orbit_path, LinftyIsometry, OrbitClass,
};
use crate::homotopy::{
    alpha, beta, fact2_integral, gamma, homotopy_apply, sot_continuity_search, HomotopyTime,
};
use crate::interval::{intersect_unions, Interval, NormExponent, StepFn};
use crate::lamperti::{band_projection, random_lamperti_with};
use crate::sample::{
    normalize, random_full_support, random_intervals, random_partial_support, random_specs,
    random_step, random_step_2d, random_sum_fn, random_sum_isometry,
};
use crate::xspace::XSpec;

type Trial = fn(&TrialCtx, &mut ChaCha8Rng) -> std::result::Result<f64, String>;

/// Name, default tolerance and body of every suite, in report order.
pub const SUITES: &[(&str, f64, Trial)] = &[
    ("homotopy-isometry", 1e-9, homotopy_isometry),
    ("endpoints", 1e-9, endpoints),
    ("reconstruction", 1e-12, reconstruction),
    ("contractivity", 1e-12, contractivity),
    ("fact2", 1e-3, fact2),
    ("sot-continuity", 1e-2, sot_continuity),
    ("disjointness", 1e-9, disjointness),
    ("projection", 1e-12, projection),
    ("fubini", 1e-9, fubini),
    ("orbit-path", 1e-9, orbit_paths),
    ("linfty-separation", 1e-9, linfty),
    ("lamperti-isometry", 1e-12, lamperti_isometry),
];

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|s| s.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_suite")]
    pub suite: String,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_q")]
    pub q: NormExponent,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Per-suite tolerance overrides.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_suite() -> String {
    "all".into()
}

fn default_p_list() -> Vec<f64> {
    vec![1.0, 1.5, 2.0, 3.0]
}

fn default_d() -> usize {
    1
}

fn default_q() -> NormExponent {
    NormExponent::Finite(2.0)
}

fn default_trials() -> usize {
    100
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: default_suite(),
            p_list: default_p_list(),
            d: default_d(),
            q: default_q(),
            trials: default_trials(),
            seed: 0,
            tolerances: BTreeMap::new(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.p_list.is_empty() {
            return Err("p list is empty".into());
        }
        if let Some(p) = self.p_list.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
            return Err(format!("p = {p} is not a finite exponent >= 1"));
        }
        if self.d == 0 {
            return Err("dimension must be at least 1".into());
        }
        if self.suite != "all" && !suite_names().any(|s| s == self.suite) {
            return Err(format!(
                "unknown suite '{}'; expected 'all' or one of: {}",
                self.suite,
                suite_names().collect::<Vec<_>>().join(", ")
            ));
        }
        for (name, tol) in &self.tolerances {
            if !suite_names().any(|s| s == name) {
                return Err(format!("tolerance given for unknown suite '{name}'"));
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(format!("tolerance for '{name}' must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub suite: String,
    pub trial: usize,
    pub p: f64,
    /// Measured defect, absent when the trial failed a qualitative check.
    pub error: Option<f64>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub p: Vec<f64>,
    pub d: usize,
    pub q: NormExponent,
    pub seed: u64,
    pub trials: usize,
    pub failures: Vec<Failure>,
    pub max_error: f64,
    pub suites: Vec<SuiteSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Parameters shared by all trials of one suite.
pub struct TrialCtx {
    pub p: f64,
    pub d: usize,
    pub q: NormExponent,
    pub tolerance: f64,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Generator for trial `trial` of `suite`: stream chosen by the suite, block
/// counter offset by the trial index.
pub fn trial_rng(seed: u64, suite: &str, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(suite));
    rng.set_word_pos((trial as u128) << 36);
    rng
}

pub fn run(config: &RunConfig) -> std::result::Result<Report, String> {
    config.validate()?;
    let selected: Vec<_> = SUITES
        .iter()
        .filter(|s| config.suite == "all" || config.suite == s.0)
        .collect();
    let mut failures = Vec::new();
    let mut summaries = Vec::new();
    for &&(name, default_tol, body) in &selected {
        let tolerance = config.tolerances.get(name).copied().unwrap_or(default_tol);
        let results: Vec<(f64, std::result::Result<f64, String>)> = (0..config.trials)
            .into_par_iter()
            .map(|k| {
                let p = config.p_list[k % config.p_list.len()];
                let ctx = TrialCtx {
                    p,
                    d: config.d,
                    q: config.q,
                    tolerance,
                };
                let mut rng = trial_rng(config.seed, name, k);
                (p, body(&ctx, &mut rng))
            })
            .collect();
        let mut max_error = 0.0_f64;
        let mut count = 0;
        for (k, (p, r)) in results.into_iter().enumerate() {
            let failure = match r {
                Ok(e) if e.is_finite() && e <= tolerance => {
                    max_error = max_error.max(e);
                    None
                }
                Ok(e) if e.is_finite() => {
                    max_error = max_error.max(e);
                    Some((
                        Some(e),
                        format!("error {e:e} exceeds tolerance {tolerance:e}"),
                    ))
                }
                Ok(e) => Some((None, format!("non-finite error {e}"))),
                Err(msg) => Some((None, msg)),
            };
            if let Some((error, message)) = failure {
                count += 1;
                failures.push(Failure {
                    suite: name.into(),
                    trial: k,
                    p,
                    error,
                    message,
                });
            }
        }
        summaries.push(SuiteSummary {
            name: name.into(),
            trials: config.trials,
            failures: count,
            max_error,
            tolerance,
        });
    }
    let max_error = summaries.iter().fold(0.0_f64, |m, s| m.max(s.max_error));
    Ok(Report {
        suite: config.suite.clone(),
        p: config.p_list.clone(),
        d: config.d,
        q: config.q,
        seed: config.seed,
        trials: config.trials,
        failures,
        max_error,
        suites: summaries,
        timestamp: None,
    })
}

fn fail(e: Error) -> String {
    e.to_string()
}

fn random_time(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.0..1.0),
    }
}

fn sum_instance(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> (crate::SumFn, crate::SumIsometry) {
    let n = rng.gen_range(1..=3);
    let specs = random_specs(rng, n, &[ctx.d], &[ctx.q]);
    let f = random_sum_fn(rng, &specs, 6);
    let op = random_sum_isometry(rng, &specs, ctx.p, 4, 3);
    (f, op)
}

fn homotopy_isometry(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let (f, op) = sum_instance(ctx, rng);
    let t = HomotopyTime::new(random_time(rng)).map_err(fail)?;
    let h = homotopy_apply(t, &op, &f, ctx.p).map_err(fail)?;
    let before = f.norm(ctx.p);
    let defect = (h.norm(ctx.p) - before).abs();
    Ok(if before > 0.0 {
        defect / before
    } else {
        defect
    })
}

fn endpoints(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let (f, op) = sum_instance(ctx, rng);
    let zero = HomotopyTime::new(0.0).map_err(fail)?;
    let one = HomotopyTime::new(1.0).map_err(fail)?;
    let acted = op.apply(&f).map_err(fail)?;
    let e0 = homotopy_apply(zero, &op, &f, ctx.p)
        .and_then(|h| h.sub(&acted))
        .map_err(fail)?
        .norm(ctx.p);
    let e1 = homotopy_apply(one, &op, &f, ctx.p)
        .and_then(|h| h.sub(&f))
        .map_err(fail)?
        .norm(ctx.p);
    Ok(e0.max(e1))
}

fn reconstruction(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let f = random_step(rng, ctx.d, 8);
    let t = rng.gen_range(0.0..0.999);
    let ht = HomotopyTime::new(t).map_err(fail)?;
    let back = gamma(ht, &beta(ht, &f, ctx.p), ctx.p);
    let band = f
        .indicator_multiply(&[Interval::new(t, 1.0).map_err(fail)?])
        .map_err(fail)?;
    if back.num_cells() != band.num_cells() {
        return Err(format!(
            "cell structure differs: {} vs {} cells at t = {t}",
            back.num_cells(),
            band.num_cells()
        ));
    }
    let breaks = back
        .breaks()
        .iter()
        .zip(band.breaks())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let values = back
        .values()
        .iter()
        .flatten()
        .zip(band.values().iter().flatten())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(breaks.max(values))
}

fn contractivity(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let f = random_step(rng, ctx.d, 8);
    let t = HomotopyTime::new(random_time(rng)).map_err(fail)?;
    let base = f.norm_p(ctx.p, ctx.q);
    let images = [alpha(t, &f), beta(t, &f, ctx.p), gamma(t, &f, ctx.p)];
    Ok(images
        .iter()
        .map(|g| ((g.norm_p(ctx.p, ctx.q) - base) / base).max(0.0))
        .fold(0.0, f64::max))
}

/// Levels `k` whose integrals must not increase.
const FACT2_TAIL: std::ops::RangeInclusive<i32> = 5..=8;

fn fact2(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let f = random_step(rng, ctx.d, 8);
    let t0 = rng.gen_range(0.0..0.75);
    let below = t0 >= 0.25 && rng.gen();
    let scale = f.norm_p_pow(ctx.p, ctx.q);
    let values = (1..=8)
        .map(|k| {
            let delta = 0.25_f64.powi(k);
            let t = if below { t0 - delta } else { t0 + delta };
            fact2_integral(&f, t0, t, ctx.p, ctx.q).map(|v| v / scale)
        })
        .collect::<Result<Vec<f64>>>()
        .map_err(fail)?;
    for k in FACT2_TAIL.skip(1) {
        let (prev, cur) = (values[k as usize - 2], values[k as usize - 1]);
        if cur > prev + 1e-12 {
            return Err(format!(
                "integral increased at level {k}: {prev:e} -> {cur:e}"
            ));
        }
    }
    Ok(values[7])
}

fn sot_continuity(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let (f, op) = sum_instance(ctx, rng);
    let t0 = rng.gen_range(0.0..1.0);
    match sot_continuity_search(rng, &op, &f, t0, ctx.tolerance, ctx.p).map_err(fail)? {
        Some(w) => Ok(w.worst),
        None => Err(format!("no neighbourhood found around t0 = {t0}")),
    }
}

const SCALAR_Q: NormExponent = NormExponent::Finite(1.0);

fn disjointness(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let p = ctx.p;
    let set = random_intervals(rng, 3);
    let rest = StepFn::indicator(1, &set, 1.0).map_err(fail)?.zero_set();
    let f = random_step(rng, 1, 8)
        .indicator_multiply(&set)
        .map_err(fail)?;
    let g = random_step(rng, 1, 8)
        .indicator_multiply(&rest)
        .map_err(fail)?;
    let disjoint = lamperti_functional(&f, &g, p, SCALAR_Q)
        .map_err(fail)?
        .abs();

    let w = rng.gen_range(0.05..0.2);
    let a = rng.gen_range(0.0..1.0 - w);
    let overlap = [Interval::new(a, a + w).map_err(fail)?];
    let outside = StepFn::indicator(1, &overlap, 1.0)
        .map_err(fail)?
        .zero_set();
    let mut on_overlap = || {
        let v: f64 = rng.gen_range(0.1..2.0);
        let v = if rng.gen() { v } else { -v };
        let base = random_step(rng, 1, 8);
        base.indicator_multiply(&outside)
            .and_then(|b| b.add(&StepFn::indicator(1, &overlap, v)?))
    };
    let f2 = on_overlap().map_err(fail)?;
    let g2 = on_overlap().map_err(fail)?;
    let value = lamperti_functional(&f2, &g2, p, SCALAR_Q).map_err(fail)?;
    if p == 2.0 {
        if value.abs() > 1e-12 || disjoint > 1e-12 {
            return Err(format!("functional {value:e} is not blind at p = 2"));
        }
    } else {
        let sign_ok = if p < 2.0 { value < 0.0 } else { value > 0.0 };
        if value.abs() < 1e-6 || !sign_ok {
            return Err(format!("overlapping pair gave {value:e} at p = {p}"));
        }
    }
    Ok(disjoint)
}

fn projection(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let (p, q) = (ctx.p, ctx.q);
    let f = random_step(rng, ctx.d, 8);
    let a = random_intervals(rng, 3);
    let b = random_intervals(rng, 3);
    let pa = band_projection(&a, &f).map_err(fail)?;
    let rest = f.sub(&pa).map_err(fail)?;
    let total = f.norm_p_pow(p, q);
    let defect = (total - pa.norm_p_pow(p, q) - rest.norm_p_pow(p, q)).abs() / total;
    let nested = band_projection(&b, &f)
        .and_then(|g| band_projection(&a, &g))
        .map_err(fail)?;
    let meet = intersect_unions(&a, &b)
        .and_then(|ab| band_projection(&ab, &f))
        .map_err(fail)?;
    if nested != meet {
        return Err("P_A P_B differs from P_(A∩B)".into());
    }
    Ok(defect)
}

fn fubini(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let f = random_step_2d(rng, ctx.d, 6);
    Ok((f.norm_2d(ctx.p, ctx.q) - f.iterated_norm(ctx.p, ctx.q)).abs())
}

fn orbit_paths(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let p = ctx.p;
    let full = rng.gen::<bool>();
    let mut draw = |full: bool| {
        let f = if full {
            random_full_support(rng, 6)
        } else {
            random_partial_support(rng, 6)
        };
        normalize(&f, p, SCALAR_Q)
    };
    let (f, g) = (draw(full), draw(full));
    let other = draw(!full);
    let class = orbit_class(&f, p).map_err(fail)?;
    let path = orbit_path(&f, &g, p, 11).map_err(fail)?;
    let mut err = path[0]
        .sub(&g)
        .map_err(fail)?
        .norm_p(p, SCALAR_Q)
        .max(path[10].sub(&f).map_err(fail)?.norm_p(p, SCALAR_Q));
    for (k, x) in path.iter().enumerate() {
        err = err.max((x.norm_p(p, SCALAR_Q) - 1.0).abs());
        match orbit_class(x, p) {
            Ok(c) if c == class => {}
            Ok(c) => return Err(format!("sample {k} left the orbit ({c:?})")),
            Err(e) => return Err(format!("sample {k}: {e}")),
        }
    }
    match orbit_path(&f, &other, p, 11) {
        Err(Error::OrbitMismatch) => {}
        Err(e) => return Err(format!("cross-orbit pair: {e}")),
        Ok(_) => return Err("cross-orbit pair was accepted".into()),
    }
    if class == OrbitClass::FullSupport && full || class == OrbitClass::PartialSupport && !full {
        Ok(err)
    } else {
        Err(format!("classified as {class:?}"))
    }
}

fn linfty(_: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let n = rng.gen_range(1..=5);
    let t = LinftyIsometry::random(rng, n);
    let m = rng.gen_range(2..=5);
    let r = LinftyIsometry::random(rng, m);
    let s = t.compose(&r);
    let same = s.compose(&r.invert());
    if let Some(w) = linfty_separation(&t, &same).map_err(fail)? {
        return Err(format!("equal maps separated on {:?}", w.set));
    }
    match linfty_separation(&t, &s).map_err(fail)? {
        Some(w) => Ok((1.0 - w.distance).max(0.0)),
        None => Err("distinct maps were not separated".into()),
    }
}

fn lamperti_isometry(ctx: &TrialCtx, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    let spec = XSpec {
        dim: ctx.d,
        q: ctx.q,
    };
    let pieces = rng.gen_range(1..=6);
    let t = random_lamperti_with(rng, pieces, ctx.p, spec);
    let probes: Vec<StepFn> = (0..3).map(|_| random_step(rng, ctx.d, 8)).collect();
    let mut err = t.certify(&probes).map_err(fail)?;
    let inv = t.invert();
    for f in &probes {
        let back = t.apply(f).and_then(|g| inv.apply(&g)).map_err(fail)?;
        let scale = f.norm_p(ctx.p, ctx.q);
        err = err.max(back.sub(f).map_err(fail)?.norm_p(ctx.p, ctx.q) / scale);
    }
    Ok(err)
}
