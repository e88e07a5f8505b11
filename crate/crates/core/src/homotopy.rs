//! The contraction homotopy of the isometry group of an `L^p`-sum.
//!
//! For `t ∈ [0, 1]` and an isometry `T`,
//!
//! ```text
//! h(t, T)(Σ f_i) = Σ α(t, f_i) + Σ γ(t, P_i T (Σ β(t, f_i)))
//! α(t, f)    = χ_[0,t] f
//! β(t, f)(s) = (1 - t)^{1/p} f(t + (1 - t) s)
//! γ(t, g)(u) = (1 - t)^{-1/p} g((u - t) / (1 - t))   on [t, 1], 0 on [0, t)
//! ```
//!
//! with `β(1, ·) = γ(1, ·) = 0`. `β` squeezes the band `[t, 1]` onto `[0, 1]`
//! isometrically, `T` acts there, and `γ` puts the result back, so `h(t, T)` is
//! an isometry with `h(0, T) = T` and `h(1, T) = id`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, NormExponent, StepFn, SNAP};
use crate::lamperti::{
    check_p, IsomField, LampertiIsometry, Piece, RearrangeMap, SumFn, SumIsometry,
};
use crate::xspace::XIsom;

/// A time parameter in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HomotopyTime(f64);

impl HomotopyTime {
    pub fn new(t: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&t) {
            Ok(HomotopyTime(t))
        } else {
            Err(Error::InvalidTime(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - t` at or below the snap tolerance counts as the end point.
    fn at_end(self) -> bool {
        1.0 - self.0 <= SNAP
    }
}

impl TryFrom<f64> for HomotopyTime {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        HomotopyTime::new(t)
    }
}

impl From<HomotopyTime> for f64 {
    fn from(t: HomotopyTime) -> f64 {
        t.0
    }
}

fn time(t: f64) -> Result<HomotopyTime> {
    HomotopyTime::new(t)
}

/// `χ_[0,t] f`.
pub fn alpha(t: HomotopyTime, f: &StepFn) -> StepFn {
    if t.0 <= SNAP {
        StepFn::zero(f.dim())
    } else if t.at_end() {
        f.clone()
    } else {
        f.indicator_multiply(&[Interval::from_raw(0.0, t.0)])
            .expect("single interval")
    }
}

/// `s -> f(t + (1 - t) s)`, for `t < 1`.
fn squeeze(t: f64, f: &StepFn) -> StepFn {
    if t == 0.0 {
        return f.clone();
    }
    f.pullback_affine(t, 1.0 - t)
        .expect("[t, 1] lies in [0, 1]")
}

/// `u -> g((u - t) / (1 - t))` on `[t, 1]`, 0 on `[0, t)`, for `t < 1`.
fn unsqueeze(t: f64, g: &StepFn, scale: f64) -> StepFn {
    if t == 0.0 {
        return g.scale(scale);
    }
    let len = 1.0 - t;
    let mut breaks = vec![0.0, t];
    let mut values = vec![vec![0.0; g.dim()]];
    for (_, hi, v) in g.cells() {
        breaks.push(if hi == 1.0 { 1.0 } else { t + len * hi });
        values.push(v.iter().map(|x| scale * x).collect());
    }
    StepFn::with_dim(g.dim(), breaks, values).expect("band image of a valid step function")
}

/// `s -> (1 - t)^{1/p} f(t + (1 - t) s)`.
pub fn beta(t: HomotopyTime, f: &StepFn, p: f64) -> StepFn {
    if t.at_end() {
        return StepFn::zero(f.dim());
    }
    if t.0 == 0.0 {
        return f.clone();
    }
    let len = 1.0 - t.0;
    squeeze(t.0, f).scale(len.powf(1.0 / p))
}

/// Inverse of [`beta`] on the band `[t, 1]`: `u -> (1 - t)^{-1/p} g((u - t) / (1 - t))`.
pub fn gamma(t: HomotopyTime, g: &StepFn, p: f64) -> StepFn {
    if t.at_end() {
        return StepFn::zero(g.dim());
    }
    if t.0 == 0.0 {
        return g.clone();
    }
    unsqueeze(t.0, g, (1.0 - t.0).powf(-1.0 / p))
}

/// The two disjointly supported summands of `h(t, T) F`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyParts {
    /// `Σ α(t, f_i)`, supported in `[0, t]` per component.
    pub alpha: SumFn,
    /// `Σ γ(t, P_i T Σ β(t, f_j))`, supported in `[t, 1]` per component.
    pub gamma: SumFn,
}

impl HomotopyParts {
    pub fn total(&self) -> SumFn {
        self.alpha.add(&self.gamma).expect("parts share a shape")
    }
}

/// `T` is linear, so the factors `(1 - t)^{±1/p}` of `β` and `γ` cancel; they
/// are left out here to avoid the rounding.
pub fn homotopy_parts(
    t: HomotopyTime,
    op: &SumIsometry,
    f: &SumFn,
    p: f64,
) -> Result<HomotopyParts> {
    check_p(p)?;
    op.check_exponent(p)?;
    let alpha_part = f.map(|_, fi| Ok(alpha(t, fi)))?;
    let gamma_part = if t.at_end() {
        f.zero_like()
    } else {
        let squeezed = f.map(|_, fi| Ok(squeeze(t.0, fi)))?;
        op.apply(&squeezed)?
            .map(|_, gi| Ok(unsqueeze(t.0, gi, 1.0)))?
    };
    Ok(HomotopyParts {
        alpha: alpha_part,
        gamma: gamma_part,
    })
}

/// `h(t, T) F`.
pub fn homotopy_apply(t: HomotopyTime, op: &SumIsometry, f: &SumFn, p: f64) -> Result<SumFn> {
    Ok(homotopy_parts(t, op, f, p)?.total())
}

/// One sample of `t -> h(t, T) F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub norm_hf: f64,
    /// `||h(t, T) F - h(t0, T) F||`.
    pub dist_to_h_t0: f64,
    /// `||h(t, T) F - T F||`.
    pub dist_to_t_action: f64,
    /// `||h(t, T) F - F||`.
    pub dist_to_identity_action: f64,
}

/// Samples the homotopy at `samples` uniform times in `[0, 1]`.
pub fn homotopy_trace(
    op: &SumIsometry,
    f: &SumFn,
    p: f64,
    samples: usize,
    t0: f64,
) -> Result<Vec<TraceRow>> {
    if samples < 2 {
        return Err(Error::InvalidSamples(samples));
    }
    let base = homotopy_apply(time(t0)?, op, f, p)?;
    let acted = op.apply(f)?;
    (0..samples)
        .map(|k| {
            let t = if k + 1 == samples {
                1.0
            } else {
                k as f64 / (samples - 1) as f64
            };
            let h = homotopy_apply(time(t)?, op, f, p)?;
            Ok(TraceRow {
                t,
                norm_hf: h.norm(p),
                dist_to_h_t0: h.sub(&base)?.norm(p),
                dist_to_t_action: h.sub(&acted)?.norm(p),
                dist_to_identity_action: h.sub(f)?.norm(p),
            })
        })
        .collect()
}

/// `∫_{t0}^1 ||f(h_t(s)) - f(h_{t0}(s))||^p ds` where `h_t` maps `[t0, 1]`
/// affinely onto `[t, 1]`.
///
/// Substituting `s = t0 + (1 - t0) u` turns both compositions into affine
/// pullbacks on `[0, 1]`, so the integral is exact.
pub fn fact2_integral(f: &StepFn, t0: f64, t: f64, p: f64, q: NormExponent) -> Result<f64> {
    if !(0.0..1.0).contains(&t0) {
        return Err(Error::InvalidT0(t0));
    }
    time(t)?;
    check_p(p)?;
    let base = f.pullback_affine(t0, 1.0 - t0)?;
    let moved = if 1.0 - t <= SNAP {
        StepFn::constant(f.values()[f.num_cells() - 1].clone())?
    } else {
        f.pullback_affine(t, 1.0 - t)?
    };
    Ok((1.0 - t0) * moved.sub(&base)?.norm_p_pow(p, q))
}

/// For each `δ`, the largest `||h(t, T) F - h(t0, T) F||` over
/// `t ∈ {t0 ± δ, t0 ± δ/2} ∩ [0, 1]`.
pub fn continuity_probe(
    op: &SumIsometry,
    f: &SumFn,
    t0: f64,
    deltas: &[f64],
    p: f64,
) -> Result<Vec<f64>> {
    let base = homotopy_apply(time(t0)?, op, f, p)?;
    deltas
        .iter()
        .map(|&delta| {
            if delta.is_nan() || delta <= 0.0 {
                return Err(Error::InvalidTime(delta));
            }
            let mut worst = 0.0_f64;
            for t in [t0 - delta, t0 + delta, t0 - delta / 2.0, t0 + delta / 2.0] {
                if (0.0..=1.0).contains(&t) {
                    let moved = homotopy_apply(time(t)?, op, f, p)?;
                    worst = worst.max(moved.sub(&base)?.norm(p));
                }
            }
            Ok(worst)
        })
        .collect()
}

/// Neighbourhood `{|t - t0| < time_radius} × {S : ||(S - T) x_j|| < probe_radius}`
/// on which every tested `(t, S)` satisfied `||h(t, S) F - h(t0, T) F|| < ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityWitness {
    pub time_radius: f64,
    pub probe_radius: f64,
    /// The probes `x_j = β(t0, f_j)`, one per nonzero component.
    pub probes: Vec<SumFn>,
    /// Number of `(t, S)` pairs evaluated at the accepted level.
    pub tested: usize,
    /// Number of distinct operators `S ≠ T` found inside the probe neighbourhood.
    pub perturbations: usize,
    /// Largest distance observed at the accepted level.
    pub worst: f64,
}

/// At `p = 3` the distance only falls like `δ^{1/3}`, and steep branches give
/// large constants, so the time radius is allowed to reach about `4e-15`.
const SEARCH_LEVELS: u32 = 24;

/// Operators near `T`: `T ∘ R` where `R` flips the sign on a short interval
/// or shifts mass slightly across an interior point of one component.
fn perturbations<R: Rng + ?Sized>(
    rng: &mut R,
    op: &SumIsometry,
    f: &SumFn,
    p: f64,
    probes: &[SumFn],
    radius: f64,
) -> Result<Vec<SumIsometry>> {
    let mut found = Vec::new();
    for c in f.components() {
        let spec = c.xspec;
        let a: f64 = rng.gen_range(0.05..0.95);
        let flip_sign = XIsom::random(spec.dim, rng);
        for kind in 0..2 {
            let mut size = 0.25;
            for _ in 0..60 {
                let local = if kind == 0 {
                    let lo = a * (1.0 - size);
                    let (b0, b1) = (lo, lo + size);
                    let breaks = vec![0.0, b0, b1, 1.0];
                    let id = XIsom::identity(spec.dim);
                    let sigma = IsomField::new(breaks, vec![id.clone(), flip_sign.clone(), id])?;
                    LampertiIsometry::new(p, spec, RearrangeMap::identity(), sigma)?
                } else {
                    let shift = size * a.min(1.0 - a);
                    let pieces = vec![
                        Piece {
                            src: Interval::new(0.0, a)?,
                            dst: Interval::new(0.0, a + shift)?,
                        },
                        Piece {
                            src: Interval::new(a, 1.0)?,
                            dst: Interval::new(a + shift, 1.0)?,
                        },
                    ];
                    LampertiIsometry::new(
                        p,
                        spec,
                        RearrangeMap::new(pieces)?,
                        IsomField::identity(spec.dim),
                    )?
                };
                let candidate = op.compose(&SumIsometry::on_component(c.id, local));
                let d = crate::lamperti::sot_distance(&candidate, op, probes, p)?;
                if d < radius {
                    if d > 0.0 {
                        found.push(candidate);
                    }
                    break;
                }
                size *= 0.5;
                if size <= 1e-9 {
                    break;
                }
            }
        }
    }
    Ok(found)
}

/// Searches for a neighbourhood of `(t0, T)` mapped by `h` into the `ε`-ball
/// around `h(t0, T) F`, in the shape used by the continuity argument: probes
/// `x_j = β(t0, f_j)`, probe radius and time radius shrunk geometrically from
/// `ε / 4n` and `1/4` until every tested pair passes.
pub fn sot_continuity_search<R: Rng + ?Sized>(
    rng: &mut R,
    op: &SumIsometry,
    f: &SumFn,
    t0: f64,
    eps: f64,
    p: f64,
) -> Result<Option<ContinuityWitness>> {
    let t0_time = time(t0)?;
    let target = homotopy_apply(t0_time, op, f, p)?;
    let active: Vec<u32> = f
        .components()
        .iter()
        .filter(|c| !c.f.is_zero())
        .map(|c| c.id)
        .collect();
    let n = active.len().max(1) as f64;
    let probes = active
        .iter()
        .map(|&id| {
            f.map(|i, fi| {
                Ok(if i == id {
                    beta(t0_time, fi, p)
                } else {
                    StepFn::zero(fi.dim())
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let probe_set: Vec<SumFn> = if probes.is_empty() {
        vec![f.clone()]
    } else {
        probes.clone()
    };

    for level in 0..SEARCH_LEVELS {
        let shrink = 0.5_f64.powi(level as i32);
        let time_radius = 0.25 * 0.25_f64.powi(level as i32);
        let probe_radius = eps / (4.0 * n) * shrink;

        let mut ops = vec![op.clone()];
        let near = perturbations(rng, op, f, p, &probe_set, probe_radius)?;
        let perturbed = near.len();
        ops.extend(near);
        ops.shuffle(rng);

        let mut times = vec![t0];
        for frac in [0.999, 0.5, 0.25] {
            times.extend([t0 - frac * time_radius, t0 + frac * time_radius]);
        }
        times.retain(|t| (0.0..=1.0).contains(t));

        let mut worst = 0.0_f64;
        let mut tested = 0;
        let mut ok = true;
        'outer: for s in &ops {
            for &t in &times {
                let d = homotopy_apply(time(t)?, s, f, p)?.sub(&target)?.norm(p);
                tested += 1;
                worst = worst.max(d);
                if d >= eps {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Ok(Some(ContinuityWitness {
                time_radius,
                probe_radius,
                probes,
                tested,
                perturbations: perturbed,
                worst,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lamperti::random_lamperti;
    use crate::xspace::XSpec;

    const Q: NormExponent = NormExponent::Finite(2.0);

    fn t(x: f64) -> HomotopyTime {
        HomotopyTime::new(x).unwrap()
    }

    fn chi(lo: f64, hi: f64) -> StepFn {
        StepFn::indicator(1, &[Interval::new(lo, hi).unwrap()], 1.0).unwrap()
    }

    #[test]
    fn time_bounds() {
        assert!(HomotopyTime::new(-0.1).is_err());
        assert!(HomotopyTime::new(1.5).is_err());
        assert!(HomotopyTime::new(f64::NAN).is_err());
        assert_eq!(t(0.25).value(), 0.25);
    }

    #[test]
    fn alpha_examples() {
        let f = StepFn::scalar(vec![0.0, 0.6, 1.0], vec![1.0, -3.0]).unwrap();
        assert_eq!(alpha(t(1.0), &f), f);
        assert!(alpha(t(0.0), &f).is_zero());
        assert!((alpha(t(0.3), &chi(0.0, 1.0)).norm_p(1.0, Q) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn beta_examples() {
        let f = StepFn::scalar(vec![0.0, 0.6, 1.0], vec![1.0, -3.0]).unwrap();
        assert_eq!(beta(t(0.0), &f, 2.0), f);
        let b = beta(t(0.5), &chi(0.5, 1.0), 1.0);
        assert_eq!(b, StepFn::scalar(vec![0.0, 1.0], vec![0.5]).unwrap());
        assert_eq!(b.norm_p(1.0, Q), 0.5);
        let b2 = beta(t(0.5), &chi(0.0, 1.0), 2.0);
        assert!((b2.values()[0][0] - 0.5f64.sqrt()).abs() < 1e-16);
        assert!((b2.norm_p_pow(2.0, Q) - 0.5).abs() < 1e-15);
        assert!(beta(t(1.0), &f, 1.5).is_zero());
    }

    #[test]
    fn gamma_examples() {
        let g = StepFn::scalar(vec![0.0, 0.3, 1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(gamma(t(0.0), &g, 3.0), g);
        let four = gamma(t(0.75), &chi(0.0, 1.0), 1.0);
        assert_eq!(four.breaks(), &[0.0, 0.75, 1.0]);
        assert_eq!(four.values(), &[vec![0.0], vec![4.0]]);
        assert_eq!(four.norm_p(1.0, Q), 1.0);
        assert!(gamma(t(1.0), &g, 2.0).is_zero());
    }

    #[test]
    fn gamma_undoes_beta_on_band() {
        let f = StepFn::scalar(vec![0.0, 0.2, 0.55, 0.9, 1.0], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        for &s in &[0.25, 0.5, 0.9] {
            for p in [1.0, 1.5, 2.0, 3.0] {
                let back = gamma(t(s), &beta(t(s), &f, p), p);
                let band = f
                    .indicator_multiply(&[Interval::new(s, 1.0).unwrap()])
                    .unwrap();
                assert!(back.approx_eq(&band, 1e-12, 1e-12), "{back:?} vs {band:?}");
            }
        }
    }

    #[test]
    fn homotopy_endpoints_and_identity() {
        let spec = XSpec::new(2, Q).unwrap();
        let f = SumFn::single(
            crate::sample::random_step(
                &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5),
                2,
                6,
            ),
            spec,
        )
        .unwrap();
        let op = SumIsometry::on_component(0, random_lamperti(3, 4, 1.5, spec));
        let at0 = homotopy_apply(t(0.0), &op, &f, 1.5).unwrap();
        assert_eq!(at0, op.apply(&f).unwrap());
        let at1 = homotopy_apply(t(1.0), &op, &f, 1.5).unwrap();
        assert_eq!(at1, f);
        for s in [0.1, 0.37, 0.5, 0.99] {
            let same = homotopy_apply(t(s), &SumIsometry::identity(), &f, 1.5).unwrap();
            assert!(same.sub(&f).unwrap().norm(1.5) <= 1e-12);
        }
        let wrong_p = homotopy_apply(t(0.5), &op, &f, 2.0);
        assert!(matches!(wrong_p, Err(Error::IncompatibleSpaces(_))));
    }

    #[test]
    fn fact2_examples() {
        let f = chi(0.0, 0.5);
        let v = fact2_integral(&f, 0.0, 0.2, 1.0, Q).unwrap();
        assert!((v - 0.125).abs() <= 1e-12, "{v}");
        assert_eq!(fact2_integral(&f, 0.3, 0.3, 2.0, Q).unwrap(), 0.0);
        let c = StepFn::constant(vec![2.0, -1.0]).unwrap();
        for s in [0.0, 0.4, 1.0] {
            assert_eq!(fact2_integral(&c, 0.2, s, 1.5, Q).unwrap(), 0.0);
        }
        assert!(matches!(
            fact2_integral(&f, 1.0, 0.5, 1.0, Q),
            Err(Error::InvalidT0(_))
        ));
        assert!(matches!(
            fact2_integral(&f, 0.2, 1.5, 1.0, Q),
            Err(Error::InvalidTime(_))
        ));
    }

    #[test]
    fn fact2_matches_riemann_sum() {
        // midpoint rule with 10^6 nodes on s ∈ [t0, 1]
        let f = chi(0.0, 0.5);
        let (t0, s, n) = (0.0, 0.2, 1_000_000);
        let h = |tt: f64, x: f64| (tt - t0) / (1.0 - t0) + (1.0 - tt) / (1.0 - t0) * x;
        let width = (1.0 - t0) / n as f64;
        let riemann: f64 = (0..n)
            .map(|k| {
                let x = t0 + (k as f64 + 0.5) * width;
                (f.eval(h(s, x))[0] - f.eval(h(t0, x))[0]).abs() * width
            })
            .sum();
        assert!((riemann - 0.125).abs() < 1e-5, "{riemann}");
    }

    #[test]
    fn continuity_probe_trivial_cases() {
        let spec = XSpec::scalar();
        let op = SumIsometry::on_component(0, random_lamperti(1, 3, 2.0, spec));
        let zero = SumFn::single(StepFn::zero(1), spec).unwrap();
        let deltas = [0.25, 0.0625, 0.015625];
        assert_eq!(
            continuity_probe(&op, &zero, 0.5, &deltas, 2.0).unwrap(),
            vec![0.0; 3]
        );
        let f = SumFn::single(
            StepFn::scalar(vec![0.0, 0.4, 1.0], vec![1.0, -1.0]).unwrap(),
            spec,
        )
        .unwrap();
        let id = continuity_probe(&SumIsometry::identity(), &f, 0.5, &deltas, 2.0).unwrap();
        assert!(id.iter().all(|&d| d <= 1e-12));
        assert!(continuity_probe(&op, &f, 0.5, &[0.0], 2.0).is_err());
    }
}
