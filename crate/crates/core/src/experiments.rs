//! Drivers for the structural facts about the isometry group: the disjointness
//! functional, the two orbits of the scalar unit sphere (classification,
//! explicit rearrangements, paths, density) and the total separation of the
//! `L^∞` isometries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotopy::{homotopy_apply, HomotopyTime};
use crate::interval::{Interval, NormExponent, StepFn, SNAP};
use crate::lamperti::{
    check_p, random_isom_field, random_rearrangement, IsomField, LampertiIsometry, Piece,
    RearrangeMap, SumFn, SumIsometry,
};
use crate::numeric::compensated_sum;
use crate::xspace::{lq_norm, XIsom, XSpec};

/// Slack on `||f||_p = 1` for the orbit operations.
pub const UNIT_TOL: f64 = 1e-9;

/// Slack on the support measure when deciding full support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// `||f+g||^p + ||f-g||^p - 2(||f||^p + ||g||^p)`, integrated cell by cell over
/// the common refinement. For `p = 1` this is the norm form
/// `||f+g|| + ||f-g|| - 2(||f|| + ||g||)`.
///
/// On cells where one of the functions vanishes the integrand is exactly zero,
/// so disjointly supported inputs give exactly `0.0`.
pub fn lamperti_functional(f: &StepFn, g: &StepFn, p: f64, q: NormExponent) -> Result<f64> {
    check_p(p)?;
    let (a, b) = f.refine_common(g)?;
    let pow = |v: &[f64]| lq_norm(v, q).powf(p);
    let terms = a.cells().zip(b.values()).map(|((lo, hi, u), v)| {
        let plus: Vec<f64> = u.iter().zip(v).map(|(x, y)| x + y).collect();
        let minus: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
        (hi - lo) * (pow(&plus) + pow(&minus) - 2.0 * (pow(u) + pow(v)))
    });
    Ok(compensated_sum(terms))
}

/// The two orbits of the unit sphere of scalar `L^p[0, 1]` under its isometry group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OrbitClass {
    FullSupport,
    PartialSupport,
}

fn check_unit_scalar(f: &StepFn, p: f64) -> Result<()> {
    check_p(p)?;
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    let n = f.norm_p(p, NormExponent::Finite(1.0));
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnitNorm(n));
    }
    Ok(())
}

pub fn orbit_class(f: &StepFn, p: f64) -> Result<OrbitClass> {
    check_unit_scalar(f, p)?;
    Ok(if f.support_measure() >= 1.0 - SUPPORT_TOL {
        OrbitClass::FullSupport
    } else {
        OrbitClass::PartialSupport
    })
}

/// A run of cells `[lo, hi]` carrying `mass`, spread uniformly along it.
#[derive(Clone, Copy)]
struct MassCell {
    lo: f64,
    hi: f64,
    mass: f64,
}

/// Normalized cumulative masses, pinned to end at exactly 1.
fn cumulative(cells: &[MassCell]) -> Vec<f64> {
    let total = compensated_sum(cells.iter().map(|c| c.mass));
    let mut acc = Vec::with_capacity(cells.len() + 1);
    acc.push(0.0);
    let mut run = 0.0;
    for c in &cells[..cells.len() - 1] {
        run += c.mass;
        acc.push(run / total);
    }
    acc.push(1.0);
    acc
}

/// Position inside `cells[k]` at normalized cumulative mass `mu`.
fn position(cells: &[MassCell], cum: &[f64], k: usize, mu: f64) -> f64 {
    let c = cells[k];
    let frac = ((mu - cum[k]) / (cum[k + 1] - cum[k])).clamp(0.0, 1.0);
    c.lo + frac * (c.hi - c.lo)
}

/// Mass levels closer than this are treated as one.
const MASS_TIE: f64 = 1e-13;

/// Matches equal normalized mass between two families of cells, in order,
/// producing affine pieces from `a`-coordinates to `b`-coordinates. Within a
/// cell the fill is proportional.
fn match_mass(a: &[MassCell], b: &[MassCell]) -> Vec<Piece> {
    let (ca, cb) = (cumulative(a), cumulative(b));
    let (mut ka, mut kb) = (0, 0);
    let (mut sa, mut sb) = (a[0].lo, b[0].lo);
    let mut pieces = Vec::new();
    while ka < a.len() && kb < b.len() {
        let (na, nb) = (ca[ka + 1], cb[kb + 1]);
        let mu = na.min(nb);
        let hit_a = na - mu <= MASS_TIE;
        let hit_b = nb - mu <= MASS_TIE;
        let ea = if hit_a {
            a[ka].hi
        } else {
            position(a, &ca, ka, mu)
        };
        let eb = if hit_b {
            b[kb].hi
        } else {
            position(b, &cb, kb, mu)
        };
        // A level pair that nearly coincides without tying leaves a sliver;
        // the tiling snap closes it.
        if ea - sa > SNAP && eb - sb > SNAP {
            pieces.push(Piece {
                src: Interval::new(sa, ea).expect("ordered cell positions"),
                dst: Interval::new(sb, eb).expect("ordered cell positions"),
            });
        }
        sa = ea;
        sb = eb;
        if hit_a {
            ka += 1;
            if ka < a.len() {
                sa = a[ka].lo;
            }
        }
        if hit_b {
            kb += 1;
            if kb < b.len() {
                sb = b[kb].lo;
            }
        }
    }
    pieces
}

fn split_cells(f: &StepFn, p: f64) -> (Vec<MassCell>, Vec<MassCell>) {
    let mut support = Vec::new();
    let mut zeros = Vec::new();
    for (lo, hi, v) in f.cells() {
        let a = v[0].abs();
        if a > SNAP {
            support.push(MassCell {
                lo,
                hi,
                mass: (hi - lo) * a.powf(p),
            });
        } else {
            zeros.push(MassCell {
                lo,
                hi,
                mass: hi - lo,
            });
        }
    }
    (support, zeros)
}

fn sign_of(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// An isometry `T` with `T f = g` for unit vectors in the same orbit.
///
/// The `|f|^p` mass of the support of `f` is matched in order onto that of
/// `g`, the zero sets are matched proportionally by length, and the sign
/// field makes the signs agree.
pub fn rearrangement_isometry(f: &StepFn, g: &StepFn, p: f64) -> Result<LampertiIsometry> {
    if orbit_class(f, p)? != orbit_class(g, p)? {
        return Err(Error::OrbitMismatch);
    }
    let (fs, fz) = split_cells(f, p);
    let (gs, gz) = split_cells(g, p);
    let mut pieces = match_mass(&fs, &gs);
    if !fz.is_empty() && !gz.is_empty() {
        pieces.extend(match_mass(&fz, &gz));
    }
    let phi = RearrangeMap::with_tolerance(pieces, 1e-9)?;

    let mut by_dst: Vec<Piece> = phi.pieces().to_vec();
    by_dst.sort_by(|a, b| a.dst.lo().total_cmp(&b.dst.lo()));
    let mut breaks = vec![0.0];
    let mut isoms = Vec::with_capacity(by_dst.len());
    for pc in &by_dst {
        let fv = f.eval(0.5 * (pc.src.lo() + pc.src.hi()))[0];
        let gv = g.eval(0.5 * (pc.dst.lo() + pc.dst.hi()))[0];
        let s = if fv.abs() > SNAP && gv.abs() > SNAP {
            sign_of(fv) * sign_of(gv)
        } else {
            1
        };
        breaks.push(pc.dst.hi());
        isoms.push(XIsom::new(vec![0], vec![s])?);
    }
    let sigma = IsomField::new(breaks, isoms)?;
    LampertiIsometry::new(p, XSpec::scalar(), phi, sigma)
}

/// Samples `h(t_k, T) f` at `t_k = k / (samples - 1)`, where `T` is the
/// rearrangement isometry with `T f = g`. The path runs from `g` to `f`.
pub fn orbit_path(f: &StepFn, g: &StepFn, p: f64, samples: usize) -> Result<Vec<StepFn>> {
    if samples < 2 {
        return Err(Error::InvalidSamples(samples));
    }
    let op = SumIsometry::on_component(0, rearrangement_isometry(f, g, p)?);
    let x = SumFn::single(f.clone(), XSpec::scalar())?;
    (0..samples)
        .map(|k| {
            let t = if k + 1 == samples {
                1.0
            } else {
                k as f64 / (samples - 1) as f64
            };
            homotopy_apply(HomotopyTime::new(t)?, &op, &x, p)?.project(0)
        })
        .collect()
}

/// A full-support unit vector within `eps` of the unit vector `g`: fill the
/// zero set with a small constant and renormalize.
pub fn orbit_dense_approx(g: &StepFn, eps: f64, p: f64) -> Result<StepFn> {
    if !(eps.is_finite() && eps > 1e-10) {
        return Err(Error::InvalidTolerance(eps));
    }
    if orbit_class(g, p)? == OrbitClass::FullSupport {
        return Ok(g.clone());
    }
    let q = NormExponent::Finite(1.0);
    let zeros = g.zero_set();
    let z: f64 = zeros.iter().map(Interval::len).sum();
    let mut c = 0.25 * eps * z.powf(-1.0 / p);
    for _ in 0..64 {
        let filled = g.add(&StepFn::indicator(1, &zeros, c)?)?;
        let r = filled.scale(1.0 / filled.norm_p(p, q));
        let close = r.sub(g)?.norm_p(p, q) < eps;
        let unit = (r.norm_p(p, q) - 1.0).abs() <= 1e-12;
        if close && unit && orbit_class(&r, p)? == OrbitClass::FullSupport {
            return Ok(r);
        }
        c *= 0.5;
    }
    Err(Error::InvalidTolerance(eps))
}

/// Isometry of scalar `L^∞[0, 1]`: `f -> s · f∘φ⁻¹` with a `±1` field `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinftyRepr", into = "LinftyRepr")]
pub struct LinftyIsometry {
    inner: LampertiIsometry,
}

#[derive(Serialize, Deserialize)]
struct LinftyRepr {
    phi: RearrangeMap,
    signs: IsomField,
}

impl TryFrom<LinftyRepr> for LinftyIsometry {
    type Error = Error;

    fn try_from(r: LinftyRepr) -> Result<Self> {
        LinftyIsometry::new(r.phi, r.signs)
    }
}

impl From<LinftyIsometry> for LinftyRepr {
    fn from(t: LinftyIsometry) -> Self {
        LinftyRepr {
            phi: t.inner.phi().clone(),
            signs: t.inner.sigma().clone(),
        }
    }
}

impl LinftyIsometry {
    pub fn new(phi: RearrangeMap, signs: IsomField) -> Result<Self> {
        Ok(LinftyIsometry {
            inner: LampertiIsometry::unweighted(XSpec::scalar(), phi, signs)?,
        })
    }

    pub fn identity() -> Self {
        LinftyIsometry::new(RearrangeMap::identity(), IsomField::identity(1)).expect("scalar field")
    }

    pub fn negation() -> Self {
        LinftyIsometry::new(
            RearrangeMap::identity(),
            IsomField::constant(XIsom::negation(1)),
        )
        .expect("scalar field")
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, pieces: usize) -> Self {
        LinftyIsometry::new(
            random_rearrangement(rng, pieces),
            random_isom_field(rng, pieces, 1),
        )
        .expect("scalar field")
    }

    pub fn phi(&self) -> &RearrangeMap {
        self.inner.phi()
    }

    pub fn signs(&self) -> &IsomField {
        self.inner.sigma()
    }

    pub fn apply(&self, f: &StepFn) -> Result<StepFn> {
        self.inner.apply(f)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinftyIsometry) -> LinftyIsometry {
        LinftyIsometry {
            inner: self
                .inner
                .compose(&inner.inner)
                .expect("both act on scalars"),
        }
    }

    pub fn invert(&self) -> LinftyIsometry {
        LinftyIsometry {
            inner: self.inner.invert(),
        }
    }

    /// Breakpoints, in source coordinates, of both the rearrangement and the
    /// pulled-back sign field.
    fn source_breaks(&self) -> Vec<f64> {
        let phi = self.phi();
        let (pulled, _) = phi
            .invert()
            .push_forward(self.signs().breaks(), self.signs().isoms());
        let mut out = phi.src_breaks();
        out.extend(pulled);
        out
    }
}

pub fn linfty_apply(t: &LinftyIsometry, f: &StepFn) -> Result<StepFn> {
    t.apply(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub set: Vec<Interval>,
    pub distance: f64,
}

/// Measure below which `Tχ_A` and `Sχ_A` are considered equal.
const SEPARATION_MEASURE: f64 = 1e-9;

/// Searches the cells `A` of the common source refinement of `t` and `s` for
/// one with `Tχ_A ≠ Sχ_A`, returning `A` and `||Tχ_A - Sχ_A||_∞`. `None` means
/// the two agree on every such indicator, hence everywhere.
pub fn linfty_separation(
    t: &LinftyIsometry,
    s: &LinftyIsometry,
) -> Result<Option<SeparationWitness>> {
    let mut breaks = t.source_breaks();
    breaks.extend(s.source_breaks());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|b, a| *b - *a <= SNAP);
    for w in breaks.windows(2) {
        let set = vec![Interval::new(w[0], w[1])?];
        let chi = StepFn::indicator(1, &set, 1.0)?;
        let diff = t.apply(&chi)?.sub(&s.apply(&chi)?)?;
        if diff.support_measure() > SEPARATION_MEASURE {
            return Ok(Some(SeparationWitness {
                set,
                distance: diff.sup_norm(NormExponent::Infinity),
            }));
        }
    }
    Ok(None)
}
