//! Lamperti-form isometries of `L^p([0,1], X)`.
//!
//! An isometry acts as
//!
//! ```text
//! (T f)(t) = σ(t) · (|src_k| / |dst_k|)^{1/p} · f(φ⁻¹(t)),   t ∈ dst_k,
//! ```
//!
//! where `φ` sends each source interval `src_k` affinely onto `dst_k`, the
//! ratio is the Radon–Nikodym density of the rearranged measure, and `σ` is a
//! piecewise-constant field of signed permutations of `X`. The module also
//! holds band projections, finite `L^p`-sums and their block isometries, and
//! the finite-probe strong-operator distance.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{canonical_cells, joint_cells, locate, Interval, StepFn, SNAP};
use crate::numeric::compensated_sum;
use crate::xspace::{XIsom, XSpec};

/// One affine branch of a rearrangement: `src` is mapped increasingly onto `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub src: Interval,
    pub dst: Interval,
}

impl Piece {
    pub fn forward(&self, x: f64) -> f64 {
        affine_between(self.src, self.dst, x)
    }

    pub fn backward(&self, t: f64) -> f64 {
        affine_between(self.dst, self.src, t)
    }

    /// `|src| / |dst|`, the density of the transported measure on `dst`.
    pub fn density(&self) -> f64 {
        self.src.len() / self.dst.len()
    }

    /// `density^{1/p}`; identically 1 for `p = ∞`.
    pub fn weight(&self, p: f64) -> f64 {
        let d = self.density();
        if p == f64::INFINITY {
            1.0
        } else if p == 1.0 {
            d
        } else {
            d.powf(1.0 / p)
        }
    }
}

/// Affine increasing map `from -> to`, exact on the endpoints.
fn affine_between(from: Interval, to: Interval, x: f64) -> f64 {
    if (x - from.lo()).abs() <= SNAP {
        to.lo()
    } else if (x - from.hi()).abs() <= SNAP {
        to.hi()
    } else {
        to.lo() + (x - from.lo()) * (to.len() / from.len())
    }
}

/// Checks that `intervals` tile `[0, 1]` up to `tol` and returns them snapped
/// so that consecutive intervals share endpoints exactly. Input order is kept.
fn snap_tiling(intervals: &[Interval], tol: f64, what: &str) -> Result<Vec<Interval>> {
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&a, &b| intervals[a].lo().total_cmp(&intervals[b].lo()));
    let mut out = intervals.to_vec();
    let mut end = 0.0;
    for (rank, &k) in order.iter().enumerate() {
        let iv = intervals[k];
        if (iv.lo() - end).abs() > tol {
            return Err(Error::InvalidPartition(format!(
                "{what} intervals leave a gap or overlap at {end}"
            )));
        }
        let hi = if rank + 1 == order.len() {
            1.0
        } else {
            iv.hi()
        };
        if hi - end <= SNAP {
            return Err(Error::InvalidPartition(format!(
                "{what} interval collapses at {end}"
            )));
        }
        out[k] = Interval::from_raw(end, hi);
        end = hi;
    }
    if (intervals[order[order.len() - 1]].hi() - 1.0).abs() > tol {
        return Err(Error::InvalidPartition(format!(
            "{what} intervals do not reach 1"
        )));
    }
    Ok(out)
}

/// Orientation-preserving piecewise-affine bijection of `[0, 1]` (mod null sets).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Piece>", into = "Vec<Piece>")]
pub struct RearrangeMap {
    /// Sorted by source.
    pieces: Vec<Piece>,
}

impl TryFrom<Vec<Piece>> for RearrangeMap {
    type Error = Error;

    fn try_from(pieces: Vec<Piece>) -> Result<Self> {
        RearrangeMap::new(pieces)
    }
}

impl From<RearrangeMap> for Vec<Piece> {
    fn from(m: RearrangeMap) -> Self {
        m.pieces
    }
}

impl RearrangeMap {
    /// Both the source and the destination intervals must tile `[0, 1]` up to
    /// [`SNAP`]-sized gaps; they are snapped to share endpoints exactly.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        RearrangeMap::with_tolerance(pieces, SNAP)
    }

    pub(crate) fn with_tolerance(mut pieces: Vec<Piece>, tol: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPartition("no pieces".into()));
        }
        pieces.sort_by(|a, b| a.src.lo().total_cmp(&b.src.lo()));
        let src: Vec<Interval> = pieces.iter().map(|p| p.src).collect();
        let dst: Vec<Interval> = pieces.iter().map(|p| p.dst).collect();
        let src = snap_tiling(&src, tol, "source")?;
        let dst = snap_tiling(&dst, tol, "destination")?;
        let pieces = src
            .into_iter()
            .zip(dst)
            .map(|(src, dst)| Piece { src, dst })
            .collect();
        Ok(RearrangeMap { pieces })
    }

    pub fn identity() -> Self {
        RearrangeMap {
            pieces: vec![Piece {
                src: Interval::unit(),
                dst: Interval::unit(),
            }],
        }
    }

    /// Exchange of the two halves of `[0, 1]`.
    pub fn half_swap() -> Self {
        let (a, b) = (Interval::from_raw(0.0, 0.5), Interval::from_raw(0.5, 1.0));
        RearrangeMap {
            pieces: vec![Piece { src: a, dst: b }, Piece { src: b, dst: a }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Source breakpoints (pieces are stored in source order).
    pub fn src_breaks(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.pieces.iter().map(|p| p.src.hi()))
            .collect()
    }

    /// Piece indices sorted by destination.
    fn dst_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.pieces.len()).collect();
        order.sort_by(|&a, &b| self.pieces[a].dst.lo().total_cmp(&self.pieces[b].dst.lo()));
        order
    }

    pub fn forward(&self, x: f64) -> f64 {
        let k = locate(&self.src_breaks(), x);
        self.pieces[k].forward(x)
    }

    pub fn backward(&self, t: f64) -> f64 {
        let order = self.dst_order();
        let breaks: Vec<f64> = std::iter::once(0.0)
            .chain(order.iter().map(|&k| self.pieces[k].dst.hi()))
            .collect();
        self.pieces[order[locate(&breaks, t)]].backward(t)
    }

    pub fn invert(&self) -> RearrangeMap {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                src: p.dst,
                dst: p.src,
            })
            .collect();
        RearrangeMap::new(pieces).expect("inverse of a valid rearrangement")
    }

    pub fn is_identity(&self) -> bool {
        self.pieces.iter().all(|p| p.src == p.dst)
    }

    /// Transports piecewise data given in source coordinates to destination
    /// coordinates. Each output cell carries the index of the piece it came from.
    pub(crate) fn push_forward<T: Clone>(
        &self,
        breaks: &[f64],
        values: &[T],
    ) -> (Vec<f64>, Vec<(T, usize)>) {
        let m = values.len();
        let mut out_breaks = vec![0.0];
        let mut out_values = Vec::new();
        for k in self.dst_order() {
            let piece = self.pieces[k];
            let mut j = locate(breaks, piece.src.lo());
            loop {
                out_values.push((values[j].clone(), k));
                let next = breaks[j + 1];
                if next >= piece.src.hi() || j + 1 == m {
                    out_breaks.push(piece.dst.hi());
                    break;
                }
                out_breaks.push(piece.forward(next));
                j += 1;
            }
        }
        (out_breaks, out_values)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &RearrangeMap) -> RearrangeMap {
        let inner_order = inner.dst_order();
        let inner_dst: Vec<f64> = std::iter::once(0.0)
            .chain(inner_order.iter().map(|&k| inner.pieces[k].dst.hi()))
            .collect();
        let pieces = joint_cells(&inner_dst, &self.src_breaks())
            .into_iter()
            .filter_map(|c| {
                let a = inner.pieces[inner_order[c.left]];
                let b = self.pieces[c.right];
                let (s0, s1) = (a.backward(c.lo), a.backward(c.hi));
                let (d0, d1) = (b.forward(c.lo), b.forward(c.hi));
                (s1 - s0 > SNAP && d1 - d0 > SNAP).then(|| Piece {
                    src: Interval::from_raw(s0, s1),
                    dst: Interval::from_raw(d0, d1),
                })
            })
            .collect();
        // Pieces collapsed under a steep branch leave gaps far below any
        // tested tolerance; close them.
        RearrangeMap::with_tolerance(pieces, 1e-9).expect("composition of valid rearrangements")
    }
}

/// Piecewise-constant field `[0, 1] -> G_X` of signed permutations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsomFieldRepr", into = "IsomFieldRepr")]
pub struct IsomField {
    breaks: Vec<f64>,
    isoms: Vec<XIsom>,
}

#[derive(Serialize, Deserialize)]
struct IsomFieldRepr {
    breaks: Vec<f64>,
    isoms: Vec<XIsom>,
}

impl TryFrom<IsomFieldRepr> for IsomField {
    type Error = Error;

    fn try_from(r: IsomFieldRepr) -> Result<Self> {
        IsomField::new(r.breaks, r.isoms)
    }
}

impl From<IsomField> for IsomFieldRepr {
    fn from(f: IsomField) -> Self {
        IsomFieldRepr {
            breaks: f.breaks,
            isoms: f.isoms,
        }
    }
}

impl IsomField {
    pub fn new(breaks: Vec<f64>, isoms: Vec<XIsom>) -> Result<Self> {
        if let Some(first) = isoms.first() {
            if let Some(bad) = isoms.iter().find(|s| s.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: bad.dim(),
                });
            }
        }
        let (breaks, isoms) = canonical_cells(&breaks, &isoms)?;
        Ok(IsomField { breaks, isoms })
    }

    pub fn constant(isom: XIsom) -> Self {
        IsomField {
            breaks: vec![0.0, 1.0],
            isoms: vec![isom],
        }
    }

    pub fn identity(dim: usize) -> Self {
        IsomField::constant(XIsom::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.isoms[0].dim()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn isoms(&self) -> &[XIsom] {
        &self.isoms
    }

    pub fn at(&self, x: f64) -> &XIsom {
        &self.isoms[locate(&self.breaks, x)]
    }

    pub fn is_identity(&self) -> bool {
        self.isoms.iter().all(XIsom::is_identity)
    }

    /// Pointwise `self(x) ∘ inner(x)`.
    fn compose_pointwise(&self, inner: &IsomField) -> IsomField {
        let cells = joint_cells(&self.breaks, &inner.breaks);
        let mut breaks = vec![0.0];
        let mut isoms = Vec::with_capacity(cells.len());
        for c in cells {
            breaks.push(c.hi);
            isoms.push(
                self.isoms[c.left]
                    .compose(&inner.isoms[c.right])
                    .expect("fields share a dimension"),
            );
        }
        IsomField::new(breaks, isoms).expect("refinement of valid fields")
    }

    /// `t -> self(φ⁻¹(t))`.
    fn transport(&self, phi: &RearrangeMap, invert_values: bool) -> IsomField {
        let (breaks, cells) = phi.push_forward(&self.breaks, &self.isoms);
        let isoms = cells
            .into_iter()
            .map(|(s, _)| if invert_values { s.invert() } else { s })
            .collect();
        IsomField::new(breaks, isoms).expect("transport of a valid field")
    }
}

/// Isometry of `L^p([0,1], X)` in Lamperti form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LampertiRepr", into = "LampertiRepr")]
pub struct LampertiIsometry {
    p: f64,
    xspec: XSpec,
    phi: RearrangeMap,
    sigma: IsomField,
}

#[derive(Serialize, Deserialize)]
struct LampertiRepr {
    p: f64,
    xspec: XSpec,
    phi: RearrangeMap,
    sigma: IsomField,
}

impl TryFrom<LampertiRepr> for LampertiIsometry {
    type Error = Error;

    fn try_from(r: LampertiRepr) -> Result<Self> {
        LampertiIsometry::new(r.p, r.xspec, r.phi, r.sigma)
    }
}

impl From<LampertiIsometry> for LampertiRepr {
    fn from(t: LampertiIsometry) -> Self {
        LampertiRepr {
            p: t.p,
            xspec: t.xspec,
            phi: t.phi,
            sigma: t.sigma,
        }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

impl LampertiIsometry {
    pub fn new(p: f64, xspec: XSpec, phi: RearrangeMap, sigma: IsomField) -> Result<Self> {
        check_p(p)?;
        xspec.check(sigma.dim())?;
        Ok(LampertiIsometry {
            p,
            xspec,
            phi,
            sigma,
        })
    }

    /// Unweighted form `f -> σ · f∘φ⁻¹`, the isometries of `L^∞`.
    pub(crate) fn unweighted(xspec: XSpec, phi: RearrangeMap, sigma: IsomField) -> Result<Self> {
        xspec.check(sigma.dim())?;
        Ok(LampertiIsometry {
            p: f64::INFINITY,
            xspec,
            phi,
            sigma,
        })
    }

    pub fn identity(p: f64, xspec: XSpec) -> Self {
        LampertiIsometry {
            p,
            xspec,
            phi: RearrangeMap::identity(),
            sigma: IsomField::identity(xspec.dim),
        }
    }

    /// `f -> -f`.
    pub fn negation(p: f64, xspec: XSpec) -> Self {
        LampertiIsometry {
            p,
            xspec,
            phi: RearrangeMap::identity(),
            sigma: IsomField::constant(XIsom::negation(xspec.dim)),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn xspec(&self) -> XSpec {
        self.xspec
    }

    pub fn phi(&self) -> &RearrangeMap {
        &self.phi
    }

    pub fn sigma(&self) -> &IsomField {
        &self.sigma
    }

    pub fn is_identity(&self) -> bool {
        self.phi.is_identity() && self.sigma.is_identity()
    }

    pub fn apply(&self, f: &StepFn) -> Result<StepFn> {
        self.xspec.check(f.dim())?;
        let (breaks, cells) = self.phi.push_forward(f.breaks(), f.values());
        let values = cells
            .into_iter()
            .map(|(v, k)| {
                let w = self.phi.pieces[k].weight(self.p);
                v.into_iter().map(|x| w * x).collect()
            })
            .collect();
        let moved = StepFn::with_dim(f.dim(), breaks, values)?;
        if self.sigma.is_identity() {
            return Ok(moved);
        }
        let cells = joint_cells(moved.breaks(), &self.sigma.breaks);
        let mut breaks = vec![0.0];
        let mut values = Vec::with_capacity(cells.len());
        for c in cells {
            breaks.push(c.hi);
            values.push(self.sigma.isoms[c.right].apply_unchecked(&moved.values()[c.left]));
        }
        StepFn::with_dim(f.dim(), breaks, values)
    }

    fn check_compatible(&self, other: &LampertiIsometry) -> Result<()> {
        if self.p != other.p {
            return Err(Error::IncompatibleSpaces(format!(
                "exponents differ: {} vs {}",
                self.p, other.p
            )));
        }
        if self.xspec != other.xspec {
            return Err(Error::IncompatibleSpaces("value spaces differ".into()));
        }
        Ok(())
    }

    /// `self ∘ inner`: the isometry `f -> self(inner(f))`.
    pub fn compose(&self, inner: &LampertiIsometry) -> Result<LampertiIsometry> {
        self.check_compatible(inner)?;
        let phi = self.phi.compose(&inner.phi);
        let moved = inner.sigma.transport(&self.phi, false);
        let sigma = self.sigma.compose_pointwise(&moved);
        Ok(LampertiIsometry {
            p: self.p,
            xspec: self.xspec,
            phi,
            sigma,
        })
    }

    pub fn invert(&self) -> LampertiIsometry {
        let phi = self.phi.invert();
        let sigma = self.sigma.transport(&phi, true);
        LampertiIsometry {
            p: self.p,
            xspec: self.xspec,
            phi,
            sigma,
        }
    }

    /// Largest relative norm defect `| ||Tf|| - ||f|| | / ||f||` over `probes`.
    pub fn certify(&self, probes: &[StepFn]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for f in probes {
            let before = f.norm_p(self.p, self.xspec.q);
            let after = self.apply(f)?.norm_p(self.p, self.xspec.q);
            if before > 0.0 {
                worst = worst.max((after - before).abs() / before);
            } else if after != 0.0 {
                worst = f64::INFINITY;
            }
        }
        Ok(worst)
    }
}

/// Random split of `[0, 1]` into `n` intervals, each at least `min(0.02, 0.5/n)` long.
pub(crate) fn random_partition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let min = 0.02_f64.min(0.5 / n as f64);
    let weights: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let free = 1.0 - min * n as f64;
    let mut breaks = vec![0.0];
    let mut acc = 0.0;
    for w in &weights[..n - 1] {
        acc += min + free * w / total;
        breaks.push(acc);
    }
    breaks.push(1.0);
    breaks
}

/// Random rearrangement with `n` branches: independent source and destination
/// partitions, randomly paired.
pub fn random_rearrangement<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RearrangeMap {
    let n = n.max(1);
    let src = random_partition(rng, n);
    let dst = random_partition(rng, n);
    let mut pairing: Vec<usize> = (0..n).collect();
    pairing.shuffle(rng);
    let pieces = (0..n)
        .map(|k| Piece {
            src: Interval::from_raw(src[k], src[k + 1]),
            dst: Interval::from_raw(dst[pairing[k]], dst[pairing[k] + 1]),
        })
        .collect();
    RearrangeMap::new(pieces).expect("random partitions tile [0, 1]")
}

/// Random field with fewer than `n` interior breaks.
pub fn random_isom_field<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> IsomField {
    let interior = rng.gen_range(0..n.max(1));
    let mut breaks: Vec<f64> = (0..interior).map(|_| rng.gen_range(0.01..0.99)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.insert(0, 0.0);
    breaks.push(1.0);
    let isoms = (0..breaks.len() - 1)
        .map(|_| XIsom::random(dim, rng))
        .collect();
    IsomField::new(breaks, isoms).expect("sorted random breaks")
}

/// Random Lamperti isometry with `pieces` affine branches.
pub fn random_lamperti_with<R: Rng + ?Sized>(
    rng: &mut R,
    pieces: usize,
    p: f64,
    xspec: XSpec,
) -> LampertiIsometry {
    let phi = random_rearrangement(rng, pieces);
    let sigma = random_isom_field(rng, pieces, xspec.dim);
    LampertiIsometry::new(p, xspec, phi, sigma).expect("valid exponent")
}

/// Deterministic per seed.
pub fn random_lamperti(seed: u64, pieces: usize, p: f64, xspec: XSpec) -> LampertiIsometry {
    random_lamperti_with(&mut ChaCha8Rng::seed_from_u64(seed), pieces, p, xspec)
}

/// `L^p`-projection onto the band of functions supported in `set`.
pub fn band_projection(set: &[Interval], f: &StepFn) -> Result<StepFn> {
    f.indicator_multiply(set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: u32,
    pub xspec: XSpec,
    pub f: StepFn,
}

/// Element of a finite `L^p`-sum `⊕_i L^p([0,1], X_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SumFnRepr", into = "SumFnRepr")]
pub struct SumFn {
    /// Sorted by id.
    components: Vec<Component>,
}

#[derive(Serialize, Deserialize)]
struct SumFnRepr {
    components: Vec<Component>,
}

impl TryFrom<SumFnRepr> for SumFn {
    type Error = Error;

    fn try_from(r: SumFnRepr) -> Result<Self> {
        SumFn::new(r.components)
    }
}

impl From<SumFn> for SumFnRepr {
    fn from(s: SumFn) -> Self {
        SumFnRepr {
            components: s.components,
        }
    }
}

impl SumFn {
    pub fn new(mut components: Vec<Component>) -> Result<Self> {
        components.sort_by_key(|c| c.id);
        if let Some(w) = components.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateComponent(w[0].id));
        }
        for c in &components {
            c.xspec.check(c.f.dim())?;
        }
        Ok(SumFn { components })
    }

    /// Single component with id 0.
    pub fn single(f: StepFn, xspec: XSpec) -> Result<Self> {
        SumFn::new(vec![Component { id: 0, xspec, f }])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.components.iter().map(|c| c.id)
    }

    fn index(&self, id: u32) -> Result<usize> {
        self.components
            .binary_search_by_key(&id, |c| c.id)
            .map_err(|_| Error::UnknownComponent(id))
    }

    pub fn component(&self, id: u32) -> Result<&Component> {
        Ok(&self.components[self.index(id)?])
    }

    /// Component projection `P_id`.
    pub fn project(&self, id: u32) -> Result<StepFn> {
        Ok(self.component(id)?.f.clone())
    }

    /// `Σ_i ||f_i||^p`.
    pub fn norm_pow(&self, p: f64) -> f64 {
        compensated_sum(self.components.iter().map(|c| c.f.norm_p_pow(p, c.xspec.q)))
    }

    /// `(Σ_i ||f_i||^p)^{1/p}`.
    pub fn norm(&self, p: f64) -> f64 {
        let s = self.norm_pow(p);
        if p == 1.0 {
            s
        } else {
            s.powf(1.0 / p)
        }
    }

    /// Same ids and value spaces.
    pub fn check_same_shape(&self, other: &SumFn) -> Result<()> {
        let same = self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.id == b.id && a.xspec == b.xspec);
        if same {
            Ok(())
        } else {
            Err(Error::IncompatibleSpaces(
                "sum vectors have different components".into(),
            ))
        }
    }

    /// Componentwise `op(self_i, other_i)`.
    pub fn zip_with<F>(&self, other: &SumFn, mut op: F) -> Result<SumFn>
    where
        F: FnMut(&StepFn, &StepFn) -> Result<StepFn>,
    {
        self.check_same_shape(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                Ok(Component {
                    id: a.id,
                    xspec: a.xspec,
                    f: op(&a.f, &b.f)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SumFn { components })
    }

    pub fn sub(&self, other: &SumFn) -> Result<SumFn> {
        self.zip_with(other, StepFn::sub)
    }

    pub fn add(&self, other: &SumFn) -> Result<SumFn> {
        self.zip_with(other, StepFn::add)
    }

    /// Componentwise map keeping ids and value spaces.
    pub fn map<F>(&self, mut op: F) -> Result<SumFn>
    where
        F: FnMut(u32, &StepFn) -> Result<StepFn>,
    {
        let components = self
            .components
            .iter()
            .map(|c| {
                let f = op(c.id, &c.f)?;
                c.xspec.check(f.dim())?;
                Ok(Component {
                    id: c.id,
                    xspec: c.xspec,
                    f,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SumFn { components })
    }

    /// Vector with only the component `id` kept; the rest are zero.
    pub fn isolate(&self, id: u32) -> Result<SumFn> {
        self.index(id)?;
        self.map(|i, f| {
            Ok(if i == id {
                f.clone()
            } else {
                StepFn::zero(f.dim())
            })
        })
    }

    pub fn zero_like(&self) -> SumFn {
        self.map(|_, f| Ok(StepFn::zero(f.dim())))
            .expect("zero keeps shape")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentMap {
    pub id: u32,
    pub isometry: LampertiIsometry,
}

/// Generator of the represented subgroup of isometries of an `L^p`-sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    /// Acts by the listed Lamperti isometry on each listed component and as the
    /// identity on the others.
    #[serde(rename = "componentwise")]
    ComponentWise { maps: Vec<ComponentMap> },
    /// Exchanges two components with identical value spaces.
    Swap { ids: [u32; 2] },
}

impl Generator {
    fn inverse(&self) -> Generator {
        match self {
            Generator::ComponentWise { maps } => Generator::ComponentWise {
                maps: maps
                    .iter()
                    .map(|m| ComponentMap {
                        id: m.id,
                        isometry: m.isometry.invert(),
                    })
                    .collect(),
            },
            Generator::Swap { ids } => Generator::Swap { ids: *ids },
        }
    }

    fn apply_in_place(&self, components: &mut [Component]) -> Result<()> {
        let find = |components: &[Component], id: u32| {
            components
                .binary_search_by_key(&id, |c| c.id)
                .map_err(|_| Error::UnknownComponent(id))
        };
        match self {
            Generator::ComponentWise { maps } => {
                for m in maps {
                    let k = find(components, m.id)?;
                    if components[k].xspec != m.isometry.xspec() {
                        return Err(Error::IncompatibleSpaces(format!(
                            "isometry for component {} acts on another value space",
                            m.id
                        )));
                    }
                    components[k].f = m.isometry.apply(&components[k].f)?;
                }
            }
            Generator::Swap { ids: [i, j] } => {
                let (a, b) = (find(components, *i)?, find(components, *j)?);
                if components[a].xspec != components[b].xspec {
                    return Err(Error::IncompatibleSpaces(format!(
                        "cannot swap components {i} and {j} with different value spaces"
                    )));
                }
                let fa = std::mem::replace(&mut components[a].f, StepFn::zero(1));
                let fb = std::mem::replace(&mut components[b].f, fa);
                components[a].f = fb;
            }
        }
        Ok(())
    }
}

/// Word in the generators; `word[0]` is applied first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SumIsometryRepr", into = "SumIsometryRepr")]
pub struct SumIsometry {
    word: Vec<Generator>,
}

#[derive(Serialize, Deserialize)]
struct SumIsometryRepr {
    word: Vec<Generator>,
}

impl TryFrom<SumIsometryRepr> for SumIsometry {
    type Error = Error;

    fn try_from(r: SumIsometryRepr) -> Result<Self> {
        SumIsometry::new(r.word)
    }
}

impl From<SumIsometry> for SumIsometryRepr {
    fn from(s: SumIsometry) -> Self {
        SumIsometryRepr { word: s.word }
    }
}

impl SumIsometry {
    pub fn new(word: Vec<Generator>) -> Result<Self> {
        for g in &word {
            if let Generator::ComponentWise { maps } = g {
                let mut seen = BTreeSet::new();
                if let Some(m) = maps.iter().find(|m| !seen.insert(m.id)) {
                    return Err(Error::DuplicateComponent(m.id));
                }
            }
        }
        Ok(SumIsometry { word })
    }

    pub fn identity() -> Self {
        SumIsometry::default()
    }

    /// One Lamperti isometry acting on component `id`.
    pub fn on_component(id: u32, isometry: LampertiIsometry) -> Self {
        SumIsometry {
            word: vec![Generator::ComponentWise {
                maps: vec![ComponentMap { id, isometry }],
            }],
        }
    }

    pub fn swap(i: u32, j: u32) -> Self {
        SumIsometry {
            word: vec![Generator::Swap { ids: [i, j] }],
        }
    }

    pub fn word(&self) -> &[Generator] {
        &self.word
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SumIsometry) -> SumIsometry {
        let word = inner.word.iter().chain(&self.word).cloned().collect();
        SumIsometry { word }
    }

    pub fn invert(&self) -> SumIsometry {
        SumIsometry {
            word: self.word.iter().rev().map(Generator::inverse).collect(),
        }
    }

    /// Every Lamperti map in the word must use the exponent `p`.
    pub fn check_exponent(&self, p: f64) -> Result<()> {
        for g in &self.word {
            if let Generator::ComponentWise { maps } = g {
                if let Some(m) = maps.iter().find(|m| m.isometry.p() != p) {
                    return Err(Error::IncompatibleSpaces(format!(
                        "component {} uses exponent {}, expected {p}",
                        m.id,
                        m.isometry.p()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, f: &SumFn) -> Result<SumFn> {
        let mut components = f.components.clone();
        for g in &self.word {
            g.apply_in_place(&mut components)?;
        }
        Ok(SumFn { components })
    }
}

/// `max_k || (T - S) x_k ||` over the probe vectors.
pub fn sot_distance(t: &SumIsometry, s: &SumIsometry, probes: &[SumFn], p: f64) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    probes.iter().try_fold(0.0_f64, |worst, x| {
        let d = t.apply(x)?.sub(&s.apply(x)?)?.norm(p);
        Ok(worst.max(d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::NormExponent;

    const P_LIST: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn chi(lo: f64, hi: f64) -> StepFn {
        StepFn::indicator(1, &[iv(lo, hi)], 1.0).unwrap()
    }

    fn piece(s: (f64, f64), d: (f64, f64)) -> Piece {
        Piece {
            src: iv(s.0, s.1),
            dst: iv(d.0, d.1),
        }
    }

    fn scalar_map(pieces: Vec<Piece>, p: f64) -> LampertiIsometry {
        LampertiIsometry::new(
            p,
            XSpec::scalar(),
            RearrangeMap::new(pieces).unwrap(),
            IsomField::identity(1),
        )
        .unwrap()
    }

    #[test]
    fn identity_acts_trivially() {
        let f = StepFn::scalar(vec![0.0, 0.3, 1.0], vec![2.0, -1.0]).unwrap();
        let id = LampertiIsometry::identity(2.0, XSpec::scalar());
        assert_eq!(id.apply(&f).unwrap(), f);
        assert_eq!(id.invert(), id);
    }

    #[test]
    fn half_swap_moves_indicator() {
        let t = scalar_map(
            vec![piece((0.0, 0.5), (0.5, 1.0)), piece((0.5, 1.0), (0.0, 0.5))],
            1.0,
        );
        assert_eq!(t.apply(&chi(0.0, 0.5)).unwrap(), chi(0.5, 1.0));
    }

    #[test]
    fn weighted_rearrangement() {
        let t = scalar_map(
            vec![
                piece((0.0, 0.5), (0.0, 0.25)),
                piece((0.5, 1.0), (0.25, 1.0)),
            ],
            1.0,
        );
        let g = t.apply(&chi(0.0, 1.0)).unwrap();
        assert_eq!(g.breaks(), &[0.0, 0.25, 1.0]);
        assert_eq!(g.values()[0], vec![2.0]);
        assert!((g.values()[1][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((g.norm_p(1.0, NormExponent::Finite(1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(RearrangeMap::new(vec![]).is_err());
        // source gap
        assert!(RearrangeMap::new(vec![
            piece((0.0, 0.4), (0.0, 0.5)),
            piece((0.5, 1.0), (0.5, 1.0))
        ])
        .is_err());
        // destination overlap
        assert!(RearrangeMap::new(vec![
            piece((0.0, 0.5), (0.0, 0.6)),
            piece((0.5, 1.0), (0.5, 1.0))
        ])
        .is_err());
        // near-touching endpoints are snapped
        let m = RearrangeMap::new(vec![
            piece((0.0, 0.5), (0.0, 0.5)),
            piece((0.5 + 1e-13, 1.0), (0.5, 1.0)),
        ])
        .unwrap();
        assert_eq!(m.pieces()[1].src.lo(), 0.5);
    }

    #[test]
    fn compose_and_invert() {
        let spec = XSpec::new(3, NormExponent::Finite(2.0)).unwrap();
        for seed in 0..40 {
            let p = P_LIST[seed as usize % 4];
            let t = random_lamperti(seed, 1 + seed as usize % 6, p, spec);
            let s = random_lamperti(seed + 1000, 1 + (seed as usize + 3) % 5, p, spec);
            let f = crate::sample::random_step(&mut ChaCha8Rng::seed_from_u64(seed), 3, 7);
            let ts = t.compose(&s).unwrap();
            let lhs = ts.apply(&f).unwrap();
            let rhs = t.apply(&s.apply(&f).unwrap()).unwrap();
            let err = lhs.sub(&rhs).unwrap().norm_p(p, spec.q);
            assert!(err <= 1e-12 * f.norm_p(p, spec.q), "seed {seed}: {err}");
            let back = t.invert().apply(&t.apply(&f).unwrap()).unwrap();
            assert!(back.sub(&f).unwrap().norm_p(p, spec.q) <= 1e-12 * f.norm_p(p, spec.q));
            let tt = t.compose(&t.invert()).unwrap();
            assert!(
                tt.apply(&f).unwrap().sub(&f).unwrap().norm_p(p, spec.q)
                    <= 1e-12 * f.norm_p(p, spec.q)
            );
        }
        let id = LampertiIsometry::identity(1.0, XSpec::scalar());
        let other = LampertiIsometry::identity(2.0, XSpec::scalar());
        assert!(matches!(
            id.compose(&other),
            Err(Error::IncompatibleSpaces(_))
        ));
    }

    #[test]
    fn random_generation() {
        let spec = XSpec::new(2, NormExponent::Infinity).unwrap();
        assert_eq!(
            random_lamperti(7, 4, 1.5, spec),
            random_lamperti(7, 4, 1.5, spec)
        );
        let single = random_lamperti(9, 1, 2.0, spec);
        assert!(single.phi().is_identity());
        assert_eq!(single.phi().pieces()[0].weight(2.0), 1.0);
        for pieces in [2, 10, 60] {
            let t = random_lamperti(3, pieces, 3.0, spec);
            assert_eq!(t.phi().pieces().len(), pieces);
            assert!(t
                .phi()
                .pieces()
                .iter()
                .all(|p| p.src.len() >= 0.02f64.min(0.5 / pieces as f64) - 1e-12));
        }
    }

    #[test]
    fn band_projection_examples() {
        let f = StepFn::scalar(vec![0.0, 0.4, 1.0], vec![3.0, -1.0]).unwrap();
        assert_eq!(band_projection(&[Interval::unit()], &f).unwrap(), f);
        assert!(band_projection(&[], &f).unwrap().is_zero());
        let one = chi(0.0, 1.0);
        let pa = band_projection(&[iv(0.0, 0.3)], &one).unwrap();
        let q = NormExponent::Finite(2.0);
        let lhs = pa.norm_p_pow(2.0, q) + one.sub(&pa).unwrap().norm_p_pow(2.0, q);
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((pa.norm_p_pow(2.0, q) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sum_examples() {
        let spec = XSpec::scalar();
        let f = StepFn::scalar(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).unwrap();
        let single = SumFn::single(f.clone(), spec).unwrap();
        assert_eq!(single.norm(1.5), f.norm_p(1.5, spec.q));
        assert_eq!(single.project(0).unwrap(), f);
        assert!(matches!(single.project(4), Err(Error::UnknownComponent(4))));

        let pair = SumFn::new(vec![
            Component {
                id: 1,
                xspec: spec,
                f: chi(0.0, 1.0),
            },
            Component {
                id: 2,
                xspec: spec,
                f: chi(0.0, 0.25).scale(2.0),
            },
        ])
        .unwrap();
        assert!((pair.norm(2.0) - 2f64.sqrt()).abs() < 1e-15);
        let swapped = SumIsometry::swap(1, 2).apply(&pair).unwrap();
        assert_eq!(swapped.project(1).unwrap(), pair.project(2).unwrap());
        assert_eq!(swapped.project(2).unwrap(), pair.project(1).unwrap());
        assert_eq!(swapped.norm(2.0), pair.norm(2.0));

        let wide = XSpec::new(2, NormExponent::Finite(1.0)).unwrap();
        let mixed = SumFn::new(vec![
            Component {
                id: 1,
                xspec: spec,
                f: chi(0.0, 1.0),
            },
            Component {
                id: 2,
                xspec: wide,
                f: StepFn::zero(2),
            },
        ])
        .unwrap();
        assert!(matches!(
            SumIsometry::swap(1, 2).apply(&mixed),
            Err(Error::IncompatibleSpaces(_))
        ));
        assert!(matches!(
            SumIsometry::swap(1, 3).apply(&mixed),
            Err(Error::UnknownComponent(3))
        ));
        assert!(matches!(
            SumFn::new(vec![
                Component {
                    id: 1,
                    xspec: spec,
                    f: chi(0.0, 1.0)
                },
                Component {
                    id: 1,
                    xspec: spec,
                    f: chi(0.0, 1.0)
                },
            ]),
            Err(Error::DuplicateComponent(1))
        ));
    }

    #[test]
    fn sot_distance_examples() {
        let spec = XSpec::scalar();
        let probe = SumFn::single(chi(0.0, 1.0), spec).unwrap();
        let id = SumIsometry::identity();
        let neg = SumIsometry::on_component(0, LampertiIsometry::negation(1.0, spec));
        assert_eq!(
            sot_distance(&id, &id, std::slice::from_ref(&probe), 1.0).unwrap(),
            0.0
        );
        assert_eq!(sot_distance(&id, &neg, &[probe], 1.0).unwrap(), 2.0);
        assert!(matches!(
            sot_distance(&id, &neg, &[], 1.0),
            Err(Error::EmptyProbeSet)
        ));
    }

    #[test]
    fn json_shapes() {
        let spec = XSpec::new(2, NormExponent::Infinity).unwrap();
        let t = random_lamperti(11, 3, 1.5, spec);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with(r#"{"p":1.5,"xspec":{"dim":2,"q":"inf"},"phi":[{"src":["#));
        assert!(s.contains(r#""sigma":{"breaks":"#));
        let back: LampertiIsometry = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);

        let word = SumIsometry::on_component(0, t).compose(&SumIsometry::swap(0, 1));
        let js = serde_json::to_value(&word).unwrap();
        assert_eq!(js["word"][0]["kind"], "swap");
        assert_eq!(js["word"][0]["ids"], serde_json::json!([0, 1]));
        assert_eq!(js["word"][1]["kind"], "componentwise");
        let back: SumIsometry = serde_json::from_value(js).unwrap();
        assert_eq!(back, word);
    }
}
