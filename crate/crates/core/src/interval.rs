//! Exact algebra of `R^d`-valued step functions on `[0, 1]`.
//!
//! A [`StepFn`] is stored as a strictly increasing break list `0 = b_0 < ... < b_m = 1`
//! and one value vector per cell `[b_k, b_{k+1})`. Every operation acts on the
//! break lists directly, so sums, indicator products, affine pullbacks and norms
//! carry no discretisation error. Breaks closer than [`SNAP`] are treated as equal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::xspace::lq_norm;

/// Breakpoint snap tolerance. Cells of length `<= SNAP` are merged away.
pub const SNAP: f64 = 1e-12;

/// Norm exponent, either finite (`>= 1`) or infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(NormExponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(NormExponent::Infinity)
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            NormExponent::Finite(p) => p,
            NormExponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExponent::Finite(p) => write!(f, "{p}"),
            NormExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for NormExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(NormExponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidExponent(f64::NAN))?;
                NormExponent::finite(p)
            }
        }
    }
}

impl Serialize for NormExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormExponent::Finite(p) => s.serialize_f64(*p),
            NormExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        let parsed = match Repr::deserialize(d)? {
            Repr::Num(p) => NormExponent::finite(p),
            Repr::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Non-degenerate closed subinterval of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    /// Endpoints within [`SNAP`] of `0` or `1` are clamped onto them.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let bad = Error::InvalidInterval { lo, hi };
        if !lo.is_finite() || !hi.is_finite() || lo < -SNAP || hi > 1.0 + SNAP {
            return Err(bad);
        }
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        if lo >= hi - SNAP {
            return Err(bad);
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    /// Caller guarantees `0 <= lo < hi <= 1`.
    pub(crate) fn from_raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        Interval { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }
}

/// Sorts `intervals` by left endpoint and checks pairwise disjointness up to [`SNAP`].
pub fn sorted_disjoint(intervals: &[Interval]) -> Result<Vec<Interval>> {
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    if sorted.windows(2).any(|w| w[1].lo < w[0].hi - SNAP) {
        return Err(Error::OverlappingIntervals);
    }
    Ok(sorted)
}

/// Intersection of two interval unions, as a sorted disjoint list.
pub fn intersect_unions(a: &[Interval], b: &[Interval]) -> Result<Vec<Interval>> {
    let a = sorted_disjoint(a)?;
    let b = sorted_disjoint(b)?;
    let mut out: Vec<Interval> = a
        .iter()
        .flat_map(|x| b.iter().filter_map(move |y| x.intersect(y)))
        .collect();
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    Ok(out)
}

pub(crate) fn locate(breaks: &[f64], x: f64) -> usize {
    let cells = breaks.len() - 1;
    breaks
        .partition_point(|&b| b <= x)
        .saturating_sub(1)
        .min(cells - 1)
}

/// One cell of the common refinement of two partitions, with the index of the
/// containing cell in each.
#[derive(Clone, Copy, Debug)]
pub(crate) struct JointCell {
    pub lo: f64,
    pub hi: f64,
    pub left: usize,
    pub right: usize,
}

/// Common refinement of two break lists covering `[0, 1]`.
pub(crate) fn joint_cells(a: &[f64], b: &[f64]) -> Vec<JointCell> {
    let mut merged: Vec<f64> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        let n = merged.len();
        match merged.last() {
            None => merged.push(x),
            Some(&last) if x - last > SNAP => merged.push(x),
            Some(_) if x == 1.0 && n > 1 => merged[n - 1] = 1.0,
            Some(_) => {}
        }
    }
    merged
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            JointCell {
                lo: w[0],
                hi: w[1],
                left: locate(a, mid),
                right: locate(b, mid),
            }
        })
        .collect()
}

/// Drops cells of length `<= SNAP` (absorbed by the left neighbour, or the
/// right one for a leading cell) and merges equal adjacent values.
pub(crate) fn canonical_cells<T: Clone + PartialEq>(
    breaks: &[f64],
    values: &[T],
) -> Result<(Vec<f64>, Vec<T>)> {
    if breaks.len() < 2 {
        return Err(Error::CoverageError(format!(
            "need at least two breakpoints, got {}",
            breaks.len()
        )));
    }
    if values.len() != breaks.len() - 1 {
        return Err(Error::DimensionMismatch {
            expected: breaks.len() - 1,
            found: values.len(),
        });
    }
    if breaks.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    if let Some(index) = breaks.windows(2).position(|w| w[1] < w[0] - SNAP) {
        return Err(Error::NonMonotoneBreaks { index: index + 1 });
    }
    let (first, last) = (breaks[0], breaks[breaks.len() - 1]);
    if first.abs() > SNAP || (last - 1.0).abs() > SNAP {
        return Err(Error::CoverageError(format!(
            "breaks span [{first}, {last}]"
        )));
    }

    let m = values.len();
    let mut nb = vec![0.0];
    let mut nv: Vec<T> = Vec::with_capacity(m);
    for (k, v) in values.iter().enumerate() {
        let hi = if k + 1 == m { 1.0 } else { breaks[k + 1] };
        let lo = *nb.last().unwrap();
        if hi - lo <= SNAP {
            if !nv.is_empty() {
                *nb.last_mut().unwrap() = hi;
            }
            continue;
        }
        if nv.last() == Some(v) {
            *nb.last_mut().unwrap() = hi;
        } else {
            nb.push(hi);
            nv.push(v.clone());
        }
    }
    // an absorbed thin cell can leave two equal neighbours adjacent
    let mut fb = vec![0.0];
    let mut fv: Vec<T> = Vec::with_capacity(nv.len());
    for (k, v) in nv.into_iter().enumerate() {
        if fv.last() == Some(&v) {
            *fb.last_mut().unwrap() = nb[k + 1];
        } else {
            fb.push(nb[k + 1]);
            fv.push(v);
        }
    }
    Ok((fb, fv))
}

/// Piecewise-constant function `[0, 1] -> R^d` in canonical form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFnRepr", into = "StepFnRepr")]
pub struct StepFn {
    dim: usize,
    breaks: Vec<f64>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct StepFnRepr {
    dim: usize,
    breaks: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<StepFnRepr> for StepFn {
    type Error = Error;

    fn try_from(r: StepFnRepr) -> Result<Self> {
        StepFn::with_dim(r.dim, r.breaks, r.values)
    }
}

impl From<StepFn> for StepFnRepr {
    fn from(f: StepFn) -> Self {
        StepFnRepr {
            dim: f.dim,
            breaks: f.breaks,
            values: f.values,
        }
    }
}

impl StepFn {
    /// Builds a canonical step function; the dimension is taken from the values.
    pub fn new(breaks: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        StepFn::with_dim(dim, breaks, values)
    }

    pub fn with_dim(dim: usize, breaks: Vec<f64>, mut values: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for v in &mut values {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            for x in v.iter_mut() {
                if !x.is_finite() {
                    return Err(Error::NonFiniteValue);
                }
                // normalise -0.0
                *x += 0.0;
            }
        }
        let (breaks, values) = canonical_cells(&breaks, &values)?;
        Ok(StepFn {
            dim,
            breaks,
            values,
        })
    }

    /// Scalar step function from plain values.
    pub fn scalar(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        StepFn::with_dim(1, breaks, values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn constant(value: Vec<f64>) -> Result<Self> {
        StepFn::new(vec![0.0, 1.0], vec![value])
    }

    pub fn zero(dim: usize) -> Self {
        StepFn {
            dim: dim.max(1),
            breaks: vec![0.0, 1.0],
            values: vec![vec![0.0; dim.max(1)]],
        }
    }

    /// `c * χ_A` in dimension `dim` (every coordinate equal to `c`).
    pub fn indicator(dim: usize, set: &[Interval], c: f64) -> Result<Self> {
        let set = sorted_disjoint(set)?;
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        for iv in set {
            let last = *breaks.last().unwrap();
            if iv.lo > last {
                breaks.push(iv.lo);
                values.push(vec![0.0; dim]);
            }
            breaks.push(iv.hi.max(last));
            values.push(vec![c; dim]);
        }
        if *breaks.last().unwrap() < 1.0 {
            breaks.push(1.0);
            values.push(vec![0.0; dim]);
        }
        StepFn::with_dim(dim, breaks, values)
    }

    /// Unchecked constructor for refined (not necessarily canonical) data.
    fn raw(dim: usize, breaks: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(breaks.len(), values.len() + 1);
        StepFn {
            dim,
            breaks,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    /// Iterator over `(lo, hi, value)` per cell.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, &[f64])> + '_ {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], v.as_slice()))
    }

    /// Value at `x` (cells are half-open on the right, the last one closed).
    pub fn eval(&self, x: f64) -> &[f64] {
        &self.values[locate(&self.breaks, x)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x == 0.0))
    }

    /// Re-canonicalises a refined representation.
    pub fn canonical(&self) -> StepFn {
        let (breaks, values) =
            canonical_cells(&self.breaks, &self.values).expect("valid step function");
        StepFn::raw(self.dim, breaks, values)
    }

    fn check_dim(&self, other: &StepFn) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Both functions over the union of their breakpoints. The outputs are
    /// not canonical: adjacent equal cells are kept apart.
    pub fn refine_common(&self, other: &StepFn) -> Result<(StepFn, StepFn)> {
        self.check_dim(other)?;
        let cells = joint_cells(&self.breaks, &other.breaks);
        let mut breaks = Vec::with_capacity(cells.len() + 1);
        breaks.push(0.0);
        breaks.extend(cells.iter().map(|c| c.hi));
        let left = cells.iter().map(|c| self.values[c.left].clone()).collect();
        let right = cells
            .iter()
            .map(|c| other.values[c.right].clone())
            .collect();
        Ok((
            StepFn::raw(self.dim, breaks.clone(), left),
            StepFn::raw(self.dim, breaks, right),
        ))
    }

    /// Cellwise combination over the common refinement.
    pub fn zip_with<F>(&self, other: &StepFn, mut op: F) -> Result<StepFn>
    where
        F: FnMut(&[f64], &[f64]) -> Vec<f64>,
    {
        self.check_dim(other)?;
        let cells = joint_cells(&self.breaks, &other.breaks);
        let mut breaks = vec![0.0];
        let mut values = Vec::with_capacity(cells.len());
        for c in &cells {
            breaks.push(c.hi);
            values.push(op(&self.values[c.left], &other.values[c.right]));
        }
        let dim = values.first().map_or(self.dim, Vec::len);
        StepFn::with_dim(dim, breaks, values)
    }

    /// Applies `op` to every cell value.
    pub fn map_values<F>(&self, op: F) -> Result<StepFn>
    where
        F: FnMut(&Vec<f64>) -> Vec<f64>,
    {
        let values: Vec<Vec<f64>> = self.values.iter().map(op).collect();
        let dim = values.first().map_or(self.dim, Vec::len);
        StepFn::with_dim(dim, self.breaks.clone(), values)
    }

    /// `a * f + b * g`.
    pub fn linear_combine(a: f64, f: &StepFn, b: f64, g: &StepFn) -> Result<StepFn> {
        f.zip_with(g, |x, y| {
            x.iter().zip(y).map(|(x, y)| a * x + b * y).collect()
        })
    }

    pub fn scale(&self, c: f64) -> StepFn {
        self.map_values(|v| v.iter().map(|x| c * x).collect())
            .expect("scaling keeps values finite")
    }

    pub fn add(&self, other: &StepFn) -> Result<StepFn> {
        self.zip_with(other, |x, y| x.iter().zip(y).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, other: &StepFn) -> Result<StepFn> {
        self.zip_with(other, |x, y| x.iter().zip(y).map(|(x, y)| x - y).collect())
    }

    /// `χ_A · f` for a finite disjoint union `A`.
    pub fn indicator_multiply(&self, set: &[Interval]) -> Result<StepFn> {
        let mask = StepFn::indicator(1, set, 1.0)?;
        let cells = joint_cells(&self.breaks, &mask.breaks);
        let mut breaks = vec![0.0];
        let mut values = Vec::with_capacity(cells.len());
        for c in cells {
            breaks.push(c.hi);
            values.push(if mask.values[c.right][0] == 0.0 {
                vec![0.0; self.dim]
            } else {
                self.values[c.left].clone()
            });
        }
        StepFn::with_dim(self.dim, breaks, values)
    }

    /// `∫ ||f||_q^p` for finite `p`, accumulated with compensation.
    pub fn norm_p_pow(&self, p: f64, q: NormExponent) -> f64 {
        compensated_sum(self.cells().map(|(lo, hi, v)| {
            let n = lq_norm(v, q);
            (hi - lo) * if p == 1.0 { n } else { n.powf(p) }
        }))
    }

    /// Bochner norm `(∫ ||f||_q^p)^{1/p}`.
    pub fn norm_p(&self, p: f64, q: NormExponent) -> f64 {
        let s = self.norm_p_pow(p, q);
        if p == 1.0 {
            s
        } else {
            s.powf(1.0 / p)
        }
    }

    /// Norm for either a finite exponent or the essential supremum.
    pub fn norm(&self, p: NormExponent, q: NormExponent) -> f64 {
        match p {
            NormExponent::Finite(p) => self.norm_p(p, q),
            NormExponent::Infinity => self.sup_norm(q),
        }
    }

    pub fn sup_norm(&self, q: NormExponent) -> f64 {
        self.values
            .iter()
            .fold(0.0_f64, |m, v| m.max(lq_norm(v, q)))
    }

    /// Total length of cells where the value is nonzero (max-abs above `SNAP`).
    pub fn support_measure(&self) -> f64 {
        compensated_sum(
            self.cells()
                .filter(|(_, _, v)| lq_norm(v, NormExponent::Infinity) > SNAP)
                .map(|(lo, hi, _)| hi - lo),
        )
    }

    /// Cells of `f` where it vanishes (max-abs at most `SNAP`), merged.
    pub fn zero_set(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for (lo, hi, v) in self.cells() {
            if lq_norm(v, NormExponent::Infinity) > SNAP {
                continue;
            }
            match out.last_mut() {
                Some(last) if (last.hi - lo).abs() <= SNAP => last.hi = hi,
                _ => out.push(Interval { lo, hi }),
            }
        }
        out
    }

    /// `s -> f(a + b s)` on `[0, 1]`.
    pub fn pullback_affine(&self, a: f64, b: f64) -> Result<StepFn> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::NonPositiveSlope(b));
        }
        let end = a + b;
        if !a.is_finite() || a < -SNAP || end > 1.0 + SNAP {
            return Err(Error::RangeError { lo: a, hi: end });
        }
        let m = self.num_cells();
        let mut k = locate(&self.breaks, a);
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        loop {
            values.push(self.values[k].clone());
            let next = self.breaks[k + 1];
            if next >= end || k + 1 == m {
                breaks.push(1.0);
                break;
            }
            breaks.push((next - a) / b);
            k += 1;
        }
        StepFn::with_dim(self.dim, breaks, values)
    }

    /// Structural comparison: same cell count, breaks within `break_tol`,
    /// values within `value_tol` (absolute, per coordinate).
    pub fn approx_eq(&self, other: &StepFn, break_tol: f64, value_tol: f64) -> bool {
        self.dim == other.dim
            && self.num_cells() == other.num_cells()
            && self
                .breaks
                .iter()
                .zip(&other.breaks)
                .all(|(a, b)| (a - b).abs() <= break_tol)
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(u, v)| u.iter().zip(v).all(|(a, b)| (a - b).abs() <= value_tol))
    }
}

/// Piecewise-constant function on the unit square, constant on each rectangle
/// `[x_i, x_{i+1}) × [y_j, y_{j+1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFn2DRepr", into = "StepFn2DRepr")]
pub struct StepFn2D {
    dim: usize,
    xbreaks: Vec<f64>,
    ybreaks: Vec<f64>,
    values: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct StepFn2DRepr {
    dim: usize,
    xbreaks: Vec<f64>,
    ybreaks: Vec<f64>,
    values: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<StepFn2DRepr> for StepFn2D {
    type Error = Error;

    fn try_from(r: StepFn2DRepr) -> Result<Self> {
        StepFn2D::new(r.dim, r.xbreaks, r.ybreaks, r.values)
    }
}

impl From<StepFn2D> for StepFn2DRepr {
    fn from(f: StepFn2D) -> Self {
        StepFn2DRepr {
            dim: f.dim,
            xbreaks: f.xbreaks,
            ybreaks: f.ybreaks,
            values: f.values,
        }
    }
}

fn check_axis(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::CoverageError(
            "axis needs at least two breakpoints".into(),
        ));
    }
    if let Some(index) = breaks
        .windows(2)
        .position(|w| (w[1] - w[0]).is_nan() || w[1] - w[0] <= SNAP)
    {
        return Err(Error::NonMonotoneBreaks { index: index + 1 });
    }
    if breaks[0] != 0.0 || breaks[breaks.len() - 1] != 1.0 {
        return Err(Error::CoverageError("axis must span [0, 1]".into()));
    }
    Ok(())
}

impl StepFn2D {
    /// `values[i][j]` is the value on `[x_i, x_{i+1}) × [y_j, y_{j+1})`.
    pub fn new(
        dim: usize,
        xbreaks: Vec<f64>,
        ybreaks: Vec<f64>,
        values: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_axis(&xbreaks)?;
        check_axis(&ybreaks)?;
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if values.len() != xbreaks.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: xbreaks.len() - 1,
                found: values.len(),
            });
        }
        for row in &values {
            if row.len() != ybreaks.len() - 1 {
                return Err(Error::DimensionMismatch {
                    expected: ybreaks.len() - 1,
                    found: row.len(),
                });
            }
            for v in row {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteValue);
                }
            }
        }
        Ok(StepFn2D {
            dim,
            xbreaks,
            ybreaks,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xbreaks(&self) -> &[f64] {
        &self.xbreaks
    }

    pub fn ybreaks(&self) -> &[f64] {
        &self.ybreaks
    }

    pub fn values(&self) -> &[Vec<Vec<f64>>] {
        &self.values
    }

    /// `y -> F(x, y)` for `x` in the `i`-th column of cells.
    pub fn section(&self, i: usize) -> StepFn {
        StepFn::with_dim(self.dim, self.ybreaks.clone(), self.values[i].clone())
            .expect("validated grid")
    }

    /// Product-measure Bochner norm, summed over rectangles.
    pub fn norm_2d(&self, p: f64, q: NormExponent) -> f64 {
        let terms = self
            .xbreaks
            .windows(2)
            .zip(&self.values)
            .flat_map(|(xw, row)| {
                let dx = xw[1] - xw[0];
                self.ybreaks
                    .windows(2)
                    .zip(row)
                    .map(move |(yw, v)| dx * (yw[1] - yw[0]) * lq_norm(v, q).powf(p))
            });
        compensated_sum(terms).powf(1.0 / p)
    }

    /// Outer `L^p` norm of `x -> ||F(x, ·)||_{L^p}`.
    pub fn iterated_norm(&self, p: f64, q: NormExponent) -> f64 {
        let outer = StepFn::scalar(
            self.xbreaks.clone(),
            (0..self.values.len())
                .map(|i| self.section(i).norm_p(p, q))
                .collect(),
        )
        .expect("validated grid");
        outer.norm_p(p, NormExponent::Finite(1.0))
    }
}
