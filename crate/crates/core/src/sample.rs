//! Random instances for property suites. Every generator draws only from the
//! supplied RNG, so a trial is reproducible from its seed alone.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::interval::{Interval, NormExponent, StepFn, StepFn2D};
use crate::lamperti::{
    random_lamperti_with, random_partition, Component, ComponentMap, Generator, SumFn, SumIsometry,
};
use crate::xspace::XSpec;

/// Step function with `1..=max_cells` cells and values in `[-2, 2]`.
pub fn random_step<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_cells: usize) -> StepFn {
    let m = rng.gen_range(1..=max_cells.max(1));
    let breaks = random_partition(rng, m);
    let values = (0..m)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    StepFn::with_dim(dim, breaks, values).expect("random partition is valid")
}

/// Scalar step function with every value bounded away from zero.
pub fn random_full_support<R: Rng + ?Sized>(rng: &mut R, max_cells: usize) -> StepFn {
    let m = rng.gen_range(1..=max_cells.max(1));
    let breaks = random_partition(rng, m);
    let values = (0..m)
        .map(|_| {
            let mag: f64 = rng.gen_range(0.1..2.0);
            if rng.gen() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    StepFn::scalar(breaks, values).expect("random partition is valid")
}

/// Scalar step function vanishing on at least one cell but not identically zero.
pub fn random_partial_support<R: Rng + ?Sized>(rng: &mut R, max_cells: usize) -> StepFn {
    let m = rng.gen_range(2..=max_cells.max(2));
    let breaks = random_partition(rng, m);
    let zero_cell = rng.gen_range(0..m);
    let mut nonzero = zero_cell;
    while nonzero == zero_cell {
        nonzero = rng.gen_range(0..m);
    }
    let values = (0..m)
        .map(|k| {
            if k == zero_cell || (k != nonzero && rng.gen_bool(0.3)) {
                0.0
            } else {
                let mag: f64 = rng.gen_range(0.1..2.0);
                if rng.gen() {
                    mag
                } else {
                    -mag
                }
            }
        })
        .collect();
    StepFn::scalar(breaks, values).expect("random partition is valid")
}

/// Rescales a nonzero function to unit `L^p` norm.
pub fn normalize(f: &StepFn, p: f64, q: NormExponent) -> StepFn {
    f.scale(1.0 / f.norm_p(p, q))
}

/// Up to `max_count` disjoint intervals.
pub fn random_intervals<R: Rng + ?Sized>(rng: &mut R, max_count: usize) -> Vec<Interval> {
    let count = rng.gen_range(0..=max_count);
    let breaks = random_partition(rng, 2 * count + 1);
    (0..count)
        .filter(|_| rng.gen_bool(0.8))
        .map(|k| Interval::new(breaks[2 * k + 1], breaks[2 * k + 2]).expect("disjoint cells"))
        .collect()
}

pub fn random_step_2d<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_cells: usize) -> StepFn2D {
    let mx = rng.gen_range(1..=max_cells.max(1));
    let my = rng.gen_range(1..=max_cells.max(1));
    let xbreaks = random_partition(rng, mx);
    let ybreaks = random_partition(rng, my);
    let values = (0..mx)
        .map(|_| {
            (0..my)
                .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect()
        })
        .collect();
    StepFn2D::new(dim, xbreaks, ybreaks, values).expect("random grid is valid")
}

/// Value spaces for a sum with ids `0..n`; about half of them repeat the first
/// one so that swaps are possible.
pub fn random_specs<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dims: &[usize],
    qs: &[NormExponent],
) -> Vec<XSpec> {
    let first = XSpec {
        dim: *dims.choose(rng).expect("non-empty dims"),
        q: *qs.choose(rng).expect("non-empty qs"),
    };
    (0..n)
        .map(|k| {
            if k == 0 || rng.gen_bool(0.5) {
                first
            } else {
                XSpec {
                    dim: *dims.choose(rng).unwrap(),
                    q: *qs.choose(rng).unwrap(),
                }
            }
        })
        .collect()
}

pub fn random_sum_fn<R: Rng + ?Sized>(rng: &mut R, specs: &[XSpec], max_cells: usize) -> SumFn {
    let components = specs
        .iter()
        .enumerate()
        .map(|(id, &xspec)| Component {
            id: id as u32,
            xspec,
            f: random_step(rng, xspec.dim, max_cells),
        })
        .collect();
    SumFn::new(components).expect("distinct ids")
}

/// Word of `1..=max_len` random generators over components `0..specs.len()`.
pub fn random_sum_isometry<R: Rng + ?Sized>(
    rng: &mut R,
    specs: &[XSpec],
    p: f64,
    max_pieces: usize,
    max_len: usize,
) -> SumIsometry {
    let len = rng.gen_range(1..=max_len.max(1));
    let word = (0..len)
        .map(|_| {
            let swappable: Vec<(u32, u32)> = (0..specs.len())
                .flat_map(|i| (i + 1..specs.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| specs[i] == specs[j])
                .map(|(i, j)| (i as u32, j as u32))
                .collect();
            if !swappable.is_empty() && rng.gen_bool(0.3) {
                let (i, j) = *swappable.choose(rng).unwrap();
                Generator::Swap { ids: [i, j] }
            } else {
                let mut maps = Vec::new();
                for (id, &xspec) in specs.iter().enumerate() {
                    if rng.gen_bool(0.8) {
                        let pieces = rng.gen_range(1..=max_pieces.max(1));
                        maps.push(ComponentMap {
                            id: id as u32,
                            isometry: random_lamperti_with(rng, pieces, p, xspec),
                        });
                    }
                }
                Generator::ComponentWise { maps }
            }
        })
        .collect();
    SumIsometry::new(word).expect("distinct ids per generator")
}
