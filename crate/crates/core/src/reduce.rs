//! Order-stable atom sums.
//!
//! Atoms are split into fixed-size chunks, each chunk is summed serially, and
//! the chunk partials are combined by a pairwise tree. The chunking does not
//! depend on the thread count, so results are bit-identical however many
//! workers rayon runs.

use rayon::prelude::*;

use crate::Real;

const CHUNK: usize = 512;
const PARALLEL_MIN: usize = 8 * CHUNK;

fn tree<A>(mut parts: Vec<A>, combine: &(impl Fn(A, A) -> A + Sync)) -> Option<A> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

/// Reduce `items` to an accumulator of type `A`, deterministically.
pub(crate) fn reduce<I, A>(
    items: &[I],
    zero: impl Fn() -> A + Sync,
    fold: impl Fn(&mut A, &I) + Sync,
    combine: impl Fn(A, A) -> A + Sync,
) -> A
where
    I: Sync,
    A: Send,
{
    let chunk_sum = |chunk: &[I]| {
        let mut acc = zero();
        for item in chunk {
            fold(&mut acc, item);
        }
        acc
    };
    let parts: Vec<A> = if items.len() >= PARALLEL_MIN {
        items.par_chunks(CHUNK).map(chunk_sum).collect()
    } else {
        items.chunks(CHUNK).map(chunk_sum).collect()
    };
    tree(parts, &combine).unwrap_or_else(zero)
}

pub(crate) fn sum_scalar<I: Sync, T: Real>(items: &[I], term: impl Fn(&I) -> T + Sync) -> T {
    reduce(items, T::zero, |acc, it| *acc += term(it), |a, b| a + b)
}

/// Sum of vector-valued terms; `term` adds its contribution into the buffer.
pub(crate) fn sum_vector<I: Sync, T: Real>(
    items: &[I],
    dim: usize,
    term: impl Fn(&mut [T], &I) + Sync,
) -> Vec<T> {
    reduce(
        items,
        || vec![T::zero(); dim],
        |acc, it| term(acc, it),
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}
