//! Data-parallel map helpers with a sequential fallback.
//!
//! The crate's hot loops (full-grid quadrature sweeps, node-wise implicit
//! resolution) are embarrassingly parallel over grid indices. With the
//! `parallel` feature (default) they run on rayon; without it the same
//! entry points run sequentially. Results are written per index, so both
//! paths produce bit-identical output.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Always-sequential twin of [`map_indexed`], kept unconditionally so the
/// benchmark suite can compare both paths in a single build.
pub(crate) fn map_indexed_seq<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let a = map_indexed(100, |i| (i as f64).sqrt());
        let b = map_indexed_seq(100, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }
}
