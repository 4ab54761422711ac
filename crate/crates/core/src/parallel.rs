//! Feature-gated iteration helpers.
//!
//! With `parallel` enabled these hand out rayon iterators; otherwise the
//! sequential std equivalents. Callers only use the method surface the two
//! share (`map`, `for_each`, `zip`, ...), so each call site compiles under
//! both configurations and produces identical output either way.

#[cfg(feature = "parallel")]
pub(crate) fn slice_iter<T: Sync>(data: &[T]) -> rayon::slice::Iter<'_, T> {
    use rayon::prelude::*;
    data.par_iter()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn slice_iter<T>(data: &[T]) -> std::slice::Iter<'_, T> {
    data.iter()
}

#[cfg(feature = "parallel")]
pub(crate) fn chunks<T: Sync>(data: &[T], size: usize) -> rayon::slice::Chunks<'_, T> {
    use rayon::prelude::*;
    data.par_chunks(size)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunks<T>(data: &[T], size: usize) -> std::slice::Chunks<'_, T> {
    data.chunks(size)
}

#[cfg(feature = "parallel")]
pub(crate) fn chunks_mut<T: Send>(
    data: &mut [T],
    size: usize,
) -> rayon::slice::ChunksMut<'_, T> {
    use rayon::prelude::*;
    data.par_chunks_mut(size)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunks_mut<T>(data: &mut [T], size: usize) -> std::slice::ChunksMut<'_, T> {
    data.chunks_mut(size)
}
