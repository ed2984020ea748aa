//! Execution policy for the data-parallel inner loops.
//!
//! The per-candidate weight pass of a level rebuild, the threshold copies
//! touched by one manager operation, and the cells of a comparison grid are
//! all independent units of work. With the `parallel` feature they can be
//! fanned out over the rayon pool; without it every policy runs sequentially.
//! Results are always collected in input order, so both policies produce
//! identical decisions, solutions and oracle-call totals.

/// How independent units of work are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// One item after the other on the calling thread. Reference semantics.
    #[default]
    Sequential,
    /// Fan out over the rayon pool when the batch is large enough. Falls back
    /// to sequential when the crate is built without the `parallel` feature.
    Parallel,
}

/// Batches smaller than this run sequentially even under [`Execution::Parallel`].
pub const PARALLEL_MIN_BATCH: usize = 16;

impl Execution {
    /// The fastest policy available in this build.
    pub fn preferred() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= PARALLEL_MIN_BATCH {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over mutable items, preserving order. No minimum batch size:
    /// callers use this for coarse-grained work.
    pub fn map_mut<T, R, F>(self, items: Vec<&mut T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(&mut T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() > 1 {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_preserve_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&items, |x| x * 3);
        let par = Execution::Parallel.map(&items, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 2997);
    }

    #[test]
    fn map_mut_visits_every_item() {
        let mut items = vec![1u32, 2, 3, 4];
        let refs: Vec<&mut u32> = items.iter_mut().collect();
        let out = Execution::Parallel.map_mut(refs, |x| {
            *x += 1;
            *x
        });
        assert_eq!(out, vec![2, 3, 4, 5]);
        assert_eq!(items, vec![2, 3, 4, 5]);
    }
}
