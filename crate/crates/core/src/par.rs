//! Data-parallel map over independent work items, with a sequential
//! fallback. The `parallel` feature compiles the rayon path in; the runtime
//! mode selects between the two so benchmarks can compare them directly.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Rayon,
}

impl Parallelism {
    /// The default mode: rayon when compiled in, sequential otherwise.
    pub fn auto() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}

/// Map a function over items, preserving order.
pub fn map_items<T, U, F>(mode: Parallelism, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    match mode {
        Parallelism::Sequential => items.into_iter().map(f).collect(),
        Parallelism::Rayon => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                items.into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.into_iter().map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..64).collect();
        let seq = map_items(Parallelism::Sequential, items.clone(), |x| x * x + 1);
        let auto = map_items(Parallelism::auto(), items, |x| x * x + 1);
        assert_eq!(seq, auto);
    }
}
