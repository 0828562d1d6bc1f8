//! Order-preserving map over independent grid cells.
//!
//! With the `parallel` feature the work runs on a rayon pool of `jobs`
//! threads (`0` picks rayon's default). `jobs == 1`, or a build without the
//! feature, runs the plain sequential loop. Output order always matches
//! input order, so results do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs != 1 && items.len() > 1 {
        let run = || items.par_iter().map(&f).collect::<Vec<R>>();
        if jobs == 0 {
            return run();
        }
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(run);
        }
    }
    let _ = jobs;
    items.iter().map(f).collect()
}

/// True when this build can run grids on more than one thread.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let items: Vec<u64> = (0..500).collect();
        let seq = map(1, &items, |x| x * x + 1);
        for jobs in [0, 2, 3] {
            assert_eq!(map(jobs, &items, |x| x * x + 1), seq);
        }
        assert!(map(4, &[] as &[u64], |x| *x).is_empty());
    }
}
