//! Execution facade for data-parallel task fans.
//!
//! With the `parallel` feature (default) tasks run on a rayon pool whose
//! size can be capped by the LIE_MOMENTUM_THREADS environment variable;
//! without it everything runs sequentially. Results are assembled in task
//! order either way, so outputs are identical across both modes.

/// Worker cap from LIE_MOMENTUM_THREADS, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("LIE_MOMENTUM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
}

/// Sequential map, always available for comparison runs.
pub fn map_serial<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_tasks<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match thread_cap() {
        Some(cap) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cap)
                .build()
                .expect("failed to build worker pool");
            pool.install(|| items.into_par_iter().map(f).collect())
        }
        None => items.into_par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_tasks<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    map_serial(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_serial_agree_in_order() {
        let items: Vec<u64> = (0..64).collect();
        let f = |x: u64| x.wrapping_mul(0x9e3779b97f4a7c15).rotate_left(17);
        let a = map_tasks(items.clone(), f);
        let b = map_serial(items, f);
        assert_eq!(a, b);
    }
}
