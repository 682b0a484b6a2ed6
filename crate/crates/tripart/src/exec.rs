use std::thread;

use tripart_core::coordinator::Executor;
use tripart_core::milp::{solve_mip, MilpError, Model, Solution, SolverConfig};

/// Solves the three subproblems of an iteration on scoped threads.
#[derive(Clone, Copy, Debug, Default)]
pub struct Threaded;

impl Executor for Threaded {
    fn solve_all(&self, models: [&Model; 3], config: &SolverConfig) -> [Result<Solution, MilpError>; 3] {
        thread::scope(|s| {
            let handles = models.map(|m| s.spawn(move || solve_mip(m, config)));
            handles.map(|h| h.join().expect("solver thread panicked"))
        })
    }
}
