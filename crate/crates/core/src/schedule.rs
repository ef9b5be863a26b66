//! Parallel annihilation schedule for Givens triangularization.
//!
//! Element `(i, j)` (1-based, `i > j`) is zeroed by a rotation between the
//! pivot row `j` and row `i`. Placing it in round `i + j − 2` keeps every
//! round row-disjoint and respects the column-by-column dependencies, so
//! all tasks of one round can run at the same time.

use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, Meter, Stage};
use crate::qrd::{annihilate, finish_with_q, Factors, QrFactorization, QrdError, QrdMethod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("invalid dimensions {rows}x{cols}: need rows >= cols >= 1")]
    Dimensions { rows: usize, cols: usize },
    #[error("at least one pipe is required")]
    NoPipes,
    #[error("task ({i},{j}) has zero cost")]
    ZeroCost { i: usize, j: usize },
}

/// One Givens rotation zeroing `(target_row, target_col)`. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnnihilationTask {
    pub target_row: usize,
    pub target_col: usize,
    pub pivot_row: usize,
}

impl AnnihilationTask {
    pub fn new(target_row: usize, target_col: usize) -> Self {
        debug_assert!(target_row > target_col && target_col >= 1);
        AnnihilationTask {
            target_row,
            target_col,
            pivot_row: target_col,
        }
    }

    /// The two rows the rotation reads and writes.
    pub fn row_set(&self) -> [usize; 2] {
        [self.pivot_row, self.target_row]
    }
}

impl fmt::Display for AnnihilationTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.target_row, self.target_col)
    }
}

/// Rounds of mutually independent annihilation tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationSchedule {
    pub rounds: Vec<Vec<AnnihilationTask>>,
    pub n_rows: usize,
    pub n_cols: usize,
}

/// Schedule for triangularizing an `n_rows × n_cols` matrix.
///
/// Tasks within a round are listed by increasing column.
pub fn build_schedule(n_rows: usize, n_cols: usize) -> Result<RotationSchedule, ScheduleError> {
    if n_cols == 0 || n_rows < n_cols {
        return Err(ScheduleError::Dimensions {
            rows: n_rows,
            cols: n_cols,
        });
    }
    let mut rounds: Vec<Vec<AnnihilationTask>> = vec![Vec::new(); (n_rows + n_cols).saturating_sub(2)];
    for j in 1..=n_cols {
        for i in j + 1..=n_rows {
            rounds[i + j - 3].push(AnnihilationTask::new(i, j));
        }
    }
    rounds.retain(|r| !r.is_empty());
    Ok(RotationSchedule { rounds, n_rows, n_cols })
}

impl RotationSchedule {
    pub fn tasks(&self) -> impl Iterator<Item = &AnnihilationTask> {
        self.rounds.iter().flatten()
    }

    /// Total number of tasks.
    pub fn sequential_steps(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// Number of rounds.
    pub fn parallel_steps(&self) -> usize {
        self.rounds.len()
    }

    pub fn round_sizes(&self) -> Vec<usize> {
        self.rounds.iter().map(Vec::len).collect()
    }

    /// Fraction of tasks that share their round with at least one other task.
    pub fn parallelism_gain(&self) -> f64 {
        gain_from_round_sizes(&self.round_sizes())
    }
}

pub fn parallelism_gain(s: &RotationSchedule) -> f64 {
    s.parallelism_gain()
}

pub fn sequential_steps(s: &RotationSchedule) -> usize {
    s.sequential_steps()
}

pub fn parallel_steps(s: &RotationSchedule) -> usize {
    s.parallel_steps()
}

/// Gain for an arbitrary layering: tasks in rounds of size ≥ 2 over all tasks.
pub fn gain_from_round_sizes(sizes: &[usize]) -> f64 {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let parallel: usize = sizes.iter().filter(|&&s| s >= 2).sum();
    parallel as f64 / total as f64
}

/// Round sizes of the stable Gram-Schmidt task graph on `n_cols` columns.
///
/// Iteration `i` normalizes column `i` (one task) and then updates the
/// `n_cols − i − 1` trailing columns independently (one round).
pub fn gram_schmidt_round_sizes(n_cols: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(2 * n_cols);
    for i in 0..n_cols {
        sizes.push(1);
        let updates = n_cols - i - 1;
        if updates > 0 {
            sizes.push(updates);
        }
    }
    sizes
}

pub fn gram_schmidt_gain(n_cols: usize) -> f64 {
    gain_from_round_sizes(&gram_schmidt_round_sizes(n_cols))
}

/// A task occupying `pipe` during cycles `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipeSlot {
    pub task: AnnihilationTask,
    pub pipe: usize,
    pub start: u64,
    pub end: u64,
}

/// Execution of a schedule on a fixed number of identical pipes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipeTrace {
    pub n_pipes: usize,
    pub slots: Vec<PipeSlot>,
    pub makespan: u64,
}

impl PipeTrace {
    /// Per-cycle occupancy: `grid[cycle][pipe]`, `None` for an idle pipe.
    pub fn assignments(&self) -> Vec<Vec<Option<AnnihilationTask>>> {
        let mut grid = vec![vec![None; self.n_pipes]; self.makespan as usize];
        for slot in &self.slots {
            for c in slot.start..slot.end {
                grid[c as usize][slot.pipe] = Some(slot.task);
            }
        }
        grid
    }

    /// `cycle,pipe,task_i,task_j`, one row per pipe per cycle.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,pipe,task_i,task_j\n");
        for (cycle, row) in self.assignments().iter().enumerate() {
            for (pipe, slot) in row.iter().enumerate() {
                match slot {
                    Some(t) => writeln!(out, "{cycle},{pipe},{},{}", t.target_row, t.target_col),
                    None => writeln!(out, "{cycle},{pipe},idle,idle"),
                }
                .expect("writing to a String cannot fail");
            }
        }
        out
    }
}

/// Greedy list scheduling with a barrier between rounds.
///
/// Each task of a round goes to the pipe that becomes free earliest (lowest
/// index on ties); the next round starts once every task of the current
/// one has finished.
pub fn simulate_pipes_with<F>(s: &RotationSchedule, n_pipes: usize, mut cost: F) -> Result<PipeTrace, ScheduleError>
where
    F: FnMut(&AnnihilationTask) -> u64,
{
    if n_pipes == 0 {
        return Err(ScheduleError::NoPipes);
    }
    let mut slots = Vec::with_capacity(s.sequential_steps());
    let mut barrier = 0u64;
    for round in &s.rounds {
        let mut free = vec![barrier; n_pipes];
        let mut round_end = barrier;
        for task in round {
            let c = cost(task);
            if c == 0 {
                return Err(ScheduleError::ZeroCost {
                    i: task.target_row,
                    j: task.target_col,
                });
            }
            let (pipe, &start) = free
                .iter()
                .enumerate()
                .min_by_key(|&(p, &t)| (t, p))
                .expect("n_pipes >= 1");
            let end = start + c;
            free[pipe] = end;
            round_end = round_end.max(end);
            slots.push(PipeSlot {
                task: *task,
                pipe,
                start,
                end,
            });
        }
        barrier = round_end;
    }
    Ok(PipeTrace {
        n_pipes,
        slots,
        makespan: barrier,
    })
}

/// [`simulate_pipes_with`] with the same cost for every task.
pub fn simulate_pipes(s: &RotationSchedule, n_pipes: usize, cost_per_task: u64) -> Result<PipeTrace, ScheduleError> {
    simulate_pipes_with(s, n_pipes, |_| cost_per_task)
}

/// Givens QRD executed round by round. Not canonicalized.
pub fn qrd_pgr(h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
    QrdMethod::ParallelGivens.factorize_raw(h, y)
}

pub(crate) fn pgr<M: Meter>(h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
    let (m, n) = (h.rows(), h.cols());
    let schedule = build_schedule(m, n).map_err(|_| QrdError::Shape { rows: m, cols: n })?;
    let mut w = h.clone();
    let mut q = ComplexMatrix::identity(m);
    meter.set_stage(Stage::Factor);
    for round in &schedule.rounds {
        for task in round {
            annihilate(&mut w, Some(&mut q), task.pivot_row - 1, task.target_row - 1, meter)?;
        }
    }
    finish_with_q(&w, &q, y, meter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize, j: usize) -> AnnihilationTask {
        AnnihilationTask::new(i, j)
    }

    #[test]
    fn four_by_four_layout() {
        let s = build_schedule(4, 4).unwrap();
        assert_eq!(
            s.rounds,
            vec![
                vec![t(2, 1)],
                vec![t(3, 1)],
                vec![t(4, 1), t(3, 2)],
                vec![t(4, 2)],
                vec![t(4, 3)],
            ]
        );
        assert_eq!((s.sequential_steps(), s.parallel_steps()), (6, 5));
        assert!((s.parallelism_gain() - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_is_a_single_task() {
        let s = build_schedule(2, 2).unwrap();
        assert_eq!(s.rounds, vec![vec![t(2, 1)]]);
        assert_eq!(s.parallelism_gain(), 0.0);
        assert_eq!((s.sequential_steps(), s.parallel_steps()), (1, 1));
    }

    #[test]
    fn one_by_one_is_empty() {
        let s = build_schedule(1, 1).unwrap();
        assert!(s.rounds.is_empty());
        assert_eq!(s.parallelism_gain(), 0.0);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert_eq!(
            build_schedule(2, 3),
            Err(ScheduleError::Dimensions { rows: 2, cols: 3 })
        );
        assert!(build_schedule(3, 0).is_err());
    }

    #[test]
    fn pipes() {
        let s = build_schedule(4, 4).unwrap();
        assert_eq!(simulate_pipes(&s, 8, 1).unwrap().makespan, 5);
        assert_eq!(simulate_pipes(&s, 1, 1).unwrap().makespan, 6);
        assert_eq!(simulate_pipes(&s, 1, 3).unwrap().makespan, 18);
        assert_eq!(simulate_pipes(&s, 0, 1), Err(ScheduleError::NoPipes));
        assert!(simulate_pipes(&s, 2, 0).is_err());
    }

    #[test]
    fn trace_csv_includes_idle_pipes() {
        let s = build_schedule(3, 3).unwrap();
        let csv = simulate_pipes(&s, 2, 1).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "cycle,pipe,task_i,task_j");
        assert_eq!(lines[1], "0,0,2,1");
        assert_eq!(lines[2], "0,1,idle,idle");
        assert_eq!(lines.len(), 1 + 3 * 2);
    }

    #[test]
    fn gram_schmidt_layering() {
        assert_eq!(gram_schmidt_round_sizes(1), vec![1]);
        assert_eq!(gram_schmidt_round_sizes(4), vec![1, 3, 1, 2, 1, 1, 1]);
        assert!((gram_schmidt_gain(4) - 0.5).abs() < 1e-15);
        assert!((gram_schmidt_gain(8) - 0.75).abs() < 1e-15);
        assert_eq!(gain_from_round_sizes(&[]), 0.0);
    }
}
