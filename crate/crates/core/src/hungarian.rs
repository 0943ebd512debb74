//! Rectangular minimum-cost linear assignment (Kuhn–Munkres).
//!
//! The solver is the O(n³) shortest-augmenting-path form with row and column
//! potentials. Rectangular `r x k` inputs (`r <= k`) are padded with zero-cost
//! dummy rows. Forbidden entries never enter the equality graph, so no large
//! sentinel constant can leak into the potentials.
//!
//! Among all optimal matchings the lexicographically smallest `col_of_row`
//! is returned: after the potentials are optimal, every optimal matching is a
//! perfect matching on tight edges, and the smallest one is found greedily
//! row by row with alternating-path repairs.

use thiserror::Error;

/// Absolute tolerance for reduced-cost comparisons, scaled by the largest cost magnitude.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Finite(f64),
    Forbidden,
}

impl Cost {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Forbidden => None,
        }
    }
}

impl From<f64> for Cost {
    fn from(v: f64) -> Self {
        Cost::Finite(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HungarianError {
    #[error("cost matrix must have at least one row and one column")]
    Empty,
    #[error("cost matrix has {rows} rows but only {cols} columns")]
    TooManyRows { rows: usize, cols: usize },
    #[error("expected {expected} entries for the given shape, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("cost entry ({row}, {col}) is not a finite number")]
    NonFinite { row: usize, col: usize },
    #[error("no complete assignment avoids the forbidden entries")]
    Infeasible,
}

/// Dense row-major `rows x cols` cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Cost>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Cost>) -> Result<Self, HungarianError> {
        if rows == 0 || cols == 0 {
            return Err(HungarianError::Empty);
        }
        if entries.len() != rows * cols {
            return Err(HungarianError::Shape {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if rows > cols {
            return Err(HungarianError::TooManyRows { rows, cols });
        }
        if let Some(i) = entries
            .iter()
            .position(|c| matches!(c, Cost::Finite(v) if !v.is_finite()))
        {
            return Err(HungarianError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(CostMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows<R, C>(rows: R) -> Result<Self, HungarianError>
    where
        R: IntoIterator<Item = C>,
        C: IntoIterator,
        C::Item: Into<Cost>,
    {
        let mut entries = Vec::new();
        let mut shape = (0usize, None::<usize>);
        for row in rows {
            let before = entries.len();
            entries.extend(row.into_iter().map(Into::into));
            let width = entries.len() - before;
            match shape.1 {
                None => shape.1 = Some(width),
                Some(w) if w != width => {
                    return Err(HungarianError::Shape {
                        expected: w * (shape.0 + 1),
                        got: entries.len(),
                    })
                }
                _ => {}
            }
            shape.0 += 1;
        }
        CostMatrix::new(shape.0, shape.1.unwrap_or(0), entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Cost {
        self.entries[row * self.cols + col]
    }

    fn finite_entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().filter_map(|c| c.finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentSolution {
    pub col_of_row: Vec<usize>,
    pub total_cost: f64,
}

/// Subtracts the smallest finite entry from every finite entry.
pub fn shift_to_nonnegative(costs: &CostMatrix) -> CostMatrix {
    let min = costs.finite_entries().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return costs.clone();
    }
    CostMatrix {
        rows: costs.rows,
        cols: costs.cols,
        entries: costs
            .entries
            .iter()
            .map(|c| match c {
                Cost::Finite(v) => Cost::Finite(v - min),
                Cost::Forbidden => Cost::Forbidden,
            })
            .collect(),
    }
}

/// Minimum-cost injective row-to-column matching; ties resolve to the
/// lexicographically smallest `col_of_row`.
pub fn solve(costs: &CostMatrix) -> Result<AssignmentSolution, HungarianError> {
    let n = costs.cols;
    let real_rows = costs.rows;
    // Padded square view: rows >= real_rows are zero-cost dummies.
    let cost = |i: usize, j: usize| -> Option<f64> {
        if i < real_rows {
            costs.get(i, j).finite()
        } else {
            Some(0.0)
        }
    };

    // 1-indexed potentials; column 0 is the virtual source of each augmentation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0 - 1, j - 1) {
                    let reduced = c - u[i0] - v[j];
                    if reduced < min_slack[j] {
                        min_slack[j] = reduced;
                        way[j] = j0;
                    }
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return Err(HungarianError::Infeasible);
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0usize; n];
    let mut owner = vec![0usize; n];
    for j in 1..=n {
        col_of[row_of_col[j] - 1] = j - 1;
        owner[j - 1] = row_of_col[j] - 1;
    }

    let scale = costs.finite_entries().fold(1.0f64, |m, c| m.max(c.abs()));
    let tol = TOLERANCE * scale;
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| cost(i, j).is_some_and(|c| (c - u[i + 1] - v[j + 1]).abs() <= tol))
                .collect()
        })
        .collect();
    lexicographic_minimum(&tight, &mut col_of, &mut owner);

    let col_of_row: Vec<usize> = col_of[..real_rows].to_vec();
    let total_cost = col_of_row
        .iter()
        .enumerate()
        .map(|(i, &j)| costs.get(i, j).finite().expect("tight edges are finite"))
        .sum();
    Ok(AssignmentSolution {
        col_of_row,
        total_cost,
    })
}

/// Rewrites a perfect matching on `tight` into the lexicographically
/// smallest perfect matching on the same edge set.
fn lexicographic_minimum(tight: &[Vec<bool>], col_of: &mut [usize], owner: &mut [usize]) {
    let n = col_of.len();
    let mut fixed_col = vec![false; n];
    for row in 0..n {
        for target in 0..n {
            if fixed_col[target] || !tight[row][target] {
                continue;
            }
            if col_of[row] == target {
                break;
            }
            // Move `row` to `target`; the displaced row must reach the column
            // `row` releases through unfixed rows and tight edges.
            let released = col_of[row];
            let displaced = owner[target];
            let mut visited = vec![false; n];
            visited[target] = true;
            let mut trail = Vec::new();
            if alternate(
                tight,
                col_of,
                owner,
                &fixed_col,
                &mut visited,
                displaced,
                released,
                &mut trail,
            ) {
                // `trail` holds (row, new column) moves along the path.
                for &(r, c) in &trail {
                    col_of[r] = c;
                    owner[c] = r;
                }
                col_of[row] = target;
                owner[target] = row;
                break;
            }
        }
        fixed_col[col_of[row]] = true;
    }
}

#[allow(clippy::too_many_arguments)]
fn alternate(
    tight: &[Vec<bool>],
    col_of: &[usize],
    owner: &[usize],
    fixed_col: &[bool],
    visited: &mut [bool],
    row: usize,
    released: usize,
    trail: &mut Vec<(usize, usize)>,
) -> bool {
    for c in 0..col_of.len() {
        if visited[c] || fixed_col[c] || !tight[row][c] {
            continue;
        }
        visited[c] = true;
        if c == released {
            trail.push((row, c));
            return true;
        }
        let next = owner[c];
        if alternate(
            tight, col_of, owner, fixed_col, visited, next, released, trail,
        ) {
            trail.push((row, c));
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(rows.iter().map(|r| r.iter().copied())).unwrap()
    }

    #[test]
    fn unique_optimum() {
        let s = solve(&m(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap();
        assert_eq!(s.col_of_row, vec![0, 1]);
        assert_eq!(s.total_cost, 2.0);
    }

    #[test]
    fn single_entry() {
        let s = solve(&m(&[&[5.0]])).unwrap();
        assert_eq!(s.col_of_row, vec![0]);
        assert_eq!(s.total_cost, 5.0);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let s = solve(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(s.col_of_row, vec![0, 1]);
        assert_eq!(s.total_cost, 2.0);

        // Every matching is optimal; the identity is the smallest.
        let s = solve(&m(&[&[0.0; 3], &[0.0; 3], &[0.0; 3]])).unwrap();
        assert_eq!(s.col_of_row, vec![0, 1, 2]);
    }

    #[test]
    fn rectangular_uses_cheapest_columns() {
        let s = solve(&m(&[&[3.0, 1.0, 2.0]])).unwrap();
        assert_eq!(s.col_of_row, vec![1]);
        let s = solve(&m(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 0.0]])).unwrap();
        assert_eq!(s.col_of_row, vec![0, 2]);
    }

    #[test]
    fn forbidden_entries_are_never_selected() {
        let f = Cost::Forbidden;
        let c = CostMatrix::from_rows(vec![
            vec![f, Cost::Finite(9.0)],
            vec![Cost::Finite(0.0), Cost::Finite(0.0)],
        ])
        .unwrap();
        let s = solve(&c).unwrap();
        assert_eq!(s.col_of_row, vec![1, 0]);
        assert_eq!(s.total_cost, 9.0);
    }

    #[test]
    fn infeasible_inputs_are_reported() {
        let f = Cost::Forbidden;
        let c = CostMatrix::from_rows(vec![vec![f, f]]).unwrap();
        assert_eq!(solve(&c), Err(HungarianError::Infeasible));
        let c = CostMatrix::from_rows(vec![vec![Cost::Finite(1.0), f], vec![Cost::Finite(1.0), f]])
            .unwrap();
        assert_eq!(solve(&c), Err(HungarianError::Infeasible));
    }

    #[test]
    fn negative_costs_are_supported() {
        let s = solve(&m(&[&[-0.5, 0.5], &[0.0, -2.0]])).unwrap();
        assert_eq!(s.col_of_row, vec![0, 1]);
        assert_eq!(s.total_cost, -2.5);
    }

    #[test]
    fn shape_errors() {
        assert_eq!(CostMatrix::new(0, 1, vec![]), Err(HungarianError::Empty));
        assert_eq!(
            CostMatrix::new(2, 1, vec![Cost::Finite(0.0); 2]),
            Err(HungarianError::TooManyRows { rows: 2, cols: 1 })
        );
        assert!(matches!(
            CostMatrix::new(1, 1, vec![Cost::Finite(f64::NAN)]),
            Err(HungarianError::NonFinite { row: 0, col: 0 })
        ));
    }

    #[test]
    fn shift_moves_minimum_to_zero() {
        let shifted = shift_to_nonnegative(&m(&[&[-0.5, 0.5]]));
        assert_eq!(shifted, m(&[&[0.0, 1.0]]));
        let shifted = shift_to_nonnegative(&m(&[&[3.0, 3.0], &[3.0, 3.0]]));
        assert_eq!(shifted, m(&[&[0.0, 0.0], &[0.0, 0.0]]));
        let c = CostMatrix::from_rows(vec![vec![Cost::Forbidden, Cost::Finite(2.0)]]).unwrap();
        assert_eq!(
            shift_to_nonnegative(&c),
            CostMatrix::from_rows(vec![vec![Cost::Forbidden, Cost::Finite(0.0)]]).unwrap()
        );
    }
}
