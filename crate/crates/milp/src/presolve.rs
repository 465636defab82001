//! Light presolve: removes fixed and empty columns, empty rows, and turns
//! singleton rows into column bounds. Duals of removed rows are recovered in
//! postsolve so the reported solution stays dual feasible.

const NONE: usize = usize::MAX;
const BOUND_TOL: f64 = 1e-9;

/// LP in row-bound form: `row_lo <= A x <= row_hi`, `col_lo <= x <= col_hi`.
#[derive(Clone, Debug)]
pub(crate) struct LpData {
    pub cols: Vec<Vec<(usize, f64)>>,
    pub m: usize,
    pub cost: Vec<f64>,
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub offset: f64,
}

impl LpData {
    pub(crate) fn n(&self) -> usize {
        self.cols.len()
    }
}

/// A singleton row turned into a column bound.
#[derive(Clone, Debug)]
struct SingletonRow {
    row: usize,
    col: usize,
    coef: f64,
    /// Column bound implied by the row, recorded only when it tightened the column.
    implied_lo: Option<f64>,
    implied_hi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PresolveStatus {
    Reduced,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub(crate) struct Presolved {
    pub status: PresolveStatus,
    pub reduced: LpData,
    /// Reduced column -> original column.
    pub col_map: Vec<usize>,
    /// Reduced row -> original row.
    pub row_map: Vec<usize>,
    /// Original column -> reduced column (NONE when removed).
    pub col_new: Vec<usize>,
    /// Bounds of every original column after tightening.
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
    fixed_value: Vec<f64>,
    ops: Vec<SingletonRow>,
}

/// `protect[j]` keeps column `j` in the reduced problem unless its bounds are
/// equal (used for branching columns whose bounds change later).
pub(crate) fn presolve(lp: &LpData, protect: &[bool], enabled: bool) -> Presolved {
    let n = lp.n();
    let m = lp.m;
    let mut col_lo = lp.col_lo.clone();
    let mut col_hi = lp.col_hi.clone();
    let mut row_lo = lp.row_lo.clone();
    let mut row_hi = lp.row_hi.clone();
    let mut offset = lp.offset;
    let mut col_alive = vec![true; n];
    let mut row_alive = vec![true; m];
    let mut fixed_value = vec![0.0; n];
    let mut ops = Vec::new();
    let mut status = PresolveStatus::Reduced;

    if enabled {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (j, col) in lp.cols.iter().enumerate() {
            for &(i, a) in col {
                rows[i].push((j, a));
            }
        }
        let mut row_count: Vec<usize> = rows.iter().map(|r| r.len()).collect();
        let mut col_count: Vec<usize> = lp.cols.iter().map(|c| c.len()).collect();
        let mut col_queue: Vec<usize> = (0..n).rev().collect();
        let mut row_queue: Vec<usize> = (0..m).rev().collect();

        'outer: loop {
            let mut progress = false;
            while let Some(j) = col_queue.pop() {
                if !col_alive[j] {
                    continue;
                }
                let value = if col_lo[j] == col_hi[j] {
                    col_lo[j]
                } else if col_count[j] == 0 && !protect[j] {
                    let c = lp.cost[j];
                    if c > 0.0 {
                        if !col_lo[j].is_finite() {
                            status = PresolveStatus::Unbounded;
                            break 'outer;
                        }
                        col_lo[j]
                    } else if c < 0.0 {
                        if !col_hi[j].is_finite() {
                            status = PresolveStatus::Unbounded;
                            break 'outer;
                        }
                        col_hi[j]
                    } else if col_lo[j].is_finite() {
                        col_lo[j]
                    } else if col_hi[j].is_finite() {
                        col_hi[j]
                    } else {
                        0.0
                    }
                } else {
                    continue;
                };
                col_alive[j] = false;
                fixed_value[j] = value;
                offset += lp.cost[j] * value;
                for &(i, a) in &lp.cols[j] {
                    if !row_alive[i] {
                        continue;
                    }
                    row_lo[i] -= a * value;
                    row_hi[i] -= a * value;
                    row_count[i] -= 1;
                    if row_count[i] <= 1 {
                        row_queue.push(i);
                    }
                }
                progress = true;
            }
            while let Some(i) = row_queue.pop() {
                if !row_alive[i] {
                    continue;
                }
                match row_count[i] {
                    0 => {
                        if row_lo[i] > BOUND_TOL || row_hi[i] < -BOUND_TOL {
                            status = PresolveStatus::Infeasible;
                            break 'outer;
                        }
                        row_alive[i] = false;
                        progress = true;
                    }
                    1 => {
                        let &(j, a) = rows[i].iter().find(|&&(j, _)| col_alive[j]).expect("singleton row");
                        let (lo, hi) = if a > 0.0 {
                            (row_lo[i] / a, row_hi[i] / a)
                        } else {
                            (row_hi[i] / a, row_lo[i] / a)
                        };
                        let mut implied_lo = None;
                        let mut implied_hi = None;
                        if lo > col_lo[j] {
                            col_lo[j] = lo;
                            implied_lo = Some(lo);
                        }
                        if hi < col_hi[j] {
                            col_hi[j] = hi;
                            implied_hi = Some(hi);
                        }
                        if col_lo[j] > col_hi[j] {
                            if col_lo[j] - col_hi[j] > BOUND_TOL * (1.0 + col_lo[j].abs()) {
                                status = PresolveStatus::Infeasible;
                                break 'outer;
                            }
                            let v = if implied_hi.is_some() { col_hi[j] } else { col_lo[j] };
                            col_lo[j] = v;
                            col_hi[j] = v;
                        }
                        row_alive[i] = false;
                        col_count[j] -= 1;
                        ops.push(SingletonRow {
                            row: i,
                            col: j,
                            coef: a,
                            implied_lo,
                            implied_hi,
                        });
                        col_queue.push(j);
                        progress = true;
                    }
                    _ => {}
                }
            }
            if !progress {
                break;
            }
        }
    }

    let mut col_map = Vec::new();
    let mut col_new = vec![NONE; n];
    for j in 0..n {
        if col_alive[j] {
            col_new[j] = col_map.len();
            col_map.push(j);
        }
    }
    let mut row_map = Vec::new();
    let mut row_new = vec![NONE; m];
    for i in 0..m {
        if row_alive[i] {
            row_new[i] = row_map.len();
            row_map.push(i);
        }
    }
    let cols: Vec<Vec<(usize, f64)>> = col_map
        .iter()
        .map(|&j| {
            lp.cols[j]
                .iter()
                .filter(|&&(i, _)| row_alive[i])
                .map(|&(i, a)| (row_new[i], a))
                .collect()
        })
        .collect();
    let reduced = LpData {
        cols,
        m: row_map.len(),
        cost: col_map.iter().map(|&j| lp.cost[j]).collect(),
        col_lo: col_map.iter().map(|&j| col_lo[j]).collect(),
        col_hi: col_map.iter().map(|&j| col_hi[j]).collect(),
        row_lo: row_map.iter().map(|&i| row_lo[i]).collect(),
        row_hi: row_map.iter().map(|&i| row_hi[i]).collect(),
        offset,
    };
    Presolved {
        status,
        reduced,
        col_map,
        row_map,
        col_new,
        col_lo,
        col_hi,
        fixed_value,
        ops,
    }
}

impl Presolved {
    pub(crate) fn is_removed(&self, j: usize) -> bool {
        self.col_new[j] == NONE
    }

    pub(crate) fn fixed_value(&self, j: usize) -> f64 {
        self.fixed_value[j]
    }

    /// Maps a reduced solution back to the original space. Returns primal
    /// values and row duals.
    pub(crate) fn postsolve(&self, lp: &LpData, x_red: &[f64], y_red: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = lp.n();
        let mut x = self.fixed_value.clone();
        for (k, &j) in self.col_map.iter().enumerate() {
            x[j] = x_red[k];
        }
        let mut y = vec![0.0; lp.m];
        for (k, &i) in self.row_map.iter().enumerate() {
            y[i] = y_red[k];
        }
        for op in self.ops.iter().rev() {
            let col = op.col;
            let mut d = lp.cost[col];
            for &(i, a) in &lp.cols[col] {
                d -= a * y[i];
            }
            let tol = 1e-7 * (1.0 + x[col].abs());
            let at_lo = op.implied_lo.is_some_and(|b| (x[col] - b).abs() <= tol);
            let at_hi = op.implied_hi.is_some_and(|b| (x[col] - b).abs() <= tol);
            if (d > 0.0 && at_lo) || (d < 0.0 && at_hi) {
                y[op.row] += d / op.coef;
            }
        }
        debug_assert_eq!(x.len(), n);
        (x, y)
    }
}
