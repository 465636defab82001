//! Sparse left-looking LU factorisation of a simplex basis.
//!
//! Columns are processed in ascending nonzero count; within a column the pivot
//! row is chosen by threshold partial pivoting, preferring sparse rows. The
//! factors satisfy `B[:, pos[k]] = L * U[:, k]` where `L` has unit entries on
//! the pivot rows.
//!
//! Solves with sparse right-hand sides only visit the pivot steps reachable
//! from the nonzeros, falling back to full sweeps when the reach is large.

use std::cell::RefCell;

const NONE: usize = usize::MAX;
const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
/// Sparse solves give up once the reach exceeds `m / SPARSE_DIVISOR` steps.
const SPARSE_DIVISOR: usize = 8;

#[derive(Clone, Debug, Default)]
struct Reach {
    mark: Vec<u32>,
    stamp: u32,
    stack: Vec<usize>,
    list: Vec<usize>,
    seeds: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct LuFactors {
    prow: Vec<usize>,
    ppos: Vec<usize>,
    diag: Vec<f64>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    /// Row -> pivot step.
    pinv: Vec<usize>,
    /// Basis position -> pivot step.
    qinv: Vec<usize>,
    /// `L` by row: for row `i`, the steps whose column holds it.
    lrow_start: Vec<usize>,
    lrow_step: Vec<usize>,
    lrow_val: Vec<f64>,
    /// `U` by row: for step `s`, the later steps whose column holds it.
    urow_start: Vec<usize>,
    urow_step: Vec<usize>,
    urow_val: Vec<f64>,
    reach: RefCell<Reach>,
}

/// Basis positions whose column was numerically dependent, each paired with
/// the row whose logical column replaced it.
pub(crate) type Replacements = Vec<(usize, usize)>;

impl LuFactors {
    /// Factorises the `m` basis columns produced by `column(pos, buf)`.
    pub(crate) fn factorize<F>(m: usize, mut column: F) -> (LuFactors, Replacements)
    where
        F: FnMut(usize, &mut Vec<(usize, f64)>),
    {
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut row_count = vec![0usize; m];
        for pos in 0..m {
            let mut buf = Vec::new();
            column(pos, &mut buf);
            for &(i, _) in &buf {
                row_count[i] += 1;
            }
            cols.push(buf);
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (cols[p].len(), p));

        let mut f = LuFactors {
            prow: Vec::with_capacity(m),
            ppos: Vec::with_capacity(m),
            diag: Vec::with_capacity(m),
            l_start: vec![0],
            u_start: vec![0],
            ..Default::default()
        };
        let mut pinv = vec![NONE; m];
        let mut x = vec![0.0; m];
        let mut in_pattern = vec![false; m];
        let mut pattern: Vec<usize> = Vec::new();
        let mut visited = vec![0u32; m];
        let mut stamp = 0u32;
        let mut topo: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut singular: Vec<usize> = Vec::new();

        for &pos in &order {
            stamp += 1;
            pattern.clear();
            for &(i, v) in &cols[pos] {
                x[i] = v;
                if !in_pattern[i] {
                    in_pattern[i] = true;
                    pattern.push(i);
                }
            }
            // Steps reachable from the column's pivoted rows, in topological order.
            topo.clear();
            for pi in 0..pattern.len() {
                let start = pinv[pattern[pi]];
                if start == NONE || visited[start] == stamp {
                    continue;
                }
                visited[start] = stamp;
                stack.push((start, f.l_start[start]));
                while let Some(&mut (step, ref mut next)) = stack.last_mut() {
                    let end = f.l_start[step + 1];
                    let mut descended = false;
                    while *next < end {
                        let i = f.l_idx[*next];
                        *next += 1;
                        let s = pinv[i];
                        if s != NONE && visited[s] != stamp {
                            visited[s] = stamp;
                            stack.push((s, f.l_start[s]));
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        topo.push(step);
                        stack.pop();
                    }
                }
            }
            for &step in topo.iter().rev() {
                let v = x[f.prow[step]];
                if v == 0.0 {
                    continue;
                }
                for e in f.l_start[step]..f.l_start[step + 1] {
                    let i = f.l_idx[e];
                    if !in_pattern[i] {
                        in_pattern[i] = true;
                        pattern.push(i);
                    }
                    x[i] -= f.l_val[e] * v;
                }
            }

            let mut max_abs = 0.0f64;
            for &i in &pattern {
                if pinv[i] == NONE {
                    max_abs = max_abs.max(x[i].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                singular.push(pos);
                for &i in &pattern {
                    x[i] = 0.0;
                    in_pattern[i] = false;
                }
                continue;
            }
            let mut best = NONE;
            for &i in &pattern {
                if pinv[i] != NONE || x[i].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                if best == NONE
                    || row_count[i] < row_count[best]
                    || (row_count[i] == row_count[best]
                        && (x[i].abs() > x[best].abs() || (x[i].abs() == x[best].abs() && i < best)))
                {
                    best = i;
                }
            }
            let piv = x[best];
            let k = f.prow.len();
            for &i in &pattern {
                let v = x[i];
                if i == best {
                } else if pinv[i] != NONE {
                    if v.abs() > DROP_TOL {
                        f.u_idx.push(pinv[i]);
                        f.u_val.push(v);
                    }
                } else if v.abs() > DROP_TOL {
                    f.l_idx.push(i);
                    f.l_val.push(v / piv);
                }
                x[i] = 0.0;
                in_pattern[i] = false;
            }
            f.l_start.push(f.l_idx.len());
            f.u_start.push(f.u_idx.len());
            f.prow.push(best);
            f.ppos.push(pos);
            f.diag.push(piv);
            pinv[best] = k;
            for &(i, _) in &cols[pos] {
                row_count[i] -= 1;
            }
        }

        let mut replacements = Vec::new();
        if !singular.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&i| pinv[i] == NONE).collect();
            for (&pos, &row) in singular.iter().zip(&free_rows) {
                let k = f.prow.len();
                f.l_start.push(f.l_idx.len());
                f.u_start.push(f.u_idx.len());
                f.prow.push(row);
                f.ppos.push(pos);
                f.diag.push(-1.0);
                pinv[row] = k;
                replacements.push((pos, row));
            }
        }
        f.pinv = pinv;
        f.finish();
        (f, replacements)
    }

    fn finish(&mut self) {
        let n = self.prow.len();
        self.qinv = vec![0; n];
        for k in 0..n {
            self.qinv[self.ppos[k]] = k;
        }
        let (start, step, val) = transpose(n, &self.l_start, &self.l_idx, &self.l_val);
        self.lrow_start = start;
        self.lrow_step = step;
        self.lrow_val = val;
        let (start, step, val) = transpose(n, &self.u_start, &self.u_idx, &self.u_val);
        self.urow_start = start;
        self.urow_step = step;
        self.urow_val = val;
        let mut r = self.reach.borrow_mut();
        r.mark = vec![0; n];
        r.stamp = 0;
    }

    /// Collects into `r.list` every step reachable from `r.seeds`, where the
    /// successors of step `k` are `adj[start[key(k)]..start[key(k) + 1]]`
    /// mapped through `to_step`. Returns false once more than `cap` are found.
    fn reach(
        r: &mut Reach,
        start: &[usize],
        adj: &[usize],
        key: impl Fn(usize) -> usize,
        to_step: impl Fn(usize) -> usize,
        cap: usize,
    ) -> bool {
        r.stamp = r.stamp.wrapping_add(1);
        if r.stamp == 0 {
            r.mark.iter_mut().for_each(|v| *v = 0);
            r.stamp = 1;
        }
        r.list.clear();
        r.stack.clear();
        for i in 0..r.seeds.len() {
            let k = r.seeds[i];
            if r.mark[k] != r.stamp {
                r.mark[k] = r.stamp;
                r.stack.push(k);
            }
        }
        while let Some(k) = r.stack.pop() {
            r.list.push(k);
            if r.list.len() > cap {
                return false;
            }
            let c = key(k);
            for &a in &adj[start[c]..start[c + 1]] {
                let s = to_step(a);
                if r.mark[s] != r.stamp {
                    r.mark[s] = r.stamp;
                    r.stack.push(s);
                }
            }
        }
        true
    }

    /// Solves `B x = rhs`. `work` holds the right-hand side in row space and is
    /// consumed; the result is written by basis position into `out`.
    pub(crate) fn ftran(&self, work: &mut [f64], out: &mut [f64]) {
        let n = self.prow.len();
        let cap = n / SPARSE_DIVISOR;
        let mut guard = self.reach.borrow_mut();
        let r = &mut *guard;
        r.seeds.clear();
        for (i, &v) in work.iter().enumerate() {
            if v != 0.0 {
                r.seeds.push(self.pinv[i]);
                if r.seeds.len() > cap {
                    break;
                }
            }
        }
        let pinv = &self.pinv;
        let l_sparse = r.seeds.len() <= cap && Self::reach(r, &self.l_start, &self.l_idx, |k| k, |i| pinv[i], cap);
        if l_sparse {
            r.list.sort_unstable();
            for &k in &r.list {
                self.l_step(k, work);
            }
        } else {
            for k in 0..n {
                self.l_step(k, work);
            }
        }
        let u_sparse = l_sparse && {
            std::mem::swap(&mut r.seeds, &mut r.list);
            Self::reach(r, &self.u_start, &self.u_idx, |k| k, |s| s, cap)
        };
        if u_sparse {
            r.list.sort_unstable_by(|a, b| b.cmp(a));
            for &k in &r.list {
                self.u_step(k, work);
            }
            out.iter_mut().for_each(|v| *v = 0.0);
            for &k in &r.list {
                let row = self.prow[k];
                out[self.ppos[k]] = work[row];
                work[row] = 0.0;
            }
        } else {
            for k in (0..n).rev() {
                self.u_step(k, work);
            }
            for k in 0..n {
                let row = self.prow[k];
                out[self.ppos[k]] = work[row];
                work[row] = 0.0;
            }
        }
    }

    #[inline]
    fn l_step(&self, k: usize, work: &mut [f64]) {
        let v = work[self.prow[k]];
        if v != 0.0 {
            for e in self.l_start[k]..self.l_start[k + 1] {
                work[self.l_idx[e]] -= self.l_val[e] * v;
            }
        }
    }

    #[inline]
    fn u_step(&self, k: usize, work: &mut [f64]) {
        let row = self.prow[k];
        let v = work[row];
        if v == 0.0 {
            return;
        }
        let xk = v / self.diag[k];
        work[row] = xk;
        for e in self.u_start[k]..self.u_start[k + 1] {
            work[self.prow[self.u_idx[e]]] -= self.u_val[e] * xk;
        }
    }

    /// Solves `B' y = c` with `c` given by basis position; `y` (row space) is
    /// written into `work`, which must be zero on entry.
    pub(crate) fn btran(&self, c: &[f64], work: &mut [f64]) {
        let n = self.prow.len();
        let cap = n / SPARSE_DIVISOR;
        let mut guard = self.reach.borrow_mut();
        let r = &mut *guard;
        r.seeds.clear();
        for (p, &v) in c.iter().enumerate() {
            if v != 0.0 {
                r.seeds.push(self.qinv[p]);
                if r.seeds.len() > cap {
                    break;
                }
            }
        }
        let u_sparse = r.seeds.len() <= cap && Self::reach(r, &self.urow_start, &self.urow_step, |k| k, |k| k, cap);
        if u_sparse {
            // Push form: finished steps scatter into the later ones.
            r.list.sort_unstable();
            for &k in &r.list {
                let row = self.prow[k];
                let w = (c[self.ppos[k]] + work[row]) / self.diag[k];
                work[row] = w;
                if w != 0.0 {
                    for e in self.urow_start[k]..self.urow_start[k + 1] {
                        work[self.prow[self.urow_step[e]]] -= self.urow_val[e] * w;
                    }
                }
            }
        } else {
            for k in 0..n {
                let mut v = c[self.ppos[k]];
                for e in self.u_start[k]..self.u_start[k + 1] {
                    v -= self.u_val[e] * work[self.prow[self.u_idx[e]]];
                }
                work[self.prow[k]] = v / self.diag[k];
            }
        }
        let prow = &self.prow;
        let l_sparse = u_sparse && {
            std::mem::swap(&mut r.seeds, &mut r.list);
            Self::reach(r, &self.lrow_start, &self.lrow_step, |k| prow[k], |k| k, cap)
        };
        if l_sparse {
            r.list.sort_unstable_by(|a, b| b.cmp(a));
            for &k in &r.list {
                let w = work[self.prow[k]];
                if w != 0.0 {
                    for e in self.lrow_start[self.prow[k]]..self.lrow_start[self.prow[k] + 1] {
                        work[self.prow[self.lrow_step[e]]] -= self.lrow_val[e] * w;
                    }
                }
            }
        } else {
            for k in (0..n).rev() {
                let mut s = 0.0;
                for e in self.l_start[k]..self.l_start[k + 1] {
                    s += self.l_val[e] * work[self.l_idx[e]];
                }
                if s != 0.0 {
                    work[self.prow[k]] -= s;
                }
            }
        }
    }
}

/// Column-compressed `(start, idx, val)` with `n` columns and indices below
/// `n`, transposed to the same form.
fn transpose(n: usize, start: &[usize], idx: &[usize], val: &[f64]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut t_start = vec![0usize; n + 1];
    for &i in idx {
        t_start[i + 1] += 1;
    }
    for i in 0..n {
        t_start[i + 1] += t_start[i];
    }
    let mut fill = t_start.clone();
    let mut t_idx = vec![0usize; idx.len()];
    let mut t_val = vec![0.0; idx.len()];
    for k in 0..n {
        for e in start[k]..start[k + 1] {
            let slot = &mut fill[idx[e]];
            t_idx[*slot] = k;
            t_val[*slot] = val[e];
            *slot += 1;
        }
    }
    (t_start, t_idx, t_val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_mul(cols: &[Vec<(usize, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (p, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                out[i] += v * x[p];
            }
        }
        out
    }

    fn random_basis(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<(usize, f64)>> {
        (0..m)
            .map(|p| {
                let mut col = vec![(p, rng.gen_range(1.0..3.0))];
                for _ in 0..2 {
                    let i = rng.gen_range(0..m);
                    if i != p {
                        col.push((i, rng.gen_range(-1.0..1.0)));
                    }
                }
                col.sort_by_key(|e| e.0);
                col.dedup_by_key(|e| e.0);
                col
            })
            .collect()
    }

    #[test]
    fn ftran_and_btran_invert_the_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [1usize, 2, 5, 30, 120] {
            let cols = random_basis(&mut rng, m);
            let (lu, repl) = LuFactors::factorize(m, |p, buf| buf.extend_from_slice(&cols[p]));
            assert!(repl.is_empty());
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut work = b.clone();
            let mut x = vec![0.0; m];
            lu.ftran(&mut work, &mut x);
            let bx = dense_mul(&cols, &x, m);
            for i in 0..m {
                assert!((bx[i] - b[i]).abs() < 1e-9, "ftran m={m}");
            }
            let mut y = vec![0.0; m];
            lu.btran(&b, &mut y);
            for p in 0..m {
                let dot: f64 = cols[p].iter().map(|&(i, v)| v * y[i]).sum();
                assert!((dot - b[p]).abs() < 1e-9, "btran m={m}");
            }
        }
    }

    #[test]
    fn sparse_right_hand_sides_take_the_reach_path() {
        // Banded basis: each column touches its own row and the next one.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 400;
        let cols: Vec<Vec<(usize, f64)>> = (0..m)
            .map(|p| {
                let mut col = vec![(p, rng.gen_range(1.0..3.0))];
                if p + 1 < m {
                    col.push((p + 1, rng.gen_range(-1.0..1.0)));
                }
                col
            })
            .collect();
        let (lu, _) = LuFactors::factorize(m, |p, buf| buf.extend_from_slice(&cols[p]));
        for i in [0, 7, m / 2, m - 3, m - 1] {
            let mut work = vec![0.0; m];
            work[i] = 1.0;
            let mut x = vec![0.0; m];
            lu.ftran(&mut work, &mut x);
            assert!(work.iter().all(|&v| v == 0.0));
            let bx = dense_mul(&cols, &x, m);
            for (r, v) in bx.iter().enumerate() {
                assert!((v - if r == i { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
            let mut c = vec![0.0; m];
            c[i] = 1.0;
            let mut y = vec![0.0; m];
            lu.btran(&c, &mut y);
            for p in 0..m {
                let dot: f64 = cols[p].iter().map(|&(r, v)| v * y[r]).sum();
                assert!((dot - c[p]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dependent_columns_are_replaced_by_logicals() {
        let cols = [vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)], vec![(2, 1.0)]];
        let (_, repl) = LuFactors::factorize(3, |p, buf| buf.extend_from_slice(&cols[p]));
        assert_eq!(repl.len(), 1);
    }
}
