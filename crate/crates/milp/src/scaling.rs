//! Power-of-two row/column equilibration.

use crate::presolve::LpData;

#[derive(Clone, Debug)]
pub(crate) struct Scaling {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub obj: f64,
}

impl Scaling {
    pub(crate) fn identity(n: usize, m: usize) -> Scaling {
        Scaling {
            row: vec![1.0; m],
            col: vec![1.0; n],
            obj: 1.0,
        }
    }

    /// A few geometric-mean passes followed by a max-norm pass on rows and columns.
    pub(crate) fn compute(lp: &LpData) -> Scaling {
        let n = lp.n();
        let m = lp.m;
        let mut row = vec![1.0; m];
        let mut col = vec![1.0; n];
        for _ in 0..4 {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for (j, c) in lp.cols.iter().enumerate() {
                for &(i, a) in c {
                    let v = (a * col[j]).abs();
                    rmin[i] = rmin[i].min(v);
                    rmax[i] = rmax[i].max(v);
                }
            }
            for i in 0..m {
                if rmax[i] > 0.0 {
                    row[i] = pow2(1.0 / (rmin[i] * rmax[i]).sqrt());
                }
            }
            for (j, c) in lp.cols.iter().enumerate() {
                let mut cmin = f64::INFINITY;
                let mut cmax = 0.0f64;
                for &(i, a) in c {
                    let v = (a * row[i]).abs();
                    cmin = cmin.min(v);
                    cmax = cmax.max(v);
                }
                if cmax > 0.0 {
                    col[j] = pow2(1.0 / (cmin * cmax).sqrt());
                }
            }
        }
        let mut rmax = vec![0.0f64; m];
        for (j, c) in lp.cols.iter().enumerate() {
            for &(i, a) in c {
                rmax[i] = rmax[i].max((a * col[j]).abs());
            }
        }
        for i in 0..m {
            if rmax[i] > 0.0 {
                row[i] = pow2(1.0 / rmax[i]);
            }
        }
        for (j, c) in lp.cols.iter().enumerate() {
            let cmax = c.iter().map(|&(i, a)| (a * row[i]).abs()).fold(0.0, f64::max);
            if cmax > 0.0 {
                col[j] = pow2(1.0 / cmax);
            }
        }
        let cmax = lp
            .cost
            .iter()
            .zip(&col)
            .map(|(&c, &s)| (c * s).abs())
            .fold(0.0, f64::max);
        let obj = if cmax > 0.0 { pow2(1.0 / cmax) } else { 1.0 };
        Scaling { row, col, obj }
    }
}

fn pow2(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-60.0, 60.0) as i32)
}
