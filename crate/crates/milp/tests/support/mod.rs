//! Brute-force oracles shared by the solver tests and the acceptance suite.
#![allow(dead_code)]

use h2chain_milp::{solve_lp, LpOptions, LpStatus, ModelInstance, Row, Sense, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bounded random LP that is feasible by construction.
pub fn random_lp(seed: u64, m: usize, n: usize) -> ModelInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = ModelInstance::new(format!("rand{seed}"));
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let lo: f64 = rng.gen_range(-5.0..2.0);
        let hi = lo + rng.gen_range(0.5..8.0);
        let cost = rng.gen_range(-10.0..10.0);
        model
            .add_variable(Variable::continuous(format!("x{j}"), lo, hi, cost))
            .unwrap();
        x0.push(rng.gen_range(lo..hi));
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                coeffs.push((j, rng.gen_range(-4.0..4.0)));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.gen_range(0..n), 1.0));
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let (sense, rhs) = match rng.gen_range(0..5) {
            0 => (Sense::Eq, act),
            1 | 2 => (Sense::Le, act + rng.gen_range(0.0..3.0)),
            _ => (Sense::Ge, act - rng.gen_range(0.0..3.0)),
        };
        model.add_row(Row::new(format!("r{i}"), coeffs, sense, rhs)).unwrap();
    }
    model
}

/// Dense solve with partial pivoting; `None` when singular.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for q in c..k {
                    a[r][q] -= f * a[c][q];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|q| a[c][q] * x[q]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum objective over all basic feasible solutions of `A x - s = 0`
/// with the structural and row bounds; `None` when no vertex is feasible.
pub fn enumerate_vertices(model: &ModelInstance) -> Option<f64> {
    let n = model.num_variables();
    let m = model.num_rows();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut cost = Vec::new();
    for v in model.variables() {
        lo.push(v.lower);
        hi.push(v.upper);
        cost.push(v.cost);
    }
    for r in model.rows() {
        let (l, h) = match r.sense {
            Sense::Le => (f64::NEG_INFINITY, r.rhs),
            Sense::Ge => (r.rhs, f64::INFINITY),
            Sense::Eq => (r.rhs, r.rhs),
        };
        lo.push(l);
        hi.push(h);
        cost.push(0.0);
    }
    let mut full = vec![vec![0.0; n + m]; m];
    for (i, r) in model.rows().iter().enumerate() {
        for &(j, a) in &r.coeffs {
            full[i][j] = a;
        }
        full[i][n + i] = -1.0;
    }
    let mut best: Option<f64> = None;
    for basis in combinations(n + m, m) {
        let nonbasic: Vec<usize> = (0..n + m).filter(|j| !basis.contains(j)).collect();
        let choices: Vec<Vec<f64>> = nonbasic
            .iter()
            .map(|&j| {
                let mut c = Vec::new();
                if lo[j].is_finite() {
                    c.push(lo[j]);
                }
                if hi[j].is_finite() && hi[j] != lo[j] {
                    c.push(hi[j]);
                }
                c
            })
            .collect();
        if choices.iter().any(Vec::is_empty) {
            continue;
        }
        let bmat: Vec<Vec<f64>> = (0..m).map(|i| basis.iter().map(|&j| full[i][j]).collect()).collect();
        let mut idx = vec![0usize; nonbasic.len()];
        loop {
            let mut x = vec![0.0; n + m];
            for (k, &j) in nonbasic.iter().enumerate() {
                x[j] = choices[k][idx[k]];
            }
            let rhs: Vec<f64> = (0..m)
                .map(|i| -nonbasic.iter().map(|&j| full[i][j] * x[j]).sum::<f64>())
                .collect();
            if let Some(xb) = dense_solve(bmat.clone(), rhs) {
                for (k, &j) in basis.iter().enumerate() {
                    x[j] = xb[k];
                }
                if (0..n + m).all(|j| x[j] >= lo[j] - 1e-9 && x[j] <= hi[j] + 1e-9) {
                    let obj: f64 = (0..n).map(|j| cost[j] * x[j]).sum();
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    best
}

/// One piecewise capex block per unit: capacity `X = Σ cap_k x_k` must cover a
/// demand, cost `Σ ic_k x_k`, with the adjacency-restricted segment selectors.
pub fn piecewise_toy(seed: u64) -> ModelInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ModelInstance::new(format!("pw{seed}"));
    let units = rng.gen_range(1..=3);
    let mut supply = Vec::new();
    for u in 0..units {
        let k = rng.gen_range(2..=4);
        let mut cap = 0.0;
        let mut unit_cost = rng.gen_range(5.0..10.0);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for b in 0..k {
            cap += rng.gen_range(1.0..10.0);
            unit_cost *= rng.gen_range(0.6..1.0);
            xs.push(
                m.add_variable(Variable::continuous(format!("x{u}_{b}"), 0.0, 1.0, cap * unit_cost))
                    .unwrap(),
            );
            ys.push(m.add_variable(Variable::binary(format!("y{u}_{b}"), 0.0)).unwrap());
            supply.push((xs[b], cap));
        }
        m.add_row(Row::new(
            format!("sum{u}"),
            xs.iter().map(|&x| (x, 1.0)).collect(),
            Sense::Le,
            1.0,
        ))
        .unwrap();
        for b in 0..k {
            m.add_row(Row::new(
                format!("link{u}_{b}"),
                vec![(xs[b], 1.0), (ys[b], -1.0)],
                Sense::Le,
                0.0,
            ))
            .unwrap();
        }
        m.add_row(Row::new(
            format!("two{u}"),
            ys.iter().map(|&y| (y, 1.0)).collect(),
            Sense::Le,
            2.0,
        ))
        .unwrap();
        for a in 0..k {
            for b in a + 2..k {
                m.add_row(Row::new(
                    format!("adj{u}_{a}_{b}"),
                    vec![(ys[a], 1.0), (ys[b], 1.0)],
                    Sense::Le,
                    1.0,
                ))
                .unwrap();
            }
        }
    }
    let demand = rng.gen_range(2.0..12.0);
    m.add_row(Row::new("demand", supply, Sense::Ge, demand)).unwrap();
    m
}

/// Best objective over every binary assignment that respects the selector rows.
pub fn enumerate_patterns(model: &ModelInstance) -> Option<f64> {
    let bins = model.binaries();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut fixed = model.clone();
        for (k, &j) in bins.iter().enumerate() {
            fixed.fix(j, f64::from((mask >> k) & 1)).unwrap();
        }
        let s = solve_lp(&fixed, &LpOptions::default());
        if s.status == LpStatus::Optimal {
            best = Some(best.map_or(s.objective, |b: f64| b.min(s.objective)));
        }
    }
    best
}
