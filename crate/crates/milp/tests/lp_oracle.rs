//! Random bounded LPs checked against brute-force enumeration of basic solutions.

mod support;

use h2chain_milp::{solve_lp, LpOptions, LpSolution, LpStatus, ModelInstance, Sense};
use support::{enumerate_vertices, random_lp};

fn check_certificate(model: &ModelInstance, s: &LpSolution) {
    let scale = 1.0 + s.objective.abs();
    assert!(model.max_row_violation(&s.primal) <= 1e-7);
    assert!(model.max_bound_violation(&s.primal) <= 1e-7);
    let dual = s.dual_objective(model);
    assert!(
        (dual - s.objective).abs() <= 1e-6 * scale,
        "primal {} dual {}",
        s.objective,
        dual
    );
    for (row, &y) in model.rows().iter().zip(&s.dual) {
        let slack = row.activity(&s.primal) - row.rhs;
        assert!((slack * y).abs() <= 1e-6, "row {} slack {slack} dual {y}", row.name);
        match row.sense {
            Sense::Le => assert!(y <= 1e-9),
            Sense::Ge => assert!(y >= -1e-9),
            Sense::Eq => {}
        }
    }
}

#[test]
fn matches_vertex_enumeration_on_fifty_seeds() {
    for seed in 0..50u64 {
        let m = 2 + (seed as usize % 4);
        let n = 3 + (seed as usize % 5);
        let model = random_lp(seed, m, n);
        let oracle = enumerate_vertices(&model).expect("generator guarantees feasibility");
        for presolve in [true, false] {
            let s = solve_lp(
                &model,
                &LpOptions {
                    presolve,
                    ..Default::default()
                },
            );
            assert_eq!(s.status, LpStatus::Optimal, "seed {seed}");
            assert!(
                (s.objective - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
                "seed {seed}: simplex {} oracle {oracle}",
                s.objective
            );
            check_certificate(&model, &s);
        }
    }
}

#[test]
fn full_size_instances_carry_optimality_certificates() {
    for seed in 100..120u64 {
        let model = random_lp(seed, 20, 40);
        let s = solve_lp(&model, &LpOptions::default());
        assert_eq!(s.status, LpStatus::Optimal, "seed {seed}");
        check_certificate(&model, &s);
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let model = random_lp(7, 20, 40);
    let a = solve_lp(&model, &LpOptions::default());
    let b = solve_lp(&model, &LpOptions::default());
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
