mod support;

use h2chain_milp::{
    parse_mps, parse_solution, solve_mip, to_mps_string, MipOptions, MipStatus, ModelInstance, Row, Sense, Variable,
};
use proptest::prelude::*;
use support::{enumerate_patterns, piecewise_toy};

#[test]
fn branch_and_bound_matches_pattern_enumeration() {
    for seed in 0..20 {
        let model = piecewise_toy(seed);
        let oracle = enumerate_patterns(&model);
        let s = solve_mip(&model, &MipOptions::default());
        match oracle {
            Some(best) => {
                assert_eq!(s.status, MipStatus::Optimal, "seed {seed}");
                assert!(
                    (s.objective() - best).abs() <= 1e-9 * (1.0 + best.abs()),
                    "seed {seed}: {} vs {best}",
                    s.objective()
                );
                for j in model.binaries() {
                    let v = s.incumbent.primal[j];
                    assert!((v - v.round()).abs() <= 1e-6);
                }
                assert!(model.max_row_violation(&s.incumbent.primal) <= 1e-7);
                assert!(s.gap >= 0.0 && s.gap <= 1e-6);
            }
            None => assert_eq!(s.status, MipStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn exported_solution_reads_back() {
    let model = piecewise_toy(3);
    let s = solve_mip(&model, &MipOptions::default());
    let text: String = model
        .variables()
        .iter()
        .zip(&s.incumbent.primal)
        .map(|(v, x)| format!("{} {x}\n", v.name))
        .collect();
    let back = parse_solution(&text, &model).unwrap();
    assert!(back.warnings.is_empty());
    assert_eq!(back.solution.primal, s.incumbent.primal);
    assert!((back.solution.objective - s.objective()).abs() <= 1e-9 * (1.0 + s.objective().abs()));
}

fn finite_or_inf() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => -1e7..1e7f64,
        1 => Just(0.0),
        1 => (-30i32..30).prop_map(|e| 1.234_567_890_123 * 10f64.powi(e)),
    ]
}

proptest! {
    #[test]
    fn mps_round_trip(
        vars in prop::collection::vec((finite_or_inf(), 0.0..100.0f64, finite_or_inf(), any::<bool>(), 0u8..4), 1..12),
        rows in prop::collection::vec((prop::collection::vec((0usize..12, finite_or_inf()), 0..6), 0u8..3, finite_or_inf()), 0..8),
        offset in finite_or_inf(),
    ) {
        let mut m = ModelInstance::new("prop");
        for (j, &(lo, width, cost, binary, kind)) in vars.iter().enumerate() {
            let v = if binary {
                let mut v = Variable::binary(format!("b{j}"), cost);
                if kind == 0 { v.upper = 0.0; }
                v
            } else {
                match kind {
                    0 => Variable::continuous(format!("c{j}"), f64::NEG_INFINITY, f64::INFINITY, cost),
                    1 => Variable::continuous(format!("c{j}"), lo, f64::INFINITY, cost),
                    2 => Variable::continuous(format!("c{j}"), f64::NEG_INFINITY, lo, cost),
                    _ => Variable::continuous(format!("c{j}"), lo, lo + width, cost),
                }
            };
            m.add_variable(v).unwrap();
        }
        for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
            let coeffs: Vec<(usize, f64)> = coeffs.iter().map(|&(j, a)| (j % vars.len(), a)).collect();
            let sense = [Sense::Le, Sense::Eq, Sense::Ge][*sense as usize];
            m.add_row(Row::new(format!("r{i}"), coeffs, sense, *rhs)).unwrap();
        }
        m.objective_offset = offset;
        let text = to_mps_string(&m).unwrap();
        let back = parse_mps(&text).unwrap();
        prop_assert_eq!(back.census(), m.census());
        prop_assert_eq!(back.objective_offset, m.objective_offset);
        prop_assert_eq!(back.rows(), m.rows());
        for (a, b) in m.variables().iter().zip(back.variables()) {
            prop_assert_eq!(&a.name, &b.name);
            prop_assert_eq!((a.lower, a.upper, a.cost, a.is_binary), (b.lower, b.upper, b.cost, b.is_binary));
        }
        prop_assert_eq!(to_mps_string(&back).unwrap(), text);
    }
}
