//! Sparse MILP container shared by the formulation, the solvers and the MPS codec.

use std::collections::HashMap;
use std::fmt;

use crate::error::ModelError;

/// Row sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// Decision stage of a column in a two-stage stochastic program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    /// Scenario-independent (design) decision.
    First,
    /// Recourse decision of one scenario.
    Second { scenario: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub is_binary: bool,
    pub stage: Stage,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Self {
        Variable {
            name: name.into(),
            lower,
            upper,
            cost,
            is_binary: false,
            stage: Stage::First,
        }
    }

    pub fn binary(name: impl Into<String>, cost: f64) -> Self {
        Variable {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            cost,
            is_binary: true,
            stage: Stage::First,
        }
    }

    pub fn with_stage(mut self, stage: Stage) -> Self {
        self.stage = stage;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    /// (variable index, coefficient); indices are unique within a row.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Size summary of a model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub variables: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub binaries: usize,
}

/// A minimisation MILP: `min c'x + offset` subject to rows and column bounds.
#[derive(Clone, Debug, Default)]
pub struct ModelInstance {
    pub name: String,
    variables: Vec<Variable>,
    rows: Vec<Row>,
    index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
    pub objective_offset: f64,
}

impl ModelInstance {
    pub fn new(name: impl Into<String>) -> Self {
        ModelInstance {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_variable(&mut self, var: Variable) -> Result<usize, ModelError> {
        if self.index.contains_key(&var.name) {
            return Err(ModelError::DuplicateVariable(var.name));
        }
        if var.lower.is_nan()
            || var.upper.is_nan()
            || var.lower > var.upper
            || var.lower == f64::INFINITY
            || var.upper == f64::NEG_INFINITY
        {
            return Err(ModelError::BadBounds {
                name: var.name,
                lower: var.lower,
                upper: var.upper,
            });
        }
        if var.is_binary && (var.lower < 0.0 || var.upper > 1.0) {
            return Err(ModelError::BinaryBounds(var.name));
        }
        if !var.cost.is_finite() {
            return Err(ModelError::NonFinite(var.name));
        }
        let idx = self.variables.len();
        self.index.insert(var.name.clone(), idx);
        self.variables.push(var);
        Ok(idx)
    }

    /// Adds a row. Repeated variable indices are merged; explicit zeros are dropped.
    pub fn add_row(&mut self, mut row: Row) -> Result<usize, ModelError> {
        if self.row_index.contains_key(&row.name) {
            return Err(ModelError::DuplicateRow(row.name));
        }
        if !row.rhs.is_finite() {
            return Err(ModelError::NonFinite(row.name));
        }
        let count = self.variables.len();
        for &(j, a) in &row.coeffs {
            if j >= count {
                return Err(ModelError::BadVariableIndex {
                    row: row.name,
                    index: j,
                    count,
                });
            }
            if !a.is_finite() {
                return Err(ModelError::NonFinite(row.name));
            }
        }
        row.coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.coeffs.len());
        for (j, a) in row.coeffs.drain(..) {
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        row.coeffs = merged;
        let idx = self.rows.len();
        self.row_index.insert(row.name.clone(), idx);
        self.rows.push(row);
        Ok(idx)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn row_position(&self, name: &str) -> Option<usize> {
        self.row_index.get(name).copied()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.variables.len())
            .filter(|&j| self.variables[j].is_binary)
            .collect()
    }

    pub fn census(&self) -> Census {
        Census {
            variables: self.variables.len(),
            rows: self.rows.len(),
            nonzeros: self.rows.iter().map(|r| r.coeffs.len()).sum(),
            binaries: self.variables.iter().filter(|v| v.is_binary).count(),
        }
    }

    pub fn set_bounds(&mut self, idx: usize, lower: f64, upper: f64) -> Result<(), ModelError> {
        let var = &mut self.variables[idx];
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::BadBounds {
                name: var.name.clone(),
                lower,
                upper,
            });
        }
        if var.is_binary && (lower < 0.0 || upper > 1.0) {
            return Err(ModelError::BinaryBounds(var.name.clone()));
        }
        var.lower = lower;
        var.upper = upper;
        Ok(())
    }

    /// Fixes a variable to a single value.
    pub fn fix(&mut self, idx: usize, value: f64) -> Result<(), ModelError> {
        self.set_bounds(idx, value, value)
    }

    pub fn set_cost(&mut self, idx: usize, cost: f64) {
        self.variables[idx].cost = cost;
    }

    /// Copy of the model with every binary marker cleared (bounds kept).
    pub fn relaxed(&self) -> ModelInstance {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.is_binary = false;
        }
        m
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.variables.iter().zip(x).map(|(v, &xv)| v.cost * xv).sum::<f64>()
    }

    /// Largest row violation at `x`.
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max)
    }

    /// Largest bound violation at `x`.
    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Checks the structural invariants; returns the first violation found.
    pub fn validate(&self) -> Result<(), ModelError> {
        let count = self.variables.len();
        for row in &self.rows {
            for &(j, _) in &row.coeffs {
                if j >= count {
                    return Err(ModelError::BadVariableIndex {
                        row: row.name.clone(),
                        index: j,
                        count,
                    });
                }
            }
        }
        for v in &self.variables {
            if v.is_binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BinaryBounds(v.name.clone()));
            }
        }
        Ok(())
    }

    /// Column-major copy of the constraint matrix.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.variables.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        cols
    }

    /// Writes a human-readable listing of the model, one row per line.
    pub fn write_listing(&self, out: &mut impl fmt::Write) -> fmt::Result {
        writeln!(out, "model {}", self.name)?;
        write!(out, "min")?;
        for v in self.variables.iter().filter(|v| v.cost != 0.0) {
            write!(out, " {:+} {}", v.cost, v.name)?;
        }
        if self.objective_offset != 0.0 {
            write!(out, " {:+}", self.objective_offset)?;
        }
        writeln!(out)?;
        for row in &self.rows {
            write!(out, "{}:", row.name)?;
            for &(j, a) in &row.coeffs {
                write!(out, " {:+} {}", a, self.variables[j].name)?;
            }
            writeln!(out, " {} {}", row.sense.symbol(), row.rhs)?;
        }
        for v in &self.variables {
            let kind = if v.is_binary { " binary" } else { "" };
            writeln!(out, "{} <= {} <= {}{}", v.lower, v.name, v.upper, kind)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_indices() {
        let mut m = ModelInstance::new("t");
        let x = m.add_variable(Variable::continuous("x", 0.0, 1.0, 1.0)).unwrap();
        assert!(matches!(
            m.add_variable(Variable::continuous("x", 0.0, 1.0, 1.0)),
            Err(ModelError::DuplicateVariable(_))
        ));
        m.add_row(Row::new("r", vec![(x, 1.0)], Sense::Le, 1.0)).unwrap();
        assert!(matches!(
            m.add_row(Row::new("r", vec![(x, 1.0)], Sense::Le, 1.0)),
            Err(ModelError::DuplicateRow(_))
        ));
        assert!(matches!(
            m.add_row(Row::new("q", vec![(7, 1.0)], Sense::Le, 1.0)),
            Err(ModelError::BadVariableIndex { .. })
        ));
    }

    #[test]
    fn binary_bounds_are_checked() {
        let mut m = ModelInstance::new("t");
        let y = m.add_variable(Variable::binary("y", 0.0)).unwrap();
        assert!(m.set_bounds(y, 0.0, 2.0).is_err());
        m.fix(y, 0.0).unwrap();
        assert_eq!(m.variable(y).upper, 0.0);
    }

    #[test]
    fn merges_repeated_coefficients() {
        let mut m = ModelInstance::new("t");
        let x = m.add_variable(Variable::continuous("x", 0.0, 1.0, 0.0)).unwrap();
        let y = m.add_variable(Variable::continuous("y", 0.0, 1.0, 0.0)).unwrap();
        m.add_row(Row::new(
            "r",
            vec![(y, 1.0), (x, 2.0), (y, -1.0), (x, 1.0)],
            Sense::Eq,
            0.0,
        ))
        .unwrap();
        assert_eq!(m.rows()[0].coeffs, vec![(x, 3.0)]);
        assert_eq!(m.census().nonzeros, 1);
    }
}
