//! Reader for externally produced solution files.
//!
//! One `name value` pair per line; blank lines and lines starting with `#`
//! are skipped. Variables missing from the file are set to zero and reported
//! in `warnings`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::SolutionFileError;
use crate::lp::{LpSolution, LpStatus};
use crate::model::ModelInstance;

#[derive(Clone, Debug, PartialEq)]
pub struct ImportedSolution {
    pub solution: LpSolution,
    pub warnings: Vec<String>,
}

pub fn read_solution(path: &Path, model: &ModelInstance) -> Result<ImportedSolution, SolutionFileError> {
    let text = fs::read_to_string(path).map_err(|source| SolutionFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_solution(&text, model)
}

pub fn parse_solution(text: &str, model: &ModelInstance) -> Result<ImportedSolution, SolutionFileError> {
    let mut primal = vec![0.0; model.num_variables()];
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let [name, value] = toks[..] else {
            return Err(SolutionFileError::Malformed { line });
        };
        let j = model.var_index(name).ok_or_else(|| SolutionFileError::UnknownName {
            line,
            name: name.to_string(),
        })?;
        if !seen.insert(j) {
            return Err(SolutionFileError::Duplicate {
                line,
                name: name.to_string(),
            });
        }
        primal[j] = value.parse().map_err(|_| SolutionFileError::BadValue {
            line,
            value: value.to_string(),
        })?;
    }
    let warnings = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(j, _)| !seen.contains(j))
        .map(|(_, v)| format!("variable `{}` missing from solution file, set to 0", v.name))
        .collect();
    let objective = model.objective_value(&primal);
    Ok(ImportedSolution {
        solution: LpSolution {
            status: LpStatus::Optimal,
            objective,
            primal,
            dual: vec![0.0; model.num_rows()],
            iterations: 0,
        },
        warnings,
    })
}
