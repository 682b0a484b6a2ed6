use std::fs;
use std::path::{Path, PathBuf};

use tripart_core::case::{validate_case, PlanningCase, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{} is not a valid case:\n{report}", path.display())]
    Invalid { path: PathBuf, report: ValidationReport },
}

/// Parses case JSON without validating it.
pub fn parse_case(text: &str) -> Result<PlanningCase, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn read_case(path: &Path) -> Result<PlanningCase, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_case(&text).map_err(|source| IoError::Parse {
        path: path.to_owned(),
        source,
    })
}

/// Reads and validates a case; warnings are returned alongside it.
pub fn load_case(path: &Path) -> Result<(PlanningCase, ValidationReport), IoError> {
    let case = read_case(path)?;
    let report = validate_case(&case);
    if report.is_ok() {
        Ok((case, report))
    } else {
        Err(IoError::Invalid {
            path: path.to_owned(),
            report,
        })
    }
}

pub fn case_to_string(case: &PlanningCase) -> String {
    let mut s = serde_json::to_string_pretty(case).expect("cases always serialize");
    s.push('\n');
    s
}

pub fn write_case(path: &Path, case: &PlanningCase) -> Result<(), IoError> {
    write_text(path, &case_to_string(case))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(err)?;
    }
    fs::write(path, text).map_err(err)
}
