//! Plain-text network case files.
//!
//! The format is line oriented. `#` starts a comment. `BASE_MVA <value>`
//! sets the power base. Sections open with a keyword line and close with
//! `END`; rows are whitespace separated:
//!
//! | section   | columns                               |
//! |-----------|---------------------------------------|
//! | `BUS`     | `id load_mw kind` (`ref`, `pv`, `pq`) |
//! | `BRANCH`  | `from to x_pu`                        |
//! | `GEN`     | `id bus pmin pmax cost`               |
//! | `INERTIA` | `id hmin hmax cost`                   |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled 5-bus case.
pub const CASE5_TEXT: &str = include_str!("../../data/case5_modified.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub load_mw: f64,
    pub is_ref: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub x_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: usize,
    pub bus: usize,
    pub pmin: f64,
    pub pmax: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertiaUnit {
    pub id: usize,
    pub hmin: f64,
    pub hmax: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseData {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub inertia: Vec<InertiaUnit>,
}

impl CaseData {
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }
}

pub fn load_case_file(path: &Path) -> Result<CaseData> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| Error::MissingCaseFile(path.display().to_string()))?;
    parse_case(&text)
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::CaseFormat(format!("line {line}: cannot parse '{tok}'")))
}

pub fn parse_case(text: &str) -> Result<CaseData> {
    let mut case = CaseData {
        base_mva: 100.0,
        buses: Vec::new(),
        branches: Vec::new(),
        generators: Vec::new(),
        inertia: Vec::new(),
    };
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match (section.as_deref(), toks[0]) {
            (None, "BASE_MVA") if toks.len() == 2 => case.base_mva = num(toks[1], line_no)?,
            (None, kw @ ("BUS" | "BRANCH" | "GEN" | "INERTIA")) if toks.len() == 1 => {
                section = Some(kw.to_string())
            }
            (Some(_), "END") => section = None,
            (Some("BUS"), _) if toks.len() == 3 => case.buses.push(Bus {
                id: num(toks[0], line_no)?,
                load_mw: num(toks[1], line_no)?,
                is_ref: match toks[2] {
                    "ref" => true,
                    "pv" | "pq" => false,
                    other => {
                        return Err(Error::CaseFormat(format!(
                            "line {line_no}: unknown bus kind '{other}'"
                        )))
                    }
                },
            }),
            (Some("BRANCH"), _) if toks.len() == 3 => case.branches.push(Branch {
                from: num(toks[0], line_no)?,
                to: num(toks[1], line_no)?,
                x_pu: num(toks[2], line_no)?,
            }),
            (Some("GEN"), _) if toks.len() == 5 => case.generators.push(Generator {
                id: num(toks[0], line_no)?,
                bus: num(toks[1], line_no)?,
                pmin: num(toks[2], line_no)?,
                pmax: num(toks[3], line_no)?,
                cost: num(toks[4], line_no)?,
            }),
            (Some("INERTIA"), _) if toks.len() == 4 => case.inertia.push(InertiaUnit {
                id: num(toks[0], line_no)?,
                hmin: num(toks[1], line_no)?,
                hmax: num(toks[2], line_no)?,
                cost: num(toks[3], line_no)?,
            }),
            _ => {
                return Err(Error::CaseFormat(format!(
                    "line {line_no}: unexpected '{line}'"
                )))
            }
        }
    }
    if let Some(s) = section {
        return Err(Error::CaseFormat(format!("section {s} is not closed")));
    }
    validate(&case)?;
    Ok(case)
}

fn validate(case: &CaseData) -> Result<()> {
    if case.buses.is_empty() {
        return Err(Error::CaseFormat("no buses".into()));
    }
    if case.buses.iter().filter(|b| b.is_ref).count() != 1 {
        return Err(Error::CaseFormat(
            "exactly one reference bus is required".into(),
        ));
    }
    for br in &case.branches {
        if case.bus_index(br.from).is_none() || case.bus_index(br.to).is_none() {
            return Err(Error::CaseFormat(format!(
                "branch {}-{} names an unknown bus",
                br.from, br.to
            )));
        }
        if br.x_pu == 0.0 {
            return Err(Error::CaseFormat(format!(
                "branch {}-{} has zero reactance",
                br.from, br.to
            )));
        }
    }
    for g in &case.generators {
        if case.bus_index(g.bus).is_none() {
            return Err(Error::CaseFormat(format!(
                "generator {} sits on unknown bus {}",
                g.id, g.bus
            )));
        }
        if g.pmin > g.pmax {
            return Err(Error::CaseFormat(format!(
                "generator {} has pmin > pmax",
                g.id
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_case_parses() {
        let c = parse_case(CASE5_TEXT).unwrap();
        assert_eq!(c.buses.len(), 5);
        assert_eq!(c.branches.len(), 6);
        assert_eq!(c.generators.len(), 4);
        assert_eq!(c.inertia.len(), 2);
        assert_eq!(c.total_load(), 1000.0);
        assert_eq!(c.base_mva, 100.0);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_case("BUS\n1 0 ref\n"),
            Err(Error::CaseFormat(_))
        ));
        assert!(matches!(
            parse_case("BUS\n1 x ref\nEND\n"),
            Err(Error::CaseFormat(_))
        ));
        assert!(matches!(
            parse_case("BUS\n1 0 pv\nEND\n"),
            Err(Error::CaseFormat(_))
        ));
        assert!(matches!(
            load_case_file(Path::new("/nonexistent/case.txt")),
            Err(Error::MissingCaseFile(_))
        ));
    }
}
