//! JSON model files.
//!
//! Orbital ids are 1-based in the file and 0-based in memory. One- and
//! two-body entries may be given in any order; the symmetry closures are
//! applied on load and conflicting duplicates are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use projection_core::angmom::AngMomLabel;
use projection_core::manybody::{Basis, Model, OneBodyOperator, Orbital, SlaterState, TwoBodyOperator};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub id: usize,
    pub shell: String,
    pub two_j: u32,
    pub two_m: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneBodyEntry {
    pub i: usize,
    pub k: usize,
    pub value: f64,
}

/// `<ij|V|kl>`, antisymmetrized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBodyEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub name: String,
    pub basis: Vec<BasisEntry>,
    pub occupied: Vec<usize>,
    #[serde(default)]
    pub one_body: Vec<OneBodyEntry>,
    #[serde(default)]
    pub two_body: Vec<TwoBodyEntry>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("model file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Validates the file and builds the in-memory model.
    pub fn to_model(&self) -> Result<Model, CliError> {
        let invalid = |msg: String| CliError::InvalidModel(msg);
        let n = self.basis.len();
        if n == 0 {
            return Err(invalid("basis is empty".into()));
        }
        let mut by_id: BTreeMap<usize, &BasisEntry> = BTreeMap::new();
        for entry in &self.basis {
            if by_id.insert(entry.id, entry).is_some() {
                return Err(invalid(format!("duplicate orbital id {}", entry.id)));
            }
        }
        for (expected, &id) in (1..=n).zip(by_id.keys()) {
            if id != expected {
                return Err(invalid(format!("orbital ids must be 1..{n}; id {expected} is missing")));
            }
        }
        let mut orbitals = Vec::with_capacity(n);
        for entry in by_id.values() {
            let label = AngMomLabel::new(entry.two_j, entry.two_m)
                .map_err(|e| invalid(format!("orbital {}: {e}", entry.id)))?;
            orbitals.push(Orbital::new(entry.shell.clone(), label));
        }
        check_complete_shells(&orbitals)?;
        let basis = Arc::new(Basis::new(orbitals));

        let id = |raw: usize, what: &str| {
            if raw == 0 || raw > n {
                Err(invalid(format!("{what} refers to unknown orbital id {raw}")))
            } else {
                Ok(raw - 1)
            }
        };
        let occupied =
            self.occupied.iter().map(|&o| id(o, "occupied list")).collect::<Result<Vec<_>, _>>()?;
        let state = SlaterState::new(basis, occupied).map_err(|e| invalid(format!("occupied list: {e}")))?;
        let one = self
            .one_body
            .iter()
            .map(|e| Ok((id(e.i, "one_body")?, id(e.k, "one_body")?, e.value)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let two = self
            .two_body
            .iter()
            .map(|e| {
                Ok((
                    [id(e.i, "two_body")?, id(e.j, "two_body")?, id(e.k, "two_body")?, id(e.l, "two_body")?],
                    e.value,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let one_body = OneBodyOperator::from_entries(n, &one).map_err(|e| invalid(format!("one_body: {e}")))?;
        let two_body = TwoBodyOperator::from_entries(n, &two).map_err(|e| invalid(format!("two_body: {e}")))?;
        Model::new(state, one_body, two_body).map_err(|e| invalid(e.to_string()))
    }

    /// Canonical form: basis in id order, upper-triangle one-body entries,
    /// two-body entries with `i<j`, `k<l` and `(i,j) <= (k,l)`.
    pub fn from_model(name: &str, model: &Model) -> Self {
        let basis = model
            .basis()
            .orbitals()
            .iter()
            .enumerate()
            .map(|(id, o)| BasisEntry {
                id: id + 1,
                shell: o.shell.clone(),
                two_j: o.label.two_j(),
                two_m: o.label.two_m(),
            })
            .collect();
        let one_body =
            model.one_body.entries().into_iter().map(|(i, k, value)| OneBodyEntry { i: i + 1, k: k + 1, value }).collect();
        let two_body = model
            .two_body
            .iter_canonical()
            .filter(|([p, q, r, s], _)| (p, q) <= (r, s))
            .map(|([p, q, r, s], value)| TwoBodyEntry { i: p + 1, j: q + 1, k: r + 1, l: s + 1, value })
            .collect();
        Self {
            name: name.to_string(),
            basis,
            occupied: model.state.occupied().iter().map(|o| o + 1).collect(),
            one_body,
            two_body,
        }
    }
}

/// Rotations mix the `2j+1` states of a shell, so every shell must be complete.
fn check_complete_shells(orbitals: &[Orbital]) -> Result<(), CliError> {
    let mut shells: BTreeMap<(&str, u32), BTreeSet<i32>> = BTreeMap::new();
    for o in orbitals {
        let ms = shells.entry((o.shell.as_str(), o.label.two_j())).or_default();
        if !ms.insert(o.label.two_m()) {
            return Err(CliError::InvalidModel(format!(
                "shell {} (2j={}) lists 2m={} twice",
                o.shell,
                o.label.two_j(),
                o.label.two_m()
            )));
        }
    }
    for ((shell, two_j), ms) in shells {
        if ms.len() != two_j as usize + 1 {
            return Err(CliError::InvalidModel(format!(
                "shell {shell} (2j={two_j}) has {} of its {} m-states",
                ms.len(),
                two_j + 1
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use projection_core::fixtures::two_shell_model;

    fn minimal() -> ModelFile {
        ModelFile {
            name: "pair".into(),
            basis: vec![
                BasisEntry { id: 1, shell: "s".into(), two_j: 1, two_m: 1 },
                BasisEntry { id: 2, shell: "s".into(), two_j: 1, two_m: -1 },
            ],
            occupied: vec![1],
            one_body: vec![OneBodyEntry { i: 1, k: 1, value: 0.5 }, OneBodyEntry { i: 2, k: 2, value: 0.5 }],
            two_body: vec![],
        }
    }

    #[test]
    fn canonical_round_trip() {
        let model = two_shell_model();
        let file = ModelFile::from_model("two_shell", &model);
        let reparsed = ModelFile::parse(&file.to_json()).unwrap();
        assert_eq!(reparsed, file);
        assert_eq!(reparsed.to_model().unwrap(), model);
    }

    #[test]
    fn closure_applied_on_load() {
        let mut file = minimal();
        file.one_body.push(OneBodyEntry { i: 2, k: 1, value: 0.1 });
        let model = file.to_model().unwrap();
        assert_eq!(model.one_body.get(0, 1), 0.1);
        file.one_body.push(OneBodyEntry { i: 1, k: 2, value: 0.2 });
        assert!(matches!(file.to_model(), Err(CliError::InvalidModel(_))));
    }

    #[test]
    fn duplicate_id_named() {
        let mut file = minimal();
        file.basis[1].id = 1;
        let err = file.to_model().unwrap_err();
        assert!(err.to_string().contains("duplicate orbital id 1"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn incomplete_shell_rejected() {
        let mut file = minimal();
        file.basis.pop();
        file.one_body.pop();
        assert!(file.to_model().unwrap_err().to_string().contains("m-states"));
    }

    #[test]
    fn unknown_ids_rejected() {
        let mut file = minimal();
        file.occupied = vec![3];
        assert_eq!(file.to_model().unwrap_err().exit_code(), 3);
        let mut file = minimal();
        file.basis[1].two_m = 2;
        assert_eq!(file.to_model().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ModelFile::parse("{\n  \"basis\": [\n    {\"id\": \"x\"}\n  ]\n}").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
