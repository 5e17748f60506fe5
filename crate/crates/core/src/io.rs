//! JSON documents for instances and results.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::model::{AssignmentMatrix, CustomerType, Instance, PartitionVector, SolveResult, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub types: Vec<CustomerType>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance, name: Option<String>) -> Self {
        InstanceFile {
            name,
            types: inst.types().to_vec(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).or_else(|e| invalid(format!("malformed instance file: {e}")))
    }

    pub fn to_instance(&self) -> Result<Instance> {
        Instance::new(self.types.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }
}

/// Serialized solver output. `objective` is `null` when no feasible point exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub problem: String,
    pub status: Status,
    pub objective: Option<f64>,
    pub alpha: Vec<f64>,
    pub assignment: Vec<Vec<f64>>,
    pub structure: Value,
    pub candidates_evaluated: usize,
}

impl ResultFile {
    pub fn from_result(problem: &str, res: &SolveResult, equivalence: Option<&str>) -> Self {
        let mut structure = serde_json::to_value(&res.structure).expect("structures serialize");
        if let (Some(note), Value::Object(map)) = (equivalence, &mut structure) {
            map.insert("equivalence".into(), Value::String(note.into()));
        }
        ResultFile {
            problem: problem.into(),
            status: res.status,
            objective: res.objective.is_finite().then_some(res.objective),
            alpha: res.partition.as_slice().to_vec(),
            assignment: res.assignment.to_rows(),
            structure,
            candidates_evaluated: res.candidates_evaluated,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).or_else(|e| invalid(format!("malformed result file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result files always serialize")
    }

    pub fn assignment_matrix(&self) -> Result<AssignmentMatrix> {
        AssignmentMatrix::new(self.assignment.clone())
    }

    pub fn partition(&self) -> Result<PartitionVector> {
        PartitionVector::new(self.alpha.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_sap;

    #[test]
    fn instance_round_trip() {
        let text = r#"{"name": "ex1", "types": [{"lambda": 0.4, "mu": 16}, {"lambda": 8, "mu": 12}]}"#;
        let file = InstanceFile::parse(text).unwrap();
        assert_eq!(file.name.as_deref(), Some("ex1"));
        let inst = file.to_instance().unwrap();
        assert_eq!(inst.len(), 2);
        let again = InstanceFile::parse(&file.to_json()).unwrap();
        assert_eq!(again, file);
    }

    #[test]
    fn bad_rate_names_index() {
        let text = r#"{"types": [{"lambda": 0.4, "mu": 16}, {"lambda": -1, "mu": 12}]}"#;
        let err = InstanceFile::parse(text).unwrap().to_instance().unwrap_err();
        assert!(err.to_string().contains('1'), "{err}");
        assert!(InstanceFile::parse("{").is_err());
    }

    #[test]
    fn result_round_trip_is_lossless() {
        let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
        let res = solve_sap(&inst, 0.8).unwrap();
        let file = ResultFile::from_result("sap", &res, None);
        let back = ResultFile::parse(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.objective, Some(res.objective));
        assert_eq!(back.assignment_matrix().unwrap(), res.assignment);
    }

    #[test]
    fn equivalence_note() {
        let inst = Instance::from_rates(&[0.5], &[1.0]).unwrap();
        let res = crate::solvers::solve_spp(&inst).unwrap();
        let file = ResultFile::from_result("dpp", &res, Some("spp"));
        assert_eq!(file.structure["equivalence"], "spp");
        assert_eq!(file.structure["kind"], "spp");
    }
}
