//! Pass/fail verdicts with serializable witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::Length;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Evidence attached to a failing verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two vertices of distinct non-adjacent types that are not incident.
    NonIncidentPair {
        a: usize,
        b: usize,
    },
    /// A cycle in the `(i, j)` restriction of the residue of `flag` that is
    /// too short; `cycle` is in canonical least-id rotation.
    Girth {
        flag: Vec<usize>,
        types: [String; 2],
        girth: Length,
        cycle: Vec<usize>,
    },
    Diameter {
        flag: Vec<usize>,
        types: [String; 2],
        diameter: Length,
    },
    /// A corank-1 flag with fewer than three completions, or a residue
    /// vertex of degree below three.
    Thickness {
        flag: Vec<usize>,
        missing_type: String,
        completions: usize,
    },
    Connectivity {
        flag: Vec<usize>,
        components: usize,
    },
    Detail {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn pass(property: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            status: Status::Pass,
            witness: None,
        }
    }

    pub fn fail(property: impl Into<String>, witness: Witness) -> Self {
        Self {
            property: property.into(),
            status: Status::Fail,
            witness: Some(witness),
        }
    }

    pub fn from_witness(property: impl Into<String>, witness: Option<Witness>) -> Self {
        match witness {
            Some(w) => Self::fail(property, w),
            None => Self::pass(property),
        }
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let json = serde_json::to_string(self).map_err(|_| fmt::Error)?;
        f.write_str(&json)
    }
}

/// First failing verdict, if any.
pub fn first_failure(verdicts: &[Verdict]) -> Option<&Verdict> {
    verdicts.iter().find(|v| !v.is_pass())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let v = Verdict::fail(
            "P",
            Witness::Girth {
                flag: vec![],
                types: ["1".into(), "2".into()],
                girth: Length::Finite(8),
                cycle: vec![0, 1, 2, 3, 4, 5, 6, 7],
            },
        );
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with(r#"{"property":"P","status":"fail","witness":{"kind":"girth""#));
        assert_eq!(serde_json::from_str::<Verdict>(&json).unwrap(), v);
        assert_eq!(
            serde_json::to_string(&Verdict::pass("F")).unwrap(),
            r#"{"property":"F","status":"pass"}"#
        );
    }
}
