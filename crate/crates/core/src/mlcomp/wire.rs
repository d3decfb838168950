//! Newline-delimited JSON protocol spoken with external classifiers.
//!
//! Each line carries one UTF-8 JSON object:
//!
//! ```text
//! request   {"id": 7, "features": [0.45, 0.2, 0.2]}
//! response  {"id": 7, "label": 0, "score": 0.93}
//! error     {"id": 7, "error": "wrong arity"}
//! ```
//!
//! Responses may arrive in any order and are matched to requests by `id`.
//! A server answers an unparseable line with an error object whose id is 0.

use serde::{Deserialize, Serialize};

use super::{ClassifierError, Label, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reply {
    Verdict { id: u64, label: Label, score: f64 },
    Error { id: u64, error: String },
}

impl Reply {
    pub fn id(&self) -> u64 {
        match self {
            Reply::Verdict { id, .. } | Reply::Error { id, .. } => *id,
        }
    }

    /// Parses one reply line, validating label and score ranges.
    pub fn parse(line: &str) -> Result<Self, ClassifierError> {
        let reply: Reply =
            serde_json::from_str(line.trim_end()).map_err(|_| ClassifierError::Malformed(line.trim_end().into()))?;
        if let Reply::Verdict { label, score, .. } = &reply {
            if *label > 1 || !(0.0..=1.0).contains(score) {
                return Err(ClassifierError::Malformed(line.trim_end().into()));
            }
        }
        Ok(reply)
    }

    pub fn into_verdict(self) -> Result<Verdict, ClassifierError> {
        match self {
            Reply::Verdict { label, score, .. } => Ok(Verdict { label, score }),
            Reply::Error { id, error } => Err(ClassifierError::Remote { id, message: error }),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("reply serializes");
        s.push('\n');
        s
    }
}

impl Request {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("request serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_layout() {
        let r = Request { id: 42, features: vec![0.5, 1.0] };
        assert_eq!(r.to_line(), "{\"id\":42,\"features\":[0.5,1.0]}\n");
    }

    #[test]
    fn reply_kinds() {
        let v = Reply::parse("{\"id\": 3, \"label\": 1, \"score\": 0.75}").unwrap();
        assert_eq!(v, Reply::Verdict { id: 3, label: 1, score: 0.75 });
        let e = Reply::parse("{\"id\": 0, \"error\": \"bad json\"}\n").unwrap();
        assert_eq!(e.id(), 0);
        assert!(matches!(e.into_verdict(), Err(ClassifierError::Remote { id: 0, .. })));
    }

    #[test]
    fn reply_validation() {
        assert!(Reply::parse("{\"id\": 3, \"label\": 2, \"score\": 0.75}").is_err());
        assert!(Reply::parse("{\"id\": 3, \"label\": 1, \"score\": 1.5}").is_err());
        assert!(Reply::parse("not json").is_err());
        assert!(Reply::parse("{\"id\": 3}").is_err());
    }
}
