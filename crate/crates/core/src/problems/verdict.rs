use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum RejectReason {
    Malformed {
        detail: String,
    },
    Duplicate {
        first: usize,
        second: usize,
    },
    /// Too few indices land in the relevant image set.
    TooFewIndices {
        found: usize,
        lambda: usize,
    },
    /// Too few of the relevant indices satisfy their equation.
    TooFewValid {
        valid: usize,
        indices: usize,
    },
    SerialStep {
        index: usize,
        inner: Box<RejectReason>,
    },
    NotCodeword,
    HashBit {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn reason(&self) -> Option<&RejectReason> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject(r) => Some(r),
        }
    }

    pub(crate) fn malformed(detail: impl Into<String>) -> Self {
        Verdict::Reject(RejectReason::Malformed { detail: detail.into() })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => write!(f, "accept"),
            Verdict::Reject(r) => write!(f, "reject({r:?})"),
        }
    }
}

/// Index of the first repeated element, paired with its earlier position.
pub(crate) fn first_duplicate<T: Eq + std::hash::Hash>(items: impl IntoIterator<Item = T>) -> Option<(usize, usize)> {
    let mut seen = std::collections::HashMap::new();
    for (i, x) in items.into_iter().enumerate() {
        if let Some(&j) = seen.get(&x) {
            return Some((j, i));
        }
        seen.insert(x, i);
    }
    None
}
