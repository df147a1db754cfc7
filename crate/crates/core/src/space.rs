use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of distinct value labels. A label's position is its canonical id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ValueSpace {
    labels: Vec<String>,
}

impl ValueSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("no labels".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label {l:?}")));
            }
        }
        Ok(ValueSpace { labels })
    }

    /// Space labelled by the decimal rendering of each number, e.g. `[-2, -1, 1, 2]`.
    pub fn numeric(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|v| v.to_string()))
    }

    /// Space `prefix0, prefix1, ...` of the given size.
    pub fn indexed(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Reorders the space; `order[new] = old`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::Shape(format!(
                "permutation of length {} for space of size {}",
                order.len(),
                self.len()
            )));
        }
        Self::new(order.iter().map(|&i| self.labels[i].clone()))
    }
}

impl TryFrom<Vec<String>> for ValueSpace {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        ValueSpace::new(labels)
    }
}

impl From<ValueSpace> for Vec<String> {
    fn from(space: ValueSpace) -> Self {
        space.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(ValueSpace::new(Vec::<String>::new()).is_err());
        assert!(ValueSpace::new(["a", "b", "a"]).is_err());
    }

    #[test]
    fn index_lookup() {
        let s = ValueSpace::numeric(&[-2, -1, 1, 2]).unwrap();
        assert_eq!(s.index_of("1"), Some(2));
        assert_eq!(s.label(0), "-2");
        assert_eq!(s.index_of("0"), None);
    }

    #[test]
    fn serde_validates() {
        let s: ValueSpace = serde_json::from_str(r#"["x","y"]"#).unwrap();
        assert_eq!(s.len(), 2);
        assert!(serde_json::from_str::<ValueSpace>(r#"["x","x"]"#).is_err());
    }
}
