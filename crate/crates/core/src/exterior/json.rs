use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tensor::{GradedTensor, Variance};
use crate::error::{Error, Result};
use crate::expr::{Chart, Frac};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    /// 1-based, strictly increasing.
    pub index: Vec<usize>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub grade: usize,
    pub variance: String,
    pub entries: Vec<EntryJson>,
}

impl<V: Variance> GradedTensor<V> {
    pub fn to_json(&self) -> TensorJson {
        TensorJson {
            grade: self.grade(),
            variance: V::NAME.to_string(),
            entries: self
                .entries()
                .map(|(idx, c)| EntryJson {
                    index: idx.iter().map(|i| i + 1).collect(),
                    coeff: c.to_expr().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(chart: &Arc<Chart>, j: &TensorJson) -> Result<Self> {
        if j.variance != V::NAME {
            return Err(Error::Shape(format!(
                "expected a {} tensor, got {}",
                V::NAME,
                j.variance
            )));
        }
        let mut entries = Vec::with_capacity(j.entries.len());
        for e in &j.entries {
            if e.index.iter().any(|i| *i == 0) {
                return Err(Error::Shape("indices are 1-based".into()));
            }
            let c = Frac::from_expr(&chart.parse(&e.coeff)?)?;
            entries.push((e.index.iter().map(|i| i - 1).collect(), c));
        }
        GradedTensor::from_entries(chart, j.grade, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{Form, MultiVector};

    #[test]
    fn round_trip() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let t = MultiVector::from_entries(
            &c,
            2,
            vec![
                (vec![0, 2], Frac::from_expr(&c.parse("x/(1+y^2)").unwrap()).unwrap()),
                (vec![1, 2], Frac::from_expr(&c.parse("-exp(z)").unwrap()).unwrap()),
            ],
        )
        .unwrap();
        let j = t.to_json();
        assert_eq!(j.entries[0].index, vec![1, 3]);
        let text = serde_json::to_string(&j).unwrap();
        let back: TensorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(MultiVector::from_json(&c, &back).unwrap(), t);
        assert!(Form::from_json(&c, &back).is_err());
    }
}
