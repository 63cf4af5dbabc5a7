//! JSON layout `{d, times[], values[][], areas[][][], kind, seed}` for paths
//! and their fine-interval areas.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::area::{AreaKind, AreaProcess};
use crate::error::{check_dim, Result};
use crate::partition::Partition;
use crate::path::DriverPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub d: usize,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// One `d × d` matrix per fine interval, drift included.
    pub areas: Vec<Vec<Vec<f64>>>,
    pub kind: Option<AreaKind>,
    pub seed: Option<u64>,
}

impl PathRecord {
    pub fn from_path(path: &DriverPath, area: Option<&AreaProcess>, seed: Option<u64>) -> Self {
        let d = path.dim();
        let areas = area
            .map(|a| {
                a.fine_blocks()
                    .into_iter()
                    .map(|m| m.chunks(d).map(|row| row.to_vec()).collect())
                    .collect()
            })
            .unwrap_or_default();
        Self {
            d,
            times: path.grid().times().to_vec(),
            values: (0..path.len()).map(|k| path.value(k).to_vec()).collect(),
            areas,
            kind: area.map(|a| a.kind()),
            seed,
        }
    }

    pub fn to_path(&self) -> Result<DriverPath> {
        let path = DriverPath::new(Partition::new(self.times.clone())?, self.values.clone())?;
        check_dim("record dimension", self.d, path.dim())?;
        Ok(path)
    }

    /// Rebuilds path and area; the area is `None` when the record has none.
    pub fn to_area(&self) -> Result<(Arc<DriverPath>, Option<AreaProcess>)> {
        let path = Arc::new(self.to_path()?);
        if self.areas.is_empty() {
            return Ok((path, None));
        }
        check_dim("record areas", path.len() - 1, self.areas.len())?;
        let mut fine = Vec::with_capacity(self.areas.len() * self.d * self.d);
        for m in &self.areas {
            check_dim("area rows", self.d, m.len())?;
            for row in m {
                check_dim("area columns", self.d, row.len())?;
                fine.extend_from_slice(row);
            }
        }
        let kind = self.kind.unwrap_or(AreaKind::Perturbed);
        let area = AreaProcess::from_fine(Arc::clone(&path), kind, fine)?;
        Ok((path, Some(area)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let g = Partition::uniform(0.0, 1.0, 3).unwrap();
        let path = Arc::new(DriverPath::from_fn(g, 2, |t| vec![t, t * t]).unwrap());
        let fine: Vec<f64> = (0..12).map(|i| i as f64 * 0.01).collect();
        let area = AreaProcess::from_fine(Arc::clone(&path), AreaKind::Analytic, fine).unwrap();
        let rec = PathRecord::from_path(&path, Some(&area), Some(7));
        let json = rec.to_json();
        let back: PathRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        let (p2, a2) = back.to_area().unwrap();
        assert_eq!(*p2, *path);
        assert_eq!(a2.unwrap().area(0, 3), area.area(0, 3));
        assert!(json.starts_with("{\"d\":2,\"times\":"));
    }
}
