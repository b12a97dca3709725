use serde::{Deserialize, Serialize};

use super::{PointVortex, VortexLine, VortexLineSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexRecord {
    pub x: f64,
    pub y: f64,
    pub charge: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub closed: bool,
    pub points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub period: [f64; 3],
}

fn is_zero(p: &[f64; 3]) -> bool {
    *p == [0.0; 3]
}

/// On-disk vortex document, 2D points or 3D lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexDocument {
    pub dims: usize,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vortices: Option<Vec<VortexRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<LineRecord>>,
    /// Extra diagnostics (grid, net charge, velocities).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

impl VortexDocument {
    pub fn points(&self) -> Result<Vec<PointVortex>> {
        let v = self.vortices.as_ref().ok_or_else(|| Error::InvalidParameter("document has no point vortices".into()))?;
        Ok(v.iter().map(|r| PointVortex::new([r.x, r.y], r.charge)).collect())
    }

    pub fn line_set(&self) -> Result<VortexLineSet> {
        let l = self.lines.as_ref().ok_or_else(|| Error::InvalidParameter("document has no vortex lines".into()))?;
        Ok(VortexLineSet::new(l.iter().map(|r| VortexLine { points: r.points.clone(), closed: r.closed, period: r.period }).collect()))
    }
}

pub fn vortices_to_json(t: f64, vortices: &[PointVortex], meta: serde_json::Value) -> VortexDocument {
    VortexDocument {
        dims: 2,
        t,
        vortices: Some(vortices.iter().map(|v| VortexRecord { x: v.position[0], y: v.position[1], charge: v.charge }).collect()),
        lines: None,
        meta,
    }
}

pub fn lines_to_json(t: f64, set: &VortexLineSet, meta: serde_json::Value) -> VortexDocument {
    VortexDocument {
        dims: 3,
        t,
        vortices: None,
        lines: Some(set.lines.iter().map(|l| LineRecord { closed: l.closed, points: l.points.clone(), period: l.period }).collect()),
        meta,
    }
}

pub fn vortices_from_json(text: &str) -> Result<VortexDocument> {
    let doc: VortexDocument = serde_json::from_str(text)?;
    match (doc.dims, &doc.vortices, &doc.lines) {
        (2, Some(_), _) | (3, _, Some(_)) => Ok(doc),
        _ => Err(Error::InvalidParameter(format!("vortex document with dims={} lacks its payload", doc.dims))),
    }
}
