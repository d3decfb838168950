use serde::{Deserialize, Serialize};

use super::{AbstractSpace, AnalyzerError, Region, RegionTag};
use crate::falsifier::RouMap;

/// Ties an abstract dimension to a CPS parameter with the same semantic unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub dim: String,
    pub param: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Binding {
    pub links: Vec<Link>,
}

impl Binding {
    pub fn new(links: Vec<Link>) -> Self {
        Self { links }
    }

    pub fn link(dim: impl Into<String>, param: impl Into<String>) -> Self {
        Self { links: vec![Link { dim: dim.into(), param: param.into() }] }
    }

    pub fn dim_for(&self, param: &str) -> Option<&str> {
        self.links.iter().find(|l| l.param == param).map(|l| l.dim.as_str())
    }
}

/// Restricts every bound dimension of `space` to the interval hull of the
/// ROU cells along the linked parameter.
pub fn restrict_to_rou(space: &AbstractSpace, rou: &RouMap, binding: &Binding) -> Result<AbstractSpace, AnalyzerError> {
    if rou.is_empty() {
        return Err(AnalyzerError::EmptyRestriction);
    }
    let mut out = space.clone();
    for link in &binding.links {
        let j = space
            .dim_index(&link.dim)
            .ok_or_else(|| AnalyzerError::Config(format!("binding names unknown dimension {:?}", link.dim)))?;
        let p = rou
            .grid
            .param_box
            .index_of(&link.param)
            .ok_or_else(|| AnalyzerError::Config(format!("binding names unknown parameter {:?}", link.param)))?;
        let (lo, hi) = rou.hull(p);
        let dim = &space.dims[j];
        out.restrict(j, dim.to_normalized(lo), dim.to_normalized(hi));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// CPS-side description of one misclassification region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmlEntry {
    pub region: usize,
    pub tag: RegionTag,
    /// Semantic ranges of the bound parameters.
    pub params: Vec<ParamRange>,
    /// Normalized abstract sub-box the scene is drawn from.
    pub scene_lo: Vec<f64>,
    pub scene_hi: Vec<f64>,
    /// Region center followed by its member points.
    pub representatives: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Uml {
    pub entries: Vec<UmlEntry>,
}

impl Uml {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Maps each region to parameter sub-ranges (bound dims, de-normalized) and a
/// scene sub-box (all dims).
pub fn project_to_cps(regions: &[Region], binding: &Binding, space: &AbstractSpace) -> Result<Uml, AnalyzerError> {
    let mut bound = Vec::new();
    for link in &binding.links {
        let j = space
            .dim_index(&link.dim)
            .ok_or_else(|| AnalyzerError::Config(format!("binding names unknown dimension {:?}", link.dim)))?;
        bound.push((j, link.param.clone()));
    }
    let entries = regions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let params = bound
                .iter()
                .map(|(j, name)| {
                    let d = &space.dims[*j];
                    ParamRange { name: name.clone(), lo: d.to_semantic(r.lo[*j]), hi: d.to_semantic(r.hi[*j]) }
                })
                .collect();
            let mut representatives = vec![r.center()];
            representatives.extend(r.members.iter().cloned());
            UmlEntry {
                region: i,
                tag: r.tag,
                params,
                scene_lo: r.lo.clone(),
                scene_hi: r.hi.clone(),
                representatives,
            }
        })
        .collect();
    Ok(Uml { entries })
}
