use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use treeconn::slam::{self, LoadOptions, LoadReport};
use treeconn::{EspInstance, Error, PoseGraphDataset, Result};

use crate::args::InputArgs;

pub struct LoadedInstance {
    pub instance: EspInstance,
    /// Weight rescaling applied on load.
    pub alpha: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_dataset(input: &InputArgs) -> Result<Option<(PoseGraphDataset, LoadReport)>> {
    let Some(path) = &input.g2o else { return Ok(None) };
    let base_edges = match &input.base_edges {
        Some(p) => {
            let file = File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Some(slam::parse_base_edges(BufReader::new(file))?)
        }
        None => None,
    };
    let opts = LoadOptions { normalize: input.normalize, base_edges };
    slam::load_g2o(path, &opts).map(Some)
}

fn note_report(r: &LoadReport) {
    if r.ignored_lines > 0 {
        eprintln!("note: ignored {} lines with unrecognized tags", r.ignored_lines);
    }
    if !r.offdiag_flagged.is_empty() {
        eprintln!(
            "note: {} edges carry off-diagonal information that was dropped (first at line {})",
            r.offdiag_flagged.len(),
            r.offdiag_flagged[0]
        );
    }
    if r.alpha != 1.0 {
        eprintln!("note: weights rescaled by {}", r.alpha);
    }
}

/// Loads the instance named on the command line, applying a budget override.
pub fn load_instance(input: &InputArgs, k: Option<usize>) -> Result<LoadedInstance> {
    if let Some((ds, report)) = load_dataset(input)? {
        note_report(&report);
        let instance = slam::to_instance(&ds, k.unwrap_or(0))?;
        return Ok(LoadedInstance { instance, alpha: report.alpha });
    }
    let Some(path) = &input.instance else {
        return Err(Error::Argument("one of --instance or --g2o is required".into()));
    };
    let text = read(path)?;
    let (instance, alpha) = if input.normalize {
        EspInstance::from_json_normalized(&text)?
    } else {
        (EspInstance::from_json(&text)?, 1.0)
    };
    let instance = match k {
        Some(k) => instance.with_k(k)?,
        None => instance,
    };
    Ok(LoadedInstance { instance, alpha })
}

/// Reads a design: a JSON list of candidate indices, or an object whose
/// `selected` field is such a list.
pub fn load_design(path: &Path) -> Result<Vec<usize>> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)?;
    let list = match &value {
        serde_json::Value::Object(map) => map.get("selected"),
        other => Some(other),
    };
    let Some(serde_json::Value::Array(items)) = list else {
        return Err(Error::Data("design must be a list of candidate indices or contain `selected`".into()));
    };
    items
        .iter()
        .map(|v| {
            v.as_u64()
                .map(|i| i as usize)
                .ok_or_else(|| Error::Data(format!("design entry {v} is not a candidate index")))
        })
        .collect()
}
