//! Template store persistence.
//!
//! The canonical format is a versioned JSON document carrying the class
//! labels, the intermediate template tensor in row-major order, and the
//! per-element source instance indices. JSON round-trips are bit-exact:
//! floats are rendered with shortest round-trip decimal notation and parsed
//! back to the identical bits. A flat CSV alternative
//! (`class,template_index,dim,value,source_instance`) is provided for
//! interoperability with table tooling.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase1::IntermediateTemplateSet;

pub const STORE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported store format version {0}")]
    BadVersion(u32),
    #[error("malformed store: {0}")]
    Malformed(String),
    #[error("csv store row {row}: {message}")]
    Csv { row: usize, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreDoc {
    format_version: u32,
    num_classes: usize,
    templates_per_class: usize,
    dim: usize,
    labels: Vec<String>,
    /// Row-major `[class][template][dim]`.
    values: Vec<f64>,
    /// Row-major source instance index per element.
    provenance: Vec<usize>,
}

fn to_doc(tpl: &IntermediateTemplateSet) -> StoreDoc {
    let n = tpl.num_classes();
    let k = tpl.templates_per_class();
    let dim = tpl.dim();
    let mut values = Vec::with_capacity(n * k * dim);
    let mut provenance = Vec::with_capacity(n * k * dim);
    for class in 0..n {
        for template in 0..k {
            for l in 0..dim {
                values.push(tpl.value(class, template, l));
                provenance.push(tpl.provenance(class, template, l));
            }
        }
    }
    StoreDoc {
        format_version: STORE_FORMAT_VERSION,
        num_classes: n,
        templates_per_class: k,
        dim,
        labels: tpl.labels().to_vec(),
        values,
        provenance,
    }
}

fn from_doc(doc: StoreDoc) -> Result<IntermediateTemplateSet, StoreError> {
    if doc.format_version != STORE_FORMAT_VERSION {
        return Err(StoreError::BadVersion(doc.format_version));
    }
    let expected = doc.num_classes * doc.templates_per_class * doc.dim;
    if doc.values.len() != expected || doc.provenance.len() != expected {
        return Err(StoreError::Malformed(format!(
            "expected {expected} elements, got {} values / {} provenance",
            doc.values.len(),
            doc.provenance.len()
        )));
    }
    if doc.labels.len() != doc.num_classes {
        return Err(StoreError::Malformed(format!(
            "{} labels for {} classes",
            doc.labels.len(),
            doc.num_classes
        )));
    }
    let mut values = Vec::with_capacity(doc.num_classes);
    let mut provenance = Vec::with_capacity(doc.num_classes);
    let mut cursor = 0usize;
    for _ in 0..doc.num_classes {
        let mut class_values = Vec::with_capacity(doc.templates_per_class);
        let mut class_prov = Vec::with_capacity(doc.templates_per_class);
        for _ in 0..doc.templates_per_class {
            class_values.push(doc.values[cursor..cursor + doc.dim].to_vec());
            class_prov.push(doc.provenance[cursor..cursor + doc.dim].to_vec());
            cursor += doc.dim;
        }
        values.push(class_values);
        provenance.push(class_prov);
    }
    IntermediateTemplateSet::from_parts(doc.labels, values, provenance, None)
        .map_err(|e| StoreError::Malformed(e.to_string()))
}

pub fn to_json(tpl: &IntermediateTemplateSet) -> Result<String, StoreError> {
    Ok(serde_json::to_string_pretty(&to_doc(tpl))?)
}

pub fn from_json(json: &str) -> Result<IntermediateTemplateSet, StoreError> {
    from_doc(serde_json::from_str(json)?)
}

pub fn save_json(tpl: &IntermediateTemplateSet, path: &Path) -> Result<(), StoreError> {
    fs::write(path, to_json(tpl)?)?;
    Ok(())
}

pub fn load_json(path: &Path) -> Result<IntermediateTemplateSet, StoreError> {
    from_json(&fs::read_to_string(path)?)
}

/// Flat CSV rendering, one row per tensor element.
pub fn to_csv(tpl: &IntermediateTemplateSet) -> String {
    let mut out = String::from("class,template_index,dim,value,source_instance\n");
    for class in 0..tpl.num_classes() {
        for template in 0..tpl.templates_per_class() {
            for l in 0..tpl.dim() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    tpl.label(class),
                    template,
                    l,
                    tpl.value(class, template, l),
                    tpl.provenance(class, template, l)
                ));
            }
        }
    }
    out
}

pub fn save_csv(tpl: &IntermediateTemplateSet, path: &Path) -> Result<(), StoreError> {
    for label in tpl.labels() {
        if label.contains(',') || label.contains('\n') {
            return Err(StoreError::Malformed(format!(
                "label {label:?} cannot be written to CSV"
            )));
        }
    }
    fs::write(path, to_csv(tpl))?;
    Ok(())
}

pub fn from_csv(text: &str) -> Result<IntermediateTemplateSet, StoreError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "class,template_index,dim,value,source_instance" => {}
        other => {
            return Err(StoreError::Csv {
                row: 1,
                message: format!("bad header: {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    // label -> (template -> dim -> (value, source))
    let mut labels: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<Vec<Option<(f64, usize)>>>> = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(StoreError::Csv {
                row,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| {
            s.trim().parse::<usize>().map_err(|e| StoreError::Csv {
                row,
                message: format!("bad {what}: {e}"),
            })
        };
        let label = fields[0].to_string();
        let template = parse_usize(fields[1], "template_index")?;
        let dim = parse_usize(fields[2], "dim")?;
        let value = fields[3].trim().parse::<f64>().map_err(|e| StoreError::Csv {
            row,
            message: format!("bad value: {e}"),
        })?;
        let source = parse_usize(fields[4], "source_instance")?;
        let class = match labels.iter().position(|l| *l == label) {
            Some(i) => i,
            None => {
                labels.push(label.clone());
                cells.push(Vec::new());
                labels.len() - 1
            }
        };
        let class_cells = &mut cells[class];
        if class_cells.len() <= template {
            class_cells.resize(template + 1, Vec::new());
        }
        if class_cells[template].len() <= dim {
            class_cells[template].resize(dim + 1, None);
        }
        if class_cells[template][dim].replace((value, source)).is_some() {
            return Err(StoreError::Csv {
                row,
                message: format!("duplicate element ({label}, {template}, {dim})"),
            });
        }
    }
    if labels.is_empty() {
        return Err(StoreError::Malformed("empty csv store".into()));
    }
    let mut values = Vec::new();
    let mut provenance = Vec::new();
    for (class, class_cells) in cells.iter().enumerate() {
        let mut class_values = Vec::new();
        let mut class_prov = Vec::new();
        for (template, dims) in class_cells.iter().enumerate() {
            let mut vrow = Vec::new();
            let mut prow = Vec::new();
            for (dim, cell) in dims.iter().enumerate() {
                match cell {
                    Some((v, p)) => {
                        vrow.push(*v);
                        prow.push(*p);
                    }
                    None => {
                        return Err(StoreError::Malformed(format!(
                            "missing element ({}, {template}, {dim})",
                            labels[class]
                        )))
                    }
                }
            }
            class_values.push(vrow);
            class_prov.push(prow);
        }
        values.push(class_values);
        provenance.push(class_prov);
    }
    IntermediateTemplateSet::from_parts(labels, values, provenance, None)
        .map_err(|e| StoreError::Malformed(e.to_string()))
}

pub fn load_csv(path: &Path) -> Result<IntermediateTemplateSet, StoreError> {
    from_csv(&fs::read_to_string(path)?)
}
