//! Annotation slots, type-label normalization, and match metrics.

mod extract;
mod metrics;
pub mod normalize;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use extract::{collect_slots, extract_annotations, LocatedSlot};
pub use metrics::{compute_metrics, KindBreakdown, MetricsOptions, MetricsReport};
pub use normalize::{base_type, normalize, normalize_with, NormalizeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Param,
    Return,
    Variable,
}

impl fmt::Display for SlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotKind::Param => "param",
            SlotKind::Return => "return",
            SlotKind::Variable => "variable",
        })
    }
}

/// A type as written plus its canonical and outermost-constructor forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeLabel {
    pub raw: String,
    pub normalized: String,
    pub base: String,
    pub normalization_failed: bool,
}

impl TypeLabel {
    pub fn new(raw: impl Into<String>) -> Self {
        Self::with_options(raw, NormalizeOptions::default())
    }

    pub fn with_options(raw: impl Into<String>, opts: NormalizeOptions) -> Self {
        let raw = raw.into();
        let n = normalize_with(&raw, opts);
        let base = base_type(&n.text).to_string();
        TypeLabel {
            raw,
            normalized: n.text,
            base,
            normalization_failed: n.failed,
        }
    }
}

/// Unique key of a slot within one record.
pub type SlotKey = (String, SlotKind, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "SlotRepr", into = "SlotRepr")]
pub struct TypeSlot {
    /// Dotted path of enclosing classes/functions; empty at module scope.
    pub owner: String,
    pub kind: SlotKind,
    /// Empty for return slots.
    pub name: String,
    pub label: Option<TypeLabel>,
}

impl TypeSlot {
    pub fn new(owner: &str, kind: SlotKind, name: &str, raw: Option<&str>) -> Self {
        TypeSlot {
            owner: owner.to_string(),
            kind,
            name: if kind == SlotKind::Return { String::new() } else { name.to_string() },
            label: raw.map(TypeLabel::new),
        }
    }

    pub fn key(&self) -> SlotKey {
        (self.owner.clone(), self.kind, self.name.clone())
    }

    pub fn describe(&self) -> String {
        match self.kind {
            SlotKind::Return if self.owner.is_empty() => "return".to_string(),
            SlotKind::Return => format!("{} return", self.owner),
            _ if self.owner.is_empty() => format!("{} {}", self.kind, self.name),
            _ => format!("{} {} {}", self.owner, self.kind, self.name),
        }
    }
}

/// On-disk shape of a slot, shared by label files and annotation dumps.
#[derive(Serialize, Deserialize)]
struct SlotRepr {
    owner: String,
    kind: SlotKind,
    #[serde(default)]
    name: String,
    #[serde(rename = "type", default)]
    type_: Option<String>,
}

impl From<SlotRepr> for TypeSlot {
    fn from(r: SlotRepr) -> Self {
        TypeSlot::new(&r.owner, r.kind, &r.name, r.type_.as_deref())
    }
}

impl From<TypeSlot> for SlotRepr {
    fn from(s: TypeSlot) -> Self {
        SlotRepr {
            owner: s.owner,
            kind: s.kind,
            name: s.name,
            type_: s.label.map(|l| l.raw),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub snippet_id: String,
    pub slots: Vec<TypeSlot>,
}

impl AnnotationRecord {
    pub fn get(&self, key: &SlotKey) -> Option<&TypeSlot> {
        self.slots.iter().find(|s| s.owner == key.0 && s.kind == key.1 && s.name == key.2)
    }
}
