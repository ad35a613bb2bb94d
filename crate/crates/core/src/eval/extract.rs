use std::collections::HashMap;

use tree_sitter::Node;

use super::{AnnotationRecord, SlotKind, TypeSlot};
use crate::error::Result;
use crate::python;

/// A slot plus the 1-based line it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedSlot {
    pub slot: TypeSlot,
    pub line: usize,
}

/// Reads every parameter, return, and variable-binding slot out of `code`.
///
/// Unannotated parameters and returns appear with no label. Variables are
/// simple-name assignment targets (plus annotated attribute targets such as
/// `self.x: int`). An unannotated leading `self`/`cls` on a method is not a
/// slot. When a key repeats, the first occurrence wins unless a later one
/// carries the only annotation.
pub fn collect_slots(code: &str) -> Result<Vec<LocatedSlot>> {
    let tree = python::parse(code)?;
    let mut walker = Walker {
        src: code,
        out: Vec::new(),
        index: HashMap::new(),
    };
    walker.visit(tree.root_node(), &[], false);
    Ok(walker.out)
}

pub fn extract_annotations(code: &str, snippet_id: &str) -> Result<AnnotationRecord> {
    Ok(AnnotationRecord {
        snippet_id: snippet_id.to_string(),
        slots: collect_slots(code)?.into_iter().map(|l| l.slot).collect(),
    })
}

struct Walker<'s> {
    src: &'s str,
    out: Vec<LocatedSlot>,
    index: HashMap<(String, SlotKind, String), usize>,
}

impl<'s> Walker<'s> {
    fn push(&mut self, owner: &[String], kind: SlotKind, name: &str, label: Option<Node<'_>>, at: Node<'_>) {
        let slot = TypeSlot::new(
            &owner.join("."),
            kind,
            name,
            label.map(|n| python::text(n, self.src)),
        );
        let line = label.unwrap_or(at).start_position().row + 1;
        match self.index.get(&slot.key()) {
            Some(&i) => {
                if self.out[i].slot.label.is_none() && slot.label.is_some() {
                    self.out[i] = LocatedSlot { slot, line };
                }
            }
            None => {
                self.index.insert(slot.key(), self.out.len());
                self.out.push(LocatedSlot { slot, line });
            }
        }
    }

    fn visit(&mut self, node: Node<'_>, scope: &[String], in_class: bool) {
        match node.kind() {
            "class_definition" => {
                let Some(name) = node.child_by_field_name("name") else { return };
                let scope = extend(scope, python::text(name, self.src));
                if let Some(body) = node.child_by_field_name("body") {
                    self.visit_children(body, &scope, true);
                }
            }
            "function_definition" => self.function(node, scope, in_class),
            "assignment" => self.assignment(node, scope),
            "lambda" => {}
            _ => self.visit_children(node, scope, in_class),
        }
    }

    fn visit_children(&mut self, node: Node<'_>, scope: &[String], in_class: bool) {
        let mut cursor = node.walk();
        let children: Vec<_> = node.named_children(&mut cursor).collect();
        for child in children {
            self.visit(child, scope, in_class);
        }
    }

    fn function(&mut self, node: Node<'_>, scope: &[String], in_class: bool) {
        let Some(name) = node.child_by_field_name("name") else { return };
        let owner = extend(scope, python::text(name, self.src));
        if let Some(params) = node.child_by_field_name("parameters") {
            let mut cursor = params.walk();
            let params: Vec<_> = params.named_children(&mut cursor).collect();
            for (i, p) in params.into_iter().enumerate() {
                let Some((pname, label)) = self.param(p) else { continue };
                if in_class && i == 0 && label.is_none() && (pname == "self" || pname == "cls") {
                    continue;
                }
                self.push(&owner, SlotKind::Param, pname, label, p);
            }
        }
        let ret = node.child_by_field_name("return_type");
        self.push(&owner, SlotKind::Return, "", ret, name);
        if let Some(body) = node.child_by_field_name("body") {
            self.visit_children(body, &owner, false);
        }
    }

    fn param<'t>(&self, p: Node<'t>) -> Option<(&'s str, Option<Node<'t>>)> {
        let ident = |n: Node<'_>| -> Option<&'s str> {
            match n.kind() {
                "identifier" => Some(python::text(n, self.src)),
                "list_splat_pattern" | "dictionary_splat_pattern" => {
                    let mut c = n.walk();
                    let id = n.named_children(&mut c).find(|c| c.kind() == "identifier");
                    id.map(|i| python::text(i, self.src))
                }
                _ => None,
            }
        };
        match p.kind() {
            "identifier" | "list_splat_pattern" | "dictionary_splat_pattern" => Some((ident(p)?, None)),
            "default_parameter" => Some((ident(p.child_by_field_name("name")?)?, None)),
            "typed_default_parameter" => Some((
                ident(p.child_by_field_name("name")?)?,
                p.child_by_field_name("type"),
            )),
            "typed_parameter" => Some((ident(p.named_child(0)?)?, p.child_by_field_name("type"))),
            _ => None,
        }
    }

    fn assignment(&mut self, node: Node<'_>, scope: &[String]) {
        let label = node.child_by_field_name("type");
        if let Some(left) = node.child_by_field_name("left") {
            match left.kind() {
                "identifier" => self.push(scope, SlotKind::Variable, python::text(left, self.src), label, left),
                "attribute" if label.is_some() => {
                    self.push(scope, SlotKind::Variable, python::text(left, self.src), label, left)
                }
                _ => {}
            }
        }
        if let Some(right) = node.child_by_field_name("right") {
            self.visit(right, scope, false);
        }
    }
}

fn extend(scope: &[String], name: &str) -> Vec<String> {
    let mut v = scope.to_vec();
    v.push(name.to_string());
    v
}
