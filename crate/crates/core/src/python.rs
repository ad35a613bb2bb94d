//! Thin wrapper around the tree-sitter Python grammar.

use tree_sitter::{Node, Parser, Tree};

use crate::error::{Error, Result};

/// Parses `code`, rejecting any tree that contains error or missing nodes.
pub fn parse(code: &str) -> Result<Tree> {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_python::LANGUAGE.into())
        .expect("bundled Python grammar is ABI compatible");
    let tree = parser.parse(code, None).ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "parser produced no tree".into(),
    })?;
    let root = tree.root_node();
    if root.has_error() {
        let bad = first_error(root).unwrap_or(root);
        let pos = bad.start_position();
        let message = if bad.is_missing() {
            format!("missing {:?}", bad.kind())
        } else {
            "invalid syntax".to_string()
        };
        return Err(Error::Parse {
            line: pos.row + 1,
            column: pos.column + 1,
            message,
        });
    }
    Ok(tree)
}

fn first_error(node: Node<'_>) -> Option<Node<'_>> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    if !node.has_error() {
        return None;
    }
    let mut cursor = node.walk();
    let children: Vec<_> = node.children(&mut cursor).collect();
    children.into_iter().find_map(first_error)
}

pub(crate) fn text<'a>(node: Node<'_>, src: &'a str) -> &'a str {
    &src[node.byte_range()]
}

/// True when the node's children leave non-whitespace source uncovered
/// (string contents with escapes, format specifiers). Such nodes are
/// treated as single tokens so that leaf text stays lossless.
pub(crate) fn is_token(node: Node<'_>, src: &str) -> bool {
    if node.child_count() == 0 {
        return true;
    }
    let mut cursor = node.walk();
    let mut pos = node.start_byte();
    for child in node.children(&mut cursor) {
        if !src[pos..child.start_byte()].trim().is_empty() {
            return true;
        }
        pos = child.end_byte();
    }
    !src[pos..node.end_byte()].trim().is_empty()
}
