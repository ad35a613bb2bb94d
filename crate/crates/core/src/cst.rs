//! Concrete syntax tree dumps for prompt embedding.
//!
//! The indented rendering puts one line per node chain: a node with exactly
//! one child is joined to that child with ` > ` on the same line, and every
//! other child goes on its own line indented two spaces deeper. Named leaves
//! print as `kind "text"`, anonymous tokens as `"text"`, and field names
//! prefix their node as `field: `. Nothing outside the token texts is
//! dropped, so the leaves reproduce the source modulo whitespace.

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use crate::corpus::SourceSnippet;
use crate::error::Result;
use crate::python;

pub const DEFAULT_CST_BYTE_BUDGET: usize = 32 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderStyle {
    /// One node chain per line, children indented two spaces.
    #[default]
    Indented,
    /// Single-line parenthesized S-expression.
    SExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CstNode {
    pub kind: String,
    pub field: Option<String>,
    pub named: bool,
    /// Source text for token nodes; `None` for interior nodes.
    pub token: Option<String>,
    pub children: Vec<CstNode>,
}

impl CstNode {
    fn from_ts(node: Node<'_>, field: Option<&str>, src: &str) -> Self {
        let token = python::is_token(node, src);
        let children = if token {
            Vec::new()
        } else {
            let mut cursor = node.walk();
            let mut out = Vec::new();
            if cursor.goto_first_child() {
                loop {
                    out.push(CstNode::from_ts(cursor.node(), cursor.field_name(), src));
                    if !cursor.goto_next_sibling() {
                        break;
                    }
                }
            }
            out
        };
        CstNode {
            kind: node.kind().to_string(),
            field: field.map(str::to_string),
            named: node.is_named(),
            token: token.then(|| python::text(node, src).to_string()),
            children,
        }
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(CstNode::count).sum::<usize>()
    }

    /// Leaf token texts in source order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.token {
            Some(t) => out.push(t),
            None => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    fn label(&self) -> String {
        let mut s = String::new();
        if let Some(f) = &self.field {
            s.push_str(f);
            s.push_str(": ");
        }
        match (&self.token, self.named) {
            (Some(t), false) => s.push_str(&format!("{t:?}")),
            (Some(t), true) => s.push_str(&format!("{} {t:?}", self.kind)),
            (None, _) => s.push_str(&self.kind),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CstDump {
    pub snippet_id: String,
    /// Indented rendering, cut at the byte budget.
    pub text: String,
    /// Nodes present in `text`.
    pub node_count: usize,
    pub truncated: bool,
    pub root: CstNode,
}

/// Parses a snippet and renders its tree, truncating the rendering to
/// `byte_budget` bytes on a line boundary. The first line is always kept.
pub fn parse_to_cst(snippet: &SourceSnippet, byte_budget: usize) -> Result<CstDump> {
    let tree = python::parse(&snippet.code)?;
    let root = CstNode::from_ts(tree.root_node(), None, &snippet.code);

    let mut lines = Vec::new();
    indented_lines(&root, 0, &mut lines);

    let mut text = String::new();
    let mut node_count = 0;
    let mut truncated = false;
    for (i, (line, nodes)) in lines.iter().enumerate() {
        let extra = line.len() + usize::from(i > 0);
        if i > 0 && text.len() + extra > byte_budget {
            truncated = true;
            break;
        }
        if i > 0 {
            text.push('\n');
        }
        text.push_str(line);
        node_count += nodes;
    }

    Ok(CstDump {
        snippet_id: snippet.id.clone(),
        text,
        node_count,
        truncated,
        root,
    })
}

/// Renders the full tree (no budget) in the requested style.
pub fn render_cst(dump: &CstDump, style: RenderStyle) -> String {
    match style {
        RenderStyle::Indented => {
            let mut lines = Vec::new();
            indented_lines(&dump.root, 0, &mut lines);
            lines
                .into_iter()
                .map(|(l, _)| l)
                .collect::<Vec<_>>()
                .join("\n")
        }
        RenderStyle::SExpr => {
            let mut out = String::new();
            sexpr(&dump.root, &mut out);
            out
        }
    }
}

/// Pushes `(line, nodes on that line)` pairs.
fn indented_lines(node: &CstNode, depth: usize, out: &mut Vec<(String, usize)>) {
    let mut line = "  ".repeat(depth);
    line.push_str(&node.label());
    let mut nodes = 1;
    let mut cur = node;
    while cur.children.len() == 1 {
        cur = &cur.children[0];
        line.push_str(" > ");
        line.push_str(&cur.label());
        nodes += 1;
    }
    out.push((line, nodes));
    for child in &cur.children {
        indented_lines(child, depth + 1, out);
    }
}

fn sexpr(node: &CstNode, out: &mut String) {
    if let Some(f) = &node.field {
        out.push_str(f);
        out.push_str(": ");
    }
    match (&node.token, node.named) {
        (Some(t), false) => out.push_str(&format!("{t:?}")),
        (Some(t), true) => out.push_str(&format!("({} {t:?})", node.kind)),
        (None, _) => {
            out.push('(');
            out.push_str(&node.kind);
            for child in &node.children {
                out.push(' ');
                sexpr(child, out);
            }
            out.push(')');
        }
    }
}
