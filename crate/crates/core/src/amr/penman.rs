//! Penman notation reader and writer.
//!
//! Only the tree reading is supported: nested `(var / concept :role value)`
//! nodes, where a bare symbol naming a variable defined elsewhere becomes a
//! coreference node and any other bare symbol or quoted string a constant.
//! Lines starting with `#` are treated as metadata and skipped.

use std::collections::HashSet;

use super::tree::{quote, AmrNode, AmrTree, Edge, NodeId};
use super::AmrError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Sym(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn malformed(&self, at: usize, message: impl Into<String>) -> AmrError {
        AmrError::MalformedPenman {
            offset: at,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>, AmrError> {
        let bytes = self.src.as_bytes();
        let mut out = Vec::new();
        let mut line_start = true;
        while self.pos < bytes.len() {
            let c = bytes[self.pos];
            if c == b'\n' {
                line_start = true;
                self.pos += 1;
                continue;
            }
            if c.is_ascii_whitespace() {
                self.pos += 1;
                continue;
            }
            if c == b'#' && line_start {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            line_start = false;
            let start = self.pos;
            match c {
                b'(' => {
                    self.pos += 1;
                    out.push((start, Token::Open));
                }
                b')' => {
                    self.pos += 1;
                    out.push((start, Token::Close));
                }
                b'/' => {
                    self.pos += 1;
                    out.push((start, Token::Slash));
                }
                b'"' => {
                    self.pos += 1;
                    let mut s = String::new();
                    let mut chars = self.src[self.pos..].char_indices();
                    let mut closed = false;
                    while let Some((i, ch)) = chars.next() {
                        match ch {
                            '\\' => match chars.next() {
                                Some((_, esc)) => s.push(esc),
                                None => break,
                            },
                            '"' => {
                                self.pos += i + 1;
                                closed = true;
                                break;
                            }
                            _ => s.push(ch),
                        }
                    }
                    if !closed {
                        return Err(self.malformed(start, "unterminated string"));
                    }
                    out.push((start, Token::Str(s)));
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    let len = rest
                        .find(|ch: char| ch.is_whitespace() || ch == '(' || ch == ')' || ch == '"')
                        .unwrap_or(rest.len());
                    let word = &rest[..len];
                    self.pos += len;
                    if let Some(role) = word.strip_prefix(':') {
                        if role.is_empty() {
                            return Err(self.malformed(start, "empty role"));
                        }
                        out.push((start, Token::Role(word.to_string())));
                    } else if word.contains('/') {
                        // `a/b` without spaces
                        let (l, r) = word.split_once('/').unwrap();
                        if !l.is_empty() {
                            out.push((start, Token::Sym(l.to_string())));
                        }
                        out.push((start + l.len(), Token::Slash));
                        if !r.is_empty() {
                            out.push((start + l.len() + 1, Token::Sym(r.to_string())));
                        }
                    } else {
                        out.push((start, Token::Sym(word.to_string())));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug)]
enum RawValue {
    Node(RawNode),
    Str(String),
    Sym(String),
}

#[derive(Debug)]
struct RawNode {
    var: String,
    concept: String,
    edges: Vec<(String, RawValue)>,
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn malformed(&self, message: impl Into<String>) -> AmrError {
        AmrError::MalformedPenman {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn node(&mut self) -> Result<RawNode, AmrError> {
        if self.next() != Some(Token::Open) {
            self.pos -= 1;
            return Err(self.malformed("expected '('"));
        }
        let var = match self.next() {
            Some(Token::Sym(v)) => v,
            _ => {
                self.pos -= 1;
                return Err(self.malformed("expected a variable after '('"));
            }
        };
        if self.next() != Some(Token::Slash) {
            self.pos -= 1;
            return Err(self.malformed(format!("expected '/' after variable {var}")));
        }
        let concept = match self.next() {
            Some(Token::Sym(c)) | Some(Token::Str(c)) => c,
            _ => {
                self.pos -= 1;
                return Err(self.malformed(format!("expected a concept for {var}")));
            }
        };
        let mut edges = Vec::new();
        loop {
            match self.next() {
                Some(Token::Close) => break,
                Some(Token::Role(role)) => {
                    let value = match self.peek() {
                        Some(Token::Open) => RawValue::Node(self.node()?),
                        Some(Token::Str(_)) => match self.next() {
                            Some(Token::Str(s)) => RawValue::Str(s),
                            _ => unreachable!(),
                        },
                        Some(Token::Sym(_)) => match self.next() {
                            Some(Token::Sym(s)) => RawValue::Sym(s),
                            _ => unreachable!(),
                        },
                        _ => return Err(self.malformed(format!("role {role} has no value"))),
                    };
                    edges.push((role, value));
                }
                None => return Err(self.malformed("unbalanced parentheses")),
                Some(_) => {
                    self.pos -= 1;
                    return Err(self.malformed("expected a role or ')'"));
                }
            }
        }
        Ok(RawNode { var, concept, edges })
    }
}

/// Symbols shaped like AMR variables (`b`, `b2`, `x13`).
fn looks_like_variable(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

fn collect_vars<'a>(node: &'a RawNode, seen: &mut HashSet<&'a str>) -> Result<(), AmrError> {
    if !seen.insert(node.var.as_str()) {
        return Err(AmrError::DuplicateInstanceLabel(node.var.clone()));
    }
    for (_, v) in &node.edges {
        if let RawValue::Node(child) = v {
            collect_vars(child, seen)?;
        }
    }
    Ok(())
}

fn flatten(
    raw: RawNode,
    defined: &HashSet<String>,
    nodes: &mut Vec<AmrNode>,
    edges: &mut Vec<Edge>,
) -> Result<NodeId, AmrError> {
    let id = NodeId(nodes.len());
    nodes.push(AmrNode::instance(raw.var, raw.concept));
    for (role, value) in raw.edges {
        let target = match value {
            RawValue::Node(child) => flatten(child, defined, nodes, edges)?,
            RawValue::Str(s) => {
                nodes.push(AmrNode::Constant {
                    value: s,
                    quoted: true,
                    embedding: None,
                });
                NodeId(nodes.len() - 1)
            }
            RawValue::Sym(s) => {
                let node = if defined.contains(&s) {
                    AmrNode::Coreference { label: s }
                } else if looks_like_variable(&s) {
                    return Err(AmrError::DanglingCoreference(s));
                } else {
                    AmrNode::Constant {
                        value: s,
                        quoted: false,
                        embedding: None,
                    }
                };
                nodes.push(node);
                NodeId(nodes.len() - 1)
            }
        };
        edges.push(Edge {
            source: id,
            target,
            role,
            inverse: false,
        });
    }
    Ok(id)
}

/// Parses one Penman-serialized AMR into a tree.
pub fn parse_penman(text: &str) -> Result<AmrTree, AmrError> {
    let tokens = Lexer { src: text, pos: 0 }.tokens()?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    if parser.peek().is_none() {
        return Err(parser.malformed("empty input"));
    }
    let raw = parser.node()?;
    if parser.peek().is_some() {
        return Err(parser.malformed("trailing content after the top node"));
    }
    let mut seen = HashSet::new();
    collect_vars(&raw, &mut seen)?;
    let defined: HashSet<String> = seen.into_iter().map(str::to_string).collect();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    flatten(raw, &defined, &mut nodes, &mut edges)?;
    AmrTree::from_parts(nodes, edges)
}

/// Serializes a tree as indented Penman text (four spaces per level).
///
/// Merge nodes are written as `(var / MERGE)`; such output is for display
/// and does not read back as a merge node.
pub fn to_penman(tree: &AmrTree) -> String {
    let mut out = String::new();
    write_node(tree, tree.root(), 0, &mut out);
    out
}

fn write_node(tree: &AmrTree, id: NodeId, indent: usize, out: &mut String) {
    match tree.node(id) {
        AmrNode::Instance { label, predicate, .. } => {
            out.push('(');
            out.push_str(label);
            out.push_str(" / ");
            out.push_str(predicate);
            for e in tree.children(id) {
                out.push('\n');
                out.push_str(&" ".repeat((indent + 1) * 4));
                out.push_str(&e.surface_role());
                out.push(' ');
                write_node(tree, e.target, indent + 1, out);
            }
            out.push(')');
        }
        AmrNode::Constant { value, quoted, .. } => {
            if *quoted {
                out.push_str(&quote(value));
            } else {
                out.push_str(value);
            }
        }
        AmrNode::Coreference { label } => out.push_str(label),
        AmrNode::Merge { var, .. } => {
            out.push('(');
            out.push_str(var);
            out.push_str(" / ");
            out.push_str(crate::similarity::MERGE_MARKER);
            out.push(')');
        }
    }
}
