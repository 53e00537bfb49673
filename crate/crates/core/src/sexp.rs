//! Text form of voting trees.
//!
//! A leaf is a decimal candidate or an identifier; an internal node is
//! `(left right)`. Large trees are written in the sharing form: a sequence
//! of `(def @k tree)` definitions followed by the root expression, where
//! `@k` refers back to an earlier definition. `;` starts a line comment.
//!
//! ```text
//! (def @0 (X (0 1)))
//! (@0 @0)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;

use crate::tree::{Forest, Label, Node, NodeId, TreeError, VotingTree};

/// Expanded leaf count above which [`serialize`] switches to the sharing form.
pub const DEFAULT_SHARING_THRESHOLD: u64 = 10_000;

/// Plain nested form. The output is as large as the expanded tree.
pub fn to_plain(tree: &VotingTree) -> String {
    let nodes = tree.nodes();
    let mut out = String::new();
    write_expanded(nodes, nodes.len() - 1, &mut out);
    out
}

fn write_expanded(nodes: &[Node], at: usize, out: &mut String) {
    // Explicit stack: deep chains (gate compositions) overflow recursion.
    enum Step {
        Visit(usize),
        Space,
        Close,
    }
    let mut stack = vec![Step::Visit(at)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Visit(i) => match &nodes[i] {
                Node::Leaf(label) => {
                    let _ = write!(out, "{label}");
                }
                Node::Internal(l, r) => {
                    out.push('(');
                    stack.push(Step::Close);
                    stack.push(Step::Visit(r.index()));
                    stack.push(Step::Space);
                    stack.push(Step::Visit(l.index()));
                }
            },
            Step::Space => out.push(' '),
            Step::Close => out.push(')'),
        }
    }
}

/// Sharing form: every internal node with more than one parent becomes a
/// definition, everything else is written inline.
pub fn to_shared(tree: &VotingTree) -> String {
    let nodes = tree.nodes();
    let mut parents = vec![0u32; nodes.len()];
    for node in nodes {
        if let Node::Internal(l, r) = node {
            parents[l.index()] += 1;
            parents[r.index()] += 1;
        }
    }
    let root = nodes.len() - 1;
    let mut names: HashMap<usize, usize> = HashMap::new();
    let mut out = String::new();
    for (i, node) in nodes.iter().enumerate() {
        if i != root && parents[i] > 1 && matches!(node, Node::Internal(..)) {
            let name = names.len();
            let _ = write!(out, "(def @{name} ");
            write_inline(nodes, i, &names, &mut out);
            out.push_str(")\n");
            names.insert(i, name);
        }
    }
    write_inline(nodes, root, &names, &mut out);
    out.push('\n');
    out
}

fn write_inline(nodes: &[Node], at: usize, names: &HashMap<usize, usize>, out: &mut String) {
    enum Step {
        Visit(usize, bool),
        Space,
        Close,
    }
    let mut stack = vec![Step::Visit(at, true)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Visit(i, top) => {
                if let (false, Some(name)) = (top, names.get(&i)) {
                    let _ = write!(out, "@{name}");
                    continue;
                }
                match &nodes[i] {
                    Node::Leaf(label) => {
                        let _ = write!(out, "{label}");
                    }
                    Node::Internal(l, r) => {
                        out.push('(');
                        stack.push(Step::Close);
                        stack.push(Step::Visit(r.index(), false));
                        stack.push(Step::Space);
                        stack.push(Step::Visit(l.index(), false));
                    }
                }
            }
            Step::Space => out.push(' '),
            Step::Close => out.push(')'),
        }
    }
}

/// Plain form for small trees, sharing form once the expanded leaf count
/// exceeds `threshold`.
pub fn serialize_with_threshold(tree: &VotingTree, threshold: u64) -> String {
    if tree.stats().leaves > BigUint::from(threshold) {
        to_shared(tree)
    } else {
        let mut s = to_plain(tree);
        s.push('\n');
        s
    }
}

pub fn serialize(tree: &VotingTree) -> String {
    serialize_with_threshold(tree, DEFAULT_SHARING_THRESHOLD)
}

pub fn parse(text: &str) -> Result<VotingTree, TreeError> {
    let mut forest = Forest::new();
    let root = parse_into(&mut forest, text)?;
    Ok(forest.extract(root))
}

/// Parses into an existing forest, returning the root.
pub fn parse_into(forest: &mut Forest, text: &str) -> Result<NodeId, TreeError> {
    Parser::new(text, forest).document()
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Number(&'a str),
    Ident(&'a str),
    Ref(&'a str),
    Eof,
}

struct Parser<'a, 'f> {
    text: &'a str,
    pos: usize,
    forest: &'f mut Forest,
    defs: HashMap<&'a str, NodeId>,
}

impl<'a, 'f> Parser<'a, 'f> {
    fn new(text: &'a str, forest: &'f mut Forest) -> Self {
        Self {
            text,
            pos: 0,
            forest,
            defs: HashMap::new(),
        }
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> TreeError {
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        TreeError::Parse {
            line,
            column,
            offset,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b';' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    /// Returns the next token and the offset it starts at.
    fn next_token(&mut self) -> Result<(Token<'a>, usize), TreeError> {
        self.skip_trivia();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let Some(&b) = bytes.get(start) else {
            return Ok((Token::Eof, start));
        };
        let word_end = |from: usize| {
            let mut end = from;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
            {
                end += 1;
            }
            end
        };
        let token = match b {
            b'(' => {
                self.pos += 1;
                Token::Open
            }
            b')' => {
                self.pos += 1;
                Token::Close
            }
            b'0'..=b'9' => {
                let end = word_end(start);
                let word = &self.text[start..end];
                if !word.bytes().all(|c| c.is_ascii_digit()) {
                    return Err(self.error(start, format!("invalid candidate {word:?}")));
                }
                self.pos = end;
                Token::Number(word)
            }
            b'@' => {
                let end = word_end(start + 1);
                if end == start + 1 {
                    return Err(self.error(start, "expected a name after '@'"));
                }
                self.pos = end;
                Token::Ref(&self.text[start..end])
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let end = word_end(start);
                self.pos = end;
                Token::Ident(&self.text[start..end])
            }
            _ => {
                let ch = self.text[start..].chars().next().unwrap_or('?');
                return Err(self.error(start, format!("unexpected character {ch:?}")));
            }
        };
        Ok((token, start))
    }

    fn peek(&mut self) -> Result<(Token<'a>, usize), TreeError> {
        let saved = self.pos;
        let token = self.next_token()?;
        self.pos = saved;
        Ok(token)
    }

    fn document(&mut self) -> Result<NodeId, TreeError> {
        loop {
            let saved = self.pos;
            let (token, at) = self.next_token()?;
            if token == Token::Open {
                if let (Token::Ident("def"), _) = self.peek()? {
                    self.next_token()?;
                    self.definition(at)?;
                    continue;
                }
            }
            self.pos = saved;
            break;
        }
        let root = self.tree()?;
        match self.next_token()? {
            (Token::Eof, _) => Ok(root),
            (_, at) => Err(self.error(at, "trailing input after the root tree")),
        }
    }

    /// Body of `(def @name tree)` after `(def`.
    fn definition(&mut self, open_at: usize) -> Result<(), TreeError> {
        let (name, at) = match self.next_token()? {
            (Token::Ref(name), at) => (name, at),
            (_, at) => return Err(self.error(at, "expected @name after def")),
        };
        if self.defs.contains_key(name) {
            return Err(self.error(at, format!("{name} defined twice")));
        }
        let body = self.tree()?;
        match self.next_token()? {
            (Token::Close, _) => {}
            (Token::Eof, at) => {
                return Err(self.error(at, format!("unclosed def opened at offset {open_at}")))
            }
            (_, at) => return Err(self.error(at, "expected ')' closing def")),
        }
        self.defs.insert(name, body);
        Ok(())
    }

    fn tree(&mut self) -> Result<NodeId, TreeError> {
        // Explicit stack of open internal nodes: Some(left) once the left
        // child is parsed.
        let mut open: Vec<(Option<NodeId>, usize)> = Vec::new();
        loop {
            let (token, at) = self.next_token()?;
            let mut done = match token {
                Token::Open => {
                    open.push((None, at));
                    continue;
                }
                Token::Number(digits) => {
                    let c = digits
                        .parse()
                        .map_err(|_| self.error(at, format!("candidate {digits} too large")))?;
                    self.forest.leaf(Label::Candidate(c))
                }
                Token::Ident(name) => {
                    if name == "def" {
                        return Err(self.error(at, "def is only allowed at top level"));
                    }
                    self.forest.leaf(Label::var(name))
                }
                Token::Ref(name) => *self
                    .defs
                    .get(name)
                    .ok_or_else(|| self.error(at, format!("undefined reference {name}")))?,
                Token::Close => return Err(self.error(at, "unexpected ')'")),
                Token::Eof => return Err(self.error(at, "unexpected end of input")),
            };
            // Attach the finished subtree to the innermost open node,
            // closing nodes as their right children complete.
            loop {
                match open.last_mut() {
                    None => return Ok(done),
                    Some((left @ None, _)) => {
                        *left = Some(done);
                        break;
                    }
                    Some((Some(left), _)) => {
                        let left = *left;
                        match self.next_token()? {
                            (Token::Close, _) => {}
                            (Token::Eof, at) => {
                                return Err(self.error(at, "unexpected end of input, expected ')'"))
                            }
                            (_, at) => {
                                return Err(self.error(
                                    at,
                                    "an internal node has exactly two children, expected ')'",
                                ))
                            }
                        }
                        open.pop();
                        done = self.forest.node(left, done);
                    }
                }
            }
        }
    }
}
