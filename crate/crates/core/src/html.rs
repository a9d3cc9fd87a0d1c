//! A small, tolerant HTML tree builder for captured page content.
//!
//! Captured markup is frequently a fragment, may be missing end tags, and is
//! never executed. The parser builds an arena tree of elements and text,
//! decodes common character references, treats `script`/`style` content as
//! raw text, and recovers from mismatched end tags by popping to the nearest
//! open element of the same name (or ignoring the tag).

use std::fmt::Write as _;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeData {
    Root,
    Element { name: String, attrs: Vec<(String, String)> },
    Text(String),
    Comment(String),
}

#[derive(Debug, Clone)]
pub struct Node {
    pub data: NodeData,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct Document {
    nodes: Vec<Node>,
}

const VOID: &[&str] =
    &["area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr"];
const RAW_TEXT: &[&str] = &["script", "style", "textarea", "title", "xmp"];
/// Elements whose start tag implicitly closes an open `<p>`.
const CLOSES_P: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "div",
    "dl",
    "fieldset",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "ul",
];
const BLOCK: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "body",
    "br",
    "dd",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "html",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "tbody",
    "td",
    "th",
    "thead",
    "tr",
    "ul",
];
const HIDDEN: &[&str] = &["script", "style", "noscript", "template", "head", "title"];

impl Document {
    pub fn parse(input: &str) -> Document {
        Builder::new().run(input)
    }

    pub const ROOT: NodeId = 0;

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn name(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id].data {
            NodeData::Element { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn is(&self, id: NodeId, tag: &str) -> bool {
        self.name(id) == Some(tag)
    }

    pub fn attr(&self, id: NodeId, key: &str) -> Option<&str> {
        match &self.nodes[id].data {
            NodeData::Element { attrs, .. } => attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()),
            _ => None,
        }
    }

    pub fn has_class(&self, id: NodeId, class: &str) -> bool {
        self.attr(id, "class").is_some_and(|c| c.split_ascii_whitespace().any(|t| t == class))
    }

    pub fn classes(&self, id: NodeId) -> impl Iterator<Item = &str> {
        self.attr(id, "class").unwrap_or("").split_ascii_whitespace()
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Ancestors from the parent up to the root.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&n| self.parent(n))
    }

    /// Pre-order descendants of `id`, excluding `id` itself.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.nodes[id].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev().copied());
        }
        out
    }

    /// Elements under `id` (pre-order) satisfying `pred`.
    pub fn find_all(&self, id: NodeId, pred: impl Fn(&Document, NodeId) -> bool) -> Vec<NodeId> {
        self.descendants(id).into_iter().filter(|&n| self.name(n).is_some() && pred(self, n)).collect()
    }

    pub fn find(&self, id: NodeId, pred: impl Fn(&Document, NodeId) -> bool) -> Option<NodeId> {
        self.find_all(id, pred).into_iter().next()
    }

    pub fn element_by_id(&self, html_id: &str) -> Option<NodeId> {
        self.find(Self::ROOT, |d, n| d.attr(n, "id") == Some(html_id))
    }

    /// Whitespace-collapsed visible text of the whole document.
    pub fn text(&self) -> String {
        self.text_of(Self::ROOT)
    }

    /// Whitespace-collapsed visible text under `id`, with block boundaries
    /// treated as whitespace.
    pub fn text_of(&self, id: NodeId) -> String {
        let mut raw = String::new();
        self.collect_text(id, &mut raw, &|_, _| false);
        collapse_whitespace(&raw)
    }

    /// Like [`Document::text_of`] but skipping subtrees matched by `skip`.
    pub fn text_filtered(&self, id: NodeId, skip: &dyn Fn(&Document, NodeId) -> bool) -> String {
        let mut raw = String::new();
        self.collect_text(id, &mut raw, skip);
        collapse_whitespace(&raw)
    }

    fn collect_text(&self, id: NodeId, out: &mut String, skip: &dyn Fn(&Document, NodeId) -> bool) {
        match &self.nodes[id].data {
            NodeData::Text(t) => out.push_str(t),
            NodeData::Comment(_) => {}
            NodeData::Root => {
                for &c in &self.nodes[id].children {
                    self.collect_text(c, out, skip);
                }
            }
            NodeData::Element { name, .. } => {
                if HIDDEN.contains(&name.as_str()) || skip(self, id) {
                    return;
                }
                let block = BLOCK.contains(&name.as_str());
                if block {
                    out.push(' ');
                }
                for &c in &self.nodes[id].children {
                    self.collect_text(c, out, skip);
                }
                if block {
                    out.push(' ');
                }
            }
        }
    }

    /// Verbatim text under `id`: no whitespace collapsing, `<br>` as newline.
    pub fn raw_text(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.collect_raw(id, &mut out);
        out
    }

    fn collect_raw(&self, id: NodeId, out: &mut String) {
        match &self.nodes[id].data {
            NodeData::Text(t) => out.push_str(t),
            NodeData::Element { name, .. } if name == "br" => out.push('\n'),
            NodeData::Element { name, .. } if HIDDEN.contains(&name.as_str()) => {}
            NodeData::Comment(_) => {}
            _ => {
                for &c in &self.nodes[id].children {
                    self.collect_raw(c, out);
                }
            }
        }
    }

    /// Serializes `id` and its subtree back to markup.
    pub fn outer_html(&self, id: NodeId) -> String {
        self.outer_html_filtered(id, &|_, _| false)
    }

    /// Serializes `id`, dropping any subtree for which `skip` returns true.
    pub fn outer_html_filtered(&self, id: NodeId, skip: &dyn Fn(&Document, NodeId) -> bool) -> String {
        let mut out = String::new();
        self.serialize(id, &mut out, skip);
        out
    }

    fn serialize(&self, id: NodeId, out: &mut String, skip: &dyn Fn(&Document, NodeId) -> bool) {
        match &self.nodes[id].data {
            NodeData::Root => {
                for &c in &self.nodes[id].children {
                    self.serialize(c, out, skip);
                }
            }
            NodeData::Text(t) => {
                let raw_parent = self
                    .parent(id)
                    .and_then(|p| self.name(p))
                    .is_some_and(|n| RAW_TEXT.contains(&n) && n != "textarea" && n != "title");
                if raw_parent {
                    out.push_str(t);
                } else {
                    escape_into(t, false, out);
                }
            }
            NodeData::Comment(c) => {
                let _ = write!(out, "<!--{c}-->");
            }
            NodeData::Element { name, attrs } => {
                if skip(self, id) {
                    return;
                }
                out.push('<');
                out.push_str(name);
                for (k, v) in attrs {
                    out.push(' ');
                    out.push_str(k);
                    out.push_str("=\"");
                    escape_into(v, true, out);
                    out.push('"');
                }
                out.push('>');
                if VOID.contains(&name.as_str()) {
                    return;
                }
                for &c in &self.nodes[id].children {
                    self.serialize(c, out, skip);
                }
                let _ = write!(out, "</{name}>");
            }
        }
    }
}

/// Text projection of a markup fragment: markup stripped, whitespace collapsed.
pub fn plain_text(markup: &str) -> String {
    Document::parse(markup).text()
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn escape_into(s: &str, attr: bool, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            c => out.push(c),
        }
    }
}

/// Decodes character references; unknown named references are kept verbatim.
pub fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let end = rest[1..]
            .char_indices()
            .take(32)
            .find(|&(_, c)| c == ';' || c.is_whitespace() || c == '&' || c == '<')
            .map(|(i, c)| (i + 1, c));
        match end {
            Some((semi, ';')) => {
                let name = &rest[1..semi];
                if let Some(decoded) = decode_reference(name) {
                    out.push(decoded);
                    rest = &rest[semi + 1..];
                    continue;
                }
                out.push('&');
                rest = &rest[1..];
            }
            _ => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_reference(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix(['x', 'X']) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        return char::from_u32(code);
    }
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "hellip" => '…',
        "mdash" => '\u{2014}',
        "ndash" => '\u{2013}',
        "lsquo" => '‘',
        "rsquo" => '’',
        "ldquo" => '“',
        "rdquo" => '”',
        "copy" => '©',
        "reg" => '®',
        "trade" => '™',
        "times" => '×',
        "middot" => '·',
        "bull" => '•',
        "minus" => '−',
        _ => return None,
    })
}

struct Builder {
    nodes: Vec<Node>,
    stack: Vec<NodeId>,
}

impl Builder {
    fn new() -> Self {
        Self { nodes: vec![Node { data: NodeData::Root, parent: None, children: vec![] }], stack: vec![Document::ROOT] }
    }

    fn current(&self) -> NodeId {
        *self.stack.last().expect("root is never popped")
    }

    fn append(&mut self, data: NodeData) -> NodeId {
        let parent = self.current();
        let id = self.nodes.len();
        self.nodes.push(Node { data, parent: Some(parent), children: vec![] });
        self.nodes[parent].children.push(id);
        id
    }

    fn push_text(&mut self, text: &str) {
        if text.is_empty() {
            return;
        }
        let parent = self.current();
        if let Some(&last) = self.nodes[parent].children.last() {
            if let NodeData::Text(existing) = &mut self.nodes[last].data {
                existing.push_str(text);
                return;
            }
        }
        self.append(NodeData::Text(text.to_string()));
    }

    fn open_index(&self, name: &str) -> Option<usize> {
        self.stack.iter().rposition(|&n| match &self.nodes[n].data {
            NodeData::Element { name: open, .. } => open == name,
            _ => false,
        })
    }

    fn close(&mut self, name: &str) {
        if let Some(idx) = self.open_index(name) {
            if idx > 0 {
                self.stack.truncate(idx);
            }
        }
    }

    fn start_tag(&mut self, name: String, attrs: Vec<(String, String)>, self_closing: bool) {
        if CLOSES_P.contains(&name.as_str()) && self.open_index("p").is_some() {
            let p = self.open_index("p").unwrap();
            // only close a <p> that is the innermost block context
            if self.stack[p + 1..]
                .iter()
                .all(|&n| matches!(&self.nodes[n].data, NodeData::Element { name, .. } if !BLOCK.contains(&name.as_str())))
            {
                self.stack.truncate(p);
            }
        }
        if name == "li" {
            if let Some(li) = self.open_index("li") {
                let list_between = self.stack[li + 1..]
                    .iter()
                    .any(|&n| matches!(&self.nodes[n].data, NodeData::Element { name, .. } if name == "ul" || name == "ol"));
                if !list_between {
                    self.stack.truncate(li);
                }
            }
        }
        let is_void = VOID.contains(&name.as_str());
        let id = self.append(NodeData::Element { name, attrs });
        if !is_void && !self_closing {
            self.stack.push(id);
        }
    }

    fn run(mut self, input: &str) -> Document {
        let bytes = input.as_bytes();
        let mut i = 0;
        let mut text_start = 0;
        while i < bytes.len() {
            if bytes[i] != b'<' {
                i += 1;
                continue;
            }
            let rest = &input[i..];
            if let Some(after) = rest.strip_prefix("<!--") {
                self.push_text(&decode_entities(&input[text_start..i]));
                let end = after.find("-->").map(|e| i + 4 + e);
                let body = &input[i + 4..end.unwrap_or(input.len())];
                self.append(NodeData::Comment(body.to_string()));
                i = end.map(|e| e + 3).unwrap_or(input.len());
                text_start = i;
                continue;
            }
            if rest.starts_with("<!") || rest.starts_with("<?") {
                self.push_text(&decode_entities(&input[text_start..i]));
                i = rest.find('>').map(|e| i + e + 1).unwrap_or(input.len());
                text_start = i;
                continue;
            }
            let closing = rest.starts_with("</");
            let name_start = if closing { 2 } else { 1 };
            let starts_name = rest[name_start..].chars().next().is_some_and(|c| c.is_ascii_alphabetic());
            if !starts_name {
                i += 1;
                continue;
            }
            self.push_text(&decode_entities(&input[text_start..i]));
            let (tag, consumed) = parse_tag(&rest[name_start..]);
            i += name_start + consumed;
            if closing {
                self.close(&tag.name);
            } else {
                let raw = RAW_TEXT.contains(&tag.name.as_str()) && !tag.self_closing;
                let name = tag.name.clone();
                self.start_tag(tag.name, tag.attrs, tag.self_closing);
                if raw {
                    let close = format!("</{name}");
                    let body_end = find_ascii_ci(&input[i..], &close).map(|e| i + e).unwrap_or(input.len());
                    let body = &input[i..body_end];
                    if name == "textarea" || name == "title" {
                        self.push_text(&decode_entities(body));
                    } else {
                        self.push_text(body);
                    }
                    self.close(&name);
                    i = input[body_end..].find('>').map(|e| body_end + e + 1).unwrap_or(input.len());
                }
            }
            text_start = i;
        }
        self.push_text(&decode_entities(&input[text_start..]));
        Document { nodes: self.nodes }
    }
}

struct Tag {
    name: String,
    attrs: Vec<(String, String)>,
    self_closing: bool,
}

/// Parses a tag starting right after `<` or `</`. Returns the tag and the
/// number of bytes consumed including the closing `>`.
fn parse_tag(s: &str) -> (Tag, usize) {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' && bytes[i] != b'/' {
        i += 1;
    }
    let name = s[..i].to_ascii_lowercase();
    let mut attrs = Vec::new();
    let mut self_closing = false;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            break;
        }
        match bytes[i] {
            b'>' => {
                i += 1;
                break;
            }
            b'/' => {
                self_closing = true;
                i += 1;
                continue;
            }
            _ => {}
        }
        self_closing = false;
        let key_start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'=' | b'>' | b'/') {
            i += 1;
        }
        let key = s[key_start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = String::new();
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                let quote = bytes[i];
                let v_start = i + 1;
                let v_end = s[v_start..].bytes().position(|b| b == quote).map(|p| v_start + p).unwrap_or(s.len());
                value = decode_entities(&s[v_start..v_end]);
                i = (v_end + 1).min(s.len());
            } else {
                let v_start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                    i += 1;
                }
                value = decode_entities(&s[v_start..i]);
            }
        }
        if !key.is_empty() && !attrs.iter().any(|(k, _)| k == &key) {
            attrs.push((key, value));
        } else if key.is_empty() {
            i += 1;
        }
    }
    (Tag { name, attrs, self_closing }, i)
}

fn find_ascii_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}
