//! Code blocks inside a snippet and its context snapshot.

use crate::html::{collapse_whitespace, Document, NodeId};
use crate::model::{CodeExample, CodeOrigin, SnippetId};

fn declared_language(doc: &Document, node: NodeId) -> Option<String> {
    let mut nodes = vec![node];
    nodes.extend(doc.find(node, |d, n| d.is(n, "code")));
    nodes.iter().find_map(|&n| {
        doc.classes(n).find_map(|c| {
            c.strip_prefix("language-").or_else(|| c.strip_prefix("lang-")).filter(|l| !l.is_empty()).map(str::to_string)
        })
    })
}

/// `<pre>` blocks, plus multi-line `<code>` that is not inside a `<pre>`.
fn blocks(markup: &str) -> Vec<(String, Option<String>)> {
    let doc = Document::parse(markup);
    let mut out = Vec::new();
    for n in doc.find_all(Document::ROOT, |d, n| d.is(n, "pre") || d.is(n, "code")) {
        if doc.is(n, "code") && doc.ancestors(n).any(|a| doc.is(a, "pre")) {
            continue;
        }
        let text = doc.raw_text(n);
        let text = text.trim_matches('\n').trim_end();
        if text.trim().is_empty() || (doc.is(n, "code") && !text.contains('\n')) {
            continue;
        }
        out.push((text.to_string(), declared_language(&doc, n)));
    }
    out
}

/// Code examples from the snippet markup, then any further ones in the
/// snapshot. Blocks are deduplicated on whitespace-collapsed text. A block
/// without a declared language takes `fallback_language`.
pub fn extract_code_examples(
    snippet_id: &SnippetId,
    content: &str,
    surroundings: Option<&str>,
    fallback_language: Option<&str>,
) -> Vec<CodeExample> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let sources = std::iter::once((content, CodeOrigin::Snippet)).chain(surroundings.map(|s| (s, CodeOrigin::ContextSnapshot)));
    for (markup, origin) in sources {
        for (text, lang) in blocks(markup) {
            if !seen.insert(collapse_whitespace(&text)) {
                continue;
            }
            out.push(CodeExample {
                text,
                language_hint: lang.or_else(|| fallback_language.map(str::to_string)),
                origin_snippet: snippet_id.clone(),
                origin,
            });
        }
    }
    out
}
