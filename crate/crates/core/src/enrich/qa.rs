//! Locating posts on Q&A pages (Stack Exchange family markup).

use url::Url;

use crate::html::{collapse_whitespace, Document, NodeId};

pub const QA_DOMAINS: &[&str] =
    &["stackoverflow.com", "stackexchange.com", "superuser.com", "serverfault.com", "askubuntu.com", "mathoverflow.net"];

pub fn is_qa_domain(domain: &str) -> bool {
    QA_DOMAINS.contains(&domain)
}

/// Answer id referenced by the URL: `#123`, `#answer-123` or `/a/123`.
fn answer_id_from_url(url: &Url) -> Option<String> {
    if let Some(frag) = url.fragment() {
        let id = frag.strip_prefix("answer-").unwrap_or(frag);
        if !id.is_empty() && id.chars().all(|c| c.is_ascii_digit()) {
            return Some(id.to_string());
        }
    }
    let segments: Vec<&str> = url.path_segments()?.collect();
    segments
        .windows(2)
        .find(|w| w[0] == "a" && w[1].chars().all(|c| c.is_ascii_digit()) && !w[1].is_empty())
        .map(|w| w[1].to_string())
}

pub fn question_block(doc: &Document) -> Option<NodeId> {
    doc.element_by_id("question").or_else(|| doc.find(Document::ROOT, |d, n| d.has_class(n, "question")))
}

pub fn answers(doc: &Document) -> Vec<NodeId> {
    doc.find_all(Document::ROOT, |d, n| d.has_class(n, "answer"))
}

fn contains_quote(doc: &Document, node: NodeId, quote: &str) -> bool {
    !quote.is_empty() && doc.text_of(node).contains(quote)
}

/// The post a snippet came from: the answer named by the URL, else the
/// answer whose text contains the quote, else the question if it does.
pub fn locate_post(doc: &Document, url: &Url, quote: &str) -> Option<NodeId> {
    let quote = collapse_whitespace(quote);
    let all = answers(doc);
    if let Some(id) = answer_id_from_url(url) {
        let anchor = format!("answer-{id}");
        let hit = all
            .iter()
            .copied()
            .find(|&n| doc.attr(n, "id") == Some(anchor.as_str()) || doc.attr(n, "data-answerid") == Some(id.as_str()));
        if hit.is_some() {
            return hit;
        }
    }
    if let Some(a) = all.iter().copied().find(|&n| contains_quote(doc, n, &quote)) {
        return Some(a);
    }
    question_block(doc).filter(|&q| contains_quote(doc, q, &quote))
}
