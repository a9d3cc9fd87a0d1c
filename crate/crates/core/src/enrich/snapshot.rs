//! Context snapshots: the markup surrounding a snippet on its page.

use url::Url;

use super::qa;
use crate::html::{collapse_whitespace, Document, NodeId};
use crate::model::{ContextSnapshot, HighlightRange};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SnapshotError {
    #[error("selected text not found on the page")]
    SelectionNotFound,
    #[error("empty selection")]
    EmptySelection,
}

const DISTRACTIONS: &[&str] = &["script", "style", "iframe", "nav", "aside", "footer", "noscript", "form"];

fn is_ad_class(c: &str) -> bool {
    let c = c.to_ascii_lowercase();
    matches!(c.as_str(), "ad" | "ads" | "advert" | "advertisement")
        || c.starts_with("ad-")
        || c.starts_with("ads-")
        || c.contains("sponsor")
        || c.contains("cookie")
}

fn is_distraction(doc: &Document, n: NodeId) -> bool {
    doc.name(n).is_some_and(|name| DISTRACTIONS.contains(&name))
        || doc.classes(n).any(is_ad_class)
        || doc.attr(n, "role").is_some_and(|r| r == "navigation" || r == "complementary")
}

fn main_region(doc: &Document) -> NodeId {
    doc.find(Document::ROOT, |d, n| d.is(n, "main") || d.attr(n, "role") == Some("main"))
        .or_else(|| doc.find(Document::ROOT, |d, n| d.is(n, "article")))
        .or_else(|| doc.element_by_id("content"))
        .or_else(|| doc.find(Document::ROOT, |d, n| d.is(n, "body")))
        .unwrap_or(Document::ROOT)
}

fn highlight(surroundings: &str, quote: &str) -> Option<HighlightRange> {
    let text = Document::parse(surroundings).text();
    let pos = text.find(quote)?;
    let start = text[..pos].chars().count();
    Some(HighlightRange { start, end: start + quote.chars().count() })
}

fn finish(surroundings: String, quote: &str, includes_question_block: bool) -> Option<ContextSnapshot> {
    let highlight_range = highlight(&surroundings, quote)?;
    Some(ContextSnapshot { surroundings, highlight_range, includes_question_block })
}

/// Snapshot of the region around `quote` (the snippet's text).
///
/// On Q&A pages the surroundings are the question block plus the post
/// holding the quote. Elsewhere they are the page's main content with
/// navigation, ads and similar distractions removed.
pub fn capture_snapshot(doc: &Document, url: &Url, domain: &str, quote: &str) -> Result<ContextSnapshot, SnapshotError> {
    let quote = collapse_whitespace(quote);
    if quote.is_empty() {
        return Err(SnapshotError::EmptySelection);
    }
    if qa::is_qa_domain(domain) {
        if let Some(post) = qa::locate_post(doc, url, &quote) {
            let question = qa::question_block(doc);
            let mut markup = String::new();
            if let Some(q) = question.filter(|&q| q != post) {
                markup.push_str(&doc.outer_html_filtered(q, &is_distraction));
            }
            markup.push_str(&doc.outer_html_filtered(post, &is_distraction));
            if let Some(s) = finish(markup, &quote, question.is_some()) {
                return Ok(s);
            }
        }
    }
    let region = main_region(doc);
    finish(doc.outer_html_filtered(region, &is_distraction), &quote, false)
        .or_else(|| finish(doc.outer_html(region), &quote, false))
        .or_else(|| finish(doc.outer_html(Document::ROOT), &quote, false))
        .ok_or(SnapshotError::SelectionNotFound)
}

/// Snapshot bounded by an explicit outer selection: the innermost element
/// whose text contains `bounds`, which in turn must contain `quote`.
pub fn capture_bounded_snapshot(doc: &Document, bounds: &str, quote: &str) -> Result<ContextSnapshot, SnapshotError> {
    let bounds = collapse_whitespace(bounds);
    let quote = collapse_whitespace(quote);
    if bounds.is_empty() || quote.is_empty() {
        return Err(SnapshotError::EmptySelection);
    }
    let candidates = doc.find_all(Document::ROOT, |d, n| d.name(n).is_some() && d.text_of(n).contains(&bounds));
    // find_all is in document order, so the last candidate is the innermost
    let node = *candidates.last().ok_or(SnapshotError::SelectionNotFound)?;
    finish(doc.outer_html(node), &quote, false).ok_or(SnapshotError::SelectionNotFound)
}
