//! Community popularity signals: Q&A votes and blog claps.

use std::sync::OnceLock;

use regex::Regex;
use url::Url;

use super::qa;
use crate::html::{Document, NodeId};
use crate::model::{PopularityKind, PopularitySignal};

const CLAP_DOMAINS: &[&str] = &["medium.com", "towardsdatascience.com"];

/// "1.3K" -> 1300, "2,417" -> 2417.
pub fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim().replace(',', "");
    let (num, mult) = match s.chars().last()? {
        'K' | 'k' => (&s[..s.len() - 1], 1_000.0),
        'M' | 'm' => (&s[..s.len() - 1], 1_000_000.0),
        _ => (s.as_str(), 1.0),
    };
    let v: f64 = num.trim().parse().ok()?;
    (v >= 0.0 && v.is_finite()).then(|| (v * mult).round() as u64)
}

fn vote_count(doc: &Document, post: NodeId) -> Option<i64> {
    let node = doc.find(post, |d, n| d.has_class(n, "js-vote-count") || d.attr(n, "itemprop") == Some("upvoteCount"))?;
    let raw = doc
        .attr(node, "data-value")
        .or_else(|| doc.attr(node, "content"))
        .map(str::to_string)
        .unwrap_or_else(|| doc.text_of(node));
    raw.trim().replace(',', "").parse().ok()
}

fn is_accepted(doc: &Document, post: NodeId) -> bool {
    doc.has_class(post, "accepted-answer")
        || doc.attr(post, "itemprop") == Some("acceptedAnswer")
        || doc.find(post, |d, n| d.has_class(n, "js-accepted-answer-indicator") && !d.has_class(n, "d-none")).is_some()
}

fn qa_votes(doc: &Document, url: &Url, quote: &str) -> Option<PopularitySignal> {
    let post = qa::locate_post(doc, url, quote)?;
    let count = vote_count(doc, post)?;
    Some(PopularitySignal {
        kind: PopularityKind::Upvotes { count, accepted: is_accepted(doc, post) },
        extracted_from: "vote count".into(),
    })
}

fn claps(doc: &Document) -> Option<PopularitySignal> {
    static CLAPS_TEXT: OnceLock<Regex> = OnceLock::new();
    let re = CLAPS_TEXT.get_or_init(|| Regex::new(r"(?i)\b(\d[\d,]*(?:\.\d+)?[KkMm]?)\s+claps?\b").unwrap());

    let element = doc
        .find(Document::ROOT, |d, n| {
            d.classes(n).any(|c| c.contains("clap-count") || c == "pw-multi-vote-count")
                || d.attr(n, "data-testid") == Some("clap-count")
        })
        .and_then(|n| parse_count(&doc.text_of(n)));
    let count = element.or_else(|| re.captures(&doc.text()).and_then(|c| parse_count(&c[1])))?;
    Some(PopularitySignal { kind: PopularityKind::Claps { count }, extracted_from: "clap count".into() })
}

/// Popularity of the snippet's post, for sites that expose one.
pub fn extract_popularity(doc: &Document, url: &Url, domain: &str, quote: &str) -> Option<PopularitySignal> {
    if qa::is_qa_domain(domain) {
        qa_votes(doc, url, quote)
    } else if CLAP_DOMAINS.contains(&domain) {
        claps(doc)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn url(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1.3K"), Some(1300));
        assert_eq!(parse_count("2,417"), Some(2417));
        assert_eq!(parse_count("12"), Some(12));
        assert_eq!(parse_count("2M"), Some(2_000_000));
        assert_eq!(parse_count("lots"), None);
    }

    #[test]
    fn qa_votes_and_acceptance() {
        let html = r#"
            <div id="answer-1" class="answer"><div class="js-vote-count" data-value="-3">-3</div><p>bad idea</p>
              <div class="js-accepted-answer-indicator d-none"></div></div>
            <div id="answer-2" class="answer"><div class="js-vote-count">1,024</div><p>good idea</p>
              <div class="js-accepted-answer-indicator"></div></div>
        "#;
        let doc = Document::parse(html);
        let u = url("https://stackoverflow.com/questions/9");
        assert_eq!(
            extract_popularity(&doc, &u, "stackoverflow.com", "bad idea").unwrap().kind,
            PopularityKind::Upvotes { count: -3, accepted: false }
        );
        assert_eq!(
            extract_popularity(&doc, &u, "stackoverflow.com", "good idea").unwrap().kind,
            PopularityKind::Upvotes { count: 1024, accepted: true }
        );
    }

    #[test]
    fn medium_claps() {
        let doc =
            Document::parse(r#"<article><p>text</p><button><span class="pw-multi-vote-count">1.3K</span></button></article>"#);
        let u = url("https://medium.com/@a/post");
        assert_eq!(extract_popularity(&doc, &u, "medium.com", "").unwrap().kind, PopularityKind::Claps { count: 1300 });
        let doc = Document::parse("<p>Thanks for the 245 claps</p>");
        assert_eq!(extract_popularity(&doc, &u, "medium.com", "").unwrap().kind, PopularityKind::Claps { count: 245 });
    }

    #[test]
    fn other_sites_have_none() {
        let doc = Document::parse("<p>42 claps</p>");
        assert_eq!(extract_popularity(&doc, &url("https://example.com"), "example.com", ""), None);
    }
}
