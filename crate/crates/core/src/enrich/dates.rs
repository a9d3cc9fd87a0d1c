//! Last-updated date of a snippet's source.

use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeZone, Utc};
use regex::Regex;
use url::Url;

use super::qa;
use crate::html::{Document, NodeData, NodeId};

fn earliest_plausible() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(1995, 1, 1, 0, 0, 0).unwrap()
}

/// Parses the date formats seen in page metadata.
pub fn parse_date_loose(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(d) = DateTime::parse_from_rfc3339(s) {
        return Some(d.with_timezone(&Utc));
    }
    if let Ok(d) = DateTime::parse_from_rfc2822(s) {
        return Some(d.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%SZ", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(d) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Utc.from_utc_datetime(&d));
        }
    }
    let date_part = s.get(..10).unwrap_or(s);
    NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok().map(|d| Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap()))
}

fn visible_date_patterns() -> &'static [Regex; 3] {
    static RE: OnceLock<[Regex; 3]> = OnceLock::new();
    RE.get_or_init(|| {
        let month = "(Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|Jun(?:e)?|Jul(?:y)?|Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)";
        [
            Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap(),
            Regex::new(&format!(r"\b{month}\.? (\d{{1,2}}),? (\d{{4}})\b")).unwrap(),
            Regex::new(&format!(r"\b(\d{{1,2}}) {month}\.? (\d{{4}})\b")).unwrap(),
        ]
    })
}

fn month_number(name: &str) -> Option<u32> {
    const NAMES: [&str; 12] = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];
    let prefix = name.get(..3)?.to_ascii_lowercase();
    NAMES.iter().position(|m| *m == prefix).map(|i| i as u32 + 1)
}

fn ymd(y: &str, m: u32, d: &str) -> Option<DateTime<Utc>> {
    let date = NaiveDate::from_ymd_opt(y.parse().ok()?, m, d.parse().ok()?)?;
    Some(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0)?))
}

/// Dates written out in visible text.
pub fn visible_dates(text: &str) -> Vec<DateTime<Utc>> {
    let [iso, mdy, dmy] = visible_date_patterns();
    let mut out = Vec::new();
    for c in iso.captures_iter(text) {
        out.extend(c[2].parse().ok().and_then(|m| ymd(&c[1], m, &c[3])));
    }
    for c in mdy.captures_iter(text) {
        out.extend(month_number(&c[1]).and_then(|m| ymd(&c[3], m, &c[2])));
    }
    for c in dmy.captures_iter(text) {
        out.extend(month_number(&c[2]).and_then(|m| ymd(&c[3], m, &c[1])));
    }
    out
}

fn time_stamps_under(doc: &Document, root: NodeId) -> Vec<DateTime<Utc>> {
    let mut out = Vec::new();
    for n in doc.descendants(root) {
        if doc.is(n, "time") {
            out.extend(doc.attr(n, "datetime").and_then(parse_date_loose));
        }
        if doc.has_class(n, "relativetime") {
            out.extend(doc.attr(n, "title").and_then(parse_date_loose));
        }
    }
    out
}

const META_KEYS: &[&str] = &[
    "article:modified_time",
    "og:updated_time",
    "article:published_time",
    "last-modified",
    "date",
    "dc.date",
    "dcterms.modified",
];

fn metadata_dates(doc: &Document) -> Vec<DateTime<Utc>> {
    static JSON_LD: OnceLock<Regex> = OnceLock::new();
    let json_ld = JSON_LD.get_or_init(|| Regex::new(r#""date(?:Modified|Published)"\s*:\s*"([^"]+)""#).unwrap());

    let mut out = Vec::new();
    for n in doc.descendants(Document::ROOT) {
        if doc.is(n, "meta") {
            let key = doc.attr(n, "property").or_else(|| doc.attr(n, "name")).or_else(|| doc.attr(n, "itemprop"));
            let known = key.is_some_and(|k| {
                let k = k.to_ascii_lowercase();
                META_KEYS.contains(&k.as_str()) || k == "datemodified" || k == "datepublished"
            });
            if known {
                out.extend(doc.attr(n, "content").and_then(parse_date_loose));
            }
        } else if matches!(doc.attr(n, "itemprop"), Some("dateModified" | "datePublished")) {
            out.extend(doc.attr(n, "datetime").or_else(|| doc.attr(n, "content")).and_then(parse_date_loose));
        } else if doc.is(n, "script") && doc.attr(n, "type") == Some("application/ld+json") {
            for &c in doc.children(n) {
                if let NodeData::Text(t) = &doc.node(c).data {
                    out.extend(json_ld.captures_iter(t).filter_map(|c| parse_date_loose(&c[1])));
                }
            }
        } else if doc.is(n, "time") {
            out.extend(doc.attr(n, "datetime").and_then(parse_date_loose));
        }
    }
    out
}

/// Most recent plausible date on the page for the snippet's post.
///
/// On Q&A pages the post containing the snippet is located and its own
/// timestamps (creation and edits) are used. Elsewhere structured metadata
/// wins, then dates written in the page text, then the HTTP `Last-Modified`
/// header. Dates after `captured_at` or before 1995 are ignored.
pub fn extract_last_updated(
    doc: &Document,
    url: &Url,
    domain: &str,
    quote: &str,
    captured_at: DateTime<Utc>,
    http_last_modified: Option<DateTime<Utc>>,
) -> Option<DateTime<Utc>> {
    let plausible = |d: &DateTime<Utc>| *d >= earliest_plausible() && *d <= captured_at;
    let latest = |dates: Vec<DateTime<Utc>>| dates.into_iter().filter(plausible).max();

    if qa::is_qa_domain(domain) {
        if let Some(post) = qa::locate_post(doc, url, quote) {
            if let Some(d) = latest(time_stamps_under(doc, post)) {
                return Some(d);
            }
        }
    }
    latest(metadata_dates(doc)).or_else(|| latest(visible_dates(&doc.text()))).or_else(|| http_last_modified.filter(plausible))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
    }

    fn url(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    #[test]
    fn parses_common_formats() {
        assert_eq!(parse_date_loose("2019-03-04"), Some(at(2019, 3, 4)));
        assert_eq!(parse_date_loose("2019-03-04 10:11:12Z"), Some(Utc.with_ymd_and_hms(2019, 3, 4, 10, 11, 12).unwrap()));
        assert_eq!(parse_date_loose("2019-03-04T10:11:12+02:00"), Some(Utc.with_ymd_and_hms(2019, 3, 4, 8, 11, 12).unwrap()));
        assert_eq!(parse_date_loose("yesterday"), None);
    }

    #[test]
    fn visible_date_strings() {
        let found = visible_dates("Updated March 5, 2018 and posted 7 Jan 2017, see 2016-02-29.");
        assert!(found.contains(&at(2018, 3, 5)));
        assert!(found.contains(&at(2017, 1, 7)));
        assert!(found.contains(&at(2016, 2, 29)));
    }

    #[test]
    fn qa_uses_latest_timestamp_of_the_post() {
        let html = r#"
            <div id="question"><span class="relativetime" title="2015-01-01 00:00:00Z">q</span></div>
            <div id="answer-5" class="answer"><p>Use np.dot</p>
              <time datetime="2016-05-01T00:00:00Z">answered</time>
              <span class="relativetime" title="2018-02-03 09:00:00Z">edited</span></div>
            <div id="answer-6" class="answer"><p>Other</p><time datetime="2020-01-01T00:00:00Z"></time></div>
        "#;
        let doc = Document::parse(html);
        let got = extract_last_updated(
            &doc,
            &url("https://stackoverflow.com/questions/1#5"),
            "stackoverflow.com",
            "",
            at(2020, 6, 1),
            None,
        );
        assert_eq!(got, Some(Utc.with_ymd_and_hms(2018, 2, 3, 9, 0, 0).unwrap()));
    }

    #[test]
    fn generic_metadata_then_text_then_header() {
        let cap = at(2020, 6, 1);
        let u = url("https://blog.example.com/post");
        let meta = Document::parse(
            r#"<head><meta property="article:modified_time" content="2019-07-08T00:00:00Z"></head><p>2010-01-01</p>"#,
        );
        assert_eq!(extract_last_updated(&meta, &u, "example.com", "", cap, None), Some(at(2019, 7, 8)));

        let ld = Document::parse(r#"<script type="application/ld+json">{"dateModified": "2018-01-02"}</script>"#);
        assert_eq!(extract_last_updated(&ld, &u, "example.com", "", cap, None), Some(at(2018, 1, 2)));

        let text = Document::parse("<p>Posted on June 3, 2017</p>");
        assert_eq!(extract_last_updated(&text, &u, "example.com", "", cap, None), Some(at(2017, 6, 3)));

        let bare = Document::parse("<p>nothing</p>");
        assert_eq!(extract_last_updated(&bare, &u, "example.com", "", cap, Some(at(2016, 1, 1))), Some(at(2016, 1, 1)));
        assert_eq!(extract_last_updated(&bare, &u, "example.com", "", cap, None), None);
    }

    #[test]
    fn implausible_dates_ignored() {
        let doc = Document::parse("<p>1970-01-01 and 2030-01-01 and 2012-12-12</p>");
        let got = extract_last_updated(&doc, &url("https://x.example.com"), "example.com", "", at(2020, 1, 1), None);
        assert_eq!(got, Some(at(2012, 12, 12)));
    }
}
