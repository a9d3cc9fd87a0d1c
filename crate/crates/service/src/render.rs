use std::fmt::Write;

use tablecheck_core::appraisal::{AppraisalReport, Badge, BadgeLevel, FacetPanel, GroupData, GroupState, IssueStatus};

fn badge(b: &Badge) -> String {
    match b.level {
        BadgeLevel::None => "[ok]".into(),
        BadgeLevel::Yellow => format!("[yellow {}]", b.count),
        BadgeLevel::Red => format!("[RED {}]", b.count),
    }
}

fn panel<A>(out: &mut String, title: &str, p: &FacetPanel<A>) {
    let _ = writeln!(out, "\n{title}  {}", badge(&p.badge));
    for issue in &p.issues {
        let mark = match issue.status {
            IssueStatus::Open => "!",
            IssueStatus::Dismissed => "-",
            IssueStatus::Resolved => "+",
        };
        let status = match issue.status {
            IssueStatus::Open => String::new(),
            s => format!(" ({})", serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()),
        };
        let _ = writeln!(out, "  {mark} {}{status}  <{}>", issue.summary, issue.id);
    }
    for g in &p.groups {
        let state = match g.state {
            GroupState::Available => "",
            GroupState::Unavailable => " (unavailable)",
            GroupState::NoData => " (no data)",
        };
        let _ = write!(out, "  * {}{state}", g.name);
        if let Some(d) = &g.detail {
            let _ = write!(out, ": {d}");
        }
        out.push('\n');
        if let Some(data) = &g.data {
            group_lines(out, data);
        }
    }
}

fn group_lines(out: &mut String, data: &GroupData) {
    match data {
        GroupData::SearchQueries { queries } => {
            for q in queries {
                let _ =
                    writeln!(out, "      {:?}  {} snippets, {} s", q.query, q.snippet_count, q.effective_duration.num_seconds());
            }
        }
        GroupData::Technologies { technologies } => {
            for t in technologies {
                let v = if t.versions.is_empty() { String::new() } else { format!(" {}", t.versions.join(", ")) };
                let _ = writeln!(out, "      {}{v}  ({} snippets)", t.name, t.snippet_ids.len());
            }
        }
        GroupData::Surroundings { with_snapshot, without_snapshot } => {
            let _ = writeln!(out, "      {} with context, {} without", with_snapshot.len(), without_snapshot.len());
        }
        GroupData::Domains { distribution, .. } => {
            for d in distribution {
                let trust = if d.trusted { "trusted" } else { "untrusted" };
                let _ = writeln!(out, "      {}  {} snippets, {trust}", d.domain, d.snippet_count);
            }
        }
        GroupData::EvidenceSnippets { conflicting_cells, stale, age_unknown, low_popularity } => {
            let _ = writeln!(
                out,
                "      {} conflicting cells, {} stale, {} undated, {} low popularity",
                conflicting_cells.len(),
                stale.len(),
                age_unknown.len(),
                low_popularity.len()
            );
        }
        GroupData::TaskAuthor { author } => {
            let stars: Vec<String> = author.top_repo_stars.iter().map(|r| format!("{} ({})", r.name, r.stars)).collect();
            let _ = writeln!(out, "      {}  {}", author.display_name, author.profile_url);
            if !stars.is_empty() {
                let _ = writeln!(out, "      repositories: {}", stars.join(", "));
            }
            if !author.top_languages.is_empty() {
                let _ = writeln!(out, "      languages: {}", author.top_languages.join(", "));
            }
        }
        GroupData::ResearchProcess { summary, timeline, .. } => {
            let _ = writeln!(
                out,
                "      {} s of activity, {} queries, {} timeline nodes",
                summary.total_effective_duration.num_seconds(),
                timeline.entries.len(),
                timeline.node_count()
            );
        }
        GroupData::Alternatives { alternatives } => {
            for a in alternatives.iter().take(5) {
                let _ = writeln!(out, "      {}  (suggested for {})", a.name, a.suggested_for.join(", "));
            }
        }
        GroupData::CodeExamples { examples, chosen_option } => {
            let _ = write!(out, "      {} code examples", examples.len());
            if let Some(c) = chosen_option {
                let _ = write!(out, ", chosen option {}", c.option_id);
            }
            out.push('\n');
        }
    }
}

/// Plain-text rendering of a report for terminals.
pub fn render_text(r: &AppraisalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}  ({})", r.title, r.table_id);
    let _ = writeln!(out, "as of {}", r.now.to_rfc3339());
    panel(&mut out, "CONTEXT", &r.facets.context);
    panel(&mut out, "TRUSTWORTHINESS", &r.facets.trustworthiness);
    panel(&mut out, "THOROUGHNESS", &r.facets.thoroughness);
    out
}
