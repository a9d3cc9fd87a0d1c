use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Autocomplete candidates for one query, in service order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionResponse {
    pub query: String,
    pub suggestions: Vec<String>,
}

/// The suggestion responses gathered for one table option.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionSuggestions {
    pub option: String,
    pub responses: Vec<SuggestionResponse>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub name: String,
    /// Number of distinct table options whose suggestions mention it.
    pub option_count: usize,
    /// Best (lowest, 0-based) position in any suggestion list.
    pub best_rank: usize,
    pub suggested_for: Vec<String>,
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// The part of a suggestion after its last "vs", "vs." or "versus" word.
pub fn strip_comparison_prefix(suggestion: &str) -> Option<String> {
    let words: Vec<&str> = suggestion.split_whitespace().collect();
    let last = words.iter().rposition(|w| matches!(w.to_lowercase().as_str(), "vs" | "vs." | "versus"))?;
    let rest = normalize(&words[last + 1..].join(" "));
    let rest = rest.trim_matches(|c: char| c.is_ascii_punctuation() && c != '+' && c != '#' && c != '.');
    (!rest.is_empty()).then(|| rest.to_string())
}

/// Ranks alternatives to the table options mined from "X vs"/"X versus"
/// autocomplete lists: most options in common first, then best list
/// position, then name. Existing option names never appear.
pub fn aggregate_alternatives(options: &[String], lists: &[OptionSuggestions]) -> Vec<Alternative> {
    let existing: BTreeSet<String> = options.iter().map(|o| normalize(o)).collect();
    struct Acc {
        options: BTreeSet<String>,
        best_rank: usize,
    }
    let mut acc: BTreeMap<String, Acc> = BTreeMap::new();
    for list in lists {
        let option = normalize(&list.option);
        for response in &list.responses {
            for (rank, suggestion) in response.suggestions.iter().enumerate() {
                let Some(name) = strip_comparison_prefix(suggestion) else { continue };
                if existing.contains(&name) || name == option {
                    continue;
                }
                let entry = acc.entry(name).or_insert(Acc { options: BTreeSet::new(), best_rank: rank });
                entry.options.insert(option.clone());
                entry.best_rank = entry.best_rank.min(rank);
            }
        }
    }
    let mut out: Vec<Alternative> = acc
        .into_iter()
        .map(|(name, a)| Alternative {
            name,
            option_count: a.options.len(),
            best_rank: a.best_rank,
            suggested_for: a.options.into_iter().collect(),
        })
        .collect();
    out.sort_by(|a, b| b.option_count.cmp(&a.option_count).then(a.best_rank.cmp(&b.best_rank)).then_with(|| a.name.cmp(&b.name)));
    out
}
