use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeDelta, TimeZone, Utc};
use proptest::prelude::*;
use tablecheck_core::appraisal::{
    aggregate_alternatives, badge_for_count, conflict_cells, facet_badge, whitelist_issues, Issue, IssueKind, IssueStatus,
    OptionSuggestions, SuggestionResponse, Whitelist,
};
use tablecheck_core::session::{build_timeline, effective_duration, infer_chosen_option, EventKind, SessionEvent, SessionLog};
use tablecheck_core::{Cell, Criterion, KnowledgeTable, Rating, Snippet, SnippetId, SnippetStore, TableOption, ThresholdConfig};
use url::Url;

fn base() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 6, 1, 9, 0, 0).unwrap()
}

fn events_from_offsets(offsets_ms: &[i64]) -> Vec<SessionEvent> {
    let url = Url::parse("https://a.example/").unwrap();
    let mut at = base();
    offsets_ms
        .iter()
        .map(|&gap| {
            at += TimeDelta::milliseconds(gap);
            SessionEvent::new(at, EventKind::ActivityHeartbeat { url: url.clone() })
        })
        .collect()
}

proptest! {
    #[test]
    fn effective_duration_bounded_by_span(gaps in prop::collection::vec(0i64..60_000, 0..40)) {
        let cfg = ThresholdConfig::default();
        let events = events_from_offsets(&gaps);
        let d = effective_duration(&events, &cfg);
        let span = match (events.first(), events.last()) {
            (Some(a), Some(b)) => b.at - a.at,
            _ => TimeDelta::zero(),
        };
        prop_assert!(d <= span);
        prop_assert!(d >= TimeDelta::zero());
        let max = cfg.idle_threshold() * events.len().saturating_sub(1) as i32;
        prop_assert!(d <= max);
    }

    #[test]
    fn effective_duration_grows_with_events(gaps in prop::collection::vec(0i64..60_000, 1..40), extra in 0i64..60_000) {
        let cfg = ThresholdConfig::default();
        let mut more = gaps.clone();
        more.push(extra);
        prop_assert!(effective_duration(&events_from_offsets(&more), &cfg) >= effective_duration(&events_from_offsets(&gaps), &cfg));
    }

    #[test]
    fn timeline_shades_are_a_permutation(kinds in prop::collection::vec(0u8..3, 0..30)) {
        let mut events = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            let at = base() + TimeDelta::seconds(i as i64);
            let url = Url::parse(&format!("https://p{i}.example/")).unwrap();
            events.push(SessionEvent::new(at, match k {
                0 => EventKind::QueryIssued { query: format!("q{i}") },
                1 => EventKind::PageEnter { url },
                _ => EventKind::ActivityHeartbeat { url },
            }));
        }
        let tl = build_timeline(&SessionLog { events });
        let mut shades: Vec<usize> = tl.entries.iter()
            .flat_map(|q| std::iter::once(q.shade_index).chain(q.pages.iter().map(|p| p.shade_index)))
            .collect();
        let n = shades.len();
        prop_assert_eq!(n, tl.node_count());
        shades.sort();
        prop_assert_eq!(shades, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn chosen_option_ignores_non_copy_events(copies in prop::collection::vec(0usize..3, 0..12), noise in prop::collection::vec(0usize..3, 0..12)) {
        let urls: Vec<Url> = (0..3).map(|i| Url::parse(&format!("https://src{i}.example/p")).unwrap()).collect();
        let table = table_with_sources(3);
        let store: SnippetStore = (0..3)
            .map(|i| Snippet::from_capture(format!("s{i}"), "x", urls[i].clone(), base(), Some(Rating::Positive)))
            .collect();
        let copy_events: Vec<SessionEvent> = copies.iter().enumerate()
            .map(|(i, &u)| SessionEvent::new(base() + TimeDelta::seconds(i as i64 * 2), EventKind::Copy { url: urls[u].clone(), text: "t".into() }))
            .collect();
        let mut with_noise = copy_events.clone();
        for (i, &u) in noise.iter().enumerate() {
            with_noise.push(SessionEvent::new(base() + TimeDelta::seconds(i as i64 * 3 + 1), EventKind::ActivityHeartbeat { url: urls[u].clone() }));
        }
        with_noise.sort_by_key(|e| e.at);
        let a = infer_chosen_option(&SessionLog { events: copy_events }, &table, &store);
        let b = infer_chosen_option(&SessionLog { events: with_noise }, &table, &store);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn whitelist_superset_never_adds_untrusted_issues(
        domains in prop::collection::btree_set("[a-e]\\.com", 0..5),
        base_list in prop::collection::btree_set("[a-e]\\.com", 0..5),
        extra in prop::collection::btree_set("[a-e]\\.com", 0..5),
    ) {
        let dist: BTreeMap<String, usize> = domains.into_iter().map(|d| (d, 1)).collect();
        let w = Whitelist::from_entries(&base_list).unwrap();
        let wider = Whitelist::from_entries(base_list.iter().chain(&extra)).unwrap();
        let open = |w: &Whitelist| whitelist_issues(&dist, w).iter().filter(|i| i.status == IssueStatus::Open).count();
        prop_assert!(open(&wider) <= open(&w));
    }

    #[test]
    fn dismissals_never_raise_a_badge(n in 0usize..12, dismiss in prop::collection::vec(any::<bool>(), 12)) {
        let cfg = ThresholdConfig::default();
        let issues: Vec<Issue> = (0..n).map(|i| Issue::new(IssueKind::LowPopularity { snippet_id: SnippetId::new(format!("s{i}")), score: -1 })).collect();
        let dismissed: Vec<Issue> = issues.iter().cloned().zip(&dismiss)
            .map(|(i, &d)| if d { i.with_status(IssueStatus::Dismissed) } else { i })
            .collect();
        let before = facet_badge(&issues, &cfg);
        let after = facet_badge(&dismissed, &cfg);
        prop_assert!(after.level <= before.level);
        prop_assert!(after.count <= before.count);
        prop_assert_eq!(before, badge_for_count(n, &cfg));
    }

    #[test]
    fn alternatives_exclude_options_and_duplicates(
        options in prop::collection::vec("[a-d]{1,2}( [a-d]{1,2})?", 1..4),
        raw in prop::collection::vec(prop::collection::vec("[a-d]{1,2}( [a-d]{1,2})?", 0..8), 1..4),
    ) {
        let lists: Vec<OptionSuggestions> = options.iter().zip(raw.iter()).map(|(o, sugg)| OptionSuggestions {
            option: o.clone(),
            responses: vec![SuggestionResponse {
                query: format!("{o} vs"),
                suggestions: sugg.iter().map(|s| format!("{o} vs {s}")).collect(),
            }],
        }).collect();
        let out = aggregate_alternatives(&options, &lists);
        let names: BTreeSet<&str> = out.iter().map(|a| a.name.as_str()).collect();
        prop_assert_eq!(names.len(), out.len());
        for o in &options {
            prop_assert!(!names.contains(o.to_lowercase().as_str()));
        }
        for w in out.windows(2) {
            prop_assert!(w[0].option_count >= w[1].option_count);
        }
    }

    #[test]
    fn conflicts_match_brute_force(rows in 1usize..6, cols in 1usize..6, ratings in prop::collection::vec(prop::collection::vec(0u8..3, 0..4), 36)) {
        let (table, store) = random_table(rows, cols, &ratings);
        let expected: Vec<_> = table.cells.iter().filter(|c| {
            let rs: Vec<Rating> = c.snippets.iter().map(|s| store.get(s).unwrap().rating.unwrap()).collect();
            rs.contains(&Rating::Positive) && rs.contains(&Rating::Negative)
        }).map(|c| (c.option.clone(), c.criterion.clone())).collect();
        prop_assert_eq!(conflict_cells(&table, &store), expected);
    }

    #[test]
    fn snippet_serde_round_trip(text in "[a-zA-Z0-9 <>/]{0,40}", rating in 0u8..4) {
        let rating = [Some(Rating::Positive), Some(Rating::Negative), Some(Rating::Informational), None][rating as usize];
        let s = Snippet::from_capture("s1", text, Url::parse("https://a.example/x").unwrap(), base(), rating);
        let json = serde_json::to_string(&s).unwrap();
        let back: Snippet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, s);
    }
}

fn table_with_sources(n: usize) -> KnowledgeTable {
    KnowledgeTable {
        id: "t".into(),
        title: "t".into(),
        options: (0..n).map(|i| TableOption { id: format!("o{i}").into(), name: format!("opt {i}") }).collect(),
        criteria: vec![Criterion { id: "c".into(), name: "c".into() }],
        cells: (0..n)
            .map(|i| Cell { option: format!("o{i}").into(), criterion: "c".into(), snippets: vec![format!("s{i}").into()] })
            .collect(),
        author_profile_url: None,
        created_at: base(),
        updated_at: base(),
    }
}

fn random_table(rows: usize, cols: usize, ratings: &[Vec<u8>]) -> (KnowledgeTable, SnippetStore) {
    let mut cells = Vec::new();
    let mut store = SnippetStore::new();
    let url = Url::parse("https://a.example/").unwrap();
    for r in 0..rows {
        for c in 0..cols {
            let mut ids = Vec::new();
            for (k, &v) in ratings[r * 6 + c].iter().enumerate() {
                let id = format!("s{r}-{c}-{k}");
                let rating = [Rating::Positive, Rating::Negative, Rating::Informational][v as usize];
                store.insert(Snippet::from_capture(id.clone(), "x", url.clone(), base(), Some(rating)));
                ids.push(SnippetId::new(id));
            }
            cells.push(Cell { option: format!("o{r}").into(), criterion: format!("c{c}").into(), snippets: ids });
        }
    }
    let table = KnowledgeTable {
        id: "t".into(),
        title: "t".into(),
        options: (0..rows).map(|i| TableOption { id: format!("o{i}").into(), name: format!("o{i}") }).collect(),
        criteria: (0..cols).map(|i| Criterion { id: format!("c{i}").into(), name: format!("c{i}") }).collect(),
        cells,
        author_profile_url: None,
        created_at: base(),
        updated_at: base(),
    };
    (table, store)
}
