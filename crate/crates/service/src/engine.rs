use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tablecheck_clients::{fetch_author_profile, suggestions_for_options, Connector, Endpoints, ProfileLimits, Transport};
use tablecheck_core::appraisal::{
    aggregate_alternatives, apply_adjustment, assemble_report, Adjustment, AdjustmentError, Alternative, AppraisalError,
    AppraisalInput, AppraisalReport, AuthorCredibility, ConsumerState, Fetched, OptionSuggestions,
};
use tablecheck_core::session::{build_timeline, page_stats, query_stats, PageStat, QueryStat, Timeline};
use tablecheck_core::{ContextSnapshot, KnowledgeTable, SnippetId, SnippetStore, ThresholdConfig};

use crate::store::{Store, StoreError};

pub const SUGGESTION_CACHE_TTL: Duration = Duration::from_secs(600);

/// How external services are reached.
#[derive(Clone)]
pub enum External {
    /// Canned responses from the fixtures imported with each table; no
    /// network access.
    Offline,
    Live {
        transport: Arc<dyn Transport>,
        endpoints: Box<Endpoints>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Appraisal(#[from] AppraisalError),
    #[error(transparent)]
    Adjustment(#[from] AdjustmentError),
    #[error("unknown snippet {0:?}")]
    UnknownSnippet(String),
}

impl EngineError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, EngineError::Store(StoreError::UnknownTable(_)) | EngineError::UnknownSnippet(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub id: String,
    pub title: String,
    pub option_count: usize,
    pub criterion_count: usize,
    pub snippet_count: usize,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TimelineView {
    Available { timeline: Timeline, queries: Vec<QueryStat>, pages: Vec<PageStat> },
    NoData,
}

type Externals = (Fetched<Vec<OptionSuggestions>>, Fetched<AuthorCredibility>);

/// Everything a report needs that comes from the store.
pub struct Loaded {
    pub table: KnowledgeTable,
    pub snippets: SnippetStore,
    pub log: Option<tablecheck_core::session::SessionLog>,
}

/// Appraisal over a [`Store`]. Table and snippet documents are only read;
/// consumer-state writes are serialized per consumer.
pub struct Engine {
    store: Store,
    external: External,
    limits: ProfileLimits,
    cache: Mutex<HashMap<(String, u32), (Instant, Externals)>>,
    consumer_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl Engine {
    pub fn new(store: Store, external: External) -> Self {
        Self {
            store,
            external,
            limits: ProfileLimits::default(),
            cache: Mutex::new(HashMap::new()),
            consumer_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn load(&self, table_id: &str) -> Result<Loaded, EngineError> {
        Ok(Loaded {
            table: self.store.table(table_id)?,
            snippets: self.store.snippets(table_id)?,
            log: self.store.session(table_id)?,
        })
    }

    pub fn tables(&self) -> Result<Vec<TableSummary>, EngineError> {
        let mut out = Vec::new();
        for id in self.store.table_ids()? {
            let t = self.store.table(&id)?;
            out.push(TableSummary {
                snippet_count: t.placed_snippet_ids().len(),
                id,
                title: t.title,
                option_count: t.options.len(),
                criterion_count: t.criteria.len(),
                updated_at: t.updated_at,
            });
        }
        Ok(out)
    }

    fn connector(&self, table: &KnowledgeTable) -> Connector {
        match &self.external {
            External::Offline => Connector::offline(self.store.fixtures_dir(&table.id)),
            External::Live { transport, endpoints } => Connector::live(transport.clone(), (**endpoints).clone()),
        }
    }

    async fn externals(&self, table: &KnowledgeTable, cfg: &ThresholdConfig) -> Externals {
        let live = matches!(self.external, External::Live { .. });
        let key = (table.id.to_string(), cfg.suggestion_top_n);
        if live {
            if let Some((at, hit)) = self.cache.lock().expect("cache poisoned").get(&key) {
                if at.elapsed() < SUGGESTION_CACHE_TTL {
                    return hit.clone();
                }
            }
        }
        let connector = self.connector(table);
        let options: Vec<String> = table.options.iter().map(|o| o.name.clone()).collect();
        let alternatives = suggestions_for_options(&options, &connector, cfg.suggestion_top_n as usize).await;
        let author = match &table.author_profile_url {
            None => Fetched::NotRequested,
            Some(url) => match fetch_author_profile(url, &connector, self.limits).await {
                Ok(value) => Fetched::Available { value },
                Err(e) => Fetched::Unavailable { reason: e.to_string() },
            },
        };
        let out = (alternatives, author);
        if live {
            self.cache.lock().expect("cache poisoned").insert(key, (Instant::now(), out.clone()));
        }
        out
    }

    pub async fn report(
        &self,
        table_id: &str,
        consumer: &ConsumerState,
        now: DateTime<Utc>,
    ) -> Result<AppraisalReport, EngineError> {
        let data = self.load(table_id)?;
        let (alternatives, author) = self.externals(&data.table, &consumer.thresholds).await;
        let input = AppraisalInput {
            table: &data.table,
            snippets: &data.snippets,
            log: data.log.as_ref(),
            alternatives: &alternatives,
            author: &author,
            consumer,
            now,
        };
        Ok(assemble_report(&input)?)
    }

    /// Applies `adjustment` for `consumer_id` against `table_id`, persists the
    /// new consumer state and returns it with the recomputed report.
    pub async fn adjust(
        &self,
        consumer_id: &str,
        table_id: &str,
        adjustment: &Adjustment,
        now: DateTime<Utc>,
    ) -> Result<(ConsumerState, AppraisalReport), EngineError> {
        let lock = self.consumer_lock(consumer_id);
        let _guard = lock.lock().await;
        let consumer = self.store.consumer(consumer_id)?;
        let data = self.load(table_id)?;
        let (alternatives, author) = self.externals(&data.table, &consumer.thresholds).await;
        let input = AppraisalInput {
            table: &data.table,
            snippets: &data.snippets,
            log: data.log.as_ref(),
            alternatives: &alternatives,
            author: &author,
            consumer: &consumer,
            now,
        };
        let (state, report) = apply_adjustment(&input, adjustment)?;
        self.store.put_consumer(consumer_id, &state)?;
        Ok((state, report))
    }

    /// Replaces a consumer's whitelist with `domains`.
    pub async fn set_whitelist(&self, consumer_id: &str, domains: &[String]) -> Result<ConsumerState, EngineError> {
        let lock = self.consumer_lock(consumer_id);
        let _guard = lock.lock().await;
        let mut state = self.store.consumer(consumer_id)?;
        state.whitelist =
            tablecheck_core::appraisal::Whitelist::from_entries(domains).map_err(|e| AdjustmentError::InvalidDomain(e.0))?;
        self.store.put_consumer(consumer_id, &state)?;
        Ok(state)
    }

    pub fn consumer(&self, consumer_id: &str) -> Result<ConsumerState, EngineError> {
        Ok(self.store.consumer(consumer_id)?)
    }

    fn consumer_lock(&self, consumer_id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.consumer_locks.lock().expect("lock table poisoned").entry(consumer_id.to_string()).or_default().clone()
    }

    pub fn timeline(&self, table_id: &str, cfg: &ThresholdConfig) -> Result<TimelineView, EngineError> {
        self.store.table(table_id)?;
        Ok(match self.store.session(table_id)? {
            Some(log) => TimelineView::Available {
                timeline: build_timeline(&log),
                queries: query_stats(&log, cfg),
                pages: page_stats(&log, cfg),
            },
            None => TimelineView::NoData,
        })
    }

    pub async fn alternatives(&self, table_id: &str, cfg: &ThresholdConfig) -> Result<Fetched<Vec<Alternative>>, EngineError> {
        let table = self.store.table(table_id)?;
        let (alternatives, _) = self.externals(&table, cfg).await;
        let options: Vec<String> = table.options.iter().map(|o| o.name.clone()).collect();
        Ok(match alternatives {
            Fetched::Available { value } => Fetched::Available { value: aggregate_alternatives(&options, &value) },
            Fetched::Unavailable { reason } => Fetched::Unavailable { reason },
            Fetched::NotRequested => Fetched::NotRequested,
        })
    }

    pub fn snapshot(&self, table_id: &str, snippet_id: &str) -> Result<ContextSnapshot, EngineError> {
        let snippets = self.store.snippets(table_id)?;
        self.store.table(table_id)?;
        snippets
            .get(&SnippetId::new(snippet_id))
            .and_then(|s| s.context_snapshot.clone())
            .ok_or_else(|| EngineError::UnknownSnippet(snippet_id.to_string()))
    }
}
