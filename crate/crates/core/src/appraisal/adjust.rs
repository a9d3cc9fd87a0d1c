use serde::{Deserialize, Serialize};

use super::report::{assemble_report, AppraisalError, AppraisalInput, AppraisalReport, ConsumerState};
use crate::model::ThresholdConfig;

/// A consumer's change to their appraisal settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Adjustment {
    AddTrusted { domain: String },
    RemoveTrusted { domain: String },
    Dismiss { issue_id: String },
    Reopen { issue_id: String },
    SetThreshold { field: String, value: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdjustmentError {
    #[error("unknown issue {0:?}")]
    UnknownIssue(String),
    #[error("not a domain name: {0:?}")]
    InvalidDomain(String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error(transparent)]
    Appraisal(#[from] AppraisalError),
}

/// Sets one named threshold, validating the resulting configuration.
pub fn set_threshold(cfg: &ThresholdConfig, field: &str, value: i64) -> Result<ThresholdConfig, AdjustmentError> {
    let mut next = cfg.clone();
    let unsigned = |v: i64| -> Result<u32, AdjustmentError> {
        u32::try_from(v).map_err(|_| AdjustmentError::InvalidThreshold(format!("{field} must be between 0 and {}", u32::MAX)))
    };
    match field {
        "idle_threshold_secs" => next.idle_threshold_secs = unsigned(value)? as u64,
        "staleness_threshold_months" => next.staleness_threshold_months = unsigned(value)?,
        "diversity_min_domains" => next.diversity_min_domains = unsigned(value)?,
        "badge_yellow_at" => next.badge_yellow_at = unsigned(value)?,
        "badge_red_at" => next.badge_red_at = unsigned(value)?,
        "suggestion_top_n" => next.suggestion_top_n = unsigned(value)?,
        "version_vicinity" => next.version_vicinity = unsigned(value)?,
        "low_popularity_below" => next.low_popularity_below = value,
        other => return Err(AdjustmentError::InvalidThreshold(format!("unknown field {other:?}"))),
    }
    next.validate().map_err(|e| AdjustmentError::InvalidThreshold(e.to_string()))?;
    Ok(next)
}

/// Applies `adjustment` to the consumer state of `input` and returns the new
/// state together with the report recomputed under it. Issue ids are checked
/// against the report for the current state.
pub fn apply_adjustment(
    input: &AppraisalInput,
    adjustment: &Adjustment,
) -> Result<(ConsumerState, AppraisalReport), AdjustmentError> {
    let mut state = input.consumer.clone();
    match adjustment {
        Adjustment::AddTrusted { domain } => {
            state.whitelist.add(domain).map_err(|e| AdjustmentError::InvalidDomain(e.0))?;
        }
        Adjustment::RemoveTrusted { domain } => {
            state.whitelist.remove(domain).map_err(|e| AdjustmentError::InvalidDomain(e.0))?;
        }
        Adjustment::Dismiss { issue_id } => {
            let current = assemble_report(input)?;
            if current.issue(issue_id).is_none() {
                return Err(AdjustmentError::UnknownIssue(issue_id.clone()));
            }
            state.dismissed.insert(issue_id.clone());
        }
        Adjustment::Reopen { issue_id } => {
            if !state.dismissed.remove(issue_id) {
                return Err(AdjustmentError::UnknownIssue(issue_id.clone()));
            }
        }
        Adjustment::SetThreshold { field, value } => {
            state.thresholds = set_threshold(&state.thresholds, field, *value)?;
        }
    }
    let report = assemble_report(&AppraisalInput { consumer: &state, ..*input })?;
    Ok((state, report))
}
