use tablecheck_core::appraisal::{Fetched, OptionSuggestions, SuggestionResponse};

use crate::{get_with_retry, read_fixture, sanitize, ClientError, Connector, HttpRequest, Mode};

/// Reads an autocomplete payload of the form `["query", ["s1", "s2", ...], ...]`.
/// Trailing elements are ignored.
pub fn parse_suggestion_payload(body: &[u8], top_n: usize) -> Result<SuggestionResponse, String> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|e| e.to_string())?;
    let arr = value.as_array().ok_or("expected a JSON array")?;
    let query = arr.first().and_then(|q| q.as_str()).ok_or("missing query string")?;
    let list = arr.get(1).and_then(|l| l.as_array()).ok_or("missing suggestion list")?;
    let suggestions = list.iter().filter_map(|s| s.as_str()).map(sanitize).filter(|s| !s.is_empty()).take(top_n).collect();
    Ok(SuggestionResponse { query: sanitize(query), suggestions })
}

async fn fetch_one(query: &str, connector: &Connector, top_n: usize) -> Result<SuggestionResponse, ClientError> {
    let bad = |reason: String, source_name: String| ClientError::BadPayload { source_name, reason };
    let mut response = match &connector.mode {
        Mode::Fixture(dir) => {
            let path = dir.suggestion_path(query);
            let body = read_fixture(path.clone())?;
            parse_suggestion_payload(&body, top_n).map_err(|r| bad(r, path.display().to_string()))?
        }
        Mode::Live => {
            let mut url = connector.endpoints.suggest.clone();
            url.query_pairs_mut().append_pair("q", query);
            let r = get_with_retry(connector.transport.as_ref(), &HttpRequest::get(url), connector.retry)
                .await
                .map_err(ClientError::ServiceUnavailable)?;
            if r.status != 200 {
                return Err(ClientError::ServiceUnavailable(format!("HTTP {}", r.status)));
            }
            parse_suggestion_payload(&r.body, top_n).map_err(|e| bad(e, connector.endpoints.suggest.to_string()))?
        }
    };
    // The echoed query may be normalized by the service; keep ours.
    response.query = query.to_string();
    Ok(response)
}

/// Autocomplete lists for "<option> vs" and "<option> versus", in that order.
pub async fn fetch_suggestions(
    option_name: &str,
    connector: &Connector,
    top_n: usize,
) -> Result<Vec<SuggestionResponse>, ClientError> {
    let name = option_name.split_whitespace().collect::<Vec<_>>().join(" ");
    if name.is_empty() {
        return Err(ClientError::EmptyOptionName);
    }
    let mut out = Vec::with_capacity(2);
    for joiner in ["vs", "versus"] {
        out.push(fetch_one(&format!("{name} {joiner}"), connector, top_n).await?);
    }
    Ok(out)
}

/// Suggestion lists for every option, or the first failure as an
/// unavailable state.
pub async fn suggestions_for_options(options: &[String], connector: &Connector, top_n: usize) -> Fetched<Vec<OptionSuggestions>> {
    let mut lists = Vec::with_capacity(options.len());
    for option in options {
        match fetch_suggestions(option, connector, top_n).await {
            Ok(responses) => lists.push(OptionSuggestions { option: option.clone(), responses }),
            Err(e) => {
                tracing::warn!(option, error = %e, "suggestions unavailable");
                return Fetched::Unavailable { reason: e.to_string() };
            }
        }
    }
    Fetched::Available { value: lists }
}
