//! Rewrite backend that posts prompts to an HTTP endpoint.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::rules::CleaningRule;
use super::{BackendError, RewriteBackend};

#[derive(Serialize)]
struct RewriteRequest<'a> {
    rule_id: u8,
    prompt: &'a str,
    sentence: &'a str,
    temperature: f64,
}

#[derive(Deserialize)]
struct RewriteResponse {
    rewritten: String,
}

/// POSTs `{rule_id, prompt, sentence, temperature: 0}` and expects
/// `{rewritten}`. Transport errors, 429 and 5xx are retried.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    endpoint: String,
    token: Option<String>,
    retries: u32,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>, token: Option<String>, timeout: Duration, retries: u32) -> Self {
        Self {
            endpoint: endpoint.into(),
            token,
            retries,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, body: &RewriteRequest<'_>) -> Result<String, (bool, String)> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.set("Authorization", &format!("Bearer {t}"));
        }
        match req.send_json(body) {
            Ok(resp) => resp
                .into_json::<RewriteResponse>()
                .map(|r| r.rewritten)
                .map_err(|e| (false, format!("bad response body: {e}"))),
            Err(ureq::Error::Status(code, _)) => Err((code == 429 || code >= 500, format!("HTTP status {code}"))),
            Err(ureq::Error::Transport(t)) => Err((true, t.to_string())),
        }
    }
}

impl RewriteBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn rewrite(&self, rule: &CleaningRule, sentence: &str) -> Result<String, BackendError> {
        let prompt = rule.prompt(sentence);
        let body = RewriteRequest {
            rule_id: rule.id,
            prompt: &prompt,
            sentence,
            temperature: 0.0,
        };
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(s) => return Ok(s),
                Err((retryable, msg)) => {
                    if !retryable || attempt >= self.retries {
                        return Err(BackendError(format!(
                            "{} after {} attempt(s): {msg}",
                            self.endpoint,
                            attempt + 1
                        )));
                    }
                    attempt += 1;
                    std::thread::sleep(Duration::from_millis(50 * u64::from(attempt)));
                }
            }
        }
    }
}
