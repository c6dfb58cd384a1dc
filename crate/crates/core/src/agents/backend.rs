use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{hooks, AgentRole};
use crate::model::StructureKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("no fixture left for {role} (reply {index})")]
    MissingFixture { role: AgentRole, index: usize },
    #[error("fixtures: {0}")]
    Fixtures(String),
    #[error("environment variable `{0}` is not set")]
    MissingApiKey(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed backend response: {0}")]
    BadResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Scripted,
    Remote,
}

/// What an agent is told on its turn.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnPrompt {
    pub role: AgentRole,
    pub schema_id: String,
    pub description: String,
    /// Accepted JSON blocks of earlier turns, in order.
    pub context: Vec<(AgentRole, String)>,
    /// Validation report after a rejected attempt.
    pub feedback: Option<String>,
}

/// Source of agent replies. One value serves one chain run; concurrent runs
/// use separate values.
pub trait AgentBackend: Send {
    fn kind(&self) -> BackendKind;
    fn respond(&mut self, prompt: &TurnPrompt) -> Result<String, BackendError>;
}

/// Canned replies per role, consumed in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptedBackend {
    fixtures: BTreeMap<AgentRole, Vec<String>>,
    cursor: BTreeMap<AgentRole, usize>,
}

impl ScriptedBackend {
    pub fn new(fixtures: BTreeMap<AgentRole, Vec<String>>) -> Self {
        ScriptedBackend {
            fixtures,
            cursor: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(text).map_err(|e| BackendError::Fixtures(e.to_string()))?;
        let mut fixtures = BTreeMap::new();
        for (k, v) in raw {
            let role: AgentRole = k.parse().map_err(BackendError::Fixtures)?;
            if role == AgentRole::Check {
                return Err(BackendError::Fixtures(
                    "Check is evaluated in code and takes no fixtures".into(),
                ));
            }
            fixtures.insert(role, v);
        }
        Ok(ScriptedBackend::new(fixtures))
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| BackendError::Fixtures(format!("{}: {e}", path.display())))?;
        ScriptedBackend::from_json(&text)
    }

    /// Roles on the path for `kind` that have no reply at all.
    pub fn uncovered(&self, kind: StructureKind) -> Vec<AgentRole> {
        AgentRole::ALL
            .into_iter()
            .filter(|r| *r != AgentRole::Check && r.on_path(kind))
            .filter(|r| self.fixtures.get(r).is_none_or(Vec::is_empty))
            .collect()
    }

    pub fn consumed(&self, role: AgentRole) -> usize {
        self.cursor.get(&role).copied().unwrap_or(0)
    }
}

impl AgentBackend for ScriptedBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Scripted
    }

    fn respond(&mut self, prompt: &TurnPrompt) -> Result<String, BackendError> {
        let index = self.consumed(prompt.role);
        let reply = self
            .fixtures
            .get(&prompt.role)
            .and_then(|v| v.get(index))
            .cloned()
            .ok_or(BackendError::MissingFixture {
                role: prompt.role,
                index,
            })?;
        self.cursor.insert(prompt.role, index + 1);
        Ok(reply)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemoteBackendConfig {
    /// Chat-completions style endpoint.
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    /// Extra attempts after a transport failure.
    pub transport_retries: u32,
}

impl Default for RemoteBackendConfig {
    fn default() -> Self {
        RemoteBackendConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: "SETFORGE_API_KEY".into(),
            temperature: 0.7,
            timeout_secs: 60,
            transport_retries: 2,
        }
    }
}

/// Language model behind an HTTP chat endpoint.
pub struct RemoteBackend {
    cfg: RemoteBackendConfig,
    agent: ureq::Agent,
}

const PREAMBLE: &str =
    "You are a member of a film set design team. Stay in your role and answer only for your own duty.";
const COT: &str = "Think step by step: list each wall, the furniture that will stand against it, and where a door or window leaves enough clear width, before writing the JSON.";

impl RemoteBackend {
    pub fn new(cfg: RemoteBackendConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build();
        RemoteBackend { cfg, agent }
    }

    /// System and user messages for a turn.
    pub fn messages(prompt: &TurnPrompt) -> (String, String) {
        let schema = hooks::schema(&prompt.schema_id);
        let mut system = format!(
            "{PREAMBLE}\nYour role: {}. {}\n",
            prompt.role,
            prompt.role.description()
        );
        if prompt.role == AgentRole::DoorWindow {
            system.push_str(COT);
            system.push('\n');
        }
        system.push_str("End your reply with exactly one fenced ```json block that satisfies this JSON schema:\n");
        if let Some(s) = schema {
            let mut bare = s.clone();
            if let Some(o) = bare.as_object_mut() {
                o.remove("examples");
            }
            system.push_str(&bare.to_string());
            system.push('\n');
            if let Some(ex) = s.get("examples").and_then(|e| e.get(0)) {
                system.push_str("Example of a valid block:\n```json\n");
                system.push_str(&ex.to_string());
                system.push_str("\n```\n");
            }
        }
        let mut user = format!("Scene request: {}\n", prompt.description);
        for (role, block) in &prompt.context {
            user.push_str(&format!("{role} decided:\n```json\n{block}\n```\n"));
        }
        if let Some(f) = &prompt.feedback {
            user.push_str(f);
        }
        (system, user)
    }
}

impl AgentBackend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Remote
    }

    fn respond(&mut self, prompt: &TurnPrompt) -> Result<String, BackendError> {
        let key = std::env::var(&self.cfg.api_key_env)
            .map_err(|_| BackendError::MissingApiKey(self.cfg.api_key_env.clone()))?;
        let (system, user) = RemoteBackend::messages(prompt);
        let body = serde_json::json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut last = String::new();
        for attempt in 0..=self.cfg.transport_retries {
            let sent = self
                .agent
                .post(&self.cfg.endpoint)
                .set("Authorization", &format!("Bearer {key}"))
                .send_json(body.clone());
            match sent {
                Ok(resp) => {
                    let v: serde_json::Value =
                        resp.into_json().map_err(|e| BackendError::BadResponse(e.to_string()))?;
                    return v["choices"][0]["message"]["content"]
                        .as_str()
                        .map(str::to_string)
                        .ok_or_else(|| BackendError::BadResponse("no choices[0].message.content".into()));
                }
                Err(ureq::Error::Transport(t)) => {
                    log::warn!("{}: transport failure on attempt {}: {t}", prompt.role, attempt + 1);
                    last = t.to_string();
                }
                Err(e) => return Err(BackendError::Transport(e.to_string())),
            }
        }
        Err(BackendError::Transport(last))
    }
}
