use std::collections::VecDeque;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatModel, Completion, GatewayError, SamplingConfig};

/// Always answers with the same text.
#[derive(Debug, Clone)]
pub struct StubModel {
    pub reply: String,
}

impl StubModel {
    pub fn new(reply: &str) -> Self {
        StubModel { reply: reply.to_string() }
    }
}

impl ChatModel for StubModel {
    fn complete(&self, _prompt: &str, _cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        Ok(Completion::canned(&self.reply))
    }
}

/// Answers with queued replies in order; errors once exhausted.
#[derive(Debug, Default)]
pub struct SequenceModel {
    replies: Mutex<VecDeque<String>>,
    prompts: Mutex<Vec<String>>,
}

impl SequenceModel {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(replies: I) -> Self {
        SequenceModel { replies: Mutex::new(replies.into_iter().map(Into::into).collect()), prompts: Mutex::default() }
    }

    /// Prompts received so far.
    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }
}

impl ChatModel for SequenceModel {
    fn complete(&self, prompt: &str, _cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        self.prompts.lock().unwrap().push(prompt.to_string());
        let next = self.replies.lock().unwrap().pop_front();
        next.map(|r| Completion::canned(&r)).ok_or_else(|| GatewayError::Script("sequence exhausted".into()))
    }
}

/// A rule fires when the prompt contains every `when` fragment; its replies
/// are served in order and the last one repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    pub when: Vec<String>,
    pub replies: Vec<String>,
}

/// Content-addressed scripted model: the first matching rule answers.
#[derive(Debug)]
pub struct ScriptedModel {
    rules: Vec<ScriptRule>,
    served: Mutex<Vec<usize>>,
}

impl ScriptedModel {
    pub fn new(rules: Vec<ScriptRule>) -> Self {
        let served = Mutex::new(vec![0; rules.len()]);
        ScriptedModel { rules, served }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::new(serde_json::from_str(text)?))
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&self, prompt: &str, _cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        let idx = self
            .rules
            .iter()
            .position(|r| r.when.iter().all(|w| prompt.contains(w.as_str())))
            .ok_or_else(|| GatewayError::Script(format!("no rule matches prompt starting {:?}", prompt.chars().take(80).collect::<String>())))?;
        let rule = &self.rules[idx];
        let mut served = self.served.lock().unwrap();
        let n = served[idx];
        served[idx] += 1;
        let reply = rule
            .replies
            .get(n)
            .or_else(|| rule.replies.last())
            .ok_or_else(|| GatewayError::Script(format!("rule {idx} has no replies")))?;
        Ok(Completion::canned(reply))
    }
}
