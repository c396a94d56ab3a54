use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use super::{LmClient, LmError, LmRequest, LmResponse};

type Responder = Arc<dyn Fn(&LmRequest) -> Result<String, LmError> + Send + Sync>;

enum Reply {
    Fixed(String),
    Queue(Mutex<VecDeque<String>>),
    Func(Responder),
}

impl Reply {
    fn answer(&self, req: &LmRequest, label: &str) -> Result<String, LmError> {
        match self {
            Reply::Fixed(text) => Ok(text.clone()),
            Reply::Queue(queue) => queue
                .lock()
                .expect("mock queue poisoned")
                .pop_front()
                .ok_or_else(|| LmError::ScriptExhausted(label.to_string())),
            Reply::Func(f) => f(req),
        }
    }
}

/// Deterministic scripted backend.
///
/// Three modes, all of which record every request:
/// - an ordered queue of replies ([`MockLm::scripted`]);
/// - a routing table keyed by prompt substrings ([`MockLm::router`] and the
///   `route*` builders), first match wins;
/// - a closure ([`MockLm::responder`]).
pub struct MockLm {
    routes: Vec<(String, Reply)>,
    fallback: Option<Reply>,
    requests: Mutex<Vec<LmRequest>>,
}

impl MockLm {
    pub fn scripted<I, S>(replies: I) -> MockLm
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MockLm {
            routes: Vec::new(),
            fallback: Some(Reply::Queue(Mutex::new(replies.into_iter().map(Into::into).collect()))),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn router() -> MockLm {
        MockLm {
            routes: Vec::new(),
            fallback: None,
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn responder(f: impl Fn(&LmRequest) -> Result<String, LmError> + Send + Sync + 'static) -> MockLm {
        MockLm {
            routes: Vec::new(),
            fallback: Some(Reply::Func(Arc::new(f))),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Always answer `text` when the prompt contains `needle`.
    pub fn route(mut self, needle: impl Into<String>, text: impl Into<String>) -> MockLm {
        self.routes.push((needle.into(), Reply::Fixed(text.into())));
        self
    }

    /// Answer from an ordered queue when the prompt contains `needle`.
    pub fn route_queue<I, S>(mut self, needle: impl Into<String>, replies: I) -> MockLm
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let queue = replies.into_iter().map(Into::into).collect();
        self.routes.push((needle.into(), Reply::Queue(Mutex::new(queue))));
        self
    }

    pub fn route_with(
        mut self,
        needle: impl Into<String>,
        f: impl Fn(&LmRequest) -> Result<String, LmError> + Send + Sync + 'static,
    ) -> MockLm {
        self.routes.push((needle.into(), Reply::Func(Arc::new(f))));
        self
    }

    /// Delegate matching prompts to another client.
    pub fn route_client(self, needle: impl Into<String>, client: Arc<dyn LmClient>) -> MockLm {
        self.route_with(needle, move |req| client.complete(req).map(|r| r.text))
    }

    pub fn fallback_with(
        mut self,
        f: impl Fn(&LmRequest) -> Result<String, LmError> + Send + Sync + 'static,
    ) -> MockLm {
        self.fallback = Some(Reply::Func(Arc::new(f)));
        self
    }

    pub fn requests(&self) -> Vec<LmRequest> {
        self.requests.lock().expect("mock log poisoned").clone()
    }

    pub fn call_count(&self) -> usize {
        self.requests.lock().expect("mock log poisoned").len()
    }

    /// Number of recorded requests whose prompt contains `needle`.
    pub fn calls_matching(&self, needle: &str) -> usize {
        self.requests
            .lock()
            .expect("mock log poisoned")
            .iter()
            .filter(|r| r.prompt.contains(needle))
            .count()
    }
}

impl LmClient for MockLm {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        self.requests.lock().expect("mock log poisoned").push(req.clone());
        let haystack = |needle: &str| {
            req.prompt.contains(needle) || req.system.as_deref().is_some_and(|s| s.contains(needle))
        };
        let text = match self.routes.iter().find(|(needle, _)| haystack(needle)) {
            Some((needle, reply)) => reply.answer(req, needle)?,
            None => match &self.fallback {
                Some(reply) => reply.answer(req, "queue")?,
                None => return Err(LmError::ScriptExhausted("no route matches the prompt".into())),
            },
        };
        Ok(LmResponse::text(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_pops_in_order_then_exhausts() {
        let lm = MockLm::scripted(["ok"]);
        assert_eq!(lm.complete(&LmRequest::new("a")).unwrap().text, "ok");
        assert!(matches!(lm.complete(&LmRequest::new("b")), Err(LmError::ScriptExhausted(_))));
        assert_eq!(lm.call_count(), 2);
    }

    #[test]
    fn routing_by_substring() {
        let lm = MockLm::router()
            .route("extract the common workflows", "## x: y\nclick('1')\nclick('2')")
            .route_queue("Status", ["Status: success", "Status: failure"]);
        let r = lm.complete(&LmRequest::new("please extract the common workflows now")).unwrap();
        assert!(r.text.starts_with("## x"));
        assert_eq!(lm.complete(&LmRequest::new("Status?")).unwrap().text, "Status: success");
        assert_eq!(lm.complete(&LmRequest::new("Status?")).unwrap().text, "Status: failure");
        assert!(lm.complete(&LmRequest::new("unrelated")).is_err());
        assert_eq!(lm.calls_matching("Status"), 2);
    }

    #[test]
    fn identical_sequences_give_identical_replies() {
        let run = || {
            let lm = MockLm::scripted(["a", "b", "c"]);
            (0..3).map(|i| lm.complete(&LmRequest::new(i.to_string())).unwrap().text).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
