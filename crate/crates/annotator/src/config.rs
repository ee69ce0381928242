use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::mock::MockDescriber;
use crate::transport::LineDescriber;
use crate::{AnnotateError, DescriberBackend};

/// Where descriptions come from.
///
/// Parsed from a string: `mock`, `tcp://host:port`, or anything else, which
/// is run as a shell command speaking the protocol on stdin/stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Endpoint {
    Mock,
    Tcp(String),
    Command(String),
}

impl From<String> for Endpoint {
    fn from(s: String) -> Self {
        let t = s.trim();
        if t.is_empty() || t == "mock" {
            Endpoint::Mock
        } else if let Some(addr) = t.strip_prefix("tcp://") {
            Endpoint::Tcp(addr.to_string())
        } else {
            Endpoint::Command(t.to_string())
        }
    }
}

impl From<Endpoint> for String {
    fn from(e: Endpoint) -> String {
        match e {
            Endpoint::Mock => "mock".into(),
            Endpoint::Tcp(a) => format!("tcp://{a}"),
            Endpoint::Command(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescriberConfig {
    pub endpoint: Endpoint,
    /// Image-text embedding width.
    pub d1: usize,
    /// Sentence embedding width.
    pub d2: usize,
    pub max_batch: usize,
    pub timeout_s: f64,
    /// Mock only: embedding seed.
    pub mock_seed: u64,
    /// Mock only: simulated service time per item, seconds.
    pub mock_service_s: f64,
}

impl Default for DescriberConfig {
    fn default() -> Self {
        Self {
            endpoint: Endpoint::Mock,
            d1: 64,
            d2: 64,
            max_batch: 64,
            timeout_s: 30.0,
            mock_seed: 0,
            mock_service_s: 0.0,
        }
    }
}

impl DescriberConfig {
    pub fn validate(&self) -> Result<(), AnnotateError> {
        if self.d1 == 0 || self.d2 == 0 {
            return Err(AnnotateError::Config("embedding dims must be positive".into()));
        }
        if self.max_batch == 0 {
            return Err(AnnotateError::Config("max_batch must be at least 1".into()));
        }
        if !(self.timeout_s > 0.0) {
            return Err(AnnotateError::Config("timeout_s must be positive".into()));
        }
        if !(self.mock_service_s >= 0.0) {
            return Err(AnnotateError::Config("mock_service_s must be non-negative".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    pub fn connect(&self) -> Result<Box<dyn DescriberBackend>, AnnotateError> {
        self.validate()?;
        Ok(match &self.endpoint {
            Endpoint::Mock => Box::new(
                MockDescriber::new(self.mock_seed, self.d1, self.d2)
                    .with_service_time(Duration::from_secs_f64(self.mock_service_s)),
            ),
            Endpoint::Tcp(addr) => Box::new(LineDescriber::connect_tcp(addr, self.timeout())?),
            Endpoint::Command(cmd) => Box::new(LineDescriber::spawn(cmd, self.timeout())?),
        })
    }
}
