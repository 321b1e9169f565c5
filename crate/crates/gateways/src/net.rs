//! Retry policy for live transports: two retries with 0.5s and 2s
//! backoff, on connection errors and 5xx only.

use std::time::Duration;

use crate::error::GatewayError;

const BACKOFF: [Duration; 2] = [Duration::from_millis(500), Duration::from_millis(2000)];

pub(crate) fn retryable(err: &GatewayError) -> bool {
    match err {
        GatewayError::Transport { status, .. } => match status {
            Some(code) => *code >= 500,
            None => true,
        },
        _ => false,
    }
}

pub(crate) fn with_retries<T>(
    mut attempt: impl FnMut() -> Result<T, GatewayError>,
) -> Result<T, GatewayError> {
    let mut last = match attempt() {
        Ok(v) => return Ok(v),
        Err(e) => e,
    };
    for delay in BACKOFF {
        if !retryable(&last) {
            return Err(last);
        }
        std::thread::sleep(delay);
        match attempt() {
            Ok(v) => return Ok(v),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_errors_are_not_retried() {
        let err = GatewayError::Transport {
            status: Some(404),
            detail: "missing".into(),
        };
        assert!(!retryable(&err));
        let err = GatewayError::Transport {
            status: Some(503),
            detail: "busy".into(),
        };
        assert!(retryable(&err));
        assert!(!retryable(&GatewayError::EmptyQuery));
    }
}
