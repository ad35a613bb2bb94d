use std::collections::VecDeque;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::sync::{Permit, Semaphore};

const WINDOW: Duration = Duration::from_secs(60);

/// Caps in-flight requests and, optionally, requests started per minute.
#[derive(Debug)]
pub struct RateLimiter {
    in_flight: Semaphore,
    per_minute: Option<u32>,
    started: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    pub fn new(max_in_flight: usize, per_minute: Option<u32>) -> Self {
        RateLimiter {
            in_flight: Semaphore::new(max_in_flight),
            per_minute,
            started: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks until a request may start; the permit is held for its duration.
    pub fn acquire(&self) -> Permit<'_> {
        let permit = self.in_flight.acquire();
        if let Some(limit) = self.per_minute {
            loop {
                let wait = {
                    let mut started = self.started.lock().unwrap_or_else(|p| p.into_inner());
                    let now = Instant::now();
                    while started.front().is_some_and(|t| now.duration_since(*t) >= WINDOW) {
                        started.pop_front();
                    }
                    if started.len() < limit as usize {
                        started.push_back(now);
                        None
                    } else {
                        Some(WINDOW - now.duration_since(started[0]))
                    }
                };
                match wait {
                    None => break,
                    Some(d) => thread::sleep(d),
                }
            }
        }
        permit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn under_limit_does_not_block() {
        let rl = RateLimiter::new(2, Some(3));
        let start = Instant::now();
        for _ in 0..3 {
            drop(rl.acquire());
        }
        assert!(start.elapsed() < Duration::from_secs(1));
        assert_eq!(rl.started.lock().unwrap().len(), 3);
    }
}
