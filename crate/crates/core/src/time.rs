//! Simulated time.
//!
//! All clocks in this crate are virtual. [`SimTime`] counts nanoseconds since
//! genesis in a `u64`, which covers a little over 584 years of simulated time
//! with exact integer arithmetic.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

const NANOS_PER_SEC: u64 = 1_000_000_000;

/// A point in (or span of) simulated time, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(nanos: u64) -> Self {
        SimTime(nanos)
    }

    pub const fn from_millis(millis: u64) -> Self {
        SimTime(millis * 1_000_000)
    }

    pub const fn from_secs(secs: u64) -> Self {
        SimTime(secs * NANOS_PER_SEC)
    }

    pub const fn from_mins(mins: u64) -> Self {
        SimTime::from_secs(mins * 60)
    }

    /// Rounds to the nearest nanosecond. Negative and non-finite inputs clamp
    /// to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if !secs.is_finite() || secs <= 0.0 {
            return SimTime::ZERO;
        }
        SimTime((secs * NANOS_PER_SEC as f64).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    /// Whole seconds, truncated. This is the resolution of ledger timestamps.
    pub const fn as_secs(self) -> u64 {
        self.0 / NANOS_PER_SEC
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC as f64
    }

    pub fn checked_sub(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_sub(rhs.0).map(SimTime)
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_mul(self, factor: u64) -> Option<SimTime> {
        self.0.checked_mul(factor).map(SimTime)
    }

    /// Index of the period of length `period` containing this instant.
    pub fn period_index(self, period: SimTime) -> u64 {
        assert!(period.0 > 0, "period must be positive");
        self.0 / period.0
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_add(rhs.0).expect("simulated time overflow"))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_sub(rhs.0).expect("simulated time underflow"))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}s", self.0 / NANOS_PER_SEC, self.0 % NANOS_PER_SEC)
    }
}

/// One calendar year of 365 days.
pub const YEAR: SimTime = SimTime::from_secs(365 * 24 * 60 * 60);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_holds_105120_five_minute_periods() {
        assert_eq!(YEAR.as_nanos() / SimTime::from_mins(5).as_nanos(), 105_120);
        assert_eq!(YEAR.as_nanos() % SimTime::from_mins(5).as_nanos(), 0);
    }

    #[test]
    fn secs_f64_round_trip() {
        assert_eq!(SimTime::from_secs_f64(0.002421), SimTime::from_nanos(2_421_000));
        assert_eq!(SimTime::from_secs_f64(-1.0), SimTime::ZERO);
        assert_eq!(SimTime::from_secs(3).as_secs_f64(), 3.0);
    }

    #[test]
    fn period_index_floors() {
        let t = SimTime::from_secs(300);
        assert_eq!(SimTime::from_secs(299).period_index(t), 0);
        assert_eq!(SimTime::from_secs(300).period_index(t), 1);
    }

    #[test]
    fn display_is_seconds() {
        assert_eq!(SimTime::from_millis(1500).to_string(), "1.500000000s");
    }
}
