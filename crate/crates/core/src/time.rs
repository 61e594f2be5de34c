//! Calendar bucketing for report aggregation, on integer math only so the
//! same keys come out on every platform.

use alloc::format;
use alloc::string::String;

use crate::model::TimestampMs;

/// Aggregation granularity for report series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Bucket {
    #[default]
    Monthly,
    Weekly,
    Daily,
}

impl Bucket {
    /// Deterministic UTC bucket key: `2024-03` (monthly), the Monday's date
    /// (weekly), or the date itself (daily).
    pub fn key(self, ts: TimestampMs) -> String {
        let days = ts.as_ms().div_euclid(86_400_000);
        match self {
            Bucket::Monthly => {
                let (y, m, _) = civil_from_days(days);
                format!("{y:04}-{m:02}")
            }
            Bucket::Weekly => {
                // 1970-01-01 was a Thursday; Monday-aligned weeks.
                let monday = days - (days + 3).rem_euclid(7);
                let (y, m, d) = civil_from_days(monday);
                format!("{y:04}-{m:02}-{d:02}")
            }
            Bucket::Daily => {
                let (y, m, d) = civil_from_days(days);
                format!("{y:04}-{m:02}-{d:02}")
            }
        }
    }
}

/// Proleptic Gregorian date from days since 1970-01-01.
pub fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// Days since 1970-01-01 for a proleptic Gregorian date.
pub fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y.rem_euclid(400);
    let mp = if m > 2 { m - 3 } else { m + 9 } as i64;
    let doy = (153 * mp + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Millisecond timestamp of a UTC civil date at midnight.
pub fn ms_at_midnight(y: i64, m: u32, d: u32) -> TimestampMs {
    TimestampMs::new(days_from_civil(y, m, d) * 86_400_000)
}
