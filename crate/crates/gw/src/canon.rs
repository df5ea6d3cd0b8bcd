//! Canonical text forms shared by trace writers and the event log, so that
//! repeated runs with the same inputs produce byte-identical files.

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::float17;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.powi(-40), -1234.5678e9, 0.0] {
            let s = float17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
