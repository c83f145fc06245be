/// Rounds to 9 significant decimal digits; the shortest representation of the result is
/// what gets printed in reports.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_nine_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333);
        assert_eq!(round_sig(123456789.123), 123456789.0);
        assert_eq!(round_sig(-2.5e-12), -2.5e-12);
        assert_eq!(round_sig(0.0), 0.0);
    }
}
