/// Nine significant digits, plain decimal where that stays short and
/// scientific notation otherwise.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let decimals = (8 - e).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(-0.5), "-0.500000000");
        assert_eq!(sig9(123456.789012), "123456.789");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.5e-9), "1.50000000e-9");
        let back: f64 = sig9(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-8);
    }
}
