//! Number formatting shared by every CSV the crate writes.

/// Nine significant digits, trailing zeros trimmed. Fixed-point for
/// magnitudes in `[1e-4, 1e9)`, scientific otherwise.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(-2.25), "-2.25");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(2.0 / 3.0 * 100.0), "66.6666667");
        assert_eq!(num(123456789.0), "123456789");
        assert_eq!(num(1234567891.0), "1.23456789e9");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(num(0.00012345678912), "0.000123456789");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn rounding_across_a_decade() {
        // Rounds up to the next power of ten before choosing the layout.
        assert_eq!(num(9.9999999999), "10");
        assert_eq!(num(999999999.7), "1e9");
    }

    #[test]
    fn nine_significant_digits_survive() {
        for x in [std::f64::consts::PI, 0.001234567891, 98765.4321012] {
            let back: f64 = num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-9, "{x}");
        }
    }
}
