/// Formats `x` with 12 significant digits, `%.12g` style: fixed notation for
/// moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_owned()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(0.1 + 0.2), "0.3");
        assert_eq!(sig12(0.6000000000000001), "0.6");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-2.5e-7), "-2.5e-7");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig12(100.0), "100");
        assert_eq!(sig12(0.0001), "0.0001");
    }

    #[test]
    fn lattice_values_round_trip() {
        // Accumulated rounding on lattice values disappears at 12 digits.
        let mut p = 0.5_f64;
        for _ in 0..37 {
            p += 0.01;
        }
        assert_eq!(sig12(p), "0.87");
        assert_eq!(sig12(p).parse::<f64>().unwrap(), 0.87);
    }
}
