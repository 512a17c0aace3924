//! Number formatting for text output.

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..16).contains(&e) {
        let decimals = (16 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((m, exp)) => format!("{}e{}", trim_zeros(m), exp),
            None => s,
        }
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-9, 12345.678, 6.02e23, 1.0, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x, "{}", fmt_f64(x));
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(3.0), "3");
    }
}
