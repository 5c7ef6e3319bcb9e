//! Number formatting shared by the CSV writers and the CLI.

/// Full double precision: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact rendering with `sig` significant digits and no trailing zeros,
/// e.g. `1.995e-5`, `19.95`, `1`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-3..5).contains(&exp) {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s).to_string()
    } else {
        let s = format!("{:.*e}", sig.saturating_sub(1), x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{}", trim_zeros(mantissa), e)
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
    fn compact_rendering() {
        assert_eq!(fmt_sig(1.995262e-5, 4), "1.995e-5");
        assert_eq!(fmt_sig(1.0, 4), "1");
        assert_eq!(fmt_sig(19.95262, 4), "19.95");
        assert_eq!(fmt_sig(-2.5e7, 4), "-2.5e7");
        assert_eq!(fmt_sig(0.0, 4), "0");
    }

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
