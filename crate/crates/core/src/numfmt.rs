//! Locale-free number formatting and NaN-safe JSON serialization.

use serde::Serializer;

/// C-style `%.17g`: 17 significant digits, trailing zeros trimmed.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mant), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Finite floats serialize as numbers, non-finite ones as `"nan"` / `"inf"` / `"-inf"`.
pub fn f64_or_sentinel<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&g17(*x))
    }
}

pub fn opt_f64_or_sentinel<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => f64_or_sentinel(v, s),
        None => s.serialize_none(),
    }
}

pub fn vec_f64_or_sentinel<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element(&g17(*x))?;
        }
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::g17;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(-2.5), "-2.5");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(123456.789), "123456.789");
        assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(g17(f64::NAN), "nan");
        assert_eq!(g17(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 6.02e23, 1e-300, -7.25e-9] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
