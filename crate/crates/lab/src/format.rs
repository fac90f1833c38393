//! Number formatting and the compact list/range syntax of the CLI.

use crate::error::{LabError, LabResult};

/// Significant digits of every number written by this crate.
pub const SIG_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits, shortest form (`%.12g` style).
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{rounded:.decimals$}")).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("round trip")
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `start:stop:step` (stop included when within half a step) or a single
/// value.
pub fn parse_range(text: &str) -> LabResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> LabResult<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| LabError::Config(format!("invalid number '{s}' in range '{text}'")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(LabError::Config(format!("range '{text}' needs step > 0 and stop >= start")));
            }
            let count = ((stop - start) / step + 0.5).floor() as usize + 1;
            Ok((0..count).map(|k| round_sig(start + k as f64 * step)).collect())
        }
        _ => Err(LabError::Config(format!("range '{text}' is not start:stop:step"))),
    }
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> LabResult<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| LabError::Config(format!("invalid list element '{s}' in '{text}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig_examples() {
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(0.25), "0.25");
        assert_eq!(sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(sig(1.5e-7), "1.5e-7");
        assert_eq!(sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig(100.0), "100");
        assert_eq!(sig(f64::NAN), "NaN");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2.2").unwrap(), vec![2.2]);
        let r = parse_range("0.1:2.0:0.1").unwrap();
        assert_eq!(r.len(), 20);
        assert_eq!(r[19], 2.0);
        assert_eq!(r[2], 0.3);
        // Stop within half a step is included, beyond it is not.
        assert_eq!(parse_range("0:1.04:0.1").unwrap().len(), 11);
        assert_eq!(parse_range("0:1.06:0.1").unwrap().len(), 12);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("a:1:0.1").is_err());
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<i64>("1,3, 5").unwrap(), vec![1, 3, 5]);
        assert!(parse_list::<usize>("1,x").is_err());
    }

    proptest! {
        #[test]
        fn sig_round_trips_to_12_digits(x in -1e300f64..1e300) {
            let y: f64 = sig(x).parse().unwrap();
            prop_assert!((x - y).abs() <= 1e-11 * x.abs());
        }
    }
}
