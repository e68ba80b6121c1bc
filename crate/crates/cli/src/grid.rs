//! Parsing of `a:b:step` ranges and comma lists.

use std::f64::consts::PI;

/// Parse `a:b:step` into `a, a+step, …` up to and including `b` (within
/// round-off of the step).
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("expected a:b:step, got `{text}`"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) {
        return Err(format!("non-finite value in `{text}`"));
    }
    if step <= 0.0 || b < a {
        return Err(format!("need step > 0 and b ≥ a in `{text}`"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

/// Quasimomentum grid: either a range or a point count `n`, giving `n`
/// equispaced points in `[−π, π)`.
pub fn parse_tau_grid(text: &str) -> Result<Vec<f64>, String> {
    if text.contains(':') {
        return parse_range(text);
    }
    let n: usize = text
        .trim()
        .parse()
        .map_err(|e| format!("`{text}`: expected a:b:step or a point count ({e})"))?;
    if n == 0 {
        return Err("tau grid needs at least one point".into());
    }
    Ok((0..n)
        .map(|i| -PI + 2.0 * PI * i as f64 / n as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_includes_end() {
        let r = parse_range("0.1:100:0.5").unwrap();
        assert_eq!(r.len(), 200);
        assert_eq!(r[0], 0.1);
        assert!((r[199] - 99.6).abs() < 1e-12);
        assert_eq!(parse_range("0:1:0.1").unwrap().len(), 11);
    }

    #[test]
    fn range_rejects_bad_input() {
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("2:1:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:x:1").is_err());
    }

    #[test]
    fn tau_count() {
        let t = parse_tau_grid("4").unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t[0], -PI);
        assert!((t[2]).abs() < 1e-15);
        assert!(parse_tau_grid("0").is_err());
    }
}
