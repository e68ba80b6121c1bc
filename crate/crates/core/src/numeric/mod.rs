//! Numerical building blocks shared by the spectral modules.

pub mod fit;
pub mod roots;
pub mod trig;

pub use trig::sqrt_upper;

/// Parse a grid given as `start:stop:step` (inclusive of `stop` up to rounding)
/// or as a single number.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number `{s}` in range `{spec}`: {e}"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !a.is_finite() || !b.is_finite() {
                return Err(format!(
                    "range `{spec}` needs finite bounds and a positive step"
                ));
            }
            if b < a {
                return Err(format!("range `{spec}` has stop < start"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + step * i as f64).collect())
        }
        _ => Err(format!(
            "range `{spec}` must be `start:stop:step` or a single value"
        )),
    }
}

/// Comma-separated list of numbers.
pub fn parse_list(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number `{s}`: {e}"))
        })
        .collect()
}
