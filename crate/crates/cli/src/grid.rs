//! Parameter grids: `start:step:stop` (inclusive) or a comma-separated list.

const ENDPOINT_TOL: f64 = 1e-12;

/// Grid points are rounded to this many decimals so that `0:0.05:1`
/// yields `0.15` rather than `0.15000000000000002`.
const DECIMALS: i32 = 10;

fn round(x: f64) -> f64 {
    let scale = 10f64.powi(DECIMALS);
    (x * scale).round() / scale
}

fn number(tok: &str) -> Result<f64, String> {
    let x: f64 = tok
        .trim()
        .parse()
        .map_err(|_| format!("bad number `{}` in grid", tok.trim()))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("grid value `{}` is not finite", tok.trim()))
    }
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => spec.split(',').map(number).collect(),
        3 => {
            let (start, step, stop) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
            if !(step > 0.0) {
                return Err(format!("grid step must be positive, got {step}"));
            }
            if stop < start - ENDPOINT_TOL {
                return Err(format!("grid stop {stop} is below start {start}"));
            }
            let n = ((stop - start) / step + ENDPOINT_TOL).floor() as usize;
            let mut out: Vec<f64> = (0..=n).map(|i| round(start + i as f64 * step)).collect();
            // Include `stop` when the last step lands on it within tolerance.
            if let Some(last) = out.last_mut() {
                if (*last - stop).abs() <= ENDPOINT_TOL.max(1e-9 * step) {
                    *last = stop;
                }
            }
            Ok(out)
        }
        _ => Err(format!("grid `{spec}` must be start:step:stop or a comma list")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_ranges() {
        let g = parse_grid("0:0.05:1").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[3], 0.15);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(parse_grid("1:1:20").unwrap().len(), 20);
        assert_eq!(parse_grid("0:0.3:1").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(parse_grid("0.5:0.1:0.5").unwrap(), vec![0.5]);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_grid("0.1, 0.5,1").unwrap(), vec![0.1, 0.5, 1.0]);
        assert!(parse_grid("0:0:1").is_err());
        assert!(parse_grid("1:0.1:0").is_err());
        assert!(parse_grid("a:1:2").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
