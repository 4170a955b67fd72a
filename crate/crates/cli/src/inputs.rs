//! Parsers for command-line values.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use tauber::rates::DerivedKind;
use tauber::{BoundarySampler, OperatorSpec, RateFunction, Regime, Sequence};

/// A float, or `pi`, `pi/<x>`, `<x>pi`.
pub fn float(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = if t == "pi" {
        PI
    } else if let Some(d) = t.strip_prefix("pi/") {
        PI / d.parse::<f64>().map_err(|e| format!("bad number '{s}': {e}"))?
    } else if let Some(m) = t.strip_suffix("pi") {
        PI * m.trim_end_matches('*').parse::<f64>().map_err(|e| format!("bad number '{s}': {e}"))?
    } else {
        t.parse::<f64>().map_err(|e| format!("bad number '{s}': {e}"))?
    };
    if v.is_nan() {
        return Err(format!("'{s}' is not a number"));
    }
    Ok(v)
}

pub fn float_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(float).collect()
}

/// `a:b` with `a ≤ b`.
pub fn window(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("window '{s}' must look like a:b"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad window start '{a}': {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad window end '{b}': {e}"))?;
    if a > b {
        return Err(format!("window '{s}' is empty"));
    }
    Ok((a, b))
}

/// `poly:C,alpha`, `exp:alpha`, `const:v`, `floor`, inline JSON, or `@file.json`.
pub fn rate(s: &str) -> Result<RateFunction, String> {
    let t = s.trim();
    if let Some(path) = t.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read rate file {path}: {e}"))?;
        return serde_json::from_str(&text).map_err(|e| format!("rate file {path}: {e}"));
    }
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| format!("rate JSON: {e}"));
    }
    let (name, args) = t.split_once(':').unwrap_or((t, ""));
    let nums = float_list(args)?;
    let arity = |n: usize| {
        if nums.len() == n {
            Ok(())
        } else {
            Err(format!("rate '{name}' takes {n} parameter(s), got {}", nums.len()))
        }
    };
    let r = match name {
        "poly" => {
            arity(2)?;
            RateFunction::poly(nums[0], nums[1])
        }
        "exp" => {
            arity(1)?;
            RateFunction::exp(nums[0])
        }
        "const" => {
            arity(1)?;
            RateFunction::constant(nums[0])
        }
        "floor" => {
            arity(0)?;
            Ok(RateFunction::reciprocal_floor())
        }
        _ => return Err(format!("unknown rate '{name}' (expected poly:C,alpha | exp:alpha | const:v | floor | JSON | @file)")),
    };
    r.map_err(|e| e.to_string())
}

/// `mlog` or `mk:K`.
pub fn kind(s: &str) -> Result<DerivedKind, String> {
    match s.trim() {
        "mlog" => Ok(DerivedKind::MLog),
        t => match t.strip_prefix("mk:").map(str::parse::<u32>) {
            Some(Ok(k)) if k >= 1 => Ok(DerivedKind::MK(k)),
            _ => Err(format!("kind '{s}' must be mlog or mk:K with K >= 1")),
        },
    }
}

/// `smooth` or `ck:K`.
pub fn regime(s: &str) -> Result<Regime, String> {
    match s.trim() {
        "smooth" => Ok(Regime::Smooth),
        t => match t.strip_prefix("ck:").map(str::parse::<u32>) {
            Some(Ok(k)) if k >= 1 => Ok(Regime::Ck(k)),
            _ => Err(format!("regime '{s}' must be smooth or ck:K with K >= 1")),
        },
    }
}

pub fn operator(path: &Path) -> Result<OperatorSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read operator file {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("operator file {}: {e}", path.display()))
}

/// Built-in test sequences with their boundary functions.
pub fn sequence(s: &str) -> Result<(Sequence, BoundarySampler), String> {
    let one = Complex64::new(1.0, 0.0);
    let unit = |th: f64| Complex64::from_polar(1.0, th);
    let (name, args) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
    Ok(match name {
        "ones" => (Sequence::ones(), BoundarySampler::new(tauber::kernels::Shape::Vector(1), move |th| vec![(unit(th) - one).inv()])),
        "alternating" => (Sequence::alternating(), BoundarySampler::alternating()),
        "impulse" => (Sequence::impulse(), BoundarySampler::new(tauber::kernels::Shape::Vector(1), move |th| vec![unit(-th)])),
        "zeros" => (Sequence::zeros(), BoundarySampler::zero()),
        "geometric" => {
            let v = float_list(args)?;
            let mu = match v.as_slice() {
                [re] => Complex64::new(*re, 0.0),
                [re, im] => Complex64::new(*re, *im),
                _ => return Err("geometric takes geometric:re or geometric:re,im".into()),
            };
            if !(mu.norm() < 1.0) {
                return Err(format!("geometric ratio {mu} must satisfy |mu| < 1"));
            }
            (Sequence::geometric(mu), BoundarySampler::geometric(mu))
        }
        _ => return Err(format!("unknown sequence '{s}' (expected ones | alternating | impulse | zeros | geometric:re,im)")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values() {
        assert_eq!(float("pi/4").unwrap(), PI / 4.0);
        assert_eq!(float("2pi").unwrap(), 2.0 * PI);
        assert_eq!(float_list("1, 2,pi").unwrap(), vec![1.0, 2.0, PI]);
        assert!(float("x").is_err());
        assert_eq!(window("50:100").unwrap(), (50, 100));
        assert!(window("100:50").is_err());
        assert_eq!(kind("mk:3").unwrap(), DerivedKind::MK(3));
        assert!(kind("mk:0").is_err());
        assert_eq!(regime("ck:2").unwrap(), Regime::Ck(2));
    }

    #[test]
    fn parses_rates() {
        assert_eq!(rate("poly:1,1").unwrap().eval(PI).unwrap(), 1.0);
        assert!(rate("poly:1").is_err());
        assert!(rate("poly:0.5,1").is_err());
        let j = rate(r#"{"variant":"tabulated","samples":[[3.0,1.2],[1.5,3.0]]}"#).unwrap();
        assert_eq!(j.eval(3.0).unwrap(), 1.2);
        assert!(rate("nope:1").is_err());
    }

    #[test]
    fn parses_sequences() {
        assert!(sequence("geometric:0.5,0.1").is_ok());
        assert!(sequence("geometric:1,0").is_err());
        assert!(sequence("alternating").is_ok());
        assert!(sequence("fib").is_err());
    }
}
