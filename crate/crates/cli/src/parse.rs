//! Grid, channel and generator literals.

use hyperq::channel_algebra::{DiagonalChannel, GeneratorTriple};
use hyperq::inequality_lab::ChannelFamily;

/// Slack on the exclusive stop of a `start:stop:step` grid.
pub const GRID_SLACK: f64 = 1e-12;

fn number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("`{t}` is not a finite number"))
}

pub fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}

/// `start:stop:step` (stop exclusive) or a single value.
pub fn grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![number(single)?]),
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0) {
                return Err(format!("grid `{s}`: step must be positive"));
            }
            let mut out = Vec::new();
            for k in 0.. {
                let x = start + k as f64 * step;
                if x >= stop - GRID_SLACK {
                    break;
                }
                out.push(x);
            }
            if out.is_empty() {
                return Err(format!("grid `{s}` is empty"));
            }
            Ok(out)
        }
        _ => Err(format!("malformed grid `{s}`; expected start:stop:step or a number")),
    }
}

/// `depolarizing(l)`, `phase-damping(l)`, `two-pauli(l)` or `diag(l1,l2,l3)`.
pub fn channel(s: &str) -> Result<DiagonalChannel, String> {
    let t = s.trim();
    let (name, rest) = t.split_once('(').ok_or_else(|| format!("malformed channel literal `{t}`"))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("malformed channel literal `{t}`: missing `)`"))?;
    let args = numbers(args)?;
    let one = |args: &[f64]| -> Result<f64, String> {
        match args {
            [x] => Ok(*x),
            _ => Err(format!("`{name}` takes one parameter")),
        }
    };
    let c = match name.trim() {
        "depolarizing" => DiagonalChannel::depolarizing(one(&args)?),
        "phase-damping" => DiagonalChannel::phase_damping(one(&args)?),
        "two-pauli" => DiagonalChannel::two_pauli(one(&args)?),
        "diag" => match args.as_slice() {
            [a, b, c] => Ok(DiagonalChannel::new([*a, *b, *c])),
            _ => return Err("`diag` takes three parameters".into()),
        },
        other => return Err(format!("unknown channel `{other}`")),
    };
    c.map_err(|e| e.to_string())
}

/// Semicolon-separated channel literals, one per site.
pub fn channels(s: &str) -> Result<Vec<DiagonalChannel>, String> {
    s.split(';').map(channel).collect()
}

/// `h1,h2,h3;h1,h2,h3;...`, one triple per site.
pub fn generators(s: &str) -> Result<Vec<GeneratorTriple>, String> {
    s.split(';')
        .map(|site| match numbers(site)?.as_slice() {
            [a, b, c] => Ok(GeneratorTriple::new([*a, *b, *c])),
            _ => Err(format!("generator `{}` needs three rates", site.trim())),
        })
        .collect()
}

/// Family names for region scans.
pub fn family(s: &str, sites: usize) -> Result<ChannelFamily, String> {
    match s.trim() {
        "depolarizing" => Ok(ChannelFamily::Semigroup(vec![GeneratorTriple::uniform(); sites])),
        "phase-damping" => Ok(ChannelFamily::Semigroup(vec![GeneratorTriple::new([1.0, 1.0, 0.0]); sites])),
        "two-pauli" => Ok(ChannelFamily::TwoPauli { sites }),
        other => Err(format!("unknown channel family `{other}` (depolarizing, phase-damping, two-pauli)")),
    }
}

/// Sixteen row-major entries of a 4x4 matrix.
pub fn matrix4(s: &str) -> Result<nalgebra::Matrix4<f64>, String> {
    let v = numbers(s)?;
    if v.len() != 16 {
        return Err(format!("expected 16 entries, got {}", v.len()));
    }
    Ok(nalgebra::Matrix4::from_row_slice(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(grid("1.5:3:0.5").unwrap(), vec![1.5, 2.0, 2.5]);
        assert_eq!(grid("2:4:1").unwrap(), vec![2.0, 3.0]);
        assert_eq!(grid("0:2:0.1").unwrap().len(), 20);
        assert_eq!(grid("0.7").unwrap(), vec![0.7]);
        assert!(grid("1:1:0.5").is_err());
        assert!(grid("1:2:0").is_err());
        assert!(grid("1:2").is_err());
        assert!(grid("a:2:1").is_err());
    }

    #[test]
    fn channel_literals() {
        assert_eq!(channel("depolarizing(0.5)").unwrap().lambdas, [0.5; 3]);
        assert_eq!(channel(" phase-damping(0.6) ").unwrap().lambdas, [0.6, 0.6, 1.0]);
        assert_eq!(channel("two-pauli(0.75)").unwrap().lambdas, [0.75, 0.75, 0.5]);
        assert_eq!(channel("diag(0.1,0.2,0.3)").unwrap().lambdas, [0.1, 0.2, 0.3]);
        assert!(channel("diag(0.1,0.2)").is_err());
        assert!(channel("depolarizing(2)").is_err());
        assert!(channel("erasure(0.1)").is_err());
        assert!(channel("depolarizing 0.5").is_err());
        assert_eq!(channels("depolarizing(0.5);diag(1,1,1)").unwrap().len(), 2);
    }

    #[test]
    fn generator_literals() {
        let g = generators("1,1,1;1,2,3").unwrap();
        assert_eq!(g[1].rates, [1.0, 2.0, 3.0]);
        assert!(generators("1,1").is_err());
        assert!(generators("1,1,x").is_err());
    }
}
