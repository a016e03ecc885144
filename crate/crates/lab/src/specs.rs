//! Text forms of schedules, gap sequences, modulations, laws and ladders.
//!
//! * schedule: `identity`, `power:R`, `exact:R`, `superexp`, `geometric:Q`,
//!   `greedy`, `explicit:1,2,5`
//! * xi: `derived`, `at:EXPR`, `increment`, `explicit:1.5,2`
//! * modulation: `ones`, `zero`, `alternating`, `const:C`, `rotation:N/D`,
//!   `character:N/D`, `twist:R`, `power:E`, `chirp:THETA`, or a law name
//! * ladder: `64,128,256` or `2^6..2^12`

use wslln_core::math::Turn;
use wslln_core::parse;
use wslln_core::stochastics::{Law, RandomModulation};
use wslln_core::{Complex64, GapSeq, ModulationSeq, Schedule, WeightSeq};

use crate::error::{config, Result};

fn number(what: &str, text: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| config(format!("{what}: `{text}` is not a number")))
}

fn split(text: &str) -> (&str, Option<&str>) {
    match text.split_once(':') {
        Some((head, rest)) => (head.trim(), Some(rest.trim())),
        None => (text.trim(), None),
    }
}

fn arg<'a>(what: &str, head: &str, rest: Option<&'a str>) -> Result<&'a str> {
    rest.ok_or_else(|| config(format!("{what} `{head}` needs an argument after `:`")))
}

/// A turn as `N/D` or a real number of turns.
pub fn turn(text: &str) -> Result<Turn> {
    match text.split_once('/') {
        Some((n, d)) => {
            let n: u64 = n.trim().parse().map_err(|_| config(format!("bad turn numerator in `{text}`")))?;
            let d: u64 = d.trim().parse().map_err(|_| config(format!("bad turn denominator in `{text}`")))?;
            if d == 0 {
                return Err(config("turn denominator is zero"));
            }
            Ok(Turn::rational(n, d))
        }
        None => Ok(Turn::Real(number("turn", text)?)),
    }
}

pub fn schedule(text: &str, g: &WeightSeq) -> Result<Schedule> {
    let (head, rest) = split(text);
    Ok(match head {
        "identity" => Schedule::identity(),
        "power" => Schedule::power(number("power", arg("schedule", head, rest)?)?)?,
        "exact" => {
            let r = arg("schedule", head, rest)?;
            Schedule::exact_power(r.parse().map_err(|_| config(format!("exact power `{r}` is not a positive integer")))?)?
        }
        "superexp" => Schedule::Superexp,
        "geometric" => Schedule::geometric(number("geometric", arg("schedule", head, rest)?)?)?,
        "greedy" => Schedule::greedy(g)?,
        "explicit" => Schedule::explicit(
            arg("schedule", head, rest)?
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| config(format!("schedule entry `{s}` is not an integer"))))
                .collect::<Result<_>>()?,
        )?,
        other => return Err(config(format!("unknown schedule `{other}`"))),
    })
}

pub fn xi(text: &str, g: &WeightSeq) -> Result<GapSeq> {
    let (head, rest) = split(text);
    Ok(match head {
        "derived" => GapSeq::Derived,
        "at" => GapSeq::AtSchedule(parse::parse_weight(arg("xi", head, rest)?)?),
        "increment" => GapSeq::Increment(g.clone()),
        "explicit" => GapSeq::Explicit(arg("xi", head, rest)?.split(',').map(|s| number("xi", s)).collect::<Result<_>>()?),
        other => return Err(config(format!("unknown xi `{other}`"))),
    })
}

pub fn law(text: &str) -> Result<Law> {
    Ok(match text.trim() {
        "rademacher" => Law::Rademacher,
        "gaussian" => Law::Gaussian,
        "complex-gaussian" => Law::ComplexGaussian,
        "zero" => Law::Zero,
        other => return Err(config(format!("unknown law `{other}`"))),
    })
}

/// Laws become the random modulation keyed by `seed`.
pub fn modulation(text: &str, seed: u64) -> Result<ModulationSeq> {
    let (head, rest) = split(text);
    Ok(match head {
        "ones" => ModulationSeq::ones(),
        "zero" => ModulationSeq::zero(),
        "alternating" => ModulationSeq::alternating(),
        "const" => ModulationSeq::Constant { c: Complex64::new(number("const", arg("modulation", head, rest)?)?, 0.0) },
        "rotation" => ModulationSeq::Rotation { lambda: turn(arg("modulation", head, rest)?)? },
        "character" => ModulationSeq::Character { lambda: turn(arg("modulation", head, rest)?)? },
        "twist" => ModulationSeq::PowerTwist { r: number("twist", arg("modulation", head, rest)?)? },
        "power" => {
            let e = number("power", arg("modulation", head, rest)?)?;
            if e > 0.0 {
                return Err(config("power modulations need an exponent ≤ 0"));
            }
            ModulationSeq::PowerLaw { e }
        }
        "chirp" => ModulationSeq::Chirp { theta: number("chirp", arg("modulation", head, rest)?)? },
        name => ModulationSeq::Random { law: RandomModulation::new(law(name).map_err(|_| config(format!("unknown modulation `{name}`")))?, seed), sample: 0 },
    })
}

pub fn ladder(text: &str) -> Result<Vec<u64>> {
    let out: Vec<u64> = if let Some((lo, hi)) = text.split_once("..") {
        let exp = |s: &str| {
            s.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse::<u32>().ok())
                .filter(|e| *e < 63)
                .ok_or_else(|| config(format!("ladder bound `{s}` is not of the form 2^K")))
        };
        (exp(lo)?..=exp(hi)?).map(|e| 1u64 << e).collect()
    } else {
        text.split(',').map(|s| s.trim().parse::<u64>().map_err(|_| config(format!("ladder entry `{s}` is not an integer")))).collect::<Result<_>>()?
    };
    validate_ladder(&out)?;
    Ok(out)
}

pub fn validate_ladder(l: &[u64]) -> Result<()> {
    if l.is_empty() || l[0] == 0 || l.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config("a ladder must be nonempty, positive and strictly increasing"));
    }
    Ok(())
}

/// `2^lo, …, 2^hi`.
pub fn pow2_ladder(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

/// `G` from text, then `W` with every `<G>` factor standing for `G`.
pub fn weight_pair(g_text: &str, w_text: &str) -> Result<(WeightSeq, WeightSeq)> {
    let g = WeightSeq::parse(g_text)?;
    let w = weight_with(w_text, &g)?;
    Ok((g, w))
}

pub fn weight_with(w_text: &str, g: &WeightSeq) -> Result<WeightSeq> {
    let count = w_text.matches("<G>").count() as i32;
    if count == 0 {
        return Ok(WeightSeq::parse(w_text)?);
    }
    if let Some(e) = g.expr() {
        return Ok(WeightSeq::parse(&parse::substitute(w_text, "G", e))?);
    }
    let rest = parse::parse_weight(&w_text.replace("<G>", "1"))?;
    let gg = g.clone();
    let name = w_text.replace("<G>", &format!("({})", g.name()));
    Ok(WeightSeq::from_fn_auto(name, move |n| rest.value_at(n as f64) * gg.value(n).map_or(f64::NAN, |v| v.powi(count)))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_and_ladders() {
        let g = WeightSeq::parse("n").unwrap();
        assert_eq!(schedule("power:2", &g).unwrap().nth(3).unwrap(), 10);
        assert_eq!(schedule("exact:2", &g).unwrap().nth(3).unwrap(), 9);
        assert_eq!(schedule("explicit:1,4,9", &g).unwrap().nth(2).unwrap(), 4);
        assert!(schedule("power", &g).is_err());
        assert!(schedule("cubic", &g).is_err());
        assert_eq!(ladder("2^6..2^8").unwrap(), vec![64, 128, 256]);
        assert_eq!(ladder("10, 20").unwrap(), vec![10, 20]);
        assert!(ladder("20,10").is_err());
        assert!(ladder("2^a..2^3").is_err());
    }

    #[test]
    fn modulations() {
        let m = modulation("rotation:1/4", 0).unwrap();
        assert!((m.value(1, 1) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(modulation("rademacher", 7).unwrap(), ModulationSeq::Random { .. }));
        assert!(modulation("power:1", 0).is_err());
        assert!(modulation("nope", 0).is_err());
    }

    #[test]
    fn placeholder_weights() {
        let (_, w) = weight_pair("n^0.5", "n^2*<G>").unwrap();
        assert!((w.value(16).unwrap() - 16f64.powf(2.5)).abs() < 1e-9);
        assert!(w.expr().is_some());
        let g = WeightSeq::from_fn("sqrt", 1, |n| (n as f64).sqrt()).unwrap();
        let w = weight_with("n*<G>*<G>", &g).unwrap();
        assert!((w.value(9).unwrap() - 81.0).abs() < 1e-12);
        assert!(w.expr().is_none());
    }
}
