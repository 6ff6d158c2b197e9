//! `key = value` sweep configuration. `#` starts a comment; lists are
//! comma-separated.

use std::collections::HashSet;

use super::SweepSpec;
use crate::error::{Error, Result};
use crate::estimators::MethodId;

const KEYS: [&str; 11] = [
    "or_u",
    "beta_x",
    "alpha",
    "p_u",
    "p_x",
    "beta_t",
    "methods",
    "x_coding",
    "contour_beta0",
    "contour_beta_t",
    "contour_points",
];

/// Applies the settings in `text` on top of [`SweepSpec::default`].
pub fn parse_config(text: &str) -> Result<SweepSpec> {
    let mut spec = SweepSpec::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| Error::Config { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let list = || -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|v| {
                    let v = v.trim();
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(format!("`{key}`: `{v}` is not a finite number")))
                })
                .collect()
        };
        let single = || -> Result<f64> {
            match list()?.as_slice() {
                [v] => Ok(*v),
                _ => Err(err(format!("`{key}` takes one number"))),
            }
        };
        let pair = || -> Result<(f64, f64)> {
            match list()?.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(err(format!("`{key}` takes two numbers"))),
            }
        };
        match key {
            "or_u" => spec.or_u = list()?,
            "beta_x" => spec.beta_x = list()?,
            "alpha" => spec.alpha = list()?,
            "p_u" => spec.p_u = single()?,
            "p_x" => spec.p_x = single()?,
            "beta_t" => spec.beta_t = single()?,
            "methods" => {
                spec.methods = value
                    .split(',')
                    .map(|m| m.trim().parse::<MethodId>().map_err(|e| err(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "x_coding" => spec.x_coding = value.parse().map_err(err)?,
            "contour_beta0" => spec.contour.beta0 = pair()?,
            "contour_beta_t" => spec.contour.beta_t = pair()?,
            "contour_points" => {
                spec.contour.points = value
                    .parse()
                    .map_err(|_| err(format!("`contour_points`: `{value}` is not a count")))?
            }
            _ => unreachable!(),
        }
    }
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgm::CovariateCoding;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("").unwrap(), SweepSpec::default());
        assert_eq!(parse_config("# nothing\n\n").unwrap(), SweepSpec::default());
    }

    #[test]
    fn parses_all_keys() {
        let text = "\
or_u = 1, 3.5   # comment
beta_x = 0,0.5
alpha = 0.2
p_u = 0.4
p_x = 0.3
beta_t = 0.8
methods = ate_baseline, constrained_offset
x_coding = centered
contour_beta0 = -1, 1
contour_beta_t = 0, 2
contour_points = 7
";
        let s = parse_config(text).unwrap();
        assert_eq!(s.or_u, vec![1.0, 3.5]);
        assert_eq!(s.beta_x, vec![0.0, 0.5]);
        assert_eq!(s.alpha, vec![0.2]);
        assert_eq!((s.p_u, s.p_x, s.beta_t), (0.4, 0.3, 0.8));
        assert_eq!(
            s.methods,
            vec![MethodId::AteBaseline, MethodId::ConstrainedOffset]
        );
        assert_eq!(s.x_coding, CovariateCoding::Centered);
        assert_eq!(s.contour.beta0, (-1.0, 1.0));
        assert_eq!(s.contour.points, 7);
    }

    #[test]
    fn rejects_bad_input() {
        for (text, line) in [
            ("grid = 1", 1),
            ("\nor_u = 1\nor_u = 2", 3),
            ("p_u = 0.1, 0.2", 1),
            ("or_u = one", 1),
            ("methods = magic", 1),
            ("just words", 1),
            ("x_coding = dummy", 1),
            ("beta_t = inf", 1),
        ] {
            match parse_config(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("or_u = -2"), Err(Error::Sweep(_))));
        assert!(matches!(
            parse_config("p_u = 1"),
            Err(Error::Probability { .. })
        ));
    }
}
