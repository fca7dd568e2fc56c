//! Closed-form test function catalog.
//!
//! Every corpus entry is evaluable at arbitrary points, so the same input
//! can be resampled at any resolution (verification suites re-run at a
//! doubled node count) and commutator symbols can be read off the output
//! grid, not only the input grid.

use crate::error::FraclabError;
use crate::grid::{norm_n, Point};
use crate::Result;

/// Closed-form expression identified by a catalog name and parameter list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorpusExpr {
    /// `c`
    Constant { c: f64 },
    /// `1` on the open box `(a, b)` (per axis), `0` outside.
    Indicator { a: [f64; 2], b: [f64; 2] },
    /// `exp(-(|x - mu| / sigma)^2)`
    Gaussian { center: [f64; 2], width: f64 },
    /// Smooth bump `exp(1 - 1/(1 - (|x - c|/r)^2))` supported on `|x-c| < r`.
    Bump { center: [f64; 2], radius: f64 },
    /// `|x|^beta` on `|x| <= r`, `0` outside. Integrable for `beta > -n`.
    TruncatedPower { beta: f64, radius: f64 },
    /// `sin(freq * (x_1 + ... + x_n))`
    Oscillatory { freq: f64 },
    /// `sign(x_1)`
    Sign,
    /// `ln |x|`
    LogAbs,
    /// `|x|^a`; the weight corpus.
    PowerWeight { a: f64 },
}

impl CorpusExpr {
    /// Builds a catalog entry from its config name and parameter list,
    /// validating parameter counts and catalog ranges for dimension `n`.
    pub fn from_catalog(id: &str, params: &[f64], n: usize) -> Result<CorpusExpr> {
        let bad = |msg: String| Err(FraclabError::invalid(msg));
        if params.iter().any(|p| !p.is_finite()) {
            return bad(format!("corpus entry '{id}': non-finite parameter"));
        }
        match id {
            "constant" => match params {
                [c] => Ok(CorpusExpr::Constant { c: *c }),
                _ => bad(format!(
                    "corpus entry 'constant' takes 1 parameter, got {}",
                    params.len()
                )),
            },
            "indicator" => {
                if params.len() != 2 * n {
                    return bad(format!(
                        "corpus entry 'indicator' takes {} parameters for n={n}, got {}",
                        2 * n,
                        params.len()
                    ));
                }
                let mut a = [0.0; 2];
                let mut b = [0.0; 2];
                for axis in 0..n {
                    a[axis] = params[2 * axis];
                    b[axis] = params[2 * axis + 1];
                    if a[axis] >= b[axis] {
                        return bad(format!(
                            "corpus entry 'indicator': axis {axis} needs a < b, got [{}, {}]",
                            a[axis], b[axis]
                        ));
                    }
                }
                Ok(CorpusExpr::Indicator { a, b })
            }
            "gaussian" => {
                if params.len() != n + 1 {
                    return bad(format!(
                        "corpus entry 'gaussian' takes {} parameters for n={n}, got {}",
                        n + 1,
                        params.len()
                    ));
                }
                let width = params[n];
                if width <= 0.0 {
                    return bad(format!(
                        "corpus entry 'gaussian': width must be > 0, got {width}"
                    ));
                }
                let mut center = [0.0; 2];
                center[..n].copy_from_slice(&params[..n]);
                Ok(CorpusExpr::Gaussian { center, width })
            }
            "bump" => {
                if params.len() != n + 1 {
                    return bad(format!(
                        "corpus entry 'bump' takes {} parameters for n={n}, got {}",
                        n + 1,
                        params.len()
                    ));
                }
                let radius = params[n];
                if radius <= 0.0 {
                    return bad(format!(
                        "corpus entry 'bump': radius must be > 0, got {radius}"
                    ));
                }
                let mut center = [0.0; 2];
                center[..n].copy_from_slice(&params[..n]);
                Ok(CorpusExpr::Bump { center, radius })
            }
            "truncated_power" => match params {
                [beta, radius] => {
                    if *beta <= -(n as f64) || *beta > 8.0 {
                        return bad(format!(
                            "corpus entry 'truncated_power': beta must lie in (-n, 8] = ({}, 8], got {beta}",
                            -(n as f64)
                        ));
                    }
                    if *radius <= 0.0 {
                        return bad(format!(
                            "corpus entry 'truncated_power': radius must be > 0, got {radius}"
                        ));
                    }
                    Ok(CorpusExpr::TruncatedPower {
                        beta: *beta,
                        radius: *radius,
                    })
                }
                _ => bad(format!(
                    "corpus entry 'truncated_power' takes 2 parameters, got {}",
                    params.len()
                )),
            },
            "oscillatory" => match params {
                [freq] if *freq != 0.0 => Ok(CorpusExpr::Oscillatory { freq: *freq }),
                [_] => bad("corpus entry 'oscillatory': freq must be nonzero".into()),
                _ => bad(format!(
                    "corpus entry 'oscillatory' takes 1 parameter, got {}",
                    params.len()
                )),
            },
            "sign" => match params {
                [] => Ok(CorpusExpr::Sign),
                _ => bad("corpus entry 'sign' takes no parameters".into()),
            },
            "log_abs" => match params {
                [] => Ok(CorpusExpr::LogAbs),
                _ => bad("corpus entry 'log_abs' takes no parameters".into()),
            },
            "power_weight" => match params {
                [a] => {
                    if *a <= -(n as f64) || *a > 8.0 {
                        return bad(format!(
                            "corpus entry 'power_weight': exponent must lie in (-n, 8] = ({}, 8], got {a}",
                            -(n as f64)
                        ));
                    }
                    Ok(CorpusExpr::PowerWeight { a: *a })
                }
                _ => bad(format!(
                    "corpus entry 'power_weight' takes 1 parameter, got {}",
                    params.len()
                )),
            },
            other => bad(format!("unknown corpus entry '{other}'")),
        }
    }

    /// Catalog name of this entry.
    pub fn id(&self) -> &'static str {
        match self {
            CorpusExpr::Constant { .. } => "constant",
            CorpusExpr::Indicator { .. } => "indicator",
            CorpusExpr::Gaussian { .. } => "gaussian",
            CorpusExpr::Bump { .. } => "bump",
            CorpusExpr::TruncatedPower { .. } => "truncated_power",
            CorpusExpr::Oscillatory { .. } => "oscillatory",
            CorpusExpr::Sign => "sign",
            CorpusExpr::LogAbs => "log_abs",
            CorpusExpr::PowerWeight { .. } => "power_weight",
        }
    }

    /// Short human-readable label used in case descriptors.
    pub fn label(&self) -> String {
        match self {
            CorpusExpr::Constant { c } => format!("constant({c})"),
            CorpusExpr::Indicator { a, b } => format!("indicator([{} {}])", a[0], b[0]),
            CorpusExpr::Gaussian { center, width } => format!("gaussian({} w={width})", center[0]),
            CorpusExpr::Bump { center, radius } => format!("bump({} r={radius})", center[0]),
            CorpusExpr::TruncatedPower { beta, radius } => {
                format!("truncated_power({beta} r={radius})")
            }
            CorpusExpr::Oscillatory { freq } => format!("oscillatory({freq})"),
            CorpusExpr::Sign => "sign".into(),
            CorpusExpr::LogAbs => "log_abs".into(),
            CorpusExpr::PowerWeight { a } => format!("power_weight({a})"),
        }
    }

    /// Evaluates the expression at a point (only the first `n` coordinates
    /// are read).
    pub fn eval(&self, x: Point, n: usize) -> f64 {
        match self {
            CorpusExpr::Constant { c } => *c,
            CorpusExpr::Indicator { a, b } => {
                for axis in 0..n {
                    if x[axis] <= a[axis] || x[axis] >= b[axis] {
                        return 0.0;
                    }
                }
                1.0
            }
            CorpusExpr::Gaussian { center, width } => {
                let d = dist(x, *center, n) / width;
                (-d * d).exp()
            }
            CorpusExpr::Bump { center, radius } => {
                let t = dist(x, *center, n) / radius;
                if t >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            CorpusExpr::TruncatedPower { beta, radius } => {
                let r = norm_n(x, n);
                if r > *radius {
                    0.0
                } else {
                    r.powf(*beta)
                }
            }
            CorpusExpr::Oscillatory { freq } => {
                let s: f64 = x[..n].iter().sum();
                (freq * s).sin()
            }
            CorpusExpr::Sign => {
                if x[0] > 0.0 {
                    1.0
                } else if x[0] < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            CorpusExpr::LogAbs => norm_n(x, n).ln(),
            CorpusExpr::PowerWeight { a } => norm_n(x, n).powf(*a),
        }
    }

    /// True for entries that never change sign and are positive a.e.,
    /// i.e. entries admissible as weights.
    pub fn is_positive_weight(&self) -> bool {
        match self {
            CorpusExpr::Constant { c } => *c > 0.0,
            CorpusExpr::Gaussian { .. } | CorpusExpr::PowerWeight { .. } => true,
            _ => false,
        }
    }
}

fn dist(x: Point, y: Point, n: usize) -> f64 {
    let mut s = 0.0;
    for axis in 0..n {
        let d = x[axis] - y[axis];
        s += d * d;
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_rejects_unknown_and_bad_params() {
        assert!(CorpusExpr::from_catalog("spline", &[], 1).is_err());
        assert!(CorpusExpr::from_catalog("indicator", &[1.0, 0.0], 1).is_err());
        assert!(CorpusExpr::from_catalog("gaussian", &[0.0, -1.0], 1).is_err());
        assert!(CorpusExpr::from_catalog("truncated_power", &[-1.0, 1.0], 1).is_err());
        assert!(CorpusExpr::from_catalog("power_weight", &[-2.0], 2).is_err());
        assert!(CorpusExpr::from_catalog("oscillatory", &[0.0], 1).is_err());
    }

    #[test]
    fn catalog_roundtrip_and_eval() {
        let ind = CorpusExpr::from_catalog("indicator", &[0.0, 1.0], 1).unwrap();
        assert_eq!(ind.eval([0.5, 0.0], 1), 1.0);
        assert_eq!(ind.eval([1.5, 0.0], 1), 0.0);

        let g = CorpusExpr::from_catalog("gaussian", &[0.0, 1.0], 1).unwrap();
        assert!((g.eval([1.0, 0.0], 1) - (-1.0f64).exp()).abs() < 1e-15);

        let s = CorpusExpr::from_catalog("sign", &[], 1).unwrap();
        assert_eq!(s.eval([-0.25, 0.0], 1), -1.0);

        let pw = CorpusExpr::from_catalog("power_weight", &[0.5], 1).unwrap();
        assert!((pw.eval([4.0, 0.0], 1) - 2.0).abs() < 1e-15);

        let b = CorpusExpr::from_catalog("bump", &[0.0, 1.0], 1).unwrap();
        assert_eq!(b.eval([0.0, 0.0], 1), 1.0);
        assert_eq!(b.eval([1.0, 0.0], 1), 0.0);
    }

    #[test]
    fn two_dimensional_entries_read_both_axes() {
        let ind = CorpusExpr::from_catalog("indicator", &[0.0, 1.0, 0.0, 2.0], 2).unwrap();
        assert_eq!(ind.eval([0.5, 1.5], 2), 1.0);
        assert_eq!(ind.eval([0.5, 2.5], 2), 0.0);

        let pw = CorpusExpr::from_catalog("power_weight", &[2.0], 2).unwrap();
        assert!((pw.eval([3.0, 4.0], 2) - 25.0).abs() < 1e-12);
    }
}
