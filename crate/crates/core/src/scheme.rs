//! Declarative scheme descriptions and the triple-jump weights.
//!
//! Descriptor grammar (as printed in CSV output and accepted on the command line):
//!
//! ```text
//! S | IS:<i> | TJ | ITJ:<i> | C9 | IC9:<i> | RK4
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SplitError};

pub const DESCRIPTOR_GRAMMAR: &str = "S | IS:<i> | TJ | ITJ:<i> | C9 | IC9:<i> | RK4";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SchemeSpec {
    /// Strang splitting with the coefficient frozen at the Lie midpoint.
    ClassicStrang,
    /// `S⁽ⁱ⁾`: Lie half-step followed by `i` fixed-point iterations of the adjoint half-step.
    IteratedStrang(u32),
    /// `levels` nested triple-jump compositions of `base`.
    Composition { base: Box<SchemeSpec>, levels: u32 },
    /// Classical fourth-order Runge–Kutta on the recombined field.
    Rk4,
}

impl SchemeSpec {
    pub fn iterated(i: u32) -> Self {
        Self::IteratedStrang(i)
    }

    pub fn composition(base: SchemeSpec, levels: u32) -> Self {
        Self::Composition {
            base: Box::new(base),
            levels,
        }
    }

    /// Triple jump of `base`.
    pub fn triple_jump(base: SchemeSpec) -> Self {
        Self::composition(base, 1)
    }

    /// Composite 9 (two nested triple jumps) of `base`.
    pub fn composite9(base: SchemeSpec) -> Self {
        Self::composition(base, 2)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ClassicStrang | Self::Rk4 => Ok(()),
            Self::IteratedStrang(0) => Err(SplitError::Argument(
                "iterated Strang needs at least one iteration".into(),
            )),
            Self::IteratedStrang(_) => Ok(()),
            Self::Composition { base, levels } => {
                if *levels == 0 {
                    return Err(SplitError::Argument(
                        "composition needs at least one level".into(),
                    ));
                }
                if matches!(**base, Self::Rk4) {
                    return Err(SplitError::Argument(
                        "compositions are built over splitting schemes, not RK4".into(),
                    ));
                }
                base.validate()
            }
        }
    }

    /// The splitting scheme at the bottom of any composition nesting.
    pub fn innermost(&self) -> &SchemeSpec {
        match self {
            Self::Composition { base, .. } => base.innermost(),
            other => other,
        }
    }

    /// Order of the scheme that a composition layer is built on, used to pick
    /// its weights. Classic Strang loses symmetry, so compositions over it
    /// keep the `r = 2` weights at every level.
    fn weight_base_order(&self) -> u32 {
        match self {
            Self::Composition { base, levels } => {
                if matches!(self.innermost(), Self::ClassicStrang) {
                    2
                } else {
                    base.weight_base_order() + 2 * levels
                }
            }
            _ => 2,
        }
    }

    /// `r` used for the weights of composition layer `level` (1 = innermost).
    pub fn layer_weight_order(base: &SchemeSpec, level: u32) -> u32 {
        if matches!(base.innermost(), Self::ClassicStrang) {
            2
        } else {
            base.weight_base_order() + 2 * (level - 1)
        }
    }

    /// Worst-case (problem-independent) order of accuracy.
    ///
    /// `S⁽ⁱ⁾` is second order once `i ≥ 2` and symmetric of order `i`; a
    /// triple jump raises an even order `p` to `p + 2` when the symmetry order
    /// is at least `p + 2` and to `p + 1` otherwise, after which further
    /// compositions gain nothing.
    pub fn nominal_order(&self) -> u32 {
        match self {
            Self::ClassicStrang => 2,
            Self::IteratedStrang(i) => {
                if *i >= 2 {
                    2
                } else {
                    1
                }
            }
            Self::Rk4 => 4,
            Self::Composition { base, levels } => {
                let mut order = base.nominal_order();
                let symmetry = base.symmetry_order();
                for _ in 0..*levels {
                    if order % 2 == 1 {
                        break;
                    }
                    order += if symmetry >= order + 2 { 2 } else { 1 };
                }
                order
            }
        }
    }

    /// Order `q` with `Φ* = Φ + O(τ^{q+1})`.
    pub fn symmetry_order(&self) -> u32 {
        match self {
            Self::ClassicStrang => 2,
            Self::IteratedStrang(i) => *i,
            Self::Rk4 => 4,
            Self::Composition { base, .. } => base.symmetry_order(),
        }
    }

    /// Partial-flow applications (A and frozen-b together) per step; RK4 reports 0.
    pub fn flows_per_step(&self) -> u64 {
        match self {
            Self::ClassicStrang => 4,
            Self::IteratedStrang(i) => 2 + 2 * u64::from(*i),
            Self::Rk4 => 0,
            Self::Composition { base, levels } => 3u64.pow(*levels) * base.flows_per_step(),
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ClassicStrang => write!(f, "S"),
            Self::IteratedStrang(i) => write!(f, "IS:{i}"),
            Self::Rk4 => write!(f, "RK4"),
            Self::Composition { base, levels } => match (&**base, levels) {
                (Self::ClassicStrang, 1) => write!(f, "TJ"),
                (Self::ClassicStrang, 2) => write!(f, "C9"),
                (Self::IteratedStrang(i), 1) => write!(f, "ITJ:{i}"),
                (Self::IteratedStrang(i), 2) => write!(f, "IC9:{i}"),
                (base, levels) => write!(f, "COMP({base},{levels})"),
            },
        }
    }
}

fn parse_iterations(token: &str, value: &str) -> Result<u32> {
    let i: u32 = value.parse().map_err(|_| usage(token))?;
    if i == 0 {
        return Err(SplitError::Argument(format!(
            "`{token}`: iteration count must be at least 1 (grammar: {DESCRIPTOR_GRAMMAR})"
        )));
    }
    Ok(i)
}

fn usage(token: &str) -> SplitError {
    SplitError::Argument(format!(
        "unrecognised scheme `{token}` (grammar: {DESCRIPTOR_GRAMMAR})"
    ))
}

/// Parses a scheme descriptor.
pub fn parse_scheme(descr: &str) -> Result<SchemeSpec> {
    let token = descr.trim();
    let (head, arg) = match token.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (token, None),
    };
    let spec = match (head.to_ascii_uppercase().as_str(), arg) {
        ("S", None) => SchemeSpec::ClassicStrang,
        ("TJ", None) => SchemeSpec::triple_jump(SchemeSpec::ClassicStrang),
        ("C9", None) => SchemeSpec::composite9(SchemeSpec::ClassicStrang),
        ("RK4", None) => SchemeSpec::Rk4,
        ("IS", Some(a)) => SchemeSpec::IteratedStrang(parse_iterations(token, a)?),
        ("ITJ", Some(a)) => SchemeSpec::triple_jump(SchemeSpec::iterated(parse_iterations(token, a)?)),
        ("IC9", Some(a)) => SchemeSpec::composite9(SchemeSpec::iterated(parse_iterations(token, a)?)),
        _ => return Err(usage(token)),
    };
    Ok(spec)
}

impl FromStr for SchemeSpec {
    type Err = SplitError;

    fn from_str(s: &str) -> Result<Self> {
        parse_scheme(s)
    }
}

/// Triple-jump weights `(γ1, γ2, γ3)` for a symmetric base method of even order `r`.
pub fn composition_weights(r: u32) -> Result<(f64, f64, f64)> {
    if r < 2 || r % 2 != 0 {
        return Err(SplitError::Argument(format!(
            "composition weights need an even order r >= 2, got {r}"
        )));
    }
    let root = 2f64.powf(1.0 / f64::from(r + 1));
    let g1 = 1.0 / (2.0 - root);
    Ok((g1, -root * g1, g1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_abbreviation() {
        assert_eq!(parse_scheme("S").unwrap(), SchemeSpec::ClassicStrang);
        assert_eq!(parse_scheme("IS:2").unwrap(), SchemeSpec::IteratedStrang(2));
        assert_eq!(
            parse_scheme("ITJ:4").unwrap(),
            SchemeSpec::composition(SchemeSpec::IteratedStrang(4), 1)
        );
        assert_eq!(
            parse_scheme("IC9:6").unwrap(),
            SchemeSpec::composition(SchemeSpec::IteratedStrang(6), 2)
        );
        assert_eq!(
            parse_scheme("C9").unwrap(),
            SchemeSpec::composition(SchemeSpec::ClassicStrang, 2)
        );
        assert_eq!(parse_scheme(" rk4 ").unwrap(), SchemeSpec::Rk4);
    }

    #[test]
    fn rejects_malformed_descriptors() {
        for bad in ["IC9:0", "IS", "ITJ:", "TJ:3", "X", "IS:-1", "IS:two", ""] {
            let err = parse_scheme(bad).unwrap_err();
            assert!(matches!(err, SplitError::Argument(ref m) if m.contains("grammar")), "{bad}");
        }
    }

    #[test]
    fn weights_for_second_order_base() {
        let (g1, g2, g3) = composition_weights(2).unwrap();
        assert!((g1 - 1.351207191959658).abs() < 1e-14);
        assert!((g2 + 1.702414383919315).abs() < 1e-14);
        assert_eq!(g1, g3);
        let (g1, _, _) = composition_weights(4).unwrap();
        assert!((g1 - 1.0 / (2.0 - 2f64.powf(0.2))).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        for r in [2, 4, 6, 8] {
            let (a, b, c) = composition_weights(r).unwrap();
            assert!((a + b + c - 1.0).abs() <= 1e-15, "r = {r}");
        }
        assert!(composition_weights(3).is_err());
        assert!(composition_weights(0).is_err());
    }

    #[test]
    fn nominal_orders_follow_worst_case_bound() {
        let cases = [
            ("S", 2),
            ("IS:1", 1),
            ("IS:2", 2),
            ("TJ", 3),
            ("C9", 3),
            ("ITJ:3", 3),
            ("ITJ:4", 4),
            ("IC9:3", 3),
            ("IC9:5", 5),
            ("IC9:6", 6),
            ("RK4", 4),
        ];
        for (d, p) in cases {
            assert_eq!(parse_scheme(d).unwrap().nominal_order(), p, "{d}");
        }
    }

    #[test]
    fn effort_formula() {
        let cases = [("S", 4), ("IS:2", 6), ("TJ", 12), ("ITJ:4", 30), ("C9", 36), ("IC9:6", 126), ("ITJ:3", 24)];
        for (d, e) in cases {
            assert_eq!(parse_scheme(d).unwrap().flows_per_step(), e, "{d}");
        }
    }

    #[test]
    fn layer_weights_follow_induction() {
        let is = SchemeSpec::IteratedStrang(6);
        assert_eq!(SchemeSpec::layer_weight_order(&is, 1), 2);
        assert_eq!(SchemeSpec::layer_weight_order(&is, 2), 4);
        let s = SchemeSpec::ClassicStrang;
        assert_eq!(SchemeSpec::layer_weight_order(&s, 2), 2);
        let nested = SchemeSpec::composition(SchemeSpec::IteratedStrang(6), 1);
        assert_eq!(SchemeSpec::layer_weight_order(&nested, 1), 4);
    }

    #[test]
    fn validation() {
        assert!(SchemeSpec::IteratedStrang(0).validate().is_err());
        assert!(SchemeSpec::composition(SchemeSpec::Rk4, 1).validate().is_err());
        assert!(SchemeSpec::composition(SchemeSpec::ClassicStrang, 0).validate().is_err());
        assert!(parse_scheme("IC9:6").unwrap().validate().is_ok());
    }

    #[test]
    fn general_compositions_have_a_readable_name() {
        let s = SchemeSpec::composition(SchemeSpec::IteratedStrang(8), 3);
        assert_eq!(s.to_string(), "COMP(IS:8,3)");
    }
}
