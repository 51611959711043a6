//! Boxes `B = [l, u]` with extended-real endpoints. `F = N_B` is the normal
//! cone of the box; a coordinate with both endpoints infinite is an ordinary
//! equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundsRepr", into = "BoundsRepr")]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dim("bounds: upper", lower.len(), upper.len()));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() {
                return Err(Error::Domain(format!("bounds component {i} is NaN")));
            }
            if l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Domain(format!(
                    "bounds component {i}: empty interval [{l}, {u}]"
                )));
            }
            if l > u {
                return Err(Error::Domain(format!(
                    "bounds component {i}: lower {l} > upper {u}"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// All coordinates free: `F ≡ 0`.
    pub fn free(n: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn nonnegative(n: usize) -> Self {
        Bounds {
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.lower[i] == f64::NEG_INFINITY && self.upper[i] == f64::INFINITY
    }

    pub fn is_all_free(&self) -> bool {
        (0..self.dim()).all(|i| self.is_free(i))
    }

    /// Euclidean projection onto the box (a componentwise clamp).
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::dim("project onto box", self.dim(), v.len()));
        }
        Ok(self.clamp(v))
    }

    pub(crate) fn clamp(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&l, &u))| x.max(l).min(u))
            .collect()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.dim()
            && v.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&l, &u))| l <= x && x <= u)
    }
}

/// A bound on disk: a JSON number or one of `"inf"`, `"+inf"`, `"-inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtReal {
    Finite(f64),
    Text(String),
}

impl ExtReal {
    pub fn to_f64(&self) -> std::result::Result<f64, String> {
        match self {
            ExtReal::Finite(v) => Ok(*v),
            ExtReal::Text(s) => match s.trim() {
                "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
                "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
                other => Err(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                )),
            },
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            ExtReal::Text("-inf".into())
        } else {
            ExtReal::Finite(v)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsRepr {
    pub lower: Vec<ExtReal>,
    pub upper: Vec<ExtReal>,
}

impl TryFrom<BoundsRepr> for Bounds {
    type Error = String;

    fn try_from(repr: BoundsRepr) -> std::result::Result<Self, String> {
        let convert = |side: &str, v: &[ExtReal]| -> std::result::Result<Vec<f64>, String> {
            v.iter()
                .enumerate()
                .map(|(i, e)| e.to_f64().map_err(|m| format!("{side}[{i}]: {m}")))
                .collect()
        };
        let lower = convert("lower", &repr.lower)?;
        let upper = convert("upper", &repr.upper)?;
        Bounds::new(lower, upper).map_err(|e| e.to_string())
    }
}

impl From<Bounds> for BoundsRepr {
    fn from(b: Bounds) -> Self {
        BoundsRepr {
            lower: b.lower.into_iter().map(ExtReal::from).collect(),
            upper: b.upper.into_iter().map(ExtReal::from).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn projection_examples() {
        let b = Bounds::nonnegative(2);
        assert_eq!(b.project(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
        assert_eq!(
            Bounds::free(2).project(&[3.0, -7.0]).unwrap(),
            vec![3.0, -7.0]
        );
        let b = Bounds::new(vec![-1.0], vec![1.0]).unwrap();
        assert_eq!(b.project(&[0.5]).unwrap(), vec![0.5]);
        assert!(b.project(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn invalid_boxes() {
        let err = Bounds::new(vec![0.0, 2.0], vec![1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("component 1"));
        assert!(Bounds::new(vec![f64::INFINITY], vec![f64::INFINITY]).is_err());
        assert!(Bounds::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn infinite_bounds_as_strings() {
        let b = Bounds::new(vec![f64::NEG_INFINITY, 0.0], vec![f64::INFINITY, 2.5]).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        assert_eq!(text, r#"{"lower":["-inf",0.0],"upper":["inf",2.5]}"#);
        let back: Bounds = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<Bounds>(r#"{"lower":["huge"],"upper":[1]}"#).is_err());
        assert!(serde_json::from_str::<Bounds>(r#"{"lower":[2],"upper":[1]}"#).is_err());
    }

    proptest! {
        #[test]
        fn projection_idempotent(
            raw in prop::collection::vec((-5.0f64..5.0, 0.0f64..3.0, any::<bool>(), any::<bool>()), 1..6),
            v in prop::collection::vec(-10.0f64..10.0, 6),
        ) {
            let lower: Vec<f64> = raw.iter().map(|&(l, _, lo_inf, _)| if lo_inf { f64::NEG_INFINITY } else { l }).collect();
            let upper: Vec<f64> = raw.iter().map(|&(l, w, _, up_inf)| if up_inf { f64::INFINITY } else { l + w }).collect();
            let b = Bounds::new(lower, upper).unwrap();
            let v = &v[..b.dim()];
            let p = b.project(v).unwrap();
            prop_assert!(b.contains(&p));
            prop_assert_eq!(b.project(&p).unwrap(), p);
        }
    }
}
