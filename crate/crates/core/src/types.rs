//! Parameter records and distribution specs shared by every module.
//!
//! All types validate on construction and on deserialization, so a value in
//! hand always satisfies its invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `a` and `b` in [`JkParams`]. At `a = 1` the constants
/// `A` and `B` coincide and the `J_1` closed form degenerates to `0/0`.
pub const PARAM_FLOOR: f64 = 1.0 + 1e-9;

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// One gamma factor `Gamma(shape, rate)` with density
/// `rate^shape x^(shape-1) e^(-rate x) / Gamma(shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGammaComponent")]
pub struct GammaComponent {
    shape: f64,
    rate: f64,
}

#[derive(Deserialize)]
struct RawGammaComponent {
    shape: f64,
    rate: f64,
}

impl TryFrom<RawGammaComponent> for GammaComponent {
    type Error = Error;
    fn try_from(raw: RawGammaComponent) -> Result<Self> {
        GammaComponent::new(raw.shape, raw.rate)
    }
}

impl GammaComponent {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        Ok(GammaComponent {
            shape: positive("gamma shape", shape)?,
            rate: positive("gamma rate", rate)?,
        })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `E[exp(-s Y)] = (rate / (rate + s))^shape`.
    pub fn laplace(&self, s: f64) -> f64 {
        (-self.shape * (s / self.rate).ln_1p()).exp()
    }
}

/// `Y = Y_1 + ... + Y_n` with independent gamma summands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGammaSum")]
pub struct GammaSumSpec {
    components: Vec<GammaComponent>,
}

#[derive(Deserialize)]
struct RawGammaSum {
    components: Vec<GammaComponent>,
}

impl TryFrom<RawGammaSum> for GammaSumSpec {
    type Error = Error;
    fn try_from(raw: RawGammaSum) -> Result<Self> {
        GammaSumSpec::new(raw.components)
    }
}

impl GammaSumSpec {
    pub fn new(components: Vec<GammaComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("a gamma sum needs at least one component"));
        }
        Ok(GammaSumSpec { components })
    }

    pub fn single(shape: f64, rate: f64) -> Result<Self> {
        Self::new(vec![GammaComponent::new(shape, rate)?])
    }

    pub fn components(&self) -> &[GammaComponent] {
        &self.components
    }

    pub fn total_shape(&self) -> f64 {
        self.components.iter().map(|c| c.shape).sum()
    }

    /// The gamma sum as a GGC with one Thorin atom `(rate_i, shape_i)` per
    /// component; atoms with equal rates merge.
    pub fn to_ggc(&self) -> GgcSpec {
        let atoms = self.components.iter().map(|c| (c.rate, c.shape)).collect();
        GgcSpec::new(0.0, atoms).expect("gamma components are valid Thorin atoms")
    }

    /// Product of the component transforms at `s`.
    pub fn laplace(&self, s: f64) -> f64 {
        let log: f64 = self
            .components
            .iter()
            .map(|c| -c.shape * (s / c.rate).ln_1p())
            .sum();
        log.exp()
    }
}

/// A GGC law with finitely many Thorin atoms:
/// `phi(s) = exp(-left_extremity * s + sum_j mass_j * log(t_j / (t_j + s)))`.
///
/// Atoms are kept sorted by location; atoms sharing a location are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGgc")]
pub struct GgcSpec {
    left_extremity: f64,
    atoms: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawGgc {
    #[serde(default)]
    left_extremity: f64,
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<RawGgc> for GgcSpec {
    type Error = Error;
    fn try_from(raw: RawGgc) -> Result<Self> {
        GgcSpec::new(raw.left_extremity, raw.atoms)
    }
}

impl GgcSpec {
    pub fn new(left_extremity: f64, mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !(left_extremity >= 0.0 && left_extremity.is_finite()) {
            return Err(Error::domain(format!(
                "left extremity must be finite and nonnegative, got {left_extremity}"
            )));
        }
        for &(t, u) in &atoms {
            positive("Thorin atom location", t)?;
            positive("Thorin atom mass", u)?;
        }
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (t, u) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 += u,
                _ => merged.push((t, u)),
            }
        }
        Ok(GgcSpec {
            left_extremity,
            atoms: merged,
        })
    }

    pub fn left_extremity(&self) -> f64 {
        self.left_extremity
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Total Thorin mass `sum_j u_j`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Membership in `GGC(k)`: left extremity zero and total mass at most `k`.
    pub fn in_ggc_k(&self, k: f64) -> bool {
        self.left_extremity == 0.0 && self.total_mass() <= k
    }
}

/// The fixed-but-arbitrary `(a, b, k)` of the `J_k` integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJkParams")]
pub struct JkParams {
    a: f64,
    b: f64,
    k: f64,
}

#[derive(Deserialize)]
struct RawJkParams {
    a: f64,
    b: f64,
    k: f64,
}

impl TryFrom<RawJkParams> for JkParams {
    type Error = Error;
    fn try_from(raw: RawJkParams) -> Result<Self> {
        JkParams::new(raw.a, raw.b, raw.k)
    }
}

impl JkParams {
    pub fn new(a: f64, b: f64, k: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(v >= PARAM_FLOOR && v.is_finite()) {
                return Err(Error::domain(format!(
                    "{name} must be finite and at least 1 + 1e-9, got {v}"
                )));
            }
        }
        positive("k", k)?;
        Ok(JkParams { a, b, k })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        JkParams::new(self.a, self.b, k)
    }

    pub fn constants(&self) -> DerivedConstants {
        derived_constants(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `ab + 1/(ab)`
    pub big_a: f64,
    /// `a/b + b/a`
    pub big_b: f64,
    /// `a + 1/a`
    pub alpha: f64,
    /// `b + 1/b`
    pub beta: f64,
}

pub fn derived_constants(p: &JkParams) -> DerivedConstants {
    let (a, b) = (p.a, p.b);
    DerivedConstants {
        big_a: a * b + 1.0 / (a * b),
        big_b: a / b + b / a,
        alpha: a + 1.0 / a,
        beta: b + 1.0 / b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_at_two_two() {
        let c = derived_constants(&JkParams::new(2.0, 2.0, 1.0).unwrap());
        assert_eq!(c.big_a, 4.25);
        assert_eq!(c.big_b, 2.0);
        assert_eq!(c.alpha, 2.5);
        assert_eq!(c.beta, 2.5);
    }

    #[test]
    fn equal_a_b_gives_b_two() {
        for a in [1.3, 2.0, 7.5] {
            let c = derived_constants(&JkParams::new(a, a, 0.5).unwrap());
            assert_eq!(c.big_b, 2.0);
            assert!(c.big_a > c.big_b);
        }
    }

    #[test]
    fn params_reject_degenerate_values() {
        assert!(JkParams::new(1.0, 2.0, 1.0).is_err());
        assert!(JkParams::new(2.0, 1.0 + 1e-10, 1.0).is_err());
        assert!(JkParams::new(2.0, 2.0, 0.0).is_err());
        assert!(JkParams::new(f64::INFINITY, 2.0, 1.0).is_err());
        assert!(JkParams::new(PARAM_FLOOR, PARAM_FLOOR, 1.0).is_ok());
    }

    #[test]
    fn ggc_atoms_are_canonicalized() {
        let g = GgcSpec::new(0.0, vec![(2.0, 1.0), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(g.atoms(), &[(1.0, 0.5), (2.0, 1.25)]);
        assert_eq!(g.total_mass(), 1.75);
        assert!(g.in_ggc_k(2.0));
        assert!(!g.in_ggc_k(1.0));
        assert!(GgcSpec::new(0.0, vec![(0.0, 1.0)]).is_err());
        assert!(GgcSpec::new(-1.0, vec![]).is_err());
    }

    #[test]
    fn json_shapes() {
        let y: GammaSumSpec =
            serde_json::from_str(r#"{"components":[{"shape":0.7,"rate":1.0}]}"#).unwrap();
        assert_eq!(y.total_shape(), 0.7);
        assert!(serde_json::from_str::<GammaSumSpec>(r#"{"components":[]}"#).is_err());
        assert!(
            serde_json::from_str::<GammaSumSpec>(r#"{"components":[{"shape":-1,"rate":1}]}"#)
                .is_err()
        );

        let g: GgcSpec =
            serde_json::from_str(r#"{"left_extremity":0.5,"atoms":[[1,0.5],[2,0.5]]}"#).unwrap();
        assert_eq!(g.left_extremity(), 0.5);
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"left_extremity":0.5,"atoms":[[1.0,0.5],[2.0,0.5]]}"#
        );
    }
}
