use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, GrowthProfile, Result};

/// Which explicit Poincaré bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `2^σ R^{σ−1} f(2R)` with `f` a bound on `ν(B̄(x,R))/ν(x)`.
    GraphStrong,
    /// `2^σ c R^{σ−1} f(R)` with `f` a bound on `ν(B̄(x,R))` and `ν ≥ 1/c`.
    GraphLowerVertex,
    /// Growth condition plus a local inequality.
    Main,
    /// [`BoundKind::Main`] with the growth function of a doubling measure.
    Doubling,
    /// Absolute volume bound `V` and measure of half-balls `≥ 1/c`.
    Main2,
    /// Cayley graphs of hyperbolic groups.
    CayleyHyperbolic,
    /// δ-hyperbolic spaces with a cocompact action.
    HyperbolicSpace,
    /// Covers of compact quotients.
    Covering,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::GraphStrong,
        BoundKind::GraphLowerVertex,
        BoundKind::Main,
        BoundKind::Doubling,
        BoundKind::Main2,
        BoundKind::CayleyHyperbolic,
        BoundKind::HyperbolicSpace,
        BoundKind::Covering,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::GraphStrong => "graph-strong",
            BoundKind::GraphLowerVertex => "graph-lower-vertex",
            BoundKind::Main => "main",
            BoundKind::Doubling => "doubling",
            BoundKind::Main2 => "main2",
            BoundKind::CayleyHyperbolic => "cayley-hyperbolic",
            BoundKind::HyperbolicSpace => "hyperbolic-space",
            BoundKind::Covering => "covering",
        }
    }

    /// Bounds proved for the finite graph itself. The others concern an
    /// ambient space that a finite graph only approximates, so a window cut
    /// by the graph edge cannot serve as evidence for them.
    pub fn holds_on_finite_graphs(self) -> bool {
        matches!(self, BoundKind::GraphStrong | BoundKind::GraphLowerVertex)
    }

    /// Names of the parameters this kind reads; any other is rejected.
    pub fn slots(self) -> &'static [&'static str] {
        match self {
            BoundKind::GraphStrong => &["f", "r0"],
            BoundKind::GraphLowerVertex => &["c", "f", "r0"],
            BoundKind::Main => &["C", "L", "f", "r0"],
            BoundKind::Doubling => &["C", "L", "doubling", "r0"],
            BoundKind::Main2 => &["C", "c", "L", "r0", "V"],
            BoundKind::CayleyHyperbolic => &["C", "c", "H", "delta", "nu_r"],
            BoundKind::HyperbolicSpace => &["C", "c", "V0", "H", "delta", "D"],
            BoundKind::Covering => &["C", "c", "L", "V0", "D", "F_gamma"],
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::input(format!("unknown bound kind `{s}`")))
    }
}

/// Named inputs of the bound formulas. Derived quantities (`λ`, `C₀`, `r`,
/// `s`) are never inputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    /// Constant of the local inequality.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
    /// Reciprocal lower bound on vertex or half-ball measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Dilation of the local inequality.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<GrowthProfile>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<GrowthProfile>,
    #[serde(rename = "F_gamma", default, skip_serializing_if = "Option::is_none")]
    pub f_gamma: Option<GrowthProfile>,
    /// Doubling constant of the measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling: Option<f64>,
    /// Entropy bound.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Diameter bound of the quotient.
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Volume bound of the quotient.
    #[serde(rename = "V0", default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    /// Measure bound `ν(r)` for balls of radius `r = 10(1+δ)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_r: Option<f64>,
}

impl BoundParams {
    fn supplied(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut note = |present: bool, name| {
            if present {
                out.push(name);
            }
        };
        note(self.big_c.is_some(), "C");
        note(self.c.is_some(), "c");
        note(self.l.is_some(), "L");
        note(self.r0.is_some(), "r0");
        note(self.f.is_some(), "f");
        note(self.v.is_some(), "V");
        note(self.f_gamma.is_some(), "F_gamma");
        note(self.doubling.is_some(), "doubling");
        note(self.h.is_some(), "H");
        note(self.delta.is_some(), "delta");
        note(self.d.is_some(), "D");
        note(self.v0.is_some(), "V0");
        note(self.nu_r.is_some(), "nu_r");
        out
    }
}

/// JSON `{"kind": …, "params": {…}, "override": false}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub kind: BoundKind,
    #[serde(default)]
    pub params: BoundParams,
    /// Allow evaluation below the valid radius; results are flagged.
    #[serde(rename = "override", default)]
    pub allow_out_of_regime: bool,
}

impl BoundSpec {
    pub fn new(kind: BoundKind, params: BoundParams) -> Self {
        BoundSpec { kind, params, allow_out_of_regime: false }
    }

    pub fn with_override(mut self, allow: bool) -> Self {
        self.allow_out_of_regime = allow;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One profile lookup made while evaluating a bound, so that constants can
/// be reproduced exactly from the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRead {
    pub name: String,
    #[serde(rename = "R")]
    pub radius: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub sigma: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    /// The bound; `inf` when it exceeds the `f64` range.
    pub value: f64,
    /// `ln value`, finite even when `value` overflows.
    pub ln_value: f64,
    /// Dilation of the right-hand ball.
    pub lambda: f64,
    /// Radius-independent prefactor (`C₀` for the growth-function kinds).
    pub c0: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub valid_from: f64,
    pub in_regime: bool,
    pub reads: Vec<ProfileRead>,
}

/// A product kept both directly and as a sum of logarithms.
#[derive(Clone, Copy)]
struct Product {
    value: f64,
    ln: f64,
}

impl Product {
    fn one() -> Self {
        Product { value: 1.0, ln: 0.0 }
    }

    fn times(self, x: f64) -> Self {
        Product { value: self.value * x, ln: self.ln + x.ln() }
    }

    fn divided(self, x: f64) -> Self {
        Product { value: self.value / x, ln: self.ln - x.ln() }
    }

    fn times_pow(self, x: f64, e: f64) -> Self {
        if e == 0.0 {
            return self;
        }
        Product { value: self.value * x.powf(e), ln: self.ln + e * x.ln() }
    }

    fn times_exp(self, a: f64) -> Self {
        Product { value: self.value * a.exp(), ln: self.ln + a }
    }
}

struct Evaluator {
    kind: BoundKind,
    reads: Vec<ProfileRead>,
}

enum Domain {
    Positive,
    AtLeastOne,
    NonNegative,
}

impl Evaluator {
    fn scalar(&self, name: &str, value: Option<f64>, domain: Domain) -> Result<f64> {
        let x = value.ok_or_else(|| Error::input(format!("bound kind {} needs parameter `{name}`", self.kind)))?;
        let ok = x.is_finite()
            && match domain {
                Domain::Positive => x > 0.0,
                Domain::AtLeastOne => x >= 1.0,
                Domain::NonNegative => x >= 0.0,
            };
        if !ok {
            let want = match domain {
                Domain::Positive => "positive",
                Domain::AtLeastOne => "≥ 1",
                Domain::NonNegative => "nonnegative",
            };
            return Err(Error::input(format!("parameter `{name}` must be finite and {want}, got {x}")));
        }
        Ok(x)
    }

    fn lookup(&mut self, name: &str, profile: Option<&GrowthProfile>, radius: f64) -> Result<f64> {
        let p = profile.ok_or_else(|| Error::input(format!("bound kind {} needs profile `{name}`", self.kind)))?;
        let value = p.eval(radius)?;
        if !(value > 0.0) {
            return Err(Error::input(format!("profile `{name}` must be positive, got {value} at {radius}")));
        }
        self.reads.push(ProfileRead { name: name.into(), radius, value });
        Ok(value)
    }
}

struct Formula {
    product: Product,
    lambda: f64,
    c0: Option<f64>,
    r: Option<f64>,
    s: Option<f64>,
    valid_from: f64,
}

/// Evaluates the bound of `spec` at radius `R` and exponent `σ`, returning
/// the derived constants alongside the value.
pub fn bound_evaluate(spec: &BoundSpec, radius: f64, sigma: f64) -> Result<BoundValue> {
    if !(sigma >= 1.0 && sigma.is_finite()) {
        return Err(Error::input(format!("sigma must be a finite real ≥ 1, got {sigma}")));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::input(format!("R must be a finite nonnegative real, got {radius}")));
    }
    let kind = spec.kind;
    if let Some(extra) = spec.params.supplied().into_iter().find(|s| !kind.slots().contains(s)) {
        return Err(Error::input(format!("parameter `{extra}` is not used by bound kind {kind}")));
    }
    let p = &spec.params;
    let mut ev = Evaluator { kind, reads: Vec::new() };
    let two = Product::one().times_pow(2.0, sigma);
    let two4 = Product::one().times_pow(2.0, 4.0 * sigma);
    let r0 = match p.r0 {
        Some(_) => Some(ev.scalar("r0", p.r0, Domain::Positive)?),
        None => None,
    };

    let formula = match kind {
        BoundKind::GraphStrong => {
            let f2r = ev.lookup("f", p.f.as_ref(), 2.0 * radius)?;
            let product = two.times_pow(radius, sigma - 1.0).times(f2r);
            Formula { product, lambda: 1.0, c0: None, r: None, s: None, valid_from: r0.unwrap_or(0.0) }
        }
        BoundKind::GraphLowerVertex => {
            let c = ev.scalar("c", p.c, Domain::Positive)?;
            let fr = ev.lookup("f", p.f.as_ref(), radius)?;
            let product = two.times(c).times_pow(radius, sigma - 1.0).times(fr);
            Formula { product, lambda: 1.0, c0: None, r: None, s: None, valid_from: r0.unwrap_or(0.0) }
        }
        BoundKind::Main | BoundKind::Doubling => {
            let big_c = ev.scalar("C", p.big_c, Domain::Positive)?;
            let l = ev.scalar("L", p.l, Domain::AtLeastOne)?;
            if r0.is_some_and(|r| r < 1.0) {
                return Err(Error::input("bound kind needs a local inequality with r0 ≥ 1"));
            }
            let (f35, f75, s) = if kind == BoundKind::Main {
                (ev.lookup("f", p.f.as_ref(), 3.5)?, ev.lookup("f", p.f.as_ref(), 7.5)?, None)
            } else {
                let c0 = ev.scalar("doubling", p.doubling, Domain::AtLeastOne)?;
                let s = c0.ln() / 2f64.ln();
                (c0 * c0 * 3.5f64.powf(s), c0 * c0 * 7.5f64.powf(s), Some(s))
            };
            let lambda = f75 + 1.0;
            let c0 = two4.times(big_c).times_pow(f35, sigma + 2.0);
            let far = 4.0 * lambda * radius;
            let scaled = c0.times_pow(lambda * radius, sigma - 1.0);
            let product = match s {
                None => scaled.times(ev.lookup("f", p.f.as_ref(), far)?),
                Some(s) => scaled.times_pow(p.doubling.unwrap(), 2.0).times_pow(far, s),
            };
            Formula { product, lambda, c0: Some(c0.value), r: None, s, valid_from: 4.0 * lambda + l }
        }
        BoundKind::Main2 => {
            let big_c = ev.scalar("C", p.big_c, Domain::Positive)?;
            let c = ev.scalar("c", p.c, Domain::Positive)?;
            let l = ev.scalar("L", p.l, Domain::AtLeastOne)?;
            let r0 = r0.ok_or_else(|| Error::input("bound kind main2 needs parameter `r0`"))?;
            if r0 < 1.0 {
                return Err(Error::input("bound kind main2 needs a local inequality with r0 ≥ 1"));
            }
            let lambda = c * ev.lookup("V", p.v.as_ref(), 4.5)? + 1.0;
            let v25 = ev.lookup("V", p.v.as_ref(), 2.5)?;
            let c0 = two4.times_pow(c, 3.0).times(big_c).times_pow(v25, sigma + 1.0);
            let v_far = ev.lookup("V", p.v.as_ref(), 2.0 * lambda * radius)?;
            let product = c0.times_pow(lambda * radius, sigma - 1.0).times(v_far);
            Formula { product, lambda, c0: Some(c0.value), r: None, s: None, valid_from: r0.max(4.0 * lambda + l) }
        }
        BoundKind::CayleyHyperbolic => {
            let big_c = ev.scalar("C", p.big_c, Domain::Positive)?;
            let c = ev.scalar("c", p.c, Domain::Positive)?;
            let h = ev.scalar("H", p.h, Domain::NonNegative)?;
            let delta = ev.scalar("delta", p.delta, Domain::NonNegative)?;
            let nu_r = ev.scalar("nu_r", p.nu_r, Domain::Positive)?;
            let r = 10.0 * (1.0 + delta);
            let pref =
                two.times(3.0 * big_c * nu_r).divided(c).times_pow(r, -25.0 / 4.0).times_exp(-48.0 * h * (1.0 + delta));
            let product = pref.times_pow(radius, sigma + 21.0 / 4.0).times_exp(6.0 * h * radius);
            Formula { product, lambda: 1.0, c0: Some(pref.value), r: Some(r), s: None, valid_from: r }
        }
        BoundKind::HyperbolicSpace => {
            let big_c = ev.scalar("C", p.big_c, Domain::Positive)?;
            let c = ev.scalar("c", p.c, Domain::Positive)?;
            let v0 = ev.scalar("V0", p.v0, Domain::Positive)?;
            let h = ev.scalar("H", p.h, Domain::NonNegative)?;
            let delta = ev.scalar("delta", p.delta, Domain::NonNegative)?;
            let d = ev.scalar("D", p.d, Domain::NonNegative)?;
            let r = 7.0 * d + 4.0 * delta;
            if r < 2.0 {
                return Err(Error::input(format!("hyperbolic-space needs r = 7D + 4δ ≥ 2, got {r}")));
            }
            let lambda = c * v0 + 1.0;
            let hd = h * d;
            let pref = Product::one()
                .times_pow(2.0, 4.0 * (sigma + 3.0 * hd))
                .times_pow(c, 3.0)
                .times(big_c)
                .times_pow(v0, sigma + 2.0)
                .times_pow(5.0, -6.0 * hd)
                .times_pow(r, -(25.0 / 4.0 + 6.0 * hd))
                .times_exp(-h * (83.0 * d + 48.0 * delta));
            let product =
                pref.times_pow(lambda * radius, sigma + 21.0 / 4.0 + 6.0 * hd).times_exp(12.0 * lambda * h * radius);
            Formula { product, lambda, c0: Some(pref.value), r: Some(r), s: None, valid_from: 2.5 * r }
        }
        BoundKind::Covering => {
            let big_c = ev.scalar("C", p.big_c, Domain::Positive)?;
            let c = ev.scalar("c", p.c, Domain::Positive)?;
            let l = ev.scalar("L", p.l, Domain::AtLeastOne)?;
            let v0 = ev.scalar("V0", p.v0, Domain::Positive)?;
            let d = ev.scalar("D", p.d, Domain::NonNegative)?;
            let lambda = c * v0 + d;
            let c0 = two4.times_pow(c, 3.0).times(big_c).times_pow(v0, sigma + 2.0);
            let growth = ev.lookup("F_gamma", p.f_gamma.as_ref(), 2.0 * lambda * radius)?;
            let product = c0.times_pow(lambda * radius, sigma - 1.0).times(growth);
            Formula { product, lambda, c0: Some(c0.value), r: None, s: None, valid_from: 4.0 * lambda + l }
        }
    };

    let in_regime = radius >= formula.valid_from;
    if !in_regime && !spec.allow_out_of_regime {
        return Err(Error::Regime { kind: kind.to_string(), radius, from: formula.valid_from });
    }
    Ok(BoundValue {
        kind,
        sigma,
        radius,
        value: formula.product.value,
        ln_value: formula.product.ln,
        lambda: formula.lambda,
        c0: formula.c0,
        r: formula.r,
        s: formula.s,
        valid_from: formula.valid_from,
        in_regime,
        reads: ev.reads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::generators::path_graph;
    use crate::mmgraph::integer_radii;
    use crate::GrowthMode;
    use proptest::prelude::*;

    fn flat(value: f64, up_to: usize) -> GrowthProfile {
        GrowthProfile::constant(value, up_to as f64, GrowthMode::VertexRatio).unwrap()
    }

    fn rel_eq(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs()
    }

    #[test]
    fn graph_strong_on_long_path() {
        let f = path_graph(40).growth_function(&integer_radii(10), GrowthMode::VertexRatio).unwrap();
        assert_eq!(f.eval(4.0).unwrap(), 9.0);
        let spec = BoundSpec::new(BoundKind::GraphStrong, BoundParams { f: Some(f), ..Default::default() });
        let b = bound_evaluate(&spec, 2.0, 1.0).unwrap();
        assert!(rel_eq(b.value, 18.0));
        assert_eq!(b.lambda, 1.0);
        assert_eq!(b.reads, vec![ProfileRead { name: "f".into(), radius: 4.0, value: 9.0 }]);
    }

    #[test]
    fn main_with_flat_growth() {
        let params = BoundParams { big_c: Some(1.0), l: Some(1.0), f: Some(flat(5.0, 100_000)), ..Default::default() };
        let spec = BoundSpec::new(BoundKind::Main, params);
        for r in [25.0, 30.0, 100.0] {
            let b = bound_evaluate(&spec, r, 1.0).unwrap();
            assert_eq!(b.lambda, 6.0);
            assert!(rel_eq(b.c0.unwrap(), 2000.0));
            assert!(rel_eq(b.value, 10000.0));
            assert_eq!(b.valid_from, 25.0);
        }
        let err = bound_evaluate(&spec, 24.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Regime { from, .. } if from == 25.0));
        let flagged = bound_evaluate(&spec.clone().with_override(true), 24.0, 1.0).unwrap();
        assert!(!flagged.in_regime);
        let short = BoundSpec::new(
            BoundKind::Main,
            BoundParams { big_c: Some(1.0), l: Some(1.0), f: Some(flat(5.0, 50)), ..Default::default() },
        );
        assert!(matches!(bound_evaluate(&short, 25.0, 1.0), Err(Error::ProfileExhausted { .. })));
    }

    #[test]
    fn cayley_hyperbolic_collapses_at_zero_entropy() {
        let params = BoundParams {
            big_c: Some(1.0),
            c: Some(1.0),
            h: Some(0.0),
            delta: Some(0.0),
            nu_r: Some(41.0),
            ..Default::default()
        };
        let b = bound_evaluate(&BoundSpec::new(BoundKind::CayleyHyperbolic, params), 10.0, 1.0).unwrap();
        assert!(rel_eq(b.value, 246.0));
        assert_eq!(b.r, Some(10.0));
    }

    #[test]
    fn derived_constants_of_other_kinds() {
        // main2: V ≡ 3, c = 1 → λ = 4, prefactor 2^4·3^2
        let params = BoundParams {
            big_c: Some(1.0),
            c: Some(1.0),
            l: Some(1.0),
            r0: Some(1.0),
            v: Some(flat(3.0, 1000)),
            ..Default::default()
        };
        let b = bound_evaluate(&BoundSpec::new(BoundKind::Main2, params), 17.0, 1.0).unwrap();
        assert_eq!((b.lambda, b.valid_from), (4.0, 17.0));
        assert!(rel_eq(b.value, 16.0 * 9.0 * 3.0));

        // doubling constant 2 → s = 1, f(R) = 4R
        let params = BoundParams { big_c: Some(1.0), l: Some(1.0), doubling: Some(2.0), ..Default::default() };
        let b = bound_evaluate(&BoundSpec::new(BoundKind::Doubling, params), 200.0, 1.0).unwrap();
        assert!(rel_eq(b.s.unwrap(), 1.0));
        assert!(rel_eq(b.lambda, 31.0));
        assert!(rel_eq(b.c0.unwrap(), 16.0 * 14f64.powi(3)));
        assert!(rel_eq(b.value, 16.0 * 14f64.powi(3) * 4.0 * 4.0 * 31.0 * 200.0));

        // covering: c = V0 = 1, D = 0 → λ = 1
        let params = BoundParams {
            big_c: Some(2.0),
            c: Some(1.0),
            l: Some(1.0),
            v0: Some(1.0),
            d: Some(0.0),
            f_gamma: Some(
                GrowthProfile::from_fn(integer_radii(20), GrowthMode::Absolute, |r| 2.0 * 3f64.powf(r) - 1.0).unwrap(),
            ),
            ..Default::default()
        };
        let b = bound_evaluate(&BoundSpec::new(BoundKind::Covering, params), 5.0, 2.0).unwrap();
        assert_eq!(b.lambda, 1.0);
        assert!(rel_eq(b.value, 256.0 * 2.0 * 5.0 * (2.0 * 3f64.powi(10) - 1.0)));

        // hyperbolic-space at H = 0: no exponential factors
        let params = BoundParams {
            big_c: Some(1.0),
            c: Some(1.0),
            v0: Some(2.0),
            h: Some(0.0),
            delta: Some(0.5),
            d: Some(0.0),
            ..Default::default()
        };
        let b = bound_evaluate(&BoundSpec::new(BoundKind::HyperbolicSpace, params), 5.0, 1.0).unwrap();
        assert_eq!((b.r, b.lambda, b.valid_from), (Some(2.0), 3.0, 5.0));
        assert!(rel_eq(b.value, 16.0 * 8.0 / 2f64.powf(6.25) * 15f64.powf(6.25)));
    }

    #[test]
    fn parameter_validation() {
        let missing = BoundSpec::new(BoundKind::Main, BoundParams { big_c: Some(1.0), ..Default::default() });
        assert!(matches!(bound_evaluate(&missing, 30.0, 1.0), Err(Error::Input(m)) if m.contains("`L`")));
        let extra = BoundSpec::new(
            BoundKind::GraphStrong,
            BoundParams { h: Some(1.0), f: Some(flat(1.0, 9)), ..Default::default() },
        );
        assert!(bound_evaluate(&extra, 1.0, 1.0).is_err());
        let small_r = BoundParams {
            big_c: Some(1.0),
            c: Some(1.0),
            v0: Some(1.0),
            h: Some(0.0),
            delta: Some(0.0),
            d: Some(0.2),
            ..Default::default()
        };
        assert!(bound_evaluate(&BoundSpec::new(BoundKind::HyperbolicSpace, small_r), 9.0, 1.0).is_err());
        let ok = BoundSpec::new(BoundKind::GraphStrong, BoundParams { f: Some(flat(1.0, 9)), ..Default::default() });
        assert!(bound_evaluate(&ok, 1.0, 0.5).is_err());
        assert!(bound_evaluate(&ok, -1.0, 1.0).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let text =
            r#"{"kind":"main","params":{"C":1,"L":1,"f":{"radii":[0,4,8,1000],"values":[1,5,5,5]}},"override":true}"#;
        let spec = BoundSpec::from_json(text).unwrap();
        assert_eq!(spec.kind, BoundKind::Main);
        assert!(spec.allow_out_of_regime);
        let again: BoundSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        assert!(BoundSpec::from_json(r#"{"kind":"main","params":{"lambda":3}}"#).is_err());
        assert!(BoundSpec::from_json(r#"{"kind":"nope"}"#).is_err());
        for k in BoundKind::ALL {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
        }
    }

    #[test]
    fn overflow_is_carried_in_logs() {
        let params = BoundParams {
            big_c: Some(1.0),
            c: Some(1.0),
            v0: Some(5.0),
            h: Some(3f64.ln()),
            delta: Some(1.0),
            d: Some(2.0),
            ..Default::default()
        };
        let b = bound_evaluate(&BoundSpec::new(BoundKind::HyperbolicSpace, params), 100.0, 1.0).unwrap();
        assert!(b.value.is_infinite());
        assert!(b.ln_value.is_finite() && b.ln_value > 709.0);
    }

    proptest! {
        #[test]
        fn graph_strong_is_monotone_in_radius(steps in proptest::collection::vec(0.0f64..3.0, 2..30), sigma in 1.0f64..4.0) {
            let values: Vec<f64> = steps.iter().scan(1.0, |acc, s| { *acc += s; Some(*acc) }).collect();
            let f = GrowthProfile::new(integer_radii(values.len() - 1), values.clone(), GrowthMode::VertexRatio).unwrap();
            let spec = BoundSpec::new(BoundKind::GraphStrong, BoundParams { f: Some(f), ..Default::default() });
            let top = (values.len() - 1) as f64 / 2.0;
            let mut prev = 0.0;
            for k in 0..=20 {
                let r = top * k as f64 / 20.0;
                let b = bound_evaluate(&spec, r, sigma).unwrap().value;
                prop_assert!(b >= prev, "R={r}: {b} < {prev}");
                prev = b;
            }
        }

        #[test]
        fn cayley_hyperbolic_grows_with_entropy(delta in 0.0f64..2.0, extra in 0.0f64..30.0, sigma in 1.0f64..3.0) {
            let r = 10.0 * (1.0 + delta) + extra;
            let at = |h: f64| {
                let params = BoundParams { big_c: Some(2.0), c: Some(0.5), h: Some(h), delta: Some(delta), nu_r: Some(7.0), ..Default::default() };
                bound_evaluate(&BoundSpec::new(BoundKind::CayleyHyperbolic, params), r, sigma).unwrap().ln_value
            };
            let mut prev = at(0.0);
            for k in 1..=10 {
                let next = at(0.1 * k as f64);
                prop_assert!(next > prev);
                prev = next;
            }
        }
    }
}
