//! Radial profiles `φ̇ : ℕ₀ → ℝ` given by an explicit prefix and a declared tail.
//!
//! Tails are either exactly zero, eventually `c₊ + c₋(−1)ⁿ`, or an analytic
//! [`Rule`]. Rules know their own parity limits and can produce a geometric
//! envelope of their remainder, which is what the trace-norm tail bounds use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form sequences. Every rule is evaluated at the absolute index `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// `value`
    Constant { value: f64 },
    /// `value · (−1)ⁿ`
    Alternating { value: f64 },
    /// `scale · ratioⁿ`
    Geometric { scale: f64, ratio: f64 },
    /// `scale · e^{−rate·n}`
    Exponential { scale: f64, rate: f64 },
    /// `coeff · n^exponent`, exponent ≥ 0
    Power { coeff: f64, exponent: f64 },
    Sum { terms: Vec<Rule> },
    Scaled { factor: f64, inner: Box<Rule> },
    /// `inner(n + offset)`
    Shifted { offset: usize, inner: Box<Rule> },
    /// `e^{−t · inner(n)}`
    ExpNeg { t: f64, inner: Box<Rule> },
}

/// Limit of a rule along one parity class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
    Unknown,
}

impl Limit {
    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn add(self, other: Limit) -> Limit {
        use Limit::*;
        match (self, other) {
            (Unknown, _) | (_, Unknown) => Unknown,
            (Finite(a), Finite(b)) => Finite(a + b),
            (PlusInfinity, MinusInfinity) | (MinusInfinity, PlusInfinity) => Unknown,
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (MinusInfinity, _) | (_, MinusInfinity) => MinusInfinity,
        }
    }

    fn scale(self, f: f64) -> Limit {
        use Limit::*;
        match self {
            _ if f == 0.0 => Finite(0.0),
            Finite(v) => Finite(f * v),
            PlusInfinity if f > 0.0 => PlusInfinity,
            PlusInfinity => MinusInfinity,
            MinusInfinity if f > 0.0 => MinusInfinity,
            MinusInfinity => PlusInfinity,
            Unknown => Unknown,
        }
    }

    fn signed_infinity(sign: f64) -> Limit {
        if sign > 0.0 {
            Limit::PlusInfinity
        } else if sign < 0.0 {
            Limit::MinusInfinity
        } else {
            Limit::Finite(0.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityLimits {
    pub even: Limit,
    pub odd: Limit,
}

impl ParityLimits {
    fn both(l: Limit) -> Self {
        ParityLimits { even: l, odd: l }
    }

    fn swap(self) -> Self {
        ParityLimits { even: self.odd, odd: self.even }
    }

    /// `(c₊, c₋)` when both limits are finite.
    pub fn constants(&self) -> Option<(f64, f64)> {
        let e = self.even.finite()?;
        let o = self.odd.finite()?;
        Some(((e + o) / 2.0, (e - o) / 2.0))
    }

    fn tends_to_plus_infinity(&self) -> bool {
        self.even == Limit::PlusInfinity && self.odd == Limit::PlusInfinity
    }
}

/// `|ψ̇(n)| ≤ amplitude · ratioⁿ` for every `n ≥ from`, where `ψ̇` is the
/// sequence minus its two-atom limit part `c₊ + c₋(−1)ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub amplitude: f64,
    pub ratio: f64,
    pub from: usize,
}

/// `value(n) ≥ slope · n + intercept` for every `n ≥ from`, with `slope > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFloor {
    pub slope: f64,
    pub intercept: f64,
}

// Ratios are kept away from 0 so that logarithms stay finite; enlarging the
// ratio only weakens an envelope.
const MIN_RATIO: f64 = 1e-6;

fn envelope(amplitude: f64, ratio: f64, from: usize) -> Envelope {
    Envelope { amplitude, ratio: ratio.clamp(MIN_RATIO, 1.0), from }
}

impl Rule {
    /// `(a, b)` with `eval(n) = a + b·n` when the rule is affine.
    fn affine(&self) -> Option<(f64, f64)> {
        match self {
            Rule::Constant { value } => Some((*value, 0.0)),
            Rule::Power { coeff, .. } if *coeff == 0.0 => Some((0.0, 0.0)),
            Rule::Power { coeff, exponent } if *exponent == 0.0 => Some((*coeff, 0.0)),
            Rule::Power { coeff, exponent } if *exponent == 1.0 => Some((0.0, *coeff)),
            Rule::Sum { terms } => {
                terms.iter().try_fold((0.0, 0.0), |(a, b), r| r.affine().map(|(x, y)| (a + x, b + y)))
            }
            Rule::Scaled { factor, inner } => inner.affine().map(|(a, b)| (factor * a, factor * b)),
            Rule::Shifted { offset, inner } => inner.affine().map(|(a, b)| (a + b * *offset as f64, b)),
            _ => None,
        }
    }

    /// Terms `(c, r)` with `eval(n) = Σ c·rⁿ` exactly, equal ratios merged and
    /// vanishing coefficients dropped. `None` when the rule is not of that form.
    pub fn exponential_terms(&self) -> Option<Vec<(f64, f64)>> {
        let mut raw = Vec::new();
        self.push_terms(&mut raw)?;
        raw.sort_by(|x, y| x.1.total_cmp(&y.1));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (c, r) in raw {
            match out.last_mut() {
                Some(last) if last.1 == r => last.0 += c,
                _ => out.push((c, r)),
            }
        }
        out.retain(|&(c, _)| c != 0.0);
        Some(out)
    }

    fn push_terms(&self, out: &mut Vec<(f64, f64)>) -> Option<()> {
        match self {
            Rule::Constant { value } => out.push((*value, 1.0)),
            Rule::Alternating { value } => out.push((*value, -1.0)),
            Rule::Geometric { scale, ratio } => out.push((*scale, *ratio)),
            Rule::Exponential { scale, rate } => out.push((*scale, (-rate).exp())),
            Rule::Power { .. } => match self.affine()? {
                (a, b) if b == 0.0 => out.push((a, 1.0)),
                _ => return None,
            },
            Rule::Sum { terms } => {
                for t in terms {
                    t.push_terms(out)?;
                }
            }
            Rule::Scaled { factor, inner } => {
                let mut v = Vec::new();
                inner.push_terms(&mut v)?;
                out.extend(v.into_iter().map(|(c, r)| (factor * c, r)));
            }
            Rule::Shifted { offset, inner } => {
                let mut v = Vec::new();
                inner.push_terms(&mut v)?;
                out.extend(v.into_iter().map(|(c, r)| (c * r.powf(*offset as f64), r)));
            }
            Rule::ExpNeg { t, inner } => {
                let (a, b) = inner.affine()?;
                out.push(((-t * a).exp(), (-t * b).exp()));
            }
        }
        Some(())
    }

    pub fn eval(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Rule::Constant { value } => *value,
            Rule::Alternating { value } => {
                if n % 2 == 0 {
                    *value
                } else {
                    -value
                }
            }
            Rule::Geometric { scale, ratio } => scale * ratio.powf(nf),
            Rule::Exponential { scale, rate } => scale * (-rate * nf).exp(),
            Rule::Power { coeff, exponent } => coeff * nf.powf(*exponent),
            Rule::Sum { terms } => terms.iter().map(|r| r.eval(n)).sum(),
            Rule::Scaled { factor, inner } => factor * inner.eval(n),
            Rule::Shifted { offset, inner } => inner.eval(n + offset),
            Rule::ExpNeg { t, inner } => (-t * inner.eval(n)).exp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        match self {
            Rule::Constant { value } | Rule::Alternating { value } => finite("value", *value),
            Rule::Geometric { scale, ratio } => {
                finite("scale", *scale)?;
                finite("ratio", *ratio)
            }
            Rule::Exponential { scale, rate } => {
                finite("scale", *scale)?;
                finite("rate", *rate)
            }
            Rule::Power { coeff, exponent } => {
                finite("coeff", *coeff)?;
                finite("exponent", *exponent)?;
                if *exponent < 0.0 {
                    return Err(Error::param("exponent", "must be nonnegative"));
                }
                Ok(())
            }
            Rule::Sum { terms } => terms.iter().try_for_each(Rule::validate),
            Rule::Scaled { factor, inner } => {
                finite("factor", *factor)?;
                inner.validate()
            }
            Rule::Shifted { inner, .. } => inner.validate(),
            Rule::ExpNeg { t, inner } => {
                finite("t", *t)?;
                if *t <= 0.0 {
                    return Err(Error::param("t", "must be positive"));
                }
                inner.validate()
            }
        }
    }

    pub fn limits(&self) -> ParityLimits {
        use Limit::*;
        match self {
            Rule::Constant { value } => ParityLimits::both(Finite(*value)),
            Rule::Alternating { value } => ParityLimits { even: Finite(*value), odd: Finite(-value) },
            Rule::Geometric { scale, ratio } => geometric_limits(*scale, *ratio),
            Rule::Exponential { scale, rate } => geometric_limits(*scale, (-rate).exp()),
            Rule::Power { coeff, exponent } => {
                if *exponent == 0.0 {
                    ParityLimits::both(Finite(*coeff))
                } else {
                    ParityLimits::both(Limit::signed_infinity(*coeff))
                }
            }
            Rule::Sum { terms } => terms.iter().fold(ParityLimits::both(Finite(0.0)), |acc, r| {
                let l = r.limits();
                ParityLimits { even: acc.even.add(l.even), odd: acc.odd.add(l.odd) }
            }),
            Rule::Scaled { factor, inner } => {
                let l = inner.limits();
                ParityLimits { even: l.even.scale(*factor), odd: l.odd.scale(*factor) }
            }
            Rule::Shifted { offset, inner } => {
                let l = inner.limits();
                if offset % 2 == 0 {
                    l
                } else {
                    l.swap()
                }
            }
            Rule::ExpNeg { t, inner } => {
                let l = inner.limits();
                let map = |x: Limit| match x {
                    Finite(v) => Finite((-t * v).exp()),
                    PlusInfinity => Finite(0.0),
                    MinusInfinity => PlusInfinity,
                    Unknown => Unknown,
                };
                ParityLimits { even: map(l.even), odd: map(l.odd) }
            }
        }
    }

    /// Geometric envelope of the remainder beyond `from`, when one is known.
    pub fn envelope(&self, from: usize) -> Option<Envelope> {
        let zero = Some(envelope(0.0, 0.5, from));
        match self {
            Rule::Constant { .. } | Rule::Alternating { .. } => zero,
            Rule::Geometric { scale, ratio } => {
                if *scale == 0.0 || ratio.abs() == 1.0 {
                    zero
                } else if ratio.abs() < 1.0 {
                    Some(envelope(scale.abs(), ratio.abs(), from))
                } else {
                    None
                }
            }
            Rule::Exponential { scale, rate } => {
                if *scale == 0.0 || *rate == 0.0 {
                    zero
                } else if *rate > 0.0 {
                    Some(envelope(scale.abs(), (-rate).exp(), from))
                } else {
                    None
                }
            }
            Rule::Power { coeff, exponent } => {
                if *coeff == 0.0 || *exponent == 0.0 {
                    zero
                } else {
                    None
                }
            }
            Rule::Sum { terms } => {
                let mut amplitude = 0.0;
                let mut ratio: f64 = MIN_RATIO;
                let parts = terms.iter().map(|r| r.envelope(from)).collect::<Option<Vec<_>>>()?;
                for e in &parts {
                    ratio = ratio.max(e.ratio);
                }
                for e in &parts {
                    // a·ρᵢⁿ ≤ a·(ρᵢ/ρ)^from·ρⁿ for n ≥ from
                    amplitude += e.amplitude * (e.ratio / ratio).powf(from as f64);
                }
                Some(envelope(amplitude, ratio, from))
            }
            Rule::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    return zero;
                }
                let e = inner.envelope(from)?;
                Some(envelope(e.amplitude * factor.abs(), e.ratio, from))
            }
            Rule::Shifted { offset, inner } => {
                let e = inner.envelope(from + offset)?;
                Some(envelope(e.amplitude * e.ratio.powf(*offset as f64), e.ratio, from))
            }
            Rule::ExpNeg { t, inner } => {
                let l = inner.limits();
                if let (Some(le), Some(lo)) = (l.even.finite(), l.odd.finite()) {
                    let e = inner.envelope(from)?;
                    // |e^{−tx} − e^{−tL}| ≤ t·e^{−t·min(x, L)}·|x − L|
                    let low = le.min(lo) - e.amplitude * e.ratio.powf(from as f64);
                    let amplitude = t * (-t * low).exp() * e.amplitude;
                    Some(envelope(amplitude, e.ratio, from))
                } else if l.tends_to_plus_infinity() {
                    let f = inner.linear_floor(from)?;
                    Some(envelope((-t * f.intercept).exp(), (-t * f.slope).exp(), from))
                } else {
                    None
                }
            }
        }
    }

    /// A lower bound `slope·n + intercept` (slope > 0) valid for `n ≥ from`,
    /// available for rules tending to `+∞`.
    pub fn linear_floor(&self, from: usize) -> Option<LinearFloor> {
        let f = from as f64;
        match self {
            Rule::Geometric { scale, ratio } => convex_exponential_floor(*scale, *ratio, f),
            Rule::Exponential { scale, rate } => convex_exponential_floor(*scale, (-rate).exp(), f),
            Rule::Power { coeff, exponent } => {
                if *coeff > 0.0 && *exponent >= 1.0 {
                    Some(LinearFloor { slope: coeff * f.max(1.0).powf(exponent - 1.0), intercept: 0.0 })
                } else {
                    None
                }
            }
            Rule::Sum { terms } => {
                let mut slope = 0.0;
                let mut intercept = 0.0;
                for r in terms {
                    if let Some(fl) = r.linear_floor(from) {
                        slope += fl.slope;
                        intercept += fl.intercept;
                    } else {
                        intercept += r.lower_bound(from)?;
                    }
                }
                (slope > 0.0).then_some(LinearFloor { slope, intercept })
            }
            Rule::Scaled { factor, inner } if *factor > 0.0 => {
                let fl = inner.linear_floor(from)?;
                Some(LinearFloor { slope: factor * fl.slope, intercept: factor * fl.intercept })
            }
            Rule::Shifted { offset, inner } => {
                let fl = inner.linear_floor(from + offset)?;
                Some(LinearFloor { slope: fl.slope, intercept: fl.intercept + fl.slope * *offset as f64 })
            }
            _ => None,
        }
    }

    /// A constant lower bound valid for `n ≥ from`, for rules with finite limits.
    fn lower_bound(&self, from: usize) -> Option<f64> {
        let l = self.limits();
        let (le, lo) = (l.even.finite()?, l.odd.finite()?);
        let e = self.envelope(from)?;
        let (c_plus, c_minus) = ((le + lo) / 2.0, (le - lo) / 2.0);
        Some(c_plus - c_minus.abs() - e.amplitude * e.ratio.powf(from as f64))
    }
}

fn geometric_limits(scale: f64, ratio: f64) -> ParityLimits {
    use Limit::*;
    if scale == 0.0 || ratio.abs() < 1.0 {
        ParityLimits::both(Finite(0.0))
    } else if ratio == 1.0 {
        ParityLimits::both(Finite(scale))
    } else if ratio == -1.0 {
        ParityLimits { even: Finite(scale), odd: Finite(-scale) }
    } else if ratio > 1.0 {
        ParityLimits::both(Limit::signed_infinity(scale))
    } else {
        ParityLimits { even: Limit::signed_infinity(scale), odd: Limit::signed_infinity(-scale) }
    }
}

// Tangent line at `f` of the convex map n ↦ s·ρⁿ (s > 0, ρ > 1).
fn convex_exponential_floor(scale: f64, ratio: f64, f: f64) -> Option<LinearFloor> {
    if !(scale > 0.0 && ratio > 1.0) {
        return None;
    }
    let value = scale * ratio.powf(f);
    let slope = value * ratio.ln();
    Some(LinearFloor { slope, intercept: value - slope * f })
}

/// Behaviour of `φ̇(n)` beyond the explicit prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    Zero,
    Constants { c_plus: f64, c_minus: f64 },
    Analytic { rule: Rule },
}

/// `φ̇(n) = prefix[n]` for `n < prefix.len()`, given by the tail otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    #[serde(default)]
    pub prefix: Vec<f64>,
    pub tail: Tail,
}

impl RadialProfile {
    pub fn new(prefix: Vec<f64>, tail: Tail) -> Result<Self> {
        let p = RadialProfile { prefix, tail };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prefix.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("prefix", "entries must be finite"));
        }
        match &self.tail {
            Tail::Zero => Ok(()),
            Tail::Constants { c_plus, c_minus } => {
                if c_plus.is_finite() && c_minus.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("tail", "constants must be finite"))
                }
            }
            Tail::Analytic { rule } => rule.validate(),
        }
    }

    pub fn analytic(rule: Rule) -> Self {
        RadialProfile { prefix: Vec::new(), tail: Tail::Analytic { rule } }
    }

    /// Finitely supported profile.
    pub fn finite(prefix: Vec<f64>) -> Self {
        RadialProfile { prefix, tail: Tail::Zero }
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile { prefix: Vec::new(), tail: Tail::Constants { c_plus: c, c_minus: 0.0 } }
    }

    /// `n ↦ e^{−tn}`
    pub fn exponential(t: f64) -> Self {
        Self::analytic(Rule::Exponential { scale: 1.0, rate: t })
    }

    /// `n ↦ rⁿ`
    pub fn geometric(r: f64) -> Self {
        Self::analytic(Rule::Geometric { scale: 1.0, ratio: r })
    }

    /// `n ↦ c·n^p`
    pub fn power(coeff: f64, exponent: f64) -> Self {
        Self::analytic(Rule::Power { coeff, exponent })
    }

    /// Word length, `n ↦ n`.
    pub fn linear() -> Self {
        Self::power(1.0, 1.0)
    }

    pub fn value(&self, n: usize) -> f64 {
        if let Some(&v) = self.prefix.get(n) {
            return v;
        }
        match &self.tail {
            Tail::Zero => 0.0,
            Tail::Constants { c_plus, c_minus } => {
                if n % 2 == 0 {
                    c_plus + c_minus
                } else {
                    c_plus - c_minus
                }
            }
            Tail::Analytic { rule } => rule.eval(n),
        }
    }

    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len).map(|n| self.value(n)).collect()
    }

    pub fn limits(&self) -> ParityLimits {
        match &self.tail {
            Tail::Zero => ParityLimits::both(Limit::Finite(0.0)),
            Tail::Constants { c_plus, c_minus } => {
                ParityLimits { even: Limit::Finite(c_plus + c_minus), odd: Limit::Finite(c_plus - c_minus) }
            }
            Tail::Analytic { rule } => rule.limits(),
        }
    }

    /// `φ̇(n) = g(n) + Σ c·rⁿ` with `g` finitely supported, as `(g, terms)`.
    pub fn exponential_terms(&self) -> Option<(Vec<f64>, Vec<(f64, f64)>)> {
        let terms = match &self.tail {
            Tail::Zero => Vec::new(),
            Tail::Constants { c_plus, c_minus } => {
                let mut t = vec![(*c_plus, 1.0), (*c_minus, -1.0)];
                t.retain(|&(c, _)| c != 0.0);
                t
            }
            Tail::Analytic { rule } => rule.exponential_terms()?,
        };
        let mut g: Vec<f64> = self
            .prefix
            .iter()
            .enumerate()
            .map(|(n, v)| v - terms.iter().map(|(c, r)| c * r.powf(n as f64)).sum::<f64>())
            .collect();
        while g.last() == Some(&0.0) {
            g.pop();
        }
        Some((g, terms))
    }

    /// `(c₊, c₋)` with `φ̇(n) − c₊ − c₋(−1)ⁿ → 0`.
    pub fn constants(&self) -> Result<(f64, f64)> {
        self.limits().constants().ok_or(Error::Divergent)
    }

    /// `ψ̇(n) = φ̇(n) − c₊ − c₋(−1)ⁿ`.
    pub fn remainder(&self, n: usize) -> Result<f64> {
        let (cp, cm) = self.constants()?;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(self.value(n) - cp - cm * sign)
    }

    /// Envelope of the remainder valid from `max(from, prefix.len())` on.
    pub fn remainder_envelope(&self, from: usize) -> Option<Envelope> {
        let from = from.max(self.prefix.len());
        match &self.tail {
            Tail::Zero | Tail::Constants { .. } => Some(envelope(0.0, 0.5, from)),
            Tail::Analytic { rule } => rule.envelope(from),
        }
    }

    /// `n ↦ φ̇(n + k)`.
    pub fn shifted(&self, k: usize) -> Self {
        let prefix = self.prefix.iter().skip(k).copied().collect();
        let tail = match &self.tail {
            Tail::Zero => Tail::Zero,
            Tail::Constants { c_plus, c_minus } => Tail::Constants {
                c_plus: *c_plus,
                c_minus: if k % 2 == 0 { *c_minus } else { -c_minus },
            },
            Tail::Analytic { rule } if k == 0 => Tail::Analytic { rule: rule.clone() },
            Tail::Analytic { rule } => {
                Tail::Analytic { rule: Rule::Shifted { offset: k, inner: Box::new(rule.clone()) } }
            }
        };
        RadialProfile { prefix, tail }
    }

    /// `n ↦ e^{−t φ̇(n)}`.
    pub fn exp_scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", "must be positive"));
        }
        let prefix = self.prefix.iter().map(|v| (-t * v).exp()).collect();
        let tail = match &self.tail {
            Tail::Zero => Tail::Constants { c_plus: 1.0, c_minus: 0.0 },
            Tail::Constants { c_plus, c_minus } => {
                let even = (-t * (c_plus + c_minus)).exp();
                let odd = (-t * (c_plus - c_minus)).exp();
                Tail::Constants { c_plus: (even + odd) / 2.0, c_minus: (even - odd) / 2.0 }
            }
            Tail::Analytic { rule } => Tail::Analytic { rule: Rule::ExpNeg { t, inner: Box::new(rule.clone()) } },
        };
        Ok(RadialProfile { prefix, tail })
    }

    /// `n ↦ φ̇(n) − φ̇(n + 2)`, the generating sequence of the Hankel part `h`.
    pub fn second_difference(&self) -> Self {
        let prefix = (0..self.prefix.len()).map(|n| self.value(n) - self.value(n + 2)).collect();
        let tail = match &self.tail {
            Tail::Zero | Tail::Constants { .. } => Tail::Zero,
            Tail::Analytic { rule } => Tail::Analytic {
                rule: Rule::Sum {
                    terms: vec![
                        rule.clone(),
                        Rule::Scaled {
                            factor: -1.0,
                            inner: Box::new(Rule::Shifted { offset: 2, inner: Box::new(rule.clone()) }),
                        },
                    ],
                },
            },
        };
        RadialProfile { prefix, tail }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_envelope(p: &RadialProfile, from: usize, upto: usize) {
        let e = p.remainder_envelope(from).expect("envelope");
        for n in e.from..upto {
            let r = p.remainder(n).unwrap().abs();
            let bound = e.amplitude * e.ratio.powi(n as i32);
            assert!(r <= bound * (1.0 + 1e-12) + 1e-300, "n={n}: {r} > {bound}");
        }
    }

    #[test]
    fn constants_read_off() {
        let p = RadialProfile::analytic(Rule::Sum {
            terms: vec![
                Rule::Constant { value: 2.0 },
                Rule::Alternating { value: 1.0 },
                Rule::Geometric { scale: 1.0, ratio: 0.5 },
            ],
        });
        assert_eq!(p.constants().unwrap(), (2.0, 1.0));
        assert!((p.remainder(3).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(RadialProfile::constant(3.0).constants().unwrap(), (3.0, 0.0));
        let alt = RadialProfile::analytic(Rule::Alternating { value: 5.0 });
        assert_eq!(alt.constants().unwrap(), (0.0, 5.0));
        assert_eq!(RadialProfile::linear().constants(), Err(Error::Divergent));
    }

    #[test]
    fn exp_of_linear_is_geometric() {
        let p = RadialProfile::linear().exp_scaled(std::f64::consts::LN_2).unwrap();
        for n in 0..20 {
            assert!((p.value(n) - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        assert_eq!(p.constants().unwrap(), (0.0, 0.0));
        check_envelope(&p, 0, 200);
    }

    #[test]
    fn envelopes_bound_remainders() {
        check_envelope(&RadialProfile::exponential(0.3), 0, 300);
        check_envelope(&RadialProfile::power(1.0, 2.0).exp_scaled(0.1).unwrap(), 0, 300);
        check_envelope(&RadialProfile::geometric(-0.7).second_difference(), 0, 300);
        check_envelope(&RadialProfile::geometric(0.9).exp_scaled(2.0).unwrap(), 0, 300);
        let shifted = RadialProfile::power(2.0, 1.5).exp_scaled(0.5).unwrap().shifted(3);
        check_envelope(&shifted, 0, 300);
        check_envelope(&shifted.second_difference(), 5, 300);
    }

    #[test]
    fn shifting_constants_flips_the_alternating_part() {
        let p = RadialProfile::new(vec![9.0], Tail::Constants { c_plus: 2.0, c_minus: 1.0 }).unwrap();
        let s = p.shifted(1);
        for n in 0..6 {
            assert_eq!(s.value(n), p.value(n + 1));
        }
    }

    #[test]
    fn second_difference_of_constants_vanishes() {
        let p = RadialProfile::new(vec![1.0, 0.5], Tail::Constants { c_plus: 1.0, c_minus: 1.0 }).unwrap();
        let d = p.second_difference();
        assert_eq!(d.values(6), vec![1.0 - 2.0, 0.5 - 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn json_shape() {
        let p = RadialProfile::exponential(0.5);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"analytic\""));
        let zero: RadialProfile =
            serde_json::from_str(r#"{"prefix":[1,0.5,0.25],"tail":{"kind":"zero"}}"#).unwrap();
        assert_eq!(zero.value(2), 0.25);
        assert_eq!(zero.value(3), 0.0);
        let ana: RadialProfile = serde_json::from_str(
            r#"{"tail":{"kind":"analytic","rule":{"rule":"power","coeff":1,"exponent":2}}}"#,
        )
        .unwrap();
        assert_eq!(ana.value(4), 16.0);
    }
}
