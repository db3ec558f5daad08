//! Free groups: reduced words, Cayley balls, radial kernels and the
//! closed-form radial Herz–Schur norms on `F_∞` and `F_n`.

mod tree;
mod word;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use tree::{additivity_check, tree_lift_phi, TreePortion, TreeVertex};
pub use word::Word;

use crate::error::{Error, Result};
use crate::kernel::{lift_radial, HankelKernel, Kernel, RadialProfile};
use crate::qtransform::{chi_norm, QParam};
use crate::scalar::{real, Real};
use crate::toeplitz::{omega_norm, DiagonalLimit, OmegaNormCertificate};

/// Default bound on the number of words in a ball.
pub const BALL_CAP: usize = 20_000;

/// `F_∞` or the free group on `n ≥ 2` generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Infinite,
    Free(usize),
}

impl Group {
    pub fn generators(self) -> Option<usize> {
        match self {
            Group::Infinite => None,
            Group::Free(n) => Some(n),
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    /// `finf`, or `fN` with `N ≥ 2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "finf" || s == "f_inf" || s == "infinite" {
            return Ok(Group::Infinite);
        }
        let n: usize = s
            .strip_prefix('f')
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| Error::param("group", format!("expected finf or fN, got `{s}`")))?;
        if n < 2 {
            return Err(Error::param("group", "needs at least two generators"));
        }
        Ok(Group::Free(n))
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Infinite => write!(f, "finf"),
            Group::Free(n) => write!(f, "f{n}"),
        }
    }
}

/// `1 + Σ_{k=1}^{radius} d(d−1)^{k−1}` for a `d`-regular tree, saturating.
pub fn ball_size(degree: usize, radius: usize) -> u128 {
    let d = degree as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = d;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(d.saturating_sub(1));
    }
    total
}

/// Reduced words of length at most `radius`, ordered by length and then by
/// letters `a₁, a₁⁻¹, a₂, a₂⁻¹, …`.
pub fn enumerate_ball(generators: usize, radius: usize) -> Result<Vec<Word>> {
    enumerate_ball_with_cap(generators, radius, BALL_CAP)
}

pub fn enumerate_ball_with_cap(generators: usize, radius: usize, cap: usize) -> Result<Vec<Word>> {
    if generators < 2 {
        return Err(Error::param("generators", "must be at least 2"));
    }
    let size = ball_size(2 * generators, radius);
    if size > cap as u128 {
        return Err(Error::CapExceeded { what: "ball", size: size.min(usize::MAX as u128) as usize, cap });
    }
    let g = i32::try_from(generators).map_err(|_| Error::param("generators", "too many"))?;
    let alphabet: Vec<i32> = (1..=g).flat_map(|i| [i, -i]).collect();
    let mut out = vec![Word::identity()];
    let mut start = 0;
    for _ in 0..radius {
        let end = out.len();
        for i in start..end {
            for &l in &alphabet {
                if let Some(w) = out[i].push(l) {
                    out.push(w);
                }
            }
        }
        start = end;
    }
    Ok(out)
}

/// `φ̂(x, y) = φ̇(|y⁻¹x|)` on the ball.
pub fn group_matrix<R: Real>(profile: &RadialProfile, ball: &[Word]) -> Result<Kernel<R>> {
    let longest = ball.iter().map(Word::len).max().unwrap_or(0);
    let values: Vec<R> = (0..=2 * longest).map(|k| real(profile.value(k))).collect();
    Kernel::from_fn(ball.len(), |i, j| values[ball[i].distance(&ball[j])])
}

/// Radial Herz–Schur norm `|c₊| + |c₋| + ‖h‖₁` on `F_∞`, or
/// `|c₊| + |c₋| + ‖Fh‖₁` with `q = 2n − 1` on `F_n`, on the `n`-section.
pub fn radial_b2_norm(profile: &RadialProfile, group: Group, n: usize) -> Result<OmegaNormCertificate> {
    let phi: HankelKernel<f64> = lift_radial(profile);
    match group {
        Group::Infinite => omega_norm(&phi, n),
        Group::Free(g) => chi_norm(&phi, QParam::for_generators(g)?, n),
    }
}

/// `φ̇(n) = c₊ + c₋(−1)ⁿ + ψ̇(n)` with `ψ̇(n) → 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub constants: DiagonalLimit,
    profile: RadialProfile,
}

impl Presentation {
    /// `ψ̇(n)`.
    pub fn remainder(&self, n: usize) -> f64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        self.profile.value(n) - self.constants.c_plus - sign * self.constants.c_minus
    }
}

pub fn c_constants(profile: &RadialProfile) -> Result<Presentation> {
    let (c_plus, c_minus) = profile.constants()?;
    Ok(Presentation { constants: DiagonalLimit { c_plus, c_minus }, profile: profile.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Rule, Tail};

    #[test]
    fn ball_counts() {
        assert_eq!(enumerate_ball(2, 0).unwrap(), vec![Word::identity()]);
        assert_eq!(enumerate_ball(2, 1).unwrap().len(), 5);
        assert_eq!(enumerate_ball(2, 3).unwrap().len(), 53);
        assert_eq!(ball_size(4, 3), 53);
        assert_eq!(enumerate_ball(3, 2).unwrap().len() as u128, ball_size(6, 2));
        assert!(matches!(enumerate_ball(2, 9), Err(Error::CapExceeded { .. })));
        assert!(enumerate_ball(1, 2).is_err());
    }

    #[test]
    fn group_matrix_entries() {
        let ball = enumerate_ball(2, 1).unwrap();
        let ones: Kernel = group_matrix(&RadialProfile::constant(1.0), &ball).unwrap();
        assert_eq!(ones.matrix(), Kernel::constant(5, 1.0).unwrap().matrix());
        let r = 0.3;
        let k: Kernel = group_matrix(&RadialProfile::geometric(r), &ball).unwrap();
        let a1 = ball.iter().position(|w| w.letters() == [1]).unwrap();
        let a2 = ball.iter().position(|w| w.letters() == [2]).unwrap();
        assert!((k.get(a1, a2) - r * r).abs() < 1e-15);
        for i in 0..5 {
            assert_eq!(k.get(i, i), 1.0);
        }
    }

    #[test]
    fn radial_norms() {
        let c = radial_b2_norm(&RadialProfile::geometric(0.4), Group::Infinite, 100).unwrap();
        assert!((c.total - 1.0).abs() < 1e-10);
        let alt = RadialProfile::new(vec![], Tail::Constants { c_plus: 0.0, c_minus: 1.0 }).unwrap();
        let c = radial_b2_norm(&alt, Group::Infinite, 20).unwrap();
        assert_eq!(c.hankel_trace_norm, 0.0);
        assert_eq!(c.total, 1.0);
        let c = radial_b2_norm(&RadialProfile::exponential(1.0), Group::Free(2), 300).unwrap();
        assert!((c.total - 1.0).abs() < 1e-6);
        assert!(radial_b2_norm(&RadialProfile::linear(), Group::Infinite, 20).is_err());
    }

    #[test]
    fn presentations() {
        let p = c_constants(&RadialProfile::constant(3.0)).unwrap();
        assert_eq!((p.constants.c_plus, p.constants.c_minus), (3.0, 0.0));
        let mixed = RadialProfile::analytic(Rule::Sum {
            terms: vec![
                Rule::Constant { value: 2.0 },
                Rule::Alternating { value: 1.0 },
                Rule::Geometric { scale: 1.0, ratio: 0.5 },
            ],
        });
        let p = c_constants(&mixed).unwrap();
        assert_eq!((p.constants.c_plus, p.constants.c_minus), (2.0, 1.0));
        for n in 0..10 {
            assert!((p.remainder(n) - 0.5f64.powi(n as i32)).abs() < 1e-14);
        }
        let alt = RadialProfile::analytic(Rule::Alternating { value: 5.0 });
        let p = c_constants(&alt).unwrap();
        assert_eq!((p.constants.c_plus, p.constants.c_minus), (0.0, 5.0));
    }

    #[test]
    fn group_names() {
        assert_eq!("finf".parse::<Group>().unwrap(), Group::Infinite);
        assert_eq!("F3".parse::<Group>().unwrap(), Group::Free(3));
        assert!("f1".parse::<Group>().is_err());
        assert_eq!(Group::Free(2).to_string(), "f2");
    }
}
