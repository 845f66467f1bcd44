//! The loss catalog.
//!
//! A [`LossDescriptor`] pairs a pointwise loss `M : [0, ∞) → [0, ∞)` with the
//! growth constants the sampling algorithms rely on:
//!
//! * upper growth `M(y)/M(x) ≤ c_U (y/x)^{p_M}` for `y > x > 0`,
//! * optional lower growth `M(y)/M(x) ≥ c_L (y/x)^{q_M}`,
//! * structural flags (subadditive root, scale invariance, convexity).
//!
//! The constants are declared, not trusted: the test suite samples random
//! pairs and checks every declared inequality.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// Concrete functional form of a loss.
#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// `|x|^p`.
    Lp { p: f64 },
    /// `x²/(2τ)` below the knee `τ`, `|x| − τ/2` above.
    Huber { tau: f64 },
    /// `|x|^p` up to `τ`, constant `τ^p` beyond.
    TukeyLp { tau: f64, p: f64 },
    /// Tukey biweight `(τ²/6)[1 − (1 − x²/τ²)³]`, constant `τ²/6` beyond `τ`.
    TukeySmooth { tau: f64 },
    /// `x²` for `|x| ≤ 1`, `|x|^q` beyond.
    L2Lq { q: f64 },
    /// `(p/2) t^{p−2} x²` for `|x| ≤ t`, `|x|^p + (p/2 − 1) t^p` beyond.
    GammaP { t: f64, p: f64 },
    /// `factor · base`.
    Scaled { base: Box<LossDescriptor>, factor: f64 },
    /// `first + second`.
    Sum(Box<LossDescriptor>, Box<LossDescriptor>),
}

/// A loss together with its declared growth constants and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDescriptor {
    pub name: String,
    pub kind: LossKind,
    pub p_m: f64,
    pub c_u: f64,
    pub q_m: Option<f64>,
    pub c_l: Option<f64>,
    /// `M^{1/p_M}` is subadditive.
    pub root_subadditive: bool,
    /// `M(c x) = |c|^{p_M} M(x)`.
    pub scale_invariant: bool,
    pub monotone: bool,
    pub convex: bool,
    /// Flat beyond a threshold (Tukey family).
    pub bounded: bool,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, v, "must be positive and finite"))
    }
}

impl LossDescriptor {
    pub fn lp(p: f64) -> Result<Self> {
        check_positive("p", p)?;
        Ok(Self {
            name: format!("lp({p})"),
            kind: LossKind::Lp { p },
            p_m: p,
            c_u: 1.0,
            q_m: Some(p),
            c_l: Some(1.0),
            root_subadditive: true,
            scale_invariant: true,
            monotone: true,
            convex: p >= 1.0,
            bounded: false,
        })
    }

    pub fn huber(tau: f64) -> Result<Self> {
        check_positive("tau", tau)?;
        Ok(Self {
            name: format!("huber({tau})"),
            kind: LossKind::Huber { tau },
            p_m: 2.0,
            c_u: 1.0,
            q_m: Some(1.0),
            c_l: Some(1.0),
            root_subadditive: true,
            scale_invariant: false,
            monotone: true,
            convex: true,
            bounded: false,
        })
    }

    pub fn tukey_lp(tau: f64, p: f64) -> Result<Self> {
        check_positive("tau", tau)?;
        check_positive("p", p)?;
        Ok(Self {
            name: format!("tukey_lp({tau},{p})"),
            kind: LossKind::TukeyLp { tau, p },
            p_m: p,
            c_u: 1.0,
            q_m: None,
            c_l: None,
            root_subadditive: true,
            scale_invariant: false,
            monotone: true,
            convex: false,
            bounded: true,
        })
    }

    pub fn tukey_smooth(tau: f64) -> Result<Self> {
        check_positive("tau", tau)?;
        Ok(Self {
            name: format!("tukey_smooth({tau})"),
            kind: LossKind::TukeySmooth { tau },
            p_m: 2.0,
            c_u: 1.0,
            q_m: None,
            c_l: None,
            root_subadditive: true,
            scale_invariant: false,
            monotone: true,
            convex: false,
            bounded: true,
        })
    }

    pub fn l2lq(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 2.0) {
            return Err(invalid("q", q, "must lie in (0, 2)"));
        }
        Ok(Self {
            name: format!("l2lq({q})"),
            kind: LossKind::L2Lq { q },
            p_m: 2.0,
            c_u: 1.0,
            q_m: Some(q),
            c_l: Some(1.0),
            root_subadditive: true,
            scale_invariant: false,
            monotone: true,
            convex: false,
            bounded: false,
        })
    }

    pub fn gamma_p(t: f64, p: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 1.0) {
            return Err(invalid("t", t, "must be at least 1"));
        }
        check_positive("p", p)?;
        Ok(Self {
            name: format!("gamma_p({t},{p})"),
            kind: LossKind::GammaP { t, p },
            p_m: p.max(2.0),
            c_u: 1.0,
            q_m: Some(p.min(2.0)),
            c_l: Some(1.0),
            root_subadditive: p <= 2.0,
            scale_invariant: p == 2.0,
            monotone: true,
            convex: p >= 1.0,
            bounded: false,
        })
    }

    /// `factor · base`; growth constants are unchanged.
    pub fn scaled(base: &LossDescriptor, factor: f64) -> Result<Self> {
        check_positive("factor", factor)?;
        Ok(Self {
            name: format!("{factor}*{}", base.name),
            kind: LossKind::Scaled {
                base: Box::new(base.clone()),
                factor,
            },
            ..base.clone()
        })
    }

    /// Pointwise sum of two losses. The upper degree is the larger one and the
    /// lower degree the smaller one.
    pub fn sum(a: &LossDescriptor, b: &LossDescriptor) -> Self {
        let lower = match (a.q_m, b.q_m, a.c_l, b.c_l) {
            (Some(qa), Some(qb), Some(ca), Some(cb)) => (Some(qa.min(qb)), Some(ca.min(cb))),
            _ => (None, None),
        };
        Self {
            name: format!("{}+{}", a.name, b.name),
            kind: LossKind::Sum(Box::new(a.clone()), Box::new(b.clone())),
            p_m: a.p_m.max(b.p_m),
            c_u: a.c_u.max(b.c_u),
            q_m: lower.0,
            c_l: lower.1,
            root_subadditive: a.root_subadditive && b.root_subadditive && a.p_m == b.p_m,
            scale_invariant: a.scale_invariant && b.scale_invariant && a.p_m == b.p_m,
            monotone: a.monotone && b.monotone,
            convex: a.convex && b.convex,
            bounded: a.bounded && b.bounded,
        }
    }

    /// `M(|x|)`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        match &self.kind {
            LossKind::Lp { p } if *p == 1.0 => a,
            LossKind::Lp { p } if *p == 2.0 => a * a,
            LossKind::Lp { p } if *p == 0.5 => a.sqrt(),
            LossKind::Lp { p } if *p == 1.5 => a * a.sqrt(),
            LossKind::Lp { p } if *p == 3.0 => a * a * a,
            LossKind::Lp { p } => a.powf(*p),
            LossKind::Huber { tau } => {
                if a <= *tau {
                    a * a / (2.0 * tau)
                } else {
                    a - tau / 2.0
                }
            }
            LossKind::TukeyLp { tau, p } => a.min(*tau).powf(*p),
            LossKind::TukeySmooth { tau } => {
                if a <= *tau {
                    // 1 − (1 − v)³ expanded, exact for tiny v
                    let v = a * a / (tau * tau);
                    tau * tau / 6.0 * v * (3.0 - 3.0 * v + v * v)
                } else {
                    tau * tau / 6.0
                }
            }
            LossKind::L2Lq { q } => {
                if a <= 1.0 {
                    a * a
                } else {
                    a.powf(*q)
                }
            }
            LossKind::GammaP { t, p } => {
                if a <= *t {
                    p / 2.0 * t.powf(p - 2.0) * a * a
                } else {
                    a.powf(*p) + (p / 2.0 - 1.0) * t.powf(*p)
                }
            }
            LossKind::Scaled { base, factor } => factor * base.eval(a),
            LossKind::Sum(l, r) => l.eval(a) + r.eval(a),
        }
    }

    /// Derivative `M'(a)` for `a ≥ 0` (right derivative at kinks).
    pub fn deriv(&self, a: f64) -> f64 {
        let a = a.abs();
        match &self.kind {
            LossKind::Lp { p } => {
                if a == 0.0 {
                    if *p > 1.0 {
                        0.0
                    } else if *p == 1.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    p * a.powf(p - 1.0)
                }
            }
            LossKind::Huber { tau } => (a / tau).min(1.0),
            LossKind::TukeyLp { tau, p } => {
                if a < *tau {
                    LossDescriptor::lp(*p).map(|l| l.deriv(a)).unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            LossKind::TukeySmooth { tau } => {
                if a < *tau {
                    let u = 1.0 - a * a / (tau * tau);
                    a * u * u
                } else {
                    0.0
                }
            }
            LossKind::L2Lq { q } => {
                if a <= 1.0 {
                    2.0 * a
                } else {
                    q * a.powf(q - 1.0)
                }
            }
            LossKind::GammaP { t, p } => {
                if a <= *t {
                    p * t.powf(p - 2.0) * a
                } else {
                    p * a.powf(p - 1.0)
                }
            }
            LossKind::Scaled { base, factor } => factor * base.deriv(a),
            LossKind::Sum(l, r) => l.deriv(a) + r.deriv(a),
        }
    }

    /// Second derivative `M''(a)` for `a > 0`.
    pub fn second(&self, a: f64) -> f64 {
        let a = a.abs();
        match &self.kind {
            LossKind::Lp { p } => p * (p - 1.0) * a.powf(p - 2.0),
            LossKind::Huber { tau } => {
                if a <= *tau {
                    1.0 / tau
                } else {
                    0.0
                }
            }
            LossKind::TukeyLp { tau, p } => {
                if a < *tau {
                    p * (p - 1.0) * a.powf(p - 2.0)
                } else {
                    0.0
                }
            }
            LossKind::TukeySmooth { tau } => {
                if a < *tau {
                    let u = a * a / (tau * tau);
                    (1.0 - u) * (1.0 - 5.0 * u)
                } else {
                    0.0
                }
            }
            LossKind::L2Lq { q } => {
                if a <= 1.0 {
                    2.0
                } else {
                    q * (q - 1.0) * a.powf(q - 2.0)
                }
            }
            LossKind::GammaP { t, p } => {
                if a <= *t {
                    p * t.powf(p - 2.0)
                } else {
                    p * (p - 1.0) * a.powf(p - 2.0)
                }
            }
            LossKind::Scaled { base, factor } => factor * base.second(a),
            LossKind::Sum(l, r) => l.second(a) + r.second(a),
        }
    }

    /// True when `t ↦ M(√t)` is concave, so that the reweighting
    /// `M'(|r|)/|r|` yields a majorize-minimize scheme.
    pub fn half_quadratic(&self) -> bool {
        match &self.kind {
            LossKind::Lp { p } => *p <= 2.0,
            LossKind::Huber { .. } | LossKind::TukeySmooth { .. } | LossKind::L2Lq { .. } => true,
            LossKind::TukeyLp { p, .. } | LossKind::GammaP { p, .. } => *p <= 2.0,
            LossKind::Scaled { base, .. } => base.half_quadratic(),
            LossKind::Sum(l, r) => l.half_quadratic() && r.half_quadratic(),
        }
    }

    /// Whether the loss needs smoothing at the origin (`M'(a)/a → ∞`).
    pub fn singular_at_zero(&self) -> bool {
        match &self.kind {
            LossKind::Lp { p } | LossKind::TukeyLp { p, .. } => *p < 2.0,
            LossKind::Scaled { base, .. } => base.singular_at_zero(),
            LossKind::Sum(l, r) => l.singular_at_zero() || r.singular_at_zero(),
            _ => false,
        }
    }

    /// The exponent `p` for a plain `ℓp` loss.
    pub fn lp_exponent(&self) -> Option<f64> {
        match self.kind {
            LossKind::Lp { p } => Some(p),
            _ => None,
        }
    }
}

/// Looks up a loss by name.
///
/// | name | params |
/// |---|---|
/// | `lp` | `p` |
/// | `huber` | `τ` |
/// | `tukey_lp` | `τ, p` |
/// | `tukey_smooth` | `τ` |
/// | `l2lq` | `q` |
/// | `gamma_p` | `t, p` |
pub fn loss_catalog(name: &str, params: &[f64]) -> Result<LossDescriptor> {
    let want = |k: usize| -> Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: k,
                found: params.len(),
            })
        }
    };
    match name {
        "lp" => want(1).and_then(|_| LossDescriptor::lp(params[0])),
        "huber" => want(1).and_then(|_| LossDescriptor::huber(params[0])),
        "tukey_lp" => want(2).and_then(|_| LossDescriptor::tukey_lp(params[0], params[1])),
        "tukey_smooth" => want(1).and_then(|_| LossDescriptor::tukey_smooth(params[0])),
        "l2lq" => want(1).and_then(|_| LossDescriptor::l2lq(params[0])),
        "gamma_p" => want(2).and_then(|_| LossDescriptor::gamma_p(params[0], params[1])),
        other => Err(Error::UnknownLoss(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn catalog() -> Vec<LossDescriptor> {
        vec![
            LossDescriptor::lp(0.5).unwrap(),
            LossDescriptor::lp(1.0).unwrap(),
            LossDescriptor::lp(1.5).unwrap(),
            LossDescriptor::lp(3.0).unwrap(),
            LossDescriptor::huber(1.0).unwrap(),
            LossDescriptor::huber(0.3).unwrap(),
            LossDescriptor::tukey_lp(1.0, 2.0).unwrap(),
            LossDescriptor::tukey_lp(2.0, 1.0).unwrap(),
            LossDescriptor::tukey_smooth(1.5).unwrap(),
            LossDescriptor::l2lq(0.5).unwrap(),
            LossDescriptor::l2lq(1.5).unwrap(),
            LossDescriptor::gamma_p(1.0, 1.5).unwrap(),
            LossDescriptor::gamma_p(2.0, 3.0).unwrap(),
            LossDescriptor::sum(&LossDescriptor::huber(1.0).unwrap(), &LossDescriptor::lp(1.0).unwrap()),
        ]
    }

    #[test]
    fn catalog_values() {
        let h = loss_catalog("huber", &[1.0]).unwrap();
        assert_eq!(h.eval(2.0), 1.5);
        assert_eq!(h.eval(0.5), 0.125);
        assert_eq!(loss_catalog("lp", &[2.0]).unwrap().eval(3.0), 9.0);
        assert_eq!(loss_catalog("tukey_lp", &[1.0, 2.0]).unwrap().eval(5.0), 1.0);
        assert_eq!((h.p_m, h.c_u, h.q_m, h.c_l), (2.0, 1.0, Some(1.0), Some(1.0)));
        assert!(h.root_subadditive);
        let l = loss_catalog("lp", &[1.5]).unwrap();
        assert!(l.scale_invariant && l.q_m == Some(1.5));
        let t = loss_catalog("tukey_lp", &[1.0, 3.0]).unwrap();
        assert_eq!((t.p_m, t.c_u, t.q_m), (3.0, 1.0, None));
    }

    #[test]
    fn catalog_rejects_bad_input() {
        assert!(matches!(loss_catalog("cauchy", &[1.0]), Err(Error::UnknownLoss(_))));
        assert!(loss_catalog("lp", &[0.0]).is_err());
        assert!(loss_catalog("huber", &[-1.0]).is_err());
        assert!(loss_catalog("l2lq", &[2.0]).is_err());
        assert!(loss_catalog("gamma_p", &[0.5, 1.5]).is_err());
        assert!(loss_catalog("tukey_lp", &[1.0]).is_err());
    }

    #[test]
    fn losses_are_continuous_at_knees() {
        for l in catalog() {
            for knee in [0.3, 1.0, 1.5, 2.0] {
                let lo = l.eval(knee - 1e-9);
                let hi = l.eval(knee + 1e-9);
                assert!((lo - hi).abs() < 1e-7, "{} at {knee}", l.name);
            }
            assert_eq!(l.eval(0.0), 0.0);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for l in catalog() {
            for &a in &[0.05, 0.4, 0.9, 1.3, 2.5, 7.0] {
                let h = 1e-6;
                let fd = (l.eval(a + h) - l.eval(a - h)) / (2.0 * h);
                let err = (fd - l.deriv(a)).abs();
                assert!(
                    err < 1e-4 * (1.0 + fd.abs()),
                    "{} at {a}: {fd} vs {}",
                    l.name,
                    l.deriv(a)
                );
            }
        }
    }
}
