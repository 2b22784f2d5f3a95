//! Sobolev indices of anisotropic spaces and the product embedding rules used
//! to map the nonlinear terms into the data spaces.
//!
//! `ind = (s − Σ wⱼnⱼ/p) / lcm(w)`, computed in exact rationals. Vector-valued
//! spaces with values in `Lᵖ(ℝ₊)` are described by dropping the fiber from
//! `dims`.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

pub type Rational = Rational64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SobolevError {
    #[error("weights and dims differ in length")]
    LengthMismatch,
    #[error("invalid space: {0}")]
    InvalidSpace(&'static str),
    #[error("spaces have different anisotropy")]
    IncompatibleAnisotropy,
    #[error("dimension n = {0} is below 2")]
    InvalidDimension(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scale {
    BesselPotential,
    Besov,
    SobolevSlobodeckii,
    Lebesgue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnisoSpace {
    pub scale: Scale,
    pub s: Rational,
    pub weight: Vec<u32>,
    pub dims: Vec<u32>,
    pub p: Rational,
    pub q: Option<Rational>,
}

impl AnisoSpace {
    pub fn new(
        scale: Scale,
        s: Rational,
        weight: Vec<u32>,
        dims: Vec<u32>,
        p: Rational,
    ) -> Result<Self, SobolevError> {
        if weight.len() != dims.len() {
            return Err(SobolevError::LengthMismatch);
        }
        if weight.is_empty() || weight.contains(&0) || dims.contains(&0) {
            return Err(SobolevError::InvalidSpace("weights and dims must be positive"));
        }
        let one = Rational::one();
        let p_ok = match scale {
            Scale::Lebesgue => p >= one,
            _ => p > one,
        };
        if !p_ok {
            return Err(SobolevError::InvalidSpace("integrability p out of range"));
        }
        if scale == Scale::SobolevSlobodeckii && s < Rational::zero() {
            return Err(SobolevError::InvalidSpace("negative smoothness"));
        }
        Ok(AnisoSpace {
            scale,
            s,
            weight,
            dims,
            p,
            q: None,
        })
    }

    /// Space over `J × ℝ^{n−1}` (or with values in `Lᵖ(ℝ₊)`), weight `(2,1)`.
    pub fn boundary(scale: Scale, s: Rational, n: u32, p: Rational) -> Result<Self, SobolevError> {
        AnisoSpace::new(scale, s, vec![2, 1], vec![1, n - 1], p)
    }

    /// Space over `J × ℝⁿ₊`, weight `(2,1)`.
    pub fn bulk(scale: Scale, s: Rational, n: u32, p: Rational) -> Result<Self, SobolevError> {
        AnisoSpace::new(scale, s, vec![2, 1], vec![1, n], p)
    }
}

pub fn index(sp: &AnisoSpace) -> Rational {
    let wn: i64 = sp
        .weight
        .iter()
        .zip(&sp.dims)
        .map(|(&w, &d)| (w * d) as i64)
        .sum();
    let lcm = sp.weight.iter().fold(1u32, |a, &b| a.lcm(&b)) as i64;
    (sp.s - Rational::from_integer(wn) / sp.p) / lcm
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EmbeddingResult {
    HoldsByNonneg,
    HoldsBySum,
    Fails,
}

impl EmbeddingResult {
    pub fn holds(self) -> bool {
        self != EmbeddingResult::Fails
    }
}

fn same_anisotropy(spaces: &[&AnisoSpace]) -> Result<(), SobolevError> {
    let first = spaces[0];
    if spaces
        .iter()
        .all(|s| s.weight == first.weight && s.dims == first.dims)
    {
        Ok(())
    } else {
        Err(SobolevError::IncompatibleAnisotropy)
    }
}

/// Two-factor rule: one nonnegative index suffices if the other reaches the
/// target; otherwise both are negative and their sum must reach it.
pub fn product_embedding_check(
    sp1: &AnisoSpace,
    sp2: &AnisoSpace,
    target: &AnisoSpace,
) -> Result<EmbeddingResult, SobolevError> {
    same_anisotropy(&[sp1, sp2, target])?;
    let (i1, i2, it) = (index(sp1), index(sp2), index(target));
    let zero = Rational::zero();
    Ok(if i1.max(i2) >= zero {
        if i1.min(i2) >= it {
            EmbeddingResult::HoldsByNonneg
        } else {
            EmbeddingResult::Fails
        }
    } else if i1 + i2 >= it {
        EmbeddingResult::HoldsBySum
    } else {
        EmbeddingResult::Fails
    })
}

/// Pointwise multiplier rule: a factor with strictly positive index maps the
/// other space into itself.
pub fn multiplier_check(
    multiplier: &AnisoSpace,
    sp: &AnisoSpace,
    target: &AnisoSpace,
) -> Result<EmbeddingResult, SobolevError> {
    same_anisotropy(&[multiplier, sp, target])?;
    Ok(if index(multiplier) > Rational::zero() && index(sp) >= index(target) {
        EmbeddingResult::HoldsByNonneg
    } else {
        EmbeddingResult::Fails
    })
}

/// Three-factor rule: all indices nonnegative, or the sum of the three
/// indices reaches the target.
pub fn triple_embedding_check(
    factors: [&AnisoSpace; 3],
    target: &AnisoSpace,
) -> Result<EmbeddingResult, SobolevError> {
    same_anisotropy(&[factors[0], factors[1], factors[2], target])?;
    let ids: Vec<Rational> = factors.iter().map(|s| index(s)).collect();
    let it = index(target);
    Ok(if ids.iter().all(|i| *i >= Rational::zero()) {
        EmbeddingResult::HoldsByNonneg
    } else if ids.iter().copied().sum::<Rational>() >= it {
        EmbeddingResult::HoldsBySum
    } else {
        EmbeddingResult::Fails
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub quadratic: Rational,
    pub multiplier: Rational,
    pub triple: Rational,
}

pub fn threshold_p(n: u32) -> Result<Thresholds, SobolevError> {
    if n < 2 {
        return Err(SobolevError::InvalidDimension(n));
    }
    let n = n as i64;
    let t = Thresholds {
        quadratic: Rational::new(n + 2, 3),
        multiplier: Rational::new(n + 2, 4),
        triple: Rational::new(2 * n + 3, 6),
    };
    assert!(t.quadratic >= t.multiplier && t.quadratic >= t.triple);
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Pair,
    Multiplier,
    Triple,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub rule: Rule,
    pub factors: Vec<AnisoSpace>,
    pub target: AnisoSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogResult {
    pub name: &'static str,
    pub rule: Rule,
    pub factor_indices: Vec<String>,
    pub target_index: String,
    pub result: EmbeddingResult,
}

/// The products needed to map the nonlinear terms into the data spaces,
/// for spatial dimension `n` and integrability `p`.
pub fn embedding_catalog(n: u32, p: Rational) -> Result<Vec<CatalogEntry>, SobolevError> {
    if n < 2 {
        return Err(SobolevError::InvalidDimension(n));
    }
    use Scale::*;
    let r = Rational::from_integer;
    let inv = p.recip();
    let w = |s: Rational| AnisoSpace::boundary(SobolevSlobodeckii, s, n, p);
    let hb = |s: Rational| AnisoSpace::boundary(BesselPotential, s, n, p);
    let hv = |s: Rational| AnisoSpace::bulk(BesselPotential, s, n, p);
    let entry = |name, rule, factors: Vec<AnisoSpace>, target| CatalogEntry {
        name,
        rule,
        factors,
        target,
    };
    let w2 = w(r(2) - inv)?;
    let w4 = w(r(4) - inv)?;
    let w1 = w(r(1) - inv)?;
    let h0 = hb(r(0))?;
    let h1 = hb(r(1))?;
    let h2 = hb(r(2))?;
    Ok(vec![
        // (∂tη − Δ′η) ∂n v
        entry("plate-rate-times-normal-derivative", Rule::Pair, vec![w2, h1.clone()], h0.clone()),
        // (∇′η·∇′)∂n v, (∇′η, 0)∂n p
        entry("gradient-multiplier", Rule::Multiplier, vec![w4.clone(), h0.clone()], h0.clone()),
        // |∇′η|² ∂n² v
        entry("squared-gradient-multiplier", Rule::Multiplier, vec![w4.clone(), h0.clone()], h0.clone()),
        // (v·∇)v
        entry("convection", Rule::Pair, vec![hv(r(2))?, hv(r(1))?], hv(r(0))?),
        // (v′·∇′η)∂n v
        entry("three-factor-transport", Rule::Triple, vec![h1.clone(), w4.clone(), h1], h0.clone()),
        // ∂t∇′η · v′ in the divergence term
        entry("divergence-rate", Rule::Pair, vec![w1.clone(), h2.clone()], h0.clone()),
        // ∇′η · ∂t v′ in the divergence term
        entry("divergence-multiplier", Rule::Multiplier, vec![w4.clone(), h0.clone()], h0),
        // ∇′η·∂n v′, ∇′η·∇′vⁿ in the plate term
        entry("plate-nonlinearity", Rule::Multiplier, vec![w4.clone(), w1.clone()], w1),
        // ∇′η·v′ in the weak divergence compatibility
        entry("weak-divergence", Rule::Multiplier, vec![w4, h2.clone()], h2),
    ])
}

pub fn check_entry(e: &CatalogEntry) -> Result<EmbeddingResult, SobolevError> {
    match e.rule {
        Rule::Pair => product_embedding_check(&e.factors[0], &e.factors[1], &e.target),
        Rule::Multiplier => multiplier_check(&e.factors[0], &e.factors[1], &e.target),
        Rule::Triple => triple_embedding_check([&e.factors[0], &e.factors[1], &e.factors[2]], &e.target),
    }
}

pub fn check_catalog(n: u32, p: Rational) -> Result<Vec<CatalogResult>, SobolevError> {
    embedding_catalog(n, p)?
        .iter()
        .map(|e| {
            Ok(CatalogResult {
                name: e.name,
                rule: e.rule,
                factor_indices: e.factors.iter().map(|f| index(f).to_string()).collect(),
                target_index: index(&e.target).to_string(),
                result: check_entry(e)?,
            })
        })
        .collect()
}
