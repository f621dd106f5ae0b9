//! Ensemble parameter types.
//!
//! Three families are covered: the random `(dv, dc, nu, L)` ensemble with a
//! smoothing distribution `nu`, the two-type random ensemble with separate
//! upper/lower smoothing parameters, and protograph chains built from a
//! `(dv, b1, b2)` elementary segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(weights) == 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Probability vector `[nu_0, ..., nu_{w-1}]` spreading the edges of a
/// variable node over `w` consecutive check-node positions.
///
/// Zero entries are allowed: `[0, 1]` is the uncoupled ensemble (shifted by
/// one position, which does not change any threshold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SmoothingDistribution {
    weights: Vec<f64>,
}

impl SmoothingDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "smoothing distribution needs w >= 2 weights, got {}",
                weights.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smoothing weights must be finite and non-negative, got {bad}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "smoothing weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self { weights })
    }

    /// `[alpha, 1 - alpha]`.
    pub fn two_point(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Self::new(vec![alpha, 1.0 - alpha])
    }

    /// `[nu_0, nu_1, 1 - nu_0 - nu_1]`.
    pub fn three_point(nu0: f64, nu1: f64) -> Result<Self> {
        let rest = 1.0 - nu0 - nu1;
        // Grid points on the simplex edge can land a few ulps below zero.
        let rest = if rest < 0.0 && rest > -WEIGHT_SUM_TOL {
            0.0
        } else {
            rest
        };
        Self::new(vec![nu0, nu1, rest])
    }

    /// Classical uniform coupling, `nu_i = 1/w`.
    pub fn uniform(w: usize) -> Result<Self> {
        if w < 2 {
            return Err(Error::InvalidParameter(format!("w must be >= 2, got {w}")));
        }
        Ok(Self {
            weights: vec![1.0 / w as f64; w],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smoothing width `w`.
    pub fn width(&self) -> usize {
        self.weights.len()
    }

    pub fn reversed(&self) -> Self {
        let mut weights = self.weights.clone();
        weights.reverse();
        Self { weights }
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.width() as f64;
        self.weights.iter().all(|&v| v == u)
    }
}

impl TryFrom<Vec<f64>> for SmoothingDistribution {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<SmoothingDistribution> for Vec<f64> {
    fn from(nu: SmoothingDistribution) -> Self {
        nu.weights
    }
}

/// Parameters of the random `(dv, dc, nu, L)` ensemble in the `M -> inf` limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledEnsembleSpec {
    pub dv: u32,
    pub dc: u32,
    pub nu: SmoothingDistribution,
    #[serde(rename = "L")]
    pub length: usize,
}

impl CoupledEnsembleSpec {
    pub fn new(dv: u32, dc: u32, nu: SmoothingDistribution, length: usize) -> Result<Self> {
        if dv < 2 {
            return Err(Error::InvalidParameter(format!(
                "dv must be >= 2, got {dv}"
            )));
        }
        if dc <= dv {
            return Err(Error::InvalidParameter(format!(
                "dc must exceed dv, got dv = {dv}, dc = {dc}"
            )));
        }
        if length < 2 || length < nu.width() {
            return Err(Error::InvalidParameter(format!(
                "L must be >= max(2, w = {}), got {length}",
                nu.width()
            )));
        }
        Ok(Self { dv, dc, nu, length })
    }

    /// The rate-1/2 family `(dv, 2dv, [alpha, 1 - alpha], L)`.
    pub fn half_rate_alpha(dv: u32, alpha: f64, length: usize) -> Result<Self> {
        Self::new(dv, 2 * dv, SmoothingDistribution::two_point(alpha)?, length)
    }

    pub fn width(&self) -> usize {
        self.nu.width()
    }

    pub fn rate_loss(&self) -> f64 {
        rate_loss_delta(self.dv, self.dc, &self.nu)
    }

    pub fn design_rate(&self) -> f64 {
        design_rate(self)
    }
}

/// Termination rate loss `Delta`, so that `r = 1 - dv/dc - Delta/L`.
pub fn rate_loss_delta(dv: u32, dc: u32, nu: &SmoothingDistribution) -> f64 {
    let w = nu.width();
    let weights = nu.weights();
    let exponent = dc as i32;
    let mut unconnected = 0.0;
    let mut head = 0.0;
    for k in 0..w - 1 {
        head += weights[k];
        let tail: f64 = weights[k + 1..].iter().sum();
        unconnected += head.powi(exponent) + tail.powi(exponent);
    }
    dv as f64 / dc as f64 * ((w - 1) as f64 - unconnected)
}

pub fn design_rate(spec: &CoupledEnsembleSpec) -> f64 {
    1.0 - spec.dv as f64 / spec.dc as f64 - spec.rate_loss() / spec.length as f64
}

/// Random `w = 2` ensemble with two VN sets per position (`dc = 2 dv`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeSpec {
    pub dv: u32,
    pub alpha_upper: f64,
    pub alpha_lower: f64,
    #[serde(rename = "L")]
    pub length: usize,
}

impl TwoTypeSpec {
    pub fn new(dv: u32, alpha_upper: f64, alpha_lower: f64, length: usize) -> Result<Self> {
        if dv < 2 {
            return Err(Error::InvalidParameter(format!(
                "dv must be >= 2, got {dv}"
            )));
        }
        for (name, a) in [("alpha_upper", alpha_upper), ("alpha_lower", alpha_lower)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {a}"
                )));
            }
        }
        if length < 2 {
            return Err(Error::InvalidParameter(format!(
                "L must be >= 2, got {length}"
            )));
        }
        Ok(Self {
            dv,
            alpha_upper,
            alpha_lower,
            length,
        })
    }

    pub fn dc(&self) -> u32 {
        2 * self.dv
    }

    /// Termination sockets are filled by both sets in equal proportion, so the
    /// loss is that of the single-type ensemble at the mean smoothing parameter.
    pub fn rate_loss(&self) -> f64 {
        let mean = 0.5 * (self.alpha_upper + self.alpha_lower);
        let nu = SmoothingDistribution::two_point(mean).expect("mean of validated alphas");
        rate_loss_delta(self.dv, self.dc(), &nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VnType {
    V1,
    V2,
}

/// `multiplicity` parallel edges between VN `(vn_position, vn_type)` and CN
/// `cn_position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBundle {
    pub vn_position: usize,
    pub vn_type: VnType,
    pub cn_position: usize,
    pub multiplicity: u32,
}

/// Protograph chain of `L` elementary `(dv, b1, b2)` segments.
///
/// Position `z` holds VNs `v1(z)`, `v2(z)` and CN `c(z)`; the VNs send
/// `b1` (`b2`) edges to `c(z)` and the remaining `dv - b1` (`dv - b2`) to
/// `c(z+1)`. CN `c(L+1)` terminates the chain. Bundles of multiplicity 0
/// are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtographChain {
    pub dv: u32,
    pub b1: u32,
    pub b2: u32,
    #[serde(rename = "L")]
    pub length: usize,
    bundles: Vec<EdgeBundle>,
}

pub fn build_protograph_chain(dv: u32, b1: u32, b2: u32, length: usize) -> Result<ProtographChain> {
    if dv < 1 {
        return Err(Error::InvalidParameter("dv must be >= 1".into()));
    }
    if b1 > dv || b2 > dv {
        return Err(Error::InvalidParameter(format!(
            "b1 and b2 must lie in [0, dv = {dv}], got b1 = {b1}, b2 = {b2}"
        )));
    }
    if length < 2 {
        return Err(Error::InvalidParameter(format!(
            "L must be >= 2, got {length}"
        )));
    }
    let mut bundles = Vec::with_capacity(4 * length);
    for z in 1..=length {
        for (vn_type, b) in [(VnType::V1, b1), (VnType::V2, b2)] {
            for (cn_position, multiplicity) in [(z, b), (z + 1, dv - b)] {
                if multiplicity > 0 {
                    bundles.push(EdgeBundle {
                        vn_position: z,
                        vn_type,
                        cn_position,
                        multiplicity,
                    });
                }
            }
        }
    }
    Ok(ProtographChain {
        dv,
        b1,
        b2,
        length,
        bundles,
    })
}

impl ProtographChain {
    pub fn bundles(&self) -> &[EdgeBundle] {
        &self.bundles
    }

    /// Number of CNs, `L + 1`.
    pub fn check_count(&self) -> usize {
        self.length + 1
    }

    pub fn cn_degree(&self, cn_position: usize) -> u32 {
        self.bundles
            .iter()
            .filter(|b| b.cn_position == cn_position)
            .map(|b| b.multiplicity)
            .sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.bundles.iter().map(|b| b.multiplicity as u64).sum()
    }

    /// `1 - (L + 1) / (2L)`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.check_count() as f64 / (2 * self.length) as f64
    }

    /// The same chain read right to left: `(dv - b1, dv - b2)`.
    pub fn reflected(&self) -> ProtographChain {
        build_protograph_chain(self.dv, self.dv - self.b1, self.dv - self.b2, self.length)
            .expect("reflection keeps b within [0, dv]")
    }

    /// The same chain with `v1` and `v2` swapped.
    pub fn relabeled(&self) -> ProtographChain {
        build_protograph_chain(self.dv, self.b2, self.b1, self.length)
            .expect("relabeling keeps b within [0, dv]")
    }

    /// Smallest `(b1, b2)` among the relabeling/reflection orbit.
    pub fn canonical_segment(dv: u32, b1: u32, b2: u32) -> (u32, u32) {
        let orbit = [(b1, b2), (b2, b1), (dv - b1, dv - b2), (dv - b2, dv - b1)];
        *orbit.iter().min().expect("non-empty orbit")
    }
}
