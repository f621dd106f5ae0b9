//! Multi-type density evolution: the two-type random ensemble and
//! edge-bundle DE on protograph chains.

use serde::{Deserialize, Serialize};

use crate::de::{bp_threshold, DeControls, DeSystem, ThresholdResult};
use crate::ensembles::{ProtographChain, TwoTypeSpec, VnType};
use crate::error::{Error, Result};

/// Two VN sets per position with smoothing `[a_up, 1 - a_up]` and
/// `[a_low, 1 - a_low]`, `w = 2`, `dc = 2 dv`.
///
/// State per position: `[x_up, x_low]`. Scratch holds the CN-side
/// "known" probabilities `[y_up, y_low]` for CN positions `1..=L+1`; CN
/// `L+1` is the terminating check and is computed like any other, reading
/// `x_{L+1} = 0`.
#[derive(Debug, Clone)]
pub struct TwoTypeSystem {
    spec: TwoTypeSpec,
}

impl TwoTypeSystem {
    pub fn new(spec: TwoTypeSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &TwoTypeSpec {
        &self.spec
    }

    fn check_side(&self, src: &[f64], scratch: &mut [f64], first_cn: usize, last_cn: usize) {
        let len = self.spec.length;
        let (au, al) = (self.spec.alpha_upper, self.spec.alpha_lower);
        let dv = self.spec.dv as i32;
        let x = |z: usize, t: usize| -> f64 {
            if z >= 1 && z <= len {
                src[2 * (z - 1) + t]
            } else {
                0.0
            }
        };
        for c in first_cn..=last_cn {
            let known_up = 1.0 - (au * x(c, 0) + (1.0 - au) * x(c.wrapping_sub(1), 0));
            let known_low = 1.0 - (al * x(c, 1) + (1.0 - al) * x(c.wrapping_sub(1), 1));
            scratch[2 * (c - 1)] = known_up.powi(dv - 1) * known_low.powi(dv);
            scratch[2 * (c - 1) + 1] = known_up.powi(dv) * known_low.powi(dv - 1);
        }
    }
}

impl DeSystem for TwoTypeSystem {
    fn positions(&self) -> usize {
        self.spec.length
    }

    fn stride(&self) -> usize {
        2
    }

    fn coupling_radius(&self) -> usize {
        1
    }

    fn scratch_len(&self) -> usize {
        2 * (self.spec.length + 1)
    }

    fn update(
        &self,
        epsilon: f64,
        src: &[f64],
        dst: &mut [f64],
        scratch: &mut [f64],
        first: usize,
        last: usize,
    ) {
        self.check_side(src, scratch, first, last + 1);
        let (au, al) = (self.spec.alpha_upper, self.spec.alpha_lower);
        let exp = self.spec.dv as i32 - 1;
        for z in first..=last {
            let y = |c: usize, t: usize| scratch[2 * (c - 1) + t];
            dst[2 * (z - 1)] =
                epsilon * (1.0 - (au * y(z, 0) + (1.0 - au) * y(z + 1, 0))).powi(exp);
            dst[2 * (z - 1) + 1] =
                epsilon * (1.0 - (al * y(z, 1) + (1.0 - al) * y(z + 1, 1))).powi(exp);
        }
    }
}

/// Two-type DE state at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeProfile {
    /// VN-to-CN erasure probability of the upper set, positions `1..=L`.
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// CN-side known probabilities of the upper set, CN positions `1..=L+1`,
    /// as computed from `upper`/`lower` in the step that produced this profile.
    pub check_upper: Vec<f64>,
    pub check_lower: Vec<f64>,
    pub epsilon: f64,
}

impl TwoTypeProfile {
    /// Channel-initialized start state.
    pub fn initial(spec: &TwoTypeSpec, epsilon: f64) -> Self {
        let len = spec.length;
        Self {
            upper: vec![epsilon; len],
            lower: vec![epsilon; len],
            check_upper: vec![1.0; len + 1],
            check_lower: vec![1.0; len + 1],
            epsilon,
        }
    }
}

/// Applies the four two-type DE equations once.
pub fn two_type_step(profile: &TwoTypeProfile, spec: &TwoTypeSpec) -> Result<TwoTypeProfile> {
    let len = spec.length;
    for v in [&profile.upper, &profile.lower] {
        if v.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: v.len(),
            });
        }
    }
    let system = TwoTypeSystem::new(*spec);
    let src: Vec<f64> = profile
        .upper
        .iter()
        .zip(&profile.lower)
        .flat_map(|(&u, &l)| [u, l])
        .collect();
    let mut dst = src.clone();
    let mut scratch = vec![0.0; system.scratch_len()];
    system.update(profile.epsilon, &src, &mut dst, &mut scratch, 1, len);
    Ok(TwoTypeProfile {
        upper: dst.iter().step_by(2).copied().collect(),
        lower: dst.iter().skip(1).step_by(2).copied().collect(),
        check_upper: scratch.iter().step_by(2).copied().collect(),
        check_lower: scratch.iter().skip(1).step_by(2).copied().collect(),
        epsilon: profile.epsilon,
    })
}

pub fn two_type_threshold(
    spec: &TwoTypeSpec,
    tol: f64,
    controls: &DeControls,
) -> Result<ThresholdResult> {
    bp_threshold(&TwoTypeSystem::new(*spec), tol, controls)
}

#[derive(Debug, Clone, Copy)]
struct BundleTemplate {
    vn_type: VnType,
    /// 0: CN at the same position, 1: CN at the next position.
    cn_offset: usize,
    multiplicity: u32,
}

/// Multi-edge-type DE on a protograph chain, one message per bundle
/// direction (parallel edges carry identical messages).
///
/// The state is indexed exactly like [`ProtographChain::bundles`]. Scratch
/// holds the CN-to-VN erasure probability of each bundle.
#[derive(Debug, Clone)]
pub struct ProtographSystem {
    chain: ProtographChain,
    template: Vec<BundleTemplate>,
}

impl ProtographSystem {
    pub fn new(chain: ProtographChain) -> Self {
        let template = chain
            .bundles()
            .iter()
            .take_while(|b| b.vn_position == 1)
            .map(|b| BundleTemplate {
                vn_type: b.vn_type,
                cn_offset: b.cn_position - b.vn_position,
                multiplicity: b.multiplicity,
            })
            .collect();
        Self { chain, template }
    }

    pub fn chain(&self) -> &ProtographChain {
        &self.chain
    }

    fn check_side(&self, src: &[f64], scratch: &mut [f64], first_cn: usize, last_cn: usize) {
        let k = self.template.len();
        let len = self.chain.length;
        // (state index, multiplicity) of the bundles entering one CN
        let mut incoming = [(0usize, 0u32); 8];
        for c in first_cn..=last_cn {
            let mut n = 0;
            for (slot, t) in self.template.iter().enumerate() {
                let z = c as isize - t.cn_offset as isize;
                if z >= 1 && z as usize <= len {
                    incoming[n] = ((z as usize - 1) * k + slot, t.multiplicity);
                    n += 1;
                }
            }
            let incoming = &incoming[..n];
            for &(target, _) in incoming {
                let mut known = 1.0;
                for &(idx, m) in incoming {
                    let e = if idx == target { m - 1 } else { m };
                    known *= (1.0 - src[idx]).powi(e as i32);
                }
                scratch[target] = 1.0 - known;
            }
        }
    }
}

impl DeSystem for ProtographSystem {
    fn positions(&self) -> usize {
        self.chain.length
    }

    fn stride(&self) -> usize {
        self.template.len()
    }

    fn coupling_radius(&self) -> usize {
        1
    }

    fn scratch_len(&self) -> usize {
        self.chain.length * self.template.len()
    }

    fn update(
        &self,
        epsilon: f64,
        src: &[f64],
        dst: &mut [f64],
        scratch: &mut [f64],
        first: usize,
        last: usize,
    ) {
        self.check_side(src, scratch, first, last + 1);
        let k = self.template.len();
        for z in first..=last {
            let base = (z - 1) * k;
            for (slot, t) in self.template.iter().enumerate() {
                let mut erased = epsilon;
                for (other, u) in self.template.iter().enumerate() {
                    if u.vn_type != t.vn_type {
                        continue;
                    }
                    let e = if other == slot {
                        u.multiplicity - 1
                    } else {
                        u.multiplicity
                    };
                    erased *= scratch[base + other].powi(e as i32);
                }
                dst[base + slot] = erased;
            }
        }
    }
}

/// Per-bundle messages, indexed like [`ProtographChain::bundles`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleProfile {
    pub vn_to_cn: Vec<f64>,
    pub cn_to_vn: Vec<f64>,
    pub epsilon: f64,
}

impl BundleProfile {
    pub fn initial(chain: &ProtographChain, epsilon: f64) -> Self {
        let n = chain.bundles().len();
        Self {
            vn_to_cn: vec![epsilon; n],
            cn_to_vn: vec![0.0; n],
            epsilon,
        }
    }
}

/// One CN update followed by one VN update on every bundle.
pub fn protograph_step(profile: &BundleProfile, chain: &ProtographChain) -> Result<BundleProfile> {
    let n = chain.bundles().len();
    if profile.vn_to_cn.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: profile.vn_to_cn.len(),
        });
    }
    let system = ProtographSystem::new(chain.clone());
    let mut dst = profile.vn_to_cn.clone();
    let mut scratch = vec![0.0; system.scratch_len()];
    system.update(
        profile.epsilon,
        &profile.vn_to_cn,
        &mut dst,
        &mut scratch,
        1,
        chain.length,
    );
    Ok(BundleProfile {
        vn_to_cn: dst,
        cn_to_vn: scratch,
        epsilon: profile.epsilon,
    })
}

pub fn protograph_threshold(
    chain: &ProtographChain,
    tol: f64,
    controls: &DeControls,
) -> Result<ThresholdResult> {
    bp_threshold(&ProtographSystem::new(chain.clone()), tol, controls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::de::{run_de, CoupledSystem};
    use crate::ensembles::{build_protograph_chain, CoupledEnsembleSpec};

    #[test]
    fn two_type_zero_state_is_fixed() {
        let spec = TwoTypeSpec::new(4, 0.3, 0.6, 8).unwrap();
        let mut p = TwoTypeProfile::initial(&spec, 0.45);
        p.upper.fill(0.0);
        p.lower.fill(0.0);
        let out = two_type_step(&p, &spec).unwrap();
        assert!(out.upper.iter().chain(&out.lower).all(|&v| v == 0.0));
        assert!(out
            .check_upper
            .iter()
            .chain(&out.check_lower)
            .all(|&v| v == 1.0));
    }

    #[test]
    fn two_type_length_mismatch() {
        let spec = TwoTypeSpec::new(4, 0.3, 0.6, 8).unwrap();
        let mut p = TwoTypeProfile::initial(&spec, 0.45);
        p.lower.pop();
        assert!(matches!(
            two_type_step(&p, &spec),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn two_type_equal_alphas_track_single_type() {
        let spec = TwoTypeSpec::new(5, 0.359, 0.359, 12).unwrap();
        let single = CoupledEnsembleSpec::half_rate_alpha(5, 0.359, 12).unwrap();
        let mut p = TwoTypeProfile::initial(&spec, 0.47);
        let mut x = crate::de::ErasureProfile {
            values: vec![0.47; 13],
            epsilon: 0.47,
        };
        x.values[12] = 0.0;
        for _ in 0..30 {
            p = two_type_step(&p, &spec).unwrap();
            x = crate::de::de_step(&x, &single).unwrap();
            for z in 0..12 {
                assert_eq!(p.upper[z], p.lower[z]);
                assert!((p.upper[z] - x.values[z]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn protograph_zero_channel() {
        let chain = build_protograph_chain(5, 1, 3, 10).unwrap();
        let p = BundleProfile::initial(&chain, 0.0);
        let out = protograph_step(&p, &chain).unwrap();
        assert!(out.vn_to_cn.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn protograph_bundle_mismatch() {
        let chain = build_protograph_chain(5, 1, 3, 10).unwrap();
        let mut p = BundleProfile::initial(&chain, 0.3);
        p.vn_to_cn.push(0.1);
        assert!(protograph_step(&p, &chain).is_err());
    }

    #[test]
    fn protograph_first_step_by_hand() {
        // (3,1,1), L = 2: bundles per position [v1->z:1, v1->z+1:2, v2->z:1, v2->z+1:2]
        let chain = build_protograph_chain(3, 1, 1, 2).unwrap();
        let eps = 0.4;
        let out = protograph_step(&BundleProfile::initial(&chain, eps), &chain).unwrap();
        let q = 1.0 - eps;
        // c(1) sees two single edges; c(2) sees 1+2+1+2 = 6 edges; c(3) sees 2+2.
        let y_c1 = 1.0 - q;
        let y_c2 = 1.0 - q.powi(5);
        let y_c3 = 1.0 - q.powi(3);
        let expect_pos1 = [eps * y_c2 * y_c2, eps * y_c1 * y_c2];
        let expect_pos2 = [eps * y_c3 * y_c3, eps * y_c2 * y_c3];
        assert!((out.vn_to_cn[0] - expect_pos1[0]).abs() < 1e-15);
        assert!((out.vn_to_cn[1] - expect_pos1[1]).abs() < 1e-15);
        assert!((out.vn_to_cn[2] - expect_pos1[0]).abs() < 1e-15);
        assert!((out.vn_to_cn[4] - expect_pos2[0]).abs() < 1e-15);
        assert!((out.vn_to_cn[5] - expect_pos2[1]).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_protograph_matches_regular_ensemble() {
        // b1 = b2 = dv: each position is an isolated (dv, 2dv) protograph.
        let chain = build_protograph_chain(3, 3, 3, 6).unwrap();
        let sys = ProtographSystem::new(chain);
        let regular = CoupledSystem::new(
            CoupledEnsembleSpec::new(
                3,
                6,
                crate::ensembles::SmoothingDistribution::new(vec![1.0, 0.0]).unwrap(),
                6,
            )
            .unwrap(),
        );
        let c = DeControls::default();
        for eps in [0.40, 0.42, 0.43, 0.44] {
            assert_eq!(
                run_de(&sys, eps, &c).unwrap().converged,
                run_de(&regular, eps, &c).unwrap().converged
            );
        }
    }
}
