//! Beam splitting: per-RF-chain analog precoders made of contiguous subarrays,
//! each steered at one scheduled user's LOS angle of departure.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::channel::{centered_ramp, check_angle, UlaConfig};
use crate::{Error, Result};

/// Scheduling, antenna and power allocation for `K` users over `N_RF` chains.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlan {
    /// `u[k, r]`: user `k` is served by chain `r`.
    pub scheduling: Array2<bool>,
    /// `M[k, r]`: antennas allocated to user `k` on chain `r`.
    pub antenna_alloc: Array2<usize>,
    /// `p[k, r]`: transmit power of user `k` on chain `r`, watts.
    pub power_alloc: Array2<f64>,
    /// At most this many users per chain.
    pub max_group_size: usize,
}

impl GroupPlan {
    pub fn num_users(&self) -> usize {
        self.scheduling.nrows()
    }

    pub fn num_chains(&self) -> usize {
        self.scheduling.ncols()
    }

    /// All users on one chain with the given antennas and powers.
    pub fn single_chain(antennas: &[usize], powers: &[f64]) -> Result<Self> {
        if antennas.len() != powers.len() {
            return Err(Error::Dimension {
                what: "power allocation",
                got: powers.len(),
                expected: antennas.len(),
            });
        }
        let k = antennas.len();
        Ok(Self {
            scheduling: Array2::from_elem((k, 1), true),
            antenna_alloc: Array2::from_shape_vec((k, 1), antennas.to_vec()).expect("k x 1"),
            power_alloc: Array2::from_shape_vec((k, 1), powers.to_vec()).expect("k x 1"),
            max_group_size: k.max(1),
        })
    }

    /// Users scheduled on `chain`, ascending index.
    pub fn members(&self, chain: usize) -> Vec<usize> {
        (0..self.num_users()).filter(|&k| self.scheduling[[k, chain]]).collect()
    }

    /// Total scheduled power on `chain`.
    pub fn chain_power(&self, chain: usize) -> f64 {
        self.members(chain).iter().map(|&k| self.power_alloc[[k, chain]]).sum()
    }

    pub fn validate(&self, bs_antennas: usize, max_power: f64) -> Result<()> {
        let dim = self.scheduling.dim();
        if self.antenna_alloc.dim() != dim || self.power_alloc.dim() != dim {
            return Err(Error::Constraint("allocation matrices must all be K x N_RF".into()));
        }
        if self.max_group_size == 0 {
            return Err(Error::Constraint("max group size must be positive".into()));
        }
        let (users, chains) = dim;
        for k in 0..users {
            let chains_of_k = (0..chains).filter(|&r| self.scheduling[[k, r]]).count();
            if chains_of_k > 1 {
                return Err(Error::Constraint(format!("user {k} is scheduled on {chains_of_k} chains")));
            }
            for r in 0..chains {
                let (m, p) = (self.antenna_alloc[[k, r]], self.power_alloc[[k, r]]);
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::Constraint(format!("power of user {k} on chain {r} is {p}")));
                }
                if self.scheduling[[k, r]] {
                    if m == 0 {
                        return Err(Error::Constraint(format!("scheduled user {k} has no antennas on chain {r}")));
                    }
                } else if m != 0 || p != 0.0 {
                    return Err(Error::Constraint(format!(
                        "unscheduled user {k} holds resources on chain {r}"
                    )));
                }
            }
        }
        for r in 0..chains {
            let members = self.members(r);
            if members.len() > self.max_group_size {
                return Err(Error::Constraint(format!(
                    "chain {r} serves {} users, limit {}",
                    members.len(),
                    self.max_group_size
                )));
            }
            let antennas: usize = members.iter().map(|&k| self.antenna_alloc[[k, r]]).sum();
            if antennas > bs_antennas {
                return Err(Error::Constraint(format!(
                    "chain {r} allocates {antennas} antennas, array has {bs_antennas}"
                )));
            }
            let power = self.chain_power(r);
            if power > max_power * (1.0 + 1e-12) {
                return Err(Error::Constraint(format!(
                    "chain {r} allocates {power} W, budget {max_power} W"
                )));
            }
        }
        Ok(())
    }
}

/// One subarray of an analog precoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub user: usize,
    /// First physical antenna of the subarray.
    pub start: usize,
    pub len: usize,
    pub steer_angle: f64,
}

impl Segment {
    /// Signed distance, in half wavelengths, from the array phase centre to the
    /// segment phase centre, in the coordinate where antenna `n` sits at
    /// `(M_BS - 1)/2 - n`.
    pub fn center_offset(&self, bs_antennas: usize) -> f64 {
        (bs_antennas as f64 - 1.0) / 2.0 - self.start as f64 - (self.len as f64 - 1.0) / 2.0
    }
}

/// Phase-only weights of one RF chain, laid out segment by segment from antenna 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogPrecoder {
    weights: Array1<Complex64>,
    segments: Vec<Segment>,
    bs_antennas: usize,
}

impl AnalogPrecoder {
    /// Places segments contiguously from antenna 0, in the given order.
    pub fn from_segments(parts: &[(usize, usize, f64)], bs_antennas: usize) -> Result<Self> {
        let mut weights = Vec::new();
        let mut segments = Vec::with_capacity(parts.len());
        let mut start = 0;
        for &(user, len, angle) in parts {
            if start + len > bs_antennas {
                return Err(Error::Constraint(format!(
                    "segments need {} antennas, array has {bs_antennas}",
                    start + len
                )));
            }
            weights.extend(segment_precoder(len, angle, bs_antennas)?);
            segments.push(Segment {
                user,
                start,
                len,
                steer_angle: angle,
            });
            start += len;
        }
        Ok(Self {
            weights: Array1::from(weights),
            segments,
            bs_antennas,
        })
    }

    /// Precoder with no segments.
    pub fn empty(bs_antennas: usize) -> Self {
        Self {
            weights: Array1::zeros(0),
            segments: Vec::new(),
            bs_antennas,
        }
    }

    pub fn weights(&self) -> &Array1<Complex64> {
        &self.weights
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn bs_antennas(&self) -> usize {
        self.bs_antennas
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Length-`M_BS` vector with zeros on unallocated antennas.
    pub fn embedded(&self) -> Array1<Complex64> {
        let mut full = Array1::zeros(self.bs_antennas);
        full.slice_mut(ndarray::s![..self.weights.len()]).assign(&self.weights);
        full
    }

    /// The precoder restricted to one of its segments, still on the full array.
    pub fn segment_only(&self, index: usize) -> Self {
        let seg = self.segments[index];
        let mut weights = Array1::zeros(seg.start + seg.len);
        weights
            .slice_mut(ndarray::s![seg.start..])
            .assign(&self.weights.slice(ndarray::s![seg.start..seg.start + seg.len]));
        Self {
            weights,
            segments: vec![seg],
            bs_antennas: self.bs_antennas,
        }
    }
}

/// Weights of one subarray of `seg_len` antennas steered at `steer_angle`:
/// `exp(j ((seg_len-1)/2 - m) pi cos(steer_angle)) / sqrt(M_BS)`.
pub fn segment_precoder(seg_len: usize, steer_angle: f64, bs_antennas: usize) -> Result<Array1<Complex64>> {
    if seg_len == 0 || seg_len > bs_antennas {
        return Err(Error::Domain(format!(
            "segment length {seg_len} must be in 1..={bs_antennas}"
        )));
    }
    check_angle(steer_angle, "steering angle")?;
    Ok(centered_ramp(seg_len, steer_angle.cos(), 1.0 / (bs_antennas as f64).sqrt()))
}

/// Analog precoder of chain `rf_index`: one segment per scheduled user in
/// ascending user order, steered at that user's LOS AOD.
pub fn rf_chain_precoder(
    plan: &GroupPlan,
    rf_index: usize,
    los_aods: &[f64],
    bs_antennas: usize,
    max_power: f64,
) -> Result<AnalogPrecoder> {
    plan.validate(bs_antennas, max_power)?;
    if rf_index >= plan.num_chains() {
        return Err(Error::Constraint(format!(
            "chain {rf_index} out of range for {} chains",
            plan.num_chains()
        )));
    }
    if los_aods.len() != plan.num_users() {
        return Err(Error::Dimension {
            what: "LOS AOD list",
            got: los_aods.len(),
            expected: plan.num_users(),
        });
    }
    let parts: Vec<_> = plan
        .members(rf_index)
        .into_iter()
        .map(|k| (k, plan.antenna_alloc[[k, rf_index]], los_aods[k]))
        .collect();
    AnalogPrecoder::from_segments(&parts, bs_antennas)
}

/// Full-array precoder for a single user (no splitting).
pub fn full_array_precoder(user: usize, steer_angle: f64, bs_antennas: usize) -> Result<AnalogPrecoder> {
    AnalogPrecoder::from_segments(&[(user, bs_antennas, steer_angle)], bs_antennas)
}

/// User-side combiner `a_UE(aoa) / sqrt(M_UE)`.
pub fn user_combiner(ue_antennas: usize, los_aoa: f64) -> Result<Array1<Complex64>> {
    let config = UlaConfig::new(ue_antennas)?;
    check_angle(los_aoa, "AOA")?;
    Ok(centered_ramp(config.num_antennas(), los_aoa.cos(), 1.0 / (ue_antennas as f64).sqrt()))
}

/// `|a_BS(theta)^H w|` of the precoder on its physical antennas.
pub fn pattern_at(precoder: &AnalogPrecoder, angle: f64) -> f64 {
    let m = precoder.bs_antennas();
    let center = (m as f64 - 1.0) / 2.0;
    let step = PI * angle.cos();
    precoder
        .weights()
        .iter()
        .enumerate()
        .map(|(n, w)| Complex64::from_polar(1.0, -(center - n as f64) * step) * w)
        .sum::<Complex64>()
        .norm()
}

/// Beam-pattern magnitudes over `angle_grid` (linear scale).
pub fn beam_pattern(precoder: &AnalogPrecoder, angle_grid: &[f64]) -> Vec<f64> {
    angle_grid.iter().map(|&a| pattern_at(precoder, a)).collect()
}

pub const DEFAULT_GRID_POINTS: usize = 2048;

/// `n` evenly spaced angles strictly inside `(0, pi)`.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| PI * i as f64 / (n + 1) as f64).collect()
}

/// Grid indices of strict local maxima of a sampled pattern.
pub fn local_maxima(pattern: &[f64]) -> Vec<usize> {
    (1..pattern.len().saturating_sub(1))
        .filter(|&i| pattern[i] > pattern[i - 1] && pattern[i] >= pattern[i + 1])
        .collect()
}

/// Half-power (3 dB) width in radians of the lobe around `peak_angle`.
///
/// Walks outward from the peak in small steps until the pattern drops below
/// `peak / sqrt(2)`, then bisects each crossing. Returns `None` if a side
/// never crosses before the end of `(0, pi)`.
pub fn beamwidth_3db(precoder: &AnalogPrecoder, peak_angle: f64) -> Option<f64> {
    let peak = pattern_at(precoder, peak_angle);
    if peak <= 0.0 {
        return None;
    }
    let level = peak / std::f64::consts::SQRT_2;
    let step = PI / (64.0 * precoder.bs_antennas() as f64);
    let crossing = |dir: f64| -> Option<f64> {
        let mut inside = peak_angle;
        loop {
            let next = inside + dir * step;
            if next <= 0.0 || next >= PI {
                return None;
            }
            if pattern_at(precoder, next) < level {
                let (mut lo, mut hi) = (inside, next);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if pattern_at(precoder, mid) >= level {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            inside = next;
        }
    };
    Some(crossing(1.0)? - crossing(-1.0)?)
}
