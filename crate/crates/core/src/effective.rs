//! Scalar effective channels `h_{k,r} = v_k^H H_k w_r`.
//!
//! [`effective_direct`] is the definition. [`effective_closed_form`] rewrites
//! it as a double sum of Dirichlet kernels over paths and precoder segments,
//! and [`effective_asymptotic`] keeps only the matched LOS term, which is what
//! survives as the arrays grow.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use num_complex::Complex64;

use crate::beam::{full_array_precoder, user_combiner, AnalogPrecoder};
use crate::channel::UserChannel;
use crate::{Error, Result};

/// Below this `|sin x|` the kernel takes its limiting value.
pub const DIRICHLET_EPS: f64 = 1e-9;

/// `sin(M x) / sin(x)`, continuous through the removable singularities at
/// `x = n pi` where it equals `M (-1)^{n (M-1)}`.
pub fn dirichlet(m: usize, x: f64) -> f64 {
    let s = x.sin();
    if s.abs() < DIRICHLET_EPS {
        let n = (x / PI).round() as i64;
        let odd = (n * (m as i64 - 1)).rem_euclid(2) == 1;
        if odd {
            -(m as f64)
        } else {
            m as f64
        }
    } else {
        (m as f64 * x).sin() / s
    }
}

/// `v^H H w` by explicit matrix-vector products, with `w` zero-padded to the
/// full BS array.
pub fn effective_direct(
    channel: &UserChannel,
    combiner: &ndarray::Array1<Complex64>,
    precoder: &AnalogPrecoder,
) -> Result<Complex64> {
    let m_bs = channel.bs_config().num_antennas();
    if precoder.bs_antennas() != m_bs {
        return Err(Error::Dimension {
            what: "embedded precoder",
            got: precoder.bs_antennas(),
            expected: m_bs,
        });
    }
    let row = channel.combined_row(combiner)?;
    Ok(row.dot(&precoder.embedded()))
}

/// Dirichlet-kernel form of the effective channel, with the user combiner
/// matched to the LOS AOA.
///
/// Each `(path l, segment s)` term is
/// `alpha_l / sqrt(M_UE M_BS) * D_{M_UE}(kappa_l) * D_{len_s}(phi_{s,l}) * exp(-j pi c_s cos theta_l)`
/// with `kappa_l = pi/2 (cos aoa_0 - cos aoa_l)`,
/// `phi_{s,l} = pi/2 (cos steer_s - cos aod_l)` and `c_s` the segment's
/// centre offset on the physical array.
pub fn effective_closed_form(channel: &UserChannel, precoder: &AnalogPrecoder) -> Result<Complex64> {
    let m_bs = channel.bs_config().num_antennas();
    if precoder.bs_antennas() != m_bs {
        return Err(Error::Dimension {
            what: "embedded precoder",
            got: precoder.bs_antennas(),
            expected: m_bs,
        });
    }
    let m_ue = channel.ue_config().num_antennas();
    let norm = 1.0 / ((m_ue * m_bs) as f64).sqrt();
    let cos_aoa0 = channel.los().aoa.cos();
    let mut total = Complex64::new(0.0, 0.0);
    for path in channel.paths() {
        let cos_aod = path.aod.cos();
        let kappa = FRAC_PI_2 * (cos_aoa0 - path.aoa.cos());
        let ue_kernel = dirichlet(m_ue, kappa);
        for seg in precoder.segments() {
            let phi = FRAC_PI_2 * (seg.steer_angle.cos() - cos_aod);
            let phase = Complex64::from_polar(1.0, -PI * seg.center_offset(m_bs) * cos_aod);
            total += path.gain * (norm * ue_kernel * dirichlet(seg.len, phi)) * phase;
        }
    }
    Ok(total)
}

/// Large-array approximation `alpha_0 sqrt(M_UE / M_BS) M_k`.
pub fn effective_asymptotic(los_gain: Complex64, ue_antennas: usize, bs_antennas: usize, allocated: usize) -> Complex64 {
    los_gain * ((ue_antennas as f64 / bs_antennas as f64).sqrt() * allocated as f64)
}

/// Large-array full-array gain `|alpha_0|^2 M_UE M_BS`.
pub fn tdma_effective_gain(los_gain: Complex64, ue_antennas: usize, bs_antennas: usize) -> f64 {
    los_gain.norm_sqr() * (ue_antennas * bs_antennas) as f64
}

/// Exact `|v^H H w|^2` with the whole array steered at the user's LOS AOD.
pub fn full_array_gain(channel: &UserChannel) -> Result<f64> {
    let los = channel.los();
    let w = full_array_precoder(0, los.aod, channel.bs_config().num_antennas())?;
    let v = user_combiner(channel.ue_config().num_antennas(), los.aoa)?;
    Ok(effective_direct(channel, &v, &w)?.norm_sqr())
}

/// `K x N_RF` effective channels of every user on every chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannelMatrix {
    pub values: Array2<Complex64>,
}

impl EffectiveChannelMatrix {
    /// Evaluates every entry with [`effective_direct`], using each user's
    /// LOS-matched combiner. Entries exist for unscheduled users too.
    pub fn compute(channels: &[UserChannel], precoders: &[AnalogPrecoder]) -> Result<Self> {
        let mut values = Array2::zeros((channels.len(), precoders.len()));
        for (k, ch) in channels.iter().enumerate() {
            let v = user_combiner(ch.ue_config().num_antennas(), ch.los().aoa)?;
            let row = ch.combined_row(&v)?;
            for (r, w) in precoders.iter().enumerate() {
                if w.bs_antennas() != ch.bs_config().num_antennas() {
                    return Err(Error::Dimension {
                        what: "embedded precoder",
                        got: w.bs_antennas(),
                        expected: ch.bs_config().num_antennas(),
                    });
                }
                values[[k, r]] = row.dot(&w.embedded());
            }
        }
        Ok(Self { values })
    }

    pub fn from_gains(gains: Array2<f64>) -> Self {
        Self {
            values: gains.mapv(|g| Complex64::new(g.sqrt(), 0.0)),
        }
    }

    pub fn num_users(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_chains(&self) -> usize {
        self.values.ncols()
    }

    /// `|h_{k,r}|^2`.
    pub fn gain(&self, user: usize, chain: usize) -> f64 {
        self.values[[user, chain]].norm_sqr()
    }
}
