//! ULA array responses and Saleh-Valenzuela narrowband channels.
//!
//! Angles are measured from the array axis and must lie in the open interval
//! `(0, pi)`. All arrays use half-wavelength spacing, so the phase step between
//! neighbouring antennas toward angle `theta` is `pi * cos(theta)`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Speed of light in m/s.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier frequency of the path-gain model, in Hz.
pub const CARRIER_HZ: f64 = 28.0e9;

/// Path-loss exponent of the LOS path.
pub const LOS_PATH_LOSS_EXPONENT: f64 = 2.0;

/// NLOS paths are the LOS gain attenuated by `U[min, max]` dB.
pub const NLOS_EXTRA_LOSS_DB: (f64, f64) = (10.0, 20.0);

/// Antenna count of a half-wavelength-spaced uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UlaConfig {
    num_antennas: usize,
}

impl UlaConfig {
    pub fn new(num_antennas: usize) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::Domain("a ULA needs at least one antenna".into()));
        }
        Ok(Self { num_antennas })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }
}

/// One propagation path between the BS and a user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: Complex64,
    /// Angle of departure at the BS, radians.
    pub aod: f64,
    /// Angle of arrival at the user, radians.
    pub aoa: f64,
    pub is_los: bool,
}

pub(crate) fn check_angle(angle: f64, what: &str) -> Result<()> {
    if angle > 0.0 && angle < PI {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} {angle} rad outside (0, pi)")))
    }
}

/// Steering vector of an `M`-element ULA toward `angle`.
///
/// Element `m` is `exp(j ((M-1)/2 - m) pi cos(angle))`, so the phase centre is
/// the middle of the array.
pub fn array_response(config: UlaConfig, angle: f64) -> Result<Array1<Complex64>> {
    check_angle(angle, "array angle")?;
    Ok(centered_ramp(config.num_antennas(), angle.cos(), 1.0))
}

/// `scale * exp(j ((len-1)/2 - m) pi cos_angle)` for `m = 0..len`.
pub(crate) fn centered_ramp(len: usize, cos_angle: f64, scale: f64) -> Array1<Complex64> {
    let center = (len as f64 - 1.0) / 2.0;
    Array1::from_shape_fn(len, |m| Complex64::from_polar(scale, (center - m as f64) * PI * cos_angle))
}

/// Channel of one user: `L + 1` paths (LOS first) and the materialised
/// `M_UE x M_BS` matrix `sum_l alpha_l a_UE(aoa_l) a_BS(aod_l)^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    paths: Vec<PathComponent>,
    ue_config: UlaConfig,
    bs_config: UlaConfig,
    matrix: Array2<Complex64>,
}

impl UserChannel {
    pub fn new(paths: Vec<PathComponent>, ue_config: UlaConfig, bs_config: UlaConfig) -> Result<Self> {
        match paths.first() {
            None => return Err(Error::Domain("a channel needs at least the LOS path".into())),
            Some(los) if !los.is_los => {
                return Err(Error::Domain("the LOS path must be stored at index 0".into()))
            }
            Some(los) if los.gain.norm() <= 0.0 => {
                return Err(Error::Domain("the LOS path gain must be nonzero".into()))
            }
            _ => {}
        }
        if paths.iter().skip(1).any(|p| p.is_los) {
            return Err(Error::Domain("exactly one path may be LOS".into()));
        }
        for p in &paths {
            check_angle(p.aod, "AOD")?;
            check_angle(p.aoa, "AOA")?;
        }
        let matrix = build_matrix(&paths, ue_config, bs_config);
        Ok(Self {
            paths,
            ue_config,
            bs_config,
            matrix,
        })
    }

    pub fn paths(&self) -> &[PathComponent] {
        &self.paths
    }

    pub fn los(&self) -> &PathComponent {
        &self.paths[0]
    }

    pub fn ue_config(&self) -> UlaConfig {
        self.ue_config
    }

    pub fn bs_config(&self) -> UlaConfig {
        self.bs_config
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Same geometry with every path gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let paths = self
            .paths
            .iter()
            .map(|p| PathComponent {
                gain: p.gain * factor,
                ..*p
            })
            .collect();
        Self::new(paths, self.ue_config, self.bs_config)
    }

    /// Row vector `v^H H` seen through the user-side combiner `v`.
    pub fn combined_row(&self, combiner: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        let m_ue = self.ue_config.num_antennas();
        if combiner.len() != m_ue {
            return Err(Error::Dimension {
                what: "combiner",
                got: combiner.len(),
                expected: m_ue,
            });
        }
        Ok(combiner.mapv(|c| c.conj()).dot(&self.matrix))
    }
}

fn build_matrix(paths: &[PathComponent], ue: UlaConfig, bs: UlaConfig) -> Array2<Complex64> {
    let mut h = Array2::<Complex64>::zeros((ue.num_antennas(), bs.num_antennas()));
    for p in paths {
        let a_ue = centered_ramp(ue.num_antennas(), p.aoa.cos(), 1.0);
        let a_bs_conj = centered_ramp(bs.num_antennas(), p.aod.cos(), 1.0).mapv(|c| c.conj());
        for (mut row, &u) in h.rows_mut().into_iter().zip(a_ue.iter()) {
            let coeff = p.gain * u;
            row.zip_mut_with(&a_bs_conj, |h, &b| *h += coeff * b);
        }
    }
    h
}

/// The materialised matrix of a channel.
pub fn channel_matrix(channel: &UserChannel) -> &Array2<Complex64> {
    channel.matrix()
}

/// Scenario parameters shared by every user drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_users: usize,
    pub num_nlos_paths: usize,
    /// Cell radius, metres.
    pub cell_radius: f64,
    /// Users are never dropped closer than this, metres.
    pub min_distance: f64,
    pub bs_config: UlaConfig,
    pub ue_config: UlaConfig,
    /// Maximum BS transmit power, watts.
    pub max_power: f64,
    /// Noise variance, watts.
    pub noise_variance: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_users: 2,
            num_nlos_paths: 30,
            cell_radius: 500.0,
            min_distance: 10.0,
            bs_config: UlaConfig { num_antennas: 128 },
            ue_config: UlaConfig { num_antennas: 10 },
            max_power: crate::units::dbm_to_watts(46.0),
            noise_variance: crate::units::dbm_to_watts(-88.0),
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::Domain("num_users must be at least 1".into()));
        }
        let positive = [
            ("cell_radius", self.cell_radius),
            ("min_distance", self.min_distance),
            ("max_power", self.max_power),
            ("noise_variance", self.noise_variance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.min_distance > self.cell_radius {
            return Err(Error::Domain("min_distance exceeds cell_radius".into()));
        }
        Ok(())
    }
}

/// Free-space LOS amplitude `lambda / (4 pi d)` at the model carrier.
pub fn los_amplitude(distance: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT / CARRIER_HZ;
    wavelength / (4.0 * PI * distance.powf(LOS_PATH_LOSS_EXPONENT / 2.0))
}

/// Uniform angle in the open interval `(0, pi)`.
pub fn sample_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let a = rng.random_range(0.0..PI);
        if a > 0.0 {
            return a;
        }
    }
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

/// Draws one user's `L + 1` paths at `distance` metres from the BS.
pub fn generate_user_channel<R: Rng + ?Sized>(
    rng: &mut R,
    distance: f64,
    scenario: &ScenarioConfig,
) -> Result<UserChannel> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    let los_amp = los_amplitude(distance);
    let mut paths = Vec::with_capacity(scenario.num_nlos_paths + 1);
    paths.push(PathComponent {
        gain: los_amp * random_phase(rng),
        aod: sample_angle(rng),
        aoa: sample_angle(rng),
        is_los: true,
    });
    let (lo, hi) = NLOS_EXTRA_LOSS_DB;
    for _ in 0..scenario.num_nlos_paths {
        let loss_db = rng.random_range(lo..=hi);
        let amp = los_amp * 10f64.powf(-loss_db / 20.0);
        paths.push(PathComponent {
            gain: amp * random_phase(rng),
            aod: sample_angle(rng),
            aoa: sample_angle(rng),
            is_los: false,
        });
    }
    UserChannel::new(paths, scenario.ue_config, scenario.bs_config)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1330_11eb);
    x ^ (x >> 31)
}

/// Independent random stream for (`trial`, `user`) under `seed`.
///
/// The ChaCha key is `splitmix64(seed ^ splitmix64(trial))` and the stream id
/// is `user`, so every draw depends only on the triple and never on the order
/// in which trials are evaluated.
pub fn substream(seed: u64, trial: u64, user: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial)));
    rng.set_stream(user);
    rng
}
