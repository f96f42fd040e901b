//! Large-array, high-SNR analysis of a single-RF-chain BS serving `K` users
//! with one beam-split NOMA group, compared with equal-share TDMA.

use crate::{Error, Result};

/// Single-chain scenario, users indexed strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticScenario {
    /// `|alpha_{k,0}|`, descending.
    pub los_gains: Vec<f64>,
    /// `M_k`, sum at most `bs_antennas`.
    pub antennas: Vec<usize>,
    pub ue_antennas: usize,
    pub bs_antennas: usize,
    /// Watts.
    pub max_power: f64,
    /// `p_k` in watts, sum at most `max_power`.
    pub powers: Vec<f64>,
    /// `sigma^2` in watts.
    pub noise: f64,
}

impl AsymptoticScenario {
    /// Scenario with equal power `max_power / K`.
    pub fn equal_power(
        los_gains: Vec<f64>,
        antennas: Vec<usize>,
        ue_antennas: usize,
        bs_antennas: usize,
        max_power: f64,
        noise: f64,
    ) -> Result<Self> {
        let k = los_gains.len();
        let s = Self {
            powers: vec![max_power / k as f64; k],
            los_gains,
            antennas,
            ue_antennas,
            bs_antennas,
            max_power,
            noise,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.los_gains.len();
        if k == 0 {
            return Err(Error::Domain("scenario needs at least one user".into()));
        }
        if self.antennas.len() != k || self.powers.len() != k {
            return Err(Error::Dimension {
                what: "per-user allocation",
                got: self.antennas.len().min(self.powers.len()),
                expected: k,
            });
        }
        if self.los_gains.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::Domain("LOS gains must be positive".into()));
        }
        if self.los_gains.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain("LOS gains must be in descending order".into()));
        }
        if self.antennas.contains(&0) || self.antennas.iter().sum::<usize>() > self.bs_antennas {
            return Err(Error::Constraint(format!(
                "antenna allocation {:?} does not fit {} antennas",
                self.antennas, self.bs_antennas
            )));
        }
        if self.ue_antennas == 0 || !(self.max_power > 0.0) || !(self.noise > 0.0) {
            return Err(Error::Domain("antenna counts, power and noise must be positive".into()));
        }
        if self.powers.iter().any(|&p| !(p >= 0.0)) || self.powers.iter().sum::<f64>() > self.max_power * (1.0 + 1e-12) {
            return Err(Error::Constraint("power split exceeds the budget".into()));
        }
        Ok(())
    }

    fn rho(&self) -> f64 {
        1.0 / self.noise
    }

    /// Geometric mean of the LOS gain magnitudes.
    pub fn geometric_mean_gain(&self) -> f64 {
        geometric_mean(&self.los_gains)
    }

    /// `rho p |alpha_1|^2 M_UE M_1^2 / M_BS`.
    fn strongest_snr(&self, power: f64) -> f64 {
        let m1 = self.antennas[0] as f64;
        self.rho() * power * self.los_gains[0].powi(2) * self.ue_antennas as f64 * m1 * m1 / self.bs_antennas as f64
    }
}

pub fn geometric_mean(values: &[f64]) -> f64 {
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

/// `|alpha_k| M_k >= |alpha_k'| M_k'` for every weaker `k'`.
pub fn sic_condition_asymptotic(s: &AsymptoticScenario) -> bool {
    let strength: Vec<f64> = s.los_gains.iter().zip(&s.antennas).map(|(g, &m)| g * m as f64).collect();
    strength
        .iter()
        .enumerate()
        .all(|(k, &a)| strength[k + 1..].iter().all(|&b| a >= b))
}

fn require_sic(s: &AsymptoticScenario) -> Result<()> {
    s.validate()?;
    if sic_condition_asymptotic(s) {
        Ok(())
    } else {
        Err(Error::SicCondition(format!(
            "|alpha_k| M_k not descending for gains {:?} and antennas {:?}",
            s.los_gains, s.antennas
        )))
    }
}

/// High-SNR per-user rates: the strongest user scales with `M_1^2`, the
/// others only depend on their power ratio.
pub fn theorem1_rates(s: &AsymptoticScenario) -> Result<Vec<f64>> {
    require_sic(s)?;
    let mut rates = Vec::with_capacity(s.powers.len());
    rates.push(s.strongest_snr(s.powers[0]).log2());
    let mut stronger = s.powers[0];
    for &p in &s.powers[1..] {
        rates.push((1.0 + p / stronger).log2());
        stronger += p;
    }
    Ok(rates)
}

/// `log2(rho p_max |alpha_1|^2 M_UE M_1^2 / M_BS)`.
pub fn theorem1_sum_rate(s: &AsymptoticScenario) -> Result<f64> {
    require_sic(s)?;
    Ok(s.strongest_snr(s.max_power).log2())
}

/// Equal-share TDMA at high SNR: `mean_k log2(rho p_max |alpha_k|^2 M_UE M_BS)`.
pub fn tdma_sum_rate_asymptotic(s: &AsymptoticScenario) -> f64 {
    let k = s.los_gains.len() as f64;
    let array = (s.ue_antennas * s.bs_antennas) as f64;
    s.los_gains
        .iter()
        .map(|g| (s.rho() * s.max_power * g * g * array).log2() / k)
        .sum()
}

/// NOMA-over-TDMA gain `2 log2((M_1 / M_BS) |alpha_1| / mean_geo)`.
pub fn noma_gain(s: &AsymptoticScenario) -> f64 {
    2.0 * (s.antennas[0] as f64 / s.bs_antennas as f64 * s.los_gains[0] / s.geometric_mean_gain()).log2()
}

/// `|alpha_1| M_1 > M_BS * mean_geo`.
pub fn allocation_superiority(s: &AsymptoticScenario) -> bool {
    s.los_gains[0] * s.antennas[0] as f64 > s.bs_antennas as f64 * s.geometric_mean_gain()
}

/// Smallest `M_1 <= M_BS` with strict superiority, if any.
pub fn min_antennas_for_superiority(los_gains: &[f64], bs_antennas: usize) -> Option<usize> {
    let bound = bs_antennas as f64 * geometric_mean(los_gains);
    (1..=bs_antennas).find(|&m1| los_gains[0] * m1 as f64 > bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::dbm_to_watts;
    use proptest::prelude::*;

    fn scenario(gains: &[f64], antennas: &[usize]) -> AsymptoticScenario {
        AsymptoticScenario::equal_power(gains.to_vec(), antennas.to_vec(), 10, 128, 10.0, 1e-9).unwrap()
    }

    #[test]
    fn sic_condition_examples() {
        assert!(sic_condition_asymptotic(&scenario(&[1.0, 1.0], &[64, 64])));
        assert!(sic_condition_asymptotic(&scenario(&[1.0, 0.2], &[50, 78])));
        assert!(!sic_condition_asymptotic(&scenario(&[1.0, 0.9], &[10, 100])));
    }

    #[test]
    fn weak_user_rates() {
        let s = scenario(&[1.0, 0.5, 0.25], &[100, 14, 14]);
        let r = theorem1_rates(&s).unwrap();
        assert!((r[1] - 1.0).abs() < 1e-15);
        assert!((r[2] - 1.5f64.log2()).abs() < 1e-15);
        assert!((r[2] - 0.5849625007211562).abs() < 1e-12);
    }

    #[test]
    fn strong_user_gains_two_bits_per_doubling() {
        let a = theorem1_rates(&scenario(&[1.0, 0.1], &[50, 20])).unwrap()[0];
        let b = theorem1_rates(&scenario(&[1.0, 0.1], &[100, 20])).unwrap()[0];
        assert!((b - a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theorem1_refuses_failed_sic() {
        let s = scenario(&[1.0, 0.9], &[10, 100]);
        assert!(matches!(theorem1_rates(&s), Err(Error::SicCondition(_))));
        assert!(matches!(theorem1_sum_rate(&s), Err(Error::SicCondition(_))));
    }

    #[test]
    fn sum_rate_telescopes() {
        for k in 1..=5 {
            let gains: Vec<f64> = (0..k).map(|i| 0.5f64.powi(i as i32)).collect();
            let mut antennas = vec![10; k];
            antennas[0] = 128 - 10 * (k - 1);
            let s = scenario(&gains, &antennas);
            let total: f64 = theorem1_rates(&s).unwrap().iter().sum();
            assert!((total - theorem1_sum_rate(&s).unwrap()).abs() < 0.01);
        }
    }

    #[test]
    fn doubling_power_adds_one_bit() {
        let mut s = scenario(&[1e-6, 1e-7], &[100, 28]);
        let a = theorem1_sum_rate(&s).unwrap();
        s.max_power *= 2.0;
        s.powers.iter_mut().for_each(|p| *p *= 2.0);
        assert!((theorem1_sum_rate(&s).unwrap() - a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_power_budget_plug_in() {
        // rho p_max = 10^13.4; 10^13.4 * 1e-12 * 10 * 1e4 / 128 = 19624.11
        let s = AsymptoticScenario::equal_power(
            vec![1e-6],
            vec![100],
            10,
            128,
            dbm_to_watts(46.0),
            dbm_to_watts(-88.0),
        )
        .unwrap();
        let r = theorem1_sum_rate(&s).unwrap();
        assert!((r - 19624.112746f64.log2()).abs() < 1e-6, "{r}");
        assert!((r - 14.26).abs() < 0.01);
    }

    #[test]
    fn tdma_examples() {
        let one = scenario(&[1e-5], &[128]);
        let expected = (1e9 * 10.0 * 1e-10 * 1280.0f64).log2();
        assert!((tdma_sum_rate_asymptotic(&one) - expected).abs() < 1e-12);
        let same = scenario(&[1e-5, 1e-5, 1e-5], &[100, 14, 14]);
        assert!((tdma_sum_rate_asymptotic(&same) - expected).abs() < 1e-12);
        let two = scenario(&[5e-5, 1e-5], &[100, 28]);
        let logs: Vec<f64> = [5e-5f64, 1e-5].iter().map(|g| (1e10 * g * g * 1280.0).log2()).collect();
        assert!((logs[0] - logs[1] - 2.0 * 5f64.log2()).abs() < 1e-12);
        assert!((2.0 * 5f64.log2() - 4.643856189774724).abs() < 1e-12);
        assert!((tdma_sum_rate_asymptotic(&two) - 0.5 * (logs[0] + logs[1])).abs() < 1e-12);
    }

    #[test]
    fn gain_vanishes_for_full_array_and_equal_gains() {
        let s = AsymptoticScenario {
            los_gains: vec![2e-6; 3],
            antennas: vec![128, 0, 0],
            ue_antennas: 10,
            bs_antennas: 128,
            max_power: 1.0,
            powers: vec![1.0 / 3.0; 3],
            noise: 1e-12,
        };
        assert!(noma_gain(&s).abs() < 1e-12);
        assert!(!allocation_superiority(&s));
    }

    #[test]
    fn gain_value_for_ratio_ten() {
        let s = scenario(&[1.0, 0.1], &[100, 28]);
        let expected = 2.0 * (100.0 / 128.0 * 10f64.sqrt()).log2();
        assert!((noma_gain(&s) - expected).abs() < 1e-12);
        assert!((noma_gain(&s) - 2.61).abs() < 0.005);
        let diff = theorem1_sum_rate(&s).unwrap() - tdma_sum_rate_asymptotic(&s);
        assert!((noma_gain(&s) - diff).abs() < 1e-9);
    }

    #[test]
    fn invalid_scenarios() {
        assert!(AsymptoticScenario::equal_power(vec![1.0, 1.0], vec![64, 64], 10, 64, 1.0, 1.0).is_err());
        assert!(AsymptoticScenario::equal_power(vec![0.1, 1.0], vec![10, 10], 10, 64, 1.0, 1.0).is_err());
        assert!(AsymptoticScenario::equal_power(vec![1.0, 0.1], vec![10, 0], 10, 64, 1.0, 1.0).is_err());
        assert!(AsymptoticScenario::equal_power(vec![], vec![], 10, 64, 1.0, 1.0).is_err());
    }

    #[test]
    fn superiority_thresholds() {
        assert_eq!(min_antennas_for_superiority(&[1.0, 0.2], 128), Some(58));
        assert_eq!(min_antennas_for_superiority(&[1.0, 0.1], 128), Some(41));
        assert_eq!(min_antennas_for_superiority(&[1.0, 1.0, 1.0], 128), None);
        assert_eq!(min_antennas_for_superiority(&[0.7], 128), None);
        assert!(128.0 / 5f64.sqrt() > 57.0 && 128.0 / 5f64.sqrt() < 58.0);
        assert!(128.0 / 10f64.sqrt() > 40.0 && 128.0 / 10f64.sqrt() < 41.0);
        for (m1, expect) in [(57, false), (58, true), (100, true)] {
            assert_eq!(allocation_superiority(&scenario(&[1.0, 0.2], &[m1, 128 - m1])), expect);
        }
        // scan oracle
        for ratio in [1.5, 3.0, 5.0, 10.0, 40.0] {
            let gains = [1.0, 1.0 / ratio];
            let scan = (1..128).find(|&m1| allocation_superiority(&scenario(&gains, &[m1, 128 - m1])));
            assert_eq!(scan, min_antennas_for_superiority(&gains, 128).filter(|&m| m < 128));
        }
    }

    fn arb_scenario() -> impl Strategy<Value = AsymptoticScenario> {
        (1usize..=5, proptest::collection::vec(1e-8..1e-4f64, 5), proptest::collection::vec(1usize..=40, 5), 1usize..=16)
            .prop_map(|(k, mut gains, mut ant, m_ue)| {
                gains.truncate(k);
                gains.sort_by(|a, b| b.total_cmp(a));
                ant.truncate(k);
                AsymptoticScenario::equal_power(gains, ant, m_ue, 256, 20.0, 1e-12).unwrap()
            })
    }

    proptest! {
        #[test]
        fn gain_is_difference_of_sum_rates(s in arb_scenario()) {
            let mut s = s;
            // make the SIC condition hold by giving user 1 the largest share
            let rest: usize = s.antennas[1..].iter().sum();
            s.antennas[0] = s.antennas[0].max(s.antennas[1..].iter().copied().max().unwrap_or(1)).min(256 - rest);
            s.antennas[1..].sort_by(|a, b| b.cmp(a));
            prop_assume!(sic_condition_asymptotic(&s));
            let diff = theorem1_sum_rate(&s).unwrap() - tdma_sum_rate_asymptotic(&s);
            prop_assert!((noma_gain(&s) - diff).abs() < 1e-9);
        }

        #[test]
        fn superiority_iff_positive_gain(s in arb_scenario()) {
            prop_assert_eq!(allocation_superiority(&s), noma_gain(&s) > 0.0);
        }

        #[test]
        fn gain_ignores_power_noise_and_ue_array(s in arb_scenario(), f in 0.1..10.0f64, m_ue in 1usize..64) {
            let base = noma_gain(&s);
            let mut t = s.clone();
            t.max_power *= f;
            t.powers.iter_mut().for_each(|p| *p *= f);
            t.noise *= f * f;
            t.ue_antennas = m_ue;
            prop_assert_eq!(noma_gain(&t).to_bits(), base.to_bits());
        }

        #[test]
        fn sum_rate_increases_with_strong_allocation(m1 in 10usize..200) {
            let a = scenario_wide(m1);
            let b = scenario_wide(m1 + 1);
            prop_assert!(theorem1_sum_rate(&b).unwrap() > theorem1_sum_rate(&a).unwrap());
        }
    }

    fn scenario_wide(m1: usize) -> AsymptoticScenario {
        AsymptoticScenario::equal_power(vec![1e-5, 2e-6], vec![m1, 10], 10, 256, 10.0, 1e-12).unwrap()
    }
}
