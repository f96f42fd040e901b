//! Achievable rates with an identity digital precoder: multi-beam NOMA with
//! SIC, the TDMA baseline, and the single-beam NOMA baseline.
//!
//! Users are ranked by LOS path gain. A user decodes and cancels every weaker
//! user in its group and treats the stronger ones as interference.

use ndarray::Array2;

use crate::beam::{full_array_precoder, user_combiner, GroupPlan};
use crate::channel::UserChannel;
use crate::effective::{effective_direct, EffectiveChannelMatrix};
use crate::{Error, Result};

/// Relative slack when comparing a SIC decoding rate with its target rate.
const SIC_RATE_TOL: f64 = 1e-12;

/// Users ordered strongest first by `|alpha_{k,0}|^2`, ties by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SicOrder {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl SicOrder {
    pub fn from_los_gains(los_power: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..los_power.len()).collect();
        order.sort_by(|&a, &b| los_power[b].total_cmp(&los_power[a]).then(a.cmp(&b)));
        Self::from_permutation(order)
    }

    pub fn from_channels(channels: &[UserChannel]) -> Self {
        let gains: Vec<f64> = channels.iter().map(|c| c.los().gain.norm_sqr()).collect();
        Self::from_los_gains(&gains)
    }

    /// Users `0, 1, ..` already strongest first.
    pub fn identity(k: usize) -> Self {
        Self::from_permutation((0..k).collect())
    }

    fn from_permutation(order: Vec<usize>) -> Self {
        let mut rank = vec![0; order.len()];
        for (i, &k) in order.iter().enumerate() {
            rank[k] = i;
        }
        Self { order, rank }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `user` in the order (0 = strongest).
    pub fn rank(&self, user: usize) -> usize {
        self.rank[user]
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }
}

/// Result of one SIC rate check `R_{k,k',r} >= R_{k',r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SicCheck {
    pub decoder: usize,
    pub message: usize,
    pub chain: usize,
    pub decoding_rate: f64,
    pub target_rate: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SicReport {
    pub checks: Vec<SicCheck>,
    pub feasible: bool,
}

/// Rates in bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_rate: Vec<f64>,
    pub sic: SicReport,
    pub group_sum: Vec<f64>,
    pub system_sum: f64,
}

/// Inter- and intra-group interference power at user `k` on chain `r`.
pub fn interference_terms(
    eff: &EffectiveChannelMatrix,
    plan: &GroupPlan,
    user: usize,
    chain: usize,
    order: &SicOrder,
) -> (f64, f64) {
    let inter = (0..plan.num_chains())
        .filter(|&r| r != chain)
        .map(|r| eff.gain(user, r) * plan.chain_power(r))
        .sum();
    let intra = stronger_power(plan, chain, order, user) * eff.gain(user, chain);
    (inter, intra)
}

/// Scheduled power on `chain` of users strictly ahead of `user` in the order.
fn stronger_power(plan: &GroupPlan, chain: usize, order: &SicOrder, user: usize) -> f64 {
    order.order()[..order.rank(user)]
        .iter()
        .filter(|&&k| plan.scheduling[[k, chain]])
        .map(|&k| plan.power_alloc[[k, chain]])
        .sum()
}

fn log_rate(signal: f64, interference: f64) -> f64 {
    (1.0 + signal / interference).log2()
}

/// `R_{k,r}`: rate of user `k` on chain `r`, zero when unscheduled.
pub fn individual_rate(
    eff: &EffectiveChannelMatrix,
    plan: &GroupPlan,
    user: usize,
    chain: usize,
    order: &SicOrder,
    noise: f64,
) -> f64 {
    if !plan.scheduling[[user, chain]] {
        return 0.0;
    }
    let (inter, intra) = interference_terms(eff, plan, user, chain, order);
    let signal = plan.power_alloc[[user, chain]] * eff.gain(user, chain);
    log_rate(signal, inter + intra + noise)
}

/// `R_{k,k',r}`: rate at which `decoder` can decode the message of the weaker
/// `message` user on `chain`.
pub fn sic_decoding_rate(
    eff: &EffectiveChannelMatrix,
    plan: &GroupPlan,
    decoder: usize,
    message: usize,
    chain: usize,
    order: &SicOrder,
    noise: f64,
) -> Result<f64> {
    if !order.precedes(decoder, message) {
        return Err(Error::Ordering { decoder, message });
    }
    if !plan.scheduling[[message, chain]] {
        return Ok(0.0);
    }
    let (inter, _) = interference_terms(eff, plan, decoder, chain, order);
    let gain = eff.gain(decoder, chain);
    let intra = stronger_power(plan, chain, order, message) * gain;
    let signal = plan.power_alloc[[message, chain]] * gain;
    Ok(log_rate(signal, inter + intra + noise))
}

/// Checks every (decoder, weaker message) pair inside each group.
pub fn sic_feasible(eff: &EffectiveChannelMatrix, plan: &GroupPlan, order: &SicOrder, noise: f64) -> SicReport {
    let mut checks = Vec::new();
    for chain in 0..plan.num_chains() {
        let members: Vec<usize> = order
            .order()
            .iter()
            .copied()
            .filter(|&k| plan.scheduling[[k, chain]])
            .collect();
        for (i, &decoder) in members.iter().enumerate() {
            for &message in &members[i + 1..] {
                let decoding_rate =
                    sic_decoding_rate(eff, plan, decoder, message, chain, order, noise).expect("ordered pair");
                let target_rate = individual_rate(eff, plan, message, chain, order, noise);
                let ok = decoding_rate >= target_rate - SIC_RATE_TOL * target_rate.max(1.0);
                checks.push(SicCheck {
                    decoder,
                    message,
                    chain,
                    decoding_rate,
                    target_rate,
                    ok,
                });
            }
        }
    }
    let feasible = checks.iter().all(|c| c.ok);
    SicReport { checks, feasible }
}

/// Every user's rate on every chain, summed per group and overall.
pub fn system_sum_rate(eff: &EffectiveChannelMatrix, plan: &GroupPlan, order: &SicOrder, noise: f64) -> RateReport {
    let (users, chains) = (plan.num_users(), plan.num_chains());
    let mut table = Array2::<f64>::zeros((users, chains));
    for k in 0..users {
        for r in 0..chains {
            table[[k, r]] = individual_rate(eff, plan, k, r, order, noise);
        }
    }
    let per_user_rate: Vec<f64> = table.rows().into_iter().map(|row| row.sum()).collect();
    let group_sum: Vec<f64> = table.columns().into_iter().map(|col| col.sum()).collect();
    let system_sum = per_user_rate.iter().sum();
    RateReport {
        per_user_rate,
        sic: sic_feasible(eff, plan, order, noise),
        group_sum,
        system_sum,
    }
}

/// TDMA with time shares `shares`, each user served alone at full power.
pub fn tdma_rates(full_array_gains: &[f64], shares: &[f64], max_power: f64, noise: f64) -> Result<RateReport> {
    if shares.len() != full_array_gains.len() {
        return Err(Error::Dimension {
            what: "time shares",
            got: shares.len(),
            expected: full_array_gains.len(),
        });
    }
    let total: f64 = shares.iter().sum();
    if shares.iter().any(|&b| !(b >= 0.0)) || total > 1.0 + 1e-12 {
        return Err(Error::ShareSum(total));
    }
    let per_user_rate: Vec<f64> = full_array_gains
        .iter()
        .zip(shares)
        .map(|(&g, &b)| if b == 0.0 { 0.0 } else { b * log_rate(max_power * g, noise) })
        .collect();
    let system_sum = per_user_rate.iter().sum();
    Ok(RateReport {
        per_user_rate,
        sic: SicReport {
            checks: Vec::new(),
            feasible: true,
        },
        group_sum: vec![system_sum],
        system_sum,
    })
}

/// Equal time shares `1/K`.
pub fn equal_shares(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

/// 3 dB beamwidth rule of thumb for an `M`-antenna ULA, degrees.
pub fn nominal_beamwidth_deg(bs_antennas: usize) -> f64 {
    102.1 / bs_antennas as f64
}

/// Clusters users whose LOS AODs lie within one nominal beamwidth of a head
/// chosen greedily by descending LOS gain. Each cluster holds at most
/// `max_group_size` users.
pub fn beam_clusters(channels: &[UserChannel], order: &SicOrder, max_group_size: usize) -> Vec<Vec<usize>> {
    let Some(first) = channels.first() else {
        return Vec::new();
    };
    let width = nominal_beamwidth_deg(first.bs_config().num_antennas()).to_radians();
    let mut assigned = vec![false; channels.len()];
    let mut clusters = Vec::new();
    for &head in order.order() {
        if assigned[head] {
            continue;
        }
        assigned[head] = true;
        let mut cluster = vec![head];
        let head_aod = channels[head].los().aod;
        for &k in order.order() {
            if cluster.len() >= max_group_size.max(1) {
                break;
            }
            if !assigned[k] && (channels[k].los().aod - head_aod).abs() <= width {
                assigned[k] = true;
                cluster.push(k);
            }
        }
        clusters.push(cluster);
    }
    clusters
}

/// Single-beam NOMA: one full-array beam per cluster (steered at its head),
/// NOMA with equal power inside the cluster, equal time shares across clusters.
pub fn single_beam_noma_baseline(
    channels: &[UserChannel],
    max_power: f64,
    noise: f64,
    max_group_size: usize,
) -> Result<RateReport> {
    let k = channels.len();
    let order = SicOrder::from_channels(channels);
    let clusters = beam_clusters(channels, &order, max_group_size);
    let share = 1.0 / clusters.len().max(1) as f64;
    let mut per_user_rate = vec![0.0; k];
    let mut group_sum = Vec::with_capacity(clusters.len());
    let mut checks = Vec::new();
    for cluster in &clusters {
        let head = channels[cluster[0]].los();
        let w = full_array_precoder(cluster[0], head.aod, channels[0].bs_config().num_antennas())?;
        let mut eff = Array2::zeros((k, 1));
        for &u in cluster {
            let ch = &channels[u];
            let v = user_combiner(ch.ue_config().num_antennas(), ch.los().aoa)?;
            eff[[u, 0]] = effective_direct(ch, &v, &w)?;
        }
        let eff = EffectiveChannelMatrix { values: eff };
        let mut scheduling = Array2::from_elem((k, 1), false);
        let mut antennas = Array2::zeros((k, 1));
        let mut power = Array2::zeros((k, 1));
        let p = max_power / cluster.len() as f64;
        for &u in cluster {
            scheduling[[u, 0]] = true;
            antennas[[u, 0]] = channels[0].bs_config().num_antennas();
            power[[u, 0]] = p;
        }
        let plan = GroupPlan {
            scheduling,
            antenna_alloc: antennas,
            power_alloc: power,
            max_group_size: cluster.len(),
        };
        let report = system_sum_rate(&eff, &plan, &order, noise);
        for &u in cluster {
            per_user_rate[u] = share * report.per_user_rate[u];
        }
        group_sum.push(share * report.system_sum);
        checks.extend(report.sic.checks);
    }
    let system_sum = per_user_rate.iter().sum();
    let feasible = checks.iter().all(|c| c.ok);
    Ok(RateReport {
        per_user_rate,
        sic: SicReport { checks, feasible },
        group_sum,
        system_sum,
    })
}
