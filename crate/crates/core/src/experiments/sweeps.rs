use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;

use super::config::{SweepKind, SweepSpec};
use super::csv::{Field, Table};
use super::montecarlo::{monte_carlo, Summary};
use crate::asymptotics::{
    min_antennas_for_superiority, noma_gain, sic_condition_asymptotic, theorem1_sum_rate, tdma_sum_rate_asymptotic,
    AsymptoticScenario,
};
use crate::beam::{
    angle_grid, beam_pattern, full_array_precoder, rf_chain_precoder, user_combiner, AnalogPrecoder, GroupPlan,
};
use crate::channel::{generate_user_channel, substream, ScenarioConfig, UserChannel};
use crate::effective::{effective_asymptotic, effective_closed_form, full_array_gain, EffectiveChannelMatrix};
use crate::rates::{equal_shares, single_beam_noma_baseline, system_sum_rate, tdma_rates, SicOrder};
use crate::units::{amplitude_to_db, dbm_to_watts};
use crate::{Error, Result};

pub const ANTENNA_SWEEP_HEADER: &str = "m1,m2,noma_sum_mean,noma_sum_stderr,tdma_sum_mean,tdma_sum_stderr,noma_asymptotic,tdma_asymptotic,superiority_threshold,feasible_fraction";
pub const POWER_SWEEP_HEADER: &str = "pmax_dbm,noma_sum_mean,baseline_sum_mean,tdma_sum_mean,predicted_gain";
pub const BEAM_PATTERN_HEADER: &str = "angle_deg,split_mag_db,full_mag_db";
pub const EFFECTIVE_HEADER: &str =
    "trial,user,distance_m,los_gain_abs,aod_deg,antennas,eff_direct_abs,eff_closed_form_abs,eff_asymptotic_abs,full_array_gain";
pub const RATES_HEADER: &str =
    "trial,noma_sum,tdma_sum,baseline_sum,sic_feasible,noma_asymptotic,tdma_asymptotic,predicted_gain";

/// One dropped user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub distance: f64,
    pub channel: UserChannel,
}

/// Drops the scenario's users for `trial`, strongest LOS gain first.
///
/// Distances are uniform over the annulus `[min_distance, cell_radius]` by
/// area. With `gain_ratio = Some(r)` the second user's paths are rescaled so
/// that `|alpha_1| / |alpha_2| = r` exactly.
pub fn drop_users(scenario: &ScenarioConfig, trial: u64, gain_ratio: Option<f64>) -> Result<Vec<UserDrop>> {
    scenario.validate()?;
    let (r_min, r_max) = (scenario.min_distance, scenario.cell_radius);
    let mut users = (0..scenario.num_users as u64)
        .map(|k| {
            let mut rng = substream(scenario.rng_seed, trial, k);
            let u: f64 = rng.random();
            let distance = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
            Ok(UserDrop {
                distance,
                channel: generate_user_channel(&mut rng, distance, scenario)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // stable sort keeps index order on ties
    users.sort_by(|a, b| b.channel.los().gain.norm_sqr().total_cmp(&a.channel.los().gain.norm_sqr()));
    if let Some(ratio) = gain_ratio {
        if users.len() != 2 {
            return Err(Error::Config("gain_ratio applies to two-user scenarios only".into()));
        }
        let target = users[0].channel.los().gain.norm() / ratio;
        let factor = target / users[1].channel.los().gain.norm();
        users[1].channel = users[1].channel.scaled(factor)?;
    }
    Ok(users)
}

/// `v_k^H H_k` for every user, with combiners matched to the LOS AOA.
fn combined_rows(channels: &[UserChannel]) -> Result<Vec<Array1<Complex64>>> {
    channels
        .iter()
        .map(|ch| ch.combined_row(&user_combiner(ch.ue_config().num_antennas(), ch.los().aoa)?))
        .collect()
}

fn effective_from_rows(rows: &[Array1<Complex64>], precoders: &[AnalogPrecoder]) -> EffectiveChannelMatrix {
    let embedded: Vec<_> = precoders.iter().map(AnalogPrecoder::embedded).collect();
    let mut values = Array2::zeros((rows.len(), precoders.len()));
    for (k, row) in rows.iter().enumerate() {
        for (r, w) in embedded.iter().enumerate() {
            values[[k, r]] = row.dot(w);
        }
    }
    EffectiveChannelMatrix { values }
}

/// Per-drop quantities shared by all sweep points.
struct DropContext {
    channels: Vec<UserChannel>,
    rows: Vec<Array1<Complex64>>,
    full_gains: Vec<f64>,
    los_gains: Vec<f64>,
    aods: Vec<f64>,
    order: SicOrder,
}

impl DropContext {
    fn new(spec: &SweepSpec, trial: u64) -> Result<Self> {
        let channels: Vec<UserChannel> = drop_users(&spec.scenario, trial, spec.gain_ratio)?
            .into_iter()
            .map(|d| d.channel)
            .collect();
        Ok(Self {
            rows: combined_rows(&channels)?,
            full_gains: channels.iter().map(full_array_gain).collect::<Result<_>>()?,
            los_gains: channels.iter().map(|c| c.los().gain.norm()).collect(),
            aods: channels.iter().map(|c| c.los().aod).collect(),
            order: SicOrder::from_channels(&channels),
            channels,
        })
    }

    fn asymptotic(&self, spec: &SweepSpec, antennas: &[usize], max_power: f64) -> Result<AsymptoticScenario> {
        AsymptoticScenario::equal_power(
            self.los_gains.clone(),
            antennas.to_vec(),
            spec.scenario.ue_config.num_antennas(),
            spec.scenario.bs_config.num_antennas(),
            max_power,
            spec.scenario.noise_variance,
        )
    }
}

fn equal_power_plan(antennas: &[usize], max_power: f64) -> Result<GroupPlan> {
    let p = max_power / antennas.len() as f64;
    GroupPlan::single_chain(antennas, &vec![p; antennas.len()])
}

struct AntennaPoint {
    noma: f64,
    tdma: f64,
    noma_asymptotic: Option<f64>,
    tdma_asymptotic: f64,
    threshold: Option<usize>,
    feasible: bool,
}

/// Two-user sum rate versus the strong user's antenna count `M_1`
/// (`M_2 = M_BS - M_1`), equal power for NOMA and equal time for TDMA.
pub fn run_antenna_sweep(spec: &SweepSpec) -> Result<Table> {
    if spec.kind != SweepKind::AntennaSweep {
        return Err(Error::Config("not an antenna-sweep spec".into()));
    }
    spec.check()?;
    let bs = spec.scenario.bs_config.num_antennas();
    let pmax = spec.scenario.max_power;
    let noise = spec.scenario.noise_variance;
    let per_trial = monte_carlo(spec.trials, spec.threads, |trial| {
        let ctx = DropContext::new(spec, trial)?;
        let tdma = tdma_rates(&ctx.full_gains, &equal_shares(2), pmax, noise)?.system_sum;
        let threshold = min_antennas_for_superiority(&ctx.los_gains, bs);
        spec.m1_values
            .iter()
            .map(|&m1| {
                let antennas = [m1, bs - m1];
                let plan = equal_power_plan(&antennas, pmax)?;
                let w = rf_chain_precoder(&plan, 0, &ctx.aods, bs, pmax)?;
                let eff = effective_from_rows(&ctx.rows, &[w]);
                let noma = system_sum_rate(&eff, &plan, &ctx.order, noise).system_sum;
                let asym = ctx.asymptotic(spec, &antennas, pmax)?;
                let feasible = sic_condition_asymptotic(&asym);
                Ok(AntennaPoint {
                    noma,
                    tdma,
                    noma_asymptotic: theorem1_sum_rate(&asym).ok(),
                    tdma_asymptotic: tdma_sum_rate_asymptotic(&asym),
                    threshold,
                    feasible,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut table = Table::new(ANTENNA_SWEEP_HEADER);
    for (i, &m1) in spec.m1_values.iter().enumerate() {
        let points = || per_trial.iter().map(move |t| &t[i]);
        let noma = Summary::of(points().map(|p| p.noma)).expect("trials >= 1");
        let tdma = Summary::of(points().map(|p| p.tdma)).expect("trials >= 1");
        let noma_asym = Summary::of(points().filter_map(|p| p.noma_asymptotic));
        let tdma_asym = Summary::of(points().map(|p| p.tdma_asymptotic)).expect("trials >= 1");
        let feasible = points().filter(|p| p.feasible).count();
        table.push(vec![
            m1.into(),
            (bs - m1).into(),
            noma.mean.into(),
            noma.stderr.into(),
            tdma.mean.into(),
            tdma.stderr.into(),
            noma_asym.map(|s| s.mean).into(),
            tdma_asym.mean.into(),
            median_threshold(points().map(|p| p.threshold)).into(),
            (feasible as f64 / spec.trials as f64).into(),
        ]);
    }
    Ok(table)
}

/// Lower median, with `None` ranked above every threshold.
fn median_threshold(values: impl Iterator<Item = Option<usize>>) -> Option<usize> {
    let mut v: Vec<usize> = values.map(|t| t.unwrap_or(usize::MAX)).collect();
    v.sort_unstable();
    let m = v[(v.len() - 1) / 2];
    (m != usize::MAX).then_some(m)
}

/// First `M_1` at which mean NOMA beats mean TDMA and stays ahead for the
/// rest of the sweep.
pub fn empirical_crossing(table: &Table) -> Option<usize> {
    let m1 = table.values("m1");
    let noma = table.values("noma_sum_mean");
    let tdma = table.values("tdma_sum_mean");
    let ahead: Vec<bool> = noma.iter().zip(&tdma).map(|(n, t)| n > t).collect();
    (0..ahead.len())
        .find(|&i| ahead[i..].iter().all(|&a| a))
        .map(|i| m1[i] as usize)
}

/// Per-drop rates of the power sweep at one transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub noma: f64,
    pub baseline: f64,
    pub tdma: f64,
}

/// Per-trial output of [`power_sweep_trials`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrial {
    pub points: Vec<PowerPoint>,
    /// Closed-form NOMA-over-TDMA gain for this drop.
    pub predicted_gain: f64,
    /// `rho p_K |h_K|^2` of the weakest user at each power, linear.
    pub weakest_snr: Vec<f64>,
}

/// Runs the power sweep and keeps every trial, in trial order.
pub fn power_sweep_trials(spec: &SweepSpec) -> Result<Vec<PowerTrial>> {
    if spec.kind != SweepKind::PowerSweep {
        return Err(Error::Config("not a power-sweep spec".into()));
    }
    spec.check()?;
    let bs = spec.scenario.bs_config.num_antennas();
    let noise = spec.scenario.noise_variance;
    let k = spec.scenario.num_users;
    monte_carlo(spec.trials, spec.threads, |trial| {
        let ctx = DropContext::new(spec, trial)?;
        let reference = equal_power_plan(&spec.allocation, 1.0)?;
        let w = rf_chain_precoder(&reference, 0, &ctx.aods, bs, 1.0)?;
        let eff = effective_from_rows(&ctx.rows, &[w]);
        let predicted_gain = noma_gain(&ctx.asymptotic(spec, &spec.allocation, 1.0)?);
        let mut points = Vec::with_capacity(spec.pmax_sweep_dbm.len());
        let mut weakest_snr = Vec::with_capacity(spec.pmax_sweep_dbm.len());
        for &dbm in &spec.pmax_sweep_dbm {
            let pmax = dbm_to_watts(dbm);
            let plan = equal_power_plan(&spec.allocation, pmax)?;
            points.push(PowerPoint {
                noma: system_sum_rate(&eff, &plan, &ctx.order, noise).system_sum,
                baseline: single_beam_noma_baseline(&ctx.channels, pmax, noise, spec.max_group_size)?.system_sum,
                tdma: tdma_rates(&ctx.full_gains, &equal_shares(k), pmax, noise)?.system_sum,
            });
            weakest_snr.push(pmax / k as f64 * eff.gain(k - 1, 0) / noise);
        }
        Ok(PowerTrial {
            points,
            predicted_gain,
            weakest_snr,
        })
    })
}

/// Mean sum rates of multi-beam NOMA, single-beam NOMA and TDMA versus `p_max`.
pub fn run_power_sweep(spec: &SweepSpec) -> Result<Table> {
    let trials = power_sweep_trials(spec)?;
    Ok(power_sweep_table(spec, &trials))
}

pub fn power_sweep_table(spec: &SweepSpec, trials: &[PowerTrial]) -> Table {
    let predicted = Summary::of(trials.iter().map(|t| t.predicted_gain)).expect("trials >= 1");
    let mut table = Table::new(POWER_SWEEP_HEADER);
    for (i, &dbm) in spec.pmax_sweep_dbm.iter().enumerate() {
        let mean = |f: fn(&PowerPoint) -> f64| Summary::of(trials.iter().map(|t| f(&t.points[i]))).expect("trials").mean;
        table.push(vec![
            dbm.into(),
            mean(|p| p.noma).into(),
            mean(|p| p.baseline).into(),
            mean(|p| p.tdma).into(),
            predicted.mean.into(),
        ]);
    }
    table
}

/// The split and full-array precoders of a beam-pattern spec.
pub fn beam_pattern_precoders(spec: &SweepSpec) -> Result<(AnalogPrecoder, AnalogPrecoder)> {
    let bs = spec.scenario.bs_config.num_antennas();
    let parts: Vec<_> = spec
        .split_antennas
        .iter()
        .zip(&spec.split_angles_deg)
        .enumerate()
        .map(|(k, (&m, &deg))| (k, m, deg.to_radians()))
        .collect();
    let split = AnalogPrecoder::from_segments(&parts, bs)?;
    let full = full_array_precoder(parts.len(), spec.full_angle_deg.to_radians(), bs)?;
    Ok((split, full))
}

/// Beam-pattern magnitudes in dB of the split and the full-array precoder.
pub fn run_beam_pattern(spec: &SweepSpec) -> Result<Table> {
    if spec.kind != SweepKind::BeamPattern {
        return Err(Error::Config("not a beam-pattern spec".into()));
    }
    spec.check()?;
    let (split, full) = beam_pattern_precoders(spec)?;
    let grid = angle_grid(spec.grid_points);
    let split_mag = beam_pattern(&split, &grid);
    let full_mag = beam_pattern(&full, &grid);
    let mut table = Table::new(BEAM_PATTERN_HEADER);
    for ((angle, s), f) in grid.iter().zip(split_mag).zip(full_mag) {
        table.push(vec![angle.to_degrees().into(), amplitude_to_db(s).into(), amplitude_to_db(f).into()]);
    }
    Ok(table)
}

/// Per-drop, per-user effective channels for a single-chain allocation.
pub fn run_effective(spec: &SweepSpec) -> Result<Table> {
    if spec.kind != SweepKind::Snapshot {
        return Err(Error::Config("not a snapshot spec".into()));
    }
    spec.check()?;
    let bs = spec.scenario.bs_config.num_antennas();
    let ue = spec.scenario.ue_config.num_antennas();
    let pmax = spec.scenario.max_power;
    let per_trial = monte_carlo(spec.trials, spec.threads, |trial| {
        let users = drop_users(&spec.scenario, trial, spec.gain_ratio)?;
        let channels: Vec<UserChannel> = users.iter().map(|u| u.channel.clone()).collect();
        let aods: Vec<f64> = channels.iter().map(|c| c.los().aod).collect();
        let plan = equal_power_plan(&spec.allocation, pmax)?;
        let w = rf_chain_precoder(&plan, 0, &aods, bs, pmax)?;
        let eff = EffectiveChannelMatrix::compute(&channels, std::slice::from_ref(&w))?;
        users
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let los = u.channel.los();
                Ok(vec![
                    Field::from(trial),
                    k.into(),
                    u.distance.into(),
                    los.gain.norm().into(),
                    los.aod.to_degrees().into(),
                    spec.allocation[k].into(),
                    eff.values[[k, 0]].norm().into(),
                    effective_closed_form(&u.channel, &w)?.norm().into(),
                    effective_asymptotic(los.gain, ue, bs, spec.allocation[k]).norm().into(),
                    full_array_gain(&u.channel)?.into(),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new(EFFECTIVE_HEADER);
    per_trial.into_iter().flatten().for_each(|row| table.push(row));
    Ok(table)
}

/// Per-drop sum rates of multi-beam NOMA, TDMA and single-beam NOMA.
pub fn run_rates(spec: &SweepSpec) -> Result<Table> {
    if spec.kind != SweepKind::Snapshot {
        return Err(Error::Config("not a snapshot spec".into()));
    }
    spec.check()?;
    let bs = spec.scenario.bs_config.num_antennas();
    let pmax = spec.scenario.max_power;
    let noise = spec.scenario.noise_variance;
    let k = spec.scenario.num_users;
    let rows = monte_carlo(spec.trials, spec.threads, |trial| {
        let ctx = DropContext::new(spec, trial)?;
        let plan = equal_power_plan(&spec.allocation, pmax)?;
        let w = rf_chain_precoder(&plan, 0, &ctx.aods, bs, pmax)?;
        let eff = effective_from_rows(&ctx.rows, &[w]);
        let noma = system_sum_rate(&eff, &plan, &ctx.order, noise);
        let tdma = tdma_rates(&ctx.full_gains, &equal_shares(k), pmax, noise)?;
        let baseline = single_beam_noma_baseline(&ctx.channels, pmax, noise, spec.max_group_size)?;
        let asym = ctx.asymptotic(spec, &spec.allocation, pmax)?;
        Ok(vec![
            Field::from(trial),
            noma.system_sum.into(),
            tdma.system_sum.into(),
            baseline.system_sum.into(),
            noma.sic.feasible.into(),
            theorem1_sum_rate(&asym).ok().into(),
            tdma_sum_rate_asymptotic(&asym).into(),
            noma_gain(&asym).into(),
        ])
    })?;
    let mut table = Table::new(RATES_HEADER);
    rows.into_iter().for_each(|row| table.push(row));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentConfig;

    fn spec(kind: SweepKind, text: &str) -> SweepSpec {
        ExperimentConfig::parse(text).unwrap().sweep_spec(kind).unwrap()
    }

    #[test]
    fn drops_are_reproducible_and_sorted() {
        let s = spec(SweepKind::PowerSweep, "seed = 3\nnlos_paths = 2");
        let a = drop_users(&s.scenario, 4, None).unwrap();
        let b = drop_users(&s.scenario, 4, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        for pair in a.windows(2) {
            assert!(pair[0].channel.los().gain.norm_sqr() >= pair[1].channel.los().gain.norm_sqr());
        }
        for u in &a {
            assert!(u.distance >= 10.0 && u.distance <= 500.0);
        }
        assert_ne!(a, drop_users(&s.scenario, 5, None).unwrap());
    }

    #[test]
    fn pinned_gain_ratio() {
        let s = spec(SweepKind::AntennaSweep, "gain_ratio = 5\nnlos_paths = 3");
        for trial in 0..20 {
            let users = drop_users(&s.scenario, trial, Some(5.0)).unwrap();
            let ratio = users[0].channel.los().gain.norm() / users[1].channel.los().gain.norm();
            assert!((ratio - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distances_fill_the_disc_by_area() {
        let s = spec(SweepKind::Snapshot, "num_users = 1\nnlos_paths = 0\nmin_distance_m = 1e-9");
        // P(d <= R/2) = 1/4 for area-uniform drops
        let inner = (0..4000)
            .filter(|&t| drop_users(&s.scenario, t, None).unwrap()[0].distance <= 250.0)
            .count();
        assert!((inner as f64 / 4000.0 - 0.25).abs() < 0.03);
    }

    #[test]
    fn antenna_sweep_shape() {
        let s = spec(SweepKind::AntennaSweep, "trials = 3\nm1_values = 10,64,100\nnlos_paths = 0\ngain_ratio = 5");
        let t = run_antenna_sweep(&s).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.values("m2"), vec![118.0, 64.0, 28.0]);
        assert_eq!(t.values("superiority_threshold"), vec![58.0; 3]);
        // 5 * 10 < 118 violates the SIC condition
        assert_eq!(t.values("feasible_fraction"), vec![0.0, 1.0, 1.0]);
        assert!(t.values("noma_asymptotic")[0].is_nan());
        let noma = t.values("noma_sum_mean");
        assert!(noma[2] > noma[1]);
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let s = spec(SweepKind::AntennaSweep, "trials = 1\nm1_values = 80");
        let t = run_antenna_sweep(&s).unwrap();
        assert_eq!(t.values("noma_sum_stderr"), vec![0.0]);
        let s2 = spec(SweepKind::Snapshot, "trials = 1\nallocation = 80,48");
        let r = run_rates(&s2).unwrap();
        assert!((t.values("noma_sum_mean")[0] - r.values("noma_sum")[0]).abs() < 1e-12);
    }

    #[test]
    fn beam_pattern_table() {
        let s = spec(SweepKind::BeamPattern, "grid_points = 256");
        let t = run_beam_pattern(&s).unwrap();
        assert_eq!(t.rows.len(), 256);
        let full = t.values("full_mag_db");
        let peak = full.iter().cloned().fold(f64::MIN, f64::max);
        assert!(peak <= 20.0 * 128f64.sqrt().log10() + 1e-9);
    }

    #[test]
    fn effective_table_agrees_with_closed_form() {
        let s = spec(SweepKind::Snapshot, "trials = 4\nnlos_paths = 5");
        let t = run_effective(&s).unwrap();
        assert_eq!(t.rows.len(), 8);
        for (d, c) in t.values("eff_direct_abs").iter().zip(t.values("eff_closed_form_abs")) {
            assert!((d - c).abs() < 1e-9 * d);
        }
    }

    #[test]
    fn power_sweep_runs() {
        let s = spec(SweepKind::PowerSweep, "trials = 4\npmax_sweep_dbm = 30,46\nnlos_paths = 3");
        let t = run_power_sweep(&s).unwrap();
        assert_eq!(t.rows.len(), 2);
        let noma = t.values("noma_sum_mean");
        assert!(noma[1] > noma[0]);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let s = spec(SweepKind::PowerSweep, "");
        assert!(run_antenna_sweep(&s).is_err());
        assert!(run_beam_pattern(&s).is_err());
    }
}
