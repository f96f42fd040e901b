use mbnoma::beam::{beamwidth_3db, pattern_at};
use mbnoma::channel::substream;
use mbnoma::experiments::{
    beam_pattern_precoders, drop_users, power_sweep_trials, run_antenna_sweep, run_power_sweep, ExperimentConfig,
    Summary, SweepKind, SweepSpec,
};
use rand::Rng;

fn spec(kind: SweepKind, text: &str) -> SweepSpec {
    ExperimentConfig::parse(text).unwrap().sweep_spec(kind).unwrap()
}

#[test]
fn noma_increases_with_strong_user_antennas() {
    let s = spec(SweepKind::AntennaSweep, "trials = 300\ngain_ratio = 5\nm1_values = 20:10:120\nnlos_paths = 0");
    let noma = run_antenna_sweep(&s).unwrap().values("noma_sum_mean");
    assert!(noma.windows(2).all(|w| w[1] > w[0]), "{noma:?}");
}

#[test]
fn larger_ratio_gives_larger_gap() {
    let gap = |ratio: f64| {
        let s = spec(
            SweepKind::AntennaSweep,
            &format!("trials = 300\ngain_ratio = {ratio}\nm1_values = 70,90,110\nnlos_paths = 0"),
        );
        let t = run_antenna_sweep(&s).unwrap();
        let noma = t.values("noma_sum_mean");
        let tdma = t.values("tdma_sum_mean");
        noma.iter().zip(tdma).map(|(n, t)| n - t).collect::<Vec<_>>()
    };
    let (five, ten) = (gap(5.0), gap(10.0));
    for (a, b) in five.iter().zip(&ten) {
        assert!(b > a, "{five:?} vs {ten:?}");
    }
}

#[test]
fn feasibility_accounting() {
    let s = spec(SweepKind::AntennaSweep, "trials = 50\nm1_values = 10:10:120");
    let t = run_antenna_sweep(&s).unwrap();
    for f in t.values("feasible_fraction") {
        let feasible = f * 50.0;
        assert!((feasible - feasible.round()).abs() < 1e-9 && (0.0..=50.0).contains(&feasible));
    }
}

#[test]
fn power_sweep_gap_tracks_predicted_gain_at_high_power() {
    let s = spec(SweepKind::PowerSweep, "trials = 200\npmax_sweep_dbm = 46,70");
    let t = run_power_sweep(&s).unwrap();
    let noma = t.values("noma_sum_mean");
    let tdma = t.values("tdma_sum_mean");
    let predicted = t.values("predicted_gain")[0];
    assert!((noma[1] - tdma[1] - predicted).abs() < 0.05);
    assert!((noma[0] - tdma[0] - predicted).abs() < 0.2);
}

#[test]
fn baseline_close_to_tdma() {
    let s = spec(SweepKind::PowerSweep, "trials = 200\npmax_sweep_dbm = 30,46");
    let trials = power_sweep_trials(&s).unwrap();
    for i in 0..2 {
        let diff = Summary::of(trials.iter().map(|t| t.points[i].baseline - t.points[i].tdma)).unwrap();
        assert!(diff.mean.abs() < 0.5 && diff.mean >= -1e-12, "{diff:?}");
    }
}

#[test]
fn default_beam_pattern_configuration() {
    let s = spec(SweepKind::BeamPattern, "");
    assert_eq!(s.scenario.bs_config.num_antennas(), 128);
    assert_eq!(s.split_antennas, vec![50, 78]);
    assert_eq!(s.split_angles_deg, vec![70.0, 90.0]);
    assert_eq!(s.full_angle_deg, 120.0);
    let (split, full) = beam_pattern_precoders(&s).unwrap();
    let full_peak = pattern_at(&full, 120f64.to_radians());
    let full_width = beamwidth_3db(&full, 120f64.to_radians()).unwrap();
    for (i, deg) in [70f64, 90.0].into_iter().enumerate() {
        assert!(pattern_at(&split, deg.to_radians()) < full_peak);
        let seg = split.segment_only(i);
        assert!(beamwidth_3db(&seg, deg.to_radians()).unwrap() > full_width);
    }
}

#[test]
fn drops_do_not_depend_on_other_users() {
    // user streams are independent, so adding users leaves earlier draws unchanged
    let s = spec(SweepKind::Snapshot, "num_users = 3\nallocation = 100,14,14");
    let mut rng = substream(s.scenario.rng_seed, 7, 0);
    let u: f64 = rng.random();
    let d0 = (100.0 + u * (500.0f64.powi(2) - 100.0)).sqrt();
    let users = drop_users(&s.scenario, 7, None).unwrap();
    assert!(users.iter().any(|x| (x.distance - d0).abs() < 1e-9));
}
