use std::fs;

use heom_core::data::{
    import_external, read_measures, read_trajectory, sweep_manifest, verify_hamiltonian,
    write_measures, write_trajectory, LayoutConfig, SubsetRule, SweepGrids, SweepManifest,
};
use heom_core::heom::{propagate, site_state, HeomModel, PropagationConfig, Trajectory};
use heom_core::measures::{
    default_pairs, density_snapshot, trajectory_measures, SNAPSHOT_THRESHOLD,
};
use heom_core::model::{BathSpec, ExcitonHamiltonian};
use heom_core::Error;

fn simulated() -> Trajectory {
    let model = HeomModel::new(
        ExcitonHamiltonian::fmo(),
        BathSpec::new(40.0, 100.0, 310.0, 0).unwrap(),
    );
    let config = PropagationConfig {
        dt: 1.0,
        t_max: 200.0,
        output_stride: 2.0,
        truncation_level: 2,
        ..Default::default()
    };
    propagate(&site_state(8, 1).unwrap(), &model, &config).unwrap()
}

#[test]
fn simulated_trajectory_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.txt");
    let traj = simulated();
    write_trajectory(&traj, &path).unwrap();
    let back = read_trajectory(&path).unwrap();
    assert_eq!(back.times, traj.times);
    assert_eq!(back.meta, traj.meta);
    // Populations and the upper triangle are stored, bit for bit; the rest
    // is rebuilt by Hermiticity (so only the sign of a zero may differ).
    for (a, b) in back.states.iter().zip(&traj.states) {
        for i in 0..8 {
            assert_eq!(a[(i, i)].re.to_bits(), b[(i, i)].re.to_bits());
            for k in i + 1..8 {
                assert_eq!(a[(i, k)].re.to_bits(), b[(i, k)].re.to_bits());
                assert_eq!(a[(i, k)].im.to_bits(), b[(i, k)].im.to_bits());
            }
        }
        assert_eq!(a, b);
    }
    verify_hamiltonian(&back, &ExcitonHamiltonian::fmo(), &path).unwrap();
    let other = ExcitonHamiltonian::fmo().without_couplings();
    assert!(matches!(
        verify_hamiltonian(&back, &other, &path),
        Err(Error::Consistency { .. })
    ));
}

#[test]
fn measures_from_a_read_back_trajectory_match() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulated();
    let direct = trajectory_measures(&traj, &default_pairs()).unwrap();

    let tpath = dir.path().join("traj.txt");
    write_trajectory(&traj, &tpath).unwrap();
    let offline = trajectory_measures(&read_trajectory(&tpath).unwrap(), &default_pairs()).unwrap();
    assert_eq!(direct, offline);

    let mpath = dir.path().join("measures.txt");
    write_measures(&direct, &traj.meta, &mpath).unwrap();
    let (back, meta) = read_measures(&mpath).unwrap();
    assert_eq!(back, direct);
    assert_eq!(meta, traj.meta);
}

#[test]
fn external_table_with_its_own_layout_imports() {
    // Time in ps, then the upper triangle interleaved, then populations
    // in reverse order, comma separated, one header line.
    let traj = simulated();
    let n = 8;
    let mut spec = vec!["t".to_string()];
    for i in 1..=n {
        for k in i + 1..=n {
            spec.push(format!("re{i}_{k}"));
            spec.push(format!("im{i}_{k}"));
        }
    }
    spec.extend((1..=n).rev().map(|i| format!("p{i}")));
    spec.push("skip".into());
    let mut layout = LayoutConfig::parse(n, &spec.join(",")).unwrap();
    layout.time_scale = 1000.0;
    layout.header_lines = 1;
    layout.delimiter = Some(',');

    let mut text = format!("{}\n", spec.join(","));
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![format!("{:.16e}", t / 1000.0)];
        for i in 0..n {
            for k in i + 1..n {
                row.push(format!("{:.16e}", rho[(i, k)].re));
                row.push(format!("{:.16e}", rho[(i, k)].im));
            }
        }
        row.extend((0..n).rev().map(|i| format!("{:.16e}", rho[(i, i)].re)));
        row.push("junk".into());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("external.csv");
    fs::write(&path, text).unwrap();

    let imported = import_external(&path, &layout).unwrap();
    assert_eq!(imported.len(), traj.len());
    for (a, b) in imported.states.iter().zip(&traj.states) {
        let err = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-15);
    }
    for (a, b) in imported.times.iter().zip(&traj.times) {
        assert!((a - b).abs() < 1e-9);
    }
    // Same code path for measures.
    let m1 = trajectory_measures(&imported, &default_pairs()).unwrap();
    let m2 = trajectory_measures(&traj, &default_pairs()).unwrap();
    for (a, b) in m1.global_entanglement.iter().zip(&m2.global_entanglement) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn snapshot_marks_small_entries() {
    let traj = simulated();
    let snap = density_snapshot(&traj, 200.0, SNAPSHOT_THRESHOLD).unwrap();
    assert!(!snap.off_grid);
    assert_eq!(snap.time, 200.0);
    for i in 0..8 {
        for k in 0..8 {
            assert_eq!(
                snap.below_threshold[(i, k)],
                snap.magnitudes[(i, k)] < SNAPSHOT_THRESHOLD
            );
        }
    }
    let off = density_snapshot(&traj, 201.0, SNAPSHOT_THRESHOLD).unwrap();
    assert!(off.off_grid);
    assert!(snap.to_table().lines().count() >= 10);
}

#[test]
fn manifest_file_round_trip() {
    let grids = SweepGrids::default();
    let subset = SubsetRule::Explicit(vec![
        (40.0, 25.0, 70.0),
        (520.0, 500.0, 510.0),
        (10.0, 25.0, 30.0),
    ]);
    let m = sweep_manifest(grids, &subset, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.txt");
    m.write(&path).unwrap();
    let back = SweepManifest::read(&path).unwrap();
    assert_eq!(back, m);
    let ids: Vec<&str> = back.runs.iter().map(|r| r.run_id.as_str()).collect();
    assert_eq!(ids, ["l40_g25_t70", "l520_g500_t510", "l10_g25_t30"]);
}
