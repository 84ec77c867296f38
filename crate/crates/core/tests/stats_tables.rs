use std::path::PathBuf;

use mvfc::stats::{friedman, holm_csv, holm_posthoc, render_friedman, render_holm, ScoreTable};

fn fixture(name: &str) -> ScoreTable {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    ScoreTable::read_csv(&path, true).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

const RI_RANKS: [f64; 11] = [
    9.8333, 8.0, 5.75, 6.4167, 5.1667, 5.8333, 5.6667, 4.5, 6.8333, 6.6667, 1.3333,
];
const NMI_RANKS: [f64; 11] = [
    9.0, 8.0, 5.5, 6.1667, 5.8333, 6.8333, 5.6667, 4.6667, 6.8333, 6.3333, 1.1667,
];

#[test]
fn ri_friedman_ranks_and_p() {
    let fr = friedman(&fixture("ri_scores.csv"), 0.05).unwrap();
    for (got, want) in fr.avg_ranks.iter().zip(RI_RANKS) {
        assert!(close(*got, want, 1e-3), "{got} vs {want}");
    }
    assert!(close(fr.p_value, 0.006361, 1e-4));
    assert!(fr.reject_at_alpha);
    assert!(close(fr.avg_ranks.iter().sum::<f64>(), 66.0, 1e-12));
}

#[test]
fn nmi_friedman_ranks_and_p() {
    let fr = friedman(&fixture("nmi_scores.csv"), 0.05).unwrap();
    for (got, want) in fr.avg_ranks.iter().zip(NMI_RANKS) {
        assert!(close(*got, want, 1e-3), "{got} vs {want}");
    }
    assert!(close(fr.p_value, 0.015895, 1e-4));
    assert!(fr.reject_at_alpha);
}

type Row = (&'static str, f64, f64, f64, bool);

fn check_holm(file: &str, expected: &[Row]) {
    let table = fixture(file);
    let fr = friedman(&table, 0.05).unwrap();
    let h = holm_posthoc(&fr, table.n_datasets(), 0.05);
    assert_eq!(h.control, "HSS-MVFC");
    assert!(close(h.standard_error, 1.91485, 1e-5));
    assert_eq!(h.rows.len(), expected.len());
    for (row, &(name, z, p, thr, reject)) in h.rows.iter().zip(expected) {
        assert_eq!(row.algorithm, name);
        assert!(close(row.z, z, 1e-4), "{name}: z {} vs {z}", row.z);
        assert!(
            close(row.p_value, p, 1e-4),
            "{name}: p {} vs {p}",
            row.p_value
        );
        assert!(
            close(row.threshold, thr, 1e-6),
            "{name}: threshold {}",
            row.threshold
        );
        assert_eq!(row.reject, reject, "{name}");
    }
}

#[test]
fn ri_holm_table() {
    check_holm(
        "ri_scores.csv",
        &[
            ("K-means", 4.43898, 0.000009, 0.005, true),
            ("FCM", 3.481553, 0.000499, 0.005556, true),
            ("JNMF", 2.872281, 0.004075, 0.00625, true),
            ("MVKSC", 2.785242, 0.005349, 0.007143, true),
            ("MVSpec", 2.654684, 0.007938, 0.008333, true),
            ("Co-FCM", 2.350048, 0.018771, 0.01, false),
            ("MVKKM", 2.306529, 0.021081, 0.0125, false),
            ("TW-K-means", 2.26301, 0.023635, 0.016667, false),
            ("Co-FKM", 2.001893, 0.045296, 0.025, false),
            ("MV-Co-FCM", 1.653738, 0.098181, 0.05, false),
        ],
    );
}

#[test]
fn nmi_holm_table() {
    check_holm(
        "nmi_scores.csv",
        &[
            ("K-means", 4.090825, 0.000043, 0.005, true),
            ("FCM", 3.568592, 0.000359, 0.005556, true),
            ("Co-FCM", 2.95932, 0.003083, 0.00625, true),
            ("JNMF", 2.95932, 0.003083, 0.007143, true),
            ("MVKSC", 2.698204, 0.006971, 0.008333, true),
            ("MVSpec", 2.611165, 0.009023, 0.01, true),
            ("Co-FKM", 2.437087, 0.014806, 0.0125, false),
            ("TW-K-means", 2.350048, 0.018771, 0.016667, false),
            ("MVKKM", 2.26301, 0.023635, 0.025, false),
            ("MV-Co-FCM", 1.827815, 0.067577, 0.05, false),
        ],
    );
}

#[test]
fn renderings_carry_every_algorithm() {
    let table = fixture("ri_scores.csv");
    let fr = friedman(&table, 0.05).unwrap();
    let text = render_friedman(&fr);
    for a in table.algorithms() {
        assert!(text.contains(a.as_str()));
    }
    assert!(text.contains("0.006361"));
    let h = holm_posthoc(&fr, 6, 0.05);
    let text = render_holm(&h);
    assert!(text.lines().nth(1).unwrap().contains("K-means"));
    assert_eq!(holm_csv(&h).lines().count(), 11);
}
