//! Records CSV to report, end to end through the public API.

use cfis_core::batch::score_records;
use cfis_core::cascade::{build_profile, TestKind};
use cfis_core::io::{emit_report, load_records, summarize, Report, Strictness};

const HEADER: &str = "platform,test,trial_id,Area,Light,Crash,Comp\n";

fn close(got: f64, want: f64) {
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn aperture_records_score_against_frozen_values() {
    let profile = build_profile(TestKind::ThroughApertures);
    let text = format!("{HEADER}G,through_apertures,g1,2.1,300,1,0.83\nA,through_apertures,a1,3,375,0,1.0\n");
    let records = load_records(&text, &profile, Strictness::Strict).unwrap().records;
    let scores = score_records(&profile, &records, 2).unwrap();

    let g = &scores[0].scores;
    close(g.ec, 0.4021681649920677);
    close(g.mc, 0.7230320699708455);
    assert_eq!(g.hi, 0.0);
    close(g.final_score, 0.6405005363507387);

    let a = &scores[1].scores;
    assert_eq!((a.ec, a.mc, a.hi, a.final_score), (0.5, 1.0, 0.0, 0.75));
}

#[test]
fn means_fold_trials_per_platform() {
    let profile = build_profile(TestKind::ThroughApertures);
    let text = format!(
        "{HEADER}A,through_apertures,1,3,375,0,1.0\nA,through_apertures,2,6,750,0,1.0\nB,through_apertures,1,0,0,3,0\n"
    );
    let records = load_records(&text, &profile, Strictness::Strict).unwrap().records;
    let scores = score_records(&profile, &records, 1).unwrap();
    let report = Report {
        test_means: summarize(&scores),
        records: scores,
        ranking: None,
    };
    let docs = emit_report(&report);
    assert_eq!(
        docs.means_csv,
        "platform,test,trials,mean_final\nA,through_apertures,2,0.875000\nB,through_apertures,1,0.000000\n"
    );
    assert!(docs
        .records_csv
        .lines()
        .skip(1)
        .all(|l| l.starts_with("A,") || l.starts_with("B,")));
}

#[test]
fn lenient_loading_scores_the_good_rows() {
    let profile = build_profile(TestKind::ThroughApertures);
    let text = format!("{HEADER}A,through_apertures,1,3,375,0,1.0\nB,through_apertures,1,3,,0,1.0\n");
    assert!(load_records(&text, &profile, Strictness::Strict).is_err());
    let set = load_records(&text, &profile, Strictness::Lenient).unwrap();
    assert_eq!(set.row_errors.len(), 1);
    assert_eq!(set.row_errors[0].line, 3);
    assert_eq!(score_records(&profile, &set.records, 1).unwrap().len(), 1);
}
