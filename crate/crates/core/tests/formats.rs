use alperf::harness::{run, ExperimentSpec, RunRecord, Scenario};
use alperf::io::{
    read_records_csv, render_boxplots_svg, summarize_records, summarize_rows, write_records_csv, LayoutOptions, Summary,
};
use alperf::stats::BoxplotStats;
use quick_xml::events::Event;
use quick_xml::Reader;

fn small_records() -> Vec<RunRecord> {
    let mut spec = ExperimentSpec::defaults_for(Scenario::EstimatorComparison, 5);
    spec.repetitions = 3;
    spec.pool_size = 150;
    spec.true_eval_size = 200;
    spec.subsample_reps = 10;
    run(&spec, 2).unwrap()
}

/// Parses `svg` fully and returns (element count, y values of tick labels).
fn parse_svg(svg: &str) -> (usize, Vec<String>) {
    let mut reader = Reader::from_str(svg);
    let mut elements = 0;
    let mut depth = 0i32;
    let mut texts = Vec::new();
    loop {
        match reader.read_event().expect("well-formed XML") {
            Event::Start(_) => {
                elements += 1;
                depth += 1;
            }
            Event::Empty(_) => elements += 1,
            Event::End(_) => depth -= 1,
            Event::Text(t) => texts.push(t.unescape().unwrap().into_owned()),
            Event::Eof => break,
            _ => {}
        }
    }
    assert_eq!(depth, 0);
    (elements, texts)
}

#[test]
fn csv_round_trip_matches_in_memory_summary() {
    let records = small_records();
    let mut buf = Vec::new();
    write_records_csv(&records, &mut buf).unwrap();
    let rows = read_records_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), records.len());
    let from_csv = summarize_rows(&rows).unwrap();
    let in_memory = summarize_records(&records).unwrap();
    assert_eq!(from_csv, in_memory);
    for (a, b) in from_csv.groups.iter().zip(&in_memory.groups) {
        assert_eq!(a.estimate.mean.to_bits(), b.estimate.mean.to_bits());
    }
}

#[test]
fn svg_is_well_formed_and_deterministic() {
    let summary = summarize_records(&small_records()).unwrap();
    let a = render_boxplots_svg(&summary, &LayoutOptions::default()).unwrap();
    let b = render_boxplots_svg(&summary, &LayoutOptions::default()).unwrap();
    assert_eq!(a, b);
    let (elements, texts) = parse_svg(&a);
    assert!(elements > summary.groups.len() * 5);
    for tick in ["0.0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "1.0"] {
        assert_eq!(texts.iter().filter(|t| t.as_str() == tick).count(), 3, "tick {tick}");
    }
    assert!(texts.iter().any(|t| t == "B=50"));
}

#[test]
fn single_group_svg_parses() {
    let summary = Summary {
        groups: vec![alperf::io::SummaryGroup {
            scenario: "cv-folds".into(),
            sampler: "unbiased & co".into(),
            budget: 20,
            estimator: "cv-2fold".into(),
            estimate: BoxplotStats::point(0.8),
            true_baseline: BoxplotStats::point(0.9),
        }],
    };
    let svg = render_boxplots_svg(&summary, &LayoutOptions::default()).unwrap();
    let (_, texts) = parse_svg(&svg);
    assert!(texts.iter().any(|t| t == "cv-folds / unbiased & co"));
    assert!(svg.contains(r#"fill="green""#) && svg.contains(r#"stroke="red""#) && svg.contains("stroke-dasharray"));
}

#[test]
fn estimate_means_stay_in_unit_interval() {
    for r in small_records() {
        assert!((0.0..=1.0).contains(&r.estimate.mean), "{r:?}");
        assert!((0.0..=1.0).contains(&r.true_baseline), "{r:?}");
        assert!(r.estimate.q25 <= r.estimate.median && r.estimate.median <= r.estimate.q75, "{r:?}");
    }
}
