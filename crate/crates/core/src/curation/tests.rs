use super::*;
use crate::ingest::ClientIdentity;
use chrono::DateTime;

const DIR: &str = "blacklist 203.0.113.0/24\norganism 10.1.0.0/16 Academic\nbotagent googlebot\n";

fn query(line: usize, ip: &str, ua: &str, text: &str) -> CuratedQuery {
    CuratedQuery::new(
        text,
        Provenance {
            source_path: "fixture.log".into(),
            line_number: line,
            client: ClientIdentity::Ip(ip.into()),
            timestamp: DateTime::parse_from_rfc3339("2020-05-01T10:00:00Z").unwrap()
                + chrono::TimeDelta::minutes(line as i64 * 7),
            user_agent: Some(ua.into()),
        },
    )
}

fn ctx() -> CurationContext {
    CurationContext {
        directory: ProvenanceDirectory::parse(DIR).unwrap(),
        ..Default::default()
    }
}

fn six() -> Vec<CuratedQuery> {
    vec![
        query(1, "10.1.0.9", "Googlebot/2.1", "SELECT ?a WHERE {?a <http://x/p> ?b}"),
        query(2, "203.0.113.5", "Mozilla/5.0", "SELECT ?c WHERE {?c <http://x/q> ?d}"),
        query(3, "10.1.0.2", "Mozilla/5.0", "SELECT ?e WHERE {?e <http://x/r> ?f}"),
        query(4, "10.1.0.2", "Mozilla/5.0", "SELECT ?e  WHERE { ?e <http://x/r> ?f }"),
        query(5, "10.1.0.3", "Mozilla/5.0", "SELECT ?g WHERE {?g <http://x/s> ?h"),
        query(6, "10.1.0.4", "Mozilla/5.0", "SELECT ?i WHERE {?i <http://x/t> ?j}"),
    ]
}

#[test]
fn six_query_trace() {
    let (out, run) = run_pipeline(six(), &PipelineConfig::default(), &ctx(), None).unwrap();
    let lines: Vec<usize> = out.iter().map(|q| q.provenance.line_number).collect();
    assert_eq!(lines, vec![3, 5, 6]);
    let counts: Vec<(usize, usize)> = run.stages.iter().map(|s| (s.input_count(), s.output_count())).collect();
    assert_eq!(counts[..4], [(6, 5), (5, 5), (5, 4), (4, 3)]);
    assert!(conserves(&run));
    let corrected = &out[1];
    assert_eq!(
        corrected.annotations.get(Analyzer::Syntax),
        Some(Label::Syntax(Validity::Corrected))
    );
    assert_eq!(corrected.text, "SELECT ?g WHERE {?g <http://x/s> ?h}");
    for q in &out {
        assert_eq!(q.annotations.len(), 11, "{}", q.annotations.to_compact());
    }
}

#[test]
fn stage_order_is_fixed() {
    let (_, run) = run_pipeline(Vec::new(), &PipelineConfig::default(), &ctx(), None).unwrap();
    let names: Vec<&str> = run.stages.iter().map(|s| s.operator.as_str()).collect();
    let expected: Vec<&str> = Operator::DEFAULT_PIPELINE.iter().map(|o| o.as_str()).collect();
    assert_eq!(names, expected);
    assert!(run.stages.iter().all(|s| s.input_count() == 0 && s.output_count() == 0));
}

#[test]
fn organic_input_passes_robot_stage() {
    let qs: Vec<_> = six().into_iter().skip(1).collect();
    let (_, run) = run_pipeline(qs, &PipelineConfig::default(), &ctx(), None).unwrap();
    assert_eq!(run.stages[0].input_count(), run.stages[0].output_count());
}

#[test]
fn uncorrectable_query_is_kept_and_labelled() {
    let qs = vec![query(1, "10.1.0.2", "Mozilla/5.0", "SELECT garbage &&&")];
    let (out, run) = run_pipeline(qs, &PipelineConfig::default(), &ctx(), None).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(
        out[0].annotations.get(Analyzer::Syntax),
        Some(Label::Syntax(Validity::Wrong))
    );
    assert_eq!(
        out[0].annotations.get(Analyzer::Semantics),
        Some(Label::Semantics(Validity::Wrong))
    );
    assert_eq!(run.stages[4].kind, OperatorKind::Transformer);
}

#[test]
fn deduplicator_on_unique_input_is_identity() {
    let op = CurationOperator::new(Operator::Deduplicator);
    let qs: Vec<_> = six().into_iter().filter(|q| q.provenance.line_number != 4).collect();
    let (out, dropped) = apply_operator(&op, qs.clone(), &ctx());
    assert!(dropped.is_empty());
    assert_eq!(
        out.iter().map(|q| &q.id).collect::<Vec<_>>(),
        qs.iter().map(|q| &q.id).collect::<Vec<_>>()
    );
}

#[test]
fn robot_cleaner_alone() {
    let op = CurationOperator::new(Operator::RobotCleaner);
    let qs = six().into_iter().take(3).collect();
    let (out, dropped) = apply_operator(&op, qs, &ctx());
    assert_eq!(out.len(), 2);
    assert_eq!(dropped.len(), 1);
}

#[test]
fn rerun_is_a_fixed_point() {
    let config = PipelineConfig::default();
    let (out, _) = run_pipeline(six(), &config, &ctx(), None).unwrap();
    let (again, run) = run_pipeline(out.clone(), &config, &ctx(), None).unwrap();
    assert!(run.stages.iter().all(|s| s.dropped_ids.is_empty()));
    let texts = |qs: &[CuratedQuery]| qs.iter().map(|q| q.text.clone()).collect::<Vec<_>>();
    assert_eq!(texts(&again), texts(&out));
}

#[test]
fn config_parsing() {
    let c = PipelineConfig::parse(
        "operator robot_cleaner keep Organic,Robot\noperator complexity_filter keep Star\noperator expertise_filter\nparam robot_cleaner window_secs 30\n",
    )
    .unwrap();
    assert_eq!(c.operators.len(), 10);
    assert_eq!(
        c.get(Operator::RobotCleaner).unwrap().behavior_config().window,
        chrono::TimeDelta::seconds(30)
    );
    assert_eq!(c.get(Operator::ComplexityFilter).unwrap().kind(), OperatorKind::Cleaner);
    assert!(!c.get(Operator::ComplexityFilter).unwrap().attach_expertise);
    assert!(
        PipelineConfig::default()
            .get(Operator::ComplexityFilter)
            .unwrap()
            .attach_expertise
    );

    assert!(matches!(
        PipelineConfig::parse("operator weather_filter"),
        Err(ConfigError::Line { .. })
    ));
    assert!(PipelineConfig::parse("operator robot_cleaner keep Sleepy").is_err());
    assert!(PipelineConfig::parse("operator deduplicator\noperator robot_cleaner").is_err());
    assert!(PipelineConfig::parse("operator correctors keep Correct").is_err());
    assert!(PipelineConfig::parse("param deduplicator window_secs 3").is_err());
    assert!(PipelineConfig::parse("param robot_cleaner window_secs -3").is_err());
    assert_eq!(PipelineConfig::parse("").unwrap(), PipelineConfig::default());
}

#[test]
fn annotate_only_drops_nothing() {
    let (out, run) = run_pipeline(six(), &PipelineConfig::annotate_only(), &ctx(), None).unwrap();
    assert_eq!(out.len(), 6);
    assert_eq!(run.stages.len(), 10);
    assert!(out.iter().all(|q| q.annotations.len() == 11));
}

#[test]
fn snapshots_follow_stages() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::create(dir.path(), "p").unwrap();
    let (_, run) = run_pipeline(six(), &PipelineConfig::default(), &ctx(), Some(&store)).unwrap();
    for s in &run.stages {
        let name = s.snapshot.as_ref().unwrap().trim_end_matches(".records").to_string();
        let recs = store.read_snapshot(&name).unwrap();
        assert_eq!(recs.iter().map(|r| r.id.clone()).collect::<Vec<_>>(), s.output_ids);
    }
}
