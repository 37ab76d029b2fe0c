//! End-to-end curation through the public API.

use std::io::Write;

use lodlog::curation::{conserves, run_pipeline, CuratedQuery, CurationContext, PipelineConfig};
use lodlog::ingest::{extract_queries, parse_log_file, LogFormat};
use lodlog::labels::{Analyzer, Behavior, Duplication, Label};
use lodlog::store::RunStore;
use lodlog::trust::{partition, TrustPolicy};

const LOG: &str = r#"10.1.0.2 - - [01/Mar/2019:10:00:00 +0000] "GET /sparql?query=SELECT+%3Fs+WHERE+%7B+%3Fs+%3Chttp%3A%2F%2Fx%2Fcreator%3E+%3Fo+%7D HTTP/1.1" 200 10 "-" "Mozilla/5.0"
10.1.0.3 - - [01/Mar/2019:10:01:13 +0000] "GET /sparql?query=SELECT++%3Fx+WHERE+%7B%3Fx+%3Chttp%3A%2F%2Fx%2Fcreator%3E+%3Fy%7D HTTP/1.1" 200 10 "-" "Mozilla/5.0"
10.1.0.4 - - [01/Mar/2019:10:02:00 +0000] "GET /sparql?query=SELECT+%2A+WHERE+%7B+%3Fs+%3Fp+%3Fo+%7D HTTP/1.1" 200 10 "-" "Googlebot/2.1"
10.1.0.5 - - [01/Mar/2019:10:03:00 +0000] "GET /sparql?query=ASK+%7B+%3Fs+%3Fp+%3Fo+%7D HTTP/1.1" 200 10 "-" "Mozilla/5.0"
"#;

fn curated() -> Vec<CuratedQuery> {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(LOG.as_bytes()).unwrap();
    let records: Vec<_> = parse_log_file(f.path(), LogFormat::Clf)
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    let (extracted, stats) = extract_queries(records);
    assert_eq!((stats.select, stats.ask, stats.kept()), (3, 1, 3));
    extracted.iter().map(CuratedQuery::from_extracted).collect()
}

fn context() -> CurationContext {
    CurationContext {
        vocabulary: None,
        lexicon: Default::default(),
        directory: lodlog::profiling::ProvenanceDirectory::parse("botagent googlebot\n").unwrap(),
    }
}

#[test]
fn bots_and_duplicates_leave_the_log() {
    let (out, run) = run_pipeline(curated(), &PipelineConfig::default(), &context(), None).unwrap();
    assert!(conserves(&run));
    assert_eq!(run.stages.len(), 9);
    assert_eq!(out.len(), 1);
    let q = &out[0];
    assert_eq!(q.provenance.line_number, 1);
    assert_eq!(
        q.annotations.get(Analyzer::Behavior),
        Some(Label::Behavior(Behavior::Organic))
    );
    assert_eq!(
        q.annotations.get(Analyzer::Duplication),
        Some(Label::Duplication(Duplication::Unique))
    );
    assert_eq!(q.annotations.len(), Analyzer::ALL.len());
}

#[test]
fn annotate_only_keeps_everything_and_labels_it() {
    let (out, run) = run_pipeline(curated(), &PipelineConfig::annotate_only(), &context(), None).unwrap();
    assert!(conserves(&run));
    assert_eq!(out.len(), 3);
    let dups = out
        .iter()
        .filter(|q| q.annotations.get(Analyzer::Duplication) == Some(Label::Duplication(Duplication::Duplicate)))
        .count();
    assert_eq!(dups, 1);
    assert!(out.iter().all(|q| q.annotations.len() == Analyzer::ALL.len()));
}

#[test]
fn snapshots_are_written_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::create(dir.path(), "t").unwrap();
    let (out, run) = run_pipeline(curated(), &PipelineConfig::default(), &context(), Some(&store)).unwrap();
    assert_eq!(store.snapshots().unwrap().len(), 9);
    let last = run.stages.last().unwrap().snapshot.clone().unwrap();
    let name = last.trim_end_matches(".records");
    assert_eq!(store.read_snapshot(name).unwrap().len(), out.len());
    let (trusted, untrusted) = partition(out, |q| &q.annotations, &TrustPolicy::default()).unwrap();
    assert_eq!(trusted.len() + untrusted.len(), 1);
}
