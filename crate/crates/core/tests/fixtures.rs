//! The archives under `fixtures/` are exactly what the generators produce.
//! Run with `CONFLENS_WRITE_FIXTURES=1` to regenerate them.

use std::path::PathBuf;

use conflens::ingest::{parse_review_archive, write_review_archive, MalformedPolicy, ReviewRecord};
use conflens::synth::{self, DEFAULT_SEED};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn expected() -> Vec<(&'static str, Vec<ReviewRecord>)> {
    vec![
        ("pq1.jsonl", synth::pq1_fixture()),
        ("pq2.jsonl", synth::pq2_fixture(DEFAULT_SEED)),
        ("rq1.jsonl", synth::rq1_fixture(DEFAULT_SEED)),
        ("rq2.jsonl", synth::rq2_fixture(DEFAULT_SEED)),
    ]
}

#[test]
fn checked_in_fixtures_match_generators() {
    let write = std::env::var_os("CONFLENS_WRITE_FIXTURES").is_some();
    for (name, records) in expected() {
        let mut bytes = Vec::new();
        write_review_archive(&mut bytes, &records).unwrap();
        let path = fixture_dir().join(name);
        if write {
            std::fs::create_dir_all(fixture_dir()).unwrap();
            std::fs::write(&path, &bytes).unwrap();
        }
        let on_disk = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(on_disk == bytes, "{name} is stale; regenerate with CONFLENS_WRITE_FIXTURES=1");
        let parsed = parse_review_archive(on_disk.as_slice(), MalformedPolicy::FailFast).unwrap();
        assert_eq!(parsed.records, records);
    }
}
