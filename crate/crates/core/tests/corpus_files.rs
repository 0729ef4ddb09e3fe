use std::fs::File;

use egorank_core::corpus::{
    generate_synthetic_corpus, load_activity_csv, load_members_csv, read_activity_records, write_activity_csv,
    write_members_csv, ActivityRecord, SynthConfig, TimeWindow,
};

#[test]
fn synthetic_corpus_survives_a_file_round_trip() {
    let synth = generate_synthetic_corpus(&SynthConfig::demo(11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (n, docs) in &synth.corpus.datasets {
        let path = dir.path().join(format!("d{n}.csv"));
        let records: Vec<_> = docs.iter().map(ActivityRecord::from_document).collect();
        write_activity_csv(File::create(&path).unwrap(), &records).unwrap();
        let owner = (*n <= 4).then_some("ego");
        let back = load_activity_csv(&path, *n, owner, &TimeWindow::unbounded()).unwrap();
        assert_eq!(&back, docs);

        let again = dir.path().join(format!("e{n}.csv"));
        write_activity_csv(File::create(&again).unwrap(), &read_activity_records(&path).unwrap()).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
    let path = dir.path().join("members.csv");
    write_members_csv(File::create(&path).unwrap(), &synth.corpus.members).unwrap();
    assert_eq!(load_members_csv(&path).unwrap(), synth.corpus.members);
}

#[test]
fn window_applies_on_load() {
    let synth = generate_synthetic_corpus(&SynthConfig::demo(12)).unwrap();
    let docs = &synth.corpus.datasets[&6];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d6.csv");
    let records: Vec<_> = docs.iter().map(ActivityRecord::from_document).collect();
    write_activity_csv(File::create(&path).unwrap(), &records).unwrap();
    let mut times: Vec<_> = docs.iter().map(|d| d.time).collect();
    times.sort();
    let mid = times[times.len() / 2];
    let w = TimeWindow::new(mid, synth.corpus.window.until);
    let kept = load_activity_csv(&path, 6, None, &w).unwrap();
    assert_eq!(kept.len(), times.iter().filter(|t| **t >= mid).count());
    assert!(kept.iter().all(|d| d.time >= mid));
}

#[test]
fn generation_is_reproducible() {
    let a = generate_synthetic_corpus(&SynthConfig::demo(5)).unwrap();
    let b = generate_synthetic_corpus(&SynthConfig::demo(5)).unwrap();
    assert_eq!(a.corpus, b.corpus);
    assert_eq!(a.labels, b.labels);
    let c = generate_synthetic_corpus(&SynthConfig::demo(6)).unwrap();
    assert_ne!(a.corpus, c.corpus);
}
