use std::path::Path;

use levelgen::io::{content_csv, read_corpus, read_level, write_level};
use levelgen_core::{content_stats, parse_level, serialize_level, ContentStats};

fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

#[test]
fn corpus_has_ten_playable_levels() {
    let corpus = read_corpus(corpus_dir()).unwrap();
    assert_eq!(corpus.len(), 10);
    for (name, level) in &corpus {
        assert_eq!(level.rows(), 14, "{name}");
        assert!(level.cols() >= 50, "{name}");
        level.validate_spawn().unwrap();
    }
}

#[test]
fn corpus_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (name, level) in read_corpus(corpus_dir()).unwrap() {
        assert_eq!(parse_level(&serialize_level(&level)).unwrap(), level, "{name}");
        let path = dir.path().join(format!("{name}.txt"));
        write_level(&path, &level).unwrap();
        assert_eq!(read_level(&path).unwrap(), level, "{name}");
    }
}

#[test]
fn hand_counted_content() {
    let corpus = read_corpus(corpus_dir()).unwrap();
    let stats = |name: &str| content_stats(&corpus.iter().find(|(n, _)| n == name).unwrap().1);
    assert_eq!(
        stats("level_01"),
        ContentStats {
            n_monsters: 3,
            n_coins: 10,
            n_gaps: 1,
            max_gap_width: 3
        }
    );
    assert_eq!(
        stats("level_03"),
        ContentStats {
            n_monsters: 7,
            n_coins: 4,
            n_gaps: 0,
            max_gap_width: 0
        }
    );
    let flat = stats("level_05");
    assert_eq!((flat.n_monsters, flat.n_coins, flat.n_gaps), (0, 0, 0));
}

#[test]
fn content_csv_lists_every_level() {
    let corpus = read_corpus(corpus_dir()).unwrap();
    let csv = content_csv(&corpus);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("level,monsters,coins,gaps,max_gap_width"));
    assert_eq!(lines.next(), Some("level_01,3,10,1,3"));
    assert_eq!(lines.count(), 9);
}
