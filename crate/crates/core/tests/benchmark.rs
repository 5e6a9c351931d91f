use voxskel_core::benchmark::{
    read_corpus, run_benchmark, synthetic_corpus, write_corpus, Algorithm,
};
use voxskel_core::*;

#[test]
fn boolean_rows_have_no_betti_errors() {
    let corpus = synthetic_corpus(12, 4);
    let rows = run_benchmark(&corpus, &Algorithm::ALL).unwrap();
    assert_eq!(rows.len(), corpus.len() * 3);
    for (row, (_, v)) in rows
        .iter()
        .zip(corpus.iter().flat_map(|c| std::iter::repeat_n(c, 3)))
    {
        assert!(row.points <= v.count());
        if row.algorithm == Algorithm::Boolean {
            assert_eq!(
                (row.beta0_err, row.beta1_err, row.beta2_err),
                (0, 0, 0),
                "{}",
                row.shape_id
            );
        }
    }
    let morph_breaks = rows
        .iter()
        .filter(|r| r.algorithm == Algorithm::MorphologicalBaseline)
        .any(|r| r.beta0_err > 0);
    assert!(morph_breaks);
}

#[test]
fn corpus_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic_corpus(3, 9);
    write_corpus(&corpus, dir.path()).unwrap();
    let back = read_corpus(dir.path()).unwrap();
    let mut sorted = corpus.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    assert_eq!(back, sorted);
    let empty = tempfile::tempdir().unwrap();
    let corpus = read_corpus(empty.path()).unwrap();
    assert!(matches!(
        run_benchmark(&corpus, &Algorithm::ALL),
        Err(Error::Domain(_))
    ));
}

#[test]
fn morphological_baseline_examples() {
    let empty = BinaryVolume::zeros(Shape::new(5, 5, 5));
    assert_eq!(morphological_skeleton_baseline(&empty, 3).unwrap(), empty);
    let block = BinaryVolume::ones(Shape::new(7, 7, 7));
    let s = morphological_skeleton_baseline(&block, 10).unwrap();
    assert!(s.is_subset_of(&block) && !s.is_empty());
    assert!(morphological_skeleton_baseline(&block, 0).is_err());
}
