use std::io::Write;

use privnids::dataset::{load_csv, prepare, DatasetError, PrepareOptions, Schema};
use privnids::unsw;

fn csv_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn loads_a_small_table() {
    let f = csv_file("a,b,c,label\n1,2,3,0\n4,5,6,1\n7,8,9,0\n");
    let t = load_csv(f.path(), &Schema::Infer).unwrap();
    assert_eq!((t.n_rows(), t.header.len()), (3, 4));
    assert_eq!(t.source_path, f.path());
}

#[test]
fn ragged_row_is_reported_by_number() {
    let f = csv_file("a,b,c\n1,2,3\n4,5\n");
    match load_csv(f.path(), &Schema::Infer) {
        Err(DatasetError::RaggedRow { row, fields, expected }) => {
            assert_eq!((row, fields, expected), (2, 2, 3))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_and_missing_files_fail() {
    let f = csv_file("");
    assert!(matches!(load_csv(f.path(), &Schema::Infer), Err(DatasetError::Empty(_))));
    assert!(matches!(
        load_csv("/definitely/not/here.csv", &Schema::Infer),
        Err(DatasetError::Io { .. })
    ));
}

#[test]
fn expected_schema_is_enforced() {
    let f = csv_file("a,b\n1,2\n");
    let schema = Schema::Expected(vec!["a".into(), "c".into()]);
    assert!(matches!(load_csv(f.path(), &schema), Err(DatasetError::SchemaMismatch { .. })));
}

#[test]
fn bad_label_and_number_name_their_rows() {
    let opts = PrepareOptions {
        drop_columns: vec![],
        label_column: "label".into(),
        category_column: None,
        categorical: Default::default(),
    };
    let f = csv_file("x,label\n1,0\n2,2\n");
    let t = load_csv(f.path(), &Schema::Infer).unwrap();
    match prepare(&t, &opts) {
        Err(DatasetError::BadLabel { row, value, .. }) => assert_eq!((row, value.as_str()), (2, "2")),
        other => panic!("{other:?}"),
    }
    let f = csv_file("x,label\n1,0\noops,1\n");
    let t = load_csv(f.path(), &Schema::Infer).unwrap();
    assert!(matches!(prepare(&t, &opts), Err(DatasetError::BadNumber { row: 2, .. })));
}

#[test]
fn surrogate_csv_round_trips_through_the_loader() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let table = unsw::surrogate(200, 4);
    unsw::write_csv(&table, &path).unwrap();
    let expected = Schema::Expected(unsw::COLUMNS.iter().map(|s| s.to_string()).collect());
    let back = load_csv(&path, &expected).unwrap();
    assert_eq!(back.rows, table.rows);
    let p = prepare(&back, &PrepareOptions::unsw_nb15()).unwrap();
    assert_eq!(p.features.n_cols(), unsw::FEATURE_COUNT);
    assert_eq!(p.features.n_rows(), 200);
}
