use ssg_core::data::*;
use ssg_core::SsgError;
use std::collections::BTreeSet;
use std::io::Cursor;

fn parse(text: &str) -> ssg_core::Result<ssg_core::problems::LinearClassifierData> {
    parse_libsvm(Cursor::new(text))
}

#[test]
fn libsvm_examples() {
    let d = parse("1 1:0.5 3:2\n").unwrap();
    assert_eq!(d.labels, vec![1.0]);
    assert_eq!(d.features[0].get(0), 0.5);
    assert_eq!(d.features[0].get(2), 2.0);
    assert_eq!(d.dim, 3);

    let d = parse("0 2:1\n1 1:1\n").unwrap();
    assert_eq!(d.labels, vec![-1.0, 1.0]);
    assert_eq!(d.features[0].get(1), 1.0);

    match parse("+1 1:abc\n") {
        Err(SsgError::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("unexpected {other:?}"),
    }
    let d = parse("-1 4:1 2:3\n").unwrap();
    assert_eq!((d.features[0].get(1), d.features[0].get(3)), (3.0, 1.0));
}

fn six_rows() -> ssg_core::problems::LinearClassifierData {
    parse("1 1:1 2:0.1\n-1 1:-1 2:0.2\n1 1:1 2:0.3\n-1 1:-1 2:0.4\n1 1:1 2:0.5\n-1 1:-1 2:0.6\n").unwrap()
}

#[test]
fn split_sizes_and_partition() {
    let data = six_rows();
    let rule = GroupRule { feature: 0, predicate: Predicate::Greater { value: 0.0 } };
    // Find a seed whose held-out third contains both groups.
    let s = (0..100)
        .find_map(|seed| split_dataset(&data, rule, seed, true).ok())
        .expect("some seed splits both groups");
    assert_eq!(s.rows_constraint.len(), 4);
    assert_eq!(s.rows_p.len() + s.rows_u.len(), 2);
    let all: BTreeSet<usize> = s.rows_constraint.iter().chain(&s.rows_p).chain(&s.rows_u).copied().collect();
    assert_eq!(all.len(), 6);
    let again = split_dataset(&data, rule, s.split_seed, true).unwrap();
    assert_eq!(again, s);
}

#[test]
fn empty_group_names_the_rule() {
    let data = six_rows();
    let rule = GroupRule { feature: 1, predicate: Predicate::Greater { value: 5.0 } };
    match split_dataset(&data, rule, 0, true) {
        Err(SsgError::EmptyGroup { rule, group }) => {
            assert_eq!(rule, "x[1] > 5");
            assert_eq!(group, "protected");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn dropping_the_group_feature() {
    let data = six_rows();
    let rule = GroupRule { feature: 0, predicate: Predicate::Greater { value: 0.0 } };
    let s = (0..100).find_map(|seed| split_dataset(&data, rule, seed, false).ok()).unwrap();
    assert!(s.data.group_p.iter().chain(&s.data.group_u).all(|a| a.get(0) == 0.0));
}

#[test]
fn bundled_compas_matches_table_sizes() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/compas.libsvm");
    let file = std::fs::File::open(path).expect("data/compas.libsvm is bundled");
    let d = parse_libsvm(std::io::BufReader::new(file)).unwrap();
    assert_eq!((d.len(), d.dim), (6172, 16));
    let rule = GroupRule { feature: 0, predicate: Predicate::Greater { value: 0.0 } };
    let s = split_dataset(&d, rule, 7, false).unwrap();
    assert_eq!(s.rows_constraint.len(), 4114);
    assert_eq!(s.rows_p.len() + s.rows_u.len(), 2058);
}
