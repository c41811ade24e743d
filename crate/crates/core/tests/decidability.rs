mod common;

#[test]
fn every_pair_terminates_and_its_fixed_point_rechecks() {
    let verdicts = common::corpus::check_corpus().unwrap();
    assert_eq!(verdicts.len(), 20);
    assert!(verdicts.iter().any(|&a| a) && verdicts.iter().any(|&a| !a), "{verdicts:?}");
}
