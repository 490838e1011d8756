use cascade_ge::iotable::{load_table, load_table_pair, save_table, TableSchema};
use cascade_ge::synthetic::{generate, SyntheticConfig};
use cascade_ge::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn csv_round_trip_is_lossless(seed in any::<u64>(), n in 1usize..9) {
        let syn = generate(&SyntheticConfig::new(n), seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        save_table(&syn.table, &path, Some("# header line")).unwrap();
        let back = load_table(&path, &TableSchema::default()).unwrap();
        prop_assert_eq!(&back, &syn.table);
    }
}

fn split_by_period(src: &std::path::Path, dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let text = std::fs::read_to_string(src).unwrap();
    let mut files = [String::from("row_id,col_id,value,kind\n"), String::from("row_id,col_id,value,kind\n")];
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let (period, rest) = line.split_once(',').unwrap();
        files[period.parse::<usize>().unwrap()].push_str(&format!("{rest}\n"));
    }
    let a = dir.join("p0.csv");
    let b = dir.join("p1.csv");
    std::fs::write(&a, &files[0]).unwrap();
    std::fs::write(&b, &files[1]).unwrap();
    (a, b)
}

#[test]
fn one_file_per_period() {
    let syn = generate(&SyntheticConfig::new(4), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let long = dir.path().join("long.csv");
    save_table(&syn.table, &long, None).unwrap();
    let (a, b) = split_by_period(&long, dir.path());
    let pair = load_table_pair(&a, &b, &TableSchema::default()).unwrap();
    assert_eq!(pair, syn.table);
}

#[test]
fn custom_column_names() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut text = String::from("t,from,to,amount,type\n");
    for t in ["2000", "2005"] {
        for line in [
            ",a,10,y", "a,a,2,x", ",a,3,rK", ",a,5,wL", "a,,4,h", "a,,3,g", "a,,1,m", "a,,1,p", ",,1,r", ",,1,w",
        ] {
            text.push_str(&format!("{t},{line}\n"));
        }
    }
    std::fs::write(&path, text).unwrap();
    let schema = TableSchema {
        row: "from".into(),
        col: "to".into(),
        value: "amount".into(),
        kind: "type".into(),
        period: "t".into(),
    };
    let t = load_table(&path, &schema).unwrap();
    assert_eq!(t.period_labels(), &["2000".to_string(), "2005".to_string()]);
    assert!(t.validate_balances(1e-12).is_balanced());
    assert!(matches!(load_table(&path, &TableSchema::default()), Err(Error::Schema(_))));
}

#[test]
fn malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "period,row_id,col_id,value,kind\n0,,a,1,y\n").unwrap();
    assert!(matches!(load_table(&path, &TableSchema::default()), Err(Error::PeriodCount(1))));
    std::fs::write(&path, "period,row_id,col_id,value,kind\n0,,a,1,q\n").unwrap();
    assert!(matches!(load_table(&path, &TableSchema::default()), Err(Error::Schema(_))));
    std::fs::write(&path, "period,row_id,col_id,value,kind\n0,,a,x,y\n").unwrap();
    assert!(matches!(load_table(&path, &TableSchema::default()), Err(Error::Schema(_))));
    assert!(matches!(
        load_table(dir.path().join("missing.csv"), &TableSchema::default()),
        Err(Error::Io { .. })
    ));
}
