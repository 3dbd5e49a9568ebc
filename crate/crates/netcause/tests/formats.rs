//! Round trips through the on-disk formats.

use netcause::core::graph::generate_sbm_graph;
use netcause::io::{self, EdgeFormat, IdMap, Provenance};

#[test]
fn edge_list_round_trip_reproduces_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    let prov = Provenance { config_hash: "0123".into(), seed: 9 };
    for seed in 0..5 {
        let (g, _) = generate_sbm_graph(&[30, 20], 0.3, 0.05, seed).unwrap();
        // Sparse external ids exercise densification.
        let ids = IdMap::new((0..50).map(|i| 7 * i as u64 + 3).collect()).unwrap();
        for format in [EdgeFormat::Tsv, EdgeFormat::Csv] {
            let path = dir.path().join(format!("g{seed}.{format:?}"));
            io::write_edge_list(&path, &g, &ids, format, Some(&prov)).unwrap();
            let loaded = io::load_edge_list(&path, format, None).unwrap();
            let isolated = g.isolated_count();
            if isolated == 0 {
                assert_eq!(loaded.graph, g);
                assert_eq!(loaded.ids, ids);
            }
            let with_map = io::load_edge_list(&path, format, Some(&ids)).unwrap();
            assert_eq!(with_map.graph, g);
            assert_eq!((with_map.duplicates, with_map.self_loops), (0, 0));
        }
    }
}

#[test]
fn id_map_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ids.csv");
    let ids = IdMap::new(vec![42, 7, 1_000_000_007]).unwrap();
    io::write_id_map(&path, &ids, None).unwrap();
    assert_eq!(io::read_id_map(&path).unwrap(), ids);
    std::fs::write(&path, "external_id,internal_id\n4,0\n5,2\n").unwrap();
    assert!(io::read_id_map(&path).is_err());
}
