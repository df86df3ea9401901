use acl_bench::weights::{decode, encode, read_file, write_file};
use acl_core::procgen::CppnWeights;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trips(seed in 0u64..1000) {
        let w = CppnWeights::init(seed);
        prop_assert_eq!(decode(&encode(&w)).unwrap(), w);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode(&bytes);
    }

    #[test]
    fn corrupted_headers_are_rejected_or_valid(pos in 0usize..40, byte: u8) {
        let mut bytes = encode(&CppnWeights::canonical());
        bytes[pos] = byte;
        if let Ok(w) = decode(&bytes) {
            prop_assert!(w.validate().is_ok());
        }
    }
}

#[test]
fn file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("w.bin");
    write_file(&path, &CppnWeights::canonical()).unwrap();
    assert_eq!(read_file(&path).unwrap(), CppnWeights::canonical());
    assert!(read_file(&tmp.path().join("missing.bin")).is_err());
}
