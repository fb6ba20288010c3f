use fairbits::format::{parse_instance, read_instance, serialize_instance, write_instance, FormatError};
use fairbits_core::model::{gen_instance, Family};

fn families() -> Vec<(Family, usize, usize)> {
    vec![
        (Family::BinaryBalanced { k: 1 }, 3, 8),
        (Family::BinaryRandom { k: 1 }, 3, 12),
        (Family::TwoValuedHard { k: 1 }, 2, 6),
        (Family::TwoValuedRandom { high: 5, low: 1 }, 3, 10),
        (Family::IdenticalAdditiveHard { k: 2, big_k: 36 }, 3, 6),
        (Family::Ef1Hard { k: 3 }, 2, 10),
        (Family::UdTopN, 3, 9),
        (Family::IdenticalUd, 3, 9),
        (Family::UniformAdditive { max_value: 50 }, 4, 12),
        (Family::HeavyTailAdditive, 3, 10),
    ]
}

#[test]
fn every_family_roundtrips() {
    for (family, n, m) in families() {
        for seed in 0..100 {
            let inst = gen_instance(family, n, m, seed).unwrap_or_else(|e| panic!("{family:?}: {e}"));
            let text = serialize_instance(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst, "{family:?} seed {seed}");
            assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
        }
    }
}

#[test]
fn files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.toml");
    let inst = gen_instance(Family::UdTopN, 3, 7, 5).unwrap();
    write_instance(&path, &inst).unwrap();
    assert_eq!(read_instance(&path).unwrap(), inst);
    assert!(matches!(read_instance(&dir.path().join("missing.toml")), Err(FormatError::Io { .. })));
}

#[test]
fn truncated_files_are_rejected() {
    let text = serialize_instance(&gen_instance(Family::UniformAdditive { max_value: 9 }, 3, 6, 1).unwrap());
    for cut in 1..text.len() - 1 {
        assert!(parse_instance(&text[..cut]).is_err(), "prefix of length {cut} parsed");
    }
}
