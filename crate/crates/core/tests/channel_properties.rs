//! Properties of the codes, the common random string and the metered
//! channel.

use fairbits_core::channel::{
    choice_width, encode_choice, encode_subset_rank, encode_uint, encode_unary, BitReader, Channel, Crs, Reply,
    Transcript,
};
use fairbits_core::{Instance, Valuation};
use proptest::prelude::*;
use rand::RngCore;

#[derive(Debug, Clone)]
enum Field {
    Flag(bool),
    Uint(u64),
    Unary(u64),
    Choice(u64, u64),
    Subset(Vec<usize>, usize),
}

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![
        any::<bool>().prop_map(Field::Flag),
        any::<u64>().prop_map(Field::Uint),
        (0u64..=20).prop_map(Field::Uint),
        (1u64..=40).prop_map(Field::Unary),
        (1u64..=1000).prop_flat_map(|k| (0..k, Just(k))).prop_map(|(i, k)| Field::Choice(i, k)),
        (1usize..=20)
            .prop_flat_map(|r| (prop::sample::subsequence((0..r).collect::<Vec<_>>(), 0..=r), Just(r)))
            .prop_map(|(s, r)| Field::Subset(s, r)),
    ]
}

fn encode(f: &Field) -> Vec<bool> {
    match f {
        Field::Flag(b) => vec![*b],
        Field::Uint(k) => encode_uint(*k),
        Field::Unary(l) => encode_unary(*l).unwrap(),
        Field::Choice(i, k) => encode_choice(*i, *k).unwrap().0,
        Field::Subset(s, r) => encode_subset_rank(s, *r, s.len()).unwrap().0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn concatenated_codes_decode_unambiguously(fields in prop::collection::vec(field(), 0..24)) {
        let bits: Vec<bool> = fields.iter().flat_map(encode).collect();
        let mut r = BitReader::new(&bits);
        for f in &fields {
            match f {
                Field::Flag(b) => prop_assert_eq!(r.flag().unwrap(), *b),
                Field::Uint(k) => prop_assert_eq!(r.uint().unwrap(), *k),
                Field::Unary(l) => prop_assert_eq!(r.unary().unwrap(), *l),
                Field::Choice(i, k) => prop_assert_eq!(r.choice(*k).unwrap(), *i),
                Field::Subset(s, rr) => prop_assert_eq!(&r.subset(*rr, s.len()).unwrap(), s),
            }
        }
        prop_assert!(r.finish().is_ok());
    }

    #[test]
    fn no_uint_codeword_prefixes_another(a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        let (x, y) = (encode_uint(a), encode_uint(b));
        prop_assert!(!y.starts_with(&x) && !x.starts_with(&y));
        let digits = 64 - a.max(1).leading_zeros() as usize;
        prop_assert_eq!(x.len(), 2 * (digits + 1));
    }

    #[test]
    fn choice_width_is_ceil_log2(k in 1u128..=(1u128 << 100)) {
        let w = choice_width(k);
        prop_assert!(w == 0 && k == 1 || (1u128 << (w - 1)) < k && k <= 1u128.checked_shl(w as u32).unwrap_or(u128::MAX));
    }

    #[test]
    fn metering_counts_payload_bits(fields in prop::collection::vec(field(), 1..12)) {
        let inst = Instance::new(vec![Valuation::additive(vec![1, 2, 3])]).unwrap();
        let mut ch = Channel::live(&inst);
        let mut expected = 0u64;
        for f in &fields {
            let reply = match f {
                Field::Flag(b) => Reply::new().flag(*b),
                Field::Uint(k) => Reply::new().uint(*k),
                Field::Unary(l) => Reply::new().unary(*l),
                Field::Choice(i, k) => Reply::new().choice(*i as usize, *k as usize),
                Field::Subset(s, r) => Reply::new().subset(s, *r),
            };
            expected += reply.len() as u64;
            ch.ask(0, "field", |_| reply).unwrap();
        }
        let t = ch.into_transcript().unwrap();
        prop_assert_eq!(t.integer_bits(), expected);
        prop_assert!(t.integer_bits() as f64 + 1e-9 >= t.idealized_bits());
        prop_assert_eq!(t.entries().len(), fields.len());
        let parsed = Transcript::parse_dump(&t.dump()).unwrap();
        prop_assert_eq!(
            parsed.iter().map(|e| e.payload.clone()).collect::<Vec<_>>(),
            t.entries().iter().map(|e| e.payload.clone()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn crs_streams_are_reproducible(seed in any::<u64>(), idx in 0u64..1000) {
        let (a, b) = (Crs::new(seed), Crs::new(seed));
        prop_assert_eq!(a.stream_at("x", idx).next_u64(), b.stream_at("x", idx).next_u64());
        prop_assert_eq!(a.permutation("p", 17), b.permutation("p", 17));
        prop_assert_ne!(a.stream("x").next_u64(), a.stream("y").next_u64());
        let mut perm = a.permutation("p", 17);
        perm.sort_unstable();
        prop_assert_eq!(perm, (0..17).collect::<Vec<_>>());
    }
}
