//! Master soundness, determinism and replay properties for every protocol.

use fairbits_core::channel::{Crs, Transcript};
use fairbits_core::protocols::{precondition_instance, ProtocolId, PublicParams};
use fairbits_core::shares::check;
use proptest::prelude::*;

fn soundness(id: ProtocolId, seed: u64) -> Result<(), TestCaseError> {
    let inst = precondition_instance(id, seed).expect("family parameters are valid");
    let crs = Crs::new(seed.rotate_left(17));
    let out = id.run(&inst, &crs).map_err(|e| TestCaseError::fail(format!("{id} seed {seed}: {e}")))?;
    let verdicts = check(&inst, &out.allocation, id.declared_notion(inst.n())).expect("checker applies");
    prop_assert!(verdicts.iter().all(|v| v.pass), "{} seed {} failed: {:?}", id, seed, verdicts);
    if let Some(semi) = &out.semi {
        prop_assert!(semi.validate().is_ok());
        prop_assert!(semi.holes.len() <= inst.n());
    }

    let again = id.run(&inst, &crs).unwrap();
    prop_assert_eq!(&again.allocation, &out.allocation);
    prop_assert_eq!(&again.transcript, &out.transcript);

    let entries = Transcript::parse_dump(&out.transcript.dump()).unwrap();
    let replayed = id.replay(&PublicParams::of(&inst), &crs, entries).unwrap();
    prop_assert_eq!(&replayed.allocation, &out.allocation);
    prop_assert_eq!(replayed.transcript.integer_bits(), out.transcript.integer_bits());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_protocol_is_sound_deterministic_and_replayable(seed in any::<u64>()) {
        for id in ProtocolId::ALL.into_iter().chain([ProtocolId::TpsBundling(Some(8))]) {
            soundness(id, seed)?;
        }
    }
}

#[test]
fn single_agent_gets_everything_for_free() {
    for id in ProtocolId::ALL {
        let inst = match id {
            ProtocolId::Ud2(_) | ProtocolId::CutChoose => continue,
            _ => precondition_instance(id, 1).unwrap(),
        };
        let solo = fairbits_core::Instance::new(vec![inst.valuation(0).clone()]).unwrap();
        let out = id.run(&solo, &Crs::new(0)).unwrap();
        assert_eq!(out.transcript.integer_bits(), 0, "{id}");
        assert!(out.allocation.owner().iter().all(|&a| a == 0));
    }
}

#[test]
fn replay_rejects_tampered_transcripts() {
    let id = ProtocolId::Prop1(fairbits_core::protocols::MedianVariant::Det);
    let inst = precondition_instance(id, 3).unwrap();
    let crs = Crs::new(3);
    let out = id.run(&inst, &crs).unwrap();
    let mut entries = out.transcript.entries().to_vec();
    if entries.len() > 1 {
        entries.pop();
        assert!(id.replay(&PublicParams::of(&inst), &crs, entries).is_err());
    }
}
