use std::sync::OnceLock;

use delchan::harness::desk_preset;
use delchan::outer::{GreedyOuterCode, OuterCode, OuterSpec};
use delchan::scheme::{blow_up, build_scheme, identify_buffers, threshold_decode, Scheme};
use delchan::strings::BitString;
use num_rational::Ratio;
use proptest::prelude::*;

fn tiny_outer() -> &'static GreedyOuterCode {
    static CODE: OnceLock<GreedyOuterCode> = OnceLock::new();
    CODE.get_or_init(|| GreedyOuterCode::construct(OuterSpec::new(4, 8, 2, Ratio::new(1, 8)).unwrap(), 1).unwrap())
}

fn desk_scheme() -> &'static Scheme {
    static SCHEME: OnceLock<Scheme> = OnceLock::new();
    SCHEME.get_or_init(|| build_scheme(&desk_preset("desk-bdc-e2e").unwrap(), 0, false).unwrap())
}

/// Every sequence reachable from `w` by exactly `del` deletions followed by
/// `ins` insertions over an alphabet of size `q`.
fn edits(w: &[usize], del: usize, ins: usize, q: usize, out: &mut Vec<Vec<usize>>) {
    if del > 0 {
        for i in 0..w.len() {
            let mut v = w.to_vec();
            v.remove(i);
            edits(&v, del - 1, ins, q, out);
        }
    } else if ins > 0 {
        for i in 0..=w.len() {
            for s in 0..q {
                let mut v = w.to_vec();
                v.insert(i, s);
                edits(&v, 0, ins - 1, q, out);
            }
        }
    } else {
        out.push(w.to_vec());
    }
}

#[test]
fn tiny_outer_code_corrects_everything_in_its_radius() {
    let code = tiny_outer();
    let spec = *code.spec();
    assert_eq!(spec.radius(), 1);
    for r in 0..spec.message_count().unwrap() {
        let msg = spec.unrank(r);
        let cw = code.encode(&msg).unwrap();
        let mut received = Vec::new();
        edits(&cw, 1, 0, spec.q, &mut received);
        edits(&cw, 0, 1, spec.q, &mut received);
        for w in &received {
            assert_eq!(code.decode(w), msg, "corruption {w:?} of {cw:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn outer_decoder_is_total(w in prop::collection::vec(0usize..4, 0..20)) {
        let code = tiny_outer();
        let msg = code.decode(&w);
        prop_assert_eq!(msg.len(), code.spec().k);
        prop_assert!(msg.iter().all(|&s| s < code.spec().q));
    }

    #[test]
    fn desk_outer_corrects_random_corruptions(
        a in 0usize..16,
        b in 0usize..16,
        dels in prop::collection::vec(any::<prop::sample::Index>(), 0..=4),
        ins in prop::collection::vec((any::<prop::sample::Index>(), 0usize..16), 0..=4),
    ) {
        let scheme = desk_scheme();
        let code = scheme.outer();
        let radius = code.spec().radius();
        prop_assume!(dels.len() + ins.len() <= radius);
        let mut w = code.encode(&[a, b]).unwrap();
        for i in &dels {
            w.remove(i.index(w.len()));
        }
        for (i, s) in &ins {
            w.insert(i.index(w.len() + 1), *s);
        }
        prop_assert_eq!(code.decode(&w), vec![a, b]);
    }

    #[test]
    fn scheme_decoder_is_total(noise in prop::collection::vec(0u8..2, 0..3000)) {
        let scheme = desk_scheme();
        let msg = scheme.decode(&BitString::from_bits(noise));
        prop_assert_eq!(msg.len(), 2);
        prop_assert!(msg.iter().all(|&s| s < 16));
    }

    #[test]
    fn encoded_length_matches_formula(a in 0usize..16, b in 0usize..16) {
        let scheme = desk_scheme();
        prop_assert_eq!(scheme.encode(&[a, b]).unwrap().len(), scheme.encoded_len());
    }
}

#[test]
fn clean_string_splits_and_thresholds_back_to_codewords() {
    let scheme = desk_scheme();
    let params = scheme.params();
    let l = scheme.lengths();
    let msg = [3, 14];
    let bits = scheme.encode(&msg).unwrap();
    let symbols = scheme.outer().encode(&msg).unwrap();
    let windows = identify_buffers(&bits, params.inner.m(), params.mb);
    assert_eq!(windows.len(), symbols.len());
    for t in l.n1..l.n2 {
        for (w, &s) in windows.iter().zip(&symbols) {
            assert_eq!(&threshold_decode(w, t), scheme.inner().encode(s).unwrap(), "T={t}");
        }
    }
}

#[test]
fn blow_up_then_threshold_is_identity() {
    let cb = desk_scheme().inner();
    for c in cb.codewords() {
        let big = blow_up(c, 6, 25).unwrap();
        assert_eq!(big.len(), 6 * 13 + 25 * 6);
        assert_eq!(&threshold_decode(&big, 10), c);
    }
}
