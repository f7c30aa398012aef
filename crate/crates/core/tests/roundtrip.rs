mod common;

use common::{random_source_test, rng, Shape};
use mbct::litmus::{parse_asm_litmus, parse_litmus, parse_source_litmus, render_litmus};
use mbct::lowering::{dead_register_pass, lower_test, LoweringOptions, Mapping};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = Shape> {
    (1usize..=4, 1usize..=3, 1usize..=4).prop_map(|(threads, locations, max_statements)| Shape {
        threads,
        locations,
        max_statements,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn source_round_trips(seed in any::<u64>(), shape in shape()) {
        let t = random_source_test(&mut rng(seed), shape);
        let text = render_litmus(&t);
        prop_assert_eq!(parse_source_litmus(&text).unwrap(), t.clone());
        prop_assert_eq!(parse_litmus(&text).unwrap(), t);
    }

    #[test]
    fn asm_round_trips(seed in any::<u64>(), shape in shape(), pass in any::<bool>()) {
        let t = random_source_test(&mut rng(seed), shape);
        let (asm, m) = lower_test(&t, &LoweringOptions { dead_register_pass: pass, ..LoweringOptions::default() }).unwrap();
        let text = render_litmus(&asm);
        prop_assert_eq!(parse_asm_litmus(&text).unwrap(), asm.clone());
        prop_assert_eq!(render_litmus(&parse_asm_litmus(&text).unwrap()), text);
        if pass {
            prop_assert_eq!(dead_register_pass(&asm), asm);
        }
        prop_assert_eq!(Mapping::from_json(&m.to_json()).unwrap(), m);
    }
}
