#![no_main]

use imgmine_core::harc::{classify, HarcModel};
use imgmine_core::segment::Transaction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = HarcModel::from_json(text) {
        let items: Vec<u32> = model.attributes.iter().flat_map(|a| a.antecedent.clone()).collect();
        classify(&model, &Transaction::new("t", items, None));
        classify(&model, &Transaction::new("u", vec![], None));
        let again = HarcModel::from_json(&model.to_json()).expect("written model parses");
        assert_eq!(again.tree, model.tree);
    }
});
