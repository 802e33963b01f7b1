//! The explicit model format: serialize a generated model, parse it back,
//! and show that the round trip is exact.
//!
//! ```bash
//! cargo run --example model_files
//! ```

use guessvi::explicit::{parse_model, serialize_model};
use guessvi::generators::gen_random;
use guessvi::model::{ModelKind, ObjectiveKind};

fn main() {
    let model = gen_random(
        ModelKind::Mdp,
        ObjectiveKind::Ssp,
        8,
        2,
        &[0.25, 0.5, 1.0],
        7,
    );
    let text = serialize_model(&model);
    println!("{text}");
    let back = parse_model(&text).expect("parse");
    assert_eq!(back, model);
    println!("# parse(serialize(model)) == model, bit for bit");

    // diagnostics carry line numbers
    let broken = text.replacen("EDGE", "EGDE", 1);
    match parse_model(&broken) {
        Err(e) => println!("# a typo is rejected with: {e}"),
        Ok(_) => unreachable!(),
    }
}
