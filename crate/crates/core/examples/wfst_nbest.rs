//! Build two small transducers, compose them and list the cheapest outputs.
//!
//! ```text
//! cargo run --example wfst_nbest
//! ```

use std::sync::Arc as Shared;

use phonorank::wfst::{compose, nbest, write_att, Arc, SymbolTable, Wfst, EPSILON};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = Shared::new(["a", "b", "x", "y"].iter().collect::<SymbolTable>());
    let sym = |s: &str| table.find(s).expect("known symbol");

    // a -> x (1) | a -> y (2), then optionally b -> <eps> (0.5)
    let mut first = Wfst::new(table.clone(), table.clone());
    let mid = first.add_state();
    let end = first.add_state();
    first.add_arc(0, Arc::new(sym("a"), sym("x"), 1.0, mid))?;
    first.add_arc(0, Arc::new(sym("a"), sym("y"), 2.0, mid))?;
    first.add_arc(mid, Arc::new(sym("b"), EPSILON, 0.5, end))?;
    first.set_final(mid, 0.0)?;
    first.set_final(end, 0.0)?;

    // x -> a, y -> b, each with a small cost; loops on the single state
    let mut second = Wfst::new(table.clone(), table.clone());
    second.add_arc(0, Arc::new(sym("x"), sym("a"), 0.25, 0))?;
    second.add_arc(0, Arc::new(sym("y"), sym("b"), 0.0, 0))?;
    second.set_final(0, 0.0)?;

    let composed = compose(&first, &second)?;
    println!("composed machine ({} states, {} arcs):", composed.num_states(), composed.num_arcs());
    print!("{}", write_att(&composed));

    println!("\nthree cheapest outputs:");
    for p in nbest(&composed, 3) {
        println!("  {:<6} cost {:.2}", composed.output_strings(&p.output).join(" "), p.weight);
    }

    println!("\ninverted first machine, cheapest outputs:");
    let inv = first.invert();
    for p in nbest(&inv, 3) {
        println!("  {:<6} cost {:.2}", inv.output_strings(&p.output).join(" "), p.weight);
    }
    Ok(())
}
