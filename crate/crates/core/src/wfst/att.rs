//! AT&T text format: `src dst in out weight` per arc and `state weight` per
//! final state, tab separated. The first line's source state is the start.

use std::fmt::Write as _;

use super::{Arc, StateId, TableRef, Wfst, WfstError};

pub fn write_att(fst: &Wfst) -> String {
    let isyms = fst.input_symbols();
    let osyms = fst.output_symbols();
    let mut out = String::new();
    let mut order: Vec<StateId> = vec![fst.start()];
    order.extend((0..fst.num_states()).filter(|&s| s != fst.start()));
    for &s in &order {
        for a in fst.arcs(s) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                s,
                a.nextstate,
                isyms.symbol(a.ilabel).unwrap_or("<?>"),
                osyms.symbol(a.olabel).unwrap_or("<?>"),
                a.weight
            );
        }
    }
    for &s in &order {
        let fw = fst.final_weight(s);
        if !fw.is_zero() {
            let _ = writeln!(out, "{}\t{}", s, fw);
        }
    }
    out
}

pub fn read_att(text: &str, isyms: TableRef, osyms: TableRef) -> Result<Wfst, WfstError> {
    let mut fst = Wfst::new(isyms.clone(), osyms.clone());
    let mut first = true;
    let ensure = |fst: &mut Wfst, s: StateId| {
        while fst.num_states() <= s {
            fst.add_state();
        }
    };
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let perr = |msg: &str| WfstError::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| perr("bad state id"));
        let weight = |s: &str| s.parse::<f64>().map_err(|_| perr("bad weight"));
        match fields.len() {
            0 => continue,
            1 | 2 => {
                let s = num(fields[0])?;
                ensure(&mut fst, s);
                if first {
                    fst.set_start(s)?;
                }
                let w = if fields.len() == 2 { weight(fields[1])? } else { 0.0 };
                fst.set_final(s, w)?;
            }
            4 | 5 => {
                let s = num(fields[0])?;
                let d = num(fields[1])?;
                ensure(&mut fst, s.max(d));
                if first {
                    fst.set_start(s)?;
                }
                let il = isyms.find(fields[2]).ok_or_else(|| perr("unknown input symbol"))?;
                let ol = osyms.find(fields[3]).ok_or_else(|| perr("unknown output symbol"))?;
                let w = if fields.len() == 5 { weight(fields[4])? } else { 0.0 };
                fst.add_arc(s, Arc::new(il, ol, w, d))?;
            }
            _ => return Err(perr("expected 2, 4 or 5 fields")),
        }
        first = false;
    }
    Ok(fst)
}
