use std::collections::{HashMap, VecDeque};

use super::{Arc, Label, StateId, Wfst, WfstError, EPSILON};

/// Epsilon filter state. After the left machine advances alone on an output
/// epsilon the right machine may not advance alone (and vice versa) until a
/// real symbol is matched; simultaneous epsilon moves are only taken from
/// `Clear`. This admits exactly one composed path per pair of component paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Filter {
    Clear,
    LeftMoved,
    RightMoved,
}

type Triple = (StateId, StateId, Filter);

/// Tropical-semiring composition of `a` and `b`.
///
/// Only states reachable from the start are built, then the result is trimmed.
pub fn compose(a: &Wfst, b: &Wfst) -> Result<Wfst, WfstError> {
    if a.output_symbols() != b.input_symbols() {
        return Err(WfstError::SymbolTableMismatch);
    }

    // Per-state arc indices of `b`, sorted by input label (stable).
    let b_index: Vec<Vec<usize>> = b
        .states()
        .iter()
        .map(|st| {
            let mut idx: Vec<usize> = (0..st.arcs.len()).collect();
            idx.sort_by_key(|&i| st.arcs[i].ilabel);
            idx
        })
        .collect();
    let matches = |s: StateId, label: Label| -> Vec<&Arc> {
        let arcs = b.arcs(s);
        let idx = &b_index[s];
        let lo = idx.partition_point(|&i| arcs[i].ilabel < label);
        let hi = idx.partition_point(|&i| arcs[i].ilabel <= label);
        idx[lo..hi].iter().map(|&i| &arcs[i]).collect()
    };

    let mut out = Wfst::new(a.input_symbols().clone(), b.output_symbols().clone());
    let mut ids: HashMap<Triple, StateId> = HashMap::new();
    let mut queue: VecDeque<Triple> = VecDeque::new();
    let start = (a.start(), b.start(), Filter::Clear);
    ids.insert(start, out.start());
    queue.push_back(start);

    let mut intern = |t: Triple, out: &mut Wfst, queue: &mut VecDeque<Triple>| -> StateId {
        *ids.entry(t).or_insert_with(|| {
            queue.push_back(t);
            out.add_state()
        })
    };

    while let Some(t @ (qa, qb, filter)) = queue.pop_front() {
        let src = intern(t, &mut out, &mut queue);
        let fa = a.final_weight(qa);
        let fb = b.final_weight(qb);
        if !fa.is_zero() && !fb.is_zero() {
            out.set_final(src, fa.times(fb).value())?;
        }

        for arc_a in a.arcs(qa) {
            if arc_a.olabel == EPSILON {
                // left advances alone
                if filter != Filter::RightMoved {
                    let dst = intern((arc_a.nextstate, qb, Filter::LeftMoved), &mut out, &mut queue);
                    out.add_arc(src, Arc { olabel: EPSILON, nextstate: dst, ..*arc_a })?;
                }
                // both advance on epsilon
                if filter == Filter::Clear {
                    for arc_b in matches(qb, EPSILON) {
                        let dst = intern(
                            (arc_a.nextstate, arc_b.nextstate, Filter::Clear),
                            &mut out,
                            &mut queue,
                        );
                        out.add_arc(
                            src,
                            Arc {
                                ilabel: arc_a.ilabel,
                                olabel: arc_b.olabel,
                                weight: arc_a.weight.times(arc_b.weight),
                                nextstate: dst,
                            },
                        )?;
                    }
                }
            } else {
                for arc_b in matches(qb, arc_a.olabel) {
                    let dst = intern(
                        (arc_a.nextstate, arc_b.nextstate, Filter::Clear),
                        &mut out,
                        &mut queue,
                    );
                    out.add_arc(
                        src,
                        Arc {
                            ilabel: arc_a.ilabel,
                            olabel: arc_b.olabel,
                            weight: arc_a.weight.times(arc_b.weight),
                            nextstate: dst,
                        },
                    )?;
                }
            }
        }

        // right advances alone
        if filter != Filter::LeftMoved {
            for arc_b in matches(qb, EPSILON) {
                let dst = intern((qa, arc_b.nextstate, Filter::RightMoved), &mut out, &mut queue);
                out.add_arc(src, Arc { ilabel: EPSILON, nextstate: dst, ..*arc_b })?;
            }
        }
    }

    Ok(out.trim())
}
