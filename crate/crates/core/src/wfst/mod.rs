//! Weighted finite-state transducers over the tropical semiring.
//!
//! A [`Wfst`] is an owned value; every algorithm here (`compose`, `invert`,
//! `trim`, `nbest`) takes its inputs by reference and returns a fresh machine,
//! so finished machines can be shared freely between threads.

mod att;
mod compose;
mod nbest;
mod symbols;
mod weight;

use std::collections::VecDeque;
use std::sync::Arc as Shared;

use thiserror::Error;

pub use att::{read_att, write_att};
pub use compose::compose;
pub use nbest::{distance_to_final, nbest, nbest_with_cap, shortest_path_cost, Path, DEFAULT_MAX_EXPANSIONS};
pub use symbols::{Label, SymbolTable, EPSILON, EPSILON_STR};
pub use weight::TropicalWeight;

pub type StateId = usize;

/// Shared, immutable symbol table handle.
pub type TableRef = Shared<SymbolTable>;

#[derive(Debug, Error, PartialEq)]
pub enum WfstError {
    #[error("state {0} does not exist")]
    InvalidState(StateId),
    #[error("arc weight {0} is not a finite non-negative cost")]
    InvalidWeight(f64),
    #[error("label {label} is outside the {side} symbol table")]
    UnknownLabel { label: Label, side: &'static str },
    #[error("symbol table mismatch: output table of the left machine differs from input table of the right machine")]
    SymbolTableMismatch,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: TropicalWeight,
    pub nextstate: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, weight: f64, nextstate: StateId) -> Self {
        Arc {
            ilabel,
            olabel,
            weight: TropicalWeight::new(weight),
            nextstate,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub arcs: Vec<Arc>,
    pub final_weight: TropicalWeight,
}

impl State {
    fn empty() -> Self {
        State {
            arcs: Vec::new(),
            final_weight: TropicalWeight::zero(),
        }
    }

    pub fn is_final(&self) -> bool {
        !self.final_weight.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wfst {
    states: Vec<State>,
    start: StateId,
    isyms: TableRef,
    osyms: TableRef,
}

impl Wfst {
    /// A machine with a single non-final start state.
    pub fn new(isyms: TableRef, osyms: TableRef) -> Self {
        Wfst {
            states: vec![State::empty()],
            start: 0,
            isyms,
            osyms,
        }
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::empty());
        self.states.len() - 1
    }

    pub fn set_start(&mut self, s: StateId) -> Result<(), WfstError> {
        self.check_state(s)?;
        self.start = s;
        Ok(())
    }

    pub fn set_final(&mut self, s: StateId, weight: f64) -> Result<(), WfstError> {
        self.check_state(s)?;
        let w = TropicalWeight::new(weight);
        if !w.is_valid_arc_weight() {
            return Err(WfstError::InvalidWeight(weight));
        }
        self.states[s].final_weight = w;
        Ok(())
    }

    pub fn add_arc(&mut self, src: StateId, arc: Arc) -> Result<(), WfstError> {
        self.check_state(src)?;
        self.check_state(arc.nextstate)?;
        if !arc.weight.is_valid_arc_weight() {
            return Err(WfstError::InvalidWeight(arc.weight.value()));
        }
        if arc.ilabel as usize >= self.isyms.len() {
            return Err(WfstError::UnknownLabel {
                label: arc.ilabel,
                side: "input",
            });
        }
        if arc.olabel as usize >= self.osyms.len() {
            return Err(WfstError::UnknownLabel {
                label: arc.olabel,
                side: "output",
            });
        }
        self.states[src].arcs.push(arc);
        Ok(())
    }

    fn check_state(&self, s: StateId) -> Result<(), WfstError> {
        if s < self.states.len() {
            Ok(())
        } else {
            Err(WfstError::InvalidState(s))
        }
    }

    /// Linear acceptor for `labels` (input = output), total cost 0.
    pub fn linear_acceptor(table: TableRef, labels: &[Label]) -> Result<Self, WfstError> {
        let mut fst = Wfst::new(table.clone(), table);
        let mut cur = fst.start;
        for &l in labels {
            let next = fst.add_state();
            fst.add_arc(cur, Arc::new(l, l, 0.0, next))?;
            cur = next;
        }
        fst.set_final(cur, 0.0)?;
        Ok(fst)
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn arcs(&self, s: StateId) -> &[Arc] {
        &self.states[s].arcs
    }

    pub fn final_weight(&self, s: StateId) -> TropicalWeight {
        self.states[s].final_weight
    }

    pub fn input_symbols(&self) -> &TableRef {
        &self.isyms
    }

    pub fn output_symbols(&self) -> &TableRef {
        &self.osyms
    }

    /// Swaps input and output labels (and tables); weights are unchanged.
    pub fn invert(&self) -> Wfst {
        let states = self
            .states
            .iter()
            .map(|st| State {
                arcs: st
                    .arcs
                    .iter()
                    .map(|a| Arc {
                        ilabel: a.olabel,
                        olabel: a.ilabel,
                        ..*a
                    })
                    .collect(),
                final_weight: st.final_weight,
            })
            .collect();
        Wfst {
            states,
            start: self.start,
            isyms: self.osyms.clone(),
            osyms: self.isyms.clone(),
        }
    }

    /// Removes states that are not on some start-to-final path. Surviving
    /// states keep their relative order.
    pub fn trim(&self) -> Wfst {
        let n = self.states.len();
        let mut access = vec![false; n];
        let mut queue = VecDeque::from([self.start]);
        access[self.start] = true;
        while let Some(s) = queue.pop_front() {
            for a in &self.states[s].arcs {
                if !access[a.nextstate] {
                    access[a.nextstate] = true;
                    queue.push_back(a.nextstate);
                }
            }
        }

        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (s, st) in self.states.iter().enumerate() {
            for a in &st.arcs {
                rev[a.nextstate].push(s);
            }
        }
        let mut coaccess = vec![false; n];
        for (s, st) in self.states.iter().enumerate() {
            if st.is_final() {
                coaccess[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &p in &rev[s] {
                if !coaccess[p] {
                    coaccess[p] = true;
                    queue.push_back(p);
                }
            }
        }

        if !(access[self.start] && coaccess[self.start]) {
            return Wfst::new(self.isyms.clone(), self.osyms.clone());
        }

        let mut remap = vec![usize::MAX; n];
        let mut next_id = 0;
        for s in 0..n {
            if access[s] && coaccess[s] {
                remap[s] = next_id;
                next_id += 1;
            }
        }
        let mut states = Vec::with_capacity(next_id);
        for (s, st) in self.states.iter().enumerate() {
            if remap[s] == usize::MAX {
                continue;
            }
            states.push(State {
                arcs: st
                    .arcs
                    .iter()
                    .filter(|a| remap[a.nextstate] != usize::MAX)
                    .map(|a| Arc {
                        nextstate: remap[a.nextstate],
                        ..*a
                    })
                    .collect(),
                final_weight: st.final_weight,
            });
        }
        Wfst {
            states,
            start: remap[self.start],
            isyms: self.isyms.clone(),
            osyms: self.osyms.clone(),
        }
    }

    /// Output label sequence rendered through the output table.
    pub fn output_strings(&self, labels: &[Label]) -> Vec<String> {
        labels
            .iter()
            .map(|&l| self.osyms.symbol(l).unwrap_or("<?>").to_string())
            .collect()
    }
}
