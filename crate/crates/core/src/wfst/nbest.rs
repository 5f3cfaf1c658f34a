use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::{Label, StateId, Wfst, EPSILON};

/// Expansion budget for [`nbest`]; guarantees termination on cyclic machines.
pub const DEFAULT_MAX_EXPANSIONS: usize = 1_000_000;

/// An accepting path summarised by its epsilon-free output and total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub output: Vec<Label>,
    pub weight: f64,
}

/// Cheapest cost from each state to acceptance (final weight included).
/// `+∞` for states that cannot reach a final state.
pub fn distance_to_final(fst: &Wfst) -> Vec<f64> {
    let n = fst.num_states();
    let mut rev: Vec<Vec<(StateId, f64)>> = vec![Vec::new(); n];
    for (s, st) in fst.states().iter().enumerate() {
        for a in &st.arcs {
            rev[a.nextstate].push((s, a.weight.value()));
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for (s, st) in fst.states().iter().enumerate() {
        if st.is_final() {
            dist[s] = st.final_weight.value();
            heap.push(MinEntry(dist[s], s));
        }
    }
    while let Some(MinEntry(d, s)) = heap.pop() {
        if d > dist[s] {
            continue;
        }
        for &(p, w) in &rev[s] {
            let nd = w + d;
            if nd < dist[p] {
                dist[p] = nd;
                heap.push(MinEntry(nd, p));
            }
        }
    }
    dist
}

/// Cost of the single cheapest accepting path, if any.
pub fn shortest_path_cost(fst: &Wfst) -> Option<f64> {
    let d = distance_to_final(fst)[fst.start()];
    d.is_finite().then_some(d)
}

#[derive(PartialEq)]
struct MinEntry(f64, StateId);

impl Eq for MinEntry {}

impl Ord for MinEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Search frontier entry. `state == None` marks a completed path whose
/// final weight has already been added to `cost`.
struct Item {
    priority: f64,
    cost: f64,
    output: Vec<Label>,
    state: Option<StateId>,
}

impl Item {
    fn key(&self) -> (f64, &[Label], usize) {
        (self.priority, &self.output, self.state.map_or(0, |s| s + 1))
    }
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Item {}

impl Ord for Item {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, oa, sa) = self.key();
        let (pb, ob, sb) = other.key();
        pb.total_cmp(&pa)
            .then_with(|| ob.cmp(oa))
            .then_with(|| sb.cmp(&sa))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Up to `n` cheapest accepting paths with distinct output sequences, in
/// ascending cost order (ties broken lexicographically on output labels).
pub fn nbest(fst: &Wfst, n: usize) -> Vec<Path> {
    nbest_with_cap(fst, n, DEFAULT_MAX_EXPANSIONS)
}

/// [`nbest`] with an explicit bound on the number of state expansions.
///
/// The search is A* over `(state, output-so-far)` pairs with the exact
/// distance-to-final as heuristic, so the first completion popped for an
/// output sequence is its cheapest path.
pub fn nbest_with_cap(fst: &Wfst, n: usize, max_expansions: usize) -> Vec<Path> {
    let mut results = Vec::new();
    if n == 0 {
        return results;
    }
    let h = distance_to_final(fst);
    let start = fst.start();
    if !h[start].is_finite() {
        return results;
    }

    let mut heap = BinaryHeap::new();
    heap.push(Item {
        priority: h[start],
        cost: 0.0,
        output: Vec::new(),
        state: Some(start),
    });
    let mut expanded: HashSet<(StateId, Vec<Label>)> = HashSet::new();
    let mut emitted: HashSet<Vec<Label>> = HashSet::new();
    let mut expansions = 0usize;

    while let Some(item) = heap.pop() {
        let Some(s) = item.state else {
            if emitted.insert(item.output.clone()) {
                results.push(Path {
                    output: item.output,
                    weight: item.cost,
                });
                if results.len() == n {
                    break;
                }
            }
            continue;
        };
        if !expanded.insert((s, item.output.clone())) {
            continue;
        }
        expansions += 1;
        if expansions > max_expansions {
            log::warn!("nbest: expansion cap {max_expansions} reached with {} paths", results.len());
            break;
        }

        let fw = fst.final_weight(s);
        if !fw.is_zero() {
            let total = item.cost + fw.value();
            heap.push(Item {
                priority: total,
                cost: total,
                output: item.output.clone(),
                state: None,
            });
        }
        for a in fst.arcs(s) {
            let hn = h[a.nextstate];
            if !hn.is_finite() {
                continue;
            }
            let cost = item.cost + a.weight.value();
            let mut output = item.output.clone();
            if a.olabel != EPSILON {
                output.push(a.olabel);
            }
            heap.push(Item {
                priority: cost + hn,
                cost,
                output,
                state: Some(a.nextstate),
            });
        }
    }

    results.sort_by(|x, y| {
        x.weight
            .total_cmp(&y.weight)
            .then_with(|| x.output.cmp(&y.output))
    });
    results
}
