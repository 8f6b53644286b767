//! Parametric search by bifurcation.
//!
//! A decision procedure is simulated at the unknown optimum `δ*` (all values
//! here are squared). The simulation keeps an open interval `(lo, hi)` with
//! `δ* ∈ (lo, hi]` and follows the run of the procedure at a generic value
//! strictly inside it. A comparison whose critical value falls inside the
//! interval splits it; the collected split values are then resolved in batch
//! by binary search with the concrete procedure.
//!
//! Once no split remains, the generic run is the run at every value of
//! `(lo, hi)`. It must fail there (otherwise `δ*` would not exceed `lo`), so
//! `δ* = hi`.

use crate::error::{Error, Result};

pub(crate) enum Pending {
    Done(bool),
    /// A comparison; `None` means its outcome never changes with `δ`.
    Test(Option<f64>),
}

pub(crate) trait Simulation: Clone {
    fn pending(&self) -> Pending;
    /// Outcome of the pending test for all `δ` in the open interval
    /// `(lo, hi)`, which is known not to contain its critical value.
    fn outcome(&self, lo: f64, hi: f64) -> bool;
    fn apply(&mut self, outcome: bool);
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchParams {
    /// Known comparisons a branch may take after its last split.
    pub branch_steps: usize,
    /// Tree nodes per phase.
    pub node_cap: usize,
    /// More distinct splits than this means the interval was larger than
    /// promised; the attempt is abandoned.
    pub bifurcation_budget: usize,
}

impl SearchParams {
    pub fn new(size: usize, l: usize) -> Self {
        let size = size.max(1);
        let l = l.max(1);
        SearchParams {
            branch_steps: (size as f64 / (l as f64).sqrt()).ceil().max(1.0) as usize,
            node_cap: size,
            bifurcation_budget: 2 * l + 8,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct SearchOutcome {
    pub value: f64,
    pub bifurcations: u64,
    pub phases: u64,
    pub decisions: u64,
}

pub(crate) fn bifurcation_search<S: Simulation>(
    root: S,
    mut lo: f64,
    mut hi: f64,
    params: SearchParams,
    mut decide: impl FnMut(f64) -> bool,
) -> Result<SearchOutcome> {
    let mut sim = root;
    let mut out = SearchOutcome::default();
    loop {
        // replay the committed run up to the next unresolved comparison
        loop {
            match sim.pending() {
                Pending::Done(false) => {
                    if hi.is_finite() {
                        out.value = hi;
                        return Ok(out);
                    }
                    return Err(Error::AttemptFailed("run fails on an unbounded interval".into()));
                }
                Pending::Done(true) => {
                    return Err(Error::AttemptFailed(format!(
                        "run succeeds inside ({lo}, {hi}) where the optimum is excluded"
                    )));
                }
                Pending::Test(Some(c)) if lo < c && c < hi => break,
                Pending::Test(_) => {
                    let o = sim.outcome(lo, hi);
                    sim.apply(o);
                }
            }
        }
        out.phases += 1;
        let mut xs = explore(&sim, lo, hi, &params);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        out.bifurcations += xs.len() as u64;
        if out.bifurcations > params.bifurcation_budget as u64 {
            return Err(Error::AttemptFailed(format!(
                "{} bifurcations exceed the budget of {}",
                out.bifurcations, params.bifurcation_budget
            )));
        }
        // xs[..a] answer no, xs[a..] answer yes
        let (mut a, mut b) = (0, xs.len());
        while a < b {
            let mid = (a + b) / 2;
            out.decisions += 1;
            if decide(xs[mid]) {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        if a > 0 {
            lo = lo.max(xs[a - 1]);
        }
        if a < xs.len() {
            hi = hi.min(xs[a]);
        }
    }
}

/// Builds one phase of the bifurcation tree depth-first, lower branch first,
/// and returns the split values met.
fn explore<S: Simulation>(root: &S, lo: f64, hi: f64, params: &SearchParams) -> Vec<f64> {
    let mut xs = Vec::new();
    let mut nodes = 0usize;
    let mut stack = vec![(root.clone(), lo, hi)];
    while let Some((mut s, lo, mut hi)) = stack.pop() {
        let mut steps = 0usize;
        loop {
            if nodes >= params.node_cap {
                return xs;
            }
            nodes += 1;
            match s.pending() {
                Pending::Done(_) => break,
                Pending::Test(Some(c)) if lo < c && c < hi => {
                    xs.push(c);
                    let mut upper = s.clone();
                    let o = upper.outcome(c, hi);
                    upper.apply(o);
                    stack.push((upper, c, hi));
                    let o = s.outcome(lo, c);
                    s.apply(o);
                    hi = c;
                    steps = 0;
                }
                Pending::Test(_) => {
                    let o = s.outcome(lo, hi);
                    s.apply(o);
                    steps += 1;
                    if steps >= params.branch_steps {
                        break;
                    }
                }
            }
        }
    }
    xs
}
