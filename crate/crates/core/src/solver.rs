//! Depth-first branch and bound for `A x = b`, `x ≥ 0` integral, with
//! non-negative integer `A` and `b`.
//!
//! The search is driven by equations: at each node it picks the open
//! equation with the fewest free variables (ties: smaller residual) and
//! branches on its free variable of largest coefficient, values descending.
//! A variable that is the last free one of some equation takes the single
//! value that closes it. Each node keeps, per equation, the residual
//! right-hand side and the largest amount the free variables could still
//! contribute; a residual above that capacity closes the node, and since
//! lowering the current value only raises residuals, it also closes every
//! smaller value of the same variable.

use crate::par;

#[derive(Clone, Debug)]
pub struct System {
    rows: Vec<Vec<u64>>,
    rhs: Vec<u64>,
}

impl System {
    pub fn new(rows: Vec<Vec<u64>>, rhs: Vec<u64>) -> Self {
        assert_eq!(rows.len(), rhs.len());
        System { rows, rhs }
    }

    pub fn equations(&self) -> usize {
        self.rows.len()
    }

    pub fn variables(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn satisfied_by(&self, x: &[u64]) -> bool {
        self.rows
            .iter()
            .zip(&self.rhs)
            .all(|(r, &b)| r.iter().zip(x).map(|(a, v)| (*a as u128) * (*v as u128)).sum::<u128>() == b as u128)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Solution(Vec<u64>),
    Infeasible,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct Search {
    pub outcome: SearchOutcome,
    pub nodes: u64,
}

struct Problem {
    /// Per variable: `(equation, coefficient)` with coefficient > 0.
    cols: Vec<Vec<(usize, i64)>>,
    /// Per equation: `(variable, coefficient)`, coefficient descending.
    rows: Vec<Vec<(usize, i64)>>,
    ub: Vec<i64>,
    n: usize,
}

#[derive(Clone)]
struct State {
    fixed: usize,
    residual: Vec<i64>,
    capacity: Vec<i64>,
    free: Vec<u32>,
    is_free: Vec<bool>,
    x: Vec<u64>,
}

enum Step {
    Found(Vec<u64>),
    Exhausted,
    Done,
}

/// Values to try for a variable, descending.
struct Choice {
    var: usize,
    hi: i64,
    lo: i64,
}

impl Problem {
    fn new(sys: &System) -> (Self, State) {
        let n = sys.variables();
        let m = sys.equations();
        let mut cols: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        let mut rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); m];
        for (e, row) in sys.rows.iter().enumerate() {
            for (k, &a) in row.iter().enumerate() {
                if a > 0 {
                    cols[k].push((e, a as i64));
                    rows[e].push((k, a as i64));
                }
            }
            rows[e].sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        }
        let ub: Vec<i64> =
            (0..n).map(|k| cols[k].iter().map(|&(e, a)| sys.rhs[e] as i64 / a).min().unwrap_or(0)).collect();
        let mut capacity = vec![0i64; m];
        for k in 0..n {
            for &(e, a) in &cols[k] {
                capacity[e] += a * ub[k];
            }
        }
        let st = State {
            fixed: 0,
            residual: sys.rhs.iter().map(|&b| b as i64).collect(),
            capacity,
            free: rows.iter().map(|r| r.len() as u32).collect(),
            is_free: vec![true; n],
            x: vec![0; n],
        };
        (Problem { cols, rows, ub, n }, st)
    }

    fn consistent(&self, st: &State) -> bool {
        (0..st.residual.len()).all(|e| st.residual[e] <= st.capacity[e] && (st.free[e] > 0 || st.residual[e] == 0))
    }

    /// The next variable and its value range, or `None` when some free
    /// variable has no admissible value.
    fn choose(&self, st: &State) -> Option<Choice> {
        let mut best: Option<(u32, i64, usize)> = None;
        for e in 0..self.rows.len() {
            let f = st.free[e];
            if f == 0 {
                continue;
            }
            let key = (if st.residual[e] == 0 { 0 } else { f }, st.residual[e], e);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let e = match best {
            Some((_, _, e)) => e,
            // every equation is closed; remaining free variables are unconstrained
            None => {
                let var = st.is_free.iter().position(|&f| f)?;
                return Some(Choice { var, hi: 0, lo: 0 });
            }
        };
        let var = self.rows[e].iter().find(|&&(k, _)| st.is_free[k]).map(|&(k, _)| k)?;
        let mut hi = self.ub[var];
        let mut forced: Option<i64> = None;
        for &(e, a) in &self.cols[var] {
            hi = hi.min(st.residual[e] / a);
            if st.free[e] == 1 {
                if st.residual[e] % a != 0 {
                    return None;
                }
                let v = st.residual[e] / a;
                if forced.is_some_and(|f| f != v) {
                    return None;
                }
                forced = Some(v);
            }
        }
        match forced {
            Some(v) if v <= hi => Some(Choice { var, hi: v, lo: v }),
            Some(_) => None,
            None => Some(Choice { var, hi, lo: 0 }),
        }
    }

    /// Fixes `x_k = v`; returns whether the node survives the capacity test.
    fn assign(&self, st: &mut State, k: usize, v: i64) -> bool {
        let mut ok = true;
        for &(e, a) in &self.cols[k] {
            st.residual[e] -= a * v;
            st.capacity[e] -= a * self.ub[k];
            st.free[e] -= 1;
            if st.residual[e] > st.capacity[e] || (st.free[e] == 0 && st.residual[e] != 0) {
                ok = false;
            }
        }
        st.is_free[k] = false;
        st.fixed += 1;
        st.x[k] = v as u64;
        ok
    }

    fn unassign(&self, st: &mut State, k: usize, v: i64) {
        for &(e, a) in &self.cols[k] {
            st.residual[e] += a * v;
            st.capacity[e] += a * self.ub[k];
            st.free[e] += 1;
        }
        st.is_free[k] = true;
        st.fixed -= 1;
        st.x[k] = 0;
    }

    /// Whether a failed assignment also rules out all smaller values: true
    /// unless some equation failed only by being closed with a nonzero
    /// residual, which is not monotone in the value.
    fn failure_is_monotone(&self, st: &State, k: usize) -> bool {
        self.cols[k].iter().any(|&(e, _)| st.residual[e] > st.capacity[e])
    }

    fn dfs(&self, st: &mut State, nodes: &mut u64, budget: u64) -> Step {
        if st.fixed == self.n {
            return if st.residual.iter().all(|&r| r == 0) { Step::Found(st.x.clone()) } else { Step::Done };
        }
        let Some(Choice { var: k, hi, lo }) = self.choose(st) else {
            return Step::Done;
        };
        let mut v = hi;
        while v >= lo {
            *nodes += 1;
            if *nodes > budget {
                return Step::Exhausted;
            }
            let ok = self.assign(st, k, v);
            if ok {
                match self.dfs(st, nodes, budget) {
                    Step::Done => {}
                    other => {
                        self.unassign(st, k, v);
                        return other;
                    }
                }
            } else if self.failure_is_monotone(st, k) {
                self.unassign(st, k, v);
                break;
            }
            self.unassign(st, k, v);
            v -= 1;
        }
        Step::Done
    }

    /// Children of an open node, in search order, counting one node each.
    fn expand(&self, st: &State, nodes: &mut u64) -> Vec<State> {
        let Some(Choice { var: k, hi, lo }) = self.choose(st) else {
            return Vec::new();
        };
        let mut st = st.clone();
        let mut out = Vec::new();
        let mut v = hi;
        while v >= lo {
            *nodes += 1;
            if self.assign(&mut st, k, v) {
                out.push(st.clone());
            } else if self.failure_is_monotone(&st, k) {
                break;
            }
            self.unassign(&mut st, k, v);
            v -= 1;
        }
        out
    }
}

/// Frontier size at which subtrees are handed out for parallel search.
const FRONTIER: usize = 64;

/// Searches for a solution; explores at most `budget` nodes in total.
///
/// Subtrees below a shallow frontier run in parallel; the outcome and node
/// count do not depend on scheduling or on the number of workers.
pub fn solve(sys: &System, budget: u64) -> Search {
    let (prob, root) = Problem::new(sys);
    if !prob.consistent(&root) {
        return Search { outcome: SearchOutcome::Infeasible, nodes: 0 };
    }
    if prob.n == 0 {
        return Search { outcome: SearchOutcome::Solution(Vec::new()), nodes: 0 };
    }
    let mut nodes = 0u64;
    let mut frontier = vec![root];
    while frontier.len() < FRONTIER && nodes <= budget && frontier.iter().all(|st| st.fixed < prob.n) {
        frontier = frontier.iter().flat_map(|st| prob.expand(st, &mut nodes)).collect();
        if frontier.is_empty() {
            return Search { outcome: SearchOutcome::Infeasible, nodes };
        }
    }
    if nodes > budget {
        return Search { outcome: SearchOutcome::BudgetExhausted, nodes: budget };
    }
    // Batches of one subtree per worker, each capped at the budget left when
    // the batch starts. Replaying in order then gives exactly the sequential
    // outcome: a subtree that hits its cap would also have exhausted the
    // smaller budget left to it in a sequential run.
    let mut total = nodes;
    for batch in frontier.chunks(par::threads().max(1)) {
        let cap = budget - total;
        let results: Vec<(Step, u64)> = par::map(batch, |st| {
            let mut st = st.clone();
            let mut local = 0u64;
            let step = prob.dfs(&mut st, &mut local, cap);
            (step, local)
        });
        for (step, used) in results {
            total += used;
            if total > budget {
                return Search { outcome: SearchOutcome::BudgetExhausted, nodes: budget };
            }
            match step {
                Step::Found(x) => return Search { outcome: SearchOutcome::Solution(x), nodes: total },
                Step::Exhausted => return Search { outcome: SearchOutcome::BudgetExhausted, nodes: budget },
                Step::Done => {}
            }
        }
    }
    Search { outcome: SearchOutcome::Infeasible, nodes: total }
}
