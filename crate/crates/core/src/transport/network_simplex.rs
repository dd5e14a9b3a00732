//! Primal network simplex for balanced transportation problems on a
//! bipartite graph whose arcs may be added between solves.
//!
//! The spanning tree is stored with the parent / thread / successor-count
//! layout of LEMON's `NetworkSimplex`, started from the usual strongly
//! feasible artificial basis, with block-search pivoting. All arcs have
//! infinite capacity, so only tree arcs can carry flow and flows are stored
//! per node on the arc to its parent. Adding arcs keeps the current basis
//! feasible, which gives warm starts for column generation.

const NONE: usize = usize::MAX;
const UP: i8 = 1;
const DOWN: i8 = -1;
const INF: i64 = i64::MAX;

/// Solves `min sum cost[i*n2 + j] * f_ij` subject to row sums `supply` and
/// column sums `demand`. Returns the nonzero flows `(i, j, f_ij)`.
///
/// Panics if the totals differ or `cost` has the wrong length.
#[cfg(test)]
pub(crate) fn solve_transport(supply: &[i64], demand: &[i64], cost: &[f64]) -> Vec<(usize, usize, i64)> {
    let (n1, n2) = (supply.len(), demand.len());
    assert_eq!(cost.len(), n1 * n2, "cost matrix shape");
    if n1 == 0 || n2 == 0 {
        return Vec::new();
    }
    let max_cost = cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut ns = NetworkSimplex::new(supply, demand, max_cost);
    for i in 0..n1 {
        for j in 0..n2 {
            ns.add_arc(i, j, cost[i * n2 + j]);
        }
    }
    ns.run();
    ns.flows()
}

pub(crate) struct NetworkSimplex {
    n1: usize,
    n2: usize,
    node_num: usize,
    root: usize,
    // Real arcs; arc id `node_num + k` is arc `k`, ids below `node_num` are
    // the artificial arcs between each node and the root.
    src: Vec<u32>,
    dst: Vec<u32>,
    cost: Vec<f64>,
    // 1 = at lower bound, 0 = in the tree.
    state: Vec<i8>,
    art_cost: Vec<f64>,
    // Artificial arc of node u points u -> root when true.
    art_up: Vec<bool>,

    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    pred_flow: Vec<i64>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pi: Vec<f64>,
    dirty_revs: Vec<usize>,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i64,
    next_arc: usize,
    max_cost: f64,
    eps: f64,
}

impl NetworkSimplex {
    /// A problem with no real arcs yet. `max_cost` must bound the absolute
    /// cost of every arc that will ever be added.
    ///
    /// Panics if the totals differ.
    pub(crate) fn new(supply: &[i64], demand: &[i64], max_cost: f64) -> Self {
        assert_eq!(
            supply.iter().sum::<i64>(),
            demand.iter().sum::<i64>(),
            "unbalanced transport problem"
        );
        let (n1, n2) = (supply.len(), demand.len());
        let node_num = n1 + n2;
        let root = node_num;
        let art = (max_cost + 1.0) * node_num as f64;

        let mut ns = NetworkSimplex {
            n1,
            n2,
            node_num,
            root,
            src: Vec::new(),
            dst: Vec::new(),
            cost: Vec::new(),
            state: Vec::new(),
            art_cost: vec![0.0; node_num],
            art_up: vec![true; node_num],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            pred_dir: vec![UP; node_num + 1],
            pred_flow: vec![0; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![1; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pi: vec![0.0; node_num + 1],
            dirty_revs: Vec::new(),
            in_arc: NONE,
            join: NONE,
            u_in: NONE,
            v_in: NONE,
            u_out: NONE,
            delta: 0,
            next_arc: 0,
            max_cost,
            eps: (1e-12 * max_cost).max(64.0 * f64::EPSILON * art),
        };

        ns.thread[root] = 0;
        ns.rev_thread[0] = root;
        ns.succ_num[root] = node_num + 1;
        ns.last_succ[root] = root.wrapping_sub(1);
        for u in 0..node_num {
            let s = if u < n1 { supply[u] } else { -demand[u - n1] };
            ns.parent[u] = root;
            ns.pred[u] = u;
            ns.thread[u] = u + 1;
            ns.rev_thread[u + 1] = u;
            ns.succ_num[u] = 1;
            ns.last_succ[u] = u;
            if s >= 0 {
                ns.pred_dir[u] = UP;
                ns.pi[u] = 0.0;
                ns.art_up[u] = true;
                ns.art_cost[u] = 0.0;
                ns.pred_flow[u] = s;
            } else {
                ns.pred_dir[u] = DOWN;
                ns.pi[u] = art;
                ns.art_up[u] = false;
                ns.art_cost[u] = art;
                ns.pred_flow[u] = -s;
            }
        }
        ns
    }

    /// Replaces the artificial starting basis with the solution that sends
    /// every left node to `right_sink` and feeds every right node from
    /// `left_sink`. Requires the arcs `i -> right_sink` (id `i`),
    /// `left_sink -> j` (id `n1 - 1 + j`) and `left_sink -> right_sink`
    /// (id `n1 + n2 - 2`) to have been added first, in that order, with
    /// `left_sink = n1 - 1`, `right_sink = n2 - 1` and a balanced problem
    /// whose sinks hold the other side's total.
    pub(crate) fn start_from_sinks(&mut self) {
        let (n1, n2, nn) = (self.n1, self.n2, self.node_num);
        let left_sink = n1 - 1;
        let right_sink = n1 + n2 - 1;
        let arc_to_sink = |i: usize| nn + i;
        let arc_from_sink = |j: usize| nn + (n1 - 1) + j;
        let sink_arc = nn + n1 + n2 - 2;
        assert!(self.cost.len() > n1 + n2 - 2, "sink arcs must be added first");
        debug_assert!((0..n1 - 1).all(|i| self.src[i] as usize == i && self.dst[i] as usize == right_sink));

        // Recover balances from the current artificial flows.
        let balance = |ns: &Self, u: usize| if ns.art_up[u] { ns.pred_flow[u] } else { -ns.pred_flow[u] };
        let root = self.root;
        // No artificial costs remain in play, so the tolerance only has to
        // absorb rounding in the potentials.
        self.eps = 1e-12 * self.max_cost.max(f64::MIN_POSITIVE);
        // Tree: root - right_sink - {left atoms, left_sink - {right atoms}}.
        let mut order = Vec::with_capacity(nn + 1);
        order.push(root);
        order.push(right_sink);
        order.extend(0..n1 - 1);
        order.push(left_sink);
        order.extend(n1..n1 + n2 - 1);

        self.parent[right_sink] = root;
        self.pred[right_sink] = right_sink;
        self.art_up[right_sink] = true;
        self.art_cost[right_sink] = 0.0;
        self.pred_dir[right_sink] = UP;
        self.pred_flow[right_sink] = 0;
        self.pi[right_sink] = 0.0;
        for i in 0..n1 - 1 {
            let s = balance(self, i);
            self.parent[i] = right_sink;
            self.pred[i] = arc_to_sink(i);
            self.pred_dir[i] = UP;
            self.pred_flow[i] = s;
            self.pi[i] = -self.cost[i];
            self.state[i] = 0;
        }
        self.parent[left_sink] = right_sink;
        self.pred[left_sink] = sink_arc;
        self.pred_dir[left_sink] = UP;
        self.pred_flow[left_sink] = 0;
        self.pi[left_sink] = -self.cost[sink_arc - nn];
        self.state[sink_arc - nn] = 0;
        for j in 0..n2 - 1 {
            let u = n1 + j;
            let d = -balance(self, u);
            self.parent[u] = left_sink;
            self.pred[u] = arc_from_sink(j);
            self.pred_dir[u] = DOWN;
            self.pred_flow[u] = d;
            self.pi[u] = self.pi[left_sink] + self.cost[arc_from_sink(j) - nn];
            self.state[arc_from_sink(j) - nn] = 0;
        }
        for w in order.windows(2) {
            self.thread[w[0]] = w[1];
            self.rev_thread[w[1]] = w[0];
        }
        let last = *order.last().unwrap();
        self.thread[last] = root;
        self.rev_thread[root] = last;
        for u in 0..nn {
            self.succ_num[u] = 1;
            self.last_succ[u] = u;
        }
        self.succ_num[left_sink] = n2;
        self.last_succ[left_sink] = if n2 > 1 { n1 + n2 - 2 } else { left_sink };
        self.succ_num[right_sink] = nn;
        self.last_succ[right_sink] = if n2 > 1 { n1 + n2 - 2 } else { left_sink };
        self.succ_num[root] = nn + 1;
        self.last_succ[root] = self.last_succ[right_sink];
    }

    /// Adds the arc `i -> j` (left node `i`, right node `j`) at zero flow.
    pub(crate) fn add_arc(&mut self, i: usize, j: usize, cost: f64) {
        debug_assert!(i < self.n1 && j < self.n2);
        debug_assert!(cost.abs() <= self.max_cost * (1.0 + 1e-12) + 1e-300);
        self.src.push(i as u32);
        self.dst.push((self.n1 + j) as u32);
        self.cost.push(cost);
        self.state.push(1);
    }

    pub(crate) fn n_arcs(&self) -> usize {
        self.cost.len()
    }

    /// Reduced cost of a (possibly absent) arc `i -> j` under the current
    /// potentials. Optimality means no arc has one below `-tolerance()`.
    #[inline]
    pub(crate) fn reduced_cost(&self, i: usize, j: usize, cost: f64) -> f64 {
        cost + self.pi[i] - self.pi[self.n1 + j]
    }

    pub(crate) fn tolerance(&self) -> f64 {
        self.eps
    }

    #[inline]
    fn source(&self, e: usize) -> usize {
        if e >= self.node_num {
            self.src[e - self.node_num] as usize
        } else if self.art_up[e] {
            e
        } else {
            self.root
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e >= self.node_num {
            self.dst[e - self.node_num] as usize
        } else if self.art_up[e] {
            self.root
        } else {
            e
        }
    }

    #[inline]
    fn arc_cost(&self, e: usize) -> f64 {
        if e >= self.node_num {
            self.cost[e - self.node_num]
        } else {
            self.art_cost[e]
        }
    }

    /// Pivots until no arc has a negative reduced cost.
    pub(crate) fn run(&mut self) {
        while self.find_entering_arc() {
            self.find_join_node();
            let bounded = self.find_leaving_arc();
            assert!(bounded, "transportation problem cannot be unbounded");
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
        }
    }

    /// Whether every node is attached by a real arc or an empty artificial
    /// one, i.e. the basis is a feasible solution of the real problem.
    pub(crate) fn is_feasible(&self) -> bool {
        (0..self.node_num).all(|u| self.pred[u] >= self.node_num || self.pred_flow[u] == 0)
    }

    /// Block search: scan blocks of arcs cyclically and take the most
    /// negative reduced cost of the first block that has one.
    fn find_entering_arc(&mut self) -> bool {
        let m = self.cost.len();
        if m == 0 {
            return false;
        }
        let block_size = ((m as f64).sqrt().ceil() as usize).max(10);
        let mut best = -self.eps;
        let mut found = NONE;
        let mut cnt = block_size;
        let mut k = if self.next_arc < m { self.next_arc } else { 0 };
        for _ in 0..m {
            if self.state[k] == 1 {
                let c = self.cost[k] + self.pi[self.src[k] as usize] - self.pi[self.dst[k] as usize];
                if c < best {
                    best = c;
                    found = k;
                }
            }
            k += 1;
            if k == m {
                k = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if found != NONE {
                    break;
                }
                cnt = block_size;
            }
        }
        if found == NONE {
            return false;
        }
        self.in_arc = self.node_num + found;
        self.next_arc = k;
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        // Entering arcs are always at their lower bound here.
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        self.delta = INF;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            let d = if self.pred_dir[u] == UP {
                self.pred_flow[u]
            } else {
                INF
            };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let d = if self.pred_dir[u] == DOWN {
                self.pred_flow[u]
            } else {
                INF
            };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }

        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0 && self.delta < INF
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0 {
            let mut u = self.source(self.in_arc);
            while u != self.join {
                self.pred_flow[u] -= self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
            let mut u = self.target(self.in_arc);
            while u != self.join {
                self.pred_flow[u] += self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc - self.node_num] = 0;
        let out = self.pred[self.u_out];
        if out >= self.node_num {
            self.state[out - self.node_num] = 1;
        }
    }

    fn update_tree_structure(&mut self) {
        let (u_in, v_in, u_out, in_arc) = (self.u_in, self.v_in, self.u_out, self.in_arc);
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];
        let in_dir = if u_in == self.source(in_arc) { UP } else { DOWN };

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.pred_flow[u_in] = self.delta;

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            // Reverse the stem from u_in up to u_out.
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            // Shift pred / flow / counts along the reversed stem.
            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                self.pred_flow[u] = self.pred_flow[p];
                tmp_sc += self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.pred_flow[u_in] = self.delta;
            self.succ_num[u_in] = old_succ_num;
        }

        let join = self.join;
        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in]
            - self.pi[self.u_in]
            - self.pred_dir[self.u_in] as f64 * self.arc_cost(self.in_arc);
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Nonzero flows on real arcs as `(i, j, f)`, sorted.
    pub(crate) fn flows(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for u in 0..self.node_num {
            let e = self.pred[u];
            if e >= self.node_num && self.pred_flow[u] > 0 {
                let k = e - self.node_num;
                out.push((self.src[k] as usize, self.dst[k] as usize - self.n1, self.pred_flow[u]));
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_cost(flows: &[(usize, usize, i64)], cost: &[f64], n2: usize) -> f64 {
        flows.iter().map(|&(i, j, f)| f as f64 * cost[i * n2 + j]).sum()
    }

    fn brute_force_assignment(cost: &[f64], n: usize) -> f64 {
        // Permutations of n <= 6 elements.
        fn rec(i: usize, n: usize, used: &mut Vec<bool>, cost: &[f64], acc: f64, best: &mut f64) {
            if i == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(i + 1, n, used, cost, acc + cost[i * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, n, &mut vec![false; n], cost, 0.0, &mut best);
        best
    }

    #[test]
    fn trivial_problems() {
        assert!(solve_transport(&[], &[], &[]).is_empty());
        let flows = solve_transport(&[3], &[3], &[2.0]);
        assert_eq!(flows, vec![(0, 0, 3)]);
    }

    #[test]
    fn matches_brute_force_on_assignment_problems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            for _ in 0..40 {
                let cost: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..10.0)).collect();
                let flows = solve_transport(&vec![1; n], &vec![1; n], &cost);
                let got = total_cost(&flows, &cost, n);
                let want = brute_force_assignment(&cost, n);
                assert!((got - want).abs() < 1e-9, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn marginals_are_respected() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n1 = rng.random_range(1..15);
            let n2 = rng.random_range(1..15);
            let mut supply: Vec<i64> = (0..n1).map(|_| rng.random_range(0..100)).collect();
            let mut demand: Vec<i64> = (0..n2).map(|_| rng.random_range(0..100)).collect();
            let (s, d): (i64, i64) = (supply.iter().sum(), demand.iter().sum());
            if s > d {
                demand[0] += s - d;
            } else {
                supply[0] += d - s;
            }
            let cost: Vec<f64> = (0..n1 * n2).map(|_| rng.random_range(0.0..1.0)).collect();
            let flows = solve_transport(&supply, &demand, &cost);
            let mut rows = vec![0; n1];
            let mut cols = vec![0; n2];
            for (i, j, f) in flows {
                rows[i] += f;
                cols[j] += f;
            }
            assert_eq!(rows, supply);
            assert_eq!(cols, demand);
        }
    }
}
