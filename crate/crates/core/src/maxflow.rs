//! Highest-label push-relabel maximum flow on integer capacities.
//!
//! Arcs live in compressed adjacency (CSR) form; every arc stores the index of
//! its reverse so residual capacities are updated in place. The solver uses
//! the gap heuristic and periodic global relabelling, and runs to a genuine
//! flow (excess is returned to the source), so residual reachability yields
//! the canonical minimal and maximal minimum cuts.

use std::collections::VecDeque;

pub type Capacity = i64;

/// Edge list collected before the network is frozen into CSR form.
#[derive(Clone, Debug, Default)]
pub struct NetworkBuilder {
    n: usize,
    edges: Vec<(u32, u32, Capacity, Capacity)>,
}

impl NetworkBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn with_capacity(n: usize, edges: usize) -> Self {
        Self { n, edges: Vec::with_capacity(edges) }
    }

    /// Arc `u -> v` with capacity `cap` and reverse arc with capacity `rev_cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: Capacity, rev_cap: Capacity) {
        assert!(u < self.n && v < self.n && u != v);
        assert!(cap >= 0 && rev_cap >= 0);
        self.edges.push((u as u32, v as u32, cap, rev_cap));
    }

    pub fn build(self) -> FlowNetwork {
        let n = self.n;
        let mut degree = vec![0usize; n + 1];
        for &(u, v, _, _) in &self.edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + degree[i];
        }
        let m = start[n];
        let mut fill = start.clone();
        let mut to = vec![0u32; m];
        let mut rev = vec![0u32; m];
        let mut cap = vec![0 as Capacity; m];
        for &(u, v, c, rc) in &self.edges {
            let a = fill[u as usize];
            fill[u as usize] += 1;
            let b = fill[v as usize];
            fill[v as usize] += 1;
            to[a] = v;
            cap[a] = c;
            rev[a] = b as u32;
            to[b] = u;
            cap[b] = rc;
            rev[b] = a as u32;
        }
        FlowNetwork { n, start, to, rev, cap }
    }
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    n: usize,
    start: Vec<usize>,
    to: Vec<u32>,
    rev: Vec<u32>,
    cap: Vec<Capacity>,
}

impl FlowNetwork {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.to.len()
    }

    /// Pushes a maximum flow from `s` to `t`; residual capacities are kept.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Capacity {
        assert!(s != t && s < self.n && t < self.n);
        Solver::new(self, s, t).run()
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            for a in self.start[u]..self.start[u + 1] {
                let v = self.to[a] as usize;
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Nodes from which `t` is reachable in the residual network.
    pub fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([t]);
        seen[t] = true;
        while let Some(w) = queue.pop_front() {
            for a in self.start[w]..self.start[w + 1] {
                let v = self.to[a] as usize;
                if self.cap[self.rev[a] as usize] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

struct Solver<'a> {
    g: &'a mut FlowNetwork,
    s: usize,
    t: usize,
    height: Vec<usize>,
    excess: Vec<Capacity>,
    current: Vec<usize>,
    /// Active nodes bucketed by the height at insertion time.
    active: Vec<Vec<u32>>,
    /// Number of nodes per height.
    count: Vec<usize>,
    highest: usize,
    work: usize,
}

impl<'a> Solver<'a> {
    fn new(g: &'a mut FlowNetwork, s: usize, t: usize) -> Self {
        let n = g.n;
        Self {
            height: vec![0; n],
            excess: vec![0; n],
            current: g.start[..n].to_vec(),
            active: vec![Vec::new(); 2 * n + 1],
            count: vec![0; 2 * n + 1],
            highest: 0,
            work: 0,
            g,
            s,
            t,
        }
    }

    fn run(mut self) -> Capacity {
        let n = self.g.n;
        let s = self.s;
        for a in self.g.start[s]..self.g.start[s + 1] {
            let c = self.g.cap[a];
            if c > 0 {
                let v = self.g.to[a] as usize;
                self.g.cap[a] = 0;
                self.g.cap[self.g.rev[a] as usize] += c;
                self.excess[v] += c;
                self.excess[s] -= c;
            }
        }
        self.global_relabel();
        let threshold = 6 * n + self.g.to.len() / 2;

        loop {
            while self.highest > 0 && self.active[self.highest].is_empty() {
                self.highest -= 1;
            }
            let Some(u) = self.active[self.highest].pop() else {
                break;
            };
            let u = u as usize;
            if self.excess[u] == 0 {
                continue;
            }
            if self.height[u] != self.highest {
                // Lifted by a gap after insertion.
                self.enqueue(u);
                continue;
            }
            self.discharge(u);
            if self.work > threshold {
                self.work = 0;
                self.global_relabel();
            }
        }
        self.excess[self.t]
    }

    fn enqueue(&mut self, u: usize) {
        let h = self.height[u];
        self.active[h].push(u as u32);
        if h > self.highest {
            self.highest = h;
        }
    }

    fn discharge(&mut self, u: usize) {
        let n = self.g.n;
        let end = self.g.start[u + 1];
        while self.excess[u] > 0 {
            if self.current[u] == end {
                self.relabel(u);
                if self.height[u] >= 2 * n {
                    return;
                }
                continue;
            }
            let a = self.current[u];
            let v = self.g.to[a] as usize;
            let c = self.g.cap[a];
            if c > 0 && self.height[u] == self.height[v] + 1 {
                let d = c.min(self.excess[u]);
                self.g.cap[a] -= d;
                self.g.cap[self.g.rev[a] as usize] += d;
                let was_idle = self.excess[v] == 0;
                self.excess[u] -= d;
                self.excess[v] += d;
                if was_idle && v != self.s && v != self.t {
                    self.enqueue(v);
                }
                if self.excess[u] == 0 {
                    break;
                }
            }
            if self.excess[u] > 0 {
                self.current[u] += 1;
            }
        }
        if self.excess[u] > 0 && self.height[u] < 2 * n {
            self.enqueue(u);
        }
    }

    fn relabel(&mut self, u: usize) {
        let n = self.g.n;
        let old = self.height[u];
        let mut best = 2 * n;
        let (lo, hi) = (self.g.start[u], self.g.start[u + 1]);
        let mut best_arc = lo;
        for a in lo..hi {
            if self.g.cap[a] > 0 {
                let h = self.height[self.g.to[a] as usize] + 1;
                if h < best {
                    best = h;
                    best_arc = a;
                }
            }
        }
        self.work += hi - lo + 12;
        self.count[old] -= 1;
        self.height[u] = best;
        self.count[best] += 1;
        self.current[u] = best_arc;
        if old < n && self.count[old] == 0 {
            self.gap(old);
        }
    }

    /// No node is left at height `k < n`: everything strictly between `k`
    /// and `n` is cut off from the sink.
    fn gap(&mut self, k: usize) {
        let n = self.g.n;
        for v in 0..n {
            let h = self.height[v];
            if h > k && h < n && v != self.s {
                self.count[h] -= 1;
                self.height[v] = n + 1;
                self.count[n + 1] += 1;
                self.current[v] = self.g.start[v];
            }
        }
        if self.highest < n + 1 {
            self.highest = n + 1;
        }
    }

    /// Exact distance labels: to the sink where it is reachable, otherwise
    /// `n` plus the distance back to the source.
    fn global_relabel(&mut self) {
        let n = self.g.n;
        let unset = usize::MAX;
        let mut height = vec![unset; n];
        for (root, base) in [(self.t, 0usize), (self.s, n)] {
            height[root] = base;
            let mut queue = VecDeque::from([root]);
            while let Some(w) = queue.pop_front() {
                for a in self.g.start[w]..self.g.start[w + 1] {
                    let v = self.g.to[a] as usize;
                    if height[v] == unset && self.g.cap[self.g.rev[a] as usize] > 0 {
                        height[v] = height[w] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        self.count.iter_mut().for_each(|c| *c = 0);
        for b in self.active.iter_mut() {
            b.clear();
        }
        self.highest = 0;
        for v in 0..n {
            let h = if height[v] == unset { 2 * n } else { height[v].min(2 * n) };
            self.height[v] = h;
            self.count[h] += 1;
            self.current[v] = self.g.start[v];
        }
        for v in 0..n {
            if v != self.s && v != self.t && self.excess[v] > 0 && self.height[v] < 2 * n {
                self.enqueue(v);
            }
        }
    }
}
