//! Dinic max-flow on floating-point capacities. Used only for transport
//! certificates, where capacities are cell masses.

const EPS: f64 = 1e-15;

pub(crate) struct FlowNet {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
    next: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl FlowNet {
    pub fn new(nodes: usize) -> Self {
        Self { head: vec![NIL; nodes], to: Vec::new(), cap: Vec::new(), next: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        for (a, b, c) in [(u, v, c), (v, u, 0.0)] {
            self.to.push(b);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [usize]) -> bool {
        level.fill(NIL);
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let mut e = self.head[u];
            while e != NIL {
                let v = self.to[e];
                if self.cap[e] > EPS && level[v] == NIL {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
                e = self.next[e];
            }
        }
        level[t] != NIL
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64, level: &[usize], it: &mut [usize]) -> f64 {
        if u == t {
            return pushed;
        }
        while it[u] != NIL {
            let e = it[u];
            let v = self.to[e];
            if self.cap[e] > EPS && level[v] == level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.cap[e]), level, it);
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            it[u] = self.next[e];
        }
        0.0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.head.len();
        let mut level = vec![NIL; n];
        let mut total = 0.0;
        while self.bfs(s, t, &mut level) {
            let mut it = self.head.clone();
            loop {
                let f = self.dfs(s, t, f64::INFINITY, &level, &mut it);
                if f <= EPS {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Largest total mass movable from `supply` to `demand` along allowed pairs.
pub(crate) fn transport_mass(supply: &[f64], demand: &[f64], allowed: impl Fn(usize, usize) -> bool) -> f64 {
    let (ns, nd) = (supply.len(), demand.len());
    let (s, t) = (ns + nd, ns + nd + 1);
    let mut net = FlowNet::new(ns + nd + 2);
    for (i, &m) in supply.iter().enumerate() {
        if m > 0.0 {
            net.add_edge(s, i, m);
        }
    }
    for (j, &m) in demand.iter().enumerate() {
        if m > 0.0 {
            net.add_edge(ns + j, t, m);
        }
    }
    for (i, &mi) in supply.iter().enumerate() {
        if mi <= 0.0 {
            continue;
        }
        for (j, &mj) in demand.iter().enumerate() {
            if mj > 0.0 && allowed(i, j) {
                net.add_edge(i, ns + j, f64::INFINITY);
            }
        }
    }
    net.max_flow(s, t)
}
