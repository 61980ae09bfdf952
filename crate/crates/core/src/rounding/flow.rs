/// Min-cost flow by successive shortest paths (Bellman-Ford), for small dense networks.
pub(crate) struct Network {
    n: usize,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    pub fn new(n: usize) -> Self {
        Self { n, to: Vec::new(), cap: Vec::new(), cost: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds an arc and its residual twin; returns the arc id.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.to.len();
        self.to.extend([to, from]);
        self.cap.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow(&self, arc: usize) -> i64 {
        self.cap[arc ^ 1]
    }

    /// Shortest residual path `s -> t`: its cost and arcs.
    fn shortest_path(&self, s: usize, t: usize) -> Option<(f64, Vec<usize>)> {
        let mut dist = vec![f64::INFINITY; self.n];
        let mut pred = vec![usize::MAX; self.n];
        dist[s] = 0.0;
        for _ in 0..self.n {
            let mut changed = false;
            for u in 0..self.n {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &self.adj[u] {
                    if self.cap[e] > 0 && dist[u] + self.cost[e] < dist[self.to[e]] - 1e-15 {
                        dist[self.to[e]] = dist[u] + self.cost[e];
                        pred[self.to[e]] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t] == f64::INFINITY {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let e = pred[v];
            path.push(e);
            v = self.to[e ^ 1];
        }
        Some((dist[t], path))
    }

    /// Pushes unit augmentations while the path cost stays below `-min_gain`, up to `max_flow` units.
    pub fn run(&mut self, s: usize, t: usize, max_flow: usize, min_gain: f64) -> usize {
        let mut flow = 0;
        while flow < max_flow {
            match self.shortest_path(s, t) {
                Some((c, path)) if c < -min_gain => {
                    for e in path {
                        self.cap[e] -= 1;
                        self.cap[e ^ 1] += 1;
                    }
                    flow += 1;
                }
                _ => break,
            }
        }
        flow
    }
}
