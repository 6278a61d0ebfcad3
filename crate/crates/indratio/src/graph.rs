//! Undirected simple graphs: construction, graph6 and edge-list I/O, named
//! generators, and basic structure analysis (degrees, connectivity, odd girth).

use crate::error::{Error, Result};

/// Hard cap on vertex count; dense spectral work is O(n^3).
pub const MAX_N: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>, // sorted neighbor lists
    m: usize,
}

impl Graph {
    /// Build a graph from an edge list. Rejects loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if n == 0 {
            return Err(Error::BadParams(
                "graph must have at least one vertex".into(),
            ));
        }
        if n > MAX_N {
            return Err(Error::TooLarge { n, limit: MAX_N });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::BadParams(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::BadParams(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::BadParams("duplicate edge".into()));
            }
        }
        Ok(Graph {
            n,
            adj,
            m: edges.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as (u, v) pairs with u < v, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Dense adjacency matrix, row-major n x n.
    pub fn adjacency_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for u in 0..n {
            for &v in &self.adj[u] {
                a[u * n + v] = 1.0;
            }
        }
        a
    }

    /// Parse one graph in graph6 short form (n <= 62).
    pub fn from_graph6(line: &str) -> Result<Graph> {
        let bytes = line.trim_end_matches(['\r', '\n']).as_bytes();
        if bytes.is_empty() {
            return Err(Error::Graph6 {
                offset: 0,
                reason: "empty input".into(),
            });
        }
        if bytes[0] == b'~' {
            return Err(Error::Graph6 {
                offset: 0,
                reason: "long form header (n > 62) not supported".into(),
            });
        }
        if !(63..=126).contains(&bytes[0]) {
            return Err(Error::Graph6 {
                offset: 0,
                reason: format!("header byte {} outside 63..=126", bytes[0]),
            });
        }
        let n = (bytes[0] - 63) as usize;
        if n == 0 {
            return Err(Error::Graph6 {
                offset: 0,
                reason: "graph has no vertices".into(),
            });
        }
        let nbits = n * (n - 1) / 2;
        let need = nbits.div_ceil(6);
        if bytes.len() - 1 != need {
            return Err(Error::Graph6 {
                offset: bytes.len().min(need),
                reason: format!(
                    "expected {} data bytes for n = {}, found {}",
                    need,
                    n,
                    bytes.len() - 1
                ),
            });
        }
        for (k, &b) in bytes[1..].iter().enumerate() {
            if !(63..=126).contains(&b) {
                return Err(Error::Graph6 {
                    offset: k + 1,
                    reason: format!("data byte {b} outside 63..=126"),
                });
            }
        }
        // Upper triangle, column-major: bit index runs over (0,1), (0,2), (1,2), ...
        let bit = |pos: usize| (bytes[1 + pos / 6] - 63) >> (5 - pos % 6) & 1;
        let mut edges = Vec::new();
        let mut pos = 0;
        for j in 1..n {
            for i in 0..j {
                if bit(pos) == 1 {
                    edges.push((i, j));
                }
                pos += 1;
            }
        }
        // Trailing pad bits must be zero.
        for p in nbits..need * 6 {
            if bit(p) != 0 {
                return Err(Error::Graph6 {
                    offset: 1 + p / 6,
                    reason: "nonzero padding bit".into(),
                });
            }
        }
        Graph::new(n, &edges)
    }

    /// Encode in graph6 short form; fails for n > 62.
    pub fn to_graph6(&self) -> Result<String> {
        if self.n > 62 {
            return Err(Error::Graph6TooLarge(self.n));
        }
        let nbits = self.n * (self.n - 1) / 2;
        let mut out = vec![63 + self.n as u8];
        let mut acc = 0u8;
        let mut filled = 0;
        for j in 1..self.n {
            for i in 0..j {
                acc = acc << 1 | u8::from(self.has_edge(i, j));
                filled += 1;
                if filled == 6 {
                    out.push(63 + acc);
                    acc = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            out.push(63 + (acc << (6 - filled)));
        }
        debug_assert_eq!(out.len(), 1 + nbits.div_ceil(6));
        Ok(String::from_utf8(out).unwrap())
    }

    /// Parse an edge-list file: first line `n m`, then m lines `u v`
    /// (0-indexed vertices).
    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or_else(|| Error::EdgeList {
            line: 1,
            reason: "empty file".into(),
        })?;
        let mut it = header.split_whitespace();
        let parse = |tok: Option<&str>, line: usize, what: &str| -> Result<usize> {
            tok.ok_or_else(|| Error::EdgeList {
                line,
                reason: format!("missing {what}"),
            })?
            .parse::<usize>()
            .map_err(|e| Error::EdgeList {
                line,
                reason: format!("bad {what}: {e}"),
            })
        };
        let n = parse(it.next(), line, "vertex count")?;
        let m = parse(it.next(), line, "edge count")?;
        if it.next().is_some() {
            return Err(Error::EdgeList {
                line,
                reason: "trailing tokens on header".into(),
            });
        }
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let u = parse(it.next(), line, "endpoint")?;
            let v = parse(it.next(), line, "endpoint")?;
            if it.next().is_some() {
                return Err(Error::EdgeList {
                    line,
                    reason: "trailing tokens on edge".into(),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::EdgeList {
                line: 1,
                reason: format!("header promises {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, &edges)
    }

    /// Sniff the input format: any whitespace means edge list, otherwise a
    /// single graph6 line.
    pub fn parse_auto(text: &str) -> Result<Graph> {
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if first.trim().contains(char::is_whitespace) {
            Graph::from_edge_list(text)
        } else {
            Graph::from_graph6(first.trim())
        }
    }

    pub fn structure(&self) -> StructureReport {
        let degrees: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        let degree_min = *degrees.iter().min().unwrap();
        let degree_max = *degrees.iter().max().unwrap();
        StructureReport {
            degree_min,
            degree_max,
            regular: (degree_min == degree_max).then_some(degree_min),
            connected: self.is_connected(),
            bipartite: self.is_bipartite(),
            odd_girth: self.odd_girth(),
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        for s in 0..self.n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &u in &self.adj[v] {
                    if color[u] == u8::MAX {
                        color[u] = 1 - color[v];
                        queue.push_back(u);
                    } else if color[u] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Length of a shortest odd cycle, or None if the graph is bipartite.
    ///
    /// BFS from every vertex on the bipartite double cover: the distance from
    /// (s, even) to (s, odd) is the shortest odd closed walk through s, and
    /// minimising over s yields the odd girth.
    pub fn odd_girth(&self) -> Option<usize> {
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; 2 * self.n];
        for s in 0..self.n {
            dist.fill(usize::MAX);
            dist[2 * s] = 0;
            let mut queue = std::collections::VecDeque::from([2 * s]);
            while let Some(state) = queue.pop_front() {
                let (v, parity) = (state / 2, state % 2);
                if dist[state] >= best {
                    continue;
                }
                for &u in &self.adj[v] {
                    let next = 2 * u + (1 - parity);
                    if dist[next] == usize::MAX {
                        dist[next] = dist[state] + 1;
                        queue.push_back(next);
                    }
                }
            }
            best = best.min(dist[2 * s + 1]);
        }
        (best != usize::MAX).then_some(best)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub degree_min: usize,
    pub degree_max: usize,
    /// Common degree when the graph is regular.
    pub regular: Option<usize>,
    pub connected: bool,
    pub bipartite: bool,
    /// None means no odd cycle (equivalently, bipartite).
    pub odd_girth: Option<usize>,
}

pub fn complete(k: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for j in 1..k {
        for i in 0..j {
            edges.push((i, j));
        }
    }
    Graph::new(k, &edges)
}

pub fn complete_bipartite(a: usize, b: usize) -> Result<Graph> {
    if a == 0 || b == 0 {
        return Err(Error::BadParams(
            "complete_bipartite needs both sides nonempty".into(),
        ));
    }
    let mut edges = Vec::new();
    for i in 0..a {
        for j in 0..b {
            edges.push((i, a + j));
        }
    }
    Graph::new(a + b, &edges)
}

pub fn cycle(k: usize) -> Result<Graph> {
    if k < 3 {
        return Err(Error::BadParams(format!("cycle needs k >= 3, got {k}")));
    }
    let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    Graph::new(k, &edges)
}

/// Generalized Petersen graph GP(k, step): outer k-cycle 0..k, inner vertices
/// k..2k joined with stride `step`, plus spokes.
fn generalized_petersen(k: usize, step: usize) -> Result<Graph> {
    if k < 3 || step == 0 || 2 * step == k {
        return Err(Error::BadParams(format!(
            "bad generalized Petersen parameters ({k}, {step})"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..k {
        edges.push((i, (i + 1) % k));
        edges.push((k + i, k + (i + step) % k));
        edges.push((i, k + i));
    }
    // Inner edges come in pairs {i, i+step}; drop the duplicates.
    edges.sort_unstable_by_key(|&(u, v)| (u.min(v), u.max(v)));
    edges.dedup_by_key(|e| (e.0.min(e.1), e.0.max(e.1)));
    Graph::new(2 * k, &edges)
}

/// Circular ladder C_k x K_2.
pub fn prism(k: usize) -> Result<Graph> {
    generalized_petersen(k, 1)
}

pub fn hypercube(r: usize) -> Result<Graph> {
    if r == 0 || r > 12 {
        return Err(Error::BadParams(format!(
            "hypercube needs 1 <= r <= 12, got {r}"
        )));
    }
    let n = 1usize << r;
    let mut edges = Vec::new();
    for v in 0..n {
        for b in 0..r {
            let u = v ^ (1 << b);
            if v < u {
                edges.push((v, u));
            }
        }
    }
    Graph::new(n, &edges)
}

pub fn petersen() -> Graph {
    generalized_petersen(5, 2).unwrap()
}

pub fn moebius_kantor() -> Graph {
    generalized_petersen(8, 3).unwrap()
}

pub fn dodecahedron() -> Graph {
    generalized_petersen(10, 2).unwrap()
}

/// Construct a named graph; `params` supplies the integer arguments.
pub fn generate_named(name: &str, params: &[usize]) -> Result<Graph> {
    let arity_err = |want: usize| {
        Err(Error::BadParams(format!(
            "`{name}` takes {want} parameter(s), got {}",
            params.len()
        )))
    };
    match name {
        "complete" => match params {
            &[k] => complete(k),
            _ => arity_err(1),
        },
        "complete_bipartite" => match params {
            &[a, b] => complete_bipartite(a, b),
            _ => arity_err(2),
        },
        "cycle" => match params {
            &[k] => cycle(k),
            _ => arity_err(1),
        },
        "prism" => match params {
            &[k] => prism(k),
            _ => arity_err(1),
        },
        "hypercube" => match params {
            &[r] => hypercube(r),
            _ => arity_err(1),
        },
        "petersen" => match params {
            [] => Ok(petersen()),
            _ => arity_err(0),
        },
        "moebius_kantor" => match params {
            [] => Ok(moebius_kantor()),
            _ => arity_err(0),
        },
        "dodecahedron" => match params {
            [] => Ok(dodecahedron()),
            _ => arity_err(0),
        },
        "k4" => match params {
            [] => complete(4),
            _ => arity_err(0),
        },
        "k33" => match params {
            [] => complete_bipartite(3, 3),
            _ => arity_err(0),
        },
        _ => Err(Error::UnknownName(name.into())),
    }
}

/// Parse a spec like `petersen`, `complete 4`, `prism:6`, `prism_6` or
/// `complete_bipartite 3 3`.
pub fn parse_named_spec(spec: &str) -> Result<Graph> {
    let mut tokens = spec.split([' ', ':', ',']).filter(|t| !t.is_empty());
    let name = tokens
        .next()
        .ok_or_else(|| Error::UnknownName(String::new()))?;
    let params: Vec<usize> = tokens
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::BadParams(format!("bad parameter `{t}` in `{spec}`")))
        })
        .collect::<Result<_>>()?;
    match generate_named(name, &params) {
        // Underscore-packed forms such as `prism_6` or `complete_bipartite_3_3`:
        // split at the first numeric segment.
        Err(Error::UnknownName(_)) if params.is_empty() && name.contains('_') => {
            let parts: Vec<&str> = name.split('_').collect();
            let split = parts
                .iter()
                .position(|p| p.parse::<usize>().is_ok())
                .unwrap_or(parts.len());
            let tail: Option<Vec<usize>> = parts[split..]
                .iter()
                .map(|p| p.parse::<usize>().ok())
                .collect();
            match tail {
                Some(ps) if split < parts.len() => generate_named(&parts[..split].join("_"), &ps),
                _ => Err(Error::UnknownName(name.into())),
            }
        }
        other => other,
    }
}

/// The eight cubic graphs used as the certification corpus.
pub fn cubic_corpus() -> Vec<(&'static str, Graph)> {
    vec![
        ("k4", complete(4).unwrap()),
        ("k33", complete_bipartite(3, 3).unwrap()),
        ("prism_3", prism(3).unwrap()),
        ("hypercube_3", hypercube(3).unwrap()),
        ("petersen", petersen()),
        ("moebius_kantor", moebius_kantor()),
        ("dodecahedron", dodecahedron()),
        ("prism_6", prism(6).unwrap()),
    ]
}
