//! Isomorphism search by backtracking over colour-refined candidates.
//!
//! Both graphs are refined together (1-dimensional Weisfeiler-Leman) so the
//! colours are comparable; a vertex may only be mapped to a vertex of the
//! same colour. Vertices of the first graph are matched in a fixed
//! connectivity-first order and candidates are tried in input order, so the
//! returned map is deterministic.

use std::collections::BTreeMap;

use super::{Digraph, SimpleGraph};

/// Read-only adjacency access shared by [`SimpleGraph`] and [`Digraph`].
pub trait Adjacency {
    fn order(&self) -> usize;
    fn arc(&self, i: usize, j: usize) -> bool;
    fn out_nbrs(&self, i: usize) -> &[usize];
    fn in_nbrs(&self, i: usize) -> &[usize];
    fn arc_total(&self) -> usize;
    fn directed(&self) -> bool;
}

impl Adjacency for SimpleGraph {
    fn order(&self) -> usize {
        SimpleGraph::order(self)
    }
    fn arc(&self, i: usize, j: usize) -> bool {
        self.has_edge(i, j)
    }
    fn out_nbrs(&self, i: usize) -> &[usize] {
        self.neighbors(i)
    }
    fn in_nbrs(&self, i: usize) -> &[usize] {
        self.neighbors(i)
    }
    fn arc_total(&self) -> usize {
        self.edge_count()
    }
    fn directed(&self) -> bool {
        false
    }
}

impl Adjacency for Digraph {
    fn order(&self) -> usize {
        Digraph::order(self)
    }
    fn arc(&self, i: usize, j: usize) -> bool {
        self.has_arc(i, j)
    }
    fn out_nbrs(&self, i: usize) -> &[usize] {
        self.out_neighbors(i)
    }
    fn in_nbrs(&self, i: usize) -> &[usize] {
        self.in_neighbors(i)
    }
    fn arc_total(&self) -> usize {
        self.arc_count()
    }
    fn directed(&self) -> bool {
        true
    }
}

/// `map[i]` is the image of vertex `i`; checks bijectivity and that arcs and
/// non-arcs are both preserved.
pub fn is_isomorphism<G: Adjacency>(g: &G, h: &G, map: &[usize]) -> bool {
    let n = g.order();
    if h.order() != n || map.len() != n {
        return false;
    }
    let mut hit = vec![false; n];
    for &v in map {
        if v >= n || std::mem::replace(&mut hit[v], true) {
            return false;
        }
    }
    (0..n).all(|i| (0..n).all(|j| i == j || g.arc(i, j) == h.arc(map[i], map[j])))
}

pub fn is_anti_isomorphism(g: &Digraph, h: &Digraph, map: &[usize]) -> bool {
    is_isomorphism(g, &h.transpose(), map)
}

/// An isomorphism from `d1` onto the transpose of `d2`.
pub fn find_anti_isomorphism(d1: &Digraph, d2: &Digraph) -> Option<Vec<usize>> {
    find_isomorphism(d1, &d2.transpose())
}

/// Stable colours of the disjoint union of `g` and `h`; `None` when the
/// colour histograms differ.
fn refine<G: Adjacency>(g: &G, h: &G) -> Option<(Vec<u32>, Vec<u32>)> {
    let n = g.order();
    let mut cg: Vec<u32>;
    let mut ch: Vec<u32>;
    {
        let key = |x: &G, v: usize| (x.out_nbrs(v).len(), x.in_nbrs(v).len());
        let mut table = BTreeMap::new();
        for v in 0..n {
            table.insert(key(g, v), 0u32);
            table.insert(key(h, v), 0u32);
        }
        for (i, c) in table.values_mut().enumerate() {
            *c = i as u32;
        }
        cg = (0..n).map(|v| table[&key(g, v)]).collect();
        ch = (0..n).map(|v| table[&key(h, v)]).collect();
    }
    let mut classes = count_classes(&cg, &ch);
    loop {
        if !same_histogram(&cg, &ch) {
            return None;
        }
        let sig = |x: &G, c: &[u32], v: usize| {
            let mut outs: Vec<u32> = x.out_nbrs(v).iter().map(|&w| c[w]).collect();
            outs.sort_unstable();
            let mut ins: Vec<u32> = if x.directed() {
                x.in_nbrs(v).iter().map(|&w| c[w]).collect()
            } else {
                Vec::new()
            };
            ins.sort_unstable();
            (c[v], outs, ins)
        };
        let sg: Vec<_> = (0..n).map(|v| sig(g, &cg, v)).collect();
        let sh: Vec<_> = (0..n).map(|v| sig(h, &ch, v)).collect();
        let mut table = BTreeMap::new();
        for s in sg.iter().chain(sh.iter()) {
            table.entry(s.clone()).or_insert(0u32);
        }
        for (i, c) in table.values_mut().enumerate() {
            *c = i as u32;
        }
        cg = sg.iter().map(|s| table[s]).collect();
        ch = sh.iter().map(|s| table[s]).collect();
        let next = count_classes(&cg, &ch);
        if next == classes {
            break;
        }
        classes = next;
    }
    same_histogram(&cg, &ch).then_some((cg, ch))
}

fn count_classes(a: &[u32], b: &[u32]) -> usize {
    let mut all: Vec<u32> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn same_histogram(a: &[u32], b: &[u32]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

/// Matching order for `g`: greedily the unplaced vertex with the most
/// placed neighbours, then the rarest colour, then the lowest index.
fn matching_order<G: Adjacency>(g: &G, colors: &[u32]) -> (Vec<usize>, Vec<Option<usize>>) {
    let n = g.order();
    let mut class_size: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in colors {
        *class_size.entry(c).or_default() += 1;
    }
    let mut placed = vec![false; n];
    let mut links = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    let mut anchor_of: Vec<Option<usize>> = vec![None; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| (std::cmp::Reverse(links[v]), class_size[&colors[v]], v))
            .unwrap();
        placed[v] = true;
        order.push(v);
        anchor.push(anchor_of[v]);
        for &w in g.out_nbrs(v).iter().chain(g.in_nbrs(v)) {
            if !placed[w] {
                links[w] += 1;
                anchor_of[w].get_or_insert(v);
            }
        }
    }
    (order, anchor)
}

/// A vertex bijection `map` with `map[i]` the image of `i`, preserving arcs
/// in both directions, or `None`.
pub fn find_isomorphism<G: Adjacency>(g: &G, h: &G) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let n = g.order();
    if h.order() != n || g.arc_total() != h.arc_total() {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let (cg, ch) = refine(g, h)?;
    let (order, anchor) = matching_order(g, &cg);
    let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_color.entry(ch[v]).or_default().push(v);
    }

    let mut map = vec![NONE; n];
    let mut used = vec![false; n];
    let candidates = |level: usize, map: &[usize], used: &[bool]| -> Vec<usize> {
        let u = order[level];
        let pool: Vec<usize> = match anchor[level] {
            Some(a) => {
                let img = map[a];
                let mut pool: Vec<usize> =
                    if g.arc(a, u) { h.out_nbrs(img).to_vec() } else { h.in_nbrs(img).to_vec() };
                pool.sort_unstable();
                pool
            }
            None => by_color[&cg[u]].clone(),
        };
        pool.into_iter().filter(|&v| !used[v] && ch[v] == cg[u]).collect()
    };
    let feasible = |u: usize, v: usize, map: &[usize], used: &[bool]| -> bool {
        let mut placed_out = 0;
        for &w in g.out_nbrs(u) {
            if map[w] != NONE {
                if !h.arc(v, map[w]) {
                    return false;
                }
                placed_out += 1;
            }
        }
        if h.out_nbrs(v).iter().filter(|&&w| used[w]).count() != placed_out {
            return false;
        }
        if g.directed() {
            let mut placed_in = 0;
            for &w in g.in_nbrs(u) {
                if map[w] != NONE {
                    if !h.arc(map[w], v) {
                        return false;
                    }
                    placed_in += 1;
                }
            }
            if h.in_nbrs(v).iter().filter(|&&w| used[w]).count() != placed_in {
                return false;
            }
        }
        true
    };

    let mut stack: Vec<(Vec<usize>, usize)> = vec![(candidates(0, &map, &used), 0)];
    loop {
        let level = stack.len() - 1;
        let u = order[level];
        if map[u] != NONE {
            used[map[u]] = false;
            map[u] = NONE;
        }
        let (cands, pos) = stack.last_mut().unwrap();
        let mut chosen = None;
        while *pos < cands.len() {
            let v = cands[*pos];
            *pos += 1;
            if feasible(u, v, &map, &used) {
                chosen = Some(v);
                break;
            }
        }
        match chosen {
            Some(v) => {
                map[u] = v;
                used[v] = true;
                if level + 1 == n {
                    return Some(map);
                }
                stack.push((candidates(level + 1, &map, &used), 0));
            }
            None => {
                stack.pop();
                if stack.is_empty() {
                    return None;
                }
            }
        }
    }
}
