//! Undirected simple graphs on adjacency bitsets, with the finite-field
//! constructors (Cayley, generalised Paley, twisted generalised Paley,
//! Hamming) and the structure queries the verifiers need.

use crate::ffield::{FieldElem, FieldSpec};
use crate::perm::{Perm, PermGroup};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Cap on vertex counts; common-neighbor intersections stay word-parallel
/// under this bound.
pub const MAX_VERTICES: usize = 4096;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    pub label: String,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Graph> {
        if n > MAX_VERTICES {
            return Err(Error::cap(format!("graph on {n} vertices exceeds cap {MAX_VERTICES}")));
        }
        let words = n.div_ceil(64);
        Ok(Graph {
            n,
            words,
            adj: vec![0u64; n * words],
            label: String::new(),
        })
    }

    pub fn complete(n: usize) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v);
            }
        }
        g.label = format!("K_{n}");
        Ok(g)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::invalid(format!("bad edge ({u}, {v}) on {n} vertices")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v);
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.words + v / 64] &= !(1 << (v % 64));
        self.adj[v * self.words + u / 64] &= !(1 << (u % 64));
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &bits) in self.row(v).iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Sorted edge list (u < v, lexicographic).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// The common valency, or None when the graph is irregular.
    pub fn valency(&self) -> Option<usize> {
        if self.n == 0 {
            return Some(0);
        }
        let d = self.degree(0);
        (1..self.n).all(|v| self.degree(v) == d).then_some(d)
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for w in 0..self.words {
            let mut bits = self.row(u)[w] & self.row(v)[w];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Connected components (BFS), each sorted; components ordered by their
    /// minimum vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut queue = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < queue.len() {
                let v = queue[head];
                head += 1;
                for w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
            }
            queue.sort_unstable();
            out.push(queue);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n).expect("n already within cap");
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if !self.has_edge(u, v) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    /// Edge-set union; in strict mode a shared edge is an error.
    pub fn union(&self, other: &Graph, strict: bool) -> Result<Graph> {
        if self.n != other.n {
            return Err(Error::invalid("union of graphs on different vertex sets"));
        }
        let mut g = Graph::empty(self.n)?;
        for u in 0..self.n {
            for w in 0..self.words {
                if strict && self.row(u)[w] & other.row(u)[w] != 0 {
                    return Err(Error::invalid("graphs share an edge"));
                }
                g.adj[u * self.words + w] = self.row(u)[w] | other.row(u)[w];
            }
        }
        Ok(g)
    }

    /// The induced subgraph on `vertices`, relabelled 0..k-1 in the given
    /// order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len()).expect("induced subgraph within cap");
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Relabels vertices: vertex v becomes perm(v).
    pub fn relabel(&self, perm: &Perm) -> Graph {
        let mut g = Graph::empty(self.n).expect("same vertex count");
        for (u, v) in self.edges() {
            g.add_edge(perm.apply(u), perm.apply(v));
        }
        g
    }

    /// True iff the permutation maps edges to edges.
    pub fn is_automorphism(&self, p: &Perm) -> bool {
        if p.degree() != self.n {
            return false;
        }
        self.edges().iter().all(|&(u, v)| self.has_edge(p.apply(u), p.apply(v)))
    }
}

/// A connection set: nonzero, closed under negation, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionSet {
    pub members: Vec<FieldElem>,
}

impl ConnectionSet {
    pub fn new(field: &FieldSpec, members: impl IntoIterator<Item = FieldElem>) -> Result<ConnectionSet> {
        let set: BTreeSet<FieldElem> = members.into_iter().collect();
        if set.contains(&FieldElem::ZERO) {
            return Err(Error::invalid("connection set contains zero"));
        }
        if set.is_empty() {
            return Err(Error::invalid("empty connection set"));
        }
        for &x in &set {
            if !set.contains(&field.neg(x)) {
                return Err(Error::invalid("connection set is not closed under negation"));
            }
        }
        Ok(ConnectionSet {
            members: set.into_iter().collect(),
        })
    }
}

/// Cay(V, S): vertices are field indices, u ~ v iff v - u lies in S.
pub fn cayley(field: &FieldSpec, s: &ConnectionSet) -> Result<Graph> {
    let mut g = Graph::empty(field.q as usize)?;
    for u in field.elements() {
        for &d in &s.members {
            let v = field.add(u, d);
            if u < v {
                g.add_edge(u.index(), v.index());
            }
        }
    }
    g.label = format!("Cay(F_{}, |S|={})", field.q, s.members.len());
    Ok(g)
}

pub fn validate_gpaley_params(p: u32, r: u32, k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    if r == 0 {
        return Err(Error::invalid("R must be at least 1"));
    }
    let q = (p as u64)
        .checked_pow(r)
        .ok_or_else(|| Error::cap("p^R overflows"))?;
    if (q - 1) % k as u64 != 0 {
        return Err(Error::invalid(format!("k = {k} does not divide p^R - 1 = {}", q - 1)));
    }
    if p % 2 == 1 && ((q - 1) / k as u64) % 2 != 0 {
        return Err(Error::invalid(format!(
            "parity: (q-1)/k = {} must be even for odd p",
            (q - 1) / k as u64
        )));
    }
    Ok(())
}

/// The connection set <w^k> of a generalised Paley graph.
pub fn gpaley_connection_set(field: &FieldSpec, k: u32) -> ConnectionSet {
    ConnectionSet {
        members: field.power_coset(k, 0),
    }
}

pub fn gpaley_on(field: &FieldSpec, k: u32) -> Result<Graph> {
    validate_gpaley_params(field.p, field.r, k)?;
    let s = gpaley_connection_set(field, k);
    let mut g = cayley(field, &s)?;
    g.label = format!("GPaley({}, {})", field.q, (field.q - 1) / k);
    Ok(g)
}

/// GPaley(p^R, (p^R-1)/k) on the deterministic field.
pub fn gpaley(p: u32, r: u32, k: u32) -> Result<Graph> {
    validate_gpaley_params(p, r, k)?;
    let field = crate::ffield::make_field(p, r)?;
    gpaley_on(&field, k)
}

pub fn validate_tgpaley_params(p: u32, r: u32, h: u32) -> Result<()> {
    if r % 2 != 0 || r == 0 {
        return Err(Error::invalid("R must be even"));
    }
    if p % 4 != 3 {
        return Err(Error::invalid("p must be congruent to 3 mod 4"));
    }
    if h % 2 != 1 {
        return Err(Error::invalid("h must be odd"));
    }
    if (p - 1) % (2 * h) != 0 {
        return Err(Error::invalid(format!("2h = {} must divide p - 1 = {}", 2 * h, p - 1)));
    }
    Ok(())
}

/// The twisted connection set <w^{4h}> union w^{3h} <w^{4h}>.
pub fn tgpaley_connection_set(field: &FieldSpec, h: u32) -> ConnectionSet {
    let mut members = field.power_coset(4 * h, 0);
    members.extend(field.power_coset(4 * h, 3 * h as u64));
    members.sort();
    ConnectionSet { members }
}

pub fn tgpaley_on(field: &FieldSpec, h: u32) -> Result<Graph> {
    validate_tgpaley_params(field.p, field.r, h)?;
    // R even, p = 3 mod 4 and 2h | p-1 force 8h | q-1
    debug_assert_eq!((field.q as u64 - 1) % (8 * h as u64), 0);
    let s = tgpaley_connection_set(field, h);
    let mut g = cayley(field, &s)?;
    g.label = format!("TGPaley({}, {})", field.q, (field.q - 1) / (2 * h));
    Ok(g)
}

/// TGPaley(p^R, (p^R-1)/2h) on the deterministic field.
pub fn tgpaley(p: u32, r: u32, h: u32) -> Result<Graph> {
    validate_tgpaley_params(p, r, h)?;
    let field = crate::ffield::make_field(p, r)?;
    tgpaley_on(&field, h)
}

/// H(a, b): b-tuples over an a-set, adjacent iff they differ in exactly
/// one coordinate. Vertex index is the base-a value, low digit first.
pub fn hamming(a: usize, b: usize) -> Result<Graph> {
    if a < 2 || b < 2 {
        return Err(Error::invalid("Hamming graph needs a >= 2 and b >= 2"));
    }
    let n = a
        .checked_pow(b as u32)
        .filter(|&n| n <= MAX_VERTICES)
        .ok_or_else(|| Error::cap(format!("a^b exceeds vertex cap {MAX_VERTICES}")))?;
    let mut g = Graph::empty(n)?;
    for v in 0..n {
        let mut place = 1usize;
        for _ in 0..b {
            let digit = v / place % a;
            for other in (digit + 1)..a {
                g.add_edge(v, v + (other - digit) * place);
            }
            place *= a;
        }
    }
    g.label = format!("H({a},{b})");
    Ok(g)
}

/// The orbital graph of a self-paired orbital containing `pair`.
pub fn orbital_graph(group: &PermGroup, pair: (usize, usize)) -> Result<Graph> {
    let orbital = group.orbital_of_pair(pair);
    if !orbital.contains(&(pair.1, pair.0)) {
        return Err(Error::invalid("orbital is not self-paired"));
    }
    let mut g = Graph::empty(group.degree())?;
    for (u, v) in orbital {
        g.add_edge(u, v);
    }
    Ok(g)
}

/// Cartesian product: (u, v) ~ (u', v') iff u = u' and v ~ v', or v = v'
/// and u ~ u'. Vertex index is u * n2 + v.
pub fn cartesian_product(g1: &Graph, g2: &Graph) -> Result<Graph> {
    let n = g1
        .n
        .checked_mul(g2.n)
        .filter(|&n| n <= MAX_VERTICES)
        .ok_or_else(|| Error::cap("product exceeds vertex cap"))?;
    let mut g = Graph::empty(n)?;
    for u in 0..g1.n {
        for v in 0..g2.n {
            for w in g2.neighbors(v) {
                if v < w {
                    g.add_edge(u * g2.n + v, u * g2.n + w);
                }
            }
            for x in g1.neighbors(u) {
                if u < x {
                    g.add_edge(u * g2.n + v, x * g2.n + v);
                }
            }
        }
    }
    Ok(g)
}

/// Arithmetic connectivity test: GPaley(p^R, (p^R-1)/k) is connected iff k
/// is not a multiple of (p^R-1)/(p^a-1) for any proper divisor a of R.
pub fn gpaley_connectivity_criterion(p: u32, r: u32, k: u32) -> Result<bool> {
    validate_gpaley_params(p, r, k)?;
    let q = (p as u64).pow(r);
    for a in 1..r {
        if r % a != 0 {
            continue;
        }
        let quotient = (q - 1) / ((p as u64).pow(a) - 1);
        if k as u64 % quotient == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The divisor a of R (1 <= a < R) with k = a(p^R-1) / (R(p^a-1)), if any;
/// when it exists the graph is a Hamming graph H(p^a, R/a).
pub fn hamming_parameter_test(p: u32, r: u32, k: u32) -> Result<Option<u32>> {
    validate_gpaley_params(p, r, k)?;
    let q = (p as u64).pow(r);
    for a in 1..r {
        if r % a != 0 {
            continue;
        }
        if k as u64 * r as u64 * ((p as u64).pow(a) - 1) == a as u64 * (q - 1) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// The explicit vertex bijection GPaley(p^R, .) -> H(p^a, R/a): coordinates
/// of u over the basis 1, w^k, .., w^{(b-1)k} with entries in the subfield
/// F_{p^a}, verified edge-by-edge before returning.
///
/// The returned vector maps field index -> Hamming vertex index; subfield
/// digit values are ranked by field index, so 0 maps to the zero tuple.
pub fn hamming_isomorphism_map(field: &FieldSpec, k: u32, a: u32) -> Result<Vec<usize>> {
    let b = (field.r / a) as usize;
    let sub = field.subfield_elements(a)?;
    let basis: Vec<FieldElem> = (0..b).map(|j| field.omega_pow(j as i64 * k as i64)).collect();
    let mut map = vec![usize::MAX; field.q as usize];
    let mut tuple = vec![0usize; b];
    'tuples: loop {
        let mut sum = FieldElem::ZERO;
        for (j, &digit) in tuple.iter().enumerate() {
            sum = field.add(sum, field.mul(sub[digit], basis[j]));
        }
        let mut hv = 0usize;
        for &digit in tuple.iter().rev() {
            hv = hv * sub.len() + digit;
        }
        if map[sum.index()] != usize::MAX {
            return Err(Error::invalid("basis does not span the field"));
        }
        map[sum.index()] = hv;
        let mut pos = 0;
        loop {
            if pos == b {
                break 'tuples;
            }
            tuple[pos] += 1;
            if tuple[pos] < sub.len() {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
    // all tuples visited: the map is a bijection; verify edge-by-edge
    let gp = gpaley_on(field, k)?;
    let hm = hamming(sub.len(), b)?;
    if gp.edge_count() != hm.edge_count() {
        return Err(Error::invalid("edge counts differ"));
    }
    for (u, v) in gp.edges() {
        if !hm.has_edge(map[u], map[v]) {
            return Err(Error::invalid(format!("edge ({u}, {v}) not preserved")));
        }
    }
    Ok(map)
}

/// Maximal cliques covering each edge exactly once, when that structure
/// exists: for each edge the clique is the endpoints plus their common
/// neighbors, accepted only if it really is a clique and the collection
/// covers every edge exactly once.
pub fn edge_clique_partition(g: &Graph) -> Option<Vec<Vec<usize>>> {
    let mut cliques: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (u, v) in g.edges() {
        let mut clique = vec![u, v];
        clique.extend(g.common_neighbors(u, v));
        clique.sort_unstable();
        for (i, &x) in clique.iter().enumerate() {
            for &y in clique.iter().skip(i + 1) {
                if !g.has_edge(x, y) {
                    return None;
                }
            }
        }
        cliques.insert(clique);
    }
    let cliques: Vec<Vec<usize>> = cliques.into_iter().collect();
    let mut covered = 0usize;
    let mut seen = Graph::empty(g.n).ok()?;
    for clique in &cliques {
        for (i, &x) in clique.iter().enumerate() {
            for &y in clique.iter().skip(i + 1) {
                if seen.has_edge(x, y) {
                    return None;
                }
                seen.add_edge(x, y);
                covered += 1;
            }
        }
    }
    (covered == g.edge_count()).then_some(cliques)
}
