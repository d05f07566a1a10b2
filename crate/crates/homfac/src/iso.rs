//! Graph canonical labeling, isomorphism testing with witness, and
//! automorphism groups.
//!
//! The engine is iterated colour refinement (degree-in-colour-class
//! partitioning to fixpoint) plus individualization backtracking. The
//! target cell is the smallest non-singleton colour class with the lowest
//! colour. Leaf codes carry the path's node invariants in front of the
//! relabelled edge bitmap, so pruning against the current best path stays
//! sound: the canonical form is the minimum leaf code. Two leaves with
//! equal codes witness an automorphism; discovered automorphisms prune
//! sibling branches through orbit computations, and the search keeps the
//! whole first path so the discovered set generates the full group.

use crate::graphs::Graph;
use crate::perm::{self, Perm, PermGroup};
use crate::{Error, Result};
use std::cmp::Ordering;

/// Vertex cap for canonicalization.
pub const DEFAULT_ISO_CAP: usize = 150;
/// Vertex cap for exact automorphism group orders.
pub const AUT_VERTEX_CAP: usize = 121;
/// Budget on refinement work, in vertex-rounds.
const REFINE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    /// Maps input vertex -> canonical position.
    pub relabeling: Perm,
    /// Canonical edge list, sorted, u < v.
    pub edges: Vec<(u16, u16)>,
    /// Hash of the full leaf code. Equality decisions always compare the
    /// edge lists, never the hash alone.
    pub certificate: u64,
    code: Vec<u64>,
}

impl CanonicalForm {
    pub fn same_graph(&self, other: &CanonicalForm) -> bool {
        self.edges == other.edges
    }
}

fn fnv(acc: u64, x: u64) -> u64 {
    (acc ^ x).wrapping_mul(0x100000001b3)
}

struct Leaf {
    code: Vec<u64>,
    inv_len: usize,
    labeling: Perm,
    base: Vec<usize>,
}

struct Search<'g> {
    g: &'g Graph,
    n: usize,
    budget: u64,
    first: Option<Leaf>,
    best: Option<Leaf>,
    autos: Vec<Perm>,
    /// When set, unwind the recursion to the node with this base length
    /// (the divergence point with the first path) and resume there.
    backjump: Option<usize>,
}

impl<'g> Search<'g> {
    fn new(g: &'g Graph) -> Search<'g> {
        Search {
            g,
            n: g.n(),
            budget: REFINE_BUDGET,
            first: None,
            best: None,
            autos: Vec::new(),
            backjump: None,
        }
    }

    /// Refines the colouring to a fixpoint and returns the node invariant.
    /// Colour values are cell start positions.
    fn refine(&mut self, colour: &mut [u32]) -> Result<u64> {
        let n = self.n;
        loop {
            self.budget = self
                .budget
                .checked_sub(n as u64)
                .ok_or_else(|| Error::cap("isomorphism search budget exhausted"))?;
            let class_count = count_classes(colour);
            // key of v: (colour, sorted neighbor-colour run-length encoding)
            type RefineKey = (u32, Vec<(u32, u32)>, usize);
            let mut keys: Vec<RefineKey> = (0..n)
                .map(|v| {
                    let mut nc: Vec<u32> = self.g.neighbors(v).iter().map(|&w| colour[w]).collect();
                    nc.sort_unstable();
                    let mut rle: Vec<(u32, u32)> = Vec::new();
                    for c in nc {
                        match rle.last_mut() {
                            Some(last) if last.0 == c => last.1 += 1,
                            _ => rle.push((c, 1)),
                        }
                    }
                    (colour[v], rle, v)
                })
                .collect();
            keys.sort();
            let mut next = vec![0u32; n];
            let mut start = 0u32;
            for (i, key) in keys.iter().enumerate() {
                if i > 0 && (key.0, &key.1) != (keys[i - 1].0, &keys[i - 1].1) {
                    start = i as u32;
                }
                next[key.2] = start;
            }
            let stable = count_classes(&next) == class_count;
            colour.copy_from_slice(&next);
            if stable {
                break;
            }
        }
        // invariant: class sizes plus the quotient rows of class reps
        // (the partition is equitable at the fixpoint)
        let mut inv = 0xcbf29ce484222325u64;
        let mut cells = cells_of(colour);
        cells.sort_by_key(|c| colour[c[0]]);
        for cell in &cells {
            inv = fnv(inv, colour[cell[0]] as u64);
            inv = fnv(inv, cell.len() as u64);
            let rep = cell[0];
            let mut row: Vec<u32> = self.g.neighbors(rep).iter().map(|&w| colour[w]).collect();
            row.sort_unstable();
            for c in row {
                inv = fnv(inv, c as u64);
            }
        }
        Ok(inv | 1)
    }

    fn node(
        &mut self,
        colour: &[u32],
        path_inv: &mut Vec<u64>,
        base: &mut Vec<usize>,
        cmp_best: Ordering,
        eq_first: bool,
    ) -> Result<()> {
        let target = target_cell(colour);
        let Some(cell) = target else {
            self.leaf(colour, path_inv, base, cmp_best, eq_first);
            return Ok(());
        };
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            // orbit pruning under automorphisms fixing the base pointwise
            if !tried.is_empty() {
                let fixing: Vec<Perm> = self
                    .autos
                    .iter()
                    .filter(|a| base.iter().all(|&b| a.apply(b) == b))
                    .cloned()
                    .collect();
                if !fixing.is_empty() {
                    let orbit = perm::orbit_of(&fixing, v);
                    if orbit.iter().any(|w| tried.contains(w)) {
                        continue;
                    }
                }
            }
            tried.push(v);
            let mut child: Vec<u32> = colour.to_vec();
            let c = colour[v];
            for (u, cu) in child.iter_mut().enumerate() {
                if *cu == c && u != v {
                    *cu = c + 1;
                }
            }
            let inv = self.refine(&mut child)?;
            let depth = path_inv.len();
            let child_cmp_best = match cmp_best {
                Ordering::Equal => match &self.best {
                    Some(best) if depth < best.inv_len => inv.cmp(&best.code[depth]),
                    Some(_) => Ordering::Greater, // longer path at equal prefix
                    None => Ordering::Equal,
                },
                other => other,
            };
            let child_eq_first = eq_first
                && match &self.first {
                    Some(first) => depth < first.inv_len && inv == first.code[depth],
                    None => true,
                };
            if child_cmp_best == Ordering::Greater && !child_eq_first {
                continue;
            }
            path_inv.push(inv);
            base.push(v);
            self.node(&child, path_inv, base, child_cmp_best, child_eq_first)?;
            base.pop();
            path_inv.pop();
            // a discovered automorphism proves the abandoned remainder of
            // this subtree isomorphic to an already-explored one
            if let Some(depth) = self.backjump {
                if base.len() > depth {
                    return Ok(());
                }
                self.backjump = None;
            }
        }
        Ok(())
    }

    fn leaf(
        &mut self,
        colour: &[u32],
        path_inv: &[u64],
        base: &[usize],
        cmp_best: Ordering,
        eq_first: bool,
    ) {
        let labeling =
            Perm::from_images(colour.iter().map(|&c| c as u16).collect()).expect("discrete colouring");
        let mut code: Vec<u64> = path_inv.to_vec();
        code.push(0); // separator: invariants are odd, the bitmap follows
        let words = (self.n * self.n).div_ceil(64);
        let offset = code.len();
        code.resize(offset + words, 0);
        for (u, v) in self.g.edges() {
            let (a, b) = (labeling.apply(u), labeling.apply(v));
            let (a, b) = (a.min(b), a.max(b));
            let bit = a * self.n + b;
            code[offset + bit / 64] |= 1 << (bit % 64);
        }
        let leaf = Leaf {
            code,
            inv_len: path_inv.len(),
            labeling,
            base: base.to_vec(),
        };
        if self.first.is_none() {
            self.best = Some(Leaf {
                code: leaf.code.clone(),
                inv_len: leaf.inv_len,
                labeling: leaf.labeling.clone(),
                base: leaf.base.clone(),
            });
            self.first = Some(leaf);
            return;
        }
        if eq_first {
            let first = self.first.as_ref().unwrap();
            if first.code == leaf.code {
                // unwind to the divergence point with the first path: the
                // first path's sibling subtree there is fully explored
                let diverge = leaf
                    .base
                    .iter()
                    .zip(first.base.iter())
                    .position(|(a, b)| a != b);
                let first_labeling = first.labeling.clone();
                self.record_auto(&leaf.labeling, first_labeling);
                if let Some(d) = diverge {
                    self.backjump = Some(d);
                }
            }
        }
        match cmp_best {
            Ordering::Equal => {
                let best = self.best.as_ref().unwrap();
                if best.code == leaf.code {
                    let best_labeling = best.labeling.clone();
                    self.record_auto(&leaf.labeling, best_labeling);
                } else if leaf.code < best.code {
                    self.best = Some(leaf);
                }
            }
            Ordering::Less => {
                if leaf.code < self.best.as_ref().unwrap().code {
                    self.best = Some(leaf);
                }
            }
            Ordering::Greater => {}
        }
    }

    fn record_auto(&mut self, labeling: &Perm, other: Perm) {
        let sigma = labeling.then(&other.inverse());
        if sigma.is_identity() || self.autos.contains(&sigma) {
            return;
        }
        debug_assert!(self.g.is_automorphism(&sigma));
        if self.g.is_automorphism(&sigma) {
            self.autos.push(sigma);
        }
    }

    fn run(&mut self) -> Result<()> {
        let mut colour = vec![0u32; self.n];
        let inv = self.refine(&mut colour)?;
        let mut path_inv = vec![inv];
        let mut base = Vec::new();
        self.node(&colour, &mut path_inv, &mut base, Ordering::Equal, true)
    }
}

fn count_classes(colour: &[u32]) -> usize {
    let mut seen = vec![false; colour.len()];
    let mut k = 0;
    for &c in colour {
        if !seen[c as usize] {
            seen[c as usize] = true;
            k += 1;
        }
    }
    k
}

fn cells_of(colour: &[u32]) -> Vec<Vec<usize>> {
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); colour.len()];
    for (v, &c) in colour.iter().enumerate() {
        cells[c as usize].push(v);
    }
    cells.retain(|c| !c.is_empty());
    cells
}

/// Smallest non-singleton cell, lowest colour on ties. None when discrete.
fn target_cell(colour: &[u32]) -> Option<Vec<usize>> {
    let cells = cells_of(colour);
    cells
        .into_iter()
        .filter(|c| c.len() > 1)
        .min_by_key(|c| (c.len(), colour[c[0]]))
}

/// Deterministic canonical form, invariant under relabeling of the input.
/// Disconnected graphs are canonicalized per component and the component
/// codes concatenated in sorted order.
pub fn canonical_form(g: &Graph) -> Result<CanonicalForm> {
    canonical_form_capped(g, DEFAULT_ISO_CAP)
}

pub fn canonical_form_capped(g: &Graph, cap: usize) -> Result<CanonicalForm> {
    if g.n() > cap {
        return Err(Error::cap(format!(
            "canonicalization capped at {cap} vertices, got {}",
            g.n()
        )));
    }
    let comps = g.components();
    if comps.len() <= 1 {
        return canon_connected(g);
    }
    // canonicalize components independently, then order by code
    let mut parts: Vec<(Vec<u64>, Vec<usize>, CanonicalForm)> = Vec::new();
    for comp in comps {
        let sub = g.induced(&comp);
        let cf = canon_connected(&sub)?;
        parts.push((cf.code.clone(), comp, cf));
    }
    parts.sort_by(|a, b| (a.0.len(), &a.0, a.1[0]).cmp(&(b.0.len(), &b.0, b.1[0])));
    let mut images = vec![0u16; g.n()];
    let mut edges: Vec<(u16, u16)> = Vec::new();
    let mut code: Vec<u64> = vec![g.n() as u64, g.edge_count() as u64, parts.len() as u64];
    let mut offset = 0usize;
    for (part_code, comp, cf) in &parts {
        for (i, &v) in comp.iter().enumerate() {
            images[v] = (offset + cf.relabeling.apply(i)) as u16;
        }
        for &(u, v) in &cf.edges {
            edges.push(((offset + u as usize) as u16, (offset + v as usize) as u16));
        }
        code.push(comp.len() as u64);
        code.extend_from_slice(part_code);
        offset += comp.len();
    }
    edges.sort_unstable();
    let certificate = code.iter().fold(0xcbf29ce484222325u64, |a, &x| fnv(a, x));
    Ok(CanonicalForm {
        relabeling: Perm::from_images(images)?,
        edges,
        certificate,
        code,
    })
}

fn canon_connected(g: &Graph) -> Result<CanonicalForm> {
    if g.n() == 0 {
        return Ok(CanonicalForm {
            relabeling: Perm::identity(0),
            edges: Vec::new(),
            certificate: 0,
            code: Vec::new(),
        });
    }
    let mut search = Search::new(g);
    search.run()?;
    let best = search.best.take().expect("at least one leaf");
    let mut edges: Vec<(u16, u16)> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (best.labeling.apply(u) as u16, best.labeling.apply(v) as u16);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    let certificate = best.code.iter().fold(0xcbf29ce484222325u64, |a, &x| fnv(a, x));
    Ok(CanonicalForm {
        relabeling: best.labeling,
        edges,
        certificate,
        code: best.code,
    })
}

/// Exact isomorphism test; the witness maps vertices of g1 to vertices of
/// g2 and is verified edge-by-edge before returning.
pub fn are_isomorphic(g1: &Graph, g2: &Graph) -> Result<Option<Perm>> {
    are_isomorphic_capped(g1, g2, DEFAULT_ISO_CAP)
}

pub fn are_isomorphic_capped(g1: &Graph, g2: &Graph, cap: usize) -> Result<Option<Perm>> {
    if g1.n() != g2.n() || g1.edge_count() != g2.edge_count() {
        return Ok(None);
    }
    let mut d1: Vec<usize> = (0..g1.n()).map(|v| g1.degree(v)).collect();
    let mut d2: Vec<usize> = (0..g2.n()).map(|v| g2.degree(v)).collect();
    d1.sort_unstable();
    d2.sort_unstable();
    if d1 != d2 {
        return Ok(None);
    }
    let c1 = canonical_form_capped(g1, cap)?;
    let c2 = canonical_form_capped(g2, cap)?;
    if !c1.same_graph(&c2) {
        return Ok(None);
    }
    let witness = c1.relabeling.then(&c2.relabeling.inverse());
    for (u, v) in g1.edges() {
        if !g2.has_edge(witness.apply(u), witness.apply(v)) {
            return Err(Error::invalid("canonical witness failed verification"));
        }
    }
    Ok(Some(witness))
}

/// The full automorphism group with exact order. Every returned generator
/// preserves the edge set; the group is materialized so the order is the
/// element count.
pub fn automorphism_group(g: &Graph) -> Result<PermGroup> {
    automorphism_group_capped(g, AUT_VERTEX_CAP, perm::DEFAULT_CLOSURE_CAP)
}

pub fn automorphism_group_capped(g: &Graph, vertex_cap: usize, closure_cap: usize) -> Result<PermGroup> {
    if g.n() > vertex_cap {
        return Err(Error::cap(format!(
            "automorphism groups capped at {vertex_cap} vertices, got {}",
            g.n()
        )));
    }
    if g.n() == 0 {
        return Ok(PermGroup::trivial(0));
    }
    let mut search = Search::new(g);
    search.run()?;
    let gens = if search.autos.is_empty() {
        vec![Perm::identity(g.n())]
    } else {
        search.autos
    };
    for a in &gens {
        if !g.is_automorphism(a) {
            return Err(Error::invalid("generator fails edge preservation"));
        }
    }
    let group = PermGroup::from_generators(g.n(), gens)?;
    group.elements(closure_cap)?;
    Ok(group)
}

/// True iff `aut` contains a subgroup of order n acting regularly on the
/// n points. Searches single-element cyclic subgroups and pair-generated
/// closures over semiregular elements, capped at n + 1 elements.
pub fn has_regular_subgroup(aut: &PermGroup, n: usize, closure_cap: usize) -> Result<bool> {
    if aut.degree() != n {
        return Ok(false);
    }
    let elems = aut.elements(closure_cap)?;
    let domain: Vec<usize> = (0..n).collect();
    // a member of a regular subgroup is semiregular: all cycles equal length
    let semiregular: Vec<&Perm> = elems
        .iter()
        .filter(|e| {
            !e.is_identity() && {
                let ord = e.order();
                let mut power = (*e).clone();
                let mut ok = true;
                for _ in 1..ord {
                    if !power.is_fixed_point_free_on(&domain) {
                        ok = false;
                        break;
                    }
                    power = power.then(e);
                }
                ok
            }
        })
        .collect();
    for g in &semiregular {
        if g.order() == n as u64 {
            return Ok(true);
        }
    }
    for (i, g) in semiregular.iter().enumerate() {
        for h in semiregular.iter().skip(i + 1) {
            let Ok(sub) = perm::closure(&[(*g).clone(), (*h).clone()], n + 1) else {
                continue;
            };
            if sub.len() != n {
                continue;
            }
            let group = PermGroup::from_elements(n, sub);
            if group.is_regular(closure_cap)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// All-permutations isomorphism reference for very small graphs.
pub fn brute_force_isomorphic(g1: &Graph, g2: &Graph) -> bool {
    let n = g1.n();
    if n != g2.n() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    if n > 8 {
        panic!("brute force limited to 8 vertices");
    }
    let mut images: Vec<u16> = (0..n as u16).collect();
    loop {
        let p = Perm::from_images(images.clone()).unwrap();
        if g1.edges().iter().all(|&(u, v)| g2.has_edge(p.apply(u), p.apply(v))) {
            return true;
        }
        // next lexicographic permutation
        let mut i = n.wrapping_sub(2);
        while i < n && images[i] >= images[i + 1] {
            i = i.wrapping_sub(1);
        }
        if i >= n {
            return false;
        }
        let mut j = n - 1;
        while images[j] <= images[i] {
            j -= 1;
        }
        images.swap(i, j);
        images[i + 1..].reverse();
    }
}
