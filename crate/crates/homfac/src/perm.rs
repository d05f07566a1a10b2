//! Permutations of {0..n-1} and finitely generated small groups.
//!
//! Groups are materialized as full element sets (default cap 10^6) rather
//! than through base/strong-generating-set machinery; every group in scope
//! is small enough that breadth-first closure is fast, and the insertion
//! order gives deterministic element numbering across runs.

use crate::ffield::{FieldElem, FieldSpec};
use crate::mat2::Mat2;
use crate::{Error, Result};
use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

/// Default cap on the number of materialized group elements.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// A permutation of {0..n-1}; `images[i]` is the image of i.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Perm {
    images: Vec<u16>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            images: (0..n as u16).collect(),
        }
    }

    pub fn from_images(images: Vec<u16>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in &images {
            if (im as usize) >= n || seen[im as usize] {
                return Err(Error::invalid("images are not a bijection"));
            }
            seen[im as usize] = true;
        }
        Ok(Perm { images })
    }

    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
        let mut images: Vec<u16> = (0..n as u16).collect();
        for cycle in cycles {
            for (k, &v) in cycle.iter().enumerate() {
                if v >= n {
                    return Err(Error::invalid("cycle point out of range"));
                }
                images[v] = cycle[(k + 1) % cycle.len()] as u16;
            }
        }
        Perm::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    /// self followed by `next` (right action: x^(gh) = (x^g)^h).
    pub fn then(&self, next: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), next.degree());
        Perm {
            images: self.images.iter().map(|&i| next.images[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0u16; self.degree()];
        for (i, &im) in self.images.iter().enumerate() {
            images[im as usize] = i as u16;
        }
        Perm { images }
    }

    /// g^-1 * self * g.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        g.inverse().then(self).then(g)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &im)| i == im as usize)
    }

    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.degree()];
        let mut ord = 1u64;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut v = start;
            loop {
                seen[v] = true;
                len += 1;
                v = self.apply(v);
                if v == start {
                    break;
                }
            }
            ord = lcm(ord, len);
        }
        ord
    }

    /// True iff no point of `domain` is fixed.
    pub fn is_fixed_point_free_on(&self, domain: &[usize]) -> bool {
        domain.iter().all(|&v| self.apply(v) != v)
    }

    pub fn images(&self) -> &[u16] {
        &self.images
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// A finitely generated permutation group with lazily materialized elements.
#[derive(Debug)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    cache: OnceLock<Vec<Perm>>,
}

impl Clone for PermGroup {
    fn clone(&self) -> Self {
        let g = PermGroup {
            degree: self.degree,
            generators: self.generators.clone(),
            cache: OnceLock::new(),
        };
        if let Some(e) = self.cache.get() {
            let _ = g.cache.set(e.clone());
        }
        g
    }
}

impl PermGroup {
    pub fn from_generators(degree: usize, generators: Vec<Perm>) -> Result<PermGroup> {
        if generators.is_empty() {
            return Err(Error::invalid("empty generator list"));
        }
        if generators.iter().any(|g| g.degree() != degree) {
            return Err(Error::invalid("generators have mixed degrees"));
        }
        Ok(PermGroup {
            degree,
            generators,
            cache: OnceLock::new(),
        })
    }

    pub fn trivial(degree: usize) -> PermGroup {
        PermGroup::from_generators(degree, vec![Perm::identity(degree)]).unwrap()
    }

    /// Wraps an already-closed element list; generators default to the full
    /// element list.
    pub fn from_elements(degree: usize, elements: Vec<Perm>) -> PermGroup {
        let generators = if elements.is_empty() {
            vec![Perm::identity(degree)]
        } else {
            elements.clone()
        };
        let g = PermGroup {
            degree,
            generators,
            cache: OnceLock::new(),
        };
        let _ = g.cache.set(elements);
        g
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    /// Breadth-first closure under right multiplication by generators,
    /// with deterministic insertion order. Errors when `cap` is exceeded.
    pub fn elements(&self, cap: usize) -> Result<&Vec<Perm>> {
        if let Some(e) = self.cache.get() {
            return Ok(e);
        }
        let e = closure(&self.generators, cap)?;
        let _ = self.cache.set(e);
        Ok(self.cache.get().unwrap())
    }

    pub fn order(&self, cap: usize) -> Result<u64> {
        Ok(self.elements(cap)?.len() as u64)
    }

    pub fn contains(&self, p: &Perm, cap: usize) -> Result<bool> {
        Ok(self.elements(cap)?.contains(p))
    }

    /// Orbit partition of {0..n-1}; orbits sorted by minimum point, points
    /// sorted within each orbit.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbit_partition(&self.generators, self.degree)
    }

    pub fn orbit_of(&self, point: usize) -> Vec<usize> {
        orbit_of(&self.generators, point)
    }

    pub fn is_transitive(&self) -> bool {
        self.orbit_of(0).len() == self.degree
    }

    /// True iff only the identity fixes a point of `domain`.
    pub fn is_semiregular_on(&self, domain: &[usize], cap: usize) -> Result<bool> {
        for e in self.elements(cap)? {
            if !e.is_identity() && !e.is_fixed_point_free_on(domain) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_regular(&self, cap: usize) -> Result<bool> {
        let domain: Vec<usize> = (0..self.degree).collect();
        Ok(self.is_transitive() && self.is_semiregular_on(&domain, cap)?)
    }

    /// Transitivity on unordered 2-subsets, by orbit sweep.
    pub fn is_2_homogeneous(&self) -> bool {
        let n = self.degree;
        if n < 2 {
            return true;
        }
        let total = n * (n - 1) / 2;
        self.pair_orbit_size(0, 1, false) == total
    }

    /// Transitivity on ordered pairs of distinct points.
    pub fn is_2_transitive(&self) -> bool {
        let n = self.degree;
        if n < 2 {
            return true;
        }
        self.pair_orbit_size(0, 1, true) == n * (n - 1)
    }

    fn pair_orbit_size(&self, u: usize, v: usize, ordered: bool) -> usize {
        let n = self.degree;
        let key = |a: usize, b: usize| {
            if ordered || a < b {
                a * n + b
            } else {
                b * n + a
            }
        };
        let mut seen = HashSet::new();
        let mut queue = vec![(u, v)];
        seen.insert(key(u, v));
        let mut head = 0;
        while head < queue.len() {
            let (a, b) = queue[head];
            head += 1;
            for g in &self.generators {
                let (x, y) = (g.apply(a), g.apply(b));
                if seen.insert(key(x, y)) {
                    queue.push((x, y));
                }
            }
        }
        seen.len()
    }

    /// The orbit of an ordered pair under the group, in breadth-first order.
    pub fn orbital_of_pair(&self, pair: (usize, usize)) -> Vec<(usize, usize)> {
        let n = self.degree;
        let mut seen = HashSet::new();
        let mut queue = vec![pair];
        seen.insert(pair.0 * n + pair.1);
        let mut head = 0;
        while head < queue.len() {
            let (a, b) = queue[head];
            head += 1;
            for g in &self.generators {
                let (x, y) = (g.apply(a), g.apply(b));
                if seen.insert(x * n + y) {
                    queue.push((x, y));
                }
            }
        }
        queue
    }

    /// Descriptors of the orbits on ordered pairs of distinct points
    /// (the diagonal is excluded), sorted by representative pair.
    pub fn orbitals(&self) -> Vec<OrbitalDescriptor> {
        let n = self.degree;
        let mut seen = vec![false; n * n];
        for v in 0..n {
            seen[v * n + v] = true;
        }
        let mut out = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if seen[u * n + v] {
                    continue;
                }
                let pairs = self.orbital_of_pair((u, v));
                let mut self_paired = false;
                for &(a, b) in &pairs {
                    seen[a * n + b] = true;
                    if (a, b) == (v, u) {
                        self_paired = true;
                    }
                }
                out.push(OrbitalDescriptor {
                    representative: (u, v),
                    size: pairs.len(),
                    self_paired,
                });
            }
        }
        out
    }

    /// Subgroup of elements fixing `point` (materializes the group).
    pub fn stabilizer(&self, point: usize, cap: usize) -> Result<PermGroup> {
        let elems: Vec<Perm> = self
            .elements(cap)?
            .iter()
            .filter(|e| e.apply(point) == point)
            .cloned()
            .collect();
        Ok(PermGroup::from_elements(self.degree, elems))
    }

    /// Right-coset action of the group on the cosets of `sub`.
    /// The degree of the result is [G:H].
    pub fn coset_action(&self, sub: &PermGroup, cap: usize) -> Result<PermGroup> {
        let g_elems = self.elements(cap)?;
        let h_elems = sub.elements(cap)?;
        if sub.degree != self.degree {
            return Err(Error::invalid("subgroup degree mismatch"));
        }
        let g_index: HashMap<&Perm, usize> = g_elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        for h in h_elems {
            if !g_index.contains_key(h) {
                return Err(Error::invalid("H is not a subgroup of G"));
            }
        }
        // Sweep elements in insertion order; each unassigned element seeds
        // the next coset, so coset numbering is deterministic.
        let mut coset_of = vec![usize::MAX; g_elems.len()];
        let mut reps: Vec<usize> = Vec::new();
        for (i, g) in g_elems.iter().enumerate() {
            if coset_of[i] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(i);
            for h in h_elems {
                let hg = h.then(g);
                coset_of[g_index[&hg]] = c;
            }
        }
        let n_cosets = reps.len();
        let mut gens = Vec::new();
        for g in &self.generators {
            let mut images = vec![0u16; n_cosets];
            for (c, &rep) in reps.iter().enumerate() {
                let moved = g_elems[rep].then(g);
                images[c] = coset_of[g_index[&moved]] as u16;
            }
            gens.push(Perm::from_images(images)?);
        }
        PermGroup::from_generators(n_cosets, gens)
    }

    /// Elements of the group normalizing `sub` (materializes both).
    pub fn normalizer(&self, sub: &PermGroup, cap: usize) -> Result<PermGroup> {
        let g_elems = self.elements(cap)?;
        let h_set: HashSet<&Perm> = sub.elements(cap)?.iter().collect();
        let elems: Vec<Perm> = g_elems
            .iter()
            .filter(|g| {
                sub.generators
                    .iter()
                    .all(|h| h_set.contains(&h.conjugate_by(g)))
            })
            .cloned()
            .collect();
        Ok(PermGroup::from_elements(self.degree, elems))
    }

    pub(crate) fn with_cached_elements(
        degree: usize,
        generators: Vec<Perm>,
        elements: Vec<Perm>,
    ) -> PermGroup {
        let g = PermGroup {
            degree,
            generators,
            cache: OnceLock::new(),
        };
        let _ = g.cache.set(elements);
        g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitalDescriptor {
    pub representative: (usize, usize),
    pub size: usize,
    pub self_paired: bool,
}

pub fn closure(generators: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    let degree = generators[0].degree();
    let mut elems = vec![Perm::identity(degree)];
    let mut seen: HashSet<Perm> = elems.iter().cloned().collect();
    let mut head = 0;
    while head < elems.len() {
        let w = elems[head].clone();
        head += 1;
        for g in generators {
            let next = w.then(g);
            if !seen.contains(&next) {
                if elems.len() >= cap {
                    return Err(Error::cap(format!("closure exceeded cap {cap}")));
                }
                seen.insert(next.clone());
                elems.push(next);
            }
        }
    }
    Ok(elems)
}

pub fn orbit_of(generators: &[Perm], point: usize) -> Vec<usize> {
    let mut seen = HashSet::new();
    let mut queue = vec![point];
    seen.insert(point);
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        for g in generators {
            let w = g.apply(v);
            if seen.insert(w) {
                queue.push(w);
            }
        }
    }
    queue.sort_unstable();
    queue
}

pub fn orbit_partition(generators: &[Perm], n: usize) -> Vec<Vec<usize>> {
    let mut assigned = vec![false; n];
    let mut orbits = Vec::new();
    for v in 0..n {
        if assigned[v] {
            continue;
        }
        let orbit = orbit_of(generators, v);
        for &w in &orbit {
            assigned[w] = true;
        }
        orbits.push(orbit);
    }
    orbits
}

/// x -> x^{p^j} * omega^i on field indices, fixing 0.
pub fn semilinear_perm(field: &FieldSpec, i: u64, j: u32) -> Perm {
    let wi = field.omega_pow(i as i64);
    let images = (0..field.q)
        .map(|x| field.mul(field.frobenius(FieldElem(x), j), wi).0 as u16)
        .collect();
    Perm { images }
}

/// v -> v + x on field indices.
pub fn translation_perm(field: &FieldSpec, x: FieldElem) -> Perm {
    let images = (0..field.q).map(|v| field.add(FieldElem(v), x).0 as u16).collect();
    Perm { images }
}

/// The R translations by the power basis 1, x, .., x^{R-1}; their closure
/// is the full translation group of order q.
pub fn translation_perms(field: &FieldSpec) -> Vec<Perm> {
    (0..field.r)
        .map(|i| translation_perm(field, FieldElem(field.p.pow(i))))
        .collect()
}

/// v -> -v on field indices.
pub fn negation_perm(field: &FieldSpec) -> Perm {
    let images = (0..field.q).map(|v| field.neg(FieldElem(v)).0 as u16).collect();
    Perm { images }
}

/// The linear action of a nonsingular 2x2 matrix on F_q^2, with vertex
/// index q*index(u) + index(v) for the vector (u, v).
pub fn gl2_perm(field: &FieldSpec, m: &Mat2) -> Result<Perm> {
    if m.det(field).is_zero() {
        return Err(Error::invalid("singular matrix"));
    }
    let q = field.q as usize;
    let mut images = vec![0u16; q * q];
    for u in 0..field.q {
        for v in 0..field.q {
            let (x, y) = m.apply(field, (FieldElem(u), FieldElem(v)));
            images[(u as usize) * q + v as usize] = (x.index() * q + y.index()) as u16;
        }
    }
    Ok(Perm { images })
}

/// All Moebius maps x -> (ax+b)/(cx+d) on the projective line over the
/// field, with infinity encoded as index q. For q = 8 this is PSL(2,8).
pub fn moebius_group(field: &FieldSpec) -> PermGroup {
    let q = field.q as usize;
    let infinity = q;
    let mut seen = HashSet::new();
    let mut elems = Vec::new();
    for a in 0..field.q {
        for b in 0..field.q {
            for c in 0..field.q {
                for d in 0..field.q {
                    let (a, b, c, d) = (FieldElem(a), FieldElem(b), FieldElem(c), FieldElem(d));
                    if field.sub(field.mul(a, d), field.mul(b, c)).is_zero() {
                        continue;
                    }
                    let mut images = vec![0u16; q + 1];
                    for x in 0..field.q {
                        let x = FieldElem(x);
                        let num = field.add(field.mul(a, x), b);
                        let den = field.add(field.mul(c, x), d);
                        images[x.index()] = if den.is_zero() {
                            infinity as u16
                        } else {
                            field.mul(num, field.inv(den).unwrap()).0 as u16
                        };
                    }
                    images[infinity] = if c.is_zero() {
                        infinity as u16
                    } else {
                        field.mul(a, field.inv(c).unwrap()).0 as u16
                    };
                    let p = Perm { images };
                    if seen.insert(p.clone()) {
                        elems.push(p);
                    }
                }
            }
        }
    }
    PermGroup::from_elements(q + 1, elems)
}

/// PSL(2,8) in its transitive degree-28 action: the coset action on a
/// Sylow-3 normalizer (order 18, index 28).
pub fn psl2_8_degree28() -> Result<PermGroup> {
    let f8 = crate::ffield::make_field(2, 3)?;
    let g = moebius_group(&f8);
    let elems = g.elements(DEFAULT_CLOSURE_CAP)?;
    let gen9 = elems
        .iter()
        .find(|e| e.order() == 9)
        .ok_or_else(|| Error::invalid("no element of order 9"))?
        .clone();
    let mut sylow = vec![Perm::identity(g.degree())];
    let mut cur = gen9.clone();
    while !cur.is_identity() {
        sylow.push(cur.clone());
        cur = cur.then(&gen9);
    }
    let sylow = PermGroup::from_elements(g.degree(), sylow);
    let normalizer = g.normalizer(&sylow, DEFAULT_CLOSURE_CAP)?;
    g.coset_action(&normalizer, DEFAULT_CLOSURE_CAP)
}

// ---------------------------------------------------------------------------
// Abstract-group machinery on multiplication tables.
// ---------------------------------------------------------------------------

/// A finite group as a multiplication table over element indices.
pub struct GroupTable {
    pub n: usize,
    mul: Vec<u16>,
    pub order_of: Vec<u16>,
    pub gens: Vec<usize>,
    pub id: usize,
}

impl GroupTable {
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    /// Builds the table from a closed element list and a multiplication
    /// callback. Picks a small generating set greedily.
    pub fn build<T, F>(elems: &[T], mul: F) -> GroupTable
    where
        T: Eq + std::hash::Hash + Clone,
        F: Fn(&T, &T) -> T,
    {
        let n = elems.len();
        let index: HashMap<&T, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut table = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = index[&mul(&elems[i], &elems[j])] as u16;
            }
        }
        let id = (0..n)
            .find(|&i| (0..n).all(|j| table[i * n + j] as usize == j))
            .expect("no identity in element list");
        let mut gt = GroupTable {
            n,
            mul: table,
            order_of: vec![0; n],
            gens: Vec::new(),
            id,
        };
        for i in 0..n {
            let mut ord = 1u16;
            let mut cur = i;
            while cur != gt.id {
                cur = gt.mul(cur, i);
                ord += 1;
            }
            gt.order_of[i] = ord;
        }
        let mut generated = gt.subgroup_closure(&[]);
        for i in 0..n {
            if generated.len() == n {
                break;
            }
            if generated.binary_search(&(i as u16)).is_err() {
                gt.gens.push(i);
                generated = gt.subgroup_closure(&gt.gens.clone());
            }
        }
        if gt.gens.is_empty() {
            gt.gens.push(gt.id);
        }
        gt
    }

    /// Closure of a set of element indices, as a sorted vector.
    pub fn subgroup_closure(&self, seed: &[usize]) -> Vec<u16> {
        let mut in_set = vec![false; self.n];
        in_set[self.id] = true;
        let mut queue: Vec<usize> = vec![self.id];
        for &s in seed {
            if !in_set[s] {
                in_set[s] = true;
                queue.push(s);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let a = queue[head];
            head += 1;
            for &s in seed {
                for next in [self.mul(a, s), self.mul(s, a)] {
                    if !in_set[next] {
                        in_set[next] = true;
                        queue.push(next);
                    }
                }
            }
        }
        let mut out: Vec<u16> = queue.into_iter().map(|x| x as u16).collect();
        out.sort_unstable();
        out
    }

    /// Greedy small generating set for a subgroup given by its sorted
    /// member indices.
    pub fn small_generating_set(&self, members: &[u16]) -> Vec<usize> {
        let mut gens: Vec<usize> = Vec::new();
        let mut generated = self.subgroup_closure(&[]);
        for &m in members {
            if generated.len() == members.len() {
                break;
            }
            if generated.binary_search(&m).is_err() {
                gens.push(m as usize);
                generated = self.subgroup_closure(&gens);
            }
        }
        gens
    }

    /// All subgroups, found bottom-up by extending known subgroups with
    /// single coset representatives. Returned as sorted element-index
    /// vectors, ordered by (size, members).
    pub fn all_subgroups(&self) -> Vec<Vec<u16>> {
        self.subgroups_from(self.subgroup_closure(&[]), Vec::new())
    }

    /// Subgroups containing the closure of the given seed.
    pub fn subgroups_containing(&self, seed: &[u16]) -> Vec<Vec<u16>> {
        let base = self.subgroup_closure(&seed.iter().map(|&x| x as usize).collect::<Vec<_>>());
        let gens = self.small_generating_set(&base);
        self.subgroups_from(base, gens)
    }

    fn subgroups_from(&self, base: Vec<u16>, base_gens: Vec<usize>) -> Vec<Vec<u16>> {
        let mut known: HashSet<Vec<u16>> = HashSet::new();
        known.insert(base.clone());
        let mut queue = vec![(base, base_gens)];
        let mut head = 0;
        while head < queue.len() {
            let (current, gens) = queue[head].clone();
            head += 1;
            // extending by any member of the coset S*g gives the same
            // subgroup, so only coset representatives are tried
            let mut covered = vec![false; self.n];
            for &m in &current {
                covered[m as usize] = true;
            }
            for g in 0..self.n {
                if covered[g] {
                    continue;
                }
                for &m in &current {
                    covered[self.mul(m as usize, g)] = true;
                }
                let mut new_gens = gens.clone();
                new_gens.push(g);
                let sub = self.subgroup_closure(&new_gens);
                if known.insert(sub.clone()) {
                    queue.push((sub, new_gens));
                }
            }
        }
        let mut out: Vec<Vec<u16>> = known.into_iter().collect();
        out.sort_by(|a, b| (a.len(), &**a).cmp(&(b.len(), &**b)));
        out
    }
}

/// Exact isomorphism test by generator-image search respecting element
/// orders. Both groups must have order at most 512.
pub fn tables_isomorphic(a: &GroupTable, b: &GroupTable) -> Result<bool> {
    Ok(!table_isomorphisms(a, b, 1)?.is_empty())
}

/// Isomorphisms a -> b as element-index maps, at most `limit` of them,
/// found by generator-image backtracking respecting element orders.
pub fn table_isomorphisms(a: &GroupTable, b: &GroupTable, limit: usize) -> Result<Vec<Vec<u16>>> {
    if a.n != b.n {
        return Ok(Vec::new());
    }
    if a.n > 512 {
        return Err(Error::cap("isomorphism test capped at order 512"));
    }
    let mut a_orders = a.order_of.clone();
    let mut b_orders = b.order_of.clone();
    a_orders.sort_unstable();
    b_orders.sort_unstable();
    if a_orders != b_orders {
        return Ok(Vec::new());
    }
    let gens = a.gens.clone();
    let mut images = vec![0usize; gens.len()];
    let mut out = Vec::new();
    search_hom(a, b, &gens, &mut images, 0, limit, &mut out);
    Ok(out)
}

fn search_hom(
    a: &GroupTable,
    b: &GroupTable,
    gens: &[usize],
    images: &mut [usize],
    k: usize,
    limit: usize,
    out: &mut Vec<Vec<u16>>,
) -> bool {
    if out.len() >= limit {
        return true;
    }
    if k == gens.len() {
        if let Some(map) = extend_map(a, b, gens, images) {
            if map.iter().all(|&x| x != u16::MAX) {
                debug_assert!(verify_table_iso(a, b, &map));
                out.push(map);
            }
        }
        return out.len() >= limit;
    }
    for cand in 0..b.n {
        if b.order_of[cand] != a.order_of[gens[k]] {
            continue;
        }
        images[k] = cand;
        if extend_map(a, b, &gens[..=k], &images[..=k]).is_some()
            && search_hom(a, b, gens, images, k + 1, limit, out)
        {
            return true;
        }
    }
    false
}

/// Extends gens -> images over the generated subgroup by breadth-first
/// word evaluation with conflict detection. Returns the partial map
/// (u16::MAX on unreached elements) when consistent and injective.
fn extend_map(a: &GroupTable, b: &GroupTable, gens: &[usize], images: &[usize]) -> Option<Vec<u16>> {
    let mut map = vec![u16::MAX; a.n];
    let mut used = vec![false; b.n];
    map[a.id] = b.id as u16;
    used[b.id] = true;
    let mut queue = vec![a.id];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        let fx = map[x] as usize;
        for (&g, &fg) in gens.iter().zip(images.iter()) {
            let xg = a.mul(x, g);
            let fxg = b.mul(fx, fg);
            if map[xg] != u16::MAX {
                if map[xg] as usize != fxg {
                    return None;
                }
            } else {
                if used[fxg] {
                    return None;
                }
                used[fxg] = true;
                map[xg] = fxg as u16;
                queue.push(xg);
            }
        }
    }
    Some(map)
}

fn verify_table_iso(a: &GroupTable, b: &GroupTable, map: &[u16]) -> bool {
    for x in 0..a.n {
        for y in 0..a.n {
            if map[a.mul(x, y)] as usize != b.mul(map[x] as usize, map[y] as usize) {
                return false;
            }
        }
    }
    true
}

pub fn group_table(group: &PermGroup, cap: usize) -> Result<GroupTable> {
    let elems = group.elements(cap)?;
    Ok(GroupTable::build(elems, |a, b| a.then(b)))
}

/// Exact abstract-isomorphism test for two materialized permutation groups.
pub fn group_isomorphic(a: &PermGroup, b: &PermGroup, cap: usize) -> Result<bool> {
    if a.order(cap)? != b.order(cap)? {
        return Ok(false);
    }
    tables_isomorphic(&group_table(a, cap)?, &group_table(b, cap)?)
}

/// Subgroups of `ambient` abstractly isomorphic to `pattern`, found by a
/// seeded two-generator search over element pairs (g, h) with
/// ord(g) >= ord(h) in element-index order, deduplicated by element set.
/// Stops after `limit` subgroups.
pub fn find_isomorphic_subgroups(
    ambient: &PermGroup,
    pattern: &PermGroup,
    limit: usize,
    cap: usize,
) -> Result<Vec<PermGroup>> {
    let target = pattern.order(cap)? as usize;
    if target > 120 {
        return Err(Error::cap("pattern order capped at 120"));
    }
    let pattern_table = group_table(pattern, cap)?;
    let ambient_elems = ambient.elements(cap)?;
    let orders: Vec<u64> = ambient_elems.iter().map(|e| e.order()).collect();
    let pattern_orders: HashSet<u64> = pattern_table.order_of.iter().map(|&o| o as u64).collect();

    let mut found: Vec<PermGroup> = Vec::new();
    let mut seen_sets: HashSet<Vec<Perm>> = HashSet::new();
    for gi in 0..ambient_elems.len() {
        if !pattern_orders.contains(&orders[gi]) {
            continue;
        }
        for hi in 0..ambient_elems.len() {
            if found.len() >= limit {
                return Ok(found);
            }
            if orders[gi] < orders[hi] || !pattern_orders.contains(&orders[hi]) {
                continue;
            }
            let gens = vec![ambient_elems[gi].clone(), ambient_elems[hi].clone()];
            let sub = match closure(&gens, target + 1) {
                Ok(e) => e,
                Err(_) => continue,
            };
            if sub.len() != target {
                continue;
            }
            let mut key = sub.clone();
            key.sort_by(|a, b| a.images.cmp(&b.images));
            if seen_sets.contains(&key) {
                continue;
            }
            let candidate = GroupTable::build(&sub, |a, b| a.then(b));
            if tables_isomorphic(&candidate, &pattern_table)? {
                seen_sets.insert(key);
                found.push(PermGroup::with_cached_elements(ambient.degree(), gens, sub));
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_field;

    fn cyc(n: usize, cycle: &[usize]) -> Perm {
        Perm::from_cycles(n, &[cycle.to_vec()]).unwrap()
    }

    #[test]
    fn closure_of_three_cycle() {
        let g = PermGroup::from_generators(3, vec![cyc(3, &[0, 1, 2])]).unwrap();
        assert_eq!(g.order(100).unwrap(), 3);
    }

    #[test]
    fn closure_of_identity() {
        let g = PermGroup::trivial(4);
        assert_eq!(g.order(100).unwrap(), 1);
    }

    #[test]
    fn scalar_action_on_f9_has_order_8() {
        let f = make_field(3, 2).unwrap();
        let g = PermGroup::from_generators(9, vec![semilinear_perm(&f, 1, 0)]).unwrap();
        assert_eq!(g.order(100).unwrap(), 8);
    }

    #[test]
    fn orbits_of_scalar_powers_on_f9() {
        let f = make_field(3, 2).unwrap();
        // <w^4> on F_9 minus zero: 4 orbits of length 2
        let g = PermGroup::from_generators(9, vec![semilinear_perm(&f, 4, 0)]).unwrap();
        let orbits: Vec<Vec<usize>> = g.orbits().into_iter().filter(|o| !o.contains(&0)).collect();
        assert_eq!(orbits.len(), 4);
        assert!(orbits.iter().all(|o| o.len() == 2));
    }

    #[test]
    fn scalar_power_orbit_counts() {
        // <w^k> has k orbits of equal length (q-1)/k on the nonzero elements
        for (p, r, k) in [(3u32, 2u32, 2u64), (3, 2, 4), (5, 2, 3), (2, 4, 5)] {
            let f = make_field(p, r).unwrap();
            let g = PermGroup::from_generators(f.q as usize, vec![semilinear_perm(&f, k, 0)]).unwrap();
            let orbits: Vec<Vec<usize>> =
                g.orbits().into_iter().filter(|o| !o.contains(&0)).collect();
            assert_eq!(orbits.len(), k as usize);
            assert!(orbits.iter().all(|o| o.len() as u64 == (f.q as u64 - 1) / k));
        }
    }

    #[test]
    fn transitive_group_has_single_orbit() {
        let g = PermGroup::from_generators(5, vec![cyc(5, &[0, 1, 2, 3, 4])]).unwrap();
        assert_eq!(g.orbits().len(), 1);
        assert!(g.is_transitive());
    }

    #[test]
    fn orbitals_of_odd_order_group_are_paired_not_self_paired() {
        let g = PermGroup::from_generators(3, vec![cyc(3, &[0, 1, 2])]).unwrap();
        let orbs = g.orbitals();
        assert_eq!(orbs.len(), 2);
        assert!(orbs.iter().all(|o| !o.self_paired));
    }

    #[test]
    fn psl28_has_three_self_paired_orbitals() {
        let g = psl2_8_degree28().unwrap();
        assert_eq!(g.degree(), 28);
        assert!(g.is_transitive());
        assert_eq!(g.order(1000).unwrap(), 504);
        let orbs = g.orbitals();
        assert_eq!(orbs.len(), 3);
        assert!(orbs.iter().all(|o| o.self_paired));
        assert!(orbs.iter().all(|o| o.size == 28 * 9));
    }

    #[test]
    fn even_order_transitive_group_has_self_paired_orbital() {
        let s3 = PermGroup::from_generators(3, vec![cyc(3, &[0, 1, 2]), cyc(3, &[0, 1])]).unwrap();
        assert!(s3.orbitals().iter().any(|o| o.self_paired));
    }

    #[test]
    fn stabilizer_orders() {
        let s3 = PermGroup::from_generators(3, vec![cyc(3, &[0, 1, 2]), cyc(3, &[0, 1])]).unwrap();
        let st = s3.stabilizer(0, 100).unwrap();
        assert_eq!(st.order(100).unwrap(), 2);
        assert_eq!(st.order(100).unwrap() * s3.orbit_of(0).len() as u64, s3.order(100).unwrap());

        let regular = PermGroup::from_generators(5, vec![cyc(5, &[0, 1, 2, 3, 4])]).unwrap();
        assert_eq!(regular.stabilizer(0, 100).unwrap().order(100).unwrap(), 1);

        let psl = psl2_8_degree28().unwrap();
        assert_eq!(psl.stabilizer(0, 1000).unwrap().order(1000).unwrap(), 18);
    }

    #[test]
    fn translations_are_regular() {
        let f = make_field(3, 2).unwrap();
        let t = PermGroup::from_generators(9, translation_perms(&f)).unwrap();
        assert_eq!(t.order(100).unwrap(), 9);
        assert!(t.is_regular(100).unwrap());
        let domain: Vec<usize> = (0..9).collect();
        assert!(t.is_semiregular_on(&domain, 100).unwrap());
    }

    #[test]
    fn scalar_subgroup_semiregular_not_transitive() {
        let f = make_field(3, 2).unwrap();
        let g = PermGroup::from_generators(9, vec![semilinear_perm(&f, 2, 0)]).unwrap();
        let nonzero: Vec<usize> = (1..9).collect();
        assert!(g.is_semiregular_on(&nonzero, 100).unwrap());
        assert!(!g.is_transitive());
    }

    #[test]
    fn full_semilinear_group_on_f9_is_2_transitive() {
        let f = make_field(3, 2).unwrap();
        let mut gens = translation_perms(&f);
        gens.push(semilinear_perm(&f, 1, 0));
        gens.push(semilinear_perm(&f, 0, 1));
        let g = PermGroup::from_generators(9, gens).unwrap();
        assert!(g.is_2_homogeneous());
        assert!(g.is_2_transitive());
    }

    #[test]
    fn translations_normalized_by_semilinear_maps() {
        let f = make_field(3, 2).unwrap();
        let t = PermGroup::from_generators(9, translation_perms(&f)).unwrap();
        let t_elems: HashSet<Perm> = t.elements(100).unwrap().iter().cloned().collect();
        for i in 0..8 {
            for j in 0..2 {
                let s = semilinear_perm(&f, i, j);
                for gen in t.generators() {
                    assert!(t_elems.contains(&gen.conjugate_by(&s)));
                }
            }
        }
    }

    #[test]
    fn coset_action_degenerate_cases() {
        let s3 = PermGroup::from_generators(3, vec![cyc(3, &[0, 1, 2]), cyc(3, &[0, 1])]).unwrap();
        let whole = s3.coset_action(&s3, 100).unwrap();
        assert_eq!(whole.degree(), 1);
        let regular = s3.coset_action(&PermGroup::trivial(3), 100).unwrap();
        assert_eq!(regular.degree(), 6);
        assert!(regular.is_regular(100).unwrap());
    }

    #[test]
    fn semilinear_composition_law() {
        // (i,j)(i',j') = (i p^{j'} + i', j + j') pointwise, seeded sampling
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
        for (p, r) in [(3u32, 2u32), (2, 4), (5, 2), (7, 1)] {
            let f = make_field(p, r).unwrap();
            let m = f.q as u64 - 1;
            for _ in 0..1000 {
                let i1 = rng.gen_range(0..m);
                let i2 = rng.gen_range(0..m);
                let j1 = rng.gen_range(0..r);
                let j2 = rng.gen_range(0..r);
                let lhs = semilinear_perm(&f, i1, j1).then(&semilinear_perm(&f, i2, j2));
                let pj = (0..j2).fold(1u64, |acc, _| acc * p as u64 % m);
                let rhs = semilinear_perm(&f, (i1 * pj + i2) % m, (j1 + j2) % r);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn paper_generator_form_matches_internal_pair() {
        // scalar-then-frobenius expands to (e p^s mod q-1, s) pointwise
        let f = make_field(3, 4).unwrap();
        let m = f.q as u64 - 1;
        for e in [0u64, 1, 5, 17] {
            for s in 0..4u32 {
                let ps = (0..s).fold(1u64, |acc, _| acc * 3 % m);
                let direct = semilinear_perm(&f, e * ps % m, s);
                let composed = semilinear_perm(&f, e, 0).then(&semilinear_perm(&f, 0, s));
                assert_eq!(direct, composed);
            }
        }
    }

    #[test]
    fn gl2_perm_basics() {
        let f = make_field(5, 1).unwrap();
        let id = Mat2::identity();
        assert!(gl2_perm(&f, &id).unwrap().is_identity());
        let minus_id = Mat2::scalar(f.neg(FieldElem::ONE));
        let m = gl2_perm(&f, &minus_id).unwrap();
        assert_eq!(m.order(), 2);
        let fixed: Vec<usize> = (0..25).filter(|&v| m.apply(v) == v).collect();
        assert_eq!(fixed, vec![0]);
        let singular = Mat2::new(FieldElem(1), FieldElem(2), FieldElem(2), FieldElem(4));
        assert!(gl2_perm(&f, &singular).is_err());
    }

    #[test]
    fn scalar_matrix_orbits() {
        let f = make_field(5, 1).unwrap();
        let two = Mat2::scalar(FieldElem(2));
        let p = gl2_perm(&f, &two).unwrap();
        let g = PermGroup::from_generators(25, vec![p]).unwrap();
        let nonzero: Vec<usize> = (1..25).collect();
        assert!(g.is_semiregular_on(&nonzero, 100).unwrap());
        // order of 2 mod 5 is 4
        assert!(g.orbits().iter().filter(|o| !o.contains(&0)).all(|o| o.len() == 4));
    }

    #[test]
    fn find_c2_in_sym3() {
        let s3 = PermGroup::from_generators(3, vec![cyc(3, &[0, 1, 2]), cyc(3, &[0, 1])]).unwrap();
        let c2 = PermGroup::from_generators(2, vec![cyc(2, &[0, 1])]).unwrap();
        let found = find_isomorphic_subgroups(&s3, &c2, 10, 100).unwrap();
        assert_eq!(found.len(), 3);
    }

    /// GL(2,q) as a permutation group on q^2 vectors, from the classical
    /// two-generator pair.
    fn gl2_group(field: &FieldSpec) -> PermGroup {
        let one = FieldElem::ONE;
        let zero = FieldElem::ZERO;
        let a = Mat2::new(field.omega, zero, zero, one);
        let b = Mat2::new(field.neg(one), one, field.neg(one), zero);
        PermGroup::from_generators(
            (field.q * field.q) as usize,
            vec![gl2_perm(field, &a).unwrap(), gl2_perm(field, &b).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn find_q8_in_gl25() {
        let f5 = make_field(5, 1).unwrap();
        let ambient = gl2_group(&f5);
        assert_eq!(ambient.order(1000).unwrap(), 480);
        let f3 = make_field(3, 1).unwrap();
        let i = Mat2::new(FieldElem(0), FieldElem(2), FieldElem(1), FieldElem(0));
        let j = Mat2::new(FieldElem(1), FieldElem(1), FieldElem(1), FieldElem(2));
        let q8 = PermGroup::from_generators(
            9,
            vec![gl2_perm(&f3, &i).unwrap(), gl2_perm(&f3, &j).unwrap()],
        )
        .unwrap();
        let found = find_isomorphic_subgroups(&ambient, &q8, 1, 1000).unwrap();
        assert_eq!(found.len(), 1);
        // 3 orbits of length 8 on the 24 nonzero vectors
        let orbits: Vec<Vec<usize>> = found[0].orbits().into_iter().filter(|o| !o.contains(&0)).collect();
        assert_eq!(orbits.len(), 3);
        assert!(orbits.iter().all(|o| o.len() == 8));
    }

    #[test]
    fn find_sl25_in_gl29() {
        let f9 = make_field(3, 2).unwrap();
        let ambient = gl2_group(&f9);
        assert_eq!(ambient.order(10_000).unwrap(), 5760);
        let f5 = make_field(5, 1).unwrap();
        let s = Mat2::new(FieldElem(0), FieldElem(4), FieldElem(1), FieldElem(0));
        let t = Mat2::new(FieldElem(1), FieldElem(1), FieldElem(0), FieldElem(1));
        let sl25 = PermGroup::from_generators(
            25,
            vec![gl2_perm(&f5, &s).unwrap(), gl2_perm(&f5, &t).unwrap()],
        )
        .unwrap();
        assert_eq!(sl25.order(1000).unwrap(), 120);
        let found = find_isomorphic_subgroups(&ambient, &sl25, 1, 10_000).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].order(1000).unwrap(), 120);
        // 2 orbits of length 40 on the nonzero vectors
        let orbits: Vec<Vec<usize>> = found[0].orbits().into_iter().filter(|o| !o.contains(&0)).collect();
        assert_eq!(orbits.len(), 2);
        assert!(orbits.iter().all(|o| o.len() == 40));
    }

    #[test]
    fn group_isomorphism_examples() {
        let c4 = PermGroup::from_generators(4, vec![cyc(4, &[0, 1, 2, 3])]).unwrap();
        let v4 = PermGroup::from_generators(
            4,
            vec![
                Perm::from_cycles(4, &[vec![0, 1], vec![2, 3]]).unwrap(),
                Perm::from_cycles(4, &[vec![0, 2], vec![1, 3]]).unwrap(),
            ],
        )
        .unwrap();
        assert!(!group_isomorphic(&c4, &v4, 100).unwrap());

        // Q8 vs D8: Q8 has a unique involution
        let f3 = make_field(3, 1).unwrap();
        let i = Mat2::new(FieldElem(0), f3.neg(FieldElem(1)), FieldElem(1), FieldElem(0));
        let j = Mat2::new(FieldElem(1), FieldElem(1), FieldElem(1), f3.neg(FieldElem(1)));
        let q8 = PermGroup::from_generators(
            9,
            vec![gl2_perm(&f3, &i).unwrap(), gl2_perm(&f3, &j).unwrap()],
        )
        .unwrap();
        assert_eq!(q8.order(100).unwrap(), 8);
        let d8 = PermGroup::from_generators(4, vec![cyc(4, &[0, 1, 2, 3]), cyc(4, &[1, 3])]).unwrap();
        assert_eq!(d8.order(100).unwrap(), 8);
        assert!(!group_isomorphic(&q8, &d8, 100).unwrap());

        // conjugate subgroups are isomorphic
        let a = PermGroup::from_generators(4, vec![cyc(4, &[0, 1])]).unwrap();
        let b = PermGroup::from_generators(4, vec![cyc(4, &[2, 3])]).unwrap();
        assert!(group_isomorphic(&a, &b, 100).unwrap());
    }

    #[test]
    fn orbit_stabilizer_property() {
        let f = make_field(3, 2).unwrap();
        let mut gens = translation_perms(&f);
        gens.push(semilinear_perm(&f, 2, 0));
        let g = PermGroup::from_generators(9, gens).unwrap();
        for v in [0usize, 3, 7] {
            let st = g.stabilizer(v, 10_000).unwrap();
            assert_eq!(
                st.order(10_000).unwrap() * g.orbit_of(v).len() as u64,
                g.order(10_000).unwrap()
            );
        }
    }

    #[test]
    fn closure_cap_errors() {
        let g = PermGroup::from_generators(5, vec![cyc(5, &[0, 1, 2, 3, 4]), cyc(5, &[0, 1])]).unwrap();
        assert!(matches!(g.elements(10), Err(Error::CapExceeded(_))));
    }
}
