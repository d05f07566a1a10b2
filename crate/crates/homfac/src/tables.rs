//! Reproduction of the two-dimensional table rows: locate a base group
//! (Q8, SL(2,3) or SL(2,5)) inside GL(2,q), build its normalizer in the
//! semilinear group, enumerate the candidate inner groups above the base,
//! filter them down to the ones whose normalizer-side overgroup is
//! 2-transitive, and report the orbit data with one orbital graph per row.
//!
//! The base copy is found by a deterministic two-generator search over
//! matrices in rank order. The normalizer is assembled from scalars and
//! one solved matrix per realized automorphism of the base: both the
//! natural and the twisted module are absolutely irreducible, so each
//! automorphism-layer pair has at most a line of intertwiners, computed
//! by Gaussian elimination.

use crate::ffield::{make_field, FieldElem, FieldSpec};
use crate::graphs::Graph;
use crate::mat2::{Mat2, Semilinear2};
use crate::perm::{table_isomorphisms, tables_isomorphic, GroupTable};
use crate::{Error, Result};
use std::collections::HashSet;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum BaseGroup {
    Q8,
    Sl23,
    Sl25,
}

impl BaseGroup {
    pub fn parse(s: &str) -> Result<BaseGroup> {
        match s.to_ascii_lowercase().as_str() {
            "q8" => Ok(BaseGroup::Q8),
            "sl23" => Ok(BaseGroup::Sl23),
            "sl25" => Ok(BaseGroup::Sl25),
            _ => Err(Error::invalid(format!("unknown base group: {s}"))),
        }
    }

    pub fn order(self) -> usize {
        match self {
            BaseGroup::Q8 => 8,
            BaseGroup::Sl23 => 24,
            BaseGroup::Sl25 => 120,
        }
    }

    /// Two-generator order profile used by the search.
    fn gen_orders(self) -> (u64, u64) {
        match self {
            BaseGroup::Q8 => (4, 4),
            BaseGroup::Sl23 => (4, 3),
            BaseGroup::Sl25 => (4, 5),
        }
    }

    pub fn supported_q(self) -> &'static [u32] {
        match self {
            BaseGroup::Q8 => &[5, 7, 11, 23],
            BaseGroup::Sl23 => &[7, 11, 23],
            BaseGroup::Sl25 => &[9, 19, 29, 59],
        }
    }

    /// For Q8 the inner groups run over the interval between the base and
    /// its scalar extension; for the special linear bases the whole
    /// normalizer interval applies.
    fn scalar_bounded(self) -> bool {
        self == BaseGroup::Q8
    }
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub m0_order: u64,
    pub k: usize,
    pub s_size: usize,
    pub graph: Graph,
}

/// The reference copy of the base as an abstract multiplication table.
fn reference_table(base: BaseGroup) -> GroupTable {
    match base {
        BaseGroup::Q8 => {
            let f3 = make_field(3, 1).unwrap();
            let i = Mat2::new(FieldElem(0), FieldElem(2), FieldElem(1), FieldElem(0));
            let j = Mat2::new(FieldElem(1), FieldElem(1), FieldElem(1), FieldElem(2));
            let elems = matrix_closure(&f3, &[i, j], 9).unwrap();
            assert_eq!(elems.len(), 8);
            GroupTable::build(&elems, |a, b| a.mul(&f3, b))
        }
        BaseGroup::Sl23 => special_linear_table(3),
        BaseGroup::Sl25 => special_linear_table(5),
    }
}

fn special_linear_table(p: u32) -> GroupTable {
    let f = make_field(p, 1).unwrap();
    let mut elems = Vec::new();
    for rank in 0..(p as u64).pow(4) {
        let m = Mat2::from_rank(&f, rank);
        if m.det(&f) == FieldElem::ONE {
            elems.push(m);
        }
    }
    GroupTable::build(&elems, |a, b| a.mul(&f, b))
}

fn matrix_closure(f: &FieldSpec, gens: &[Mat2], cap: usize) -> Result<Vec<Mat2>> {
    let mut elems = vec![Mat2::identity()];
    let mut seen: HashSet<Mat2> = elems.iter().cloned().collect();
    let mut head = 0;
    while head < elems.len() {
        let cur = elems[head];
        head += 1;
        for g in gens {
            let next = cur.mul(f, g);
            if seen.insert(next) {
                if elems.len() >= cap {
                    return Err(Error::cap("matrix closure cap"));
                }
                elems.push(next);
            }
        }
    }
    Ok(elems)
}

/// First base copy in deterministic matrix rank order: pairs (g, h) of
/// determinant-one matrices with the base's generator order profile,
/// closed with a tight cap and checked against the reference table.
fn locate_base(f: &FieldSpec, base: BaseGroup) -> Result<Vec<Mat2>> {
    let pattern = reference_table(base);
    let (og, oh) = base.gen_orders();
    let total = (f.q as u64).pow(4);
    for grank in 0..total {
        let g = Mat2::from_rank(f, grank);
        if g.det(f) != FieldElem::ONE || g.order(f, og) != Some(og) {
            continue;
        }
        for hrank in 0..total {
            let h = Mat2::from_rank(f, hrank);
            if h.det(f) != FieldElem::ONE || h.order(f, oh) != Some(oh) {
                continue;
            }
            let Ok(elems) = matrix_closure(f, &[g, h], base.order() + 1) else {
                continue;
            };
            if elems.len() != base.order() {
                continue;
            }
            let candidate = GroupTable::build(&elems, |a, b| a.mul(f, b));
            if tables_isomorphic(&candidate, &pattern)? {
                return Ok(elems);
            }
        }
    }
    Err(Error::invalid(format!("no {base:?} copy in GL(2,{})", f.q)))
}

/// Solves M b^{alpha^j} = phi(b) M over the base generators; both modules
/// are absolutely irreducible so the solution space is a line or zero.
fn solve_intertwiner(
    f: &FieldSpec,
    gens: &[(Mat2, Mat2)], // (twisted generator, automorphism image)
) -> Result<Option<Mat2>> {
    // unknowns (m1, m2, m3, m4); rows of the homogeneous system
    let mut rows: Vec<[FieldElem; 4]> = Vec::new();
    let z = FieldElem::ZERO;
    for &(a, c) in gens {
        rows.push([f.sub(a.a, c.a), a.c, f.neg(c.b), z]);
        rows.push([a.b, f.sub(a.d, c.a), z, f.neg(c.b)]);
        rows.push([f.neg(c.c), z, f.sub(a.a, c.d), a.c]);
        rows.push([z, f.neg(c.c), a.b, f.sub(a.d, c.d)]);
    }
    // Gaussian elimination to reduced row echelon form
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for col in 0..4 {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = f.inv(rows[r][col])?;
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col];
                let pivot_row = rows[r];
                for (slot, &pv) in rows[i].iter_mut().zip(pivot_row.iter()) {
                    let sub = f.mul(factor, pv);
                    *slot = f.sub(*slot, sub);
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let rank = pivot_cols.len();
    match 4 - rank {
        0 => Ok(None),
        1 => {
            let free_col = (0..4).find(|c| !pivot_cols.contains(c)).unwrap();
            let mut sol = [FieldElem::ZERO; 4];
            sol[free_col] = FieldElem::ONE;
            for (row_idx, &pc) in pivot_cols.iter().enumerate() {
                sol[pc] = f.neg(rows[row_idx][free_col]);
            }
            let m = Mat2::new(sol[0], sol[1], sol[2], sol[3]);
            if m.det(f).is_zero() {
                return Err(Error::invalid("singular intertwiner between irreducible modules"));
            }
            Ok(Some(m))
        }
        _ => Err(Error::invalid("intertwiner space has dimension above one")),
    }
}

/// The full normalizer of the base copy inside the semilinear group:
/// scalars times one intertwiner per realized (automorphism, layer) pair.
fn normalizer_in_semilinear(f: &FieldSpec, b_elems: &[Mat2], table: &GroupTable) -> Result<Vec<Semilinear2>> {
    let autos = table_isomorphisms(table, table, usize::MAX)?;
    let gens: Vec<usize> = table.gens.clone();
    let mut out: HashSet<Semilinear2> = HashSet::new();
    for j in 0..f.r {
        for auto in &autos {
            let system: Vec<(Mat2, Mat2)> = gens
                .iter()
                .map(|&gi| (b_elems[gi].frobenius(f, j), b_elems[auto[gi] as usize]))
                .collect();
            if let Some(m) = solve_intertwiner(f, &system)? {
                for z in f.nonzero() {
                    out.insert(Semilinear2 {
                        mat: m.mul(f, &Mat2::scalar(z)),
                        frob: j,
                    });
                }
            }
        }
    }
    let mut out: Vec<Semilinear2> = out.into_iter().collect();
    out.sort_by_key(|s| (s.frob, s.mat.a, s.mat.b, s.mat.c, s.mat.d));
    Ok(out)
}

fn orbit_partition_on_nonzero(f: &FieldSpec, gens: &[Semilinear2]) -> Vec<Vec<usize>> {
    let q = f.q as usize;
    let total = q * q;
    let mut assigned = vec![false; total];
    assigned[0] = true;
    let mut orbits = Vec::new();
    for start in 1..total {
        if assigned[start] {
            continue;
        }
        let mut queue = vec![start];
        assigned[start] = true;
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for g in gens {
                let w = g.apply_index(f, v);
                if !assigned[w] {
                    assigned[w] = true;
                    queue.push(w);
                }
            }
        }
        queue.sort_unstable();
        orbits.push(queue);
    }
    orbits
}

/// Greedy small generating set for a subgroup given by element indices.
fn small_gens(table: &GroupTable, members: &[u16]) -> Vec<usize> {
    let mut gens: Vec<usize> = Vec::new();
    let mut generated = table.subgroup_closure(&[]);
    for &m in members {
        if generated.len() == members.len() {
            break;
        }
        if generated.binary_search(&m).is_err() {
            gens.push(m as usize);
            generated = table.subgroup_closure(&gens);
        }
    }
    if gens.is_empty() {
        gens.push(table.id);
    }
    gens
}

/// Reproduces one base family of table rows for the given q: inner groups
/// above the base copy that are intransitive on the nonzero vectors,
/// non-scalar, and normal in a 2-transitive overgroup within the ambient
/// normalizer. Rows are sorted by inner-group order.
pub fn twodim_table_rows(q: u32, base: BaseGroup) -> Result<Vec<TableRow>> {
    if !base.supported_q().contains(&q) {
        return Err(Error::invalid(format!(
            "(q, base) = ({q}, {base:?}) is not a table case"
        )));
    }
    let (p, r) = if q == 9 { (3, 2) } else { (q, 1) };
    let f = make_field(p, r)?;
    let b_elems = locate_base(&f, base)?;
    let b_table = GroupTable::build(&b_elems, |a, b| a.mul(&f, b));
    let normalizer = normalizer_in_semilinear(&f, &b_elems, &b_table)?;

    // ambient for candidate enumeration
    let ambient: Vec<Semilinear2> = if base.scalar_bounded() {
        let mut set: HashSet<Semilinear2> = HashSet::new();
        for z in f.nonzero() {
            for b in &b_elems {
                set.insert(Semilinear2::linear(b.mul(&f, &Mat2::scalar(z))));
            }
        }
        let mut v: Vec<Semilinear2> = set.into_iter().collect();
        v.sort_by_key(|s| (s.frob, s.mat.a, s.mat.b, s.mat.c, s.mat.d));
        v
    } else {
        normalizer.clone()
    };

    let amb_table = GroupTable::build(&ambient, |a, b| a.then(&f, b));
    let norm_table = GroupTable::build(&normalizer, |a, b| a.then(&f, b));
    let norm_index: std::collections::HashMap<Semilinear2, usize> =
        normalizer.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let base_indices: Vec<u16> = b_elems
        .iter()
        .map(|b| {
            ambient
                .iter()
                .position(|s| *s == Semilinear2::linear(*b))
                .expect("base inside ambient") as u16
        })
        .collect();

    let mut rows: Vec<TableRow> = Vec::new();
    for candidate in amb_table.subgroups_containing(&base_indices) {
        let members: Vec<Semilinear2> = candidate.iter().map(|&i| ambient[i as usize]).collect();
        let gens: Vec<Semilinear2> = small_gens(&amb_table, &candidate)
            .into_iter()
            .map(|i| ambient[i])
            .collect();
        // non-scalar (always true above the base) and intransitive
        if members.iter().all(|m| m.is_scalar()) {
            continue;
        }
        let orbits = orbit_partition_on_nonzero(&f, &gens);
        if orbits.len() < 2 {
            continue;
        }
        let s_size = orbits[0].len();
        if orbits.iter().any(|o| o.len() != s_size) {
            return Err(Error::invalid("inner-group orbits of unequal length"));
        }
        // normalizer of the candidate within the full ambient normalizer
        let member_set: HashSet<Semilinear2> = members.iter().cloned().collect();
        let n_star: Vec<u16> = normalizer
            .iter()
            .enumerate()
            .filter(|(_, n)| {
                let n_inv = n.inverse(&f);
                gens.iter()
                    .all(|m| member_set.contains(&n_inv.then(&f, m).then(&f, n)))
            })
            .map(|(i, _)| i as u16)
            .collect();
        // 2-transitive overgroup test: the normalizer-side group must be
        // transitive on the nonzero vectors
        let n_star_gens: Vec<Semilinear2> = small_gens(&norm_table, &n_star)
            .into_iter()
            .map(|i| normalizer[i])
            .collect();
        let n_star_orbits = orbit_partition_on_nonzero(&f, &n_star_gens);
        if n_star_orbits.len() != 1 {
            continue;
        }
        // sanity: the candidate's own elements must normalize themselves
        debug_assert!(candidate.iter().all(|&i| {
            let s = ambient[i as usize];
            norm_index.contains_key(&s)
        }));
        let graph = orbital_graph_from_difference_set(&f, &orbits[0])?;
        rows.push(TableRow {
            m0_order: members.len() as u64,
            k: orbits.len(),
            s_size,
            graph,
        });
    }
    rows.sort_by_key(|row| (row.m0_order, row.k));
    Ok(rows)
}

/// Cay(V(2,q), S) for a difference set S of vector indices closed under
/// negation.
fn orbital_graph_from_difference_set(f: &FieldSpec, s: &[usize]) -> Result<Graph> {
    let q = f.q as usize;
    let n = q * q;
    let mut g = Graph::empty(n)?;
    for w in 0..n {
        let (w1, w2) = (FieldElem((w / q) as u32), FieldElem((w % q) as u32));
        for &d in s {
            let (d1, d2) = (FieldElem((d / q) as u32), FieldElem((d % q) as u32));
            let target = f.add(w1, d1).index() * q + f.add(w2, d2).index();
            if w < target {
                g.add_edge(w, target);
            }
        }
    }
    g.label = format!("G({}^2, .)", f.q);
    Ok(g)
}
