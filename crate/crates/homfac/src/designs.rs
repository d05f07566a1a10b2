//! Extraction of 2-(v, kappa, 1) designs from factorisations whose factors
//! split into edge-disjoint maximal cliques, and exact design verification.

use crate::factorisation::Factorisation;
use crate::graphs;
use crate::{Error, Result};
use serde_json::json;

/// A 2-(v, kappa, 1) design: every 2-subset of points lies in exactly one
/// block; r is the replication number, b the block count, with rv = b kappa.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Design {
    pub v: usize,
    pub kappa: usize,
    pub blocks: Vec<Vec<usize>>,
    pub b: usize,
    pub r: usize,
}

impl Design {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "v": self.v,
            "kappa": self.kappa,
            "b": self.b,
            "r": self.r,
        })
    }
}

/// Blocks are the vertex sets of the factors' maximal cliques. Fails with
/// the index of the first factor lacking the clique structure. The result
/// is verified before returning.
pub fn extract_design(f: &Factorisation) -> Result<Design> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..f.index() {
        let g = f.part_graph(i)?;
        let cliques = graphs::edge_clique_partition(&g).ok_or_else(|| {
            Error::invalid(format!("factor {i} does not split into edge-disjoint maximal cliques"))
        })?;
        blocks.extend(cliques);
    }
    blocks.sort();
    if blocks.is_empty() {
        return Err(Error::invalid("no blocks"));
    }
    let kappa = blocks[0].len();
    let b = blocks.len();
    let r = b * kappa / f.n;
    let design = Design {
        v: f.n,
        kappa,
        blocks,
        b,
        r,
    };
    match verify_design(&design) {
        Ok(()) => Ok(design),
        Err(witness) => Err(Error::invalid(format!("extracted design fails: {witness}"))),
    }
}

/// Exhaustive pair-coverage check, plus constancy of the replication
/// number and the counting identity rv = b kappa; 2 < kappa < v required.
/// Returns the failure witness on the Err side.
pub fn verify_design(d: &Design) -> std::result::Result<(), String> {
    if d.kappa <= 2 || d.kappa >= d.v {
        return Err(format!("kappa = {} outside 2 < kappa < v = {}", d.kappa, d.v));
    }
    if d.b != d.blocks.len() {
        return Err(format!("b = {} but {} blocks", d.b, d.blocks.len()));
    }
    let mut pair_count = vec![0u32; d.v * d.v];
    let mut point_count = vec![0usize; d.v];
    for block in &d.blocks {
        if block.len() != d.kappa {
            return Err(format!("block {block:?} has size {} != kappa", block.len()));
        }
        for (i, &x) in block.iter().enumerate() {
            if x >= d.v {
                return Err(format!("point {x} out of range"));
            }
            point_count[x] += 1;
            for &y in block.iter().skip(i + 1) {
                pair_count[x * d.v + y] += 1;
                pair_count[y * d.v + x] += 1;
            }
        }
    }
    for x in 0..d.v {
        for y in (x + 1)..d.v {
            match pair_count[x * d.v + y] {
                1 => {}
                0 => return Err(format!("pair ({x}, {y}) uncovered")),
                c => return Err(format!("pair ({x}, {y}) covered {c} times")),
            }
        }
    }
    if point_count.iter().any(|&c| c != d.r) {
        return Err("replication number is not constant".into());
    }
    if d.r * d.v != d.b * d.kappa {
        return Err(format!("rv = {} but b kappa = {}", d.r * d.v, d.b * d.kappa));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorisation::gpaley_partition;

    #[test]
    fn design_from_k25_partition() {
        let f = gpaley_partition(5, 2, 3).unwrap();
        let d = extract_design(&f).unwrap();
        assert_eq!((d.v, d.kappa, d.b, d.r), (25, 5, 30, 6));
        assert!(verify_design(&d).is_ok());
    }

    #[test]
    fn paley9_partition_gives_affine_plane() {
        // Paley(9) = H(3,2): each factor splits into 6 triangles, so the
        // two factors give the 2-(9,3,1) design
        let f = gpaley_partition(3, 2, 2).unwrap();
        let d = extract_design(&f).unwrap();
        assert_eq!((d.v, d.kappa, d.b, d.r), (9, 3, 12, 4));
    }

    #[test]
    fn paley13_has_no_clique_structure() {
        // in Paley(13) the endpoints of an edge plus their two common
        // neighbors do not form a clique
        let f = gpaley_partition(13, 1, 2).unwrap();
        assert!(extract_design(&f).is_err());
    }

    #[test]
    fn tampered_design_is_rejected_with_witness() {
        let f = gpaley_partition(5, 2, 3).unwrap();
        let mut d = extract_design(&f).unwrap();
        // swap one point of one block
        let old = d.blocks[0][0];
        let new = (0..d.v).find(|x| !d.blocks[0].contains(x)).unwrap();
        d.blocks[0][0] = new;
        d.blocks[0].sort_unstable();
        let err = verify_design(&d).unwrap_err();
        assert!(err.contains("pair") || err.contains("replication"), "{err} (swapped {old})");
    }

    #[test]
    fn half_exponent_family_block_counts() {
        // when a = R/2 the extraction gives p^{2a} + p^a blocks of size p^a
        let f = gpaley_partition(7, 2, 4).unwrap();
        let d = extract_design(&f).unwrap();
        assert_eq!((d.v, d.kappa, d.b, d.r), (49, 7, 56, 8));
    }

    #[test]
    fn trivial_design_rejected() {
        let d = Design {
            v: 4,
            kappa: 4,
            blocks: vec![vec![0, 1, 2, 3]],
            b: 1,
            r: 1,
        };
        assert!(verify_design(&d).is_err());
    }
}
