//! Bit-exact file formats.
//!
//! Graph: first line "n m", then m lines "u v" with u < v, sorted
//! lexicographically, 0-based, newline-terminated ASCII.
//! Factorisation: header "n k", then per part a line "part i m_i"
//! followed by its sorted edge lines.
//! Design: header "v kappa b", then b lines of kappa sorted point indices.
//! Permutation group: header "n g", then g lines of n images.

use crate::designs::Design;
use crate::factorisation::Factorisation;
use crate::graphs::Graph;
use crate::perm::{Perm, PermGroup};
use crate::{Error, Result};
use std::fmt::Write as _;

pub fn write_graph(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!("{} {}\n", g.n(), edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_graph(text: &str) -> Result<Graph> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse("empty graph file"))?;
    let (n, m) = parse_two(header)?;
    let mut g = Graph::empty(n)?;
    let mut count = 0usize;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (u, v) = parse_two(line)?;
        if u >= v || v >= n {
            return Err(Error::parse(format!("bad edge line: {line}")));
        }
        if g.has_edge(u, v) {
            return Err(Error::parse(format!("duplicate edge: {line}")));
        }
        g.add_edge(u, v);
        count += 1;
    }
    if count != m {
        return Err(Error::parse(format!("header promises {m} edges, found {count}")));
    }
    Ok(g)
}

fn parse_two(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(format!("expected two integers: {line}")))?;
    let b = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(format!("expected two integers: {line}")))?;
    if it.next().is_some() {
        return Err(Error::parse(format!("trailing tokens: {line}")));
    }
    Ok((a, b))
}

pub fn write_factorisation(f: &Factorisation) -> String {
    let mut out = format!("{} {}\n", f.n, f.parts.len());
    for (i, part) in f.parts.iter().enumerate() {
        let _ = writeln!(out, "part {i} {}", part.len());
        for (u, v) in part {
            let _ = writeln!(out, "{u} {v}");
        }
    }
    out
}

/// Reads the edge partition; groups are not part of the file format and
/// come from separate generator files.
pub fn read_factorisation(text: &str) -> Result<Factorisation> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("empty factorisation file"))?;
    let (n, k) = parse_two(header)?;
    let mut parts: Vec<Vec<(u32, u32)>> = Vec::with_capacity(k);
    for i in 0..k {
        let part_header = lines
            .next()
            .ok_or_else(|| Error::parse(format!("missing header for part {i}")))?;
        let tokens: Vec<&str> = part_header.split_whitespace().collect();
        if tokens.len() != 3 || tokens[0] != "part" || tokens[1] != i.to_string() {
            return Err(Error::parse(format!("bad part header: {part_header}")));
        }
        let m: usize = tokens[2]
            .parse()
            .map_err(|_| Error::parse(format!("bad edge count: {part_header}")))?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| Error::parse("truncated part"))?;
            let (u, v) = parse_two(line)?;
            if u >= v || v >= n {
                return Err(Error::parse(format!("bad edge line: {line}")));
            }
            edges.push((u as u32, v as u32));
        }
        parts.push(edges);
    }
    if lines.next().is_some() {
        return Err(Error::parse("trailing lines after the last part"));
    }
    Ok(Factorisation {
        n,
        parts,
        m_group: None,
        g_group: None,
        m0_gens: None,
        field: None,
        label: "file".into(),
    })
}

pub fn write_design(d: &Design) -> String {
    let mut out = format!("{} {} {}\n", d.v, d.kappa, d.b);
    for block in &d.blocks {
        let words: Vec<String> = block.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", words.join(" "));
    }
    out
}

pub fn read_design(text: &str) -> Result<Design> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("empty design file"))?;
    let tokens: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse("bad design header")))
        .collect::<Result<_>>()?;
    let [v, kappa, b] = tokens[..] else {
        return Err(Error::parse("design header needs v kappa b"));
    };
    let mut blocks = Vec::with_capacity(b);
    for _ in 0..b {
        let line = lines.next().ok_or_else(|| Error::parse("truncated design"))?;
        let block: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse("bad block line")))
            .collect::<Result<_>>()?;
        blocks.push(block);
    }
    let r = (b * kappa).checked_div(v).unwrap_or(0);
    Ok(Design { v, kappa, blocks, b, r })
}

pub fn write_perm_group(group: &PermGroup) -> String {
    let mut out = format!("{} {}\n", group.degree(), group.generators().len());
    for g in group.generators() {
        let words: Vec<String> = g.images().iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", words.join(" "));
    }
    out
}

pub fn read_perm_group(text: &str) -> Result<PermGroup> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("empty group file"))?;
    let (n, g) = parse_two(header)?;
    let mut gens = Vec::with_capacity(g);
    for _ in 0..g {
        let line = lines.next().ok_or_else(|| Error::parse("truncated group file"))?;
        let images: Vec<u16> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse("bad image")))
            .collect::<Result<_>>()?;
        if images.len() != n {
            return Err(Error::parse("generator degree mismatch"));
        }
        gens.push(Perm::from_images(images).map_err(|e| Error::parse(e.to_string()))?);
    }
    PermGroup::from_generators(n, gens).map_err(|e| Error::parse(e.to_string()))
}
