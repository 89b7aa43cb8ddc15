//! Faces of the real braid arrangement as ordered set partitions.
//!
//! A face of the arrangement `{x_i = x_j}` in `R^n` is recorded by the weak
//! order it imposes on the coordinates: `1<3<2` is the chamber
//! `x_1 < x_3 < x_2`, `1,3<2` is the wall `x_1 = x_3 < x_2`, and `1,2,3` is the
//! minimal diagonal. Blocks are listed from the smallest coordinate value to
//! the largest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest label count for which faces are enumerated.
pub const MAX_FACE_N: usize = 4;

/// A bijection of `{1..n}`, stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    /// The transposition swapping `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::invalid(format!("transposition ({i} {j}) outside 1..={n}")));
        }
        let mut p = Self::identity(n);
        p.images.swap(i - 1, j - 1);
        Ok(p)
    }

    /// `images[k-1]` is the image of `k`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let set: BTreeSet<usize> = images.iter().copied().collect();
        if set.len() != n || set.iter().any(|&v| v == 0 || v > n) {
            return Err(Error::invalid(format!("{images:?} is not a permutation of 1..={n}")));
        }
        Ok(Permutation { images })
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, label: usize) -> usize {
        self.images[label - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`: apply `other` first.
    pub fn after(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.n(), other.n());
        Permutation { images: other.images.iter().map(|&k| self.apply(k)).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v - 1] = k + 1;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &v)| v == k + 1)
    }

    /// All permutations of `{1..n}` in lexicographic order of image lists.
    pub fn all(n: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            let n = used.len();
            if prefix.len() == n {
                out.push(Permutation { images: prefix.clone() });
                return;
            }
            for v in 1..=n {
                if !used[v - 1] {
                    used[v - 1] = true;
                    prefix.push(v);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[v - 1] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Cycle notation, `id` for the identity.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        let mut seen = vec![false; self.n()];
        for start in 1..=self.n() {
            if seen[start - 1] || self.apply(start) == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start - 1] = true;
            let mut k = self.apply(start);
            while k != start {
                seen[k - 1] = true;
                cycle.push(k);
                k = self.apply(k);
            }
            let parts: Vec<String> = cycle.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// Side of a wall `x_i = x_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// `x_i < x_j`.
    Negative,
    /// `x_i > x_j`.
    Positive,
}

/// An ordered set partition of `{1..n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    blocks: Vec<Vec<usize>>,
}

impl Face {
    /// Validates and normalizes (each block sorted).
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks = blocks;
        let mut seen = BTreeSet::new();
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::invalid("face has an empty block"));
            }
            b.sort_unstable();
            for &x in b.iter() {
                if !seen.insert(x) {
                    return Err(Error::invalid(format!("label {x} appears twice")));
                }
            }
        }
        let n = seen.len();
        if n == 0 || seen.iter().copied().ne(1..=n) {
            return Err(Error::invalid(format!("blocks do not partition 1..={n}")));
        }
        Ok(Face { blocks })
    }

    /// The minimal diagonal `x_1 = … = x_n`.
    pub fn minimal(n: usize) -> Self {
        Face { blocks: vec![(1..=n).collect()] }
    }

    /// The chamber listing labels in the given order.
    pub fn chamber(order: &[usize]) -> Result<Self> {
        Face::new(order.iter().map(|&x| vec![x]).collect())
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn codim(&self) -> usize {
        self.n() - self.num_blocks()
    }

    pub fn is_chamber(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    pub fn is_minimal(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn block_of(&self, label: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&label))
    }

    fn check_same_n(&self, other: &Face) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::invalid(format!("faces {self} and {other} live in different dimensions")));
        }
        Ok(())
    }

    /// Whether `self` lies in the closure of `g`, i.e. merging consecutive
    /// blocks of `g` yields `self`.
    pub fn closure_leq(&self, g: &Face) -> Result<bool> {
        self.check_same_n(g)?;
        let mut gi = g.blocks.iter();
        for fb in &self.blocks {
            let mut acc: Vec<usize> = Vec::new();
            while acc.len() < fb.len() {
                match gi.next() {
                    Some(b) => acc.extend(b),
                    None => return Ok(false),
                }
            }
            acc.sort_unstable();
            if &acc != fb {
                return Ok(false);
            }
        }
        Ok(gi.next().is_none())
    }

    /// All faces covering `self`: one block split into two consecutive ones.
    pub fn covers(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for (k, b) in self.blocks.iter().enumerate() {
            if b.len() < 2 {
                continue;
            }
            // proper nonempty subsets by bitmask
            for mask in 1..(1u32 << b.len()) - 1 {
                let first: Vec<usize> = (0..b.len()).filter(|t| mask >> t & 1 == 1).map(|t| b[t]).collect();
                let second: Vec<usize> = (0..b.len()).filter(|t| mask >> t & 1 == 0).map(|t| b[t]).collect();
                let mut blocks = self.blocks[..k].to_vec();
                blocks.push(first);
                blocks.push(second);
                blocks.extend_from_slice(&self.blocks[k + 1..]);
                out.push(Face { blocks });
            }
        }
        out.sort();
        out
    }

    fn wall_block(&self, i: usize, j: usize) -> Result<usize> {
        let bi = self.block_of(i).ok_or_else(|| Error::invalid(format!("label {i} not in face {self}")))?;
        let bj = self.block_of(j).ok_or_else(|| Error::invalid(format!("label {j} not in face {self}")))?;
        if i == j || bi != bj {
            return Err(Error::invalid(format!("face {self} does not lie on the wall x_{i} = x_{j}")));
        }
        Ok(bi)
    }

    /// Covers of `self` lying strictly on one side of the wall `x_i = x_j`.
    pub fn covers_in_halfspace(&self, i: usize, j: usize, side: Side) -> Result<Vec<Face>> {
        self.wall_block(i, j)?;
        Ok(self
            .covers()
            .into_iter()
            .filter(|c| {
                let (bi, bj) = (c.block_of(i).unwrap(), c.block_of(j).unwrap());
                match side {
                    Side::Negative => bi < bj,
                    Side::Positive => bi > bj,
                }
            })
            .collect())
    }

    /// Moves the singleton `{i}` immediately before the rest of its block,
    /// the minimal step to the negative side of `x_i = x_j`.
    pub fn split_step(&self, i: usize, j: usize) -> Result<Face> {
        self.wall_block(i, j)?;
        self.split_off(&[i], Side::Negative)
    }

    /// Splits `part` out of the block containing it, placing it before
    /// (`Negative`) or after (`Positive`) the remainder.
    pub fn split_off(&self, part: &[usize], side: Side) -> Result<Face> {
        let first = *part.first().ok_or_else(|| Error::invalid("empty part"))?;
        let k = self.block_of(first).ok_or_else(|| Error::invalid(format!("label {first} not in face {self}")))?;
        let block = &self.blocks[k];
        if part.iter().any(|x| !block.contains(x)) || part.len() >= block.len() {
            return Err(Error::invalid(format!("{part:?} is not a proper part of a block of {self}")));
        }
        let mut p = part.to_vec();
        p.sort_unstable();
        let rest: Vec<usize> = block.iter().copied().filter(|x| !p.contains(x)).collect();
        let (a, b) = match side {
            Side::Negative => (p, rest),
            Side::Positive => (rest, p),
        };
        let mut blocks = self.blocks[..k].to_vec();
        blocks.push(a);
        blocks.push(b);
        blocks.extend_from_slice(&self.blocks[k + 1..]);
        Ok(Face { blocks })
    }

    /// Relabels every block elementwise; block order is kept.
    pub fn act(&self, sigma: &Permutation) -> Face {
        assert_eq!(sigma.n(), self.n(), "permutation size must match face");
        let mut blocks: Vec<Vec<usize>> =
            self.blocks.iter().map(|b| b.iter().map(|&x| sigma.apply(x)).collect()).collect();
        for b in &mut blocks {
            b.sort_unstable();
        }
        Face { blocks }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.blocks.iter().map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
        write!(f, "{}", parts.join("<"))
    }
}

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Face({self})")
    }
}

impl FromStr for Face {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .trim()
            .split('<')
            .map(|b| {
                b.split(',')
                    .map(|x| {
                        x.trim().parse::<usize>().map_err(|_| Error::invalid(format!("bad label `{x}` in face `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Face::new(blocks)
    }
}

/// All faces for a given `n` with their covering relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacePoset {
    n: usize,
    faces: Vec<Face>,
    index: BTreeMap<Face, usize>,
    covers: Vec<(usize, usize)>,
}

impl FacePoset {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Faces sorted by block count, then lexicographically.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Covering pairs `(lower, upper)` as indices into [`faces`](Self::faces).
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn cover_faces(&self) -> impl Iterator<Item = (&Face, &Face)> {
        self.covers.iter().map(|&(a, b)| (&self.faces[a], &self.faces[b]))
    }

    pub fn index_of(&self, f: &Face) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn chambers(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.is_chamber())
    }

    pub fn minimal(&self) -> &Face {
        &self.faces[0]
    }

    pub fn is_cover(&self, f: &Face, g: &Face) -> bool {
        match (self.index_of(f), self.index_of(g)) {
            (Some(a), Some(b)) => self.covers.binary_search(&(a, b)).is_ok(),
            _ => false,
        }
    }

    /// All maximal chains of covers from `f` up to `g` (empty if `f ≰ g`).
    pub fn chains(&self, f: &Face, g: &Face) -> Vec<Vec<Face>> {
        let mut out = Vec::new();
        if !f.closure_leq(g).unwrap_or(false) {
            return out;
        }
        let mut stack = vec![vec![f.clone()]];
        while let Some(chain) = stack.pop() {
            let last = chain.last().unwrap();
            if last == g {
                out.push(chain);
                continue;
            }
            for c in last.covers() {
                if c.closure_leq(g).unwrap_or(false) {
                    let mut next = chain.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
        out.sort();
        out
    }
}

/// Enumerates every face of the braid arrangement for `1 ≤ n ≤ 4`.
pub fn enumerate_faces(n: usize) -> Result<FacePoset> {
    if n == 0 || n > MAX_FACE_N {
        return Err(Error::UnsupportedDimension { n, reason: "face enumeration supports 1 ≤ n ≤ 4" });
    }
    fn rec(remaining: &[usize], prefix: &mut Vec<Vec<usize>>, out: &mut Vec<Face>) {
        if remaining.is_empty() {
            out.push(Face { blocks: prefix.clone() });
            return;
        }
        let m = remaining.len();
        for mask in 1u32..(1 << m) {
            let block: Vec<usize> = (0..m).filter(|t| mask >> t & 1 == 1).map(|t| remaining[t]).collect();
            let rest: Vec<usize> = (0..m).filter(|t| mask >> t & 1 == 0).map(|t| remaining[t]).collect();
            prefix.push(block);
            rec(&rest, prefix, out);
            prefix.pop();
        }
    }
    let labels: Vec<usize> = (1..=n).collect();
    let mut faces = Vec::new();
    rec(&labels, &mut Vec::new(), &mut faces);
    faces.sort_by(|a, b| (a.num_blocks(), a).cmp(&(b.num_blocks(), b)));
    let index: BTreeMap<Face, usize> = faces.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let mut covers: Vec<(usize, usize)> = faces
        .iter()
        .enumerate()
        .flat_map(|(a, f)| f.covers().into_iter().map(|c| (a, index[&c])).collect::<Vec<_>>())
        .collect();
    covers.sort_unstable();
    Ok(FacePoset { n, faces, index, covers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Face {
        s.parse().unwrap()
    }

    /// Ordered Bell numbers by the recurrence a(n) = Σ C(n,k) a(n-k).
    fn fubini(n: usize) -> usize {
        let mut a = vec![1usize];
        for m in 1..=n {
            let mut binom = 1usize;
            let mut s = 0;
            for k in 1..=m {
                binom = binom * (m - k + 1) / k;
                s += binom * a[m - k];
            }
            a.push(s);
        }
        a[n]
    }

    /// Coordinates of a representative point: block index per label.
    fn point(face: &Face) -> Vec<usize> {
        (1..=face.n()).map(|x| face.block_of(x).unwrap()).collect()
    }

    #[test]
    fn face_counts() {
        for (n, expect) in [(1, 1), (2, 3), (3, 13), (4, 75)] {
            let p = enumerate_faces(n).unwrap();
            assert_eq!(p.faces().len(), expect);
            assert_eq!(fubini(n), expect);
        }
        assert!(enumerate_faces(0).is_err());
        assert!(enumerate_faces(5).is_err());
    }

    #[test]
    fn chambers_and_minimum() {
        let p = enumerate_faces(3).unwrap();
        let chambers: Vec<_> = p.chambers().cloned().collect();
        assert_eq!(chambers.len(), 6);
        assert!(chambers.contains(&f("1<3<2")));
        assert_eq!(p.minimal(), &f("1,2,3"));
        for g in p.faces() {
            assert!(p.minimal().closure_leq(g).unwrap());
            let maximal = p.faces().iter().all(|h| h == g || !g.closure_leq(h).unwrap());
            assert_eq!(maximal, g.is_chamber());
        }
    }

    #[test]
    fn closure_examples() {
        assert!(f("1,2,3").closure_leq(&f("1<3<2")).unwrap());
        assert!(f("1<2,3").closure_leq(&f("1<3<2")).unwrap());
        assert!(!f("1,2<3").closure_leq(&f("1<2,3")).unwrap());
        assert!(f("1,2").closure_leq(&f("1<2,3")).is_err());
    }

    #[test]
    fn closure_is_a_partial_order() {
        for n in 1..=3 {
            let p = enumerate_faces(n).unwrap();
            for a in p.faces() {
                assert!(a.closure_leq(a).unwrap());
                for b in p.faces() {
                    if a != b && a.closure_leq(b).unwrap() {
                        assert!(!b.closure_leq(a).unwrap());
                    }
                    for c in p.faces() {
                        if a.closure_leq(b).unwrap() && b.closure_leq(c).unwrap() {
                            assert!(a.closure_leq(c).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn halfspace_covers_examples() {
        assert_eq!(f("1,2,3").covers_in_halfspace(3, 2, Side::Negative).unwrap(), vec![f("1,3<2"), f("3<1,2")]);
        assert_eq!(f("1<2,3").covers_in_halfspace(3, 2, Side::Negative).unwrap(), vec![f("1<3<2")]);
        assert_eq!(f("1,2<3").covers_in_halfspace(1, 2, Side::Negative).unwrap(), vec![f("1<2<3")]);
        assert!(f("1<2,3").covers_in_halfspace(1, 2, Side::Negative).is_err());
    }

    #[test]
    fn halfspace_covers_match_point_oracle() {
        for n in 2..=4 {
            let p = enumerate_faces(n).unwrap();
            for face in p.faces() {
                // brute-force covers: faces above with one more block
                let brute: Vec<&Face> = p
                    .faces()
                    .iter()
                    .filter(|g| g.num_blocks() == face.num_blocks() + 1 && face.closure_leq(g).unwrap())
                    .collect();
                let all = face.covers();
                assert_eq!(all.iter().collect::<Vec<_>>(), brute);
                for i in 1..=n {
                    for j in 1..=n {
                        if i == j || face.block_of(i) != face.block_of(j) {
                            continue;
                        }
                        let neg = face.covers_in_halfspace(i, j, Side::Negative).unwrap();
                        let pos = face.covers_in_halfspace(i, j, Side::Positive).unwrap();
                        for c in &all {
                            let x = point(c);
                            assert_eq!(neg.contains(c), x[i - 1] < x[j - 1]);
                            assert_eq!(pos.contains(c), x[i - 1] > x[j - 1]);
                        }
                        let together = all.iter().filter(|c| c.block_of(i) == c.block_of(j)).count();
                        assert_eq!(neg.len() + pos.len() + together, all.len());
                    }
                }
            }
        }
    }

    #[test]
    fn split_step_examples() {
        assert_eq!(f("1,2,3").split_step(3, 2).unwrap(), f("3<1,2"));
        assert_eq!(f("1,2").split_step(1, 2).unwrap(), f("1<2"));
        // descending outermost collision first reaches the chamber x_1 < x_3 < x_2
        let wall = f("1,2,3").split_step(1, 2).unwrap();
        assert_eq!(wall, f("1<2,3"));
        assert_eq!(wall.split_step(3, 2).unwrap(), f("1<3<2"));
        assert!(f("1<2,3").split_step(1, 2).is_err());
    }

    #[test]
    fn permutation_action_examples() {
        let id = Permutation::identity(2);
        assert_eq!(f("1<2").act(&id), f("1<2"));
        let t = Permutation::transposition(2, 1, 2).unwrap();
        assert_eq!(f("1<2").act(&t), f("2<1"));
        let c = Permutation::from_images(vec![2, 3, 1]).unwrap();
        assert_eq!(f("1<2,3").act(&c), f("2<1,3"));
        assert_eq!(c.to_string(), "(1 2 3)");
    }

    #[test]
    fn permutation_action_is_poset_automorphism() {
        for n in 1..=3 {
            let p = enumerate_faces(n).unwrap();
            for s in Permutation::all(n) {
                for a in p.faces() {
                    for b in p.faces() {
                        assert_eq!(a.closure_leq(b).unwrap(), a.act(&s).closure_leq(&b.act(&s)).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn permutation_group_laws() {
        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        let face = f("1<2,3");
        for a in &all {
            assert!(a.after(&a.inverse()).is_identity());
            for b in &all {
                assert_eq!(face.act(&b.after(a)), face.act(a).act(b));
            }
        }
        assert!(Permutation::from_images(vec![1, 1]).is_err());
    }

    #[test]
    fn face_text_roundtrip() {
        for n in 1..=4 {
            for face in enumerate_faces(n).unwrap().faces() {
                assert_eq!(face.to_string().parse::<Face>().unwrap(), *face);
            }
        }
        assert!("1<1".parse::<Face>().is_err());
        assert!("1<3".parse::<Face>().is_err());
        assert!("".parse::<Face>().is_err());
    }

    #[test]
    fn chains_between_minimum_and_chamber() {
        let p = enumerate_faces(3).unwrap();
        let chains = p.chains(&f("1,2,3"), &f("1<3<2"));
        assert_eq!(chains.len(), 2);
        assert!(p.chains(&f("1<2,3"), &f("2<1<3")).is_empty());
    }
}
