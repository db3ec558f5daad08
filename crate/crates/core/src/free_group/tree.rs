//! A finite portion of the homogeneous tree of degree `q + 1` with a fixed end
//! `ω` and the contraction `c` that moves every vertex one step towards it.

use rayon::prelude::*;
use serde::Serialize;

use super::word::Word;
use super::{ball_size, BALL_CAP};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::scalar::Scalar;

/// Vertex id inside a [`TreePortion`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TreeVertex(pub usize);

#[derive(Clone, Debug)]
struct Node {
    /// `c(x)`; `None` only for the top of the stored spine.
    parent: Option<usize>,
    children: Vec<usize>,
    /// Increases by one along `c`.
    height: i64,
    on_spine: bool,
}

/// The ball of radius `R` around a base point `o` on the spine `[o, ω[`.
///
/// Every `c`-orbit reaches the spine inside the ball, and the spine is stored
/// up to `c^R(o)`, so confluence points of ball vertices are always present.
#[derive(Clone, Debug)]
pub struct TreePortion {
    q: usize,
    radius: usize,
    nodes: Vec<Node>,
    words: Option<Vec<Word>>,
}

impl TreePortion {
    /// Ball of radius `radius` in the tree of degree `q + 1`, built breadth first.
    pub fn ball(q: usize, radius: usize) -> Result<Self> {
        Self::ball_with_cap(q, radius, BALL_CAP)
    }

    pub fn ball_with_cap(q: usize, radius: usize, cap: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::param("q", "must be at least 2"));
        }
        let size = ball_size(q + 1, radius);
        if size > cap as u128 {
            return Err(Error::CapExceeded { what: "tree ball", size: size.min(usize::MAX as u128) as usize, cap });
        }
        let mut nodes = vec![Node { parent: None, children: Vec::new(), height: 0, on_spine: true }];
        let mut dist = vec![0usize];
        let mut next = 0;
        while next < nodes.len() {
            let v = next;
            next += 1;
            if dist[v] >= radius {
                continue;
            }
            if nodes[v].on_spine && nodes[v].parent.is_none() {
                let p = nodes.len();
                nodes.push(Node { parent: None, children: vec![v], height: nodes[v].height + 1, on_spine: true });
                dist.push(dist[v] + 1);
                nodes[v].parent = Some(p);
            }
            while nodes[v].children.len() < q {
                let c = nodes.len();
                nodes.push(Node { parent: Some(v), children: Vec::new(), height: nodes[v].height - 1, on_spine: false });
                dist.push(dist[v] + 1);
                nodes[v].children.push(c);
            }
        }
        Ok(TreePortion { q, radius, nodes, words: None })
    }

    /// The Cayley ball of `F_n` (a tree with `q = 2n − 1`), with `ω` the end of
    /// the ray `e, a₁⁻¹, a₁⁻², …`. Vertex ids follow the order of
    /// [`enumerate_ball`](super::enumerate_ball).
    pub fn cayley(generators: usize, radius: usize) -> Result<Self> {
        let words = super::enumerate_ball(generators, radius)?;
        let index: std::collections::HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let on_spine = |w: &Word| w.letters().iter().all(|&l| l == -1);
        let contract = |w: &Word| if on_spine(w) { w.push(-1).expect("spine words only hold a1^-1") } else { w.pop() };
        let mut nodes: Vec<Node> = words
            .iter()
            .map(|w| Node { parent: index.get(&contract(w)).copied(), children: Vec::new(), height: 0, on_spine: on_spine(w) })
            .collect();
        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                nodes[p].children.push(i);
            }
        }
        // Heights: the Busemann function of ω, zero at the identity.
        for (i, w) in words.iter().enumerate() {
            nodes[i].height = busemann(w);
        }
        Ok(TreePortion { q: 2 * generators - 1, radius, nodes, words: Some(words) })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = TreeVertex> {
        (0..self.nodes.len()).map(TreeVertex)
    }

    /// The base point `o`.
    pub fn root(&self) -> TreeVertex {
        TreeVertex(0)
    }

    pub fn word(&self, v: TreeVertex) -> Option<&Word> {
        self.words.as_ref().map(|w| &w[v.0])
    }

    fn check(&self, v: TreeVertex) -> Result<&Node> {
        self.nodes.get(v.0).ok_or(Error::OutOfRange { index: v.0, len: self.nodes.len() })
    }

    /// `c(x)` when it lies in the portion.
    pub fn contraction(&self, v: TreeVertex) -> Result<Option<TreeVertex>> {
        Ok(self.check(v)?.parent.map(TreeVertex))
    }

    pub fn neighbors(&self, v: TreeVertex) -> Result<Vec<TreeVertex>> {
        let n = self.check(v)?;
        Ok(n.parent.into_iter().chain(n.children.iter().copied()).map(TreeVertex).collect())
    }

    /// Smallest `(m, n)` with `cᵐ(x) ∈ [y, ω[` and `cⁿ(y) ∈ [x, ω[`; both
    /// orbits meet at `cᵐ(x) = cⁿ(y)`.
    pub fn mn_pair(&self, x: TreeVertex, y: TreeVertex) -> Result<(usize, usize)> {
        let (mut a, mut b) = (x.0, y.0);
        let (mut m, mut n) = (0, 0);
        let up = |v: usize| -> Result<usize> { self.check(TreeVertex(v))?.parent.ok_or(Error::OutOfRange { index: v, len: self.nodes.len() }) };
        self.check(x)?;
        self.check(y)?;
        while self.nodes[a].height < self.nodes[b].height {
            a = up(a)?;
            m += 1;
        }
        while self.nodes[b].height < self.nodes[a].height {
            b = up(b)?;
            n += 1;
        }
        while a != b {
            a = up(a)?;
            b = up(b)?;
            m += 1;
            n += 1;
        }
        Ok((m, n))
    }

    /// All pairs, indexed `[x][y]`.
    pub fn mn_table(&self) -> Result<Vec<Vec<(usize, usize)>>> {
        (0..self.len())
            .into_par_iter()
            .map(|x| (0..self.len()).map(|y| self.mn_pair(TreeVertex(x), TreeVertex(y))).collect())
            .collect()
    }
}

// Spine letters climb towards ω; every other letter descends.
fn busemann(w: &Word) -> i64 {
    let letters = w.letters();
    let spine_prefix = letters.iter().take_while(|&&l| l == -1).count();
    let off = (letters.len() - spine_prefix) as i64;
    spine_prefix as i64 - off
}

/// Number of triples `(x, y, z)` violating
/// `m(x,y) − n(x,y) = m(x,z) − n(x,z) + m(z,y) − n(z,y)`.
pub fn additivity_check(tree: &TreePortion) -> Result<usize> {
    let table = tree.mn_table()?;
    let d = |x: usize, y: usize| table[x][y].0 as i64 - table[x][y].1 as i64;
    let n = tree.len();
    Ok((0..n)
        .into_par_iter()
        .map(|x| {
            let mut bad = 0usize;
            for y in 0..n {
                for z in 0..n {
                    if d(x, y) != d(x, z) + d(z, y) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum())
}

/// `φ̃(x, y) = φ(m(x, y), n(x, y))` on the portion.
pub fn tree_lift_phi<T: Scalar>(tree: &TreePortion, phi: impl Fn(usize, usize) -> T + Sync) -> Result<Kernel<T>> {
    let table = tree.mn_table()?;
    Kernel::from_fn(tree.len(), |x, y| {
        let (m, n) = table[x][y];
        phi(m, n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_sizes() {
        assert_eq!(TreePortion::ball(3, 0).unwrap().len(), 1);
        assert_eq!(TreePortion::ball(3, 1).unwrap().len(), 5);
        assert_eq!(TreePortion::ball(3, 3).unwrap().len(), 53);
        assert_eq!(TreePortion::ball(2, 2).unwrap().len(), 10);
        assert!(TreePortion::ball_with_cap(3, 3, 50).is_err());
        for v in TreePortion::ball(4, 2).unwrap().vertices() {
            let t = TreePortion::ball(4, 2).unwrap();
            assert!(t.neighbors(v).unwrap().len() <= 5);
        }
    }

    #[test]
    fn simple_pairs() {
        let t = TreePortion::ball(3, 2).unwrap();
        let o = t.root();
        assert_eq!(t.mn_pair(o, o).unwrap(), (0, 0));
        let c = t.contraction(o).unwrap().unwrap();
        assert_eq!(t.mn_pair(o, c).unwrap(), (1, 0));
        assert_eq!(t.mn_pair(c, o).unwrap(), (0, 1));
        assert!(t.mn_pair(o, TreeVertex(999)).is_err());
    }

    #[test]
    fn cayley_tree_matches_generic() {
        let c = TreePortion::cayley(2, 3).unwrap();
        let g = TreePortion::ball(3, 3).unwrap();
        assert_eq!(c.len(), g.len());
        assert_eq!(additivity_check(&c).unwrap(), 0);
        let w = |l: Vec<i32>| c.vertices().find(|&v| c.word(v).unwrap().letters() == l.as_slice()).unwrap();
        assert_eq!(c.mn_pair(w(vec![1]), w(vec![])).unwrap(), (1, 0));
        assert_eq!(c.mn_pair(w(vec![]), w(vec![-1])).unwrap(), (1, 0));
        assert_eq!(c.mn_pair(w(vec![1]), w(vec![2])).unwrap(), (1, 1));
        assert_eq!(c.mn_pair(w(vec![-1, 2]), w(vec![1])).unwrap(), (1, 2));
    }

    #[test]
    fn additive_small() {
        assert_eq!(additivity_check(&TreePortion::ball(3, 2).unwrap()).unwrap(), 0);
    }

    #[test]
    fn lift_of_constant() {
        let t = TreePortion::ball(2, 2).unwrap();
        let k = tree_lift_phi(&t, |_, _| 1.0).unwrap();
        assert_eq!(k.matrix(), Kernel::constant(t.len(), 1.0).unwrap().matrix());
    }
}
