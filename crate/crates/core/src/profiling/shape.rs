//! Join-graph shape of a BGP.

use std::collections::HashMap;

use crate::labels::Shape;
use crate::sparql::{ParsedQuery, Term, TriplePattern};

/// Undirected multigraph with one edge per triple pattern, joining its
/// subject node to its object node. Edge `i` is pattern `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinGraph {
    pub nodes: Vec<Term>,
    pub edges: Vec<(usize, usize)>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.0[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

impl JoinGraph {
    pub fn from_patterns<'a, I: IntoIterator<Item = &'a TriplePattern>>(patterns: I) -> Self {
        let mut index: HashMap<&Term, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut node = |t: &'a Term, nodes: &mut Vec<Term>| {
            *index.entry(t).or_insert_with(|| {
                nodes.push(t.clone());
                nodes.len() - 1
            })
        };
        for p in patterns {
            let s = node(&p.subject, &mut nodes);
            let o = node(&p.object, &mut nodes);
            edges.push((s, o));
        }
        Self { nodes, edges }
    }

    pub fn from_query(q: &ParsedQuery) -> Self {
        Self::from_patterns(q.bgp())
    }

    /// Endpoint count per node; a self-loop counts twice.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    fn components_without(&self, skip: Option<usize>) -> UnionFind {
        let mut uf = UnionFind::new(self.nodes.len());
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if Some(i) != skip {
                uf.union(a, b);
            }
        }
        uf
    }

    pub fn component_count(&self) -> usize {
        let mut uf = self.components_without(None);
        (0..self.nodes.len()).filter(|&n| uf.find(n) == n).count()
    }

    /// Connected with exactly |V| - 1 edges, which rules out cycles,
    /// parallel edges and self-loops.
    pub fn is_tree(&self) -> bool {
        self.component_count() == 1 && self.edges.len() + 1 == self.nodes.len()
    }

    /// True if edge `e` lies on a cycle.
    fn edge_on_cycle(&self, e: usize) -> bool {
        let (a, b) = self.edges[e];
        if a == b {
            return true;
        }
        let mut uf = self.components_without(Some(e));
        uf.find(a) == uf.find(b)
    }

    fn on_cycle(&self, node: usize) -> bool {
        self.edges
            .iter()
            .enumerate()
            .any(|(i, &(a, b))| (a == node || b == node) && self.edge_on_cycle(i))
    }

    /// Lengths of the paths hanging off `hub` that run through degree-2
    /// nodes and end at a leaf.
    fn attached_chains(&self, hub: usize, deg: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a == b || (a != hub && b != hub) {
                continue;
            }
            let (mut prev_edge, mut current) = (i, if a == hub { b } else { a });
            let mut len = 1;
            while deg[current] == 2 && current != hub {
                let next = self
                    .edges
                    .iter()
                    .enumerate()
                    .find(|&(j, &(x, y))| j != prev_edge && (x == current || y == current));
                let Some((j, &(x, y))) = next else { break };
                prev_edge = j;
                current = if x == current { y } else { x };
                len += 1;
            }
            if deg[current] == 1 {
                out.push(len);
            }
        }
        out
    }

    /// First matching rule in the order Simple, Forrest, Chain, Star,
    /// Tree, Flower, Bouquet. Cyclic graphs without a node of degree 3
    /// or more match none and are reported as Flower.
    pub fn shape(&self) -> Shape {
        let m = self.edges.len();
        if m <= 1 {
            return Shape::Simple;
        }
        if self.component_count() >= 2 {
            return Shape::Forrest;
        }
        let deg = self.degrees();
        let tree = self.is_tree();
        if tree && deg.iter().all(|&d| d <= 2) {
            return Shape::Chain;
        }
        let star = deg
            .iter()
            .enumerate()
            .any(|(n, &d)| d == m && self.edges.iter().all(|&(a, b)| a == n || b == n));
        if star {
            return Shape::Star;
        }
        if tree {
            return Shape::Tree;
        }
        let hubs: Vec<usize> = (0..deg.len()).filter(|&n| deg[n] >= 3).collect();
        if let [hub] = hubs[..] {
            let long_chains = self.attached_chains(hub, &deg).iter().filter(|&&l| l >= 2).count();
            if self.on_cycle(hub) || long_chains >= 2 {
                return Shape::Flower;
            }
        }
        if hubs.len() >= 2 {
            return Shape::Bouquet;
        }
        Shape::Flower
    }
}

pub fn classify_shape(q: &ParsedQuery) -> Shape {
    JoinGraph::from_query(q).shape()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparql::parse_query;

    fn shape(body: &str) -> Shape {
        classify_shape(&parse_query(&format!("SELECT * WHERE {{ {body} }}")).unwrap())
    }

    #[test]
    fn basic_shapes() {
        assert_eq!(shape("?s <http://x/p> ?o"), Shape::Simple);
        assert_eq!(
            shape("?a <http://x/p> ?b . ?b <http://x/q> ?c . ?c <http://x/r> ?d"),
            Shape::Chain
        );
        assert_eq!(
            shape("?s <http://x/p> ?x . ?s <http://x/q> ?y . ?s <http://x/r> ?z"),
            Shape::Star
        );
        assert_eq!(shape("?a <http://x/p> ?b . ?c <http://x/q> ?d"), Shape::Forrest);
    }

    #[test]
    fn two_patterns_sharing_subject_is_chain() {
        // A path of two edges satisfies the Chain rule before Star.
        assert_eq!(shape("?s <http://x/p> ?x . ?s <http://x/q> ?y"), Shape::Chain);
    }

    #[test]
    fn tree_with_branching_below_root() {
        let body = "?a <http://x/p> ?b . ?a <http://x/p> ?c . ?a <http://x/p> ?d . ?b <http://x/q> ?e";
        assert_eq!(shape(body), Shape::Tree);
    }

    #[test]
    fn hub_with_cycle_is_flower() {
        let body = "?h <http://x/p> ?a . ?a <http://x/p> ?b . ?b <http://x/p> ?h . ?h <http://x/p> ?z";
        assert_eq!(shape(body), Shape::Flower);
    }

    #[test]
    fn two_hubs_with_cycle_is_bouquet() {
        let body = "?a <http://x/p> ?b . ?b <http://x/p> ?a . ?a <http://x/p> ?c . ?b <http://x/p> ?d";
        assert_eq!(shape(body), Shape::Bouquet);
    }

    #[test]
    fn plain_cycle_falls_back_to_flower() {
        let body = "?a <http://x/p> ?b . ?b <http://x/p> ?c . ?c <http://x/p> ?a";
        assert_eq!(shape(body), Shape::Flower);
        // Both patterns of a two-cycle touch ?a, which has degree 2.
        assert_eq!(shape("?a <http://x/p> ?b . ?b <http://x/p> ?a"), Shape::Star);
    }

    #[test]
    fn self_loop_pair() {
        // Both patterns touch ?a, but the self-loop counts twice.
        assert_eq!(shape("?a <http://x/p> ?a . ?a <http://x/p> ?b"), Shape::Flower);
    }
}
