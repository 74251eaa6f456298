//! Leader-first-follower sensing graphs, the formation graph they induce and
//! the per-follower triangle set.
//!
//! Agent `0` is the leader, agent `1` the first follower; every later agent
//! senses exactly two lower-indexed agents. Violations are reported with
//! 1-based agent numbers.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::geometry::{bearing, Configuration, EPS_DEGENERATE};

/// Collinearity threshold on `|det([b_ki, b_kj])|`.
pub const EPS_COLLINEAR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingGraph {
    out_neighbors: Vec<Vec<usize>>,
}

impl SensingGraph {
    /// Build from 0-based out-neighbor lists. No LFF checks are made here;
    /// see [`validate_lff`].
    pub fn new(out_neighbors: Vec<Vec<usize>>) -> Self {
        SensingGraph { out_neighbors }
    }

    /// Build from 1-based out-neighbor lists, as used in scenario files.
    pub fn from_one_based(lists: &[Vec<usize>]) -> Result<Self> {
        let n = lists.len();
        let mut bad = Vec::new();
        let mut out = Vec::with_capacity(n);
        for (a, list) in lists.iter().enumerate() {
            let mut row = Vec::with_capacity(list.len());
            for &nb in list {
                if nb == 0 || nb > n {
                    bad.push(LffViolation {
                        agent: a + 1,
                        rule: LffRule::NeighborOutOfRange { neighbor: nb, n },
                    });
                } else {
                    row.push(nb - 1);
                }
            }
            out.push(row);
        }
        if bad.is_empty() {
            Ok(SensingGraph::new(out))
        } else {
            Err(Error::InvalidSensingGraph(bad))
        }
    }

    /// The standard minimal LFF graph on `n` agents used in tests: agent `k`
    /// senses `k-1` and `k-2`.
    pub fn chain(n: usize) -> Self {
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(match k {
                0 => Vec::new(),
                1 => alloc::vec![0],
                _ => alloc::vec![k - 2, k - 1],
            });
        }
        SensingGraph::new(out)
    }

    pub fn n(&self) -> usize {
        self.out_neighbors.len()
    }

    pub fn out_neighbors(&self, agent: usize) -> &[usize] {
        &self.out_neighbors[agent]
    }

    /// Out-neighbor lists converted to 1-based numbering.
    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.out_neighbors
            .iter()
            .map(|row| row.iter().map(|&j| j + 1).collect())
            .collect()
    }

    /// Directed edges `(from, to)`, 0-based.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LffRule {
    TooFewAgents { n: usize },
    LeaderHasNeighbors { count: usize },
    FirstFollowerNotLeader { count: usize },
    FollowerDegree { count: usize },
    HigherIndexEdge { to: usize },
    SelfLoop,
    DuplicateNeighbor { neighbor: usize },
    NeighborOutOfRange { neighbor: usize, n: usize },
}

/// One broken LFF rule. `agent` is 1-based; so are indices inside `rule`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LffViolation {
    pub agent: usize,
    pub rule: LffRule,
}

impl fmt::Display for LffViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.agent;
        match self.rule {
            LffRule::TooFewAgents { n } => {
                write!(f, "an LFF graph needs at least 3 agents, got {n}")
            }
            LffRule::LeaderHasNeighbors { count } => {
                write!(f, "agent 1 (leader) must sense no one, senses {count}")
            }
            LffRule::FirstFollowerNotLeader { count } => write!(
                f,
                "agent 2 (first follower) must sense exactly agent 1, has {count} neighbor(s)"
            ),
            LffRule::FollowerDegree { count } => {
                write!(f, "agent {a} must sense exactly 2 agents, senses {count}")
            }
            LffRule::HigherIndexEdge { to } => write!(f, "edge ({a},{to}) points to higher index"),
            LffRule::SelfLoop => write!(f, "agent {a} senses itself"),
            LffRule::DuplicateNeighbor { neighbor } => {
                write!(f, "agent {a} lists neighbor {neighbor} twice")
            }
            LffRule::NeighborOutOfRange { neighbor, n } => {
                write!(f, "agent {a} lists neighbor {neighbor} outside 1..={n}")
            }
        }
    }
}

/// Check the LFF conditions. Returns every violation found.
pub fn validate_lff(g: &SensingGraph) -> core::result::Result<(), Vec<LffViolation>> {
    let n = g.n();
    let mut v = Vec::new();
    if n < 3 {
        v.push(LffViolation {
            agent: 1,
            rule: LffRule::TooFewAgents { n },
        });
    }
    for (a, row) in g.out_neighbors.iter().enumerate() {
        let agent = a + 1;
        match a {
            0 if !row.is_empty() => v.push(LffViolation {
                agent,
                rule: LffRule::LeaderHasNeighbors { count: row.len() },
            }),
            1 if row.len() != 1 || (row[0] != 0 && row[0] != 1) => v.push(LffViolation {
                agent,
                rule: LffRule::FirstFollowerNotLeader { count: row.len() },
            }),
            a if a >= 2 && row.len() != 2 => v.push(LffViolation {
                agent,
                rule: LffRule::FollowerDegree { count: row.len() },
            }),
            _ => {}
        }
        let mut seen = BTreeSet::new();
        for &j in row {
            if j >= n {
                v.push(LffViolation {
                    agent,
                    rule: LffRule::NeighborOutOfRange { neighbor: j + 1, n },
                });
                continue;
            }
            if j == a {
                v.push(LffViolation {
                    agent,
                    rule: LffRule::SelfLoop,
                });
            } else if j > a {
                v.push(LffViolation {
                    agent,
                    rule: LffRule::HigherIndexEdge { to: j + 1 },
                });
            }
            if !seen.insert(j) {
                v.push(LffViolation {
                    agent,
                    rule: LffRule::DuplicateNeighbor { neighbor: j + 1 },
                });
            }
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn require_lff(g: &SensingGraph) -> Result<()> {
    validate_lff(g).map_err(Error::InvalidSensingGraph)
}

/// Undirected formation graph: every sensing edge plus the edge joining each
/// follower's two neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormationGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl FormationGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(low, high)` pairs, 0-based, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }
}

pub fn build_formation_graph(g: &SensingGraph) -> Result<FormationGraph> {
    require_lff(g)?;
    let mut edges = BTreeSet::new();
    for (i, j) in g.edges() {
        edges.insert((i.min(j), i.max(j)));
    }
    for row in g.out_neighbors.iter().skip(2) {
        let (a, b) = (row[0], row[1]);
        edges.insert((a.min(b), a.max(b)));
    }
    Ok(FormationGraph { n: g.n(), edges })
}

/// Triangle `[k]`: follower `k` with its two neighbors `i < j < k`
/// (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triangle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Triangle {
    pub fn follower(&self) -> usize {
        self.k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleSet {
    n: usize,
    triangles: Vec<Triangle>,
}

impl TriangleSet {
    /// Agent count of the graph the set came from.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Triangle> {
        self.triangles.iter()
    }

    pub fn as_slice(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Triangle whose follower is agent `k` (0-based, `k ≥ 2`).
    pub fn for_follower(&self, k: usize) -> Option<&Triangle> {
        k.checked_sub(2).and_then(|idx| self.triangles.get(idx))
    }
}

pub fn triangle_set(g: &SensingGraph) -> Result<TriangleSet> {
    require_lff(g)?;
    let triangles = g
        .out_neighbors
        .iter()
        .enumerate()
        .skip(2)
        .map(|(k, row)| Triangle {
            i: row[0].min(row[1]),
            j: row[0].max(row[1]),
            k,
        })
        .collect();
    Ok(TriangleSet {
        n: g.n(),
        triangles,
    })
}

/// First agent (0-based) at which `p_star` fails strong nondegeneracy.
/// Agent `1` is reported when the leader and first follower coincide.
pub fn first_degenerate_agent(p_star: &Configuration, g: &SensingGraph) -> Option<usize> {
    if p_star.len() != g.n() || g.n() < 2 {
        return Some(0);
    }
    if p_star[0].distance(p_star[1]) <= EPS_DEGENERATE {
        return Some(1);
    }
    for k in 2..g.n() {
        let row = g.out_neighbors(k);
        if row.len() != 2 {
            return Some(k);
        }
        let pk = p_star[k];
        let ok = match (bearing(pk, p_star[row[0]]), bearing(pk, p_star[row[1]])) {
            (Ok(a), Ok(b)) => a.cross(b).abs() > EPS_COLLINEAR,
            _ => false,
        };
        if !ok {
            return Some(k);
        }
    }
    None
}

pub fn check_strong_nondegeneracy(p_star: &Configuration, g: &SensingGraph) -> bool {
    first_degenerate_agent(p_star, g).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn minimal() -> SensingGraph {
        SensingGraph::from_one_based(&[vec![], vec![1], vec![1, 2]]).unwrap()
    }

    fn six_agent() -> SensingGraph {
        SensingGraph::from_one_based(&[
            vec![],
            vec![1],
            vec![1, 2],
            vec![2, 3],
            vec![1, 4],
            vec![1, 4],
        ])
        .unwrap()
    }

    #[test]
    fn minimal_lff_is_valid() {
        assert_eq!(validate_lff(&minimal()), Ok(()));
        assert_eq!(validate_lff(&six_agent()), Ok(()));
    }

    #[test]
    fn upward_edge_is_reported() {
        let g = SensingGraph::from_one_based(&[vec![], vec![3], vec![1, 2]]).unwrap();
        let v = validate_lff(&g).unwrap_err();
        assert!(v
            .iter()
            .any(|x| x.to_string() == "edge (2,3) points to higher index"));
    }

    #[test]
    fn other_violations() {
        let g = SensingGraph::from_one_based(&[vec![2], vec![1, 2], vec![3, 3, 1]]).unwrap();
        let v = validate_lff(&g).unwrap_err();
        let rules: Vec<_> = v.iter().map(|x| x.rule).collect();
        assert!(rules.contains(&LffRule::LeaderHasNeighbors { count: 1 }));
        assert!(rules.contains(&LffRule::FirstFollowerNotLeader { count: 2 }));
        assert!(rules.contains(&LffRule::FollowerDegree { count: 3 }));
        assert!(rules.contains(&LffRule::SelfLoop));
        assert!(rules.contains(&LffRule::DuplicateNeighbor { neighbor: 3 }));
        assert!(SensingGraph::from_one_based(&[vec![], vec![0]]).is_err());
        assert!(validate_lff(&SensingGraph::chain(2)).is_err());
    }

    #[test]
    fn formation_graph_closure() {
        let f = build_formation_graph(&minimal()).unwrap();
        let e: Vec<_> = f.edges().collect();
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 2)]);

        // n = 4, N4 = {2,3}: {2,3} already present as the sensing edge 3→2
        let g = SensingGraph::from_one_based(&[vec![], vec![1], vec![1, 2], vec![2, 3]]).unwrap();
        let f = build_formation_graph(&g).unwrap();
        assert!(f.contains(1, 2));
        assert_eq!(f.edge_count(), 5);

        // N3 = {1,2}, N4 = {1,3}: closure {1,3} already sensed
        let g = SensingGraph::from_one_based(&[vec![], vec![1], vec![1, 2], vec![1, 3]]).unwrap();
        assert_eq!(build_formation_graph(&g).unwrap().edge_count(), 5);
        // N5 = {2,4} adds the closure edge {2,4}
        let g =
            SensingGraph::from_one_based(&[vec![], vec![1], vec![1, 2], vec![1, 3], vec![2, 4]])
                .unwrap();
        let f = build_formation_graph(&g).unwrap();
        assert!(f.contains(1, 3));
        assert_eq!(f.edge_count(), 8);
    }

    #[test]
    fn six_agent_triangles() {
        let ts = triangle_set(&six_agent()).unwrap();
        let t: Vec<_> = ts.iter().map(|t| (t.i + 1, t.j + 1, t.k + 1)).collect();
        assert_eq!(t, vec![(1, 2, 3), (2, 3, 4), (1, 4, 5), (1, 4, 6)]);
        let f = build_formation_graph(&six_agent()).unwrap();
        for tr in ts.iter() {
            assert!(f.contains(tr.i, tr.j) && f.contains(tr.i, tr.k) && f.contains(tr.j, tr.k));
        }
        assert_eq!(ts.for_follower(4).unwrap().k, 4);
        assert!(ts.for_follower(1).is_none());
    }

    #[test]
    fn strong_nondegeneracy() {
        let eq = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.75f64.sqrt())]).unwrap();
        assert!(check_strong_nondegeneracy(&eq, &minimal()));
        let col = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.4, 0.0)]).unwrap();
        assert!(!check_strong_nondegeneracy(&col, &minimal()));
        let same = Configuration::from_xy(&[(0.0, 0.0), (0.0, 0.0), (0.4, 1.0)]).unwrap();
        assert!(!check_strong_nondegeneracy(&same, &minimal()));
    }

    fn random_lff() -> impl Strategy<Value = SensingGraph> {
        (3usize..12).prop_flat_map(|n| {
            proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), n - 2).prop_map(move |picks| {
                let mut rows = vec![vec![], vec![0]];
                for (k, (a, b)) in picks.into_iter().enumerate() {
                    let k = k + 2;
                    let i = (a * k as f64) as usize % k;
                    let mut j = (b * (k - 1) as f64) as usize % (k - 1);
                    if j >= i {
                        j += 1;
                    }
                    rows.push(vec![i, j]);
                }
                SensingGraph::new(rows)
            })
        })
    }

    proptest! {
        #[test]
        fn lff_counts(g in random_lff()) {
            prop_assert_eq!(validate_lff(&g), Ok(()));
            let n = g.n();
            prop_assert_eq!(g.edges().count(), 2 * n - 3);
            let ts = triangle_set(&g).unwrap();
            prop_assert_eq!(ts.len(), n - 2);
            for k in 2..n {
                prop_assert_eq!(ts.iter().filter(|t| t.k == k).count(), 1);
            }
            let f1 = build_formation_graph(&g).unwrap();
            let f2 = build_formation_graph(&g).unwrap();
            prop_assert_eq!(f1, f2);
        }
    }
}
