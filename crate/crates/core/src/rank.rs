//! Generic rank of the 2x2 coefficient matrix of each missing edge.

use serde::Serialize;

use crate::error::IdentError;
use crate::model::MissingEdge;
use crate::pit::{FieldElem, PitSession};
use crate::probe::Probe;
use crate::ring::Ring;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRank {
    pub edge: MissingEdge,
    pub rank: u8,
}

#[derive(Serialize)]
struct EdgeRankJson {
    edge: [usize; 2],
    rank: u8,
}

impl Serialize for EdgeRank {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (i, j) = self.edge.endpoints();
        EdgeRankJson {
            edge: [i, j],
            rank: self.rank,
        }
        .serialize(s)
    }
}

/// `[[σ_pq, σ_iq], [σ_pj, σ_ij]]` at one probe point.
fn coefficient_matrix(probe: &Probe, point: usize, e: &MissingEdge) -> Option<[[FieldElem; 2]; 2]> {
    let MissingEdge::Pair { i, j, p, q } = *e else {
        return None;
    };
    let s = |a, b| probe.sigma_value(point, a, b);
    Some([[s(p, q), s(i, q)], [s(p, j), s(i, j)]])
}

/// Rank 2 iff the determinant is a nonzero polynomial, else rank 1 iff some
/// entry is, else rank 0. A nonzero value at any point is a proof.
pub fn edge_rank(
    probe: &Probe,
    e: &MissingEdge,
    session: &mut PitSession,
) -> Result<EdgeRank, IdentError> {
    let f = *probe.field();
    let mats: Vec<_> = (0..probe.points())
        .map(|k| {
            coefficient_matrix(probe, k, e).ok_or_else(|| {
                IdentError::Contract(format!("root-incident missing edge {e} has no rank"))
            })
        })
        .collect::<Result<_, _>>()?;
    let entry_degree = probe.sigma_degree().max(1);

    session.charge(2 * entry_degree)?;
    let det_nonzero = mats.iter().any(|m| {
        let det = f.sub(&f.mul(&m[0][0], &m[1][1]), &f.mul(&m[0][1], &m[1][0]));
        !det.is_zero()
    });
    if det_nonzero {
        return Ok(EdgeRank { edge: *e, rank: 2 });
    }
    for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        session.charge(entry_degree)?;
        if mats.iter().any(|m| !m[r][c].is_zero()) {
            return Ok(EdgeRank { edge: *e, rank: 1 });
        }
    }
    Ok(EdgeRank { edge: *e, rank: 0 })
}

/// Ranks of all non-root missing edges in lexicographic order.
pub fn rank_table(
    probe: &Probe,
    edges: &[MissingEdge],
    session: &mut PitSession,
) -> Result<Vec<EdgeRank>, IdentError> {
    edges.iter().map(|e| edge_rank(probe, e, session)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TreeScm;
    use crate::pit::PitConfig;

    fn ranks(json: &str, seed: u64) -> Vec<(usize, usize, u8)> {
        let m = TreeScm::from_json(json).unwrap();
        let mut s = PitSession::new(&PitConfig::new(seed, 1000)).unwrap();
        let probe = Probe::sample(&m, &mut s).unwrap();
        rank_table(&probe, &m.pair_missing(), &mut s)
            .unwrap()
            .into_iter()
            .map(|r| {
                let (i, j) = r.edge.endpoints();
                (i, j, r.rank)
            })
            .collect()
    }

    #[test]
    fn chain_edge_is_rank_one() {
        assert_eq!(ranks(r#"{"n":2,"parent":[null,0,1],"bidirected":[]}"#, 1), vec![(1, 2, 1)]);
    }

    #[test]
    fn m2_pair_edges_factorize() {
        // every non-root missing edge of this model has a row proportional
        // to another through a shared ancestor path, so none has rank 2
        let m2 = r#"{"n":4,"parent":[null,0,1,0,1],"bidirected":[[2,4],[1,4]]}"#;
        for seed in 0..3 {
            assert_eq!(ranks(m2, seed), vec![(1, 2, 1), (1, 3, 1), (2, 3, 1), (3, 4, 1)]);
        }
    }

    #[test]
    fn bidirected_parent_gives_rank_two() {
        // 0 <-> 3 adds ω03·(λ1 σ01 − σ11) to the determinant of {1,3}
        let json = r#"{"n":3,"parent":[null,0,1,1],"bidirected":[[1,2],[0,3],[0,1],[0,2]]}"#;
        assert_eq!(ranks(json, 2), vec![(1, 3, 2), (2, 3, 2)]);
    }

    #[test]
    fn root_edge_rejected() {
        let m = TreeScm::from_json(r#"{"n":1,"parent":[null,0],"bidirected":[]}"#).unwrap();
        let mut s = PitSession::new(&PitConfig::new(0, 100)).unwrap();
        let probe = Probe::sample(&m, &mut s).unwrap();
        assert!(edge_rank(&probe, &MissingEdge::Root { node: 1 }, &mut s).is_err());
    }
}
